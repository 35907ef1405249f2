#include <algorithm>
#include <set>
#include <utility>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "ssx/catalog.hpp"
#include "ssx/dac.hpp"
#include "ssx/errors.hpp"
#include "ssx/invariants.hpp"
#include "ssx/rng.hpp"
#include "ssx/threads.hpp"

using namespace ssx;
using namespace ssx::testing;

namespace {

BitMatrix rows_matrix(const std::vector<std::vector<int>>& rows) {
  int T = rows.empty() ? 0 : static_cast<int>(rows[0].size());
  BitMatrix m(static_cast<int64_t>(rows.size()), T);
  for (size_t r = 0; r < rows.size(); ++r)
    for (int c = 0; c < T; ++c)
      m.set(static_cast<int64_t>(r), c, rows[r][c] != 0);
  return m;
}

DynDigraph make_dyn(Digraph g, const std::vector<std::vector<int>>& rows) {
  return DynDigraph{std::move(g), rows_matrix(rows)};
}

DynDigraph all_active(Digraph g, int T) {
  std::vector<std::vector<int>> rows(
      static_cast<size_t>(g.num_vertices()),
      std::vector<int>(static_cast<size_t>(T), 1));
  return make_dyn(std::move(g), rows);
}

DynDigraph random_dyn(Rng& rng, int n, double p, int T, double q = 0.6) {
  Digraph g = random_digraph(rng, n, p);
  std::vector<std::vector<int>> rows(static_cast<size_t>(n));
  for (auto& row : rows) {
    row.resize(static_cast<size_t>(T));
    for (auto& b : row) b = rng.bernoulli(q) ? 1 : 0;
  }
  return make_dyn(std::move(g), rows);
}

// Two consistently chained triangles sharing the edge 1->2.
Digraph chained_pair() {
  return Digraph(4, {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}});
}

// Two triangles fanning out of the shared edge 1->2 from opposite apexes.
Digraph fan_pair() {
  return Digraph(4, {{0, 1}, {0, 2}, {1, 2}, {3, 1}, {3, 2}});
}

Digraph disjoint_double(const Digraph& g) {
  int n = g.num_vertices();
  std::vector<std::pair<int, int>> e = g.edges();
  for (const auto& [u, v] : g.edges()) e.emplace_back(u + n, v + n);
  return Digraph(2 * n, std::move(e));
}

bool tuple_active(const DynDigraph& g, const Tuple& t, int bin) {
  for (int v : t)
    if (!g.activations.get(v, bin)) return false;
  return true;
}

// Definition-level vertex relations assembled straight from the edge list.
Relation edges_r_out(const Digraph& g) {
  std::vector<SidPair> p;
  for (const auto& [u, v] : g.edges()) p.push_back({{0, u}, {0, v}});
  return Relation(std::move(p));
}

Relation edges_r_in(const Digraph& g) {
  std::vector<SidPair> p;
  for (const auto& [u, v] : g.edges()) p.push_back({{0, v}, {0, u}});
  return Relation(std::move(p));
}

Relation edges_r_sym(const Digraph& g) {
  return union_(edges_r_in(g), edges_r_out(g));
}

Relation edges_r_rc(const Digraph& g) {
  std::vector<SidPair> p;
  for (const auto& [u, v] : g.edges())
    if (g.has_edge(v, u)) p.push_back({{0, u}, {0, v}});
  return Relation(std::move(p));
}

// Active members of the exactly-k walk frontier, activity read off the
// vertex rows directly.
int64_t frontier_active(const Relation& r, Sid u, int k, const DynDigraph& g,
                        int bin) {
  int64_t count = 0;
  for (const Sid& s : walk_frontier(r, u, k))
    if (g.activations.get(s.idx, bin)) ++count;
  return count;
}

}  // namespace

TEST_CASE("bit matrix stores rows of time bins") {
  BitMatrix m(3, 70);  // cross the word boundary
  CHECK(m.rows() == 3);
  CHECK(m.cols() == 70);
  CHECK_FALSE(m.get(2, 69));
  m.set(2, 69, true);
  m.set(2, 3, true);
  m.set(1, 3, true);
  CHECK(m.get(2, 69));
  CHECK(m.count_row(2) == 2);
  m.and_row_into(2, 1);
  CHECK(m.get(2, 3));
  CHECK_FALSE(m.get(2, 69));
  m.copy_row(0, 1);
  CHECK(m.get(0, 3));
  CHECK(m.count_row(0) == 1);
  BitMatrix same(3, 70);
  same.set(0, 3, true);
  same.set(1, 3, true);
  same.set(2, 3, true);
  CHECK(m == same);
  CHECK_THROWS_AS(m.get(3, 0), ValidationError);
  CHECK_THROWS_AS(m.get(0, 70), ValidationError);
  CHECK_THROWS_AS(m.set(-1, 0, true), ValidationError);
}

TEST_CASE("dynamic digraph validation") {
  DynDigraph good = all_active(chained_pair(), 2);
  CHECK_NOTHROW(validate_dyn(good));
  DynDigraph short_rows{chained_pair(), BitMatrix(3, 2)};
  CHECK_THROWS_AS(validate_dyn(short_rows), ValidationError);
  DynDigraph no_bins{chained_pair(), BitMatrix(4, 0)};
  CHECK_THROWS_AS(validate_dyn(no_bins), ValidationError);
}

TEST_CASE("lifting takes the elementwise min over simplex vertices") {
  // Transitive 3-clique whose vertex rows AND to (0,0,1,0).
  Digraph g(3, {{0, 1}, {0, 2}, {1, 2}});
  DynDigraph dyn =
      make_dyn(g, {{0, 1, 1, 0}, {1, 0, 1, 0}, {1, 1, 1, 1}});
  Dac dac = lift_dac(dyn, 2);
  CHECK(dac.T() == 4);
  CHECK(dac.activations.rows() == dac.complex.size());

  int64_t tri = dac.complex.index_of(2, {0, 1, 2});
  REQUIRE(tri == 0);
  std::vector<int> expect = {0, 0, 1, 0};
  for (int t = 0; t < 4; ++t)
    CHECK(dac.active(2, tri, t) == (expect[static_cast<size_t>(t)] != 0));

  // Vertex rows carry over untouched.
  CHECK(dac.active(0, 0, 1));
  CHECK_FALSE(dac.active(0, 0, 0));

  // Edge (0,1): rows AND to (0,0,1,0) as well.
  int64_t e01 = dac.complex.index_of(1, {0, 1});
  CHECK_FALSE(dac.active(1, e01, 1));
  CHECK(dac.active(1, e01, 2));

  CHECK(activity_face_closed(dac));
}

TEST_CASE("lifted activity equals the AND of vertex rows on random instances") {
  Rng rng(501);
  for (int it = 0; it < 40; ++it) {
    int n = 3 + static_cast<int>(rng.below(7));
    int T = 1 + static_cast<int>(rng.below(4));
    DynDigraph dyn = random_dyn(rng, n, 0.4, T);
    Dac dac = lift_dac(dyn, 3);
    CHECK(activity_face_closed(dac));
    for (int d = 0; d <= dac.complex.max_dim(); ++d)
      for (int64_t s = 0; s < dac.complex.size(d); ++s)
        for (int t = 0; t < T; ++t)
          CHECK(dac.active(d, s, t) ==
                tuple_active(dyn, dac.complex.tuple(d, s), t));
  }
}

TEST_CASE("functional subgraph keeps exactly the active vertices") {
  Digraph g(3, {{0, 1}, {1, 2}, {0, 2}});
  DynDigraph dyn = make_dyn(g, {{1, 1}, {0, 1}, {1, 1}});

  std::vector<int> old_ids;
  Digraph sub = functional_subgraph(dyn, 0, &old_ids);
  CHECK(sub.num_vertices() == 2);
  CHECK(sub.edges() == std::vector<std::pair<int, int>>{{0, 1}});
  CHECK(old_ids == std::vector<int>{0, 2});

  Digraph full = functional_subgraph(dyn, 1);
  CHECK(full.num_vertices() == 3);
  CHECK(full.num_edges() == 3);

  DynDigraph silent = make_dyn(g, {{0}, {0}, {0}});
  Digraph empty = functional_subgraph(silent, 0);
  CHECK(empty.num_vertices() == 0);
  CHECK(empty.num_edges() == 0);

  CHECK_THROWS_AS(functional_subgraph(dyn, 2), ValidationError);
}

TEST_CASE("active simplex ids are sorted and complete") {
  DynDigraph dyn = all_active(Digraph(3, {{0, 1}, {0, 2}, {1, 2}}), 1);
  Dac dac = lift_dac(dyn, 2);
  std::vector<Sid> all = active_simplices(dac, 0);
  CHECK(all.size() == 7);
  CHECK(std::is_sorted(all.begin(), all.end()));

  DynDigraph partial =
      make_dyn(Digraph(3, {{0, 1}, {0, 2}, {1, 2}}), {{1}, {1}, {0}});
  Dac dac2 = lift_dac(partial, 2);
  std::vector<Sid> act = active_simplices(dac2, 0);
  std::vector<Sid> expect = {{0, 0}, {0, 1}, {1, 0}};  // 0, 1, edge (0,1)
  CHECK(act == expect);
}

TEST_CASE("functional subcomplex check accepts lifts and flags corruption") {
  Rng rng(502);
  for (int it = 0; it < 25; ++it) {
    DynDigraph dyn = random_dyn(rng, 3 + static_cast<int>(rng.below(7)), 0.4,
                                1 + static_cast<int>(rng.below(3)));
    Dac dac = lift_dac(dyn, 3);
    for (int t = 0; t < dyn.T(); ++t)
      CHECK(check_functional_subcomplex(dyn, dac, t));
  }

  // Activate the edge (0,1) over an inactive middle vertex: the lifted
  // activity no longer matches any functional subgraph.
  Digraph path(3, {{0, 1}, {1, 2}});
  DynDigraph dyn = make_dyn(path, {{1}, {0}, {1}});
  Dac dac = lift_dac(dyn, 2);
  CHECK(check_functional_subcomplex(dyn, dac, 0));
  int64_t e01 = dac.complex.index_of(1, {0, 1});
  dac.activations.set(dac.complex.global_id(1, e01), 0, true);
  CHECK_FALSE(activity_face_closed(dac));
  CHECK_FALSE(check_functional_subcomplex(dyn, dac, 0));
}

TEST_CASE("relabeled dynamic digraphs lift to isomorphic attributed complexes") {
  Rng rng(503);
  for (int it = 0; it < 12; ++it) {
    int n = 4 + static_cast<int>(rng.below(5));
    DynDigraph dyn = random_dyn(rng, n, 0.45, 1 + static_cast<int>(rng.below(3)));
    std::vector<int> perm = rng.permutation(n);

    std::vector<std::vector<int>> rows(static_cast<size_t>(n));
    for (int v = 0; v < n; ++v) {
      auto& row = rows[static_cast<size_t>(perm[static_cast<size_t>(v)])];
      row.resize(static_cast<size_t>(dyn.T()));
      for (int t = 0; t < dyn.T(); ++t)
        row[static_cast<size_t>(t)] = dyn.activations.get(v, t) ? 1 : 0;
    }
    DynDigraph moved = make_dyn(relabel(dyn.graph, perm), rows);

    Dac a = lift_dac(dyn, 3);
    Dac b = lift_dac(moved, 3);
    VertexLabels la = activation_labels(dyn);
    VertexLabels lb = activation_labels(moved);
    auto iso = brute_force_isomorphic(a.complex, b.complex, &la, &lb);
    REQUIRE(iso.has_value());
    // The witness maps every active simplex to an active image.
    for (int d = 0; d <= a.complex.max_dim(); ++d)
      for (int64_t s = 0; s < a.complex.size(d); ++s) {
        Tuple image = a.complex.tuple(d, s);
        for (int& v : image) v = (*iso)[static_cast<size_t>(v)];
        std::sort(image.begin(), image.end());
        Tuple match;
        int64_t found = -1;
        for (int64_t cand = 0; cand < b.complex.size(d) && found < 0; ++cand) {
          match = b.complex.tuple(d, cand);
          std::sort(match.begin(), match.end());
          if (match == image) found = cand;
        }
        REQUIRE(found >= 0);
        for (int t = 0; t < a.T(); ++t)
          CHECK(a.active(d, s, t) == b.active(d, found, t));
      }
  }
}

TEST_CASE("restriction filters the second component only") {
  Digraph path(3, {{0, 1}, {1, 2}});
  DynDigraph dyn = make_dyn(path, {{0}, {0}, {1}});
  Dac dac = lift_dac(dyn, 2);
  const Complex& c = dac.complex;

  Relation rout = r_out(c);
  Relation hop2 = restricted_khop(rout, dac, 0, 2);
  Relation expect(std::vector<SidPair>{{{0, 0}, {0, 2}}}, c.uid());
  CHECK(hop2 == expect);

  // k=1: the pair (1,2) survives because only the target needs activity.
  Relation hop1 = restricted_khop(rout, dac, 0, 1);
  Relation expect1(std::vector<SidPair>{{{0, 1}, {0, 2}}}, c.uid());
  CHECK(hop1 == expect1);

  DynDigraph live = all_active(path, 1);
  Dac dl = lift_dac(live, 2);
  CHECK(restricted_khop(r_out(dl.complex), dl, 0, 1) == r_out(dl.complex));

  DynDigraph dead = make_dyn(path, {{0}, {0}, {0}});
  Dac dd = lift_dac(dead, 2);
  CHECK(restricted_khop(r_out(dd.complex), dd, 0, 1).empty());

  // A relation bound to a different structure is rejected.
  Dac other = lift_dac(all_active(chained_pair(), 1), 2);
  CHECK_THROWS_AS(restrict_active(r_out(other.complex), dac, 0),
                  ValidationError);
  CHECK_THROWS_AS(restrict_active(rout, dac, 5), ValidationError);
}

TEST_CASE("local invariants reproduce the worked values") {
  DynDigraph clique = all_active(Digraph(3, {{0, 1}, {0, 2}, {1, 2}}), 2);
  Dac dc = lift_dac(clique, 2);
  for (int64_t u = 0; u < 3; ++u)
    CHECK(inv_size(dc, u, 1) == TimeSeries{2, 2});
  CHECK(inv_indeg(dc, 0, 1) == TimeSeries{0, 0});
  CHECK(inv_outdeg(dc, 0, 1) == TimeSeries{2, 2});
  InvariantSpec dir1{InvariantKind::kDir, 1};
  CHECK(global_multiset(dc, dir1)[0] == std::vector<int64_t>{-2, 0, 2});
  CHECK(global_multiset(dc, dir1)[1] == std::vector<int64_t>{-2, 0, 2});

  DynDigraph cyc = all_active(Digraph(3, {{0, 1}, {1, 2}, {2, 0}}), 1);
  Dac dcyc = lift_dac(cyc, 2);
  CHECK(global_multiset(dcyc, dir1)[0] == std::vector<int64_t>{0, 0, 0});

  // Reciprocity counts vertices serving as both in- and out-neighbors.
  DynDigraph recip =
      all_active(Digraph(3, {{0, 1}, {0, 2}, {1, 2}, {2, 1}}), 1);
  Dac dr = lift_dac(recip, 2);
  CHECK(inv_rc(dr, 0, 1) == TimeSeries{0});
  CHECK(inv_rc(dr, 1, 1) == TimeSeries{1});
  CHECK(inv_rc(dr, 2, 1) == TimeSeries{1});
  CHECK(inv_rc(dc, 0, 1) == TimeSeries{0, 0});  // acyclic: all zero

  // Isolated vertex: all zeros even with edges elsewhere.
  DynDigraph iso = all_active(Digraph(4, {{0, 1}, {0, 2}, {1, 2}}), 2);
  Dac di = lift_dac(iso, 2);
  CHECK(inv_size(di, 3, 1) == TimeSeries{0, 0});
  CHECK(inv_size(di, 3, 3) == TimeSeries{0, 0});
  CHECK(inv_dir(di, 3, 1) == TimeSeries{0, 0});

  // A vertex whose neighbors are all inactive scores zero.
  DynDigraph dark = make_dyn(Digraph(3, {{0, 1}, {0, 2}}), {{1}, {0}, {0}});
  Dac dd = lift_dac(dark, 2);
  CHECK(inv_dir(dd, 0, 1) == TimeSeries{0});
  CHECK(inv_size(dd, 0, 1) == TimeSeries{0});
}

TEST_CASE("triangle counts and euler series match the circulant values") {
  Dac d12 = lift_dac(all_active(circulant(7, {1, 2}), 2), 2);
  Dac d13 = lift_dac(all_active(circulant(7, {1, 3}), 2), 2);

  InvariantSpec td{InvariantKind::kTd};
  CHECK(global_multiset(d12, td)[0] ==
        std::vector<int64_t>{3, 3, 3, 3, 3, 3, 3});
  CHECK(global_multiset(d13, td)[0] ==
        std::vector<int64_t>{0, 0, 0, 0, 0, 0, 0});
  CHECK(global_multiset(d12, td)[1] == global_multiset(d12, td)[0]);

  CHECK(euler_series(d12) == TimeSeries{0, 0});
  CHECK(euler_series(d13) == TimeSeries{-7, -7});

  // td of a triangle-free structure is identically zero.
  Dac path = lift_dac(all_active(Digraph(3, {{0, 1}, {1, 2}}), 1), 2);
  CHECK(inv_td(path, 0) == TimeSeries{0});
  CHECK(inv_td(path, 1) == TimeSeries{0});

  // A lone active vertex contributes exactly one to the alternating sum.
  DynDigraph lone =
      make_dyn(Digraph(3, {{0, 1}, {0, 2}, {1, 2}}), {{1, 0}, {0, 0}, {0, 0}});
  CHECK(euler_series(lift_dac(lone, 2)) == TimeSeries{1, 0});
}

TEST_CASE("signed higher-order degree separates chained from fanned triangles") {
  InvariantSpec ho{InvariantKind::kHodir, 1, 2, 0, 2};

  Dac chained = lift_dac(all_active(chained_pair(), 1), 2);
  CHECK(global_multiset(chained, ho)[0] == std::vector<int64_t>{-1, 1});

  Dac four = lift_dac(all_active(disjoint_double(chained_pair()), 1), 2);
  CHECK(global_multiset(four, ho)[0] == std::vector<int64_t>{-1, -1, 1, 1});

  Dac fans = lift_dac(all_active(disjoint_double(fan_pair()), 1), 2);
  CHECK(global_multiset(fans, ho)[0] == std::vector<int64_t>{0, 0, 0, 0});

  // No lower-adjacent active partner: zero.
  Dac one_fan = lift_dac(all_active(fan_pair(), 1), 2);
  CHECK(inv_hodir(one_fan, 0, 2, 0, 2, 1) == TimeSeries{0});
  CHECK(inv_hodir(one_fan, 1, 2, 0, 2, 1) == TimeSeries{0});
}

TEST_CASE("invariants equal definition-level oracles on random instances") {
  Rng rng(504);
  for (int it = 0; it < 60; ++it) {
    int n = 3 + static_cast<int>(rng.below(8));
    int T = 1 + static_cast<int>(rng.below(4));
    DynDigraph dyn = random_dyn(rng, n, 0.45, T);
    Dac dac = lift_dac(dyn, 3);
    int k = 1 + static_cast<int>(rng.below(3));

    Relation osym = edges_r_sym(dyn.graph);
    Relation oin = edges_r_in(dyn.graph);
    Relation oout = edges_r_out(dyn.graph);
    Relation orc = edges_r_rc(dyn.graph);
    std::vector<Tuple> tri_table = oracle_flag_tables(dyn.graph, 2)[2];

    for (int64_t u = 0; u < n; ++u) {
      TimeSeries size = inv_size(dac, u, k);
      TimeSeries indeg = inv_indeg(dac, u, k);
      TimeSeries outdeg = inv_outdeg(dac, u, k);
      TimeSeries dir = inv_dir(dac, u, k);
      TimeSeries rc = inv_rc(dac, u, k);
      TimeSeries td = inv_td(dac, u);
      for (int t = 0; t < T; ++t) {
        CHECK(size[static_cast<size_t>(t)] ==
              frontier_active(osym, Sid{0, u}, k, dyn, t));
        CHECK(indeg[static_cast<size_t>(t)] ==
              frontier_active(oin, Sid{0, u}, k, dyn, t));
        CHECK(outdeg[static_cast<size_t>(t)] ==
              frontier_active(oout, Sid{0, u}, k, dyn, t));
        CHECK(dir[static_cast<size_t>(t)] ==
              frontier_active(oin, Sid{0, u}, k, dyn, t) -
                  frontier_active(oout, Sid{0, u}, k, dyn, t));
        CHECK(rc[static_cast<size_t>(t)] ==
              frontier_active(orc, Sid{0, u}, k, dyn, t));

        // Triangle count straight from the oracle enumeration.
        int64_t tri = 0;
        for (const Tuple& tup : tri_table)
          if (std::find(tup.begin(), tup.end(), static_cast<int>(u)) !=
                  tup.end() &&
              tuple_active(dyn, tup, t))
            ++tri;
        CHECK(td[static_cast<size_t>(t)] == tri);
      }
    }

    // Euler series against direct all-vertex-active tuple counting.
    TimeSeries ec = euler_series(dac);
    auto tables = oracle_flag_tables(dyn.graph, 3);
    for (int t = 0; t < T; ++t) {
      int64_t acc = 0;
      for (size_t d = 0; d < tables.size(); ++d) {
        int64_t live = 0;
        for (const Tuple& tup : tables[d])
          if (tuple_active(dyn, tup, t)) ++live;
        acc += (d % 2 == 0 ? live : -live);
      }
      CHECK(ec[static_cast<size_t>(t)] == acc);
    }

    // hodir against tuple-scan lower relations plus the frontier walk.
    const Complex& c = dac.complex;
    if (c.size(2) > 0) {
      Relation pos = oracle_lower(c, 2, 0, 2);
      Relation neg = oracle_lower(c, 2, 2, 0);
      for (int64_t s = 0; s < c.size(2); ++s) {
        TimeSeries ho = inv_hodir(dac, s, 2, 0, 2, k);
        for (int t = 0; t < T; ++t) {
          int64_t expect = 0;
          for (const Sid& w : walk_frontier(pos, Sid{2, s}, k))
            if (tuple_active(dyn, c.tuple(w.dim, w.idx), t)) ++expect;
          for (const Sid& w : walk_frontier(neg, Sid{2, s}, k))
            if (tuple_active(dyn, c.tuple(w.dim, w.idx), t)) --expect;
          CHECK(ho[static_cast<size_t>(t)] == expect);
        }
      }
    }
  }
}

TEST_CASE("euler series equals the per-bin functional lift") {
  Rng rng(505);
  for (int it = 0; it < 40; ++it) {
    int n = 3 + static_cast<int>(rng.below(8));
    DynDigraph dyn = random_dyn(rng, n, 0.5, 1 + static_cast<int>(rng.below(4)));
    Dac dac = lift_dac(dyn, 3);
    TimeSeries ec = euler_series(dac);
    for (int t = 0; t < dyn.T(); ++t) {
      Complex sub = build_flag_complex(functional_subgraph(dyn, t), 3);
      int64_t chi = 0;
      for (int d = 0; d <= sub.max_dim(); ++d)
        chi += (d % 2 == 0 ? sub.size(d) : -sub.size(d));
      CHECK(ec[static_cast<size_t>(t)] == chi);
    }
  }
}

TEST_CASE("global aggregation is permutation invariant") {
  Rng rng(506);
  InvariantSpec specs[] = {
      {InvariantKind::kSize, 2},
      {InvariantKind::kDir, 1},
      {InvariantKind::kRc, 1},
      {InvariantKind::kTd},
      {InvariantKind::kEc},
      {InvariantKind::kHodir, 1, 2, 0, 2},
  };
  for (int it = 0; it < 10; ++it) {
    int n = 4 + static_cast<int>(rng.below(5));
    DynDigraph dyn = random_dyn(rng, n, 0.5, 2);
    std::vector<int> perm = rng.permutation(n);
    std::vector<std::vector<int>> rows(static_cast<size_t>(n));
    for (int v = 0; v < n; ++v) {
      auto& row = rows[static_cast<size_t>(perm[static_cast<size_t>(v)])];
      row.resize(static_cast<size_t>(dyn.T()));
      for (int t = 0; t < dyn.T(); ++t)
        row[static_cast<size_t>(t)] = dyn.activations.get(v, t) ? 1 : 0;
    }
    DynDigraph moved = make_dyn(relabel(dyn.graph, perm), rows);
    Dac a = lift_dac(dyn, 2);
    Dac b = lift_dac(moved, 2);
    for (const InvariantSpec& s : specs) {
      CHECK(global_multiset(a, s) == global_multiset(b, s));
      CHECK(global_sum(a, s) == global_sum(b, s));
    }
  }

  // With full activity, summed in-degrees cancel summed out-degrees.
  DynDigraph dyn = all_active(random_digraph(rng, 9, 0.5), 3);
  Dac dac = lift_dac(dyn, 2);
  CHECK(global_sum(dac, {InvariantKind::kDir, 1}) == TimeSeries{0, 0, 0});
  CHECK(global_sum(dac, {InvariantKind::kDir, 2}) == TimeSeries{0, 0, 0});

  // Mean over a fully inactive bin is zero; ec aggregates as a single carrier.
  DynDigraph half = make_dyn(Digraph(2, {{0, 1}}), {{1, 0}, {1, 0}});
  Dac dh = lift_dac(half, 1);
  RealSeries mean = global_mean(dh, {InvariantKind::kSize, 1});
  CHECK(mean == RealSeries{1.0, 0.0});
  CHECK(global_sum(dh, {InvariantKind::kEc}) == euler_series(dh));
  MultisetSeries ms = global_multiset(dh, {InvariantKind::kEc});
  CHECK(ms[0] == std::vector<int64_t>{1});  // 2 vertices - 1 edge
  CHECK(ms[1] == std::vector<int64_t>{0});
}

TEST_CASE("local series carriers") {
  Dac dac = lift_dac(all_active(chained_pair(), 2), 2);
  CHECK(local_series(dac, {InvariantKind::kSize, 1}).size() == 4);
  CHECK(local_series(dac, {InvariantKind::kTd}).size() == 4);
  CHECK(local_series(dac, {InvariantKind::kEc}).size() == 1);
  CHECK(local_series(dac, {InvariantKind::kHodir, 1, 2, 0, 2}).size() == 2);

  // Missing dimension-n table: empty carrier set, empty aggregates.
  Dac path = lift_dac(all_active(Digraph(3, {{0, 1}, {1, 2}}), 1), 1);
  CHECK(local_series(path, {InvariantKind::kHodir, 1, 2, 0, 2}).empty());
  CHECK(global_sum(path, {InvariantKind::kHodir, 1, 2, 0, 2}) ==
        TimeSeries{0});
  CHECK(global_mean(path, {InvariantKind::kHodir, 1, 2, 0, 2}) ==
        RealSeries{0.0});
}

TEST_CASE("invariant spec parsing validates per kind") {
  InvariantSpec s = parse_invariant_spec("hodir", 2, 2, 0, 2);
  CHECK(s.kind == InvariantKind::kHodir);
  CHECK(s.k == 2);
  CHECK(s.n == 2);
  CHECK(s.i == 0);
  CHECK(s.j == 2);
  CHECK(parse_invariant_spec("size", 3, 0, 0, 0).k == 3);
  CHECK(parse_invariant_spec("ec", 0, 0, 0, 0).kind == InvariantKind::kEc);
  CHECK(parse_invariant_spec("td", 0, 0, 0, 0).kind == InvariantKind::kTd);
  CHECK_THROWS_AS(parse_invariant_spec("betti", 1, 1, 0, 1), ValidationError);
  CHECK_THROWS_AS(parse_invariant_spec("size", 0, 0, 0, 0), ValidationError);
  CHECK_THROWS_AS(parse_invariant_spec("hodir", 1, 0, 0, 0), ValidationError);
  CHECK_THROWS_AS(parse_invariant_spec("hodir", 1, 2, 1, 1), ValidationError);
  CHECK_THROWS_AS(parse_invariant_spec("hodir", 1, 2, 0, 3), ValidationError);

  Dac dac = lift_dac(all_active(chained_pair(), 1), 2);
  CHECK_THROWS_AS(inv_size(dac, -1, 1), ValidationError);
  CHECK_THROWS_AS(inv_size(dac, 4, 1), ValidationError);
  CHECK_THROWS_AS(inv_size(dac, 0, 0), ValidationError);
  CHECK_THROWS_AS(inv_hodir(dac, 0, 2, 0, 0, 1), ValidationError);
  CHECK_THROWS_AS(inv_hodir(dac, 5, 2, 0, 2, 1), ValidationError);
  CHECK_THROWS_AS(inv_hodir(dac, 0, 3, 0, 2, 1), ValidationError);
}

TEST_CASE("feature vector layout over two bins") {
  DynDigraph dyn =
      make_dyn(chained_pair(), {{1, 1}, {1, 0}, {1, 1}, {1, 1}});
  Dac dac = lift_dac(dyn, 2);

  std::vector<double> f3 = topofeat(dac, 3);
  CHECK(f3.size() == 38);
  std::vector<double> f1 = topofeat(dac, 1);
  CHECK(f1.size() == 14);

  // Hand-assembled layout: per bin [ec, size x K, dir x K, hodir blocks].
  int K = 2;
  std::vector<double> expect;
  TimeSeries ec = euler_series(dac);
  const int ho[4][3] = {{1, 0, 1}, {2, 0, 1}, {2, 1, 2}, {2, 0, 2}};
  for (int t = 0; t < 2; ++t) {
    expect.push_back(static_cast<double>(ec[static_cast<size_t>(t)]));
    for (int k = 1; k <= K; ++k)
      expect.push_back(static_cast<double>(
          global_sum(dac, {InvariantKind::kSize, k})[static_cast<size_t>(t)]));
    for (int k = 1; k <= K; ++k)
      expect.push_back(static_cast<double>(
          global_sum(dac, {InvariantKind::kDir, k})[static_cast<size_t>(t)]));
    for (const auto& h : ho)
      for (int k = 1; k <= K; ++k)
        expect.push_back(static_cast<double>(global_sum(
            dac,
            {InvariantKind::kHodir, k, h[0], h[1], h[2]})[static_cast<size_t>(t)]));
  }
  CHECK(topofeat(dac, 2) == expect);

  // All-inactive activity: every entry zero.
  DynDigraph dead = make_dyn(chained_pair(), {{0, 0}, {0, 0}, {0, 0}, {0, 0}});
  std::vector<double> fz = topofeat(lift_dac(dead, 2), 2);
  CHECK(fz == std::vector<double>(fz.size(), 0.0));

  CHECK_THROWS_AS(topofeat(dac, 0), ValidationError);
  Dac three = lift_dac(all_active(chained_pair(), 3), 2);
  CHECK_THROWS_AS(topofeat(three, 1), ValidationError);
  Dac lowdim = lift_dac(all_active(chained_pair(), 2), 1);
  CHECK_THROWS_AS(topofeat(lowdim, 1), ValidationError);
}

TEST_CASE("lift is invariant under thread count") {
  Rng rng(507);
  DynDigraph dyn = random_dyn(rng, 28, 0.3, 3);
  set_num_threads(1);
  Dac a = lift_dac(dyn, 3);
  set_num_threads(4);
  Dac b = lift_dac(dyn, 3);
  set_num_threads(1);
  CHECK(a.activations == b.activations);
  CHECK(a.complex.size() == b.complex.size());
  for (int d = 0; d <= a.complex.max_dim(); ++d)
    CHECK(a.complex.table(d) == b.complex.table(d));
}
