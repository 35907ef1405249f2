#pragma once

#include <set>
#include <utility>
#include <vector>

#include "ssx/complex.hpp"
#include "ssx/digraph.hpp"
#include "ssx/relation.hpp"
#include "ssx/rng.hpp"

namespace ssx::testing {

// Ordered transitive cliques built by direct edge checks, one vertex at a
// time, independent of the library's bitset search. Extending lexicographic
// tables by ascending last vertex keeps the result lexicographic.
inline std::vector<std::vector<Tuple>> oracle_flag_tables(const Digraph& g,
                                                          int max_dim) {
  std::vector<std::vector<Tuple>> tabs(static_cast<size_t>(max_dim) + 1);
  for (int v = 0; v < g.num_vertices(); ++v) tabs[0].push_back(Tuple{v});
  for (int d = 1; d <= max_dim; ++d) {
    for (const Tuple& t : tabs[static_cast<size_t>(d) - 1]) {
      for (int w = 0; w < g.num_vertices(); ++w) {
        bool ok = true;
        for (int u : t)
          if (!g.has_edge(u, w)) {
            ok = false;
            break;
          }
        if (!ok) continue;
        Tuple ext = t;
        ext.push_back(w);
        tabs[static_cast<size_t>(d)].push_back(std::move(ext));
      }
    }
  }
  return tabs;
}

inline Digraph random_digraph(Rng& rng, int n, double p) {
  std::vector<std::pair<int, int>> e;
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (u != v && rng.bernoulli(p)) e.emplace_back(u, v);
  return Digraph(n, std::move(e));
}

// Each unordered pair gets at most one direction: no reciprocal edges.
inline Digraph random_oriented_digraph(Rng& rng, int n, double p) {
  std::vector<std::pair<int, int>> e;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) {
      if (!rng.bernoulli(p)) continue;
      if (rng.bernoulli(0.5))
        e.emplace_back(u, v);
      else
        e.emplace_back(v, u);
    }
  return Digraph(n, std::move(e));
}

inline Digraph random_tournament(Rng& rng, int n) {
  return random_oriented_digraph(rng, n, 1.0);
}

inline Digraph complete_digraph(int n) {
  std::vector<std::pair<int, int>> e;
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (u != v) e.emplace_back(u, v);
  return Digraph(n, std::move(e));
}

inline Tuple delete_at(const Tuple& t, int i) {
  Tuple r;
  for (size_t a = 0; a < t.size(); ++a)
    if (static_cast<int>(a) != i) r.push_back(t[a]);
  return r;
}

// Nested-loop composition: independent of the library's merge join.
inline std::vector<SidPair> oracle_compose_pairs(const Relation& a,
                                                 const Relation& b) {
  std::set<SidPair> out;
  for (const auto& [s, k1] : a.pairs())
    for (const auto& [k2, t] : b.pairs())
      if (k1 == k2) out.insert({s, t});
  return {out.begin(), out.end()};
}

// The relation oracles below work from the tuple tables, not the face maps.
inline Relation oracle_generator(const Complex& c, int n, int i) {
  std::vector<SidPair> p;
  for (int64_t s = 0; s < c.size(n); ++s) {
    Tuple f = delete_at(c.tuple(n, s), i);
    p.emplace_back(Sid{n - 1, c.index_of(n - 1, f)}, Sid{n, s});
  }
  return Relation(std::move(p), c.uid());
}

inline Relation oracle_lower(const Complex& c, int n, int i, int j) {
  std::vector<SidPair> p;
  for (int64_t s = 0; s < c.size(n); ++s)
    for (int64_t t = 0; t < c.size(n); ++t)
      if (delete_at(c.tuple(n, s), i) == delete_at(c.tuple(n, t), j))
        p.emplace_back(Sid{n, s}, Sid{n, t});
  return Relation(std::move(p), c.uid());
}

inline Relation oracle_upper(const Complex& c, int n, int i, int j) {
  std::vector<SidPair> p;
  for (int64_t k = 0; k < c.size(n + 1); ++k) {
    const Tuple& t = c.tuple(n + 1, k);
    p.emplace_back(Sid{n, c.index_of(n, delete_at(t, i))},
                   Sid{n, c.index_of(n, delete_at(t, j))});
  }
  return Relation(std::move(p), c.uid());
}

inline Relation oracle_boundary(const Complex& c, int n) {
  std::vector<SidPair> p;
  for (int64_t s = 0; s < c.size(n); ++s)
    for (int i = 0; i <= n; ++i)
      p.emplace_back(Sid{n, s},
                     Sid{n - 1, c.index_of(n - 1, delete_at(c.tuple(n, s), i))});
  return Relation(std::move(p), c.uid());
}

inline Relation oracle_coboundary(const Complex& c, int n) {
  std::vector<SidPair> p;
  for (int64_t k = 0; k < c.size(n + 1); ++k)
    for (int i = 0; i <= n + 1; ++i)
      p.emplace_back(Sid{n, c.index_of(n, delete_at(c.tuple(n + 1, k), i))},
                     Sid{n + 1, k});
  return Relation(std::move(p), c.uid());
}

inline Relation oracle_r_in(const Digraph& g, const Complex& c) {
  std::vector<SidPair> p;
  for (auto [u, v] : g.edges()) p.emplace_back(Sid{0, v}, Sid{0, u});
  return Relation(std::move(p), c.uid());
}

// Vertex v relates to every triangle containing it.
inline Relation oracle_c02(const Complex& c) {
  std::vector<SidPair> p;
  if (c.max_dim() >= 2)
    for (int64_t t = 0; t < c.size(2); ++t)
      for (int v : c.tuple(2, t)) p.emplace_back(Sid{0, v}, Sid{2, t});
  return Relation(std::move(p), c.uid());
}

// Exactly-k-step successor set by frontier iteration.
inline std::set<Sid> walk_frontier(const Relation& r, Sid u, int k) {
  std::set<Sid> cur{u};
  for (int step = 0; step < k; ++step) {
    std::set<Sid> nxt;
    for (Sid s : cur)
      for (Sid t : r.successors(s)) nxt.insert(t);
    cur = std::move(nxt);
  }
  return cur;
}

inline Relation random_relation(Rng& rng, const Complex& c, int npairs) {
  std::vector<Sid> pool;
  for (int n = 0; n <= c.max_dim(); ++n)
    for (int64_t s = 0; s < c.size(n); ++s) pool.push_back(Sid{n, s});
  std::vector<SidPair> p;
  if (pool.empty()) return Relation({}, c.uid());
  for (int t = 0; t < npairs; ++t) {
    Sid a = pool[static_cast<size_t>(rng.below(pool.size()))];
    Sid b = pool[static_cast<size_t>(rng.below(pool.size()))];
    p.emplace_back(a, b);
  }
  return Relation(std::move(p), c.uid());
}

}  // namespace ssx::testing
