#include "ssx/complex.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <map>

#include "ssx/errors.hpp"
#include "ssx/threads.hpp"

namespace ssx {

namespace {

std::atomic<uint64_t> g_next_uid{1};

void check_tuple(const Tuple& t, int dim, int num_vertices) {
  if (static_cast<int>(t.size()) != dim + 1)
    throw ValidationError("tuple arity does not match dimension");
  for (size_t a = 0; a < t.size(); ++a) {
    if (t[a] < 0 || t[a] >= num_vertices)
      throw ValidationError("tuple vertex out of range");
    for (size_t b = a + 1; b < t.size(); ++b)
      if (t[a] == t[b]) throw ValidationError("tuple vertices must be distinct");
  }
}

Tuple erase_at(const Tuple& t, int i) {
  Tuple r;
  r.reserve(t.size() - 1);
  for (size_t a = 0; a < t.size(); ++a)
    if (static_cast<int>(a) != i) r.push_back(t[a]);
  return r;
}

}  // namespace

void Complex::finalize() {
  offsets_.assign(tables_.size() + 1, 0);
  for (size_t n = 0; n < tables_.size(); ++n)
    offsets_[n + 1] = offsets_[n] + static_cast<int64_t>(tables_[n].size());
  total_ = offsets_.back();
  tuples_unique_ = tuples_unique_per_dim(*this);
  uid_ = g_next_uid.fetch_add(1);
}

int Complex::dim() const {
  for (int n = max_dim(); n >= 0; --n)
    if (!tables_[static_cast<size_t>(n)].empty()) return n;
  return -1;
}

const std::vector<Tuple>& Complex::table(int n) const {
  if (n < 0 || n > max_dim()) throw ValidationError("dimension out of range");
  return tables_[static_cast<size_t>(n)];
}

const Tuple& Complex::tuple(int n, int64_t idx) const {
  const auto& tab = table(n);
  if (idx < 0 || idx >= static_cast<int64_t>(tab.size()))
    throw ValidationError("simplex index out of range");
  return tab[static_cast<size_t>(idx)];
}

int64_t Complex::face(int n, int64_t idx, int i) const {
  if (n < 1 || n > max_dim())
    throw ValidationError("face maps exist only for dimensions >= 1");
  if (idx < 0 || idx >= size(n))
    throw ValidationError("simplex index out of range");
  if (i < 0 || i > n) throw ValidationError("face index out of range");
  return faces_[static_cast<size_t>(n)]
               [static_cast<size_t>(idx) * (n + 1) + static_cast<size_t>(i)];
}

int64_t Complex::global_id(int n, int64_t idx) const {
  if (n < 0 || n > max_dim() || idx < 0 || idx >= size(n))
    throw ValidationError("simplex id out of range");
  return offsets_[static_cast<size_t>(n)] + idx;
}

std::pair<int, int64_t> Complex::from_global(int64_t gid) const {
  if (gid < 0 || gid >= total_) throw ValidationError("global id out of range");
  int n = 0;
  while (offsets_[static_cast<size_t>(n) + 1] <= gid) ++n;
  return {n, gid - offsets_[static_cast<size_t>(n)]};
}

int64_t Complex::index_of(int n, const Tuple& t) const {
  if (n < 0 || n > max_dim()) return -1;
  const auto& tab = tables_[static_cast<size_t>(n)];
  auto it = std::lower_bound(tab.begin(), tab.end(), t);
  if (it != tab.end() && *it == t) return it - tab.begin();
  if (std::is_sorted(tab.begin(), tab.end())) return -1;
  auto lin = std::find(tab.begin(), tab.end(), t);
  return lin == tab.end() ? -1 : lin - tab.begin();
}

Complex build_flag_complex(const Digraph& g, int max_dim) {
  if (max_dim < 0) throw ValidationError("max_dim must be >= 0");
  int n = g.num_vertices();
  size_t words = static_cast<size_t>((n + 63) / 64);

  std::vector<uint64_t> out_bits(words * static_cast<size_t>(n), 0);
  for (auto [u, v] : g.edges())
    out_bits[static_cast<size_t>(u) * words + static_cast<size_t>(v) / 64] |=
        1ULL << (v % 64);

  // Per-root buckets per dimension 1..max_dim, merged in root order so the
  // result is identical for every thread count.
  std::vector<std::vector<std::vector<Tuple>>> buckets(
      static_cast<size_t>(n),
      std::vector<std::vector<Tuple>>(static_cast<size_t>(max_dim)));

  if (max_dim >= 1 && n > 0) {
    parallel_for(n, [&](int64_t lo, int64_t hi) {
      std::vector<std::vector<uint64_t>> cand(
          static_cast<size_t>(max_dim), std::vector<uint64_t>(words));
      Tuple prefix;
      // Extends prefix (a transitive clique whose common out-neighborhood
      // is cand[depth]) by every candidate in ascending order; emission
      // order is lexicographic per root.
      std::function<void(int64_t, int)> grow = [&](int64_t root, int depth) {
        auto& cs = cand[static_cast<size_t>(depth)];
        for (int w = 0; w < n; ++w) {
          if (!(cs[static_cast<size_t>(w) / 64] >> (w % 64) & 1)) continue;
          prefix.push_back(w);
          buckets[static_cast<size_t>(root)][static_cast<size_t>(depth)]
              .push_back(prefix);
          if (depth + 1 < max_dim) {
            auto& nx = cand[static_cast<size_t>(depth) + 1];
            const uint64_t* wrow = &out_bits[static_cast<size_t>(w) * words];
            for (size_t k = 0; k < words; ++k) nx[k] = cs[k] & wrow[k];
            grow(root, depth + 1);
          }
          prefix.pop_back();
        }
      };
      for (int64_t root = lo; root < hi; ++root) {
        prefix.assign(1, static_cast<int>(root));
        const uint64_t* rrow = &out_bits[static_cast<size_t>(root) * words];
        std::copy(rrow, rrow + words, cand[0].begin());
        grow(root, 0);
        prefix.clear();
      }
    });
  }

  Complex c;
  c.num_vertices_ = n;
  c.tables_.resize(static_cast<size_t>(max_dim) + 1);
  c.faces_.resize(static_cast<size_t>(max_dim) + 1);
  c.tables_[0].reserve(static_cast<size_t>(n));
  for (int v = 0; v < n; ++v) c.tables_[0].push_back(Tuple{v});
  for (int d = 1; d <= max_dim; ++d) {
    auto& tab = c.tables_[static_cast<size_t>(d)];
    for (int root = 0; root < n; ++root) {
      auto& src = buckets[static_cast<size_t>(root)][static_cast<size_t>(d - 1)];
      tab.insert(tab.end(), std::make_move_iterator(src.begin()),
                 std::make_move_iterator(src.end()));
    }
  }

  // Tables are lexicographically sorted by construction; faces resolve by
  // binary search one dimension down.
  for (int d = 1; d <= max_dim; ++d) {
    const auto& tab = c.tables_[static_cast<size_t>(d)];
    const auto& below = c.tables_[static_cast<size_t>(d - 1)];
    auto& fc = c.faces_[static_cast<size_t>(d)];
    fc.assign(tab.size() * static_cast<size_t>(d + 1), -1);
    parallel_for(static_cast<int64_t>(tab.size()), [&](int64_t lo, int64_t hi) {
      for (int64_t s = lo; s < hi; ++s) {
        for (int i = 0; i <= d; ++i) {
          Tuple f = erase_at(tab[static_cast<size_t>(s)], i);
          auto it = std::lower_bound(below.begin(), below.end(), f);
          fc[static_cast<size_t>(s) * (d + 1) + static_cast<size_t>(i)] =
              it - below.begin();
        }
      }
    });
  }

  c.finalize();
  return c;
}

Complex make_complex_from_tables(int num_vertices,
                                 std::vector<std::vector<Tuple>> tables) {
  Complex c;
  c.num_vertices_ = num_vertices;
  if (tables.empty()) tables.emplace_back();
  c.tables_ = std::move(tables);
  c.faces_.resize(c.tables_.size());
  for (size_t n = 0; n < c.tables_.size(); ++n) {
    std::map<Tuple, int64_t> where;
    for (size_t i = 0; i < c.tables_[n].size(); ++i) {
      check_tuple(c.tables_[n][i], static_cast<int>(n), num_vertices);
      auto [it, fresh] =
          where.emplace(c.tables_[n][i], static_cast<int64_t>(i));
      if (!fresh)
        throw ValidationError("duplicate tuple in dimension " +
                              std::to_string(n));
    }
    if (n == 0) continue;
    std::map<Tuple, int64_t> below;
    for (size_t i = 0; i < c.tables_[n - 1].size(); ++i)
      below.emplace(c.tables_[n - 1][i], static_cast<int64_t>(i));
    auto& fc = c.faces_[n];
    fc.assign(c.tables_[n].size() * (n + 1), -1);
    for (size_t i = 0; i < c.tables_[n].size(); ++i) {
      for (size_t k = 0; k <= n; ++k) {
        Tuple f = erase_at(c.tables_[n][i], static_cast<int>(k));
        auto it = below.find(f);
        if (it == below.end())
          throw ValidationError("missing face of a dimension-" +
                                std::to_string(n) + " simplex");
        fc[i * (n + 1) + k] = it->second;
      }
    }
  }
  c.finalize();
  return c;
}

SsetBuilder::SsetBuilder(int num_vertices) {
  if (num_vertices < 0) throw ValidationError("negative vertex count");
  c_.num_vertices_ = num_vertices;
}

int64_t SsetBuilder::add(int dim, Tuple tuple) {
  if (dim < 0) throw ValidationError("negative dimension");
  check_tuple(tuple, dim, c_.num_vertices_);
  if (static_cast<int>(c_.tables_.size()) <= dim) {
    c_.tables_.resize(static_cast<size_t>(dim) + 1);
    c_.faces_.resize(static_cast<size_t>(dim) + 1);
  }
  auto& tab = c_.tables_[static_cast<size_t>(dim)];
  tab.push_back(std::move(tuple));
  if (dim >= 1)
    c_.faces_[static_cast<size_t>(dim)].resize(tab.size() * (dim + 1), -1);
  return static_cast<int64_t>(tab.size()) - 1;
}

void SsetBuilder::set_face(int n, int64_t idx, int i, int64_t face_idx) {
  if (n < 1 || n >= static_cast<int>(c_.tables_.size()))
    throw ValidationError("face dimension out of range");
  auto& tab = c_.tables_[static_cast<size_t>(n)];
  if (idx < 0 || idx >= static_cast<int64_t>(tab.size()))
    throw ValidationError("simplex index out of range");
  if (i < 0 || i > n) throw ValidationError("face index out of range");
  if (n - 1 >= static_cast<int>(c_.tables_.size()) || face_idx < 0 ||
      face_idx >= static_cast<int64_t>(c_.tables_[static_cast<size_t>(n) - 1].size()))
    throw ValidationError("face target out of range");
  c_.faces_[static_cast<size_t>(n)]
           [static_cast<size_t>(idx) * (n + 1) + static_cast<size_t>(i)] =
      face_idx;
}

Complex SsetBuilder::finish() {
  if (c_.tables_.empty()) {
    c_.tables_.emplace_back();
    c_.faces_.emplace_back();
  }
  for (size_t n = 1; n < c_.faces_.size(); ++n)
    for (int64_t v : c_.faces_[n])
      if (v < 0) throw ValidationError("face map not total");
  Complex out = c_;
  out.finalize();
  return out;
}

std::vector<IdentityViolation> verify_simplicial_identity(const Complex& c) {
  std::vector<IdentityViolation> bad;
  for (int n = 2; n <= c.max_dim(); ++n) {
    for (int64_t s = 0; s < c.size(n); ++s) {
      for (int j = 1; j <= n; ++j) {
        for (int i = 0; i < j; ++i) {
          int64_t a = c.face(n - 1, c.face(n, s, j), i);
          int64_t b = c.face(n - 1, c.face(n, s, i), j - 1);
          if (a != b) bad.push_back({n, s, i, j});
        }
      }
    }
  }
  return bad;
}

std::vector<ClosureViolation> verify_closure(const Complex& c) {
  std::vector<ClosureViolation> bad;
  for (int n = 1; n <= c.max_dim(); ++n) {
    for (int64_t s = 0; s < c.size(n); ++s) {
      const Tuple& t = c.tuple(n, s);
      for (int i = 0; i <= n; ++i) {
        int64_t f = c.face(n, s, i);
        if (f < 0 || f >= c.size(n - 1)) {
          bad.push_back({n, s, i, "face index out of range"});
          continue;
        }
        if (c.tuple(n - 1, f) != erase_at(t, i))
          bad.push_back({n, s, i, "face tuple is not the i-th deletion"});
      }
    }
  }
  return bad;
}

bool tuples_unique_per_dim(const Complex& c) {
  for (int n = 0; n <= c.max_dim(); ++n) {
    auto tab = c.table(n);
    std::sort(tab.begin(), tab.end());
    if (std::adjacent_find(tab.begin(), tab.end()) != tab.end()) return false;
  }
  return true;
}

UComplex symmetrize(const Complex& c) {
  UComplex u;
  u.num_vertices = c.num_vertices();
  u.tables.resize(static_cast<size_t>(c.max_dim()) + 1);
  for (int n = 0; n <= c.max_dim(); ++n) {
    auto& out = u.tables[static_cast<size_t>(n)];
    out.reserve(static_cast<size_t>(c.size(n)));
    for (const Tuple& t : c.table(n)) {
      Tuple s = t;
      std::sort(s.begin(), s.end());
      out.push_back(std::move(s));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return u;
}

bool downward_closed(const UComplex& u) {
  for (size_t n = 1; n < u.tables.size(); ++n) {
    const auto& below = u.tables[n - 1];
    for (const Tuple& t : u.tables[n]) {
      for (size_t i = 0; i < t.size(); ++i) {
        Tuple f = erase_at(t, static_cast<int>(i));
        if (!std::binary_search(below.begin(), below.end(), f)) return false;
      }
    }
  }
  return true;
}

Complex transitivize(const UComplex& u, const std::vector<int>& order) {
  if (static_cast<int>(order.size()) != u.num_vertices)
    throw ValidationError("order must list every vertex");
  std::vector<int> rank(order.size(), -1);
  for (size_t r = 0; r < order.size(); ++r) {
    int v = order[r];
    if (v < 0 || v >= u.num_vertices || rank[static_cast<size_t>(v)] != -1)
      throw ValidationError("order is not a permutation of the vertices");
    rank[static_cast<size_t>(v)] = static_cast<int>(r);
  }
  std::vector<std::vector<Tuple>> tables(u.tables.size());
  for (size_t n = 0; n < u.tables.size(); ++n) {
    tables[n].reserve(u.tables[n].size());
    for (Tuple t : u.tables[n]) {
      std::sort(t.begin(), t.end(), [&](int a, int b) {
        return rank[static_cast<size_t>(a)] < rank[static_cast<size_t>(b)];
      });
      tables[n].push_back(std::move(t));
    }
    std::sort(tables[n].begin(), tables[n].end());
  }
  return make_complex_from_tables(u.num_vertices, std::move(tables));
}

bool ucomplex_equal(const UComplex& a, const UComplex& b) {
  size_t hi = std::max(a.tables.size(), b.tables.size());
  for (size_t n = 0; n < hi; ++n) {
    static const std::vector<Tuple> kEmpty;
    const auto& ta = n < a.tables.size() ? a.tables[n] : kEmpty;
    const auto& tb = n < b.tables.size() ? b.tables[n] : kEmpty;
    if (ta != tb) return false;
  }
  return a.num_vertices == b.num_vertices;
}

namespace {

// Shared backtracking core. Extension consistency is checked against the
// 1-skeleton; complexes additionally verify the full tuple tables at leaves.
struct IsoInstance {
  int n = 0;
  size_t words = 0;
  std::vector<uint64_t> out_bits, in_bits;
  std::vector<std::string> sig;
  const Complex* cx = nullptr;
};

void iso_add_edge(IsoInstance& m, int u, int v) {
  m.out_bits[static_cast<size_t>(u) * m.words + static_cast<size_t>(v) / 64] |=
      1ULL << (v % 64);
  m.in_bits[static_cast<size_t>(v) * m.words + static_cast<size_t>(u) / 64] |=
      1ULL << (u % 64);
}

bool iso_edge(const IsoInstance& m, int u, int v) {
  return m.out_bits[static_cast<size_t>(u) * m.words +
                    static_cast<size_t>(v) / 64] >>
             (v % 64) &
         1;
}

IsoInstance iso_prepare(const Digraph& g, const VertexLabels* labels) {
  IsoInstance m;
  m.n = g.num_vertices();
  m.words = static_cast<size_t>((m.n + 63) / 64);
  m.out_bits.assign(m.words * static_cast<size_t>(m.n), 0);
  m.in_bits.assign(m.words * static_cast<size_t>(m.n), 0);
  for (auto [u, v] : g.edges()) iso_add_edge(m, u, v);

  // Vertex signature: (in-degree, out-degree, transitive-triangle count,
  // attribute label).
  std::vector<int> ind(static_cast<size_t>(m.n), 0),
      outd(static_cast<size_t>(m.n), 0), tri(static_cast<size_t>(m.n), 0);
  for (auto [u, v] : g.edges()) {
    ++outd[static_cast<size_t>(u)];
    ++ind[static_cast<size_t>(v)];
  }
  Complex fl = build_flag_complex(g, 2);
  for (const Tuple& t : fl.table(2))
    for (int v : t) ++tri[static_cast<size_t>(v)];
  m.sig.resize(static_cast<size_t>(m.n));
  for (int v = 0; v < m.n; ++v) {
    auto sv = static_cast<size_t>(v);
    m.sig[sv] = std::to_string(ind[sv]) + ":" + std::to_string(outd[sv]) +
                ":" + std::to_string(tri[sv]);
    if (labels) m.sig[sv] += "|" + (*labels)[sv];
  }
  return m;
}

Digraph one_skeleton(const Complex& c) {
  std::vector<std::pair<int, int>> edges;
  if (c.max_dim() >= 1)
    for (const Tuple& t : c.table(1)) edges.emplace_back(t[0], t[1]);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return Digraph(c.num_vertices(), std::move(edges));
}

IsoInstance iso_prepare(const Complex& c, const VertexLabels* labels) {
  IsoInstance m = iso_prepare(one_skeleton(c), labels);
  m.cx = &c;
  // Fold per-dimension positional incidence counts into the signature.
  std::vector<std::vector<int>> pos_counts(static_cast<size_t>(m.n));
  for (int v = 0; v < m.n; ++v) {
    for (int d = 0; d <= c.max_dim(); ++d)
      for (int p = 0; p <= d; ++p) pos_counts[static_cast<size_t>(v)].push_back(0);
  }
  for (int d = 0; d <= c.max_dim(); ++d) {
    int base = d * (d + 1) / 2;
    for (const Tuple& t : c.table(d))
      for (size_t p = 0; p < t.size(); ++p)
        ++pos_counts[static_cast<size_t>(t[p])][static_cast<size_t>(base) + p];
  }
  for (int v = 0; v < m.n; ++v) {
    auto& s = m.sig[static_cast<size_t>(v)];
    for (int cnt : pos_counts[static_cast<size_t>(v)])
      s += "," + std::to_string(cnt);
  }
  return m;
}

std::optional<std::vector<int>> iso_search(const IsoInstance& a,
                                           const IsoInstance& b, int cap) {
  if (a.n > cap || b.n > cap)
    throw ResourceError("isomorphism search limited to " +
                        std::to_string(cap) + " vertices");
  if (a.n != b.n) return std::nullopt;
  {
    auto sa = a.sig, sb = b.sig;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    if (sa != sb) return std::nullopt;
  }

  // Assign rare signature classes first.
  std::map<std::string, int> class_size;
  for (const auto& s : a.sig) ++class_size[s];
  std::vector<int> order(static_cast<size_t>(a.n));
  for (int v = 0; v < a.n; ++v) order[static_cast<size_t>(v)] = v;
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    auto kx = std::tuple(class_size[a.sig[static_cast<size_t>(x)]],
                         a.sig[static_cast<size_t>(x)], x);
    auto ky = std::tuple(class_size[a.sig[static_cast<size_t>(y)]],
                         a.sig[static_cast<size_t>(y)], y);
    return kx < ky;
  });

  std::vector<int> psi(static_cast<size_t>(a.n), -1);
  std::vector<bool> used(static_cast<size_t>(a.n), false);
  std::vector<int> assigned;  // a-vertices in assignment order

  std::function<bool(size_t)> step = [&](size_t pos) -> bool {
    if (pos == order.size()) {
      if (!a.cx) return true;
      const Complex& ca = *a.cx;
      const Complex& cb = *b.cx;
      for (int d = 0; d <= std::max(ca.max_dim(), cb.max_dim()); ++d) {
        if (ca.size(d) != cb.size(d)) return false;
        if (d > ca.max_dim()) continue;
        for (const Tuple& t : ca.table(d)) {
          Tuple mapped;
          mapped.reserve(t.size());
          for (int v : t) mapped.push_back(psi[static_cast<size_t>(v)]);
          if (cb.index_of(d, mapped) < 0) return false;
        }
      }
      return true;
    }
    int v = order[pos];
    for (int w = 0; w < b.n; ++w) {
      if (used[static_cast<size_t>(w)]) continue;
      if (a.sig[static_cast<size_t>(v)] != b.sig[static_cast<size_t>(w)])
        continue;
      bool ok = true;
      for (int u : assigned) {
        int pu = psi[static_cast<size_t>(u)];
        if (iso_edge(a, u, v) != iso_edge(b, pu, w) ||
            iso_edge(a, v, u) != iso_edge(b, w, pu)) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      psi[static_cast<size_t>(v)] = w;
      used[static_cast<size_t>(w)] = true;
      assigned.push_back(v);
      if (step(pos + 1)) return true;
      assigned.pop_back();
      used[static_cast<size_t>(w)] = false;
      psi[static_cast<size_t>(v)] = -1;
    }
    return false;
  };

  if (step(0)) return psi;
  return std::nullopt;
}

void check_labels(const VertexLabels* l, int n, const char* side) {
  if (l && static_cast<int>(l->size()) != n)
    throw ValidationError(std::string("label count mismatch on ") + side);
}

}  // namespace

std::optional<std::vector<int>> brute_force_isomorphic(const Digraph& a,
                                                       const Digraph& b,
                                                       const VertexLabels* la,
                                                       const VertexLabels* lb,
                                                       IsoOptions opt) {
  check_labels(la, a.num_vertices(), "a");
  check_labels(lb, b.num_vertices(), "b");
  if (a.num_edges() != b.num_edges()) {
    if (a.num_vertices() > opt.cap || b.num_vertices() > opt.cap)
      throw ResourceError("isomorphism search limited to " +
                          std::to_string(opt.cap) + " vertices");
    return std::nullopt;
  }
  return iso_search(iso_prepare(a, la), iso_prepare(b, lb), opt.cap);
}

std::optional<std::vector<int>> brute_force_isomorphic(const Complex& a,
                                                       const Complex& b,
                                                       const VertexLabels* la,
                                                       const VertexLabels* lb,
                                                       IsoOptions opt) {
  check_labels(la, a.num_vertices(), "a");
  check_labels(lb, b.num_vertices(), "b");
  return iso_search(iso_prepare(a, la), iso_prepare(b, lb), opt.cap);
}

}  // namespace ssx
