#include "ssx/relation.hpp"

#include <algorithm>

#include "ssx/errors.hpp"

namespace ssx {

namespace {

uint64_t merge_hosts(uint64_t a, uint64_t b) {
  if (a != 0 && b != 0 && a != b)
    throw ValidationError("relations belong to different host structures");
  return a != 0 ? a : b;
}

struct FirstLess {
  bool operator()(const SidPair& p, const Sid& s) const { return p.first < s; }
  bool operator()(const Sid& s, const SidPair& p) const { return s < p.first; }
};

void sort_unique(std::vector<SidPair>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

Relation::Relation(std::vector<SidPair> pairs, uint64_t host_uid)
    : pairs_(std::move(pairs)), host_(host_uid) {
  for (const auto& [a, b] : pairs_)
    if (a.dim < 0 || a.idx < 0 || b.dim < 0 || b.idx < 0)
      throw ValidationError("negative simplex id in relation");
  sort_unique(pairs_);
}

bool Relation::contains(Sid a, Sid b) const {
  return std::binary_search(pairs_.begin(), pairs_.end(), SidPair{a, b});
}

std::vector<Sid> Relation::successors(Sid u) const {
  auto [lo, hi] = std::equal_range(pairs_.begin(), pairs_.end(), u, FirstLess{});
  std::vector<Sid> out;
  out.reserve(static_cast<size_t>(hi - lo));
  for (auto it = lo; it != hi; ++it) out.push_back(it->second);
  return out;
}

std::vector<Sid> Relation::predecessors(Sid u) const {
  std::vector<Sid> out;
  for (const auto& [a, b] : pairs_)
    if (b == u) out.push_back(a);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Sid> Relation::support() const {
  std::vector<Sid> out;
  out.reserve(pairs_.size() * 2);
  for (const auto& [a, b] : pairs_) {
    out.push_back(a);
    out.push_back(b);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Relation union_(const Relation& a, const Relation& b) {
  uint64_t host = merge_hosts(a.host_uid(), b.host_uid());
  std::vector<SidPair> out;
  out.reserve(a.pairs().size() + b.pairs().size());
  std::set_union(a.pairs().begin(), a.pairs().end(), b.pairs().begin(),
                 b.pairs().end(), std::back_inserter(out));
  return Relation(std::move(out), host);
}

Relation intersect(const Relation& a, const Relation& b) {
  uint64_t host = merge_hosts(a.host_uid(), b.host_uid());
  std::vector<SidPair> out;
  std::set_intersection(a.pairs().begin(), a.pairs().end(), b.pairs().begin(),
                        b.pairs().end(), std::back_inserter(out));
  return Relation(std::move(out), host);
}

Relation compose(const Relation& a, const Relation& b) {
  uint64_t host = merge_hosts(a.host_uid(), b.host_uid());
  std::vector<SidPair> out;
  const auto& bp = b.pairs();
  for (const auto& [sigma, kappa] : a.pairs()) {
    auto [lo, hi] = std::equal_range(bp.begin(), bp.end(), kappa, FirstLess{});
    for (auto it = lo; it != hi; ++it) out.emplace_back(sigma, it->second);
  }
  return Relation(std::move(out), host);
}

Relation converse(const Relation& a) {
  std::vector<SidPair> out;
  out.reserve(a.pairs().size());
  for (const auto& [x, y] : a.pairs()) out.emplace_back(y, x);
  return Relation(std::move(out), a.host_uid());
}

TernaryRelation join(const Relation& a, const Relation& b) {
  TernaryRelation t;
  t.host_uid = merge_hosts(a.host_uid(), b.host_uid());
  const auto& bp = b.pairs();
  for (const auto& [sigma, kappa] : a.pairs()) {
    auto [lo, hi] = std::equal_range(bp.begin(), bp.end(), kappa, FirstLess{});
    for (auto it = lo; it != hi; ++it)
      t.triples.emplace_back(sigma, kappa, it->second);
  }
  std::sort(t.triples.begin(), t.triples.end());
  t.triples.erase(std::unique(t.triples.begin(), t.triples.end()),
                  t.triples.end());
  return t;
}

Relation k_hop(const Relation& r, int k) {
  if (k < 0) throw ValidationError("negative hop count");
  if (k == 0) {
    std::vector<SidPair> out;
    for (Sid s : r.support()) out.emplace_back(s, s);
    return Relation(std::move(out), r.host_uid());
  }
  Relation acc = r;
  for (int step = 1; step < k; ++step) acc = compose(acc, r);
  return acc;
}

std::string dump_relation(const Relation& r) {
  std::string out;
  for (const auto& [a, b] : r.pairs()) {
    out += std::to_string(a.dim) + ":" + std::to_string(a.idx) + " " +
           std::to_string(b.dim) + ":" + std::to_string(b.idx) + "\n";
  }
  return out;
}

SparseAdjacency to_adjacency(const Relation& r, const Complex& host,
                             AdjacencyIndexing indexing) {
  if (r.host_uid() != 0 && r.host_uid() != host.uid())
    throw ValidationError("relation does not belong to this structure");
  for (const auto& [a, b] : r.pairs())
    for (Sid s : {a, b})
      if (s.dim > host.max_dim() || s.idx >= host.size(s.dim))
        throw ValidationError("relation id outside the host's tables");

  SparseAdjacency m;
  if (indexing == AdjacencyIndexing::kGlobal) {
    m.rows = m.cols = host.size();
    m.entries.reserve(r.pairs().size());
    for (const auto& [a, b] : r.pairs())
      m.entries.emplace_back(host.global_id(a.dim, a.idx),
                             host.global_id(b.dim, b.idx));
  } else {
    if (r.empty()) return m;
    int sd = r.pairs().front().first.dim;
    int dd = r.pairs().front().second.dim;
    for (const auto& [a, b] : r.pairs())
      if (a.dim != sd || b.dim != dd)
        throw ValidationError(
            "per-dimension indexing needs uniform dimensions on each side");
    m.rows = host.size(sd);
    m.cols = host.size(dd);
    m.entries.reserve(r.pairs().size());
    for (const auto& [a, b] : r.pairs()) m.entries.emplace_back(a.idx, b.idx);
  }
  std::sort(m.entries.begin(), m.entries.end());
  return m;
}

}  // namespace ssx
