#include "ssx/digraph.hpp"

#include <algorithm>
#include <string>

#include "ssx/errors.hpp"

namespace ssx {

Digraph::Digraph(int num_vertices, std::vector<std::pair<int, int>> edges)
    : n_(num_vertices), edges_(std::move(edges)) {
  if (n_ < 0) throw ValidationError("negative vertex count");
  std::sort(edges_.begin(), edges_.end());
  for (size_t i = 0; i < edges_.size(); ++i) {
    auto [u, v] = edges_[i];
    if (u < 0 || u >= n_ || v < 0 || v >= n_)
      throw ValidationError("edge (" + std::to_string(u) + "," +
                            std::to_string(v) + ") out of range");
    if (u == v)
      throw ValidationError("self-loop at vertex " + std::to_string(u));
    if (i > 0 && edges_[i] == edges_[i - 1])
      throw ValidationError("duplicate edge (" + std::to_string(u) + "," +
                            std::to_string(v) + ")");
  }
}

bool Digraph::has_edge(int u, int v) const {
  return std::binary_search(edges_.begin(), edges_.end(), std::pair{u, v});
}

std::vector<std::vector<int>> Digraph::out_lists() const {
  std::vector<std::vector<int>> out(static_cast<size_t>(n_));
  for (auto [u, v] : edges_) out[static_cast<size_t>(u)].push_back(v);
  return out;  // sorted because edges_ is sorted
}

std::vector<std::vector<int>> Digraph::in_lists() const {
  std::vector<std::vector<int>> in(static_cast<size_t>(n_));
  for (auto [u, v] : edges_) in[static_cast<size_t>(v)].push_back(u);
  for (auto& l : in) std::sort(l.begin(), l.end());
  return in;
}

Digraph induced_subgraph(const Digraph& g, const std::vector<int>& vertices,
                         std::vector<int>* old_ids) {
  std::vector<int> keep(vertices);
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  std::vector<int> to_new(static_cast<size_t>(g.num_vertices()), -1);
  for (size_t i = 0; i < keep.size(); ++i) {
    int v = keep[i];
    if (v < 0 || v >= g.num_vertices())
      throw ValidationError("unknown vertex " + std::to_string(v));
    to_new[static_cast<size_t>(v)] = static_cast<int>(i);
  }
  std::vector<std::pair<int, int>> edges;
  for (auto [u, v] : g.edges()) {
    int nu = to_new[static_cast<size_t>(u)];
    int nv = to_new[static_cast<size_t>(v)];
    if (nu >= 0 && nv >= 0) edges.emplace_back(nu, nv);
  }
  if (old_ids) *old_ids = keep;
  return Digraph(static_cast<int>(keep.size()), std::move(edges));
}

Digraph relabel(const Digraph& g, const std::vector<int>& perm) {
  if (static_cast<int>(perm.size()) != g.num_vertices())
    throw ValidationError("permutation size mismatch");
  std::vector<bool> seen(perm.size(), false);
  for (int p : perm) {
    if (p < 0 || p >= g.num_vertices() || seen[static_cast<size_t>(p)])
      throw ValidationError("not a permutation");
    seen[static_cast<size_t>(p)] = true;
  }
  std::vector<std::pair<int, int>> edges;
  edges.reserve(g.edges().size());
  for (auto [u, v] : g.edges())
    edges.emplace_back(perm[static_cast<size_t>(u)],
                       perm[static_cast<size_t>(v)]);
  return Digraph(g.num_vertices(), std::move(edges));
}

Digraph symmetrized(const Digraph& g) {
  std::vector<std::pair<int, int>> edges;
  edges.reserve(g.edges().size() * 2);
  for (auto [u, v] : g.edges()) {
    edges.emplace_back(u, v);
    edges.emplace_back(v, u);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return Digraph(g.num_vertices(), std::move(edges));
}

Digraph circulant(int n, const std::vector<int>& steps) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int s : steps) edges.emplace_back(i, (i + s) % n);
  return Digraph(n, std::move(edges));
}

}  // namespace ssx
