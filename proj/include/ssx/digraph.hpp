#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace ssx {

// Simple directed graph on dense vertex ids 0..num_vertices-1.
// No self-loops, no duplicate edges; (u,v) and (v,u) may coexist.
class Digraph {
 public:
  Digraph() = default;
  // Validates ids, rejects self-loops and duplicates; edges are kept
  // sorted lexicographically.
  Digraph(int num_vertices, std::vector<std::pair<int, int>> edges);

  int num_vertices() const { return n_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  int64_t num_edges() const { return static_cast<int64_t>(edges_.size()); }

  bool has_edge(int u, int v) const;

  // Sorted adjacency lists.
  std::vector<std::vector<int>> out_lists() const;
  std::vector<std::vector<int>> in_lists() const;

 private:
  int n_ = 0;
  std::vector<std::pair<int, int>> edges_;
};

// Subgraph induced by `vertices` (deduplicated). Vertex ids are re-densified
// in ascending original order; if old_ids is given it receives the mapping
// new index -> original id.
Digraph induced_subgraph(const Digraph& g, const std::vector<int>& vertices,
                         std::vector<int>* old_ids = nullptr);

// Relabeled copy: vertex v becomes perm[v]; perm must be a permutation.
Digraph relabel(const Digraph& g, const std::vector<int>& perm);

// Symmetric closure: every edge present in both directions.
Digraph symmetrized(const Digraph& g);

// Circulant digraph: i -> (i + s) mod n for each step s.
Digraph circulant(int n, const std::vector<int>& steps);

}  // namespace ssx
