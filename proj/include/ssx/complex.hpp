#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ssx/digraph.hpp"

namespace ssx {

// Vertex tuple of a directed simplex, stored order significant.
using Tuple = std::vector<int>;

// Per-vertex opaque labels for attribute-preserving isomorphism checks.
using VertexLabels = std::vector<std::string>;

// Semi-simplicial set with explicit vertex tuples: per-dimension simplex
// tables S_0..S_N plus total face maps d_i^n : S_n -> S_{n-1}. Directed
// simplicial complexes are the special case where tuples are unique per
// dimension and every face map deletes the i-th vertex.
//
// Simplices are addressed as (dim, index) with dense per-dimension indices,
// or by a global id that stacks dimensions in ascending order.
class Complex {
 public:
  int num_vertices() const { return num_vertices_; }

  // Highest table index (tables may be empty at the top).
  int max_dim() const { return static_cast<int>(tables_.size()) - 1; }
  // Highest dimension with at least one simplex; -1 when empty.
  int dim() const;

  int64_t size() const { return total_; }
  int64_t size(int n) const {
    return n >= 0 && n <= max_dim()
               ? static_cast<int64_t>(tables_[static_cast<size_t>(n)].size())
               : 0;
  }

  const std::vector<Tuple>& table(int n) const;
  const Tuple& tuple(int n, int64_t idx) const;

  // Index of d_i^n(sigma) in the (n-1)-table. Throws on out-of-range i
  // or dimension-0 input.
  int64_t face(int n, int64_t idx, int i) const;

  int64_t global_id(int n, int64_t idx) const;
  std::pair<int, int64_t> from_global(int64_t gid) const;

  // Index of a tuple in the dimension-n table; -1 if absent. Requires
  // unique tuples per dimension.
  int64_t index_of(int n, const Tuple& t) const;

  bool tuples_unique() const { return tuples_unique_; }

  // Process-unique id used to detect relation operands from different hosts.
  uint64_t uid() const { return uid_; }

 private:
  friend class SsetBuilder;
  friend Complex build_flag_complex(const Digraph&, int);
  friend Complex make_complex_from_tables(int, std::vector<std::vector<Tuple>>);

  void finalize();  // offsets, totals, uniqueness flag, uid

  int num_vertices_ = 0;
  std::vector<std::vector<Tuple>> tables_;
  // faces_[n] is flat with stride n+1: entry for (idx, i) at idx*(n+1)+i.
  std::vector<std::vector<int64_t>> faces_;
  std::vector<int64_t> offsets_;
  int64_t total_ = 0;
  bool tuples_unique_ = false;
  uint64_t uid_ = 0;
};

// All ordered transitive cliques of g up to max_dim: S_n holds every tuple
// (v_0..v_n) with (v_i, v_j) an edge for all i < j. Tables are sorted
// lexicographically; face maps are filled by construction.
Complex build_flag_complex(const Digraph& g, int max_dim);

// Builds a complex from per-dimension tuple tables, deriving face maps by
// deleting vertices and looking the result up. Tuples must be unique per
// dimension and every face must be present.
Complex make_complex_from_tables(int num_vertices,
                                 std::vector<std::vector<Tuple>> tables);

// Hand-assembled semi-simplicial sets for tests and general (non-complex)
// inputs: duplicate tuples are allowed and face maps are set explicitly.
class SsetBuilder {
 public:
  explicit SsetBuilder(int num_vertices);
  // Returns the new simplex's index within its dimension table.
  int64_t add(int dim, Tuple tuple);
  void set_face(int n, int64_t idx, int i, int64_t face_idx);
  // Validates totality and index ranges of the face maps (not the
  // simplicial identity; use verify_simplicial_identity for that).
  Complex finish();

 private:
  Complex c_;
};

struct IdentityViolation {
  int n;        // simplex dimension
  int64_t idx;  // simplex index
  int i, j;     // i < j with d_i d_j != d_{j-1} d_i
};

// Exhaustive simplicial-identity check; empty result means valid.
std::vector<IdentityViolation> verify_simplicial_identity(const Complex& c);

struct ClosureViolation {
  int n;
  int64_t idx;
  int i;
  std::string what;
};

// Checks that every face map entry is in range and that each face's tuple
// equals the parent tuple with the i-th vertex deleted; for complexes this
// is exactly downward closure plus face-map consistency.
std::vector<ClosureViolation> verify_closure(const Complex& c);

// True when no two distinct simplices of equal dimension share a tuple.
bool tuples_unique_per_dim(const Complex& c);

// Undirected simplicial complex: per-dimension sets of sorted vertex
// tuples, tables sorted and deduplicated.
struct UComplex {
  int num_vertices = 0;
  std::vector<std::vector<Tuple>> tables;
};

// Forgets order: each (v_0..v_n) maps to its sorted vertex set, duplicates
// collapse. Downward-closed whenever the input is.
UComplex symmetrize(const Complex& c);

bool downward_closed(const UComplex& u);

// Orients every unordered simplex by the given total vertex order
// (order lists vertices from smallest to largest rank). Inverse of
// symmetrize on complexes with unique vertex sets.
Complex transitivize(const UComplex& u, const std::vector<int>& order);

bool ucomplex_equal(const UComplex& a, const UComplex& b);

struct IsoOptions {
  int cap = 10;  // maximum vertex count for the exhaustive search
};

// Exhaustive isomorphism witness search with degree/incidence-signature
// pruning. Returns a vertex bijection psi (a-vertex -> b-vertex) preserving
// edges (and labels when supplied), or nullopt. Throws ResourceError above
// the cap.
std::optional<std::vector<int>> brute_force_isomorphic(
    const Digraph& a, const Digraph& b, const VertexLabels* la = nullptr,
    const VertexLabels* lb = nullptr, IsoOptions opt = {});

// Same, preserving every simplex tuple set per dimension.
std::optional<std::vector<int>> brute_force_isomorphic(
    const Complex& a, const Complex& b, const VertexLabels* la = nullptr,
    const VertexLabels* lb = nullptr, IsoOptions opt = {});

}  // namespace ssx
