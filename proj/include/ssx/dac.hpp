#pragma once

#include <cstdint>
#include <vector>

#include "ssx/complex.hpp"
#include "ssx/digraph.hpp"
#include "ssx/relation.hpp"

namespace ssx {

// Dense 0/1 matrix, bit-packed per row. Columns are time bins, 0-indexed in
// storage (reported 1-indexed in file formats and docs).
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(int64_t rows, int cols);

  int64_t rows() const { return rows_; }
  int cols() const { return cols_; }
  bool get(int64_t r, int c) const;
  void set(int64_t r, int c, bool v);
  // words[dst] &= words[src], the elementwise-min of 0/1 rows.
  void and_row_into(int64_t dst, int64_t src);
  void copy_row(int64_t dst, int64_t src);
  int64_t count_row(int64_t r) const;

  friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

 private:
  void check(int64_t r, int c) const;
  int64_t rows_ = 0;
  int cols_ = 0;
  int64_t wpr_ = 0;
  std::vector<uint64_t> bits_;
};

// Directed graph with per-vertex binary activity over T time bins.
struct DynDigraph {
  Digraph graph;
  BitMatrix activations;  // num_vertices x T
  int T() const { return activations.cols(); }
};

// Throws unless the activation matrix has one row per vertex and at least
// one column.
void validate_dyn(const DynDigraph& g);

// Flag complex plus per-simplex activity aligned to global simplex ids:
// a simplex is active exactly when all its vertices are.
struct Dac {
  Complex complex;
  BitMatrix activations;  // complex.size() x T
  int T() const { return activations.cols(); }
  bool active(int n, int64_t idx, int t0) const {
    return activations.get(complex.global_id(n, idx), t0);
  }
};

// Lifts vertex activity to every simplex by elementwise min over the
// simplex's vertex rows.
Dac lift_dac(const DynDigraph& g, int max_dim);

void check_time(const Dac& dac, int t0);

// Subgraph induced by the vertices active at bin t0 (0-indexed); old_ids
// receives the new-index -> original-vertex mapping when non-null.
Digraph functional_subgraph(const DynDigraph& g, int t0,
                            std::vector<int>* old_ids = nullptr);

// Ids of simplices active at t0, sorted.
std::vector<Sid> active_simplices(const Dac& dac, int t0);

// True iff the flag complex of the functional subgraph at t0 coincides,
// dimension by dimension and tuple by tuple (up to the induced relabeling),
// with the active part of the lifted complex.
bool check_functional_subcomplex(const DynDigraph& g, const Dac& dac, int t0);

// True iff activity is face-closed: every face of an active simplex is
// active at the same bin.
bool activity_face_closed(const Dac& dac);

// Per-vertex labels encoding activation rows as 0/1 strings, for
// attribute-preserving isomorphism checks.
VertexLabels activation_labels(const DynDigraph& g);

}  // namespace ssx
