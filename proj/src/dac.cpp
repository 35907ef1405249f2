#include "ssx/dac.hpp"

#include <algorithm>
#include <bit>

#include "ssx/errors.hpp"
#include "ssx/threads.hpp"

namespace ssx {

BitMatrix::BitMatrix(int64_t rows, int cols)
    : rows_(rows), cols_(cols), wpr_((cols + 63) / 64) {
  if (rows < 0 || cols < 0) throw ValidationError("negative matrix shape");
  bits_.assign(static_cast<size_t>(rows * wpr_), 0);
}

void BitMatrix::check(int64_t r, int c) const {
  if (r < 0 || r >= rows_ || c < 0 || c >= cols_)
    throw ValidationError("bit matrix index out of range");
}

bool BitMatrix::get(int64_t r, int c) const {
  check(r, c);
  return bits_[static_cast<size_t>(r * wpr_ + c / 64)] >> (c % 64) & 1;
}

void BitMatrix::set(int64_t r, int c, bool v) {
  check(r, c);
  uint64_t& w = bits_[static_cast<size_t>(r * wpr_ + c / 64)];
  if (v)
    w |= 1ULL << (c % 64);
  else
    w &= ~(1ULL << (c % 64));
}

void BitMatrix::and_row_into(int64_t dst, int64_t src) {
  for (int64_t k = 0; k < wpr_; ++k)
    bits_[static_cast<size_t>(dst * wpr_ + k)] &=
        bits_[static_cast<size_t>(src * wpr_ + k)];
}

void BitMatrix::copy_row(int64_t dst, int64_t src) {
  for (int64_t k = 0; k < wpr_; ++k)
    bits_[static_cast<size_t>(dst * wpr_ + k)] =
        bits_[static_cast<size_t>(src * wpr_ + k)];
}

int64_t BitMatrix::count_row(int64_t r) const {
  int64_t n = 0;
  for (int64_t k = 0; k < wpr_; ++k)
    n += std::popcount(bits_[static_cast<size_t>(r * wpr_ + k)]);
  return n;
}

void validate_dyn(const DynDigraph& g) {
  if (g.activations.rows() != g.graph.num_vertices())
    throw ValidationError("activation rows must match vertex count");
  if (g.activations.cols() < 1)
    throw ValidationError("at least one time bin required");
}

Dac lift_dac(const DynDigraph& g, int max_dim) {
  validate_dyn(g);
  Dac dac;
  dac.complex = build_flag_complex(g.graph, max_dim);
  dac.activations = BitMatrix(dac.complex.size(), g.T());
  const Complex& c = dac.complex;
  // Vertex rows verbatim; global ids of vertices are 0..|V|-1.
  for (int v = 0; v < c.num_vertices(); ++v)
    for (int t = 0; t < g.T(); ++t)
      dac.activations.set(v, t, g.activations.get(v, t));
  for (int n = 1; n <= c.max_dim(); ++n) {
    if (c.size(n) == 0) continue;
    int64_t base = c.global_id(n, 0);
    parallel_for(c.size(n), [&](int64_t lo, int64_t hi) {
      for (int64_t s = lo; s < hi; ++s) {
        const Tuple& t = c.tuple(n, s);
        dac.activations.copy_row(base + s, t[0]);
        for (size_t a = 1; a < t.size(); ++a)
          dac.activations.and_row_into(base + s, t[a]);
      }
    });
  }
  return dac;
}

void check_time(const Dac& dac, int t0) {
  if (t0 < 0 || t0 >= dac.T()) throw ValidationError("time bin out of range");
}

Digraph functional_subgraph(const DynDigraph& g, int t0,
                            std::vector<int>* old_ids) {
  if (t0 < 0 || t0 >= g.T()) throw ValidationError("time bin out of range");
  std::vector<int> active;
  for (int v = 0; v < g.graph.num_vertices(); ++v)
    if (g.activations.get(v, t0)) active.push_back(v);
  return induced_subgraph(g.graph, active, old_ids);
}

std::vector<Sid> active_simplices(const Dac& dac, int t0) {
  check_time(dac, t0);
  std::vector<Sid> out;
  for (int n = 0; n <= dac.complex.max_dim(); ++n)
    for (int64_t s = 0; s < dac.complex.size(n); ++s)
      if (dac.active(n, s, t0)) out.push_back(Sid{n, s});
  return out;
}

bool check_functional_subcomplex(const DynDigraph& g, const Dac& dac, int t0) {
  std::vector<int> old_ids;
  Digraph sub = functional_subgraph(g, t0, &old_ids);
  Complex fsub = build_flag_complex(sub, dac.complex.max_dim());
  for (int n = 0; n <= dac.complex.max_dim(); ++n) {
    std::vector<Tuple> from_sub;
    for (const Tuple& t : fsub.table(n)) {
      Tuple mapped;
      mapped.reserve(t.size());
      for (int v : t) mapped.push_back(old_ids[static_cast<size_t>(v)]);
      from_sub.push_back(std::move(mapped));
    }
    std::vector<Tuple> active;
    for (int64_t s = 0; s < dac.complex.size(n); ++s)
      if (dac.active(n, s, t0)) active.push_back(dac.complex.tuple(n, s));
    std::sort(from_sub.begin(), from_sub.end());
    std::sort(active.begin(), active.end());
    if (from_sub != active) return false;
  }
  return true;
}

bool activity_face_closed(const Dac& dac) {
  const Complex& c = dac.complex;
  for (int n = 1; n <= c.max_dim(); ++n)
    for (int64_t s = 0; s < c.size(n); ++s)
      for (int t = 0; t < dac.T(); ++t) {
        if (!dac.active(n, s, t)) continue;
        for (int i = 0; i <= n; ++i)
          if (!dac.active(n - 1, c.face(n, s, i), t)) return false;
      }
  return true;
}

VertexLabels activation_labels(const DynDigraph& g) {
  VertexLabels out(static_cast<size_t>(g.graph.num_vertices()));
  for (int v = 0; v < g.graph.num_vertices(); ++v) {
    std::string row;
    for (int t = 0; t < g.T(); ++t)
      row += g.activations.get(v, t) ? '1' : '0';
    out[static_cast<size_t>(v)] = std::move(row);
  }
  return out;
}

}  // namespace ssx
