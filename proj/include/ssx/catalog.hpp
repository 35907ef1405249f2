#pragma once

#include <string>
#include <vector>

#include "ssx/relation.hpp"

namespace ssx {

// Face-map relation catalog. Everything below generator() is assembled from
// generators with union/intersect/compose/converse only, so the algebraic
// constructions are exercised by construction. Dimension arguments must be
// structurally addressable (the referenced tables exist, possibly empty);
// out-of-range dimensions raise ValidationError.

Relation empty_relation(const Complex& c);
Relation identity_relation(const Complex& c);

// {(d_i sigma, sigma) : sigma in S_n}, 1 <= n <= max_dim, 0 <= i <= n.
Relation generator(const Complex& c, int n, int i);

// {(sigma, d_i sigma) : sigma in S_n, all i} — each n-simplex to its facets.
Relation boundary(const Complex& c, int n);
// {(sigma, kappa) : sigma in S_n a facet of kappa in S_{n+1}}.
Relation coboundary(const Complex& c, int n);
// {(sigma, tau) in S_n x S_n : d_i sigma = d_j tau}.
Relation lower(const Complex& c, int n, int i, int j);
// {(d_i kappa, d_j kappa) : kappa in S_{n+1}}, indices in [0, n+1].
Relation upper(const Complex& c, int n, int i, int j);
// Union over all index pairs (i = j included for lower, excluded for upper).
Relation lower_all(const Complex& c, int n);
Relation upper_all(const Complex& c, int n);

// Vertex adjacencies: r_in relates u to v when v -> u is an edge; r_out is
// its converse; r_sym their union; r_rc the reciprocal intersection.
Relation r_in(const Complex& c);
Relation r_out(const Complex& c);
Relation r_sym(const Complex& c);
Relation r_rc(const Complex& c);

// Two-step coboundary from vertices to triangles; empty when the structure
// has no dimension-2 table.
Relation c02(const Complex& c);

// {(sigma, tau, kappa) : d_i sigma = d_j tau = kappa} — the shared facet
// exposed as the last component.
TernaryRelation ternary_lower(const Complex& c, int n, int i, int j);

// Parses one of: r_in | r_out | r_sym | rc | boundary(n) | coboundary(n) |
// lower(n,i,j) | upper(n,i,j) | lower_all(n) | upper_all(n).
Relation derive(const Complex& c, const std::string& spec);

struct NamedRelation {
  std::string name;  // the derive() spelling, e.g. "lower(2,0,2)"
  Relation rel;
};

// family 'U': per-dimension boundary/coboundary/lower_all/upper_all.
// family 'D': boundary/coboundary plus every indexed lower(n,i,j) and
// upper(n,i,j) with i != j. Members are emitted up to the effective
// dimension (highest nonempty table), so structures without edges yield
// an empty family. Order is deterministic: kind-major, dimension ascending,
// indices row-major.
std::vector<NamedRelation> relation_family(const Complex& c, char family);

}  // namespace ssx
