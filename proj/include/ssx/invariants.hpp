#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ssx/dac.hpp"
#include "ssx/relation.hpp"

namespace ssx {

// One integer per time bin, index 0 = first bin.
using TimeSeries = std::vector<int64_t>;
using RealSeries = std::vector<double>;
// Canonical comparison form: per bin, the sorted multiset of local values.
using MultisetSeries = std::vector<std::vector<int64_t>>;

// {(sigma,tau) in r : tau active at t0} — restriction filters the second
// component only.
Relation restrict_active(const Relation& r, const Dac& dac, int t0);
// k-fold composition first, then the activity restriction. Filtering each
// hop would be a different quantity and is not provided.
Relation restricted_khop(const Relation& r, const Dac& dac, int t0, int k);

// Local activity invariants; u/v are vertex indices, sigma an index into
// the dimension-n table. All k-hop variants require k >= 1.
TimeSeries inv_size(const Dac& dac, int64_t u, int k);
TimeSeries inv_indeg(const Dac& dac, int64_t u, int k);
TimeSeries inv_outdeg(const Dac& dac, int64_t u, int k);
TimeSeries inv_dir(const Dac& dac, int64_t u, int k);  // indeg - outdeg
TimeSeries inv_rc(const Dac& dac, int64_t u, int k);
TimeSeries inv_td(const Dac& dac, int64_t v);  // active triangles through v
// Signed higher-order degree: |lower(n,i,j) successors| minus
// |lower(n,j,i) successors| among active simplices.
TimeSeries inv_hodir(const Dac& dac, int64_t sigma, int n, int i, int j, int k);

// Alternating sum over dimensions of active-simplex counts per bin.
TimeSeries euler_series(const Dac& dac);

enum class InvariantKind { kSize, kEc, kTd, kDir, kHodir, kRc };

struct InvariantSpec {
  InvariantKind kind = InvariantKind::kSize;
  int k = 1;               // hops (size/dir/rc/hodir)
  int n = 1, i = 0, j = 1;  // hodir only
};

InvariantSpec parse_invariant_spec(const std::string& kind, int k, int n,
                                   int i, int j);

// Local series for every carrier element (vertices, or the dimension-n
// table for hodir; ec has a single global carrier).
std::vector<TimeSeries> local_series(const Dac& dac, const InvariantSpec& s);

// Permutation-invariant aggregations of the local series.
TimeSeries global_sum(const Dac& dac, const InvariantSpec& s);
RealSeries global_mean(const Dac& dac, const InvariantSpec& s);
MultisetSeries global_multiset(const Dac& dac, const InvariantSpec& s);

// Fixed-length feature vector over exactly two time bins: per bin
// [ec, sum-size(k=1..K), sum-dir(k=1..K), sum-hodir on edge pair (0,1) and
// triangle pairs (0,1),(1,2),(0,2), each k=1..K], giving 2(6K+1) entries.
// Requires a structure with a dimension-2 table.
std::vector<double> topofeat(const Dac& dac, int K);

}  // namespace ssx
