#include "ssx/invariants.hpp"

#include <algorithm>
#include <stdexcept>

#include "ssx/catalog.hpp"
#include "ssx/errors.hpp"

namespace ssx {

namespace {

void need_host(const Relation& r, const Dac& dac) {
  if (r.host_uid() != 0 && r.host_uid() != dac.complex.uid())
    throw ValidationError("relation is bound to a different host structure");
}

void need_hops(int k) {
  if (k < 1) throw ValidationError("invariant hop count must be >= 1");
}

void need_vertex(const Dac& dac, int64_t u, const char* what) {
  if (u < 0 || u >= dac.complex.size(0))
    throw ValidationError(std::string(what) + " vertex index out of range");
}

TimeSeries zero_series(const Dac& dac) {
  return TimeSeries(static_cast<size_t>(dac.T()), 0);
}

// Number of active successors of u under rel, per time bin.
TimeSeries count_active_successors(const Relation& rel, const Dac& dac,
                                   Sid u) {
  TimeSeries out = zero_series(dac);
  for (const Sid& s : rel.successors(u))
    for (int t = 0; t < dac.T(); ++t)
      if (dac.active(s.dim, s.idx, t)) ++out[t];
  return out;
}

TimeSeries diff_series(const TimeSeries& a, const TimeSeries& b) {
  TimeSeries out(a.size(), 0);
  for (size_t t = 0; t < a.size(); ++t) out[t] = a[t] - b[t];
  return out;
}

void check_hodir_params(int n, int i, int j) {
  if (n < 1) throw ValidationError("hodir requires dimension >= 1");
  if (i < 0 || i > n || j < 0 || j > n)
    throw ValidationError("hodir face positions must lie in [0, n]");
  if (i == j) throw ValidationError("hodir face positions must differ");
}

}  // namespace

Relation restrict_active(const Relation& r, const Dac& dac, int t0) {
  need_host(r, dac);
  check_time(dac, t0);
  std::vector<SidPair> keep;
  keep.reserve(r.size());
  for (const SidPair& p : r.pairs())
    if (dac.active(p.second.dim, p.second.idx, t0)) keep.push_back(p);
  int64_t host = r.host_uid() != 0 ? r.host_uid() : dac.complex.uid();
  return Relation(std::move(keep), host);
}

Relation restricted_khop(const Relation& r, const Dac& dac, int t0, int k) {
  return restrict_active(k_hop(r, k), dac, t0);
}

TimeSeries inv_size(const Dac& dac, int64_t u, int k) {
  need_vertex(dac, u, "size");
  need_hops(k);
  if (dac.complex.max_dim() < 1) return zero_series(dac);
  return count_active_successors(k_hop(r_sym(dac.complex), k), dac,
                                 Sid{0, u});
}

TimeSeries inv_indeg(const Dac& dac, int64_t u, int k) {
  need_vertex(dac, u, "indeg");
  need_hops(k);
  if (dac.complex.max_dim() < 1) return zero_series(dac);
  return count_active_successors(k_hop(r_in(dac.complex), k), dac, Sid{0, u});
}

TimeSeries inv_outdeg(const Dac& dac, int64_t u, int k) {
  need_vertex(dac, u, "outdeg");
  need_hops(k);
  if (dac.complex.max_dim() < 1) return zero_series(dac);
  return count_active_successors(k_hop(r_out(dac.complex), k), dac,
                                 Sid{0, u});
}

TimeSeries inv_dir(const Dac& dac, int64_t u, int k) {
  return diff_series(inv_indeg(dac, u, k), inv_outdeg(dac, u, k));
}

TimeSeries inv_rc(const Dac& dac, int64_t u, int k) {
  need_vertex(dac, u, "rc");
  need_hops(k);
  if (dac.complex.max_dim() < 1) return zero_series(dac);
  return count_active_successors(k_hop(r_rc(dac.complex), k), dac, Sid{0, u});
}

TimeSeries inv_td(const Dac& dac, int64_t v) {
  need_vertex(dac, v, "td");
  return count_active_successors(c02(dac.complex), dac, Sid{0, v});
}

TimeSeries inv_hodir(const Dac& dac, int64_t sigma, int n, int i, int j,
                     int k) {
  check_hodir_params(n, i, j);
  need_hops(k);
  const Complex& c = dac.complex;
  if (n > c.max_dim())
    throw ValidationError("hodir dimension out of range");
  if (sigma < 0 || sigma >= c.size(n))
    throw ValidationError("hodir simplex index out of range");
  TimeSeries pos =
      count_active_successors(k_hop(lower(c, n, i, j), k), dac, Sid{n, sigma});
  TimeSeries neg =
      count_active_successors(k_hop(lower(c, n, j, i), k), dac, Sid{n, sigma});
  return diff_series(pos, neg);
}

TimeSeries euler_series(const Dac& dac) {
  TimeSeries out = zero_series(dac);
  const Complex& c = dac.complex;
  for (int n = 0; n <= c.max_dim(); ++n) {
    int64_t sign = (n % 2 == 0) ? 1 : -1;
    for (int64_t s = 0; s < c.size(n); ++s)
      for (int t = 0; t < dac.T(); ++t)
        if (dac.active(n, s, t)) out[t] += sign;
  }
  return out;
}

InvariantSpec parse_invariant_spec(const std::string& kind, int k, int n,
                                   int i, int j) {
  InvariantSpec s;
  if (kind == "size")
    s.kind = InvariantKind::kSize;
  else if (kind == "ec")
    s.kind = InvariantKind::kEc;
  else if (kind == "td")
    s.kind = InvariantKind::kTd;
  else if (kind == "dir")
    s.kind = InvariantKind::kDir;
  else if (kind == "hodir")
    s.kind = InvariantKind::kHodir;
  else if (kind == "rc")
    s.kind = InvariantKind::kRc;
  else
    throw ValidationError("unknown invariant kind: " + kind);

  bool hops = s.kind == InvariantKind::kSize || s.kind == InvariantKind::kDir ||
              s.kind == InvariantKind::kRc || s.kind == InvariantKind::kHodir;
  if (hops) {
    need_hops(k);
    s.k = k;
  }
  if (s.kind == InvariantKind::kHodir) {
    check_hodir_params(n, i, j);
    s.n = n;
    s.i = i;
    s.j = j;
  }
  return s;
}

std::vector<TimeSeries> local_series(const Dac& dac, const InvariantSpec& s) {
  const Complex& c = dac.complex;
  std::vector<TimeSeries> out;
  switch (s.kind) {
    case InvariantKind::kEc:
      out.push_back(euler_series(dac));
      return out;
    case InvariantKind::kSize:
    case InvariantKind::kDir:
    case InvariantKind::kRc: {
      need_hops(s.k);
      int64_t nv = c.size(0);
      out.assign(static_cast<size_t>(nv), zero_series(dac));
      if (c.max_dim() < 1) return out;
      if (s.kind == InvariantKind::kSize) {
        Relation rel = k_hop(r_sym(c), s.k);
        for (int64_t u = 0; u < nv; ++u)
          out[static_cast<size_t>(u)] =
              count_active_successors(rel, dac, Sid{0, u});
      } else if (s.kind == InvariantKind::kDir) {
        Relation rin = k_hop(r_in(c), s.k);
        Relation rout = k_hop(r_out(c), s.k);
        for (int64_t u = 0; u < nv; ++u)
          out[static_cast<size_t>(u)] =
              diff_series(count_active_successors(rin, dac, Sid{0, u}),
                          count_active_successors(rout, dac, Sid{0, u}));
      } else {
        Relation rel = k_hop(r_rc(c), s.k);
        for (int64_t u = 0; u < nv; ++u)
          out[static_cast<size_t>(u)] =
              count_active_successors(rel, dac, Sid{0, u});
      }
      return out;
    }
    case InvariantKind::kTd: {
      Relation rel = c02(c);
      int64_t nv = c.size(0);
      out.reserve(static_cast<size_t>(nv));
      for (int64_t v = 0; v < nv; ++v)
        out.push_back(count_active_successors(rel, dac, Sid{0, v}));
      return out;
    }
    case InvariantKind::kHodir: {
      check_hodir_params(s.n, s.i, s.j);
      need_hops(s.k);
      if (s.n > c.max_dim()) return out;  // empty carrier set
      Relation pos = k_hop(lower(c, s.n, s.i, s.j), s.k);
      Relation neg = k_hop(lower(c, s.n, s.j, s.i), s.k);
      int64_t ns = c.size(s.n);
      out.reserve(static_cast<size_t>(ns));
      for (int64_t sig = 0; sig < ns; ++sig)
        out.push_back(
            diff_series(count_active_successors(pos, dac, Sid{s.n, sig}),
                        count_active_successors(neg, dac, Sid{s.n, sig})));
      return out;
    }
  }
  throw std::logic_error("unreachable invariant kind");
}

TimeSeries global_sum(const Dac& dac, const InvariantSpec& s) {
  TimeSeries acc = zero_series(dac);
  for (const TimeSeries& row : local_series(dac, s))
    for (size_t t = 0; t < acc.size(); ++t) acc[t] += row[t];
  return acc;
}

RealSeries global_mean(const Dac& dac, const InvariantSpec& s) {
  std::vector<TimeSeries> rows = local_series(dac, s);
  RealSeries acc(static_cast<size_t>(dac.T()), 0.0);
  if (rows.empty()) return acc;
  for (const TimeSeries& row : rows)
    for (size_t t = 0; t < acc.size(); ++t)
      acc[t] += static_cast<double>(row[t]);
  for (double& v : acc) v /= static_cast<double>(rows.size());
  return acc;
}

MultisetSeries global_multiset(const Dac& dac, const InvariantSpec& s) {
  std::vector<TimeSeries> rows = local_series(dac, s);
  MultisetSeries out(static_cast<size_t>(dac.T()));
  for (size_t t = 0; t < out.size(); ++t) {
    out[t].reserve(rows.size());
    for (const TimeSeries& row : rows) out[t].push_back(row[t]);
    std::sort(out[t].begin(), out[t].end());
  }
  return out;
}

std::vector<double> topofeat(const Dac& dac, int K) {
  if (K < 1) throw ValidationError("topofeat requires K >= 1");
  if (dac.T() != 2)
    throw ValidationError("topofeat is defined for exactly two time bins");
  if (dac.complex.max_dim() < 2)
    throw ValidationError("topofeat requires a structure of dimension >= 2");

  TimeSeries ec = euler_series(dac);
  auto sums = [&](InvariantKind kind, int n, int i, int j) {
    std::vector<TimeSeries> per_k;
    per_k.reserve(static_cast<size_t>(K));
    for (int k = 1; k <= K; ++k) {
      InvariantSpec s;
      s.kind = kind;
      s.k = k;
      s.n = n;
      s.i = i;
      s.j = j;
      per_k.push_back(global_sum(dac, s));
    }
    return per_k;
  };
  std::vector<TimeSeries> size_k = sums(InvariantKind::kSize, 1, 0, 1);
  std::vector<TimeSeries> dir_k = sums(InvariantKind::kDir, 1, 0, 1);
  const int ho_params[4][3] = {{1, 0, 1}, {2, 0, 1}, {2, 1, 2}, {2, 0, 2}};
  std::vector<std::vector<TimeSeries>> ho_k;
  for (const auto& p : ho_params)
    ho_k.push_back(sums(InvariantKind::kHodir, p[0], p[1], p[2]));

  std::vector<double> out;
  out.reserve(2 * (6 * static_cast<size_t>(K) + 1));
  for (int t = 0; t < 2; ++t) {
    out.push_back(static_cast<double>(ec[static_cast<size_t>(t)]));
    for (int k = 0; k < K; ++k)
      out.push_back(static_cast<double>(
          size_k[static_cast<size_t>(k)][static_cast<size_t>(t)]));
    for (int k = 0; k < K; ++k)
      out.push_back(static_cast<double>(
          dir_k[static_cast<size_t>(k)][static_cast<size_t>(t)]));
    for (const auto& block : ho_k)
      for (int k = 0; k < K; ++k)
        out.push_back(static_cast<double>(
            block[static_cast<size_t>(k)][static_cast<size_t>(t)]));
  }
  return out;
}

}  // namespace ssx
