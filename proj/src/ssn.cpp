#include "ssx/ssn.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>

#include "ssx/catalog.hpp"
#include "ssx/dac.hpp"
#include "ssx/errors.hpp"
#include "ssx/threads.hpp"

namespace ssx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double softplus(double z) {
  if (z > 30.0) return z;
  if (z < -30.0) return std::exp(z);
  return std::log1p(std::exp(z));
}

double logistic(double z) {
  if (z >= 0) {
    double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(z);
  return e / (1.0 + e);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.14159265358979323846);
}

// Channels grouped by (target, source); deterministic (t, s) order.
struct Group {
  int t = 0, s = 0;
  std::vector<int> channels;
  int gate = -1;
};

std::vector<Group> make_groups(const SsnLayer& layer) {
  std::map<std::pair<int, int>, Group> by_key;
  for (size_t i = 0; i < layer.channels.size(); ++i) {
    const RelationChannel& ch = layer.channels[i];
    Group& g = by_key[{ch.dst, ch.src}];
    g.t = ch.dst;
    g.s = ch.src;
    g.channels.push_back(static_cast<int>(i));
  }
  for (size_t j = 0; j < layer.gates.size(); ++j) {
    auto it = by_key.find({layer.gates[j].target, layer.gates[j].source});
    if (it == by_key.end())
      throw ValidationError("routing gate names a group with no channels");
    if (it->second.gate >= 0)
      throw ValidationError("one routing gate allowed per relation group");
    it->second.gate = static_cast<int>(j);
  }
  std::vector<Group> out;
  out.reserve(by_key.size());
  for (auto& [key, g] : by_key) out.push_back(std::move(g));
  return out;
}

void validate_features(const Complex& c, const FeatureSet& x,
                       const char* what) {
  if (static_cast<int>(x.size()) != c.max_dim() + 1)
    throw ValidationError(std::string(what) +
                          ": one feature matrix required per dimension");
  Eigen::Index width = x.empty() ? 0 : x[0].cols();
  for (int n = 0; n <= c.max_dim(); ++n) {
    if (x[static_cast<size_t>(n)].rows() != c.size(n))
      throw ValidationError(std::string(what) +
                            ": feature rows must match the simplex table");
    if (x[static_cast<size_t>(n)].cols() != width)
      throw ValidationError(std::string(what) +
                            ": feature widths must agree across dimensions");
  }
}

// Materialized channel relations: spelled channels resolve against c, bound
// channels are checked against c's uid.
std::vector<Relation> materialize_channels(const SsnLayer& layer,
                                           const Complex& c) {
  std::vector<Relation> out;
  out.reserve(layer.channels.size());
  for (const RelationChannel& ch : layer.channels)
    out.push_back(ch.spelling.empty() ? ch.rel
                                      : resolve_channel(c, ch.spelling));
  return out;
}

void validate_layer(const SsnLayer& layer, const std::vector<Relation>& rels,
                    const Complex& c, Eigen::Index in_width) {
  if (layer.msg_width < 1)
    throw ValidationError("layer message width must be positive");
  if (layer.W_phi.rows() != in_width + layer.msg_width)
    throw ValidationError("update weights must accept [self || aggregate]");
  if (layer.b_phi.rows() != 1 || layer.b_phi.cols() != layer.W_phi.cols())
    throw ValidationError("update bias shape mismatch");
  for (size_t ci = 0; ci < layer.channels.size(); ++ci) {
    const RelationChannel& ch = layer.channels[ci];
    if (ch.src < 0 || ch.src > c.max_dim() || ch.dst < 0 ||
        ch.dst > c.max_dim())
      throw ValidationError("channel dimension outside the host structure");
    if (rels[ci].host_uid() != 0 && rels[ci].host_uid() != c.uid())
      throw ValidationError("channel relation bound to a different host");
    if (ch.W.rows() != in_width || ch.W.cols() != layer.msg_width)
      throw ValidationError("channel weight shape mismatch");
    if (ch.b.rows() != 1 || ch.b.cols() != layer.msg_width)
      throw ValidationError("channel bias shape mismatch");
    for (const SidPair& p : rels[ci].pairs()) {
      if (p.first.dim != ch.src || p.second.dim != ch.dst)
        throw ValidationError("relation pair outside the declared dimensions");
      if (p.first.idx < 0 || p.first.idx >= c.size(p.first.dim) ||
          p.second.idx < 0 || p.second.idx >= c.size(p.second.dim))
        throw ValidationError("relation pair indexes a missing simplex");
    }
  }
  for (const RoutingGate& g : layer.gates) {
    if (g.Wg.rows() != in_width || g.Wn.rows() != in_width ||
        g.Wg.cols() != g.Wn.cols())
      throw ValidationError("gate weight shape mismatch");
  }
}

Eigen::RowVectorXd mean_pool(const Eigen::MatrixXd& x) {
  if (x.rows() == 0) return Eigen::RowVectorXd::Zero(x.cols());
  return x.colwise().mean();
}

}  // namespace

FeatureSet features_from_dac(const Dac& dac) {
  const Complex& c = dac.complex;
  FeatureSet x(static_cast<size_t>(c.max_dim() + 1));
  for (int n = 0; n <= c.max_dim(); ++n) {
    Eigen::MatrixXd& m = x[static_cast<size_t>(n)];
    m.setZero(c.size(n), dac.T());
    for (int64_t s = 0; s < c.size(n); ++s)
      for (int t = 0; t < dac.T(); ++t)
        if (dac.active(n, s, t)) m(s, t) = 1.0;
  }
  return x;
}

FeatureSet constant_features(const Complex& c, int width, double value) {
  if (width < 1) throw ValidationError("feature width must be positive");
  FeatureSet x(static_cast<size_t>(c.max_dim() + 1));
  for (int n = 0; n <= c.max_dim(); ++n)
    x[static_cast<size_t>(n)] =
        Eigen::MatrixXd::Constant(c.size(n), width, value);
  return x;
}

Relation resolve_channel(const Complex& c, const std::string& spelling) {
  std::string s;
  for (char ch : spelling)
    if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
  if (s.empty()) throw ValidationError("empty channel spelling");
  if (s == "c02") return c02(c);
  auto wrapped = [&](const char* head) -> bool {
    return s.rfind(head, 0) == 0 && s.back() == ')';
  };
  if (wrapped("conv(")) return converse(resolve_channel(c, s.substr(5, s.size() - 6)));
  if (wrapped("hop(")) {
    std::string inner = s.substr(4, s.size() - 5);
    size_t comma = inner.find(',');
    if (comma == std::string::npos)
      throw ValidationError("hop needs a count and a relation: " + spelling);
    int k = 0;
    try {
      size_t used = 0;
      k = std::stoi(inner.substr(0, comma), &used);
      if (used != comma) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ValidationError("bad hop count in: " + spelling);
    }
    return k_hop(resolve_channel(c, inner.substr(comma + 1)), k);
  }
  if (wrapped("id(")) {
    int n = 0;
    try {
      size_t used = 0;
      std::string body = s.substr(3, s.size() - 4);
      n = std::stoi(body, &used);
      if (used != body.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ValidationError("bad dimension in: " + spelling);
    }
    if (n < 0 || n > c.max_dim())
      throw ValidationError("identity dimension out of range");
    std::vector<SidPair> pairs;
    pairs.reserve(static_cast<size_t>(c.size(n)));
    for (int64_t i = 0; i < c.size(n); ++i) pairs.push_back({{n, i}, {n, i}});
    return Relation(std::move(pairs), c.uid());
  }
  return derive(c, s);
}

// ---- routing ----

double kth_excluding(const Eigen::VectorXd& gates, int k, int i) {
  if (k < 1) throw ValidationError("top-k count must be >= 1");
  if (i < 0 || i >= gates.size())
    throw ValidationError("expert index out of range");
  std::vector<double> rest;
  rest.reserve(static_cast<size_t>(gates.size()) - 1);
  for (Eigen::Index j = 0; j < gates.size(); ++j)
    if (j != i) rest.push_back(gates[j]);
  if (static_cast<size_t>(k) > rest.size()) return -kInf;
  std::nth_element(rest.begin(), rest.begin() + (k - 1), rest.end(),
                   std::greater<double>());
  return rest[static_cast<size_t>(k) - 1];
}

Eigen::VectorXd gate_values(const Eigen::RowVectorXd& x, const RoutingGate& g,
                            const Eigen::VectorXd* eps) {
  Eigen::VectorXd clean = (x * g.Wg).transpose();
  if (!g.noise || eps == nullptr) return clean;
  if (eps->size() != clean.size())
    throw ValidationError("one noise draw required per expert");
  Eigen::VectorXd raw = (x * g.Wn).transpose();
  for (Eigen::Index i = 0; i < clean.size(); ++i)
    clean[i] += (*eps)[i] * softplus(raw[i]);
  return clean;
}

Eigen::VectorXd routing_scores(const Eigen::VectorXd& gates, int k) {
  int m = static_cast<int>(gates.size());
  if (k < 1 || k > m)
    throw ValidationError("top-k count must lie in [1, #experts]");
  std::vector<int> order(static_cast<size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (gates[a] != gates[b]) return gates[a] > gates[b];
    return a < b;  // ties to the lowest index
  });
  double hi = gates[order[0]];
  double denom = 0.0;
  for (int j = 0; j < k; ++j) denom += std::exp(gates[order[j]] - hi);
  Eigen::VectorXd scores = Eigen::VectorXd::Zero(m);
  for (int j = 0; j < k; ++j)
    scores[order[j]] = std::exp(gates[order[j]] - hi) / denom;
  return scores;
}

Eigen::VectorXd selection_probability(const Eigen::RowVectorXd& x,
                                      const RoutingGate& g,
                                      const Eigen::VectorXd* eps) {
  Eigen::VectorXd clean = (x * g.Wg).transpose();
  Eigen::VectorXd noisy = gate_values(x, g, eps);
  Eigen::VectorXd raw = (x * g.Wn).transpose();
  int m = static_cast<int>(clean.size());
  if (g.k < 1 || g.k > m)
    throw ValidationError("top-k count must lie in [1, #experts]");
  Eigen::VectorXd p(m);
  for (int i = 0; i < m; ++i) {
    double kth = kth_excluding(noisy, g.k, i);
    if (kth == -kInf) {
      p[i] = 1.0;
      continue;
    }
    double sp = softplus(raw[i]);
    p[i] = normal_cdf((clean[i] - kth) / sp);
  }
  return p;
}

Eigen::VectorXd load_estimate(const std::vector<Eigen::RowVectorXd>& xs,
                              const RoutingGate& g,
                              const std::vector<Eigen::VectorXd>* eps) {
  if (xs.empty()) throw ValidationError("load estimate needs a nonempty batch");
  if (eps && eps->size() != xs.size())
    throw ValidationError("one draw vector required per batch element");
  Eigen::VectorXd load = Eigen::VectorXd::Zero(g.Wg.cols());
  for (size_t b = 0; b < xs.size(); ++b)
    load += selection_probability(xs[b], g, eps ? &(*eps)[b] : nullptr);
  return load;
}

double load_loss(const Eigen::VectorXd& load, double lambda) {
  if (load.size() == 0) return 0.0;
  double mean = load.mean();
  if (mean == 0.0) {
    std::cerr << "load_loss: zero mean load, returning 0 (degenerate)\n";
    return 0.0;
  }
  double var = (load.array() - mean).square().sum() /
               static_cast<double>(load.size());
  return lambda * var / (mean * mean);
}

// ---- forward ----

FeatureSet forward_layer(const SsnLayer& layer, const Complex& c,
                         const FeatureSet& x,
                         const std::vector<Eigen::VectorXd>* gate_eps,
                         LayerTrace* trace) {
  validate_features(c, x, "forward_layer");
  Eigen::Index din = x.empty() ? 0 : x[0].cols();
  std::vector<Relation> rels = materialize_channels(layer, c);
  validate_layer(layer, rels, c, din);
  if (gate_eps && gate_eps->size() != layer.gates.size())
    throw ValidationError("one draw vector required per routing gate");

  int dims = c.max_dim() + 1;
  Eigen::Index dm = layer.msg_width;
  std::vector<Group> groups = make_groups(layer);

  // Neighbor-aggregated message per channel.
  std::vector<ChannelTrace> chtr(layer.channels.size());
  for (size_t ci = 0; ci < layer.channels.size(); ++ci) {
    const RelationChannel& ch = layer.channels[ci];
    ChannelTrace& tr = chtr[ci];
    Eigen::MatrixXd y = x[static_cast<size_t>(ch.src)] * ch.W;
    y.rowwise() += ch.b.row(0);
    int64_t rows = c.size(ch.dst);
    tr.msg.setZero(rows, dm);
    tr.count.assign(static_cast<size_t>(rows), 0);
    if (layer.inner == InnerAgg::kMax) tr.winner.setConstant(rows, dm, -1);
    for (const SidPair& p : rels[ci].pairs()) {
      int64_t src = p.first.idx, dst = p.second.idx;
      if (layer.inner == InnerAgg::kMax) {
        for (Eigen::Index col = 0; col < dm; ++col) {
          // Pairs are sorted by source, so strict > keeps the lowest index.
          if (tr.count[static_cast<size_t>(dst)] == 0 ||
              y(src, col) > tr.msg(dst, col)) {
            tr.msg(dst, col) = y(src, col);
            tr.winner(dst, col) = static_cast<int>(src);
          }
        }
      } else {
        tr.msg.row(dst) += y.row(src);
      }
      ++tr.count[static_cast<size_t>(dst)];
    }
    if (layer.inner == InnerAgg::kMean)
      for (int64_t r = 0; r < rows; ++r)
        if (tr.count[static_cast<size_t>(r)] > 0)
          tr.msg.row(r) /= static_cast<double>(tr.count[static_cast<size_t>(r)]);
  }

  // Gate scores per routed group.
  std::vector<GateTrace> gttr(layer.gates.size());
  for (size_t gi = 0; gi < layer.gates.size(); ++gi) {
    const RoutingGate& g = layer.gates[gi];
    GateTrace& tr = gttr[gi];
    tr.x = mean_pool(x[static_cast<size_t>(g.source)]);
    tr.clean = (tr.x * g.Wg).transpose();
    tr.raw_n = (tr.x * g.Wn).transpose();
    tr.sp = tr.raw_n.unaryExpr([](double z) { return softplus(z); });
    tr.eps = Eigen::VectorXd::Zero(g.Wg.cols());
    if (g.noise && gate_eps && (*gate_eps)[gi].size() > 0) {
      if ((*gate_eps)[gi].size() != tr.clean.size())
        throw ValidationError("one noise draw required per expert");
      tr.eps = (*gate_eps)[gi];
    }
    tr.gates = tr.clean;
    if (g.noise) tr.gates += (tr.eps.array() * tr.sp.array()).matrix();
    tr.scores = routing_scores(tr.gates, g.k);
  }

  // Inner aggregation across each group's channels, then outer across groups.
  std::vector<Eigen::MatrixXd> group_inner(groups.size());
  std::vector<Eigen::MatrixXi> group_winner(groups.size());
  FeatureSet agg(static_cast<size_t>(dims));
  std::vector<int> groups_per_dim(static_cast<size_t>(dims), 0);
  for (int n = 0; n < dims; ++n)
    agg[static_cast<size_t>(n)].setZero(c.size(n), dm);

  for (size_t gi = 0; gi < groups.size(); ++gi) {
    const Group& grp = groups[gi];
    int64_t rows = c.size(grp.t);
    Eigen::MatrixXd inner;
    const Eigen::VectorXd* scores =
        grp.gate >= 0 ? &gttr[static_cast<size_t>(grp.gate)].scores : nullptr;
    if (grp.gate >= 0) {
      const RoutingGate& g = layer.gates[static_cast<size_t>(grp.gate)];
      if (g.Wg.cols() != static_cast<Eigen::Index>(grp.channels.size()))
        throw ValidationError("gate expert count must match group channels");
    }
    if (layer.inner == InnerAgg::kMax) {
      inner.setZero(rows, dm);
      Eigen::MatrixXi win = Eigen::MatrixXi::Constant(
          static_cast<Eigen::Index>(rows), dm, -1);
      for (size_t j = 0; j < grp.channels.size(); ++j) {
        int ci = grp.channels[j];
        double w = scores ? (*scores)[static_cast<Eigen::Index>(j)] : 1.0;
        const Eigen::MatrixXd& m = chtr[static_cast<size_t>(ci)].msg;
        for (int64_t r = 0; r < rows; ++r)
          for (Eigen::Index col = 0; col < dm; ++col) {
            double v = w * m(r, col);
            if (win(r, col) < 0 || v > inner(r, col)) {
              inner(r, col) = v;
              win(r, col) = static_cast<int>(j);
            }
          }
      }
      group_winner[gi] = std::move(win);
    } else {
      inner.setZero(rows, dm);
      for (size_t j = 0; j < grp.channels.size(); ++j) {
        int ci = grp.channels[j];
        double w = scores ? (*scores)[static_cast<Eigen::Index>(j)] : 1.0;
        inner += w * chtr[static_cast<size_t>(ci)].msg;
      }
      if (layer.inner == InnerAgg::kMean)
        inner /= static_cast<double>(grp.channels.size());
    }
    agg[static_cast<size_t>(grp.t)] += inner;
    ++groups_per_dim[static_cast<size_t>(grp.t)];
    group_inner[gi] = std::move(inner);
  }
  if (layer.outer == OuterAgg::kMean)
    for (int n = 0; n < dims; ++n)
      if (groups_per_dim[static_cast<size_t>(n)] > 1)
        agg[static_cast<size_t>(n)] /=
            static_cast<double>(groups_per_dim[static_cast<size_t>(n)]);

  // phi: affine on [self || aggregate], then the nonlinearity.
  FeatureSet pre(static_cast<size_t>(dims)), out(static_cast<size_t>(dims));
  for (int n = 0; n < dims; ++n) {
    const Eigen::MatrixXd& self = x[static_cast<size_t>(n)];
    Eigen::MatrixXd z = self * layer.W_phi.topRows(din) +
                        agg[static_cast<size_t>(n)] *
                            layer.W_phi.bottomRows(dm);
    z.rowwise() += layer.b_phi.row(0);
    pre[static_cast<size_t>(n)] = z;
    out[static_cast<size_t>(n)] =
        layer.act == Activation::kRelu ? z.cwiseMax(0.0) : z;
  }

  if (trace) {
    trace->in = x;
    trace->rels = std::move(rels);
    trace->channels = std::move(chtr);
    trace->gates = std::move(gttr);
    trace->group_inner = std::move(group_inner);
    trace->group_winner = std::move(group_winner);
    trace->agg = std::move(agg);
    trace->pre = std::move(pre);
  }
  return out;
}

Eigen::VectorXd readout_features(const FeatureSet& x, ReadoutKind kind) {
  Eigen::Index width = x.empty() ? 0 : x[0].cols();
  int64_t total = 0;
  for (const Eigen::MatrixXd& m : x) total += m.rows();
  switch (kind) {
    case ReadoutKind::kSum:
    case ReadoutKind::kMean: {
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(width);
      for (const Eigen::MatrixXd& m : x)
        if (m.rows() > 0) acc += m.colwise().sum().transpose();
      if (kind == ReadoutKind::kMean && total > 0)
        acc /= static_cast<double>(total);
      return acc;
    }
    case ReadoutKind::kDimMeanConcat: {
      Eigen::VectorXd out = Eigen::VectorXd::Zero(
          static_cast<Eigen::Index>(x.size()) * width);
      for (size_t n = 0; n < x.size(); ++n)
        if (x[n].rows() > 0)
          out.segment(static_cast<Eigen::Index>(n) * width, width) =
              x[n].colwise().mean().transpose();
      return out;
    }
    case ReadoutKind::kFlatten: {
      Eigen::VectorXd out(total * width);
      Eigen::Index at = 0;
      for (const Eigen::MatrixXd& m : x)
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
          out.segment(at, width) = m.row(r).transpose();
          at += width;
        }
      return out;
    }
  }
  throw std::logic_error("unreachable readout kind");
}

ModelTrace ssn_forward(const SsnModel& model, const Complex& c,
                       const FeatureSet& x, const GateDraws* draws) {
  if (draws && draws->eps.size() != model.layers.size() &&
      !draws->eps.empty())
    throw ValidationError("gate draws must cover every layer");
  ModelTrace tr;
  tr.layers.resize(model.layers.size());
  FeatureSet cur = x;
  for (size_t l = 0; l < model.layers.size(); ++l) {
    const std::vector<Eigen::VectorXd>* eps = nullptr;
    if (draws && !draws->eps.empty()) eps = &draws->eps[l];
    cur = forward_layer(model.layers[l], c, cur, eps, &tr.layers[l]);
  }
  tr.features = cur;
  tr.readout = readout_features(cur, model.readout);
  if (model.W_head.size() > 0) {
    if (model.W_head.rows() != tr.readout.size())
      throw ValidationError("classifier head width mismatch");
    tr.logits = (tr.readout.transpose() * model.W_head + model.b_head.row(0))
                    .transpose();
  }
  return tr;
}

// ---- invariant construction ----

SsnModel construct_invariant_ssn(const Complex& c, const InvariantSpec& spec,
                                 int width) {
  if (width < 1) throw ValidationError("feature width must be positive");
  SsnModel m;
  SsnLayer layer;
  layer.inner = InnerAgg::kSum;
  layer.outer = OuterAgg::kSum;
  layer.act = Activation::kIdentity;
  layer.msg_width = width;
  layer.W_phi.setZero(2 * width, width);
  layer.W_phi.bottomRows(width) = Eigen::MatrixXd::Identity(width, width);
  layer.b_phi.setZero(1, width);

  auto add = [&](const std::string& name, const std::string& spelling,
                 int src, int dst, double lam) {
    RelationChannel ch;
    ch.name = name;
    ch.spelling = spelling;
    ch.src = src;
    ch.dst = dst;
    ch.W = lam * Eigen::MatrixXd::Identity(width, width);
    ch.b.setZero(1, width);
    layer.channels.push_back(std::move(ch));
  };
  auto hop_conv = [&](const std::string& base) {
    return "conv(hop(" + std::to_string(spec.k) + "," + base + "))";
  };

  switch (spec.kind) {
    case InvariantKind::kSize:
      if (c.max_dim() >= 1) add("size", hop_conv("r_sym"), 0, 0, 1.0);
      break;
    case InvariantKind::kDir:
      if (c.max_dim() >= 1) {
        add("indeg", hop_conv("r_in"), 0, 0, 1.0);
        add("outdeg", hop_conv("r_out"), 0, 0, -1.0);
      }
      break;
    case InvariantKind::kRc:
      if (c.max_dim() >= 1) add("rc", hop_conv("rc"), 0, 0, 1.0);
      break;
    case InvariantKind::kTd:
      if (c.max_dim() >= 2) add("td", "conv(c02)", 2, 0, 1.0);
      break;
    case InvariantKind::kHodir:
      if (spec.n <= c.max_dim()) {
        auto low = [&](int a, int b) {
          return "lower(" + std::to_string(spec.n) + "," + std::to_string(a) +
                 "," + std::to_string(b) + ")";
        };
        add("ho+", hop_conv(low(spec.i, spec.j)), spec.n, spec.n, 1.0);
        add("ho-", hop_conv(low(spec.j, spec.i)), spec.n, spec.n, -1.0);
      }
      break;
    case InvariantKind::kEc:
      for (int n = 0; n <= c.max_dim(); ++n)
        add("id" + std::to_string(n), "id(" + std::to_string(n) + ")", n, n,
            n % 2 == 0 ? 1.0 : -1.0);
      break;
  }
  m.layers.push_back(std::move(layer));
  m.readout = ReadoutKind::kSum;
  return m;
}

// ---- parameters ----

std::vector<std::pair<std::string, Eigen::MatrixXd*>> named_params(
    SsnModel& model) {
  std::vector<std::pair<std::string, Eigen::MatrixXd*>> out;
  for (size_t l = 0; l < model.layers.size(); ++l) {
    SsnLayer& layer = model.layers[l];
    std::string base = "L" + std::to_string(l) + ".";
    for (size_t ci = 0; ci < layer.channels.size(); ++ci) {
      out.emplace_back(base + "ch" + std::to_string(ci) + ".W",
                       &layer.channels[ci].W);
      out.emplace_back(base + "ch" + std::to_string(ci) + ".b",
                       &layer.channels[ci].b);
    }
    for (size_t gi = 0; gi < layer.gates.size(); ++gi) {
      out.emplace_back(base + "gate" + std::to_string(gi) + ".Wg",
                       &layer.gates[gi].Wg);
      out.emplace_back(base + "gate" + std::to_string(gi) + ".Wn",
                       &layer.gates[gi].Wn);
    }
    out.emplace_back(base + "phi.W", &layer.W_phi);
    out.emplace_back(base + "phi.b", &layer.b_phi);
  }
  if (model.W_head.size() > 0) {
    out.emplace_back("head.W", &model.W_head);
    out.emplace_back("head.b", &model.b_head);
  }
  return out;
}

// ---- backward ----

namespace {

struct GateGrad {
  Eigen::VectorXd dgates;  // into noisy gate values
  Eigen::VectorXd dclean;  // into x Wg directly (load-loss numerator)
  Eigen::VectorXd dsp;     // into softplus(x Wn) directly
  void init(Eigen::Index m) {
    dgates = Eigen::VectorXd::Zero(m);
    dclean = Eigen::VectorXd::Zero(m);
    dsp = Eigen::VectorXd::Zero(m);
  }
};

// Softmax-over-top-k backward: selection fixed, gradients on selected only.
void score_backward(const Eigen::VectorXd& scores,
                    const Eigen::VectorXd& dscores, Eigen::VectorXd* dgates) {
  double dot = 0.0;
  for (Eigen::Index i = 0; i < scores.size(); ++i)
    dot += scores[i] * dscores[i];
  for (Eigen::Index i = 0; i < scores.size(); ++i)
    if (scores[i] > 0.0) (*dgates)[i] += scores[i] * (dscores[i] - dot);
}

// Load-loss probability backward for one batch element.
void selection_prob_backward(const GateTrace& tr, int k,
                             const Eigen::VectorXd& dp, GateGrad* gg) {
  int m = static_cast<int>(tr.clean.size());
  for (int i = 0; i < m; ++i) {
    if (dp[i] == 0.0) continue;
    double kth = kth_excluding(tr.gates, k, i);
    if (kth == -kInf) continue;  // P constant 1
    // Index supplying the k-th largest among the others (lowest index wins).
    int provider = -1;
    {
      std::vector<int> order;
      for (int j = 0; j < m; ++j)
        if (j != i) order.push_back(j);
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (tr.gates[a] != tr.gates[b]) return tr.gates[a] > tr.gates[b];
        return a < b;
      });
      provider = order[static_cast<size_t>(k) - 1];
    }
    double sp = tr.sp[i];
    double z = (tr.clean[i] - kth) / sp;
    double pdf = normal_pdf(z);
    gg->dclean[i] += dp[i] * pdf / sp;
    gg->dgates[provider] -= dp[i] * pdf / sp;
    gg->dsp[i] -= dp[i] * pdf * (tr.clean[i] - kth) / (sp * sp);
  }
}

void accumulate(GradMap& g, const std::string& key, const Eigen::MatrixXd& v) {
  auto it = g.find(key);
  if (it == g.end())
    g.emplace(key, v);
  else
    it->second += v;
}

FeatureSet layer_backward(const SsnLayer& layer, const Complex& c,
                          const LayerTrace& tr, const FeatureSet& dout,
                          const std::vector<Eigen::VectorXd>* gate_dp,
                          const std::string& base, GradMap& grads) {
  int dims = c.max_dim() + 1;
  Eigen::Index din = tr.in.empty() ? 0 : tr.in[0].cols();
  Eigen::Index dm = layer.msg_width;
  std::vector<Group> groups = make_groups(layer);

  FeatureSet dx(static_cast<size_t>(dims));
  for (int n = 0; n < dims; ++n)
    dx[static_cast<size_t>(n)].setZero(c.size(n), din);

  // phi backward.
  FeatureSet dagg(static_cast<size_t>(dims));
  Eigen::MatrixXd dWphi = Eigen::MatrixXd::Zero(layer.W_phi.rows(),
                                                layer.W_phi.cols());
  Eigen::MatrixXd dbphi = Eigen::MatrixXd::Zero(1, layer.b_phi.cols());
  for (int n = 0; n < dims; ++n) {
    Eigen::MatrixXd dz = dout[static_cast<size_t>(n)];
    if (layer.act == Activation::kRelu)
      dz = dz.cwiseProduct((tr.pre[static_cast<size_t>(n)].array() > 0.0)
                               .cast<double>()
                               .matrix());
    dWphi.topRows(din) += tr.in[static_cast<size_t>(n)].transpose() * dz;
    dWphi.bottomRows(dm) += tr.agg[static_cast<size_t>(n)].transpose() * dz;
    dbphi += dz.colwise().sum();
    dx[static_cast<size_t>(n)] += dz * layer.W_phi.topRows(din).transpose();
    dagg[static_cast<size_t>(n)] =
        dz * layer.W_phi.bottomRows(dm).transpose();
  }
  accumulate(grads, base + "phi.W", dWphi);
  accumulate(grads, base + "phi.b", dbphi);

  // Outer aggregation backward.
  std::vector<int> groups_per_dim(static_cast<size_t>(dims), 0);
  for (const Group& g : groups) ++groups_per_dim[static_cast<size_t>(g.t)];

  std::vector<Eigen::MatrixXd> dmsg(layer.channels.size());
  for (size_t ci = 0; ci < layer.channels.size(); ++ci)
    dmsg[ci].setZero(c.size(layer.channels[ci].dst), dm);
  std::vector<GateGrad> ggrads(layer.gates.size());
  for (size_t gi = 0; gi < layer.gates.size(); ++gi)
    ggrads[gi].init(layer.gates[gi].Wg.cols());

  for (size_t gi = 0; gi < groups.size(); ++gi) {
    const Group& grp = groups[gi];
    Eigen::MatrixXd dinner = dagg[static_cast<size_t>(grp.t)];
    if (layer.outer == OuterAgg::kMean &&
        groups_per_dim[static_cast<size_t>(grp.t)] > 1)
      dinner /= static_cast<double>(groups_per_dim[static_cast<size_t>(grp.t)]);

    const Eigen::VectorXd* scores =
        grp.gate >= 0 ? &tr.gates[static_cast<size_t>(grp.gate)].scores
                      : nullptr;
    Eigen::VectorXd dscores;
    if (scores) dscores = Eigen::VectorXd::Zero(scores->size());

    if (layer.inner == InnerAgg::kMax) {
      const Eigen::MatrixXi& win = tr.group_winner[gi];
      for (Eigen::Index r = 0; r < dinner.rows(); ++r)
        for (Eigen::Index col = 0; col < dm; ++col) {
          int j = win(r, col);
          if (j < 0) continue;
          int ci = grp.channels[static_cast<size_t>(j)];
          double w = scores ? (*scores)[j] : 1.0;
          double msgv = tr.channels[static_cast<size_t>(ci)].msg(r, col);
          dmsg[static_cast<size_t>(ci)](r, col) += w * dinner(r, col);
          if (scores) dscores[j] += dinner(r, col) * msgv;
        }
    } else {
      double scale = layer.inner == InnerAgg::kMean
                         ? 1.0 / static_cast<double>(grp.channels.size())
                         : 1.0;
      for (size_t j = 0; j < grp.channels.size(); ++j) {
        int ci = grp.channels[j];
        double w = scores ? (*scores)[static_cast<Eigen::Index>(j)] : 1.0;
        dmsg[static_cast<size_t>(ci)] += (scale * w) * dinner;
        if (scores)
          dscores[static_cast<Eigen::Index>(j)] +=
              scale *
              dinner.cwiseProduct(tr.channels[static_cast<size_t>(ci)].msg)
                  .sum();
      }
    }
    if (grp.gate >= 0)
      score_backward(*scores, dscores,
                     &ggrads[static_cast<size_t>(grp.gate)].dgates);
  }

  // Gate parameter backward (routing scores plus load-loss probabilities).
  for (size_t gi = 0; gi < layer.gates.size(); ++gi) {
    const RoutingGate& g = layer.gates[gi];
    const GateTrace& gtr = tr.gates[gi];
    GateGrad& gg = ggrads[gi];
    if (gate_dp && (*gate_dp)[gi].size() > 0)
      selection_prob_backward(gtr, g.k, (*gate_dp)[gi], &gg);

    // gates = clean + eps .* sp.
    Eigen::VectorXd dclean = gg.dclean + gg.dgates;
    Eigen::VectorXd dsp = gg.dsp;
    if (g.noise) dsp += (gg.dgates.array() * gtr.eps.array()).matrix();
    Eigen::VectorXd draw =
        (dsp.array() *
         gtr.raw_n.unaryExpr([](double z) { return logistic(z); }).array())
            .matrix();

    accumulate(grads, base + "gate" + std::to_string(gi) + ".Wg",
               gtr.x.transpose() * dclean.transpose());
    accumulate(grads, base + "gate" + std::to_string(gi) + ".Wn",
               gtr.x.transpose() * draw.transpose());
    Eigen::RowVectorXd dxpool =
        (g.Wg * dclean + g.Wn * draw).transpose();
    int64_t rows = c.size(g.source);
    if (rows > 0) {
      Eigen::RowVectorXd spread = dxpool / static_cast<double>(rows);
      dx[static_cast<size_t>(g.source)].rowwise() += spread;
    }
  }

  // Channel backward.
  for (size_t ci = 0; ci < layer.channels.size(); ++ci) {
    const RelationChannel& ch = layer.channels[ci];
    const ChannelTrace& ctr = tr.channels[ci];
    Eigen::MatrixXd dy = Eigen::MatrixXd::Zero(c.size(ch.src), dm);
    if (layer.inner == InnerAgg::kMax) {
      for (Eigen::Index r = 0; r < ctr.winner.rows(); ++r)
        for (Eigen::Index col = 0; col < dm; ++col)
          if (ctr.winner(r, col) >= 0)
            dy(ctr.winner(r, col), col) += dmsg[ci](r, col);
    } else {
      for (const SidPair& p : tr.rels[ci].pairs()) {
        double scale =
            layer.inner == InnerAgg::kMean
                ? 1.0 / static_cast<double>(
                            ctr.count[static_cast<size_t>(p.second.idx)])
                : 1.0;
        dy.row(p.first.idx) += scale * dmsg[ci].row(p.second.idx);
      }
    }
    accumulate(grads, base + "ch" + std::to_string(ci) + ".W",
               tr.in[static_cast<size_t>(ch.src)].transpose() * dy);
    accumulate(grads, base + "ch" + std::to_string(ci) + ".b",
               dy.colwise().sum());
    dx[static_cast<size_t>(ch.src)] += dy * ch.W.transpose();
  }
  return dx;
}

FeatureSet readout_backward(const FeatureSet& fin, ReadoutKind kind,
                            const Eigen::VectorXd& dr) {
  FeatureSet dx(fin.size());
  Eigen::Index width = fin.empty() ? 0 : fin[0].cols();
  int64_t total = 0;
  for (const Eigen::MatrixXd& m : fin) total += m.rows();
  for (size_t n = 0; n < fin.size(); ++n)
    dx[n].setZero(fin[n].rows(), width);
  switch (kind) {
    case ReadoutKind::kSum:
      for (size_t n = 0; n < fin.size(); ++n)
        dx[n].rowwise() += dr.transpose();
      break;
    case ReadoutKind::kMean:
      if (total > 0)
        for (size_t n = 0; n < fin.size(); ++n)
          dx[n].rowwise() += dr.transpose() / static_cast<double>(total);
      break;
    case ReadoutKind::kDimMeanConcat:
      for (size_t n = 0; n < fin.size(); ++n)
        if (fin[n].rows() > 0)
          dx[n].rowwise() +=
              dr.segment(static_cast<Eigen::Index>(n) * width, width)
                  .transpose() /
              static_cast<double>(fin[n].rows());
      break;
    case ReadoutKind::kFlatten: {
      Eigen::Index at = 0;
      for (size_t n = 0; n < fin.size(); ++n)
        for (Eigen::Index r = 0; r < fin[n].rows(); ++r) {
          dx[n].row(r) = dr.segment(at, width).transpose();
          at += width;
        }
      break;
    }
  }
  return dx;
}

}  // namespace

double ssn_loss(SsnModel& model, const std::vector<BatchItem>& batch,
                double load_lambda, GradMap* grads,
                std::vector<int>* predictions) {
  if (batch.empty()) throw ValidationError("loss needs a nonempty batch");
  if (model.W_head.size() == 0)
    throw ValidationError("loss needs a classifier head");
  size_t nb = batch.size();

  std::vector<ModelTrace> traces(nb);
  parallel_for(static_cast<int64_t>(nb), [&](int64_t lo, int64_t hi) {
    for (int64_t b = lo; b < hi; ++b)
      traces[static_cast<size_t>(b)] = ssn_forward(
          model, *batch[static_cast<size_t>(b)].complex,
          batch[static_cast<size_t>(b)].features,
          &batch[static_cast<size_t>(b)].draws);
  });

  int classes = static_cast<int>(model.W_head.cols());
  double ce = 0.0;
  std::vector<Eigen::VectorXd> probs(nb);
  if (predictions) predictions->assign(nb, 0);
  for (size_t b = 0; b < nb; ++b) {
    if (batch[b].label < 0 || batch[b].label >= classes)
      throw ValidationError("label outside the class range");
    const Eigen::VectorXd& z = traces[b].logits;
    double hi = z.maxCoeff();
    Eigen::VectorXd e = (z.array() - hi).exp();
    probs[b] = e / e.sum();
    ce -= std::log(std::max(probs[b][batch[b].label], 1e-300));
    if (predictions) {
      int arg = 0;
      for (int k = 1; k < classes; ++k)
        if (z[k] > z[arg]) arg = k;
      (*predictions)[b] = arg;
    }
  }
  ce /= static_cast<double>(nb);
  double loss = ce;

  // Batch load per (layer, gate): Load_i = sum_b P_b,i.
  struct LoadInfo {
    Eigen::VectorXd load;
    std::vector<Eigen::VectorXd> p;  // per batch element
  };
  std::vector<std::vector<LoadInfo>> loads(model.layers.size());
  for (size_t l = 0; l < model.layers.size(); ++l) {
    loads[l].resize(model.layers[l].gates.size());
    for (size_t gi = 0; gi < model.layers[l].gates.size(); ++gi) {
      const RoutingGate& g = model.layers[l].gates[gi];
      LoadInfo& info = loads[l][gi];
      info.load = Eigen::VectorXd::Zero(g.Wg.cols());
      info.p.resize(nb);
      for (size_t b = 0; b < nb; ++b) {
        const GateTrace& gtr = traces[b].layers[l].gates[gi];
        const Eigen::VectorXd* eps = g.noise ? &gtr.eps : nullptr;
        info.p[b] = selection_probability(gtr.x, g, eps);
        info.load += info.p[b];
      }
      loss += load_loss(info.load, load_lambda);
    }
  }

  if (!grads) return loss;
  grads->clear();
  for (auto& [name, ptr] : named_params(model))
    grads->emplace(name, Eigen::MatrixXd::Zero(ptr->rows(), ptr->cols()));

  // d loss / d Load for every routed group (CV^2 derivative).
  std::vector<std::vector<Eigen::VectorXd>> dload(model.layers.size());
  for (size_t l = 0; l < model.layers.size(); ++l) {
    dload[l].resize(loads[l].size());
    for (size_t gi = 0; gi < loads[l].size(); ++gi) {
      const Eigen::VectorXd& load = loads[l][gi].load;
      Eigen::Index m = load.size();
      dload[l][gi] = Eigen::VectorXd::Zero(m);
      double mean = load.mean();
      if (mean == 0.0 || m == 0) continue;
      double var = (load.array() - mean).square().sum() /
                   static_cast<double>(m);
      for (Eigen::Index i = 0; i < m; ++i) {
        double dvar = 2.0 * (load[i] - mean) / static_cast<double>(m);
        double dmean = 1.0 / static_cast<double>(m);
        dload[l][gi][i] = load_lambda *
                          (dvar / (mean * mean) -
                           2.0 * var * dmean / (mean * mean * mean));
      }
    }
  }

  for (size_t b = 0; b < nb; ++b) {
    Eigen::VectorXd dlogits = probs[b];
    dlogits[batch[b].label] -= 1.0;
    dlogits /= static_cast<double>(nb);

    accumulate(*grads, "head.W", traces[b].readout * dlogits.transpose());
    accumulate(*grads, "head.b", dlogits.transpose());
    Eigen::VectorXd dreadout = model.W_head * dlogits;

    FeatureSet dx =
        readout_backward(traces[b].features, model.readout, dreadout);
    for (size_t l = model.layers.size(); l-- > 0;) {
      std::vector<Eigen::VectorXd> dp(model.layers[l].gates.size());
      for (size_t gi = 0; gi < dp.size(); ++gi) dp[gi] = dload[l][gi];
      std::string base = "L" + std::to_string(l) + ".";
      dx = layer_backward(model.layers[l], *batch[b].complex, traces[b].layers[l],
                          dx, &dp, base, *grads);
    }
  }
  return loss;
}

GradCheckReport gradient_check(SsnModel& model,
                               const std::vector<BatchItem>& batch,
                               double load_lambda, double step) {
  GradMap grads;
  ssn_loss(model, batch, load_lambda, &grads);
  GradCheckReport report;
  for (auto& [name, ptr] : named_params(model)) {
    Eigen::MatrixXd& p = *ptr;
    const Eigen::MatrixXd& g = grads.at(name);
    for (Eigen::Index r = 0; r < p.rows(); ++r)
      for (Eigen::Index cidx = 0; cidx < p.cols(); ++cidx) {
        double keep = p(r, cidx);
        p(r, cidx) = keep + step;
        double up = ssn_loss(model, batch, load_lambda, nullptr);
        p(r, cidx) = keep - step;
        double down = ssn_loss(model, batch, load_lambda, nullptr);
        p(r, cidx) = keep;
        double fd = (up - down) / (2.0 * step);
        double an = g(r, cidx);
        double rel = std::abs(an - fd) /
                     std::max({std::abs(an), std::abs(fd), 1e-6});
        if (rel > report.max_rel_err) {
          report.max_rel_err = rel;
          report.worst_param = name + "(" + std::to_string(r) + "," +
                               std::to_string(cidx) + ")";
        }
      }
  }
  return report;
}

}  // namespace ssx
