#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ssx/complex.hpp"
#include "ssx/invariants.hpp"
#include "ssx/relation.hpp"

namespace ssx {

// One real matrix per dimension, rows = simplices of that dimension in table
// order, all matrices sharing one feature width.
using FeatureSet = std::vector<Eigen::MatrixXd>;

FeatureSet features_from_dac(const Dac& dac);            // width = T
FeatureSet constant_features(const Complex& c, int width, double value);

// Channel-relation grammar: conv(expr) | hop(k, expr) | c02 | id(n) | any
// derive() spelling (r_in, lower(2,0,2), ...).
Relation resolve_channel(const Complex& c, const std::string& spelling);

enum class InnerAgg { kSum, kMean, kMax };
enum class OuterAgg { kSum, kMean };
enum class Activation { kIdentity, kRelu };
enum class ReadoutKind { kMean, kSum, kDimMeanConcat, kFlatten };

// A message channel: (sigma, tau) in rel sends sigma's features to tau.
// Messages are x W + b per neighbor, aggregated by the layer's inner
// aggregator over the tau-neighborhood (empty neighborhood = zero row).
// A nonempty spelling makes the channel portable: the relation is resolved
// against each input structure instead of using the bound rel.
struct RelationChannel {
  std::string name;
  std::string spelling;  // resolve_channel grammar; empty = use rel
  Relation rel;
  int src = 0, dst = 0;
  Eigen::MatrixXd W;  // in_width x msg_width
  Eigen::MatrixXd b;  // 1 x msg_width
};

// Noisy top-k expert gate over the channels of one (target, source) group.
// Scores: softmax over the k largest gate values, ties to the lowest index.
struct RoutingGate {
  int target = 0, source = 0;
  Eigen::MatrixXd Wg;  // in_width x experts
  Eigen::MatrixXd Wn;  // in_width x experts
  int k = 1;
  bool noise = true;
};

// Two-step update per target dimension t: channels are grouped by source
// dimension s, neighbor-aggregated messages are combined by the inner
// aggregator across the group's channels (scaled by gate scores when the
// group is routed), groups combine across s by the outer aggregator, and
// phi = activation([self || aggregate] W_phi + b_phi) finishes the update.
struct SsnLayer {
  std::vector<RelationChannel> channels;
  std::vector<RoutingGate> gates;  // at most one per (target, source) group
  InnerAgg inner = InnerAgg::kSum;
  OuterAgg outer = OuterAgg::kSum;
  Activation act = Activation::kRelu;
  int msg_width = 0;
  Eigen::MatrixXd W_phi;  // (in_width + msg_width) x out_width
  Eigen::MatrixXd b_phi;  // 1 x out_width
};

struct SsnModel {
  std::vector<SsnLayer> layers;
  ReadoutKind readout = ReadoutKind::kMean;
  Eigen::MatrixXd W_head;  // readout width x classes; 0x0 = no head
  Eigen::MatrixXd b_head;  // 1 x classes
};

// Per-forward standard-normal draws for noisy gates: eps[layer][gate] has
// one entry per expert. Missing draws mean zero noise.
struct GateDraws {
  std::vector<std::vector<Eigen::VectorXd>> eps;
};

// ---- routing primitives ----

// k-th largest of gates with index i removed; -inf when fewer than k remain.
double kth_excluding(const Eigen::VectorXd& gates, int k, int i);
// gates(x) = x Wg + eps .* softplus(x Wn); eps null = no noise.
Eigen::VectorXd gate_values(const Eigen::RowVectorXd& x, const RoutingGate& g,
                            const Eigen::VectorXd* eps);
// Softmax over the top-k gate values; exactly k nonzero entries.
Eigen::VectorXd routing_scores(const Eigen::VectorXd& gates, int k);
// P(x, i) = Phi(((x Wg)_i - kth_excluding(gates, k, i)) / softplus(x Wn)_i).
Eigen::VectorXd selection_probability(const Eigen::RowVectorXd& x,
                                      const RoutingGate& g,
                                      const Eigen::VectorXd* eps);
// Load_i = sum over the batch of P(x, i); eps (when given) must supply one
// draw vector per batch element.
Eigen::VectorXd load_estimate(const std::vector<Eigen::RowVectorXd>& xs,
                              const RoutingGate& g,
                              const std::vector<Eigen::VectorXd>* eps);
// lambda * (population stddev / mean)^2; zero-mean load gives 0.
double load_loss(const Eigen::VectorXd& load, double lambda);

// ---- forward ----

struct ChannelTrace {
  Eigen::MatrixXd msg;         // S_dst x msg_width, pre-gating
  std::vector<int64_t> count;  // neighborhood sizes per receiver
  Eigen::MatrixXi winner;      // max aggregation: winning source row per cell
};

struct GateTrace {
  Eigen::RowVectorXd x;      // pooled source features
  Eigen::VectorXd clean;     // x Wg
  Eigen::VectorXd raw_n;     // x Wn
  Eigen::VectorXd sp;        // softplus(x Wn)
  Eigen::VectorXd eps;       // draws used (zeros when noise off)
  Eigen::VectorXd gates;     // noisy gate values
  Eigen::VectorXd scores;    // routing scores, zeros off the top-k
};

struct LayerTrace {
  FeatureSet in;
  std::vector<Relation> rels;  // materialized channel relations
  std::vector<ChannelTrace> channels;
  std::vector<GateTrace> gates;
  std::vector<Eigen::MatrixXd> group_inner;   // aggregate per (t, s) group
  std::vector<Eigen::MatrixXi> group_winner;  // inner max: winning channel
  FeatureSet agg;  // outer aggregate per target dim
  FeatureSet pre;  // pre-activation
};

struct ModelTrace {
  std::vector<LayerTrace> layers;
  FeatureSet features;       // final per-dim features
  Eigen::VectorXd readout;
  Eigen::VectorXd logits;    // empty when the model has no head
};

FeatureSet forward_layer(const SsnLayer& layer, const Complex& c,
                         const FeatureSet& x,
                         const std::vector<Eigen::VectorXd>* gate_eps = nullptr,
                         LayerTrace* trace = nullptr);

ModelTrace ssn_forward(const SsnModel& model, const Complex& c,
                       const FeatureSet& x,
                       const GateDraws* draws = nullptr);

Eigen::VectorXd readout_features(const FeatureSet& x, ReadoutKind kind);

// ---- invariant-recovering construction ----

// Fixed-weight model whose carrier-dimension output rows on the activation
// features equal the local invariant series (ec: the summed readout equals
// the alternating-sum series). width must match the feature width (= T).
SsnModel construct_invariant_ssn(const Complex& c, const InvariantSpec& spec,
                                 int width);

// ---- parameters and gradients ----

using GradMap = std::map<std::string, Eigen::MatrixXd>;

// Stable names: L<i>.ch<j>.W / .b, L<i>.phi.W / .b, L<i>.gate<j>.Wg / .Wn,
// head.W / head.b.
std::vector<std::pair<std::string, Eigen::MatrixXd*>> named_params(
    SsnModel& model);

struct BatchItem {
  const Complex* complex = nullptr;
  FeatureSet features;
  int label = 0;
  GateDraws draws;
};

// Mean softmax cross-entropy over the batch plus lambda-weighted load loss
// summed over routed groups. Fills grads (keyed like named_params) when
// non-null; predictions get the argmax class per item.
double ssn_loss(SsnModel& model, const std::vector<BatchItem>& batch,
                double load_lambda, GradMap* grads = nullptr,
                std::vector<int>* predictions = nullptr);

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
};

// Central finite differences over every named parameter entry.
GradCheckReport gradient_check(SsnModel& model,
                               const std::vector<BatchItem>& batch,
                               double load_lambda, double step = 1e-5);

}  // namespace ssx
