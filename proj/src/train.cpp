#include "ssx/train.hpp"

#include <cmath>
#include <unordered_map>

#include "ssx/errors.hpp"
#include "ssx/rng.hpp"

namespace ssx {

namespace {

std::vector<BatchItem> to_items(const std::vector<TrainExample>& data,
                                const std::vector<int>& order,
                                size_t begin, size_t end) {
  std::vector<BatchItem> items;
  items.reserve(end - begin);
  for (size_t i = begin; i < end; ++i) {
    const TrainExample& ex = data[static_cast<size_t>(order[i])];
    BatchItem item;
    item.complex = ex.complex;
    item.features = ex.features;
    item.label = ex.label;
    items.push_back(std::move(item));
  }
  return items;
}

void draw_noise(std::vector<BatchItem>& items, const SsnModel& model,
                Rng& rng) {
  bool any = false;
  for (const SsnLayer& l : model.layers)
    for (const RoutingGate& g : l.gates)
      if (g.noise) any = true;
  if (!any) return;
  for (BatchItem& item : items) {
    item.draws.eps.resize(model.layers.size());
    for (size_t l = 0; l < model.layers.size(); ++l) {
      const SsnLayer& layer = model.layers[l];
      item.draws.eps[l].resize(layer.gates.size());
      for (size_t gi = 0; gi < layer.gates.size(); ++gi) {
        Eigen::Index m = layer.gates[gi].Wg.cols();
        Eigen::VectorXd eps = Eigen::VectorXd::Zero(m);
        if (layer.gates[gi].noise)
          for (Eigen::Index i = 0; i < m; ++i) eps[i] = rng.normal();
        item.draws.eps[l][gi] = std::move(eps);
      }
    }
  }
}

struct AdamState {
  Eigen::MatrixXd m, v;
};

}  // namespace

double evaluate_ssn(SsnModel& model, const std::vector<TrainExample>& data,
                    double load_lambda, double* accuracy) {
  if (data.empty()) throw ValidationError("evaluation needs a nonempty dataset");
  std::vector<int> order(data.size());
  for (size_t i = 0; i < data.size(); ++i) order[i] = static_cast<int>(i);
  std::vector<BatchItem> items = to_items(data, order, 0, data.size());
  std::vector<int> preds;
  double loss = ssn_loss(model, items, load_lambda, nullptr, &preds);
  if (accuracy) {
    int64_t hits = 0;
    for (size_t i = 0; i < data.size(); ++i)
      if (preds[i] == data[i].label) ++hits;
    *accuracy = static_cast<double>(hits) / static_cast<double>(data.size());
  }
  return loss;
}

std::vector<MetricRow> train_ssn(SsnModel& model,
                                 const std::vector<TrainExample>& train,
                                 const std::vector<TrainExample>& eval,
                                 const TrainConfig& cfg) {
  if (train.empty()) throw ValidationError("training needs a nonempty dataset");
  if (cfg.batch < 1) throw ValidationError("batch size must be positive");
  if (cfg.epochs < 0) throw ValidationError("epoch count must be nonnegative");
  if (cfg.lr < 0) throw ValidationError("learning rate must be nonnegative");
  if (cfg.optimizer != "adam" && cfg.optimizer != "sgd")
    throw ValidationError("unknown optimizer: " + cfg.optimizer);

  std::unordered_map<std::string, AdamState> adam;
  int64_t step = 0;
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;

  std::vector<MetricRow> rows;
  size_t n = train.size();
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng shuffle_rng(cfg.seed, static_cast<uint64_t>(epoch));
    std::vector<int> order =
        shuffle_rng.permutation(static_cast<int64_t>(n));

    double epoch_loss = 0.0;
    int64_t epoch_hits = 0;
    size_t nbatches = (n + static_cast<size_t>(cfg.batch) - 1) /
                      static_cast<size_t>(cfg.batch);
    for (size_t b = 0; b < nbatches; ++b) {
      size_t lo = b * static_cast<size_t>(cfg.batch);
      size_t hi = std::min(n, lo + static_cast<size_t>(cfg.batch));
      std::vector<BatchItem> items = to_items(train, order, lo, hi);
      Rng noise_rng(cfg.seed,
                    static_cast<uint64_t>(epoch) * 1000003u +
                        static_cast<uint64_t>(b) + 1u);
      draw_noise(items, model, noise_rng);

      GradMap grads;
      std::vector<int> preds;
      double loss = ssn_loss(model, items, cfg.load_lambda, &grads, &preds);
      epoch_loss += loss * static_cast<double>(hi - lo);
      for (size_t i = lo; i < hi; ++i)
        if (preds[i - lo] == train[static_cast<size_t>(order[i])].label)
          ++epoch_hits;

      if (cfg.lr == 0.0) continue;
      ++step;
      for (auto& [name, ptr] : named_params(model)) {
        const Eigen::MatrixXd& g = grads.at(name);
        if (cfg.optimizer == "sgd") {
          *ptr -= cfg.lr * g;
          continue;
        }
        AdamState& st = adam[name];
        if (st.m.size() == 0) {
          st.m = Eigen::MatrixXd::Zero(g.rows(), g.cols());
          st.v = Eigen::MatrixXd::Zero(g.rows(), g.cols());
        }
        st.m = kBeta1 * st.m + (1.0 - kBeta1) * g;
        st.v = kBeta2 * st.v + (1.0 - kBeta2) * g.cwiseProduct(g);
        double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
        double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
        Eigen::MatrixXd mhat = st.m / c1;
        Eigen::MatrixXd denom = ((st.v.array() / c2).sqrt() + kEps).matrix();
        *ptr -= cfg.lr * mhat.cwiseQuotient(denom);
      }
    }

    MetricRow trow;
    trow.epoch = epoch;
    trow.split = "train";
    trow.loss = epoch_loss / static_cast<double>(n);
    trow.accuracy = static_cast<double>(epoch_hits) / static_cast<double>(n);
    rows.push_back(trow);
    if (!eval.empty()) {
      MetricRow erow;
      erow.epoch = epoch;
      erow.split = "eval";
      erow.loss = evaluate_ssn(model, eval, cfg.load_lambda, &erow.accuracy);
      rows.push_back(erow);
    }
  }
  return rows;
}

}  // namespace ssx
