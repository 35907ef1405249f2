// Command-line surface: every subcommand maps 1:1 to a library operation.
// Exit codes: 0 success, 2 bad input (usage, flags, files, parameters),
// 1 internal error.
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ssx/catalog.hpp"
#include "ssx/complex.hpp"
#include "ssx/dac.hpp"
#include "ssx/digraph.hpp"
#include "ssx/errors.hpp"
#include "ssx/invariants.hpp"
#include "ssx/io.hpp"
#include "ssx/rng.hpp"
#include "ssx/ssn.hpp"
#include "ssx/threads.hpp"
#include "ssx/train.hpp"
#include "ssx/wl.hpp"

namespace {

using namespace ssx;

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string histogram_str(const ColorHistogram& h) {
  std::string out;
  for (const auto& [color, count] : h.counts) {
    if (!out.empty()) out += ";";
    out += std::to_string(color) + ":" + std::to_string(count);
  }
  return out;
}

// Shared per-command options.
struct CommonOpts {
  std::string format = "csv";
  int threads = 0;  // 0 = keep the SSX_THREADS / default value
};

void add_common(CLI::App* cmd, CommonOpts* opts) {
  cmd->add_option("--format", opts->format, "Output format: csv or jsonl")
      ->capture_default_str();
  cmd->add_option("--threads", opts->threads,
                  "Worker threads for library calls (overrides SSX_THREADS)");
}

void apply_common(const CommonOpts& opts) {
  if (opts.threads < 0)
    throw ValidationError("--threads must be nonnegative");
  if (opts.threads > 0) set_num_threads(opts.threads);
}

DynDigraph load_dyn(const std::string& edges_path, const std::string& acts_path,
                    int default_T) {
  DynDigraph dyn;
  dyn.graph = load_edge_list(edges_path);
  if (!acts_path.empty()) {
    dyn.activations = load_activations(acts_path, dyn.graph.num_vertices());
  } else {
    dyn.activations = BitMatrix(dyn.graph.num_vertices(), default_T);
    for (int64_t r = 0; r < dyn.activations.rows(); ++r)
      for (int t = 0; t < default_T; ++t) dyn.activations.set(r, t, true);
  }
  return dyn;
}

// ---- subcommand runners ----

int run_lift(const std::string& edges, const std::string& acts, int max_dim,
             const CommonOpts& common) {
  apply_common(common);
  DynDigraph dyn = load_dyn(edges, acts, 1);
  Dac dac = lift_dac(dyn, max_dim);
  int T = acts.empty() ? 0 : dac.T();
  std::vector<std::string> cols = {"dim", "count"};
  for (int t = 1; t <= T; ++t) cols.push_back("active_t" + std::to_string(t));
  TableWriter w(std::cout, parse_format(common.format), "ssx-lift/1", cols);
  for (int n = 0; n <= dac.complex.max_dim(); ++n) {
    std::vector<std::string> row = {std::to_string(n),
                                    std::to_string(dac.complex.size(n))};
    for (int t = 0; t < T; ++t) {
      int64_t active = 0;
      for (int64_t idx = 0; idx < dac.complex.size(n); ++idx)
        if (dac.active(n, idx, t)) ++active;
      row.push_back(std::to_string(active));
    }
    w.row(row);
  }
  return 0;
}

int run_invariants(const std::string& edges, const std::string& acts,
                   const std::string& kind, int k, int n, int i, int j, int T,
                   int max_dim, const CommonOpts& common) {
  apply_common(common);
  DynDigraph dyn = load_dyn(edges, acts, T);
  Dac dac = lift_dac(dyn, max_dim);
  InvariantSpec spec = parse_invariant_spec(kind, k, n, i, j);
  auto series = local_series(dac, spec);
  std::vector<std::string> cols = {"id", "kind"};
  for (int t = 1; t <= dac.T(); ++t) cols.push_back("t" + std::to_string(t));
  TableWriter w(std::cout, parse_format(common.format), "ssx-invariants/1",
                cols);
  for (size_t id = 0; id < series.size(); ++id) {
    std::vector<std::string> row = {std::to_string(id), kind};
    for (int64_t v : series[id]) row.push_back(std::to_string(v));
    w.row(row);
  }
  return 0;
}

int run_wl_test(const std::string& family, const std::string& pair,
                const std::string& left, const std::string& right, int max_dim,
                const CommonOpts& common) {
  apply_common(common);
  Digraph a, b;
  std::string pair_name = pair;
  if (!pair.empty()) {
    FixturePair fp = fixture(pair);
    a = fp.left;
    b = fp.right;
  } else {
    if (left.empty() || right.empty())
      throw ValidationError("wl-test needs --pair or both --left and --right");
    a = load_edge_list(left);
    b = load_edge_list(right);
    pair_name = "files";
  }
  WlVerdict v;
  if (family == "U" || family == "D") {
    Complex ca = build_flag_complex(a, max_dim);
    Complex cb = build_flag_complex(b, max_dim);
    v = sswl_compare(ca, cb, family[0]);
  } else if (family == "dir") {
    v = dirwl_compare(a, b, true);
  } else if (family == "sym") {
    v = dirwl_compare(a, b, false);
  } else {
    throw ValidationError("unknown family: " + family +
                          " (expected U, D, dir, or sym)");
  }
  TableWriter w(std::cout, parse_format(common.format), "ssx-wl/1",
                {"family", "pair", "verdict", "rounds", "left_histogram",
                 "right_histogram"});
  w.row({family, pair_name, v.separated ? "SEPARATED" : "NOT-SEPARATED",
         std::to_string(v.rounds), histogram_str(v.left),
         histogram_str(v.right)});
  return 0;
}

int run_ssn_forward(const std::string& model_path, const std::string& edges,
                    const std::string& acts, int T, int max_dim,
                    const CommonOpts& common) {
  apply_common(common);
  SsnModel model = load_model_file(model_path);
  DynDigraph dyn = load_dyn(edges, acts, T);
  Dac dac = lift_dac(dyn, max_dim);
  ModelTrace trace = ssn_forward(model, dac.complex, features_from_dac(dac));
  TableWriter w(std::cout, parse_format(common.format), "ssx-forward/1",
                {"field", "index", "value"});
  for (Eigen::Index idx = 0; idx < trace.readout.size(); ++idx)
    w.row({"readout", std::to_string(idx), fmt_double(trace.readout(idx))});
  for (Eigen::Index idx = 0; idx < trace.logits.size(); ++idx)
    w.row({"logit", std::to_string(idx), fmt_double(trace.logits(idx))});
  return 0;
}

int run_train(const std::string& data_dir, const std::string& arch, int width,
              int classes, double eval_frac, const TrainConfig& cfg,
              int max_dim, const std::string& save_path,
              const CommonOpts& common) {
  apply_common(common);
  if (eval_frac < 0.0 || eval_frac >= 1.0)
    throw ValidationError("--eval-frac must lie in [0,1)");
  LoadedDataset ds = load_dataset(data_dir, max_dim);
  int feat_width = ds.dacs.front().T();
  int msg_width = width > 0 ? width : (arch == "sym" ? 12 : 8);
  SsnModel model = make_task_model(arch, feat_width, msg_width, classes,
                                   cfg.seed);

  auto order = Rng(cfg.seed, 999983).permutation(
      static_cast<int>(ds.examples.size()));
  auto n_eval = static_cast<size_t>(eval_frac *
                                    static_cast<double>(order.size()));
  std::vector<TrainExample> eval_set, train_set;
  for (size_t idx = 0; idx < order.size(); ++idx)
    (idx < n_eval ? eval_set : train_set)
        .push_back(ds.examples[static_cast<size_t>(order[idx])]);

  auto rows = train_ssn(model, train_set, eval_set, cfg);
  TableWriter w(std::cout, parse_format(common.format), "ssx-train/1",
                {"epoch", "split", "loss", "accuracy"});
  for (const auto& r : rows)
    w.row({std::to_string(r.epoch), r.split, fmt_double(r.loss),
           fmt_double(r.accuracy)});
  if (!save_path.empty()) save_model_file(save_path, model);
  return 0;
}

int run_gen(const std::string& out_dir, const SyntheticTaskSpec& spec,
            const CommonOpts& common) {
  apply_common(common);
  auto samples = generate_synthetic(spec);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  std::ofstream index(out_dir + "/labels.csv");
  if (!index)
    throw ValidationError("cannot write dataset index in: " + out_dir);
  TableWriter iw(index, OutputFormat::kCsv, "ssx-dataset/1",
                 {"sample", "edges", "acts", "label", "skeleton"});
  for (size_t s = 0; s < samples.size(); ++s) {
    std::string stem = "sample_" + std::to_string(s);
    {
      std::ofstream e(out_dir + "/" + stem + ".edges");
      if (!e) throw ValidationError("cannot write " + stem + ".edges");
      write_edge_list(e, samples[s].dyn.graph);
    }
    {
      std::ofstream a(out_dir + "/" + stem + ".acts");
      if (!a) throw ValidationError("cannot write " + stem + ".acts");
      write_activations(a, samples[s].dyn.activations);
    }
    iw.row({std::to_string(s), stem + ".edges", stem + ".acts",
            std::to_string(samples[s].label),
            std::to_string(samples[s].skeleton_index)});
  }
  TableWriter w(std::cout, parse_format(common.format), "ssx-gen/1",
                {"samples", "classes", "vertices", "dir"});
  w.row({std::to_string(samples.size()), std::to_string(spec.num_classes),
         std::to_string(spec.vertices), out_dir});
  return 0;
}

int run_bench_cmd(int vertices, int doublings, int width, uint64_t seed,
                  int reps, const CommonOpts& common) {
  apply_common(common);
  BenchReport report = run_bench(vertices, doublings, width, seed, reps);
  TableWriter w(std::cout, parse_format(common.format), "ssx-bench/1",
                {"n_simplices", "e_pairs", "width", "seconds", "dispersion",
                 "fit_residual", "growth_exponent"});
  for (const auto& r : report.rows)
    w.row({std::to_string(r.n_simplices), std::to_string(r.e_pairs),
           std::to_string(r.width), fmt_double(r.seconds),
           fmt_double(r.dispersion), fmt_double(report.fit_residual),
           fmt_double(report.growth_exponent)});
  return 0;
}

int run_fixtures(const std::string& name, const std::string& dump,
                 const CommonOpts& common) {
  apply_common(common);
  if (!dump.empty()) {
    if (name.empty())
      throw ValidationError("--dump needs --name to pick a fixture");
    if (dump != "left" && dump != "right")
      throw ValidationError("--dump must be left or right");
    FixturePair fp = fixture(name);
    write_edge_list(std::cout, dump == "left" ? fp.left : fp.right);
    return 0;
  }
  TableWriter w(std::cout, parse_format(common.format), "ssx-fixtures/1",
                {"name", "note", "left_vertices", "left_edges",
                 "right_vertices", "right_edges"});
  for (const auto& fp : fixtures()) {
    if (!name.empty() && fp.name != name) continue;
    w.row({fp.name, fp.note, std::to_string(fp.left.num_vertices()),
           std::to_string(fp.left.num_edges()),
           std::to_string(fp.right.num_vertices()),
           std::to_string(fp.right.num_edges())});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Directed flag complexes, activity invariants, relational WL "
               "refinement, and semi-simplicial networks"};
  app.require_subcommand(1);

  // lift
  auto* lift = app.add_subcommand(
      "lift", "Lift a dynamic digraph to its flag complex and count "
              "simplices per dimension");
  std::string lift_edges, lift_acts;
  int lift_max_dim = 2;
  CommonOpts lift_common;
  lift->add_option("--edges", lift_edges, "Edge-list file")->required();
  lift->add_option("--acts", lift_acts, "Activation-table file");
  lift->add_option("--max-dim", lift_max_dim, "Highest simplex dimension")
      ->capture_default_str();
  add_common(lift, &lift_common);

  // invariants
  auto* inv = app.add_subcommand(
      "invariants", "Emit local activity-invariant series, one row per "
                    "carrier element");
  std::string inv_edges, inv_acts, inv_kind = "size";
  int inv_k = 1, inv_n = 1, inv_i = 0, inv_j = 1, inv_T = 1, inv_max_dim = 2;
  CommonOpts inv_common;
  inv->add_option("--edges", inv_edges, "Edge-list file")->required();
  inv->add_option("--acts", inv_acts,
                  "Activation-table file (default: all active)");
  inv->add_option("--kind", inv_kind,
                  "size | ec | td | dir | hodir | rc")
      ->capture_default_str();
  inv->add_option("--k", inv_k, "Hop count")->capture_default_str();
  inv->add_option("--n", inv_n, "hodir: carrier dimension")
      ->capture_default_str();
  inv->add_option("--i", inv_i, "hodir: first face index")
      ->capture_default_str();
  inv->add_option("--j", inv_j, "hodir: second face index")
      ->capture_default_str();
  inv->add_option("--T", inv_T, "Bins when no --acts file is given")
      ->capture_default_str();
  inv->add_option("--max-dim", inv_max_dim, "Highest simplex dimension")
      ->capture_default_str();
  add_common(inv, &inv_common);

  // wl-test
  auto* wl = app.add_subcommand(
      "wl-test", "Compare two structures under relational WL refinement");
  std::string wl_family = "D", wl_pair, wl_left, wl_right;
  int wl_max_dim = 2;
  CommonOpts wl_common;
  wl->add_option("--family", wl_family,
                 "U | D (simplex families), dir | sym (vertex refinement)")
      ->capture_default_str();
  wl->add_option("--pair", wl_pair, "Named fixture pair (see `fixtures`)");
  wl->add_option("--left", wl_left, "Left edge-list file");
  wl->add_option("--right", wl_right, "Right edge-list file");
  wl->add_option("--max-dim", wl_max_dim, "Highest simplex dimension")
      ->capture_default_str();
  add_common(wl, &wl_common);

  // ssn-forward
  auto* fwd = app.add_subcommand(
      "ssn-forward", "Run a saved model on one structure and print the "
                     "readout and logits");
  std::string fwd_model, fwd_edges, fwd_acts;
  int fwd_T = 1, fwd_max_dim = 2;
  CommonOpts fwd_common;
  fwd->add_option("--model", fwd_model, "Model JSON file")->required();
  fwd->add_option("--edges", fwd_edges, "Edge-list file")->required();
  fwd->add_option("--acts", fwd_acts,
                  "Activation-table file (default: all active)");
  fwd->add_option("--T", fwd_T, "Bins when no --acts file is given")
      ->capture_default_str();
  fwd->add_option("--max-dim", fwd_max_dim, "Highest simplex dimension")
      ->capture_default_str();
  add_common(fwd, &fwd_common);

  // train
  auto* tr = app.add_subcommand(
      "train", "Train a task classifier on a generated dataset directory");
  std::string tr_dir, tr_arch = "D", tr_save, tr_opt = "adam";
  int tr_width = 0, tr_classes = 2, tr_epochs = 20, tr_batch = 8,
      tr_max_dim = 2;
  double tr_lr = 1e-3, tr_eval = 0.25, tr_lambda = 0.0;
  uint64_t tr_seed = 0;
  CommonOpts tr_common;
  tr->add_option("--data-dir", tr_dir, "Dataset directory from `gen`")
      ->required();
  tr->add_option("--arch", tr_arch, "D (directional) | sym (baseline)")
      ->capture_default_str();
  tr->add_option("--width", tr_width,
                 "Message width (0 = per-arch default with matched budgets)")
      ->capture_default_str();
  tr->add_option("--classes", tr_classes, "Label count")
      ->capture_default_str();
  tr->add_option("--epochs", tr_epochs, "Training epochs")
      ->capture_default_str();
  tr->add_option("--batch", tr_batch, "Minibatch size")->capture_default_str();
  tr->add_option("--lr", tr_lr, "Learning rate")->capture_default_str();
  tr->add_option("--optimizer", tr_opt, "adam | sgd")->capture_default_str();
  tr->add_option("--load-lambda", tr_lambda, "Routing load-loss weight")
      ->capture_default_str();
  tr->add_option("--eval-frac", tr_eval, "Held-out fraction")
      ->capture_default_str();
  tr->add_option("--seed", tr_seed, "Seed for init, shuffling, and splits")
      ->capture_default_str();
  tr->add_option("--max-dim", tr_max_dim, "Highest simplex dimension")
      ->capture_default_str();
  tr->add_option("--save-model", tr_save, "Write the trained model here");
  add_common(tr, &tr_common);

  // gen
  auto* gen = app.add_subcommand(
      "gen", "Generate the labeled synthetic direction task");
  std::string gen_dir;
  SyntheticTaskSpec gen_spec;
  std::vector<double> gen_bias = {0.9, 0.1};
  CommonOpts gen_common;
  gen->add_option("--out", gen_dir, "Output directory (must exist)")
      ->required();
  gen->add_option("--classes", gen_spec.num_classes, "Class count")
      ->capture_default_str();
  gen->add_option("--vertices", gen_spec.vertices, "Vertices per sample")
      ->capture_default_str();
  gen->add_option("--density", gen_spec.density,
                  "Undirected skeleton edge probability")
      ->capture_default_str();
  gen->add_option("--reciprocity", gen_spec.reciprocity,
                  "Probability an edge keeps both directions")
      ->capture_default_str();
  gen->add_option("--T", gen_spec.T, "Activity bins")->capture_default_str();
  gen->add_option("--bias", gen_bias,
                  "Per-class transitive-orientation probability")
      ->capture_default_str();
  gen->add_option("--samples", gen_spec.samples_per_class,
                  "Samples per class")
      ->capture_default_str();
  gen->add_option("--seed", gen_spec.seed, "Dataset seed")
      ->capture_default_str();
  add_common(gen, &gen_common);

  // bench
  auto* bench = app.add_subcommand(
      "bench", "Time forward_layer while doubling the relation pair count");
  int b_vertices = 2048, b_doublings = 3, b_width = 8, b_reps = 5;
  uint64_t b_seed = 0;
  CommonOpts bench_common;
  bench->add_option("--vertices", b_vertices, "Vertex count (fixed N)")
      ->capture_default_str();
  bench->add_option("--doublings", b_doublings, "Pair-count doublings")
      ->capture_default_str();
  bench->add_option("--width", b_width, "Feature width D")
      ->capture_default_str();
  bench->add_option("--reps", b_reps, "Timed repetitions per size")
      ->capture_default_str();
  bench->add_option("--seed", b_seed, "Seed for pairs and weights")
      ->capture_default_str();
  add_common(bench, &bench_common);

  // fixtures
  auto* fx = app.add_subcommand(
      "fixtures", "List the named non-isomorphic graph pairs, or dump one "
                  "side as an edge list");
  std::string fx_name, fx_dump;
  CommonOpts fx_common;
  fx->add_option("--name", fx_name, "Restrict to one fixture");
  fx->add_option("--dump", fx_dump, "left | right: emit that edge list");
  add_common(fx, &fx_common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help() << std::flush;
    return 2;
  }

  try {
    if (lift->parsed())
      return run_lift(lift_edges, lift_acts, lift_max_dim, lift_common);
    if (inv->parsed())
      return run_invariants(inv_edges, inv_acts, inv_kind, inv_k, inv_n,
                            inv_i, inv_j, inv_T, inv_max_dim, inv_common);
    if (wl->parsed())
      return run_wl_test(wl_family, wl_pair, wl_left, wl_right, wl_max_dim,
                         wl_common);
    if (fwd->parsed())
      return run_ssn_forward(fwd_model, fwd_edges, fwd_acts, fwd_T,
                             fwd_max_dim, fwd_common);
    if (tr->parsed()) {
      TrainConfig cfg;
      cfg.lr = tr_lr;
      cfg.epochs = tr_epochs;
      cfg.batch = tr_batch;
      cfg.seed = tr_seed;
      cfg.optimizer = tr_opt;
      cfg.load_lambda = tr_lambda;
      return run_train(tr_dir, tr_arch, tr_width, tr_classes, tr_eval, cfg,
                       tr_max_dim, tr_save, tr_common);
    }
    if (gen->parsed()) {
      gen_spec.motif_bias = gen_bias;
      return run_gen(gen_dir, gen_spec, gen_common);
    }
    if (bench->parsed())
      return run_bench_cmd(b_vertices, b_doublings, b_width, b_seed, b_reps,
                           bench_common);
    if (fx->parsed()) return run_fixtures(fx_name, fx_dump, fx_common);
    std::cerr << "error: no subcommand\n\n" << app.help() << std::flush;
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
