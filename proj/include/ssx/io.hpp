#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ssx/dac.hpp"
#include "ssx/digraph.hpp"
#include "ssx/ssn.hpp"
#include "ssx/train.hpp"

namespace ssx {

// ---- text formats (bit-exact layouts documented in FORMATS.md) ----

// Edge list: optional "n=<count>" header, then one "u v" pair per line.
// '#' starts a comment; parse errors report line and column.
Digraph parse_edge_list(std::istream& in);
Digraph load_edge_list(const std::string& path);
void write_edge_list(std::ostream& out, const Digraph& g);

// Activation table: "T=<bins>" header, then one row of T binary values per
// vertex. Non-binary values and row-count mismatches are reported by line.
BitMatrix parse_activations(std::istream& in, int64_t expected_rows = -1);
BitMatrix load_activations(const std::string& path,
                           int64_t expected_rows = -1);
void write_activations(std::ostream& out, const BitMatrix& m);

// ---- tabular output ----

enum class OutputFormat { kCsv, kJsonl };
OutputFormat parse_format(const std::string& name);  // "csv" | "jsonl"

// Emits rows whose first field is always the schema tag. CSV prints one
// header line; JSONL prints one object per row.
class TableWriter {
 public:
  TableWriter(std::ostream& out, OutputFormat format, std::string schema,
              std::vector<std::string> columns);
  void row(const std::vector<std::string>& values);

 private:
  std::ostream& out_;
  OutputFormat format_;
  std::string schema_;
  std::vector<std::string> columns_;
};

std::string csv_escape(const std::string& s);

// ---- model serialization (JSON, schema ssx-model/1) ----

// Only spelling-addressed channels serialize; bound relations are host
// specific and rejected.
void save_model(std::ostream& out, const SsnModel& model);
void save_model_file(const std::string& path, const SsnModel& model);
SsnModel load_model(std::istream& in);
SsnModel load_model_file(const std::string& path);

// ---- synthetic dataset ----

struct SyntheticTaskSpec {
  int num_classes = 2;
  int vertices = 16;
  double density = 0.3;      // undirected skeleton edge probability
  double reciprocity = 0.0;  // skeleton edges kept bidirectional
  int T = 2;
  std::vector<double> motif_bias;  // per class: P(triangle oriented
                                   // transitively); size == num_classes
  int samples_per_class = 20;
  uint64_t seed = 0;
};

struct SyntheticSample {
  DynDigraph dyn;
  int label = 0;
  int skeleton_index = 0;  // matched across classes
};

// Deterministic under seed. Per sample index, every class shares one
// undirected skeleton (and reciprocal-edge set); only the orientation of
// the remaining edges differs, so the label correlates with
// triangle-orientation statistics and nothing else.
std::vector<SyntheticSample> generate_synthetic(const SyntheticTaskSpec& spec);

// ---- synthetic-task classifier ----

// Single-layer SSN classifier for the synthetic direction task, built from
// portable channel spellings. arch "D" wires directional channels
// (r_in, r_out, conv(c02)); arch "sym" wires the single symmetric channel
// r_sym. Choose msg_width per arch to match parameter budgets (e.g. 8 vs 12
// at feat_width 2). Weights drawn deterministically from seed.
SsnModel make_task_model(const std::string& arch, int feat_width,
                         int msg_width, int classes, uint64_t seed);
int64_t param_count(SsnModel& model);

// Lifted training set; dacs own the complexes the examples point into.
struct LoadedDataset {
  std::deque<Dac> dacs;
  std::vector<TrainExample> examples;
};

LoadedDataset lift_samples(const std::vector<SyntheticSample>& samples,
                           int max_dim);
// Reads a dataset directory written by the gen command (labels.csv index
// plus per-sample edge/activation files).
LoadedDataset load_dataset(const std::string& dir, int max_dim);

// ---- scaling benchmark ----

struct BenchRow {
  int64_t n_simplices = 0;
  int64_t e_pairs = 0;
  int width = 0;
  double seconds = 0.0;     // median over reps
  double dispersion = 0.0;  // (max - min) / median over reps
};

struct BenchReport {
  std::vector<BenchRow> rows;  // sorted by e_pairs, geometric doubling
  double fit_residual = 0.0;   // relative RMS of time ~ a (N D^2 + E D)
  double growth_exponent = 0.0;  // slope of log time vs log E
};

// Times forward_layer on a fixed vertex set with a doubling number of
// relation pairs; median of reps timed runs after one warm-up each.
BenchReport run_bench(int vertices, int doublings, int width, uint64_t seed,
                      int reps = 5);

}  // namespace ssx
