#include "ssx/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "ssx/catalog.hpp"
#include "ssx/complex.hpp"
#include "ssx/errors.hpp"
#include "ssx/rng.hpp"

namespace ssx {
namespace {

using nlohmann::ordered_json;

[[noreturn]] void parse_fail(int line, int col, const std::string& what) {
  throw ValidationError("line " + std::to_string(line) + ", column " +
                        std::to_string(col) + ": " + what);
}

// Cursor over one line of whitespace-separated integer tokens.
class LineScanner {
 public:
  LineScanner(const std::string& line, int lineno)
      : line_(line), lineno_(lineno) {}

  void skip_space() {
    while (pos_ < line_.size() &&
           (line_[pos_] == ' ' || line_[pos_] == '\t' || line_[pos_] == '\r'))
      ++pos_;
  }

  bool at_end() {
    skip_space();
    return pos_ >= line_.size();
  }

  int column() const { return static_cast<int>(pos_) + 1; }

  int64_t integer(const char* what) {
    skip_space();
    if (pos_ >= line_.size())
      parse_fail(lineno_, column(), std::string("expected ") + what);
    int64_t v = 0;
    auto* begin = line_.data() + pos_;
    auto* end = line_.data() + line_.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr == begin)
      parse_fail(lineno_, column(), std::string("expected ") + what);
    if (ptr != end && *ptr != ' ' && *ptr != '\t' && *ptr != '\r')
      parse_fail(lineno_, column(), std::string("malformed ") + what);
    pos_ = static_cast<size_t>(ptr - line_.data());
    return v;
  }

  void expect_end(const char* context) {
    if (!at_end())
      parse_fail(lineno_, column(),
                 std::string("unexpected trailing text in ") + context);
  }

 private:
  const std::string& line_;
  int lineno_;
  size_t pos_ = 0;
};

// Strips a trailing '#'-comment; returns false when nothing remains.
bool strip_comment(std::string& line) {
  auto hash = line.find('#');
  if (hash != std::string::npos) line.resize(hash);
  return line.find_first_not_of(" \t\r") != std::string::npos;
}

// Parses an optional "key=<int>" header token at the start of a line.
bool header_value(const std::string& line, const std::string& key,
                  int lineno, int64_t* out) {
  auto start = line.find_first_not_of(" \t");
  if (start == std::string::npos) return false;
  if (line.compare(start, key.size(), key) != 0) return false;
  auto rest = line.substr(start + key.size());
  LineScanner sc(rest, lineno);
  int64_t v = sc.integer("count");
  sc.expect_end("header");
  *out = v;
  return true;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write file: " + path);
  return out;
}

// ---- model JSON helpers ----

ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    arr.push_back(std::move(row));
  }
  return arr;
}

Eigen::MatrixXd matrix_from_json(const ordered_json& j, const char* what) {
  if (!j.is_array())
    throw ValidationError(std::string("model field ") + what +
                          " must be an array of rows");
  Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[r];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ValidationError(std::string("model field ") + what +
                            " has ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = row[c].get<double>();
  }
  return m;
}

const char* inner_name(InnerAgg a) {
  switch (a) {
    case InnerAgg::kSum: return "sum";
    case InnerAgg::kMean: return "mean";
    case InnerAgg::kMax: return "max";
  }
  throw ValidationError("unknown inner aggregation");
}

const char* outer_name(OuterAgg a) {
  return a == OuterAgg::kSum ? "sum" : "mean";
}

const char* act_name(Activation a) {
  return a == Activation::kIdentity ? "identity" : "relu";
}

const char* readout_name(ReadoutKind r) {
  switch (r) {
    case ReadoutKind::kMean: return "mean";
    case ReadoutKind::kSum: return "sum";
    case ReadoutKind::kDimMeanConcat: return "dim-mean-concat";
    case ReadoutKind::kFlatten: return "flatten";
  }
  throw ValidationError("unknown readout kind");
}

InnerAgg inner_from(const std::string& s) {
  if (s == "sum") return InnerAgg::kSum;
  if (s == "mean") return InnerAgg::kMean;
  if (s == "max") return InnerAgg::kMax;
  throw ValidationError("unknown inner aggregation: " + s);
}

OuterAgg outer_from(const std::string& s) {
  if (s == "sum") return OuterAgg::kSum;
  if (s == "mean") return OuterAgg::kMean;
  throw ValidationError("unknown outer aggregation: " + s);
}

Activation act_from(const std::string& s) {
  if (s == "identity") return Activation::kIdentity;
  if (s == "relu") return Activation::kRelu;
  throw ValidationError("unknown activation: " + s);
}

ReadoutKind readout_from(const std::string& s) {
  if (s == "mean") return ReadoutKind::kMean;
  if (s == "sum") return ReadoutKind::kSum;
  if (s == "dim-mean-concat") return ReadoutKind::kDimMeanConcat;
  if (s == "flatten") return ReadoutKind::kFlatten;
  throw ValidationError("unknown readout kind: " + s);
}

}  // namespace

// ---- edge lists ----

Digraph parse_edge_list(std::istream& in) {
  std::string line;
  int lineno = 0;
  int64_t declared = -1;
  bool saw_data = false;
  int max_id = -1;
  std::vector<std::pair<int, int>> edges;
  while (std::getline(in, line)) {
    ++lineno;
    if (!strip_comment(line)) continue;
    if (!saw_data && declared < 0) {
      int64_t n = 0;
      if (header_value(line, "n=", lineno, &n)) {
        if (n < 0)
          parse_fail(lineno, 1, "vertex count must be nonnegative");
        declared = n;
        continue;
      }
    }
    saw_data = true;
    LineScanner sc(line, lineno);
    int col_u = (sc.skip_space(), sc.column());
    int64_t u = sc.integer("a vertex id");
    int col_v = (sc.skip_space(), sc.column());
    int64_t v = sc.integer("a vertex id");
    sc.expect_end("edge line");
    if (u < 0) parse_fail(lineno, col_u, "vertex ids must be nonnegative");
    if (v < 0) parse_fail(lineno, col_v, "vertex ids must be nonnegative");
    if (declared >= 0 && (u >= declared || v >= declared))
      parse_fail(lineno, u >= declared ? col_u : col_v,
                 "vertex id exceeds the declared count");
    max_id = std::max(max_id, static_cast<int>(std::max(u, v)));
    edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
  }
  int n = declared >= 0 ? static_cast<int>(declared) : max_id + 1;
  return Digraph(n, std::move(edges));
}

Digraph load_edge_list(const std::string& path) {
  auto in = open_input(path);
  return parse_edge_list(in);
}

void write_edge_list(std::ostream& out, const Digraph& g) {
  out << "n=" << g.num_vertices() << "\n";
  for (const auto& [u, v] : g.edges()) out << u << " " << v << "\n";
}

// ---- activation tables ----

BitMatrix parse_activations(std::istream& in, int64_t expected_rows) {
  std::string line;
  int lineno = 0;
  int64_t bins = -1;
  struct Row {
    int64_t id;
    std::vector<bool> bits;
    int lineno, col;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (!strip_comment(line)) continue;
    if (bins < 0) {
      int64_t t = 0;
      if (!header_value(line, "T=", lineno, &t))
        parse_fail(lineno, 1, "expected a T=<bins> header");
      if (t < 1) parse_fail(lineno, 1, "bin count must be positive");
      bins = t;
      continue;
    }
    LineScanner sc(line, lineno);
    Row row;
    row.lineno = lineno;
    row.col = (sc.skip_space(), sc.column());
    row.id = sc.integer("a vertex id");
    if (row.id < 0) parse_fail(lineno, row.col, "vertex ids must be nonnegative");
    for (int64_t t = 0; t < bins; ++t) {
      int col = (sc.skip_space(), sc.column());
      int64_t v = sc.integer("an activation value");
      if (v != 0 && v != 1)
        parse_fail(lineno, col, "activation values must be 0 or 1");
      row.bits.push_back(v == 1);
    }
    sc.expect_end("activation row");
    rows.push_back(std::move(row));
  }
  if (bins < 0) throw ValidationError("missing T=<bins> header");
  int64_t n = expected_rows >= 0 ? expected_rows
                                 : static_cast<int64_t>(rows.size());
  if (static_cast<int64_t>(rows.size()) != n)
    throw ValidationError("expected " + std::to_string(n) +
                          " activation rows, found " +
                          std::to_string(rows.size()));
  BitMatrix m(n, static_cast<int>(bins));
  std::vector<char> seen(static_cast<size_t>(n), 0);
  for (const auto& row : rows) {
    if (row.id >= n)
      parse_fail(row.lineno, row.col, "vertex id exceeds the row count");
    if (seen[static_cast<size_t>(row.id)])
      parse_fail(row.lineno, row.col, "duplicate vertex id");
    seen[static_cast<size_t>(row.id)] = 1;
    for (int64_t c = 0; c < bins; ++c)
      m.set(row.id, static_cast<int>(c), row.bits[static_cast<size_t>(c)]);
  }
  return m;
}

BitMatrix load_activations(const std::string& path, int64_t expected_rows) {
  auto in = open_input(path);
  return parse_activations(in, expected_rows);
}

void write_activations(std::ostream& out, const BitMatrix& m) {
  out << "T=" << m.cols() << "\n";
  for (int64_t r = 0; r < m.rows(); ++r) {
    out << r;
    for (int c = 0; c < m.cols(); ++c) out << " " << (m.get(r, c) ? 1 : 0);
    out << "\n";
  }
}

// ---- tabular output ----

OutputFormat parse_format(const std::string& name) {
  if (name == "csv") return OutputFormat::kCsv;
  if (name == "jsonl") return OutputFormat::kJsonl;
  throw ValidationError("unknown output format: " + name +
                        " (expected csv or jsonl)");
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

TableWriter::TableWriter(std::ostream& out, OutputFormat format,
                         std::string schema, std::vector<std::string> columns)
    : out_(out),
      format_(format),
      schema_(std::move(schema)),
      columns_(std::move(columns)) {
  if (format_ == OutputFormat::kCsv) {
    out_ << "schema";
    for (const auto& c : columns_) out_ << "," << csv_escape(c);
    out_ << "\n";
  }
}

void TableWriter::row(const std::vector<std::string>& values) {
  if (values.size() != columns_.size())
    throw ValidationError("row width does not match the declared columns");
  if (format_ == OutputFormat::kCsv) {
    out_ << csv_escape(schema_);
    for (const auto& v : values) out_ << "," << csv_escape(v);
    out_ << "\n";
  } else {
    ordered_json obj;
    obj["schema"] = schema_;
    for (size_t i = 0; i < columns_.size(); ++i) obj[columns_[i]] = values[i];
    out_ << obj.dump() << "\n";
  }
}

// ---- model serialization ----

void save_model(std::ostream& out, const SsnModel& model) {
  ordered_json j;
  j["schema"] = "ssx-model/1";
  j["readout"] = readout_name(model.readout);
  ordered_json layers = ordered_json::array();
  for (const auto& layer : model.layers) {
    ordered_json jl;
    jl["inner"] = inner_name(layer.inner);
    jl["outer"] = outer_name(layer.outer);
    jl["act"] = act_name(layer.act);
    jl["msg_width"] = layer.msg_width;
    ordered_json chs = ordered_json::array();
    for (const auto& ch : layer.channels) {
      if (ch.spelling.empty())
        throw ValidationError(
            "channel '" + ch.name +
            "' holds a bound relation and cannot be serialized; give it a "
            "spelling");
      ordered_json jc;
      jc["name"] = ch.name;
      jc["spelling"] = ch.spelling;
      jc["src"] = ch.src;
      jc["dst"] = ch.dst;
      jc["W"] = matrix_to_json(ch.W);
      jc["b"] = matrix_to_json(ch.b);
      chs.push_back(std::move(jc));
    }
    jl["channels"] = std::move(chs);
    ordered_json gts = ordered_json::array();
    for (const auto& g : layer.gates) {
      ordered_json jg;
      jg["target"] = g.target;
      jg["source"] = g.source;
      jg["k"] = g.k;
      jg["noise"] = g.noise;
      jg["Wg"] = matrix_to_json(g.Wg);
      jg["Wn"] = matrix_to_json(g.Wn);
      gts.push_back(std::move(jg));
    }
    jl["gates"] = std::move(gts);
    jl["W_phi"] = matrix_to_json(layer.W_phi);
    jl["b_phi"] = matrix_to_json(layer.b_phi);
    layers.push_back(std::move(jl));
  }
  j["layers"] = std::move(layers);
  j["W_head"] = matrix_to_json(model.W_head);
  j["b_head"] = matrix_to_json(model.b_head);
  out << j.dump(2) << "\n";
}

void save_model_file(const std::string& path, const SsnModel& model) {
  auto out = open_output(path);
  save_model(out, model);
}

SsnModel load_model(std::istream& in) {
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed model file: ") + e.what());
  }
  try {
    if (!j.contains("schema") || j["schema"] != "ssx-model/1")
      throw ValidationError("unsupported model schema (expected ssx-model/1)");
    SsnModel model;
    model.readout = readout_from(j.at("readout").get<std::string>());
    for (const auto& jl : j.at("layers")) {
      SsnLayer layer;
      layer.inner = inner_from(jl.at("inner").get<std::string>());
      layer.outer = outer_from(jl.at("outer").get<std::string>());
      layer.act = act_from(jl.at("act").get<std::string>());
      layer.msg_width = jl.at("msg_width").get<int>();
      for (const auto& jc : jl.at("channels")) {
        RelationChannel ch;
        ch.name = jc.at("name").get<std::string>();
        ch.spelling = jc.at("spelling").get<std::string>();
        if (ch.spelling.empty())
          throw ValidationError("model channel is missing its spelling");
        ch.src = jc.at("src").get<int>();
        ch.dst = jc.at("dst").get<int>();
        ch.W = matrix_from_json(jc.at("W"), "W");
        ch.b = matrix_from_json(jc.at("b"), "b");
        layer.channels.push_back(std::move(ch));
      }
      for (const auto& jg : jl.at("gates")) {
        RoutingGate g;
        g.target = jg.at("target").get<int>();
        g.source = jg.at("source").get<int>();
        g.k = jg.at("k").get<int>();
        g.noise = jg.at("noise").get<bool>();
        g.Wg = matrix_from_json(jg.at("Wg"), "Wg");
        g.Wn = matrix_from_json(jg.at("Wn"), "Wn");
        layer.gates.push_back(std::move(g));
      }
      layer.W_phi = matrix_from_json(jl.at("W_phi"), "W_phi");
      layer.b_phi = matrix_from_json(jl.at("b_phi"), "b_phi");
      model.layers.push_back(std::move(layer));
    }
    model.W_head = matrix_from_json(j.at("W_head"), "W_head");
    model.b_head = matrix_from_json(j.at("b_head"), "b_head");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed model file: ") + e.what());
  }
}

SsnModel load_model_file(const std::string& path) {
  auto in = open_input(path);
  return load_model(in);
}

// ---- synthetic dataset ----

namespace {

struct Skeleton {
  std::vector<std::pair<int, int>> edges;  // u < v, sorted
  std::vector<char> reciprocal;            // aligned with edges
  std::vector<std::array<int, 3>> triangles;
};

Skeleton make_skeleton(int vertices, double density, double reciprocity,
                       Rng& rng) {
  Skeleton sk;
  for (int u = 0; u < vertices; ++u)
    for (int v = u + 1; v < vertices; ++v)
      if (rng.bernoulli(density)) sk.edges.emplace_back(u, v);
  sk.reciprocal.resize(sk.edges.size(), 0);
  for (size_t i = 0; i < sk.edges.size(); ++i)
    sk.reciprocal[i] = rng.bernoulli(reciprocity) ? 1 : 0;
  std::set<std::pair<int, int>> present(sk.edges.begin(), sk.edges.end());
  for (size_t i = 0; i < sk.edges.size(); ++i) {
    auto [a, b] = sk.edges[i];
    for (int c = b + 1; c < vertices; ++c)
      if (present.count({a, c}) && present.count({b, c}))
        sk.triangles.push_back({a, b, c});
  }
  return sk;
}

// Orientation state per skeleton edge: 0 free, 1 low->high, 2 high->low.
class Orientation {
 public:
  explicit Orientation(const Skeleton& sk) : sk_(sk), dir_(sk.edges.size(), 0) {
    for (size_t i = 0; i < sk.edges.size(); ++i) index_[sk.edges[i]] = i;
  }

  // Tries to orient the triangle's free edges so the three arcs
  // {(x,y),(x,z),(y,z)} all appear; reciprocal edges satisfy any direction.
  bool try_arcs(const std::array<std::pair<int, int>, 3>& arcs) {
    std::vector<std::pair<size_t, int>> pending;
    for (auto [from, to] : arcs) {
      auto key = std::minmax(from, to);
      size_t e = index_.at({key.first, key.second});
      if (sk_.reciprocal[e]) continue;
      int want = from < to ? 1 : 2;
      if (dir_[e] == 0)
        pending.emplace_back(e, want);
      else if (dir_[e] != want)
        return false;
    }
    for (auto [e, want] : pending) dir_[e] = want;
    return true;
  }

  void fill_free(Rng& rng) {
    for (auto& d : dir_)
      if (d == 0) d = rng.bernoulli(0.5) ? 1 : 2;
  }

  std::vector<std::pair<int, int>> arcs() const {
    std::vector<std::pair<int, int>> out;
    for (size_t i = 0; i < sk_.edges.size(); ++i) {
      auto [u, v] = sk_.edges[i];
      if (sk_.reciprocal[i]) {
        out.emplace_back(u, v);
        out.emplace_back(v, u);
      } else if (dir_[i] == 1) {
        out.emplace_back(u, v);
      } else {
        out.emplace_back(v, u);
      }
    }
    return out;
  }

 private:
  const Skeleton& sk_;
  std::vector<int> dir_;
  std::map<std::pair<int, int>, size_t> index_;
};

void orient_triangle(Orientation& ori, const std::array<int, 3>& tri,
                     bool transitive, Rng& rng) {
  int a = tri[0], b = tri[1], c = tri[2];
  if (transitive) {
    // x -> y -> z with x -> z: try the six vertex orders.
    const std::array<std::array<int, 3>, 6> orders = {
        {{a, b, c}, {a, c, b}, {b, a, c}, {b, c, a}, {c, a, b}, {c, b, a}}};
    size_t start = rng.below(6);
    for (size_t i = 0; i < 6; ++i) {
      auto [x, y, z] = orders[(start + i) % 6];
      if (ori.try_arcs({{{x, y}, {x, z}, {y, z}}})) return;
    }
  } else {
    // A directed 3-cycle, one of the two rotation senses.
    bool flip = rng.bernoulli(0.5);
    for (int i = 0; i < 2; ++i) {
      bool forward = (i == 0) != flip;
      bool ok = forward ? ori.try_arcs({{{a, b}, {b, c}, {c, a}}})
                        : ori.try_arcs({{{b, a}, {c, b}, {a, c}}});
      if (ok) return;
    }
  }
  // No compatible assignment given earlier triangles; leave the free
  // edges for the uniform fill.
}

}  // namespace

std::vector<SyntheticSample> generate_synthetic(const SyntheticTaskSpec& spec) {
  if (spec.num_classes < 1)
    throw ValidationError("num_classes must be positive");
  if (spec.vertices < 1) throw ValidationError("vertices must be positive");
  if (spec.density < 0.0 || spec.density > 1.0)
    throw ValidationError("density must lie in [0,1]");
  if (spec.reciprocity < 0.0 || spec.reciprocity > 1.0)
    throw ValidationError("reciprocity must lie in [0,1]");
  if (spec.T < 1) throw ValidationError("T must be positive");
  if (spec.samples_per_class < 0)
    throw ValidationError("samples_per_class must be nonnegative");
  if (static_cast<int>(spec.motif_bias.size()) != spec.num_classes)
    throw ValidationError("motif_bias needs one entry per class");
  for (double p : spec.motif_bias)
    if (p < 0.0 || p > 1.0)
      throw ValidationError("motif_bias entries must lie in [0,1]");
  if (spec.samples_per_class == 0) return {};
  double v = spec.vertices;
  double expected_triangles =
      v * (v - 1.0) * (v - 2.0) / 6.0 * std::pow(spec.density, 3);
  if (expected_triangles < 1.0)
    throw ValidationError(
        "density too low: the expected triangle count is below one, so the "
        "labels would carry no motif signal");

  // Streams per sample index: one for the shared skeleton, then an
  // orientation and an activation stream per class.
  const uint64_t per_sample = 1 + 2 * static_cast<uint64_t>(spec.num_classes);
  std::vector<SyntheticSample> out;
  out.reserve(static_cast<size_t>(spec.samples_per_class) * spec.num_classes);
  for (int s = 0; s < spec.samples_per_class; ++s) {
    uint64_t base = static_cast<uint64_t>(s) * per_sample;
    Rng skel_rng(spec.seed, base);
    Skeleton sk =
        make_skeleton(spec.vertices, spec.density, spec.reciprocity, skel_rng);
    for (int c = 0; c < spec.num_classes; ++c) {
      Rng orient_rng(spec.seed, base + 1 + 2 * static_cast<uint64_t>(c));
      Orientation ori(sk);
      for (const auto& tri : sk.triangles)
        orient_triangle(ori, tri, orient_rng.bernoulli(spec.motif_bias[c]),
                        orient_rng);
      ori.fill_free(orient_rng);
      Rng act_rng(spec.seed, base + 2 + 2 * static_cast<uint64_t>(c));
      BitMatrix acts(spec.vertices, spec.T);
      for (int64_t r = 0; r < spec.vertices; ++r)
        for (int t = 0; t < spec.T; ++t)
          acts.set(r, t, act_rng.bernoulli(0.75));
      SyntheticSample sample;
      sample.dyn.graph = Digraph(spec.vertices, ori.arcs());
      sample.dyn.activations = std::move(acts);
      sample.label = c;
      sample.skeleton_index = s;
      out.push_back(std::move(sample));
    }
  }
  return out;
}

// ---- synthetic-task classifier ----

namespace {

Eigen::MatrixXd init_weight(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  double scale = 1.0 / std::sqrt(static_cast<double>(rows));
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = (rng.unit() * 2.0 - 1.0) * scale;
  return m;
}

int64_t parse_int_field(const std::string& s, const char* what, int lineno) {
  int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ValidationError("labels.csv line " + std::to_string(lineno) +
                          ": malformed " + what + " '" + s + "'");
  return v;
}

}  // namespace

SsnModel make_task_model(const std::string& arch, int feat_width,
                         int msg_width, int classes, uint64_t seed) {
  if (feat_width < 1 || msg_width < 1)
    throw ValidationError("task model widths must be positive");
  if (classes < 2) throw ValidationError("task model needs >= 2 classes");
  struct Wire {
    const char* spelling;
    int src, dst;
  };
  std::vector<Wire> wires;
  if (arch == "D") {
    wires = {{"r_in", 0, 0}, {"r_out", 0, 0}, {"conv(c02)", 2, 0}};
  } else if (arch == "sym") {
    wires = {{"r_sym", 0, 0}};
  } else {
    throw ValidationError("unknown arch: " + arch + " (expected D or sym)");
  }
  Rng rng(seed, 7001);
  const int out_width = 8;
  const int dims = 3;  // lifted at max_dim 2; readout concatenates dims 0..2
  SsnLayer layer;
  for (const auto& w : wires) {
    RelationChannel ch;
    ch.name = w.spelling;
    ch.spelling = w.spelling;
    ch.src = w.src;
    ch.dst = w.dst;
    ch.W = init_weight(feat_width, msg_width, rng);
    ch.b = Eigen::MatrixXd::Zero(1, msg_width);
    layer.channels.push_back(std::move(ch));
  }
  layer.inner = InnerAgg::kSum;
  layer.outer = OuterAgg::kSum;
  layer.act = Activation::kRelu;
  layer.msg_width = msg_width;
  layer.W_phi = init_weight(feat_width + msg_width, out_width, rng);
  layer.b_phi = Eigen::MatrixXd::Zero(1, out_width);
  SsnModel model;
  model.layers.push_back(std::move(layer));
  model.readout = ReadoutKind::kDimMeanConcat;
  model.W_head = init_weight(dims * out_width, classes, rng);
  model.b_head = Eigen::MatrixXd::Zero(1, classes);
  return model;
}

int64_t param_count(SsnModel& model) {
  int64_t total = 0;
  for (auto& [name, ptr] : named_params(model))
    total += static_cast<int64_t>(ptr->size());
  return total;
}

LoadedDataset lift_samples(const std::vector<SyntheticSample>& samples,
                           int max_dim) {
  LoadedDataset ds;
  for (const auto& s : samples) {
    ds.dacs.push_back(lift_dac(s.dyn, max_dim));
    TrainExample ex;
    ex.complex = &ds.dacs.back().complex;
    ex.features = features_from_dac(ds.dacs.back());
    ex.label = s.label;
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

LoadedDataset load_dataset(const std::string& dir, int max_dim) {
  auto index = open_input(dir + "/labels.csv");
  std::string line;
  int lineno = 0;
  LoadedDataset ds;
  while (std::getline(index, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) f.push_back(tok);
    if (lineno == 1 && !f.empty() && f[0] == "schema") continue;
    if (f.size() != 6 || f[0] != "ssx-dataset/1")
      throw ValidationError("labels.csv line " + std::to_string(lineno) +
                            ": expected six ssx-dataset/1 fields");
    Digraph g = load_edge_list(dir + "/" + f[2]);
    BitMatrix acts = load_activations(dir + "/" + f[3], g.num_vertices());
    DynDigraph dyn{std::move(g), std::move(acts)};
    ds.dacs.push_back(lift_dac(dyn, max_dim));
    TrainExample ex;
    ex.complex = &ds.dacs.back().complex;
    ex.features = features_from_dac(ds.dacs.back());
    ex.label = static_cast<int>(parse_int_field(f[4], "label", lineno));
    ds.examples.push_back(std::move(ex));
  }
  if (ds.examples.empty())
    throw ValidationError("dataset index has no samples: " + dir);
  return ds;
}

// ---- scaling benchmark ----

BenchReport run_bench(int vertices, int doublings, int width, uint64_t seed,
                      int reps) {
  if (vertices < 2) throw ValidationError("bench needs at least two vertices");
  if (doublings < 1) throw ValidationError("bench needs at least one doubling");
  if (width < 1) throw ValidationError("bench width must be positive");
  if (reps < 1) throw ValidationError("bench reps must be positive");
  int64_t n = vertices;
  int64_t base_pairs = 16 * n;
  int64_t max_pairs = base_pairs << doublings;
  if (max_pairs > n * n / 2)
    throw ValidationError(
        "too many doublings for the vertex count: the pair budget exceeds "
        "half of all vertex pairs");

  Complex c = build_flag_complex(Digraph(vertices, {}), 0);
  Rng wrng(seed, 0);
  Eigen::MatrixXd W(width, width);
  for (Eigen::Index r = 0; r < W.rows(); ++r)
    for (Eigen::Index cc = 0; cc < W.cols(); ++cc)
      W(r, cc) = wrng.unit() * 2.0 - 1.0;
  Eigen::MatrixXd x(n, width);
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (Eigen::Index cc = 0; cc < x.cols(); ++cc)
      x(r, cc) = wrng.unit() * 2.0 - 1.0;
  FeatureSet feats = {x};

  BenchReport report;
  for (int d = 0; d <= doublings; ++d) {
    int64_t want = base_pairs << d;
    Rng prng(seed, static_cast<uint64_t>(d) + 1);
    std::set<SidPair> chosen;
    while (static_cast<int64_t>(chosen.size()) < want) {
      auto u = static_cast<int64_t>(prng.below(static_cast<uint64_t>(n)));
      auto v = static_cast<int64_t>(prng.below(static_cast<uint64_t>(n)));
      chosen.insert({Sid{0, u}, Sid{0, v}});
    }
    Relation rel(std::vector<SidPair>(chosen.begin(), chosen.end()), c.uid());

    SsnLayer layer;
    RelationChannel ch;
    ch.name = "bench";
    ch.rel = rel;
    ch.src = 0;
    ch.dst = 0;
    ch.W = W;
    ch.b = Eigen::MatrixXd::Zero(1, width);
    layer.channels.push_back(std::move(ch));
    layer.inner = InnerAgg::kSum;
    layer.outer = OuterAgg::kSum;
    layer.act = Activation::kIdentity;
    layer.msg_width = width;
    layer.W_phi = Eigen::MatrixXd::Zero(2 * width, width);
    layer.W_phi.bottomRows(width) = Eigen::MatrixXd::Identity(width, width);
    layer.b_phi = Eigen::MatrixXd::Zero(1, width);

    forward_layer(layer, c, feats);  // warm-up
    std::vector<double> times;
    times.reserve(reps);
    double sink = 0.0;
    for (int r = 0; r < reps; ++r) {
      auto t0 = std::chrono::steady_clock::now();
      FeatureSet y = forward_layer(layer, c, feats);
      auto t1 = std::chrono::steady_clock::now();
      sink += y[0](0, 0);
      times.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    if (!std::isfinite(sink))
      throw ValidationError("bench forward produced non-finite output");
    std::sort(times.begin(), times.end());
    double median = times[times.size() / 2];
    if (times.size() % 2 == 0)
      median = 0.5 * (median + times[times.size() / 2 - 1]);
    BenchRow row;
    row.n_simplices = c.size();
    row.e_pairs = rel.size();
    row.width = width;
    row.seconds = median;
    row.dispersion =
        median > 0.0 ? (times.back() - times.front()) / median : 0.0;
    report.rows.push_back(row);
  }

  // Least-squares scale for time ~ a * (N W^2 + E W), then the relative RMS
  // residual, and the log-log slope of time against pair count.
  double sxx = 0.0, sxt = 0.0, stt = 0.0;
  for (const auto& r : report.rows) {
    double model = static_cast<double>(r.n_simplices) * width * width +
                   static_cast<double>(r.e_pairs) * width;
    sxx += model * model;
    sxt += model * r.seconds;
    stt += r.seconds * r.seconds;
  }
  double a = sxx > 0.0 ? sxt / sxx : 0.0;
  double res = 0.0;
  for (const auto& r : report.rows) {
    double model = static_cast<double>(r.n_simplices) * width * width +
                   static_cast<double>(r.e_pairs) * width;
    double diff = r.seconds - a * model;
    res += diff * diff;
  }
  report.fit_residual = stt > 0.0 ? std::sqrt(res / stt) : 0.0;

  double n_pts = static_cast<double>(report.rows.size());
  double sx = 0.0, sy = 0.0, sxy = 0.0, sx2 = 0.0;
  for (const auto& r : report.rows) {
    double lx = std::log(static_cast<double>(r.e_pairs));
    double ly = std::log(std::max(r.seconds, 1e-12));
    sx += lx;
    sy += ly;
    sxy += lx * ly;
    sx2 += lx * lx;
  }
  double denom = n_pts * sx2 - sx * sx;
  report.growth_exponent = denom != 0.0 ? (n_pts * sxy - sx * sy) / denom : 0.0;
  return report;
}

}  // namespace ssx
