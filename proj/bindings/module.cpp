// Python surface: thin wrappers over the library operations, converting to
// and from plain containers at the boundary. Models cross as JSON strings.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ssx/complex.hpp"
#include "ssx/dac.hpp"
#include "ssx/digraph.hpp"
#include "ssx/errors.hpp"
#include "ssx/invariants.hpp"
#include "ssx/io.hpp"
#include "ssx/rng.hpp"
#include "ssx/ssn.hpp"
#include "ssx/train.hpp"
#include "ssx/wl.hpp"

namespace py = pybind11;
using namespace ssx;

namespace {

BitMatrix rows_to_bits(const std::vector<std::vector<int>>& rows) {
  int T = rows.empty() ? 0 : static_cast<int>(rows[0].size());
  for (const auto& r : rows)
    if (static_cast<int>(r.size()) != T)
      throw ValidationError("activation rows must have equal length");
  BitMatrix m(static_cast<int64_t>(rows.size()), T);
  for (size_t r = 0; r < rows.size(); ++r)
    for (int c = 0; c < T; ++c) {
      if (rows[r][static_cast<size_t>(c)] != 0 &&
          rows[r][static_cast<size_t>(c)] != 1)
        throw ValidationError("activation values must be 0 or 1");
      m.set(static_cast<int64_t>(r), c, rows[r][static_cast<size_t>(c)] != 0);
    }
  return m;
}

std::vector<std::vector<int>> bits_to_rows(const BitMatrix& m) {
  std::vector<std::vector<int>> rows(static_cast<size_t>(m.rows()));
  for (int64_t r = 0; r < m.rows(); ++r) {
    rows[static_cast<size_t>(r)].resize(static_cast<size_t>(m.cols()));
    for (int c = 0; c < m.cols(); ++c)
      rows[static_cast<size_t>(r)][static_cast<size_t>(c)] =
          m.get(r, c) ? 1 : 0;
  }
  return rows;
}

py::dict verdict_dict(const WlVerdict& v) {
  py::dict d;
  d["separated"] = v.separated;
  d["rounds"] = v.rounds;
  d["left"] = v.left.counts;
  d["right"] = v.right.counts;
  return d;
}

std::string model_to_json(const SsnModel& model) {
  std::ostringstream out;
  save_model(out, model);
  return out.str();
}

SsnModel model_from_json(const std::string& text) {
  std::istringstream in(text);
  return load_model(in);
}

}  // namespace

PYBIND11_MODULE(pyssx, m) {
  m.doc() = "Directed flag complexes, activity lifts, invariants, relational "
            "WL refinement, and semi-simplicial networks.";

  py::register_exception<ValidationError>(m, "ValidationError",
                                          PyExc_ValueError);

  py::class_<Digraph>(m, "Digraph")
      .def(py::init<int, std::vector<std::pair<int, int>>>(),
           py::arg("num_vertices"), py::arg("edges"))
      .def_property_readonly("num_vertices", &Digraph::num_vertices)
      .def_property_readonly("edges",
                             [](const Digraph& g) { return g.edges(); })
      .def("has_edge", &Digraph::has_edge, py::arg("u"), py::arg("v"))
      .def("__repr__", [](const Digraph& g) {
        std::ostringstream s;
        s << "Digraph(" << g.num_vertices() << " vertices, " << g.num_edges()
          << " edges)";
        return s.str();
      });

  m.def("circulant", &circulant, py::arg("n"), py::arg("steps"));
  m.def("symmetrized", &symmetrized, py::arg("graph"));
  m.def("relabel", &relabel, py::arg("graph"), py::arg("perm"));
  m.def(
      "induced_subgraph",
      [](const Digraph& g, const std::vector<int>& vertices) {
        return induced_subgraph(g, vertices);
      },
      py::arg("graph"), py::arg("vertices"));

  py::class_<Complex>(m, "Complex")
      .def_property_readonly("num_vertices", &Complex::num_vertices)
      .def_property_readonly("max_dim", &Complex::max_dim)
      .def("size", py::overload_cast<int>(&Complex::size, py::const_),
           py::arg("n"))
      .def_property_readonly("sizes",
                             [](const Complex& c) {
                               std::vector<int64_t> s;
                               for (int n = 0; n <= c.max_dim(); ++n)
                                 s.push_back(c.size(n));
                               return s;
                             })
      .def(
          "tuples",
          [](const Complex& c, int n) {
            std::vector<Tuple> out;
            for (int64_t i = 0; i < c.size(n); ++i)
              out.push_back(c.tuple(n, i));
            return out;
          },
          py::arg("n"))
      .def("__repr__", [](const Complex& c) {
        std::ostringstream s;
        s << "Complex(sizes";
        for (int n = 0; n <= c.max_dim(); ++n) s << " " << c.size(n);
        s << ")";
        return s.str();
      });

  m.def("build_flag_complex", &build_flag_complex, py::arg("graph"),
        py::arg("max_dim"));

  py::class_<DynDigraph>(m, "DynDigraph")
      .def(py::init([](Digraph g, const std::vector<std::vector<int>>& rows) {
             DynDigraph dyn{std::move(g), rows_to_bits(rows)};
             validate_dyn(dyn);
             return dyn;
           }),
           py::arg("graph"), py::arg("activations"))
      .def_readonly("graph", &DynDigraph::graph)
      .def_property_readonly("T", &DynDigraph::T)
      .def_property_readonly("activations", [](const DynDigraph& g) {
        return bits_to_rows(g.activations);
      });

  py::class_<Dac>(m, "Dac")
      .def_readonly("complex", &Dac::complex)
      .def_property_readonly("T", &Dac::T)
      .def("active", &Dac::active, py::arg("n"), py::arg("idx"),
           py::arg("t"));

  m.def("lift_dac", &lift_dac, py::arg("dyn"), py::arg("max_dim"));
  m.def(
      "functional_subgraph",
      [](const DynDigraph& g, int t) { return functional_subgraph(g, t); },
      py::arg("dyn"), py::arg("t"));
  m.def("euler_series", &euler_series, py::arg("dac"));

  auto spec_of = [](const std::string& kind, int k, int n, int i, int j) {
    return parse_invariant_spec(kind, k, n, i, j);
  };
  m.def(
      "global_sum",
      [spec_of](const Dac& dac, const std::string& kind, int k, int n, int i,
                int j) { return global_sum(dac, spec_of(kind, k, n, i, j)); },
      py::arg("dac"), py::arg("kind"), py::arg("k") = 1, py::arg("n") = 1,
      py::arg("i") = 0, py::arg("j") = 1);
  m.def(
      "global_mean",
      [spec_of](const Dac& dac, const std::string& kind, int k, int n, int i,
                int j) { return global_mean(dac, spec_of(kind, k, n, i, j)); },
      py::arg("dac"), py::arg("kind"), py::arg("k") = 1, py::arg("n") = 1,
      py::arg("i") = 0, py::arg("j") = 1);
  m.def(
      "local_series",
      [spec_of](const Dac& dac, const std::string& kind, int k, int n, int i,
                int j) { return local_series(dac, spec_of(kind, k, n, i, j)); },
      py::arg("dac"), py::arg("kind"), py::arg("k") = 1, py::arg("n") = 1,
      py::arg("i") = 0, py::arg("j") = 1);
  m.def("topofeat", &topofeat, py::arg("dac"), py::arg("K"));

  m.def(
      "sswl_verdict",
      [](const Complex& a, const Complex& b, const std::string& family) {
        if (family.size() != 1 || (family[0] != 'U' && family[0] != 'D'))
          throw ValidationError("family must be 'U' or 'D'");
        return verdict_dict(sswl_compare(a, b, family[0]));
      },
      py::arg("a"), py::arg("b"), py::arg("family") = "D");
  m.def(
      "dirwl_verdict",
      [](const Digraph& a, const Digraph& b, bool directed) {
        return verdict_dict(dirwl_compare(a, b, directed));
      },
      py::arg("a"), py::arg("b"), py::arg("directed") = true);
  m.def(
      "sswl_histogram",
      [](const Complex& c, const std::string& family) {
        if (family.size() != 1 || (family[0] != 'U' && family[0] != 'D'))
          throw ValidationError("family must be 'U' or 'D'");
        return sswl_histogram(c, family[0]).counts;
      },
      py::arg("complex"), py::arg("family") = "D");

  m.def("fixture_names", [] {
    std::vector<std::string> names;
    for (const auto& f : fixtures()) names.push_back(f.name);
    return names;
  });
  m.def(
      "fixture_pair",
      [](const std::string& name) {
        FixturePair f = fixture(name);
        return py::make_tuple(f.left, f.right);
      },
      py::arg("name"));

  m.def(
      "parse_edge_list",
      [](const std::string& text) {
        std::istringstream in(text);
        return parse_edge_list(in);
      },
      py::arg("text"));
  m.def(
      "format_edge_list",
      [](const Digraph& g) {
        std::ostringstream out;
        write_edge_list(out, g);
        return out.str();
      },
      py::arg("graph"));
  m.def(
      "parse_activations",
      [](const std::string& text, int expected_rows) {
        std::istringstream in(text);
        return bits_to_rows(parse_activations(in, expected_rows));
      },
      py::arg("text"), py::arg("expected_rows") = -1);
  m.def(
      "format_activations",
      [](const std::vector<std::vector<int>>& rows) {
        std::ostringstream out;
        write_activations(out, rows_to_bits(rows));
        return out.str();
      },
      py::arg("rows"));

  py::class_<SyntheticSample>(m, "SyntheticSample")
      .def_readonly("dyn", &SyntheticSample::dyn)
      .def_readonly("label", &SyntheticSample::label)
      .def_readonly("skeleton_index", &SyntheticSample::skeleton_index);

  m.def(
      "generate_synthetic",
      [](int num_classes, int vertices, double density, double reciprocity,
         int T, const std::vector<double>& motif_bias, int samples_per_class,
         uint64_t seed) {
        SyntheticTaskSpec spec;
        spec.num_classes = num_classes;
        spec.vertices = vertices;
        spec.density = density;
        spec.reciprocity = reciprocity;
        spec.T = T;
        spec.motif_bias = motif_bias;
        spec.samples_per_class = samples_per_class;
        spec.seed = seed;
        return generate_synthetic(spec);
      },
      py::arg("num_classes") = 2, py::arg("vertices") = 16,
      py::arg("density") = 0.3, py::arg("reciprocity") = 0.0,
      py::arg("T") = 2, py::arg("motif_bias") = std::vector<double>{0.9, 0.1},
      py::arg("samples_per_class") = 20, py::arg("seed") = 0);

  m.def(
      "make_task_model",
      [](const std::string& arch, int feat_width, int msg_width, int classes,
         uint64_t seed) {
        return model_to_json(
            make_task_model(arch, feat_width, msg_width, classes, seed));
      },
      py::arg("arch"), py::arg("feat_width"), py::arg("msg_width"),
      py::arg("classes"), py::arg("seed") = 0);
  m.def(
      "model_param_count",
      [](const std::string& model_json) {
        SsnModel model = model_from_json(model_json);
        return param_count(model);
      },
      py::arg("model_json"));
  m.def(
      "ssn_logits",
      [](const std::string& model_json, const Dac& dac) {
        SsnModel model = model_from_json(model_json);
        ModelTrace tr = ssn_forward(model, dac.complex, features_from_dac(dac));
        return std::vector<double>(tr.logits.data(),
                                   tr.logits.data() + tr.logits.size());
      },
      py::arg("model_json"), py::arg("dac"));

  m.def(
      "train_task",
      [](const std::vector<SyntheticSample>& samples, const std::string& arch,
         int width, int classes, double eval_frac, double lr, int epochs,
         int batch, uint64_t seed, const std::string& optimizer,
         double load_lambda, int max_dim) {
        if (eval_frac < 0.0 || eval_frac >= 1.0)
          throw ValidationError("eval_frac must lie in [0,1)");
        LoadedDataset ds = lift_samples(samples, max_dim);
        if (ds.examples.empty())
          throw ValidationError("no samples to train on");
        int feat_width = ds.dacs.front().T();
        int msg_width = width > 0 ? width : (arch == "sym" ? 12 : 8);
        SsnModel model =
            make_task_model(arch, feat_width, msg_width, classes, seed);

        auto order =
            Rng(seed, 999983).permutation(static_cast<int>(ds.examples.size()));
        auto n_eval = static_cast<size_t>(
            eval_frac * static_cast<double>(order.size()));
        std::vector<TrainExample> eval_set, train_set;
        for (size_t idx = 0; idx < order.size(); ++idx)
          (idx < n_eval ? eval_set : train_set)
              .push_back(ds.examples[static_cast<size_t>(order[idx])]);

        TrainConfig cfg;
        cfg.lr = lr;
        cfg.epochs = epochs;
        cfg.batch = batch;
        cfg.seed = seed;
        cfg.optimizer = optimizer;
        cfg.load_lambda = load_lambda;
        auto rows = train_ssn(model, train_set, eval_set, cfg);

        py::list metrics;
        for (const auto& r : rows)
          metrics.append(py::make_tuple(r.epoch, r.split, r.loss, r.accuracy));
        double acc = 0.0;
        evaluate_ssn(model, eval_set.empty() ? train_set : eval_set,
                     load_lambda, &acc);
        py::dict out;
        out["metrics"] = metrics;
        out["accuracy"] = acc;
        out["model"] = model_to_json(model);
        return out;
      },
      py::arg("samples"), py::arg("arch") = "D", py::arg("width") = 0,
      py::arg("classes") = 2, py::arg("eval_frac") = 0.25,
      py::arg("lr") = 1e-3, py::arg("epochs") = 20, py::arg("batch") = 8,
      py::arg("seed") = 0, py::arg("optimizer") = "adam",
      py::arg("load_lambda") = 0.0, py::arg("max_dim") = 2);

  py::class_<Rng>(m, "Rng")
      .def(py::init<uint64_t, uint64_t>(), py::arg("seed"),
           py::arg("stream") = 0)
      .def("unit", &Rng::unit)
      .def("below", &Rng::below, py::arg("n"))
      .def("bernoulli", &Rng::bernoulli, py::arg("p"))
      .def("normal", &Rng::normal)
      .def("permutation", &Rng::permutation, py::arg("n"));
}
