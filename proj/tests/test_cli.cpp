// End-to-end tests for the command-line binary: exact output fields, exit
// codes, and bit-for-bit reproducibility.
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "ssx/digraph.hpp"
#include "ssx/io.hpp"
#include "ssx/wl.hpp"

using namespace ssx;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out, err;
};

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("ssx_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliResult run_cli(const std::string& args) {
  static int counter = 0;
  fs::path out = work_dir() / ("out" + std::to_string(counter));
  fs::path err = work_dir() / ("err" + std::to_string(counter));
  ++counter;
  std::string cmd = std::string(SSX_CLI_PATH) + " " + args + " > " +
                    out.string() + " 2> " + err.string();
  int status = std::system(cmd.c_str());
  CliResult r;
  r.code = status < 0 ? -1 : WEXITSTATUS(status);
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

fs::path write_graph(const std::string& name, const Digraph& g) {
  fs::path p = work_dir() / name;
  std::ofstream out(p);
  write_edge_list(out, g);
  return p;
}

}  // namespace

TEST_CASE("lift reports per-dimension simplex counts") {
  fs::path cyc = write_graph("cyc3.edges", Digraph(3, {{0, 1}, {1, 2}, {2, 0}}));
  CliResult r = run_cli("lift --edges " + cyc.string() + " --max-dim 2");
  CHECK(r.code == 0);
  CHECK(r.out ==
        "schema,dim,count\n"
        "ssx-lift/1,0,3\n"
        "ssx-lift/1,1,3\n"
        "ssx-lift/1,2,0\n");
}

TEST_CASE("invariants emits the anchored alternating-sum values") {
  fs::path c12 = write_graph("c7_12.edges", circulant(7, {1, 2}));
  fs::path c13 = write_graph("c7_13.edges", circulant(7, {1, 3}));
  CliResult a = run_cli("invariants --edges " + c12.string() +
                        " --kind ec --T 2");
  CHECK(a.code == 0);
  auto rows_a = lines_of(a.out);
  REQUIRE(rows_a.size() == 2);
  CHECK(rows_a[0] == "schema,id,kind,t1,t2");
  CHECK(split_csv(rows_a[1]) ==
        std::vector<std::string>{"ssx-invariants/1", "0", "ec", "0", "0"});
  CliResult b = run_cli("invariants --edges " + c13.string() +
                        " --kind ec --T 1");
  CHECK(b.code == 0);
  auto rows_b = lines_of(b.out);
  REQUIRE(rows_b.size() == 2);
  CHECK(split_csv(rows_b[1]) ==
        std::vector<std::string>{"ssx-invariants/1", "0", "ec", "-7"});
}

TEST_CASE("wl-test verdict fields are exact") {
  auto verdict = [](const std::string& args) {
    CliResult r = run_cli("wl-test " + args);
    REQUIRE(r.code == 0);
    auto rows = lines_of(r.out);
    REQUIRE(rows.size() == 2);
    return split_csv(rows[1])[3];
  };
  // NOT-SEPARATED contains SEPARATED as a substring, so compare whole fields.
  CHECK(verdict("--family D --pair fig8") == "SEPARATED");
  CHECK(verdict("--family dir --pair fig8") == "NOT-SEPARATED");
  CHECK(verdict("--family U --pair fig6") == "NOT-SEPARATED");
  CHECK(verdict("--family D --pair fig6") == "SEPARATED");
  CHECK(verdict("--family sym --pair fig9") == "NOT-SEPARATED");
  CHECK(verdict("--family sym --pair fig11") == "NOT-SEPARATED");

  CliResult j = run_cli("wl-test --family D --pair fig8 --format jsonl");
  CHECK(j.code == 0);
  CHECK(j.out.find("\"schema\":\"ssx-wl/1\"") != std::string::npos);
  CHECK(j.out.find("\"verdict\":\"SEPARATED\"") != std::string::npos);

  fs::path left = work_dir() / "fig8_left.edges";
  fs::path right = work_dir() / "fig8_right.edges";
  CliResult dl = run_cli("fixtures --name fig8 --dump left");
  CHECK(dl.code == 0);
  std::ofstream(left) << dl.out;
  CliResult dr = run_cli("fixtures --name fig8 --dump right");
  CHECK(dr.code == 0);
  std::ofstream(right) << dr.out;
  CliResult file_based = run_cli("wl-test --family D --left " + left.string() +
                                 " --right " + right.string());
  CHECK(file_based.code == 0);
  CHECK(split_csv(lines_of(file_based.out)[1])[3] == "SEPARATED");
}

TEST_CASE("bad inputs exit 2 with a diagnostic") {
  CliResult unknown = run_cli("lift --edges x.edges --bogus-flag 1");
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("--bogus-flag") != std::string::npos);
  CHECK(unknown.err.find("Usage") != std::string::npos);

  CHECK(run_cli("lift --edges /nonexistent/file.edges").code == 2);
  CHECK(run_cli("wl-test --family Z --pair fig8").code == 2);
  CHECK(run_cli("wl-test --family D --pair not_a_fixture").code == 2);
  CHECK(run_cli("fixtures --name fig8 --dump middle").code == 2);
  CHECK(run_cli("nosuchcommand").code == 2);
  // gen creates missing directories, so block it with a regular file.
  fs::path blocker = work_dir() / "blocker";
  std::ofstream(blocker) << "not a directory\n";
  CHECK(run_cli("gen --out " + (blocker / "xyz").string() + " --samples 1")
            .code == 2);
  CHECK(run_cli("--help").code == 0);
}

TEST_CASE("gen is reproducible and train/ssn-forward close the loop") {
  fs::path da = work_dir() / "ds_a";
  fs::path db = work_dir() / "ds_b";
  fs::create_directories(da);
  fs::create_directories(db);
  std::string spec =
      " --vertices 12 --density 0.5 --samples 8 --seed 11 --bias 0.95 0.05";
  CHECK(run_cli("gen --out " + da.string() + spec).code == 0);
  CHECK(run_cli("gen --out " + db.string() + spec).code == 0);
  CHECK(slurp(da / "labels.csv") == slurp(db / "labels.csv"));
  CHECK(slurp(da / "sample_0.edges") == slurp(db / "sample_0.edges"));
  CHECK(slurp(da / "sample_0.acts") == slurp(db / "sample_0.acts"));
  CHECK(slurp(da / "labels.csv").find("ssx-dataset/1") != std::string::npos);

  fs::path model = work_dir() / "model.json";
  std::string train_args = "train --data-dir " + da.string() +
                           " --epochs 4 --seed 2 --save-model " +
                           model.string();
  CliResult t1 = run_cli(train_args);
  CHECK(t1.code == 0);
  auto rows = lines_of(t1.out);
  REQUIRE(rows.size() >= 3);
  CHECK(rows[0] == "schema,epoch,split,loss,accuracy");
  CHECK(split_csv(rows[1])[1] == "1");
  CHECK(split_csv(rows[1])[2] == "train");

  CliResult t2 = run_cli(train_args);
  CHECK(t2.out == t1.out);  // bit-for-bit reproducible
  CliResult t3 = run_cli(train_args + " --threads 3");
  CHECK(t3.out == t1.out);  // invariant under thread count

  CliResult fwd = run_cli("ssn-forward --model " + model.string() +
                          " --edges " + (da / "sample_0.edges").string() +
                          " --acts " + (da / "sample_0.acts").string());
  CHECK(fwd.code == 0);
  auto frows = lines_of(fwd.out);
  REQUIRE(frows.size() >= 2);
  CHECK(frows[0] == "schema,field,index,value");
  CHECK(split_csv(frows.back())[1] == "logit");
}

TEST_CASE("bench doubles the pair count per row") {
  CliResult r = run_cli("bench --vertices 256 --doublings 1 --width 4 --reps 3");
  CHECK(r.code == 0);
  auto rows = lines_of(r.out);
  REQUIRE(rows.size() == 3);
  auto r1 = split_csv(rows[1]);
  auto r2 = split_csv(rows[2]);
  CHECK(r1[0] == "ssx-bench/1");
  CHECK(std::stoll(r2[2]) == 2 * std::stoll(r1[2]));
  CHECK(std::stod(r1[4]) > 0.0);
}

TEST_CASE("fixture dumps round-trip through the parser") {
  CliResult r = run_cli("fixtures --name fig8 --dump left");
  CHECK(r.code == 0);
  std::istringstream in(r.out);
  Digraph g = parse_edge_list(in);
  FixturePair fp = fixture("fig8");
  CHECK(g.num_vertices() == fp.left.num_vertices());
  CHECK(g.edges() == fp.left.edges());

  CliResult list = run_cli("fixtures");
  CHECK(list.code == 0);
  for (const char* name : {"fig6", "fig8", "fig9", "fig11"})
    CHECK(list.out.find(name) != std::string::npos);
}
