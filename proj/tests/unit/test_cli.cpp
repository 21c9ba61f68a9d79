#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <regex>
#include <sstream>

#include "cli.hpp"
#include "dpca/io.hpp"
#include "dpca/synth.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "dpca");
  std::ostringstream out, err;
  const int code = dpca::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("dpca_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

bool single_error_line(const std::string& err) {
  static const std::regex re("dpca: error\\[[A-Za-z]+\\]: [^\\n]*\\n");
  return std::regex_match(err, re);
}

}  // namespace

TEST_CASE("gen is deterministic per seed") {
  const auto a = scratch("gen_a");
  const auto b = scratch("gen_b");
  REQUIRE(run({"gen", "--preset", "abilene-like", "--seed", "5", "--out", a.string()}).code == 0);
  REQUIRE(run({"gen", "--preset", "abilene-like", "--seed", "5", "--out", b.string()}).code == 0);
  for (const char* f : {"graph.json", "samples.csv", "manifest.json", "graph_random.json", "graph_two-clique.json"}) {
    CHECK(dpca::read_text((a / f).string()) == dpca::read_text((b / f).string()));
  }
  const auto ds = dpca::read_samples((a / "samples.csv").string());
  CHECK(ds.n() == 1000);
  CHECK(ds.p() == 41);
}

TEST_CASE("toy preset and eig with oracle") {
  const auto d = scratch("toy");
  REQUIRE(run({"gen", "--preset", "two-clique-toy", "--seed", "3", "--out", d.string()}).code == 0);
  CHECK(dpca::read_graph((d / "graph.json").string()).p() == 3);
  const auto r = run({"eig", "--graph", (d / "graph.json").string(), "--data", (d / "samples.csv").string(),
                      "--components", "2", "--oracle"});
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  bool in_oracle = false;
  int rows = 0;
  while (std::getline(lines, line)) {
    if (line.rfind("component,oracle", 0) == 0) {
      in_oracle = true;
      continue;
    }
    if (!in_oracle) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    const auto c3 = line.find(',', c2 + 1);
    CHECK(std::stod(line.substr(c2 + 1, c3 - c2 - 1)) <= 1e-8);
    ++rows;
  }
  CHECK(rows == 2);
  const auto again = run({"eig", "--graph", (d / "graph.json").string(), "--data",
                          (d / "samples.csv").string(), "--components", "2", "--oracle"});
  CHECK(again.out == r.out);
}

TEST_CASE("eig on the tridiagonal fixture") {
  const auto d = scratch("tri");
  dpca::write_text((d / "g.json").string(), "{\"p\": 3, \"cliques\": [[0,1],[1,2]]}");
  // samples whose ML concentration is the tridiagonal matrix: use its
  // covariance's Cholesky factor scaled to make (1/n) X^T X exact
  Eigen::MatrixXd k(3, 3);
  k << 2, 1, 0, 1, 2, 1, 0, 1, 2;
  const Eigen::MatrixXd sigma = k.inverse();
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  const Eigen::MatrixXd x = std::sqrt(3.0) * Eigen::MatrixXd(llt.matrixU());
  dpca::write_samples((d / "x.csv").string(), dpca::SampleSet{x});
  const auto r = run({"eig", "--graph", (d / "g.json").string(), "--data", (d / "x.csv").string(), "--tol", "1e-9"});
  REQUIRE(r.code == 0);
  const auto pos = r.out.find("\n1,");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stod(r.out.substr(pos + 3)) == doctest::Approx(0.585786437).epsilon(1e-8));
}

TEST_CASE("usage and data errors are single machine-readable lines") {
  const auto d = scratch("errors");
  dpca::write_text((d / "g.json").string(), "{\"p\": 3, \"cliques\": [[0,1],[1,2]]}");
  dpca::write_text((d / "x.csv").string(), "1,0,0\n0,1,0\n0,0,1\n1,1,1\n");
  dpca::write_text((d / "bad.csv").string(), "1,0,0\n0,1\n");
  const auto g = (d / "g.json").string();

  const auto too_many = run({"eig", "--graph", g, "--data", (d / "x.csv").string(), "--components", "4"});
  CHECK(too_many.code == 2);
  CHECK(single_error_line(too_many.err));

  const auto parse = run({"eig", "--graph", g, "--data", (d / "bad.csv").string()});
  CHECK(parse.code == 1);
  CHECK(single_error_line(parse.err));
  CHECK(parse.err.find("ParseError") != std::string::npos);
  CHECK(parse.err.find(":2:") != std::string::npos);

  const auto missing = run({"eig", "--graph", (d / "none.json").string(), "--data", (d / "x.csv").string()});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("IoError") != std::string::npos);

  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  const auto neg = run({"track", "--graph", g, "--data", (d / "x.csv").string(), "--window", "2", "--overlap", "2"});
  CHECK(neg.code == 2);
  CHECK(single_error_line(neg.err));
}

TEST_CASE("track writes one row per window") {
  const auto d = scratch("track");
  dpca::write_text((d / "g.json").string(), "{\"p\": 4, \"cliques\": [[0,1,2],[2,3]]}");
  dpca::Rng rng(1);
  const auto s = dpca::sample_standard(4, 300, rng);
  dpca::write_samples((d / "x.csv").string(), s);
  const auto r = run({"track", "--graph", (d / "g.json").string(), "--data", (d / "x.csv").string(), "--window",
                      "100", "--overlap", "50", "--oracle", "--iters"});
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string header;
  std::getline(lines, header);
  CHECK(header.rfind("window_start,lambda,bracket_width,iterations,messages_bytes,oracle_abs_error,iter_1", 0) == 0);
  int rows = 0;
  std::string line;
  while (std::getline(lines, line)) {
    ++rows;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    CHECK(std::stod(f[5]) <= 1e-3);
  }
  CHECK(rows == 5);

  const auto single = run({"track", "--graph", (d / "g.json").string(), "--data", (d / "x.csv").string(),
                           "--window", "300", "--overlap", "0"});
  CHECK(std::count(single.out.begin(), single.out.end(), '\n') == 2);
}

TEST_CASE("detect flags injections and compares graphs") {
  const auto d = scratch("detect");
  REQUIRE(run({"gen", "--preset", "abilene-like", "--seed", "2", "--out", d.string()}).code == 0);
  const auto out = (d / "resid.csv").string();
  const auto r = run({"detect", "--graph", (d / "graph.json").string(), "--data", (d / "samples.csv").string(),
                      "--components", "4", "--compare", (d / "graph_random.json").string(), "--out", out});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("flagged", 0) == 0);
  const auto csv = dpca::read_text(out);
  CHECK(csv.rfind("index,residual,flagged,residual_graph_random,residual_dense\n", 0) == 0);

  double primary = 0, random = 0;
  std::istringstream lines(r.out);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.rfind("mean_abs_error_vs_dense primary ", 0) == 0) primary = std::stod(line.substr(32));
    if (line.rfind("mean_abs_error_vs_dense graph_random ", 0) == 0) random = std::stod(line.substr(37));
  }
  CHECK(primary < random);

  const auto full = run({"detect", "--graph", (d / "graph.json").string(), "--data", (d / "samples.csv").string(),
                         "--components", "41", "--out", out});
  REQUIRE(full.code == 0);
  CHECK(full.out == "flagged\n");
}
