#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "dpca/error.hpp"
#include "dpca/io.hpp"

using namespace dpca;

namespace {

ErrorCode parse_code(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_samples(in, "x.csv");
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("graph json round trip") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto g = random_decomposable(20 + static_cast<int>(seed), 1 + static_cast<int>(seed % 6), 3, seed);
    CHECK(graph_from_json(graph_to_json(g)) == g);
  }
  CHECK(graph_to_json(DecomposableGraph::build(3, {{0, 1}, {1, 2}})) == "{\"cliques\":[[0,1],[1,2]],\"p\":3}\n");
}

TEST_CASE("graph json errors") {
  auto code = [](const std::string& s) {
    try {
      graph_from_json(s);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::IoError;
  };
  CHECK(code("{") == ErrorCode::ParseError);
  CHECK(code("{\"p\": 3}") == ErrorCode::ParseError);
  CHECK(code("{\"p\": 3, \"cliques\": [[0, \"a\"]]}") == ErrorCode::ParseError);
  CHECK(code("{\"p\": 4, \"cliques\": [[0,1],[2,3]]}") == ErrorCode::NotPerfectOrder);
}

TEST_CASE("samples csv") {
  SUBCASE("with header") {
    std::istringstream in("x0,x1\n1,2\n3.5,-4e-1\n");
    const auto s = parse_samples(in);
    CHECK(s.n() == 2);
    CHECK(s.p() == 2);
    CHECK(s.samples(1, 1) == -0.4);
  }
  SUBCASE("without header, blank lines and CRLF") {
    std::istringstream in("1,2\r\n\n3,4\r\n");
    const auto s = parse_samples(in);
    CHECK(s.n() == 2);
    CHECK(s.samples(1, 0) == 3.0);
  }
  SUBCASE("errors name the line") {
    CHECK(parse_code("1,2\n3\n") == ErrorCode::ParseError);
    std::istringstream in("a,b\n1,2\n3,x\n");
    try {
      parse_samples(in, "x.csv");
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("x.csv:3") != std::string::npos);
    }
    CHECK(parse_code("1,2\n1,000.5,2\n") == ErrorCode::ParseError);
    CHECK(parse_code("1,2\n1;2\n") == ErrorCode::ParseError);
  }
}

TEST_CASE("doubles round trip through 17 significant digits") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  }
  SampleSet s{Matrix(1, 3)};
  s.samples << 0.1, 1.0 / 3.0, -7.25;
  std::ostringstream out;
  write_samples(out, s);
  std::istringstream in(out.str());
  CHECK(parse_samples(in).samples == s.samples);
}

TEST_CASE("missing files") {
  CHECK_THROWS_AS(read_samples("/nonexistent/file.csv"), Error);
  try {
    read_graph("/nonexistent/graph.json");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
  }
}
