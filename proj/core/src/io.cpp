#include "dpca/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "dpca/error.hpp"

namespace dpca {

using nlohmann::json;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path + "'");
}

DecomposableGraph graph_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("graph JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("p") || !j.contains("cliques")) {
    throw Error(ErrorCode::ParseError, "graph JSON must be an object with \"p\" and \"cliques\"");
  }
  if (!j["p"].is_number_integer() || !j["cliques"].is_array()) {
    throw Error(ErrorCode::ParseError, "graph JSON: \"p\" must be an integer and \"cliques\" an array");
  }
  std::vector<IndexSet> cliques;
  for (const auto& c : j["cliques"]) {
    if (!c.is_array()) throw Error(ErrorCode::ParseError, "graph JSON: every clique must be an array");
    IndexSet set;
    for (const auto& v : c) {
      if (!v.is_number_integer()) throw Error(ErrorCode::ParseError, "graph JSON: node ids must be integers");
      set.push_back(v.get<int>());
    }
    cliques.push_back(std::move(set));
  }
  return DecomposableGraph::build(j["p"].get<int>(), std::move(cliques));
}

std::string graph_to_json(const DecomposableGraph& g) {
  json j;
  j["p"] = g.p();
  j["cliques"] = g.cliques();
  return j.dump() + "\n";
}

DecomposableGraph read_graph(const std::string& path) { return graph_from_json(read_text(path)); }

void write_graph(const std::string& path, const DecomposableGraph& g) { write_text(path, graph_to_json(g)); }

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_number(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

SampleSet parse_samples(std::istream& in, const std::string& source) {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  int lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    double v = 0.0;
    if (first) {
      first = false;
      if (!parse_number(fields[0], v)) {
        cols = fields.size();
        continue;  // header
      }
    }
    if (cols == 0) cols = fields.size();
    if (fields.size() != cols) {
      throw Error(ErrorCode::ParseError, source + ":" + std::to_string(lineno) + ": expected " +
                                             std::to_string(cols) + " fields, found " +
                                             std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (!parse_number(fields[c], v)) {
        throw Error(ErrorCode::ParseError, source + ":" + std::to_string(lineno) + ": field " +
                                               std::to_string(c + 1) + " is not a number: '" +
                                               std::string(trim(fields[c])) + "'");
      }
      values.push_back(v);
    }
    ++rows;
  }
  SampleSet out;
  out.samples.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out.samples(r, c) = values[r * cols + c];
  return out;
}

SampleSet read_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for reading");
  return parse_samples(in, path);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_samples(std::ostream& out, const SampleSet& data) {
  for (int r = 0; r < data.n(); ++r) {
    for (int c = 0; c < data.p(); ++c) {
      if (c) out << ',';
      out << format_double(data.samples(r, c));
    }
    out << '\n';
  }
}

void write_samples(const std::string& path, const SampleSet& data) {
  std::ostringstream ss;
  write_samples(ss, data);
  write_text(path, ss.str());
}

std::string manifest_json(const Dataset& ds, const std::string& graph_file,
                          const std::string& samples_file) {
  json j;
  j["preset"] = ds.preset;
  j["seed"] = ds.seed;
  j["generator"] = "mt19937_64 + polar normal";
  j["p"] = ds.graph.p();
  j["n"] = ds.samples.n();
  j["graph"] = graph_file;
  j["samples"] = samples_file;
  json blocks = json::array();
  for (int k = 0; k < ds.graph.clique_count(); ++k) {
    const Matrix b = ds.truth.clique_block(k);
    json rows = json::array();
    for (Eigen::Index r = 0; r < b.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < b.cols(); ++c) row.push_back(b(r, c));
      rows.push_back(std::move(row));
    }
    blocks.push_back({{"clique", ds.graph.clique(k)}, {"block", std::move(rows)}});
  }
  j["true_concentration_blocks"] = std::move(blocks);
  json inj = json::array();
  for (const auto& i : ds.injections) inj.push_back({{"index", i.index}, {"amplitude", i.amplitude}});
  j["injections"] = std::move(inj);
  json alts = json::array();
  for (std::size_t a = 0; a < ds.alternatives.size(); ++a) {
    alts.push_back({{"name", ds.alternative_names[a]},
                    {"p", ds.alternatives[a].p()},
                    {"cliques", ds.alternatives[a].cliques()}});
  }
  j["alternative_graphs"] = std::move(alts);
  return j.dump(1) + "\n";
}

}  // namespace dpca
