#pragma once

#include <iosfwd>
#include <string>

#include "dpca/estimation.hpp"
#include "dpca/graph.hpp"
#include "dpca/synth.hpp"

namespace dpca {

/// Graph JSON: {"p": int, "cliques": [[int, ...], ...]}, cliques in perfect
/// elimination order, 0-based. Throws ParseError or a graph validation error.
DecomposableGraph graph_from_json(const std::string& text);
std::string graph_to_json(const DecomposableGraph& g);
DecomposableGraph read_graph(const std::string& path);
void write_graph(const std::string& path, const DecomposableGraph& g);

/// Samples CSV: one sample per row, a header row is skipped when its first
/// field is not a number. Throws ParseError naming the offending line.
SampleSet parse_samples(std::istream& in, const std::string& source = "<input>");
SampleSet read_samples(const std::string& path);
void write_samples(std::ostream& out, const SampleSet& data);
void write_samples(const std::string& path, const SampleSet& data);

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

/// Ground-truth manifest of a generated data set as JSON.
std::string manifest_json(const Dataset& ds, const std::string& graph_file,
                          const std::string& samples_file);

/// Reads a whole file; throws IoError.
std::string read_text(const std::string& path);
/// Writes a whole file; throws IoError.
void write_text(const std::string& path, const std::string& text);

}  // namespace dpca
