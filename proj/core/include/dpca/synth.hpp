#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpca/estimation.hpp"
#include "dpca/graph.hpp"
#include "dpca/rng.hpp"

namespace dpca {

/// Random positive definite K on the pattern of `graph`: a sum of random
/// positive definite clique blocks, each W W^T / m + diag_shift I.
BlockSparseConcentration random_concentration(const DecomposableGraph& graph, Rng& rng,
                                              double diag_shift = 0.5);

/// n samples of N(0, K^-1), drawn as x = L^-T w with K = L L^T.
SampleSet sample_gaussian(const Matrix& concentration, int n, Rng& rng);

/// n samples of N(0, I).
SampleSet sample_standard(int p, int n, Rng& rng);

/// A random graph and concentration for property tests.
struct Instance {
  DecomposableGraph graph;
  BlockSparseConcentration K;
};

Instance random_instance(std::uint64_t seed, int max_p, int max_cliques, int max_sep);

/// Same clique sizes, node labels randomly permuted (a mismatched graph).
DecomposableGraph permuted_graph(const DecomposableGraph& graph, Rng& rng);

struct Injection {
  int index = 0;
  double amplitude = 0.0;
  Vector direction;  // unit vector in the true residual subspace
};

/// Adds `count` spikes at distinct random indices. Each spike has amplitude
/// `sigmas` times the per-dimension background spread in the residual
/// subspace of the j principal components of the true covariance, along a
/// random unit direction in that subspace. Returns the injections sorted by
/// index.
std::vector<Injection> inject_spikes(SampleSet& data, const Matrix& concentration, int j, int count,
                                     double sigmas, Rng& rng);

/// Generated data set with its ground truth.
struct Dataset {
  std::string preset;
  std::uint64_t seed = 0;
  DecomposableGraph graph;
  std::vector<DecomposableGraph> alternatives;  // named comparison graphs
  std::vector<std::string> alternative_names;
  BlockSparseConcentration truth;
  SampleSet samples;
  std::vector<Injection> injections;
};

/// The three-clique tracking regime: p = 305, cliques of 100 private nodes
/// plus 5 shared ones, i.i.d. standard normal samples.
DecomposableGraph tracking_graph();
/// Two cliques {0,1}, {1,2}.
DecomposableGraph toy_graph();
/// Synthetic link network with an east/west split: p = 41 in three cliques
/// (sizes 20, 18, 13) and its coarser two-clique version.
DecomposableGraph link_graph_three();
DecomposableGraph link_graph_two();

/// Presets: "paper-tracking", "two-clique-toy", "abilene-like". Throws
/// InvalidArgument for unknown names.
Dataset make_preset(const std::string& name, std::uint64_t seed);
std::vector<std::string> preset_names();

}  // namespace dpca
