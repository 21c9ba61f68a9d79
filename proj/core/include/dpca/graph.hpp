#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dpca {

using NodeId = int;
/// Sorted ascending, duplicate-free list of node indices.
using IndexSet = std::vector<NodeId>;

/// History / separator / residual sets induced by a clique ordering.
/// Index 0 is the first clique; separator[0] and residual[0] are empty.
struct CliqueSequence {
  std::vector<IndexSet> history;
  std::vector<IndexSet> separator;
  std::vector<IndexSet> residual;
};

/// A decomposable graph given as cliques in perfect elimination order.
///
/// Construction validates coverage, containment and the running intersection
/// property, and rejects empty separators (disconnected graphs). Immutable
/// after construction.
class DecomposableGraph {
 public:
  /// Throws dpca::Error with UncoveredNode, NotPerfectOrder, RedundantClique
  /// or InvalidArgument.
  static DecomposableGraph build(int p, std::vector<IndexSet> cliques);

  int p() const noexcept { return p_; }
  int clique_count() const noexcept { return static_cast<int>(cliques_.size()); }
  const std::vector<IndexSet>& cliques() const noexcept { return cliques_; }
  const IndexSet& clique(int k) const { return cliques_.at(k); }
  const CliqueSequence& sets() const noexcept { return sets_; }
  const IndexSet& separator(int k) const { return sets_.separator.at(k); }
  const IndexSet& residual(int k) const { return sets_.residual.at(k); }

  /// Clique that receives clique k's messages: the highest-indexed j < k with
  /// S_k contained in C_j. -1 for k == 0.
  int parent(int k) const { return parent_.at(k); }

  std::size_t max_clique_size() const;
  std::size_t max_separator_size() const;

  friend bool operator==(const DecomposableGraph& a, const DecomposableGraph& b) {
    return a.p_ == b.p_ && a.cliques_ == b.cliques_;
  }

 private:
  DecomposableGraph() = default;

  int p_ = 0;
  std::vector<IndexSet> cliques_;
  CliqueSequence sets_;
  std::vector<int> parent_;
};

/// H_k, S_k, R_k for every k, computed from the clique order alone.
CliqueSequence derive_sets(int p, std::span<const IndexSet> cliques);
inline CliqueSequence derive_sets(const DecomposableGraph& g) { return g.sets(); }

/// Random connected decomposable graph with K cliques over p nodes and
/// separators of at most max_sep nodes. Deterministic in seed. Node labels are
/// randomly permuted. Throws InfeasibleShape when no such graph exists.
DecomposableGraph random_decomposable(int p, int K, int max_sep, std::uint64_t seed);

/// Sorted positions of `subset` inside the sorted `superset`; every element of
/// subset must be present.
std::vector<int> positions_in(std::span<const NodeId> superset, std::span<const NodeId> subset);

bool is_subset(std::span<const NodeId> a, std::span<const NodeId> b);

}  // namespace dpca
