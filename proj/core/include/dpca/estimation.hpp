#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "dpca/graph.hpp"
#include "dpca/linalg.hpp"

namespace dpca {

/// n zero-mean samples of dimension p, one sample per row.
struct SampleSet {
  Matrix samples;

  int n() const noexcept { return static_cast<int>(samples.rows()); }
  int p() const noexcept { return static_cast<int>(samples.cols()); }
};

/// Sparse symmetric matrix whose pattern is the union of clique blocks
/// C_k x C_k. Each entry is stored once (upper triangle only), so entries
/// shared by overlapping cliques have a single value.
class BlockSparseConcentration {
 public:
  explicit BlockSparseConcentration(DecomposableGraph graph);

  /// Copies the in-pattern entries of the upper triangle of `dense`.
  static BlockSparseConcentration from_dense(DecomposableGraph graph, const Matrix& dense);

  const DecomposableGraph& graph() const noexcept { return graph_; }
  int p() const noexcept { return graph_.p(); }

  bool in_pattern(NodeId i, NodeId j) const;
  /// Zero outside the pattern.
  double operator()(NodeId i, NodeId j) const;
  /// Throws InvalidArgument outside the pattern.
  void set(NodeId i, NodeId j, double value);

  /// Dense principal submatrix on a sorted index set.
  Matrix block(std::span<const NodeId> idx) const;
  Matrix clique_block(int k) const { return block(graph_.clique(k)); }
  /// Writes every pair of `idx` (all pairs must lie in the pattern).
  void set_block(std::span<const NodeId> idx, const Matrix& values);

  Matrix to_dense() const;
  std::size_t stored_entries() const;

 private:
  const double* find(NodeId i, NodeId j) const;

  DecomposableGraph graph_;
  std::vector<std::vector<NodeId>> cols_;  // row i: sorted columns j >= i
  std::vector<std::vector<double>> vals_;
};

/// (1/n) sum_i x_i[idx] x_i[idx]^T, exactly symmetric.
Matrix local_moments(const SampleSet& data, std::span<const NodeId> idx);
/// Same, for samples that are already restricted to the index set (columns).
Matrix local_moments(const Matrix& restricted_samples);

/// Inverse of a local covariance via Cholesky. Throws SingularLocalCovariance
/// (naming `what` and the reciprocal condition estimate) if the factorization
/// fails or the matrix is numerically singular.
Matrix local_concentration(const Matrix& local_cov, std::string_view what = "local covariance");

/// Per-clique local estimates. For k == 0 the separator members are empty.
struct LocalEstimate {
  int clique = 0;
  Matrix cov;       // S~ on C_k
  Matrix conc;      // K~ on C_k
  Matrix sep_cov;   // S~ on S_k
  Matrix sep_conc;  // K~ on S_k
};

/// Computes S~ and K~ for clique k and its separator from samples restricted
/// to C_k (columns in the clique's sorted order).
LocalEstimate estimate_clique(const DecomposableGraph& g, int k, const Matrix& clique_samples);
std::vector<LocalEstimate> estimate_locals(const DecomposableGraph& g, const SampleSet& data);

/// Global ML concentration K = sum_k [K~_Ck]^0 - sum_{k>=1} [K~_Sk]^0.
BlockSparseConcentration assemble_concentration(const DecomposableGraph& g,
                                                std::span<const LocalEstimate> locals);
/// estimate_locals followed by assemble_concentration.
BlockSparseConcentration fit_concentration(const DecomposableGraph& g, const SampleSet& data);

/// Building blocks of the two-pass assembly, shared with the runtime.
namespace assembly {

/// K~_C minus the separator concentration embedded at the separator positions.
Matrix contribution(const DecomposableGraph& g, const LocalEstimate& local);
/// Adds a separator-sized block into `block` at `pos`.
void accumulate(Matrix& block, std::span<const int> pos, const Matrix& incoming);
Matrix extract(const Matrix& block, std::span<const int> pos);
/// Overwrites the entries at `pos` x `pos` with `values`.
void overwrite(Matrix& block, std::span<const int> pos, const Matrix& values);

}  // namespace assembly

struct ConsistencyReport {
  std::vector<double> max_abs_diff;  // per clique: max |[K^-1]_Ck - S~_Ck|
  double max_rel_diff = 0.0;         // max over cliques of diff / max|S~_Ck|
  double tolerance = 0.0;
  bool passes = false;
};

/// Compares the marginal blocks of K^-1 (dense inversion) with the local
/// sample covariances.
ConsistencyReport marginal_consistency(const BlockSparseConcentration& K,
                                       std::span<const LocalEstimate> locals,
                                       double rel_tolerance = 1e-8);

/// Subtracts the column means in place.
void center_columns(SampleSet& data);

}  // namespace dpca
