#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dpca/estimation.hpp"
#include "dpca/linalg.hpp"

namespace dpca {

/// Previously found eigenvectors (columns) with their deflation weights.
/// Default-constructed means "no deflation".
struct DeflationSet {
  Matrix vectors;  // p x (j-1)
  Vector weights;  // j-1 positive weights

  /// Validates unit-norm, mutually orthogonal columns (to 1e-6) and positive
  /// weights. Throws InvalidArgument / DimensionMismatch.
  static DeflationSet make(Matrix vectors, Vector weights);
  static DeflationSet none(int p) { return {Matrix(p, 0), Vector(0)}; }

  int rank() const noexcept { return static_cast<int>(weights.size()); }
  /// K + U D U^T as a dense matrix (test/oracle helper).
  Matrix apply_to(const Matrix& dense_k) const;
};

struct Bracket {
  double lower = 0.0;
  double upper = 0.0;
  double tol = 1e-8;
};

/// One message exchanged between cliques. `phase` is "sweep" for Schur
/// updates, "token" for the small sequencing hand-off carrying Dbar, and
/// "assemble-up", "assemble-down", "backsub" in the runtime.
struct MessageRecord {
  int source = 0;
  int destination = 0;
  int dim = 0;
  std::string phase;
  std::size_t bytes = 0;  // payload size, 8 bytes per double
};

struct FeasibilityVerdict {
  bool feasible = false;
  int failing_clique = -1;  // clique whose local test failed, -1 if feasible
  std::vector<MessageRecord> messages;
};

struct BisectionResult {
  double lower = 0.0;
  double upper = 0.0;
  int iterations = 0;
  int sweeps = 0;                 // iterations plus bracket verification sweeps
  std::vector<double> estimates;  // midpoint of [L, U] after each iteration
  std::vector<MessageRecord> messages;

  double estimate() const noexcept { return 0.5 * (lower + upper); }
  double width() const noexcept { return upper - lower; }
};

struct EigenPair {
  double value = 0.0;
  Vector vector;
  double bracket_width = 0.0;
  int iterations = 0;
};

/// Smallest eigenvalue of a dense symmetric matrix. Throws NotSymmetric.
double local_min_eig(const Matrix& a);

/// Distributed test of t < eig_min(K + U D U^T) by per-clique Schur sweeps.
FeasibilityVerdict feasibility_sweep(const BlockSparseConcentration& K, double t,
                                     const DeflationSet& defl = {});

/// min over cliques of eig_min((K + U D U^T)_{C_k,C_k}); never below eig_min
/// of the whole matrix.
double upper_bound(const BlockSparseConcentration& K, const DeflationSet& defl = {});

/// Bisection on feasibility sweeps. The loop runs while U - L > tol; any
/// failing local test sets U = t. Throws BadBracket if the final interval
/// rests on an endpoint that does not straddle the eigenvalue.
BisectionResult bisect_min_eig(const BlockSparseConcentration& K, Bracket bracket,
                               const DeflationSet& defl = {});

/// Null vector of K + U D U^T - lambda I by elimination and back-substitution.
/// `lambda_tol` is the known accuracy of lambda; the terminal block is
/// accepted when its residual is within max(tol_null, lambda_tol). Returns a
/// unit vector whose first non-negligible component is positive. Throws
/// NoNullVector.
Vector eigvec(const BlockSparseConcentration& K, double lambda, const DeflationSet& defl = {},
              double lambda_tol = 0.0);

/// Deflation weight used for higher components: 2B + 1, where B bounds the
/// spectral radius of K by clique_count * max_k ||K_{C_k,C_k}||_inf.
double deflation_weight(const BlockSparseConcentration& K);

/// The j_max smallest eigenpairs, each found by bisection on the matrix
/// deflated by the previous ones. Requires K positive definite.
std::vector<EigenPair> spectrum(const BlockSparseConcentration& K, int j_max, double eps);

}  // namespace dpca
