#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <functional>
#include <optional>
#include <vector>

#include "dpca/eigensolver.hpp"
#include "dpca/error.hpp"
#include "sweep_kernel.hpp"

namespace dpca::detail {

/// Per-clique data for K (and U when deflating), extracted once per problem.
std::vector<NodeData> make_node_data(const BlockSparseConcentration& K, const DeflationSet& defl,
                                     const std::vector<CliquePlan>& plan);

/// Separator positions of clique k inside its parent, for every k >= 1.
std::vector<std::vector<int>> parent_positions(const std::vector<CliquePlan>& plan);

/// Initial Dbar: diag(weights).
Matrix initial_dbar(const DeflationSet& defl);

/// Bisection driven by an arbitrary feasibility test.
BisectionResult bisect_generic(const std::function<FeasibilityVerdict(double)>& check,
                               Bracket bracket);

struct NormalizedVector {
  Vector u;
  double norm = 0.0;
  bool flipped = false;
  bool root = false;        // terminal block was the root
  double residual = 0.0;    // |sigma| / |u|, root only
  double tau = 0.0;         // null threshold of the root block
  double correction = 0.0;  // Newton step sigma / |u|^2 on lambda, root only
  std::vector<Vector> local;  // unnormalized per-clique pieces (distributed runs)
};

struct RefinedVector {
  NormalizedVector vec;
  double lambda = 0.0;
};

inline bool accepted(const NormalizedVector& v, double lambda_tol) {
  return !v.root || v.residual <= v.tau || std::abs(v.correction) <= lambda_tol;
}

inline constexpr int kNewtonSteps = 8;

/// Null-threshold scales tried in order before giving up.
inline constexpr double kNullScales[] = {1.0, 100.0};

[[noreturn]] void throw_no_null_vector(double lambda);

/// Extracts the null vector at lambda, moving lambda by Newton steps inside
/// [lo, hi] while the root block stays terminal and the step keeps shrinking.
/// `attempt(lambda, scale)` returns an optional NormalizedVector.
template <class Attempt>
RefinedVector find_null_vector(double lambda, double lambda_tol, double lo, double hi,
                               Attempt&& attempt) {
  for (double scale : kNullScales) {
    auto first = attempt(lambda, scale);
    if (!first) continue;
    RefinedVector best{std::move(*first), lambda};
    for (int i = 0; i < kNewtonSteps && lo < hi && best.vec.root; ++i) {
      const double next = std::clamp(best.lambda + best.vec.correction, lo, hi);
      if (next == best.lambda) break;
      auto again = attempt(next, scale);
      if (!again || (again->root && std::abs(again->correction) >= std::abs(best.vec.correction))) break;
      best = {std::move(*again), next};
    }
    if (accepted(best.vec, lambda_tol)) return best;
  }
  throw_no_null_vector(lambda);
}

/// Eigenvector for a converged bisection. When extraction fails the bracket is
/// narrowed further by `bisect(Bracket)` before retrying `extract(lambda, tol,
/// lo, hi)`.
template <class Bisect, class Extract>
RefinedVector eigenpair_vector(BisectionResult res, double eps, Bisect&& bisect, Extract&& extract) {
  double tol = eps;
  for (;;) {
    try {
      return extract(res.estimate(), tol, res.lower, res.upper);
    } catch (const Error& e) {
      const double floor = 8.0 * std::numeric_limits<double>::epsilon() *
                           std::max(std::abs(res.lower), std::abs(res.upper));
      if (e.code() != ErrorCode::NoNullVector || res.width() <= floor) throw;
      tol = std::max(res.width() * 1e-3, floor);
      res = bisect(Bracket{res.lower, res.upper, tol});
    }
  }
}

/// Centralized elimination engine over in-memory clique states.
class SweepProblem {
 public:
  SweepProblem(const BlockSparseConcentration& K, const DeflationSet& defl);

  FeasibilityVerdict check(double t) const;
  double upper_bound() const;
  RefinedVector null_vector(double lambda, double lambda_tol) const;
  RefinedVector null_vector(double lambda, double lambda_tol, double lo, double hi) const;

 private:
  std::optional<NormalizedVector> null_vector_attempt(double lambda, double lambda_tol,
                                                      double scale) const;

  int p_;
  std::vector<CliquePlan> plan_;
  std::vector<NodeData> data_;
  std::vector<std::vector<int>> parent_pos_;
  Matrix dbar0_;
};

/// Makes the first component with |u_i| > 1e-10 max|u| positive. Returns
/// whether the vector was negated.
bool apply_sign_convention(Vector& u);

/// Normalizes a back-substituted vector and applies the sign convention.
/// Empty when the vector vanishes or is not finite.
std::optional<NormalizedVector> finalize_null_vector(Vector u, bool root_terminal, double sigma,
                                                     double tau);

}  // namespace dpca::detail
