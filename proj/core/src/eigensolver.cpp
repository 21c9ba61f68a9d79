#include "dpca/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dpca/error.hpp"
#include "solver_core.hpp"

namespace dpca {

DeflationSet DeflationSet::make(Matrix vectors, Vector weights) {
  if (vectors.cols() != weights.size()) {
    throw Error(ErrorCode::DimensionMismatch, "deflation needs one weight per vector");
  }
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (!(weights(i) > 0.0)) throw Error(ErrorCode::InvalidArgument, "deflation weights must be positive");
    if (std::abs(vectors.col(i).norm() - 1.0) > 1e-8) {
      throw Error(ErrorCode::InvalidArgument, "deflation vectors must have unit norm");
    }
    for (Eigen::Index j = 0; j < i; ++j) {
      if (std::abs(vectors.col(i).dot(vectors.col(j))) > 1e-6) {
        throw Error(ErrorCode::InvalidArgument, "deflation vectors must be mutually orthogonal");
      }
    }
  }
  return {std::move(vectors), std::move(weights)};
}

Matrix DeflationSet::apply_to(const Matrix& dense_k) const {
  if (rank() == 0) return dense_k;
  return symmetrized(dense_k + vectors * weights.asDiagonal() * vectors.transpose());
}

double local_min_eig(const Matrix& a) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::NotSymmetric, "matrix is not square");
  if (a.size() == 0) throw Error(ErrorCode::InvalidArgument, "matrix is empty");
  const double asym = max_abs(a - a.transpose());
  if (asym > 1e-12 * std::max(1.0, max_abs(a))) {
    std::ostringstream os;
    os << "matrix is not symmetric (max |A - A^T| = " << asym << ")";
    throw Error(ErrorCode::NotSymmetric, os.str());
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

namespace detail {

std::vector<NodeData> make_node_data(const BlockSparseConcentration& K, const DeflationSet& defl,
                                     const std::vector<CliquePlan>& plan) {
  if (defl.rank() > 0 && defl.vectors.rows() != K.p()) {
    throw Error(ErrorCode::DimensionMismatch, "deflation vectors do not match the dimension of K");
  }
  std::vector<NodeData> data(plan.size());
  for (std::size_t k = 0; k < plan.size(); ++k) {
    data[k].block = K.block(plan[k].clique);
    const std::vector<int> rows(plan[k].clique.begin(), plan[k].clique.end());
    data[k].basis = defl.rank() > 0 ? Matrix(defl.vectors(rows, Eigen::all))
                                    : Matrix(static_cast<Eigen::Index>(rows.size()), 0);
  }
  return data;
}

std::vector<std::vector<int>> parent_positions(const std::vector<CliquePlan>& plan) {
  std::vector<std::vector<int>> pos(plan.size());
  for (std::size_t k = 1; k < plan.size(); ++k)
    pos[k] = positions_in(plan[plan[k].parent].clique, plan[k].separator);
  return pos;
}

Matrix initial_dbar(const DeflationSet& defl) {
  if (defl.rank() == 0) return Matrix(0, 0);
  return defl.weights.asDiagonal();
}

BisectionResult bisect_generic(const std::function<FeasibilityVerdict(double)>& check,
                               Bracket bracket) {
  if (!(bracket.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  if (!(bracket.lower <= bracket.upper)) {
    throw Error(ErrorCode::BadBracket, "lower bound exceeds upper bound");
  }
  BisectionResult res;
  double lo = bracket.lower;
  double hi = bracket.upper;
  bool lo_moved = false;
  bool hi_moved = false;
  auto run = [&](double t) {
    auto v = check(t);
    ++res.sweeps;
    res.messages.insert(res.messages.end(), v.messages.begin(), v.messages.end());
    return v.feasible;
  };
  while (hi - lo > bracket.tol) {
    const double t = (hi + lo) / 2;
    if (run(t)) {
      lo = t;
      lo_moved = true;
    } else {
      hi = t;
      hi_moved = true;
    }
    ++res.iterations;
    res.estimates.push_back(0.5 * (lo + hi));
  }
  // An endpoint that never moved was never tested; certify it now.
  if (!lo_moved && !run(lo)) {
    std::ostringstream os;
    os << "lower bound " << lo << " is not below the minimal eigenvalue";
    throw Error(ErrorCode::BadBracket, os.str());
  }
  if (!hi_moved && run(hi)) {
    std::ostringstream os;
    os << "upper bound " << hi << " is below the minimal eigenvalue";
    throw Error(ErrorCode::BadBracket, os.str());
  }
  res.lower = lo;
  res.upper = hi;
  return res;
}

SweepProblem::SweepProblem(const BlockSparseConcentration& K, const DeflationSet& defl)
    : p_(K.p()),
      plan_(make_plan(K.graph())),
      data_(make_node_data(K, defl, plan_)),
      parent_pos_(parent_positions(plan_)),
      dbar0_(initial_dbar(defl)) {}

FeasibilityVerdict SweepProblem::check(double t) const {
  FeasibilityVerdict v;
  const int K = static_cast<int>(plan_.size());
  std::vector<NodeWork> work;
  work.reserve(K);
  for (const auto& d : data_) work.push_back(fresh_work(d));
  Matrix dbar = dbar0_;
  for (int k = K - 1; k >= 1; --k) {
    auto step = eliminate(data_[k], work[k], plan_[k], t, dbar, StepMode::Feasibility, 1.0);
    if (!step.passed) {
      v.failing_clique = k;
      return v;
    }
    const int par = plan_[k].parent;
    if (par == k - 1) {
      v.messages.push_back({k, par, step.payload.message_dim, "sweep",
                            payload_bytes(step.payload, &step.next_dbar)});
    } else {
      v.messages.push_back({k, par, step.payload.message_dim, "sweep", payload_bytes(step.payload, nullptr)});
      v.messages.push_back({k, k - 1, static_cast<int>(step.next_dbar.rows()), "token",
                            step.next_dbar.size() * sizeof(double)});
    }
    absorb(work[par], parent_pos_[k], step.payload);
    dbar = std::move(step.next_dbar);
  }
  const Matrix a = clique_matrix(data_[0], work[0], dbar);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
  v.feasible = t < eig.eigenvalues()(0);
  if (!v.feasible) v.failing_clique = 0;
  return v;
}

double SweepProblem::upper_bound() const {
  double ub = std::numeric_limits<double>::infinity();
  for (const auto& d : data_) {
    NodeWork w = fresh_work(d);
    const Matrix a = clique_matrix(d, w, dbar0_);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
    ub = std::min(ub, eig.eigenvalues()(0));
  }
  return ub;
}

bool apply_sign_convention(Vector& u) {
  const double big = u.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (std::abs(u(i)) > 1e-10 * big) {
      if (u(i) >= 0) return false;
      u = -u;
      return true;
    }
  }
  return false;
}

std::optional<NormalizedVector> finalize_null_vector(Vector u, bool root_terminal, double sigma,
                                                     double tau) {
  NormalizedVector out;
  out.norm = u.norm();
  if (!(out.norm > 0.0) || !std::isfinite(out.norm)) return std::nullopt;
  out.root = root_terminal;
  if (root_terminal) {
    out.residual = std::abs(sigma) / out.norm;
    out.tau = tau;
    out.correction = sigma / (out.norm * out.norm);
  }
  out.u = std::move(u);
  out.u /= out.norm;
  out.flipped = apply_sign_convention(out.u);
  return out;
}

void throw_no_null_vector(double lambda) {
  std::ostringstream os;
  os << "no numerically singular block for lambda = " << lambda;
  throw Error(ErrorCode::NoNullVector, os.str());
}

std::optional<NormalizedVector> SweepProblem::null_vector_attempt(double lambda,
                                                                  double lambda_tol,
                                                                  double scale) const {
  const int K = static_cast<int>(plan_.size());
  std::vector<NodeWork> work;
  work.reserve(K);
  for (const auto& d : data_) work.push_back(fresh_work(d));
  std::vector<StepResult> steps(K);
  Matrix dbar = dbar0_;
  int terminal = 0;
  for (int k = K - 1; k >= 1; --k) {
    steps[k] = eliminate(data_[k], work[k], plan_[k], lambda, dbar, StepMode::NullSpace, scale,
                       lambda_tol);
    if (!steps[k].passed) {
      terminal = k;
      break;
    }
    absorb(work[plan_[k].parent], parent_pos_[k], steps[k].payload);
    dbar = steps[k].next_dbar;
  }

  // A singular residual block carries the whole vector; cliques below it
  // contribute zeros.
  const TerminalSolution term = terminal == 0
                                    ? solve_root(data_[0], work[0], dbar, lambda, scale)
                                    : solve_singular(steps[terminal]);
  Vector u = Vector::Zero(p_);
  const IndexSet& support = terminal == 0 ? plan_[0].clique : plan_[terminal].residual;
  for (std::size_t a = 0; a < support.size(); ++a) u(support[a]) = term.local(a);
  Vector z = term.z;

  for (int m = terminal + 1; m < K; ++m) {
    Vector u_s(plan_[m].separator.size());
    for (std::size_t a = 0; a < plan_[m].separator.size(); ++a) u_s(a) = u(plan_[m].separator[a]);
    const Vector u_r = back_substitute(steps[m], u_s, z);
    for (std::size_t a = 0; a < plan_[m].residual.size(); ++a) u(plan_[m].residual[a]) = u_r(a);
  }
  return finalize_null_vector(std::move(u), terminal == 0, term.sigma, term.tau);
}

RefinedVector SweepProblem::null_vector(double lambda, double lambda_tol) const {
  return null_vector(lambda, lambda_tol, lambda - lambda_tol, lambda + lambda_tol);
}

RefinedVector SweepProblem::null_vector(double lambda, double lambda_tol, double lo,
                                        double hi) const {
  return find_null_vector(lambda, lambda_tol, lo, hi, [&](double l, double scale) {
    return null_vector_attempt(l, lambda_tol, scale);
  });
}

}  // namespace detail

FeasibilityVerdict feasibility_sweep(const BlockSparseConcentration& K, double t,
                                     const DeflationSet& defl) {
  return detail::SweepProblem(K, defl).check(t);
}

double upper_bound(const BlockSparseConcentration& K, const DeflationSet& defl) {
  return detail::SweepProblem(K, defl).upper_bound();
}

BisectionResult bisect_min_eig(const BlockSparseConcentration& K, Bracket bracket,
                               const DeflationSet& defl) {
  const detail::SweepProblem prob(K, defl);
  return detail::bisect_generic([&](double t) { return prob.check(t); }, bracket);
}

Vector eigvec(const BlockSparseConcentration& K, double lambda, const DeflationSet& defl,
              double lambda_tol) {
  return detail::SweepProblem(K, defl).null_vector(lambda, lambda_tol).vec.u;
}

double deflation_weight(const BlockSparseConcentration& K) {
  double row_max = 0.0;
  for (int k = 0; k < K.graph().clique_count(); ++k)
    row_max = std::max(row_max, K.clique_block(k).cwiseAbs().rowwise().sum().maxCoeff());
  return 2.0 * K.graph().clique_count() * row_max + 1.0;
}

std::vector<EigenPair> spectrum(const BlockSparseConcentration& K, int j_max, double eps) {
  if (j_max < 1 || j_max > K.p()) {
    throw Error(ErrorCode::InvalidArgument, "component count must lie in [1, p]");
  }
  const double w = deflation_weight(K);
  std::vector<EigenPair> pairs;
  Matrix found(K.p(), 0);
  for (int j = 0; j < j_max; ++j) {
    const DeflationSet defl{found, Vector::Constant(j, w)};
    const detail::SweepProblem prob(K, defl);
    const auto bisect = [&](Bracket b) {
      return detail::bisect_generic([&](double t) { return prob.check(t); }, b);
    };
    const auto res = bisect({0.0, prob.upper_bound(), eps});
    EigenPair pair;
    pair.bracket_width = res.width();
    pair.iterations = res.iterations;
    auto refined = detail::eigenpair_vector(res, eps, bisect, [&](double l, double tol, double lo, double hi) {
      return prob.null_vector(l, tol, lo, hi);
    });
    pair.value = refined.lambda;
    pair.vector = std::move(refined.vec.u);
    found.conservativeResize(Eigen::NoChange, j + 1);
    found.col(j) = pair.vector;
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

}  // namespace dpca
