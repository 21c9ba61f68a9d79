#include "sweep_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dpca::detail {

std::vector<CliquePlan> make_plan(const DecomposableGraph& g) {
  std::vector<CliquePlan> plan(g.clique_count());
  for (int k = 0; k < g.clique_count(); ++k) {
    auto& c = plan[k];
    c.index = k;
    c.parent = g.parent(k);
    c.clique = g.clique(k);
    if (k == 0) {
      c.residual = c.clique;
    } else {
      c.separator = g.separator(k);
      c.residual = g.residual(k);
    }
    c.sep_pos = positions_in(c.clique, c.separator);
    c.res_pos = positions_in(c.clique, c.residual);
  }
  return plan;
}

NodeWork fresh_work(const NodeData& data) {
  NodeWork w;
  w.corr = Matrix::Zero(data.block.rows(), data.block.cols());
  w.row_corr = Matrix::Zero(data.block.rows(), data.basis.cols());
  return w;
}

namespace {

Matrix pad_left(const Matrix& m, Eigen::Index width) {
  if (m.cols() == width) return m;
  Matrix out = Matrix::Zero(m.rows(), width);
  out.rightCols(m.cols()) = m;
  return out;
}

Matrix rows_of(const Matrix& m, std::span<const int> pos) {
  const std::vector<int> p(pos.begin(), pos.end());
  return m(p, Eigen::all);
}

Matrix sub(const Matrix& m, std::span<const int> rows, std::span<const int> cols) {
  const std::vector<int> r(rows.begin(), rows.end());
  const std::vector<int> c(cols.begin(), cols.end());
  return m(r, c);
}

}  // namespace

void absorb(NodeWork& work, std::span<const int> pos, const UpdatePayload& payload) {
  for (std::size_t a = 0; a < pos.size(); ++a)
    for (std::size_t b = 0; b < pos.size(); ++b) work.corr(pos[a], pos[b]) += payload.corr(a, b);
  if (payload.rows.cols() == 0) return;
  if (payload.rows.cols() > work.row_corr.cols()) work.row_corr = pad_left(work.row_corr, payload.rows.cols());
  const Eigen::Index w = payload.rows.cols();
  for (std::size_t a = 0; a < pos.size(); ++a)
    work.row_corr.row(pos[a]).tail(w) += payload.rows.row(a);
}

Matrix factor_rows(const NodeData& data, NodeWork& work, Eigen::Index width) {
  if (work.row_corr.cols() < width) work.row_corr = pad_left(work.row_corr, width);
  Matrix f = Matrix::Zero(data.block.rows(), width);
  f.rightCols(data.basis.cols()) += data.basis;
  f.rightCols(work.row_corr.cols()) += work.row_corr;
  return f;
}

Matrix clique_matrix(const NodeData& data, NodeWork& work, const Matrix& dbar) {
  Matrix a = data.block + work.corr;
  if (dbar.rows() > 0) {
    const Matrix f = factor_rows(data, work, dbar.rows());
    a += f * dbar * f.transpose();
    a = symmetrized(a);
  }
  return a;
}

double null_threshold(const Matrix& shifted_block, double scale) {
  return scale * 1e3 * std::numeric_limits<double>::epsilon() *
         std::max(max_abs(shifted_block), std::numeric_limits<double>::min()) *
         static_cast<double>(shifted_block.rows());
}

StepResult eliminate(const NodeData& data, NodeWork& work, const CliquePlan& plan, double shift,
                     const Matrix& dbar, StepMode mode, double null_scale,
                     double lambda_tol) {
  StepResult out;
  const auto s = static_cast<Eigen::Index>(plan.sep_pos.size());
  const auto nb = static_cast<Eigen::Index>(plan.res_pos.size());
  const Eigen::Index r = dbar.rows();

  const Matrix q = data.block + work.corr;
  const Matrix f = factor_rows(data, work, r);
  const Matrix f_r = rows_of(f, plan.res_pos);

  Matrix a_bb = sub(q, plan.res_pos, plan.res_pos);
  if (r > 0) a_bb = symmetrized(a_bb + f_r * dbar * f_r.transpose());

  // G^T = [Q_{R,S}, F_R Dbar]
  Matrix gt(nb, s + r);
  gt.leftCols(s) = sub(q, plan.res_pos, plan.sep_pos);
  if (r > 0) gt.rightCols(r) = f_r * dbar;

  Matrix m;
  if (mode == StepMode::Feasibility) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a_bb, Eigen::EigenvaluesOnly);
    out.block_value = eig.eigenvalues()(0);
    out.passed = shift < out.block_value;
    if (!out.passed) return out;
    const Matrix shifted = a_bb - shift * Matrix::Identity(nb, nb);
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() != Eigen::Success) {
      // the eigenvalue test passed by a rounding margin only
      out.passed = false;
      return out;
    }
    const Matrix h = llt.matrixL().solve(gt);
    m = symmetrized(h.transpose() * h);
  } else {
    const Matrix shifted = a_bb - shift * Matrix::Identity(nb, nb);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(shifted);
    out.evecs = eig.eigenvectors();
    out.evals = eig.eigenvalues();
    out.f_r = f_r;
    out.dbar = dbar;
    out.block_value = out.evals.cwiseAbs().minCoeff();
    out.passed = out.block_value > std::max(null_threshold(shifted, null_scale), lambda_tol);
    if (!out.passed) return out;
    out.q_rs = gt.leftCols(s);
    const Matrix w = out.evecs.transpose() * gt;
    m = symmetrized(w.transpose() * out.evals.cwiseInverse().asDiagonal() * w);
  }

  const Matrix x = -m.topLeftCorner(s, s);
  const Matrix y = -m.topRightCorner(s, r);
  const Matrix z = symmetrized(dbar - m.bottomRightCorner(r, r));

  const Matrix corr_s = sub(work.corr, plan.sep_pos, plan.sep_pos);
  const Matrix rows_s = rows_of(work.row_corr, plan.sep_pos);

  out.payload.source = plan.index;
  out.payload.indices = plan.separator;
  out.payload.message_dim = static_cast<int>(s + r);

  if (r == 0) {
    out.payload.corr = corr_s + x;
    out.payload.rows = Matrix(s, 0);
    out.next_dbar = Matrix(0, 0);
    out.fold = Matrix(s, 0);
    return out;
  }

  // Fold the separator-indicator columns of the deflated factor back into the
  // sparse part: Dbar' = [[X, Y], [Y^T, Z]] on [E_S | F] equals
  // E_S (X - Y Z^+ Y^T) E_S^T + (F + E_S P) Z (F + E_S P)^T with P = Y Z^+,
  // provided the rows of Y lie in the range of Z.
  Eigen::SelfAdjointEigenSolver<Matrix> zeig(z);
  const Vector& lam = zeig.eigenvalues();
  const Matrix t = y * zeig.eigenvectors();
  const double cutoff = 1e-13 * std::max(lam.cwiseAbs().maxCoeff(), 1e-300) * static_cast<double>(r);
  const double yscale = std::max(1.0, max_abs(y));
  Vector inv(r);
  bool consistent = true;
  for (Eigen::Index i = 0; i < r; ++i) {
    if (std::abs(lam(i)) > cutoff) {
      inv(i) = 1.0 / lam(i);
    } else {
      inv(i) = 0.0;
      if (t.col(i).cwiseAbs().maxCoeff() > 1e-9 * yscale) consistent = false;
    }
  }

  if (consistent) {
    const Matrix p = t * inv.asDiagonal() * zeig.eigenvectors().transpose();
    const Matrix fold_sparse = symmetrized(x - t * inv.asDiagonal() * t.transpose());
    out.payload.corr = corr_s + fold_sparse;
    out.payload.rows = pad_left(rows_s, r) + p;
    out.fold = p;
    out.next_dbar = z;
    out.folded = true;
  } else {
    out.payload.corr = corr_s;
    Matrix rows(s, s + r);
    rows.leftCols(s) = Matrix::Identity(s, s);
    rows.rightCols(r) = pad_left(rows_s, r);
    out.payload.rows = rows;
    Matrix next(s + r, s + r);
    next.topLeftCorner(s, s) = x;
    next.topRightCorner(s, r) = y;
    next.bottomLeftCorner(r, s) = y.transpose();
    next.bottomRightCorner(r, r) = z;
    out.next_dbar = symmetrized(next);
    out.folded = false;
  }
  return out;
}

TerminalSolution solve_root(const NodeData& data, NodeWork& work, const Matrix& dbar, double shift,
                            double null_scale) {
  const Matrix a = clique_matrix(data, work, dbar);
  const Matrix shifted = a - shift * Matrix::Identity(a.rows(), a.cols());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(shifted);
  Eigen::Index i;
  TerminalSolution out;
  eig.eigenvalues().cwiseAbs().minCoeff(&i);
  out.sigma = eig.eigenvalues()(i);
  out.tau = null_threshold(shifted, null_scale);
  out.local = eig.eigenvectors().col(i);
  out.z = factor_rows(data, work, dbar.rows()).transpose() * out.local;
  return out;
}

TerminalSolution solve_singular(const StepResult& step) {
  Eigen::Index i;
  step.evals.cwiseAbs().minCoeff(&i);
  TerminalSolution out;
  out.local = step.evecs.col(i);
  out.z = step.f_r.transpose() * out.local;
  return out;
}

Vector back_substitute(const StepResult& st, const Vector& u_s, Vector& z) {
  const Vector y = st.folded ? Vector(z - st.fold.transpose() * u_s) : Vector(z.tail(st.dbar.rows()));
  Vector rhs = st.q_rs * u_s;
  if (st.dbar.rows() > 0) rhs += st.f_r * (st.dbar * y);
  const Vector u_r = -(st.evecs * (st.evals.cwiseInverse().asDiagonal() * (st.evecs.transpose() * rhs)));
  z = y;
  if (st.dbar.rows() > 0) z += st.f_r.transpose() * u_r;
  return u_r;
}

std::size_t payload_bytes(const UpdatePayload& payload, const Matrix* dbar) {
  std::size_t doubles = payload.corr.size() + payload.rows.size();
  if (dbar) doubles += dbar->size();
  return doubles * sizeof(double);
}

}  // namespace dpca::detail
