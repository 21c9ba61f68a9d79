#include "dpca/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "dpca/error.hpp"
#include "dpca/parallel.hpp"

namespace dpca {

BlockSparseConcentration::BlockSparseConcentration(DecomposableGraph graph)
    : graph_(std::move(graph)), cols_(graph_.p()), vals_(graph_.p()) {
  for (const auto& c : graph_.cliques()) {
    for (std::size_t a = 0; a < c.size(); ++a)
      for (std::size_t b = a; b < c.size(); ++b) cols_[c[a]].push_back(c[b]);
  }
  for (int i = 0; i < graph_.p(); ++i) {
    auto& row = cols_[i];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    vals_[i].assign(row.size(), 0.0);
  }
}

BlockSparseConcentration BlockSparseConcentration::from_dense(DecomposableGraph graph,
                                                              const Matrix& dense) {
  if (dense.rows() != graph.p() || dense.cols() != graph.p()) {
    throw Error(ErrorCode::DimensionMismatch, "dense matrix does not match the graph dimension");
  }
  BlockSparseConcentration K(std::move(graph));
  for (int i = 0; i < K.p(); ++i)
    for (std::size_t e = 0; e < K.cols_[i].size(); ++e) K.vals_[i][e] = dense(i, K.cols_[i][e]);
  return K;
}

const double* BlockSparseConcentration::find(NodeId i, NodeId j) const {
  if (i > j) std::swap(i, j);
  const auto& row = cols_.at(i);
  auto it = std::lower_bound(row.begin(), row.end(), j);
  if (it == row.end() || *it != j) return nullptr;
  return &vals_[i][it - row.begin()];
}

bool BlockSparseConcentration::in_pattern(NodeId i, NodeId j) const { return find(i, j) != nullptr; }

double BlockSparseConcentration::operator()(NodeId i, NodeId j) const {
  const double* v = find(i, j);
  return v ? *v : 0.0;
}

void BlockSparseConcentration::set(NodeId i, NodeId j, double value) {
  const double* v = find(i, j);
  if (!v) {
    throw Error(ErrorCode::InvalidArgument, "entry (" + std::to_string(i) + ", " +
                                                std::to_string(j) + ") is outside the clique pattern");
  }
  *const_cast<double*>(v) = value;
}

Matrix BlockSparseConcentration::block(std::span<const NodeId> idx) const {
  const auto m = static_cast<Eigen::Index>(idx.size());
  Matrix out(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const auto& row = cols_.at(idx[a]);
    const auto& val = vals_[idx[a]];
    auto it = row.begin();
    for (Eigen::Index b = a; b < m; ++b) {
      // idx is sorted, so the search can resume from the previous hit
      it = std::lower_bound(it, row.end(), idx[b]);
      const double v = (it != row.end() && *it == idx[b]) ? val[it - row.begin()] : 0.0;
      out(a, b) = v;
      out(b, a) = v;
    }
  }
  return out;
}

void BlockSparseConcentration::set_block(std::span<const NodeId> idx, const Matrix& values) {
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a; b < idx.size(); ++b) set(idx[a], idx[b], values(a, b));
}

Matrix BlockSparseConcentration::to_dense() const {
  Matrix d = Matrix::Zero(p(), p());
  for (int i = 0; i < p(); ++i)
    for (std::size_t e = 0; e < cols_[i].size(); ++e) {
      d(i, cols_[i][e]) = vals_[i][e];
      d(cols_[i][e], i) = vals_[i][e];
    }
  return d;
}

std::size_t BlockSparseConcentration::stored_entries() const {
  std::size_t n = 0;
  for (const auto& row : cols_) n += row.size();
  return n;
}

Matrix local_moments(const Matrix& x) {
  const auto m = x.cols();
  Matrix s = Matrix::Zero(m, m);
  if (x.rows() == 0) return s;
  s.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose(), 1.0 / static_cast<double>(x.rows()));
  mirror_lower(s);
  return s;
}

Matrix local_moments(const SampleSet& data, std::span<const NodeId> idx) {
  std::vector<int> cols(idx.begin(), idx.end());
  for (int c : cols) {
    if (c < 0 || c >= data.p()) throw Error(ErrorCode::DimensionMismatch, "index outside the data dimension");
  }
  return local_moments(Matrix(data.samples(Eigen::all, cols)));
}

Matrix local_concentration(const Matrix& cov, std::string_view what) {
  const auto m = cov.rows();
  Eigen::LLT<Matrix> llt(cov);
  const double rcond = llt.info() == Eigen::Success ? llt.rcond() : 0.0;
  if (llt.info() != Eigen::Success ||
      rcond <= static_cast<double>(m) * std::numeric_limits<double>::epsilon()) {
    std::ostringstream os;
    os << what << " is singular (reciprocal condition estimate " << rcond << ")";
    throw Error(ErrorCode::SingularLocalCovariance, os.str());
  }
  return symmetrized(llt.solve(Matrix::Identity(m, m)));
}

LocalEstimate estimate_clique(const DecomposableGraph& g, int k, const Matrix& clique_samples) {
  LocalEstimate le;
  le.clique = k;
  le.cov = local_moments(clique_samples);
  le.conc = local_concentration(le.cov, "covariance of clique " + std::to_string(k));
  if (k > 0) {
    const auto pos = positions_in(g.clique(k), g.separator(k));
    le.sep_cov = assembly::extract(le.cov, pos);
    le.sep_conc = local_concentration(le.sep_cov, "covariance of separator " + std::to_string(k));
  }
  return le;
}

std::vector<LocalEstimate> estimate_locals(const DecomposableGraph& g, const SampleSet& data) {
  if (data.p() != g.p()) {
    throw Error(ErrorCode::DimensionMismatch, "data has " + std::to_string(data.p()) +
                                                  " columns but the graph has p = " + std::to_string(g.p()));
  }
  std::vector<LocalEstimate> out(g.clique_count());
  parallel_for(out.size(), [&](std::size_t k) {
    const std::vector<int> cols(g.clique(k).begin(), g.clique(k).end());
    out[k] = estimate_clique(g, static_cast<int>(k), Matrix(data.samples(Eigen::all, cols)));
  });
  return out;
}

namespace assembly {

Matrix contribution(const DecomposableGraph& g, const LocalEstimate& local) {
  Matrix c = local.conc;
  if (local.clique > 0) {
    const auto pos = positions_in(g.clique(local.clique), g.separator(local.clique));
    accumulate(c, pos, -local.sep_conc);
  }
  return c;
}

void accumulate(Matrix& block, std::span<const int> pos, const Matrix& incoming) {
  for (std::size_t a = 0; a < pos.size(); ++a)
    for (std::size_t b = 0; b < pos.size(); ++b) block(pos[a], pos[b]) += incoming(a, b);
}

Matrix extract(const Matrix& block, std::span<const int> pos) {
  const std::vector<int> p(pos.begin(), pos.end());
  return block(p, p);
}

void overwrite(Matrix& block, std::span<const int> pos, const Matrix& values) {
  for (std::size_t a = 0; a < pos.size(); ++a)
    for (std::size_t b = 0; b < pos.size(); ++b) block(pos[a], pos[b]) = values(a, b);
}

}  // namespace assembly

BlockSparseConcentration assemble_concentration(const DecomposableGraph& g,
                                                std::span<const LocalEstimate> locals) {
  const int K = g.clique_count();
  if (static_cast<int>(locals.size()) != K) {
    throw Error(ErrorCode::DimensionMismatch, "one local estimate per clique is required");
  }
  // Upward pass: each clique folds in its children's separator sums and
  // forwards its own separator block to its parent.
  std::vector<Matrix> agg(K);
  for (int k = 0; k < K; ++k) agg[k] = assembly::contribution(g, locals[k]);
  for (int k = K - 1; k >= 1; --k) {
    const int par = g.parent(k);
    const auto own = positions_in(g.clique(k), g.separator(k));
    const auto at_parent = positions_in(g.clique(par), g.separator(k));
    assembly::accumulate(agg[par], at_parent, assembly::extract(agg[k], own));
  }
  // Downward pass: parents hand final separator values to their children.
  for (int k = 1; k < K; ++k) {
    const int par = g.parent(k);
    const auto own = positions_in(g.clique(k), g.separator(k));
    const auto at_parent = positions_in(g.clique(par), g.separator(k));
    assembly::overwrite(agg[k], own, assembly::extract(agg[par], at_parent));
  }
  BlockSparseConcentration Kmat(g);
  for (int k = 0; k < K; ++k) Kmat.set_block(g.clique(k), agg[k]);
  return Kmat;
}

BlockSparseConcentration fit_concentration(const DecomposableGraph& g, const SampleSet& data) {
  const auto locals = estimate_locals(g, data);
  return assemble_concentration(g, locals);
}

ConsistencyReport marginal_consistency(const BlockSparseConcentration& K,
                                       std::span<const LocalEstimate> locals, double rel_tolerance) {
  ConsistencyReport rep;
  rep.tolerance = rel_tolerance;
  const Matrix dense = K.to_dense();
  Eigen::LLT<Matrix> llt(dense);
  const Matrix sigma = llt.info() == Eigen::Success
                           ? Matrix(llt.solve(Matrix::Identity(K.p(), K.p())))
                           : Matrix(dense.inverse());
  const auto& g = K.graph();
  for (const auto& le : locals) {
    const std::vector<int> c(g.clique(le.clique).begin(), g.clique(le.clique).end());
    const double diff = max_abs(Matrix(sigma(c, c)) - le.cov);
    rep.max_abs_diff.push_back(diff);
    rep.max_rel_diff = std::max(rep.max_rel_diff, diff / std::max(max_abs(le.cov), 1e-300));
  }
  rep.passes = std::isfinite(rep.max_rel_diff) && rep.max_rel_diff <= rel_tolerance;
  return rep;
}

void center_columns(SampleSet& data) {
  if (data.n() == 0) return;
  const Eigen::RowVectorXd mean = data.samples.colwise().mean();
  data.samples.rowwise() -= mean;
}

}  // namespace dpca
