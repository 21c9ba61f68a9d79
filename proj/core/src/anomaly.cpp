#include "dpca/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dpca/error.hpp"
#include "dpca/parallel.hpp"

namespace dpca {

SubspaceModel fit_model(const SampleSet& data, const DecomposableGraph& graph, int j, double eps) {
  if (j < 1 || j > graph.p()) {
    throw Error(ErrorCode::InvalidArgument, "component count must lie in [1, p]");
  }
  const auto K = fit_concentration(graph, data);
  SubspaceModel m;
  m.j = j;
  m.n = data.n();
  m.pairs = spectrum(K, j, eps);
  m.basis.resize(graph.p(), j);
  for (int c = 0; c < j; ++c) m.basis.col(c) = m.pairs[c].vector;
  return m;
}

Vector residual_norms(const Matrix& basis, const SampleSet& samples) {
  if (samples.p() != basis.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "samples have " + std::to_string(samples.p()) +
                                                  " columns but the model has p = " +
                                                  std::to_string(basis.rows()));
  }
  const Matrix coords = samples.samples * basis;
  const Matrix resid = samples.samples - coords * basis.transpose();
  Vector r = resid.rowwise().norm();
  // Residuals below what the basis can resolve are reported as exact zeros.
  const auto j = basis.cols();
  const double defect = j ? max_abs(basis.transpose() * basis - Matrix::Identity(j, j)) : 0.0;
  const double rel = 10.0 * (defect + static_cast<double>(basis.rows()) * std::numeric_limits<double>::epsilon());
  const Vector x = samples.samples.rowwise().norm();
  for (Eigen::Index i = 0; i < r.size(); ++i)
    if (r(i) <= rel * x(i)) r(i) = 0.0;
  return r;
}

Vector residual_norms(const SubspaceModel& model, const SampleSet& samples) {
  return residual_norms(model.basis, samples);
}

Matrix dense_pca_basis(const SampleSet& data, int j) {
  const Matrix cov = local_moments(data.samples);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  // eigenvalues ascending: the principal directions are the last columns
  Matrix basis(data.p(), j);
  for (int c = 0; c < j; ++c) basis.col(c) = eig.eigenvectors().col(data.p() - 1 - c);
  return basis;
}

double empirical_quantile(const Vector& series, double q) {
  if (series.size() == 0) throw Error(ErrorCode::InvalidArgument, "quantile of an empty series");
  std::vector<double> v(series.data(), series.data() + series.size());
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::vector<int> detect(const Vector& series, Threshold threshold, const Vector* reference) {
  double cut = threshold.value;
  if (threshold.kind == Threshold::Kind::Absolute) {
    if (!(cut > 0.0)) throw Error(ErrorCode::InvalidArgument, "threshold must be positive");
  } else {
    if (!(cut > 0.0 && cut < 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile must lie in (0, 1)");
    const Vector& base = reference ? *reference : series;
    if (base.size() == 0) return {};
    cut = empirical_quantile(base, threshold.value);
  }
  std::vector<int> out;
  for (Eigen::Index i = 0; i < series.size(); ++i)
    if (series(i) > cut) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> window_starts(int length, int window, int overlap) {
  if (window < 1) throw Error(ErrorCode::InvalidArgument, "window must be positive");
  if (overlap < 0 || overlap >= window) {
    throw Error(ErrorCode::InvalidArgument, "overlap must satisfy 0 <= overlap < window");
  }
  if (length < window) {
    throw Error(ErrorCode::InvalidArgument, "stream has " + std::to_string(length) +
                                                " samples, fewer than the window " + std::to_string(window));
  }
  std::vector<int> starts;
  for (int s = 0; s + window <= length; s += window - overlap) starts.push_back(s);
  return starts;
}

TrackingTrace track(const SampleSet& stream, const DecomposableGraph& graph, const TrackOptions& opts) {
  if (stream.p() != graph.p()) {
    throw Error(ErrorCode::DimensionMismatch, "stream has " + std::to_string(stream.p()) +
                                                  " columns but the graph has p = " + std::to_string(graph.p()));
  }
  if (!(opts.eps > 0.0) || !(opts.warm_margin > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "tolerance and warm margin must be positive");
  }
  const auto starts = window_starts(stream.n(), opts.window, opts.overlap);
  // Window fits are independent; only the bisections form a warm-start chain.
  std::vector<std::optional<BlockSparseConcentration>> fits(starts.size());
  parallel_for(starts.size(), [&](std::size_t w) {
    const SampleSet win{stream.samples.middleRows(starts[w], opts.window)};
    fits[w] = fit_concentration(graph, win);
  });
  TrackingTrace trace;
  for (std::size_t w = 0; w < starts.size(); ++w) {
    const int start = starts[w];
    const auto& K = *fits[w];
    TrackingPoint pt;
    pt.window_start = start;
    pt.window_end = start + opts.window;
    std::optional<BisectionResult> res;
    if (!trace.empty()) {
      const double prev = trace.back().lambda;
      try {
        res = bisect_min_eig(K, {prev - opts.warm_margin, prev + opts.warm_margin, opts.eps});
        pt.warm = true;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::BadBracket) throw;
      }
    }
    if (!res) res = bisect_min_eig(K, {0.0, upper_bound(K), opts.eps});
    pt.lambda = res->estimate();
    pt.bracket_width = res->width();
    pt.iterations = res->iterations;
    pt.estimates = res->estimates;
    if (opts.record_messages) {
      for (const auto& m : res->messages) {
        ++pt.message_count;
        pt.message_bytes += m.bytes;
        pt.max_message_dim = std::max(pt.max_message_dim, m.dim);
      }
    }
    trace.push_back(std::move(pt));
  }
  return trace;
}

}  // namespace dpca
