#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "dpca/eigensolver.hpp"
#include "dpca/estimation.hpp"
#include "dpca/graph.hpp"

namespace dpca {

/// The j principal components of an ML-assembled concentration matrix: the
/// j smallest eigenpairs of K, i.e. the j largest of the covariance.
struct SubspaceModel {
  int j = 0;
  std::vector<EigenPair> pairs;
  Matrix basis;  // p x j, columns are the eigenvectors
  int n = 0;     // samples used for the fit
  int window = 0;
};

/// Fits K on `data` under `graph` and extracts j components with bisection
/// tolerance `eps`. Throws SingularLocalCovariance, InvalidArgument.
SubspaceModel fit_model(const SampleSet& data, const DecomposableGraph& graph, int j,
                        double eps = 1e-10);

/// Per-sample |(I - V V^T) x_i| for the orthonormal columns V. Values within
/// the resolution of V (its orthonormality defect times |x_i|) are zero.
Vector residual_norms(const Matrix& basis, const SampleSet& samples);
Vector residual_norms(const SubspaceModel& model, const SampleSet& samples);

/// Leading j eigenvectors of the unconstrained sample covariance (dense PCA).
Matrix dense_pca_basis(const SampleSet& data, int j);

/// Empirical quantile with linear interpolation between order statistics at
/// position q (n - 1).
double empirical_quantile(const Vector& series, double q);

struct Threshold {
  enum class Kind { Absolute, Quantile };
  Kind kind = Kind::Quantile;
  double value = 0.995;

  static Threshold absolute(double v) { return {Kind::Absolute, v}; }
  static Threshold quantile(double q) { return {Kind::Quantile, q}; }
};

/// Indices whose value strictly exceeds the threshold. A quantile threshold is
/// taken over `reference` when given (a training period), otherwise over the
/// series itself. Throws InvalidArgument for a non-positive absolute
/// threshold or a quantile outside (0, 1).
std::vector<int> detect(const Vector& series, Threshold threshold,
                        const Vector* reference = nullptr);

struct TrackOptions {
  int window = 500;
  int overlap = 400;
  double eps = 1e-3;
  double warm_margin = 0.1;
  bool record_messages = true;
};

struct TrackingPoint {
  int window_start = 0;  // first sample (inclusive)
  int window_end = 0;    // last sample (exclusive)
  double lambda = 0.0;
  double bracket_width = 0.0;
  int iterations = 0;
  bool warm = false;  // false for cold starts, including fallbacks
  std::vector<double> estimates;
  std::size_t message_count = 0;
  std::size_t message_bytes = 0;
  int max_message_dim = 0;
};

using TrackingTrace = std::vector<TrackingPoint>;

/// Window starts 0, step, 2 step, ... with step = window - overlap, as long as
/// the window fits in the stream.
std::vector<int> window_starts(int length, int window, int overlap);

/// Sliding-window tracking of eig_min(K). Each window refits K; the first
/// window uses [0, upper_bound], later ones [prev - margin, prev + margin],
/// falling back to the cold bracket on BadBracket.
TrackingTrace track(const SampleSet& stream, const DecomposableGraph& graph, const TrackOptions& opts);

}  // namespace dpca
