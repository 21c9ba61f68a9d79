#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dpca/anomaly.hpp"
#include "dpca/error.hpp"
#include "dpca/synth.hpp"
#include "oracles.hpp"

using namespace dpca;

TEST_CASE("fit_model on a diag(4,1,1) chain") {
  const auto g = DecomposableGraph::build(3, {{0, 1}, {1, 2}});
  Rng rng(3);
  auto data = sample_standard(3, 20000, rng);
  data.samples.col(0) *= 2.0;
  const auto m = fit_model(data, g, 1);
  CHECK(std::abs(m.basis(0, 0)) > 0.999);
  CHECK(m.pairs[0].value == doctest::Approx(0.25).epsilon(0.05));
  CHECK(m.n == 20000);
}

TEST_CASE("full subspace leaves no residual") {
  const auto g = DecomposableGraph::build(4, {{0, 1, 2}, {2, 3}});
  Rng rng(4);
  const auto truth = random_concentration(g, rng);
  const auto data = sample_gaussian(truth.to_dense(), 300, rng);
  const auto m = fit_model(data, g, 4);
  const Vector r = residual_norms(m, data);
  CHECK(r.maxCoeff() == 0.0);
  CHECK(detect(r, Threshold::quantile(0.995)).empty());
}

TEST_CASE("model matches the dense oracle of the ML covariance") {
  const auto g = link_graph_three();
  Rng rng(6);
  const auto truth = random_concentration(g, rng);
  const auto data = sample_gaussian(truth.to_dense(), 1000, rng);
  const auto m = fit_model(data, g, 4);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(fit_concentration(g, data).to_dense());
  for (int i = 0; i < 4; ++i) CHECK(oracle::angle(m.basis.col(i), eig.eigenvectors().col(i)) < 1e-5);
  CHECK(max_abs(m.basis.transpose() * m.basis - Matrix::Identity(4, 4)) < 1e-6);
}

TEST_CASE("residual norms") {
  Matrix v = Matrix::Zero(3, 1);
  v(0, 0) = 1;
  SampleSet s{Matrix(2, 3)};
  s.samples << 2, 0, 0, 0, 3, 4;
  const Vector r = residual_norms(v, s);
  CHECK(r(0) == 0.0);
  CHECK(r(1) == doctest::Approx(5.0));
  CHECK_THROWS_AS(residual_norms(v, SampleSet{Matrix::Zero(1, 4)}), Error);
}

TEST_CASE("residual norms depend only on the span") {
  Rng rng(9);
  const Matrix v = oracle::random_orthonormal(10, 3, rng);
  const Matrix rot = oracle::random_orthonormal(3, 3, rng);
  const auto s = sample_standard(10, 50, rng);
  CHECK((residual_norms(v, s) - residual_norms(v * rot, s)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("detect") {
  CHECK(detect(Vector::Zero(10), Threshold::absolute(0.5)).empty());
  Vector s(4);
  s << 1, 1, 9, 1;
  CHECK(detect(s, Threshold::absolute(5)) == std::vector<int>{2});
  CHECK_THROWS_AS(detect(s, Threshold::absolute(0)), Error);
  CHECK_THROWS_AS(detect(s, Threshold::quantile(1.0)), Error);
  Vector ref(5);
  ref << 0, 1, 2, 3, 4;
  CHECK(empirical_quantile(ref, 0.5) == 2.0);
  CHECK(empirical_quantile(ref, 0.9) == doctest::Approx(3.6));
  CHECK(detect(s, Threshold::quantile(0.9), &ref) == std::vector<int>{2});
}

TEST_CASE("injected spikes stand out from the background") {
  const auto ds = make_preset("abilene-like", 12);
  const auto m = fit_model(ds.samples, ds.graph, 4);
  const Vector r = residual_norms(m, ds.samples);
  std::vector<char> spiked(static_cast<std::size_t>(r.size()), 0);
  for (const auto& inj : ds.injections) spiked[inj.index] = 1;
  std::vector<double> background;
  for (Eigen::Index i = 0; i < r.size(); ++i)
    if (!spiked[i]) background.push_back(r(i));
  const Vector bg = Eigen::Map<Vector>(background.data(), static_cast<Eigen::Index>(background.size()));
  const double q99 = empirical_quantile(bg, 0.99);
  for (const auto& inj : ds.injections) CHECK(r(inj.index) > q99);

  const auto flagged = detect(r, Threshold::quantile(0.995));
  int hits = 0;
  for (int i : flagged) hits += spiked[i];
  CHECK(hits >= 4);
  CHECK(flagged.size() - hits <= 2);

  // at the 0.99 quantile about ten points exceed the threshold, so recall
  // is what can be asserted
  const auto loose = detect(r, Threshold::quantile(0.99));
  int loose_hits = 0;
  for (int i : loose) loose_hits += spiked[i];
  CHECK(loose_hits >= 4);
}

TEST_CASE("window arithmetic") {
  CHECK(window_starts(5500, 500, 400).size() == 51);
  CHECK(window_starts(1000, 100, 0).size() == 10);
  CHECK(window_starts(1050, 100, 0).size() == 10);
  CHECK(window_starts(500, 500, 0) == std::vector<int>{0});
  CHECK_THROWS_AS(window_starts(499, 500, 0), Error);
  CHECK_THROWS_AS(window_starts(1000, 500, 500), Error);
}

TEST_CASE("tracking a stationary identity stream") {
  const auto g = DecomposableGraph::build(12, {{0, 1, 2, 3, 4, 5, 6}, {5, 6, 7, 8, 9, 10, 11}});
  Rng rng(21);
  const auto stream = sample_standard(12, 1200, rng);
  TrackOptions opts{200, 100, 1e-4, 0.1, true};
  const auto trace = track(stream, g, opts);
  REQUIRE(trace.size() == 11);
  CHECK_FALSE(trace[0].warm);
  for (std::size_t w = 0; w < trace.size(); ++w) {
    const SampleSet win{stream.samples.middleRows(trace[w].window_start, 200)};
    const double ref = oracle::min_eig(fit_concentration(g, win).to_dense());
    CHECK(std::abs(trace[w].lambda - ref) <= 1e-4);
    CHECK(trace[w].bracket_width <= 1e-4);
    if (w > 0) CHECK(trace[w].warm);
  }
}

TEST_CASE("a warm bracket that misses falls back to a cold start") {
  const auto g = DecomposableGraph::build(4, {{0, 1, 2}, {2, 3}});
  Rng rng(5);
  auto stream = sample_standard(4, 400, rng);
  stream.samples.bottomRows(200) *= 0.1;  // covariance drops, eig_min(K) jumps
  const auto trace = track(stream, g, {200, 0, 1e-4, 0.1, false});
  REQUIRE(trace.size() == 2);
  CHECK_FALSE(trace[1].warm);
  const SampleSet win{stream.samples.bottomRows(200)};
  CHECK(std::abs(trace[1].lambda - oracle::min_eig(fit_concentration(g, win).to_dense())) <= 1e-4);
}

TEST_CASE("matched-graph residuals approach dense PCA as n grows") {
  const auto g = link_graph_three();
  const int p = g.p();
  double previous = 1e300;
  for (int factor : {2, 20}) {
    double rel = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      Rng rng(300 + seed);
      const auto K = random_concentration(g, rng);
      auto data = sample_gaussian(K.to_dense(), factor * p, rng);
      const Vector ours = residual_norms(fit_model(data, g, 4), data);
      const Vector dense = residual_norms(dense_pca_basis(data, 4), data);
      rel += (ours - dense).cwiseAbs().mean() / dense.mean();
    }
    rel /= 5;
    CHECK(rel < previous);
    previous = rel;
  }
  CHECK(previous < 0.05);
}
