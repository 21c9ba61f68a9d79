#include <doctest.h>

#include <cmath>

#include "dpca/eigensolver.hpp"
#include "dpca/estimation.hpp"
#include "dpca/io.hpp"
#include "dpca/runtime.hpp"
#include "dpca/synth.hpp"
#include "oracles.hpp"

using namespace dpca;

TEST_CASE("property: sweep verdict equals the dense test") {
  int cases = 0;
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    const auto inst = random_instance(seed, 40, 6, 4);
    Rng rng(seed + 1000);
    const int rank = static_cast<int>(seed % 4);
    const auto defl = rank ? oracle::random_deflation(inst.K.p(), std::min(rank, inst.K.p()), rng) : DeflationSet{};
    const double lam = oracle::min_eig(defl.apply_to(inst.K.to_dense()));
    for (int i = 0; i < 4; ++i) {
      const double t = lam + rng.uniform(-1.0, 1.0) * std::max(1.0, std::abs(lam)) * (i < 2 ? 0.5 : 1e-4);
      CHECK(feasibility_sweep(inst.K, t, defl).feasible == (t < lam));
      ++cases;
    }
  }
  CHECK(cases == 600);
}

TEST_CASE("property: submatrix eigenvalues bound the global one") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto inst = random_instance(seed, 50, 6, 4);
    const Matrix dense = inst.K.to_dense();
    const double lam = oracle::min_eig(dense);
    CHECK(upper_bound(inst.K) >= lam);
    Rng rng(seed);
    for (int s = 0; s < 20; ++s) {
      std::vector<int> idx;
      for (int i = 0; i < inst.K.p(); ++i)
        if (rng.uniform() < 0.3) idx.push_back(i);
      if (idx.empty()) idx.push_back(0);
      CHECK(lam <= oracle::min_eig(dense(idx, idx)) + 1e-12);
    }
  }
}

TEST_CASE("property: bracket contains the eigenvalue after every iteration") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = random_instance(seed, 40, 6, 4);
    const double lam = oracle::min_eig(inst.K.to_dense());
    const double ub = upper_bound(inst.K);
    const auto r = bisect_min_eig(inst.K, {0.0, ub, 1e-9});
    double half = ub / 2;
    for (double est : r.estimates) {
      half /= 2;
      CHECK(std::abs(est - lam) <= half * (1 + 1e-12) + 1e-12);
    }
  }
}

TEST_CASE("property: fill-in identity") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = random_instance(seed, 60, 6, 4);
    Rng rng(seed + 7);
    const int n = static_cast<int>(inst.graph.max_clique_size()) + 5 + static_cast<int>(rng.below(50));
    const auto data = sample_gaussian(inst.K.to_dense(), n, rng);
    const auto locals = estimate_locals(inst.graph, data);
    const auto K = assemble_concentration(inst.graph, locals);
    CHECK(marginal_consistency(K, locals).passes);
    const Matrix d = K.to_dense();
    for (int i = 0; i < K.p(); ++i)
      for (int j = 0; j < K.p(); ++j)
        if (!K.in_pattern(i, j)) CHECK(d(i, j) == 0.0);
    CHECK(max_abs(d - d.transpose()) == 0.0);
  }
}

TEST_CASE("property: deflated messages keep separator-plus-rank size") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto inst = random_instance(seed, 40, 8, 5);
    auto net = spawn_cliques(inst.K);
    const int j = 1 + static_cast<int>(seed % 4);
    if (j > inst.K.p()) continue;
    const auto res = run_protocol(net, ProtocolRequest::spectrum(j, 1e-8));
    for (const auto& m : res.log) {
      if (m.phase != "sweep" && m.phase != "backsub") continue;
      CHECK(m.dim <= static_cast<int>(inst.graph.separator(m.phase == "sweep" ? m.source : m.destination).size()) + j - 1);
    }
  }
}

TEST_CASE("property: computations are deterministic") {
  const auto a = random_instance(77, 50, 6, 4);
  const auto b = random_instance(77, 50, 6, 4);
  CHECK(a.graph == b.graph);
  CHECK((a.K.to_dense().array() == b.K.to_dense().array()).all());
  const auto pa = spectrum(a.K, 3, 1e-9);
  const auto pb = spectrum(b.K, 3, 1e-9);
  for (int i = 0; i < 3; ++i) {
    CHECK(pa[i].value == pb[i].value);
    CHECK((pa[i].vector.array() == pb[i].vector.array()).all());
  }
}

TEST_CASE("property: graph serialization round trip") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto inst = random_instance(seed, 80, 8, 5);
    CHECK(graph_from_json(graph_to_json(inst.graph)) == inst.graph);
  }
}

TEST_CASE("property: eigen-residual and orthogonality") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = random_instance(seed, 40, 6, 4);
    const int j = std::min(4, inst.K.p());
    const auto pairs = spectrum(inst.K, j, 1e-9);
    const Matrix dense = inst.K.to_dense();
    const double w = deflation_weight(inst.K);
    Matrix found(inst.K.p(), 0);
    for (int i = 0; i < j; ++i) {
      const Matrix deflated = DeflationSet{found, Vector::Constant(i, w)}.apply_to(dense);
      const Vector& u = pairs[i].vector;
      CHECK((deflated * u - pairs[i].value * u).norm() <= 1e-6 * max_abs(dense));
      CHECK(std::abs(u.norm() - 1.0) <= 1e-12);
      for (int k = 0; k < i; ++k) CHECK(std::abs(u.dot(found.col(k))) <= 1e-6);
      found.conservativeResize(Eigen::NoChange, i + 1);
      found.col(i) = u;
    }
  }
}
