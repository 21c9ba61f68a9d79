#include <doctest.h>

#include <cmath>

#include "dpca/eigensolver.hpp"
#include "dpca/error.hpp"
#include "dpca/synth.hpp"
#include "oracles.hpp"

using namespace dpca;

namespace {

const DecomposableGraph& chain3() {
  static const auto g = DecomposableGraph::build(3, {{0, 1}, {1, 2}});
  return g;
}

BlockSparseConcentration tri() { return BlockSparseConcentration::from_dense(chain3(), oracle::tridiagonal3()); }

}  // namespace

TEST_CASE("local_min_eig") {
  CHECK(local_min_eig(Matrix::Identity(3, 3)) == doctest::Approx(1.0).epsilon(1e-15));
  Matrix a(2, 2);
  a << 2, 1, 1, 2;
  CHECK(local_min_eig(a) == doctest::Approx(1.0).epsilon(1e-15));
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 5;
  d(1, 1) = -3;
  CHECK(local_min_eig(d) == -3.0);
  Matrix ns(2, 2);
  ns << 1, 2, 0, 1;
  CHECK_THROWS_AS(local_min_eig(ns), Error);
}

TEST_CASE("feasibility sweep on the identity") {
  const auto K = BlockSparseConcentration::from_dense(chain3(), Matrix::Identity(3, 3));
  const auto ok = feasibility_sweep(K, 0.5);
  CHECK(ok.feasible);
  CHECK(ok.failing_clique == -1);
  REQUIRE(ok.messages.size() == 1);
  CHECK(ok.messages[0].dim == 1);
  const auto bad = feasibility_sweep(K, 1.5);
  CHECK_FALSE(bad.feasible);
  CHECK(bad.failing_clique == 1);
}

TEST_CASE("feasibility sweep on the tridiagonal example") {
  const auto K = tri();
  CHECK(feasibility_sweep(K, 0.5).feasible);
  CHECK(feasibility_sweep(K, 0.6).feasible == false);
  CHECK(feasibility_sweep(K, 0.59).feasible == false);
  CHECK(feasibility_sweep(K, 0.585).feasible);
  CHECK_FALSE(feasibility_sweep(K, 0.586).feasible);
  // every verdict agrees with the dense oracle
  for (double t = 0.0; t < 4.0; t += 0.01)
    CHECK(feasibility_sweep(K, t).feasible == (t < oracle::min_eig(oracle::tridiagonal3())));
}

TEST_CASE("upper bound") {
  const auto I = BlockSparseConcentration::from_dense(chain3(), Matrix::Identity(3, 3));
  CHECK(upper_bound(I) == doctest::Approx(1.0));
  CHECK(upper_bound(tri()) == doctest::Approx(1.0));
  CHECK(upper_bound(tri()) >= 2 - std::sqrt(2.0));
}

TEST_CASE("bisection") {
  SUBCASE("identity, 21 iterations") {
    const auto K = BlockSparseConcentration::from_dense(chain3(), Matrix::Identity(3, 3));
    const auto r = bisect_min_eig(K, {0.0, 2.0, 1e-6});
    CHECK(r.iterations == 21);
    CHECK(r.lower <= 1.0);
    CHECK(r.upper >= 1.0);
    CHECK(r.width() <= 1e-6);
    CHECK(r.estimates.size() == 21);
  }
  SUBCASE("tridiagonal") {
    const auto r = bisect_min_eig(tri(), {0.0, 1.0, 1e-6});
    CHECK(r.lower <= 2 - std::sqrt(2.0));
    CHECK(r.upper >= 2 - std::sqrt(2.0));
    CHECK(r.iterations == 20);
  }
  SUBCASE("bracket of width 0.2 at tolerance 0.001 takes 8 iterations") {
    const double lam = 2 - std::sqrt(2.0);
    const auto r = bisect_min_eig(tri(), {lam - 0.1, lam + 0.1, 1e-3});
    CHECK(r.iterations == 8);
  }
  SUBCASE("bad brackets") {
    auto code = [](Bracket b) {
      try {
        bisect_min_eig(tri(), b);
      } catch (const Error& e) {
        return e.code();
      }
      return ErrorCode::InvalidArgument;
    };
    CHECK(code({0.7, 1.0, 1e-6}) == ErrorCode::BadBracket);
    CHECK(code({0.0, 0.5, 1e-6}) == ErrorCode::BadBracket);
    CHECK(code({1.0, 0.0, 1e-6}) == ErrorCode::BadBracket);
  }
}

TEST_CASE("eigenvectors") {
  SUBCASE("tridiagonal") {
    const auto u = eigvec(tri(), 2 - std::sqrt(2.0));
    Vector expect(3);
    expect << 0.5, -std::sqrt(2.0) / 2, 0.5;
    CHECK((u - expect).norm() < 1e-12);
  }
  SUBCASE("identity is degenerate but deterministic") {
    const auto K = BlockSparseConcentration::from_dense(chain3(), Matrix::Identity(3, 3));
    const auto u = eigvec(K, 1.0);
    CHECK(u == Vector::Unit(3, 2));
    CHECK(eigvec(K, 1.0) == u);
  }
  SUBCASE("block diagonal via back-substitution") {
    Matrix d = Matrix::Zero(3, 3);
    d(0, 0) = 3;
    d.block(1, 1, 2, 2) << 2, 1, 1, 2;
    const auto u = eigvec(BlockSparseConcentration::from_dense(chain3(), d), 1.0);
    Vector expect(3);
    expect << 0, std::sqrt(0.5), -std::sqrt(0.5);
    CHECK((u - expect).norm() < 1e-12);
  }
  SUBCASE("not an eigenvalue") {
    CHECK_THROWS_AS(eigvec(tri(), 1.0), Error);
  }
}

TEST_CASE("spectrum") {
  SUBCASE("diagonal chain") {
    Matrix d = Matrix::Zero(3, 3);
    d.diagonal() << 1, 2, 3;
    const auto pairs = spectrum(BlockSparseConcentration::from_dense(chain3(), d), 3, 1e-10);
    for (int i = 0; i < 3; ++i) {
      CHECK(pairs[i].value == doctest::Approx(i + 1.0).epsilon(1e-9));
      CHECK(std::abs(pairs[i].vector(i)) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  SUBCASE("tridiagonal, all three") {
    const auto pairs = spectrum(tri(), 3, 1e-10);
    CHECK(pairs[0].value == doctest::Approx(2 - std::sqrt(2.0)).epsilon(1e-9));
    CHECK(pairs[1].value == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(pairs[2].value == doctest::Approx(2 + std::sqrt(2.0)).epsilon(1e-9));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < i; ++j) CHECK(std::abs(pairs[i].vector.dot(pairs[j].vector)) < 1e-8);
  }
  SUBCASE("random p=60 instance") {
    const auto g = random_decomposable(60, 6, 4, 3);
    Rng rng(4);
    const auto K = random_concentration(g, rng);
    const Matrix dense = K.to_dense();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(dense);
    const auto pairs = spectrum(K, 4, 1e-8);
    for (int i = 0; i < 4; ++i) {
      CHECK(std::abs(pairs[i].value - eig.eigenvalues()(i)) <= 1e-8);
      CHECK(oracle::angle(pairs[i].vector, eig.eigenvectors().col(i)) < 1e-5);
    }
  }
  SUBCASE("component count is validated") {
    CHECK_THROWS_AS(spectrum(tri(), 4, 1e-8), Error);
    CHECK_THROWS_AS(spectrum(tri(), 0, 1e-8), Error);
  }
}

TEST_CASE("deflation set validation") {
  Matrix u = Matrix::Zero(3, 2);
  u(0, 0) = 1;
  u(1, 1) = 1;
  CHECK_NOTHROW(DeflationSet::make(u, Vector::Ones(2)));
  CHECK_THROWS_AS(DeflationSet::make(u, Vector::Constant(2, -1.0)), Error);
  u(0, 1) = 0.5;
  CHECK_THROWS_AS(DeflationSet::make(u, Vector::Ones(2)), Error);
  CHECK_THROWS_AS(DeflationSet::make(Matrix::Identity(3, 2), Vector::Ones(3)), Error);
}

TEST_CASE("deflated sweep matches the dense deflated matrix") {
  const auto K = tri();
  Rng rng(8);
  const auto defl = oracle::random_deflation(3, 2, rng);
  const double lam = oracle::min_eig(defl.apply_to(oracle::tridiagonal3()));
  CHECK(feasibility_sweep(K, lam - 1e-6, defl).feasible);
  CHECK_FALSE(feasibility_sweep(K, lam + 1e-6, defl).feasible);
  CHECK(upper_bound(K, defl) >= lam);
}

TEST_CASE("deflation weight exceeds the spectral radius") {
  const auto K = tri();
  CHECK(deflation_weight(K) > 2 + std::sqrt(2.0));
}

TEST_CASE("duality with the covariance") {
  const auto g = random_decomposable(30, 4, 3, 17);
  Rng rng(2);
  const auto K = random_concentration(g, rng);
  const auto r = bisect_min_eig(K, {0.0, upper_bound(K), 1e-12});
  const Matrix sigma = K.to_dense().inverse();
  const double emax = oracle::eigenvalues(sigma).maxCoeff();
  CHECK(std::abs(1.0 / r.estimate() - emax) / emax < 1e-8);
}
