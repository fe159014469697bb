#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "blindmc/algorithms.hpp"
#include "blindmc/crosscorr.hpp"
#include "blindmc/eig.hpp"
#include "blindmc/signal.hpp"
#include "blindmc/testing/oracles.hpp"
#include "helpers.hpp"

using namespace blindmc;
using blindmc::test::noiseless_instance;
using blindmc::test::random_matrix;
using blindmc::test::random_vector;
using blindmc::test::rel_err;

namespace {

ObservationSet random_observations(Index M, Index L, std::uint64_t seed) {
  ObservationSet obs;
  for (Index m = 0; m < M; ++m) obs.outputs.push_back(random_vector(L, seed + m));
  return obs;
}

}  // namespace

TEST_CASE("gram_yy") {
  SUBCASE("noiseless truth is a null vector") {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const Instance inst = noiseless_instance(5, 12, 4, 48, s);
      const GramYY g = gram_yy(inst.observations, 12);
      const Eigen::VectorXcd h = inst.channels.stacked();
      CHECK((g.mat * h).norm() <= 1e-8 * g.mat.norm() * h.norm());
    }
  }
  SUBCASE("matches the dense cross-convolution system") {
    const ObservationSet obs = random_observations(2, 8, 40);
    CHECK(rel_err(gram_yy(obs, 3).mat, testing::dense_gram(obs, 3)) <= 1e-10);
    const ObservationSet obs3 = random_observations(4, 11, 50);
    CHECK(rel_err(gram_yy(obs3, 5).mat, testing::dense_gram(obs3, 5)) <= 1e-10);
  }
  SUBCASE("zero outputs give the zero matrix") {
    ObservationSet obs;
    obs.outputs.assign(3, ComplexSignal::Zero(8));
    CHECK(gram_yy(obs, 4).mat.norm() == 0.0);
  }
  SUBCASE("Hermitian and positive semidefinite") {
    const GramYY g = gram_yy(random_observations(4, 24, 60), 6);
    CHECK((g.mat - g.mat.adjoint()).norm() == 0.0);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g.mat);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10 * es.eigenvalues().maxCoeff());
  }
  SUBCASE("noiseless null direction is isolated") {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const Instance inst = noiseless_instance(4, 8, 3, 32, 100 + s);
      const GramYY g = gram_yy(inst.observations, 8);
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g.mat);
      const double norm = es.eigenvalues().cwiseAbs().maxCoeff();
      CHECK(es.eigenvalues()(0) <= 1e-8 * norm);
      CHECK(es.eigenvalues()(1) - es.eigenvalues()(0) > 1e-6 * norm);
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(gram_yy(ObservationSet{}, 2), InputError);
    CHECK_THROWS_AS(gram_yy(random_observations(2, 8, 1), 9), DimensionError);
  }
}

TEST_CASE("build_A") {
  SUBCASE("noiseless truth is a null vector") {
    const Instance inst = noiseless_instance(4, 16, 4, 64, 7);
    const RestrictedA A = build_A(gram_yy(inst.observations, 16), inst.basis, 0.0);
    const Eigen::VectorXcd v = kron(inst.channels.gains, inst.channels.coeffs);
    CHECK((A.mat * v).norm() <= 1e-8 * A.mat.norm() * v.norm());
  }
  SUBCASE("identity blocks with D = K give the shifted Gram") {
    const ObservationSet obs = random_observations(3, 20, 8);
    const GramYY g = gram_yy(obs, 5);
    const BilinearBasis basis(std::vector<Eigen::MatrixXcd>(3, Eigen::MatrixXcd::Identity(5, 5)));
    const double s2 = 0.3;
    const Eigen::MatrixXcd want = g.mat - s2 * 2 * 20 * Eigen::MatrixXcd::Identity(15, 15);
    CHECK(rel_err(build_A(g, basis, s2).mat, want) < 1e-14);
  }
  SUBCASE("matches the dense basis product") {
    const ObservationSet obs = random_observations(3, 18, 9);
    std::vector<Eigen::MatrixXcd> blocks;
    for (Index m = 0; m < 3; ++m) blocks.push_back(random_matrix(6, 2, 90 + m));
    const BilinearBasis basis(blocks);
    const GramYY g = gram_yy(obs, 6);
    for (double s2 : {0.0, 0.7}) {
      CHECK(rel_err(build_A(g, basis, s2).mat, testing::dense_restricted(g.mat, basis, s2, 18)) <= 1e-10);
    }
  }
  SUBCASE("shape mismatch") {
    const GramYY g = gram_yy(random_observations(3, 18, 9), 6);
    const BilinearBasis basis(std::vector<Eigen::MatrixXcd>(2, Eigen::MatrixXcd::Ones(6, 2)));
    CHECK_THROWS_AS(build_A(g, basis, 0.0), DimensionError);
  }
  SUBCASE("quadratic form at truth grows with the noise level") {
    const Instance inst = noiseless_instance(4, 16, 4, 64, 11);
    Rng rng(12);
    std::vector<ComplexSignal> noise;
    for (Index m = 0; m < 4; ++m) noise.push_back(rng.complex_normal(64));
    const Eigen::VectorXcd v = kron(inst.channels.gains, inst.channels.coeffs).normalized();
    double prev = -1.0;
    for (double s : {0.0, 0.01, 0.1, 0.5, 1.0}) {
      ObservationSet obs = inst.observations;
      for (Index m = 0; m < 4; ++m) obs.outputs[size_t(m)] += s * noise[size_t(m)];
      const RestrictedA A = build_A(gram_yy(obs, 16), inst.basis, 0.0);
      const double q = v.dot(A.mat * v).real();
      CHECK(q >= prev);
      prev = q;
    }
    CHECK(prev > 0.0);
  }
}

TEST_CASE("build_gamma") {
  SUBCASE("delta kernel gives the leading rows of the flip") {
    ObservationSet obs;
    obs.outputs = {ComplexSignal::Unit(4, 0)};
    const BilinearBasis basis({Eigen::MatrixXcd::Identity(2, 2)});
    const Eigen::MatrixXcd want = testing::flip_matrix(4).topRows(2);
    CHECK(rel_err(build_gamma(obs, basis), want) < 1e-14);
  }
  SUBCASE("matches the adjoint of the lifted operator") {
    for (std::uint64_t s = 0; s < 3; ++s) {
      const Instance inst = random_instance({3, 6, 2, 20, 10.0, 0.5, 200 + s});
      CHECK(rel_err(build_gamma(inst.observations, inst.basis),
                    testing::gamma_via_adjoint(inst.observations, inst.basis)) <= 1e-10);
    }
  }
  SUBCASE("Monte Carlo mean over bases approaches K ||a||_1 b x^T") {
    const Index M = 4, K = 16, D = 4, L = 48;
    const Instance base = noiseless_instance(M, K, D, L, 300);
    const Eigen::VectorXcd& a = base.channels.gains;
    const Eigen::VectorXcd& b = base.channels.coeffs;
    Eigen::MatrixXcd mean = Eigen::MatrixXcd::Zero(D, L);
    const int draws = 2000;
    Rng rng(301);
    for (int t = 0; t < draws; ++t) {
      std::vector<Eigen::MatrixXcd> blocks;
      for (Index m = 0; m < M; ++m) blocks.push_back(rng.complex_normal(K, D));
      const BilinearBasis basis(blocks);
      Rng unused(0);
      const ObservationSet obs =
          synthesize_observations(synthesize_channels(basis, a, b), base.source, 0.0, unused);
      mean += build_gamma(obs, basis);
    }
    mean /= double(draws);
    const Eigen::MatrixXcd want = double(K) * a.cwiseAbs().sum() * b * base.source.transpose();
    CHECK(rel_err(mean, want) < 0.05);
  }
}

TEST_CASE("expected_A") {
  SUBCASE("truth is a null vector") {
    const Eigen::VectorXcd a = random_vector(5, 1), b = random_vector(3, 2);
    const Eigen::MatrixXcd E = expected_A(a, b, 2.5, 8);
    CHECK((E * kron(a, b)).norm() <= 1e-12 * E.norm() * kron(a, b).norm());
    CHECK((E - E.adjoint()).norm() == 0.0);
  }
  SUBCASE("single channel reduces to the P_b term only") {
    const Eigen::VectorXcd a = random_vector(1, 3), b = random_vector(4, 4);
    const Eigen::MatrixXcd E = expected_A(a, b, 1.0, 4);
    CHECK(E.norm() <= 1e-12 * std::pow(std::abs(a(0)), 2) * b.squaredNorm() * 16);
    CHECK((E * kron(a, b)).norm() <= 1e-12);
  }
  SUBCASE("positive semidefinite") {
    const Eigen::MatrixXcd E = expected_A(random_vector(4, 5), random_vector(3, 6), 1.0, 6);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(E);
    CHECK(es.eigenvalues()(0) >= -1e-10 * E.norm());
    CHECK(es.eigenvalues()(1) > 1e-6 * E.norm());
  }
  SUBCASE("zero inputs") {
    CHECK_THROWS_AS(expected_A(random_vector(2, 1), Eigen::VectorXcd::Zero(2), 1.0, 2), DomainError);
  }
}
