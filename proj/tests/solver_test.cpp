#include "csflood/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "csflood/errors.hpp"
#include "csflood/linalg.hpp"

namespace csflood {
namespace {

Eigen::VectorXd sparse_signs(int q, int k, std::mt19937_64& rng) {
  std::vector<int> idx(q);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(q);
  for (int i = 0; i < k; ++i) {
    x[idx[i]] = (rng() & 1U) != 0 ? 1.0 : -1.0;
  }
  return x;
}

Eigen::VectorXd dense_from(const std::vector<DecodedMeasurement>& d, const SensingParams& p) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(p.columns());
  for (const auto& m : d) x[column_index(p, m.origin, m.hop)] = m.value;
  return x;
}

TEST(SoftThreshold, Branches) {
  EXPECT_DOUBLE_EQ(soft_threshold(2.0, 0.5), 1.5);
  EXPECT_DOUBLE_EQ(soft_threshold(-2.0, 0.5), -1.5);
  EXPECT_DOUBLE_EQ(soft_threshold(-0.3, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(soft_threshold(0.5, 0.5), 0.0);
  for (double theta : {0.0, 0.1, 3.0}) EXPECT_DOUBLE_EQ(soft_threshold(0.0, theta), 0.0);
}

TEST(Objective, Examples) {
  const Eigen::MatrixXd a = SignatureMatrix::generate({4, 1, 3, 9}).entries();
  const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(3, 1.0, 3.0);
  EXPECT_DOUBLE_EQ(objective(y, a, Eigen::VectorXd::Zero(8), 0.7), 0.5 * y.squaredNorm());

  Eigen::VectorXd x(8);
  x << 1, 0, -1, 0, 0, 2, 0, 0;
  EXPECT_NEAR(objective(a * x, a, x, 0.0), 0.0, 1e-12);

  EXPECT_DOUBLE_EQ(objective(Eigen::VectorXd::Constant(1, 3.0), Eigen::MatrixXd::Identity(1, 1),
                             Eigen::VectorXd::Constant(1, 2.0), 1.0),
                   2.5);
}

TEST(Objective, ShapeMismatch) {
  EXPECT_THROW(objective(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(3, 3),
                         Eigen::VectorXd::Zero(3), 1.0),
               ShapeError);
  EXPECT_THROW(objective(Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3),
                         Eigen::VectorXd::Zero(4), 1.0),
               ShapeError);
}

TEST(IstaSolve, IdentityMatchesClosedForm) {
  IstaConfig cfg;
  cfg.lambda = 1.0;
  const Eigen::Vector2d y(3.0, 0.0);
  const Eigen::VectorXd x = ista_solve(y, Eigen::MatrixXd::Identity(2, 2), cfg);
  EXPECT_NEAR(x[0], 2.0, 1e-12);
  EXPECT_NEAR(x[1], 0.0, 1e-12);
}

TEST(IstaSolve, ZeroObservationGivesZero) {
  const auto a = SignatureMatrix::generate({25, 5, 30, 1});
  const Eigen::VectorXd x = ista_solve(Eigen::VectorXd::Zero(30), a, IstaConfig{});
  EXPECT_TRUE(x.isZero(0.0));
}

TEST(IstaSolve, RejectsBadInput) {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2, 2);
  Eigen::Vector2d y(1.0, std::nan(""));
  EXPECT_THROW(ista_solve(y, a, IstaConfig{}), NumericError);
  IstaConfig cfg;
  cfg.step = 0.0;
  EXPECT_THROW(ista_solve(Eigen::Vector2d(1, 1), a, cfg), ParameterError);
  cfg.step = -1.0;
  EXPECT_THROW(ista_solve(Eigen::Vector2d(1, 1), a, cfg), ParameterError);
  EXPECT_THROW(ista_solve(Eigen::Vector3d(1, 1, 1), a, IstaConfig{}), ShapeError);
  IstaConfig neg;
  neg.lambda = -0.1;
  EXPECT_THROW(ista_solve(Eigen::Vector2d(1, 1), a, neg), ParameterError);
}

TEST(IstaSolve, NoiselessTwoSparseMatchesBruteForce) {
  const auto a = SignatureMatrix::generate({25, 5, 30, 1});
  std::mt19937_64 rng(11);
  const Eigen::VectorXd x0 = sparse_signs(150, 2, rng);
  const Eigen::VectorXd y = a.entries() * x0;
  IstaConfig cfg;
  cfg.lambda = 0.05;
  const auto decoded = quantize_support(ista_solve(y, a, cfg), a.params(), 0.5);

  const auto oracle = brute_force_p0(y, a.entries(), 2, 1e-9);
  ASSERT_TRUE(oracle.has_value());
  EXPECT_EQ(*oracle, x0);
  EXPECT_EQ(dense_from(decoded, a.params()), *oracle);
  EXPECT_EQ(decoded.size(), 2u);
}

TEST(IstaSolve, ObjectiveNeverAboveZeroStart) {
  const auto a = SignatureMatrix::generate({25, 5, 30, 2});
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.5);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd y = a.entries() * sparse_signs(150, 1 + t % 6, rng);
    for (int i = 0; i < y.size(); ++i) y[i] += noise(rng);
    for (double lambda : {0.0, 0.5, 5.0}) {
      IstaConfig cfg;
      cfg.lambda = lambda;
      cfg.max_iters = 50;
      const Eigen::VectorXd x = ista_solve(y, a, cfg);
      EXPECT_LE(objective(y, a.entries(), x, lambda),
                objective(y, a.entries(), Eigen::VectorXd::Zero(150), lambda) + 1e-9);
    }
  }
}

TEST(IstaSolve, MonotoneDescentWithAutoStep) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> noise(0.0, 0.3);
  for (int t = 0; t < 25; ++t) {
    const auto a = SignatureMatrix::generate({25, 5, 20 + t, 100 + static_cast<std::uint64_t>(t)});
    Eigen::VectorXd y = a.entries() * sparse_signs(150, 1 + t % 5, rng);
    for (int i = 0; i < y.size(); ++i) y[i] += noise(rng);
    IstaConfig cfg;
    cfg.lambda = 0.1 * (1 + t % 7);
    IstaTrace trace;
    ista_solve(y, a, cfg, &trace);
    ASSERT_GE(trace.objective.size(), 2u);
    for (std::size_t i = 1; i < trace.objective.size(); ++i) {
      EXPECT_LE(trace.objective[i], trace.objective[i - 1] * (1 + 1e-12) + 1e-12)
          << "iteration " << i;
    }
  }
}

TEST(IstaStep, ShrinkageBound) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  const auto a = SignatureMatrix::generate({16, 3, 20, 8});
  for (int t = 0; t < 50; ++t) {
    Eigen::VectorXd x(64), y(20);
    for (auto& v : x) v = gauss(rng);
    for (auto& v : y) v = gauss(rng);
    const double step = 1.0 / a.lipschitz();
    const Eigen::VectorXd input = x + step * (a.entries().transpose() * (y - a.entries() * x));
    const Eigen::VectorXd out = ista_step(y, a.entries(), x, step, 0.3 + t);
    for (int i = 0; i < 64; ++i) {
      EXPECT_LE(std::abs(out[i]), std::abs(input[i]));
    }
  }
}

TEST(SmoothGradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss;
  for (int t = 0; t < 20; ++t) {
    const int m = 4 + t % 5;
    const int q = 6 + t % 7;
    Eigen::MatrixXd a(m, q);
    Eigen::VectorXd y(m), x(q);
    for (auto& v : a.reshaped()) v = gauss(rng);
    for (auto& v : y) v = gauss(rng);
    for (auto& v : x) v = gauss(rng);

    const auto f = [&](const Eigen::VectorXd& z) { return 0.5 * (y - a * z).squaredNorm(); };
    const Eigen::VectorXd g = smooth_gradient(y, a, x);
    Eigen::VectorXd fd(q);
    const double h = 1e-5;
    for (int i = 0; i < q; ++i) {
      Eigen::VectorXd up = x, down = x;
      up[i] += h;
      down[i] -= h;
      fd[i] = (f(up) - f(down)) / (2 * h);
    }
    EXPECT_LE((g - fd).norm() / std::max(1.0, g.norm()), 1e-6);
  }
}

TEST(IstaSolver, GramPathAgreesWithDirect) {
  const auto a = SignatureMatrix::generate({25, 5, 30, 4});
  const IstaSolver solver(a.entries(), a.lipschitz());
  std::mt19937_64 rng(8);
  std::normal_distribution<double> noise(0.0, 0.3);
  for (int t = 0; t < 10; ++t) {
    Eigen::VectorXd y = a.entries() * sparse_signs(150, 1 + t, rng);
    for (auto& v : y) v += noise(rng);
    IstaConfig cfg;
    cfg.lambda = 0.5 * (1 + t % 3);
    const Eigen::VectorXd direct = ista_solve(y, a, cfg);
    EXPECT_LE((solver.solve(y, cfg) - direct).norm(), 1e-8 * std::max(1.0, direct.norm()));
  }
}

TEST(QuantizeSupport, DeadZone) {
  const SensingParams p{2, 1, 3, 0};
  Eigen::VectorXd x(4);
  x << 0.9, -0.05, -1.1, 0.0;
  const auto d = quantize_support(x, p, 0.5);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[0], (DecodedMeasurement{NodeId{1}, 0, 1}));
  EXPECT_EQ(d[1], (DecodedMeasurement{NodeId{2}, 0, -1}));
  EXPECT_TRUE(quantize_support(Eigen::VectorXd::Zero(4), p, 0.5).empty());
  EXPECT_THROW(quantize_support(Eigen::VectorXd::Zero(3), p, 0.5), ShapeError);
}

TEST(BruteForceP0, ZeroObservation) {
  const auto a = SignatureMatrix::generate({25, 5, 30, 1});
  const auto x = brute_force_p0(Eigen::VectorXd::Zero(30), a.entries(), 2, 1e-9);
  ASSERT_TRUE(x.has_value());
  EXPECT_TRUE(x->isZero(0.0));
}

TEST(BruteForceP0, SingleColumn) {
  const auto a = SignatureMatrix::generate({25, 5, 30, 1});
  for (int j : {0, 77, 149}) {
    const auto x = brute_force_p0(a.entries().col(j), a.entries(), 2, 1e-9);
    ASSERT_TRUE(x.has_value());
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(150);
    expected[j] = 1.0;
    EXPECT_EQ(*x, expected);
  }
}

TEST(BruteForceP0, DifferenceOfTwoColumns) {
  const auto a = SignatureMatrix::generate({25, 5, 30, 1});
  const int p = 12;
  const int q = 95;
  const Eigen::VectorXd y = a.entries().col(p) - a.entries().col(q);
  const auto x = brute_force_p0(y, a.entries(), 2, 1e-9);
  ASSERT_TRUE(x.has_value());
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(150);
  expected[p] = 1.0;
  expected[q] = -1.0;
  EXPECT_EQ(*x, expected);
}

TEST(BruteForceP0, NoFitAndGuard) {
  const auto a = SignatureMatrix::generate({25, 5, 30, 1});
  EXPECT_FALSE(brute_force_p0(Eigen::VectorXd::Constant(30, 0.3), a.entries(), 1, 1e-9));
  EXPECT_THROW(brute_force_p0(Eigen::VectorXd::Zero(30), a.entries(), 4, 1e-9), CapacityError);
}

TEST(OracleAgreement, QuantizedIstaMatchesBruteForce) {
  std::mt19937_64 rng(2024);
  int agree = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 20 + static_cast<int>(rng() % 11);
    const auto a = SignatureMatrix::generate({10, 5, m, rng()});
    const int k = 1 + static_cast<int>(rng() % 3);
    const Eigen::VectorXd y = a.entries() * sparse_signs(a.cols(), k, rng);
    IstaConfig cfg;
    cfg.lambda = 0.05;
    const auto decoded = quantize_support(ista_solve(y, a, cfg), a.params(), 0.5);
    const auto oracle = brute_force_p0(y, a.entries(), 3, 1e-9);
    ASSERT_TRUE(oracle.has_value());
    if (dense_from(decoded, a.params()) == *oracle) ++agree;
  }
  EXPECT_GE(agree, 95);
}

TEST(SpectralNorm, PowerIterationMatchesSvd) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd a(12, 40);
  for (auto& v : a.reshaped()) v = gauss(rng);
  const double s = Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues()(0);
  EXPECT_NEAR(spectral_norm_sq(a, 500, 1e-12), s * s, 1e-6 * s * s);
  EXPECT_EQ(spectral_norm_sq(Eigen::MatrixXd::Zero(3, 3)), 0.0);
}

}  // namespace
}  // namespace csflood
