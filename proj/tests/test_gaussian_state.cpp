#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "cvdense/gaussian_state.hpp"

using namespace cvdense;

namespace {

QuadratureForm x_sum(std::size_t n, std::initializer_list<std::size_t> modes, double sign_last = 1.0) {
  QuadratureForm f = QuadratureForm::zero(n);
  std::size_t k = 0;
  for (std::size_t m : modes) {
    f = f.with_x(m, (++k == modes.size()) ? sign_last : 1.0);
  }
  return f;
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(GaussianState, RejectsBadShapes) {
  EXPECT_THROW(GaussianState(Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3)), std::invalid_argument);
  EXPECT_THROW(GaussianState(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(4, 4)), std::invalid_argument);
  Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(2, 2);
  asym(0, 1) = 0.3;
  EXPECT_THROW(GaussianState(Eigen::VectorXd::Zero(2), asym), std::invalid_argument);
  Eigen::VectorXd nan_mean = Eigen::VectorXd::Zero(2);
  nan_mean(1) = std::nan("");
  EXPECT_THROW(GaussianState(nan_mean, Eigen::MatrixXd::Identity(2, 2)), std::invalid_argument);
}

TEST(GaussianState, VacuumIsIdentity) {
  auto v1 = vacuum_state(1);
  EXPECT_TRUE(v1.cov().isApprox(Eigen::MatrixXd::Identity(2, 2)));
  EXPECT_EQ(v1.mean().norm(), 0.0);
  EXPECT_THROW(vacuum_state(0), std::invalid_argument);
}

TEST(GaussianState, VacuumFormVariances) {
  auto v3 = vacuum_state(3);
  EXPECT_DOUBLE_EQ(variance_of(v3, x_sum(3, {0, 1})), 2.0);
  EXPECT_DOUBLE_EQ(variance_of(v3, x_sum(3, {0, 1, 2})), 3.0);
  auto nu = symplectic_eigenvalues(vacuum_state(2));
  EXPECT_NEAR(nu(0), 1.0, 1e-12);
  EXPECT_NEAR(nu(1), 1.0, 1e-12);
}

TEST(GaussianState, FormSnlReferenceIsSquaredNorm) {
  auto f = QuadratureForm::zero(3).with_x(0, 0.5).with_y(2, -2.0);
  EXPECT_DOUBLE_EQ(f.snl_reference(), 4.25);
  EXPECT_DOUBLE_EQ(variance_of(vacuum_state(3), f), f.snl_reference());
}

TEST(GaussianState, VarianceRejectsDimensionMismatch) {
  EXPECT_THROW(variance_of(vacuum_state(2), QuadratureForm::zero(3)), std::invalid_argument);
}

TEST(TwoModeSqueeze, ZeroIsIdentity) {
  auto s = two_mode_squeeze(vacuum_state(2), 0, 1, 0.0);
  EXPECT_LT(max_abs(s.cov() - Eigen::MatrixXd::Identity(4, 4)), 1e-15);
}

TEST(TwoModeSqueeze, EprCorrelations) {
  const double r = 0.674;
  auto s = two_mode_squeeze(vacuum_state(2), 0, 1, r);
  auto xplus = x_sum(2, {0, 1});
  auto xminus = x_sum(2, {0, 1}, -1.0);
  auto yminus = QuadratureForm::zero(2).with_y(0, 1.0).with_y(1, -1.0);
  EXPECT_NEAR(variance_of(s, xplus), 2.0 * std::exp(-2.0 * r), 1e-12);
  EXPECT_NEAR(variance_of(s, xplus), 0.5195, 5e-5);
  EXPECT_NEAR(variance_of(s, xminus), 2.0 * std::exp(2.0 * r), 1e-12);
  EXPECT_NEAR(variance_of(s, xminus), 7.6994, 5e-4);
  EXPECT_NEAR(variance_of(s, yminus), 2.0 * std::exp(-2.0 * r), 1e-12);
  auto nu = symplectic_eigenvalues(s);
  EXPECT_NEAR(nu(0), 1.0, 1e-9);
  EXPECT_NEAR(nu(1), 1.0, 1e-9);
}

TEST(TwoModeSqueeze, RejectsBadArguments) {
  EXPECT_THROW(two_mode_squeeze(vacuum_state(2), 0, 1, -0.1), std::invalid_argument);
  EXPECT_THROW(two_mode_squeeze(vacuum_state(2), 1, 1, 0.1), std::invalid_argument);
  EXPECT_THROW(two_mode_squeeze(vacuum_state(2), 0, 2, 0.1), std::out_of_range);
}

TEST(Beamsplitter, UnitTransmissionIsIdentity) {
  auto s = two_mode_squeeze(vacuum_state(2), 0, 1, 0.5);
  auto b = beamsplitter(s, 0, 1, 1.0);
  EXPECT_LT(max_abs(b.cov() - s.cov()), 1e-15);
}

TEST(Beamsplitter, VacuumInvariant) {
  auto b = beamsplitter(vacuum_state(2), 0, 1, 1.0 / std::sqrt(2.0));
  EXPECT_LT(max_abs(b.cov() - Eigen::MatrixXd::Identity(4, 4)), 1e-15);
}

TEST(Beamsplitter, SignConvention) {
  // Coherent amplitude in mode 0 only: a1' = t a0 ... a1' = -rho a0.
  auto s = displace(vacuum_state(2), 0, 1.0, 0.0);
  const double t = 0.6;
  auto b = beamsplitter(s, 0, 1, t);
  EXPECT_NEAR(b.mean()(0), t, 1e-15);
  EXPECT_NEAR(b.mean()(2), -0.8, 1e-15);
  EXPECT_THROW(beamsplitter(s, 0, 1, 1.01), std::invalid_argument);
}

TEST(PhaseShift, Rotations) {
  auto s = two_mode_squeeze(vacuum_state(2), 0, 1, 0.4);
  s = displace(s, 0, 0.3, -0.2);
  EXPECT_LT(max_abs(phase_shift(s, 0, 0.0).cov() - s.cov()), 1e-15);
  auto full = phase_shift(s, 0, 2.0 * std::numbers::pi);
  EXPECT_LT(max_abs(full.cov() - s.cov()), 1e-12);
  EXPECT_LT((full.mean() - s.mean()).cwiseAbs().maxCoeff(), 1e-12);

  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(2, 2);
  cov(0, 0) = 0.3;
  cov(1, 1) = 1.0 / 0.3;
  GaussianState sq(Eigen::Vector2d(0.7, -0.1), cov);
  auto q = phase_shift(sq, 0, std::numbers::pi / 2.0);
  EXPECT_NEAR(q.cov()(0, 0), 1.0 / 0.3, 1e-12);
  EXPECT_NEAR(q.cov()(1, 1), 0.3, 1e-12);
  EXPECT_NEAR(q.mean()(0), 0.1, 1e-12);  // X' = -Y
  EXPECT_NEAR(q.mean()(1), 0.7, 1e-12);  // Y' = X
}

TEST(Loss, Endpoints) {
  auto s = displace(two_mode_squeeze(vacuum_state(2), 0, 1, 0.8), 0, 1.0, 2.0);
  auto same = loss(s, 0, 1.0);
  EXPECT_LT(max_abs(same.cov() - s.cov()), 1e-15);
  auto gone = loss(s, 0, 0.0);
  EXPECT_LT(max_abs(gone.cov().block(0, 0, 2, 2) - Eigen::Matrix2d::Identity()), 1e-15);
  EXPECT_LT(max_abs(gone.cov().block(0, 2, 2, 2)), 1e-15);
  EXPECT_EQ(gone.mean()(0), 0.0);
  EXPECT_THROW(loss(s, 0, 1.2), std::invalid_argument);
  EXPECT_THROW(loss(s, 0, -0.1), std::invalid_argument);
}

TEST(Loss, OneLossyEprArm) {
  // X_i -> xi X_i + sqrt(1 - xi^2) v on one arm only; var X = cosh 2r, cov = -sinh 2r.
  const double r = 0.674;
  const double T = 0.987;
  const double xi = std::sqrt(T);
  const double c = std::cosh(2.0 * r), sh = std::sinh(2.0 * r);
  auto s = loss(two_mode_squeeze(vacuum_state(2), 0, 1, r), 0, xi);
  const double expected = T * c + c - 2.0 * xi * sh + (1.0 - T);
  EXPECT_NEAR(variance_of(s, x_sum(2, {0, 1})), expected, 1e-12);
  EXPECT_NEAR(expected, 0.52922, 5e-6);
}

TEST(Loss, BothEprArms) {
  const double r = 0.674;
  const double T = 0.987;
  auto s = two_mode_squeeze(vacuum_state(2), 0, 1, r);
  s = loss(loss(s, 0, std::sqrt(T)), 1, std::sqrt(T));
  EXPECT_NEAR(variance_of(s, x_sum(2, {0, 1})), T * 2.0 * std::exp(-2.0 * r) + 2.0 * (1.0 - T), 1e-12);
}

TEST(Displace, GroupInverse) {
  auto s = two_mode_squeeze(vacuum_state(2), 0, 1, 0.3);
  auto d = displace(displace(s, 1, 1.0, 0.0), 1, -1.0, 0.0);
  EXPECT_EQ(d.mean(), s.mean());
  EXPECT_EQ(d.cov(), s.cov());
  EXPECT_EQ(displace(s, 0, 0.0, 0.0).mean(), s.mean());
  EXPECT_THROW(displace(s, 0, std::nan(""), 0.0), std::invalid_argument);
  auto f = QuadratureForm::zero(2).with_x(1, 2.0);
  EXPECT_DOUBLE_EQ(mean_of(displace(s, 1, 0.25, 0.0), f), 0.5);
}

TEST(GaussianState, VarianceIsQuadraticInForm) {
  auto s = two_mode_squeeze(vacuum_state(3), 0, 2, 0.9);
  auto f = QuadratureForm::zero(3).with_x(0, 0.4).with_y(2, -1.3).with_x(1, 0.2);
  for (double a : {-3.0, -0.5, 0.0, 0.7, 2.5}) {
    EXPECT_NEAR(variance_of(s, f.scaled(a)), a * a * variance_of(s, f), 1e-12);
  }
}

class SymplecticProperty : public ::testing::Test {
 protected:
  std::mt19937_64 rng{20240611};
  std::uniform_real_distribution<double> unit{0.0, 1.0};

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(rng); }
  std::size_t mode(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
  std::pair<std::size_t, std::size_t> pair(std::size_t n) {
    std::size_t i = mode(n), j = mode(n);
    while (j == i) j = mode(n);
    return {i, j};
  }
};

TEST_F(SymplecticProperty, ElementMatricesPreserveOmega) {
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + mode(4);
    const auto omega = symplectic_form(n);
    auto [i, j] = pair(n);
    Eigen::MatrixXd mats[] = {
        two_mode_squeeze_matrix(n, i, j, uniform(0.0, 2.0)),
        beamsplitter_matrix(n, i, j, uniform(-1.0, 1.0)),
        phase_shift_matrix(n, i, uniform(-10.0, 10.0)),
    };
    for (const auto& s : mats) {
      EXPECT_LT(max_abs(s * omega * s.transpose() - omega), 1e-12);
    }
  }
}

TEST_F(SymplecticProperty, RandomSequencesStayPhysical) {
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + mode(4);
    auto s = vacuum_state(n);
    for (int step = 0; step < 12; ++step) {
      const int op = static_cast<int>(mode(5));
      if (n < 2 && (op == 0 || op == 1)) continue;
      switch (op) {
        case 0: {
          auto [i, j] = pair(n);
          s = two_mode_squeeze(s, i, j, uniform(0.0, 1.0));
          break;
        }
        case 1: {
          auto [i, j] = pair(n);
          s = beamsplitter(s, i, j, uniform(-1.0, 1.0));
          break;
        }
        case 2:
          s = phase_shift(s, mode(n), uniform(-4.0, 4.0));
          break;
        case 3:
          s = loss(s, mode(n), uniform(0.0, 1.0));
          break;
        default:
          s = displace(s, mode(n), uniform(-2.0, 2.0), uniform(-2.0, 2.0));
      }
    }
    auto nu = symplectic_eigenvalues(s);
    EXPECT_GE(nu.minCoeff(), 1.0 - 1e-9) << "trial " << trial;
  }
}

TEST_F(SymplecticProperty, LossComposition) {
  for (int trial = 0; trial < 100; ++trial) {
    auto s = two_mode_squeeze(vacuum_state(2), 0, 1, uniform(0.0, 1.5));
    s = displace(s, 0, uniform(-1.0, 1.0), uniform(-1.0, 1.0));
    const double a = uniform(0.0, 1.0), b = uniform(0.0, 1.0);
    auto twice = loss(loss(s, 0, a), 0, b);
    auto once = loss(s, 0, a * b);
    EXPECT_LT(max_abs(twice.cov() - once.cov()), 1e-12);
    EXPECT_LT((twice.mean() - once.mean()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST_F(SymplecticProperty, PassiveElementsConserveEnergy) {
  for (int trial = 0; trial < 100; ++trial) {
    auto s = two_mode_squeeze(vacuum_state(3), 0, 1, uniform(0.0, 1.5));
    s = displace(s, 2, uniform(-2.0, 2.0), uniform(-2.0, 2.0));
    const double before = s.cov().trace() + s.mean().squaredNorm();
    auto [i, j] = pair(3);
    auto b = beamsplitter(s, i, j, uniform(-1.0, 1.0));
    EXPECT_NEAR(b.cov().trace() + b.mean().squaredNorm(), before, 1e-10);
    auto p = phase_shift(s, mode(3), uniform(-4.0, 4.0));
    EXPECT_NEAR(p.cov().trace() + p.mean().squaredNorm(), before, 1e-10);
  }
}

TEST(SymplecticEigenvalues, ThermalState) {
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(4, 4);
  cov.block(0, 0, 2, 2) *= 3.0;
  cov.block(2, 2, 2, 2) *= 1.5;
  auto nu = symplectic_eigenvalues(GaussianState(Eigen::VectorXd::Zero(4), cov));
  EXPECT_NEAR(nu(0), 1.5, 1e-12);
  EXPECT_NEAR(nu(1), 3.0, 1e-12);
}
