#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "cvdense/analysis.hpp"
#include "cvdense/circuit.hpp"
#include "cvdense/detection.hpp"

using namespace cvdense;
using namespace cvdense::analysis;

namespace {

const double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

detection::NoiseBudget pipeline(const ExperimentParams& p) {
  const auto pp = p.paper_params();
  const auto spec = circuit::build_paper_setup(pp);
  return detection::measure_budget(circuit::run_circuit(spec), spec, p.gain, pp.xi1(), pp.xi2());
}

double golden_min(const std::function<double(double)>& f, double a, double b) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  while (b - a > 1e-10) {
    if (f(c) < f(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - phi * (b - a);
    d = a + phi * (b - a);
  }
  return 0.5 * (a + b);
}

// Crossing located by a fine scan followed by linear interpolation.
double scan_crossing(const std::function<double(double)>& f, double lo, double hi, double step) {
  double x0 = lo, f0 = f(lo);
  for (double x = lo + step; x <= hi; x += step) {
    const double fx = f(x);
    if ((fx < 0.0) != (f0 < 0.0)) return x0 - f0 * (x - x0) / (fx - f0);
    x0 = x;
    f0 = fx;
  }
  return NAN;
}

}  // namespace

TEST(ClosedForm, ExperimentalPoint) {
  ExperimentParams p;
  auto b = closed_form_variances(p);
  EXPECT_NEAR(b.v_sum, 0.760, 5e-4);
  EXPECT_NEAR(b.v_diff, 0.479, 5e-4);
  EXPECT_NEAR(b.v_sum_helped, 0.469, 5e-4);
  EXPECT_NEAR(b.v_sum - b.v_sum_helped, 0.291, 5e-4);
  EXPECT_NEAR(helped_variance_fixed_gain(p), b.v_sum_helped, 1e-12);
}

TEST(ClosedForm, NoSqueezing) {
  ExperimentParams p;
  p.r = 0.0;
  auto b = closed_form_variances(p);
  EXPECT_DOUBLE_EQ(b.v_sum, 1.0);
  EXPECT_DOUBLE_EQ(b.v_diff, 1.0);
  // Feeding forward Claire's vacuum at a fixed gain adds ge^2 = g^2 xi2^2/xi1^2.
  EXPECT_NEAR(b.v_sum_helped, 1.0 + 0.5 * 0.937 / 0.987, 1e-12);
  EXPECT_NEAR(helped_variance_fixed_gain(p), b.v_sum_helped, 1e-12);
  EXPECT_DOUBLE_EQ(variance_vs_gain(p, optimal_gain(p)), 1.0);
}

TEST(ClosedForm, SignalVariancesAddHalf) {
  ExperimentParams p;
  p.v_xs = 0.4;
  p.v_ys = 1.0;
  auto b = closed_form_variances(p);
  auto n = closed_form_variances(ExperimentParams{});
  EXPECT_NEAR(b.v_sum - n.v_sum, 0.2, 1e-12);
  EXPECT_NEAR(b.v_diff - n.v_diff, 0.5, 1e-12);
  EXPECT_NEAR(b.v_sum_helped - n.v_sum_helped, 0.2, 1e-12);
}

TEST(ClosedForm, IdealHelpedVariance) {
  for (double r = 0.0; r <= 3.0; r += 0.25) {
    ExperimentParams p;
    p.r = r;
    p.xi1_sq = p.xi2_sq = p.eta_sq = 1.0;
    EXPECT_NEAR(closed_form_variances(p).v_sum_helped, 1.5 * std::exp(-2.0 * r), 1e-12);
  }
}

TEST(ClosedForm, RejectsBadParams) {
  ExperimentParams p;
  p.eta_sq = 1.1;
  EXPECT_THROW(closed_form_variances(p), std::invalid_argument);
  p = {};
  p.r = -0.1;
  EXPECT_THROW(closed_form_variances(p), std::invalid_argument);
  p = {};
  EXPECT_THROW(variance_vs_gain(p, NAN), std::invalid_argument);
}

TEST(Keystone, CircuitMatchesClosedForms) {
  for (int k = 0; k <= 20; ++k) {
    ExperimentParams p;
    p.r = 0.1 * k;
    auto cf = closed_form_variances(p);
    auto pl = pipeline(p);
    EXPECT_NEAR(pl.v_sum, cf.v_sum, 1e-9) << "r=" << p.r;
    EXPECT_NEAR(pl.v_diff, cf.v_diff, 1e-9) << "r=" << p.r;
    EXPECT_NEAR(pl.v_sum_helped, cf.v_sum_helped, 1e-9) << "r=" << p.r;
  }
}

TEST(Keystone, HoldsAcrossEfficienciesAndGains) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    ExperimentParams p;
    p.r = 2.0 * u(rng);
    p.xi1_sq = 0.2 + 0.8 * u(rng);
    p.xi2_sq = u(rng);
    p.eta_sq = u(rng);
    p.gain = 1.5 * u(rng);
    auto cf = closed_form_variances(p);
    auto pl = pipeline(p);
    EXPECT_NEAR(pl.v_sum, cf.v_sum, 1e-9);
    EXPECT_NEAR(pl.v_diff, cf.v_diff, 1e-9);
    EXPECT_NEAR(pl.v_sum_helped, cf.v_sum_helped, 1e-9);
  }
}

TEST(Gain, QuadraticShape) {
  ExperimentParams p;
  auto q = gain_quadratic(p);
  EXPECT_GT(q.quadratic, 0.0);
  EXPECT_DOUBLE_EQ(variance_vs_gain(p, 0.0), closed_form_variances(p).v_sum);
  EXPECT_NEAR(variance_vs_gain(p, kInvSqrt2), 0.469, 5e-4);
  EXPECT_NEAR(q.argmin(), optimal_gain(p), 1e-12);
}

TEST(Gain, OptimumAgainstGoldenSection) {
  for (double r = 0.05; r <= 2.0; r += 0.15) {
    ExperimentParams p;
    p.r = r;
    const double g_num = golden_min([&](double g) { return variance_vs_gain(p, g); }, 0.0, 3.0);
    EXPECT_NEAR(optimal_gain(p), g_num, 1e-6) << "r=" << r;
  }
  ExperimentParams p;
  EXPECT_NEAR(optimal_gain(p), 0.53369, 5e-6);
  const double v_opt = variance_vs_gain(p, optimal_gain(p));
  EXPECT_NEAR(v_opt, 0.4346, 5e-5);
  EXPECT_NEAR(variance_vs_gain(p, kInvSqrt2) - v_opt, 0.0344, 5e-4);
}

TEST(Gain, OptimumLimits) {
  ExperimentParams p;
  p.r = 0.0;
  EXPECT_DOUBLE_EQ(optimal_gain(p), 0.0);
  p.r = 20.0;
  EXPECT_NEAR(optimal_gain(p), 0.987 / (std::sqrt(2.0) * 0.937), 1e-6);
  EXPECT_NEAR(optimal_gain(p), 0.7449, 1e-4);
  p.xi1_sq = p.xi2_sq = p.eta_sq = 1.0;
  EXPECT_NEAR(optimal_gain(p), kInvSqrt2, 1e-9);
}

TEST(Gain, ArgminOnGrid) {
  for (double r : {0.2, 0.674, 1.3, 2.0}) {
    ExperimentParams p;
    p.r = r;
    const double best = variance_vs_gain(p, optimal_gain(p));
    for (double g = 0.0; g <= 2.0; g += 0.01) EXPECT_LE(best, variance_vs_gain(p, g) + 1e-15);
  }
}

TEST(Gain, HelpedNeverWorseAtOptimum) {
  for (double r = 0.0; r <= 2.0; r += 0.05) {
    ExperimentParams p;
    p.r = r;
    const double v_opt = variance_vs_gain(p, optimal_gain(p));
    const double v_sum = closed_form_variances(p).v_sum;
    if (r == 0.0) {
      EXPECT_DOUBLE_EQ(v_opt, v_sum);
    } else {
      EXPECT_LT(v_opt, v_sum);
    }
  }
}

TEST(Gain, ExtraTransmissivityVariantIsLower) {
  ExperimentParams p;
  const auto a = gain_quadratic(p);
  const auto b = gain_quadratic(p, detection::ClaireVacuumWeight::kExtraTransmissivity);
  EXPECT_EQ(a.constant, b.constant);
  EXPECT_EQ(a.linear, b.linear);
  EXPECT_NEAR(a.quadratic - b.quadratic, 0.937 / 0.987 * 0.95 * 0.063 * 0.063, 1e-12);
}

TEST(Capacity, ElevenPhotons) {
  auto c = channel_capacities(ExperimentParams{}.with_nbar(11.0));
  EXPECT_NEAR(c.c_unhelped, 2.911, 5e-4);
  EXPECT_NEAR(c.c_helped, 3.139, 5e-4);
  EXPECT_NEAR(c.c_coherent, std::log(12.0), 1e-12);
  EXPECT_NEAR(c.c_squeezed, std::log(23.0), 1e-12);
  EXPECT_NEAR(c.c_coherent, 2.4849, 5e-5);
  EXPECT_NEAR(c.c_squeezed, 3.1355, 5e-5);
  auto b = closed_form_variances(ExperimentParams{});
  const double sig = 11.0 - std::pow(std::sinh(0.674), 2);
  EXPECT_NEAR(c.c_helped, 0.5 * std::log((1 + sig / b.v_diff) * (1 + sig / b.v_sum_helped)), 1e-12);
}

TEST(Capacity, NoSignalNoCapacity) {
  ExperimentParams p;
  auto c = channel_capacities(p);
  EXPECT_EQ(c.c_helped, 0.0);
  EXPECT_EQ(c.c_unhelped, 0.0);
  EXPECT_THROW(p.with_nbar(0.1), std::invalid_argument);
  EXPECT_NEAR(p.with_nbar(3.0).nbar(), 3.0, 1e-12);
}

TEST(Capacity, SignalVariancesIgnored) {
  ExperimentParams p = ExperimentParams{}.with_nbar(5.0);
  auto a = channel_capacities(p);
  p.v_xs = 3.0;
  p.v_ys = 2.0;
  auto b = channel_capacities(p);
  EXPECT_EQ(a.c_helped, b.c_helped);
  EXPECT_EQ(a.c_unhelped, b.c_unhelped);
}

TEST(Capacity, Thresholds) {
  ExperimentParams p;
  auto t = capacity_thresholds(p);
  EXPECT_NEAR(t.coherent_helped, 1.00, 0.02);
  EXPECT_NEAR(t.coherent_unhelped, 1.31, 0.02);

  auto b = closed_form_variances(p);
  const double floor = std::pow(std::sinh(p.r), 2);
  auto cap = [&](double n, double vx) {
    return 0.5 * std::log((1 + (n - floor) / b.v_diff) * (1 + (n - floor) / vx));
  };
  const double lo = floor + 1e-6;
  EXPECT_NEAR(t.coherent_helped,
              scan_crossing([&](double n) { return cap(n, b.v_sum_helped) - std::log(1 + n); }, lo, 50, 1e-3), 1e-5);
  EXPECT_NEAR(t.coherent_unhelped,
              scan_crossing([&](double n) { return cap(n, b.v_sum) - std::log(1 + n); }, lo, 50, 1e-3), 1e-5);
  EXPECT_NEAR(t.squeezed_helped,
              scan_crossing([&](double n) { return cap(n, b.v_sum_helped) - std::log(1 + 2 * n); }, lo, 50, 1e-3),
              1e-5);
  EXPECT_NEAR(t.squeezed_helped, 10.2107, 5e-4);
}

TEST(Capacity, ThresholdsMissingRoot) {
  ExperimentParams p;
  p.r = 0.0;  // no squeezing: never beats the coherent baseline
  EXPECT_THROW(capacity_thresholds(p), NoRootError);
}

TEST(Bisect, Basics) {
  EXPECT_NEAR(bisect([](double x) { return x * x - 2.0; }, 0.0, 2.0, 1e-12), std::sqrt(2.0), 1e-12);
  EXPECT_THROW(bisect([](double x) { return x * x + 1.0; }, -1.0, 1.0, 1e-9), NoRootError);
  EXPECT_THROW(bisect([](double x) { return x; }, 1.0, -1.0, 1e-9), std::invalid_argument);
}

TEST(Sweep, RowsAndErrors) {
  std::vector<double> zero{0.0};
  auto rows = sweep_r(ExperimentParams{}, zero);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_DOUBLE_EQ(rows[0].v_sum, 1.0);
  EXPECT_DOUBLE_EQ(rows[0].v_diff, 1.0);
  EXPECT_DOUBLE_EQ(rows[0].v_sum_helped_opt, 1.0);
  EXPECT_DOUBLE_EQ(rows[0].g_opt, 0.0);
  std::vector<double> empty;
  EXPECT_THROW(sweep_r(ExperimentParams{}, empty), std::invalid_argument);
  std::vector<double> unordered{0.3, 0.1};
  EXPECT_THROW(sweep_r(ExperimentParams{}, unordered), std::invalid_argument);
  EXPECT_THROW(sweep_nbar(ExperimentParams{}, empty), std::invalid_argument);
}

TEST(Sweep, Monotonicity) {
  std::vector<double> grid;
  for (int k = 0; k <= 400; ++k) grid.push_back(0.005 * k);
  auto rows = sweep_r(ExperimentParams{}, grid);
  const double r_stationary = std::log(8.0) / 4.0;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    EXPECT_LT(rows[k].v_diff, rows[k - 1].v_diff);
    EXPECT_LT(rows[k].v_sum_helped, rows[k - 1].v_sum_helped) << "r=" << rows[k].r;
    if (rows[k - 1].r >= r_stationary) {
      EXPECT_GT(rows[k].v_sum, rows[k - 1].v_sum);
    }
    if (rows[k].r < r_stationary) {
      EXPECT_LT(rows[k].v_sum, rows[k - 1].v_sum);
    }
  }
}

TEST(Sweep, HelpedCapacityDominates) {
  std::vector<double> grid;
  for (double n = 0.6; n <= 20.0; n += 0.1) grid.push_back(n);
  for (const auto& c : sweep_nbar(ExperimentParams{}, grid)) {
    EXPECT_GE(c.c_helped, c.c_unhelped);
    EXPECT_GE(c.c_unhelped, 0.0);
  }
}

TEST(Squeezing, Decibels) {
  EXPECT_NEAR(squeezing_db(0.674), -5.854, 5e-4);
  EXPECT_DOUBLE_EQ(squeezing_db(0.0), 0.0);
}
