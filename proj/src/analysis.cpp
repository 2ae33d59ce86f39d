#include "cvdense/analysis.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace cvdense::analysis {

namespace {

constexpr double kThresholdUpper = 1e3;
constexpr double kThresholdTol = 1e-6;

void check_increasing(std::span<const double> grid, const char* what) {
  if (grid.empty()) throw std::invalid_argument(std::string(what) + " grid is empty");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!std::isfinite(grid[k])) throw std::invalid_argument(std::string(what) + " grid has non-finite values");
    if (k > 0 && !(grid[k] > grid[k - 1])) {
      throw std::invalid_argument(std::string(what) + " grid must be strictly increasing");
    }
  }
}

// Noise-only sum and difference variances.
double sum_variance(const ExperimentParams& p) {
  const double e2 = std::exp(2.0 * p.r), em2 = std::exp(-2.0 * p.r);
  return 1.0 + p.eta_sq * p.xi1_sq * (e2 + 8.0 * em2 - 9.0) / 12.0;
}

double diff_variance(const ExperimentParams& p) {
  const double em2 = std::exp(-2.0 * p.r);
  return 1.0 + 3.0 * p.eta_sq * p.xi1_sq * (em2 - 1.0) / 4.0;
}

}  // namespace

double ExperimentParams::nbar() const {
  const double s = std::sinh(r);
  return sigma_sq + s * s;
}

ExperimentParams ExperimentParams::with_nbar(double nbar) const {
  ExperimentParams out = *this;
  const double s = std::sinh(r);
  out.sigma_sq = nbar - s * s;
  if (!(out.sigma_sq >= 0.0)) {
    throw std::invalid_argument("mean photon number is below the squeezing photons sinh^2 r");
  }
  return out;
}

ExperimentParams ExperimentParams::with_r(double r_new) const {
  ExperimentParams out = *this;
  out.r = r_new;
  return out;
}

ExperimentParams ExperimentParams::with_gain(double g) const {
  ExperimentParams out = *this;
  out.gain = g;
  return out;
}

circuit::PaperParams ExperimentParams::paper_params() const {
  circuit::PaperParams pp;
  pp.r = r;
  pp.xi1_sq = xi1_sq;
  pp.xi2_sq = xi2_sq;
  pp.eta_sq = eta_sq;
  pp.gain = gain;
  return pp;
}

void ExperimentParams::validate() const {
  paper_params().validate();
  if (xi1_sq <= 0.0) throw std::invalid_argument("xi1^2 must be positive");
  if (!std::isfinite(v_xs) || !std::isfinite(v_ys) || v_xs < 0.0 || v_ys < 0.0) {
    throw std::invalid_argument("signal variances must be finite and >= 0");
  }
  if (!std::isfinite(sigma_sq) || sigma_sq < 0.0) {
    throw std::invalid_argument("signal photon number must be finite and >= 0");
  }
}

ExperimentParams from_paper_params(const circuit::PaperParams& pp) {
  ExperimentParams p;
  p.r = pp.r;
  p.xi1_sq = pp.xi1_sq;
  p.xi2_sq = pp.xi2_sq;
  p.eta_sq = pp.eta_sq;
  p.gain = pp.gain;
  return p;
}

detection::NoiseBudget closed_form_variances(const ExperimentParams& p) {
  p.validate();
  detection::NoiseBudget b;
  b.v_sum = sum_variance(p) + 0.5 * p.v_xs;
  b.v_diff = diff_variance(p) + 0.5 * p.v_ys;
  b.v_sum_helped = variance_vs_gain(p, p.gain) + 0.5 * p.v_xs;
  b.g_used = p.gain;
  return b;
}

double helped_variance_fixed_gain(const ExperimentParams& p) {
  p.validate();
  const double a = p.xi1_sq, b = p.xi2_sq, e = p.eta_sq;
  const double e2 = std::exp(2.0 * p.r), em2 = std::exp(-2.0 * p.r);
  const double anti = e * (b - a) * (b - a) / a;
  const double squeezed = 2.0 * e * (b + 2.0 * a) * (b + 2.0 * a) / a;
  const double rest = b * b / a * e - 4.0 + 3.0 * e * a + 2.0 * b * e - 2.0 * b / a;
  return (e2 * anti + em2 * squeezed - 3.0 * rest) / 12.0;
}

GainQuadratic gain_quadratic(const ExperimentParams& p, detection::ClaireVacuumWeight weight) {
  p.validate();
  const double e2 = std::exp(2.0 * p.r), em2 = std::exp(-2.0 * p.r);
  const double b = p.xi2_sq, e = p.eta_sq;
  // In the squeezed / antisqueezed / vacuum basis the Bob X-sum reads
  // (2/sqrt3, 1/sqrt6, -1/sqrt2) and Claire's X reads (1/sqrt3, -1/sqrt6, 1/sqrt2).
  const double cross = 2.0 / 3.0 * em2 - e2 / 6.0 - 0.5;
  const double claire_excess = em2 / 3.0 + e2 / 6.0 - 0.5;
  GainQuadratic q;
  q.constant = sum_variance(p);
  q.linear = std::numbers::sqrt2 * e * b * cross;
  q.quadratic = b / p.xi1_sq * (1.0 + e * b * claire_excess);
  if (weight == detection::ClaireVacuumWeight::kExtraTransmissivity) {
    q.quadratic -= b / p.xi1_sq * e * (1.0 - b) * (1.0 - b);
  }
  return q;
}

double variance_vs_gain(const ExperimentParams& p, double g, detection::ClaireVacuumWeight weight) {
  if (!std::isfinite(g)) throw std::invalid_argument("gain must be finite");
  return gain_quadratic(p, weight)(g);
}

double optimal_gain(const ExperimentParams& p) {
  p.validate();
  const double e2 = std::exp(2.0 * p.r), e4 = std::exp(4.0 * p.r);
  const double eb = p.eta_sq * p.xi2_sq;
  const double num = (e4 + 3.0 * e2 - 4.0) * p.eta_sq * p.xi1_sq;
  const double den = std::numbers::sqrt2 * (e4 * eb - 3.0 * e2 * eb + 6.0 * e2 + 2.0 * eb);
  return num / den;
}

double dense_coding_capacity(double sigma_sq, double v_diff, double v_x) {
  if (!(sigma_sq >= 0.0) || !(v_diff > 0.0) || !(v_x > 0.0)) {
    throw std::invalid_argument("capacity needs sigma^2 >= 0 and positive noise variances");
  }
  return 0.5 * (std::log1p(sigma_sq / v_diff) + std::log1p(sigma_sq / v_x));
}

BaselineCapacities baseline_capacities(double nbar) {
  if (!(nbar >= 0.0)) throw std::invalid_argument("mean photon number must be >= 0");
  return {std::log1p(nbar), std::log1p(2.0 * nbar)};
}

CapacityPoint channel_capacities(const ExperimentParams& p) {
  ExperimentParams noise_only = p;
  noise_only.v_xs = 0.0;
  noise_only.v_ys = 0.0;
  const detection::NoiseBudget b = closed_form_variances(noise_only);
  CapacityPoint c;
  c.nbar = p.nbar();
  c.c_helped = dense_coding_capacity(p.sigma_sq, b.v_diff, b.v_sum_helped);
  c.c_unhelped = dense_coding_capacity(p.sigma_sq, b.v_diff, b.v_sum);
  const BaselineCapacities base = baseline_capacities(c.nbar);
  c.c_coherent = base.coherent;
  c.c_squeezed = base.squeezed;
  return c;
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
  if (!(lo < hi) || !(tol > 0.0)) throw std::invalid_argument("bisection needs lo < hi and tol > 0");
  double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo < 0.0) == (f_hi < 0.0)) throw NoRootError("no sign change in bracket");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Thresholds capacity_thresholds(const ExperimentParams& p) {
  ExperimentParams noise_only = p;
  noise_only.v_xs = 0.0;
  noise_only.v_ys = 0.0;
  const detection::NoiseBudget b = closed_form_variances(noise_only);
  const double s = std::sinh(p.r);
  const double floor = s * s;
  // Open at the left end: at nbar = sinh^2 r no signal photons are left.
  const double lo = floor + 1e-9;
  auto cap = [&](double nbar, double v_x) { return dense_coding_capacity(nbar - floor, b.v_diff, v_x); };
  auto root = [&](const std::function<double(double)>& f, const char* what) {
    try {
      return bisect(f, lo, kThresholdUpper, kThresholdTol);
    } catch (const NoRootError&) {
      throw NoRootError(std::string(what) + ": curves do not cross for nbar in (sinh^2 r, 1e3]");
    }
  };
  Thresholds t;
  t.coherent_helped = root([&](double n) { return cap(n, b.v_sum_helped) - std::log1p(n); }, "helped vs coherent");
  t.coherent_unhelped = root([&](double n) { return cap(n, b.v_sum) - std::log1p(n); }, "unhelped vs coherent");
  t.squeezed_helped =
      root([&](double n) { return cap(n, b.v_sum_helped) - std::log1p(2.0 * n); }, "helped vs squeezed");
  return t;
}

std::vector<SweepRow> sweep_r(const ExperimentParams& base, std::span<const double> r_grid) {
  check_increasing(r_grid, "r");
  std::vector<SweepRow> rows;
  rows.reserve(r_grid.size());
  for (double r : r_grid) {
    const ExperimentParams p = base.with_r(r);
    const detection::NoiseBudget b = closed_form_variances(p);
    SweepRow row;
    row.r = r;
    row.v_sum = b.v_sum;
    row.v_diff = b.v_diff;
    row.v_sum_helped = b.v_sum_helped;
    row.g_opt = optimal_gain(p);
    row.v_sum_helped_opt = variance_vs_gain(p, row.g_opt) + 0.5 * p.v_xs;
    rows.push_back(row);
  }
  return rows;
}

std::vector<CapacityPoint> sweep_nbar(const ExperimentParams& base, std::span<const double> nbar_grid) {
  check_increasing(nbar_grid, "nbar");
  std::vector<CapacityPoint> rows;
  rows.reserve(nbar_grid.size());
  for (double nbar : nbar_grid) rows.push_back(channel_capacities(base.with_nbar(nbar)));
  return rows;
}

double squeezing_db(double r) { return 10.0 * std::log10(std::exp(-2.0 * r)); }

}  // namespace cvdense::analysis
