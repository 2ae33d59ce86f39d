#include "cvdense/detection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cvdense::detection {

namespace {

void check_efficiency(double eta) {
  if (!std::isfinite(eta) || eta < 0.0 || eta > 1.0) {
    throw std::invalid_argument("detector efficiency must lie in [0, 1]");
  }
}

MeasuredCurrent make_current(const GaussianState& detected, QuadratureForm form, std::vector<std::size_t> modes,
                             double eta) {
  const double snl = form.snl_reference();
  if (snl <= 0.0) {
    throw std::invalid_argument("photocurrent form is identically zero");
  }
  const double v = variance_of(detected, form) / snl;
  return MeasuredCurrent{std::move(form), std::move(modes), eta, snl, v};
}

}  // namespace

double NoiseBudget::sum_db() const { return to_db(v_sum); }
double NoiseBudget::diff_db() const { return to_db(v_diff); }
double NoiseBudget::sum_helped_db() const { return to_db(v_sum_helped); }

GaussianState apply_efficiency(const GaussianState& state, const std::vector<std::size_t>& modes, double eta) {
  check_efficiency(eta);
  GaussianState out = state;
  for (std::size_t m : modes) out = loss(out, m, eta);
  return out;
}

BellCurrents bell_currents(const GaussianState& state, std::size_t i, std::size_t j, double eta) {
  if (i == j) throw std::invalid_argument("Bell detection needs two distinct modes");
  const GaussianState detected = apply_efficiency(state, {i, j}, eta);
  const double h = std::numbers::sqrt2 / 2.0;
  const auto zero = QuadratureForm::zero(state.n_modes());
  return BellCurrents{
      make_current(detected, zero.with_x(i, h).with_x(j, h), {i, j}, eta),
      make_current(detected, zero.with_y(i, h).with_y(j, -h), {i, j}, eta),
  };
}

std::pair<double, double> bell_variances(const GaussianState& state, std::size_t i, std::size_t j, double eta) {
  const BellCurrents c = bell_currents(state, i, j, eta);
  return {c.sum.variance_linear, c.diff.variance_linear};
}

MeasuredCurrent claire_current(const GaussianState& state, std::size_t i, double eta) {
  const GaussianState detected = apply_efficiency(state, {i}, eta);
  return make_current(detected, QuadratureForm::zero(state.n_modes()).with_x(i, 1.0), {i}, eta);
}

double electronic_gain(double g, double xi1, double xi2) {
  if (!std::isfinite(g)) throw std::invalid_argument("gain must be finite");
  if (!(xi1 > 0.0) || xi1 > 1.0 || xi2 < 0.0 || xi2 > 1.0) {
    throw std::invalid_argument("transmissivities must satisfy 0 < xi1 <= 1, 0 <= xi2 <= 1");
  }
  return g * xi2 / xi1;
}

MeasuredCurrent feedforward_combine(const GaussianState& state, const MeasuredCurrent& sum,
                                    const MeasuredCurrent& claire, double g, double xi1, double xi2,
                                    ClaireVacuumWeight weight) {
  if (!(g >= 0.0)) throw std::invalid_argument("feed-forward gain must be >= 0");
  const double g_elec = electronic_gain(g, xi1, xi2);
  for (std::size_t m : claire.modes) {
    if (std::find(sum.modes.begin(), sum.modes.end(), m) != sum.modes.end()) {
      throw std::invalid_argument("feed-forward currents must come from disjoint modes");
    }
  }
  const GaussianState detected = apply_efficiency(apply_efficiency(state, sum.modes, sum.eta), claire.modes, claire.eta);

  const QuadratureForm sum_unit = sum.form.scaled(1.0 / std::sqrt(sum.snl_ref));
  const QuadratureForm claire_unit = claire.form.scaled(1.0 / std::sqrt(claire.snl_ref));
  QuadratureForm combined = sum_unit.plus(claire_unit.scaled(g_elec));

  double variance = variance_of(detected, combined);
  if (weight == ClaireVacuumWeight::kExtraTransmissivity) {
    // The loss vacuum's weight is scaled by xi2; its variance share shrinks by
    // a factor xi2^2.
    const double leak = 1.0 - xi2 * xi2;
    variance -= g_elec * g_elec * claire.eta * claire.eta * leak * leak;
  }

  std::vector<std::size_t> modes = sum.modes;
  modes.insert(modes.end(), claire.modes.begin(), claire.modes.end());
  // Units of the sum current's SNL.
  return MeasuredCurrent{std::move(combined), std::move(modes), sum.eta, 1.0, variance};
}

NoiseBudget measure_budget(const GaussianState& state, const circuit::CircuitSpec& spec, double g, double xi1,
                           double xi2, ClaireVacuumWeight weight) {
  const circuit::BellDetector* bell = nullptr;
  const circuit::AmplitudeDetector* amp = nullptr;
  for (const auto& d : spec.detectors) {
    if (const auto* b = std::get_if<circuit::BellDetector>(&d)) bell = b;
    if (const auto* a = std::get_if<circuit::AmplitudeDetector>(&d); a != nullptr && amp == nullptr) amp = a;
  }
  if (bell == nullptr) throw std::invalid_argument("circuit has no Bell detector");

  const BellCurrents bob = bell_currents(state, bell->i - 1, bell->j - 1, bell->eta);
  NoiseBudget budget;
  budget.v_sum = bob.sum.variance_linear;
  budget.v_diff = bob.diff.variance_linear;
  budget.v_sum_helped = budget.v_sum;
  if (amp != nullptr) {
    const MeasuredCurrent claire = claire_current(state, amp->i - 1, amp->eta);
    budget.v_sum_helped = feedforward_combine(state, bob.sum, claire, g, xi1, xi2, weight).variance_linear;
    budget.g_used = g;
  }
  return budget;
}

double to_db(double linear) {
  if (!(linear > 0.0)) throw std::invalid_argument("dB conversion needs a positive power ratio");
  return 10.0 * std::log10(linear);
}

double from_db(double db) {
  if (!std::isfinite(db)) throw std::invalid_argument("dB value must be finite");
  return std::pow(10.0, db / 10.0);
}

double enl_correct(double measured_linear, double enl_linear) {
  if (!std::isfinite(measured_linear) || !std::isfinite(enl_linear)) {
    throw std::invalid_argument("powers must be finite");
  }
  if (enl_linear < 0.0 || enl_linear >= 1.0) {
    throw std::invalid_argument("electronics floor must lie in [0, SNL)");
  }
  if (enl_linear >= measured_linear) {
    throw std::invalid_argument("measured power is at or below the electronics floor");
  }
  return (measured_linear - enl_linear) / (1.0 - enl_linear);
}

double enl_from_correction(double measured_linear, double corrected_linear) {
  if (!(corrected_linear > 0.0) || corrected_linear == 1.0 || !std::isfinite(measured_linear)) {
    throw std::invalid_argument("floor is undetermined for these powers");
  }
  const double enl = (measured_linear - corrected_linear) / (1.0 - corrected_linear);
  if (enl < 0.0 || enl >= 1.0 || enl >= measured_linear) {
    throw std::invalid_argument("no physical electronics floor maps these powers");
  }
  return enl;
}

}  // namespace cvdense::detection
