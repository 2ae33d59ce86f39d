#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "cvdense/circuit.hpp"
#include "cvdense/gaussian_state.hpp"

namespace cvdense::detection {

/// A photocurrent: a quadrature form read out after the detector efficiency
/// channel has acted on `modes`. Mode indices are 0-based.
struct MeasuredCurrent {
  QuadratureForm form;
  std::vector<std::size_t> modes;
  double eta = 1.0;
  double snl_ref = 1.0;
  /// Variance in units of snl_ref (vacuum reads 1).
  double variance_linear = 1.0;
};

struct BellCurrents {
  MeasuredCurrent sum;   // (X_i + X_j) / sqrt2
  MeasuredCurrent diff;  // (Y_i - Y_j) / sqrt2
};

/// Noise-only budget in SNL units; signal variances are added on top as
/// V_signal / 2.
struct NoiseBudget {
  double v_sum = 1.0;
  double v_diff = 1.0;
  double v_sum_helped = 1.0;
  double g_used = 0.0;
  /// Electronics floor the budget was corrected against, SNL-relative.
  std::optional<double> enl_linear;

  double sum_db() const;
  double diff_db() const;
  double sum_helped_db() const;
};

/// How Claire's propagation-loss vacuum enters the combined current.
enum class ClaireVacuumWeight {
  /// Same attenuation channel as everything else: weight g_elec * eta * sqrt(1 - xi2^2).
  /// Gives exactly the fixed-gain helped variance and the optimal-gain formula.
  kChannel,
  /// Weight g_elec * eta * xi2 * sqrt(1 - xi2^2), one extra factor of xi2.
  kExtraTransmissivity,
};

/// Attenuation channel with amplitude efficiency eta on each listed mode.
GaussianState apply_efficiency(const GaussianState& state, const std::vector<std::size_t>& modes, double eta);

/// Bob's Bell-type detection of modes i and j. The pi/2 phase and the 50/50
/// combiner turn the sum and difference photocurrents of the bright outputs
/// into the X-sum and Y-difference of the inputs; detector vacuum enters
/// through the efficiency channel.
BellCurrents bell_currents(const GaussianState& state, std::size_t i, std::size_t j, double eta);

/// (v_sum, v_diff).
std::pair<double, double> bell_variances(const GaussianState& state, std::size_t i, std::size_t j, double eta);

MeasuredCurrent claire_current(const GaussianState& state, std::size_t i, double eta);

/// Gain applied to Claire's SNL-normalized current when the nominal gain is g.
double electronic_gain(double g, double xi1, double xi2);

/// i+' = i+ + g_elec i3, with g_elec = g xi2 / xi1. The variance comes from
/// the joint covariance of both currents and is expressed in units of the
/// sum current's SNL, so feeding forward pure vacuum adds g_elec^2.
MeasuredCurrent feedforward_combine(const GaussianState& state, const MeasuredCurrent& sum,
                                    const MeasuredCurrent& claire, double g, double xi1, double xi2,
                                    ClaireVacuumWeight weight = ClaireVacuumWeight::kChannel);

/// Runs the detectors of `spec` on the (pre-detection) state. Needs one Bell
/// detector; v_sum_helped stays equal to v_sum unless there is also an
/// amplitude detector.
NoiseBudget measure_budget(const GaussianState& state, const circuit::CircuitSpec& spec, double g, double xi1,
                           double xi2, ClaireVacuumWeight weight = ClaireVacuumWeight::kChannel);

double to_db(double linear);
double from_db(double db);

/// Removes an additive electronics floor from a SNL-relative power:
/// (measured - enl) / (1 - enl). The SNL trace carries the same floor.
double enl_correct(double measured_linear, double enl_linear);

/// Electronics floor that maps `measured` onto `corrected`.
double enl_from_correction(double measured_linear, double corrected_linear);

}  // namespace cvdense::detection
