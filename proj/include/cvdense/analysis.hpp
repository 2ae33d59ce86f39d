#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "cvdense/circuit.hpp"
#include "cvdense/detection.hpp"

namespace cvdense::analysis {

/// Scalars of the controlled dense-coding model. Efficiencies are intensity
/// efficiencies (xi^2, eta^2); gain uses the nominal convention in which
/// 1/sqrt2 is the large-squeezing optimum for a lossless setup.
struct ExperimentParams {
  double r = 0.674;
  double xi1_sq = 0.987;
  double xi2_sq = 0.937;
  double eta_sq = 0.95;
  double gain = 0.70710678118654752;
  double v_xs = 0.0;  // signal variances at the detection plane
  double v_ys = 0.0;
  double sigma_sq = 0.0;  // mean signal photon number

  /// Mean photon number per mode, sigma^2 + sinh^2 r.
  double nbar() const;
  /// Same parameters with sigma^2 chosen so that nbar() == nbar.
  ExperimentParams with_nbar(double nbar) const;
  ExperimentParams with_r(double r) const;
  ExperimentParams with_gain(double g) const;
  circuit::PaperParams paper_params() const;
  void validate() const;
};

ExperimentParams from_paper_params(const circuit::PaperParams& p);

/// Capacities in nats.
struct CapacityPoint {
  double nbar = 0.0;
  double c_helped = 0.0;
  double c_unhelped = 0.0;
  double c_coherent = 0.0;
  double c_squeezed = 0.0;
};

struct BaselineCapacities {
  double coherent = 0.0;  // ln(1 + nbar)
  double squeezed = 0.0;  // ln(1 + 2 nbar)
};

/// Helped-current variance as a quadratic in the nominal gain:
/// v(g) = constant + linear g + quadratic g^2.
struct GainQuadratic {
  double constant = 1.0;
  double linear = 0.0;
  double quadratic = 0.0;

  double operator()(double g) const { return constant + g * (linear + g * quadratic); }
  double argmin() const { return -linear / (2.0 * quadratic); }
};

struct Thresholds {
  double coherent_helped = 0.0;    // C_c = C_coh
  double coherent_unhelped = 0.0;  // C_nc = C_coh
  double squeezed_helped = 0.0;    // C_c = C_sq
};

struct SweepRow {
  double r = 0.0;
  double v_sum = 1.0;
  double v_diff = 1.0;
  double v_sum_helped = 1.0;
  double v_sum_helped_opt = 1.0;
  double g_opt = 0.0;
};

class NoRootError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sum and difference variances from the closed forms; the helped variance is
/// evaluated at p.gain. Signal variances are added as V/2.
detection::NoiseBudget closed_form_variances(const ExperimentParams& p);

/// Noise-only helped variance at the fixed gain 1/sqrt2, written out in the
/// expanded form that depends only on r, xi1^2, xi2^2 and eta^2.
double helped_variance_fixed_gain(const ExperimentParams& p);

GainQuadratic gain_quadratic(const ExperimentParams& p,
                             detection::ClaireVacuumWeight weight = detection::ClaireVacuumWeight::kChannel);

/// Noise-only variance of the combined current at gain g.
double variance_vs_gain(const ExperimentParams& p, double g,
                        detection::ClaireVacuumWeight weight = detection::ClaireVacuumWeight::kChannel);

/// g_opt = (e^{4r} + 3e^{2r} - 4) eta^2 xi1^2 /
///         (sqrt2 (e^{4r} eta^2 xi2^2 - 3 e^{2r} eta^2 xi2^2 + 6 e^{2r} + 2 eta^2 xi2^2))
double optimal_gain(const ExperimentParams& p);

/// 1/2 ln[(1 + sigma^2/v_diff)(1 + sigma^2/v_x)].
double dense_coding_capacity(double sigma_sq, double v_diff, double v_x);

BaselineCapacities baseline_capacities(double nbar);

/// Capacities at p.nbar() using noise-only variances at p.gain.
CapacityPoint channel_capacities(const ExperimentParams& p);

/// Bracketed bisection; requires a sign change on [lo, hi].
double bisect(const std::function<double(double)>& f, double lo, double hi, double tol);

/// Crossings with the coherent and squeezed baselines on nbar in (sinh^2 r, 1e3],
/// located to 1e-6. Throws NoRootError when a pair of curves does not cross.
Thresholds capacity_thresholds(const ExperimentParams& p);

/// Throw std::invalid_argument for empty or non-increasing grids.
std::vector<SweepRow> sweep_r(const ExperimentParams& base, std::span<const double> r_grid);
std::vector<CapacityPoint> sweep_nbar(const ExperimentParams& base, std::span<const double> nbar_grid);

/// Squeezing of the EPR source in dB: 10 log10(e^{-2r}).
double squeezing_db(double r);

}  // namespace cvdense::analysis
