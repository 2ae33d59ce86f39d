#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cvdense/gaussian_state.hpp"

namespace cvdense::mc {

/// Samples are generated in fixed-size chunks; chunk k draws from an engine
/// seeded by (seed, k) alone, so results do not depend on the thread count.
inline constexpr std::size_t kChunkSize = 1 << 14;

std::mt19937_64 chunk_engine(std::uint64_t seed, std::uint64_t chunk);

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v);
  void add(const CompensatedSum& other);
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

struct SampleBatch {
  std::uint64_t seed = 0;
  std::size_t n_samples = 0;
  Eigen::MatrixXd values;  // n_samples x 2N, quadrature order as in GaussianState
};

SampleBatch sample_quadratures(const GaussianState& state, std::size_t n, std::uint64_t seed, unsigned threads = 1);

/// Unbiased sample covariance of a batch.
Eigen::MatrixXd sample_covariance(const SampleBatch& batch);

struct VarianceEstimate {
  double variance = 0.0;
  double std_error = 0.0;  // sqrt(2 / (n - 1)) * variance
  std::size_t n = 0;
};

/// Draws n samples of the form's value and returns the unbiased variance.
VarianceEstimate sample_variance(const GaussianState& state, const QuadratureForm& form, std::size_t n,
                                 std::uint64_t seed, unsigned threads = 1);

struct SpectrumConfig {
  double sample_rate = 10e6;
  double center = 2e6;
  double span = 1e6;
  double rbw = 30e3;
  double vbw = 100.0;

  void validate() const;
  /// Hann-windowed segment length whose equivalent noise bandwidth is rbw.
  std::size_t segment_length() const;
  /// Number of periodogram frames averaged by the video filter.
  std::size_t video_frames() const;
};

/// Tone at `freq` with amplitude `depth`, keyed on and off by `bits`
/// (continuous when `bits` is empty).
struct ToneSignal {
  double freq = 2e6;
  double depth = 0.0;
  std::vector<bool> bits;
  std::size_t samples_per_bit = 0;
};

/// White Gaussian noise with the given SNL-relative variance per sample plus
/// the keyed tone. Throws std::invalid_argument unless sample_rate >= 4 freq.
std::vector<double> synthesize_photocurrent(double noise_variance, const ToneSignal& signal,
                                            const SpectrumConfig& cfg, std::size_t n_samples, std::uint64_t seed);

struct SpectrumTrace {
  std::vector<double> freq_hz;
  std::vector<double> psd_rel_snl;  // linear; unit-variance white noise reads 1
  double bin_width_hz = 0.0;
  double sample_rate = 0.0;

  std::vector<double> psd_db() const;
  /// Integrated noise power (variance) contained in the trace's bins.
  double band_power() const;
  /// Mean linear level over bins farther than `exclude_halfwidth` from `exclude_center`.
  double floor_level(double exclude_center = 0.0, double exclude_halfwidth = -1.0) const;
  /// Index of the largest bin.
  std::size_t peak_index() const;
};

/// Averaged periodogram: Hann segments sized by the RBW, the last
/// video_frames() frames averaged, bins restricted to center +/- span/2.
/// Throws std::invalid_argument if the series holds fewer than 10 segments.
SpectrumTrace spectrum_estimate(std::span<const double> series, const SpectrumConfig& cfg);

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

struct BpcmConfig {
  double sample_rate = 10e6;
  double freq = 2e6;
  std::size_t samples_per_bit = 40;
};

struct BpcmResult {
  std::vector<bool> decoded;
  std::size_t errors = 0;
  double ber = 0.0;
  WilsonInterval ber_interval;
};

/// Encodes bits as tone on/off, adds noise, and decodes each bit with a
/// coherent matched filter and threshold depth/2.
BpcmResult bpcm_roundtrip(const std::vector<bool>& bits, double noise_variance, double depth, std::uint64_t seed,
                          const BpcmConfig& cfg = {});

}  // namespace cvdense::mc
