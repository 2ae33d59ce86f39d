#include "cvdense/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <thread>

#include <fftw3.h>

namespace cvdense::mc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::size_t chunk_count(std::size_t n) { return (n + kChunkSize - 1) / kChunkSize; }

// Runs job(chunk) for every chunk index on up to `threads` workers.
void for_each_chunk(std::size_t chunks, unsigned threads, const std::function<void(std::size_t)>& job) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(chunks)));
  if (workers <= 1) {
    for (std::size_t k = 0; k < chunks; ++k) job(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < chunks; k = next++) job(k);
    });
  }
}

// Any L with L L^T = cov.
Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

}  // namespace

std::mt19937_64 chunk_engine(std::uint64_t seed, std::uint64_t chunk) {
  std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(seed)), static_cast<std::uint32_t>(splitmix64(seed) >> 32),
                    static_cast<std::uint32_t>(splitmix64(chunk ^ 0x5bd1e995ULL)),
                    static_cast<std::uint32_t>(splitmix64(chunk ^ 0x5bd1e995ULL) >> 32)};
  return std::mt19937_64(seq);
}

void CompensatedSum::add(double v) {
  const double t = sum_ + v;
  if (std::abs(sum_) >= std::abs(v)) {
    carry_ += (sum_ - t) + v;
  } else {
    carry_ += (v - t) + sum_;
  }
  sum_ = t;
}

void CompensatedSum::add(const CompensatedSum& other) {
  add(other.sum_);
  add(other.carry_);
}

SampleBatch sample_quadratures(const GaussianState& state, std::size_t n, std::uint64_t seed, unsigned threads) {
  if (n == 0) throw std::invalid_argument("sample count must be positive");
  const Eigen::MatrixXd factor = covariance_factor(state.cov());
  const auto d = static_cast<Eigen::Index>(state.dim());
  SampleBatch batch{seed, n, Eigen::MatrixXd(static_cast<Eigen::Index>(n), d)};
  for_each_chunk(chunk_count(n), threads, [&](std::size_t k) {
    auto engine = chunk_engine(seed, k);
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(d);
    const std::size_t end = std::min(n, (k + 1) * kChunkSize);
    for (std::size_t s = k * kChunkSize; s < end; ++s) {
      for (Eigen::Index q = 0; q < d; ++q) z[q] = normal(engine);
      batch.values.row(static_cast<Eigen::Index>(s)) = (state.mean() + factor * z).transpose();
    }
  });
  return batch;
}

Eigen::MatrixXd sample_covariance(const SampleBatch& batch) {
  if (batch.values.rows() < 2) throw std::invalid_argument("need at least two samples");
  const Eigen::RowVectorXd mu = batch.values.colwise().mean();
  const Eigen::MatrixXd centered = batch.values.rowwise() - mu;
  return centered.transpose() * centered / static_cast<double>(batch.values.rows() - 1);
}

VarianceEstimate sample_variance(const GaussianState& state, const QuadratureForm& form, std::size_t n,
                                 std::uint64_t seed, unsigned threads) {
  if (n < 2) throw std::invalid_argument("sample variance needs n >= 2");
  if (form.coefficients().size() != static_cast<Eigen::Index>(state.dim())) {
    throw std::invalid_argument("quadrature form dimension does not match state");
  }
  // Deviation of c^T x from its exact mean is w^T z with w = L^T c.
  const Eigen::VectorXd w = covariance_factor(state.cov()).transpose() * form.coefficients();
  const auto d = static_cast<Eigen::Index>(state.dim());
  const std::size_t chunks = chunk_count(n);
  std::vector<CompensatedSum> first(chunks), second(chunks);
  for_each_chunk(chunks, threads, [&](std::size_t k) {
    auto engine = chunk_engine(seed, k);
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(d);
    const std::size_t end = std::min(n, (k + 1) * kChunkSize);
    for (std::size_t s = k * kChunkSize; s < end; ++s) {
      for (Eigen::Index q = 0; q < d; ++q) z[q] = normal(engine);
      const double dev = w.dot(z);
      first[k].add(dev);
      second[k].add(dev * dev);
    }
  });
  CompensatedSum s1, s2;
  for (std::size_t k = 0; k < chunks; ++k) {
    s1.add(first[k]);
    s2.add(second[k]);
  }
  const double nn = static_cast<double>(n);
  const double var = std::max(0.0, (s2.value() - s1.value() * s1.value() / nn) / (nn - 1.0));
  return {var, std::sqrt(2.0 / (nn - 1.0)) * var, n};
}

void SpectrumConfig::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(sample_rate) || !positive(span) || !positive(rbw) || !positive(vbw) || !std::isfinite(center)) {
    throw std::invalid_argument("spectrum settings must be positive and finite");
  }
  if (rbw > span) throw std::invalid_argument("rbw must not exceed span");
  if (vbw > rbw) throw std::invalid_argument("vbw must not exceed rbw");
  if (center - span / 2 < 0.0 || center + span / 2 > sample_rate / 2) {
    throw std::invalid_argument("analysis band must lie within [0, sample_rate / 2]");
  }
}

std::size_t SpectrumConfig::segment_length() const {
  // A Hann window's equivalent noise bandwidth is 1.5 bins.
  return static_cast<std::size_t>(std::llround(1.5 * sample_rate / rbw));
}

std::size_t SpectrumConfig::video_frames() const {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(rbw / vbw - 1e-9)));
}

std::vector<double> synthesize_photocurrent(double noise_variance, const ToneSignal& signal,
                                            const SpectrumConfig& cfg, std::size_t n_samples, std::uint64_t seed) {
  if (!(cfg.sample_rate >= 4.0 * signal.freq)) {
    throw std::invalid_argument("sample rate must be at least four times the tone frequency");
  }
  if (!std::isfinite(noise_variance) || noise_variance < 0.0) {
    throw std::invalid_argument("noise variance must be finite and >= 0");
  }
  if (!std::isfinite(signal.depth) || !(signal.freq > 0.0)) {
    throw std::invalid_argument("tone depth and frequency must be finite, frequency positive");
  }
  if (!signal.bits.empty() && signal.samples_per_bit == 0) {
    throw std::invalid_argument("keyed tone needs samples_per_bit > 0");
  }
  std::vector<double> out(n_samples);
  const double sigma = std::sqrt(noise_variance);
  const double omega = 2.0 * std::numbers::pi * signal.freq / cfg.sample_rate;
  for_each_chunk(chunk_count(n_samples), 1, [&](std::size_t k) {
    auto engine = chunk_engine(seed, k);
    std::normal_distribution<double> normal;
    const std::size_t end = std::min(n_samples, (k + 1) * kChunkSize);
    for (std::size_t s = k * kChunkSize; s < end; ++s) {
      double on = 1.0;
      if (!signal.bits.empty()) {
        const std::size_t bit = s / signal.samples_per_bit;
        on = (bit < signal.bits.size() && signal.bits[bit]) ? 1.0 : 0.0;
      }
      out[s] = sigma * normal(engine) + on * signal.depth * std::sin(omega * static_cast<double>(s));
    }
  });
  return out;
}

std::vector<double> SpectrumTrace::psd_db() const {
  std::vector<double> out(psd_rel_snl.size());
  std::transform(psd_rel_snl.begin(), psd_rel_snl.end(), out.begin(),
                 [](double v) { return 10.0 * std::log10(std::max(v, 1e-300)); });
  return out;
}

double SpectrumTrace::band_power() const {
  // One-sided density of unit-variance white noise is 2 / sample_rate per Hz.
  CompensatedSum acc;
  for (double v : psd_rel_snl) acc.add(v);
  return acc.value() * 2.0 / sample_rate * bin_width_hz;
}

double SpectrumTrace::floor_level(double exclude_center, double exclude_halfwidth) const {
  CompensatedSum acc;
  std::size_t count = 0;
  for (std::size_t k = 0; k < psd_rel_snl.size(); ++k) {
    if (exclude_halfwidth >= 0.0 && std::abs(freq_hz[k] - exclude_center) <= exclude_halfwidth) continue;
    acc.add(psd_rel_snl[k]);
    ++count;
  }
  if (count == 0) throw std::invalid_argument("no bins left outside the excluded band");
  return acc.value() / static_cast<double>(count);
}

std::size_t SpectrumTrace::peak_index() const {
  if (psd_rel_snl.empty()) throw std::invalid_argument("empty trace");
  return static_cast<std::size_t>(std::max_element(psd_rel_snl.begin(), psd_rel_snl.end()) - psd_rel_snl.begin());
}

SpectrumTrace spectrum_estimate(std::span<const double> series, const SpectrumConfig& cfg) {
  cfg.validate();
  const std::size_t seg = cfg.segment_length();
  if (seg < 4) throw std::invalid_argument("rbw too wide for the sample rate");
  const std::size_t frames = series.size() / seg;
  if (frames < 10) throw std::invalid_argument("series too short: need at least 10 RBW segments");
  const std::size_t used = std::min(frames, cfg.video_frames());
  const std::size_t first = frames - used;

  std::vector<double> window(seg);
  double window_power = 0.0;
  for (std::size_t n = 0; n < seg; ++n) {
    window[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(seg));
    window_power += window[n] * window[n];
  }

  const std::size_t bins = seg / 2 + 1;
  double* in = fftw_alloc_real(seg);
  fftw_complex* out = fftw_alloc_complex(bins);
  fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(seg), in, out, FFTW_ESTIMATE);

  std::vector<CompensatedSum> acc(bins);
  for (std::size_t f = first; f < frames; ++f) {
    const double* src = series.data() + f * seg;
    for (std::size_t n = 0; n < seg; ++n) in[n] = src[n] * window[n];
    fftw_execute(plan);
    for (std::size_t k = 0; k < bins; ++k) acc[k].add(out[k][0] * out[k][0] + out[k][1] * out[k][1]);
  }
  fftw_destroy_plan(plan);
  fftw_free(in);
  fftw_free(out);

  SpectrumTrace trace;
  trace.sample_rate = cfg.sample_rate;
  trace.bin_width_hz = cfg.sample_rate / static_cast<double>(seg);
  const double lo = cfg.center - cfg.span / 2, hi = cfg.center + cfg.span / 2;
  for (std::size_t k = 0; k < bins; ++k) {
    const double f = static_cast<double>(k) * trace.bin_width_hz;
    if (f < lo - 1e-9 || f > hi + 1e-9) continue;
    // Relative to the SNL density: |X|^2 / sum(w^2) reads the per-sample
    // variance for white noise; DC and Nyquist are not folded.
    const bool edge = (k == 0) || (seg % 2 == 0 && k == bins - 1);
    double level = acc[k].value() / static_cast<double>(used) / window_power;
    if (edge) level *= 0.5;
    trace.freq_hz.push_back(f);
    trace.psd_rel_snl.push_back(level);
  }
  return trace;
}

WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0 || successes > trials) throw std::invalid_argument("invalid binomial counts");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double center = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z / (1 + z2 / n) * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
  // The bounds touch 0 and 1 exactly when no or all trials succeed.
  return {successes == 0 ? 0.0 : std::max(0.0, center - half), successes == trials ? 1.0 : std::min(1.0, center + half)};
}

BpcmResult bpcm_roundtrip(const std::vector<bool>& bits, double noise_variance, double depth, std::uint64_t seed,
                          const BpcmConfig& cfg) {
  if (bits.empty()) throw std::invalid_argument("bit sequence is empty");
  if (!(depth > 0.0) || !std::isfinite(depth)) throw std::invalid_argument("modulation depth must be > 0");
  if (cfg.samples_per_bit == 0) throw std::invalid_argument("samples_per_bit must be positive");

  SpectrumConfig sc;
  sc.sample_rate = cfg.sample_rate;
  const ToneSignal tone{cfg.freq, depth, bits, cfg.samples_per_bit};
  const std::vector<double> series =
      synthesize_photocurrent(noise_variance, tone, sc, bits.size() * cfg.samples_per_bit, seed);

  const double omega = 2.0 * std::numbers::pi * cfg.freq / cfg.sample_rate;
  BpcmResult result;
  result.decoded.reserve(bits.size());
  for (std::size_t b = 0; b < bits.size(); ++b) {
    double corr = 0.0, norm = 0.0;
    for (std::size_t k = 0; k < cfg.samples_per_bit; ++k) {
      const std::size_t s = b * cfg.samples_per_bit + k;
      const double ref = std::sin(omega * static_cast<double>(s));
      corr += series[s] * ref;
      norm += ref * ref;
    }
    const bool bit = corr / norm > depth / 2;
    result.decoded.push_back(bit);
    if (bit != bits[b]) ++result.errors;
  }
  result.ber = static_cast<double>(result.errors) / static_cast<double>(bits.size());
  result.ber_interval = wilson_interval(result.errors, bits.size());
  return result;
}

}  // namespace cvdense::mc
