#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace cvdense {

// Quadratures are interleaved per mode: (X_0, Y_0, X_1, Y_1, ...).
// Normalization: vacuum variance is 1 in every quadrature, so a photocurrent
// variance divided by the squared norm of its coefficients is SNL-relative.
// Mode indices in this API are 0-based.

/// Mean vector and covariance matrix of an N-mode Gaussian state.
///
/// Instances are immutable; every operation below returns a new state.
class GaussianState {
 public:
  /// Throws std::invalid_argument on shape mismatch, non-finite entries, or an
  /// asymmetric covariance (tolerance 1e-12 relative to the largest entry).
  GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd cov);

  std::size_t n_modes() const { return static_cast<std::size_t>(mean_.size() / 2); }
  std::size_t dim() const { return static_cast<std::size_t>(mean_.size()); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
};

/// Real linear combination of quadratures; the measurable behind a
/// photocurrent.
class QuadratureForm {
 public:
  explicit QuadratureForm(Eigen::VectorXd coefficients);

  static QuadratureForm zero(std::size_t n_modes);

  QuadratureForm with_x(std::size_t mode, double coefficient) const;
  QuadratureForm with_y(std::size_t mode, double coefficient) const;
  QuadratureForm scaled(double factor) const;
  QuadratureForm plus(const QuadratureForm& other) const;

  std::size_t n_modes() const { return static_cast<std::size_t>(coefficients_.size() / 2); }
  const Eigen::VectorXd& coefficients() const { return coefficients_; }

  /// Variance of this form on the vacuum: the shot-noise reference.
  double snl_reference() const { return coefficients_.squaredNorm(); }

 private:
  Eigen::VectorXd coefficients_;
};

GaussianState vacuum_state(std::size_t n_modes);

/// Two-mode squeezer. On vacuum, var(X_i + X_j) = var(Y_i - Y_j) = 2 e^{-2r}.
GaussianState two_mode_squeeze(const GaussianState& state, std::size_t i, std::size_t j, double r);

/// Mixes a_i' = t a_i + rho a_j, a_j' = -rho a_i + t a_j with rho = +sqrt(1 - t^2).
GaussianState beamsplitter(const GaussianState& state, std::size_t i, std::size_t j, double t);

/// Rotates (X_i, Y_i) by phi: X' = X cos(phi) - Y sin(phi), Y' = X sin(phi) + Y cos(phi).
GaussianState phase_shift(const GaussianState& state, std::size_t i, double phi);

/// Attenuation channel with amplitude transmissivity xi (intensity xi^2).
/// The rejected fraction is replaced by vacuum.
GaussianState loss(const GaussianState& state, std::size_t i, double xi);

GaussianState displace(const GaussianState& state, std::size_t i, double x_s, double y_s);

/// c^T V c.
double variance_of(const GaussianState& state, const QuadratureForm& form);
/// c^T mean.
double mean_of(const GaussianState& state, const QuadratureForm& form);

/// Applies a 2N x 2N linear map to mean and covariance.
GaussianState apply_symplectic(const GaussianState& state, const Eigen::MatrixXd& s);

/// Symplectic eigenvalues in ascending order, one per mode. A physical state
/// has all of them >= 1. Throws std::invalid_argument if cov is not positive
/// definite.
Eigen::VectorXd symplectic_eigenvalues(const GaussianState& state);

/// Block-diagonal Omega with [[0, 1], [-1, 0]] per mode.
Eigen::MatrixXd symplectic_form(std::size_t n_modes);

Eigen::MatrixXd two_mode_squeeze_matrix(std::size_t n_modes, std::size_t i, std::size_t j, double r);
Eigen::MatrixXd beamsplitter_matrix(std::size_t n_modes, std::size_t i, std::size_t j, double t);
Eigen::MatrixXd phase_shift_matrix(std::size_t n_modes, std::size_t i, double phi);

}  // namespace cvdense
