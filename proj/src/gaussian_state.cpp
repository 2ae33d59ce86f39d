#include "cvdense/gaussian_state.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace cvdense {

namespace {

void check_mode(std::size_t n_modes, std::size_t i) {
  if (i >= n_modes) {
    throw std::out_of_range("mode " + std::to_string(i) + " out of range for " +
                            std::to_string(n_modes) + "-mode state");
  }
}

void check_pair(std::size_t n_modes, std::size_t i, std::size_t j) {
  check_mode(n_modes, i);
  check_mode(n_modes, j);
  if (i == j) {
    throw std::invalid_argument("two-mode element needs distinct modes");
  }
}

void check_finite(double v, const char* name) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument(std::string(name) + " must be finite");
  }
}

}  // namespace

GaussianState::GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
  if (mean_.size() == 0 || mean_.size() % 2 != 0) {
    throw std::invalid_argument("mean must have even, nonzero length");
  }
  if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size()) {
    throw std::invalid_argument("covariance shape does not match mean");
  }
  if (!mean_.allFinite() || !cov_.allFinite()) {
    throw std::invalid_argument("state has non-finite entries");
  }
  const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
  if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("covariance is not symmetric");
  }
  // Remove rounding asymmetry so downstream solvers see an exact symmetric matrix.
  cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
}

QuadratureForm::QuadratureForm(Eigen::VectorXd coefficients) : coefficients_(std::move(coefficients)) {
  if (coefficients_.size() == 0 || coefficients_.size() % 2 != 0) {
    throw std::invalid_argument("quadrature form must have even, nonzero length");
  }
  if (!coefficients_.allFinite()) {
    throw std::invalid_argument("quadrature form has non-finite coefficients");
  }
}

QuadratureForm QuadratureForm::zero(std::size_t n_modes) {
  if (n_modes == 0) {
    throw std::invalid_argument("n_modes must be positive");
  }
  return QuadratureForm(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(2 * n_modes)));
}

QuadratureForm QuadratureForm::with_x(std::size_t mode, double coefficient) const {
  check_mode(n_modes(), mode);
  Eigen::VectorXd c = coefficients_;
  c[static_cast<Eigen::Index>(2 * mode)] += coefficient;
  return QuadratureForm(std::move(c));
}

QuadratureForm QuadratureForm::with_y(std::size_t mode, double coefficient) const {
  check_mode(n_modes(), mode);
  Eigen::VectorXd c = coefficients_;
  c[static_cast<Eigen::Index>(2 * mode + 1)] += coefficient;
  return QuadratureForm(std::move(c));
}

QuadratureForm QuadratureForm::scaled(double factor) const {
  return QuadratureForm(coefficients_ * factor);
}

QuadratureForm QuadratureForm::plus(const QuadratureForm& other) const {
  if (other.coefficients_.size() != coefficients_.size()) {
    throw std::invalid_argument("quadrature forms have different mode counts");
  }
  return QuadratureForm(coefficients_ + other.coefficients_);
}

GaussianState vacuum_state(std::size_t n_modes) {
  if (n_modes == 0) {
    throw std::invalid_argument("n_modes must be positive");
  }
  const auto d = static_cast<Eigen::Index>(2 * n_modes);
  return GaussianState(Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Identity(d, d));
}

Eigen::MatrixXd symplectic_form(std::size_t n_modes) {
  const auto d = static_cast<Eigen::Index>(2 * n_modes);
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index k = 0; k < d; k += 2) {
    omega(k, k + 1) = 1.0;
    omega(k + 1, k) = -1.0;
  }
  return omega;
}

Eigen::MatrixXd two_mode_squeeze_matrix(std::size_t n_modes, std::size_t i, std::size_t j, double r) {
  check_pair(n_modes, i, j);
  check_finite(r, "squeeze parameter");
  if (r < 0) {
    throw std::invalid_argument("squeeze parameter must be >= 0");
  }
  const auto d = static_cast<Eigen::Index>(2 * n_modes);
  const auto xi = static_cast<Eigen::Index>(2 * i), xj = static_cast<Eigen::Index>(2 * j);
  const double c = std::cosh(r), s = std::sinh(r);
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d, d);
  m(xi, xi) = c;
  m(xj, xj) = c;
  m(xi, xj) = -s;
  m(xj, xi) = -s;
  m(xi + 1, xi + 1) = c;
  m(xj + 1, xj + 1) = c;
  m(xi + 1, xj + 1) = s;
  m(xj + 1, xi + 1) = s;
  return m;
}

Eigen::MatrixXd beamsplitter_matrix(std::size_t n_modes, std::size_t i, std::size_t j, double t) {
  check_pair(n_modes, i, j);
  check_finite(t, "transmission");
  if (t < -1.0 || t > 1.0) {
    throw std::invalid_argument("beamsplitter transmission must lie in [-1, 1]");
  }
  const double rho = std::sqrt(std::max(0.0, 1.0 - t * t));
  const auto d = static_cast<Eigen::Index>(2 * n_modes);
  const auto xi = static_cast<Eigen::Index>(2 * i), xj = static_cast<Eigen::Index>(2 * j);
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d, d);
  for (Eigen::Index q = 0; q < 2; ++q) {
    m(xi + q, xi + q) = t;
    m(xi + q, xj + q) = rho;
    m(xj + q, xi + q) = -rho;
    m(xj + q, xj + q) = t;
  }
  return m;
}

Eigen::MatrixXd phase_shift_matrix(std::size_t n_modes, std::size_t i, double phi) {
  check_mode(n_modes, i);
  check_finite(phi, "phase");
  const auto d = static_cast<Eigen::Index>(2 * n_modes);
  const auto x = static_cast<Eigen::Index>(2 * i);
  const double c = std::cos(phi), s = std::sin(phi);
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d, d);
  m(x, x) = c;
  m(x, x + 1) = -s;
  m(x + 1, x) = s;
  m(x + 1, x + 1) = c;
  return m;
}

GaussianState apply_symplectic(const GaussianState& state, const Eigen::MatrixXd& s) {
  if (s.rows() != static_cast<Eigen::Index>(state.dim()) || s.cols() != s.rows()) {
    throw std::invalid_argument("transform dimension does not match state");
  }
  return GaussianState(s * state.mean(), s * state.cov() * s.transpose());
}

GaussianState two_mode_squeeze(const GaussianState& state, std::size_t i, std::size_t j, double r) {
  return apply_symplectic(state, two_mode_squeeze_matrix(state.n_modes(), i, j, r));
}

GaussianState beamsplitter(const GaussianState& state, std::size_t i, std::size_t j, double t) {
  return apply_symplectic(state, beamsplitter_matrix(state.n_modes(), i, j, t));
}

GaussianState phase_shift(const GaussianState& state, std::size_t i, double phi) {
  return apply_symplectic(state, phase_shift_matrix(state.n_modes(), i, phi));
}

GaussianState loss(const GaussianState& state, std::size_t i, double xi) {
  check_mode(state.n_modes(), i);
  check_finite(xi, "transmissivity");
  if (xi < 0.0 || xi > 1.0) {
    throw std::invalid_argument("loss transmissivity must lie in [0, 1]");
  }
  const auto x = static_cast<Eigen::Index>(2 * i);
  Eigen::VectorXd mean = state.mean();
  Eigen::MatrixXd cov = state.cov();
  mean.segment<2>(x) *= xi;
  cov.middleRows<2>(x) *= xi;
  cov.middleCols<2>(x) *= xi;
  cov(x, x) += 1.0 - xi * xi;
  cov(x + 1, x + 1) += 1.0 - xi * xi;
  return GaussianState(std::move(mean), std::move(cov));
}

GaussianState displace(const GaussianState& state, std::size_t i, double x_s, double y_s) {
  check_mode(state.n_modes(), i);
  check_finite(x_s, "displacement X");
  check_finite(y_s, "displacement Y");
  Eigen::VectorXd mean = state.mean();
  mean[static_cast<Eigen::Index>(2 * i)] += x_s;
  mean[static_cast<Eigen::Index>(2 * i + 1)] += y_s;
  return GaussianState(std::move(mean), state.cov());
}

double variance_of(const GaussianState& state, const QuadratureForm& form) {
  if (form.coefficients().size() != static_cast<Eigen::Index>(state.dim())) {
    throw std::invalid_argument("quadrature form dimension does not match state");
  }
  const Eigen::VectorXd& c = form.coefficients();
  return c.dot(state.cov() * c);
}

double mean_of(const GaussianState& state, const QuadratureForm& form) {
  if (form.coefficients().size() != static_cast<Eigen::Index>(state.dim())) {
    throw std::invalid_argument("quadrature form dimension does not match state");
  }
  return form.coefficients().dot(state.mean());
}

Eigen::VectorXd symplectic_eigenvalues(const GaussianState& state) {
  // i V^1/2 Omega V^1/2 is Hermitian with eigenvalues +-nu_k. Long double keeps
  // nu ~ 1 resolvable next to strongly squeezed quadratures.
  using MatrixL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using MatrixC = Eigen::Matrix<std::complex<long double>, Eigen::Dynamic, Eigen::Dynamic>;
  const MatrixL cov = state.cov().cast<long double>();
  Eigen::SelfAdjointEigenSolver<MatrixL> cov_eig(cov);
  if (cov_eig.info() != Eigen::Success || cov_eig.eigenvalues().minCoeff() <= 0.0L) {
    throw std::invalid_argument("covariance is not positive definite");
  }
  const MatrixL root = cov_eig.operatorSqrt();
  const MatrixL a = root * symplectic_form(state.n_modes()).cast<long double>() * root;
  const MatrixC h = std::complex<long double>(0.0L, 1.0L) * a.cast<std::complex<long double>>();
  Eigen::SelfAdjointEigenSolver<MatrixC> eig(h, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();  // ascending: -nu_max ... -nu_min, nu_min ... nu_max
  const auto n = static_cast<Eigen::Index>(state.n_modes());
  Eigen::VectorXd nu(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    nu[k] = static_cast<double>(0.5L * (ev[n + k] - ev[n - 1 - k]));
  }
  return nu;
}

}  // namespace cvdense
