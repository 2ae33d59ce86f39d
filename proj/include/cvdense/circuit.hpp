#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cvdense/gaussian_state.hpp"

namespace cvdense::circuit {

// Mode ids in a CircuitSpec are 1-based, as written in netlists.

struct TwoModeSqueeze {
  std::size_t i, j;
  double r;
  bool operator==(const TwoModeSqueeze&) const = default;
};

struct BeamSplitter {
  std::size_t i, j;
  double t;
  bool operator==(const BeamSplitter&) const = default;
};

/// Half-wave plate followed by a polarizing splitter, reduced to its mixing
/// matrix: a beamsplitter with t = sin(2 theta).
struct HalfWavePlate {
  std::size_t i, j;
  double theta_deg;
  bool operator==(const HalfWavePlate&) const = default;
};

struct PhaseShift {
  std::size_t i;
  double phi_rad;
  bool operator==(const PhaseShift&) const = default;
};

struct Loss {
  std::size_t i;
  double xi;  // amplitude transmissivity
  bool operator==(const Loss&) const = default;
};

struct Displacement {
  std::size_t i;
  double x_s, y_s;
  bool operator==(const Displacement&) const = default;
};

using Element = std::variant<TwoModeSqueeze, BeamSplitter, HalfWavePlate, PhaseShift, Loss, Displacement>;

/// Bob's station: pi/2 phase, 50/50 mix, sum and difference photocurrents.
struct BellDetector {
  std::size_t i, j;
  double eta;  // amplitude efficiency
  bool operator==(const BellDetector&) const = default;
};

/// Direct amplitude-quadrature detection (Claire).
struct AmplitudeDetector {
  std::size_t i;
  double eta;
  bool operator==(const AmplitudeDetector&) const = default;
};

using Detector = std::variant<BellDetector, AmplitudeDetector>;

struct CircuitSpec {
  std::size_t n_modes = 1;
  std::vector<Element> elements;
  std::vector<Detector> detectors;
  bool operator==(const CircuitSpec&) const = default;
};

struct PaperParams {
  double r = 0.674;
  double xi1_sq = 0.987;  // intensity efficiency of c1, c2
  double xi2_sq = 0.937;  // intensity efficiency of c3
  double eta_sq = 0.95;   // detector quantum efficiency
  double gain = 0.70710678118654752;
  double x_s = 0.0, y_s = 0.0;  // optional signal displacement on c1

  double xi1() const;
  double xi2() const;
  double eta() const;
  void validate() const;
};

class NetlistError : public std::runtime_error {
 public:
  enum class Kind { kUnknownElement, kModeOutOfRange, kParamOutOfDomain, kMalformedNumber, kMalformedLine };

  NetlistError(Kind kind, std::size_t line, std::string param = {});

  Kind kind() const { return kind_; }
  std::size_t line() const { return line_; }
  /// Offending parameter name for kParamOutOfDomain, empty otherwise.
  const std::string& param() const { return param_; }

 private:
  Kind kind_;
  std::size_t line_;
  std::string param_;
};

const char* to_string(NetlistError::Kind kind);

/// Parses the line-oriented netlist grammar:
///
///   modes N
///   tms i j r | bs i j t | hwp i j theta_deg | ps i phi_rad
///   loss i xi | disp i xs ys
///   detect bell i j eta | detect x i eta
///
/// '#' starts a comment. The first non-comment line must be `modes N`.
/// Either the whole text parses or a NetlistError is thrown.
CircuitSpec parse_netlist(std::string_view text);

/// Canonical text form; parse_netlist(render_netlist(s)) == s.
std::string render_netlist(const CircuitSpec& spec);

/// Checks the invariants parse_netlist enforces; throws std::invalid_argument.
void validate(const CircuitSpec& spec);

/// Applies the elements in order to the vacuum. Detectors are ignored.
GaussianState run_circuit(const CircuitSpec& spec);

/// 45 deg - asin((sqrt2 - 1) / sqrt6) / 2, in degrees.
double tripartite_hwp_angle_deg();
double hwp_transmission(double theta_deg);

/// Three-mode setup: EPR source on modes 1 and 2, the wave-plate split that
/// leaves c1 in mode 1, a 50/50 split of the remaining beam with a vacuum in
/// mode 3 giving c2 (mode 2) and c3 (mode 3), propagation losses, optional
/// signal displacement on c1, then Bob's Bell detector on (1, 2) and Claire's
/// amplitude detector on 3.
CircuitSpec build_paper_setup(const PaperParams& params);

}  // namespace cvdense::circuit
