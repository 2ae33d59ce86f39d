#include "cvdense/circuit.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

namespace cvdense::circuit {

namespace {

using Kind = NetlistError::Kind;

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    if (pos >= line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
    out.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

class LineParser {
 public:
  LineParser(std::vector<std::string_view> tokens, std::size_t line, std::size_t n_modes)
      : tokens_(std::move(tokens)), line_(line), n_modes_(n_modes) {}

  void expect_arity(std::size_t n) const {
    if (tokens_.size() != n) throw NetlistError(Kind::kMalformedLine, line_);
  }

  double number(std::size_t k) const {
    std::string_view tok = tokens_[k];
    double v = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || !std::isfinite(v)) {
      throw NetlistError(Kind::kMalformedNumber, line_);
    }
    return v;
  }

  std::size_t integer(std::size_t k) const {
    std::string_view tok = tokens_[k];
    unsigned long long v = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
      throw NetlistError(Kind::kMalformedNumber, line_);
    }
    return static_cast<std::size_t>(v);
  }

  std::size_t mode(std::size_t k) const {
    std::size_t m = integer(k);
    if (m < 1 || m > n_modes_) throw NetlistError(Kind::kModeOutOfRange, line_);
    return m;
  }

  void require(bool ok, const char* param) const {
    if (!ok) throw NetlistError(Kind::kParamOutOfDomain, line_, param);
  }

  std::size_t size() const { return tokens_.size(); }
  std::string_view token(std::size_t k) const { return tokens_[k]; }
  std::size_t line() const { return line_; }

 private:
  std::vector<std::string_view> tokens_;
  std::size_t line_;
  std::size_t n_modes_;
};

Element parse_element(const LineParser& p) {
  const std::string_view kw = p.token(0);
  if (kw == "tms") {
    p.expect_arity(4);
    std::size_t i = p.mode(1), j = p.mode(2);
    double r = p.number(3);
    p.require(i != j, "j");
    p.require(r >= 0.0, "r");
    return TwoModeSqueeze{i, j, r};
  }
  if (kw == "bs") {
    p.expect_arity(4);
    std::size_t i = p.mode(1), j = p.mode(2);
    double t = p.number(3);
    p.require(i != j, "j");
    p.require(t >= -1.0 && t <= 1.0, "t");
    return BeamSplitter{i, j, t};
  }
  if (kw == "hwp") {
    p.expect_arity(4);
    std::size_t i = p.mode(1), j = p.mode(2);
    double theta = p.number(3);
    p.require(i != j, "j");
    return HalfWavePlate{i, j, theta};
  }
  if (kw == "ps") {
    p.expect_arity(3);
    return PhaseShift{p.mode(1), p.number(2)};
  }
  if (kw == "loss") {
    p.expect_arity(3);
    std::size_t i = p.mode(1);
    double xi = p.number(2);
    p.require(xi >= 0.0 && xi <= 1.0, "xi");
    return Loss{i, xi};
  }
  if (kw == "disp") {
    p.expect_arity(4);
    return Displacement{p.mode(1), p.number(2), p.number(3)};
  }
  throw NetlistError(Kind::kUnknownElement, p.line());
}

Detector parse_detector(const LineParser& p) {
  if (p.size() < 2) throw NetlistError(Kind::kMalformedLine, p.line());
  const std::string_view kind = p.token(1);
  if (kind == "bell") {
    p.expect_arity(5);
    std::size_t i = p.mode(2), j = p.mode(3);
    double eta = p.number(4);
    p.require(i != j, "j");
    p.require(eta >= 0.0 && eta <= 1.0, "eta");
    return BellDetector{i, j, eta};
  }
  if (kind == "x") {
    p.expect_arity(4);
    std::size_t i = p.mode(2);
    double eta = p.number(3);
    p.require(eta >= 0.0 && eta <= 1.0, "eta");
    return AmplitudeDetector{i, eta};
  }
  throw NetlistError(Kind::kUnknownElement, p.line());
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

NetlistError::NetlistError(Kind kind, std::size_t line, std::string param)
    : std::runtime_error("line " + std::to_string(line) + ": " + to_string(kind) +
                         (param.empty() ? std::string() : " (" + param + ")")),
      kind_(kind),
      line_(line),
      param_(std::move(param)) {}

const char* to_string(NetlistError::Kind kind) {
  switch (kind) {
    case Kind::kUnknownElement:
      return "UnknownElement";
    case Kind::kModeOutOfRange:
      return "ModeOutOfRange";
    case Kind::kParamOutOfDomain:
      return "ParamOutOfDomain";
    case Kind::kMalformedNumber:
      return "MalformedNumber";
    case Kind::kMalformedLine:
      return "MalformedLine";
  }
  return "?";
}

double PaperParams::xi1() const { return std::sqrt(xi1_sq); }
double PaperParams::xi2() const { return std::sqrt(xi2_sq); }
double PaperParams::eta() const { return std::sqrt(eta_sq); }

void PaperParams::validate() const {
  auto in_unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
  if (!std::isfinite(r) || r < 0.0) throw std::invalid_argument("r must be finite and >= 0");
  if (!in_unit(xi1_sq)) throw std::invalid_argument("xi1^2 must lie in [0, 1]");
  if (!in_unit(xi2_sq)) throw std::invalid_argument("xi2^2 must lie in [0, 1]");
  if (!in_unit(eta_sq)) throw std::invalid_argument("eta^2 must lie in [0, 1]");
  if (!std::isfinite(gain)) throw std::invalid_argument("gain must be finite");
  if (!std::isfinite(x_s) || !std::isfinite(y_s)) throw std::invalid_argument("signal must be finite");
}

CircuitSpec parse_netlist(std::string_view text) {
  CircuitSpec spec;
  std::optional<std::size_t> n_modes;
  bool have_bell = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto tokens = split_tokens(line);
    if (tokens.empty()) {
      if (end == text.size()) break;
      continue;
    }
    LineParser p(tokens, line_no, n_modes.value_or(0));
    if (!n_modes) {
      if (tokens[0] != "modes") throw NetlistError(Kind::kMalformedLine, line_no);
      p.expect_arity(2);
      std::size_t n = p.integer(1);
      p.require(n >= 1, "N");
      n_modes = n;
      spec.n_modes = n;
    } else if (tokens[0] == "modes") {
      throw NetlistError(Kind::kMalformedLine, line_no);
    } else if (tokens[0] == "detect") {
      Detector d = parse_detector(p);
      if (std::holds_alternative<BellDetector>(d)) {
        if (have_bell) throw NetlistError(Kind::kMalformedLine, line_no);
        have_bell = true;
      }
      spec.detectors.push_back(d);
    } else {
      spec.elements.push_back(parse_element(p));
    }
    if (end == text.size()) break;
  }
  if (!n_modes) throw NetlistError(Kind::kMalformedLine, line_no == 0 ? 1 : line_no);
  return spec;
}

std::string render_netlist(const CircuitSpec& spec) {
  std::ostringstream out;
  out << "modes " << spec.n_modes << '\n';
  for (const Element& e : spec.elements) {
    std::visit(overloaded{
                   [&](const TwoModeSqueeze& x) { out << "tms " << x.i << ' ' << x.j << ' ' << format_double(x.r); },
                   [&](const BeamSplitter& x) { out << "bs " << x.i << ' ' << x.j << ' ' << format_double(x.t); },
                   [&](const HalfWavePlate& x) {
                     out << "hwp " << x.i << ' ' << x.j << ' ' << format_double(x.theta_deg);
                   },
                   [&](const PhaseShift& x) { out << "ps " << x.i << ' ' << format_double(x.phi_rad); },
                   [&](const Loss& x) { out << "loss " << x.i << ' ' << format_double(x.xi); },
                   [&](const Displacement& x) {
                     out << "disp " << x.i << ' ' << format_double(x.x_s) << ' ' << format_double(x.y_s);
                   },
               },
               e);
    out << '\n';
  }
  for (const Detector& d : spec.detectors) {
    std::visit(overloaded{
                   [&](const BellDetector& x) {
                     out << "detect bell " << x.i << ' ' << x.j << ' ' << format_double(x.eta);
                   },
                   [&](const AmplitudeDetector& x) { out << "detect x " << x.i << ' ' << format_double(x.eta); },
               },
               d);
    out << '\n';
  }
  return out.str();
}

void validate(const CircuitSpec& spec) {
  // Round-tripping through the parser applies exactly the grammar's checks.
  try {
    (void)parse_netlist(render_netlist(spec));
  } catch (const NetlistError& e) {
    throw std::invalid_argument(std::string("invalid circuit spec: ") + e.what());
  }
}

GaussianState run_circuit(const CircuitSpec& spec) {
  validate(spec);
  GaussianState state = vacuum_state(spec.n_modes);
  for (const Element& e : spec.elements) {
    state = std::visit(overloaded{
                           [&](const TwoModeSqueeze& x) { return two_mode_squeeze(state, x.i - 1, x.j - 1, x.r); },
                           [&](const BeamSplitter& x) { return beamsplitter(state, x.i - 1, x.j - 1, x.t); },
                           [&](const HalfWavePlate& x) {
                             return beamsplitter(state, x.i - 1, x.j - 1, hwp_transmission(x.theta_deg));
                           },
                           [&](const PhaseShift& x) { return phase_shift(state, x.i - 1, x.phi_rad); },
                           [&](const Loss& x) { return loss(state, x.i - 1, x.xi); },
                           [&](const Displacement& x) { return displace(state, x.i - 1, x.x_s, x.y_s); },
                       },
                       e);
  }
  return state;
}

double tripartite_hwp_angle_deg() {
  const double split = std::asin((std::numbers::sqrt2 - 1.0) / std::sqrt(6.0));
  return 45.0 - 0.5 * split * 180.0 / std::numbers::pi;
}

double hwp_transmission(double theta_deg) {
  return std::sin(2.0 * theta_deg * std::numbers::pi / 180.0);
}

CircuitSpec build_paper_setup(const PaperParams& params) {
  params.validate();
  CircuitSpec spec;
  spec.n_modes = 3;
  spec.elements.push_back(TwoModeSqueeze{1, 2, params.r});
  // Port order (2, 1) leaves c1 = t b1 - rho b2 in mode 1 and b2' = rho b1 + t b2
  // in mode 2; with this sign the antisqueezed part cancels in the X-sum.
  spec.elements.push_back(HalfWavePlate{2, 1, tripartite_hwp_angle_deg()});
  // Vacuum enters at port 3 so that c2 + c3 = sqrt2 b2'.
  spec.elements.push_back(BeamSplitter{3, 2, std::numbers::sqrt2 / 2.0});
  spec.elements.push_back(Loss{1, params.xi1()});
  spec.elements.push_back(Loss{2, params.xi1()});
  spec.elements.push_back(Loss{3, params.xi2()});
  if (params.x_s != 0.0 || params.y_s != 0.0) {
    spec.elements.push_back(Displacement{1, params.x_s, params.y_s});
  }
  spec.detectors.push_back(BellDetector{1, 2, params.eta()});
  spec.detectors.push_back(AmplitudeDetector{3, params.eta()});
  return spec;
}

}  // namespace cvdense::circuit
