#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "cvdense/analysis.hpp"
#include "cvdense/circuit.hpp"
#include "cvdense/detection.hpp"
#include "cvdense/gaussian_state.hpp"
#include "cvdense/montecarlo.hpp"
#include "report.hpp"

namespace cvdense::cli {

namespace {

using nlohmann::json;

constexpr double kAgreementTol = 1e-9;

constexpr const char* kSweepColumns =
    "CSV columns:\n"
    "  r                 squeezing parameter\n"
    "  v_sum             Bob's amplitude-sum noise, SNL units\n"
    "  v_diff            Bob's phase-difference noise, SNL units\n"
    "  v_sum_helped      amplitude-sum noise with Claire's current fed forward at --gain\n"
    "  v_sum_helped_opt  the same at the optimal gain\n"
    "  g_opt             optimal feed-forward gain\n";

constexpr const char* kCapacityColumns =
    "CSV columns (capacities in nats):\n"
    "  nbar         mean photon number per mode\n"
    "  c_helped     dense-coding capacity with Claire's help\n"
    "  c_unhelped   dense-coding capacity without help\n"
    "  c_coherent   ln(1 + nbar), ideal coherent-state channel\n"
    "  c_squeezed   ln(1 + 2 nbar), ideal squeezed-state channel\n";

constexpr const char* kSpectrumColumns =
    "CSV columns:\n"
    "  freq_hz          bin centre frequency\n"
    "  psd_db_rel_snl   power spectral density in dB relative to the shot-noise level\n";

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::vector<double> make_grid(double lo, double hi, double step) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(step > 0.0) || hi < lo) {
    throw std::invalid_argument("grid needs finite min <= max and step > 0");
  }
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> grid(n);
  for (std::size_t k = 0; k < n; ++k) grid[k] = lo + static_cast<double>(k) * step;
  return grid;
}

void add_param_flags(CLI::App* sub, analysis::ExperimentParams& p) {
  sub->add_option("--r", p.r, "Squeezing parameter r")->capture_default_str();
  sub->add_option("--xi1-sq", p.xi1_sq, "Propagation efficiency of c1 and c2")->capture_default_str();
  sub->add_option("--xi2-sq", p.xi2_sq, "Propagation efficiency of c3")->capture_default_str();
  sub->add_option("--eta-sq", p.eta_sq, "Detector quantum efficiency")->capture_default_str();
  sub->add_option("--gain", p.gain, "Feed-forward gain of Claire's current")->capture_default_str();
}

struct Emitter {
  std::ostream& out;
  std::string path;

  void write(const std::string& text) const {
    if (path.empty()) {
      out << text;
      return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open output file " + path);
    file << text;
  }
};

double max_gap(const detection::NoiseBudget& a, const detection::NoiseBudget& b) {
  return std::max({std::abs(a.v_sum - b.v_sum), std::abs(a.v_diff - b.v_diff),
                   std::abs(a.v_sum_helped - b.v_sum_helped)});
}

// Detected three-mode state of the tripartite setup and its three photocurrent forms.
struct DetectedSetup {
  GaussianState state;
  QuadratureForm sum, diff, helped;
};

DetectedSetup detected_setup(const analysis::ExperimentParams& p) {
  const circuit::PaperParams pp = p.paper_params();
  const GaussianState raw = circuit::run_circuit(circuit::build_paper_setup(pp));
  const GaussianState det = detection::apply_efficiency(raw, {0, 1, 2}, pp.eta());
  const double h = std::numbers::sqrt2 / 2.0;
  const auto zero = QuadratureForm::zero(3);
  const QuadratureForm sum = zero.with_x(0, h).with_x(1, h);
  const QuadratureForm diff = zero.with_y(0, h).with_y(1, -h);
  const QuadratureForm helped = sum.with_x(2, detection::electronic_gain(pp.gain, pp.xi1(), pp.xi2()));
  return {det, sum, diff, helped};
}

int cmd_paper_run(const analysis::ExperimentParams& p, const std::vector<double>& nbars, const Emitter& emit,
                  std::ostream& err) {
  RunReport report;
  report.params = p;
  report.closed_form = analysis::closed_form_variances(p);
  const circuit::PaperParams pp = p.paper_params();
  const circuit::CircuitSpec spec = circuit::build_paper_setup(pp);
  const GaussianState state = circuit::run_circuit(spec);
  report.circuit = detection::measure_budget(state, spec, pp.gain, pp.xi1(), pp.xi2());
  report.max_disagreement = max_gap(report.closed_form, *report.circuit);
  report.g_opt = analysis::optimal_gain(p);
  report.v_sum_helped_opt = analysis::variance_vs_gain(p, report.g_opt);
  for (double n : nbars) report.capacities.push_back(analysis::channel_capacities(p.with_nbar(n)));
  report.provenance.netlist_hash = fnv1a_hex(circuit::render_netlist(spec));
  emit.write(to_json(report).dump(2) + "\n");
  if (!(report.max_disagreement <= kAgreementTol)) {
    err << "error: circuit engine and closed forms disagree by " << report.max_disagreement << "\n";
    return 1;
  }
  return 0;
}

int cmd_simulate(const std::string& path, const analysis::ExperimentParams& p, const Emitter& emit) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot read netlist " + path);
  std::stringstream buf;
  buf << file.rdbuf();
  const std::string text = buf.str();
  const circuit::CircuitSpec spec = circuit::parse_netlist(text);
  const GaussianState state = circuit::run_circuit(spec);

  json j;
  j["n_modes"] = spec.n_modes;
  j["mean"] = std::vector<double>(state.mean().data(), state.mean().data() + state.mean().size());
  json cov = json::array();
  for (Eigen::Index row = 0; row < state.cov().rows(); ++row) {
    std::vector<double> values(static_cast<std::size_t>(state.cov().cols()));
    for (Eigen::Index col = 0; col < state.cov().cols(); ++col) values[static_cast<std::size_t>(col)] = state.cov()(row, col);
    cov.push_back(values);
  }
  j["cov"] = cov;
  const Eigen::VectorXd nu = symplectic_eigenvalues(state);
  j["symplectic_eigenvalues"] = std::vector<double>(nu.data(), nu.data() + nu.size());
  const bool has_bell = std::any_of(spec.detectors.begin(), spec.detectors.end(), [](const circuit::Detector& d) {
    return std::holds_alternative<circuit::BellDetector>(d);
  });
  j["budget"] = has_bell ? to_json(detection::measure_budget(state, spec, p.gain, std::sqrt(p.xi1_sq), std::sqrt(p.xi2_sq)))
                         : json(nullptr);
  j["provenance"] = {{"tool", kToolName}, {"tool_version", kToolVersion}, {"netlist_hash", fnv1a_hex(text)}};
  emit.write(j.dump(2) + "\n");
  return 0;
}

int cmd_sweep_r(const analysis::ExperimentParams& p, const std::vector<double>& grid, const Emitter& emit) {
  std::ostringstream csv;
  csv << "r,v_sum,v_diff,v_sum_helped,v_sum_helped_opt,g_opt\n";
  for (const auto& row : analysis::sweep_r(p, grid)) {
    csv << fmt6(row.r) << ',' << fmt6(row.v_sum) << ',' << fmt6(row.v_diff) << ',' << fmt6(row.v_sum_helped) << ','
        << fmt6(row.v_sum_helped_opt) << ',' << fmt6(row.g_opt) << '\n';
  }
  emit.write(csv.str());
  return 0;
}

int cmd_capacity(const analysis::ExperimentParams& p, const std::vector<double>& grid, const Emitter& emit) {
  std::ostringstream csv;
  csv << "nbar,c_helped,c_unhelped,c_coherent,c_squeezed\n";
  for (const auto& c : analysis::sweep_nbar(p, grid)) {
    csv << fmt6(c.nbar) << ',' << fmt6(c.c_helped) << ',' << fmt6(c.c_unhelped) << ',' << fmt6(c.c_coherent) << ','
        << fmt6(c.c_squeezed) << '\n';
  }
  emit.write(csv.str());
  return 0;
}

int cmd_thresholds(const analysis::ExperimentParams& p, const Emitter& emit) {
  const analysis::Thresholds t = analysis::capacity_thresholds(p);
  json j = {{"params", to_json(p)},
            {"coherent_helped", t.coherent_helped},
            {"coherent_unhelped", t.coherent_unhelped},
            {"squeezed_helped", t.squeezed_helped}};
  emit.write(j.dump(2) + "\n");
  return 0;
}

int cmd_correct(const std::vector<double>& measured_db, double enl_db, const Emitter& emit) {
  const double enl = detection::from_db(enl_db);
  json rows = json::array();
  std::vector<double> corrected;
  for (double m : measured_db) {
    const double c = detection::to_db(detection::enl_correct(detection::from_db(m), enl));
    corrected.push_back(c);
    rows.push_back({{"measured_db", m}, {"corrected_db", c}});
  }
  json j = {{"enl_db", enl_db}, {"corrections", rows}};
  if (measured_db.size() == 2) {
    j["measured_gap_db"] = std::abs(measured_db[0] - measured_db[1]);
    j["corrected_gap_db"] = std::abs(corrected[0] - corrected[1]);
  }
  emit.write(j.dump(2) + "\n");
  return 0;
}

int cmd_montecarlo(const analysis::ExperimentParams& p, std::uint64_t seed, std::size_t samples, unsigned threads,
                   const Emitter& emit) {
  const DetectedSetup setup = detected_setup(p);
  json currents = json::object();
  const std::pair<const char*, const QuadratureForm*> forms[] = {
      {"v_sum", &setup.sum}, {"v_diff", &setup.diff}, {"v_sum_helped", &setup.helped}};
  std::uint64_t stream = 0;
  for (const auto& [name, form] : forms) {
    const double analytic = variance_of(setup.state, *form);
    const mc::VarianceEstimate est = mc::sample_variance(setup.state, *form, samples, seed + stream++, threads);
    const double z = (est.variance - analytic) / est.std_error;
    currents[name] = {{"analytic", analytic},
                      {"estimate", est.variance},
                      {"std_error", est.std_error},
                      {"z_score", z},
                      {"within_3_sigma", std::abs(z) <= 3.0}};
  }
  json j = {{"params", to_json(p)},
            {"samples", samples},
            {"currents", currents},
            {"provenance", {{"tool", kToolName}, {"tool_version", kToolVersion}, {"seed", seed}}}};
  emit.write(j.dump(2) + "\n");
  return 0;
}

struct SpectrumArgs {
  double noise = 0.4699;
  std::optional<double> noise_db;
  double depth = 0.0;
  double tone_freq = 2e6;
  std::size_t samples = 0;
  std::uint64_t seed = 1;
  mc::SpectrumConfig cfg;
};

int cmd_spectrum(const SpectrumArgs& a, const Emitter& emit) {
  const double noise = a.noise_db ? detection::from_db(*a.noise_db) : a.noise;
  const std::size_t n = a.samples > 0 ? a.samples : a.cfg.segment_length() * std::max<std::size_t>(10, a.cfg.video_frames());
  mc::ToneSignal tone;
  tone.freq = a.tone_freq;
  tone.depth = a.depth;
  const std::vector<double> series = mc::synthesize_photocurrent(noise, tone, a.cfg, n, a.seed);
  const mc::SpectrumTrace trace = mc::spectrum_estimate(series, a.cfg);
  const std::vector<double> db = trace.psd_db();
  std::ostringstream csv;
  csv << "freq_hz,psd_db_rel_snl\n";
  for (std::size_t k = 0; k < db.size(); ++k) csv << fmt6(trace.freq_hz[k]) << ',' << fmt6(db[k]) << '\n';
  emit.write(csv.str());
  return 0;
}

struct BerArgs {
  double noise = 0.4699;
  double depth = 0.5;
  std::size_t bits = 10000;
  std::uint64_t seed = 1;
  mc::BpcmConfig cfg;
};

int cmd_ber(const BerArgs& a, const Emitter& emit) {
  if (a.bits == 0) throw std::invalid_argument("--bits must be positive");
  auto engine = mc::chunk_engine(a.seed, ~std::uint64_t{0});
  std::bernoulli_distribution coin(0.5);
  std::vector<bool> bits(a.bits);
  for (std::size_t k = 0; k < bits.size(); ++k) bits[k] = coin(engine);
  const mc::BpcmResult res = mc::bpcm_roundtrip(bits, a.noise, a.depth, a.seed, a.cfg);
  json j = {{"noise_variance", a.noise},
            {"depth", a.depth},
            {"bits", a.bits},
            {"samples_per_bit", a.cfg.samples_per_bit},
            {"errors", res.errors},
            {"ber", res.ber},
            {"ber_wilson95", {res.ber_interval.lo, res.ber_interval.hi}},
            {"provenance", {{"tool", kToolName}, {"tool_version", kToolVersion}, {"seed", a.seed}}}};
  emit.write(j.dump(2) + "\n");
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tripartite entanglement and controlled dense coding simulator", kToolName};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  std::string out_path;
  app.add_option("--out", out_path, "Write output to this file instead of standard output");

  analysis::ExperimentParams params;
  std::vector<double> nbars;
  double lo = 0.0, hi = 2.0, step = 0.05;
  std::vector<double> grid_values;
  std::string netlist;
  std::vector<double> measured_db;
  double enl_db = 0.0;
  std::uint64_t seed = 20031;
  std::size_t samples = 1000000;
  unsigned threads = 1;
  SpectrumArgs spec_args;
  BerArgs ber_args;

  std::function<int(const Emitter&)> action;

  auto* paper = app.add_subcommand("paper-run", "Noise budget of the tripartite setup from closed forms and the circuit engine (JSON)");
  add_param_flags(paper, params);
  paper->add_option("--nbar", nbars, "Also report capacities at these mean photon numbers");
  paper->callback([&] { action = [&](const Emitter& e) { return cmd_paper_run(params, nbars, e, err); }; });

  auto* sim = app.add_subcommand("simulate", "Run a netlist; print state, symplectic eigenvalues and detector budget (JSON)");
  sim->add_option("netlist", netlist, "Netlist file")->required();
  add_param_flags(sim, params);
  sim->callback([&] { action = [&](const Emitter& e) { return cmd_simulate(netlist, params, e); }; });

  auto* sweep = app.add_subcommand("sweep-r", "Noise variances versus squeezing (CSV)");
  add_param_flags(sweep, params);
  sweep->add_option("--r-min", lo, "First r")->capture_default_str();
  sweep->add_option("--r-max", hi, "Last r")->capture_default_str();
  sweep->add_option("--r-step", step, "Grid step")->capture_default_str();
  sweep->footer(kSweepColumns);
  sweep->callback([&] { action = [&](const Emitter& e) { return cmd_sweep_r(params, make_grid(lo, hi, step), e); }; });

  double n_lo = 1.0, n_hi = 20.0, n_step = 0.5;
  auto* cap = app.add_subcommand("capacity", "Channel capacities versus mean photon number (CSV)");
  add_param_flags(cap, params);
  cap->add_option("--nbar", grid_values, "Explicit mean photon numbers (overrides the grid)");
  cap->add_option("--nbar-min", n_lo, "First nbar")->capture_default_str();
  cap->add_option("--nbar-max", n_hi, "Last nbar")->capture_default_str();
  cap->add_option("--nbar-step", n_step, "Grid step")->capture_default_str();
  cap->footer(kCapacityColumns);
  cap->callback([&] {
    action = [&](const Emitter& e) {
      return cmd_capacity(params, grid_values.empty() ? make_grid(n_lo, n_hi, n_step) : grid_values, e);
    };
  });

  auto* thr = app.add_subcommand("thresholds", "Mean photon numbers where dense coding overtakes the ideal baselines (JSON)");
  add_param_flags(thr, params);
  thr->callback([&] { action = [&](const Emitter& e) { return cmd_thresholds(params, e); }; });

  auto* corr = app.add_subcommand("correct", "Remove the electronics noise floor from SNL-relative levels (JSON)");
  corr->add_option("--measured-db", measured_db, "Measured level(s), dB relative to the measured SNL")->required();
  corr->add_option("--enl-db", enl_db, "Electronics noise level, dB relative to the measured SNL")->required();
  corr->callback([&] { action = [&](const Emitter& e) { return cmd_correct(measured_db, enl_db, e); }; });

  auto* mcs = app.add_subcommand("montecarlo", "Sampled variances of the three photocurrents against the exact values (JSON)");
  add_param_flags(mcs, params);
  mcs->add_option("--seed", seed, "RNG seed")->capture_default_str();
  mcs->add_option("--samples", samples, "Samples per current")->capture_default_str()->check(CLI::Range(2ULL, 1ULL << 40));
  mcs->add_option("--threads", threads, "Worker threads (results do not depend on this)")->capture_default_str();
  mcs->callback([&] { action = [&](const Emitter& e) { return cmd_montecarlo(params, seed, samples, threads, e); }; });

  auto* spec = app.add_subcommand("spectrum", "Spectrum-analyzer trace of a synthesized photocurrent (CSV)");
  spec->add_option("--noise", spec_args.noise, "Noise variance, SNL units")->capture_default_str();
  spec->add_option("--noise-db", spec_args.noise_db, "Noise level in dB relative to SNL (overrides --noise)");
  spec->add_option("--depth", spec_args.depth, "Tone amplitude")->capture_default_str();
  spec->add_option("--tone-freq", spec_args.tone_freq, "Tone frequency, Hz")->capture_default_str();
  spec->add_option("--samples", spec_args.samples, "Series length (default: enough for the video filter)");
  spec->add_option("--seed", spec_args.seed, "RNG seed")->capture_default_str();
  spec->add_option("--sample-rate", spec_args.cfg.sample_rate, "Sample rate, Hz")->capture_default_str();
  spec->add_option("--center", spec_args.cfg.center, "Centre frequency, Hz")->capture_default_str();
  spec->add_option("--span", spec_args.cfg.span, "Span, Hz")->capture_default_str();
  spec->add_option("--rbw", spec_args.cfg.rbw, "Resolution bandwidth, Hz")->capture_default_str();
  spec->add_option("--vbw", spec_args.cfg.vbw, "Video bandwidth, Hz")->capture_default_str();
  spec->footer(kSpectrumColumns);
  spec->callback([&] { action = [&](const Emitter& e) { return cmd_spectrum(spec_args, e); }; });

  auto* ber = app.add_subcommand("ber", "Binary pulse-code modulation round trip and bit error rate (JSON)");
  ber->add_option("--noise", ber_args.noise, "Noise variance, SNL units")->capture_default_str();
  ber->add_option("--depth", ber_args.depth, "Tone amplitude")->capture_default_str();
  ber->add_option("--bits", ber_args.bits, "Number of random bits")->capture_default_str();
  ber->add_option("--samples-per-bit", ber_args.cfg.samples_per_bit, "Samples per bit")->capture_default_str();
  ber->add_option("--seed", ber_args.seed, "RNG seed")->capture_default_str();
  ber->callback([&] { action = [&](const Emitter& e) { return cmd_ber(ber_args, e); }; });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    return action(Emitter{out, out_path});
  } catch (const circuit::NetlistError& e) {
    err << "error: netlist " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return 1;
}

}  // namespace cvdense::cli
