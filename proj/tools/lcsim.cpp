// Batch front-end: reproducible linear-cluster experiments, readout
// mitigation, witness certification, readout-fluctuation studies and
// pulse-level CZ optimization, all driven by one INI config per run.
//
// Exit codes: 0 success, 1 configuration/validation failure, 2 runtime
// failure.  Identical config + seed produces byte-identical
// machine-readable outputs for any worker count.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lcsim/cluster.hpp"
#include "lcsim/config.hpp"
#include "lcsim/io.hpp"
#include "lcsim/noise.hpp"
#include "lcsim/pulse.hpp"
#include "lcsim/readout.hpp"
#include "lcsim/rng.hpp"
#include "lcsim/statevec.hpp"
#include "lcsim/witness.hpp"

namespace {

using namespace lcsim;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// "section.key=value" command-line override.
void apply_overrides(ConfigFile& cfg, const std::vector<std::string>& sets) {
  for (const std::string& item : sets) {
    const auto eq = item.find('=');
    const auto dot = item.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq || dot == 0) {
      throw ConfigError("override '" + item + "' must look like section.key=value");
    }
    cfg.set(item.substr(0, dot), item.substr(dot + 1, eq - dot - 1), item.substr(eq + 1));
  }
}

struct ExperimentSetup {
  std::vector<int> ns;
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
  bool ideal = false;
  GateSet gate_set = GateSet::CZ;
  std::string out_dir;
  std::string report;  // text | json | both
  int workers = 1;
  CacheMode cache = CacheMode::kAuto;
  std::uint64_t bootstrap_resamples = 0;
  std::optional<DeviceParams> device;
  NoiseModelOptions noise;
  std::string dist_xz;  // raw-distribution bypass (regression inputs)
  std::string dist_zx;
};

CacheMode parse_cache_mode(const std::string& text) {
  if (text == "auto") return CacheMode::kAuto;
  if (text == "on") return CacheMode::kOn;
  if (text == "off") return CacheMode::kOff;
  throw ConfigError("experiment.cache must be auto, on or off (got '" + text + "')");
}

ExperimentSetup load_experiment(const ConfigFile& cfg, int workers_flag) {
  ExperimentSetup s;
  if (!cfg.has("experiment", "seed")) {
    throw ConfigError("experiment.seed is required (no wall-clock seeding)");
  }
  s.seed = static_cast<std::uint64_t>(cfg.get_int("experiment", "seed"));

  if (cfg.has("experiment", "sweep")) {
    s.ns = parse_int_list(cfg.get("experiment", "sweep"));
  } else if (cfg.has("experiment", "n_qubits")) {
    s.ns = {static_cast<int>(cfg.get_int("experiment", "n_qubits"))};
  } else {
    throw ConfigError("experiment.n_qubits (or experiment.sweep) is required");
  }
  for (int n : s.ns) {
    if (n < 2 || n > kMaxQubits) {
      throw ConfigError("experiment qubit counts must lie in [2, " +
                        std::to_string(kMaxQubits) + "]");
    }
  }

  if (!cfg.has("experiment", "shots")) throw ConfigError("experiment.shots is required");
  const std::int64_t shots = cfg.get_int("experiment", "shots");
  if (shots < 1) throw ConfigError("experiment.shots must be at least 1");
  s.shots = static_cast<std::uint64_t>(shots);

  s.ideal = cfg.get_bool_or("experiment", "ideal", false);
  const std::string gs = cfg.get_or("experiment", "gate_set", "cz");
  if (gs == "cz") {
    s.gate_set = GateSet::CZ;
  } else if (gs == "cx") {
    s.gate_set = GateSet::CX;
  } else {
    throw ConfigError("experiment.gate_set must be cz or cx (got '" + gs + "')");
  }
  if (s.gate_set == GateSet::CX && !s.ideal) {
    throw ConfigError("experiment.gate_set = cx is supported only for ideal runs");
  }

  s.out_dir = cfg.get_or("experiment", "output_dir", "out");
  s.report = cfg.get_or("experiment", "report", "both");
  if (s.report != "text" && s.report != "json" && s.report != "both") {
    throw ConfigError("experiment.report must be text, json or both");
  }
  s.workers = workers_flag > 0
                  ? workers_flag
                  : static_cast<int>(cfg.get_int_or("experiment", "workers", 1));
  s.cache = parse_cache_mode(cfg.get_or("experiment", "cache", "auto"));
  const std::int64_t resamples = cfg.get_int_or("experiment", "bootstrap_resamples", 0);
  if (resamples < 0) throw ConfigError("experiment.bootstrap_resamples must be >= 0");
  s.bootstrap_resamples = static_cast<std::uint64_t>(resamples);

  if (cfg.has("experiment", "device")) {
    const std::string path = cfg.get("experiment", "device");
    if (!std::filesystem::exists(path)) {
      throw ConfigError("experiment.device: no such file '" + path + "'");
    }
    s.device = load_device_params_file(path);
  }
  if (!s.ideal && !s.device.has_value()) {
    throw ConfigError("experiment.device is required unless ideal = true");
  }

  s.noise.sq_layer_ns = cfg.get_double_or("noise", "sq_layer_ns", s.noise.sq_layer_ns);
  s.noise.cz_layer_ns = cfg.get_double_or("noise", "cz_layer_ns", s.noise.cz_layer_ns);
  s.noise.cz_phase_mean = cfg.get_double_or("noise", "cz_phase_mean", 0.0);
  s.noise.cz_phase_std = cfg.get_double_or("noise", "cz_phase_std", 0.0);
  s.noise.zz_mhz = cfg.get_double_or("noise", "zz_mhz", 0.0);
  s.noise.tphi_ceiling_us =
      cfg.get_double_or("noise", "tphi_ceiling_us", s.noise.tphi_ceiling_us);

  s.dist_xz = cfg.get_or("experiment", "distribution_xz", "");
  s.dist_zx = cfg.get_or("experiment", "distribution_zx", "");
  if (s.dist_xz.empty() != s.dist_zx.empty()) {
    throw ConfigError("distribution_xz and distribution_zx must be given together");
  }
  if (!s.dist_xz.empty()) {
    if (s.ns.size() != 1) {
      throw ConfigError("distribution input mode supports a single n, not a sweep");
    }
    for (const std::string& p : {s.dist_xz, s.dist_zx}) {
      if (!std::filesystem::exists(p)) throw ConfigError("no such file '" + p + "'");
    }
  }
  return s;
}

// Noise model (and its readout transitions) for the leading n chain qubits.
NoiseModel model_for(const ExperimentSetup& s, int n) {
  if (s.ideal) return noiseless_model(n);
  if (s.device->n() < n) {
    throw ConfigError("device file provides " + std::to_string(s.device->n()) +
                      " qubits but n = " + std::to_string(n) + " requested");
  }
  DeviceParams sub = *s.device;
  sub.qubits.resize(static_cast<std::size_t>(n));
  NoiseModel model = model_from_device(sub, s.noise);
  for (const std::string& w : model.warnings) std::cerr << "note: " << w << "\n";
  return model;
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

struct SweepRow {
  int n = 0;
  WitnessResult witness;
};

SweepRow run_lc_single(const ExperimentSetup& s, int n) {
  const WitnessCoefficients wc = witness_coefficients(n);
  const NoiseModel model = model_for(s, n);
  const std::vector<TransitionMatrix> t = model.readout;

  Eigen::VectorXd raw_xz, raw_zx;
  std::optional<TrajectoryRun> run;
  if (!s.dist_xz.empty()) {
    const DistributionFile fx = read_distribution_csv(s.dist_xz);
    const DistributionFile fz = read_distribution_csv(s.dist_zx);
    if (fx.n_qubits != n || fz.n_qubits != n) {
      throw ConfigError("distribution files are not " + std::to_string(n) + "-qubit");
    }
    raw_xz = fx.p;
    raw_zx = fz.p;
  } else if (s.ideal && s.gate_set == GateSet::CX) {
    // CX-decomposed preparation: same state by construction, sampled from
    // the exact statevector.
    Eigen::VectorXcd psi = run_circuit(lc_circuit(n, GateSet::CX));
    Eigen::VectorXcd psi_zx = psi;
    basis_rotate(psi, wc.basis_xz);
    basis_rotate(psi_zx, wc.basis_zx);
    TrajectoryRun r;
    r.shots = s.shots;
    r.counts_xz = sample(probabilities(psi), s.shots,
                         rng::derive_key(s.seed, {kBasisTagXZ}));
    r.counts_zx = sample(probabilities(psi_zx), s.shots,
                         rng::derive_key(s.seed, {kBasisTagZX}));
    run = std::move(r);
  } else {
    RunOptions opt;
    opt.workers = s.workers;
    opt.cache = s.cache;
    run = noisy_lc_experiment(n, model, s.shots, s.seed, opt);
  }

  const std::string tag = "_n" + std::to_string(n);
  if (run.has_value()) {
    raw_xz = counts_to_distribution(run->counts_xz);
    raw_zx = counts_to_distribution(run->counts_zx);
    write_counts_csv(join_path(s.out_dir, "counts_xz" + tag + ".csv"), run->counts_xz);
    write_counts_csv(join_path(s.out_dir, "counts_zx" + tag + ".csv"), run->counts_zx);
  }

  const Eigen::VectorXd mit_xz = mitigate(raw_xz, t);
  const Eigen::VectorXd mit_zx = mitigate(raw_zx, t);
  write_distribution_csv(join_path(s.out_dir, "mitigated_xz" + tag + ".csv"), mit_xz, n);
  write_distribution_csv(join_path(s.out_dir, "mitigated_zx" + tag + ".csv"), mit_zx, n);

  const double bound = fidelity_bound(mit_xz, mit_zx, wc);
  const double sigma_shot = shot_noise_sigma(raw_xz, raw_zx, t, wc, s.shots);
  // Readout-drift sigma is a separate study (run-fluctuation); the report
  // carries the shot-noise component alone.
  const WitnessResult result = certify_gme(n, bound, sigma_shot, 0.0);

  std::cout << "== " << n << " qubits ==\n" << witness_report_text(result);
  if (run.has_value() && s.bootstrap_resamples > 0) {
    const double bs = bootstrap_sigma(run->counts_xz, run->counts_zx, t, wc,
                                      s.bootstrap_resamples, s.seed, s.workers);
    std::cout << "sigma bootstrap:    " << format_double(bs) << "\n";
  }
  std::cout << "\n";

  if (s.report != "text") {
    write_witness_report_json(join_path(s.out_dir, "witness" + tag + ".json"), result);
  }
  if (s.report != "json") {
    std::ofstream out(join_path(s.out_dir, "witness" + tag + ".txt"));
    out << witness_report_text(result);
  }
  return SweepRow{n, result};
}

int cmd_run_lc(const std::string& config_path, const std::vector<std::string>& sets,
               int workers_flag) {
  ExperimentSetup setup;
  try {
    ConfigFile cfg = load_config(config_path);
    apply_overrides(cfg, sets);
    setup = load_experiment(cfg, workers_flag);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  try {
    std::filesystem::create_directories(setup.out_dir);
    std::vector<SweepRow> rows;
    for (int n : setup.ns) rows.push_back(run_lc_single(setup, n));

    std::ofstream sweep(join_path(setup.out_dir, "witness_sweep.csv"));
    sweep << "n,fidelity_bound,sigma_shot,n_sigma_above_half,gme_certified\n";
    for (const SweepRow& row : rows) {
      sweep << row.n << ',' << format_double(row.witness.fidelity_bound) << ','
            << format_double(row.witness.sigma_shot) << ','
            << format_double(row.witness.n_sigma_above_half) << ','
            << (row.witness.gme_certified ? 1 : 0) << '\n';
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

int cmd_run_fluctuation(const std::string& config_path,
                        const std::vector<std::string>& sets, int workers_flag) {
  ExperimentSetup setup;
  double df00 = 0.0, df11 = 0.0;
  std::uint64_t trials = 0;
  int bins = 0;
  std::optional<double> f00, f11;
  try {
    ConfigFile cfg = load_config(config_path);
    apply_overrides(cfg, sets);
    setup = load_experiment(cfg, workers_flag);
    df00 = cfg.get_double_or("fluctuation", "df00", 0.01);
    df11 = cfg.get_double_or("fluctuation", "df11", 0.01);
    const std::int64_t raw_trials = cfg.get_int_or("fluctuation", "trials", 10000);
    if (raw_trials < 100) throw ConfigError("fluctuation.trials must be at least 100");
    trials = static_cast<std::uint64_t>(raw_trials);
    bins = static_cast<int>(cfg.get_int_or("fluctuation", "bins", 61));
    if (cfg.has("fluctuation", "f00")) f00 = cfg.get_double("fluctuation", "f00");
    if (cfg.has("fluctuation", "f11")) f11 = cfg.get_double("fluctuation", "f11");
    if (f00.has_value() != f11.has_value()) {
      throw ConfigError("fluctuation.f00 and fluctuation.f11 must be given together");
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  try {
    std::filesystem::create_directories(setup.out_dir);
    std::ofstream summary(join_path(setup.out_dir, "fluctuation_summary.csv"));
    summary << "n,trials,rejected_trials,mean_distortion,std_distortion\n";

    for (int n : setup.ns) {
      const WitnessCoefficients wc = witness_coefficients(n);
      // Ideal-state baseline: readout drift is studied in isolation.
      Eigen::VectorXcd psi = lc_state(n);
      Eigen::VectorXcd psi_zx = psi;
      basis_rotate(psi, wc.basis_xz);
      basis_rotate(psi_zx, wc.basis_zx);

      std::vector<TransitionMatrix> t;
      if (f00.has_value()) {
        t.assign(static_cast<std::size_t>(n), TransitionMatrix{*f00, *f11});
      } else {
        t = model_for(setup, n).readout;
      }
      const std::vector<TransitionDelta> delta(static_cast<std::size_t>(n),
                                               TransitionDelta{df00, df11});
      const FluctuationStudy study = transition_fluctuation_sigma(
          probabilities(psi), probabilities(psi_zx), wc, t, delta, trials,
          rng::derive_key(setup.seed, {static_cast<std::uint64_t>(n)}), bins,
          setup.workers);

      write_histogram_csv(
          join_path(setup.out_dir, "fluctuation_hist_n" + std::to_string(n) + ".csv"),
          study.histogram);
      summary << n << ',' << study.trials << ',' << study.rejected_trials << ','
              << format_double(study.mean_distortion) << ','
              << format_double(study.std_distortion) << '\n';
      std::cout << "n = " << n << ": mean distortion "
                << format_double(study.mean_distortion) << ", std "
                << format_double(study.std_distortion) << " (" << study.rejected_trials
                << " rejected trials)\n";
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

int cmd_run_pulse_opt(const std::string& config_path,
                      const std::vector<std::string>& sets, int workers_flag) {
  TransmonPair pair;
  Waveform start;
  NelderMeadOptions nm;
  double dt_ns = 0.01;
  std::uint64_t qpt_shots = 0;
  std::uint64_t seed = 0;
  std::string out_dir;
  int workers = 1;
  try {
    ConfigFile cfg = load_config(config_path);
    apply_overrides(cfg, sets);
    if (!cfg.has("experiment", "seed")) {
      throw ConfigError("experiment.seed is required (no wall-clock seeding)");
    }
    seed = static_cast<std::uint64_t>(cfg.get_int("experiment", "seed"));
    out_dir = cfg.get_or("experiment", "output_dir", "out");
    workers = workers_flag > 0
                  ? workers_flag
                  : static_cast<int>(cfg.get_int_or("experiment", "workers", 1));

    pair.omega1_idle_ghz = cfg.get_double_or("pulse", "omega1_idle_ghz", pair.omega1_idle_ghz);
    pair.omega2_idle_ghz = cfg.get_double_or("pulse", "omega2_idle_ghz", pair.omega2_idle_ghz);
    pair.eta1_mhz = cfg.get_double_or("pulse", "eta1_mhz", pair.eta1_mhz);
    pair.eta2_mhz = cfg.get_double_or("pulse", "eta2_mhz", pair.eta2_mhz);
    pair.g_mhz = cfg.get_double_or("pulse", "g_mhz", pair.g_mhz);

    start.duration_ns = cfg.get_double_or("pulse", "duration_ns", start.duration_ns);
    start.edge_offset_ns = cfg.get_double_or("pulse", "edge_offset_ns", start.edge_offset_ns);
    start.hold1_ghz = cfg.get_double_or("pulse", "hold1_ghz", pair.omega1_idle_ghz);
    start.hold2_ghz = cfg.get_double_or("pulse", "hold2_ghz", pair.omega2_idle_ghz);
    start.partner_top_ghz =
        cfg.get_double_or("pulse", "partner_top_ghz", start.partner_top_ghz);
    start.coeffs_ghz[0] = cfg.get_double_or("pulse", "initial_dip_ghz", -0.35);

    dt_ns = cfg.get_double_or("pulse", "dt_ns", dt_ns);
    nm.max_iters = static_cast<int>(cfg.get_int_or("pulse", "max_iters", 2000));
    nm.initial_step = cfg.get_double_or("pulse", "initial_step", nm.initial_step);
    const std::int64_t shots = cfg.get_int_or("pulse", "qpt_shots", 0);
    if (shots < 0) throw ConfigError("pulse.qpt_shots must be >= 0");
    qpt_shots = static_cast<std::uint64_t>(shots);

    pair.validate();
    start.validate();
    if (nm.max_iters < 1) throw ConfigError("pulse.max_iters must be at least 1");
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  try {
    std::filesystem::create_directories(out_dir);
    const OptimizeResult result = optimize_cz(pair, start, dt_ns, nm);
    const Eigen::MatrixXcd u = evolve(pair, result.waveform, dt_ns);
    const GateMetrics metrics = gate_metrics(u);
    const Eigen::Matrix4cd v = corrected_computational(u);

    QptOptions qopt;
    qopt.shots_per_setting = qpt_shots;
    qopt.seed = seed;
    qopt.workers = workers;
    const ProcessTomography qpt = qpt_two_qubit(unitary_channel(v), qopt);

    Eigen::Matrix4cd cz = Eigen::Matrix4cd::Identity();
    cz(3, 3) = -1.0;
    const double analytic_fidelity =
        process_fidelity(chi_of_unitary(cz), chi_of_unitary(v));

    write_optimizer_trace_csv(join_path(out_dir, "pulse_trace.csv"), result.detail);
    write_waveform_csv(join_path(out_dir, "pulse_waveform.csv"), result.waveform, 0.1);

    nlohmann::json j;
    j["objective"] = result.detail.best_f;
    j["iterations"] = result.detail.iterations;
    j["converged"] = result.detail.converged;
    j["conditional_phase_rad"] = metrics.conditional_phase;
    j["phase_error_rad"] = std::abs(metrics.conditional_phase - 3.14159265358979323846);
    j["leakage"] = metrics.leakage;
    j["extraction_deficit"] = metrics.extraction_deficit;
    j["qpt_fidelity_to_cz"] = qpt.fidelity_to_cz;
    j["qpt_plusplus_fidelity"] = qpt.plusplus_fidelity;
    j["qpt_clipped_mass"] = qpt.clipped_mass;
    j["qpt_tp_residual"] = qpt.tp_residual;
    j["analytic_fidelity_to_cz"] = analytic_fidelity;
    std::ofstream report(join_path(out_dir, "pulse_report.json"));
    report << j.dump(2) << "\n";

    std::cout << "objective:           " << format_double(result.detail.best_f) << "\n"
              << "conditional phase:   " << format_double(metrics.conditional_phase)
              << " rad\n"
              << "phase error:         "
              << format_double(j["phase_error_rad"].get<double>()) << " rad\n"
              << "leakage:             " << format_double(metrics.leakage) << "\n"
              << "QPT fidelity to CZ:  " << format_double(qpt.fidelity_to_cz) << "\n"
              << "QPT |++> fidelity:   " << format_double(qpt.plusplus_fidelity) << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

std::vector<TransitionMatrix> readout_from_flags(const std::string& device_path,
                                                 double f00, double f11, int n) {
  if (!device_path.empty()) {
    const DeviceParams dev = load_device_params_file(device_path);
    if (dev.n() < n) {
      throw ConfigError("device file provides " + std::to_string(dev.n()) +
                        " qubits but the input has " + std::to_string(n));
    }
    std::vector<TransitionMatrix> t = dev.transitions();
    t.resize(static_cast<std::size_t>(n));
    return t;
  }
  const TransitionMatrix tm{f00, f11};
  validate_transition(tm);
  return std::vector<TransitionMatrix>(static_cast<std::size_t>(n), tm);
}

int cmd_mitigate(const std::string& in_path, const std::string& out_path,
                 const std::string& device_path, double f00, double f11) {
  int n = 0;
  Eigen::VectorXd raw;
  std::vector<TransitionMatrix> t;
  try {
    if (!std::filesystem::exists(in_path)) {
      throw ConfigError("no such file '" + in_path + "'");
    }
    std::ifstream probe(in_path);
    std::string header;
    std::getline(probe, header);
    if (!header.empty() && header.back() == '\r') header.pop_back();
    probe.close();
    if (header == "outcome,count") {
      const Counts counts = read_counts_csv(in_path);
      n = counts.n_qubits;
      raw = counts_to_distribution(counts);
    } else {
      const DistributionFile file = read_distribution_csv(in_path);
      n = file.n_qubits;
      raw = file.p;
    }
    t = readout_from_flags(device_path, f00, f11, n);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  try {
    const Eigen::VectorXd mitigated = mitigate(raw, t);
    write_distribution_csv(out_path, mitigated, n);
    std::cout << "negative quasi-probability mass: "
              << format_double(negative_mass(mitigated)) << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

int cmd_witness(const std::string& xz_path, const std::string& zx_path,
                std::uint64_t shots, const std::string& device_path, double f00,
                double f11, double z, const std::string& json_path) {
  Eigen::VectorXd raw_xz, raw_zx;
  std::vector<TransitionMatrix> t;
  int n = 0;
  try {
    for (const std::string& p : {xz_path, zx_path}) {
      if (!std::filesystem::exists(p)) throw ConfigError("no such file '" + p + "'");
    }
    const DistributionFile fx = read_distribution_csv(xz_path);
    const DistributionFile fz = read_distribution_csv(zx_path);
    if (fx.n_qubits != fz.n_qubits) {
      throw ConfigError("the two distribution files have different qubit counts");
    }
    n = fx.n_qubits;
    if (n < 2) throw ConfigError("witness needs at least 2 qubits");
    if (shots < 1) throw ConfigError("--shots must be at least 1");
    raw_xz = fx.p;
    raw_zx = fz.p;
    t = readout_from_flags(device_path, f00, f11, n);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  try {
    const WitnessCoefficients wc = witness_coefficients(n);
    const double bound = fidelity_bound(mitigate(raw_xz, t), mitigate(raw_zx, t), wc);
    const double sigma_shot = shot_noise_sigma(raw_xz, raw_zx, t, wc, shots);
    const WitnessResult result = certify_gme(n, bound, sigma_shot, 0.0, z);
    std::cout << witness_report_text(result);
    if (!json_path.empty()) write_witness_report_json(json_path, result);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"linear-cluster-state simulation and analysis toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  int workers_flag = 0;

  auto add_config_flags = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config file")->required();
    cmd->add_option("--set", sets, "override a config scalar: section.key=value");
    cmd->add_option("--workers", workers_flag, "worker threads (0 = config value)");
  };

  CLI::App* run_lc = app.add_subcommand(
      "run-lc", "simulate or import an LC experiment and certify the witness");
  add_config_flags(run_lc);
  CLI::App* run_fluct = app.add_subcommand(
      "run-fluctuation", "Monte Carlo study of readout-calibration drift");
  add_config_flags(run_fluct);
  CLI::App* run_pulse =
      app.add_subcommand("run-pulse-opt", "optimize the fast-adiabatic CZ waveform");
  add_config_flags(run_pulse);

  std::string in_path, out_path, device_path, json_path, xz_path, zx_path;
  double f00 = 1.0, f11 = 1.0, z = 0.0;
  std::uint64_t shots = 0;

  CLI::App* mit = app.add_subcommand("mitigate", "invert readout errors file-to-file");
  mit->add_option("--in", in_path, "counts or distribution CSV")->required();
  mit->add_option("--out", out_path, "mitigated distribution CSV")->required();
  mit->add_option("--device", device_path, "device parameter file");
  mit->add_option("--f00", f00, "uniform P(read 0 | prepared 0)");
  mit->add_option("--f11", f11, "uniform P(read 1 | prepared 1)");

  CLI::App* wit = app.add_subcommand(
      "witness", "fidelity bound and GME certificate from raw distribution files");
  wit->add_option("--xz", xz_path, "raw distribution, XZXZ... basis")->required();
  wit->add_option("--zx", zx_path, "raw distribution, ZXZX... basis")->required();
  wit->add_option("--shots", shots, "shots behind each distribution")->required();
  wit->add_option("--device", device_path, "device parameter file");
  wit->add_option("--f00", f00, "uniform P(read 0 | prepared 0)");
  wit->add_option("--f11", f11, "uniform P(read 1 | prepared 1)");
  wit->add_option("--z", z, "sigma margin subtracted before certification");
  wit->add_option("--json", json_path, "also write the report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (run_lc->parsed()) return cmd_run_lc(config_path, sets, workers_flag);
  if (run_fluct->parsed()) return cmd_run_fluctuation(config_path, sets, workers_flag);
  if (run_pulse->parsed()) return cmd_run_pulse_opt(config_path, sets, workers_flag);
  if (mit->parsed()) return cmd_mitigate(in_path, out_path, device_path, f00, f11);
  if (wit->parsed()) {
    return cmd_witness(xz_path, zx_path, shots, device_path, f00, f11, z, json_path);
  }
  return 1;
}
