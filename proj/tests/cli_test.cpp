// End-to-end tests of the lcsim command-line tool: each case spawns the
// real binary and inspects exit codes, console text and output files.

#include "doctest.h"

#include "lcsim/cluster.hpp"
#include "lcsim/io.hpp"
#include "lcsim/readout.hpp"
#include "lcsim/statevec.hpp"
#include "lcsim/witness.hpp"
#include "support.hpp"

#include "json.hpp"

#include <Eigen/Dense>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <sys/wait.h>

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

// Runs the CLI with the given arguments from the repository root (so the
// relative paths inside the bundled configs resolve), capturing both
// streams.
CliResult run_cli(const std::string& args, lcsim::test::TempDir& dir) {
  static int counter = 0;
  const std::string out_path = dir.file("cli_stdout_" + std::to_string(counter) + ".txt");
  const std::string err_path = dir.file("cli_stderr_" + std::to_string(counter) + ".txt");
  ++counter;

  const std::string command = "cd '" LCSIM_SOURCE_DIR "' && '" LCSIM_CLI_PATH "' " +
                              args + " > '" + out_path + "' 2> '" + err_path + "'";
  const int status = std::system(command.c_str());

  CliResult result;
  result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  if (std::filesystem::exists(out_path)) result.out = lcsim::test::read_text(out_path);
  if (std::filesystem::exists(err_path)) result.err = lcsim::test::read_text(err_path);
  return result;
}

bool exists(const std::string& path) { return std::filesystem::exists(path); }

// Ideal measured distribution of the n-qubit chain state in one witness basis.
Eigen::VectorXd ideal_basis_distribution(int n, const std::string& basis) {
  Eigen::VectorXcd psi = lcsim::lc_state(n);
  lcsim::basis_rotate(psi, basis);
  return lcsim::probabilities(psi);
}

}  // namespace

TEST_CASE("cli requires a subcommand and answers --help") {
  lcsim::test::TempDir dir;
  CHECK(run_cli("", dir).code == 1);
  const CliResult help = run_cli("--help", dir);
  CHECK(help.code == 0);
  CHECK(help.out.find("run-lc") != std::string::npos);
  CHECK(help.out.find("witness") != std::string::npos);
  CHECK(run_cli("frobnicate", dir).code == 1);
}

TEST_CASE("run-lc: ideal chain run emits counts, mitigated data and reports") {
  lcsim::test::TempDir dir;
  const std::string out_a = dir.file("out_a");
  const std::string cfg = dir.file("ideal4.cfg");
  lcsim::test::write_text(cfg,
                          "[experiment]\n"
                          "n_qubits = 4\n"
                          "shots = 2000\n"
                          "seed = 3\n"
                          "ideal = true\n"
                          "bootstrap_resamples = 100\n"
                          "output_dir = " + out_a + "\n");

  const CliResult r = run_cli("run-lc --config '" + cfg + "'", dir);
  CAPTURE(r.err);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("fidelity bound") != std::string::npos);
  CHECK(r.out.find("sigma bootstrap") != std::string::npos);

  for (const char* name : {"counts_xz_n4.csv", "counts_zx_n4.csv", "mitigated_xz_n4.csv",
                           "mitigated_zx_n4.csv", "witness_n4.json", "witness_n4.txt",
                           "witness_sweep.csv"}) {
    CAPTURE(name);
    CHECK(exists(out_a + "/" + name));
  }

  const nlohmann::json report =
      nlohmann::json::parse(lcsim::test::read_text(out_a + "/witness_n4.json"));
  CHECK(report.at("n_qubits").get<int>() == 4);
  CHECK(report.at("fidelity_bound").get<double>() > 0.9);
  CHECK(report.at("fidelity_bound").get<double>() < 1.1);
  CHECK(report.at("gme_certified").get<bool>());

  // Same seed, different worker count: byte-identical outputs.
  const std::string out_b = dir.file("out_b");
  const CliResult r2 = run_cli("run-lc --config '" + cfg + "' --workers 3 --set experiment.output_dir=" + out_b,
                               dir);
  REQUIRE(r2.code == 0);
  for (const char* name : {"counts_xz_n4.csv", "counts_zx_n4.csv", "witness_sweep.csv"}) {
    CAPTURE(name);
    CHECK(lcsim::test::read_text(out_a + "/" + name) ==
          lcsim::test::read_text(out_b + "/" + name));
  }

  // The CX-decomposed preparation reaches the same state.
  const std::string out_c = dir.file("out_c");
  const CliResult r3 = run_cli("run-lc --config '" + cfg +
                                   "' --set experiment.gate_set=cx"
                                   " --set experiment.output_dir=" + out_c,
                               dir);
  REQUIRE(r3.code == 0);
  const nlohmann::json cx_report =
      nlohmann::json::parse(lcsim::test::read_text(out_c + "/witness_n4.json"));
  CHECK(cx_report.at("fidelity_bound").get<double>() > 0.9);
}

TEST_CASE("run-lc: configuration errors exit with code 1 and name the problem") {
  lcsim::test::TempDir dir;
  const std::string cfg = dir.file("bad.cfg");

  lcsim::test::write_text(cfg, "[experiment]\nn_qubits = 4\nshots = 100\nideal = true\n");
  CliResult r = run_cli("run-lc --config '" + cfg + "'", dir);
  CHECK(r.code == 1);
  CHECK(r.err.find("seed") != std::string::npos);

  lcsim::test::write_text(cfg,
                          "[experiment]\nn_qubits = 4\nshots = 100\nseed = 1\nideal = true\n");
  CHECK(run_cli("run-lc --config '" + cfg + "' --set experiment.cache=sometimes", dir).code == 1);
  CHECK(run_cli("run-lc --config '" + cfg + "' --set experiment.shots=0", dir).code == 1);
  CHECK(run_cli("run-lc --config '" + cfg + "' --set nodotnoequals", dir).code == 1);
  CHECK(run_cli("run-lc --config '" + cfg + "' --set experiment.n_qubits=1", dir).code == 1);

  // gate_set = cx is an ideal-mode decomposition check only.
  r = run_cli("run-lc --config '" + cfg +
                  "' --set experiment.ideal=false --set experiment.gate_set=cx",
              dir);
  CHECK(r.code == 1);
  CHECK(r.err.find("gate_set") != std::string::npos);

  CHECK(run_cli("run-lc --config '" + dir.file("nonexistent.cfg") + "'", dir).code == 1);
  CHECK(run_cli("run-lc", dir).code == 1);  // --config is required
}

TEST_CASE("mitigate: inverts uniform readout errors file-to-file") {
  lcsim::test::TempDir dir;
  const int n = 4;
  const Eigen::VectorXd ideal = ideal_basis_distribution(n, "XZXZ");
  const std::vector<lcsim::TransitionMatrix> t(n, lcsim::TransitionMatrix{0.95, 0.9});
  const Eigen::VectorXd noisy = lcsim::apply_readout_noise(ideal, t);

  const std::string in = dir.file("raw.csv");
  const std::string out = dir.file("mitigated.csv");
  lcsim::write_distribution_csv(in, noisy, n);

  const CliResult r =
      run_cli("mitigate --in '" + in + "' --out '" + out + "' --f00 0.95 --f11 0.9", dir);
  CAPTURE(r.err);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("negative quasi-probability mass") != std::string::npos);

  const lcsim::DistributionFile mit = lcsim::read_distribution_csv(out);
  REQUIRE(mit.n_qubits == n);
  CHECK((mit.p - ideal).cwiseAbs().maxCoeff() < 1e-10);

  SUBCASE("counts input is detected by its header") {
    lcsim::Counts counts;
    counts.n_qubits = 2;
    counts.table = {{0, 10}, {1, 20}, {2, 30}, {3, 40}};
    const std::string counts_path = dir.file("counts.csv");
    lcsim::write_counts_csv(counts_path, counts);

    const std::string out2 = dir.file("mitigated2.csv");
    REQUIRE(run_cli("mitigate --in '" + counts_path + "' --out '" + out2 +
                        "' --f00 1 --f11 1",
                    dir).code == 0);
    const lcsim::DistributionFile back = lcsim::read_distribution_csv(out2);
    CHECK(back.p(0) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(back.p(3) == doctest::Approx(0.4).epsilon(1e-12));
  }

  SUBCASE("bad invocations exit with code 1") {
    CHECK(run_cli("mitigate --in '" + dir.file("nope.csv") + "' --out '" + out +
                      "' --f00 0.95 --f11 0.9",
                  dir).code == 1);
    CHECK(run_cli("mitigate --in '" + in + "' --f00 0.95 --f11 0.9", dir).code == 1);
    // Singular transition matrix (f00 + f11 == 1) passes per-value validation but
    // fails at inversion, which is a runtime error (exit 2) rather than bad usage.
    CHECK(run_cli("mitigate --in '" + in + "' --out '" + out + "' --f00 0.5 --f11 0.5",
                  dir).code == 2);
  }
}

TEST_CASE("witness: certifies the ideal chain from stored distributions") {
  lcsim::test::TempDir dir;
  const int n = 4;
  const std::vector<lcsim::TransitionMatrix> t(n, lcsim::TransitionMatrix{0.95, 0.9});
  const std::string xz = dir.file("xz.csv");
  const std::string zx = dir.file("zx.csv");
  lcsim::write_distribution_csv(
      xz, lcsim::apply_readout_noise(ideal_basis_distribution(n, "XZXZ"), t), n);
  lcsim::write_distribution_csv(
      zx, lcsim::apply_readout_noise(ideal_basis_distribution(n, "ZXZX"), t), n);

  const std::string json_path = dir.file("witness.json");
  const CliResult r = run_cli("witness --xz '" + xz + "' --zx '" + zx +
                                  "' --shots 100000 --f00 0.95 --f11 0.9 --json '" +
                                  json_path + "'",
                              dir);
  CAPTURE(r.err);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("GME certified") != std::string::npos);
  CHECK(r.out.find("yes") != std::string::npos);

  const nlohmann::json j = nlohmann::json::parse(lcsim::test::read_text(json_path));
  CHECK(j.at("fidelity_bound").get<double>() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(j.at("n_sigma_above_half").get<double>() > 50.0);
  CHECK(j.at("gme_certified").get<bool>());

  SUBCASE("mismatched widths and missing flags exit with code 1") {
    const std::string zx3 = dir.file("zx3.csv");
    lcsim::write_distribution_csv(zx3, ideal_basis_distribution(3, "ZXZ"), 3);
    CHECK(run_cli("witness --xz '" + xz + "' --zx '" + zx3 + "' --shots 1000", dir).code == 1);
    CHECK(run_cli("witness --xz '" + xz + "' --zx '" + zx + "'", dir).code == 1);
    CHECK(run_cli("witness --xz '" + xz + "' --zx '" + zx + "' --shots 0", dir).code == 1);
  }
}

TEST_CASE("run-fluctuation: drift study writes summary and histograms") {
  lcsim::test::TempDir dir;
  const std::string out_a = dir.file("fluct_a");
  const std::string cfg = dir.file("fluct.cfg");
  lcsim::test::write_text(cfg,
                          "[experiment]\n"
                          "n_qubits = 4\n"
                          "shots = 1\n"
                          "seed = 23\n"
                          "ideal = true\n"
                          "output_dir = " + out_a + "\n"
                          "\n"
                          "[fluctuation]\n"
                          "f00 = 0.96\n"
                          "f11 = 0.87\n"
                          "df00 = 0.01\n"
                          "df11 = 0.01\n"
                          "trials = 200\n"
                          "bins = 31\n");

  const CliResult r = run_cli("run-fluctuation --config '" + cfg + "'", dir);
  CAPTURE(r.err);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("mean distortion") != std::string::npos);
  REQUIRE(exists(out_a + "/fluctuation_summary.csv"));
  REQUIRE(exists(out_a + "/fluctuation_hist_n4.csv"));
  CHECK(lcsim::test::read_text(out_a + "/fluctuation_summary.csv").find("\n4,200,") !=
        std::string::npos);

  const std::string out_b = dir.file("fluct_b");
  const CliResult r2 = run_cli("run-fluctuation --config '" + cfg +
                                   "' --workers 3 --set experiment.output_dir=" + out_b,
                               dir);
  REQUIRE(r2.code == 0);
  CHECK(lcsim::test::read_text(out_a + "/fluctuation_summary.csv") ==
        lcsim::test::read_text(out_b + "/fluctuation_summary.csv"));

  // Fewer than 100 trials is below the study's resolution floor.
  CHECK(run_cli("run-fluctuation --config '" + cfg + "' --set fluctuation.trials=50",
                dir).code == 1);
}

TEST_CASE("run-pulse-opt: short smoke run writes trace, waveform and report") {
  lcsim::test::TempDir dir;
  const std::string out = dir.file("pulse_out");
  const std::string cfg = dir.file("pulse.cfg");
  lcsim::test::write_text(cfg,
                          "[experiment]\n"
                          "seed = 5\n"
                          "output_dir = " + out + "\n"
                          "\n"
                          "[pulse]\n"
                          "duration_ns = 30\n"
                          "edge_offset_ns = 5\n"
                          "initial_dip_ghz = -0.3\n"
                          "dt_ns = 0.1\n"
                          "max_iters = 2\n"
                          "qpt_shots = 0\n");

  const CliResult r = run_cli("run-pulse-opt --config '" + cfg + "'", dir);
  CAPTURE(r.err);
  REQUIRE(r.code == 0);
  REQUIRE(exists(out + "/pulse_trace.csv"));
  REQUIRE(exists(out + "/pulse_waveform.csv"));
  REQUIRE(exists(out + "/pulse_report.json"));

  const nlohmann::json j =
      nlohmann::json::parse(lcsim::test::read_text(out + "/pulse_report.json"));
  CHECK(j.contains("phase_error_rad"));
  CHECK(lcsim::test::read_text(out + "/pulse_waveform.csv").rfind("t_ns,", 0) == 0);
}

TEST_CASE("run-lc: regression config reproduces the frozen bound") {
  lcsim::test::TempDir dir;
  const std::string out = dir.file("regression_out");
  const CliResult r = run_cli(
      "run-lc --config data/examples/regression.cfg --set experiment.output_dir=" + out,
      dir);
  CAPTURE(r.err);
  REQUIRE(r.code == 0);

  const nlohmann::json j =
      nlohmann::json::parse(lcsim::test::read_text(out + "/witness_n12.json"));
  CHECK(j.at("fidelity_bound").get<double>() == doctest::Approx(0.5544).epsilon(1e-6));
  CHECK(j.at("n_sigma_above_half").get<double>() > 19.0);
  CHECK(j.at("n_sigma_above_half").get<double>() < 24.0);
  CHECK(j.at("gme_certified").get<bool>());
}
