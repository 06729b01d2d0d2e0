#pragma once

// Text I/O for experiment artifacts: CSV distributions, counts, histograms,
// optimizer and control-trajectory traces, and JSON witness reports.
// Doubles are written in their shortest round-trip decimal form, so a
// write/read cycle reproduces every value bit-exactly.

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

#include "lcsim/pulse.hpp"
#include "lcsim/statevec.hpp"
#include "lcsim/witness.hpp"

namespace lcsim {

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

// Strict full-token parse; throws std::runtime_error quoting the token.
double parse_double(std::string_view token);

// Distribution files: header "outcome,probability"; outcomes are MSB-first
// bitstrings of uniform length (which fixes the qubit count).  Values may
// be quasi-probabilities (negative entries allowed).  Rows may cover any
// subset of outcomes; missing outcomes read back as zero.
void write_distribution_csv(const std::string& path, const Eigen::VectorXd& p, int n_qubits);

struct DistributionFile {
  int n_qubits = 0;
  Eigen::VectorXd p;
};
DistributionFile read_distribution_csv(const std::string& path);

// Counts files: header "outcome,count", same outcome convention.
void write_counts_csv(const std::string& path, const Counts& counts);
Counts read_counts_csv(const std::string& path);

// Histogram files: header "bin_low,bin_high,count".
void write_histogram_csv(const std::string& path, const std::vector<HistogramBin>& bins);

// Witness report as a single JSON object with snake_case keys.
std::string witness_report_json(const WitnessResult& result);
void write_witness_report_json(const std::string& path, const WitnessResult& result);

// Human-readable one-screen witness summary.
std::string witness_report_text(const WitnessResult& result);

// Optimizer progress: "iteration,objective,param_0,...,param_{k-1}" with one
// row per iteration (best-seen vertex).
void write_optimizer_trace_csv(const std::string& path, const NelderMeadResult& result);

// Control trajectory sampled every dt_ns: "t_ns,omega1_ghz,omega2_ghz".
void write_waveform_csv(const std::string& path, const Waveform& wf, double dt_ns);

}  // namespace lcsim
