#include "lcsim/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include <json.hpp>

namespace lcsim {

namespace {

std::ofstream open_for_writing(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

void finish_writing(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

std::uint64_t parse_count(std::string_view token, const std::string& path) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw std::runtime_error("cannot parse count '" + std::string(token) + "' in '" + path +
                             "'");
  }
  return value;
}

void check_header(const std::vector<std::string>& lines, std::string_view expected,
                  const std::string& path) {
  if (lines.empty() || lines.front() != expected) {
    throw std::runtime_error("'" + path + "' must start with header '" +
                             std::string(expected) + "'");
  }
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view token) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw std::runtime_error("cannot parse number '" + std::string(token) + "'");
  }
  return value;
}

void write_distribution_csv(const std::string& path, const Eigen::VectorXd& p, int n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw std::out_of_range("write_distribution_csv: unsupported qubit count");
  }
  if (p.size() != (Eigen::Index{1} << n_qubits)) {
    throw std::invalid_argument("write_distribution_csv: vector length must be 2^n");
  }
  std::ofstream out = open_for_writing(path);
  out << "outcome,probability\n";
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    out << format_outcome(static_cast<std::uint64_t>(i), n_qubits) << ','
        << format_double(p(i)) << '\n';
  }
  finish_writing(out, path);
}

DistributionFile read_distribution_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  check_header(lines, "outcome,probability", path);

  DistributionFile file;
  std::vector<bool> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_fields(lines[i]);
    if (fields.size() != 2) {
      throw std::runtime_error("'" + path + "' line " + std::to_string(i + 1) +
                               ": expected 2 fields");
    }
    if (file.n_qubits == 0) {
      file.n_qubits = static_cast<int>(fields[0].size());
      if (file.n_qubits < 1 || file.n_qubits > kMaxQubits) {
        throw std::runtime_error("'" + path + "': unsupported outcome width");
      }
      file.p = Eigen::VectorXd::Zero(Eigen::Index{1} << file.n_qubits);
      seen.assign(static_cast<std::size_t>(file.p.size()), false);
    }
    if (static_cast<int>(fields[0].size()) != file.n_qubits) {
      throw std::runtime_error("'" + path + "' line " + std::to_string(i + 1) +
                               ": inconsistent outcome width");
    }
    const std::uint64_t outcome = parse_outcome(fields[0]);
    if (seen[outcome]) {
      throw std::runtime_error("'" + path + "' line " + std::to_string(i + 1) +
                               ": duplicate outcome");
    }
    seen[outcome] = true;
    file.p(static_cast<Eigen::Index>(outcome)) = parse_double(fields[1]);
  }
  if (file.n_qubits == 0) throw std::runtime_error("'" + path + "' has no data rows");
  return file;
}

void write_counts_csv(const std::string& path, const Counts& counts) {
  if (counts.n_qubits < 1 || counts.n_qubits > kMaxQubits) {
    throw std::out_of_range("write_counts_csv: unsupported qubit count");
  }
  std::ofstream out = open_for_writing(path);
  out << "outcome,count\n";
  for (const auto& [outcome, c] : counts.table) {
    out << format_outcome(outcome, counts.n_qubits) << ',' << c << '\n';
  }
  finish_writing(out, path);
}

Counts read_counts_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  check_header(lines, "outcome,count", path);

  Counts counts;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_fields(lines[i]);
    if (fields.size() != 2) {
      throw std::runtime_error("'" + path + "' line " + std::to_string(i + 1) +
                               ": expected 2 fields");
    }
    if (counts.n_qubits == 0) {
      counts.n_qubits = static_cast<int>(fields[0].size());
      if (counts.n_qubits < 1 || counts.n_qubits > kMaxQubits) {
        throw std::runtime_error("'" + path + "': unsupported outcome width");
      }
    }
    if (static_cast<int>(fields[0].size()) != counts.n_qubits) {
      throw std::runtime_error("'" + path + "' line " + std::to_string(i + 1) +
                               ": inconsistent outcome width");
    }
    const std::uint64_t outcome = parse_outcome(fields[0]);
    if (counts.table.count(outcome) != 0) {
      throw std::runtime_error("'" + path + "' line " + std::to_string(i + 1) +
                               ": duplicate outcome");
    }
    counts.table[outcome] = parse_count(fields[1], path);
  }
  if (counts.n_qubits == 0) throw std::runtime_error("'" + path + "' has no data rows");
  return counts;
}

void write_histogram_csv(const std::string& path, const std::vector<HistogramBin>& bins) {
  std::ofstream out = open_for_writing(path);
  out << "bin_low,bin_high,count\n";
  for (const HistogramBin& bin : bins) {
    out << format_double(bin.low) << ',' << format_double(bin.high) << ',' << bin.count
        << '\n';
  }
  finish_writing(out, path);
}

std::string witness_report_json(const WitnessResult& result) {
  nlohmann::json j;
  j["n_qubits"] = result.n_qubits;
  j["fidelity_bound"] = result.fidelity_bound;
  j["sigma_shot"] = result.sigma_shot;
  j["sigma_transition"] = result.sigma_transition;
  j["sigma_total"] = result.sigma_total;
  j["n_sigma_above_half"] = result.n_sigma_above_half;
  j["gme_certified"] = result.gme_certified;
  return j.dump(2) + "\n";
}

void write_witness_report_json(const std::string& path, const WitnessResult& result) {
  std::ofstream out = open_for_writing(path);
  out << witness_report_json(result);
  finish_writing(out, path);
}

std::string witness_report_text(const WitnessResult& result) {
  std::ostringstream os;
  os << "qubits:             " << result.n_qubits << "\n"
     << "fidelity bound:     " << format_double(result.fidelity_bound) << "\n"
     << "sigma shot:         " << format_double(result.sigma_shot) << "\n"
     << "sigma transition:   " << format_double(result.sigma_transition) << "\n"
     << "sigma total:        " << format_double(result.sigma_total) << "\n"
     << "sigmas above 0.5:   " << format_double(result.n_sigma_above_half) << "\n"
     << "GME certified:      " << (result.gme_certified ? "yes" : "no") << "\n";
  return os.str();
}

void write_optimizer_trace_csv(const std::string& path, const NelderMeadResult& result) {
  if (result.trace.size() != result.trace_x.size()) {
    throw std::invalid_argument("write_optimizer_trace_csv: trace lengths disagree");
  }
  std::ofstream out = open_for_writing(path);
  out << "iteration,objective";
  const Eigen::Index dims = result.trace_x.empty() ? 0 : result.trace_x.front().size();
  for (Eigen::Index d = 0; d < dims; ++d) out << ",param_" << d;
  out << '\n';
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    out << i << ',' << format_double(result.trace[i]);
    for (Eigen::Index d = 0; d < result.trace_x[i].size(); ++d) {
      out << ',' << format_double(result.trace_x[i](d));
    }
    out << '\n';
  }
  finish_writing(out, path);
}

void write_waveform_csv(const std::string& path, const Waveform& wf, double dt_ns) {
  wf.validate();
  if (!std::isfinite(dt_ns) || dt_ns <= 0.0) {
    throw std::invalid_argument("write_waveform_csv: dt_ns must be positive");
  }
  std::ofstream out = open_for_writing(path);
  out << "t_ns,omega1_ghz,omega2_ghz\n";
  const auto steps = static_cast<long>(std::ceil(wf.duration_ns / dt_ns - 1e-12));
  for (long k = 0; k <= steps; ++k) {
    const double t = std::min(static_cast<double>(k) * dt_ns, wf.duration_ns);
    out << format_double(t) << ',' << format_double(tuned_frequency(wf, t)) << ','
        << format_double(partner_frequency(wf, t)) << '\n';
  }
  finish_writing(out, path);
}

}  // namespace lcsim
