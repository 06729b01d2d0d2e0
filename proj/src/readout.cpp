#include "lcsim/readout.hpp"

#include <charconv>
#include <cstdint>
#include <stdexcept>

namespace lcsim {

namespace {

constexpr double kSingularTol = 1e-12;

int qubits_for_size(Eigen::Index size, const char* what) {
  const auto dim = static_cast<std::uint64_t>(size);
  if (dim < 2 || (dim & (dim - 1)) != 0)
    throw std::invalid_argument(std::string(what) + ": vector size " + std::to_string(size) +
                                " is not a power of two");
  int n = 0;
  while ((std::uint64_t{1} << n) < dim) ++n;
  return n;
}

}  // namespace

void validate_transition(const TransitionMatrix& t) {
  if (!(t.f00 > 0.0) || t.f00 > 1.0 || !(t.f11 > 0.0) || t.f11 > 1.0)
    throw std::invalid_argument("confusion probabilities must lie in (0, 1]: f00=" +
                                std::to_string(t.f00) + " f11=" + std::to_string(t.f11));
}

double transition_determinant(const TransitionMatrix& t) { return t.f00 + t.f11 - 1.0; }

Eigen::Matrix2d transition_matrix(const TransitionMatrix& t) {
  validate_transition(t);
  Eigen::Matrix2d m;
  m << t.f00, 1.0 - t.f11, 1.0 - t.f00, t.f11;
  return m;
}

Eigen::Matrix2d transition_inverse(const TransitionMatrix& t) {
  validate_transition(t);
  const double det = transition_determinant(t);
  if (det <= kSingularTol)
    throw std::domain_error("confusion matrix is singular (f00 + f11 - 1 = " +
                            std::to_string(det) + "); mitigation is ill-conditioned");
  Eigen::Matrix2d m;
  m << t.f11, t.f11 - 1.0, t.f00 - 1.0, t.f00;
  return m / det;
}

Eigen::VectorXd apply_kronecker_factors(const Eigen::VectorXd& v,
                                        const std::vector<Eigen::Matrix2d>& factors) {
  const int n = qubits_for_size(v.size(), "apply_kronecker_factors");
  if (static_cast<int>(factors.size()) != n)
    throw std::invalid_argument("apply_kronecker_factors: " + std::to_string(factors.size()) +
                                " factors for " + std::to_string(n) + " qubits");
  Eigen::VectorXd out = v;
  double* a = out.data();
  for (int q = 0; q < n; ++q) {
    const Eigen::Matrix2d& m = factors[static_cast<std::size_t>(q)];
    const double m00 = m(0, 0), m01 = m(0, 1), m10 = m(1, 0), m11 = m(1, 1);
    const std::uint64_t mask = std::uint64_t{1} << q;
    const std::uint64_t lo = mask - 1;
    const std::uint64_t half = static_cast<std::uint64_t>(v.size()) >> 1;
    for (std::uint64_t k = 0; k < half; ++k) {
      const std::uint64_t i0 = ((k & ~lo) << 1) | (k & lo);
      const std::uint64_t i1 = i0 | mask;
      const double x0 = a[i0], x1 = a[i1];
      a[i0] = m00 * x0 + m01 * x1;
      a[i1] = m10 * x0 + m11 * x1;
    }
  }
  return out;
}

Eigen::VectorXd apply_readout_noise(const Eigen::VectorXd& dist,
                                    const std::vector<TransitionMatrix>& t) {
  std::vector<Eigen::Matrix2d> factors;
  factors.reserve(t.size());
  for (const auto& ti : t) factors.push_back(transition_matrix(ti));
  return apply_kronecker_factors(dist, factors);
}

Eigen::VectorXd mitigate(const Eigen::VectorXd& measured,
                         const std::vector<TransitionMatrix>& t) {
  std::vector<Eigen::Matrix2d> factors;
  factors.reserve(t.size());
  for (const auto& ti : t) factors.push_back(transition_inverse(ti));
  return apply_kronecker_factors(measured, factors);
}

double negative_mass(const Eigen::VectorXd& dist) {
  double m = 0;
  for (Eigen::Index i = 0; i < dist.size(); ++i)
    if (dist(i) < 0) m -= dist(i);
  return m;
}

std::vector<TransitionMatrix> DeviceParams::transitions() const {
  std::vector<TransitionMatrix> t;
  t.reserve(qubits.size());
  for (const auto& q : qubits) t.push_back({q.f00, q.f11});
  return t;
}

DeviceParams load_device_params(const ConfigFile& cfg) {
  DeviceParams dev;
  for (int i = 1;; ++i) {
    const std::string section = "qubit " + std::to_string(i);
    if (!cfg.has_section(section)) break;

    QubitParams q;
    auto require = [&](const char* key) {
      if (!cfg.has(section, key))
        throw std::runtime_error("device params: [" + section + "] is missing required key '" +
                                 key + "'");
      return cfg.get_double(section, key);
    };
    q.t1_us = require("t1_us");
    q.t2star_us = require("t2star_us");
    q.f00 = require("f00");
    q.f11 = require("f11");
    q.idle_freq_ghz = cfg.get_double_or(section, "idle_freq_ghz", 0.0);
    q.opt_freq_ghz = cfg.get_double_or(section, "opt_freq_ghz", 0.0);
    q.anharm_mhz = cfg.get_double_or(section, "anharm_mhz", 0.0);
    q.y2_fidelity = cfg.get_double_or(section, "y2_fidelity", 1.0);
    q.cz_fidelity = cfg.get_double_or(section, "cz_fidelity", 1.0);

    if (!(q.t1_us > 0))
      throw std::runtime_error("device params: [" + section + "] t1_us must be positive");
    if (!(q.t2star_us > 0))
      throw std::runtime_error("device params: [" + section + "] t2star_us must be positive");
    validate_transition({q.f00, q.f11});
    if (q.t2star_us > 2.0 * q.t1_us * (1.0 + 1e-6))
      dev.warnings.push_back("[" + section + "] t2star_us exceeds 2*t1_us (measurement slack?)");

    dev.qubits.push_back(q);
  }
  if (dev.qubits.empty())
    throw std::runtime_error("device params: no [qubit 1] section found");
  // A qubit section beyond the contiguous 1..n run means the numbering has a
  // gap; silently renumbering would scramble the chain order.
  for (const auto& [name, keys] : cfg.sections()) {
    if (name.rfind("qubit ", 0) != 0) continue;
    int index = 0;
    const char* begin = name.data() + 6;
    const auto [ptr, ec] = std::from_chars(begin, name.data() + name.size(), index);
    if (ec != std::errc{} || ptr != name.data() + name.size()) {
      throw std::runtime_error("device params: malformed section [" + name + "]");
    }
    if (index < 1 || index > static_cast<int>(dev.qubits.size())) {
      throw std::runtime_error("device params: [" + name + "] leaves a gap (sections must "
                               "run contiguously from [qubit 1])");
    }
  }
  return dev;
}

DeviceParams load_device_params_file(const std::string& path) {
  return load_device_params(load_config(path));
}

}  // namespace lcsim
