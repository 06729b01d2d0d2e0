#include "lcsim/statevec.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "lcsim/rng.hpp"

namespace lcsim {

namespace {

constexpr double kUnitarityTol = 1e-8;

void check_target(int target, int n, const char* what) {
  if (target < 0 || target >= n)
    throw std::out_of_range(std::string(what) + ": qubit " + std::to_string(target) +
                            " out of range for " + std::to_string(n) + " qubits");
}

// Inserts a zero bit at `pos`, shifting higher bits left.
inline std::uint64_t insert_zero_bit(std::uint64_t i, int pos) {
  const std::uint64_t low = i & ((std::uint64_t{1} << pos) - 1);
  return ((i >> pos) << (pos + 1)) | low;
}

}  // namespace

int num_qubits(const Eigen::VectorXcd& psi) {
  const auto dim = static_cast<std::uint64_t>(psi.size());
  if (dim < 2 || (dim & (dim - 1)) != 0)
    throw std::invalid_argument("statevector size " + std::to_string(dim) +
                                " is not a power of two");
  int n = 0;
  while ((std::uint64_t{1} << n) < dim) ++n;
  return n;
}

Eigen::VectorXcd zero_state(int n) {
  if (n < 1 || n > kMaxQubits)
    throw std::out_of_range("qubit count " + std::to_string(n) + " outside [1, " +
                            std::to_string(kMaxQubits) + "]");
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(std::int64_t{1} << n);
  psi(0) = 1.0;
  return psi;
}

Eigen::VectorXcd plus_state(int n) {
  if (n < 1 || n > kMaxQubits)
    throw std::out_of_range("qubit count " + std::to_string(n) + " outside [1, " +
                            std::to_string(kMaxQubits) + "]");
  const std::int64_t dim = std::int64_t{1} << n;
  return Eigen::VectorXcd::Constant(dim, cplx(1.0 / std::sqrt(static_cast<double>(dim)), 0.0));
}

Eigen::Matrix2cd gate_x() {
  Eigen::Matrix2cd m;
  m << 0, 1, 1, 0;
  return m;
}

Eigen::Matrix2cd gate_y() {
  Eigen::Matrix2cd m;
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}

Eigen::Matrix2cd gate_z() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, -1;
  return m;
}

Eigen::Matrix2cd gate_h() {
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::Matrix2cd m;
  m << s, s, s, -s;
  return m;
}

Eigen::Matrix2cd gate_y_half() { return gate_ry(1.5707963267948966); }

Eigen::Matrix2cd gate_rx(double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  Eigen::Matrix2cd m;
  m << c, cplx(0, -s), cplx(0, -s), c;
  return m;
}

Eigen::Matrix2cd gate_ry(double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  Eigen::Matrix2cd m;
  m << c, -s, s, c;
  return m;
}

Eigen::Matrix2cd gate_rz(double theta) {
  Eigen::Matrix2cd m;
  m << std::exp(cplx(0, -theta / 2)), 0, 0, std::exp(cplx(0, theta / 2));
  return m;
}

Eigen::Matrix2cd gate_phase(double theta) {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, std::exp(cplx(0, theta));
  return m;
}

Eigen::Matrix4cd gate_cz() {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Identity();
  m(3, 3) = -1;
  return m;
}

Eigen::Matrix4cd gate_cx() {
  // First target (low bit) is the control: |c t> -> |c, t^c>.
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 0) = 1;  // |00> -> |00>
  m(3, 1) = 1;  // |01> (control set) -> |11>
  m(2, 2) = 1;  // |10> -> |10>
  m(1, 3) = 1;  // |11> -> |01>
  return m;
}

void apply_gate1(Eigen::VectorXcd& psi, int target, const Eigen::Matrix2cd& u) {
  const int n = num_qubits(psi);
  check_target(target, n, "apply_gate1");
  if ((u.adjoint() * u - Eigen::Matrix2cd::Identity()).norm() > kUnitarityTol)
    throw std::invalid_argument("apply_gate1: matrix is not unitary");

  const double u00r = u(0, 0).real(), u00i = u(0, 0).imag();
  const double u01r = u(0, 1).real(), u01i = u(0, 1).imag();
  const double u10r = u(1, 0).real(), u10i = u(1, 0).imag();
  const double u11r = u(1, 1).real(), u11i = u(1, 1).imag();

  cplx* a = psi.data();
  const std::uint64_t mask = std::uint64_t{1} << target;
  const std::uint64_t lo = mask - 1;
  const std::uint64_t half = static_cast<std::uint64_t>(psi.size()) >> 1;
  for (std::uint64_t k = 0; k < half; ++k) {
    const std::uint64_t i0 = ((k & ~lo) << 1) | (k & lo);
    const std::uint64_t i1 = i0 | mask;
    const double a0r = a[i0].real(), a0i = a[i0].imag();
    const double a1r = a[i1].real(), a1i = a[i1].imag();
    a[i0] = cplx(u00r * a0r - u00i * a0i + u01r * a1r - u01i * a1i,
                 u00r * a0i + u00i * a0r + u01r * a1i + u01i * a1r);
    a[i1] = cplx(u10r * a0r - u10i * a0i + u11r * a1r - u11i * a1i,
                 u10r * a0i + u10i * a0r + u11r * a1i + u11i * a1r);
  }
}

void apply_gate2(Eigen::VectorXcd& psi, int t0, int t1, const Eigen::Matrix4cd& u) {
  const int n = num_qubits(psi);
  check_target(t0, n, "apply_gate2");
  check_target(t1, n, "apply_gate2");
  if (t0 == t1) throw std::invalid_argument("apply_gate2: duplicate target qubits");
  if ((u.adjoint() * u - Eigen::Matrix4cd::Identity()).norm() > kUnitarityTol)
    throw std::invalid_argument("apply_gate2: matrix is not unitary");

  const std::uint64_t m0 = std::uint64_t{1} << t0;
  const std::uint64_t m1 = std::uint64_t{1} << t1;
  const int plo = t0 < t1 ? t0 : t1;
  const int phi = t0 < t1 ? t1 : t0;
  const std::uint64_t quarter = static_cast<std::uint64_t>(psi.size()) >> 2;

  cplx* a = psi.data();
  cplx in[4], out[4];
  for (std::uint64_t k = 0; k < quarter; ++k) {
    const std::uint64_t base = insert_zero_bit(insert_zero_bit(k, plo), phi);
    const std::uint64_t idx[4] = {base, base | m0, base | m1, base | m0 | m1};
    for (int r = 0; r < 4; ++r) in[r] = a[idx[r]];
    for (int r = 0; r < 4; ++r)
      out[r] = u(r, 0) * in[0] + u(r, 1) * in[1] + u(r, 2) * in[2] + u(r, 3) * in[3];
    for (int r = 0; r < 4; ++r) a[idx[r]] = out[r];
  }
}

void apply_diag1(Eigen::VectorXcd& psi, int target, cplx d0, cplx d1) {
  const int n = num_qubits(psi);
  check_target(target, n, "apply_diag1");
  const std::uint64_t mask = std::uint64_t{1} << target;
  const std::uint64_t dim = static_cast<std::uint64_t>(psi.size());
  cplx* a = psi.data();
  for (std::uint64_t i = 0; i < dim; ++i) a[i] *= (i & mask) ? d1 : d0;
}

void apply_diag2(Eigen::VectorXcd& psi, int t0, int t1, const Eigen::Vector4cd& d) {
  const int n = num_qubits(psi);
  check_target(t0, n, "apply_diag2");
  check_target(t1, n, "apply_diag2");
  if (t0 == t1) throw std::invalid_argument("apply_diag2: duplicate target qubits");
  const std::uint64_t m0 = std::uint64_t{1} << t0;
  const std::uint64_t m1 = std::uint64_t{1} << t1;
  const std::uint64_t dim = static_cast<std::uint64_t>(psi.size());
  cplx* a = psi.data();
  for (std::uint64_t i = 0; i < dim; ++i)
    a[i] *= d(((i & m1) ? 2 : 0) | ((i & m0) ? 1 : 0));
}

void apply_cz(Eigen::VectorXcd& psi, int a, int b) {
  const int n = num_qubits(psi);
  check_target(a, n, "apply_cz");
  check_target(b, n, "apply_cz");
  if (a == b) throw std::invalid_argument("apply_cz: duplicate target qubits");
  const std::uint64_t both = (std::uint64_t{1} << a) | (std::uint64_t{1} << b);
  const std::uint64_t dim = static_cast<std::uint64_t>(psi.size());
  cplx* amps = psi.data();
  for (std::uint64_t i = 0; i < dim; ++i)
    if ((i & both) == both) amps[i] = -amps[i];
}

void basis_rotate(Eigen::VectorXcd& psi, std::string_view basis) {
  const int n = num_qubits(psi);
  if (static_cast<int>(basis.size()) != n)
    throw std::invalid_argument("basis word length " + std::to_string(basis.size()) +
                                " != qubit count " + std::to_string(n));
  const Eigen::Matrix2cd h = gate_h();
  for (int q = 0; q < n; ++q) {
    if (basis[q] == 'X')
      apply_gate1(psi, q, h);
    else if (basis[q] != 'Z')
      throw std::invalid_argument(std::string("basis letter '") + basis[q] +
                                  "' is not X or Z");
  }
}

Eigen::VectorXd probabilities(const Eigen::VectorXcd& psi) {
  (void)num_qubits(psi);
  return psi.cwiseAbs2();
}

Eigen::VectorXd cumulative_distribution(const Eigen::VectorXd& p) {
  Eigen::VectorXd c(p.size());
  double run = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    run += p(i);
    c(i) = run;
  }
  return c;
}

std::uint64_t sample_index(const Eigen::VectorXd& cumulative, double u) {
  const double target = u * cumulative(cumulative.size() - 1);
  // Smallest index with cumulative(i) > target.
  Eigen::Index lo = 0, hi = cumulative.size() - 1;
  while (lo < hi) {
    const Eigen::Index mid = lo + (hi - lo) / 2;
    if (cumulative(mid) > target)
      hi = mid;
    else
      lo = mid + 1;
  }
  return static_cast<std::uint64_t>(lo);
}

Counts sample(const Eigen::VectorXd& dist, std::uint64_t shots, std::uint64_t seed) {
  if (dist.size() < 1) throw std::invalid_argument("sample: empty distribution");
  if (shots < 1) throw std::invalid_argument("sample: shots must be >= 1");
  for (Eigen::Index i = 0; i < dist.size(); ++i)
    if (dist(i) < 0.0)
      throw std::domain_error("sample: negative probability at outcome " + std::to_string(i));

  int n = 0;
  while ((Eigen::Index{1} << n) < dist.size()) ++n;

  const Eigen::VectorXd cum = cumulative_distribution(dist);
  auto stream = rng::Stream::derive(seed, {rng::kStreamMeasure});
  Counts counts;
  counts.n_qubits = n;
  for (std::uint64_t s = 0; s < shots; ++s)
    ++counts.table[sample_index(cum, stream.uniform())];
  return counts;
}

Eigen::VectorXd counts_to_distribution(const Counts& counts) {
  if (counts.n_qubits < 1 || counts.table.empty())
    throw std::invalid_argument("counts_to_distribution: empty record");
  const std::uint64_t total = counts.total();
  Eigen::VectorXd p = Eigen::VectorXd::Zero(Eigen::Index{1} << counts.n_qubits);
  for (const auto& [outcome, c] : counts.table) {
    if (outcome >= static_cast<std::uint64_t>(p.size()))
      throw std::out_of_range("counts_to_distribution: outcome exceeds 2^n");
    p(static_cast<Eigen::Index>(outcome)) =
        static_cast<double>(c) / static_cast<double>(total);
  }
  return p;
}

std::string format_outcome(std::uint64_t outcome, int n_qubits) {
  std::string s(static_cast<std::size_t>(n_qubits), '0');
  for (int q = 0; q < n_qubits; ++q)
    if (outcome & (std::uint64_t{1} << q)) s[n_qubits - 1 - q] = '1';
  return s;
}

std::uint64_t parse_outcome(std::string_view bits) {
  if (bits.empty()) throw std::runtime_error("empty outcome bitstring");
  std::uint64_t v = 0;
  for (char c : bits) {
    if (c != '0' && c != '1')
      throw std::runtime_error(std::string("bad character '") + c + "' in outcome bitstring");
    v = (v << 1) | static_cast<std::uint64_t>(c - '0');
  }
  return v;
}

}  // namespace lcsim
