#include "lcsim/cluster.hpp"

#include <bit>
#include <cstdint>
#include <stdexcept>

namespace lcsim {

namespace {

// Per-site factor bookkeeping for Pauli products: X*Z = -iY etc.  Letters
// are encoded 0=I, 1=X, 2=Y, 3=Z for table lookups.
int letter_code(char c) {
  switch (c) {
    case 'I': return 0;
    case 'X': return 1;
    case 'Y': return 2;
    case 'Z': return 3;
    default:
      throw std::invalid_argument(std::string("bad Pauli letter '") + c + "'");
  }
}

char code_letter(int c) { return "IXYZ"[c]; }

// product[a][b] = (letter, power of i) with sigma_a sigma_b = i^k sigma_c.
struct PauliProductEntry {
  int letter;
  int i_power;  // modulo 4
};

PauliProductEntry pauli_site_product(int a, int b) {
  if (a == 0) return {b, 0};
  if (b == 0) return {a, 0};
  if (a == b) return {0, 0};
  // XY=iZ, YZ=iX, ZX=iY; reversed order flips the sign (i^3).
  static constexpr int third[4][4] = {{0, 0, 0, 0}, {0, 0, 3, 2}, {0, 3, 0, 1}, {0, 2, 1, 0}};
  const bool forward = (a == 1 && b == 2) || (a == 2 && b == 3) || (a == 3 && b == 1);
  return {third[a][b], forward ? 1 : 3};
}

// Bit masks describing a Pauli string: flips = qubits with X or Y (the
// string maps |i> to |i ^ flips>), phase_mask = qubits whose set bit
// contributes -1 (Y and Z), y_count = number of Y letters (global i^y).
struct PauliMasks {
  std::uint64_t flips = 0;
  std::uint64_t phase_mask = 0;
  int y_count = 0;
};

PauliMasks pauli_masks(const PauliString& p) {
  PauliMasks m;
  for (int q = 0; q < p.n_qubits; ++q) {
    switch (p.letters[q]) {
      case 'I': break;
      case 'X': m.flips |= std::uint64_t{1} << q; break;
      case 'Y':
        m.flips |= std::uint64_t{1} << q;
        m.phase_mask |= std::uint64_t{1} << q;
        ++m.y_count;
        break;
      case 'Z': m.phase_mask |= std::uint64_t{1} << q; break;
      default: throw std::invalid_argument("bad Pauli letter");
    }
  }
  return m;
}

// Coefficient c_i in P|i> = c_i |i ^ flips>.
cplx pauli_coefficient(const PauliMasks& m, int sign, std::uint64_t i) {
  static constexpr cplx i_pow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const int parity = std::popcount(i & m.phase_mask) & 1;
  cplx c = i_pow[m.y_count & 3] * static_cast<double>(sign);
  return parity ? -c : c;
}

}  // namespace

PauliString pauli_identity(int n) {
  return {n, std::string(static_cast<std::size_t>(n), 'I'), 1};
}

void validate_pauli(const PauliString& p) {
  if (p.n_qubits < 1) throw std::invalid_argument("Pauli string needs at least one qubit");
  if (static_cast<int>(p.letters.size()) != p.n_qubits)
    throw std::invalid_argument("Pauli word length " + std::to_string(p.letters.size()) +
                                " != qubit count " + std::to_string(p.n_qubits));
  if (p.sign != 1 && p.sign != -1) throw std::invalid_argument("Pauli sign must be +1 or -1");
  for (char c : p.letters) letter_code(c);
}

PauliString pauli_multiply(const PauliString& a, const PauliString& b) {
  validate_pauli(a);
  validate_pauli(b);
  if (a.n_qubits != b.n_qubits)
    throw std::invalid_argument("Pauli product: qubit counts differ");
  PauliString out;
  out.n_qubits = a.n_qubits;
  out.letters.resize(a.letters.size());
  int i_power = 0;
  for (int q = 0; q < a.n_qubits; ++q) {
    const auto e = pauli_site_product(letter_code(a.letters[q]), letter_code(b.letters[q]));
    out.letters[q] = code_letter(e.letter);
    i_power = (i_power + e.i_power) & 3;
  }
  if (i_power == 1 || i_power == 3)
    throw std::domain_error("Pauli product of anticommuting strings has imaginary phase");
  out.sign = a.sign * b.sign * (i_power == 2 ? -1 : 1);
  return out;
}

bool pauli_commute(const PauliString& a, const PauliString& b) {
  validate_pauli(a);
  validate_pauli(b);
  if (a.n_qubits != b.n_qubits)
    throw std::invalid_argument("Pauli commutation: qubit counts differ");
  int anti = 0;
  for (int q = 0; q < a.n_qubits; ++q) {
    const int ca = letter_code(a.letters[q]);
    const int cb = letter_code(b.letters[q]);
    if (ca != 0 && cb != 0 && ca != cb) ++anti;
  }
  return (anti & 1) == 0;
}

double pauli_expectation(const Eigen::VectorXcd& psi, const PauliString& p) {
  validate_pauli(p);
  if (num_qubits(psi) != p.n_qubits)
    throw std::invalid_argument("pauli_expectation: state/operator qubit counts differ");
  const PauliMasks m = pauli_masks(p);
  const std::uint64_t dim = static_cast<std::uint64_t>(psi.size());
  cplx acc = 0;
  for (std::uint64_t i = 0; i < dim; ++i)
    acc += std::conj(psi(static_cast<Eigen::Index>(i ^ m.flips))) *
           pauli_coefficient(m, p.sign, i) * psi(static_cast<Eigen::Index>(i));
  return acc.real();
}

double pauli_expectation(const Eigen::MatrixXcd& rho, const PauliString& p) {
  validate_pauli(p);
  const std::uint64_t dim = static_cast<std::uint64_t>(rho.rows());
  if (rho.rows() != rho.cols() || dim != (std::uint64_t{1} << p.n_qubits))
    throw std::invalid_argument("pauli_expectation: matrix/operator dimensions differ");
  // Tr(rho P) = sum_i <i|rho P|i> = sum_i c_i rho(i, i ^ flips).
  const PauliMasks m = pauli_masks(p);
  cplx acc = 0;
  for (std::uint64_t i = 0; i < dim; ++i)
    acc += pauli_coefficient(m, p.sign, i) *
           rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i ^ m.flips));
  return acc.real();
}

void validate_circuit(const Circuit& c) {
  if (c.n_qubits < 1 || c.n_qubits > kMaxQubits)
    throw std::invalid_argument("circuit qubit count out of range");
  for (const auto& layer : c.layers) {
    std::uint64_t used = 0;
    for (const auto& g : layer) {
      const bool two = g.kind == GateKind::CZ || g.kind == GateKind::CX;
      if (g.q0 < 0 || g.q0 >= c.n_qubits || (two && (g.q1 < 0 || g.q1 >= c.n_qubits)))
        throw std::invalid_argument("circuit gate target out of range");
      std::uint64_t touches = std::uint64_t{1} << g.q0;
      if (two) {
        if (g.q1 == g.q0) throw std::invalid_argument("circuit gate with duplicate targets");
        touches |= std::uint64_t{1} << g.q1;
      }
      if (used & touches)
        throw std::invalid_argument("circuit layer uses a qubit in two gates");
      used |= touches;
    }
  }
}

std::vector<std::vector<std::pair<int, int>>> cz_schedule(int n) {
  if (n < 2 || n > kMaxQubits)
    throw std::out_of_range("chain length " + std::to_string(n) + " outside [2, " +
                            std::to_string(kMaxQubits) + "]");
  // Chain links (i, i+1), 1-based i = 1..n-1, grouped by i mod 3.  Links in
  // one group are at least three sites apart, so they never share a qubit.
  // Group order 2, 1, 0 starts the block from the high end of the chain.
  std::vector<std::vector<std::pair<int, int>>> layers;
  for (int r : {2, 1, 0}) {
    std::vector<std::pair<int, int>> layer;
    for (int i = 1; i < n; ++i)
      if (i % 3 == r) layer.emplace_back(i - 1, i);  // 0-based qubit pair
    if (!layer.empty()) layers.push_back(std::move(layer));
  }
  return layers;
}

Circuit lc_circuit(int n, GateSet gs) { return lc_circuit(n, gs, 0, n); }

Circuit lc_circuit(int n, GateSet gs, int offset, int total_qubits) {
  if (n < 2 || n > kMaxQubits)
    throw std::out_of_range("chain length " + std::to_string(n) + " outside [2, " +
                            std::to_string(kMaxQubits) + "]");
  if (offset < 0 || total_qubits > kMaxQubits || offset + n > total_qubits)
    throw std::out_of_range("chain [" + std::to_string(offset) + ", " +
                            std::to_string(offset + n) + ") does not fit in " +
                            std::to_string(total_qubits) + " qubits");

  Circuit c;
  c.n_qubits = total_qubits;
  std::vector<CircuitGate> prep;
  prep.reserve(static_cast<std::size_t>(n));
  for (int q = 0; q < n; ++q) prep.push_back({GateKind::Y2, offset + q, -1});
  c.layers.push_back(std::move(prep));

  for (const auto& sched : cz_schedule(n)) {
    if (gs == GateSet::CZ) {
      std::vector<CircuitGate> layer;
      for (auto [a, b] : sched) layer.push_back({GateKind::CZ, offset + a, offset + b});
      c.layers.push_back(std::move(layer));
    } else {
      // CZ(a,b) = (I (x) H) CX(a -> b) (I (x) H) on the higher-index qubit.
      std::vector<CircuitGate> pre, mid, post;
      for (auto [a, b] : sched) {
        pre.push_back({GateKind::H, offset + b, -1});
        mid.push_back({GateKind::CX, offset + a, offset + b});
        post.push_back({GateKind::H, offset + b, -1});
      }
      c.layers.push_back(std::move(pre));
      c.layers.push_back(std::move(mid));
      c.layers.push_back(std::move(post));
    }
  }
  validate_circuit(c);
  return c;
}

Eigen::VectorXcd run_circuit(const Circuit& c) {
  validate_circuit(c);
  Eigen::VectorXcd psi = zero_state(c.n_qubits);
  const Eigen::Matrix2cd y2 = gate_y_half();
  const Eigen::Matrix2cd h = gate_h();
  const Eigen::Matrix4cd cx = gate_cx();
  for (const auto& layer : c.layers) {
    for (const auto& g : layer) {
      switch (g.kind) {
        case GateKind::Y2: apply_gate1(psi, g.q0, y2); break;
        case GateKind::H: apply_gate1(psi, g.q0, h); break;
        case GateKind::CZ: apply_cz(psi, g.q0, g.q1); break;
        case GateKind::CX: apply_gate2(psi, g.q0, g.q1, cx); break;
      }
    }
  }
  return psi;
}

PauliString stabilizer(int i, int n) {
  if (n < 1 || n > kMaxQubits) throw std::out_of_range("stabilizer: bad chain length");
  if (i < 1 || i > n)
    throw std::out_of_range("stabilizer index " + std::to_string(i) + " outside [1, " +
                            std::to_string(n) + "]");
  PauliString p = pauli_identity(n);
  p.letters[i - 1] = 'X';
  if (i - 2 >= 0) p.letters[i - 2] = 'Z';
  if (i < n) p.letters[i] = 'Z';
  return p;
}

Eigen::VectorXcd lc_state(int n) {
  if (n < 2 || n > kMaxQubits)
    throw std::out_of_range("chain length " + std::to_string(n) + " outside [2, " +
                            std::to_string(kMaxQubits) + "]");
  Eigen::VectorXcd psi = plus_state(n);
  for (int i = 0; i + 1 < n; ++i) apply_cz(psi, i, i + 1);
  return psi;
}

WitnessCoefficients witness_coefficients(int n) {
  if (n < 2 || n > kMaxQubits)
    throw std::out_of_range("chain length " + std::to_string(n) + " outside [2, " +
                            std::to_string(kMaxQubits) + "]");
  WitnessCoefficients wc;
  wc.n_qubits = n;
  wc.basis_xz.resize(static_cast<std::size_t>(n));
  wc.basis_zx.resize(static_cast<std::size_t>(n));
  for (int q = 0; q < n; ++q) {
    const bool odd_position = (q % 2) == 0;  // chain position q+1
    wc.basis_xz[static_cast<std::size_t>(q)] = odd_position ? 'X' : 'Z';
    wc.basis_zx[static_cast<std::size_t>(q)] = odd_position ? 'Z' : 'X';
  }

  // In its matching basis each stabilizer becomes a Z-parity constraint on
  // the bits of its support (X letters are rotated into Z by the Hadamards,
  // Z letters are measured directly).  The coefficient vector is the
  // indicator of outcomes satisfying every constraint (even parity <=> +1).
  const std::uint64_t dim = std::uint64_t{1} << n;
  auto build = [&](int parity_start) {
    std::vector<std::uint64_t> masks;
    for (int i = parity_start; i <= n; i += 2) {
      std::uint64_t m = std::uint64_t{1} << (i - 1);
      if (i - 2 >= 0) m |= std::uint64_t{1} << (i - 2);
      if (i < n) m |= std::uint64_t{1} << i;
      masks.push_back(m);
    }
    Eigen::VectorXd alpha(static_cast<Eigen::Index>(dim));
    for (std::uint64_t k = 0; k < dim; ++k) {
      bool ok = true;
      for (std::uint64_t m : masks)
        if (std::popcount(k & m) & 1) {
          ok = false;
          break;
        }
      alpha(static_cast<Eigen::Index>(k)) = ok ? 1.0 : 0.0;
    }
    return alpha;
  };
  wc.alpha_xz = build(1);
  wc.alpha_zx = build(2);
  return wc;
}

}  // namespace lcsim
