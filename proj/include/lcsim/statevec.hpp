#pragma once

// Dense statevector engine.
//
// States are Eigen column vectors of 2^n complex amplitudes.  Qubit 0 is the
// least-significant bit of the basis index; presentation-layer helpers print
// bitstrings highest-qubit-first (see format_outcome).  Gate kernels walk
// bit-masked index pairs so no 2^n x 2^n matrix is ever materialized.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace lcsim {

using cplx = std::complex<double>;

// Hard cap on dense simulation size (16 MiB of amplitudes at the cap).
inline constexpr int kMaxQubits = 20;

// Measurement record: outcome index -> occurrences.
struct Counts {
  int n_qubits = 0;
  std::map<std::uint64_t, std::uint64_t> table;

  std::uint64_t total() const {
    std::uint64_t s = 0;
    for (const auto& [outcome, c] : table) s += c;
    return s;
  }
};

// ---- state construction ----------------------------------------------------

// Number of qubits for a 2^n-sized amplitude vector; throws
// std::invalid_argument if the size is not a power of two (or is < 2).
int num_qubits(const Eigen::VectorXcd& psi);

// |0...0> and |+...+>; throw std::out_of_range for n outside [1, kMaxQubits].
Eigen::VectorXcd zero_state(int n);
Eigen::VectorXcd plus_state(int n);

// ---- gate factories ----------------------------------------------------------

Eigen::Matrix2cd gate_x();
Eigen::Matrix2cd gate_y();
Eigen::Matrix2cd gate_z();
Eigen::Matrix2cd gate_h();
// Y/2 rotation, exp(-i pi Y / 4) = [[1, -1], [1, 1]] / sqrt(2): |0> -> |+>.
Eigen::Matrix2cd gate_y_half();
Eigen::Matrix2cd gate_rx(double theta);
Eigen::Matrix2cd gate_ry(double theta);
Eigen::Matrix2cd gate_rz(double theta);
// diag(1, e^{i theta})
Eigen::Matrix2cd gate_phase(double theta);

// Two-qubit matrices are indexed by (bit of second target << 1) | bit of
// first target, matching apply_gate2's target order.
Eigen::Matrix4cd gate_cz();
// CX with the FIRST target as control, SECOND as target.
Eigen::Matrix4cd gate_cx();

// ---- gate application (in place) -------------------------------------------

// 2x2 unitary on one qubit; throws std::out_of_range for a bad target and
// std::invalid_argument if ||U^H U - I|| > 1e-8.
void apply_gate1(Eigen::VectorXcd& psi, int target, const Eigen::Matrix2cd& u);

// 4x4 unitary on two distinct qubits; matrix row/col index is
// (bit(t1) << 1) | bit(t0).  Same validation rules as apply_gate1.
void apply_gate2(Eigen::VectorXcd& psi, int t0, int t1, const Eigen::Matrix4cd& u);

// Fast paths for diagonal operations (no unitarity requirement: these also
// serve non-unitary no-jump updates in trajectory simulation).
void apply_diag1(Eigen::VectorXcd& psi, int target, cplx d0, cplx d1);
void apply_diag2(Eigen::VectorXcd& psi, int t0, int t1, const Eigen::Vector4cd& d);
void apply_cz(Eigen::VectorXcd& psi, int a, int b);

// Hadamard on every qubit whose basis letter is 'X'; 'Z' qubits untouched.
// Throws std::invalid_argument on length mismatch or letters outside {X, Z}.
void basis_rotate(Eigen::VectorXcd& psi, std::string_view basis);

// ---- measurement -------------------------------------------------------------

// p[k] = |amps[k]|^2.
Eigen::VectorXd probabilities(const Eigen::VectorXcd& psi);

// Running sum of a distribution (last entry = total mass).
Eigen::VectorXd cumulative_distribution(const Eigen::VectorXd& p);

// Smallest index whose cumulative value exceeds u * total; u in (0, 1).
std::uint64_t sample_index(const Eigen::VectorXd& cumulative, double u);

// Multinomial sampling by per-shot inverse-CDF draws from a stream derived
// from `seed`.  Throws std::domain_error if any entry is negative (mitigated
// quasi-probabilities are not sampleable) and std::invalid_argument for an
// empty distribution or zero shots.
Counts sample(const Eigen::VectorXd& dist, std::uint64_t shots, std::uint64_t seed);

// Empirical distribution (counts / total) over all 2^n outcomes; throws
// std::invalid_argument for an empty record.
Eigen::VectorXd counts_to_distribution(const Counts& counts);

// ---- formatting ----------------------------------------------------------------

// Bitstring with the highest-index qubit first, e.g. outcome 1 on 3 qubits
// (qubit 0 set) prints "001".
std::string format_outcome(std::uint64_t outcome, int n_qubits);

// Inverse of format_outcome; throws std::runtime_error on non-binary input.
std::uint64_t parse_outcome(std::string_view bits);

}  // namespace lcsim
