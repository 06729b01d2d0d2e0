#pragma once

// Linear-chain cluster states: stabilizer operators, entangling-layer
// schedules, circuit construction for CZ- and CX-based gate sets, and the
// 0/1 witness coefficient vectors for the two-setting fidelity bound.
//
// Chain positions are 1-based in the physics convention (stabilizer i has X
// at position i, Z at i-1 and i+1); qubit indices in code are 0-based with
// qubit 0 = chain position 1.

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

#include "lcsim/statevec.hpp"

namespace lcsim {

// ---- Pauli strings -------------------------------------------------------------

struct PauliString {
  int n_qubits = 0;
  std::string letters;  // length n_qubits over {I, X, Y, Z}; index 0 = qubit 0
  int sign = 1;         // +1 or -1
};

PauliString pauli_identity(int n);

// Validates length, letters, and sign; throws std::invalid_argument.
void validate_pauli(const PauliString& p);

// Product of two Pauli strings.  Throws std::domain_error if the result
// carries an imaginary phase (happens only for anticommuting factors).
PauliString pauli_multiply(const PauliString& a, const PauliString& b);

// Symplectic commutation check.
bool pauli_commute(const PauliString& a, const PauliString& b);

// <psi|P|psi> (pure) or Tr(rho P) (density matrix); real within float dust
// for Hermitian P.  Throws std::invalid_argument on dimension mismatch.
double pauli_expectation(const Eigen::VectorXcd& psi, const PauliString& p);
double pauli_expectation(const Eigen::MatrixXcd& rho, const PauliString& p);

// ---- circuits --------------------------------------------------------------------

enum class GateKind { Y2, H, CZ, CX };
enum class GateSet { CZ, CX };

struct CircuitGate {
  GateKind kind;
  int q0;       // sole target for 1-qubit kinds; control for CX
  int q1 = -1;  // second target for 2-qubit kinds
};

struct Circuit {
  int n_qubits = 0;
  std::vector<std::vector<CircuitGate>> layers;
};

// Throws std::invalid_argument if any layer reuses a qubit or any target is
// out of range.
void validate_circuit(const Circuit& c);

// Entangling-layer schedule for the chain on qubits [0, n): pairs (i, i+1)
// grouped so neighbors never share a layer.  At most 3 layers for any n;
// empty groups are dropped (n = 2 gives a single layer).
std::vector<std::vector<std::pair<int, int>>> cz_schedule(int n);

// Y/2 preparation layer followed by the scheduled entangling layers.  For
// GateSet::CX every entangling layer is realized as H / CX / H sandwiches on
// the higher-index qubit of each pair, so the final state is identical.
// The chain may be embedded at `offset` inside a larger register.
Circuit lc_circuit(int n, GateSet gs);
Circuit lc_circuit(int n, GateSet gs, int offset, int total_qubits);

// Executes a circuit from |0...0>.
Eigen::VectorXcd run_circuit(const Circuit& c);

// Chain stabilizer i (1-based): X at position i, Z at i-1 and i+1 where
// those positions exist.  Throws std::out_of_range for i outside [1, n].
PauliString stabilizer(int i, int n);

// The n-qubit linear cluster state (CZ gates between chain neighbors acting
// on |+>^n); all stabilizer expectations are +1.
Eigen::VectorXcd lc_state(int n);

// ---- witness coefficients ---------------------------------------------------------

// alpha vectors are 0/1 indicators: alpha_xz[k] = 1 exactly when outcome k,
// measured in basis_xz, satisfies the parity constraint of every
// odd-indexed stabilizer (equivalently, k lies in the support of the ideal
// distribution); alpha_zx likewise for even-indexed stabilizers.
struct WitnessCoefficients {
  int n_qubits = 0;
  std::string basis_xz;  // X at odd chain positions: "XZXZ..."
  std::string basis_zx;  // X at even chain positions: "ZXZX..."
  Eigen::VectorXd alpha_xz;
  Eigen::VectorXd alpha_zx;
};

WitnessCoefficients witness_coefficients(int n);

}  // namespace lcsim
