#pragma once

// Exact density-matrix toolkit for small registers (n <= 8): mixtures,
// partial trace/transpose, negativity, the true-fidelity oracle against the
// cluster state, random (bi)separable ensembles, and the three-qubit
// mixture showing that pairwise entanglement does not imply genuine
// three-body entanglement.

#include <Eigen/Dense>

#include <cstdint>
#include <utility>
#include <vector>

#include "lcsim/rng.hpp"
#include "lcsim/statevec.hpp"

namespace lcsim {

inline constexpr int kMaxDensityQubits = 8;

// Number of qubits for a square 2^n matrix; throws std::invalid_argument on
// a non-square or non-power-of-two matrix.
int density_qubits(const Eigen::MatrixXcd& rho);

// Hermiticity within 1e-10, unit trace within 1e-10, eigenvalues >= -1e-9;
// throws std::invalid_argument on violation.
void validate_density(const Eigen::MatrixXcd& rho);

// |psi><psi|; throws std::out_of_range above kMaxDensityQubits.
Eigen::MatrixXcd from_pure(const Eigen::VectorXcd& psi);

// Convex combination.  Weights must be nonnegative and sum to 1 within
// 1e-9 (std::invalid_argument otherwise).
Eigen::MatrixXcd mix(const std::vector<std::pair<double, Eigen::MatrixXcd>>& terms);

// Reduced state on `keep` (ascending output order: keep[j] becomes output
// bit j).  Throws std::domain_error for an empty keep set.
Eigen::MatrixXcd partial_trace(const Eigen::MatrixXcd& rho, const std::vector<int>& keep);

// Transpose of the indices in part_a only.
Eigen::MatrixXcd partial_transpose(const Eigen::MatrixXcd& rho, const std::vector<int>& part_a);

// N(rho) = (||rho^{T_A}||_1 - 1) / 2, via Hermitian eigenvalues of the
// partial transpose; clamped below at 0.
double negativity(const Eigen::MatrixXcd& rho, const std::vector<int>& part_a);

// Tr(rho |LC_n><LC_n|).
double true_fidelity(const Eigen::MatrixXcd& rho, int n);

// Haar-random pure state (normalized i.i.d. complex Gaussian amplitudes).
Eigen::VectorXcd random_state(int n, rng::Stream& stream);

// Mixture of k random pure states with uniform-random normalized weights.
Eigen::MatrixXcd random_density(int n, int k, rng::Stream& stream);

// Mixture of k pure states, each a product across the cut qubits
// [0, cut) | [cut, n); biseparable across that cut by construction.
Eigen::MatrixXcd random_biseparable(int n, int cut, std::uint64_t seed, int k = 4);

// Projects qubit `q` onto |0> and renormalizes (dimension is preserved);
// throws std::domain_error if the projection probability is ~0.
Eigen::MatrixXcd postselect_zero(const Eigen::MatrixXcd& rho, int q);

// (|00> + |11>) / sqrt(2).
Eigen::VectorXcd epr_state();

// rho_123 = 1/2 |EPR_12><EPR_12| (x) |0_3><0_3|  +  1/2 |0_1><0_1| (x) |EPR_23><EPR_23|.
// Each component is separable across one cut, yet both nearest-neighbor
// pair states below carry negativity 1/3.
Eigen::MatrixXcd counterexample_rho123();

// (2/3)|EPR><EPR| + (1/3)|00><00| -- the nearest-neighbor pair state of the
// mixture above once the third qubit is conditioned on reading 0 (both pairs
// give the same state by symmetry).  Its negativity is exactly 1/3.
Eigen::MatrixXcd counterexample_pair();

}  // namespace lcsim
