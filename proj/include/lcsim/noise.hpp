#pragma once

// Noisy execution of the linear-cluster preparation and measurement circuit.
//
// Error channels: per-qubit amplitude damping (T1) and pure dephasing
// (Tphi, derived from T1/T2*), a conditional-phase error on every CZ
// (fixed offset and/or Gaussian per-shot jitter), a deterministic residual
// ZZ phase on idle adjacent pairs, and classical readout bit flips.
//
// Two engines implement the SAME channel sequence:
//   - a quantum-trajectory sampler (any n up to the statevector cap) that
//     unravels damping into jump/no-jump branches and dephasing into
//     stochastic Z flips, with an optional trajectory cache that makes the
//     zero- and one-jump shots (the vast majority) nearly free;
//   - an exact density-matrix evolution (n <= 8) used as the oracle the
//     trajectory average must converge to.
//
// Determinism: every stochastic draw comes from a stream derived as
// (seed, basis tag, shot index, purpose tag), so results are identical for
// any worker count and the cache is a pure optimization (bit-identical
// outcomes with the cache on or off).

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "lcsim/readout.hpp"
#include "lcsim/statevec.hpp"

namespace lcsim {

inline constexpr std::uint64_t kBasisTagXZ = 0;
inline constexpr std::uint64_t kBasisTagZX = 1;

struct QubitNoise {
  double t1_us = std::numeric_limits<double>::infinity();
  double tphi_us = std::numeric_limits<double>::infinity();
};

struct NoiseModel {
  std::vector<QubitNoise> qubits;
  std::vector<TransitionMatrix> readout;  // one per qubit
  double sq_layer_ns = 30.0;              // single-qubit gate layer duration
  double cz_layer_ns = 64.0;              // entangling layer duration
  double cz_phase_mean = 0.0;             // conditional-phase offset from pi (rad)
  double cz_phase_std = 0.0;              // per-shot Gaussian jitter of that phase (rad)
  double zz_mhz = 0.0;                    // residual ZZ rate on idle adjacent pairs
  std::vector<std::string> warnings;      // e.g. Tphi clamps during derivation

  int n() const { return static_cast<int>(qubits.size()); }
  // Structural checks (counts match, T1/Tphi/durations positive, std >= 0,
  // readout entries valid); throws std::invalid_argument.
  void validate() const;
};

// All channels off, readout perfect.
NoiseModel noiseless_model(int n);

struct NoiseModelOptions {
  double sq_layer_ns = 30.0;
  double cz_layer_ns = 64.0;
  double cz_phase_mean = 0.0;
  double cz_phase_std = 0.0;
  double zz_mhz = 0.0;
  double tphi_ceiling_us = 1e6;  // cap used when T2* >= 2 T1
};

// Builds a model from measured device parameters (T1/T2*/readout per qubit).
NoiseModel model_from_device(const DeviceParams& dev, const NoiseModelOptions& opt = {});

// Decay probability of an excited qubit over t_ns: 1 - exp(-t/T1).
// Throws std::domain_error unless both arguments are positive.
double channel_amplitude_damping(double t_ns, double t1_us);

// Phase-flip probability over t_ns: (1 - exp(-t/Tphi)) / 2.
double dephasing_flip_probability(double t_ns, double tphi_us);

// 1/Tphi = 1/T2* - 1/(2 T1); a non-positive rate (T2* >= 2 T1) is clamped
// to the ceiling and flagged.  Throws std::domain_error on non-positive
// inputs.
struct TphiResult {
  double tphi_us = 0.0;
  bool clamped = false;
};
TphiResult derive_tphi(double t1_us, double t2star_us, double ceiling_us = 1e6);

enum class CacheMode {
  kAuto,  // cache unless per-shot coherent draws or the memory budget forbid
  kOn,    // force caching (still refused if per-shot coherent draws exist)
  kOff,   // plain per-shot simulation
};

struct RunOptions {
  int workers = 1;
  bool record_outcomes = false;
  CacheMode cache = CacheMode::kAuto;
};

struct TrajectoryRun {
  std::uint64_t shots = 0;
  Counts counts_xz;
  Counts counts_zx;
  // Per-shot reported outcomes (after readout flips), in shot order; filled
  // only when RunOptions::record_outcomes is set.
  std::vector<std::uint64_t> outcomes_xz;
  std::vector<std::uint64_t> outcomes_zx;
};

// Runs the full two-basis experiment: prepare the n-qubit linear cluster
// state under the model's channels, rotate into each witness basis, sample
// one outcome per shot and pass it through the readout flip model.  Returns
// raw (unmitigated) counts for both bases.
TrajectoryRun noisy_lc_experiment(int n, const NoiseModel& model, std::uint64_t shots,
                                  std::uint64_t seed, const RunOptions& opt = {});

// Single-basis variant; `basis` is a length-n string over {X, Z} and
// `basis_tag` feeds the stream derivation (use kBasisTagXZ / kBasisTagZX to
// reproduce noisy_lc_experiment).
Counts noisy_basis_counts(int n, const NoiseModel& model, std::string_view basis,
                          std::uint64_t basis_tag, std::uint64_t shots,
                          std::uint64_t seed, const RunOptions& opt = {},
                          std::vector<std::uint64_t>* outcomes = nullptr);

// Exact density-matrix evolution of the same layer/channel sequence, ending
// after the basis-rotation layer's decoherence step (just before readout).
// Oracle for trajectory convergence; throws std::out_of_range for n > 8.
Eigen::MatrixXcd exact_noisy_density(int n, const NoiseModel& model, std::string_view basis);

// diag of exact_noisy_density: the pre-readout outcome distribution.
// Compose with apply_readout_noise for the raw measured distribution.
Eigen::VectorXd exact_noisy_distribution(int n, const NoiseModel& model,
                                         std::string_view basis);

// Monte Carlo estimate of the pre-measurement density matrix: average of
// |psi><psi| over trajectory final states.  Converges to
// exact_noisy_density at rate 1/sqrt(shots).
Eigen::MatrixXcd trajectory_average_density(int n, const NoiseModel& model,
                                            std::uint64_t shots, std::uint64_t seed,
                                            std::string_view basis, int workers = 1);

// Kraus channels on a density matrix of any qubit count (dim = 2^n), for
// composing custom noisy gates: amplitude damping with decay probability
// gamma, and phase damping expressed as a Z flip with probability p.
// Throw std::invalid_argument for a non-square / non-power-of-two matrix
// or an out-of-range qubit, std::domain_error for a rate outside [0, 1].
void apply_density_damping(Eigen::MatrixXcd& rho, int qubit, double gamma);
void apply_density_dephasing(Eigen::MatrixXcd& rho, int qubit, double flip_probability);

}  // namespace lcsim
