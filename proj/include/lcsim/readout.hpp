#pragma once

// Imperfect joint readout: per-qubit 2x2 confusion matrices, their
// tensor-structured forward application and inversion (mitigation), and
// device-parameter ingestion from config files.

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "lcsim/config.hpp"

namespace lcsim {

// Column-stochastic confusion matrix [[f00, 1-f11], [1-f00, f11]]: column j
// is the distribution of reported bits for true bit j.
struct TransitionMatrix {
  double f00 = 1.0;
  double f11 = 1.0;
};

// Range check (0 < f <= 1); throws std::invalid_argument.
void validate_transition(const TransitionMatrix& t);

// Invertibility margin f00 + f11 - 1; mitigation needs it > 1e-12.
double transition_determinant(const TransitionMatrix& t);

Eigen::Matrix2d transition_matrix(const TransitionMatrix& t);
// Analytic 2x2 inverse; throws std::domain_error when near-singular.
Eigen::Matrix2d transition_inverse(const TransitionMatrix& t);

// Applies per-qubit 2x2 factors to a length-2^n vector, sweeping one qubit
// at a time (factor i acts on bit i); O(n 2^n), no Kronecker matrix ever
// built.  Throws std::invalid_argument on size mismatch.
Eigen::VectorXd apply_kronecker_factors(const Eigen::VectorXd& v,
                                        const std::vector<Eigen::Matrix2d>& factors);

// Forward readout model: (T_1 (x) ... (x) T_n) dist.  Output is a valid
// probability distribution whenever the input is.
Eigen::VectorXd apply_readout_noise(const Eigen::VectorXd& dist,
                                    const std::vector<TransitionMatrix>& t);

// Inverse model: entries may come out slightly negative and are retained
// (never clipped) -- the fidelity bound is a linear estimator and clipping
// would bias it.  Throws std::domain_error if any per-qubit matrix is
// singular (f00 + f11 <= 1 + 1e-12).
Eigen::VectorXd mitigate(const Eigen::VectorXd& measured,
                         const std::vector<TransitionMatrix>& t);

// Diagnostic: total negative mass of a quasi-probability vector.
double negative_mass(const Eigen::VectorXd& dist);

// ---- device parameters ------------------------------------------------------------

struct QubitParams {
  // Required.
  double t1_us = 0;
  double t2star_us = 0;
  double f00 = 1;
  double f11 = 1;
  // Optional (0 / 1.0 mean "not specified").
  double idle_freq_ghz = 0;
  double opt_freq_ghz = 0;
  double anharm_mhz = 0;
  double y2_fidelity = 1.0;
  double cz_fidelity = 1.0;  // fidelity of the entangling gate to the next qubit
};

struct DeviceParams {
  std::vector<QubitParams> qubits;
  std::vector<std::string> warnings;  // non-fatal validation notes

  int n() const { return static_cast<int>(qubits.size()); }
  std::vector<TransitionMatrix> transitions() const;
};

// Reads sections [qubit 1] .. [qubit N] (contiguous from 1).  Missing
// required keys raise std::runtime_error naming the qubit record and field.
// T2* > 2*T1 is physically suspect but only recorded as a warning.
DeviceParams load_device_params(const ConfigFile& cfg);
DeviceParams load_device_params_file(const std::string& path);

}  // namespace lcsim
