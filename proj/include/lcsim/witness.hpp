#pragma once

// Fidelity lower bound and entanglement certification.
//
// The certified quantity is F >= <ODD> + <EVEN> - 1 evaluated from two
// measured distributions (one per stabilizer parity class, see
// WitnessCoefficients).  Because the estimator is linear in both
// distributions, readout mitigation leaves it unbiased and its uncertainty
// decomposes into an analytic shot-noise term plus a transition-matrix
// fluctuation term; a bootstrap estimator provides an independent check of
// the first.

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "lcsim/cluster.hpp"
#include "lcsim/readout.hpp"
#include "lcsim/statevec.hpp"

namespace lcsim {

// Final certification record.  sigma_total is the additive combination of
// the two error components; n_sigma_above_half = (bound - 0.5)/sigma_total.
struct WitnessResult {
  int n_qubits = 0;
  double fidelity_bound = 0.0;
  double sigma_shot = 0.0;
  double sigma_transition = 0.0;
  double sigma_total = 0.0;
  double n_sigma_above_half = 0.0;
  bool gme_certified = false;
};

struct HistogramBin {
  double low = 0.0;
  double high = 0.0;
  std::uint64_t count = 0;
};

// Monte Carlo study of the fidelity-bound distortion caused by Gaussian
// drift of the readout transition matrices between calibration and use.
struct FluctuationStudy {
  int n_qubits = 0;
  std::uint64_t trials = 0;
  std::uint64_t rejected_trials = 0;  // draws discarded as non-invertible
  double mean_distortion = 0.0;
  double std_distortion = 0.0;        // sample standard deviation
  std::vector<HistogramBin> histogram;
};

// Per-qubit perturbation of a transition matrix.  Used both as a standard
// deviation (Monte Carlo) and as a concrete offset (linearized estimate).
struct TransitionDelta {
  double df00 = 0.0;
  double df11 = 0.0;
};

// F >= alpha_xz . p_xz + alpha_zx . p_zx - 1.  Inputs are post-mitigation
// quasi-probability vectors (small negatives allowed); affine in each
// argument.  Throws std::invalid_argument on any size mismatch.
double fidelity_bound(const Eigen::VectorXd& p_xz, const Eigen::VectorXd& p_zx,
                      const WitnessCoefficients& coeffs);

// Assembles the certification record.  z is the sigma multiple subtracted
// before comparing against the 0.5 biseparable ceiling; the default z = 0
// certifies on the point estimate and reports n_sigma_above_half alongside.
// Sigma components must be finite and non-negative (std::domain_error
// otherwise); a zero total is the noiseless degenerate case, reported as
// infinite significance.
WitnessResult certify_gme(int n_qubits, double bound, double sigma_shot,
                          double sigma_transition, double z = 0.0);

// Standard deviation of the mitigated bound under multinomial shot
// statistics.  p0_xz / p0_zx are the RAW measured distributions; per basis
// Var = [sum_o w_o^2 p0_o - (sum_o w_o p0_o)^2] / shots with w the
// coefficient vector pulled back through the transposed inverse transition
// matrices; the two bases' variances add.
double shot_noise_sigma(const Eigen::VectorXd& p0_xz, const Eigen::VectorXd& p0_zx,
                        const std::vector<TransitionMatrix>& t,
                        const WitnessCoefficients& coeffs, std::uint64_t shots);

// Monte Carlo fluctuation study of stale readout calibration.  p_xz / p_zx
// are the mitigated (or exact) baseline distributions; each trial perturbs
// every f00/f11 by a centred Gaussian with the given per-qubit standard
// deviations, measures the baseline through the perturbed matrices,
// mitigates with the *nominal* inverses and records the change of the
// bound.  The perturbed matrices enter only forward, so the distortion has
// exactly zero expectation under centred drift; its spread is the quoted
// sigma.  Draws leaving the stochastic domain (f00 or f11 outside (0, 1])
// are rejected and redrawn (counted in rejected_trials); the nominal
// matrices must be invertible (std::domain_error otherwise).  Trials use
// independent derived streams and are merged in index order, so the result
// is identical for any worker count.  Requires trials >= 100.
FluctuationStudy transition_fluctuation_sigma(
    const Eigen::VectorXd& p_xz, const Eigen::VectorXd& p_zx,
    const WitnessCoefficients& coeffs, const std::vector<TransitionMatrix>& t,
    const std::vector<TransitionDelta>& delta, std::uint64_t trials,
    std::uint64_t seed, int bins = 61, int workers = 1);

// First-order (in delta) distortion of the bound for one concrete
// perturbation; cross-checks the Monte Carlo at small delta.
double transition_distortion_linear(const Eigen::VectorXd& p_xz,
                                    const Eigen::VectorXd& p_zx,
                                    const WitnessCoefficients& coeffs,
                                    const std::vector<TransitionMatrix>& t,
                                    const std::vector<TransitionDelta>& delta);

// Bootstrap standard deviation of the mitigated bound: resamples each basis'
// counts multinomially, recomputes the bound per resample, and returns the
// sample standard deviation.  Deterministic given seed and independent of
// the worker count.  Requires resamples >= 100; throws std::domain_error on
// empty counts.
double bootstrap_sigma(const Counts& counts_xz, const Counts& counts_zx,
                       const std::vector<TransitionMatrix>& t,
                       const WitnessCoefficients& coeffs, std::uint64_t resamples,
                       std::uint64_t seed, int workers = 1);

}  // namespace lcsim
