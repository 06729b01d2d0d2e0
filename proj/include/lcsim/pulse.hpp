#pragma once

// Pulse-level model of the fast-adiabatic CZ gate between two
// flux-tunable transmons, each truncated to three levels.
//
// The simulation runs in the frame rotating at each transmon's idle
// frequency: detunings enter as time-dependent diagonal terms and the
// exchange coupling rotates at the idle-frequency difference.  The
// Hamiltonian conserves total excitation number, so propagation works on
// the five excitation blocks with exact per-step exponentials
// (unconditionally unitary for any step size; accuracy is set by how well
// the midpoint Hamiltonian represents the step).
//
// The gate works the avoided crossing between |11> and |20>: lowering the
// tuned transmon toward omega2 + eta1 makes |11> hybridize with |20>,
// picking up the extra conditional phase.  A half-period sine series (8
// coefficients, endpoint-pinned) parameterizes the tuned transmon's
// detuning; the partner hops to its gate-point frequency with short cosine
// ramps that complete just before the tuned modulation window opens.

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

namespace lcsim {

// Two coupled transmons; basis index = 3*n1 + n2 with n_i the excitation
// of transmon i, so the two-qubit computational states sit at
// {0, 1, 3, 4} = {|00>, |01>, |10>, |11>}.
struct TransmonPair {
  double omega1_idle_ghz = 4.996;
  double omega2_idle_ghz = 4.258;
  double eta1_mhz = -246.0;
  double eta2_mhz = -201.0;
  double g_mhz = 12.0;  // exchange coupling; set per device, this is a stand-in

  // Anharmonicities negative, coupling positive, idle frequencies within
  // the [3, 6] GHz operating band; throws std::invalid_argument.
  void validate() const;
};

// Control trajectory for one gate.  The tuned transmon's frequency is
// hold1 plus a sine series sum_k c_k sin(k pi s) on the inner window
// [edge_offset, duration - edge_offset] (s the window fraction), so it
// starts and ends exactly at idle.  The partner ramps hold2 -> top with a
// raised-cosine edge of edge_offset length, holds, and ramps back.
struct Waveform {
  std::array<double, 8> coeffs_ghz{};
  double duration_ns = 50.0;
  double hold1_ghz = 4.996;
  double hold2_ghz = 4.258;
  double partner_top_ghz = 4.343;
  double edge_offset_ns = 5.0;

  void validate() const;  // throws std::invalid_argument
};

// Instantaneous control frequencies (GHz) at time t in [0, duration].
double tuned_frequency(const Waveform& wf, double t_ns);
double partner_frequency(const Waveform& wf, double t_ns);

// Time-ordered propagator of the piecewise-constant (midpoint) Hamiltonian
// over the waveform, 9x9 in the rotating frame.  dt is shrunk to divide
// the duration evenly.  Throws std::invalid_argument for dt <= 0 and
// std::domain_error if the result drifts from unitarity beyond 1e-8.
Eigen::MatrixXcd evolve(const TransmonPair& pair, const Waveform& wf, double dt_ns = 0.01);

struct GateMetrics {
  // arg U(11,11) - arg U(01,01) - arg U(10,10) + arg U(00,00), in [0, 2pi).
  double conditional_phase = 0.0;
  // Probability outside the computational subspace for input |11>.
  double leakage = 0.0;
  // Raw 4x4 block of U on the computational states (not renormalized).
  Eigen::Matrix4cd computational;
  // Largest per-computational-input probability lost to leakage levels;
  // how far `computational` is from a unitary of its own.
  double extraction_deficit = 0.0;
};
GateMetrics gate_metrics(const Eigen::MatrixXcd& u);

// Computational block in the virtual-Z gauge: single-qubit Z rotations and
// a global phase are chosen so the |00>, |01> and |10> diagonal entries
// come out real non-negative.  What remains on the |11> diagonal is
// exactly the conditional phase.  These corrections are free in hardware
// (frame updates), so objectives and tomography evaluate this gauge.
Eigen::Matrix4cd corrected_computational(const Eigen::MatrixXcd& u);

// Infidelity 1 - (2 F_++ + F_11) / 3 of the virtual-Z-corrected block
// against the CZ target, where F_s = |<s| CZ^dag V |s>|^2.  The |++> term
// carries the conditional phase; the |11> term penalizes population loss.
double cz_objective(const TransmonPair& pair, const Waveform& wf, double dt_ns = 0.01);

// ---- Nelder-Mead ------------------------------------------------------------

struct NelderMeadOptions {
  int max_iters = 500;
  double f_tol = 1e-12;        // stop when the simplex objective spread is below
  double x_tol = 1e-10;        // ... or the simplex diameter is below
  double initial_step = 0.02;  // per-coordinate displacement of the start simplex
};

struct NelderMeadResult {
  Eigen::VectorXd best_x;
  double best_f = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;           // best-seen objective after each iteration
  std::vector<Eigen::VectorXd> trace_x;  // matching best-seen parameters
};

// Simplex minimizer (reflection 1, expansion 2, contraction 1/2, shrink
// 1/2); deterministic given the start point.  Throws std::runtime_error
// naming the parameters if the objective is non-finite at any vertex.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, const NelderMeadOptions& opt = {});

struct OptimizeResult {
  Waveform waveform;        // best-seen parameters
  NelderMeadResult detail;
};

// Optimizes the 8 waveform coefficients against cz_objective.
OptimizeResult optimize_cz(const TransmonPair& pair, const Waveform& start,
                           double dt_ns = 0.01, const NelderMeadOptions& opt = {});

// ---- two-qubit process tomography ----------------------------------------------

// Channel action on a two-qubit density matrix.
using ChannelFn = std::function<Eigen::Matrix4cd(const Eigen::Matrix4cd&)>;

// rho -> V rho V^dag.
ChannelFn unitary_channel(const Eigen::Matrix4cd& v);

// Two-qubit Pauli P_m = sigma_{m / 4} (x) sigma_{m % 4} over {I, X, Y, Z},
// first factor on the high (first) qubit; m in [0, 16).
Eigen::Matrix4cd pauli_two_qubit(int m);

// chi of a unitary: c c^dag with c_m = Tr(P_m^dag V) / 4; unit trace.
Eigen::MatrixXcd chi_of_unitary(const Eigen::Matrix4cd& v);

// Channel reconstruction from chi: sum_mn chi_mn P_m rho P_n^dag.
Eigen::Matrix4cd apply_chi(const Eigen::MatrixXcd& chi, const Eigen::Matrix4cd& rho);

// Tr(chi_a chi_b) / (Tr chi_a Tr chi_b).
double process_fidelity(const Eigen::MatrixXcd& chi_a, const Eigen::MatrixXcd& chi_b);

struct ChiProjection {
  Eigen::MatrixXcd chi;       // Hermitized, eigenvalue-clipped, trace-restored
  double clipped_mass = 0.0;  // total negative eigenvalue mass removed
  double tp_residual = 0.0;   // || sum_mn chi_mn P_n^dag P_m - I ||_F
};
ChiProjection project_chi_physical(const Eigen::MatrixXcd& chi);

struct QptOptions {
  std::uint64_t shots_per_setting = 0;  // 0 = exact expectation values
  std::uint64_t seed = 1;
  int workers = 1;
};

struct ProcessTomography {
  Eigen::MatrixXcd chi_raw;     // linear inversion before projection
  Eigen::MatrixXcd chi;         // projected physical estimate
  double clipped_mass = 0.0;
  double tp_residual = 0.0;
  double fidelity_to_cz = 0.0;      // Tr(chi_cz chi) / normalization
  double plusplus_fidelity = 0.0;   // <CZ ++| executor(|++><++|) |CZ ++>
};

// Prepares the 16 inputs {|0>,|1>,|+>,|+i>}^x2, measures all two-qubit
// Pauli expectations (exactly, or from binomially sampled outcomes when
// shots_per_setting > 0), reconstructs chi by linear inversion over the
// Pauli basis and projects it to the physical cone.  Throws
// std::runtime_error if the reconstruction system is singular.
ProcessTomography qpt_two_qubit(const ChannelFn& executor, const QptOptions& opt = {});

}  // namespace lcsim
