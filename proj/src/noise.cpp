#include "lcsim/noise.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <utility>

#include "lcsim/cluster.hpp"
#include "lcsim/parallel.hpp"
#include "lcsim/rng.hpp"

namespace lcsim {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Trajectory caches refuse to grow beyond this (checkpoints fall back to
// recomputation first, then caching is disabled entirely).
constexpr std::int64_t kCacheMemoryBudget = 512ll << 20;

void check_positive(double v, const char* what) {
  if (!(v > 0.0)) throw std::domain_error(std::string(what) + " must be positive");
}

// ---- layer plan -------------------------------------------------------------
//
// One description of the executed sequence shared by the trajectory sampler
// and the exact density-matrix oracle, so the two implement the same channel
// composition by construction.  Every layer is followed by one decoherence
// step of the layer's duration; residual ZZ acts on the listed idle pairs.

struct PlanLayer {
  std::vector<CircuitGate> gates;
  double duration_ns = 0.0;
  std::vector<std::pair<int, int>> zz_pairs;
};

std::vector<PlanLayer> layer_plan(int n, const NoiseModel& model, std::string_view basis) {
  if (static_cast<int>(basis.size()) != n)
    throw std::invalid_argument("noise: basis string length " + std::to_string(basis.size()) +
                                " does not match qubit count " + std::to_string(n));
  for (const char c : basis)
    if (c != 'X' && c != 'Z')
      throw std::invalid_argument(std::string("noise: basis letter '") + c +
                                  "' is not X or Z");

  const bool with_zz = model.zz_mhz != 0.0;
  const auto all_adjacent = [&] {
    std::vector<std::pair<int, int>> pairs;
    if (with_zz)
      for (int q = 0; q + 1 < n; ++q) pairs.emplace_back(q, q + 1);
    return pairs;
  };

  std::vector<PlanLayer> plan;
  {
    PlanLayer prep;
    prep.duration_ns = model.sq_layer_ns;
    for (int q = 0; q < n; ++q) prep.gates.push_back({GateKind::Y2, q, -1});
    prep.zz_pairs = all_adjacent();
    plan.push_back(std::move(prep));
  }
  for (const auto& group : cz_schedule(n)) {
    PlanLayer layer;
    layer.duration_ns = model.cz_layer_ns;
    for (const auto& [a, b] : group) layer.gates.push_back({GateKind::CZ, a, b});
    if (with_zz) {
      for (int q = 0; q + 1 < n; ++q) {
        const bool gated = std::any_of(group.begin(), group.end(), [&](const auto& p) {
          return p.first == q && p.second == q + 1;
        });
        if (!gated) layer.zz_pairs.emplace_back(q, q + 1);
      }
    }
    plan.push_back(std::move(layer));
  }
  {
    PlanLayer rot;
    rot.duration_ns = model.sq_layer_ns;
    for (int q = 0; q < n; ++q)
      if (basis[static_cast<std::size_t>(q)] == 'X') rot.gates.push_back({GateKind::H, q, -1});
    rot.zz_pairs = all_adjacent();
    plan.push_back(std::move(rot));
  }
  return plan;
}

// ---- flattened trajectory program -------------------------------------------

struct Op {
  enum class Kind { kGate1, kPairPhase, kCzJitter, kDamp, kDephase };
  Kind kind = Kind::kGate1;
  int q0 = -1;
  int q1 = -1;
  Eigen::Matrix2cd u;       // kGate1
  cplx phase = 1.0;         // kPairPhase factor on the |11> pair subspace
  double mean = 0.0;        // kCzJitter: conditional phase = pi + mean + std*normal
  double std = 0.0;
  double gamma = 0.0;       // kDamp
  double p_flip = 0.0;      // kDephase
};

bool is_decision(const Op& op) {
  return op.kind == Op::Kind::kDamp || op.kind == Op::Kind::kDephase;
}

struct Program {
  int n = 0;
  std::uint64_t basis_tag = 0;
  std::vector<Op> ops;
  std::vector<std::size_t> decisions;  // op indices of kDamp / kDephase
  bool jitter = false;                 // any per-shot coherent draw present
};

Program build_program(int n, const NoiseModel& model, std::string_view basis,
                      std::uint64_t basis_tag) {
  Program prog;
  prog.n = n;
  prog.basis_tag = basis_tag;

  const Eigen::Matrix2cd y2 = gate_y_half();
  const Eigen::Matrix2cd h = gate_h();

  for (const PlanLayer& layer : layer_plan(n, model, basis)) {
    for (const CircuitGate& g : layer.gates) {
      Op op;
      switch (g.kind) {
        case GateKind::Y2:
          op.kind = Op::Kind::kGate1;
          op.q0 = g.q0;
          op.u = y2;
          break;
        case GateKind::H:
          op.kind = Op::Kind::kGate1;
          op.q0 = g.q0;
          op.u = h;
          break;
        case GateKind::CZ:
          op.q0 = g.q0;
          op.q1 = g.q1;
          if (model.cz_phase_std > 0.0) {
            op.kind = Op::Kind::kCzJitter;
            op.mean = model.cz_phase_mean;
            op.std = model.cz_phase_std;
            prog.jitter = true;
          } else {
            op.kind = Op::Kind::kPairPhase;
            op.phase = model.cz_phase_mean == 0.0
                           ? cplx(-1.0, 0.0)  // exact CZ, bit-identical to the ideal circuit
                           : std::polar(1.0, kPi + model.cz_phase_mean);
          }
          break;
        case GateKind::CX:
          throw std::invalid_argument("noise: CX gates are not part of the noisy program");
      }
      prog.ops.push_back(op);
    }
    for (const auto& [a, b] : layer.zz_pairs) {
      Op op;
      op.kind = Op::Kind::kPairPhase;
      op.q0 = a;
      op.q1 = b;
      op.phase = std::polar(1.0, -2.0 * kPi * model.zz_mhz * layer.duration_ns * 1e-3);
      prog.ops.push_back(op);
    }
    for (int q = 0; q < n; ++q) {
      const auto& qb = model.qubits[static_cast<std::size_t>(q)];
      const double gamma = channel_amplitude_damping(layer.duration_ns, qb.t1_us);
      if (gamma > 0.0) {
        Op op;
        op.kind = Op::Kind::kDamp;
        op.q0 = q;
        op.gamma = gamma;
        prog.decisions.push_back(prog.ops.size());
        prog.ops.push_back(op);
      }
      const double p_flip = dephasing_flip_probability(layer.duration_ns, qb.tphi_us);
      if (p_flip > 0.0) {
        Op op;
        op.kind = Op::Kind::kDephase;
        op.q0 = q;
        op.p_flip = p_flip;
        prog.decisions.push_back(prog.ops.size());
        prog.ops.push_back(op);
      }
    }
  }
  return prog;
}

// ---- statevector kernels for the channel branches ------------------------------

double population1(const Eigen::VectorXcd& psi, int q) {
  const std::uint64_t mask = std::uint64_t{1} << q;
  const std::uint64_t lo = mask - 1;
  const std::uint64_t half = static_cast<std::uint64_t>(psi.size()) >> 1;
  const cplx* a = psi.data();
  double s = 0.0;
  for (std::uint64_t k = 0; k < half; ++k) {
    const std::uint64_t i1 = (((k & ~lo) << 1) | (k & lo)) | mask;
    s += std::norm(a[i1]);
  }
  return s;
}

// No-jump branch of amplitude damping: diag(1, sqrt(1-gamma)) / sqrt(1 - p).
void damp_no_jump(Eigen::VectorXcd& psi, int q, double gamma, double p_jump) {
  const double f0 = 1.0 / std::sqrt(1.0 - p_jump);
  const double f1 = std::sqrt(1.0 - gamma) * f0;
  const std::uint64_t mask = std::uint64_t{1} << q;
  const std::uint64_t lo = mask - 1;
  const std::uint64_t half = static_cast<std::uint64_t>(psi.size()) >> 1;
  cplx* a = psi.data();
  for (std::uint64_t k = 0; k < half; ++k) {
    const std::uint64_t i0 = ((k & ~lo) << 1) | (k & lo);
    a[i0] *= f0;
    a[i0 | mask] *= f1;
  }
}

// Jump branch: lower the qubit and renormalize.
void damp_jump(Eigen::VectorXcd& psi, int q) {
  const double inv = 1.0 / std::sqrt(population1(psi, q));
  const std::uint64_t mask = std::uint64_t{1} << q;
  const std::uint64_t lo = mask - 1;
  const std::uint64_t half = static_cast<std::uint64_t>(psi.size()) >> 1;
  cplx* a = psi.data();
  for (std::uint64_t k = 0; k < half; ++k) {
    const std::uint64_t i0 = ((k & ~lo) << 1) | (k & lo);
    a[i0] = a[i0 | mask] * inv;
    a[i0 | mask] = cplx(0.0, 0.0);
  }
}

void phase_flip(Eigen::VectorXcd& psi, int q) {
  const std::uint64_t mask = std::uint64_t{1} << q;
  const std::uint64_t lo = mask - 1;
  const std::uint64_t half = static_cast<std::uint64_t>(psi.size()) >> 1;
  cplx* a = psi.data();
  for (std::uint64_t k = 0; k < half; ++k) {
    const std::uint64_t i1 = (((k & ~lo) << 1) | (k & lo)) | mask;
    a[i1] = -a[i1];
  }
}

std::uint64_t insert_zero_bit(std::uint64_t k, int pos) {
  const std::uint64_t lo = (std::uint64_t{1} << pos) - 1;
  return ((k & ~lo) << 1) | (k & lo);
}

// Multiplies the |11> pair subspace by `f` (hand-rolled complex product to
// stay on the inlined fast path).
void apply_pair_phase(Eigen::VectorXcd& psi, int qa, int qb, cplx f) {
  const int plo = std::min(qa, qb);
  const int phi = std::max(qa, qb);
  const std::uint64_t set = (std::uint64_t{1} << plo) | (std::uint64_t{1} << phi);
  const std::uint64_t quarter = static_cast<std::uint64_t>(psi.size()) >> 2;
  cplx* a = psi.data();
  const double fr = f.real();
  const double fi = f.imag();
  if (fr == -1.0 && fi == 0.0) {
    for (std::uint64_t k = 0; k < quarter; ++k) {
      const std::uint64_t i = insert_zero_bit(insert_zero_bit(k, plo), phi) | set;
      a[i] = -a[i];
    }
    return;
  }
  for (std::uint64_t k = 0; k < quarter; ++k) {
    const std::uint64_t i = insert_zero_bit(insert_zero_bit(k, plo), phi) | set;
    const double xr = a[i].real();
    const double xi = a[i].imag();
    a[i] = cplx(fr * xr - fi * xi, fr * xi + fi * xr);
  }
}

double decision_probability(const Eigen::VectorXcd& psi, const Op& op) {
  return op.kind == Op::Kind::kDamp ? op.gamma * population1(psi, op.q0) : op.p_flip;
}

// A zero-probability decision is skipped entirely (no draw, no update); the
// same rule must hold on every execution path or replayed shots would drift
// off their recorded stream positions.
void apply_no_jump(Eigen::VectorXcd& psi, const Op& op, double p_jump) {
  if (op.kind == Op::Kind::kDamp && p_jump > 0.0)
    damp_no_jump(psi, op.q0, op.gamma, p_jump);
}

void apply_jump(Eigen::VectorXcd& psi, const Op& op) {
  if (op.kind == Op::Kind::kDamp)
    damp_jump(psi, op.q0);
  else
    phase_flip(psi, op.q0);
}

void apply_deterministic(Eigen::VectorXcd& psi, const Op& op, rng::Stream* coherent) {
  switch (op.kind) {
    case Op::Kind::kGate1:
      apply_gate1(psi, op.q0, op.u);
      break;
    case Op::Kind::kPairPhase:
      apply_pair_phase(psi, op.q0, op.q1, op.phase);
      break;
    case Op::Kind::kCzJitter: {
      const double eps = op.mean + op.std * coherent->normal();
      apply_pair_phase(psi, op.q0, op.q1, std::polar(1.0, kPi + eps));
      break;
    }
    default:
      throw std::invalid_argument("noise: decision op on deterministic path");
  }
}

// ---- trajectory engine ----------------------------------------------------------
//
// The no-jump path is common to every shot, so it is simulated once and
// reduced to its decision probabilities plus the final outcome CDF; a shot
// that never jumps costs one uniform per decision plus a binary search.
// The continuation after a single jump at decision j is likewise shared by
// all shots whose first jump is j; those suffixes are built lazily.  Only
// shots with two or more jumps fall back to (partial) resimulation.

class TrajectoryEngine {
 public:
  TrajectoryEngine(Program prog, const NoiseModel& model, std::uint64_t seed, CacheMode mode)
      : prog_(std::move(prog)), seed_(seed) {
    dim_ = Eigen::Index{1} << prog_.n;
    readout_perfect_ = true;
    for (const auto& t : model.readout) {
      flip0_.push_back(1.0 - t.f00);
      flip1_.push_back(1.0 - t.f11);
      if (t.f00 < 1.0 || t.f11 < 1.0) readout_perfect_ = false;
    }
    use_cache_ = decide_cache(mode);
    if (use_cache_) build_base();
  }

  std::uint64_t run_shot(std::uint64_t shot) {
    auto noise = rng::Stream::derive(seed_, {prog_.basis_tag, shot, rng::kStreamNoise});
    auto measure = rng::Stream::derive(seed_, {prog_.basis_tag, shot, rng::kStreamMeasure});
    const double u = measure.uniform();
    std::uint64_t outcome;
    if (use_cache_) {
      outcome = cached_walk(noise, u);
    } else {
      const Eigen::VectorXcd psi = final_state_live(shot, &noise);
      outcome = sample_index(cumulative_distribution(probabilities(psi)), u);
    }
    return apply_readout_flips(outcome, shot);
  }

  // Pre-measurement state; always simulated live (used for density averages).
  Eigen::VectorXcd final_state(std::uint64_t shot) {
    auto noise = rng::Stream::derive(seed_, {prog_.basis_tag, shot, rng::kStreamNoise});
    return final_state_live(shot, &noise);
  }

 private:
  struct Suffix {
    Eigen::VectorXcd init;                // state just after the jump at decision j
    std::vector<double> p;                // no-jump path probabilities at j+1..D-1
    std::vector<Eigen::VectorXcd> pre;    // optional: state before each later decision
    Eigen::VectorXd cumulative;           // CDF of the all-no-jump continuation
    bool has_pre = false;
  };

  bool decide_cache(CacheMode mode) {
    if (prog_.jitter) return false;  // per-shot coherent draws: no shared base path
    if (mode == CacheMode::kOff) return false;
    if (mode == CacheMode::kOn) return true;
    // Base checkpoints + per-suffix (init + CDF); suffix checkpoints only
    // use whatever budget remains after these essentials.
    const double d = static_cast<double>(prog_.decisions.size());
    const double bytes = (d * 40.0 + 8.0) * static_cast<double>(dim_);
    return bytes <= static_cast<double>(kCacheMemoryBudget);
  }

  void build_base() {
    const std::size_t d = prog_.decisions.size();
    base_pre_.reserve(d);
    base_p_.reserve(d);
    Eigen::VectorXcd psi = zero_state(prog_.n);
    for (const Op& op : prog_.ops) {
      if (is_decision(op)) {
        base_pre_.push_back(psi);
        const double p = decision_probability(psi, op);
        base_p_.push_back(p);
        apply_no_jump(psi, op, p);
      } else {
        apply_deterministic(psi, op, nullptr);
      }
    }
    base_cumulative_ = cumulative_distribution(probabilities(psi));
    suffixes_.resize(d);
    suffix_once_ = std::make_unique<std::deque<std::once_flag>>(d);
    const auto used =
        static_cast<std::int64_t>(d * 40.0 * static_cast<double>(dim_));
    checkpoint_budget_.store(kCacheMemoryBudget - used);
  }

  const Suffix& suffix(std::size_t j) {
    std::call_once((*suffix_once_)[j], [&] { suffixes_[j] = build_suffix(j); });
    return *suffixes_[j];
  }

  std::unique_ptr<Suffix> build_suffix(std::size_t j) {
    auto sfx = std::make_unique<Suffix>();
    Eigen::VectorXcd psi = base_pre_[j];
    apply_jump(psi, prog_.ops[prog_.decisions[j]]);
    sfx->init = psi;

    const std::size_t d = prog_.decisions.size();
    const std::int64_t pre_bytes =
        static_cast<std::int64_t>((d - j - 1) * 16.0 * static_cast<double>(dim_));
    if (pre_bytes > 0) {
      if (checkpoint_budget_.fetch_sub(pre_bytes) >= pre_bytes) {
        sfx->has_pre = true;
        sfx->pre.reserve(d - j - 1);
      } else {
        checkpoint_budget_.fetch_add(pre_bytes);
      }
    }

    for (std::size_t i = prog_.decisions[j] + 1; i < prog_.ops.size(); ++i) {
      const Op& op = prog_.ops[i];
      if (!is_decision(op)) {
        apply_deterministic(psi, op, nullptr);
        continue;
      }
      if (sfx->has_pre) sfx->pre.push_back(psi);
      const double p = decision_probability(psi, op);
      sfx->p.push_back(p);
      apply_no_jump(psi, op, p);
    }
    sfx->cumulative = cumulative_distribution(probabilities(psi));
    return sfx;
  }

  std::uint64_t cached_walk(rng::Stream& noise, double u_measure) {
    const std::size_t d = prog_.decisions.size();
    for (std::size_t j = 0; j < d; ++j) {
      const double p = base_p_[j];
      if (p <= 0.0 || noise.uniform() >= p) continue;
      // First jump at decision j: switch to that suffix's no-jump path.
      const Suffix& sfx = suffix(j);
      for (std::size_t m = j + 1; m < d; ++m) {
        const double pm = sfx.p[m - j - 1];
        if (pm <= 0.0 || noise.uniform() >= pm) continue;
        return resim(j, m, sfx, noise, u_measure);
      }
      return sample_index(sfx.cumulative, u_measure);
    }
    return sample_index(base_cumulative_, u_measure);
  }

  // Second jump at decision m after a first jump at j: rebuild the state at
  // m (from the suffix checkpoint when stored, else by replaying the
  // recorded no-jump prefix), apply the jump and continue live.
  std::uint64_t resim(std::size_t j, std::size_t m, const Suffix& sfx, rng::Stream& noise,
                      double u_measure) {
    Eigen::VectorXcd psi;
    std::size_t pos;      // next op index to execute
    std::size_t ordinal;  // decision ordinal at `pos`
    if (sfx.has_pre) {
      psi = sfx.pre[m - j - 1];
      pos = prog_.decisions[m];
      ordinal = m;
    } else {
      psi = sfx.init;
      pos = prog_.decisions[j] + 1;
      ordinal = j + 1;
    }
    for (std::size_t i = pos; i < prog_.ops.size(); ++i) {
      const Op& op = prog_.ops[i];
      if (!is_decision(op)) {
        apply_deterministic(psi, op, nullptr);
        continue;
      }
      if (ordinal < m) {
        apply_no_jump(psi, op, decision_probability(psi, op));
      } else if (ordinal == m) {
        apply_jump(psi, op);
      } else {
        const double p = decision_probability(psi, op);
        if (p > 0.0 && noise.uniform() < p)
          apply_jump(psi, op);
        else
          apply_no_jump(psi, op, p);
      }
      ++ordinal;
    }
    return sample_index(cumulative_distribution(probabilities(psi)), u_measure);
  }

  Eigen::VectorXcd final_state_live(std::uint64_t shot, rng::Stream* noise) {
    rng::Stream coherent;
    if (prog_.jitter)
      coherent = rng::Stream::derive(seed_, {prog_.basis_tag, shot, rng::kStreamCoherent});
    Eigen::VectorXcd psi = zero_state(prog_.n);
    for (const Op& op : prog_.ops) {
      if (is_decision(op)) {
        const double p = decision_probability(psi, op);
        if (p > 0.0 && noise->uniform() < p)
          apply_jump(psi, op);
        else
          apply_no_jump(psi, op, p);
      } else {
        apply_deterministic(psi, op, prog_.jitter ? &coherent : nullptr);
      }
    }
    return psi;
  }

  std::uint64_t apply_readout_flips(std::uint64_t outcome, std::uint64_t shot) {
    if (readout_perfect_) return outcome;
    auto stream = rng::Stream::derive(seed_, {prog_.basis_tag, shot, rng::kStreamReadout});
    for (int q = 0; q < prog_.n; ++q) {
      const bool bit = (outcome >> q) & 1;
      const double pf = bit ? flip1_[static_cast<std::size_t>(q)]
                            : flip0_[static_cast<std::size_t>(q)];
      if (pf > 0.0 && stream.uniform() < pf) outcome ^= std::uint64_t{1} << q;
    }
    return outcome;
  }

  Program prog_;
  std::uint64_t seed_ = 0;
  Eigen::Index dim_ = 0;
  bool use_cache_ = false;
  bool readout_perfect_ = true;
  std::vector<double> flip0_, flip1_;

  std::vector<Eigen::VectorXcd> base_pre_;
  std::vector<double> base_p_;
  Eigen::VectorXd base_cumulative_;
  std::vector<std::unique_ptr<Suffix>> suffixes_;
  std::unique_ptr<std::deque<std::once_flag>> suffix_once_;
  std::atomic<std::int64_t> checkpoint_budget_{0};
};

void check_run_args(int n, const NoiseModel& model, std::uint64_t shots) {
  model.validate();
  if (n != model.n())
    throw std::invalid_argument("noise: qubit count " + std::to_string(n) +
                                " does not match model (" + std::to_string(model.n()) + ")");
  if (shots < 1) throw std::invalid_argument("noise: shots must be >= 1");
}

}  // namespace

// ---- model construction -----------------------------------------------------------

void NoiseModel::validate() const {
  if (qubits.empty()) throw std::invalid_argument("noise model: no qubits");
  if (readout.size() != qubits.size())
    throw std::invalid_argument("noise model: readout list size does not match qubit count");
  for (std::size_t q = 0; q < qubits.size(); ++q) {
    if (!(qubits[q].t1_us > 0.0))
      throw std::invalid_argument("noise model: qubit " + std::to_string(q + 1) +
                                  " has non-positive T1");
    if (!(qubits[q].tphi_us > 0.0))
      throw std::invalid_argument("noise model: qubit " + std::to_string(q + 1) +
                                  " has non-positive Tphi");
    validate_transition(readout[q]);
  }
  if (!(sq_layer_ns > 0.0) || !(cz_layer_ns > 0.0))
    throw std::invalid_argument("noise model: layer durations must be positive");
  if (cz_phase_std < 0.0)
    throw std::invalid_argument("noise model: cz_phase_std must be non-negative");
}

NoiseModel noiseless_model(int n) {
  if (n < 1) throw std::invalid_argument("noiseless_model: need at least one qubit");
  NoiseModel m;
  m.qubits.assign(static_cast<std::size_t>(n), QubitNoise{});
  m.readout.assign(static_cast<std::size_t>(n), TransitionMatrix{1.0, 1.0});
  return m;
}

NoiseModel model_from_device(const DeviceParams& dev, const NoiseModelOptions& opt) {
  NoiseModel m;
  m.sq_layer_ns = opt.sq_layer_ns;
  m.cz_layer_ns = opt.cz_layer_ns;
  m.cz_phase_mean = opt.cz_phase_mean;
  m.cz_phase_std = opt.cz_phase_std;
  m.zz_mhz = opt.zz_mhz;
  for (int i = 0; i < dev.n(); ++i) {
    const auto& q = dev.qubits[static_cast<std::size_t>(i)];
    QubitNoise qn;
    qn.t1_us = q.t1_us;
    const TphiResult tr = derive_tphi(q.t1_us, q.t2star_us, opt.tphi_ceiling_us);
    qn.tphi_us = tr.tphi_us;
    if (tr.clamped)
      m.warnings.push_back("qubit " + std::to_string(i + 1) +
                           ": T2* implies no pure dephasing; Tphi clamped to ceiling");
    m.qubits.push_back(qn);
  }
  m.readout = dev.transitions();
  m.validate();
  return m;
}

double channel_amplitude_damping(double t_ns, double t1_us) {
  check_positive(t_ns, "duration");
  check_positive(t1_us, "T1");
  return 1.0 - std::exp(-(t_ns * 1e-3) / t1_us);
}

double dephasing_flip_probability(double t_ns, double tphi_us) {
  check_positive(t_ns, "duration");
  check_positive(tphi_us, "Tphi");
  return 0.5 * (1.0 - std::exp(-(t_ns * 1e-3) / tphi_us));
}

TphiResult derive_tphi(double t1_us, double t2star_us, double ceiling_us) {
  check_positive(t1_us, "T1");
  check_positive(t2star_us, "T2*");
  check_positive(ceiling_us, "Tphi ceiling");
  const double rate = 1.0 / t2star_us - 1.0 / (2.0 * t1_us);
  if (rate <= 0.0) return {ceiling_us, true};
  return {1.0 / rate, false};
}

// ---- trajectory runs ---------------------------------------------------------------

Counts noisy_basis_counts(int n, const NoiseModel& model, std::string_view basis,
                          std::uint64_t basis_tag, std::uint64_t shots,
                          std::uint64_t seed, const RunOptions& opt,
                          std::vector<std::uint64_t>* outcomes) {
  check_run_args(n, model, shots);
  TrajectoryEngine engine(build_program(n, model, basis, basis_tag), model, seed, opt.cache);
  std::vector<std::uint64_t> recorded(shots);
  parallel_for_index(shots, resolve_workers(opt.workers),
                     [&](std::uint64_t shot) { recorded[shot] = engine.run_shot(shot); });
  Counts counts;
  counts.n_qubits = n;
  for (const auto o : recorded) ++counts.table[o];
  if (outcomes) *outcomes = std::move(recorded);
  return counts;
}

TrajectoryRun noisy_lc_experiment(int n, const NoiseModel& model, std::uint64_t shots,
                                  std::uint64_t seed, const RunOptions& opt) {
  const WitnessCoefficients wc = witness_coefficients(n);
  TrajectoryRun run;
  run.shots = shots;
  run.counts_xz = noisy_basis_counts(n, model, wc.basis_xz, kBasisTagXZ, shots, seed, opt,
                                     opt.record_outcomes ? &run.outcomes_xz : nullptr);
  run.counts_zx = noisy_basis_counts(n, model, wc.basis_zx, kBasisTagZX, shots, seed, opt,
                                     opt.record_outcomes ? &run.outcomes_zx : nullptr);
  return run;
}

// ---- exact density-matrix oracle ---------------------------------------------------

namespace {

void rho_gate1(Eigen::MatrixXcd& rho, int q, const Eigen::Matrix2cd& u) {
  const Eigen::Index dim = rho.rows();
  const std::uint64_t mask = std::uint64_t{1} << q;
  const std::uint64_t lo = mask - 1;
  const std::uint64_t half = static_cast<std::uint64_t>(dim) >> 1;
  const cplx u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
  for (Eigen::Index c = 0; c < dim; ++c) {
    for (std::uint64_t k = 0; k < half; ++k) {
      const auto i0 = static_cast<Eigen::Index>(((k & ~lo) << 1) | (k & lo));
      const auto i1 = static_cast<Eigen::Index>(static_cast<std::uint64_t>(i0) | mask);
      const cplx x0 = rho(i0, c), x1 = rho(i1, c);
      rho(i0, c) = u00 * x0 + u01 * x1;
      rho(i1, c) = u10 * x0 + u11 * x1;
    }
  }
  const cplx c00 = std::conj(u00), c01 = std::conj(u01), c10 = std::conj(u10),
             c11 = std::conj(u11);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (std::uint64_t k = 0; k < half; ++k) {
      const auto j0 = static_cast<Eigen::Index>(((k & ~lo) << 1) | (k & lo));
      const auto j1 = static_cast<Eigen::Index>(static_cast<std::uint64_t>(j0) | mask);
      const cplx y0 = rho(r, j0), y1 = rho(r, j1);
      rho(r, j0) = y0 * c00 + y1 * c01;
      rho(r, j1) = y0 * c10 + y1 * c11;
    }
  }
}

// rho <- D rho D^H for D = diag(1 ... 1, f on the |11> pair subspace); with
// Gaussian phase jitter the conjugating factor is the jitter average, which
// shrinks pair coherences by exp(-std^2/2).
void rho_pair_phase(Eigen::MatrixXcd& rho, int qa, int qb, cplx f) {
  const Eigen::Index dim = rho.rows();
  const std::uint64_t set =
      (std::uint64_t{1} << qa) | (std::uint64_t{1} << qb);
  const cplx fc = std::conj(f);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const bool rs = (static_cast<std::uint64_t>(r) & set) == set;
    for (Eigen::Index c = 0; c < dim; ++c) {
      const bool cs = (static_cast<std::uint64_t>(c) & set) == set;
      if (rs == cs) continue;
      rho(r, c) *= rs ? f : fc;
    }
  }
}

// Validity checks shared by the public density-channel entry points.
int density_channel_qubits(const Eigen::MatrixXcd& rho, int q, double rate,
                           const char* what) {
  if (rho.rows() != rho.cols() || rho.rows() < 2 ||
      (rho.rows() & (rho.rows() - 1)) != 0) {
    throw std::invalid_argument(std::string(what) +
                                ": density matrix dimension must be a power of two");
  }
  int n = 0;
  while ((Eigen::Index{1} << (n + 1)) <= rho.rows()) ++n;
  if (q < 0 || q >= n) {
    throw std::invalid_argument(std::string(what) + ": qubit index out of range");
  }
  if (!(rate >= 0.0) || !(rate <= 1.0)) {
    throw std::domain_error(std::string(what) + ": rate must lie in [0, 1]");
  }
  return n;
}

}  // namespace

void apply_density_damping(Eigen::MatrixXcd& rho, int q, double gamma) {
  density_channel_qubits(rho, q, gamma, "apply_density_damping");
  const double s = std::sqrt(1.0 - gamma);
  const Eigen::Index dim = rho.rows();
  const std::uint64_t mask = std::uint64_t{1} << q;
  const std::uint64_t lo = mask - 1;
  const std::uint64_t half = static_cast<std::uint64_t>(dim) >> 1;
  for (std::uint64_t kr = 0; kr < half; ++kr) {
    const auto r0 = static_cast<Eigen::Index>(((kr & ~lo) << 1) | (kr & lo));
    const auto r1 = static_cast<Eigen::Index>(static_cast<std::uint64_t>(r0) | mask);
    for (std::uint64_t kc = 0; kc < half; ++kc) {
      const auto c0 = static_cast<Eigen::Index>(((kc & ~lo) << 1) | (kc & lo));
      const auto c1 = static_cast<Eigen::Index>(static_cast<std::uint64_t>(c0) | mask);
      rho(r0, c0) += gamma * rho(r1, c1);
      rho(r0, c1) *= s;
      rho(r1, c0) *= s;
      rho(r1, c1) *= 1.0 - gamma;
    }
  }
}

void apply_density_dephasing(Eigen::MatrixXcd& rho, int q, double p) {
  density_channel_qubits(rho, q, p, "apply_density_dephasing");
  const double f = 1.0 - 2.0 * p;
  const Eigen::Index dim = rho.rows();
  const std::uint64_t mask = std::uint64_t{1} << q;
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c)
      if (((static_cast<std::uint64_t>(r) ^ static_cast<std::uint64_t>(c)) & mask) != 0)
        rho(r, c) *= f;
}

Eigen::MatrixXcd exact_noisy_density(int n, const NoiseModel& model, std::string_view basis) {
  model.validate();
  if (n != model.n())
    throw std::invalid_argument("exact_noisy_density: qubit count does not match model");
  if (n < 1 || n > 8)
    throw std::out_of_range("exact_noisy_density: supported only for 1..8 qubits");

  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  rho(0, 0) = 1.0;

  const Eigen::Matrix2cd y2 = gate_y_half();
  const Eigen::Matrix2cd h = gate_h();
  const double jitter_shrink = std::exp(-0.5 * model.cz_phase_std * model.cz_phase_std);
  const cplx cz_factor =
      (model.cz_phase_mean == 0.0 && model.cz_phase_std == 0.0)
          ? cplx(-1.0, 0.0)
          : jitter_shrink * std::polar(1.0, kPi + model.cz_phase_mean);

  for (const PlanLayer& layer : layer_plan(n, model, basis)) {
    for (const CircuitGate& g : layer.gates) {
      switch (g.kind) {
        case GateKind::Y2:
          rho_gate1(rho, g.q0, y2);
          break;
        case GateKind::H:
          rho_gate1(rho, g.q0, h);
          break;
        case GateKind::CZ:
          rho_pair_phase(rho, g.q0, g.q1, cz_factor);
          break;
        case GateKind::CX:
          throw std::invalid_argument("exact_noisy_density: unexpected CX gate");
      }
    }
    for (const auto& [a, b] : layer.zz_pairs)
      rho_pair_phase(rho, a, b,
                     std::polar(1.0, -2.0 * kPi * model.zz_mhz * layer.duration_ns * 1e-3));
    for (int q = 0; q < n; ++q) {
      const auto& qb = model.qubits[static_cast<std::size_t>(q)];
      const double gamma = channel_amplitude_damping(layer.duration_ns, qb.t1_us);
      if (gamma > 0.0) apply_density_damping(rho, q, gamma);
      const double p = dephasing_flip_probability(layer.duration_ns, qb.tphi_us);
      if (p > 0.0) apply_density_dephasing(rho, q, p);
    }
  }
  return rho;
}

Eigen::VectorXd exact_noisy_distribution(int n, const NoiseModel& model,
                                         std::string_view basis) {
  return exact_noisy_density(n, model, basis).diagonal().real();
}

Eigen::MatrixXcd trajectory_average_density(int n, const NoiseModel& model,
                                            std::uint64_t shots, std::uint64_t seed,
                                            std::string_view basis, int workers) {
  check_run_args(n, model, shots);
  TrajectoryEngine engine(build_program(n, model, basis, kBasisTagXZ), model, seed,
                          CacheMode::kOff);

  // Fixed-size chunks merged in chunk order keep the float reduction
  // independent of worker scheduling.
  const Eigen::Index dim = Eigen::Index{1} << n;
  const std::uint64_t chunk = 1024;
  const std::uint64_t n_chunks = (shots + chunk - 1) / chunk;
  std::vector<Eigen::MatrixXcd> partial(n_chunks);
  parallel_for_index(n_chunks, resolve_workers(workers), [&](std::uint64_t c) {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(dim, dim);
    const std::uint64_t hi = std::min(shots, (c + 1) * chunk);
    for (std::uint64_t shot = c * chunk; shot < hi; ++shot) {
      const Eigen::VectorXcd psi = engine.final_state(shot);
      acc.noalias() += psi * psi.adjoint();
    }
    partial[c] = std::move(acc);
  });
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& acc : partial) rho += acc;
  return rho / static_cast<double>(shots);
}

}  // namespace lcsim
