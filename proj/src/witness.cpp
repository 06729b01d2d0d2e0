#include "lcsim/witness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "lcsim/parallel.hpp"
#include "lcsim/rng.hpp"

namespace lcsim {

namespace {

constexpr std::uint64_t kTagFluct = 0x666c7563u;  // transition-drift trials
constexpr std::uint64_t kTagBoot = 0x626f6f74u;   // bootstrap resamples

// Index-ordered compensated sum: the reduction result does not depend on
// which worker produced which element.
double kahan_sum(const std::vector<double>& xs) {
  double s = 0.0, c = 0.0;
  for (const double x : xs) {
    const double y = x - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

double kahan_sq_dev(const std::vector<double>& xs, double mean) {
  double s = 0.0, c = 0.0;
  for (const double x : xs) {
    const double d = (x - mean) * (x - mean);
    const double y = d - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

void check_pair(const Eigen::VectorXd& p_xz, const Eigen::VectorXd& p_zx,
                const WitnessCoefficients& coeffs) {
  const Eigen::Index dim = Eigen::Index{1} << coeffs.n_qubits;
  if (coeffs.alpha_xz.size() != dim || coeffs.alpha_zx.size() != dim)
    throw std::invalid_argument("witness: coefficient vectors do not match 2^n");
  if (p_xz.size() != dim || p_zx.size() != dim)
    throw std::invalid_argument("witness: distribution size does not match 2^" +
                                std::to_string(coeffs.n_qubits));
}

void check_transitions(const std::vector<TransitionMatrix>& t, int n, const char* what) {
  if (static_cast<int>(t.size()) != n)
    throw std::invalid_argument(std::string(what) + ": " + std::to_string(t.size()) +
                                " transition matrices for " + std::to_string(n) + " qubits");
}

}  // namespace

double fidelity_bound(const Eigen::VectorXd& p_xz, const Eigen::VectorXd& p_zx,
                      const WitnessCoefficients& coeffs) {
  check_pair(p_xz, p_zx, coeffs);
  return coeffs.alpha_xz.dot(p_xz) + coeffs.alpha_zx.dot(p_zx) - 1.0;
}

WitnessResult certify_gme(int n_qubits, double bound, double sigma_shot,
                          double sigma_transition, double z) {
  if (!std::isfinite(bound)) throw std::domain_error("certify_gme: bound must be finite");
  if (!std::isfinite(sigma_shot) || sigma_shot < 0.0 || !std::isfinite(sigma_transition) ||
      sigma_transition < 0.0) {
    throw std::domain_error(
        "certify_gme: sigma components must be finite and non-negative");
  }
  if (!std::isfinite(z) || z < 0.0) {
    throw std::domain_error("certify_gme: z must be finite and non-negative");
  }
  const double sigma_total = sigma_shot + sigma_transition;
  WitnessResult r;
  r.n_qubits = n_qubits;
  r.fidelity_bound = bound;
  r.sigma_shot = sigma_shot;
  r.sigma_transition = sigma_transition;
  r.sigma_total = sigma_total;
  if (sigma_total > 0.0) {
    r.n_sigma_above_half = (bound - 0.5) / sigma_total;
  } else if (bound == 0.5) {
    r.n_sigma_above_half = 0.0;
  } else {
    // Zero-variance degenerate case (noiseless data): the significance is
    // unbounded on whichever side of the threshold the bound sits.
    const double inf = std::numeric_limits<double>::infinity();
    r.n_sigma_above_half = bound > 0.5 ? inf : -inf;
  }
  r.gme_certified = bound - z * sigma_total > 0.5;
  return r;
}

double shot_noise_sigma(const Eigen::VectorXd& p0_xz, const Eigen::VectorXd& p0_zx,
                        const std::vector<TransitionMatrix>& t,
                        const WitnessCoefficients& coeffs, std::uint64_t shots) {
  check_pair(p0_xz, p0_zx, coeffs);
  check_transitions(t, coeffs.n_qubits, "shot_noise_sigma");
  if (shots < 1) throw std::invalid_argument("shot_noise_sigma: shots must be >= 1");

  std::vector<Eigen::Matrix2d> inv_transposed;
  inv_transposed.reserve(t.size());
  for (const auto& ti : t) inv_transposed.push_back(transition_inverse(ti).transpose());

  const auto basis_var = [&](const Eigen::VectorXd& alpha, const Eigen::VectorXd& p0) {
    // Pull the coefficients back through the mitigation: the mitigated bound
    // term equals w . p0 with w = (T^-1)^T alpha, so its multinomial variance
    // is the variance of w under p0 divided by the shot count.
    const Eigen::VectorXd w = apply_kronecker_factors(alpha, inv_transposed);
    const double second_moment = w.cwiseProduct(w).dot(p0);
    const double mean = w.dot(p0);
    return (second_moment - mean * mean) / static_cast<double>(shots);
  };
  const double var = basis_var(coeffs.alpha_xz, p0_xz) + basis_var(coeffs.alpha_zx, p0_zx);
  return std::sqrt(std::max(0.0, var));
}

FluctuationStudy transition_fluctuation_sigma(
    const Eigen::VectorXd& p_xz, const Eigen::VectorXd& p_zx,
    const WitnessCoefficients& coeffs, const std::vector<TransitionMatrix>& t,
    const std::vector<TransitionDelta>& delta, std::uint64_t trials,
    std::uint64_t seed, int bins, int workers) {
  check_pair(p_xz, p_zx, coeffs);
  check_transitions(t, coeffs.n_qubits, "transition_fluctuation_sigma");
  if (static_cast<int>(delta.size()) != coeffs.n_qubits)
    throw std::invalid_argument("transition_fluctuation_sigma: per-qubit delta list mismatch");
  if (trials < 100)
    throw std::invalid_argument("transition_fluctuation_sigma: need at least 100 trials");
  if (bins < 1) throw std::invalid_argument("transition_fluctuation_sigma: bins must be >= 1");

  const int n = coeffs.n_qubits;
  const double baseline = fidelity_bound(p_xz, p_zx, coeffs);
  // Stale-calibration model: the detector drifts between calibration and
  // data-taking, but mitigation keeps using the nominal inverses.
  std::vector<Eigen::Matrix2d> nominal_inv(static_cast<std::size_t>(n));
  for (int q = 0; q < n; ++q)
    nominal_inv[static_cast<std::size_t>(q)] = transition_inverse(t[static_cast<std::size_t>(q)]);

  std::vector<double> distortion(trials, 0.0);
  std::vector<std::uint64_t> rejects(trials, 0);

  parallel_for_index(trials, workers, [&](std::uint64_t trial) {
    auto stream = rng::Stream::derive(seed, {kTagFluct, trial});
    std::vector<Eigen::Matrix2d> factor(static_cast<std::size_t>(n));
    for (;;) {
      bool ok = true;
      for (int q = 0; q < n; ++q) {
        const auto& base = t[static_cast<std::size_t>(q)];
        const auto& d = delta[static_cast<std::size_t>(q)];
        const double f00 = base.f00 + d.df00 * stream.normal();
        const double f11 = base.f11 + d.df11 * stream.normal();
        if (!(f00 > 0.0) || f00 > 1.0 || !(f11 > 0.0) || f11 > 1.0) {
          ok = false;  // left the stochastic domain: discard the whole set
          break;
        }
        Eigen::Matrix2d fwd;
        fwd << f00, 1.0 - f11, 1.0 - f00, f11;
        factor[static_cast<std::size_t>(q)] =
            nominal_inv[static_cast<std::size_t>(q)] * fwd;
      }
      if (ok) break;
      ++rejects[trial];
    }
    const double bound = coeffs.alpha_xz.dot(apply_kronecker_factors(p_xz, factor)) +
                         coeffs.alpha_zx.dot(apply_kronecker_factors(p_zx, factor)) - 1.0;
    distortion[trial] = bound - baseline;
  });

  FluctuationStudy study;
  study.n_qubits = n;
  study.trials = trials;
  for (const auto r : rejects) study.rejected_trials += r;
  study.mean_distortion = kahan_sum(distortion) / static_cast<double>(trials);
  study.std_distortion =
      trials > 1 ? std::sqrt(kahan_sq_dev(distortion, study.mean_distortion) /
                             static_cast<double>(trials - 1))
                 : 0.0;

  double lo = *std::min_element(distortion.begin(), distortion.end());
  double hi = *std::max_element(distortion.begin(), distortion.end());
  if (!(hi > lo)) {
    lo -= 1e-12;
    hi += 1e-12;
  }
  study.histogram.assign(static_cast<std::size_t>(bins), HistogramBin{});
  const double width = (hi - lo) / bins;
  for (int b = 0; b < bins; ++b) {
    study.histogram[static_cast<std::size_t>(b)].low = lo + b * width;
    study.histogram[static_cast<std::size_t>(b)].high = lo + (b + 1) * width;
  }
  for (const double x : distortion) {
    auto b = static_cast<std::int64_t>((x - lo) / (hi - lo) * bins);
    b = std::clamp<std::int64_t>(b, 0, bins - 1);
    ++study.histogram[static_cast<std::size_t>(b)].count;
  }
  return study;
}

double transition_distortion_linear(const Eigen::VectorXd& p_xz,
                                    const Eigen::VectorXd& p_zx,
                                    const WitnessCoefficients& coeffs,
                                    const std::vector<TransitionMatrix>& t,
                                    const std::vector<TransitionDelta>& delta) {
  check_pair(p_xz, p_zx, coeffs);
  check_transitions(t, coeffs.n_qubits, "transition_distortion_linear");
  if (static_cast<int>(delta.size()) != coeffs.n_qubits)
    throw std::invalid_argument("transition_distortion_linear: per-qubit delta list mismatch");

  // Measuring through T + dT and mitigating with the nominal inverse changes
  // the bound by sum_q alpha . (T_q^-1 dT_q) applied at qubit q of the
  // baseline distribution, to first order in dT.
  const int n = coeffs.n_qubits;
  double acc = 0.0;
  for (int q = 0; q < n; ++q) {
    Eigen::Matrix2d dt;
    const auto& d = delta[static_cast<std::size_t>(q)];
    dt << d.df00, -d.df11, -d.df00, d.df11;
    std::vector<Eigen::Matrix2d> factors(static_cast<std::size_t>(n),
                                         Eigen::Matrix2d::Identity());
    factors[static_cast<std::size_t>(q)] =
        transition_inverse(t[static_cast<std::size_t>(q)]) * dt;
    acc += coeffs.alpha_xz.dot(apply_kronecker_factors(p_xz, factors));
    acc += coeffs.alpha_zx.dot(apply_kronecker_factors(p_zx, factors));
  }
  return acc;
}

double bootstrap_sigma(const Counts& counts_xz, const Counts& counts_zx,
                       const std::vector<TransitionMatrix>& t,
                       const WitnessCoefficients& coeffs, std::uint64_t resamples,
                       std::uint64_t seed, int workers) {
  if (counts_xz.table.empty() || counts_zx.table.empty())
    throw std::domain_error("bootstrap_sigma: empty counts");
  if (counts_xz.n_qubits != coeffs.n_qubits || counts_zx.n_qubits != coeffs.n_qubits)
    throw std::invalid_argument("bootstrap_sigma: counts qubit number mismatch");
  check_transitions(t, coeffs.n_qubits, "bootstrap_sigma");
  if (resamples < 100)
    throw std::invalid_argument("bootstrap_sigma: need at least 100 resamples");

  std::vector<Eigen::Matrix2d> inv_transposed;
  inv_transposed.reserve(t.size());
  for (const auto& ti : t) inv_transposed.push_back(transition_inverse(ti).transpose());

  // Observed outcomes in index order, with the mitigation already folded into
  // per-outcome weights so each resampled bound is one weighted count sum.
  struct BasisData {
    std::vector<double> weight;
    std::vector<std::uint64_t> count;
    std::vector<std::uint64_t> suffix;  // suffix[i] = count[i] + count[i+1] + ...
    std::uint64_t shots = 0;
  };
  const auto build = [&](const Counts& counts, const Eigen::VectorXd& alpha) {
    const Eigen::VectorXd w = apply_kronecker_factors(alpha, inv_transposed);
    BasisData b;
    for (const auto& [outcome, c] : counts.table) {
      if (outcome >= static_cast<std::uint64_t>(w.size()))
        throw std::out_of_range("bootstrap_sigma: outcome exceeds 2^n");
      b.weight.push_back(w(static_cast<Eigen::Index>(outcome)));
      b.count.push_back(c);
      b.shots += c;
    }
    b.suffix.assign(b.count.size() + 1, 0);
    for (std::size_t i = b.count.size(); i-- > 0;)
      b.suffix[i] = b.suffix[i + 1] + b.count[i];
    return b;
  };
  const BasisData bxz = build(counts_xz, coeffs.alpha_xz);
  const BasisData bzx = build(counts_zx, coeffs.alpha_zx);

  std::vector<double> bounds(resamples, 0.0);
  parallel_for_index(resamples, workers, [&](std::uint64_t r) {
    auto stream = rng::Stream::derive(seed, {kTagBoot, r});
    const auto resampled_term = [&](const BasisData& b) {
      // Conditional-binomial multinomial sampling over the observed support.
      std::uint64_t remaining = b.shots;
      double acc = 0.0;
      const std::size_t k = b.count.size();
      for (std::size_t i = 0; i + 1 < k && remaining > 0; ++i) {
        const double p = static_cast<double>(b.count[i]) / static_cast<double>(b.suffix[i]);
        std::binomial_distribution<std::uint64_t> bin(remaining, p);
        const std::uint64_t c = bin(stream.engine());
        acc += b.weight[i] * static_cast<double>(c);
        remaining -= c;
      }
      acc += b.weight[k - 1] * static_cast<double>(remaining);
      return acc / static_cast<double>(b.shots);
    };
    bounds[r] = resampled_term(bxz) + resampled_term(bzx) - 1.0;
  });

  const double mean = kahan_sum(bounds) / static_cast<double>(resamples);
  return std::sqrt(kahan_sq_dev(bounds, mean) / static_cast<double>(resamples - 1));
}

}  // namespace lcsim
