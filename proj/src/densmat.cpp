#include "lcsim/densmat.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lcsim/cluster.hpp"

namespace lcsim {

namespace {

void check_density_size(int n) {
  if (n < 1 || n > kMaxDensityQubits)
    throw std::out_of_range("density matrix qubit count " + std::to_string(n) +
                            " outside [1, " + std::to_string(kMaxDensityQubits) + "]");
}

void check_subset(const std::vector<int>& qs, int n, const char* what) {
  std::uint64_t seen = 0;
  for (int q : qs) {
    if (q < 0 || q >= n)
      throw std::invalid_argument(std::string(what) + ": qubit " + std::to_string(q) +
                                  " out of range");
    const std::uint64_t bit = std::uint64_t{1} << q;
    if (seen & bit)
      throw std::invalid_argument(std::string(what) + ": duplicate qubit " + std::to_string(q));
    seen |= bit;
  }
}

// Scatters the low bits of `value` into the positions listed in `bits`.
std::uint64_t scatter(std::uint64_t value, const std::vector<int>& bits) {
  std::uint64_t out = 0;
  for (std::size_t j = 0; j < bits.size(); ++j)
    if (value & (std::uint64_t{1} << j)) out |= std::uint64_t{1} << bits[j];
  return out;
}

}  // namespace

int density_qubits(const Eigen::MatrixXcd& rho) {
  if (rho.rows() != rho.cols())
    throw std::invalid_argument("density matrix is not square");
  const auto dim = static_cast<std::uint64_t>(rho.rows());
  if (dim < 2 || (dim & (dim - 1)) != 0)
    throw std::invalid_argument("density matrix dimension " + std::to_string(dim) +
                                " is not a power of two");
  int n = 0;
  while ((std::uint64_t{1} << n) < dim) ++n;
  return n;
}

void validate_density(const Eigen::MatrixXcd& rho) {
  (void)density_qubits(rho);
  if ((rho - rho.adjoint()).norm() > 1e-10)
    throw std::invalid_argument("density matrix is not Hermitian");
  if (std::abs(rho.trace().real() - 1.0) > 1e-10 || std::abs(rho.trace().imag()) > 1e-10)
    throw std::invalid_argument("density matrix trace is not 1");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -1e-9)
    throw std::invalid_argument("density matrix has negative eigenvalues beyond tolerance");
}

Eigen::MatrixXcd from_pure(const Eigen::VectorXcd& psi) {
  const int n = num_qubits(psi);
  check_density_size(n);
  return psi * psi.adjoint();
}

Eigen::MatrixXcd mix(const std::vector<std::pair<double, Eigen::MatrixXcd>>& terms) {
  if (terms.empty()) throw std::invalid_argument("mix: no terms");
  double total = 0;
  for (const auto& [w, rho] : terms) {
    if (w < 0) throw std::invalid_argument("mix: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("mix: weights sum to " + std::to_string(total) + ", not 1");
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(terms[0].second.rows(), terms[0].second.cols());
  for (const auto& [w, rho] : terms) {
    if (rho.rows() != out.rows() || rho.cols() != out.cols())
      throw std::invalid_argument("mix: term dimensions differ");
    out += w * rho;
  }
  return out;
}

Eigen::MatrixXcd partial_trace(const Eigen::MatrixXcd& rho, const std::vector<int>& keep) {
  const int n = density_qubits(rho);
  if (keep.empty()) throw std::domain_error("partial_trace: empty keep set");
  check_subset(keep, n, "partial_trace");

  std::vector<int> kept = keep;
  std::sort(kept.begin(), kept.end());
  std::vector<int> traced;
  for (int q = 0; q < n; ++q)
    if (std::find(kept.begin(), kept.end(), q) == kept.end()) traced.push_back(q);

  const std::uint64_t dim_keep = std::uint64_t{1} << kept.size();
  const std::uint64_t dim_env = std::uint64_t{1} << traced.size();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim_keep),
                                                static_cast<Eigen::Index>(dim_keep));
  for (std::uint64_t a = 0; a < dim_keep; ++a) {
    const std::uint64_t ka = scatter(a, kept);
    for (std::uint64_t b = 0; b < dim_keep; ++b) {
      const std::uint64_t kb = scatter(b, kept);
      cplx acc = 0;
      for (std::uint64_t e = 0; e < dim_env; ++e) {
        const std::uint64_t ke = scatter(e, traced);
        acc += rho(static_cast<Eigen::Index>(ka | ke), static_cast<Eigen::Index>(kb | ke));
      }
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = acc;
    }
  }
  return out;
}

Eigen::MatrixXcd partial_transpose(const Eigen::MatrixXcd& rho, const std::vector<int>& part_a) {
  const int n = density_qubits(rho);
  check_subset(part_a, n, "partial_transpose");
  std::uint64_t mask = 0;
  for (int q : part_a) mask |= std::uint64_t{1} << q;

  const std::uint64_t dim = std::uint64_t{1} << n;
  Eigen::MatrixXcd out(rho.rows(), rho.cols());
  for (std::uint64_t r = 0; r < dim; ++r)
    for (std::uint64_t c = 0; c < dim; ++c) {
      // Swap the part_a bits between row and column indices.
      const std::uint64_t r2 = (r & ~mask) | (c & mask);
      const std::uint64_t c2 = (c & ~mask) | (r & mask);
      out(static_cast<Eigen::Index>(r2), static_cast<Eigen::Index>(c2)) =
          rho(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
  return out;
}

double negativity(const Eigen::MatrixXcd& rho, const std::vector<int>& part_a) {
  Eigen::MatrixXcd pt = partial_transpose(rho, part_a);
  // The partial transpose of a Hermitian matrix is Hermitian; symmetrize
  // away float dust before the eigen-solve.
  pt = (pt + pt.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(pt, Eigen::EigenvaluesOnly);
  const double trace_norm = solver.eigenvalues().cwiseAbs().sum();
  return std::max(0.0, (trace_norm - 1.0) / 2.0);
}

double true_fidelity(const Eigen::MatrixXcd& rho, int n) {
  check_density_size(n);
  if (rho.rows() != (Eigen::Index{1} << n))
    throw std::invalid_argument("true_fidelity: matrix dimension does not match qubit count");
  const Eigen::VectorXcd lc = lc_state(n);
  return lc.dot(rho * lc).real();
}

Eigen::VectorXcd random_state(int n, rng::Stream& stream) {
  check_density_size(n);
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::VectorXcd psi(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double re = stream.normal();
    const double im = stream.normal();
    psi(i) = cplx(re, im);
  }
  psi /= psi.norm();
  return psi;
}

Eigen::MatrixXcd random_density(int n, int k, rng::Stream& stream) {
  if (k < 1) throw std::invalid_argument("random_density: need at least one component");
  std::vector<double> weights(static_cast<std::size_t>(k));
  double total = 0;
  for (auto& w : weights) {
    w = stream.uniform();
    total += w;
  }
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  for (const double w : weights) {
    const Eigen::VectorXcd psi = random_state(n, stream);
    rho += (w / total) * (psi * psi.adjoint());
  }
  return rho;
}

Eigen::MatrixXcd random_biseparable(int n, int cut, std::uint64_t seed, int k) {
  check_density_size(n);
  if (cut < 1 || cut >= n)
    throw std::invalid_argument("random_biseparable: cut " + std::to_string(cut) +
                                " outside [1, " + std::to_string(n - 1) + "]");
  if (k < 1) throw std::invalid_argument("random_biseparable: need at least one component");

  auto stream = rng::Stream::derive(seed, {0x62697365u});  // "bise"
  std::vector<double> weights(static_cast<std::size_t>(k));
  double total = 0;
  for (auto& w : weights) {
    w = stream.uniform();
    total += w;
  }

  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  for (const double w : weights) {
    const Eigen::VectorXcd lowpart = random_state(cut, stream);
    const Eigen::VectorXcd highpart = random_state(n - cut, stream);
    Eigen::VectorXcd psi(dim);
    for (Eigen::Index h = 0; h < highpart.size(); ++h)
      for (Eigen::Index l = 0; l < lowpart.size(); ++l)
        psi((h << cut) | l) = highpart(h) * lowpart(l);
    rho += (w / total) * (psi * psi.adjoint());
  }
  return rho;
}

Eigen::MatrixXcd postselect_zero(const Eigen::MatrixXcd& rho, int q) {
  const int n = density_qubits(rho);
  check_subset({q}, n, "postselect_zero");
  const std::uint64_t mask = std::uint64_t{1} << q;
  const std::uint64_t dim = std::uint64_t{1} << n;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rho.rows(), rho.cols());
  double prob = 0;
  for (std::uint64_t r = 0; r < dim; ++r) {
    if (r & mask) continue;
    prob += rho(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r)).real();
    for (std::uint64_t c = 0; c < dim; ++c)
      if (!(c & mask))
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            rho(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }
  if (prob < 1e-12)
    throw std::domain_error("postselect_zero: outcome 0 has vanishing probability");
  return out / prob;
}

Eigen::VectorXcd epr_state() {
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(4);
  psi(0) = psi(3) = 1.0 / std::sqrt(2.0);
  return psi;
}

Eigen::MatrixXcd counterexample_rho123() {
  const Eigen::VectorXcd epr = epr_state();
  // |EPR> on qubits (0,1) with qubit 2 in |0>: amplitudes at 000 and 011.
  Eigen::VectorXcd epr12_0 = Eigen::VectorXcd::Zero(8);
  epr12_0(0) = epr(0);
  epr12_0(3) = epr(3);
  // |0> on qubit 0 with |EPR> on qubits (1,2): amplitudes at 000 and 110.
  Eigen::VectorXcd zero_epr23 = Eigen::VectorXcd::Zero(8);
  zero_epr23(0) = epr(0);
  zero_epr23(6) = epr(3);
  return mix({{0.5, from_pure(epr12_0)}, {0.5, from_pure(zero_epr23)}});
}

Eigen::MatrixXcd counterexample_pair() {
  Eigen::VectorXcd zz = Eigen::VectorXcd::Zero(4);
  zz(0) = 1.0;
  return mix({{2.0 / 3.0, from_pure(epr_state())}, {1.0 / 3.0, from_pure(zz)}});
}

}  // namespace lcsim
