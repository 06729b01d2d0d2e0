#include "lcsim/densmat.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "lcsim/cluster.hpp"
#include "support.hpp"

using namespace lcsim;

namespace {

Eigen::MatrixXcd ket00() {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
  m(0, 0) = 1.0;
  return m;
}

}  // namespace

TEST_CASE("pure-state densities and validation") {
  const Eigen::MatrixXcd rho = from_pure(lc_state(3));
  CHECK(rho.rows() == 8);
  CHECK(std::abs(rho.trace().real() - 1.0) < 1e-12);
  CHECK(density_qubits(rho) == 3);
  validate_density(rho);

  CHECK_THROWS_AS(density_qubits(Eigen::MatrixXcd::Zero(3, 3)), std::invalid_argument);
  CHECK_THROWS_AS(density_qubits(Eigen::MatrixXcd::Zero(4, 8)), std::invalid_argument);

  Eigen::MatrixXcd nonherm = rho;
  nonherm(0, 1) += cplx(0.0, 1e-3);
  CHECK_THROWS_AS(validate_density(nonherm), std::invalid_argument);

  Eigen::MatrixXcd offtrace = 2.0 * rho;
  CHECK_THROWS_AS(validate_density(offtrace), std::invalid_argument);

  Eigen::MatrixXcd negeig = Eigen::MatrixXcd::Zero(2, 2);
  negeig(0, 0) = 1.5;
  negeig(1, 1) = -0.5;
  CHECK_THROWS_AS(validate_density(negeig), std::invalid_argument);
}

TEST_CASE("mixtures combine with validated weights") {
  const Eigen::MatrixXcd a = from_pure(zero_state(1));
  Eigen::VectorXcd one = zero_state(1);
  std::swap(one(0), one(1));
  const Eigen::MatrixXcd b = from_pure(one);

  const Eigen::MatrixXcd m = mix({{0.25, a}, {0.75, b}});
  CHECK(std::abs(m(0, 0).real() - 0.25) < 1e-14);
  CHECK(std::abs(m(1, 1).real() - 0.75) < 1e-14);

  CHECK_THROWS_AS(mix({{0.6, a}, {0.6, b}}), std::invalid_argument);
  CHECK_THROWS_AS(mix({{-0.2, a}, {1.2, b}}), std::invalid_argument);
  CHECK_THROWS_AS(mix({}), std::invalid_argument);
}

TEST_CASE("partial trace recovers tensor factors") {
  auto s = rng::Stream::derive(505, {0});
  const Eigen::VectorXcd lo = test::random_vec(2, s);   // qubit 0
  const Eigen::VectorXcd hi = test::random_vec(4, s);   // qubits 1, 2
  Eigen::VectorXcd joint(8);
  for (int h = 0; h < 4; ++h)
    for (int l = 0; l < 2; ++l) joint(h * 2 + l) = hi(h) * lo(l);

  const Eigen::MatrixXcd rho = from_pure(joint);
  CHECK((partial_trace(rho, {0}) - from_pure(lo)).norm() < 1e-12);
  CHECK((partial_trace(rho, {1, 2}) - from_pure(hi)).norm() < 1e-12);

  // Keep-list order: keep[j] becomes output bit j, so {2} extracts the top
  // qubit of the hi pair.
  const Eigen::MatrixXcd rho_hi = from_pure(hi);
  CHECK((partial_trace(rho, {2}) - partial_trace(rho_hi, {1})).norm() < 1e-12);

  // Trace preservation and hermiticity on a mixed input.
  const Eigen::MatrixXcd mixed = random_density(3, 3, s);
  const Eigen::MatrixXcd red = partial_trace(mixed, {0, 2});
  CHECK(std::abs(red.trace().real() - 1.0) < 1e-12);
  CHECK((red - red.adjoint()).norm() < 1e-12);

  CHECK_THROWS_AS(partial_trace(rho, {}), std::domain_error);
  CHECK_THROWS_AS(partial_trace(rho, {3}), std::invalid_argument);
  CHECK_THROWS_AS(partial_trace(rho, {0, 0}), std::invalid_argument);
}

TEST_CASE("partial transpose is an involution and matches the full transpose") {
  auto s = rng::Stream::derive(505, {1});
  const Eigen::MatrixXcd rho = random_density(3, 4, s);
  const Eigen::MatrixXcd once = partial_transpose(rho, {1});
  CHECK((partial_transpose(once, {1}) - rho).norm() < 1e-13);
  CHECK((partial_transpose(rho, {0, 1, 2}) - rho.transpose()).norm() < 1e-13);
  // Transposing A then the complement equals the full transpose.
  CHECK((partial_transpose(partial_transpose(rho, {0}), {1, 2}) - rho.transpose()).norm() <
        1e-13);
}

TEST_CASE("negativity: maximally entangled, separable, and clamped cases") {
  const Eigen::MatrixXcd epr = from_pure(epr_state());
  CHECK(negativity(epr, {0}) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(negativity(epr, {1}) == doctest::Approx(0.5).epsilon(1e-12));

  auto s = rng::Stream::derive(505, {2});
  const Eigen::VectorXcd a = test::random_vec(2, s);
  const Eigen::VectorXcd b = test::random_vec(2, s);
  Eigen::VectorXcd prod(4);
  for (int h = 0; h < 2; ++h)
    for (int l = 0; l < 2; ++l) prod(h * 2 + l) = b(h) * a(l);
  CHECK(negativity(from_pure(prod), {0}) < 1e-10);

  // Mixtures of product states across the cut stay PPT: negativity 0.
  const Eigen::MatrixXcd sep = random_biseparable(3, 1, 99, 5);
  CHECK(negativity(sep, {0}) < 1e-9);
}

TEST_CASE("three-qubit counterexample: pairwise entanglement without GME") {
  const Eigen::MatrixXcd rho123 = counterexample_rho123();
  validate_density(rho123);
  CHECK(density_qubits(rho123) == 3);

  // Conditioning the outer qubit on |0> leaves each adjacent pair in the
  // (2/3, 1/3) EPR/|00> mixture with negativity exactly 1/3.
  const Eigen::MatrixXcd pair = counterexample_pair();
  validate_density(pair);
  CHECK(std::abs(negativity(pair, {0}) - 1.0 / 3.0) < 1e-10);

  const Eigen::MatrixXcd post = postselect_zero(rho123, 2);
  const Eigen::MatrixXcd expected12 =
      test::kron(ket00().topLeftCorner(2, 2), pair);  // |0><0| on qubit 2
  CHECK((post - expected12).norm() < 1e-12);

  const Eigen::MatrixXcd post0 = postselect_zero(rho123, 0);
  const Eigen::MatrixXcd pair23 = partial_trace(post0, {1, 2});
  CHECK((pair23 - pair).norm() < 1e-12);
  CHECK(std::abs(negativity(pair23, {0}) - 1.0 / 3.0) < 1e-10);

  // The unconditioned reduced pairs are entangled too, with negativity
  // (sqrt(5) - 1) / 8: the mixture is pairwise entangled everywhere even
  // though each component is separable across some cut.
  const double expected_neg = (std::sqrt(5.0) - 1.0) / 8.0;
  CHECK(std::abs(negativity(partial_trace(rho123, {0, 1}), {0}) - expected_neg) < 1e-10);
  CHECK(std::abs(negativity(partial_trace(rho123, {1, 2}), {0}) - expected_neg) < 1e-10);
}

TEST_CASE("postselection validates the projection probability") {
  Eigen::VectorXcd one = zero_state(1);
  std::swap(one(0), one(1));
  const Eigen::MatrixXcd rho = from_pure(one);
  CHECK_THROWS_AS(postselect_zero(rho, 0), std::domain_error);
  CHECK_THROWS_AS(postselect_zero(rho, 1), std::invalid_argument);
}

TEST_CASE("true fidelity against the cluster state") {
  for (int n = 2; n <= 6; ++n)
    CHECK(true_fidelity(from_pure(lc_state(n)), n) == doctest::Approx(1.0).epsilon(1e-12));

  // The fully mixed state has fidelity 2^-n.
  const int n = 3;
  const Eigen::MatrixXcd mixed = Eigen::MatrixXcd::Identity(8, 8) / 8.0;
  CHECK(true_fidelity(mixed, n) == doctest::Approx(1.0 / 8.0).epsilon(1e-12));

  CHECK_THROWS_AS(true_fidelity(mixed, 2), std::invalid_argument);
}

TEST_CASE("random ensembles are valid densities") {
  auto s = rng::Stream::derive(505, {3});
  const Eigen::VectorXcd psi = random_state(4, s);
  CHECK(std::abs(psi.norm() - 1.0) < 1e-12);

  const Eigen::MatrixXcd rho = random_density(3, 4, s);
  validate_density(rho);

  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const Eigen::MatrixXcd bisep = random_biseparable(4, 2, seed);
    validate_density(bisep);
    // A biseparable state can never reach fidelity above 1/2 with the
    // cluster state (spot check; the acceptance suite sweeps this).
    CHECK(true_fidelity(bisep, 4) <= 0.5 + 1e-9);
  }

  CHECK_THROWS_AS(random_biseparable(4, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(random_biseparable(4, 4, 1), std::invalid_argument);
}
