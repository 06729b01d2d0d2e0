#include "lcsim/statevec.hpp"

#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "support.hpp"

using namespace lcsim;

TEST_CASE("state constructors") {
  const auto z = zero_state(3);
  CHECK(z.size() == 8);
  CHECK(z(0) == cplx(1.0, 0.0));
  CHECK(z.tail(7).norm() == 0.0);

  const auto p = plus_state(2);
  for (int i = 0; i < 4; ++i) CHECK(p(i).real() == doctest::Approx(0.5).epsilon(1e-15));

  CHECK_THROWS_AS(zero_state(0), std::out_of_range);
  CHECK_THROWS_AS(plus_state(kMaxQubits + 1), std::out_of_range);
  CHECK_THROWS_AS(num_qubits(Eigen::VectorXcd::Zero(3)), std::invalid_argument);
  CHECK(num_qubits(Eigen::VectorXcd::Zero(16)) == 4);
}

TEST_CASE("gate factories have the documented actions") {
  CHECK((gate_h() * gate_h() - Eigen::Matrix2cd::Identity()).norm() < 1e-15);
  CHECK((gate_x() * gate_x() - Eigen::Matrix2cd::Identity()).norm() < 1e-15);

  // Y/2 takes |0> to |+>.
  Eigen::Vector2cd v = gate_y_half() * Eigen::Vector2cd(1, 0);
  CHECK(std::abs(v(0) - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(v(1) - 1.0 / std::sqrt(2.0)) < 1e-15);

  // CX: first index bit is the control, second the target.
  const Eigen::Matrix4cd cx = gate_cx();
  for (int c = 0; c < 2; ++c)
    for (int t = 0; t < 2; ++t) {
      const int col = (t << 1) | c;
      const int row = ((t ^ c) << 1) | c;
      CHECK(std::abs(cx(row, col) - 1.0) < 1e-15);
    }

  const Eigen::Matrix4cd cz = gate_cz();
  CHECK(std::abs(cz(3, 3) + 1.0) < 1e-15);
  CHECK(std::abs(cz(0, 0) - 1.0) < 1e-15);

  // Rotation gates are unitary with the right period.
  const auto rx = gate_rx(0.7);
  CHECK((rx * rx.adjoint() - Eigen::Matrix2cd::Identity()).norm() < 1e-14);
  CHECK((gate_rz(4.0 * std::acos(0.0) * 2.0).cwiseAbs() -
         Eigen::Matrix2cd::Identity().cwiseAbs())
            .norm() < 1e-12);
}

TEST_CASE("single-qubit kernel matches the dense operator") {
  auto s = rng::Stream::derive(101, {1});
  for (int n = 1; n <= 4; ++n)
    for (int rep = 0; rep < 4; ++rep) {
      const Eigen::VectorXcd psi0 = test::random_vec(Eigen::Index{1} << n, s);
      const Eigen::Matrix2cd u = test::random_unitary(2, s);
      const int q = static_cast<int>(s.uniform_index(static_cast<std::uint64_t>(n)));

      Eigen::VectorXcd fast = psi0;
      apply_gate1(fast, q, u);
      const Eigen::VectorXcd slow = test::embed_one(n, q, u) * psi0;
      CHECK((fast - slow).norm() < 1e-13);
    }
}

TEST_CASE("two-qubit kernels match the dense operators") {
  auto s = rng::Stream::derive(101, {2});
  for (int n = 2; n <= 4; ++n)
    for (int rep = 0; rep < 4; ++rep) {
      const Eigen::VectorXcd psi0 = test::random_vec(Eigen::Index{1} << n, s);
      const Eigen::Matrix4cd u = test::random_unitary(4, s);
      const int t0 = static_cast<int>(s.uniform_index(static_cast<std::uint64_t>(n)));
      int t1 = static_cast<int>(s.uniform_index(static_cast<std::uint64_t>(n - 1)));
      if (t1 >= t0) ++t1;

      Eigen::VectorXcd fast = psi0;
      apply_gate2(fast, t0, t1, u);
      CHECK((fast - test::embed_two(n, t0, t1, u) * psi0).norm() < 1e-13);

      // CZ fast path against the generic embedding (symmetric in targets).
      Eigen::VectorXcd viacz = psi0;
      apply_cz(viacz, t0, t1);
      CHECK((viacz - test::embed_two(n, t0, t1, gate_cz()) * psi0).norm() < 1e-14);

      // Diagonal fast paths.
      Eigen::Vector4cd d;
      d << std::polar(1.0, s.uniform()), std::polar(1.0, s.uniform()),
          std::polar(1.0, s.uniform()), std::polar(1.0, s.uniform());
      Eigen::VectorXcd viad = psi0;
      apply_diag2(viad, t0, t1, d);
      Eigen::Matrix4cd dm = Eigen::Matrix4cd::Zero();
      dm.diagonal() = d;
      CHECK((viad - test::embed_two(n, t0, t1, dm) * psi0).norm() < 1e-14);

      Eigen::VectorXcd via1 = psi0;
      const cplx d0 = std::polar(1.0, s.uniform());
      const cplx d1 = std::polar(1.0, s.uniform());
      apply_diag1(via1, t0, d0, d1);
      Eigen::Matrix2cd dm1 = Eigen::Matrix2cd::Zero();
      dm1(0, 0) = d0;
      dm1(1, 1) = d1;
      CHECK((via1 - test::embed_one(n, t0, dm1) * psi0).norm() < 1e-14);
    }
}

TEST_CASE("gate application validates its inputs") {
  Eigen::VectorXcd psi = zero_state(2);
  Eigen::Matrix2cd bad;
  bad << 1, 0, 0, 1.1;  // not unitary
  CHECK_THROWS_AS(apply_gate1(psi, 0, bad), std::invalid_argument);
  CHECK_THROWS_AS(apply_gate1(psi, 2, gate_h()), std::out_of_range);
  CHECK_THROWS_AS(apply_gate1(psi, -1, gate_h()), std::out_of_range);
  CHECK_THROWS_AS(apply_gate2(psi, 0, 0, gate_cz()), std::invalid_argument);
  CHECK_THROWS_AS(apply_gate2(psi, 0, 2, gate_cz()), std::out_of_range);
}

TEST_CASE("basis rotation applies H exactly on the X qubits") {
  auto s = rng::Stream::derive(101, {3});
  const Eigen::VectorXcd psi0 = test::random_vec(8, s);
  Eigen::VectorXcd fast = psi0;
  basis_rotate(fast, "XZX");
  Eigen::VectorXcd slow = psi0;
  slow = test::embed_one(3, 0, gate_h()) * slow;
  slow = test::embed_one(3, 2, gate_h()) * slow;
  CHECK((fast - slow).norm() < 1e-14);

  Eigen::VectorXcd untouched = psi0;
  basis_rotate(untouched, "ZZZ");
  CHECK((untouched - psi0).norm() == 0.0);

  CHECK_THROWS_AS(basis_rotate(fast, "XZ"), std::invalid_argument);
  CHECK_THROWS_AS(basis_rotate(fast, "XQZ"), std::invalid_argument);
}

TEST_CASE("probabilities, cumulative sums and index sampling") {
  Eigen::VectorXd p(3);
  p << 0.25, 0.0, 0.75;
  const Eigen::VectorXd cum = cumulative_distribution(p);
  CHECK(cum(0) == doctest::Approx(0.25));
  CHECK(cum(1) == doctest::Approx(0.25));
  CHECK(cum(2) == doctest::Approx(1.0));

  CHECK(sample_index(cum, 0.1) == 0);
  CHECK(sample_index(cum, 0.2499) == 0);
  CHECK(sample_index(cum, 0.2501) == 2);
  CHECK(sample_index(cum, 0.9999) == 2);
  // The zero-probability bin in the middle is never selected: its cumulative
  // value equals the previous one, so it can never strictly exceed a target
  // the previous bin did not.
  for (double u : {0.01, 0.2, 0.4, 0.6, 0.8, 0.99})
    CHECK(sample_index(cum, u) != 1);
}

TEST_CASE("sampling is deterministic, complete and validated") {
  Eigen::VectorXd p(4);
  p << 0.4, 0.3, 0.2, 0.1;

  const Counts a = sample(p, 5000, 99);
  const Counts b = sample(p, 5000, 99);
  CHECK(a.table == b.table);
  CHECK(a.total() == 5000);
  CHECK(a.n_qubits == 2);

  const Counts c = sample(p, 5000, 100);
  CHECK(a.table != c.table);

  Eigen::VectorXd neg(2);
  neg << 1.2, -0.2;
  CHECK_THROWS_AS(sample(neg, 10, 1), std::domain_error);
  CHECK_THROWS_AS(sample(p, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(sample(Eigen::VectorXd(), 10, 1), std::invalid_argument);
}

TEST_CASE("sampled frequencies match the distribution (chi-squared)") {
  Eigen::VectorXd p(4);
  p << 0.4, 0.3, 0.2, 0.1;
  const std::uint64_t shots = 100000;
  const Counts counts = sample(p, shots, 4242);
  double chi2 = 0.0;
  for (int k = 0; k < 4; ++k) {
    const double expected = p(k) * static_cast<double>(shots);
    const auto it = counts.table.find(static_cast<std::uint64_t>(k));
    const double observed =
        it == counts.table.end() ? 0.0 : static_cast<double>(it->second);
    chi2 += (observed - expected) * (observed - expected) / expected;
  }
  // 99.9% quantile of chi-squared with 3 degrees of freedom.
  CHECK(chi2 < 16.266);
}

TEST_CASE("counts round-trip to distributions") {
  Eigen::VectorXd p(8);
  p << 0.5, 0.125, 0.125, 0.0, 0.0, 0.125, 0.0, 0.125;
  const Counts counts = sample(p, 20000, 7);
  const Eigen::VectorXd back = counts_to_distribution(counts);
  CHECK(back.size() == 8);
  CHECK(back.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((back - p).cwiseAbs().maxCoeff() < 0.02);

  Counts empty;
  CHECK_THROWS_AS(counts_to_distribution(empty), std::invalid_argument);
}

TEST_CASE("outcome formatting is MSB-first") {
  CHECK(format_outcome(1, 3) == "001");
  CHECK(format_outcome(6, 3) == "110");
  CHECK(format_outcome(0, 2) == "00");
  CHECK(parse_outcome("001") == 1);
  CHECK(parse_outcome("110") == 6);
  for (std::uint64_t k = 0; k < 16; ++k) CHECK(parse_outcome(format_outcome(k, 4)) == k);
  CHECK_THROWS_AS(parse_outcome("10a"), std::runtime_error);
  CHECK_THROWS_AS(parse_outcome(""), std::runtime_error);
}

TEST_CASE("random circuits: kernels agree with dense linear algebra") {
  auto s = rng::Stream::derive(2024, {0});
  for (int n = 1; n <= 4; ++n) {
    for (int rep = 0; rep < 3; ++rep) {
      const auto gates = test::random_circuit(n, 20, s);
      Eigen::VectorXcd fast = zero_state(n);
      Eigen::VectorXcd slow = fast;
      for (const auto& g : gates) {
        if (g.q1 >= 0) {
          apply_gate2(fast, g.q0, g.q1, g.u4);
          slow = test::embed_two(n, g.q0, g.q1, g.u4) * slow;
        } else {
          apply_gate1(fast, g.q0, g.u2);
          slow = test::embed_one(n, g.q0, g.u2) * slow;
        }
      }
      CHECK((fast - slow).norm() < 1e-12);
    }
  }
}
