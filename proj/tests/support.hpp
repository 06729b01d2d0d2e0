#pragma once

// Shared test support: independent dense-matrix reference implementations
// and small filesystem helpers.  The reference code is deliberately naive —
// full 2^n x 2^n operators built from Kronecker products — and shares no
// kernels with the library, so agreement between the two is meaningful.

#include <Eigen/Dense>

#include <unistd.h>

#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lcsim/rng.hpp"

namespace lcsim::test {

using cplx = std::complex<double>;

// ---- dense operator construction -------------------------------------------------

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Eigen::MatrixXd kron_real(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// One-qubit operator embedded on qubit q of an n-qubit register (qubit 0 is
// the least-significant index bit, so it is the RIGHTMOST Kronecker factor).
inline Eigen::MatrixXcd embed_one(int n, int q, const Eigen::Matrix2cd& u) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(1, 1);
  for (int k = n - 1; k >= 0; --k) {
    if (k == q)
      m = kron(m, u);
    else
      m = kron(m, Eigen::Matrix2cd::Identity());
  }
  return m;
}

// Two-qubit operator on (t0, t1); the 4x4 row/column index is
// (bit of t1 << 1) | bit of t0, matching apply_gate2.
inline Eigen::MatrixXcd embed_two(int n, int t0, int t1, const Eigen::Matrix4cd& u) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  const std::uint64_t m0 = std::uint64_t{1} << t0;
  const std::uint64_t m1 = std::uint64_t{1} << t1;
  const std::uint64_t rest = ~(m0 | m1);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(dim); ++i)
    for (std::uint64_t j = 0; j < static_cast<std::uint64_t>(dim); ++j) {
      if ((i & rest) != (j & rest)) continue;
      const int r = static_cast<int>(((i & m1) ? 2 : 0) | ((i & m0) ? 1 : 0));
      const int c = static_cast<int>(((j & m1) ? 2 : 0) | ((j & m0) ? 1 : 0));
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = u(r, c);
    }
  return out;
}

inline Eigen::Matrix2cd sigma(char letter) {
  Eigen::Matrix2cd m;
  switch (letter) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, cplx(0, -1), cplx(0, 1), 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: throw std::invalid_argument("test sigma: bad letter");
  }
  return m;
}

// Dense matrix of a Pauli string given letters indexed by qubit (0 = LSB).
inline Eigen::MatrixXcd pauli_dense(const std::string& letters, int sign = 1) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(1, 1);
  for (auto it = letters.rbegin(); it != letters.rend(); ++it) m = kron(m, sigma(*it));
  return static_cast<double>(sign) * m;
}

// ---- random objects ---------------------------------------------------------------

inline Eigen::VectorXcd random_vec(Eigen::Index dim, rng::Stream& s) {
  Eigen::VectorXcd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = cplx(s.normal(), s.normal());
  return v / v.norm();
}

// Haar-ish random unitary: QR of a complex Ginibre matrix with the R
// diagonal phases absorbed into Q.
inline Eigen::MatrixXcd random_unitary(Eigen::Index dim, rng::Stream& s) {
  Eigen::MatrixXcd g(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = cplx(s.normal(), s.normal());
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < dim; ++j) {
    const cplx d = r(j, j);
    if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

// ---- random circuits (for kernel-vs-dense equivalence) -----------------------------

struct TestGate {
  int q0 = 0;
  int q1 = -1;  // >= 0 marks a two-qubit gate
  Eigen::Matrix2cd u2;
  Eigen::Matrix4cd u4;
};

inline std::vector<TestGate> random_circuit(int n, int depth, rng::Stream& s) {
  std::vector<TestGate> gates;
  gates.reserve(static_cast<std::size_t>(depth));
  for (int d = 0; d < depth; ++d) {
    TestGate g;
    if (n >= 2 && (s.bits() & 1)) {
      g.q0 = static_cast<int>(s.uniform_index(static_cast<std::uint64_t>(n)));
      g.q1 = static_cast<int>(s.uniform_index(static_cast<std::uint64_t>(n - 1)));
      if (g.q1 >= g.q0) ++g.q1;
      g.u4 = random_unitary(4, s);
    } else {
      g.q0 = static_cast<int>(s.uniform_index(static_cast<std::uint64_t>(n)));
      g.u2 = random_unitary(2, s);
    }
    gates.push_back(std::move(g));
  }
  return gates;
}

// ---- filesystem helpers -------------------------------------------------------------

// Unique per-instance temporary directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::uint64_t counter = 0;
    const auto base = std::filesystem::temp_directory_path();
    path_ = base / ("lcsim_test_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("test: cannot write " + path);
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("test: cannot read " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace lcsim::test
