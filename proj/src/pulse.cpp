#include "lcsim/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "lcsim/parallel.hpp"
#include "lcsim/rng.hpp"

namespace lcsim {

namespace {

using cd = std::complex<double>;

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kTwoPi = 2.0 * kPi;

void check_band(double value_ghz, const char* name) {
  if (!std::isfinite(value_ghz) || value_ghz < 3.0 || value_ghz > 6.0) {
    throw std::invalid_argument(std::string(name) +
                                " must lie in the 3-6 GHz operating band");
  }
}

// exp(-i phi h) for Hermitian 2x2 h via the Pauli decomposition
// h = m I + a . sigma; exact and branch-free except for the a -> 0 limit.
Eigen::Matrix2cd herm2_exp(const Eigen::Matrix2cd& h, double phi) {
  const double m = 0.5 * (h(0, 0).real() + h(1, 1).real());
  const double az = 0.5 * (h(0, 0).real() - h(1, 1).real());
  const cd c = h(0, 1);  // = ax - i ay
  const double r = std::sqrt(std::norm(c) + az * az);
  const cd e0 = std::polar(1.0, -phi * m);
  Eigen::Matrix2cd u;
  if (r < 1e-300) {
    u.setZero();
    u(0, 0) = e0;
    u(1, 1) = e0;
    return u;
  }
  const double cr = std::cos(phi * r);
  const double f = std::sin(phi * r) / r;
  u(0, 0) = e0 * cd(cr, -f * az);
  u(1, 1) = e0 * cd(cr, f * az);
  u(0, 1) = e0 * cd(f * c.imag(), -f * c.real());
  u(1, 0) = e0 * cd(-f * c.imag(), -f * c.real());
  return u;
}

// exp(-i phi h) for Hermitian 3x3 h through its eigendecomposition.
Eigen::Matrix3cd herm3_exp(const Eigen::Matrix3cd& h, double phi) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(h);
  if (es.info() != Eigen::Success) {
    throw std::domain_error("evolve: 3x3 eigendecomposition failed");
  }
  Eigen::Vector3cd ph;
  for (int k = 0; k < 3; ++k) ph(k) = std::polar(1.0, -phi * es.eigenvalues()(k));
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

double wrap_two_pi(double angle) {
  double a = std::fmod(angle, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a;
}

// Computational states |00>, |01>, |10>, |11> inside the 9-level space.
constexpr int kComp[4] = {0, 1, 3, 4};

std::string format_parameters(const Eigen::VectorXd& x) {
  std::ostringstream os;
  os << std::setprecision(17) << "[";
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (i > 0) os << ", ";
    os << x(i);
  }
  os << "]";
  return os.str();
}

}  // namespace

void TransmonPair::validate() const {
  check_band(omega1_idle_ghz, "omega1_idle_ghz");
  check_band(omega2_idle_ghz, "omega2_idle_ghz");
  if (!std::isfinite(eta1_mhz) || eta1_mhz >= 0.0) {
    throw std::invalid_argument("eta1_mhz must be negative");
  }
  if (!std::isfinite(eta2_mhz) || eta2_mhz >= 0.0) {
    throw std::invalid_argument("eta2_mhz must be negative");
  }
  if (!std::isfinite(g_mhz) || g_mhz <= 0.0) {
    throw std::invalid_argument("g_mhz must be positive");
  }
}

void Waveform::validate() const {
  for (double c : coeffs_ghz) {
    if (!std::isfinite(c)) throw std::invalid_argument("waveform coefficient is not finite");
  }
  if (!std::isfinite(duration_ns) || duration_ns <= 0.0) {
    throw std::invalid_argument("duration_ns must be positive");
  }
  if (!std::isfinite(edge_offset_ns) || edge_offset_ns < 0.0) {
    throw std::invalid_argument("edge_offset_ns must be non-negative");
  }
  if (2.0 * edge_offset_ns >= duration_ns) {
    throw std::invalid_argument("edge_offset_ns must leave a non-empty modulation window");
  }
  check_band(hold1_ghz, "hold1_ghz");
  check_band(hold2_ghz, "hold2_ghz");
  check_band(partner_top_ghz, "partner_top_ghz");
}

double tuned_frequency(const Waveform& wf, double t_ns) {
  const double e = wf.edge_offset_ns;
  const double width = wf.duration_ns - 2.0 * e;
  if (t_ns <= e || t_ns >= wf.duration_ns - e || width <= 0.0) return wf.hold1_ghz;
  const double s = (t_ns - e) / width;
  double f = wf.hold1_ghz;
  for (int k = 0; k < 8; ++k) {
    f += wf.coeffs_ghz[static_cast<std::size_t>(k)] * std::sin((k + 1) * kPi * s);
  }
  return f;
}

double partner_frequency(const Waveform& wf, double t_ns) {
  const double e = wf.edge_offset_ns;
  if (e <= 0.0) return wf.partner_top_ghz;  // instantaneous hop
  const double rise = wf.partner_top_ghz - wf.hold2_ghz;
  if (t_ns < e) {
    return wf.hold2_ghz + rise * 0.5 * (1.0 - std::cos(kPi * t_ns / e));
  }
  if (t_ns > wf.duration_ns - e) {
    const double back = wf.duration_ns - t_ns;
    if (back <= 0.0) return wf.hold2_ghz;
    return wf.hold2_ghz + rise * 0.5 * (1.0 - std::cos(kPi * back / e));
  }
  return wf.partner_top_ghz;
}

Eigen::MatrixXcd evolve(const TransmonPair& pair, const Waveform& wf, double dt_ns) {
  pair.validate();
  wf.validate();
  if (!std::isfinite(dt_ns) || dt_ns <= 0.0) {
    throw std::invalid_argument("evolve: dt_ns must be positive");
  }

  const auto steps = static_cast<long>(std::ceil(wf.duration_ns / dt_ns - 1e-12));
  const double dt = wf.duration_ns / static_cast<double>(std::max<long>(steps, 1));
  const double eta1 = pair.eta1_mhz * 1e-3;
  const double eta2 = pair.eta2_mhz * 1e-3;
  const double g = pair.g_mhz * 1e-3;
  const double sq2g = std::sqrt(2.0) * g;
  const double frame_delta = pair.omega1_idle_ghz - pair.omega2_idle_ghz;
  const double phi = kTwoPi * dt;

  // The Hamiltonian conserves n1 + n2, so the propagator splits into the
  // excitation blocks {|00>}, {|01>,|10>}, {|02>,|11>,|20>}, {|12>,|21>},
  // {|22>}; |00> carries zero energy in this frame and stays exactly 1.
  Eigen::Matrix2cd u1 = Eigen::Matrix2cd::Identity();
  Eigen::Matrix3cd u2 = Eigen::Matrix3cd::Identity();
  Eigen::Matrix2cd u3 = Eigen::Matrix2cd::Identity();
  cd u4 = 1.0;

  Eigen::Matrix2cd h1, h3;
  Eigen::Matrix3cd h2;
  for (long s = 0; s < std::max<long>(steps, 1); ++s) {
    const double t = (static_cast<double>(s) + 0.5) * dt;
    const double d1 = tuned_frequency(wf, t) - pair.omega1_idle_ghz;
    const double d2 = partner_frequency(wf, t) - pair.omega2_idle_ghz;
    const cd hop = std::polar(1.0, kTwoPi * frame_delta * t);  // e^{i theta(t)}

    const double d01 = d2;
    const double d10 = d1;
    const double d02 = 2.0 * d2 + eta2;
    const double d11 = d1 + d2;
    const double d20 = 2.0 * d1 + eta1;
    const double d12 = d1 + 2.0 * d2 + eta2;
    const double d21 = 2.0 * d1 + eta1 + d2;
    const double d22 = 2.0 * (d1 + d2) + eta1 + eta2;

    h1(0, 0) = d01;
    h1(1, 1) = d10;
    h1(1, 0) = g * hop;  // <10| g a1^dag a2 e^{i theta} |01>
    h1(0, 1) = std::conj(h1(1, 0));
    u1 = herm2_exp(h1, phi) * u1;

    h2.setZero();
    h2(0, 0) = d02;
    h2(1, 1) = d11;
    h2(2, 2) = d20;
    h2(1, 0) = sq2g * hop;  // |02> -> |11>
    h2(0, 1) = std::conj(h2(1, 0));
    h2(2, 1) = sq2g * hop;  // |11> -> |20>
    h2(1, 2) = std::conj(h2(2, 1));
    u2 = herm3_exp(h2, phi) * u2;

    h3(0, 0) = d12;
    h3(1, 1) = d21;
    h3(1, 0) = 2.0 * g * hop;  // |12> -> |21>
    h3(0, 1) = std::conj(h3(1, 0));
    u3 = herm2_exp(h3, phi) * u3;

    u4 *= std::polar(1.0, -phi * d22);
  }

  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(9, 9);
  u(0, 0) = 1.0;
  const int b1[2] = {1, 3};
  const int b2[3] = {2, 4, 6};
  const int b3[2] = {5, 7};
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      u(b1[r], b1[c]) = u1(r, c);
      u(b3[r], b3[c]) = u3(r, c);
    }
  }
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) u(b2[r], b2[c]) = u2(r, c);
  }
  u(8, 8) = u4;

  const double drift = (u.adjoint() * u - Eigen::MatrixXcd::Identity(9, 9)).norm();
  if (drift > 1e-8) {
    throw std::domain_error("evolve: propagator drifted from unitarity");
  }
  return u;
}

GateMetrics gate_metrics(const Eigen::MatrixXcd& u) {
  if (u.rows() != 9 || u.cols() != 9) {
    throw std::invalid_argument("gate_metrics: expected a 9x9 propagator");
  }
  GateMetrics m;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) m.computational(r, c) = u(kComp[r], kComp[c]);
  }
  m.conditional_phase = wrap_two_pi(
      std::arg(m.computational(3, 3)) - std::arg(m.computational(1, 1)) -
      std::arg(m.computational(2, 2)) + std::arg(m.computational(0, 0)));
  double deficit = 0.0;
  for (int c = 0; c < 4; ++c) {
    const double kept = m.computational.col(c).squaredNorm();
    deficit = std::max(deficit, 1.0 - kept);
    if (c == 3) m.leakage = 1.0 - kept;
  }
  m.extraction_deficit = deficit;
  return m;
}

Eigen::Matrix4cd corrected_computational(const Eigen::MatrixXcd& u) {
  const GateMetrics m = gate_metrics(u);
  const double p00 = std::arg(m.computational(0, 0));
  const double p01 = std::arg(m.computational(1, 1));
  const double p10 = std::arg(m.computational(2, 2));
  Eigen::Vector4cd gauge;
  gauge(0) = std::polar(1.0, -p00);
  gauge(1) = std::polar(1.0, -p01);
  gauge(2) = std::polar(1.0, -p10);
  gauge(3) = std::polar(1.0, -(p01 + p10 - p00));
  return gauge.asDiagonal() * m.computational;
}

double cz_objective(const TransmonPair& pair, const Waveform& wf, double dt_ns) {
  const Eigen::Matrix4cd v = corrected_computational(evolve(pair, wf, dt_ns));
  Eigen::Vector4cd plus;
  plus << 0.5, 0.5, 0.5, 0.5;
  Eigen::Vector4cd target = plus;
  target(3) = -0.5;  // CZ |++>
  const double f_plus = std::norm(target.dot(v * plus));
  const double f_11 = std::norm(v(3, 3));
  return 1.0 - (2.0 * f_plus + f_11) / 3.0;
}

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, const NelderMeadOptions& opt) {
  if (x0.size() == 0) throw std::invalid_argument("nelder_mead: empty start point");
  if (opt.max_iters < 1) throw std::invalid_argument("nelder_mead: max_iters must be positive");
  const auto n = static_cast<int>(x0.size());

  auto eval = [&f](const Eigen::VectorXd& x) {
    const double v = f(x);
    if (!std::isfinite(v)) {
      throw std::runtime_error("nelder_mead: objective is not finite at parameters " +
                               format_parameters(x));
    }
    return v;
  };

  std::vector<Eigen::VectorXd> xs(static_cast<std::size_t>(n) + 1, x0);
  std::vector<double> fs(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i) + 1](i) += opt.initial_step;
  for (std::size_t i = 0; i < xs.size(); ++i) fs[i] = eval(xs[i]);

  std::vector<std::size_t> order(xs.size());
  NelderMeadResult result;
  result.trace.reserve(static_cast<std::size_t>(opt.max_iters));

  for (int iter = 0; iter < opt.max_iters; ++iter) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&fs](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[order.size() - 2];

    double diameter = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      diameter = std::max(diameter, (xs[i] - xs[best]).norm());
    }
    if (fs[worst] - fs[best] <= opt.f_tol || diameter <= opt.x_tol) {
      result.converged = true;
      result.iterations = iter;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i != worst) centroid += xs[i];
    }
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd reflected = centroid + (centroid - xs[worst]);
    const double fr = eval(reflected);
    if (fr < fs[best]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - xs[worst]);
      const double fe = eval(expanded);
      if (fe < fr) {
        xs[worst] = expanded;
        fs[worst] = fe;
      } else {
        xs[worst] = reflected;
        fs[worst] = fr;
      }
    } else if (fr < fs[second]) {
      xs[worst] = reflected;
      fs[worst] = fr;
    } else {
      const bool outside = fr < fs[worst];
      const Eigen::VectorXd contracted =
          outside ? Eigen::VectorXd(centroid + 0.5 * (centroid - xs[worst]))
                  : Eigen::VectorXd(centroid - 0.5 * (centroid - xs[worst]));
      const double fc = eval(contracted);
      if ((outside && fc <= fr) || (!outside && fc < fs[worst])) {
        xs[worst] = contracted;
        fs[worst] = fc;
      } else {
        for (std::size_t i = 0; i < xs.size(); ++i) {
          if (i == best) continue;
          xs[i] = xs[best] + 0.5 * (xs[i] - xs[best]);
          fs[i] = eval(xs[i]);
        }
      }
    }

    result.iterations = iter + 1;
    std::size_t lead = 0;
    for (std::size_t i = 1; i < fs.size(); ++i) {
      if (fs[i] < fs[lead]) lead = i;
    }
    result.trace.push_back(fs[lead]);
    result.trace_x.push_back(xs[lead]);
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < fs.size(); ++i) {
    if (fs[i] < fs[best]) best = i;
  }
  result.best_x = xs[best];
  result.best_f = fs[best];
  return result;
}

OptimizeResult optimize_cz(const TransmonPair& pair, const Waveform& start, double dt_ns,
                           const NelderMeadOptions& opt) {
  pair.validate();
  start.validate();
  Eigen::VectorXd x0(8);
  for (int k = 0; k < 8; ++k) x0(k) = start.coeffs_ghz[static_cast<std::size_t>(k)];

  auto objective = [&pair, &start, dt_ns](const Eigen::VectorXd& x) {
    Waveform wf = start;
    for (int k = 0; k < 8; ++k) wf.coeffs_ghz[static_cast<std::size_t>(k)] = x(k);
    return cz_objective(pair, wf, dt_ns);
  };

  OptimizeResult out;
  out.detail = nelder_mead(objective, x0, opt);
  out.waveform = start;
  for (int k = 0; k < 8; ++k) {
    out.waveform.coeffs_ghz[static_cast<std::size_t>(k)] = out.detail.best_x(k);
  }
  return out;
}

// ---- process tomography --------------------------------------------------------

ChannelFn unitary_channel(const Eigen::Matrix4cd& v) {
  return [v](const Eigen::Matrix4cd& rho) -> Eigen::Matrix4cd { return v * rho * v.adjoint(); };
}

Eigen::Matrix4cd pauli_two_qubit(int m) {
  if (m < 0 || m >= 16) throw std::out_of_range("pauli_two_qubit: index must be in [0, 16)");
  static const std::array<Eigen::Matrix2cd, 4> sigma = [] {
    std::array<Eigen::Matrix2cd, 4> s;
    s[0] << 1, 0, 0, 1;
    s[1] << 0, 1, 1, 0;
    s[2] << cd(0, 0), cd(0, -1), cd(0, 1), cd(0, 0);
    s[3] << 1, 0, 0, -1;
    return s;
  }();
  const Eigen::Matrix2cd& a = sigma[static_cast<std::size_t>(m / 4)];
  const Eigen::Matrix2cd& b = sigma[static_cast<std::size_t>(m % 4)];
  Eigen::Matrix4cd p;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) p.block<2, 2>(2 * r, 2 * c) = a(r, c) * b;
  }
  return p;
}

Eigen::MatrixXcd chi_of_unitary(const Eigen::Matrix4cd& v) {
  Eigen::VectorXcd c(16);
  for (int m = 0; m < 16; ++m) c(m) = (pauli_two_qubit(m).adjoint() * v).trace() / 4.0;
  return c * c.adjoint();
}

Eigen::Matrix4cd apply_chi(const Eigen::MatrixXcd& chi, const Eigen::Matrix4cd& rho) {
  if (chi.rows() != 16 || chi.cols() != 16) {
    throw std::invalid_argument("apply_chi: chi must be 16x16");
  }
  Eigen::Matrix4cd out = Eigen::Matrix4cd::Zero();
  for (int m = 0; m < 16; ++m) {
    const Eigen::Matrix4cd left = pauli_two_qubit(m) * rho;
    for (int n = 0; n < 16; ++n) {
      const cd w = chi(m, n);
      if (w == cd(0.0, 0.0)) continue;
      out += w * (left * pauli_two_qubit(n).adjoint());
    }
  }
  return out;
}

double process_fidelity(const Eigen::MatrixXcd& chi_a, const Eigen::MatrixXcd& chi_b) {
  if (chi_a.rows() != 16 || chi_a.cols() != 16 || chi_b.rows() != 16 || chi_b.cols() != 16) {
    throw std::invalid_argument("process_fidelity: chi matrices must be 16x16");
  }
  const double ta = chi_a.trace().real();
  const double tb = chi_b.trace().real();
  if (!(ta > 0.0) || !(tb > 0.0)) {
    throw std::domain_error("process_fidelity: chi traces must be positive");
  }
  return (chi_a * chi_b).trace().real() / (ta * tb);
}

ChiProjection project_chi_physical(const Eigen::MatrixXcd& chi) {
  if (chi.rows() != 16 || chi.cols() != 16) {
    throw std::invalid_argument("project_chi_physical: chi must be 16x16");
  }
  const Eigen::MatrixXcd herm = 0.5 * (chi + chi.adjoint());
  const double trace_in = herm.trace().real();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
  if (es.info() != Eigen::Success) {
    throw std::domain_error("project_chi_physical: eigendecomposition failed");
  }
  Eigen::VectorXd vals = es.eigenvalues();
  double clipped = 0.0;
  double kept = 0.0;
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    if (vals(i) < 0.0) {
      clipped -= vals(i);
      vals(i) = 0.0;
    }
    kept += vals(i);
  }

  ChiProjection out;
  out.clipped_mass = clipped;
  Eigen::MatrixXcd rebuilt =
      es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint();
  if (kept > 0.0 && trace_in > 0.0) rebuilt *= trace_in / kept;
  out.chi = rebuilt;

  Eigen::Matrix4cd tp = Eigen::Matrix4cd::Zero();
  for (int m = 0; m < 16; ++m) {
    for (int n = 0; n < 16; ++n) {
      const cd w = out.chi(m, n);
      if (w == cd(0.0, 0.0)) continue;
      tp += w * (pauli_two_qubit(n).adjoint() * pauli_two_qubit(m));
    }
  }
  out.tp_residual = (tp - Eigen::Matrix4cd::Identity()).norm();
  return out;
}

ProcessTomography qpt_two_qubit(const ChannelFn& executor, const QptOptions& opt) {
  if (!executor) throw std::invalid_argument("qpt_two_qubit: executor is empty");

  std::array<Eigen::Matrix4cd, 16> pauli;
  for (int m = 0; m < 16; ++m) pauli[static_cast<std::size_t>(m)] = pauli_two_qubit(m);

  // Informationally complete single-qubit inputs |0>, |1>, |+>, |+i>.
  std::array<Eigen::Vector2cd, 4> kets;
  kets[0] << 1, 0;
  kets[1] << 0, 1;
  kets[2] << cd(1 / std::sqrt(2.0)), cd(1 / std::sqrt(2.0));
  kets[3] << cd(1 / std::sqrt(2.0)), cd(0, 1 / std::sqrt(2.0));

  std::array<Eigen::Matrix4cd, 16> inputs;
  for (int j = 0; j < 16; ++j) {
    Eigen::Vector4cd ket;
    const Eigen::Vector2cd& hi = kets[static_cast<std::size_t>(j / 4)];
    const Eigen::Vector2cd& lo = kets[static_cast<std::size_t>(j % 4)];
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) ket(2 * r + c) = hi(r) * lo(c);
    }
    inputs[static_cast<std::size_t>(j)] = ket * ket.adjoint();
  }

  std::array<Eigen::Matrix4cd, 16> outputs;
  parallel_for_index(16, opt.workers, [&](std::uint64_t j) {
    outputs[j] = executor(inputs[j]);
  });

  // Expectation table; row j, column k holds <P_k> on output j.
  Eigen::MatrixXd meas(16, 16);
  for (int j = 0; j < 16; ++j) {
    for (int k = 0; k < 16; ++k) {
      const double exact =
          (pauli[static_cast<std::size_t>(k)] * outputs[static_cast<std::size_t>(j)])
              .trace()
              .real();
      if (opt.shots_per_setting == 0 || k == 0) {
        meas(j, k) = exact;
        continue;
      }
      const double p_plus = std::clamp(0.5 * (1.0 + exact), 0.0, 1.0);
      auto stream = rng::Stream::derive(opt.seed, {static_cast<std::uint64_t>(j),
                                                   static_cast<std::uint64_t>(k)});
      std::binomial_distribution<std::uint64_t> dist(opt.shots_per_setting, p_plus);
      const double hits = static_cast<double>(dist(stream.engine()));
      meas(j, k) = 2.0 * hits / static_cast<double>(opt.shots_per_setting) - 1.0;
    }
  }

  // Linear inversion: Tr(P_k sum_mn chi_mn P_m rho_j P_n^dag) = meas(j, k).
  Eigen::MatrixXcd a(256, 256);
  for (int j = 0; j < 16; ++j) {
    for (int m = 0; m < 16; ++m) {
      const Eigen::Matrix4cd left = pauli[static_cast<std::size_t>(m)] *
                                    inputs[static_cast<std::size_t>(j)];
      for (int n = 0; n < 16; ++n) {
        const Eigen::Matrix4cd op = left * pauli[static_cast<std::size_t>(n)].adjoint();
        for (int k = 0; k < 16; ++k) {
          a(16 * j + k, 16 * m + n) = (pauli[static_cast<std::size_t>(k)] * op).trace();
        }
      }
    }
  }
  Eigen::VectorXcd rhs(256);
  for (int j = 0; j < 16; ++j) {
    for (int k = 0; k < 16; ++k) rhs(16 * j + k) = meas(j, k);
  }
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(a);
  if (!lu.isInvertible()) {
    throw std::runtime_error("qpt_two_qubit: reconstruction system is singular");
  }
  const Eigen::VectorXcd x = lu.solve(rhs);

  ProcessTomography out;
  out.chi_raw.resize(16, 16);
  for (int m = 0; m < 16; ++m) {
    for (int n = 0; n < 16; ++n) out.chi_raw(m, n) = x(16 * m + n);
  }

  ChiProjection proj = project_chi_physical(out.chi_raw);
  out.chi = std::move(proj.chi);
  out.clipped_mass = proj.clipped_mass;
  out.tp_residual = proj.tp_residual;

  Eigen::Matrix4cd cz = Eigen::Matrix4cd::Identity();
  cz(3, 3) = -1.0;
  out.fidelity_to_cz = process_fidelity(chi_of_unitary(cz), out.chi);

  // Input index 10 is |+>|+>; compare against the ideal CZ output state.
  Eigen::Vector4cd target;
  target << 0.5, 0.5, 0.5, -0.5;
  out.plusplus_fidelity = (target.adjoint() * outputs[10] * target)(0, 0).real();
  return out;
}

}  // namespace lcsim
