#include "usp/dynsys.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "usp/error.hpp"
#include "usp/seed.hpp"

namespace usp {

namespace {

constexpr double kSpectrumTol = 1e-9;

std::string shape(const Eigen::MatrixXd& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng,
                                double scale = 1.0) {
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = scale * normal(rng);
  return m;
}

// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
// diagonal of R made positive.
Eigen::MatrixXd random_orthogonal(Eigen::Index n, std::mt19937_64& rng) {
  const Eigen::MatrixXd g = gaussian_matrix(n, n, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (r(i, i) < 0.0) q.col(i) *= -1.0;
  }
  return q;
}

double condition_number(const Eigen::MatrixXcd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  const auto& s = svd.singularValues();
  const double lo = s(s.size() - 1);
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / lo;
}

double sample_real(double lo, double hi, bool nonnegative, std::mt19937_64& rng) {
  boost::random::uniform_real_distribution<double> mag(lo, hi);
  const double v = lo == hi ? lo : mag(rng);
  if (nonnegative) return v;
  boost::random::bernoulli_distribution<> sign(0.5);
  return sign(rng) ? -v : v;
}

// Uniform point of {lo <= |z| <= hi, 0 <= Im z <= tau} (upper half plane).
std::complex<double> sample_upper(double lo, double hi, double tau, bool nonnegative,
                                  std::mt19937_64& rng) {
  boost::random::uniform_real_distribution<double> unit(0.0, 1.0);
  const double im_cap = std::min(tau, hi);
  if (hi - lo < 1e-12) {
    // Degenerate annulus: uniform on the admissible arcs of |z| = hi.
    const double phi_max = hi > 0.0 ? std::asin(std::min(1.0, im_cap / hi)) : 0.0;
    double phi = unit(rng) * phi_max;
    if (!nonnegative && unit(rng) < 0.5) phi = std::numbers::pi - phi;
    return std::polar(hi, phi);
  }
  const double x_lo = nonnegative ? 0.0 : -hi;
  for (;;) {
    const double x = x_lo + (hi - x_lo) * unit(rng);
    const double y = im_cap * unit(rng);
    const double r = std::hypot(x, y);
    if (r >= lo && r <= hi) return {x, y};
  }
}

}  // namespace

void LinearSystem::validate() const {
  const auto d = A.rows();
  if (d == 0 || A.cols() != d) throw ValidationError("A must be square and nonempty, got " + shape(A));
  if (B.rows() != d) throw ValidationError("B has " + shape(B) + ", expected " + std::to_string(d) + " rows");
  if (C.cols() != d) throw ValidationError("C has " + shape(C) + ", expected " + std::to_string(d) + " columns");
  if (!(kappa >= 1.0 - 1e-12)) throw ValidationError("kappa must be >= 1");
  if (!(noise_sigma >= 0.0)) throw ValidationError("noise_sigma must be nonnegative");
  for (const auto& z : eigenvalues) {
    if (std::abs(z) > 1.0 + kSpectrumTol) {
      throw ValidationError("eigenvalue outside the unit disk: |z| = " + std::to_string(std::abs(z)));
    }
  }
  auto spec = sorted_spectrum(eigenvalues);
  std::vector<std::complex<double>> conj;
  conj.reserve(spec.size());
  for (const auto& z : spec) conj.push_back(std::conj(z));
  conj = sorted_spectrum(std::move(conj));
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (std::abs(spec[i] - conj[i]) > 1e-7) {
      throw ValidationError("complex eigenvalues must come in conjugate pairs");
    }
  }
}

LinearSystem make_linear_system(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd C,
                                double noise_sigma) {
  LinearSystem sys;
  sys.A = std::move(A);
  sys.B = std::move(B);
  sys.C = std::move(C);
  sys.noise_sigma = noise_sigma;
  if (sys.A.rows() == 0 || sys.A.rows() != sys.A.cols()) {
    throw ValidationError("A must be square and nonempty, got " + shape(sys.A));
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(sys.A, true);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition of A failed");
  const auto vals = es.eigenvalues();
  sys.eigenvalues.assign(vals.data(), vals.data() + vals.size());
  sys.kappa = std::max(1.0, condition_number(es.eigenvectors()));
  sys.validate();
  return sys;
}

LinearSystem memory_system(Eigen::Index d_hidden) {
  if (d_hidden < 1) throw ValidationError("d_hidden must be positive");
  LinearSystem sys;
  sys.A = Eigen::MatrixXd::Zero(d_hidden, d_hidden);
  sys.A(0, d_hidden - 1) = 1.0;
  for (Eigen::Index i = 1; i < d_hidden; ++i) sys.A(i, i - 1) = 1.0;
  sys.B = Eigen::MatrixXd::Identity(d_hidden, d_hidden);
  sys.C = Eigen::MatrixXd::Identity(d_hidden, d_hidden);
  for (Eigen::Index k = 0; k < d_hidden; ++k) {
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(d_hidden);
    sys.eigenvalues.push_back(std::polar(1.0, phase));
  }
  sys.kappa = 1.0;  // permutation matrices are orthogonal
  return sys;
}

LinearSystem sample_system(const SystemConfig& cfg, std::uint64_t seed) {
  if (cfg.d_hidden < 1) throw ValidationError("d_hidden must be at least 1");
  if (cfg.d_in < 1 || cfg.d_out < 1) throw ValidationError("d_in and d_out must be at least 1");
  if (!(cfg.tau >= 0.0 && cfg.tau <= 1.0)) throw ValidationError("tau must lie in [0, 1]");
  if (!(cfg.radius_lo >= 0.0 && cfg.radius_hi <= 1.0)) {
    throw ValidationError("radius bounds must satisfy 0 <= L and U <= 1");
  }
  if (cfg.radius_lo > cfg.radius_hi) {
    throw ValidationError("infeasible annulus: L = " + std::to_string(cfg.radius_lo) +
                          " > U = " + std::to_string(cfg.radius_hi));
  }
  if (!(cfg.max_condition >= 1.0)) throw ValidationError("max_condition must be >= 1");
  if (!(cfg.noise_sigma >= 0.0)) throw ValidationError("noise_sigma must be nonnegative");

  std::mt19937_64 rng(seed);
  const Eigen::Index d = cfg.d_hidden;

  LinearSystem sys;
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(d, d);
  Eigen::Index pos = 0;
  if (cfg.tau == 0.0) {
    for (; pos < d; ++pos) {
      const double v = sample_real(cfg.radius_lo, cfg.radius_hi, cfg.nonnegative_real, rng);
      block(pos, pos) = v;
      sys.eigenvalues.emplace_back(v, 0.0);
    }
  } else {
    if (d % 2 == 1) {
      const double v = sample_real(cfg.radius_lo, cfg.radius_hi, cfg.nonnegative_real, rng);
      block(0, 0) = v;
      sys.eigenvalues.emplace_back(v, 0.0);
      pos = 1;
    }
    for (; pos < d; pos += 2) {
      const auto z = sample_upper(cfg.radius_lo, cfg.radius_hi, cfg.tau, cfg.nonnegative_real, rng);
      block(pos, pos) = z.real();
      block(pos, pos + 1) = -z.imag();
      block(pos + 1, pos) = z.imag();
      block(pos + 1, pos + 1) = z.real();
      sys.eigenvalues.push_back(z);
      sys.eigenvalues.push_back(std::conj(z));
    }
  }

  const Eigen::MatrixXd orth = random_orthogonal(d, rng);
  boost::random::uniform_real_distribution<double> log_scale(0.0, std::log(cfg.max_condition));
  Eigen::VectorXd s(d);
  for (Eigen::Index i = 0; i < d; ++i) s(i) = std::exp(log_scale(rng));
  const Eigen::MatrixXd P = orth * s.asDiagonal();
  const Eigen::MatrixXd P_inv = s.cwiseInverse().asDiagonal() * orth.transpose();
  sys.A = P * block * P_inv;

  // The 2x2 blocks are unitarily diagonalizable, so cond(P) is the
  // condition number of a complex eigenbasis of A.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(P);
  const auto& sv = svd.singularValues();
  sys.kappa = std::max(1.0, sv(0) / sv(sv.size() - 1));

  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  sys.B = gaussian_matrix(d, cfg.d_in, rng, scale);
  sys.C = gaussian_matrix(cfg.d_out, d, rng, scale);
  sys.noise_sigma = cfg.noise_sigma;
  return sys;
}

std::vector<std::complex<double>> sorted_spectrum(std::vector<std::complex<double>> values) {
  std::sort(values.begin(), values.end(), [](const auto& a, const auto& b) {
    if (std::abs(a.real() - b.real()) > 1e-7) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return values;
}

void Trajectory::validate() const {
  if (outputs.rows() < 1) throw ValidationError("trajectory must have at least one step");
  if (inputs.rows() != outputs.rows()) {
    throw ValidationError("inputs and outputs differ in length: " + std::to_string(inputs.rows()) +
                          " vs " + std::to_string(outputs.rows()));
  }
}

Trajectory simulate_lds(const LinearSystem& sys, const Eigen::MatrixXd& inputs,
                        std::uint64_t seed) {
  if (inputs.rows() < 1) throw ValidationError("inputs must be nonempty");
  if (inputs.cols() != sys.d_in()) {
    throw ValidationError("inputs have " + std::to_string(inputs.cols()) +
                          " channels but the system expects " + std::to_string(sys.d_in()));
  }
  if (sys.A.rows() != sys.A.cols() || sys.B.rows() != sys.A.rows() || sys.C.cols() != sys.A.rows()) {
    throw ValidationError("system matrices have inconsistent shapes");
  }
  const Eigen::Index T = inputs.rows();
  std::mt19937_64 rng(seed);
  boost::random::normal_distribution<double> normal(0.0, 1.0);

  Trajectory traj;
  traj.inputs = inputs;
  traj.outputs.resize(T, sys.d_out());
  traj.seed = seed;
  traj.generator_tag = "lds";

  Eigen::VectorXd x = Eigen::VectorXd::Zero(sys.d_hidden());
  Eigen::VectorXd y(sys.d_out());
  for (Eigen::Index t = 0; t < T; ++t) {
    x = sys.A * x + sys.B * inputs.row(t).transpose();
    y.noalias() = sys.C * x;
    if (sys.noise_sigma > 0.0) {
      for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += sys.noise_sigma * normal(rng);
    }
    traj.outputs.row(t) = y.transpose();
  }
  return traj;
}

void NonlinearSystem::validate() const {
  const auto d1 = A1.rows();
  const auto d2 = A2.rows();
  if (A1.cols() != d1 || A2.cols() != d2) throw ValidationError("A1 and A2 must be square");
  if (B1.rows() != d1 || B2.rows() != d2 || B1.cols() != B2.cols()) {
    throw ValidationError("B1 / B2 shapes are inconsistent with A1 / A2");
  }
  if (A2.rows() != A1.rows()) throw ValidationError("A1 and A2 must share the state dimension");
  if (C.cols() != d2) throw ValidationError("C has " + shape(C) + ", expected " + std::to_string(d2) + " columns");
  if (!(noise_sigma >= 0.0)) throw ValidationError("noise_sigma must be nonnegative");
}

NonlinearSystem sample_nonlinear(const NonlinearConfig& cfg, std::uint64_t seed) {
  SystemConfig first;
  first.d_hidden = cfg.d_hidden;
  first.d_in = cfg.d_in;
  first.d_out = cfg.d_out;
  first.tau = cfg.tau;
  first.radius_lo = cfg.radius_lo;
  first.radius_hi = cfg.radius_hi;
  SystemConfig second = first;

  const auto layer1 = sample_system(first, seed);
  const auto layer2 = sample_system(second, derive_stream_seed(seed, SeedStream::SecondLayer));

  NonlinearSystem sys;
  sys.A1 = layer1.A;
  sys.B1 = layer1.B;
  sys.C = layer1.C;
  sys.A2 = layer2.A;
  sys.B2 = layer2.B;
  sys.activation = cfg.activation;
  sys.noise_sigma = cfg.noise_sigma;
  return sys;
}

Trajectory simulate_nonlinear(const NonlinearSystem& sys, const Eigen::MatrixXd& inputs,
                              std::uint64_t seed) {
  sys.validate();
  if (inputs.rows() < 1) throw ValidationError("inputs must be nonempty");
  if (inputs.cols() != sys.B1.cols()) {
    throw ValidationError("inputs have " + std::to_string(inputs.cols()) +
                          " channels but the system expects " + std::to_string(sys.B1.cols()));
  }
  const Eigen::Index T = inputs.rows();
  std::mt19937_64 rng(seed);
  boost::random::normal_distribution<double> normal(0.0, 1.0);

  Trajectory traj;
  traj.inputs = inputs;
  traj.outputs.resize(T, sys.C.rows());
  traj.seed = seed;
  traj.generator_tag = "nonlinear";

  Eigen::VectorXd x = Eigen::VectorXd::Zero(sys.A1.rows());
  Eigen::VectorXd y(sys.C.rows());
  for (Eigen::Index t = 0; t < T; ++t) {
    const Eigen::VectorXd u = inputs.row(t).transpose();
    Eigen::VectorXd h = sys.A1 * x + sys.B1 * u;
    if (sys.activation == Activation::Tanh) h = h.array().tanh().matrix();
    x = sys.A2 * h + sys.B2 * u;
    y.noalias() = sys.C * x;
    if (sys.noise_sigma > 0.0) {
      for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += sys.noise_sigma * normal(rng);
    }
    traj.outputs.row(t) = y.transpose();
  }
  return traj;
}

Eigen::MatrixXd gaussian_inputs(Eigen::Index T, Eigen::Index d_in, std::uint64_t seed,
                                InputScaling scaling) {
  if (T < 1) throw ValidationError("input length T must be at least 1");
  if (d_in < 1) throw ValidationError("d_in must be at least 1");
  std::mt19937_64 rng(seed);
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  // Time-major draw order: a longer sequence extends a shorter one.
  Eigen::MatrixXd u(T, d_in);
  for (Eigen::Index t = 0; t < T; ++t)
    for (Eigen::Index j = 0; j < d_in; ++j) u(t, j) = normal(rng);
  if (scaling == InputScaling::UnitNorm) {
    for (Eigen::Index t = 0; t < T; ++t) {
      const double norm = u.row(t).norm();
      if (norm > 0.0) u.row(t) /= norm;
      else u(t, 0) = 1.0;
    }
  }
  return u;
}

}  // namespace usp
