#include "usp/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss.hpp>

#include "usp/csv_io.hpp"
#include "usp/dynsys.hpp"
#include "usp/error.hpp"
#include "usp/learners.hpp"
#include "usp/poly.hpp"
#include "usp/precond.hpp"
#include "usp/seed.hpp"
#include "usp/spectral.hpp"

namespace usp {

std::string to_string(Suite suite) {
  switch (suite) {
    case Suite::Poly: return "poly";
    case Suite::Gram: return "gram";
    case Suite::Decay: return "decay";
    case Suite::Precond: return "precond";
    case Suite::Ogd: return "ogd";
    case Suite::Oracle: return "oracle";
    case Suite::All: return "all";
  }
  return "all";
}

Suite parse_suite(const std::string& name) {
  for (Suite s : {Suite::Poly, Suite::Gram, Suite::Decay, Suite::Precond, Suite::Ogd, Suite::Oracle,
                  Suite::All}) {
    if (to_string(s) == name) return s;
  }
  throw ValidationError("unknown suite '" + name + "' (expected poly, gram, decay, precond, ogd, oracle or all)");
}

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

CheckResult check_sector_bound(int n_max, std::size_t grid) {
  CheckResult r{"poly", "chebyshev sector bound", true, ""};
  double worst = 0.0;
  int violations = 0;
  for (int n = 1; n <= n_max; ++n) {
    const ComplexSector sector(1.0 / (64.0 * n * n));
    const double sup = sup_on_sector(chebyshev_monic(n), sector, grid);
    const double bound = std::ldexp(1.0, -(n - 2));
    worst = std::max(worst, sup / bound);
    if (sup > bound) ++violations;
  }
  r.passed = violations == 0;
  r.detail = "n=1.." + std::to_string(n_max) + ", max sup/bound " + fmt(worst) + ", " +
             std::to_string(violations) + " violations";
  return r;
}

CheckResult check_coefficient_growth(int n_max) {
  CheckResult r{"poly", "chebyshev coefficient growth", true, ""};
  int violations = 0;
  double worst = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    Rational max_abs = 0;
    for (const auto& c : chebyshev_monic_exact(n)) max_abs = std::max(max_abs, Rational(abs(c)));
    // max|c| <= 2^(0.3 n)  <=>  max|c|^10 <= 2^(3 n)
    Rational lhs = 1;
    for (int i = 0; i < 10; ++i) lhs *= max_abs;
    const Rational rhs = Rational(boost::multiprecision::cpp_int(1) << (3 * n));
    if (lhs > rhs) ++violations;
    worst = std::max(worst, std::log2(static_cast<double>(max_abs)) / n);
  }
  r.passed = violations == 0;
  r.detail = "n=1.." + std::to_string(n_max) + ", max log2(max|c|)/n " + fmt(worst) + ", " +
             std::to_string(violations) + " violations";
  return r;
}

CheckResult check_monic_file(const std::filesystem::path& path) {
  CheckResult r{"poly", "monic coefficients " + path.string(), true, ""};
  try {
    const auto c = read_coefficients(path);
    r.detail = "degree " + std::to_string(c.degree()) + ", c_0 = 1";
  } catch (const ValidationError& e) {
    r.passed = false;
    r.detail = std::string("monic assertion failed: ") + e.what();
  }
  return r;
}

CheckResult check_gram_diagonal() {
  CheckResult r{"gram", "closed-form diagonal", true, ""};
  double worst = 0.0;
  for (double beta : {0.01, 0.1, 0.5}) {
    const ComplexSector sector(beta);
    for (std::size_t j = 0; j <= 256; ++j) {
      const double jd = static_cast<double>(j);
      const double expected = beta * (1.0 / (jd + 1.0) + 1.0 / (jd + 3.0)) - std::sin(2.0 * beta) / (jd + 2.0);
      worst = std::max(worst, std::abs(gram_entry(j, j, sector) - expected));
    }
  }
  r.passed = worst <= 1e-12;
  r.detail = "j<=256, beta in {0.01,0.1,0.5}, max abs diff " + fmt(worst);
  return r;
}

static double gram_quadrature(std::size_t j, std::size_t k, double beta) {
  using boost::math::quadrature::gauss;
  const double m = static_cast<double>(j) - static_cast<double>(k);
  const double p = static_cast<double>(j + k) + 1.0;
  // Re[(1 - a^2)(1 - conj(a)^2) a^j conj(a)^k] over the sector, a = r e^{i theta}, dA = r dr dtheta.
  auto inner = [&](double theta) {
    auto radial = [&](double rr) {
      return (1.0 - 2.0 * rr * rr * std::cos(2.0 * theta) + std::pow(rr, 4)) * std::pow(rr, p);
    };
    return std::cos(m * theta) * gauss<double, 64>::integrate(radial, 0.0, 1.0);
  };
  return gauss<double, 64>::integrate(inner, -beta, beta);
}

CheckResult check_gram_quadrature() {
  CheckResult r{"gram", "closed form vs quadrature", true, ""};
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> idx(0, 32);
  double worst = 0.0;
  std::size_t points = 0;
  for (double beta : {0.01, 0.1, 0.5}) {
    const ComplexSector sector(beta);
    for (int s = 0; s < 20; ++s) {
      const std::size_t j = s == 0 ? 0 : idx(rng);
      const std::size_t k = s == 0 ? 2 : idx(rng);
      const double diff = std::abs(gram_entry(j, k, sector) - gram_quadrature(j, k, beta));
      worst = std::max(worst, diff);
      ++points;
    }
  }
  r.passed = worst <= 1e-8;
  r.detail = std::to_string(points) + " entries, max abs diff " + fmt(worst);
  return r;
}

CheckResult check_gram_degenerate(double beta) {
  CheckResult r{"gram", "nondegenerate sector beta=" + fmt(beta), true, ""};
  const Eigen::MatrixXd Z = build_Z(16, ComplexSector(beta));
  if (Z.cwiseAbs().maxCoeff() == 0.0) {
    r.passed = false;
    r.detail = "degenerate filter bank: beta = " + fmt(beta) +
               " gives a zero-measure sector and an all-zero Gram matrix Z";
  } else {
    r.detail = "max |Z_jk| " + fmt(Z.cwiseAbs().maxCoeff());
  }
  return r;
}

CheckResult check_eigendecay(const std::vector<std::size_t>& horizons, const std::vector<double>& betas) {
  CheckResult r{"decay", "trace and eigenvalue count", true, ""};
  std::ostringstream detail;
  for (std::size_t Tp : horizons) {
    for (double beta : betas) {
      const Eigen::MatrixXd Z = build_Z(Tp, ComplexSector(beta));
      const double log_t = std::log(static_cast<double>(Tp));
      const double trace = Z.trace();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Z, Eigen::EigenvaluesOnly);
      const std::size_t above = count_above(es.eigenvalues(), beta);
      const double min_eig = es.eigenvalues().minCoeff();
      const bool ok = trace <= 6.0 * beta * log_t && static_cast<double>(above) <= 6.0 * log_t &&
                      min_eig >= -1e-10;
      if (!ok) r.passed = false;
      detail << "T'=" << Tp << " beta=" << beta << ": tr " << fmt(trace) << "/" << fmt(6.0 * beta * log_t)
             << ", #>beta " << above << "/" << fmt(6.0 * log_t) << (ok ? "" : " FAIL") << "; ";
    }
  }
  r.detail = detail.str();
  return r;
}

CheckResult check_reconstruct_identity(std::uint64_t seed) {
  CheckResult r{"precond", "reconstruct(convolve(y)) = y", true, ""};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (const auto& c : {chebyshev_monic(5), chebyshev_monic(10), legendre_monic(7), differencing()}) {
    Eigen::MatrixXd y(300, 3);
    for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = normal(rng);
    const Eigen::MatrixXd conv = convolve(y, c);
    for (Eigen::Index t = 0; t < y.rows(); ++t) {
      const Eigen::Index lags = std::min<Eigen::Index>(t, static_cast<Eigen::Index>(c.degree()));
      const Eigen::MatrixXd hist = y.middleRows(t - lags, lags).colwise().reverse();
      const Eigen::VectorXd back = reconstruct_prediction(conv.row(t).transpose(), hist, c);
      worst = std::max(worst, (back - y.row(t).transpose()).cwiseAbs().maxCoeff());
    }
  }
  r.passed = worst <= 1e-12;
  r.detail = "max abs diff " + fmt(worst);
  return r;
}

CheckResult check_offline_online(std::uint64_t seed) {
  CheckResult r{"precond", "offline pipeline equals online wrapper", true, ""};
  SystemConfig cfg;
  cfg.d_hidden = 8;
  cfg.d_in = 2;
  cfg.d_out = 2;
  cfg.noise_sigma = 0.05;
  const auto sys = sample_system(cfg, derive_stream_seed(seed, SeedStream::System));
  const auto traj = simulate_lds(sys, gaussian_inputs(400, 2, derive_stream_seed(seed, SeedStream::Inputs)),
                                 derive_stream_seed(seed, SeedStream::Noise));
  const auto c = chebyshev_monic(5);
  RegressionConfig rc;
  rc.taps = 6;
  rc.radius = 5.0;
  RegressionModel inner(2, 2, rc);
  const auto offline = run_offline_pipeline(inner, traj, c);
  auto online_pred = make_regression_predictor(c, 2, 2, rc);
  const auto online = run_online(*online_pred, traj);
  const double diff = (offline.predictions - online.predictions).cwiseAbs().maxCoeff();
  r.passed = diff <= 1e-12;
  r.detail = "T=400, max abs prediction diff " + fmt(diff);
  return r;
}

CheckResult check_ogd_regret(std::size_t T, std::uint64_t seed) {
  CheckResult r{"ogd", "regret <= 1.5 G D sqrt(T)", true, ""};
  const double R = 1.0;
  const double G = 1.0;
  const double D = 2.0 * R;
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> normal;
  std::vector<double> u(T), target(T);
  for (std::size_t t = 0; t < T; ++t) {
    u[t] = coin(rng) ? 1.0 : -1.0;
    const double q_star = 0.6;
    target[t] = q_star * u[t] + 0.3 * normal(rng);
  }
  auto state = RegressionState::zeros(1, 1, 1, R, regression_eta_scale(R, 1, 1));
  LagBuffer window(1, 1);
  double learner = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    window.push(Eigen::VectorXd::Constant(1, u[t]));
    const double pred = state.Q[0](0, 0) * u[t];
    learner += std::abs(pred - target[t]);
    regression_update(state, Eigen::VectorXd::Constant(1, pred - target[t]), window);
  }
  // Best fixed q in [-R, R]: weighted median of target/u with weights |u|.
  std::vector<std::pair<double, double>> pts(T);
  for (std::size_t t = 0; t < T; ++t) pts[t] = {target[t] / u[t], std::abs(u[t])};
  std::sort(pts.begin(), pts.end());
  double total = 0.0;
  for (const auto& p : pts) total += p.second;
  double acc = 0.0, median = pts.back().first;
  for (const auto& p : pts) {
    acc += p.second;
    if (acc >= total / 2.0) {
      median = p.first;
      break;
    }
  }
  const double q = std::clamp(median, -R, R);
  double best = 0.0;
  for (std::size_t t = 0; t < T; ++t) best += std::abs(q * u[t] - target[t]);
  const double regret = learner - best;
  const double bound = 1.5 * G * D * std::sqrt(static_cast<double>(T));
  r.passed = regret <= bound;
  r.detail = "T=" + std::to_string(T) + ", regret " + fmt(regret) + " <= " + fmt(bound);
  return r;
}

CheckResult check_oracle_bound(std::size_t systems, std::uint64_t seed) {
  CheckResult r{"oracle", "oracle weights within approximation bound", true, ""};
  const std::size_t T = 500;
  double worst = 0.0;
  for (std::size_t s = 0; s < systems; ++s) {
    const std::uint64_t run = derive_run_seed(seed, s);
    SystemConfig cfg;
    cfg.d_hidden = static_cast<Eigen::Index>(2 + s % 7);
    cfg.tau = 0.0;
    cfg.radius_lo = 0.0;
    cfg.radius_hi = 0.99;
    cfg.nonnegative_real = true;
    const auto sys = sample_system(cfg, derive_stream_seed(run, SeedStream::System));
    const auto traj = simulate_lds(
        sys, gaussian_inputs(static_cast<Eigen::Index>(T), 1, derive_stream_seed(run, SeedStream::Inputs),
                             InputScaling::UnitNorm),
        0);
    for (int n : {2, 4, 6}) {
      const auto c = chebyshev_monic(n);
      RegressionConfig rc;
      rc.taps = c.degree();
      rc.radius = std::numeric_limits<double>::infinity();
      rc.eta_scale = 0.0;
      auto model = std::make_unique<RegressionModel>(1, 1, rc);
      model->state().Q = oracle_weights(sys, c);
      PreconditionedPredictor pred(std::move(model), c);
      const auto stream = run_online(pred, traj);
      const double bound = spectral_norm(sys.C) * spectral_norm(sys.B) * sys.kappa *
                           std::ldexp(1.0, -(n - 2)) * static_cast<double>(T);
      for (double e : stream.raw_loss) {
        worst = std::max(worst, e / bound);
        if (e > bound) r.passed = false;
      }
    }
  }
  r.detail = std::to_string(systems) + " systems, degrees {2,4,6}, max error/bound " + fmt(worst);
  return r;
}

VerifyReport verify(Suite suite, const VerifyOptions& options) {
  VerifyReport report;
  auto want = [&](Suite s) { return suite == Suite::All || suite == s; };
  if (want(Suite::Poly)) {
    report.checks.push_back(check_sector_bound());
    report.checks.push_back(check_coefficient_growth());
  }
  if (want(Suite::Gram)) {
    report.checks.push_back(check_gram_diagonal());
    report.checks.push_back(check_gram_quadrature());
  }
  if (want(Suite::Decay)) report.checks.push_back(check_eigendecay({64, 256, 1024}, {0.01, 0.1}));
  if (want(Suite::Precond)) {
    report.checks.push_back(check_reconstruct_identity(options.seed));
    report.checks.push_back(check_offline_online(options.seed));
  }
  if (want(Suite::Ogd)) report.checks.push_back(check_ogd_regret(10000, options.seed));
  if (want(Suite::Oracle)) report.checks.push_back(check_oracle_bound(10, options.seed));
  if (options.coeff_file) report.checks.push_back(check_monic_file(*options.coeff_file));
  if (options.beta) report.checks.push_back(check_gram_degenerate(*options.beta));
  return report;
}

}  // namespace usp
