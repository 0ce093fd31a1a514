// Acceptance criteria: one PASS/FAIL line each, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "usp/dynsys.hpp"
#include "usp/harness.hpp"
#include "usp/learners.hpp"
#include "usp/precond.hpp"
#include "usp/verify.hpp"

using namespace usp;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

Outcome from_check(const CheckResult& c) { return {c.passed, c.detail}; }

Outcome with_budget(Outcome o, double seconds, double budget) {
  if (seconds > budget) {
    o.passed = false;
    o.detail += " (over the " + std::to_string(static_cast<int>(budget)) + " s budget)";
  }
  return o;
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

ExperimentSpec table_spec(Variant variant, int degree) {
  ExperimentSpec s;
  s.algorithm = Algorithm::Regression;
  s.variant = variant;
  s.degree = degree;
  s.data.lds.d_hidden = 50;
  s.data.lds.tau = 0.01;
  s.runs = 20;
  s.horizon = 2000;
  s.window = 200;
  s.master_seed = 0;
  return s;
}

// Shared by criteria 7 and 8.
struct TableRuns {
  double baseline = 0.0;
  double cheb5 = 0.0;
  double cheb10 = 0.0;
  bool done = false;
};

TableRuns& table_runs() {
  static TableRuns runs;
  if (!runs.done) {
    runs.baseline = run_experiment(table_spec(Variant::None, 0)).mean;
    runs.cheb5 = run_experiment(table_spec(Variant::Chebyshev, 5)).mean;
    runs.cheb10 = run_experiment(table_spec(Variant::Chebyshev, 10)).mean;
    runs.done = true;
  }
  return runs;
}

Outcome term_deletion() {
  const auto c = chebyshev_monic(4);
  const std::size_t T = 80;
  SpectralLearnerState st;
  st.tilde = tilde_expand(c);
  st.bank = std::make_shared<const FilterBank>(make_filter_bank(spectral_filter_horizon(T, 4), ComplexSector(0.1), 6));
  st.horizon_T = static_cast<double>(T);
  st.offset = 5;
  st.M.assign(6, Eigen::MatrixXd::Zero(2, 3));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  auto random = [&](Eigen::Index r, Eigen::Index k) {
    Eigen::MatrixXd m(r, k);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
    return m;
  };
  for (int j = 0; j < 5; ++j) st.Q.push_back(random(2, 3));
  RegressionState reg = RegressionState::zeros(5, 2, 3, 1.0, 1.0);
  reg.Q = st.Q;
  InputHistory hist(3);
  LagBuffer uw(3, 5);
  LagBuffer yw(2, st.tilde.degree());
  double worst = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const Eigen::VectorXd u = random(3, 1);
    hist.push(u);
    uw.push(u);
    const auto a = spectral_predict(st, hist, yw);
    const auto b = regression_predict(reg, uw, yw, st.tilde);
    worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
    yw.push(random(2, 1));
  }
  return {worst <= 1e-12, "max diff " + fmt(worst)};
}

Outcome report_determinism() {
  std::vector<ExperimentSpec> specs;
  ExperimentSpec s;
  s.data.lds.d_hidden = 8;
  s.runs = 3;
  s.horizon = 300;
  s.window = 50;
  s.master_seed = 11;
  specs.push_back(s);
  s.algorithm = Algorithm::Spectral;
  s.k = 6;
  specs.push_back(s);
  s.algorithm = Algorithm::Oracle;
  specs.push_back(s);
  s.algorithm = Algorithm::Regression;
  s.variant = Variant::Learned;
  s.degree = 3;
  s.data.kind = DataKind::Nonlinear;
  specs.push_back(s);
  for (const auto& spec : specs) {
    auto threaded = spec;
    threaded.workers = 2;
    if (to_json(run_experiment(spec)).dump() != to_json(run_experiment(threaded)).dump()) {
      return {false, to_string(spec.algorithm) + " report differs between runs"};
    }
  }
  if (to_json(sweep(specs)).dump() != to_json(sweep(specs)).dump()) return {false, "sweep report differs"};
  return {true, "4 experiment reports and a sweep byte-identical"};
}

Outcome equivalence_suites() {
  const auto rec = check_reconstruct_identity(1);
  if (!rec.passed) return {false, "reconstruct: " + rec.detail};
  const auto off = check_offline_online(1);
  if (!off.passed) return {false, "offline/online: " + off.detail};
  const auto del = term_deletion();
  if (!del.passed) return {false, "term deletion: " + del.detail};
  const auto det = report_determinism();
  if (!det.passed) return det;
  return {true, "reconstruct " + rec.detail + "; offline/online " + off.detail + "; term deletion " + del.detail +
                    "; " + det.detail};
}

Outcome decaying_average_loss() {
  SystemConfig cfg;
  cfg.noise_sigma = 0.0;
  const auto sys = sample_system(cfg, 2024);
  const auto c = chebyshev_monic(5);
  RegressionConfig rc;
  rc.taps = 10;
  rc.radius = spectral_norm(sys.C) * spectral_norm(sys.B) * sys.kappa * c.l1_norm();
  auto average = [&](std::size_t T) {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto traj = simulate_lds(sys, gaussian_inputs(static_cast<Eigen::Index>(T), 1, 100 + seed), 0);
      auto pred = make_regression_predictor(c, 1, 1, rc);
      const auto stream = run_online(*pred, traj);
      double sum = 0.0;
      for (double l : stream.raw_loss) sum += l;
      total += sum / static_cast<double>(T);
    }
    return total / 10.0;
  };
  const double short_run = average(1000);
  const double long_run = average(4000);
  return {long_run < short_run, "average loss T=1000 " + fmt(short_run) + ", T=4000 " + fmt(long_run)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget;  // seconds, 0 for none
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"Chebyshev sector bound", 10, [] { return from_check(check_sector_bound(10, 256)); }},
      {"coefficient growth", 1, [] { return from_check(check_coefficient_growth(20)); }},
      {"Gram closed form",
       0,
       [] {
         const auto d = check_gram_diagonal();
         const auto q = check_gram_quadrature();
         return Outcome{d.passed && q.passed, d.detail + "; " + q.detail};
       }},
      {"eigendecay", 60, [] { return from_check(check_eigendecay({64, 256, 1024}, {0.01, 0.1})); }},
      {"approximation oracle", 30, [] { return from_check(check_oracle_bound(10, 1)); }},
      {"OGD regret", 0, [] { return from_check(check_ogd_regret(10000, 1)); }},
      {"preconditioning beats baseline",
       600,
       [] {
         const auto& r = table_runs();
         return Outcome{r.cheb5 < 0.8 * r.baseline,
                        "chebyshev-5 " + fmt(r.cheb5) + " vs 0.8 x baseline " + fmt(0.8 * r.baseline)};
       }},
      {"degree degradation",
       0,
       [] {
         const auto& r = table_runs();
         return Outcome{r.cheb10 > r.cheb5, "chebyshev-10 " + fmt(r.cheb10) + " vs chebyshev-5 " + fmt(r.cheb5)};
       }},
      {"equivalence and identity suites", 0, equivalence_suites},
      {"decaying average loss", 0, decaying_average_loss},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget > 0) o = with_budget(o, secs, c.budget);
    if (!o.passed) ++failures;
    std::printf("%s %zu %s: %s [%.2f s]\n", o.passed ? "PASS" : "FAIL", i + 1, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
