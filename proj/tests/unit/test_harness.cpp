#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "usp/csv_io.hpp"
#include "usp/error.hpp"
#include "usp/harness.hpp"

using namespace usp;

namespace {

ExperimentSpec small_spec() {
  ExperimentSpec s;
  s.data.lds.d_hidden = 6;
  s.runs = 3;
  s.horizon = 150;
  s.window = 40;
  s.lr_grid = {0.01, 0.1};
  s.master_seed = 5;
  return s;
}

}  // namespace

TEST(Harness, NamesRoundTrip) {
  for (auto a : {Algorithm::Regression, Algorithm::Spectral, Algorithm::Oracle})
    EXPECT_EQ(parse_algorithm(to_string(a)), a);
  for (auto v : {Variant::None, Variant::Chebyshev, Variant::Legendre, Variant::Differencing, Variant::Learned,
                 Variant::Custom})
    EXPECT_EQ(parse_variant(to_string(v)), v);
  EXPECT_EQ(parse_variant("baseline"), Variant::None);
  EXPECT_THROW(parse_algorithm("kalman"), ValidationError);
  EXPECT_THROW(parse_data_kind("audio"), ValidationError);
}

TEST(Harness, ValidationErrors) {
  auto s = small_spec();
  s.window = s.horizon + 1;
  EXPECT_THROW(s.validate(), ValidationError);
  s = small_spec();
  s.lr_grid.clear();
  EXPECT_THROW(s.validate(), ValidationError);
  s = small_spec();
  s.lr_grid = {0.1, -1.0};
  EXPECT_THROW(s.validate(), ValidationError);
  s = small_spec();
  s.runs = 0;
  EXPECT_THROW(s.validate(), ValidationError);
  s = small_spec();
  s.variant = Variant::Learned;
  s.algorithm = Algorithm::Spectral;
  EXPECT_THROW(s.validate(), ValidationError);
  s = small_spec();
  s.data.kind = DataKind::Nonlinear;
  s.algorithm = Algorithm::Oracle;
  EXPECT_THROW(s.validate(), ValidationError);
  s = small_spec();
  s.degree = 61;
  EXPECT_THROW(s.validate(), ValidationError);
  s = small_spec();
  s.algorithm = Algorithm::Spectral;
  s.beta = 1.5;
  EXPECT_THROW(s.validate(), ValidationError);
  EXPECT_NO_THROW(small_spec().validate());
}

TEST(Harness, SpecJsonRoundTrip) {
  auto s = small_spec();
  s.algorithm = Algorithm::Spectral;
  s.k = 7;
  s.taps = 4;
  const auto j = to_json(s);
  const auto back = spec_from_json(j);
  EXPECT_EQ(to_json(back), j);
  EXPECT_EQ(config_hash(back), config_hash(s));
  EXPECT_EQ(config_hash(s).size(), 16u);

  auto other = s;
  other.master_seed = 6;
  EXPECT_NE(config_hash(other), config_hash(s));
  other = s;
  other.workers = 4;
  EXPECT_EQ(config_hash(other), config_hash(s));

  auto bad = j;
  bad["horizon_typo"] = 3;
  EXPECT_THROW(spec_from_json(bad), ValidationError);
  EXPECT_THROW(spec_from_json(nlohmann::json{{"T", "long"}}), ValidationError);
}

TEST(Harness, DeterministicReports) {
  const auto s = small_spec();
  const auto a = to_json(run_experiment(s)).dump();
  const auto b = to_json(run_experiment(s)).dump();
  EXPECT_EQ(a, b);
  auto threaded = s;
  threaded.workers = 3;
  EXPECT_EQ(to_json(run_experiment(threaded)).dump(), a);
}

TEST(Harness, MeanMatchesPerRunValues) {
  const auto r = run_experiment(small_spec());
  ASSERT_EQ(r.per_run_final.size(), 3u);
  const double mean = std::accumulate(r.per_run_final.begin(), r.per_run_final.end(), 0.0) / 3.0;
  EXPECT_NEAR(r.mean, mean, 1e-12);
  double ss = 0.0;
  for (double v : r.per_run_final) ss += (v - mean) * (v - mean);
  EXPECT_NEAR(r.std, std::sqrt(ss / 2.0), 1e-12);
  EXPECT_EQ(r.seeds.size(), 3u);
  EXPECT_EQ(r.grid.size(), 2u);
  for (const auto& g : r.grid) EXPECT_LE(r.grid[r.chosen].mean_final, g.mean_final);
}

TEST(Harness, GridOrderDoesNotMatter) {
  auto s = small_spec();
  s.lr_grid = {0.1, 0.001, 0.01};
  auto t = s;
  t.lr_grid = {0.01, 0.1, 0.001};
  const auto a = run_experiment(s);
  const auto b = run_experiment(t);
  EXPECT_EQ(a.grid[a.chosen].lr, b.grid[b.chosen].lr);
  EXPECT_EQ(a.per_run_final, b.per_run_final);
}

TEST(Harness, TiesGoToSmallestRate) {
  std::vector<GridPoint> grid(3);
  grid[0].lr = 0.5;
  grid[0].mean_final = 1.0;
  grid[1].lr = 0.05;
  grid[1].mean_final = 1.0;
  grid[2].lr = 0.01;
  grid[2].mean_final = 2.0;
  EXPECT_EQ(select_grid_point(grid), 1u);
  EXPECT_THROW(select_grid_point({}), ValidationError);
}

TEST(Harness, LearnedGridCoversBothRates) {
  auto s = small_spec();
  s.variant = Variant::Learned;
  s.degree = 2;
  s.runs = 1;
  s.lr_grid = {1e-3, 1e-2, 1e-1};
  const auto r = run_experiment(s);
  EXPECT_EQ(r.grid.size(), 9u);
  for (const auto& g : r.grid) EXPECT_TRUE(g.coeff_lr.has_value());
}

TEST(Harness, SpectralAndBaselineRun) {
  auto s = small_spec();
  s.algorithm = Algorithm::Spectral;
  s.k = 4;
  s.degree = 2;
  const auto r = run_experiment(s);
  EXPECT_TRUE(std::isfinite(r.mean));
  s.variant = Variant::None;
  EXPECT_TRUE(std::isfinite(run_experiment(s).mean));
}

TEST(Harness, OracleWithinBound) {
  ExperimentSpec s;
  s.algorithm = Algorithm::Oracle;
  s.runs = 1;
  s.horizon = 300;
  s.window = 50;
  s.degree = 4;
  s.data.lds.d_hidden = 5;
  s.data.lds.tau = 0.0;
  s.data.lds.radius_lo = 0.0;
  s.data.lds.radius_hi = 0.99;
  s.data.lds.nonnegative_real = true;
  s.data.lds.noise_sigma = 0.0;
  s.data.input_scaling = InputScaling::UnitNorm;
  const auto r = run_experiment(s);
  ASSERT_EQ(r.grid.size(), 1u);
  LinearSystem sys;
  generate_run_data(s, 0, &sys);
  const double bound = spectral_norm(sys.C) * spectral_norm(sys.B) * sys.kappa * std::ldexp(1.0, -(4 - 2)) *
                       static_cast<double>(s.horizon);
  EXPECT_LE(r.mean, bound);
}

TEST(Harness, CsvDataSource) {
  const auto dir = test::scratch_dir("harness_csv");
  auto gen = small_spec();
  const auto traj = generate_run_data(gen, 0);
  write_trajectory_csv(dir / "run.csv", traj);
  auto s = small_spec();
  s.data.kind = DataKind::Csv;
  s.data.csv_path = (dir / "run.csv").string();
  s.runs = 1;
  const auto r = run_experiment(s);
  EXPECT_EQ(r.per_run_final.size(), 1u);
  s.runs = 2;
  EXPECT_THROW(s.validate(), ValidationError);
}

TEST(Sweep, RowsAndOrder) {
  nlohmann::json cfg{{"base", to_json(small_spec())},
                     {"variants", {"legendre", "chebyshev", "none"}},
                     {"degrees", {3, 2}}};
  const auto specs = sweep_specs_from_json(cfg);
  EXPECT_EQ(specs.size(), 5u);  // the baseline has no degree axis
  cfg["variants"] = {"legendre", "chebyshev", "differencing"};
  cfg["base"]["runs"] = 1;
  const auto specs6 = sweep_specs_from_json(cfg);
  const auto rows = sweep(specs6);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0].variant, Variant::Chebyshev);
  EXPECT_EQ(rows[0].degree, 2);
  EXPECT_EQ(rows[1].degree, 3);
  EXPECT_EQ(rows[2].variant, Variant::Legendre);
  EXPECT_EQ(rows[4].variant, Variant::Differencing);
  for (const auto& r : rows) EXPECT_TRUE(r.report.has_value()) << r.error;

  const auto table = sweep_table_csv(rows);
  EXPECT_NE(table.find("chebyshev deg 2"), std::string::npos) << table;
  EXPECT_NE(table.find("regression tau="), std::string::npos) << table;
}

TEST(Sweep, ThreeVariantsTwoDegrees) {
  auto base = small_spec();
  base.runs = 1;
  std::vector<ExperimentSpec> specs;
  for (auto v : {Variant::Legendre, Variant::Chebyshev, Variant::Custom})
    for (int d : {3, 2}) {
      auto s = base;
      s.variant = v;
      s.degree = d;
      if (v == Variant::Custom) {
        s.custom_coeffs.assign(static_cast<std::size_t>(d) + 1, 0.0);
        s.custom_coeffs[0] = 1.0;
        s.custom_coeffs[1] = -0.5;
      }
      specs.push_back(s);
    }
  const auto rows = sweep(specs);
  ASSERT_EQ(rows.size(), 6u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_LE(std::make_pair(static_cast<int>(rows[i - 1].variant), rows[i - 1].degree),
              std::make_pair(static_cast<int>(rows[i].variant), rows[i].degree));
  }
  // A sweep row equals the stand-alone experiment.
  auto lone = base;
  lone.variant = Variant::Chebyshev;
  lone.degree = 2;
  EXPECT_EQ(to_json(*rows[0].report).dump(), to_json(run_experiment(lone)).dump());
}

TEST(Sweep, FailingSpecDoesNotAbortOthers) {
  auto good = small_spec();
  good.runs = 1;
  auto bad = good;
  bad.data.kind = DataKind::Csv;
  bad.data.csv_path = "/nonexistent/usp.csv";
  const auto rows = sweep({good, bad});
  ASSERT_EQ(rows.size(), 2u);
  std::size_t ok = 0, failed = 0;
  for (const auto& r : rows) {
    if (r.report) ++ok;
    if (!r.error.empty()) ++failed;
  }
  EXPECT_EQ(ok, 1u);
  EXPECT_EQ(failed, 1u);
}

TEST(Sweep, InvalidSpecRejectedUpFront) {
  auto good = small_spec();
  auto bad = good;
  bad.lr_grid.clear();
  try {
    sweep({good, bad});
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("spec 1"), std::string::npos) << e.what();
  }
  EXPECT_THROW(sweep({}), ValidationError);
}
