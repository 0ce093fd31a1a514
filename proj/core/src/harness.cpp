#include "usp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "usp/csv_io.hpp"
#include "usp/error.hpp"
#include "usp/seed.hpp"

namespace usp {

using nlohmann::json;

std::string to_string(DataKind kind) {
  switch (kind) {
    case DataKind::Lds: return "lds";
    case DataKind::Nonlinear: return "nonlinear";
    case DataKind::Csv: return "csv";
  }
  return "lds";
}

std::string to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::Regression: return "regression";
    case Algorithm::Spectral: return "spectral";
    case Algorithm::Oracle: return "oracle";
  }
  return "regression";
}

std::string to_string(Variant variant) {
  switch (variant) {
    case Variant::None: return "none";
    case Variant::Chebyshev: return "chebyshev";
    case Variant::Legendre: return "legendre";
    case Variant::Differencing: return "differencing";
    case Variant::Learned: return "learned";
    case Variant::Custom: return "custom";
  }
  return "none";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "regression") return Algorithm::Regression;
  if (name == "spectral") return Algorithm::Spectral;
  if (name == "oracle") return Algorithm::Oracle;
  throw ValidationError("unknown algorithm '" + name + "' (expected regression, spectral or oracle)");
}

Variant parse_variant(const std::string& name) {
  if (name == "none" || name == "baseline") return Variant::None;
  if (name == "chebyshev") return Variant::Chebyshev;
  if (name == "legendre") return Variant::Legendre;
  if (name == "differencing") return Variant::Differencing;
  if (name == "learned") return Variant::Learned;
  if (name == "custom") return Variant::Custom;
  throw ValidationError("unknown preconditioning variant '" + name + "'");
}

DataKind parse_data_kind(const std::string& name) {
  if (name == "lds") return DataKind::Lds;
  if (name == "nonlinear") return DataKind::Nonlinear;
  if (name == "csv") return DataKind::Csv;
  throw ValidationError("unknown data kind '" + name + "' (expected lds, nonlinear or csv)");
}

void ExperimentSpec::validate() const {
  if (runs < 1) throw ValidationError("runs (N) must be at least 1");
  if (horizon < 1) throw ValidationError("horizon (T) must be at least 1");
  if (window < 1 || window > horizon) throw ValidationError("metric window W must satisfy 1 <= W <= T");
  if (lr_grid.empty()) throw ValidationError("learning-rate grid is empty");
  for (double lr : lr_grid) {
    if (!(lr > 0.0) || !std::isfinite(lr)) throw ValidationError("learning rates must be positive and finite");
  }
  if (variant == Variant::Learned) {
    if (coeff_lr_grid.empty()) throw ValidationError("coefficient learning-rate grid is empty");
    for (double lr : coeff_lr_grid) {
      if (!(lr > 0.0) || !std::isfinite(lr)) throw ValidationError("coefficient learning rates must be positive");
    }
    if (algorithm != Algorithm::Regression) {
      throw ValidationError("the learned variant is available for the regression algorithm only");
    }
  }
  if (degree < 0 || degree > kMaxExactDegree) throw ValidationError("degree out of range");
  if (variant == Variant::Custom && custom_coeffs.empty()) {
    throw ValidationError("custom variant needs custom_coeffs");
  }
  if (algorithm == Algorithm::Oracle && data.kind != DataKind::Lds) {
    throw ValidationError("the oracle comparator needs generated LDS data");
  }
  if (data.kind == DataKind::Csv) {
    if (data.csv_path.empty()) throw ValidationError("csv data source needs a path");
    if (runs != 1) throw ValidationError("csv data supports exactly one run");
  }
  if (algorithm == Algorithm::Spectral) {
    if (k < 1) throw ValidationError("spectral filtering needs k >= 1");
    if (!(beta >= 0.0 && beta <= 1.0)) throw ValidationError("beta must lie in [0, 1]");
  }
  if (norm_bound && !(*norm_bound > 0.0)) throw ValidationError("norm_bound must be positive");
  if (workers < 1) throw ValidationError("workers must be at least 1");
}

namespace {

std::string projection_name(ProjectionNorm p) {
  return p == ProjectionNorm::Spectral ? "spectral" : "frobenius";
}

std::string scaling_name(InputScaling s) { return s == InputScaling::Raw ? "raw" : "unit"; }

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be a JSON object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) throw ValidationError("unknown key '" + item.key() + "' in " + where);
  }
}

}  // namespace

json to_json(const ExperimentSpec& s) {
  json data{{"kind", to_string(s.data.kind)}, {"input_scaling", scaling_name(s.data.input_scaling)}};
  if (s.data.kind == DataKind::Lds) {
    const auto& c = s.data.lds;
    data.update({{"d_hidden", c.d_hidden}, {"d_in", c.d_in}, {"d_out", c.d_out}, {"tau", c.tau},
                 {"L", c.radius_lo}, {"U", c.radius_hi}, {"sigma", c.noise_sigma},
                 {"max_condition", c.max_condition}, {"nonnegative_real", c.nonnegative_real}});
  } else if (s.data.kind == DataKind::Nonlinear) {
    const auto& c = s.data.nonlinear;
    data.update({{"d_hidden", c.d_hidden}, {"d_in", c.d_in}, {"d_out", c.d_out}, {"tau", c.tau},
                 {"L", c.radius_lo}, {"U", c.radius_hi}, {"sigma", c.noise_sigma},
                 {"activation", c.activation == Activation::Tanh ? "tanh" : "identity"}});
  } else {
    data.update({{"csv", s.data.csv_path}, {"standardize", s.data.standardize}});
  }
  json j{{"data", data},
         {"algorithm", to_string(s.algorithm)},
         {"variant", to_string(s.variant)},
         {"degree", s.degree},
         {"lr_grid", s.lr_grid},
         {"runs", s.runs},
         {"T", s.horizon},
         {"W", s.window},
         {"seed", s.master_seed},
         {"projection", projection_name(s.projection)}};
  if (s.variant == Variant::Custom) j["custom_coeffs"] = s.custom_coeffs;
  if (s.variant == Variant::Learned) j["coeff_lr_grid"] = s.coeff_lr_grid;
  if (s.taps) j["taps"] = *s.taps;
  if (s.norm_bound) j["norm_bound"] = *s.norm_bound;
  if (s.algorithm == Algorithm::Spectral) {
    j["k"] = s.k;
    j["beta"] = s.beta;
    if (s.radius_q) j["radius_q"] = *s.radius_q;
    if (s.radius_m) j["radius_m"] = *s.radius_m;
  }
  return j;
}

ExperimentSpec spec_from_json(const json& j) {
  ExperimentSpec s;
  try {
    check_keys(j, {"data", "algorithm", "variant", "degree", "custom_coeffs", "lr_grid", "coeff_lr_grid",
                   "runs", "T", "W", "seed", "taps", "norm_bound", "k", "beta", "radius_q", "radius_m",
                   "projection", "workers"},
               "experiment spec");
    if (j.contains("data")) {
      const auto& d = j.at("data");
      check_keys(d, {"kind", "d_hidden", "d_in", "d_out", "tau", "L", "U", "sigma", "max_condition",
                     "nonnegative_real", "activation", "csv", "standardize", "input_scaling"},
                 "data");
      if (d.contains("kind")) s.data.kind = parse_data_kind(d.at("kind").get<std::string>());
      auto& l = s.data.lds;
      auto& n = s.data.nonlinear;
      if (s.data.kind == DataKind::Nonlinear) {
        read_opt(d, "d_hidden", n.d_hidden);
        read_opt(d, "d_in", n.d_in);
        read_opt(d, "d_out", n.d_out);
        read_opt(d, "tau", n.tau);
        read_opt(d, "L", n.radius_lo);
        read_opt(d, "U", n.radius_hi);
        read_opt(d, "sigma", n.noise_sigma);
        if (d.contains("activation")) {
          const auto a = d.at("activation").get<std::string>();
          if (a == "tanh") n.activation = Activation::Tanh;
          else if (a == "identity") n.activation = Activation::Identity;
          else throw ValidationError("unknown activation '" + a + "'");
        }
      } else {
        read_opt(d, "d_hidden", l.d_hidden);
        read_opt(d, "d_in", l.d_in);
        read_opt(d, "d_out", l.d_out);
        read_opt(d, "tau", l.tau);
        read_opt(d, "L", l.radius_lo);
        read_opt(d, "U", l.radius_hi);
        read_opt(d, "sigma", l.noise_sigma);
        read_opt(d, "max_condition", l.max_condition);
        read_opt(d, "nonnegative_real", l.nonnegative_real);
      }
      read_opt(d, "csv", s.data.csv_path);
      read_opt(d, "standardize", s.data.standardize);
      if (d.contains("input_scaling")) {
        const auto v = d.at("input_scaling").get<std::string>();
        if (v == "raw") s.data.input_scaling = InputScaling::Raw;
        else if (v == "unit") s.data.input_scaling = InputScaling::UnitNorm;
        else throw ValidationError("input_scaling must be 'raw' or 'unit'");
      }
    }
    if (j.contains("algorithm")) s.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    if (j.contains("variant")) s.variant = parse_variant(j.at("variant").get<std::string>());
    read_opt(j, "degree", s.degree);
    read_opt(j, "custom_coeffs", s.custom_coeffs);
    read_opt(j, "lr_grid", s.lr_grid);
    read_opt(j, "coeff_lr_grid", s.coeff_lr_grid);
    read_opt(j, "runs", s.runs);
    read_opt(j, "T", s.horizon);
    read_opt(j, "W", s.window);
    read_opt(j, "seed", s.master_seed);
    if (j.contains("taps")) s.taps = j.at("taps").get<std::size_t>();
    if (j.contains("norm_bound")) s.norm_bound = j.at("norm_bound").get<double>();
    read_opt(j, "k", s.k);
    read_opt(j, "beta", s.beta);
    if (j.contains("radius_q")) s.radius_q = j.at("radius_q").get<double>();
    if (j.contains("radius_m")) s.radius_m = j.at("radius_m").get<double>();
    if (j.contains("projection")) {
      const auto p = j.at("projection").get<std::string>();
      if (p == "spectral") s.projection = ProjectionNorm::Spectral;
      else if (p == "frobenius") s.projection = ProjectionNorm::Frobenius;
      else throw ValidationError("projection must be 'spectral' or 'frobenius'");
    }
    read_opt(j, "workers", s.workers);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid experiment config: ") + e.what());
  }
  return s;
}

std::string config_hash(const ExperimentSpec& spec) {
  const std::string text = to_json(spec).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

CoefficientVector spec_coefficients(const ExperimentSpec& spec, std::size_t d_out) {
  const int n = spec.degree == 0 && spec.variant == Variant::Chebyshev
                    ? chebyshev_degree_for_horizon(spec.horizon, d_out)
                    : spec.degree;
  switch (spec.variant) {
    case Variant::None: return CoefficientVector({1.0}, PolyFamily::Custom);
    case Variant::Chebyshev: return chebyshev_monic(n);
    case Variant::Legendre: return legendre_monic(n);
    case Variant::Differencing: return differencing();
    case Variant::Learned: return CoefficientVector(chebyshev_monic(n).values(), PolyFamily::Learned);
    case Variant::Custom: return CoefficientVector(spec.custom_coeffs, PolyFamily::Custom);
  }
  return CoefficientVector({1.0});
}

std::pair<double, double> mean_std(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

std::size_t select_grid_point(const std::vector<GridPoint>& grid) {
  if (grid.empty()) throw ValidationError("empty grid");
  std::size_t best = 0;
  auto key = [&](std::size_t i) {
    return std::make_tuple(grid[i].mean_final, grid[i].lr, grid[i].coeff_lr.value_or(0.0));
  };
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (key(i) < key(best)) best = i;
  }
  return best;
}

Trajectory generate_run_data(const ExperimentSpec& spec, std::size_t index, LinearSystem* system_out) {
  const std::uint64_t run_seed = derive_run_seed(spec.master_seed, index);
  const auto sys_seed = derive_stream_seed(run_seed, SeedStream::System);
  const auto in_seed = derive_stream_seed(run_seed, SeedStream::Inputs);
  const auto noise_seed = derive_stream_seed(run_seed, SeedStream::Noise);
  const auto T = static_cast<Eigen::Index>(spec.horizon);
  Trajectory traj;
  switch (spec.data.kind) {
    case DataKind::Lds: {
      auto sys = sample_system(spec.data.lds, sys_seed);
      traj = simulate_lds(sys, gaussian_inputs(T, spec.data.lds.d_in, in_seed, spec.data.input_scaling),
                          noise_seed);
      if (system_out) *system_out = std::move(sys);
      break;
    }
    case DataKind::Nonlinear: {
      const auto sys = sample_nonlinear(spec.data.nonlinear, sys_seed);
      traj = simulate_nonlinear(
          sys, gaussian_inputs(T, spec.data.nonlinear.d_in, in_seed, spec.data.input_scaling), noise_seed);
      break;
    }
    case DataKind::Csv: {
      CsvReadOptions opts;
      opts.standardize = spec.data.standardize;
      traj = read_trajectory_csv(spec.data.csv_path, opts);
      break;
    }
  }
  traj.seed = run_seed;
  return traj;
}

namespace {

struct RunData {
  Trajectory traj;
  std::optional<LinearSystem> system;
};

double default_norm_bound(const ExperimentSpec& spec, const RunData& data) {
  if (spec.norm_bound) return *spec.norm_bound;
  if (data.system) {
    const auto& s = *data.system;
    return spectral_norm(s.C) * spectral_norm(s.B) * s.kappa;
  }
  return 1.0;
}

std::size_t regression_taps(const ExperimentSpec& spec, const CoefficientVector& c) {
  return spec.taps.value_or(std::max<std::size_t>(c.degree(), kDefaultMinTaps));
}

std::unique_ptr<OnlinePredictor> make_predictor(const ExperimentSpec& spec, const RunData& data,
                                                const CoefficientVector& c, double lr,
                                                std::optional<double> coeff_lr,
                                                const std::shared_ptr<const FilterBank>& bank) {
  const auto& traj = data.traj;
  const double c_dom = default_norm_bound(spec, data);
  switch (spec.algorithm) {
    case Algorithm::Regression: {
      RegressionConfig cfg;
      cfg.taps = regression_taps(spec, c);
      cfg.radius = c_dom * c.l1_norm();
      cfg.eta_scale = lr;
      cfg.norm = spec.projection;
      if (spec.variant == Variant::Learned) {
        return std::make_unique<LearnedCoefficientPredictor>(c, traj.d_in(), traj.d_out(), cfg,
                                                             coeff_lr.value_or(lr));
      }
      return make_regression_predictor(c, traj.d_in(), traj.d_out(), cfg);
    }
    case Algorithm::Spectral: {
      SpectralConfig cfg;
      cfg.horizon = static_cast<std::size_t>(traj.length());
      cfg.k = spec.k;
      cfg.beta = spec.beta;
      cfg.precondition = spec.variant != Variant::None;
      const auto radii = spectral_default_radii(c, c_dom, 1.0, cfg.horizon, spec.beta);
      cfg.radius_q = spec.radius_q.value_or(radii.first);
      cfg.radius_m = spec.radius_m.value_or(std::max(radii.second, c_dom));
      cfg.eta_scale = lr;
      cfg.norm = spec.projection;
      return make_spectral_predictor(c, traj.d_in(), traj.d_out(), cfg, bank);
    }
    case Algorithm::Oracle: {
      if (!data.system) throw ValidationError("oracle comparator needs the generating system");
      RegressionConfig cfg;
      cfg.taps = c.degree();
      cfg.radius = std::numeric_limits<double>::infinity();
      cfg.eta_scale = 0.0;
      auto model = std::make_unique<RegressionModel>(traj.d_in(), traj.d_out(), cfg);
      model->state().Q = oracle_weights(*data.system, c);
      return std::make_unique<PreconditionedPredictor>(std::move(model), c);
    }
  }
  throw ValidationError("unsupported algorithm");
}

template <class F>
void parallel_for(std::size_t count, std::size_t workers, F&& body) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::string setting_label(const ExperimentSpec& spec) {
  std::ostringstream os;
  os << to_string(spec.algorithm) << '/' << to_string(spec.variant);
  if (spec.variant != Variant::None && spec.variant != Variant::Differencing) os << '-' << spec.degree;
  os << '/' << to_string(spec.data.kind);
  if (spec.data.kind == DataKind::Lds) os << " tau=" << spec.data.lds.tau;
  if (spec.data.kind == DataKind::Nonlinear) os << " tau=" << spec.data.nonlinear.tau;
  return os.str();
}

}  // namespace

MetricsReport run_experiment(const ExperimentSpec& spec) {
  spec.validate();

  std::vector<RunData> data(spec.runs);
  parallel_for(spec.runs, spec.workers, [&](std::size_t r) {
    LinearSystem sys;
    data[r].traj = generate_run_data(spec, r, spec.data.kind == DataKind::Lds ? &sys : nullptr);
    if (spec.data.kind == DataKind::Lds) data[r].system = std::move(sys);
  });
  for (const auto& d : data) {
    if (static_cast<std::size_t>(d.traj.length()) < spec.window) {
      throw ValidationError("trajectory is shorter than the metric window W");
    }
  }

  const auto d_out = static_cast<std::size_t>(data.front().traj.d_out());
  const CoefficientVector c = spec_coefficients(spec, d_out);

  std::shared_ptr<const FilterBank> bank;
  if (spec.algorithm == Algorithm::Spectral) {
    const auto T = static_cast<std::size_t>(data.front().traj.length());
    for (const auto& d : data) {
      if (static_cast<std::size_t>(d.traj.length()) != T) throw ValidationError("runs differ in length");
    }
    const std::size_t degree = spec.variant == Variant::None ? 0 : c.degree();
    const std::size_t horizon = spectral_filter_horizon(T, degree);
    if (spec.k > horizon) throw ValidationError("k exceeds the filter horizon");
    bank = std::make_shared<const FilterBank>(make_filter_bank(horizon, ComplexSector(spec.beta), spec.k));
  }

  std::vector<GridPoint> grid;
  if (spec.algorithm == Algorithm::Oracle) {
    grid.push_back(GridPoint{0.0, std::nullopt, {}, 0.0, 0.0, 0.0});
  } else {
    std::vector<double> lrs = spec.lr_grid;
    std::sort(lrs.begin(), lrs.end());
    lrs.erase(std::unique(lrs.begin(), lrs.end()), lrs.end());
    std::vector<double> clrs = spec.coeff_lr_grid;
    std::sort(clrs.begin(), clrs.end());
    clrs.erase(std::unique(clrs.begin(), clrs.end()), clrs.end());
    for (double lr : lrs) {
      if (spec.variant == Variant::Learned) {
        for (double clr : clrs) grid.push_back(GridPoint{lr, clr, {}, 0.0, 0.0, 0.0});
      } else {
        grid.push_back(GridPoint{lr, std::nullopt, {}, 0.0, 0.0, 0.0});
      }
    }
  }
  for (auto& g : grid) g.runs.resize(spec.runs);

  const std::size_t tasks = grid.size() * spec.runs;
  parallel_for(tasks, spec.workers, [&](std::size_t task) {
    auto& g = grid[task / spec.runs];
    const std::size_t r = task % spec.runs;
    const auto& d = data[r];
    auto predictor = make_predictor(spec, d, c, g.lr, g.coeff_lr, bank);
    const auto stream = run_online(*predictor, d.traj);
    const std::size_t T = stream.raw_loss.size();
    RunResult res;
    res.seed = d.traj.seed;
    res.final_window_error =
        std::accumulate(stream.raw_loss.end() - static_cast<std::ptrdiff_t>(spec.window), stream.raw_loss.end(), 0.0) /
        static_cast<double>(spec.window);
    res.average_loss = std::accumulate(stream.raw_loss.begin(), stream.raw_loss.end(), 0.0) / static_cast<double>(T);
    res.average_preconditioned_loss =
        std::accumulate(stream.preconditioned_loss.begin(), stream.preconditioned_loss.end(), 0.0) /
        static_cast<double>(T);
    g.runs[r] = res;
  });

  for (auto& g : grid) {
    std::vector<double> finals, avgs;
    for (const auto& r : g.runs) {
      finals.push_back(r.final_window_error);
      avgs.push_back(r.average_loss);
    }
    std::tie(g.mean_final, g.std_final) = mean_std(finals);
    g.mean_average_loss = mean_std(avgs).first;
  }

  MetricsReport report;
  report.spec = to_json(spec);
  report.config_hash = config_hash(spec);
  report.setting = setting_label(spec);
  for (const auto& d : data) report.seeds.push_back(d.traj.seed);
  report.chosen = select_grid_point(grid);
  report.grid = std::move(grid);
  for (const auto& r : report.grid[report.chosen].runs) report.per_run_final.push_back(r.final_window_error);
  std::tie(report.mean, report.std) = mean_std(report.per_run_final);
  return report;
}

json to_json(const MetricsReport& report) {
  json grid = json::array();
  for (const auto& g : report.grid) {
    json runs = json::array();
    for (const auto& r : g.runs) {
      runs.push_back({{"seed", r.seed},
                      {"final_window_error", r.final_window_error},
                      {"average_loss", r.average_loss},
                      {"average_preconditioned_loss", r.average_preconditioned_loss}});
    }
    json point{{"lr", g.lr}, {"mean_final", g.mean_final}, {"std_final", g.std_final},
               {"mean_average_loss", g.mean_average_loss}, {"runs", runs}};
    if (g.coeff_lr) point["coeff_lr"] = *g.coeff_lr;
    grid.push_back(point);
  }
  const auto& chosen = report.grid.at(report.chosen);
  json chosen_j{{"index", report.chosen}, {"lr", chosen.lr}};
  if (chosen.coeff_lr) chosen_j["coeff_lr"] = *chosen.coeff_lr;
  return json{{"spec", report.spec},
              {"config_hash", report.config_hash},
              {"setting", report.setting},
              {"seeds", report.seeds},
              {"grid", grid},
              {"chosen", chosen_j},
              {"per_run_final", report.per_run_final},
              {"mean", report.mean},
              {"std", report.std}};
}

namespace {

double spec_tau(const ExperimentSpec& s) {
  switch (s.data.kind) {
    case DataKind::Lds: return s.data.lds.tau;
    case DataKind::Nonlinear: return s.data.nonlinear.tau;
    case DataKind::Csv: return 0.0;
  }
  return 0.0;
}

}  // namespace

std::vector<SweepRow> sweep(const std::vector<ExperimentSpec>& specs) {
  if (specs.empty()) throw ValidationError("sweep needs at least one spec");
  for (std::size_t i = 0; i < specs.size(); ++i) {
    try {
      specs[i].validate();
    } catch (const ValidationError& e) {
      throw ValidationError("spec " + std::to_string(i) + ": " + e.what());
    }
  }
  std::vector<SweepRow> rows(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& s = specs[i];
    auto& row = rows[i];
    row.algorithm = s.algorithm;
    row.variant = s.variant;
    row.degree = s.variant == Variant::None || s.variant == Variant::Differencing ? 0 : s.degree;
    row.tau = spec_tau(s);
    try {
      row.report = run_experiment(s);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::make_tuple(static_cast<int>(a.algorithm), static_cast<int>(a.variant), a.degree, a.tau) <
           std::make_tuple(static_cast<int>(b.algorithm), static_cast<int>(b.variant), b.degree, b.tau);
  });
  return rows;
}

std::vector<ExperimentSpec> sweep_specs_from_json(const json& j) {
  std::vector<ExperimentSpec> specs;
  try {
    check_keys(j, {"specs", "base", "algorithms", "variants", "degrees", "taus"}, "sweep config");
    if (j.contains("specs")) {
      for (const auto& s : j.at("specs")) specs.push_back(spec_from_json(s));
      return specs;
    }
    const ExperimentSpec base = spec_from_json(j.value("base", json::object()));
    std::vector<std::string> algos{to_string(base.algorithm)};
    std::vector<std::string> variants{to_string(base.variant)};
    std::vector<int> degrees{base.degree};
    std::vector<double> taus;
    read_opt(j, "algorithms", algos);
    read_opt(j, "variants", variants);
    read_opt(j, "degrees", degrees);
    read_opt(j, "taus", taus);
    if (taus.empty()) taus.push_back(base.data.kind == DataKind::Nonlinear ? base.data.nonlinear.tau : base.data.lds.tau);
    for (const auto& a : algos) {
      for (double tau : taus) {
        for (const auto& v : variants) {
          const Variant var = parse_variant(v);
          const bool degree_free = var == Variant::None || var == Variant::Differencing;
          const std::vector<int> ds = degree_free ? std::vector<int>{base.degree} : degrees;
          for (int d : ds) {
            ExperimentSpec s = base;
            s.algorithm = parse_algorithm(a);
            s.variant = var;
            s.degree = d;
            s.data.lds.tau = tau;
            s.data.nonlinear.tau = tau;
            specs.push_back(std::move(s));
          }
        }
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid sweep config: ") + e.what());
  }
  return specs;
}

json to_json(const std::vector<SweepRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    json row{{"algorithm", to_string(r.algorithm)}, {"variant", to_string(r.variant)},
             {"degree", r.degree}, {"tau", r.tau}};
    if (r.report) row["report"] = to_json(*r.report);
    else row["error"] = r.error;
    out.push_back(row);
  }
  return out;
}

std::string sweep_table_csv(const std::vector<SweepRow>& rows) {
  using Column = std::pair<int, int>;  // (variant, degree)
  using Setting = std::pair<int, double>;  // (algorithm, tau)
  std::set<Column> columns;
  std::map<Setting, std::map<Column, std::string>> cells;
  for (const auto& r : rows) {
    const Column col{static_cast<int>(r.variant), r.degree};
    columns.insert(col);
    std::string cell = "error";
    if (r.report) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.4f\xC2\xB1%.4f", r.report->mean, r.report->std);
      cell = buf;
    }
    cells[{static_cast<int>(r.algorithm), r.tau}][col] = cell;
  }
  std::ostringstream os;
  os << "setting";
  for (const auto& [v, d] : columns) {
    const auto variant = static_cast<Variant>(v);
    os << ',' << (variant == Variant::None ? std::string("baseline") : to_string(variant));
    if (variant != Variant::None && variant != Variant::Differencing) os << " deg " << d;
  }
  os << '\n';
  for (const auto& [setting, row] : cells) {
    os << to_string(static_cast<Algorithm>(setting.first)) << " tau=" << setting.second;
    for (const auto& col : columns) {
      os << ',';
      if (auto it = row.find(col); it != row.end()) os << it->second;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace usp
