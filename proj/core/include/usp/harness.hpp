#pragma once

// Experiment orchestration: per-run data generation from a master seed,
// online learning, learning-rate grid search and report emission.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "usp/dynsys.hpp"
#include "usp/learners.hpp"

namespace usp {

enum class DataKind { Lds, Nonlinear, Csv };
enum class Algorithm { Regression, Spectral, Oracle };
enum class Variant { None, Chebyshev, Legendre, Differencing, Learned, Custom };

std::string to_string(DataKind kind);
std::string to_string(Algorithm algo);
std::string to_string(Variant variant);
Algorithm parse_algorithm(const std::string& name);
Variant parse_variant(const std::string& name);
DataKind parse_data_kind(const std::string& name);

struct DataSource {
  DataKind kind = DataKind::Lds;
  SystemConfig lds;
  NonlinearConfig nonlinear;
  std::string csv_path;
  bool standardize = false;
  InputScaling input_scaling = InputScaling::Raw;
};

struct ExperimentSpec {
  DataSource data;
  Algorithm algorithm = Algorithm::Regression;
  Variant variant = Variant::Chebyshev;
  int degree = 5;                       // 0 with Chebyshev selects the horizon rule
  std::vector<double> custom_coeffs;    // Variant::Custom only
  std::vector<double> lr_grid{1e-3, 1e-2, 1e-1};
  std::vector<double> coeff_lr_grid{1e-3, 1e-2, 1e-1};  // Variant::Learned only
  std::size_t runs = 20;                // N
  std::size_t horizon = 2000;           // T
  std::size_t window = 200;             // W, metric window at the end
  std::uint64_t master_seed = 0;
  std::optional<std::size_t> taps;      // regression input taps
  std::optional<double> norm_bound;     // C_domain; defaults to ||C|| ||B|| kappa
  std::size_t k = 24;                   // spectral filters
  double beta = 0.1;                    // spectral sector angle
  std::optional<double> radius_q;
  std::optional<double> radius_m;
  ProjectionNorm projection = ProjectionNorm::Spectral;
  std::size_t workers = 1;

  /// Throws ValidationError describing the first violated constraint.
  void validate() const;
};

/// Input taps used by regression when `taps` is unset: max(degree, 10).
inline constexpr std::size_t kDefaultMinTaps = 10;

nlohmann::json to_json(const ExperimentSpec& spec);
/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentSpec spec_from_json(const nlohmann::json& j);

/// FNV-1a 64 of the canonical (sorted-key) JSON dump, as 16 hex digits.
std::string config_hash(const ExperimentSpec& spec);

/// The coefficient vector a spec preconditions with ([1] for Variant::None;
/// the learned variant's initial value for Variant::Learned).
CoefficientVector spec_coefficients(const ExperimentSpec& spec, std::size_t d_out);

struct RunResult {
  std::uint64_t seed = 0;
  double final_window_error = 0.0;  // mean ||y_hat - y||_1 over the last W steps
  double average_loss = 0.0;        // mean over all T steps
  double average_preconditioned_loss = 0.0;
};

struct GridPoint {
  double lr = 0.0;
  std::optional<double> coeff_lr;
  std::vector<RunResult> runs;
  double mean_final = 0.0;
  double std_final = 0.0;
  double mean_average_loss = 0.0;
};

struct MetricsReport {
  nlohmann::json spec;
  std::string config_hash;
  std::vector<std::uint64_t> seeds;
  std::vector<GridPoint> grid;
  std::size_t chosen = 0;
  std::vector<double> per_run_final;  // copied from the chosen grid point
  double mean = 0.0;
  double std = 0.0;
  std::string setting;  // human-readable key
};

nlohmann::json to_json(const MetricsReport& report);

/// Mean and sample standard deviation (0 for a single value).
std::pair<double, double> mean_std(const std::vector<double>& values);

/// Index of the best grid point: lowest mean final-window error, ties broken
/// by the smallest learning rate (then smallest coefficient rate).
std::size_t select_grid_point(const std::vector<GridPoint>& grid);

/// Data for run `index`: seeds derived from (master_seed, index).
Trajectory generate_run_data(const ExperimentSpec& spec, std::size_t index,
                             LinearSystem* system_out = nullptr);

MetricsReport run_experiment(const ExperimentSpec& spec);

struct SweepRow {
  Algorithm algorithm = Algorithm::Regression;
  Variant variant = Variant::None;
  int degree = 0;
  double tau = 0.0;
  std::optional<MetricsReport> report;
  std::string error;  // set when the spec failed
};

/// Validates every spec before running any, then runs them and returns rows
/// sorted by (algorithm, variant, degree, tau). A failing spec records its
/// error and does not stop the others.
std::vector<SweepRow> sweep(const std::vector<ExperimentSpec>& specs);

/// Expands {"base": spec, "algorithms", "variants", "degrees", "taus"} or
/// reads {"specs": [...]}.
std::vector<ExperimentSpec> sweep_specs_from_json(const nlohmann::json& j);

nlohmann::json to_json(const std::vector<SweepRow>& rows);

/// Rows: algorithm and tau; columns: variant x degree; cells "mean±std".
std::string sweep_table_csv(const std::vector<SweepRow>& rows);

}  // namespace usp
