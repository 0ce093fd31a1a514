// usp: command-line front end for the preconditioning library.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "usp/csv_io.hpp"
#include "usp/dynsys.hpp"
#include "usp/error.hpp"
#include "usp/harness.hpp"
#include "usp/poly.hpp"
#include "usp/precond.hpp"
#include "usp/seed.hpp"
#include "usp/spectral.hpp"
#include "usp/verify.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitPropertyFailure = 2;

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw usp::ValidationError("cannot read " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw usp::ValidationError(path + ": " + e.what());
  }
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw usp::ValidationError("cannot open " + path + " for writing");
  out << text;
}

struct PolyArgs {
  std::string family = "chebyshev";
  int degree = 5;
  std::string out;
};

int cmd_poly(const PolyArgs& a) {
  const auto family = usp::parse_poly_family(a.family);
  if (!family) throw usp::ValidationError("unknown family '" + a.family + "'");
  const auto c = usp::make_preset(*family, a.degree);
  emit(usp::coefficients_to_json(c).dump(2) + "\n", a.out);
  return 0;
}

struct GenArgs {
  std::string kind = "lds";
  std::size_t T = 2000;
  std::optional<Eigen::Index> d_hidden;
  usp::SystemConfig lds;
  std::string activation = "tanh";
  std::string scaling = "raw";
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_gen_data(GenArgs a) {
  const auto kind = usp::parse_data_kind(a.kind);
  if (kind == usp::DataKind::Csv) throw usp::ValidationError("gen-data generates lds or nonlinear data");
  if (a.T < 1) throw usp::ValidationError("T must be at least 1");
  usp::InputScaling scaling;
  if (a.scaling == "raw") scaling = usp::InputScaling::Raw;
  else if (a.scaling == "unit") scaling = usp::InputScaling::UnitNorm;
  else throw usp::ValidationError("input scaling must be raw or unit");

  const auto sys_seed = usp::derive_stream_seed(a.seed, usp::SeedStream::System);
  const auto in_seed = usp::derive_stream_seed(a.seed, usp::SeedStream::Inputs);
  const auto noise_seed = usp::derive_stream_seed(a.seed, usp::SeedStream::Noise);
  const auto inputs = usp::gaussian_inputs(static_cast<Eigen::Index>(a.T), a.lds.d_in, in_seed, scaling);
  usp::Trajectory traj;
  if (kind == usp::DataKind::Lds) {
    if (a.d_hidden) a.lds.d_hidden = *a.d_hidden;
    traj = usp::simulate_lds(usp::sample_system(a.lds, sys_seed), inputs, noise_seed);
  } else {
    usp::NonlinearConfig cfg;
    if (a.d_hidden) cfg.d_hidden = *a.d_hidden;
    cfg.d_in = a.lds.d_in;
    cfg.d_out = a.lds.d_out;
    cfg.tau = a.lds.tau;
    cfg.radius_lo = a.lds.radius_lo;
    cfg.radius_hi = a.lds.radius_hi;
    cfg.noise_sigma = a.lds.noise_sigma;
    if (a.activation == "tanh") cfg.activation = usp::Activation::Tanh;
    else if (a.activation == "identity") cfg.activation = usp::Activation::Identity;
    else throw usp::ValidationError("activation must be tanh or identity");
    traj = usp::simulate_nonlinear(usp::sample_nonlinear(cfg, sys_seed), inputs, noise_seed);
  }
  if (a.out.empty() || a.out == "-") usp::write_trajectory_csv(std::cout, traj);
  else usp::write_trajectory_csv(std::filesystem::path(a.out), traj);
  return 0;
}

struct PrecondArgs {
  std::string coeffs;
  std::string in;
  std::string out;
};

int cmd_precond(const PrecondArgs& a) {
  const auto c = usp::read_coefficients(a.coeffs);
  auto traj = usp::read_trajectory_csv(std::filesystem::path(a.in));
  traj.outputs = usp::convolve(traj.outputs, c);
  if (a.out.empty() || a.out == "-") usp::write_trajectory_csv(std::cout, traj);
  else usp::write_trajectory_csv(std::filesystem::path(a.out), traj);
  return 0;
}

struct FilterArgs {
  std::size_t T = 256;
  double beta = 0.1;
  std::size_t k = 24;
  std::string out;
  std::string report;
};

int cmd_filters(const FilterArgs& a) {
  const usp::ComplexSector sector(a.beta);
  const Eigen::MatrixXd Z = usp::build_Z(a.T, sector);
  if (Z.cwiseAbs().maxCoeff() == 0.0) {
    throw usp::ValidationError("degenerate filter bank: beta = 0 gives an all-zero Gram matrix");
  }
  const auto bank = usp::filter_bank(Z, a.k, sector);
  const auto& ev = bank.eigenvalues();
  nlohmann::json filters = nlohmann::json::array();
  for (Eigen::Index j = 0; j < bank.filters().cols(); ++j) {
    const Eigen::VectorXd col = bank.filters().col(j);
    filters.push_back(std::vector<double>(col.data(), col.data() + col.size()));
  }
  const double log_t = std::log(static_cast<double>(a.T));
  nlohmann::json out{{"horizon", a.T},
                     {"beta", a.beta},
                     {"k", a.k},
                     {"eigenvalues", std::vector<double>(ev.data(), ev.data() + ev.size())},
                     {"trace", Z.trace()},
                     {"trace_bound", 6.0 * a.beta * log_t},
                     {"count_above_beta", usp::count_above(ev, a.beta)},
                     {"count_bound", 6.0 * log_t},
                     {"filters", filters}};
  if (!a.out.empty()) emit(out.dump() + "\n", a.out);
  if (!a.report.empty()) {
    std::string csv = "index,sigma\n";
    for (Eigen::Index j = 0; j < ev.size(); ++j) {
      csv += std::to_string(j + 1) + "," + usp::format_double(ev(j)) + "\n";
    }
    emit(csv, a.report);
  }
  if (a.out.empty() && a.report.empty()) emit(out.dump(2) + "\n", "");
  return 0;
}

struct RunArgs {
  std::string config;
  std::string algo;
  std::string precond;
  std::optional<int> degree;
  std::string data;
  std::optional<std::size_t> runs;
  std::optional<std::size_t> T;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::string out;
};

usp::ExperimentSpec spec_from_args(const RunArgs& a) {
  auto spec = a.config.empty() ? usp::ExperimentSpec{} : usp::spec_from_json(read_json(a.config));
  if (!a.algo.empty()) spec.algorithm = usp::parse_algorithm(a.algo);
  if (!a.precond.empty()) spec.variant = usp::parse_variant(a.precond);
  if (a.degree) spec.degree = *a.degree;
  if (!a.data.empty()) {
    if (a.data == "lds" || a.data == "nonlinear") {
      spec.data.kind = usp::parse_data_kind(a.data);
    } else {
      spec.data.kind = usp::DataKind::Csv;
      spec.data.csv_path = a.data;
      spec.runs = 1;
    }
  }
  if (a.runs) spec.runs = *a.runs;
  if (a.T) spec.horizon = *a.T;
  if (a.seed) spec.master_seed = *a.seed;
  if (a.workers) spec.workers = *a.workers;
  return spec;
}

int cmd_run(const RunArgs& a) {
  const auto report = usp::run_experiment(spec_from_args(a));
  emit(usp::to_json(report).dump(2) + "\n", a.out);
  return 0;
}

struct SweepArgs {
  std::string config;
  std::string table;
  std::optional<std::size_t> workers;
  std::string out;
};

int cmd_sweep(const SweepArgs& a) {
  auto specs = usp::sweep_specs_from_json(read_json(a.config));
  if (a.workers) {
    for (auto& s : specs) s.workers = *a.workers;
  }
  const auto rows = usp::sweep(specs);
  if (a.table.empty()) emit(usp::to_json(rows).dump(2) + "\n", a.out);
  else if (a.table == "csv") emit(usp::sweep_table_csv(rows), a.out);
  else throw usp::ValidationError("--table supports csv only");
  for (const auto& r : rows) {
    if (!r.report) std::cerr << "spec " << usp::to_string(r.variant) << " failed: " << r.error << '\n';
  }
  return 0;
}

struct VerifyArgs {
  std::string suite = "all";
  std::string coeffs;
  std::optional<double> beta;
  std::uint64_t seed = 1;
};

int cmd_verify(const VerifyArgs& a) {
  usp::VerifyOptions opts;
  if (!a.coeffs.empty()) opts.coeff_file = a.coeffs;
  opts.beta = a.beta;
  opts.seed = a.seed;
  const auto report = usp::verify(usp::parse_suite(a.suite), opts);
  for (const auto& c : report.checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << '[' << c.suite << "] " << c.name << ": " << c.detail << '\n';
  }
  std::cout << (report.passed() ? "all checks passed" : "property failures detected") << '\n';
  return report.passed() ? 0 : kExitPropertyFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Universal sequence preconditioning toolkit"};
  app.require_subcommand(1);

  PolyArgs poly;
  auto* sp = app.add_subcommand("poly", "Print preconditioning coefficients as JSON");
  sp->add_option("--family", poly.family, "chebyshev, legendre or differencing")->capture_default_str();
  sp->add_option("--degree", poly.degree)->capture_default_str();
  sp->add_option("--json,--out", poly.out, "Output file (stdout when omitted)");

  GenArgs gen;
  auto* sg = app.add_subcommand("gen-data", "Generate a synthetic trajectory CSV");
  sg->add_option("--kind", gen.kind, "lds or nonlinear")->capture_default_str();
  sg->add_option("--T", gen.T)->capture_default_str();
  sg->add_option("--dh", gen.d_hidden, "Hidden dimension (50 for lds, 10 for nonlinear)");
  sg->add_option("--din", gen.lds.d_in)->capture_default_str();
  sg->add_option("--dout", gen.lds.d_out)->capture_default_str();
  sg->add_option("--tau", gen.lds.tau)->capture_default_str();
  sg->add_option("--L", gen.lds.radius_lo)->capture_default_str();
  sg->add_option("--U", gen.lds.radius_hi)->capture_default_str();
  sg->add_option("--sigma", gen.lds.noise_sigma)->capture_default_str();
  sg->add_option("--max-condition", gen.lds.max_condition)->capture_default_str();
  sg->add_flag("--nonneg", gen.lds.nonnegative_real, "Restrict eigenvalues to Re z >= 0");
  sg->add_option("--activation", gen.activation, "tanh or identity (nonlinear only)")->capture_default_str();
  sg->add_option("--inputs", gen.scaling, "raw or unit")->capture_default_str();
  sg->add_option("--seed", gen.seed)->capture_default_str();
  sg->add_option("--out", gen.out);

  PrecondArgs pre;
  auto* spc = app.add_subcommand("precond", "Convolve trajectory outputs with coefficients");
  spc->add_option("--coeffs", pre.coeffs)->required();
  spc->add_option("--in", pre.in)->required();
  spc->add_option("--out", pre.out);

  FilterArgs filt;
  auto* sf = app.add_subcommand("filters", "Compute spectral filters for a sector");
  sf->add_option("--T", filt.T, "Filter horizon")->capture_default_str();
  sf->add_option("--beta", filt.beta)->capture_default_str();
  sf->add_option("--k", filt.k)->capture_default_str();
  sf->add_option("--out", filt.out, "Filter bank JSON");
  sf->add_option("--report", filt.report, "Eigendecay CSV (index, sigma)");

  RunArgs run;
  auto* sr = app.add_subcommand("run", "Run one experiment and print its metrics report");
  sr->add_option("--config", run.config, "Experiment spec JSON");
  sr->add_option("--algo", run.algo, "regression, spectral or oracle");
  sr->add_option("--precond", run.precond, "none, chebyshev, legendre, differencing or learned");
  sr->add_option("--degree", run.degree);
  sr->add_option("--data", run.data, "lds, nonlinear or a CSV path");
  sr->add_option("--runs", run.runs);
  sr->add_option("--T", run.T);
  sr->add_option("--seed", run.seed);
  sr->add_option("--workers", run.workers);
  sr->add_option("--out", run.out);

  SweepArgs sw;
  auto* ss = app.add_subcommand("sweep", "Run a grid of experiments");
  ss->add_option("--config", sw.config)->required();
  ss->add_option("--table", sw.table, "Emit a table instead of JSON (csv)");
  ss->add_option("--workers", sw.workers);
  ss->add_option("--out", sw.out);

  VerifyArgs ver;
  auto* sv = app.add_subcommand("verify", "Run the property suites");
  sv->add_option("--suite", ver.suite, "poly, gram, decay, precond, ogd, oracle or all")->capture_default_str();
  sv->add_option("--coeffs", ver.coeffs, "Also check this coefficient file is monic");
  sv->add_option("--beta", ver.beta, "Also check the Gram matrix of this sector");
  sv->add_option("--seed", ver.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*sp) return cmd_poly(poly);
    if (*sg) return cmd_gen_data(gen);
    if (*spc) return cmd_precond(pre);
    if (*sf) return cmd_filters(filt);
    if (*sr) return cmd_run(run);
    if (*ss) return cmd_sweep(sw);
    if (*sv) return cmd_verify(ver);
  } catch (const usp::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return 0;
}
