#pragma once

// Trajectory CSV files (header `t,u_0..u_{d_in-1},y_0..y_{d_out-1}`, one row
// per step, shortest round-trip float formatting) and coefficient JSON files.

#include <filesystem>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "usp/dynsys.hpp"
#include "usp/poly.hpp"

namespace usp {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

struct CsvReadOptions {
  /// z-score every input and output channel; the per-channel mean and
  /// standard deviation are recorded in the trajectory provenance.
  bool standardize = false;
};

/// Parses and validates a trajectory file. Throws ValidationError naming
/// the offending column, row or cell.
Trajectory read_trajectory_csv(std::istream& in, const CsvReadOptions& options = {},
                               const std::string& source_name = "<stream>");
Trajectory read_trajectory_csv(const std::filesystem::path& path, const CsvReadOptions& options = {});

/// {"family", "degree", "coeffs", "l1_norm"}.
nlohmann::json coefficients_to_json(const CoefficientVector& c);
/// Accepts the object above or a bare array of coefficients.
CoefficientVector coefficients_from_json(const nlohmann::json& j);
CoefficientVector read_coefficients(const std::filesystem::path& path);

}  // namespace usp
