#include "usp/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "usp/error.hpp"

namespace usp {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  traj.validate();
  out << 't';
  for (Eigen::Index j = 0; j < traj.d_in(); ++j) out << ",u_" << j;
  for (Eigen::Index j = 0; j < traj.d_out(); ++j) out << ",y_" << j;
  out << '\n';
  for (Eigen::Index t = 0; t < traj.length(); ++t) {
    out << (t + 1);
    for (Eigen::Index j = 0; j < traj.d_in(); ++j) out << ',' << format_double(traj.inputs(t, j));
    for (Eigen::Index j = 0; j < traj.d_out(); ++j) out << ',' << format_double(traj.outputs(t, j));
    out << '\n';
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
  write_trajectory_csv(out, traj);
  if (!out) throw ValidationError("failed writing " + path.string());
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    std::size_t start = 0;
    while (start < cell.size() && cell[start] == ' ') ++start;
    cells.push_back(cell.substr(start));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& s, const std::string& where) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != last) {
    throw ValidationError("unparseable cell '" + s + "' at " + where);
  }
  if (!std::isfinite(v)) throw ValidationError("non-finite value '" + s + "' at " + where);
  return v;
}

}  // namespace

Trajectory read_trajectory_csv(std::istream& in, const CsvReadOptions& options,
                               const std::string& source_name) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(source_name + ": empty file, expected a header");
  const auto header = split(line);
  if (header.empty() || header[0] != "t") {
    throw ValidationError(source_name + ": malformed header, first column must be 't'");
  }
  Eigen::Index d_in = 0;
  std::size_t pos = 1;
  while (pos < header.size() && header[pos] == "u_" + std::to_string(d_in)) {
    ++d_in;
    ++pos;
  }
  Eigen::Index d_out = 0;
  while (pos < header.size() && header[pos] == "y_" + std::to_string(d_out)) {
    ++d_out;
    ++pos;
  }
  if (pos < header.size()) {
    const std::string expected = d_out == 0 ? "u_" + std::to_string(d_in) + "' or 'y_0"
                                            : "y_" + std::to_string(d_out);
    throw ValidationError(source_name + ": malformed header, unexpected column '" + header[pos] +
                          "' where '" + expected + "' was expected");
  }
  if (d_in == 0) throw ValidationError(source_name + ": schema error, missing column u_0");
  if (d_out == 0) throw ValidationError(source_name + ": schema error, missing column y_0");

  const std::size_t width = header.size();
  std::vector<double> values;
  std::vector<long long> times;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    const std::string where_row = source_name + " line " + std::to_string(line_no);
    if (cells.size() != width) {
      throw ValidationError(where_row + ": expected " + std::to_string(width) + " cells, found " +
                            std::to_string(cells.size()));
    }
    const double t = parse_cell(cells[0], where_row + " column t");
    if (t != std::floor(t)) throw ValidationError(where_row + ": t must be an integer");
    const auto ti = static_cast<long long>(t);
    if (!times.empty() && ti != times.back() + 1) {
      throw ValidationError(where_row + ": non-contiguous t (" + std::to_string(ti) + " follows " +
                            std::to_string(times.back()) + ")");
    }
    times.push_back(ti);
    for (std::size_t c = 1; c < width; ++c) {
      values.push_back(parse_cell(cells[c], where_row + " column " + header[c]));
    }
  }
  if (times.empty()) throw ValidationError(source_name + ": no data rows");

  const auto T = static_cast<Eigen::Index>(times.size());
  Trajectory traj;
  traj.inputs.resize(T, d_in);
  traj.outputs.resize(T, d_out);
  for (Eigen::Index t = 0; t < T; ++t) {
    const std::size_t base = static_cast<std::size_t>(t) * (width - 1);
    for (Eigen::Index j = 0; j < d_in; ++j) traj.inputs(t, j) = values[base + static_cast<std::size_t>(j)];
    for (Eigen::Index j = 0; j < d_out; ++j) {
      traj.outputs(t, j) = values[base + static_cast<std::size_t>(d_in + j)];
    }
  }
  traj.generator_tag = "csv";
  traj.provenance["source"] = source_name;
  traj.provenance["first_t"] = std::to_string(times.front());

  if (options.standardize) {
    auto standardize = [&](Eigen::MatrixXd& m, const char* prefix) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const double mean = m.col(j).mean();
        const double var = (m.col(j).array() - mean).square().mean();
        const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
        m.col(j) = (m.col(j).array() - mean) / sd;
        const std::string key = std::string(prefix) + std::to_string(j);
        traj.provenance["standardize." + key + ".mean"] = format_double(mean);
        traj.provenance["standardize." + key + ".std"] = format_double(sd);
      }
    };
    standardize(traj.inputs, "u_");
    standardize(traj.outputs, "y_");
  }
  return traj;
}

Trajectory read_trajectory_csv(const std::filesystem::path& path, const CsvReadOptions& options) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path.string());
  return read_trajectory_csv(in, options, path.string());
}

nlohmann::json coefficients_to_json(const CoefficientVector& c) {
  return nlohmann::json{{"family", std::string(to_string(c.family()))},
                        {"degree", c.degree()},
                        {"coeffs", c.values()},
                        {"l1_norm", c.l1_norm()}};
}

CoefficientVector coefficients_from_json(const nlohmann::json& j) {
  try {
    if (j.is_array()) return CoefficientVector(j.get<std::vector<double>>(), PolyFamily::Custom);
    if (!j.is_object() || !j.contains("coeffs")) {
      throw ValidationError("coefficient JSON must be an array or an object with 'coeffs'");
    }
    PolyFamily family = PolyFamily::Custom;
    if (j.contains("family")) {
      if (auto f = parse_poly_family(j.at("family").get<std::string>())) family = *f;
    }
    return CoefficientVector(j.at("coeffs").get<std::vector<double>>(), family);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid coefficient JSON: ") + e.what());
  }
}

CoefficientVector read_coefficients(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return coefficients_from_json(j);
}

}  // namespace usp
