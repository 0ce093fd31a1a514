#pragma once

// Property suites run by `usp verify`: polynomial bounds, Gram matrix
// closed form and eigendecay, preconditioning identities, OGD regret and
// the oracle approximation bound.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace usp {

enum class Suite { Poly, Gram, Decay, Precond, Ogd, Oracle, All };

std::string to_string(Suite suite);
Suite parse_suite(const std::string& name);

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  /// Coefficient JSON to validate as a monic preconditioner.
  std::optional<std::filesystem::path> coeff_file;
  /// Extra sector angle whose Gram matrix is checked for degeneracy.
  std::optional<double> beta;
  std::uint64_t seed = 1;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool passed() const;
};

VerifyReport verify(Suite suite, const VerifyOptions& options = {});

// Individual checks, also used by the acceptance binary.
CheckResult check_sector_bound(int n_max = 10, std::size_t grid = 256);
CheckResult check_coefficient_growth(int n_max = 20);
CheckResult check_monic_file(const std::filesystem::path& path);
CheckResult check_gram_diagonal();
CheckResult check_gram_quadrature();
CheckResult check_gram_degenerate(double beta);
CheckResult check_eigendecay(const std::vector<std::size_t>& horizons, const std::vector<double>& betas);
CheckResult check_reconstruct_identity(std::uint64_t seed);
CheckResult check_offline_online(std::uint64_t seed);
CheckResult check_ogd_regret(std::size_t T, std::uint64_t seed);
CheckResult check_oracle_bound(std::size_t systems, std::uint64_t seed);

}  // namespace usp
