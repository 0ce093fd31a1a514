#pragma once

// Monic preconditioning polynomials p(x) = sum_i c_i x^(n-i) and their
// behaviour on the complex sector {|z| <= 1, |arg z| <= beta}.

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace usp {

using Rational = boost::multiprecision::cpp_rational;

enum class PolyFamily { Chebyshev, Legendre, Differencing, Custom, Learned };

std::string_view to_string(PolyFamily family) noexcept;
std::optional<PolyFamily> parse_poly_family(std::string_view name) noexcept;

/// Highest degree accepted by the exact coefficient generators.
inline constexpr int kMaxExactDegree = 60;

/// Coefficients c_0..c_n of a monic polynomial, highest power first.
///
/// The constructor enforces c_0 == 1 exactly and finiteness of every entry;
/// violations throw ValidationError. Instances are immutable.
class CoefficientVector {
 public:
  explicit CoefficientVector(std::vector<double> coeffs,
                             PolyFamily family = PolyFamily::Custom);

  std::size_t degree() const noexcept { return coeffs_.size() - 1; }
  std::size_t size() const noexcept { return coeffs_.size(); }
  std::span<const double> coeffs() const noexcept { return coeffs_; }
  const std::vector<double>& values() const noexcept { return coeffs_; }
  double operator[](std::size_t i) const { return coeffs_.at(i); }
  PolyFamily family() const noexcept { return family_; }

  double l1_norm() const noexcept;

  friend bool operator==(const CoefficientVector&, const CoefficientVector&) = default;

 private:
  std::vector<double> coeffs_;
  PolyFamily family_;
};

/// C_beta = { z : |z| <= 1, |arg z| <= beta }, 0 <= beta <= 1.
class ComplexSector {
 public:
  explicit ComplexSector(double beta);

  double beta() const noexcept { return beta_; }
  static constexpr double radius() noexcept { return 1.0; }
  bool contains(std::complex<double> z) const noexcept;

 private:
  double beta_;
};

// Exact generators. Entries are highest power first, entry 0 equal to 1.
std::vector<Rational> chebyshev_monic_exact(int n);
std::vector<Rational> legendre_monic_exact(int n);

/// Integer coefficients of T_n (highest power first), from
/// T_{n+1} = 2x T_n - T_{n-1}.
std::vector<boost::multiprecision::cpp_int> chebyshev_t_exact(int n);

CoefficientVector to_coefficients(const std::vector<Rational>& exact,
                                  PolyFamily family);

/// M_n = T_n / 2^(n-1), M_0 = 1.
CoefficientVector chebyshev_monic(int n);
/// Legendre P_n rescaled to leading coefficient 1.
CoefficientVector legendre_monic(int n);
/// The fixed first-difference vector [1, -1].
CoefficientVector differencing();

/// Dispatches on family; Differencing ignores the degree. Custom and Learned
/// have no preset and throw ValidationError.
CoefficientVector make_preset(PolyFamily family, int degree);

/// Horner evaluation of sum_i c_i z^(n-i).
std::complex<double> eval_complex(const CoefficientVector& c, std::complex<double> z);

/// max |p(z)| over a polar grid on the sector: grid_density radii
/// r_i = i / (g - 1) and grid_density angles spread evenly over [-beta, beta].
/// Refining the interval count g - 1 by an integer factor yields a superset
/// grid, so the estimate is nondecreasing under such refinement.
double sup_on_sector(const CoefficientVector& c, const ComplexSector& sector,
                     std::size_t grid_density = 512);

/// Degree rule for Chebyshev preconditioning of regression:
/// ceil((10/13) * log2((8 / (3 sqrt(d_out))) * T^(3/2))), clamped to [1, 20].
int chebyshev_degree_for_horizon(std::size_t horizon, std::size_t d_out);

}  // namespace usp
