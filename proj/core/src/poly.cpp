#include "usp/poly.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "usp/error.hpp"

namespace usp {

using boost::multiprecision::cpp_int;

std::string_view to_string(PolyFamily family) noexcept {
  switch (family) {
    case PolyFamily::Chebyshev: return "chebyshev";
    case PolyFamily::Legendre: return "legendre";
    case PolyFamily::Differencing: return "differencing";
    case PolyFamily::Custom: return "custom";
    case PolyFamily::Learned: return "learned";
  }
  return "custom";
}

std::optional<PolyFamily> parse_poly_family(std::string_view name) noexcept {
  if (name == "chebyshev") return PolyFamily::Chebyshev;
  if (name == "legendre") return PolyFamily::Legendre;
  if (name == "differencing") return PolyFamily::Differencing;
  if (name == "custom") return PolyFamily::Custom;
  if (name == "learned") return PolyFamily::Learned;
  return std::nullopt;
}

CoefficientVector::CoefficientVector(std::vector<double> coeffs, PolyFamily family)
    : coeffs_(std::move(coeffs)), family_(family) {
  if (coeffs_.empty()) {
    throw ValidationError("coefficient vector must hold at least c_0");
  }
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    if (!std::isfinite(coeffs_[i])) {
      throw ValidationError("coefficient c_" + std::to_string(i) + " is not finite");
    }
  }
  if (coeffs_[0] != 1.0) {
    throw ValidationError("coefficients must be monic: c_0 = " +
                          std::to_string(coeffs_[0]) + ", expected 1");
  }
}

double CoefficientVector::l1_norm() const noexcept {
  double s = 0.0;
  for (double c : coeffs_) s += std::abs(c);
  return s;
}

ComplexSector::ComplexSector(double beta) : beta_(beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw ValidationError("sector angle beta must lie in [0, 1], got " +
                          std::to_string(beta));
  }
}

bool ComplexSector::contains(std::complex<double> z) const noexcept {
  if (std::abs(z) > 1.0) return false;
  if (z == std::complex<double>{}) return true;
  return std::abs(std::arg(z)) <= beta_;
}

namespace {

void check_degree(int n) {
  if (n < 0) throw ValidationError("polynomial degree must be nonnegative");
  if (n > kMaxExactDegree) {
    throw ValidationError("degree " + std::to_string(n) + " exceeds the exact-arithmetic limit of " +
                          std::to_string(kMaxExactDegree));
  }
}

// Ascending-power polynomial helpers.
template <class T>
std::vector<T> reversed(std::vector<T> v) {
  std::reverse(v.begin(), v.end());
  return v;
}

}  // namespace

std::vector<cpp_int> chebyshev_t_exact(int n) {
  check_degree(n);
  // ascending powers
  std::vector<cpp_int> prev{1};
  if (n == 0) return prev;
  std::vector<cpp_int> cur{0, 1};
  for (int k = 1; k < n; ++k) {
    std::vector<cpp_int> next(cur.size() + 1, 0);
    for (std::size_t i = 0; i < cur.size(); ++i) next[i + 1] += 2 * cur[i];
    for (std::size_t i = 0; i < prev.size(); ++i) next[i] -= prev[i];
    prev = std::move(cur);
    cur = std::move(next);
  }
  return reversed(std::move(cur));
}

std::vector<Rational> chebyshev_monic_exact(int n) {
  auto t = chebyshev_t_exact(n);
  std::vector<Rational> out;
  out.reserve(t.size());
  const cpp_int scale = n == 0 ? cpp_int(1) : cpp_int(1) << (n - 1);
  for (const auto& v : t) out.emplace_back(v, scale);
  return out;
}

std::vector<Rational> legendre_monic_exact(int n) {
  check_degree(n);
  // Bonnet: (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}, ascending powers.
  std::vector<Rational> prev{1};
  std::vector<Rational> cur = prev;
  if (n > 0) {
    cur = {0, 1};
    for (int k = 1; k < n; ++k) {
      std::vector<Rational> next(cur.size() + 1, 0);
      const Rational a(2 * k + 1, k + 1);
      const Rational b(k, k + 1);
      for (std::size_t i = 0; i < cur.size(); ++i) next[i + 1] += a * cur[i];
      for (std::size_t i = 0; i < prev.size(); ++i) next[i] -= b * prev[i];
      prev = std::move(cur);
      cur = std::move(next);
    }
  }
  const Rational lead = cur.back();
  for (auto& v : cur) v /= lead;
  return reversed(std::move(cur));
}

CoefficientVector to_coefficients(const std::vector<Rational>& exact, PolyFamily family) {
  std::vector<double> c;
  c.reserve(exact.size());
  for (const auto& v : exact) c.push_back(static_cast<double>(v));
  return CoefficientVector(std::move(c), family);
}

CoefficientVector chebyshev_monic(int n) {
  return to_coefficients(chebyshev_monic_exact(n), PolyFamily::Chebyshev);
}

CoefficientVector legendre_monic(int n) {
  return to_coefficients(legendre_monic_exact(n), PolyFamily::Legendre);
}

CoefficientVector differencing() {
  return CoefficientVector({1.0, -1.0}, PolyFamily::Differencing);
}

CoefficientVector make_preset(PolyFamily family, int degree) {
  switch (family) {
    case PolyFamily::Chebyshev: return chebyshev_monic(degree);
    case PolyFamily::Legendre: return legendre_monic(degree);
    case PolyFamily::Differencing: return differencing();
    case PolyFamily::Custom:
    case PolyFamily::Learned: break;
  }
  throw ValidationError("family '" + std::string(to_string(family)) +
                        "' has no preset coefficients");
}

std::complex<double> eval_complex(const CoefficientVector& c, std::complex<double> z) {
  std::complex<double> acc{0.0, 0.0};
  for (double ci : c.coeffs()) acc = acc * z + ci;
  return acc;
}

double sup_on_sector(const CoefficientVector& c, const ComplexSector& sector,
                     std::size_t grid_density) {
  if (grid_density < 2) throw ValidationError("grid_density must be at least 2");
  const double g = static_cast<double>(grid_density - 1);
  const double beta = sector.beta();
  double best = 0.0;
  for (std::size_t a = 0; a < grid_density; ++a) {
    const double theta = -beta + 2.0 * beta * static_cast<double>(a) / g;
    const std::complex<double> dir = std::polar(1.0, theta);
    for (std::size_t r = 0; r < grid_density; ++r) {
      const double rho = static_cast<double>(r) / g;
      best = std::max(best, std::abs(eval_complex(c, rho * dir)));
    }
  }
  return best;
}

int chebyshev_degree_for_horizon(std::size_t horizon, std::size_t d_out) {
  if (horizon == 0 || d_out == 0) throw ValidationError("horizon and d_out must be positive");
  const double t = static_cast<double>(horizon);
  const double arg = 8.0 / (3.0 * std::sqrt(static_cast<double>(d_out))) * std::pow(t, 1.5);
  const double raw = std::ceil(10.0 / 13.0 * std::log2(arg));
  return static_cast<int>(std::clamp(raw, 1.0, 20.0));
}

}  // namespace usp
