#include <cmath>
#include <complex>
#include <numbers>

#include <boost/math/special_functions/binomial.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <gtest/gtest.h>

#include "usp/error.hpp"
#include "usp/poly.hpp"

using namespace usp;
using boost::multiprecision::cpp_int;

namespace {

cpp_int factorial(int n) {
  cpp_int f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

cpp_int binom(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

// Explicit sum for T_n, rescaled to monic: coefficient of x^(n-2m) is
// n (-1)^m (n-m-1)! / (m! (n-2m)!) 4^(-m).
std::vector<Rational> chebyshev_explicit(int n) {
  std::vector<Rational> out(static_cast<std::size_t>(n) + 1, Rational(0));
  if (n == 0) {
    out[0] = 1;
    return out;
  }
  for (int m = 0; 2 * m <= n; ++m) {
    Rational v(n * factorial(n - m - 1), factorial(m) * factorial(n - 2 * m) * (cpp_int(1) << (2 * m)));
    out[static_cast<std::size_t>(2 * m)] = m % 2 ? Rational(-v) : v;
  }
  return out;
}

// Rodrigues expansion P_n = 2^-n sum_m (-1)^m C(n,m) C(2n-2m,n) x^(n-2m), divided by its lead.
std::vector<Rational> legendre_explicit(int n) {
  std::vector<Rational> out(static_cast<std::size_t>(n) + 1, Rational(0));
  const cpp_int lead = binom(2 * n, n);
  for (int m = 0; 2 * m <= n; ++m) {
    Rational v(binom(n, m) * binom(2 * n - 2 * m, n), lead);
    out[static_cast<std::size_t>(2 * m)] = m % 2 ? Rational(-v) : v;
  }
  return out;
}

void expect_coeffs(const CoefficientVector& c, std::initializer_list<double> expected) {
  ASSERT_EQ(c.size(), expected.size());
  std::size_t i = 0;
  for (double e : expected) EXPECT_DOUBLE_EQ(c[i++], e) << "index " << i - 1;
}

}  // namespace

TEST(CoefficientVector, RejectsNonMonic) {
  EXPECT_THROW(CoefficientVector({2.0, 0.0, 1.0}), ValidationError);
  EXPECT_THROW(CoefficientVector({}), ValidationError);
  EXPECT_THROW(CoefficientVector({1.0, std::nan("")}), ValidationError);
  EXPECT_THROW(CoefficientVector({1.0, INFINITY}), ValidationError);
}

TEST(CoefficientVector, DegreeAndNorm) {
  const CoefficientVector c({1.0, -2.0, 0.5});
  EXPECT_EQ(c.degree(), 2u);
  EXPECT_DOUBLE_EQ(c.l1_norm(), 3.5);
}

TEST(ComplexSector, Bounds) {
  EXPECT_THROW(ComplexSector(-0.1), ValidationError);
  EXPECT_THROW(ComplexSector(1.5), ValidationError);
  const ComplexSector s(0.1);
  EXPECT_TRUE(s.contains({0.5, 0.0}));
  EXPECT_TRUE(s.contains(std::polar(1.0, 0.1)));
  EXPECT_FALSE(s.contains(std::polar(1.0, 0.2)));
  EXPECT_FALSE(s.contains({1.1, 0.0}));
}

TEST(Chebyshev, SmallDegrees) {
  expect_coeffs(chebyshev_monic(0), {1.0});
  expect_coeffs(chebyshev_monic(1), {1.0, 0.0});
  expect_coeffs(chebyshev_monic(2), {1.0, 0.0, -0.5});
  expect_coeffs(chebyshev_monic(3), {1.0, 0.0, -0.75, 0.0});
  EXPECT_EQ(chebyshev_monic(4).family(), PolyFamily::Chebyshev);
}

TEST(Chebyshev, IntegerRecurrence) {
  const auto t3 = chebyshev_t_exact(3);
  ASSERT_EQ(t3.size(), 4u);
  EXPECT_EQ(t3[0], 4);
  EXPECT_EQ(t3[2], -3);
}

TEST(Chebyshev, MatchesExplicitFormulaExactly) {
  for (int n = 0; n <= 40; ++n) EXPECT_EQ(chebyshev_monic_exact(n), chebyshev_explicit(n)) << "n=" << n;
}

TEST(Chebyshev, RejectsLargeDegree) {
  EXPECT_THROW(chebyshev_monic(61), ValidationError);
  EXPECT_THROW(chebyshev_monic(-1), ValidationError);
  EXPECT_NO_THROW(chebyshev_monic(60));
}

TEST(Chebyshev, CosineIdentity) {
  for (int n : {1, 2, 5, 10, 20}) {
    const auto c = chebyshev_monic(n);
    for (int i = 0; i < 1000; ++i) {
      const double theta = std::numbers::pi * i / 999.0;
      const double expected = std::cos(n * theta) / std::ldexp(1.0, n - 1);
      EXPECT_NEAR(eval_complex(c, std::cos(theta)).real(), expected, 1e-12) << "n=" << n;
    }
  }
}

TEST(Chebyshev, CoefficientGrowthExact) {
  for (int n = 1; n <= 20; ++n) {
    Rational max_abs = 0;
    for (const auto& c : chebyshev_monic_exact(n)) max_abs = std::max(max_abs, Rational(abs(c)));
    Rational p = 1;
    for (int i = 0; i < 10; ++i) p *= max_abs;
    EXPECT_LE(p, Rational(cpp_int(1) << (3 * n))) << "n=" << n;
  }
}

TEST(Chebyshev, SectorBound) {
  for (int n = 1; n <= 10; ++n) {
    const ComplexSector sector(1.0 / (64.0 * n * n));
    EXPECT_LE(sup_on_sector(chebyshev_monic(n), sector, 256), std::ldexp(1.0, -(n - 2))) << "n=" << n;
  }
}

TEST(Legendre, SmallDegrees) {
  expect_coeffs(legendre_monic(0), {1.0});
  expect_coeffs(legendre_monic(1), {1.0, 0.0});
  expect_coeffs(legendre_monic(2), {1.0, 0.0, -1.0 / 3.0});
  expect_coeffs(legendre_monic(3), {1.0, 0.0, -0.6, 0.0});
}

TEST(Legendre, MatchesRodriguesExactly) {
  for (int n = 0; n <= 40; ++n) EXPECT_EQ(legendre_monic_exact(n), legendre_explicit(n)) << "n=" << n;
}

TEST(Legendre, RejectsLargeDegree) { EXPECT_THROW(legendre_monic(61), ValidationError); }

TEST(Presets, DifferencingIsDistinctFromChebyshevTwo) {
  expect_coeffs(differencing(), {1.0, -1.0});
  EXPECT_NE(differencing().values(), chebyshev_monic(2).values());
  EXPECT_EQ(make_preset(PolyFamily::Differencing, 7), differencing());
  EXPECT_EQ(make_preset(PolyFamily::Legendre, 4), legendre_monic(4));
  EXPECT_THROW(make_preset(PolyFamily::Custom, 3), ValidationError);
}

TEST(Presets, FamilyNamesRoundTrip) {
  for (auto f : {PolyFamily::Chebyshev, PolyFamily::Legendre, PolyFamily::Differencing, PolyFamily::Custom,
                 PolyFamily::Learned}) {
    EXPECT_EQ(parse_poly_family(to_string(f)), f);
  }
  EXPECT_FALSE(parse_poly_family("hermite").has_value());
}

TEST(EvalComplex, Examples) {
  EXPECT_EQ(eval_complex(CoefficientVector({1.0}), {0.3, -2.0}), std::complex<double>(1.0, 0.0));
  EXPECT_NEAR(std::abs(eval_complex(CoefficientVector({1.0, 0.0, -0.5}), 1.0) - 0.5), 0.0, 1e-15);
  const auto v = eval_complex(CoefficientVector({1.0, -1.0}), {0.0, 1.0});
  EXPECT_DOUBLE_EQ(v.real(), -1.0);
  EXPECT_DOUBLE_EQ(v.imag(), 1.0);
}

TEST(SupOnSector, Examples) {
  EXPECT_DOUBLE_EQ(sup_on_sector(CoefficientVector({1.0}), ComplexSector(0.3), 16), 1.0);
  EXPECT_NEAR(sup_on_sector(CoefficientVector({1.0, 0.0}), ComplexSector(0.5), 16), 1.0, 1e-15);
  EXPECT_LE(sup_on_sector(chebyshev_monic(5), ComplexSector(1.0 / (64.0 * 25.0)), 256), 0.125);
}

TEST(SupOnSector, MonotoneUnderRefinement) {
  const auto c = legendre_monic(6);
  const ComplexSector s(0.4);
  double prev = 0.0;
  for (std::size_t g : {3u, 5u, 9u, 17u, 33u, 65u}) {  // g - 1 doubles each time
    const double v = sup_on_sector(c, s, g);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(DegreeRule, HorizonFormula) {
  EXPECT_EQ(chebyshev_degree_for_horizon(2000, 1), 14);
  EXPECT_EQ(chebyshev_degree_for_horizon(1, 1), 2);
  EXPECT_EQ(chebyshev_degree_for_horizon(100000000, 1), 20);
}
