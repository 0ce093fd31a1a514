#include <fstream>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "usp/error.hpp"
#include "usp/verify.hpp"

using namespace usp;

TEST(Verify, SuiteNames) {
  for (auto s : {Suite::Poly, Suite::Gram, Suite::Decay, Suite::Precond, Suite::Ogd, Suite::Oracle, Suite::All})
    EXPECT_EQ(parse_suite(to_string(s)), s);
  EXPECT_THROW(parse_suite("everything"), ValidationError);
}

TEST(Verify, CheapSuitesPass) {
  for (auto s : {Suite::Poly, Suite::Gram, Suite::Precond, Suite::Ogd}) {
    const auto report = verify(s, {});
    EXPECT_FALSE(report.checks.empty());
    for (const auto& c : report.checks) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
  }
}

TEST(Verify, DecayAndOracle) {
  EXPECT_TRUE(check_eigendecay({64, 256}, {0.1}).passed);
  const auto r = check_oracle_bound(3, 9);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(Verify, NonMonicFileFails) {
  const auto dir = test::scratch_dir("verify_coeffs");
  std::ofstream(dir / "bad.json") << R"({"coeffs": [2.0, 0.0, -1.0]})";
  const auto r = check_monic_file(dir / "bad.json");
  EXPECT_FALSE(r.passed);
  EXPECT_NE(r.detail.find("monic"), std::string::npos) << r.detail;

  std::ofstream(dir / "good.json") << R"({"coeffs": [1.0, 0.0, -0.5]})";
  EXPECT_TRUE(check_monic_file(dir / "good.json").passed);

  VerifyOptions opts;
  opts.coeff_file = dir / "bad.json";
  EXPECT_FALSE(verify(Suite::Poly, opts).passed());
}

TEST(Verify, ZeroBetaIsDegenerate) {
  const auto r = check_gram_degenerate(0.0);
  EXPECT_FALSE(r.passed);
  EXPECT_NE(r.detail.find("degenerate"), std::string::npos) << r.detail;
  EXPECT_TRUE(check_gram_degenerate(0.1).passed);
}
