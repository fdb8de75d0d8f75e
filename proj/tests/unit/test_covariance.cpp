#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gbpf/covariance.hpp"
#include "gbpf/errors.hpp"
#include "gbpf/presets.hpp"

namespace gbpf {
namespace {

TEST(CovarianceEval, FamilyFormulas) {
  EXPECT_NEAR(CovarianceFunction::exponential(0.12, 0.1)(1), 0.10858049016431515, 1e-15);
  EXPECT_DOUBLE_EQ(CovarianceFunction::power_law(0.12, 0.7)(1), 0.12);
  EXPECT_NEAR(CovarianceFunction::power_law(0.12, 0.7)(10), 0.12 * std::pow(10.0, -0.6), 1e-15);
  EXPECT_NEAR(CovarianceFunction::stretched_exponential(0.1, 0.5, 0.5)(4), 0.1 * std::exp(-1.0), 1e-15);
  EXPECT_NEAR(CovarianceFunction::two_exponential(0.05, 0.5, 0.02, 0.9)(2), 0.05 * 0.25 + 0.02 * 0.81, 1e-15);
}

TEST(CovarianceEval, TabulatedGeometricTail) {
  const auto c = CovarianceFunction::tabulated({0.1, 0.05});
  EXPECT_DOUBLE_EQ(c(3), 0.025);
  EXPECT_DOUBLE_EQ(c(4), 0.0125);
  EXPECT_EQ(c.max_lag(), -1);
}

TEST(CovarianceEval, TabulatedRejectTail) {
  const auto c = CovarianceFunction::tabulated({0.1, 0.05, 0.02}, TailRule::Reject);
  EXPECT_DOUBLE_EQ(c(3), 0.02);
  EXPECT_THROW(c(4), InvalidArgument);
  EXPECT_EQ(c.max_lag(), 3);
}

TEST(CovarianceEval, LagZeroIsAnError) {
  EXPECT_THROW(CovarianceFunction::exponential(0.1, 0.1)(0), InvalidArgument);
  EXPECT_THROW(eval_cov(CovarianceFunction::power_law(0.1, 0.7), -2), InvalidArgument);
}

TEST(CovarianceEval, TableMatchesPointEvaluation) {
  const auto c = CovarianceFunction::stretched_exponential(0.2, 0.3, 0.8);
  const auto t = c.table(50);
  ASSERT_EQ(t.size(), 50U);
  for (std::int64_t k = 1; k <= 50; ++k) EXPECT_DOUBLE_EQ(t[static_cast<std::size_t>(k - 1)], c(k));
}

TEST(CheckAssumption, DyadicPasses) {
  const auto r = check_assumption(CovarianceFunction::tabulated({0.05, 0.025, 0.0125}), 0.5, 10);
  EXPECT_TRUE(r.pass);
  EXPECT_TRUE(r.violated_clauses.empty());
}

TEST(CheckAssumption, C1TooLarge) {
  const auto r = check_assumption(CovarianceFunction::tabulated({0.3, 0.2, 0.2 * 2.0 / 3.0}), 0.5, 10);
  EXPECT_FALSE(r.pass);
  ASSERT_TRUE(r.violates(Clause::C1TooLarge));
  for (const auto& v : r.violated_clauses) {
    if (v.clause != Clause::C1TooLarge) continue;
    EXPECT_EQ(v.witness_lag, 1);
    EXPECT_DOUBLE_EQ(v.lhs, 0.3);
    EXPECT_DOUBLE_EQ(v.rhs, 0.25);
  }
}

TEST(CheckAssumption, RatioNotNondecreasing) {
  const auto r = check_assumption(CovarianceFunction::tabulated({0.05, 0.045, 0.02}, TailRule::Reject), 0.5, 10);
  EXPECT_FALSE(r.pass);
  ASSERT_TRUE(r.violates(Clause::RatioNotNondecreasing));
  for (const auto& v : r.violated_clauses) {
    if (v.clause != Clause::RatioNotNondecreasing) continue;
    EXPECT_EQ(v.witness_lag, 2);
    EXPECT_NEAR(v.lhs, 0.02 / 0.045, 1e-15);
    EXPECT_NEAR(v.rhs, 0.9, 1e-15);
  }
  EXPECT_EQ(r.horizon, 3);
}

TEST(CheckAssumption, NotDecreasing) {
  const auto r = check_assumption(CovarianceFunction::tabulated({0.05, 0.06, 0.07}, TailRule::Reject), 0.5, 10);
  EXPECT_TRUE(r.violates(Clause::NotDecreasing));
}

TEST(CheckAssumption, NotPositive) {
  const auto r = check_assumption(CovarianceFunction::tabulated({0.05, 0.02, 0.0}, TailRule::Reject), 0.5, 10);
  EXPECT_TRUE(r.violates(Clause::NotPositive));
}

// p = 0.3, c = 0.2, theta = 0.1: C(1) = 0.180967 < 0.21 and
// C(2) = 0.163746 > (0.09 + 0.180967)^2 / 0.3 - 0.09 = 0.154744.
TEST(CheckAssumption, ExponentialNearTheBoundPasses) {
  const auto r = check_assumption(CovarianceFunction::exponential(0.2, 0.1), 0.3);
  EXPECT_TRUE(r.pass) << r.summary();
}

// The bivariate Gaussian configuration: clause (d) fails by direct arithmetic.
TEST(CheckAssumption, BivariateGaussianFailsClauseD) {
  const double p = preset("bivariate-gauss-6.2").process->p();
  const auto r = check_assumption(CovarianceFunction::exponential(0.2, 0.1), p);
  EXPECT_FALSE(r.pass);
  ASSERT_EQ(r.violated_clauses.size(), 1U);
  const auto& v = r.violated_clauses.front();
  EXPECT_EQ(v.clause, Clause::C2TooSmall);
  EXPECT_NEAR(v.lhs, 0.2 * std::exp(-0.2), 1e-15);
  const double c1 = 0.2 * std::exp(-0.1);
  EXPECT_NEAR(v.rhs, (p * p + c1) * (p * p + c1) / p - p * p, 1e-15);
  EXPECT_NEAR(v.rhs, 0.17105394, 1e-8);
}

TEST(CheckAssumption, RoundedPFailsToo) {
  EXPECT_TRUE(check_assumption(CovarianceFunction::exponential(0.2, 0.1), 0.258).violates(Clause::C2TooSmall));
}

TEST(CheckAssumption, StrictInequalitiesAreExact) {
  // C(1) exactly p(1 - p) fails.
  EXPECT_TRUE(check_assumption(CovarianceFunction::tabulated({0.25, 0.125}), 0.5).violates(Clause::C1TooLarge));
}

TEST(CheckAssumption, HorizonStopsWhereExponentialsUnderflow) {
  const auto r = check_assumption(CovarianceFunction::exponential(0.1, std::log(2.0)), 0.5);
  EXPECT_TRUE(r.pass) << r.summary();
  EXPECT_LT(r.horizon, kDefaultHorizon);
  EXPECT_GE(CovarianceFunction::exponential(0.1, std::log(2.0))(r.horizon), kUnderflowFloor);
}

TEST(CheckAssumption, GeometricTableTailStopsAtUnderflow) {
  const auto r = check_assumption(CovarianceFunction::tabulated({0.05, 0.025, 0.0125}), 0.5);
  EXPECT_TRUE(r.pass) << r.summary();
  EXPECT_LT(r.horizon, kDefaultHorizon);
  // A zero inside the supplied values is still a violation.
  EXPECT_TRUE(check_assumption(CovarianceFunction::tabulated({0.05, 0.025, 0.0125, 0.0}), 0.5).violates(Clause::NotPositive));
}

TEST(CheckAssumption, PowerLawKeepsTheFullHorizon) {
  const auto r = check_assumption(CovarianceFunction::power_law(0.12, 0.7), 0.3);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.horizon, kDefaultHorizon);
}

TEST(CheckAssumption, RejectsBadArguments) {
  EXPECT_THROW(check_assumption(CovarianceFunction::exponential(0.1, 0.1), 0.0), InvalidArgument);
  EXPECT_THROW(check_assumption(CovarianceFunction::exponential(0.1, 0.1), 0.5, 2), InvalidArgument);
}

TEST(AdmissibleRegion, PowerLawBound) {
  // Root of c 2^(2H-2) = (p^2 + c)^2 / p - p^2 at p = 0.3, H = 0.7.
  EXPECT_NEAR(power_law_c_bound(0.3, 0.7), 0.14673223731941589, 1e-14);
  const auto region = admissible_region(Family::PowerLaw, 0.3);
  EXPECT_TRUE(region.contains(CovarianceFunction::power_law(0.12, 0.7)));
  EXPECT_FALSE(region.contains(CovarianceFunction::power_law(0.15, 0.7)));
  EXPECT_FALSE(region.contains(CovarianceFunction::power_law(0.0, 0.7)));
  EXPECT_FALSE(region.sufficiency_verified);
}

TEST(AdmissibleRegion, Exponential) {
  const auto region = admissible_region(Family::Exponential, 0.5);
  EXPECT_TRUE(region.contains(CovarianceFunction::exponential(0.1, std::log(2.0))));
  EXPECT_FALSE(region.contains(CovarianceFunction::exponential(0.26, 0.1)));
  EXPECT_TRUE(region.sufficiency_verified);
  // The exponential pair sits inside the region and passes.
  EXPECT_TRUE(admissible_region(Family::Exponential, 0.3).contains(CovarianceFunction::exponential(0.2, 0.1)));
}

TEST(AdmissibleRegion, TabulatedHasNone) {
  EXPECT_THROW(admissible_region(Family::Tabulated, 0.5), InvalidArgument);
}

TEST(AdmissibleRegion, FamilyMismatchThrows) {
  EXPECT_THROW(admissible_region(Family::Exponential, 0.5).contains(CovarianceFunction::power_law(0.1, 0.7)),
               InvalidArgument);
}

// Random draws from inside each region; membership must imply a passing check.
class RegionSufficiency : public ::testing::Test {
 protected:
  std::mt19937_64 rng{20240611};
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
};

TEST_F(RegionSufficiency, Exponential) {
  for (int i = 0; i < 100; ++i) {
    const double p = uniform(0.05, 0.95);
    const auto cov = CovarianceFunction::exponential(uniform(0.0, 1.0) * p * (1 - p), uniform(0.01, 3.0));
    ASSERT_TRUE(admissible_region(Family::Exponential, p).contains(cov));
    EXPECT_TRUE(check_assumption(cov, p).pass) << "p=" << p << " " << cov.describe();
  }
}

TEST_F(RegionSufficiency, PowerLaw) {
  for (int i = 0; i < 100; ++i) {
    const double p = uniform(0.05, 0.95);
    const double h = uniform(0.05, 0.99);
    const auto cov = CovarianceFunction::power_law(uniform(0.001, 0.999) * power_law_c_bound(p, h), h);
    ASSERT_TRUE(admissible_region(Family::PowerLaw, p).contains(cov));
    EXPECT_TRUE(check_assumption(cov, p).pass) << "p=" << p << " " << cov.describe();
  }
}

TEST_F(RegionSufficiency, TwoExponential) {
  for (int i = 0; i < 100; ++i) {
    const double p = uniform(0.05, 0.95);
    const double budget = std::pow(p, 1.5) - p * p;
    const double r1 = uniform(0.05, 0.95), r2 = uniform(0.05, 0.95);
    const double share = uniform(0.05, 0.95);
    const double total = uniform(0.01, 0.99) * budget;
    const auto cov = CovarianceFunction::two_exponential(share * total / r1, r1, (1 - share) * total / r2, r2);
    ASSERT_TRUE(admissible_region(Family::TwoExponential, p).contains(cov));
    EXPECT_TRUE(check_assumption(cov, p).pass) << "p=" << p << " " << cov.describe();
  }
}

TEST_F(RegionSufficiency, StretchedExponential) {
  // The region is empty for many (p, theta); draw until 100 members are found.
  int found = 0;
  for (int attempt = 0; attempt < 200000 && found < 100; ++attempt) {
    const double p = uniform(0.05, 0.95);
    const double pq = p * (1 - p);
    const double theta = uniform(0.001, 0.5);
    const double c = uniform(0.5, 1.0) * pq * std::exp(-theta);
    const double lo = std::log2(pq / (c * std::exp(-theta)));
    if (lo >= 1.0) continue;
    const auto cov = CovarianceFunction::stretched_exponential(c, theta, uniform(lo, 1.0));
    if (!admissible_region(Family::StretchedExponential, p).contains(cov)) continue;
    ++found;
    EXPECT_TRUE(check_assumption(cov, p).pass) << "p=" << p << " " << cov.describe();
  }
  EXPECT_EQ(found, 100);
}

// Passing models have non-increasing C with non-decreasing ratios, and the
// ratio (p + C*(x + a)) / (p + C*(x)) is non-decreasing in x.
TEST_F(RegionSufficiency, PassingModelsSatisfyRatioProperties) {
  std::vector<std::pair<double, CovarianceFunction>> models;
  for (int i = 0; i < 20; ++i) {
    const double p = uniform(0.1, 0.9);
    models.emplace_back(p, CovarianceFunction::exponential(uniform(0.05, 0.95) * p * (1 - p), uniform(0.05, 2.0)));
    const double h = uniform(0.55, 0.95);
    models.emplace_back(p, CovarianceFunction::power_law(uniform(0.05, 0.95) * power_law_c_bound(p, h), h));
  }
  for (const auto& [p, cov] : models) {
    const auto r = check_assumption(cov, p, 2000);
    ASSERT_TRUE(r.pass) << r.summary();
    const auto c = cov.table(r.horizon);
    for (std::size_t x = 0; x + 2 < c.size(); ++x) {
      EXPECT_LE(c[x + 1], c[x]);
      EXPECT_LE(c[x + 1] / c[x], c[x + 2] / c[x + 1] + 1e-12);
    }
    for (int a = 1; a <= 5; ++a) {
      const auto step = [&](std::size_t lag) { return p + c[lag - 1] / p; };
      for (std::size_t x = 1; x + a + 1 <= c.size() && x < 500; ++x) {
        EXPECT_LE(step(x + a) / step(x), step(x + 1 + a) / step(x + 1) + 1e-12);
      }
    }
  }
}

TEST(ValidityReport, SummaryNamesTheClause) {
  const auto r = check_assumption(CovarianceFunction::exponential(0.2, 0.1), 0.258);
  EXPECT_NE(r.summary().find("C2TooSmall"), std::string::npos);
  EXPECT_EQ(to_string(Clause::C1TooLarge), "C1TooLarge");
}

}  // namespace
}  // namespace gbpf
