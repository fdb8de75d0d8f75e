#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "gbpf/errors.hpp"
#include "gbpf/marginal.hpp"
#include "gbpf/partition.hpp"
#include "gbpf/stats.hpp"
#include "test_support.hpp"

namespace gbpf {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

TEST(Distribution, ExponentialBasics) {
  const auto d = Distribution1D::exponential(2.0);
  EXPECT_NEAR(d.cdf(1.0), 1.0 - std::exp(-2.0), 1e-15);
  EXPECT_NEAR(d.quantile(d.cdf(0.37)), 0.37, 1e-12);
  EXPECT_NEAR(d.sf(3.0), std::exp(-6.0), 1e-18);
  EXPECT_NEAR(d.quantile_upper(d.sf(3.0)), 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(d.mean(), 0.5);
  EXPECT_DOUBLE_EQ(d.variance(), 0.25);
  EXPECT_FALSE(d.is_discrete());
}

TEST(Distribution, DiscreteLaws) {
  const auto b = Distribution1D::binomial(20, 0.4);
  EXPECT_TRUE(b.is_discrete());
  EXPECT_NEAR(b.cdf(7), 0.41589293755753562, 1e-13);
  EXPECT_EQ(b.first(), 0);
  EXPECT_EQ(b.last(), 20);
  EXPECT_NEAR(b.mean(), 8.0, 1e-12);
  const auto d = Distribution1D::discrete("die", 1, {1 / 6.0, 1 / 6.0, 1 / 6.0, 1 / 6.0, 1 / 6.0, 1 / 6.0});
  EXPECT_NEAR(d.mean(), 3.5, 1e-14);
  EXPECT_NEAR(d.pdf(3), 1 / 6.0, 1e-15);
  EXPECT_DOUBLE_EQ(d.pdf(2.5), 0.0);
  EXPECT_THROW(Distribution1D::discrete("bad", 0, {0.5, 0.6}), InvalidArgument);
  EXPECT_THROW(Distribution1D::uniform(1.0, 0.0), InvalidArgument);
}

TEST(Distribution, UserContinuousLawIsValidated) {
  const auto tri = Distribution1D::continuous(
      "triangle", [](double x) { return 2.0 * x; }, [](double x) { return x * x; },
      [](double u) { return std::sqrt(u); }, 0.0, 1.0);
  EXPECT_NEAR(tri.mean(), 2.0 / 3.0, 1e-9);
  EXPECT_THROW(Distribution1D::continuous(
                   "bad", [](double) { return 2.0; }, [](double x) { return x; }, [](double u) { return u; }, 0.0,
                   1.0),
               InvalidArgument);
}

TEST(SetMass, Examples) {
  const auto e = Marginal::univariate(Distribution1D::exponential(1.0));
  const double a = -std::log(0.3);
  EXPECT_NEAR(set_mass(e, IntervalUnion{{a, kInf}}), 0.3, 1e-12);
  const auto b = Marginal::univariate(Distribution1D::binomial(20, 0.4));
  EXPECT_NEAR(set_mass(b, IntegerSet::range(0, 7)), 0.41589293755753562, 1e-13);
  const auto u = Marginal::univariate(Distribution1D::uniform(0.0, 1.0));
  EXPECT_NEAR(set_mass(u, IntervalUnion{{0.0, 0.37}}), 0.37, 1e-14);
  EXPECT_NEAR(set_mass(u, IntervalUnion{{0.1, 0.2}, {0.5, 0.9}}), 0.5, 1e-14);
}

TEST(SetMean, Examples) {
  const double a = -std::log(0.3);
  EXPECT_NEAR(set_mean(Marginal::univariate(Distribution1D::exponential(1.0)), IntervalUnion{{a, kInf}})(0),
              0.661191841297781, 1e-10);
  const double z = 0.524400512708041;
  EXPECT_NEAR(set_mean(Marginal::univariate(Distribution1D::normal(0.0, 1.0)), IntervalUnion{{z, kInf}})(0),
              0.347692614200074, 1e-10);
  EXPECT_NEAR(set_mean(Marginal::univariate(Distribution1D::uniform(0.0, 1.0)), IntervalUnion{{0.0, 0.5}})(0), 0.125,
              1e-14);
  EXPECT_NEAR(set_mean(Marginal::univariate(Distribution1D::binomial(20, 0.4)), IntegerSet::range(0, 7))(0),
              2.4645557192377762, 1e-12);
}

TEST(SetMean, ProductBoxes) {
  const auto m = Marginal::product({Distribution1D::uniform(0.0, 1.0), Distribution1D::uniform(0.0, 1.0)});
  const auto box = SupportSet::box({{0.0, 0.5}, {0.0, 0.4}});
  EXPECT_NEAR(set_mass(m, box), 0.2, 1e-13);
  const auto mean = set_mean(m, box);
  EXPECT_NEAR(mean(0), 0.125 * 0.4, 1e-13);
  EXPECT_NEAR(mean(1), 0.5 * 0.08, 1e-13);
  const auto comp = complement(m, box);
  EXPECT_NEAR(set_mass(m, comp), 0.8, 1e-13);
  EXPECT_NEAR(set_mean(m, comp)(0), 0.5 - 0.05, 1e-13);
}

TEST(SetCf, NormalWholeLine) {
  const auto m = Marginal::univariate(Distribution1D::normal(0.0, 1.0));
  const double theta = 0.7;
  const auto cf = set_cf(m, IntervalUnion::real_line(), std::span<const double>(&theta, 1));
  EXPECT_NEAR(cf.real(), std::exp(-0.245), 1e-10);
  EXPECT_NEAR(cf.imag(), 0.0, 1e-10);
}

TEST(SetMass, GaussianPredicateCarriesAnError) {
  Eigen::Matrix2d cov;
  cov << 1.0, 0.5, 0.5, 1.0;
  const auto m = Marginal::gaussian(Eigen::Vector2d::Zero(), cov);
  Predicate pred;
  pred.test = [](std::span<const double> x) { return x[0] + x[1] > 0.0; };
  pred.bounding_box = {{-kInf, kInf}, {-kInf, kInf}};
  pred.samples = 200000;
  const auto est = integrate_with_error(m, pred, Integrand::mass());
  EXPECT_GT(est.se, 0.0);
  EXPECT_NEAR(est.value.real(), 0.5, 4 * est.se);
}

TEST(Complement, DiscreteUsesIntegerSets) {
  const auto b = Marginal::univariate(Distribution1D::binomial(20, 0.4));
  const auto c = complement(b, IntervalUnion{{-kInf, 7.5}});
  ASSERT_NE(c.get<IntegerSet>(), nullptr);
  EXPECT_EQ(c.get<IntegerSet>()->values().front(), 8);
  EXPECT_NEAR(set_mass(b, c), 1.0 - 0.41589293755753562, 1e-13);
}

// KS against the renormalised CDF for 20 seeds, 10^4 draws each.
TEST(RestrictedSample, KsPasses) {
  const auto m = Marginal::univariate(Distribution1D::normal(0.0, 1.0));
  const IntervalUnion s{{-1.0, -0.2}, {0.5, 1.5}};
  const double mass = normal_cdf(-0.2) - normal_cdf(-1.0) + normal_cdf(1.5) - normal_cdf(0.5);
  const auto cdf = [&](double x) {
    double v = 0.0;
    for (const auto& iv : s.parts()) v += std::max(0.0, normal_cdf(std::min(x, iv.hi)) - normal_cdf(iv.lo));
    return v / mass;
  };
  const RestrictedSampler sampler(m, s);
  EXPECT_TRUE(sampler.exact());
  EXPECT_NEAR(sampler.mass(), mass, 1e-12);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    RandomStream rng(seed);
    std::vector<double> x(10000);
    for (auto& v : x) sampler.draw(rng, std::span<double>(&v, 1));
    for (const double v : x) ASSERT_TRUE(s.contains(v));
    EXPECT_TRUE(ks_distance(x, cdf).passes(0.01)) << "seed " << seed;
  }
}

TEST(RestrictedSample, ExponentialTailMean) {
  const double a = -std::log(0.3);
  const auto m = Marginal::univariate(Distribution1D::exponential(1.0));
  RandomStream rng(3);
  std::vector<double> x(100000);
  for (auto& v : x) v = restricted_sample(m, IntervalUnion{{a, kInf}}, rng)(0);
  const auto ms = test::mean_se(x);
  EXPECT_NEAR(ms.mean, a + 1.0, 4 * ms.se);
}

TEST(RestrictedSample, UniformWindowKs) {
  const auto m = Marginal::univariate(Distribution1D::uniform(0.0, 1.0));
  RandomStream rng(11);
  std::vector<double> x(100000);
  for (auto& v : x) v = restricted_sample(m, IntervalUnion{{0.0, 0.3}}, rng)(0);
  const auto ks = ks_distance(x, [](double v) { return std::clamp(v / 0.3, 0.0, 1.0); });
  EXPECT_LT(ks.statistic, 1.63 / std::sqrt(1e5));
}

TEST(RestrictedSample, BinomialStaysInTheSet) {
  const auto m = Marginal::univariate(Distribution1D::binomial(20, 0.4));
  const auto s = IntegerSet::range(0, 7);
  RandomStream rng(5);
  std::vector<double> x(20000);
  for (auto& v : x) {
    v = restricted_sample(m, s, rng)(0);
    ASSERT_TRUE(s.contains(v));
  }
  EXPECT_NEAR(test::mean_se(x).mean, 2.4645557192377762 / 0.41589293755753562, 4 * test::mean_se(x).se);
}

TEST(RestrictedSample, PredicateRejectionCap) {
  const auto m = Marginal::univariate(Distribution1D::normal(0.0, 1.0));
  Predicate far;
  far.test = [](std::span<const double> x) { return x[0] > 40.0; };
  far.bounding_box = {{-kInf, kInf}};
  far.samples = 1000;
  RandomStream rng(1);
  EXPECT_THROW(restricted_sample(m, far, rng), Error);
}

TEST(CoupledPair, WeightsAndCovariance) {
  const double a = -std::log(0.3);
  const auto m = Marginal::coupled_pair(Distribution1D::exponential(1.0), IntervalUnion{{a, kInf}}, 0.12);
  EXPECT_NEAR(m.p0(), 0.3, 1e-12);
  EXPECT_NEAR(m.pair_weight(1, 1), 0.09 + 0.12, 1e-12);
  EXPECT_NEAR(m.pair_weight(0, 0), 0.49 + 0.12, 1e-12);
  EXPECT_NEAR(m.pair_weight(1, 0), 0.21 - 0.12, 1e-12);
  EXPECT_NEAR(m.covariance()(0, 1), 0.354991962503623, 1e-9);
  EXPECT_NEAR(m.covariance()(0, 0), 1.0, 1e-9);

  RandomStream rng(21);
  std::vector<double> prod(100000), x1(100000), x2(100000);
  for (std::size_t i = 0; i < prod.size(); ++i) {
    const auto v = coupled_pair_sample(m, rng);
    x1[i] = v(0);
    x2[i] = v(1);
    prod[i] = (v(0) - 1.0) * (v(1) - 1.0);
  }
  const auto ms = test::mean_se(prod);
  EXPECT_NEAR(ms.mean, 0.354991962503623, 4 * ms.se);
  const auto cdf = [](double v) { return v <= 0.0 ? 0.0 : 1.0 - std::exp(-v); };
  EXPECT_LT(ks_distance(x1, cdf).statistic, 1.63 / std::sqrt(1e5));
  EXPECT_LT(ks_distance(x2, cdf).statistic, 1.63 / std::sqrt(1e5));
}

TEST(CoupledPair, ZeroCouplingIsIndependent) {
  const auto m =
      Marginal::coupled_pair(Distribution1D::normal(0.0, 1.0), IntervalUnion{{0.0, kInf}}, 0.0);
  RandomStream rng(4);
  std::vector<double> prod(100000);
  for (auto& v : prod) {
    const auto x = coupled_pair_sample(m, rng);
    v = x(0) * x(1);
  }
  const auto ms = test::mean_se(prod);
  EXPECT_NEAR(ms.mean, 0.0, 4 * ms.se);
}

TEST(CoupledPair, NegativeWeightRejected) {
  EXPECT_THROW(Marginal::coupled_pair(Distribution1D::uniform(0.0, 1.0), IntervalUnion{{0.0, 0.3}}, 0.25),
               InvalidArgument);
}

TEST(GaussianMarginal, MomentsAndSampling) {
  Eigen::Vector2d mu(1.0, -2.0);
  Eigen::Matrix2d cov;
  cov << 2.0, 0.6, 0.6, 1.0;
  const auto m = Marginal::gaussian(mu, cov);
  EXPECT_EQ(m.dimension(), 2U);
  EXPECT_NEAR(integrate_all(m, Integrand::moment(2, 1, 1)).real(), -2.0, 1e-8);
  RandomStream rng(8);
  std::vector<double> cross(50000);
  for (auto& v : cross) {
    const auto x = m.sample(rng);
    v = (x(0) - 1.0) * (x(1) + 2.0);
  }
  EXPECT_NEAR(test::mean_se(cross).mean, 0.6, 4 * test::mean_se(cross).se);
}

// Closed forms for the window mass and first moment, independent of the library.
struct Oracle {
  std::function<double(double)> cdf;
  std::function<double(double)> partial_mean;  // integral of x f from -inf to x
};

double window_integral(const Oracle& o, const IntervalUnion& s, bool moment) {
  double v = 0.0;
  for (const auto& iv : s.parts()) {
    v += moment ? o.partial_mean(iv.hi) - o.partial_mean(iv.lo) : o.cdf(iv.hi) - o.cdf(iv.lo);
  }
  return v;
}

TEST(BalancedSubset, Examples) {
  const auto u = Marginal::univariate(Distribution1D::uniform(0.0, 1.0));
  const auto s = find_balanced_subset(u, IntervalUnion{{0.0, 1.0}}, 0.5);
  ASSERT_NE(s.get<IntervalUnion>(), nullptr);
  EXPECT_NEAR(s.get<IntervalUnion>()->parts().front().lo, 0.25, 1e-8);
  EXPECT_NEAR(s.get<IntervalUnion>()->parts().back().hi, 0.75, 1e-8);

  const auto n = Marginal::univariate(Distribution1D::normal(0.0, 1.0));
  const auto t = find_balanced_subset(n, IntervalUnion::real_line(), 0.5);
  EXPECT_NEAR(set_mass(n, t), 0.5, 1e-8);
  EXPECT_NEAR(set_mean(n, t)(0), 0.0, 1e-6);
  EXPECT_NEAR(t.get<IntervalUnion>()->parts().back().hi, 0.674489750196082, 1e-6);
}

TEST(BalancedSubset, RandomDrawsAgainstClosedForms) {
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Oracle uniform{[](double x) { return std::clamp(x, 0.0, 1.0); },
                       [](double x) { return 0.5 * std::pow(std::clamp(x, 0.0, 1.0), 2); }};
  const Oracle expo{[](double x) { return x <= 0 ? 0.0 : 1.0 - std::exp(-x); },
                    [](double x) { return x <= 0 ? 0.0 : (std::isinf(x) ? 1.0 : 1.0 - (x + 1.0) * std::exp(-x)); }};
  const Oracle normal{normal_cdf, [](double x) { return std::isinf(x) ? 0.0 : -normal_pdf(x); }};
  for (int i = 0; i < 50; ++i) {
    const double p = 0.05 + 0.9 * unit(gen);
    Marginal m = Marginal::univariate(Distribution1D::uniform(0.0, 1.0));
    IntervalUnion a;
    const Oracle* o = &uniform;
    switch (i % 3) {
      case 0: {
        const double lo = 0.5 * unit(gen);
        a = IntervalUnion{{lo, lo + 0.2 + 0.3 * unit(gen)}};
        break;
      }
      case 1:
        m = Marginal::univariate(Distribution1D::exponential(1.0));
        a = IntervalUnion{{unit(gen), kInf}};
        o = &expo;
        break;
      default:
        m = Marginal::univariate(Distribution1D::normal(0.0, 1.0));
        a = IntervalUnion{{-2.0 * unit(gen), 2.0 * unit(gen) + 0.1}};
        o = &normal;
    }
    const auto s = find_balanced_subset(m, a, p);
    const auto* iu = s.get<IntervalUnion>();
    ASSERT_NE(iu, nullptr);
    EXPECT_TRUE(iu->intersect(a) == *iu);
    EXPECT_NEAR(window_integral(*o, *iu, false), p * window_integral(*o, a, false), 1e-8) << i;
    EXPECT_NEAR(window_integral(*o, *iu, true), p * window_integral(*o, a, true), 1e-6) << i;
  }
}

TEST(BalancedSubset, DiscreteWithoutAFitThrows) {
  const auto b = Marginal::univariate(Distribution1D::binomial(4, 0.5));
  EXPECT_THROW(find_balanced_subset(b, IntegerSet::range(0, 4), 0.37), NotRepresentable);
}

}  // namespace
}  // namespace gbpf
