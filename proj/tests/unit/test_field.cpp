#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "gbpf/field.hpp"
#include "gbpf/presets.hpp"
#include "gbpf/stats.hpp"
#include "field_support.hpp"
#include "test_support.hpp"

namespace gbpf {
namespace {

using test::all_lags;
using test::random_field;

using Lag = std::vector<std::int64_t>;

FieldSpec field_preset(const char* name) { return *preset(name).field; }

double cov_at(const FieldSpec& f, Lag lag) { return theoretical_field_cov(f, lag)(0, 0); }

TEST(BinaryField, ClosedForms) {
  const auto f = field_preset("binary-field-5.10");
  EXPECT_NEAR(cov_at(f, {1, 1}), 0.06, 1e-12);
  EXPECT_NEAR(cov_at(f, {1, 0}), 0.1125, 1e-12);
  EXPECT_NEAR(cov_at(f, {0, -1}), 0.1125, 1e-12);
  EXPECT_NEAR(cov_at(f, {2, 3}), 0.02, 1e-12);
  EXPECT_NEAR(cov_at(f, {0, 0}), 0.25 * 0.75, 1e-12);
  for (const Lag& lag : {Lag{1, 1}, Lag{1, 0}, Lag{2, 3}, Lag{0, 4}, Lag{-3, 2}}) {
    EXPECT_NEAR(cov_at(f, lag), field_cov_oracle(f, lag)(0, 0), 1e-12);
  }
  const auto pc = plane_coefficients(f);
  EXPECT_NEAR(pc.m0(0), -1.0, 1e-12);
  EXPECT_NEAR(pc.m1(0), 0.5, 1e-12);
  EXPECT_NEAR(pc.m2(0), 0.5, 1e-12);
  EXPECT_NEAR(pc.offset1(0, 0), 0.0625, 1e-12);
}

TEST(GaussField, EqualMeanMagnitudesLeaveOnlyTheProductTerm) {
  const auto f = field_preset("gauss-field-5.11i");
  EXPECT_NEAR(cov_at(f, {1, 1}), 0.0639503630122648, 1e-12);
  EXPECT_NEAR(cov_at(f, {1, 0}), 0.126523588520779, 1e-12);
  EXPECT_NEAR(cov_at(f, {0, 1}), 0.119253413706027, 1e-12);
  EXPECT_NEAR(cov_at(f, {3, 2}), 0.0174285070969085, 1e-12);
  EXPECT_NEAR(cov_at(f, {2, -1}), 0.0428672102783772, 1e-12);
  const auto pc = plane_coefficients(f);
  EXPECT_NEAR(pc.m0(0), 1.98300599989374, 1e-12);
  EXPECT_NEAR(pc.m0(0) * pc.m0(0), 3.93231279561457, 1e-11);
  EXPECT_NEAR(pc.mstar1(0, 0), 0.943755070947497, 1e-12);
  EXPECT_NEAR(pc.mstar2(0, 0), 0.983078198903642, 1e-12);
  // Equal |mu| across cells: only the product term survives off the axes.
  EXPECT_NEAR(pc.m1(0), 0.0, 1e-12);
  EXPECT_NEAR(pc.m2(0), 0.0, 1e-12);
}

TEST(GaussField, CrossTermBalanceRemovesTheProductTerm) {
  const auto f = field_preset("gauss-field-5.11ii");
  EXPECT_NEAR(f.gbp(0).p(), 0.276393202250021, 1e-12);
  EXPECT_NEAR(cov_at(f, {1, 1}), 0.300233606663510, 1e-12);
  EXPECT_NEAR(cov_at(f, {1, 0}), 0.549509779272221, 1e-12);
  EXPECT_NEAR(cov_at(f, {0, 1}), 0.534510596175569, 1e-12);
  EXPECT_NEAR(cov_at(f, {2, 3}), 0.158119369244304, 1e-12);
  const auto pc = plane_coefficients(f);
  EXPECT_LE(std::abs(pc.m0(0)), 1e-9);
  const Lag lag{2, 3};
  const auto d = decompose_field_cov(f, lag);
  for (const auto& t : d.terms) {
    if (t.axes == 3U) EXPECT_LE(std::abs(t.matrix(0, 0)), 1e-9);
    if (t.axes != 3U) EXPECT_NEAR(t.matrix(0, 0), 1.95946692196070, 1e-11);
  }
  const double c1 = f.gbp(0).cov(2), c2 = f.gbp(1).cov(3);
  EXPECT_NEAR(cov_at(f, lag), 1.95946692196070 * (c1 + c2), 1e-11);
  const auto report = check_zero_conditions(f, 0);
  EXPECT_TRUE(report.consistent()) << report.summary();
  const auto cross = std::find_if(report.conditions.begin(), report.conditions.end(),
                                  [](const ZeroCondition& c) { return c.holds && c.verified; });
  EXPECT_NE(cross, report.conditions.end()) << report.summary();
}

TEST(GaussField, UnbalancedFieldValues) {
  const auto f = field_preset("gauss-field-6.3");
  EXPECT_NEAR(cov_at(f, {1, 1}), 0.193393129783960, 1e-12);
  EXPECT_NEAR(cov_at(f, {2, 1}), 0.158935939576168, 1e-12);
  EXPECT_NEAR(cov_at(f, {1, 2}), 0.157487118269023, 1e-12);
  EXPECT_NEAR(cov_at(f, {1, 0}), 0.258861048078113, 1e-12);
  EXPECT_NEAR(cov_at(f, {0, 1}), 0.251576398875692, 1e-12);
  const auto pc = plane_coefficients(f);
  EXPECT_NEAR(pc.m0(0), 0.325573538295639, 1e-12);
  EXPECT_NEAR(pc.m0(0) * pc.m0(0), 0.105998128838342, 1e-12);
  EXPECT_NEAR(cov_at(f, {0, 0}), 1.0, 1e-9);
}

TEST(FieldCov, MatchesEnumerationOracle) {
  std::mt19937_64 gen(1234);
  for (std::size_t axes = 1; axes <= 3; ++axes) {
    std::vector<Lag> lags;
    Lag cur;
    all_lags(axes, cur, lags);
    for (int draw = 0; draw < 20; ++draw) {
      const auto f = random_field(gen, axes, draw % 2 == 0);
      for (const auto& lag : lags) {
        const auto got = theoretical_field_cov(f, lag);
        const auto want = field_cov_oracle(f, lag);
        ASSERT_NEAR((got - want).cwiseAbs().maxCoeff(), 0.0, 1e-9) << "axes " << axes << " draw " << draw;
        const bool any_zero = std::any_of(lag.begin(), lag.end(), [](std::int64_t v) { return v == 0; });
        const auto d = decompose_field_cov(f, lag);
        if (!any_zero) {
          EXPECT_NEAR((structured_field_cov(f, lag) - want).cwiseAbs().maxCoeff(), 0.0, 1e-9);
          EXPECT_EQ(d.zero_axes, 0U);
          for (const auto& t : d.terms) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t.matrix);
            EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-12);
          }
        }
      }
    }
  }
}

TEST(FieldCov, SingleAxisIsTheProcessFormula) {
  std::mt19937_64 gen(9);
  const auto f = random_field(gen, 1, false);
  const auto spec = ProcessSpec(f.marginal(), f.partition().cell(1), f.gbp(0), 10);
  for (std::int64_t k = 1; k <= 5; ++k) {
    const Lag lag{k};
    EXPECT_NEAR(cov_at(f, lag), theoretical_cov(spec)(0, 0) * f.gbp(0).cov(k), 1e-10);
  }
}

TEST(FieldCov, TwoComponentProductMarginal) {
  const double p1 = 0.4, p2 = 0.7;
  const auto u = Distribution1D::uniform(0.0, 1.0);
  const auto m = Marginal::product({u, u});
  const Interval lo1{0.0, p1}, hi1{p1, 1.0}, lo2{0.0, p2}, hi2{p2, 1.0};
  // Cell index bit 0 is l1, bit 1 is l2.
  std::vector<SupportSet> cells{SupportSet::box({hi1, hi2}), SupportSet::box({lo1, hi2}), SupportSet::box({hi1, lo2}),
                                SupportSet::box({lo1, lo2})};
  const FieldSpec f(Partition::from_cells(m, {p1, p2}, cells),
                    {GbpModel::checked(p1, CovarianceFunction::exponential(0.1, 0.3)),
                     GbpModel::checked(p2, CovarianceFunction::exponential(0.1, 0.4))},
                    {10, 10});
  for (const Lag& lag : {Lag{1, 2}, Lag{0, 3}, Lag{2, 0}, Lag{-1, 1}}) {
    const auto got = theoretical_field_cov(f, lag);
    EXPECT_NEAR((got - field_cov_oracle(f, lag)).cwiseAbs().maxCoeff(), 0.0, 1e-10);
    // Component k depends on axis k only.
    EXPECT_NEAR(got(0, 1), 0.0, 1e-12);
    // A shared latent bit contributes its variance p (1 - p).
    const double c1 = lag[0] == 0 ? p1 * (1 - p1) : f.gbp(0).cov(std::abs(lag[0]));
    const double c2 = lag[1] == 0 ? p2 * (1 - p2) : f.gbp(1).cov(std::abs(lag[1]));
    EXPECT_NEAR(got(0, 0), 0.25 * c1, 1e-12);
    EXPECT_NEAR(got(1, 1), 0.25 * c2, 1e-12);
  }
}

TEST(ZeroConditions, BalancedPartitionIsUncorrelated) {
  const auto m = Marginal::univariate(Distribution1D::exponential(1.0));
  const auto part = build_partition(m, {0.4, 0.5}, BalancedNested{{1, 2}});
  const FieldSpec f(part,
                    {GbpModel::checked(0.4, CovarianceFunction::exponential(0.2, 0.4)),
                     GbpModel::checked(0.5, CovarianceFunction::exponential(0.2, 0.5))},
                    {60, 60});
  for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(part.conditional_mean(c)(0), 1.0, 1e-6);
  Lag cur;
  std::vector<Lag> lags;
  all_lags(2, cur, lags);
  for (const auto& lag : lags) EXPECT_LE(std::abs(cov_at(f, lag)), 1e-9) << lag[0] << "," << lag[1];
  const auto report = check_zero_conditions(f, 0);
  EXPECT_TRUE(report.consistent()) << report.summary();
  EXPECT_TRUE(std::any_of(report.conditions.begin(), report.conditions.end(), [](const ZeroCondition& c) {
    return c.axes.size() == 2 && c.holds && c.verified;
  })) << report.summary();

  // Empirical lag covariances around the known mean, 20 replicates.
  const auto tables = field_gap_tables(f);
  std::vector<std::vector<double>> est(3);
  const std::vector<Lag> probe{{1, 1}, {1, 0}, {0, 1}};
  for (std::uint64_t r = 0; r < 20; ++r) {
    const auto s = simulate_field(f, tables, derive_seed(8, StreamTag::Replicate, r));
    for (std::size_t i = 0; i < probe.size(); ++i) {
      double acc = 0.0;
      std::size_t pairs = 0;
      for (std::int64_t a = 0; a + probe[i][0] < 60; ++a) {
        for (std::int64_t b = 0; b + probe[i][1] < 60; ++b) {
          const Lag t{a, b}, u{a + probe[i][0], b + probe[i][1]};
          acc += (s.at(t) - 1.0) * (s.at(u) - 1.0);
          ++pairs;
        }
      }
      est[i].push_back(acc / static_cast<double>(pairs));
    }
  }
  for (const auto& e : est) {
    const auto ms = test::mean_se(e);
    EXPECT_NEAR(ms.mean, 0.0, 4 * ms.se);
  }
}

TEST(ZeroConditions, SymmetricPartitionHasZeroMeans) {
  const auto m = Marginal::univariate(Distribution1D::normal(0.0, 1.0));
  const auto part = build_partition(m, {0.3, 0.6}, SymmetricNested{0.0, {1, 2}});
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_NEAR(part.means()[c](0), 0.0, 1e-9);
    EXPECT_NEAR(part.masses()[c], cell_probability({0.3, 0.6}, c), 1e-8);
  }
  const FieldSpec f(part,
                    {GbpModel::checked(0.3, CovarianceFunction::exponential(0.1, 0.4)),
                     GbpModel::checked(0.6, CovarianceFunction::exponential(0.1, 0.5))},
                    {10, 10});
  EXPECT_LE(std::abs(cov_at(f, {1, 2})), 1e-9);
  EXPECT_LE(std::abs(cov_at(f, {0, 2})), 1e-9);
}

TEST(ZeroConditions, UnbalancedReportsNothingForced) {
  const auto report = check_zero_conditions(field_preset("gauss-field-6.3"), 0);
  EXPECT_TRUE(report.consistent());
  EXPECT_TRUE(std::none_of(report.conditions.begin(), report.conditions.end(),
                           [](const ZeroCondition& c) { return c.holds; }));
}

TEST(Partition, RejectsMassMismatchAndOverlap) {
  const auto m = Marginal::univariate(Distribution1D::uniform(0.0, 1.0));
  EXPECT_THROW(Partition::from_cells(m, {0.5}, {IntervalUnion{{0.0, 0.4}}, IntervalUnion{{0.4, 1.0}}}),
               InvalidArgument);
  EXPECT_THROW(Partition::from_cells(m, {0.5, 0.5},
                                     {IntervalUnion{{0.0, 0.25}}, IntervalUnion{{0.25, 0.5}},
                                      IntervalUnion{{0.4, 0.65}}, IntervalUnion{{0.75, 1.0}}}),
               InvalidArgument);
}

TEST(Partition, GaussFieldCellMasses) {
  const auto f = field_preset("gauss-field-6.3");
  const auto& masses = f.partition().masses();
  EXPECT_NEAR(masses[0], 0.3, 1e-8);
  EXPECT_NEAR(masses[1], 0.2, 1e-8);
  EXPECT_NEAR(masses[2], 0.3, 1e-8);
  EXPECT_NEAR(masses[3], 0.2, 1e-8);
}

TEST(SimulateField, SitesFollowTheirCells) {
  for (const char* name : {"gauss-field-6.3", "binary-field-5.10", "gauss-field-5.11ii"}) {
    const auto f = field_preset(name).with_extents({40, 30});
    const auto s = simulate_field(f, 5);
    ASSERT_EQ(s.values.size(), 1200U);
    for (std::int64_t a = 0; a < 40; ++a) {
      for (std::int64_t b = 0; b < 30; ++b) {
        const Lag t{a, b};
        const std::size_t cell = s.latent[0].bits[static_cast<std::size_t>(a)] |
                                 (std::size_t{s.latent[1].bits[static_cast<std::size_t>(b)]} << 1);
        ASSERT_TRUE(f.partition().cell(cell).contains(s.at(t))) << name << " " << a << "," << b;
      }
    }
  }
}

TEST(SimulateField, IndependentOfThreadCount) {
  const auto f = field_preset("gauss-field-6.3");
  const auto tables = field_gap_tables(f);
  EXPECT_EQ(simulate_field(f, tables, 77, {1}).values, simulate_field(f, tables, 77, {4}).values);
}

TEST(SimulateField, BudgetIsEnforced) {
  EXPECT_THROW(field_preset("gauss-field-6.3").with_extents({200000, 200000}), SizeGuardExceeded);
}

// The Gaussian field has mean zero, so lag products need no centring.
TEST(SimulateField, GaussFieldCorrelogramAndStationarity) {
  const auto f = field_preset("gauss-field-6.3");
  const auto tables = field_gap_tables(f);
  const std::vector<Lag> probe{{1, 1}, {2, 1}, {1, 2}, {1, 0}, {0, 1}};
  std::vector<std::vector<double>> left(probe.size()), right(probe.size()), diff(probe.size());
  for (std::uint64_t r = 0; r < 20; ++r) {
    const auto s = simulate_field(f, tables, derive_seed(63, StreamTag::Replicate, r));
    for (std::size_t i = 0; i < probe.size(); ++i) {
      double acc[2] = {0.0, 0.0};
      std::size_t n[2] = {0, 0};
      for (std::int64_t a = 0; a + probe[i][0] < 100; ++a) {
        for (std::int64_t b = 0; b + probe[i][1] < 100; ++b) {
          const Lag t{a, b}, u{a + probe[i][0], b + probe[i][1]};
          const int half = a < 50 ? 0 : 1;
          acc[half] += s.at(t) * s.at(u);
          ++n[half];
        }
      }
      left[i].push_back(acc[0] / static_cast<double>(n[0]));
      right[i].push_back(acc[1] / static_cast<double>(n[1]));
      diff[i].push_back(left[i].back() - right[i].back());
    }
  }
  for (std::size_t i = 0; i < probe.size(); ++i) {
    std::vector<double> both(left[i]);
    for (std::size_t r = 0; r < both.size(); ++r) both[r] = 0.5 * (left[i][r] + right[i][r]);
    const auto ms = test::mean_se(both);
    EXPECT_NEAR(ms.mean, cov_at(f, probe[i]), 4 * ms.se) << probe[i][0] << "," << probe[i][1];
    const auto d = test::mean_se(diff[i]);
    EXPECT_NEAR(d.mean, 0.0, 4 * d.se) << probe[i][0] << "," << probe[i][1];
  }
}

TEST(SimulateField, BinaryFieldCorrelogram) {
  const auto f = field_preset("binary-field-5.10");
  const auto tables = field_gap_tables(f);
  std::vector<double> e11, e10;
  for (std::uint64_t r = 0; r < 20; ++r) {
    const auto s = simulate_field(f, tables, derive_seed(510, StreamTag::Replicate, r));
    const Lag w{1, 1};
    const auto cg = field_correlogram(s, w);
    e11.push_back(cg.at(Lag{1, 1}));
    e10.push_back(cg.at(Lag{1, 0}));
  }
  const auto m11 = test::mean_se(e11), m10 = test::mean_se(e10);
  EXPECT_NEAR(m11.mean, 0.06, 4 * m11.se);
  EXPECT_NEAR(m10.mean, 0.1125, 4 * m10.se);
}

TEST(SimulateField, MarginalAtIndependentSites) {
  const auto f = field_preset("gauss-field-6.3").with_extents({8, 8});
  const auto tables = field_gap_tables(f);
  std::vector<double> x;
  for (std::uint64_t r = 0; r < 20000; ++r) x.push_back(simulate_field(f, tables, r).values.back());
  const auto ks = ks_distance(x, [](double v) { return 0.5 * std::erfc(-v / std::sqrt(2.0)); });
  EXPECT_TRUE(ks.passes(0.01)) << ks.statistic;
}

std::complex<double> normal_cf(double t) { return std::exp(-0.5 * t * t); }

TEST(FieldJointCf, Examples) {
  const auto f = field_preset("gauss-field-6.3");
  const std::vector<std::vector<double>> one{{0.7}};
  EXPECT_NEAR(std::abs(field_joint_cf(f, one, {{3, 4}}) - normal_cf(0.7)), 0.0, 1e-9);

  const std::vector<std::vector<std::int64_t>> sites{{0, 0}, {1, 2}};
  const std::vector<std::vector<double>> th{{0.5}, {-0.8}};
  const auto exact = field_joint_cf(f, th, sites);
  const auto small = f.with_extents({2, 3});
  const auto tables = field_gap_tables(small);
  std::complex<double> acc = 0.0;
  const int reps = 50000;
  for (int r = 0; r < reps; ++r) {
    const auto s = simulate_field(small, tables, derive_seed(12, StreamTag::Replicate, r));
    acc += std::exp(std::complex<double>(0.0, 0.5 * s.at(Lag{0, 0}) - 0.8 * s.at(Lag{1, 2})));
  }
  acc /= static_cast<double>(reps);
  EXPECT_LT(std::abs(acc - exact), 5.0 / std::sqrt(reps));
  // Two sites: the covariance shows up as a departure from the product.
  EXPECT_GT(std::abs(exact - normal_cf(0.5) * normal_cf(0.8)), 1e-3);
}

TEST(FieldJointCf, NearIndependentFactorises) {
  const auto base = field_preset("gauss-field-6.3");
  const auto tiny = CovarianceFunction::tabulated({1e-13, 9e-14});
  const FieldSpec f(base.partition(), {GbpModel::checked(0.4, tiny), GbpModel::checked(0.5, tiny)}, {10, 10});
  const std::vector<std::vector<double>> th{{0.5}, {-0.8}, {0.3}};
  const auto got = field_joint_cf(f, th, {{0, 0}, {1, 2}, {3, 4}});
  EXPECT_NEAR(std::abs(got - normal_cf(0.5) * normal_cf(0.8) * normal_cf(0.3)), 0.0, 1e-9);
}

TEST(FieldJointCf, SizeGuard) {
  const auto f = field_preset("gauss-field-6.3");
  std::vector<std::vector<std::int64_t>> sites;
  std::vector<std::vector<double>> th;
  for (std::int64_t i = 0; i < 7; ++i) {
    sites.push_back({i, i});
    th.push_back({0.1});
  }
  EXPECT_THROW(field_joint_cf(f, th, sites), SizeGuardExceeded);
}

}  // namespace
}  // namespace gbpf
