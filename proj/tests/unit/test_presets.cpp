#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "gbpf/errors.hpp"
#include "gbpf/presets.hpp"

namespace gbpf {
namespace {

TEST(Presets, NamesAndKinds) {
  const auto names = preset_names();
  EXPECT_EQ(names.size(), 13U);
  EXPECT_TRUE(std::is_sorted(names.begin(), names.end()));
  for (const auto& name : names) {
    const auto p = preset(name);
    EXPECT_EQ(p.name, name);
    EXPECT_FALSE(p.description.empty()) << name;
    if (p.kind == PresetKind::Process) {
      ASSERT_TRUE(p.process.has_value()) << name;
      EXPECT_EQ(p.process->length(), kPresetLength);
      EXPECT_EQ(p.process->gbp().validity().pass, !p.unchecked) << name;
    } else {
      ASSERT_TRUE(p.field.has_value()) << name;
      EXPECT_EQ(p.field->extents(), (std::vector<std::int64_t>{kPresetExtent, kPresetExtent}));
      for (const auto& g : p.field->gbps()) EXPECT_TRUE(g.validity().pass) << name;
    }
  }
  EXPECT_THROW(preset("no-such-preset"), InvalidArgument);
}

TEST(Presets, LongRangeCovariances) {
  const auto e = *preset("exp-lrd-6.1").process;
  const auto g = *preset("gauss-lrd-6.1").process;
  EXPECT_NEAR(e.gbp().p(), 0.3, 1e-12);
  for (std::int64_t k : {1, 5, 10, 100}) {
    const double decay = std::pow(static_cast<double>(k), -0.6);
    EXPECT_NEAR(lag_covariance(e, k)(0, 0) / decay, 0.355, 5e-4) << k;
    EXPECT_NEAR(lag_covariance(g, k)(0, 0) / decay, 0.329, 5e-4) << k;
  }
}

TEST(Presets, BivariateGaussianIsRejected) {
  const auto p = preset("bivariate-gauss-6.2");
  EXPECT_TRUE(p.unchecked);
  EXPECT_TRUE(p.process->gbp().validity().violates(Clause::C2TooSmall));
  EXPECT_NEAR(p.process->gbp().p(), 0.25770861390488, 1e-12);
  // Components move in opposite directions.
  const auto c = lag_covariance(*p.process, 1);
  EXPECT_NEAR(c(0, 1), -c(0, 0), 1e-12);
}

TEST(Presets, ExactLatentProbabilities) {
  EXPECT_NEAR(preset("bivariate-exp-6.2").process->gbp().p(), 0.338571428571429, 1e-12);
  EXPECT_NEAR(preset("bivariate-binomial-6.2").process->gbp().p(), 0.435839806566225, 1e-12);
  EXPECT_NEAR(preset("gauss-field-5.11ii").field->gbp(0).p(), (5.0 - std::sqrt(5.0)) / 10.0, 1e-12);
  EXPECT_NEAR(preset("uniform-5.9").process->gbp().p(), 0.3, 1e-12);
  EXPECT_NEAR(lag_covariance(*preset("uniform-5.9").process, 1)(0, 0), 0.03, 1e-12);
}

}  // namespace
}  // namespace gbpf
