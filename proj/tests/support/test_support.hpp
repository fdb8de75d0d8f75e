#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "gbpf/covariance.hpp"
#include "gbpf/gbp.hpp"

namespace gbpf::test {

// p = 0.5, C(x) = 0.1 * 2^-x. Small enough for hand expansion.
inline GbpModel dyadic_model() {
  return GbpModel::checked(0.5, CovarianceFunction::exponential(0.1, std::log(2.0)));
}

inline GbpModel dyadic_tabulated() {
  std::vector<double> v;
  for (int k = 1; k <= 10; ++k) v.push_back(0.1 * std::pow(2.0, -k));
  return GbpModel::checked(0.5, CovarianceFunction::tabulated(v));
}

// Sample mean and standard error of the mean.
struct MeanSe {
  double mean;
  double se;
};

inline MeanSe mean_se(const std::vector<double>& x) {
  double m = 0.0;
  for (const double v : x) m += v;
  m /= static_cast<double>(x.size());
  double ss = 0.0;
  for (const double v : x) ss += (v - m) * (v - m);
  return {m, std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()))};
}

}  // namespace gbpf::test
