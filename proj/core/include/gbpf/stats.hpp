#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gbpf/field.hpp"

namespace gbpf {

enum class Normalization {
  Biased,     // divide by n
  PairCount,  // divide by the number of pairs, n - k
};

// Lagged covariance matrices of one n x d series (row-major), lags 0..max_lag:
// out[k](a, b) = sum_t (x_t,a - mean_a)(x_{t+k},b - mean_b) / norm.
struct SeriesCovariance {
  std::vector<Eigen::MatrixXd> lags;
  // Components with zero sample variance.
  std::vector<std::size_t> degenerate;
};

// Requires max_lag < n / 4.
SeriesCovariance autocovariance(std::span<const double> values, std::size_t n, std::size_t d, std::size_t max_lag,
                                Normalization norm = Normalization::Biased);
std::vector<double> autocovariance(std::span<const double> x, std::size_t max_lag,
                                   Normalization norm = Normalization::Biased);

// sum_t (a_t - mean a)(b_{t+k} - mean b) / norm for k = 0..max_lag.
std::vector<double> cross_covariance(std::span<const double> a, std::span<const double> b, std::size_t max_lag,
                                     Normalization norm = Normalization::Biased);

// Replicate mean and standard error (sample standard deviation / sqrt(R)) per lag.
struct LagStatistics {
  std::vector<std::int64_t> lags;
  std::vector<Eigen::MatrixXd> estimates;
  std::vector<Eigen::MatrixXd> se;
  std::size_t n = 0;
  std::size_t replicates = 0;

  double estimate(std::size_t i, std::size_t a = 0, std::size_t b = 0) const;
  double standard_error(std::size_t i, std::size_t a = 0, std::size_t b = 0) const;
};

// runs[r][i] is replicate r's estimate at lags[i].
LagStatistics replicate_statistics(const std::vector<std::vector<Eigen::MatrixXd>>& runs,
                                   std::vector<std::int64_t> lags, std::size_t n);
LagStatistics replicate_statistics(const std::vector<std::vector<double>>& runs, std::vector<std::int64_t> lags,
                                   std::size_t n);

// sum over pairs (t, t') with t - t' = s of (X(t) - mean)(X(t') - mean) / |N_s|
// for every s with |s_k| <= window[k].
class Correlogram {
 public:
  Correlogram(std::vector<std::int64_t> window, std::vector<double> values, std::vector<std::uint64_t> pairs);

  const std::vector<std::int64_t>& window() const noexcept { return window_; }
  std::size_t size() const noexcept { return values_.size(); }
  double at(std::span<const std::int64_t> lag) const;
  std::uint64_t pairs(std::span<const std::int64_t> lag) const;
  // Lag vector of entry i, first axis slowest.
  std::vector<std::int64_t> lag(std::size_t i) const;
  double value(std::size_t i) const { return values_.at(i); }
  std::uint64_t pair_count(std::size_t i) const { return pairs_.at(i); }

 private:
  std::size_t index(std::span<const std::int64_t> lag) const;

  std::vector<std::int64_t> window_;
  std::vector<double> values_;
  std::vector<std::uint64_t> pairs_;
};

// Window must not exceed half the extents.
Correlogram field_correlogram(const FieldSample& field, std::span<const std::int64_t> window, std::size_t component = 0);

struct KsResult {
  double statistic = 0.0;
  std::size_t n = 0;
  // Asymptotic critical values at alpha = 0.10, 0.05, 0.01.
  double critical_10 = 0.0;
  double critical_05 = 0.0;
  double critical_01 = 0.0;

  bool passes(double alpha) const;
};

inline constexpr double kKs10 = 1.224;
inline constexpr double kKs05 = 1.358;
inline constexpr double kKs01 = 1.628;

// sup |F_n - F| over the sample, checking both sides of each jump. Needs at
// least 100 samples.
KsResult ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf);

struct CfEstimate {
  std::complex<double> value;
  double error_scale = 0.0;  // 1 / sqrt(n)
};

// Mean of exp(i theta . x) over the rows of an n x d array.
CfEstimate empirical_cf(std::span<const double> values, std::size_t d, std::span<const double> theta);

}  // namespace gbpf
