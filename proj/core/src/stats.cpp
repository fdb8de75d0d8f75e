#include "gbpf/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gbpf/errors.hpp"

namespace gbpf {

namespace {

double divisor(std::size_t n, std::size_t k, Normalization norm) {
  return norm == Normalization::Biased ? static_cast<double>(n) : static_cast<double>(n - k);
}

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

void require_lag_range(std::size_t n, std::size_t max_lag) {
  if (n == 0) throw InvalidArgument("empty series");
  if (4 * max_lag >= n) throw InvalidArgument("max_lag must be below n / 4");
}

}  // namespace

SeriesCovariance autocovariance(std::span<const double> values, std::size_t n, std::size_t d, std::size_t max_lag,
                                Normalization norm) {
  if (values.size() != n * d) throw InvalidArgument("series size does not match n x d");
  require_lag_range(n, max_lag);
  const auto dd = static_cast<Eigen::Index>(d);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> x(
      values.data(), static_cast<Eigen::Index>(n), dd);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centred = x.rowwise() - mean;
  SeriesCovariance out;
  for (std::size_t k = 0; k <= max_lag; ++k) {
    const auto m = static_cast<Eigen::Index>(n - k);
    Eigen::MatrixXd c = centred.topRows(m).transpose() * centred.bottomRows(m);
    out.lags.push_back(c / divisor(n, k, norm));
  }
  for (std::size_t a = 0; a < d; ++a) {
    if (out.lags[0](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) <= 0.0) out.degenerate.push_back(a);
  }
  return out;
}

std::vector<double> autocovariance(std::span<const double> x, std::size_t max_lag, Normalization norm) {
  return cross_covariance(x, x, max_lag, norm);
}

std::vector<double> cross_covariance(std::span<const double> a, std::span<const double> b, std::size_t max_lag,
                                     Normalization norm) {
  if (a.size() != b.size()) throw InvalidArgument("cross covariance needs aligned series");
  const std::size_t n = a.size();
  require_lag_range(n, max_lag);
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  std::vector<double> ca(n), cb(n);
  for (std::size_t t = 0; t < n; ++t) {
    ca[t] = a[t] - ma;
    cb[t] = b[t] - mb;
  }
  std::vector<double> out(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    double s = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) s += ca[t] * cb[t + k];
    out[k] = s / divisor(n, k, norm);
  }
  return out;
}

double LagStatistics::estimate(std::size_t i, std::size_t a, std::size_t b) const {
  return estimates.at(i)(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
}

double LagStatistics::standard_error(std::size_t i, std::size_t a, std::size_t b) const {
  return se.at(i)(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
}

LagStatistics replicate_statistics(const std::vector<std::vector<Eigen::MatrixXd>>& runs,
                                   std::vector<std::int64_t> lags, std::size_t n) {
  if (runs.size() < 2) throw InvalidArgument("standard errors need at least two replicates");
  LagStatistics out;
  out.lags = std::move(lags);
  out.n = n;
  out.replicates = runs.size();
  const auto r = static_cast<double>(runs.size());
  for (std::size_t i = 0; i < out.lags.size(); ++i) {
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(runs[0].at(i).rows(), runs[0].at(i).cols());
    for (const auto& run : runs) mean += run.at(i);
    mean /= r;
    Eigen::MatrixXd ss = Eigen::MatrixXd::Zero(mean.rows(), mean.cols());
    for (const auto& run : runs) ss += (run.at(i) - mean).cwiseAbs2();
    out.estimates.push_back(mean);
    out.se.push_back((ss / (r - 1.0) / r).cwiseSqrt());
  }
  return out;
}

LagStatistics replicate_statistics(const std::vector<std::vector<double>>& runs, std::vector<std::int64_t> lags,
                                   std::size_t n) {
  std::vector<std::vector<Eigen::MatrixXd>> wrapped;
  for (const auto& run : runs) {
    std::vector<Eigen::MatrixXd> w;
    for (const double v : run) w.push_back(Eigen::MatrixXd::Constant(1, 1, v));
    wrapped.push_back(std::move(w));
  }
  return replicate_statistics(wrapped, std::move(lags), n);
}

Correlogram::Correlogram(std::vector<std::int64_t> window, std::vector<double> values,
                         std::vector<std::uint64_t> pairs)
    : window_(std::move(window)), values_(std::move(values)), pairs_(std::move(pairs)) {}

std::size_t Correlogram::index(std::span<const std::int64_t> lag) const {
  if (lag.size() != window_.size()) throw InvalidArgument("lag has the wrong number of axes");
  std::size_t idx = 0;
  for (std::size_t k = 0; k < lag.size(); ++k) {
    if (std::llabs(lag[k]) > window_[k]) throw InvalidArgument("lag outside the correlogram window");
    idx = idx * static_cast<std::size_t>(2 * window_[k] + 1) + static_cast<std::size_t>(lag[k] + window_[k]);
  }
  return idx;
}

double Correlogram::at(std::span<const std::int64_t> lag) const { return values_[index(lag)]; }
std::uint64_t Correlogram::pairs(std::span<const std::int64_t> lag) const { return pairs_[index(lag)]; }

std::vector<std::int64_t> Correlogram::lag(std::size_t i) const {
  std::vector<std::int64_t> out(window_.size());
  for (std::size_t k = window_.size(); k-- > 0;) {
    const auto span = static_cast<std::size_t>(2 * window_[k] + 1);
    out[k] = static_cast<std::int64_t>(i % span) - window_[k];
    i /= span;
  }
  return out;
}

Correlogram field_correlogram(const FieldSample& field, std::span<const std::int64_t> window, std::size_t component) {
  const std::size_t n = field.extents.size();
  if (window.size() != n) throw InvalidArgument("window has the wrong number of axes");
  if (component >= field.d) throw InvalidArgument("component index out of range");
  for (std::size_t k = 0; k < n; ++k) {
    if (window[k] < 0 || 2 * window[k] > field.extents[k]) throw InvalidArgument("window exceeds half the extent");
  }
  const std::vector<double> x = field.component(component);
  const double mean = mean_of(x);
  std::vector<double> c(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) c[i] = x[i] - mean;

  std::vector<std::size_t> stride(n, 1);
  for (std::size_t k = n - 1; k-- > 0;) stride[k] = stride[k + 1] * static_cast<std::size_t>(field.extents[k + 1]);

  std::size_t total = 1;
  for (const auto w : window) total *= static_cast<std::size_t>(2 * w + 1);
  std::vector<double> values(total);
  std::vector<std::uint64_t> pairs(total);
  std::vector<std::int64_t> w(window.begin(), window.end());
  Correlogram shape(w, {}, {});

  std::vector<std::int64_t> t(n);
  for (std::size_t li = 0; li < total; ++li) {
    const std::vector<std::int64_t> s = shape.lag(li);
    // Sites t with t and t - s both inside: t_k in [max(0, s_k), min(T_k, T_k + s_k)).
    std::vector<std::int64_t> lo(n), hi(n);
    std::uint64_t count = 1;
    std::ptrdiff_t shift = 0;
    for (std::size_t k = 0; k < n; ++k) {
      lo[k] = std::max<std::int64_t>(0, s[k]);
      hi[k] = std::min(field.extents[k], field.extents[k] + s[k]);
      count *= static_cast<std::uint64_t>(hi[k] - lo[k]);
      shift += static_cast<std::ptrdiff_t>(s[k]) * static_cast<std::ptrdiff_t>(stride[k]);
    }
    double sum = 0.0;
    // Innermost axis as a contiguous run.
    const std::size_t last = n - 1;
    for (std::size_t k = 0; k < n; ++k) t[k] = lo[k];
    while (true) {
      std::size_t base = 0;
      for (std::size_t k = 0; k < n; ++k) base += static_cast<std::size_t>(t[k]) * stride[k];
      const double* a = c.data() + base;
      const double* b = c.data() + static_cast<std::ptrdiff_t>(base) - shift;
      const auto len = static_cast<std::size_t>(hi[last] - lo[last]);
      for (std::size_t j = 0; j < len; ++j) sum += a[j] * b[j];
      std::size_t k = last;
      bool done = true;
      while (k-- > 0) {
        if (++t[k] < hi[k]) {
          done = false;
          break;
        }
        t[k] = lo[k];
      }
      if (done) break;
    }
    if (count == 0) throw InvalidArgument("empty pair set in the correlogram window");
    values[li] = sum / static_cast<double>(count);
    pairs[li] = count;
  }
  return Correlogram(std::move(w), std::move(values), std::move(pairs));
}

bool KsResult::passes(double alpha) const {
  if (alpha >= 0.10) return statistic <= critical_10;
  if (alpha >= 0.05) return statistic <= critical_05;
  return statistic <= critical_01;
}

KsResult ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.size() < 100) throw InvalidArgument("KS distance needs at least 100 samples");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const auto n = static_cast<double>(x.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < x.size()) {
    std::size_t j = i;
    while (j < x.size() && x[j] == x[i]) ++j;
    const double below = static_cast<double>(i) / n;  // F_n just left of x[i]
    const double at = static_cast<double>(j) / n;
    const double f = cdf(x[i]);
    const double f_left = cdf(std::nextafter(x[i], -std::numeric_limits<double>::infinity()));
    d = std::max({d, std::abs(at - f), std::abs(below - f_left)});
    i = j;
  }
  KsResult out;
  out.statistic = d;
  out.n = x.size();
  const double root = std::sqrt(n);
  out.critical_10 = kKs10 / root;
  out.critical_05 = kKs05 / root;
  out.critical_01 = kKs01 / root;
  return out;
}

CfEstimate empirical_cf(std::span<const double> values, std::size_t d, std::span<const double> theta) {
  if (theta.size() != d) throw InvalidArgument("theta has the wrong dimension");
  if (d == 0 || values.size() % d != 0) throw InvalidArgument("sample array is not n x d");
  const std::size_t n = values.size() / d;
  if (n == 0) throw InvalidArgument("no samples");
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double phase = 0.0;
    for (std::size_t k = 0; k < d; ++k) phase += theta[k] * values[i * d + k];
    re += std::cos(phase);
    im += std::sin(phase);
  }
  const auto nn = static_cast<double>(n);
  return {{re / nn, im / nn}, 1.0 / std::sqrt(nn)};
}

}  // namespace gbpf
