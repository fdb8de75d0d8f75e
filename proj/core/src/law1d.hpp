#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace gbpf::detail {

class Law1D {
 public:
  virtual ~Law1D() = default;

  virtual std::string name() const = 0;
  virtual std::string describe() const = 0;
  virtual bool discrete() const { return false; }
  virtual double pdf(double x) const = 0;
  virtual double cdf(double x) const = 0;
  virtual double sf(double x) const { return 1.0 - cdf(x); }
  virtual double quantile(double u) const = 0;
  virtual double quantile_upper(double s) const { return quantile(1.0 - s); }
  // Closed form of the integral of x f(x) over [lo, hi] when one is known.
  virtual std::optional<double> first_moment(double, double) const { return std::nullopt; }

  double eff_lo = -std::numeric_limits<double>::infinity();
  double eff_hi = std::numeric_limits<double>::infinity();
  double median = 0.0;
  double mean = 0.0;
  double variance = 0.0;

  // Discrete laws only: pmf[i] = P(X = first + i).
  std::int64_t first = 0;
  std::int64_t last = -1;
  std::vector<double> pmf;
};

}  // namespace gbpf::detail
