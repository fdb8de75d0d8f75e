#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gbpf/random.hpp"
#include "gbpf/support_set.hpp"

namespace gbpf {

namespace detail {
class Law1D;
struct MarginalImpl;
}  // namespace detail

// One-dimensional law, continuous (pdf/cdf/quantile) or discrete on integers.
// Cheap to copy; immutable.
class Distribution1D {
 public:
  static Distribution1D exponential(double rate);
  static Distribution1D uniform(double lo, double hi);
  static Distribution1D normal(double mean, double sd);
  static Distribution1D binomial(std::int64_t trials, double prob);
  static Distribution1D bernoulli(double prob);
  // pmf[i] = P(X = first + i)
  static Distribution1D discrete(std::string name, std::int64_t first, std::vector<double> pmf);
  // User supplied law on [lo, hi] (either may be infinite). Validated numerically:
  // the pdf must integrate to 1 and quantile must invert cdf, both within 1e-9.
  static Distribution1D continuous(std::string name, std::function<double(double)> pdf,
                                   std::function<double(double)> cdf, std::function<double(double)> quantile,
                                   double lo, double hi);

  std::string name() const;
  bool is_discrete() const;

  // Density, or probability mass at integers for discrete laws.
  double pdf(double x) const;
  double cdf(double x) const;
  // P(X > x)
  double sf(double x) const;
  double quantile(double u) const;
  // Inverse of sf.
  double quantile_upper(double s) const;

  double mean() const;
  double variance() const;
  // Range outside which the law carries negligible mass (quantiles at 1e-17 or so).
  double effective_lo() const;
  double effective_hi() const;
  // First and last support point of a discrete law.
  std::int64_t first() const;
  std::int64_t last() const;

  // Integral of x^q e^{i theta x} over the set, against the law.
  std::complex<double> integrate(const Interval& iv, int q = 0, double theta = 0.0) const;
  std::complex<double> integrate(const IntervalUnion& s, int q = 0, double theta = 0.0) const;
  std::complex<double> integrate(const IntegerSet& s, int q = 0, double theta = 0.0) const;
  double mass(const Interval& iv) const;

  double sample(RandomStream& rng) const;
  // Draw from the law restricted and renormalised to the set, by inversion.
  double sample_in(const IntervalUnion& s, RandomStream& rng) const;
  double sample_in(const IntegerSet& s, RandomStream& rng) const;

  std::string describe() const;

 private:
  explicit Distribution1D(std::shared_ptr<const detail::Law1D> law);
  std::shared_ptr<const detail::Law1D> law_;
};

enum class MarginalKind { Univariate, Product, CoupledPair, Gaussian };

// Target distribution of X(i) in R^d.
class Marginal {
 public:
  static Marginal univariate(Distribution1D law);
  // Independent continuous components.
  static Marginal product(std::vector<Distribution1D> components);
  // Bivariate law f(x1, x2) = f(x1) f(x2) w(l1, l2) with l_k = 1{x_k in a0} and
  // w = 1 + (-1)^{l1 + l2} c0 / (pi_l1 pi_l2), pi_1 = p0 = mass(a0), pi_0 = 1 - p0.
  // a0 is an IntervalUnion, or an IntegerSet for a discrete base.
  static Marginal coupled_pair(Distribution1D base, SupportSet a0, double c0);
  static Marginal gaussian(Eigen::VectorXd mean, Eigen::MatrixXd covariance);

  MarginalKind kind() const;
  std::size_t dimension() const;
  bool is_discrete() const;

  const Eigen::VectorXd& mean() const;
  const Eigen::MatrixXd& covariance() const;

  // Law of component k.
  const Distribution1D& component(std::size_t k) const;
  double component_cdf(std::size_t k, double x) const { return component(k).cdf(x); }

  // CoupledPair accessors.
  const Distribution1D& base() const;
  const SupportSet& a0() const;
  double p0() const;
  double c0() const;
  // Probability of the indicator pair (l1, l2).
  double pair_weight(int l1, int l2) const;

  // Gaussian accessors.
  const Eigen::MatrixXd& cholesky() const;

  void sample(RandomStream& rng, std::span<double> out) const;
  Eigen::VectorXd sample(RandomStream& rng) const;

  std::string describe() const;

  const detail::MarginalImpl* impl() const noexcept { return impl_.get(); }

 private:
  explicit Marginal(std::shared_ptr<const detail::MarginalImpl> impl);
  std::shared_ptr<const detail::MarginalImpl> impl_;
};

// Product-form integrand prod_k x_k^{powers[k]} e^{i thetas[k] x_k}. Empty
// vectors mean all zeros.
struct Integrand {
  std::vector<int> powers;
  std::vector<double> thetas;

  static Integrand mass() { return {}; }
  static Integrand moment(std::size_t d, std::size_t component, int q);
  static Integrand cf(std::span<const double> thetas);
};

struct Estimate {
  std::complex<double> value;
  // Monte Carlo standard error; zero for deterministic quadrature.
  double se = 0.0;
};

Estimate integrate_with_error(const Marginal& m, const SupportSet& s, const Integrand& f);
std::complex<double> integrate(const Marginal& m, const SupportSet& s, const Integrand& f);
std::complex<double> integrate_all(const Marginal& m, const Integrand& f);

double set_mass(const Marginal& m, const SupportSet& s);
// Componentwise first-moment integrals over the set (not normalised by its mass).
Eigen::VectorXd set_mean(const Marginal& m, const SupportSet& s);
// Componentwise integrals of x_k^q over the set.
Eigen::VectorXd set_moment(const Marginal& m, const SupportSet& s, int q);
// E[e^{i theta . X} ; X in S]
std::complex<double> set_cf(const Marginal& m, const SupportSet& s, std::span<const double> theta);

// Complement within the support of m. Interval sets on discrete laws become
// integer sets first so that no atom is counted twice.
SupportSet complement(const Marginal& m, const SupportSet& s);
// Canonical representation for m: integer sets for discrete laws.
SupportSet normalize_for(const Marginal& m, const SupportSet& s);
// a n b. Exact for 1-D sets and plain box unions; a predicate otherwise.
SupportSet intersect(const Marginal& m, const SupportSet& a, const SupportSet& b);

inline constexpr std::size_t kRejectionCap = 1000000;

// Sampler for f restricted to one set, with all set-dependent tables built once.
// Exact inversion for 1-D sets and for single boxes of product or coupled laws;
// capped rejection from f otherwise.
class RestrictedSampler {
 public:
  RestrictedSampler(Marginal m, SupportSet s);
  ~RestrictedSampler();
  RestrictedSampler(const RestrictedSampler&);
  RestrictedSampler& operator=(const RestrictedSampler&);
  RestrictedSampler(RestrictedSampler&&) noexcept;
  RestrictedSampler& operator=(RestrictedSampler&&) noexcept;

  double mass() const;
  bool exact() const;
  void draw(RandomStream& rng, std::span<double> out) const;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

// Draw from f restricted to S and renormalised. Exact inversion for 1-D sets and
// single boxes of product or coupled laws; rejection (capped) otherwise.
void restricted_sample(const Marginal& m, const SupportSet& s, RandomStream& rng, std::span<double> out);
Eigen::VectorXd restricted_sample(const Marginal& m, const SupportSet& s, RandomStream& rng);

Eigen::Vector2d coupled_pair_sample(const Marginal& m, RandomStream& rng);

}  // namespace gbpf
