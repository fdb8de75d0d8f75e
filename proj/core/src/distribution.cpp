#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/normal.hpp>

#include "gbpf/errors.hpp"
#include "gbpf/marginal.hpp"
#include "law1d.hpp"
#include "quadrature.hpp"

namespace gbpf {

namespace detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

class ExponentialLaw final : public Law1D {
 public:
  explicit ExponentialLaw(double rate) : rate_(rate) {
    if (!(rate > 0.0 && std::isfinite(rate))) throw InvalidArgument("exponential: rate must be positive");
    eff_lo = 0.0;
    eff_hi = 50.0 / rate;
    median = std::numbers::ln2 / rate;
    mean = 1.0 / rate;
    variance = 1.0 / (rate * rate);
  }
  std::string name() const override { return "exponential"; }
  std::string describe() const override { return "exponential(rate=" + num(rate_) + ")"; }
  double pdf(double x) const override { return x < 0.0 ? 0.0 : rate_ * std::exp(-rate_ * x); }
  double cdf(double x) const override { return x <= 0.0 ? 0.0 : -std::expm1(-rate_ * x); }
  double sf(double x) const override { return x <= 0.0 ? 1.0 : std::exp(-rate_ * x); }
  double quantile(double u) const override { return -std::log1p(-u) / rate_; }
  double quantile_upper(double s) const override { return -std::log(s) / rate_; }
  std::optional<double> first_moment(double lo, double hi) const override {
    lo = std::max(lo, 0.0);
    if (!(lo < hi)) return 0.0;
    auto part = [this](double x) { return std::isinf(x) ? 0.0 : (x + 1.0 / rate_) * std::exp(-rate_ * x); };
    return part(lo) - part(hi);
  }

 private:
  double rate_;
};

class UniformLaw final : public Law1D {
 public:
  UniformLaw(double a, double b) : a_(a), b_(b) {
    if (!(a < b && std::isfinite(a) && std::isfinite(b))) throw InvalidArgument("uniform: need finite lo < hi");
    eff_lo = a;
    eff_hi = b;
    median = 0.5 * (a + b);
    mean = median;
    variance = (b - a) * (b - a) / 12.0;
  }
  std::string name() const override { return "uniform"; }
  std::string describe() const override { return "uniform(" + num(a_) + ", " + num(b_) + ")"; }
  double pdf(double x) const override { return (x < a_ || x > b_) ? 0.0 : 1.0 / (b_ - a_); }
  double cdf(double x) const override { return std::clamp((x - a_) / (b_ - a_), 0.0, 1.0); }
  double sf(double x) const override { return std::clamp((b_ - x) / (b_ - a_), 0.0, 1.0); }
  double quantile(double u) const override { return a_ + u * (b_ - a_); }
  double quantile_upper(double s) const override { return b_ - s * (b_ - a_); }
  std::optional<double> first_moment(double lo, double hi) const override {
    lo = std::max(lo, a_);
    hi = std::min(hi, b_);
    if (!(lo < hi)) return 0.0;
    return (hi * hi - lo * lo) / (2.0 * (b_ - a_));
  }

 private:
  double a_;
  double b_;
};

class NormalLaw final : public Law1D {
 public:
  NormalLaw(double mu, double sd) : dist_(mu, sd), mu_(mu), sd_(sd) {
    if (!(sd > 0.0 && std::isfinite(sd) && std::isfinite(mu))) throw InvalidArgument("normal: need finite mean, sd > 0");
    eff_lo = mu - 10.0 * sd;
    eff_hi = mu + 10.0 * sd;
    median = mu;
    mean = mu;
    variance = sd * sd;
  }
  std::string name() const override { return "normal"; }
  std::string describe() const override { return "normal(mean=" + num(mu_) + ", sd=" + num(sd_) + ")"; }
  double pdf(double x) const override { return std::isinf(x) ? 0.0 : boost::math::pdf(dist_, x); }
  double cdf(double x) const override {
    if (std::isinf(x)) return x < 0 ? 0.0 : 1.0;
    return boost::math::cdf(dist_, x);
  }
  double sf(double x) const override {
    if (std::isinf(x)) return x < 0 ? 1.0 : 0.0;
    return boost::math::cdf(boost::math::complement(dist_, x));
  }
  double quantile(double u) const override { return boost::math::quantile(dist_, u); }
  double quantile_upper(double s) const override { return boost::math::quantile(boost::math::complement(dist_, s)); }
  std::optional<double> first_moment(double lo, double hi) const override {
    if (!(lo < hi)) return 0.0;
    const double mass = (lo >= mu_) ? sf(lo) - sf(hi) : cdf(hi) - cdf(lo);
    return mu_ * mass + sd_ * sd_ * (pdf(lo) - pdf(hi));
  }

 private:
  boost::math::normal_distribution<double> dist_;
  double mu_;
  double sd_;
};

class DiscreteLaw final : public Law1D {
 public:
  DiscreteLaw(std::string name, std::int64_t first_value, std::vector<double> masses, std::string description)
      : name_(std::move(name)), description_(std::move(description)) {
    if (masses.empty()) throw InvalidArgument("discrete law: empty pmf");
    double total = 0.0;
    for (double v : masses) {
      if (!(v >= 0.0 && std::isfinite(v))) throw InvalidArgument("discrete law: pmf must be finite and non-negative");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("discrete law: pmf does not sum to 1");
    first = first_value;
    last = first_value + static_cast<std::int64_t>(masses.size()) - 1;
    pmf = std::move(masses);
    cum_.resize(pmf.size());
    tail_.resize(pmf.size() + 1);
    double c = 0.0;
    for (std::size_t i = 0; i < pmf.size(); ++i) cum_[i] = (c += pmf[i]);
    tail_[pmf.size()] = 0.0;
    for (std::size_t i = pmf.size(); i-- > 0;) tail_[i] = tail_[i + 1] + pmf[i];
    eff_lo = static_cast<double>(first);
    eff_hi = static_cast<double>(last);
    for (std::size_t i = 0; i < pmf.size(); ++i) mean += pmf[i] * static_cast<double>(first + static_cast<std::int64_t>(i));
    for (std::size_t i = 0; i < pmf.size(); ++i) {
      const double dx = static_cast<double>(first + static_cast<std::int64_t>(i)) - mean;
      variance += pmf[i] * dx * dx;
    }
    median = quantile(0.5);
  }
  std::string name() const override { return name_; }
  std::string describe() const override { return description_; }
  bool discrete() const override { return true; }
  double pdf(double x) const override {
    if (x != std::floor(x) || x < eff_lo || x > eff_hi) return 0.0;
    return pmf[static_cast<std::size_t>(static_cast<std::int64_t>(x) - first)];
  }
  double cdf(double x) const override {
    if (x < eff_lo) return 0.0;
    if (x >= eff_hi) return 1.0;
    return std::min(1.0, cum_[static_cast<std::size_t>(static_cast<std::int64_t>(std::floor(x)) - first)]);
  }
  double sf(double x) const override {
    if (x < eff_lo) return 1.0;
    if (x >= eff_hi) return 0.0;
    return tail_[static_cast<std::size_t>(static_cast<std::int64_t>(std::floor(x)) - first) + 1];
  }
  double quantile(double u) const override {
    const auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cum_.begin()), pmf.size() - 1);
    return static_cast<double>(first + static_cast<std::int64_t>(idx));
  }

 private:
  std::string name_;
  std::string description_;
  std::vector<double> cum_;
  std::vector<double> tail_;
};

class CustomLaw final : public Law1D {
 public:
  CustomLaw(std::string name, std::function<double(double)> pdf_fn, std::function<double(double)> cdf_fn,
            std::function<double(double)> quantile_fn, double lo, double hi)
      : name_(std::move(name)), pdf_(std::move(pdf_fn)), cdf_(std::move(cdf_fn)), quantile_(std::move(quantile_fn)) {
    if (!pdf_ || !cdf_ || !quantile_) throw InvalidArgument("continuous law needs pdf, cdf and quantile");
    if (!(lo < hi)) throw InvalidArgument("continuous law: empty support");
    eff_lo = std::isfinite(lo) ? lo : quantile_(1e-15);
    eff_hi = std::isfinite(hi) ? hi : quantile_(1.0 - 1e-15);
    const double total = integrate_real(pdf_, eff_lo, eff_hi);
    if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument(name_ + ": pdf integrates to " + num(total) + ", not 1");
    for (double u = 0.01; u < 1.0; u += 0.049) {
      const double back = cdf_(quantile_(u));
      if (std::abs(back - u) > 1e-9) throw InvalidArgument(name_ + ": quantile does not invert cdf");
    }
    median = quantile_(0.5);
    mean = integrate_real([this](double x) { return x * pdf_(x); }, eff_lo, eff_hi);
    variance = integrate_real([this](double x) { return (x - mean) * (x - mean) * pdf_(x); }, eff_lo, eff_hi);
  }
  std::string name() const override { return name_; }
  std::string describe() const override { return name_; }
  double pdf(double x) const override { return (x < eff_lo || x > eff_hi) ? 0.0 : pdf_(x); }
  double cdf(double x) const override {
    if (x <= eff_lo) return 0.0;
    if (x >= eff_hi) return 1.0;
    return cdf_(x);
  }
  double quantile(double u) const override { return quantile_(u); }

 private:
  std::string name_;
  std::function<double(double)> pdf_;
  std::function<double(double)> cdf_;
  std::function<double(double)> quantile_;
};

}  // namespace

}  // namespace detail

Distribution1D::Distribution1D(std::shared_ptr<const detail::Law1D> law) : law_(std::move(law)) {}

Distribution1D Distribution1D::exponential(double rate) {
  return Distribution1D(std::make_shared<detail::ExponentialLaw>(rate));
}

Distribution1D Distribution1D::uniform(double lo, double hi) {
  return Distribution1D(std::make_shared<detail::UniformLaw>(lo, hi));
}

Distribution1D Distribution1D::normal(double mean, double sd) {
  return Distribution1D(std::make_shared<detail::NormalLaw>(mean, sd));
}

Distribution1D Distribution1D::binomial(std::int64_t trials, double prob) {
  if (trials < 1 || !(prob > 0.0 && prob < 1.0)) throw InvalidArgument("binomial: need n >= 1 and p in (0, 1)");
  boost::math::binomial_distribution<double> dist(static_cast<double>(trials), prob);
  std::vector<double> pmf(static_cast<std::size_t>(trials) + 1);
  for (std::int64_t k = 0; k <= trials; ++k) pmf[static_cast<std::size_t>(k)] = boost::math::pdf(dist, static_cast<double>(k));
  std::ostringstream os;
  os.precision(10);
  os << "binomial(n=" << trials << ", p=" << prob << ")";
  return Distribution1D(std::make_shared<detail::DiscreteLaw>("binomial", 0, std::move(pmf), os.str()));
}

Distribution1D Distribution1D::bernoulli(double prob) {
  if (!(prob > 0.0 && prob < 1.0)) throw InvalidArgument("bernoulli: p must lie in (0, 1)");
  std::ostringstream os;
  os.precision(10);
  os << "bernoulli(p=" << prob << ")";
  return Distribution1D(std::make_shared<detail::DiscreteLaw>("bernoulli", 0, std::vector<double>{1.0 - prob, prob}, os.str()));
}

Distribution1D Distribution1D::discrete(std::string name, std::int64_t first, std::vector<double> pmf) {
  std::string description = name + "(first=" + std::to_string(first) + ", " + std::to_string(pmf.size()) + " atoms)";
  return Distribution1D(std::make_shared<detail::DiscreteLaw>(std::move(name), first, std::move(pmf), std::move(description)));
}

Distribution1D Distribution1D::continuous(std::string name, std::function<double(double)> pdf,
                                          std::function<double(double)> cdf, std::function<double(double)> quantile,
                                          double lo, double hi) {
  return Distribution1D(
      std::make_shared<detail::CustomLaw>(std::move(name), std::move(pdf), std::move(cdf), std::move(quantile), lo, hi));
}

std::string Distribution1D::name() const { return law_->name(); }

bool Distribution1D::is_discrete() const { return law_->discrete(); }
double Distribution1D::pdf(double x) const { return law_->pdf(x); }
double Distribution1D::cdf(double x) const { return law_->cdf(x); }
double Distribution1D::sf(double x) const { return law_->sf(x); }
double Distribution1D::quantile(double u) const { return law_->quantile(u); }
double Distribution1D::quantile_upper(double s) const { return law_->quantile_upper(s); }
double Distribution1D::mean() const { return law_->mean; }
double Distribution1D::variance() const { return law_->variance; }
double Distribution1D::effective_lo() const { return law_->eff_lo; }
double Distribution1D::effective_hi() const { return law_->eff_hi; }
std::int64_t Distribution1D::first() const { return law_->first; }
std::int64_t Distribution1D::last() const { return law_->last; }
std::string Distribution1D::describe() const { return law_->describe(); }

double Distribution1D::mass(const Interval& iv) const {
  if (iv.empty()) return 0.0;
  if (law_->discrete()) return integrate(iv).real();
  const double m = (iv.lo >= law_->median) ? law_->sf(iv.lo) - law_->sf(iv.hi) : law_->cdf(iv.hi) - law_->cdf(iv.lo);
  return std::max(m, 0.0);
}

std::complex<double> Distribution1D::integrate(const Interval& iv, int q, double theta) const {
  if (q < 0) throw InvalidArgument("moment order must be non-negative");
  if (iv.empty()) return 0.0;
  if (law_->discrete()) {
    const auto lo = std::max<std::int64_t>(law_->first, static_cast<std::int64_t>(std::ceil(std::max(iv.lo, -9e18))));
    const auto hi = std::min<std::int64_t>(law_->last, static_cast<std::int64_t>(std::floor(std::min(iv.hi, 9e18))));
    std::complex<double> total = 0.0;
    for (std::int64_t v = lo; v <= hi; ++v) {
      const double x = static_cast<double>(v);
      total += law_->pmf[static_cast<std::size_t>(v - law_->first)] * std::pow(x, q) * std::polar(1.0, theta * x);
    }
    return total;
  }
  const double lo = std::max(iv.lo, law_->eff_lo);
  const double hi = std::min(iv.hi, law_->eff_hi);
  if (!(lo < hi)) return 0.0;
  if (theta == 0.0 && q == 0) return mass(iv);
  if (theta == 0.0 && q == 1) {
    if (const auto closed = law_->first_moment(iv.lo, iv.hi)) return *closed;
  }
  const auto* law = law_.get();
  return detail::integrate_complex(
      [law, q, theta](double x) { return std::pow(x, q) * law->pdf(x) * std::polar(1.0, theta * x); }, lo, hi, theta);
}

std::complex<double> Distribution1D::integrate(const IntervalUnion& s, int q, double theta) const {
  std::complex<double> total = 0.0;
  for (const auto& iv : s.parts()) total += integrate(iv, q, theta);
  return total;
}

std::complex<double> Distribution1D::integrate(const IntegerSet& s, int q, double theta) const {
  if (!law_->discrete()) return 0.0;
  std::complex<double> total = 0.0;
  for (std::size_t i = 0; i < s.values().size(); ++i) {
    const double x = static_cast<double>(s.values()[i]);
    total += s.shares()[i] * law_->pdf(x) * std::pow(x, q) * std::polar(1.0, theta * x);
  }
  return total;
}

double Distribution1D::sample(RandomStream& rng) const { return law_->quantile(rng.uniform()); }

}  // namespace gbpf
