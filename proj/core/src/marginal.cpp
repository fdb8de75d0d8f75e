#include "gbpf/marginal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "gbpf/errors.hpp"
#include "law1d.hpp"
#include "quadrature.hpp"

namespace gbpf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Integer points of a discrete law that fall in an interval union.
IntegerSet integers_in(const Distribution1D& law, const IntervalUnion& s) {
  std::vector<std::int64_t> values;
  for (std::int64_t v = law.first(); v <= law.last(); ++v) {
    if (s.contains(static_cast<double>(v))) values.push_back(v);
  }
  return IntegerSet(std::move(values));
}

IntervalUnion boxes_as_intervals(const BoxUnion& b) {
  std::vector<Interval> parts;
  for (const auto& box : b.boxes) parts.push_back(box.at(0));
  return IntervalUnion(std::move(parts));
}

IntegerSet integer_complement(const Distribution1D& law, const IntegerSet& s) {
  std::vector<std::int64_t> values;
  std::vector<double> shares;
  for (std::int64_t v = law.first(); v <= law.last(); ++v) {
    const double rest = 1.0 - s.share(v);
    if (rest > 0.0) {
      values.push_back(v);
      shares.push_back(rest);
    }
  }
  return IntegerSet(std::move(values), std::move(shares));
}

// Sampler for a 1-D law restricted to an interval union or integer set.
class Sampler1D {
 public:
  Sampler1D() = default;

  static Sampler1D over(const Distribution1D& law, const IntervalUnion& s) {
    if (law.is_discrete()) return over(law, integers_in(law, s));
    Sampler1D out;
    out.law_ = law;
    double total = 0.0;
    for (const auto& iv : s.parts()) {
      Part part{iv.lo, iv.hi, false, 0.0, 0.0};
      const double s_lo = law.sf(iv.lo);
      if (s_lo < 0.5) {
        part.upper = true;
        part.a = law.sf(iv.hi);
        part.b = s_lo;
      } else {
        part.a = law.cdf(iv.lo);
        part.b = law.cdf(iv.hi);
      }
      const double m = std::max(part.b - part.a, 0.0);
      if (m <= 0.0) continue;
      total += m;
      out.parts_.push_back(part);
      out.cum_.push_back(total);
    }
    out.total_ = total;
    return out;
  }

  static Sampler1D over(const Distribution1D& law, const IntegerSet& s) {
    Sampler1D out;
    out.law_ = law;
    out.integer_ = true;
    double total = 0.0;
    for (std::size_t i = 0; i < s.values().size(); ++i) {
      const double w = s.shares()[i] * law.pdf(static_cast<double>(s.values()[i]));
      if (!(w > 0.0) || !law.is_discrete()) continue;
      total += w;
      out.values_.push_back(s.values()[i]);
      out.cum_.push_back(total);
    }
    out.total_ = total;
    return out;
  }

  double mass() const { return total_; }

  double draw(RandomStream& rng) const {
    if (!(total_ > 0.0)) throw InvalidArgument("cannot sample from a set of zero mass");
    const double pick = rng.uniform() * total_;
    auto idx = static_cast<std::size_t>(std::upper_bound(cum_.begin(), cum_.end(), pick) - cum_.begin());
    idx = std::min(idx, cum_.size() - 1);
    if (integer_) return static_cast<double>(values_[idx]);
    const Part& part = parts_[idx];
    const double u = rng.uniform();
    const double t = part.a + u * (part.b - part.a);
    const double x = part.upper ? law_->quantile_upper(t) : law_->quantile(t);
    return std::clamp(x, part.lo, part.hi);
  }

 private:
  struct Part {
    double lo;
    double hi;
    bool upper;
    double a;
    double b;
  };

  std::optional<Distribution1D> law_;
  bool integer_ = false;
  std::vector<Part> parts_;
  std::vector<std::int64_t> values_;
  std::vector<double> cum_;
  double total_ = 0.0;
};

// Set on the real line in the form a 1-D law of the given kind integrates over.
using Set1D = std::variant<IntervalUnion, IntegerSet>;

Set1D as_set1d(const Distribution1D& law, const SupportSet& s) {
  if (const auto* u = s.get<IntervalUnion>()) {
    if (law.is_discrete()) return integers_in(law, *u);
    return *u;
  }
  if (const auto* i = s.get<IntegerSet>()) {
    if (!law.is_discrete()) throw InvalidArgument("integer set used with a continuous law");
    return *i;
  }
  throw InvalidArgument("expected a one-dimensional interval union or integer set");
}

Set1D complement1d(const Distribution1D& law, const Set1D& s) {
  if (const auto* u = std::get_if<IntervalUnion>(&s)) return u->complement();
  return integer_complement(law, std::get<IntegerSet>(s));
}

Set1D cut(const Set1D& s, const Interval& iv) {
  if (const auto* u = std::get_if<IntervalUnion>(&s)) return u->intersect(iv);
  return std::get<IntegerSet>(s).intersect(iv);
}

std::complex<double> integrate1d(const Distribution1D& law, const Set1D& s, int q, double theta) {
  return std::visit([&](const auto& set) { return law.integrate(set, q, theta); }, s);
}

Sampler1D sampler1d(const Distribution1D& law, const Set1D& s) {
  return std::visit([&](const auto& set) { return Sampler1D::over(law, set); }, s);
}

double normal_pdf(double x, double m, double sd) {
  if (std::isinf(x)) return 0.0;
  const double z = (x - m) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

// Integral of x^q e^{i theta x} against N(m, sd^2) over [lo, hi].
std::complex<double> normal_interval(double m, double sd, const Interval& iv, int q, double theta) {
  const double lo = std::max(iv.lo, m - 10.0 * sd);
  const double hi = std::min(iv.hi, m + 10.0 * sd);
  if (!(lo < hi)) return 0.0;
  if (theta == 0.0 && q <= 1) {
    boost::math::normal_distribution<double> d(m, sd);
    auto cdf = [&d](double x) { return std::isinf(x) ? (x < 0 ? 0.0 : 1.0) : boost::math::cdf(d, x); };
    auto sf = [&d](double x) {
      return std::isinf(x) ? (x < 0 ? 1.0 : 0.0) : boost::math::cdf(boost::math::complement(d, x));
    };
    const double mass = std::max(0.0, iv.lo >= m ? sf(iv.lo) - sf(iv.hi) : cdf(iv.hi) - cdf(iv.lo));
    if (q == 0) return mass;
    return m * mass + sd * sd * (normal_pdf(iv.lo, m, sd) - normal_pdf(iv.hi, m, sd));
  }
  return detail::integrate_complex(
      [=](double x) { return std::pow(x, q) * normal_pdf(x, m, sd) * std::polar(1.0, theta * x); }, lo, hi, theta);
}

}  // namespace

namespace detail {

struct MarginalImpl {
  MarginalKind kind = MarginalKind::Univariate;
  std::size_t d = 1;
  std::vector<Distribution1D> components;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  // CoupledPair
  SupportSet a0;
  Set1D a0_sets[2];  // [0] complement, [1] a0
  double p0 = 0.0;
  double c0 = 0.0;
  double pair_prob[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  Sampler1D pair_samplers[2];

  // Gaussian
  Eigen::MatrixXd chol;

  double density_weight(int l1, int l2) const {
    const double pi1 = l1 ? p0 : 1.0 - p0;
    const double pi2 = l2 ? p0 : 1.0 - p0;
    return pair_prob[l1][l2] / (pi1 * pi2);
  }
};

}  // namespace detail

Marginal::Marginal(std::shared_ptr<const detail::MarginalImpl> impl) : impl_(std::move(impl)) {}

Marginal Marginal::univariate(Distribution1D law) {
  auto impl = std::make_shared<detail::MarginalImpl>();
  impl->kind = MarginalKind::Univariate;
  impl->d = 1;
  impl->mean = Eigen::VectorXd::Constant(1, law.mean());
  impl->cov = Eigen::MatrixXd::Constant(1, 1, law.variance());
  impl->components.push_back(std::move(law));
  return Marginal(std::move(impl));
}

Marginal Marginal::product(std::vector<Distribution1D> components) {
  if (components.empty()) throw InvalidArgument("product marginal needs at least one component");
  auto impl = std::make_shared<detail::MarginalImpl>();
  impl->kind = MarginalKind::Product;
  impl->d = components.size();
  impl->mean.resize(static_cast<Eigen::Index>(impl->d));
  impl->cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(impl->d), static_cast<Eigen::Index>(impl->d));
  for (std::size_t k = 0; k < components.size(); ++k) {
    if (components[k].is_discrete()) throw InvalidArgument("product marginal components must be continuous");
    impl->mean[static_cast<Eigen::Index>(k)] = components[k].mean();
    impl->cov(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = components[k].variance();
  }
  impl->components = std::move(components);
  return Marginal(std::move(impl));
}

Marginal Marginal::coupled_pair(Distribution1D base, SupportSet a0, double c0) {
  auto impl = std::make_shared<detail::MarginalImpl>();
  impl->kind = MarginalKind::CoupledPair;
  impl->d = 2;
  const Set1D set = as_set1d(base, a0);
  impl->a0 = std::visit([](const auto& s) { return SupportSet(s); }, set);
  impl->a0_sets[1] = set;
  impl->a0_sets[0] = complement1d(base, set);
  impl->p0 = integrate1d(base, set, 0, 0.0).real();
  impl->c0 = c0;
  if (!(impl->p0 > 0.0 && impl->p0 < 1.0)) throw InvalidArgument("coupled pair: a0 must have mass in (0, 1)");
  for (int l1 = 0; l1 < 2; ++l1) {
    for (int l2 = 0; l2 < 2; ++l2) {
      const double pi1 = l1 ? impl->p0 : 1.0 - impl->p0;
      const double pi2 = l2 ? impl->p0 : 1.0 - impl->p0;
      const double prob = pi1 * pi2 + (((l1 + l2) % 2 == 0) ? c0 : -c0);
      if (prob < 0.0) throw InvalidArgument("coupled pair: c0 makes a cell weight negative");
      impl->pair_prob[l1][l2] = prob;
    }
  }
  impl->pair_samplers[0] = sampler1d(base, impl->a0_sets[0]);
  impl->pair_samplers[1] = sampler1d(base, impl->a0_sets[1]);
  const double m1 = integrate1d(base, impl->a0_sets[1], 1, 0.0).real() / impl->p0;
  const double m0 = integrate1d(base, impl->a0_sets[0], 1, 0.0).real() / (1.0 - impl->p0);
  impl->mean = Eigen::Vector2d::Constant(base.mean());
  impl->cov.resize(2, 2);
  impl->cov << base.variance(), c0 * (m1 - m0) * (m1 - m0), c0 * (m1 - m0) * (m1 - m0), base.variance();
  impl->components = {base, base};
  return Marginal(std::move(impl));
}

Marginal Marginal::gaussian(Eigen::VectorXd mean, Eigen::MatrixXd covariance) {
  const auto d = mean.size();
  if (d < 1 || covariance.rows() != d || covariance.cols() != d) throw InvalidArgument("gaussian: shape mismatch");
  if (!covariance.isApprox(covariance.transpose())) throw InvalidArgument("gaussian: covariance not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) throw InvalidArgument("gaussian: covariance not positive definite");
  auto impl = std::make_shared<detail::MarginalImpl>();
  impl->kind = MarginalKind::Gaussian;
  impl->d = static_cast<std::size_t>(d);
  impl->chol = llt.matrixL();
  for (Eigen::Index k = 0; k < d; ++k) impl->components.push_back(Distribution1D::normal(mean[k], std::sqrt(covariance(k, k))));
  impl->mean = std::move(mean);
  impl->cov = std::move(covariance);
  return Marginal(std::move(impl));
}

MarginalKind Marginal::kind() const { return impl_->kind; }
std::size_t Marginal::dimension() const { return impl_->d; }
bool Marginal::is_discrete() const { return impl_->components.front().is_discrete(); }
const Eigen::VectorXd& Marginal::mean() const { return impl_->mean; }
const Eigen::MatrixXd& Marginal::covariance() const { return impl_->cov; }

const Distribution1D& Marginal::component(std::size_t k) const {
  if (k >= impl_->d) throw InvalidArgument("component index out of range");
  return impl_->components[k];
}

const Distribution1D& Marginal::base() const {
  if (impl_->kind != MarginalKind::CoupledPair) throw InvalidArgument("not a coupled pair marginal");
  return impl_->components.front();
}

const SupportSet& Marginal::a0() const {
  if (impl_->kind != MarginalKind::CoupledPair) throw InvalidArgument("not a coupled pair marginal");
  return impl_->a0;
}

double Marginal::p0() const { return impl_->p0; }
double Marginal::c0() const { return impl_->c0; }

double Marginal::pair_weight(int l1, int l2) const {
  if (impl_->kind != MarginalKind::CoupledPair) throw InvalidArgument("not a coupled pair marginal");
  return impl_->pair_prob[l1 != 0][l2 != 0];
}

const Eigen::MatrixXd& Marginal::cholesky() const {
  if (impl_->kind != MarginalKind::Gaussian) throw InvalidArgument("not a gaussian marginal");
  return impl_->chol;
}

void Marginal::sample(RandomStream& rng, std::span<double> out) const {
  if (out.size() != impl_->d) throw InvalidArgument("output span has the wrong dimension");
  switch (impl_->kind) {
    case MarginalKind::Univariate:
    case MarginalKind::Product:
      for (std::size_t k = 0; k < impl_->d; ++k) out[k] = impl_->components[k].sample(rng);
      return;
    case MarginalKind::CoupledPair: {
      const double u = rng.uniform();
      double acc = 0.0;
      int l1 = 1;
      int l2 = 1;
      for (int cell = 0; cell < 4; ++cell) {
        acc += impl_->pair_prob[cell / 2][cell % 2];
        if (u < acc || cell == 3) {
          l1 = cell / 2;
          l2 = cell % 2;
          break;
        }
      }
      out[0] = impl_->pair_samplers[l1].draw(rng);
      out[1] = impl_->pair_samplers[l2].draw(rng);
      return;
    }
    case MarginalKind::Gaussian: {
      Eigen::VectorXd z(static_cast<Eigen::Index>(impl_->d));
      for (Eigen::Index k = 0; k < z.size(); ++k) {
        z[k] = boost::math::quantile(boost::math::normal_distribution<double>(), rng.uniform());
      }
      const Eigen::VectorXd x = impl_->mean + impl_->chol * z;
      for (std::size_t k = 0; k < impl_->d; ++k) out[k] = x[static_cast<Eigen::Index>(k)];
      return;
    }
  }
}

Eigen::VectorXd Marginal::sample(RandomStream& rng) const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(impl_->d));
  sample(rng, std::span<double>(x.data(), impl_->d));
  return x;
}

std::string Marginal::describe() const {
  std::ostringstream os;
  os.precision(10);
  switch (impl_->kind) {
    case MarginalKind::Univariate:
      return impl_->components.front().describe();
    case MarginalKind::Product:
      os << "product(";
      for (std::size_t k = 0; k < impl_->d; ++k) os << (k ? ", " : "") << impl_->components[k].describe();
      os << ")";
      return os.str();
    case MarginalKind::CoupledPair:
      os << "coupled_pair(base=" << impl_->components.front().describe() << ", a0=" << impl_->a0.describe()
         << ", p0=" << impl_->p0 << ", c0=" << impl_->c0 << ")";
      return os.str();
    case MarginalKind::Gaussian:
      os << "gaussian(mean=[" << impl_->mean.transpose() << "], cov=[";
      for (Eigen::Index r = 0; r < impl_->cov.rows(); ++r) os << (r ? "; " : "") << impl_->cov.row(r);
      os << "])";
      return os.str();
  }
  return "unknown";
}

Integrand Integrand::moment(std::size_t d, std::size_t component, int q) {
  Integrand f;
  f.powers.assign(d, 0);
  f.powers.at(component) = q;
  return f;
}

Integrand Integrand::cf(std::span<const double> thetas) {
  Integrand f;
  f.thetas.assign(thetas.begin(), thetas.end());
  return f;
}

namespace {

int power_of(const Integrand& f, std::size_t k) { return k < f.powers.size() ? f.powers[k] : 0; }
double theta_of(const Integrand& f, std::size_t k) { return k < f.thetas.size() ? f.thetas[k] : 0.0; }

std::complex<double> point_value(const Integrand& f, std::span<const double> x) {
  std::complex<double> v = 1.0;
  double phase = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    v *= std::pow(x[k], power_of(f, k));
    phase += theta_of(f, k) * x[k];
  }
  return v * std::polar(1.0, phase);
}

std::complex<double> gaussian2_box(const detail::MarginalImpl& g, const Box& box, const Integrand& f) {
  const double mu1 = g.mean[0];
  const double mu2 = g.mean[1];
  const double s11 = g.cov(0, 0);
  const double s12 = g.cov(0, 1);
  const double sd1 = std::sqrt(s11);
  const double beta = s12 / s11;
  const double sd_cond = std::sqrt(g.cov(1, 1) - s12 * s12 / s11);
  const int q1 = power_of(f, 0);
  const int q2 = power_of(f, 1);
  const double t1 = theta_of(f, 0);
  const double t2 = theta_of(f, 1);
  const double lo = std::max(box[0].lo, mu1 - 10.0 * sd1);
  const double hi = std::min(box[0].hi, mu1 + 10.0 * sd1);
  if (!(lo < hi)) return 0.0;
  const Interval side2 = box[1];
  return detail::integrate_complex(
      [=](double x1) {
        const std::complex<double> inner = normal_interval(mu2 + beta * (x1 - mu1), sd_cond, side2, q2, t2);
        return std::pow(x1, q1) * normal_pdf(x1, mu1, sd1) * std::polar(1.0, t1 * x1) * inner;
      },
      lo, hi, t1);
}

std::complex<double> box_integral(const detail::MarginalImpl& m, const Box& box, const Integrand& f) {
  if (box.size() != m.d) throw InvalidArgument("box dimension does not match the marginal");
  for (const auto& side : box) {
    if (side.empty()) return 0.0;
  }
  switch (m.kind) {
    case MarginalKind::Univariate:
      return m.components[0].integrate(box[0], power_of(f, 0), theta_of(f, 0));
    case MarginalKind::Product: {
      std::complex<double> v = 1.0;
      for (std::size_t k = 0; k < m.d; ++k) v *= m.components[k].integrate(box[k], power_of(f, k), theta_of(f, k));
      return v;
    }
    case MarginalKind::CoupledPair: {
      std::complex<double> parts[2][2];
      for (std::size_t k = 0; k < 2; ++k) {
        for (int l = 0; l < 2; ++l) {
          parts[k][l] = integrate1d(m.components[0], cut(m.a0_sets[l], box[k]), power_of(f, k), theta_of(f, k));
        }
      }
      std::complex<double> total = 0.0;
      for (int l1 = 0; l1 < 2; ++l1) {
        for (int l2 = 0; l2 < 2; ++l2) total += m.density_weight(l1, l2) * parts[0][l1] * parts[1][l2];
      }
      return total;
    }
    case MarginalKind::Gaussian:
      if (m.d == 1) return normal_interval(m.mean[0], std::sqrt(m.cov(0, 0)), box[0], power_of(f, 0), theta_of(f, 0));
      if (m.d == 2) return gaussian2_box(m, box, f);
      throw InvalidArgument("box integrals of gaussian marginals are limited to d <= 2; use a predicate set");
  }
  return 0.0;
}

Box full_box(std::size_t d) { return Box(d, Interval{-kInf, kInf}); }

Estimate monte_carlo(const Marginal& m, const SupportSet& s, const Predicate& pred, const Integrand& f) {
  RandomStream rng(pred.seed);
  std::vector<double> x(m.dimension());
  std::complex<double> sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < pred.samples; ++i) {
    m.sample(rng, x);
    if (!s.contains(x)) continue;
    const auto v = point_value(f, x);
    sum += v;
    sum_sq += std::norm(v);
  }
  const auto n = static_cast<double>(pred.samples);
  const std::complex<double> mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - std::norm(mean));
  return {mean, std::sqrt(var / n)};
}

}  // namespace

std::complex<double> integrate_all(const Marginal& m, const Integrand& f) {
  const auto& impl = *m.impl();
  return box_integral(impl, full_box(impl.d), f);
}

Estimate integrate_with_error(const Marginal& m, const SupportSet& s, const Integrand& f) {
  const auto& impl = *m.impl();
  if (const auto* pred = s.get<Predicate>()) {
    if (pred->bounding_box.size() != impl.d) throw InvalidArgument("predicate dimension does not match the marginal");
    return monte_carlo(m, s, *pred, f);
  }
  if (const auto* u = s.get<IntervalUnion>()) {
    if (impl.d != 1) throw InvalidArgument("interval sets need a one-dimensional marginal");
    return {integrate1d(impl.components[0], as_set1d(impl.components[0], *u), power_of(f, 0), theta_of(f, 0)), 0.0};
  }
  if (const auto* i = s.get<IntegerSet>()) {
    if (impl.d != 1) throw InvalidArgument("integer sets need a one-dimensional marginal");
    return {impl.components[0].integrate(*i, power_of(f, 0), theta_of(f, 0)), 0.0};
  }
  const auto& b = *s.get<BoxUnion>();
  if (!b.boxes.empty() && b.dimension() != impl.d) throw InvalidArgument("box dimension does not match the marginal");
  std::complex<double> inside = 0.0;
  if (impl.d == 1 && !b.boxes.empty()) {
    inside = integrate1d(impl.components[0], as_set1d(impl.components[0], boxes_as_intervals(b)), power_of(f, 0),
                         theta_of(f, 0));
  } else {
    const std::size_t nb = b.boxes.size();
    if (nb > 12) throw SizeGuardExceeded("box unions are limited to 12 boxes");
    for (std::size_t mask = 1; mask < (std::size_t{1} << nb); ++mask) {
      Box meet = full_box(impl.d);
      int count = 0;
      for (std::size_t j = 0; j < nb; ++j) {
        if (!(mask & (std::size_t{1} << j))) continue;
        ++count;
        for (std::size_t k = 0; k < impl.d; ++k) {
          meet[k].lo = std::max(meet[k].lo, b.boxes[j][k].lo);
          meet[k].hi = std::min(meet[k].hi, b.boxes[j][k].hi);
        }
      }
      const auto v = box_integral(impl, meet, f);
      inside += (count % 2 == 1) ? v : -v;
    }
  }
  if (b.complement) return {integrate_all(m, f) - inside, 0.0};
  return {inside, 0.0};
}

std::complex<double> integrate(const Marginal& m, const SupportSet& s, const Integrand& f) {
  return integrate_with_error(m, s, f).value;
}

double set_mass(const Marginal& m, const SupportSet& s) { return integrate(m, s, Integrand::mass()).real(); }

Eigen::VectorXd set_moment(const Marginal& m, const SupportSet& s, int q) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(m.dimension()));
  for (std::size_t k = 0; k < m.dimension(); ++k) {
    out[static_cast<Eigen::Index>(k)] = integrate(m, s, Integrand::moment(m.dimension(), k, q)).real();
  }
  return out;
}

Eigen::VectorXd set_mean(const Marginal& m, const SupportSet& s) { return set_moment(m, s, 1); }

std::complex<double> set_cf(const Marginal& m, const SupportSet& s, std::span<const double> theta) {
  if (theta.size() != m.dimension()) throw InvalidArgument("theta has the wrong dimension");
  return integrate(m, s, Integrand::cf(theta));
}

SupportSet normalize_for(const Marginal& m, const SupportSet& s) {
  if (m.dimension() != 1) return s;
  const Distribution1D& law = m.component(0);
  if (const auto* b = s.get<BoxUnion>(); b && !b->complement && !b->boxes.empty()) {
    return normalize_for(m, SupportSet(boxes_as_intervals(*b)));
  }
  if (const auto* u = s.get<IntervalUnion>(); u && law.is_discrete()) return integers_in(law, *u);
  return s;
}

SupportSet complement(const Marginal& m, const SupportSet& s) {
  const SupportSet n = normalize_for(m, s);
  if (const auto* u = n.get<IntervalUnion>()) return u->complement();
  if (const auto* i = n.get<IntegerSet>()) {
    if (m.dimension() != 1 || !m.is_discrete()) throw InvalidArgument("integer sets need a discrete univariate law");
    return integer_complement(m.component(0), *i);
  }
  if (const auto* b = n.get<BoxUnion>()) {
    BoxUnion out = *b;
    out.complement = !out.complement;
    return out;
  }
  Predicate out = *n.get<Predicate>();
  out.complement = !out.complement;
  return out;
}

SupportSet intersect(const Marginal& m, const SupportSet& a, const SupportSet& b) {
  const SupportSet na = normalize_for(m, a);
  const SupportSet nb = normalize_for(m, b);
  const auto* ua = na.get<IntervalUnion>();
  const auto* ub = nb.get<IntervalUnion>();
  if (ua && ub) return ua->intersect(*ub);
  const auto* ia = na.get<IntegerSet>();
  const auto* ib = nb.get<IntegerSet>();
  if (ia && ib) {
    std::vector<std::int64_t> values;
    std::vector<double> shares;
    for (std::size_t j = 0; j < ia->values().size(); ++j) {
      const std::int64_t v = ia->values()[j];
      const double share = ia->shares()[j] * ib->share(v);
      if (share > 0.0) {
        values.push_back(v);
        shares.push_back(share);
      }
    }
    return IntegerSet(std::move(values), std::move(shares));
  }
  const auto* ba = na.get<BoxUnion>();
  const auto* bb = nb.get<BoxUnion>();
  if (ba && bb && !ba->complement && !bb->complement && ba->boxes.size() * bb->boxes.size() <= 12) {
    BoxUnion out;
    for (const auto& x : ba->boxes) {
      for (const auto& y : bb->boxes) {
        Box meet(x.size());
        bool empty = false;
        for (std::size_t k = 0; k < x.size(); ++k) {
          meet[k] = {std::max(x[k].lo, y[k].lo), std::min(x[k].hi, y[k].hi)};
          empty = empty || meet[k].empty();
        }
        if (!empty) out.boxes.push_back(std::move(meet));
      }
    }
    return out;
  }
  Predicate pred;
  pred.bounding_box = full_box(m.dimension());
  pred.test = [na, nb](std::span<const double> x) { return na.contains(x) && nb.contains(x); };
  if (const auto* p = na.get<Predicate>()) pred.seed = p->seed;
  pred.label = "(" + na.describe() + ") and (" + nb.describe() + ")";
  return pred;
}

struct RestrictedSampler::State {
  enum class Strategy { OneD, ProductBox, CoupledBox, Reject };
  State(Marginal m, SupportSet s) : marginal(std::move(m)), set(std::move(s)) {}
  Marginal marginal;
  SupportSet set;
  Strategy strategy = Strategy::Reject;
  double mass = 0.0;
  std::vector<Sampler1D> axes;           // OneD: 1, ProductBox: d
  double cell_cum[4] = {0, 0, 0, 0};     // CoupledBox
  Sampler1D cell_axes[2][2];             // [component][l]
};

RestrictedSampler::RestrictedSampler(Marginal m, SupportSet s) : state_(std::make_unique<State>(m, normalize_for(m, s))) {
  auto& st = *state_;
  const auto& set = st.set;
  st.mass = set_mass(m, set);
  if (!(st.mass > 0.0)) throw InvalidArgument("restricted sampling from a set of zero mass: " + set.describe());
  const auto* box = set.get<BoxUnion>();
  const bool single_box = box && !box->complement && box->boxes.size() == 1;
  if (m.dimension() == 1 && (set.get<IntervalUnion>() || set.get<IntegerSet>())) {
    st.strategy = State::Strategy::OneD;
    st.axes.push_back(sampler1d(m.component(0), as_set1d(m.component(0), set)));
  } else if (single_box && m.kind() == MarginalKind::Product) {
    st.strategy = State::Strategy::ProductBox;
    for (std::size_t k = 0; k < m.dimension(); ++k) {
      st.axes.push_back(Sampler1D::over(m.component(k), IntervalUnion{box->boxes[0][k]}));
    }
  } else if (single_box && m.kind() == MarginalKind::CoupledPair) {
    st.strategy = State::Strategy::CoupledBox;
    const auto& impl = *m.impl();
    for (std::size_t k = 0; k < 2; ++k) {
      for (int l = 0; l < 2; ++l) st.cell_axes[k][l] = sampler1d(m.base(), cut(impl.a0_sets[l], box->boxes[0][k]));
    }
    double acc = 0.0;
    for (int cell = 0; cell < 4; ++cell) {
      const int l1 = cell / 2;
      const int l2 = cell % 2;
      acc += impl.density_weight(l1, l2) * st.cell_axes[0][l1].mass() * st.cell_axes[1][l2].mass();
      st.cell_cum[cell] = acc;
    }
  } else {
    st.strategy = State::Strategy::Reject;
  }
}

RestrictedSampler::~RestrictedSampler() = default;
RestrictedSampler::RestrictedSampler(const RestrictedSampler& o) : state_(std::make_unique<State>(*o.state_)) {}
RestrictedSampler& RestrictedSampler::operator=(const RestrictedSampler& o) {
  if (this != &o) state_ = std::make_unique<State>(*o.state_);
  return *this;
}
RestrictedSampler::RestrictedSampler(RestrictedSampler&&) noexcept = default;
RestrictedSampler& RestrictedSampler::operator=(RestrictedSampler&&) noexcept = default;

double RestrictedSampler::mass() const { return state_->mass; }
bool RestrictedSampler::exact() const { return state_->strategy != State::Strategy::Reject; }

void RestrictedSampler::draw(RandomStream& rng, std::span<double> out) const {
  const auto& st = *state_;
  if (out.size() != st.marginal.dimension()) throw InvalidArgument("output span has the wrong dimension");
  switch (st.strategy) {
    case State::Strategy::OneD:
    case State::Strategy::ProductBox:
      for (std::size_t k = 0; k < st.axes.size(); ++k) out[k] = st.axes[k].draw(rng);
      return;
    case State::Strategy::CoupledBox: {
      const double u = rng.uniform() * st.cell_cum[3];
      int cell = 0;
      while (cell < 3 && !(u < st.cell_cum[cell])) ++cell;
      out[0] = st.cell_axes[0][cell / 2].draw(rng);
      out[1] = st.cell_axes[1][cell % 2].draw(rng);
      return;
    }
    case State::Strategy::Reject:
      for (std::size_t attempt = 0; attempt < kRejectionCap; ++attempt) {
        st.marginal.sample(rng, out);
        if (st.set.contains(out)) return;
      }
      throw RejectionCapExceeded("restricted sampling: no draw landed in " + st.set.describe() + " after 1e6 attempts");
  }
}

void restricted_sample(const Marginal& m, const SupportSet& s, RandomStream& rng, std::span<double> out) {
  RestrictedSampler(m, s).draw(rng, out);
}

Eigen::VectorXd restricted_sample(const Marginal& m, const SupportSet& s, RandomStream& rng) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(m.dimension()));
  restricted_sample(m, s, rng, std::span<double>(x.data(), m.dimension()));
  return x;
}

Eigen::Vector2d coupled_pair_sample(const Marginal& m, RandomStream& rng) {
  if (m.kind() != MarginalKind::CoupledPair) throw InvalidArgument("coupled_pair_sample needs a coupled pair marginal");
  Eigen::Vector2d x;
  m.sample(rng, std::span<double>(x.data(), 2));
  return x;
}

double Distribution1D::sample_in(const IntervalUnion& s, RandomStream& rng) const {
  return Sampler1D::over(*this, s).draw(rng);
}

double Distribution1D::sample_in(const IntegerSet& s, RandomStream& rng) const {
  return Sampler1D::over(*this, s).draw(rng);
}

}  // namespace gbpf
