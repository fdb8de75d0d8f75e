#include "gbpf/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gbpf/errors.hpp"

namespace gbpf {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const char* what) {
  if (!ok) throw InvalidArgument(what);
}

void validate(const CovarianceFunction::Params& params) {
  std::visit(Overloaded{
                 [](const Exponential& e) {
                   require(std::isfinite(e.c) && std::isfinite(e.theta), "exponential: non-finite parameter");
                   require(e.theta > 0.0, "exponential: theta must be positive");
                 },
                 [](const StretchedExponential& s) {
                   require(std::isfinite(s.c) && std::isfinite(s.theta) && std::isfinite(s.alpha),
                           "stretched exponential: non-finite parameter");
                   require(s.theta > 0.0, "stretched exponential: theta must be positive");
                   require(s.alpha > 0.0 && s.alpha <= 1.0, "stretched exponential: alpha must lie in (0, 1]");
                 },
                 [](const TwoExponential& t) {
                   require(std::isfinite(t.c1) && std::isfinite(t.c2), "two exponential: non-finite parameter");
                   require(t.rho1 > 0.0 && t.rho1 < 1.0 && t.rho2 > 0.0 && t.rho2 < 1.0,
                           "two exponential: rho must lie in (0, 1)");
                 },
                 [](const PowerLaw& w) {
                   require(std::isfinite(w.c), "power: non-finite c");
                   require(w.hurst > 0.0 && w.hurst < 1.0, "power: H must lie in (0, 1)");
                 },
                 [](const Tabulated& t) {
                   require(!t.values.empty(), "tabulated: empty table");
                   for (double v : t.values) require(std::isfinite(v), "tabulated: non-finite value");
                   if (t.tail == TailRule::Geometric) {
                     require(t.values.size() >= 2, "tabulated: geometric tail needs at least two values");
                     require(t.values[t.values.size() - 2] != 0.0, "tabulated: geometric tail ratio undefined");
                   }
                 },
             },
             params);
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

std::string to_string(Family family) {
  switch (family) {
    case Family::Exponential: return "exponential";
    case Family::StretchedExponential: return "stretched_exponential";
    case Family::TwoExponential: return "two_exponential";
    case Family::PowerLaw: return "power";
    case Family::Tabulated: return "tabulated";
  }
  return "unknown";
}

CovarianceFunction::CovarianceFunction(Params params) : params_(std::move(params)) { validate(params_); }

CovarianceFunction CovarianceFunction::exponential(double c, double theta) { return CovarianceFunction(Exponential{c, theta}); }

CovarianceFunction CovarianceFunction::stretched_exponential(double c, double theta, double alpha) {
  return CovarianceFunction(StretchedExponential{c, theta, alpha});
}

CovarianceFunction CovarianceFunction::two_exponential(double c1, double rho1, double c2, double rho2) {
  return CovarianceFunction(TwoExponential{c1, rho1, c2, rho2});
}

CovarianceFunction CovarianceFunction::power_law(double c, double hurst) { return CovarianceFunction(PowerLaw{c, hurst}); }

CovarianceFunction CovarianceFunction::tabulated(std::vector<double> values, TailRule tail) {
  return CovarianceFunction(Tabulated{std::move(values), tail});
}

Family CovarianceFunction::family() const noexcept {
  return static_cast<Family>(params_.index());
}

double CovarianceFunction::operator()(std::int64_t lag) const {
  if (lag < 1) throw InvalidArgument("covariance is only defined for lags >= 1");
  const double x = static_cast<double>(lag);
  return std::visit(Overloaded{
                        [x](const Exponential& e) { return e.c * std::exp(-e.theta * x); },
                        [x](const StretchedExponential& s) { return s.c * std::exp(-s.theta * std::pow(x, s.alpha)); },
                        [x](const TwoExponential& t) { return t.c1 * std::pow(t.rho1, x) + t.c2 * std::pow(t.rho2, x); },
                        [x](const PowerLaw& w) { return w.c * std::pow(x, 2.0 * w.hurst - 2.0); },
                        [lag](const Tabulated& t) {
                          const auto m = static_cast<std::int64_t>(t.values.size());
                          if (lag <= m) return t.values[static_cast<std::size_t>(lag - 1)];
                          if (t.tail == TailRule::Reject) {
                            throw InvalidArgument("lag " + std::to_string(lag) + " is past the covariance table");
                          }
                          const double last = t.values[static_cast<std::size_t>(m - 1)];
                          const double ratio = last / t.values[static_cast<std::size_t>(m - 2)];
                          return last * std::pow(ratio, static_cast<double>(lag - m));
                        },
                    },
                    params_);
}

std::vector<double> CovarianceFunction::table(std::int64_t n) const {
  std::vector<double> out(static_cast<std::size_t>(std::max<std::int64_t>(n, 0)));
  for (std::int64_t k = 1; k <= n; ++k) out[static_cast<std::size_t>(k - 1)] = (*this)(k);
  return out;
}

std::int64_t CovarianceFunction::max_lag() const noexcept {
  if (const auto* t = std::get_if<Tabulated>(&params_); t && t->tail == TailRule::Reject) {
    return static_cast<std::int64_t>(t->values.size());
  }
  return -1;
}

std::string CovarianceFunction::describe() const {
  return std::visit(Overloaded{
                        [](const Exponential& e) { return "exponential(c=" + num(e.c) + ", theta=" + num(e.theta) + ")"; },
                        [](const StretchedExponential& s) {
                          return "stretched_exponential(c=" + num(s.c) + ", theta=" + num(s.theta) +
                                 ", alpha=" + num(s.alpha) + ")";
                        },
                        [](const TwoExponential& t) {
                          return "two_exponential(c1=" + num(t.c1) + ", rho1=" + num(t.rho1) + ", c2=" + num(t.c2) +
                                 ", rho2=" + num(t.rho2) + ")";
                        },
                        [](const PowerLaw& w) { return "power(c=" + num(w.c) + ", H=" + num(w.hurst) + ")"; },
                        [](const Tabulated& t) {
                          return "tabulated(" + std::to_string(t.values.size()) + " values, " +
                                 (t.tail == TailRule::Geometric ? "geometric" : "reject") + " tail)";
                        },
                    },
                    params_);
}

double eval_cov(const CovarianceFunction& cov, std::int64_t lag) { return cov(lag); }

std::string to_string(Clause clause) {
  switch (clause) {
    case Clause::NotPositive: return "NotPositive";
    case Clause::NotDecreasing: return "NotDecreasing";
    case Clause::RatioNotNondecreasing: return "RatioNotNondecreasing";
    case Clause::C1TooLarge: return "C1TooLarge";
    case Clause::C2TooSmall: return "C2TooSmall";
  }
  return "Unknown";
}

bool ValidityReport::violates(Clause clause) const {
  for (const auto& v : violated_clauses) {
    if (v.clause == clause) return true;
  }
  return false;
}

std::string ValidityReport::summary() const {
  std::ostringstream os;
  os.precision(17);
  if (pass) {
    os << "pass (horizon " << horizon << ")";
    return os.str();
  }
  os << "fail (horizon " << horizon << "):";
  for (const auto& v : violated_clauses) {
    os << " " << to_string(v.clause) << "[lag " << v.witness_lag << ": lhs=" << v.lhs << ", rhs=" << v.rhs << "]";
  }
  return os.str();
}

ValidityReport check_assumption(const CovarianceFunction& cov, double p, std::int64_t horizon) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("p must lie in (0, 1)");
  if (horizon < 3) throw InvalidArgument("horizon must be at least 3");
  if (const auto cap = cov.max_lag(); cap >= 0) {
    if (cap < 3) throw InvalidArgument("covariance table must cover lags 1..3");
    horizon = std::min(horizon, cap);
  }

  std::vector<double> c = cov.table(horizon);
  // Parametric families are positive whenever C(1) is; past the point where
  // they underflow, zeros and ratios of subnormals say nothing about the
  // parameters, so the scan stops there. A geometric table tail is treated the
  // same way once past the supplied values.
  std::int64_t first_synthetic = 3;
  if (const auto* t = std::get_if<Tabulated>(&cov.params())) {
    first_synthetic = t->tail == TailRule::Geometric ? std::max<std::int64_t>(3, std::ssize(t->values)) : horizon;
  }
  if (first_synthetic < horizon && c[0] > 0.0) {
    std::int64_t last = first_synthetic;
    while (last < horizon && c[static_cast<std::size_t>(last)] >= kUnderflowFloor) ++last;
    horizon = last;
    c.resize(static_cast<std::size_t>(horizon));
  }

  ValidityReport report;
  report.horizon = horizon;
  auto at = [&c](std::int64_t lag) { return c[static_cast<std::size_t>(lag - 1)]; };

  for (std::int64_t x = 1; x <= horizon; ++x) {
    if (!(at(x) > 0.0)) {
      report.violated_clauses.push_back({Clause::NotPositive, x, at(x), 0.0});
      break;
    }
  }
  for (std::int64_t x = 1; x < horizon; ++x) {
    if (at(x + 1) > at(x)) {
      report.violated_clauses.push_back({Clause::NotDecreasing, x + 1, at(x + 1), at(x)});
      break;
    }
  }
  if (!report.violates(Clause::NotPositive)) {
    for (std::int64_t x = 1; x + 2 <= horizon; ++x) {
      const double r0 = at(x + 1) / at(x);
      const double r1 = at(x + 2) / at(x + 1);
      if (r1 < r0 - 1e-12) {
        report.violated_clauses.push_back({Clause::RatioNotNondecreasing, x + 1, r1, r0});
        break;
      }
    }
  }
  const double c1 = at(1);
  const double c2 = at(2);
  const double c1_bound = p * (1.0 - p);
  if (!(c1 < c1_bound)) report.violated_clauses.push_back({Clause::C1TooLarge, 1, c1, c1_bound});
  const double c2_bound = (p * p + c1) * (p * p + c1) / p - p * p;
  if (!(c2 > c2_bound)) report.violated_clauses.push_back({Clause::C2TooSmall, 2, c2, c2_bound});

  report.pass = report.violated_clauses.empty();
  return report;
}

double power_law_c_bound(double p, double hurst) {
  const double t = std::pow(2.0, 2.0 * hurst - 2.0);
  const double second = 0.5 * p * (-2.0 * p + t + std::sqrt(4.0 * p - 4.0 * p * t + t * t));
  return std::min(p * (1.0 - p), second);
}

AdmissibleRegion admissible_region(Family family, double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("p must lie in (0, 1)");
  const double pq = p * (1.0 - p);
  AdmissibleRegion region{family, p, {}, false};
  switch (family) {
    case Family::Exponential:
      region.bounds = {"theta > 0", "0 < c < p(1-p) = " + num(pq)};
      // With t = exp(-theta) the clause (d) margin is concave in c, equals
      // p^2(1-p) at c = 0 and p^2(1-p)(1-t)^2 at c = p(1-p), so it stays positive.
      region.sufficiency_verified = true;
      break;
    case Family::StretchedExponential:
      region.bounds = {"theta > 0", "p(1-p)/2 < c*exp(theta) < p(1-p)",
                       "log2(p(1-p) / (c*exp(-theta))) < alpha < 1"};
      break;
    case Family::TwoExponential:
      region.bounds = {"c1, c2 > 0", "0 < rho1, rho2 < 1",
                       "c1*rho1 + c2*rho2 < p^1.5 - p^2 = " + num(std::pow(p, 1.5) - p * p)};
      break;
    case Family::PowerLaw:
      region.bounds = {"0 < H < 1",
                       "0 < c < min{p(1-p), p/2 (-2p + 2^(2H-2) + sqrt(4p - p 2^(2H) + 2^(4H-4)))}"};
      break;
    case Family::Tabulated:
      throw InvalidArgument("tabulated covariances have no closed region; use check_assumption");
  }
  return region;
}

bool AdmissibleRegion::contains(const CovarianceFunction& cov) const {
  if (cov.family() != family) throw InvalidArgument("covariance family does not match the region");
  const double pq = p * (1.0 - p);
  return std::visit(Overloaded{
                        [&](const Exponential& e) { return e.theta > 0.0 && e.c > 0.0 && e.c < pq; },
                        [&](const StretchedExponential& s) {
                          const double ce = s.c * std::exp(s.theta);
                          if (!(s.theta > 0.0 && s.c > 0.0 && ce > pq / 2.0 && ce < pq)) return false;
                          const double lo = std::log2(pq / (s.c * std::exp(-s.theta)));
                          return s.alpha > lo && s.alpha < 1.0;
                        },
                        [&](const TwoExponential& t) {
                          return t.c1 > 0.0 && t.c2 > 0.0 && t.c1 * t.rho1 + t.c2 * t.rho2 < std::pow(p, 1.5) - p * p;
                        },
                        [&](const PowerLaw& w) { return w.c > 0.0 && w.c < power_law_c_bound(p, w.hurst); },
                        [](const Tabulated&) { return false; },
                    },
                    cov.params());
}

}  // namespace gbpf
