#include "gbpf/presets.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "gbpf/errors.hpp"

namespace gbpf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(10);
  out << v;
  return out.str();
}

// Upper-tail normal quantile: P(Z > z_q) = q.
double z_upper(double q) { return Distribution1D::normal(0.0, 1.0).quantile_upper(q); }

Preset process_preset(std::string name, std::string description, Marginal m, SupportSet a, CovarianceFunction cov,
                      bool unchecked = false) {
  const double p = set_mass(m, a);
  GbpModel gbp = unchecked ? GbpModel::unchecked(p, std::move(cov)) : GbpModel::checked(p, std::move(cov));
  Preset out;
  out.name = std::move(name);
  out.description = std::move(description);
  out.kind = PresetKind::Process;
  out.unchecked = unchecked;
  out.process.emplace(std::move(m), std::move(a), std::move(gbp), kPresetLength);
  out.notes.push_back("p = " + fmt(p));
  const Eigen::MatrixXd dd = theoretical_cov(*out.process);
  std::ostringstream factor;
  factor << "lag covariance factor D = " << dd.format(Eigen::IOFormat(10, 0, ", ", "; ", "", "", "[", "]"));
  out.notes.push_back(factor.str());
  if (unchecked && !out.process->gbp().validity().pass) {
    out.notes.push_back("validity check fails: " + out.process->gbp().validity().summary());
  }
  return out;
}

Preset field_preset(std::string name, std::string description, Marginal m, std::vector<SupportSet> cells,
                    std::vector<CovarianceFunction> covs) {
  // Axis probabilities from the cell masses: p_k is the mass of all cells with l_k = 1.
  const std::size_t n = covs.size();
  std::vector<double> masses;
  for (const auto& c : cells) masses.push_back(set_mass(m, c));
  std::vector<double> probs(n, 0.0);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (std::size_t k = 0; k < n; ++k) {
      if ((c >> k) & 1U) probs[k] += masses[c];
    }
  }
  std::vector<GbpModel> gbps;
  for (std::size_t k = 0; k < n; ++k) gbps.push_back(GbpModel::checked(probs[k], covs[k]));
  Partition part = Partition::from_cells(std::move(m), probs, std::move(cells));
  Preset out;
  out.name = std::move(name);
  out.description = std::move(description);
  out.kind = PresetKind::Field;
  out.field.emplace(std::move(part), std::move(gbps), std::vector<std::int64_t>(n, kPresetExtent));
  for (std::size_t k = 0; k < n; ++k) out.notes.push_back("p" + std::to_string(k + 1) + " = " + fmt(probs[k]));
  return out;
}

Preset exp_lrd() {
  const double a = -std::log(0.3);
  return process_preset("exp-lrd-6.1", "Exp(1) marginal, A = (-ln 0.3, inf), C(k) = 0.12 k^-0.6",
                        Marginal::univariate(Distribution1D::exponential(1.0)), IntervalUnion{{a, kInf}},
                        CovarianceFunction::power_law(0.12, 0.7));
}

Preset gauss_lrd() {
  return process_preset("gauss-lrd-6.1", "N(0, 1) marginal, A = (z_0.3, inf), C(k) = 0.12 k^-0.6",
                        Marginal::univariate(Distribution1D::normal(0.0, 1.0)), IntervalUnion{{z_upper(0.3), kInf}},
                        CovarianceFunction::power_law(0.12, 0.7));
}

Preset bivariate_gauss() {
  Eigen::Matrix2d sigma;
  sigma << 1.0, -0.5, -0.5, 1.0;
  return process_preset("bivariate-gauss-6.2",
                        "N(0, [[1, -0.5], [-0.5, 1]]) marginal, A = (0.2, inf) x (-inf, -0.2), C(k) = 0.2 e^{-0.1 k}",
                        Marginal::gaussian(Eigen::Vector2d::Zero(), sigma),
                        SupportSet::box({{0.2, kInf}, {-kInf, -0.2}}), CovarianceFunction::exponential(0.2, 0.1),
                        true);
}

Preset bivariate_exp() {
  const double a3 = -std::log(0.3);
  const double a8 = -std::log(0.8);
  Marginal m = Marginal::coupled_pair(Distribution1D::exponential(1.0), IntervalUnion{{a3, kInf}}, 0.12);
  BoxUnion a{{{{a3, kInf}, {a8, kInf}}, {{a8, kInf}, {a3, kInf}}}, false};
  return process_preset("bivariate-exp-6.2",
                        "coupled Exp(1) pair (p0 = 0.3, c0 = 0.12), A = {x1 > -ln .3, x2 > -ln .8} u {x1 > -ln .8, "
                        "x2 > -ln .3}, C(k) = 0.12 e^{-0.2 k}",
                        std::move(m), std::move(a), CovarianceFunction::exponential(0.12, 0.2));
}

Preset bivariate_binomial() {
  Marginal m = Marginal::coupled_pair(Distribution1D::binomial(20, 0.4), IntegerSet::range(0, 7), 0.12);
  BoxUnion a{{{{-kInf, 7.5}, {-kInf, 9.5}}, {{-kInf, 9.5}, {-kInf, 7.5}}}, false};
  Preset out = process_preset("bivariate-binomial-6.2",
                              "coupled Binomial(20, 0.4) pair (A0 = {0..7}, c0 = 0.12), A = {x1 <= 7, x2 <= 9} u "
                              "{x1 <= 9, x2 <= 7}, C(k) = 0.2 e^{-0.2 k}",
                              std::move(m), std::move(a), CovarianceFunction::exponential(0.2, 0.2));
  out.notes.push_back("p0 = " + fmt(out.process->marginal().p0()));
  return out;
}

Preset uniform1d() {
  return process_preset("uniform-5.9", "U(0, 1) marginal, A = (0, 0.3), C(k) = 0.12 k^-0.6",
                        Marginal::univariate(Distribution1D::uniform(0.0, 1.0)), IntervalUnion{{0.0, 0.3}},
                        CovarianceFunction::power_law(0.12, 0.7));
}

Preset uniform2d() {
  const auto u = Distribution1D::uniform(0.0, 1.0);
  return process_preset("uniform2d-5.9", "U(0, 1)^2 marginal, A = (0, 0.5) x (0, 0.6), C(k) = 0.12 k^-0.6",
                        Marginal::product({u, u}), SupportSet::box({{0.0, 0.5}, {0.0, 0.6}}),
                        CovarianceFunction::power_law(0.12, 0.7));
}

Preset exp_short() {
  return process_preset("exp-5.8", "Exp(1) marginal, A = (-ln 0.4, inf), C(k) = 0.15 e^{-0.3 k}",
                        Marginal::univariate(Distribution1D::exponential(1.0)), IntervalUnion{{-std::log(0.4), kInf}},
                        CovarianceFunction::exponential(0.15, 0.3));
}

Preset binary_field() {
  const double p1 = 0.5;
  const double p2 = 0.5;
  const double zero = 1.0 - p1 * p2;
  std::vector<SupportSet> cells = {
      IntegerSet({0}, {(1 - p1) * (1 - p2) / zero}),
      IntegerSet({0}, {p1 * (1 - p2) / zero}),
      IntegerSet({0}, {(1 - p1) * p2 / zero}),
      IntegerSet({1}),
  };
  const auto cov = CovarianceFunction::exponential(0.2, std::log(2.0));
  Preset out = field_preset("binary-field-5.10", "X(t) = xi1(t1) xi2(t2), p1 = p2 = 0.5, C(k) = 0.2 * 2^-k",
                            Marginal::univariate(Distribution1D::bernoulli(p1 * p2)), std::move(cells), {cov, cov});
  return out;
}

Preset gauss_field() {
  const double z40 = z_upper(0.4), z25 = z_upper(0.25), z20 = z_upper(0.2), z15 = z_upper(0.15);
  std::vector<SupportSet> cells = {
      IntervalUnion{{-z25, -z40}, {z40, z25}},
      IntervalUnion{{-z20, -z25}, {z15, kInf}},
      IntervalUnion{{-kInf, -z20}, {z25, z15}},
      IntervalUnion{{-z40, z40}},
  };
  return field_preset("gauss-field-6.3",
                      "N(0, 1) field, p1 = 0.4, C1(k) = 0.23 e^{-0.4 k}, p2 = 0.5, C2(k) = 0.24 e^{-0.5 k}",
                      Marginal::univariate(Distribution1D::normal(0.0, 1.0)), std::move(cells),
                      {CovarianceFunction::exponential(0.23, 0.4), CovarianceFunction::exponential(0.24, 0.5)});
}

Preset gauss_field_b() {
  const IntervalUnion a10{{0.5, 1.386}};
  const IntervalUnion a01 = IntervalUnion{{0.0, kInf}}.subtract(a10);
  std::vector<SupportSet> cells = {a10.mirrored(0.0), a10, a01, a01.mirrored(0.0)};
  return field_preset("gauss-field-6.3b",
                      "N(0, 1) field, A10 = (0.5, 1.386), A01 = (0, inf) \\ A10, A11 = -A01, A00 = -A10, "
                      "C1(k) = 0.23 e^{-0.4 k}, C2(k) = 0.24 e^{-0.5 k}",
                      Marginal::univariate(Distribution1D::normal(0.0, 1.0)), std::move(cells),
                      {CovarianceFunction::exponential(0.23, 0.4), CovarianceFunction::exponential(0.24, 0.5)});
}

Preset gauss_field_i() {
  // b solves phi(b) = phi(0) / 2, which makes mu11 = mu00 and mu01 = mu10.
  const double ap = z_upper(0.2);
  const double b = std::sqrt(2.0 * std::log(2.0));
  std::vector<SupportSet> cells = {
      IntervalUnion{{-ap, 0.0}},
      IntervalUnion{{0.0, ap}},
      IntervalUnion{{-b, -ap}, {b, kInf}},
      IntervalUnion{{-kInf, -b}, {ap, b}},
  };
  Preset out = field_preset("gauss-field-5.11i",
                            "N(0, 1) field with |mu^{l1 l2}| equal across cells: A10 = (0, a'), A00 = (-a', 0), "
                            "A11 = (-inf, -b) u (a', b), A01 = (b, inf) u (-b, -a'), a' = z_0.2, b = sqrt(2 ln 2)",
                            Marginal::univariate(Distribution1D::normal(0.0, 1.0)), std::move(cells),
                            {CovarianceFunction::exponential(0.2, 0.4), CovarianceFunction::exponential(0.2, 0.5)});
  return out;
}

Preset gauss_field_ii() {
  // Tail masses z_a = 0.2 and z_b solving 4 (0.5 - z_b)(z_b - z_a) = z_a^2.
  const double za = 0.2;
  const double zb = (0.7 + std::sqrt(0.05)) / 2.0;
  const double a = z_upper(za);
  const double b = z_upper(zb);
  std::vector<SupportSet> cells = {
      IntervalUnion{{-a, -b}, {b, a}},
      IntervalUnion{{-kInf, -a}},
      IntervalUnion{{a, kInf}},
      IntervalUnion{{-b, b}},
  };
  Preset out = field_preset("gauss-field-5.11ii",
                            "N(0, 1) field with A10 = (-inf, -a), A01 = (a, inf), A11 = (-b, b), "
                            "4 (0.5 - z_b)(z_b - z_a) = z_a^2, z_a = 0.2",
                            Marginal::univariate(Distribution1D::normal(0.0, 1.0)), std::move(cells),
                            {CovarianceFunction::exponential(0.12, 0.4), CovarianceFunction::exponential(0.12, 0.5)});
  out.notes.push_back("a = " + fmt(a) + ", b = " + fmt(b));
  return out;
}

const std::map<std::string, std::function<Preset()>, std::less<>>& registry() {
  static const std::map<std::string, std::function<Preset()>, std::less<>> r = {
      {"exp-lrd-6.1", exp_lrd},
      {"gauss-lrd-6.1", gauss_lrd},
      {"bivariate-gauss-6.2", bivariate_gauss},
      {"bivariate-exp-6.2", bivariate_exp},
      {"bivariate-binomial-6.2", bivariate_binomial},
      {"uniform-5.9", uniform1d},
      {"uniform2d-5.9", uniform2d},
      {"exp-5.8", exp_short},
      {"binary-field-5.10", binary_field},
      {"gauss-field-6.3", gauss_field},
      {"gauss-field-6.3b", gauss_field_b},
      {"gauss-field-5.11i", gauss_field_i},
      {"gauss-field-5.11ii", gauss_field_ii},
  };
  return r;
}

}  // namespace

Preset preset(std::string_view name) {
  const auto& r = registry();
  const auto it = r.find(name);
  if (it == r.end()) throw InvalidArgument("unknown preset: " + std::string(name));
  return it->second();
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [name, make] : registry()) out.push_back(name);
  return out;
}

}  // namespace gbpf
