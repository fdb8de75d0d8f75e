#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "errors.hpp"
#include "gbpf/partition.hpp"
#include "gbpf/presets.hpp"

namespace gbpf::cli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_object(const json& v, const std::string& where) {
  if (!v.is_object()) throw SchemaError(where + " must be an object");
}

void allow_keys(const json& v, const std::string& where, std::initializer_list<const char*> keys) {
  require_object(v, where);
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, value] : v.items()) {
    if (!allowed.count(key)) throw SchemaError("unknown key '" + key + "' in " + where);
  }
}

const json& field_of(const json& v, const char* key, const std::string& where) {
  if (!v.contains(key)) throw SchemaError(where + " needs '" + key + "'");
  return v.at(key);
}

double real_field(const json& v, const char* key, const std::string& where) {
  return parse_real(field_of(v, key, where), where + "." + key);
}

std::int64_t int_value(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw SchemaError(where + " must be an integer");
  return v.get<std::int64_t>();
}

std::size_t positive_size(const json& v, const std::string& where) {
  const auto x = int_value(v, where);
  if (x < 1) throw SchemaError(where + " must be positive");
  return static_cast<std::size_t>(x);
}

std::vector<double> real_list(const json& v, const std::string& where) {
  if (!v.is_array()) throw SchemaError(where + " must be a list");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(parse_real(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::int64_t> int_list(const json& v, const std::string& where) {
  if (!v.is_array()) throw SchemaError(where + " must be a list");
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(int_value(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::size_t> axis_list(const json& v, const std::string& where) {
  std::vector<std::size_t> out;
  for (const auto a : int_list(v, where)) {
    if (a < 1) throw SchemaError(where + " holds 1-based axes");
    out.push_back(static_cast<std::size_t>(a));
  }
  return out;
}

Interval parse_pair(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2) throw SchemaError(where + " must be a [lo, hi] pair");
  return {parse_real(v[0], where + "[0]"), parse_real(v[1], where + "[1]")};
}

IntervalUnion parse_intervals(const json& v, const std::string& where) {
  if (!v.is_array()) throw SchemaError(where + " must be a list of [lo, hi] pairs");
  std::vector<Interval> parts;
  for (std::size_t i = 0; i < v.size(); ++i) parts.push_back(parse_pair(v[i], where + "[" + std::to_string(i) + "]"));
  return IntervalUnion(std::move(parts));
}

// The first-axis latent model of a field spec, or one chosen axis.
GbpSetup field_axis_model(const FieldSpec& spec, std::size_t axis, const std::string& label) {
  if (axis < 1 || axis > spec.axes()) throw SchemaError("axis must lie in 1.." + std::to_string(spec.axes()));
  return {spec.gbp(axis - 1), spec.extents()[axis - 1], label + " axis " + std::to_string(axis)};
}

std::optional<CovarianceFunction> override_covariance(const RunConfig& c) {
  if (c.overrides.is_object() && c.overrides.contains("covariance")) return parse_covariance(c.overrides["covariance"]);
  return std::nullopt;
}

std::optional<std::vector<CovarianceFunction>> override_covariances(const RunConfig& c) {
  if (!c.overrides.is_object() || !c.overrides.contains("covariances")) return std::nullopt;
  const auto& list = c.overrides["covariances"];
  if (!list.is_array()) throw SchemaError("overrides.covariances must be a list");
  std::vector<CovarianceFunction> out;
  for (const auto& item : list) out.push_back(parse_covariance(item));
  return out;
}

std::optional<json> override_value(const RunConfig& c, const char* key) {
  if (c.overrides.is_object() && c.overrides.contains(key)) return c.overrides[key];
  return std::nullopt;
}

std::size_t default_max_lag(std::int64_t n) {
  return std::min<std::size_t>(kDefaultMaxLag, static_cast<std::size_t>(std::max<std::int64_t>(n - 1, 0) / 4));
}

std::vector<std::int64_t> default_window(const std::vector<std::int64_t>& extents) {
  std::vector<std::int64_t> out;
  for (const auto e : extents) out.push_back(std::min(kDefaultWindow, e / 2));
  return out;
}

// Presets run quadrature on construction, so each is built once per process.
const Preset& load_preset(const std::string& name) {
  static std::map<std::string, Preset> cache;
  if (const auto it = cache.find(name); it != cache.end()) return it->second;
  try {
    return cache.emplace(name, preset(name)).first->second;
  } catch (const InvalidArgument& e) {
    throw SchemaError(e.what());
  }
}

ProcessSetup process_from_block(const json& b, const RunConfig& c) {
  allow_keys(b, "process", {"marginal", "set", "p", "covariance", "n", "max_lag", "horizon"});
  Marginal m = parse_marginal(field_of(b, "marginal", "process"));
  SupportSet a = parse_set(field_of(b, "set", "process"));
  auto cov = override_covariance(c).value_or(parse_covariance(field_of(b, "covariance", "process")));
  const std::int64_t horizon = b.contains("horizon") ? int_value(b["horizon"], "process.horizon") : kDefaultHorizon;
  const double p = b.contains("p") ? parse_real(b["p"], "process.p") : set_mass(m, a);
  std::int64_t n = b.contains("n") ? int_value(b["n"], "process.n") : 2000;
  if (auto v = override_value(c, "n")) n = int_value(*v, "overrides.n");
  std::size_t max_lag = b.contains("max_lag") ? positive_size(b["max_lag"], "process.max_lag") : default_max_lag(n);
  if (auto v = override_value(c, "max_lag")) max_lag = positive_size(*v, "overrides.max_lag");
  try {
    ProcessSpec spec(std::move(m), std::move(a), GbpModel::unchecked(p, std::move(cov), horizon), n);
    return {std::move(spec), "process", max_lag};
  } catch (const InvalidArgument& e) {
    throw SchemaError(std::string("process: ") + e.what());
  }
}

Partition partition_from_block(const Marginal& m, const json& b, std::size_t axes) {
  allow_keys(b, "field.partition", {"mode", "cells", "p", "mean_axes", "center"});
  const std::string mode = b.value("mode", "cells");
  std::vector<double> probs;
  if (b.contains("p")) probs = real_list(b["p"], "field.partition.p");
  if (mode == "cells") {
    const auto& raw = field_of(b, "cells", "field.partition");
    const std::size_t count = std::size_t{1} << axes;
    std::vector<SupportSet> cells(count);
    std::vector<bool> seen(count, false);
    if (raw.is_array()) {
      if (raw.size() != count) throw SchemaError("field.partition.cells needs " + std::to_string(count) + " sets");
      for (std::size_t i = 0; i < count; ++i) {
        cells[i] = parse_set(raw[i]);
        seen[i] = true;
      }
    } else if (raw.is_object()) {
      for (const auto& [label, set] : raw.items()) {
        if (label.size() != axes || label.find_first_not_of("01") != std::string::npos) {
          throw SchemaError("cell label '" + label + "' must be " + std::to_string(axes) + " binary digits");
        }
        const std::size_t i = cell_index(label);
        cells[i] = parse_set(set);
        seen[i] = true;
      }
    } else {
      throw SchemaError("field.partition.cells must be a list or an object keyed by cell label");
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) throw SchemaError("every cell must be given");
    if (probs.empty()) {
      probs.assign(axes, 0.0);
      for (std::size_t i = 0; i < count; ++i) {
        const double mass = set_mass(m, cells[i]);
        for (std::size_t k = 0; k < axes; ++k) {
          if ((i >> k) & 1U) probs[k] += mass;
        }
      }
    }
    if (probs.size() != axes) throw SchemaError("field.partition.p needs one entry per axis");
    return Partition::from_cells(m, probs, std::move(cells));
  }
  if (probs.size() != axes) throw SchemaError("field.partition.p needs one entry per axis");
  std::vector<std::size_t> mean_axes;
  if (b.contains("mean_axes")) mean_axes = axis_list(b["mean_axes"], "field.partition.mean_axes");
  if (mode == "balanced") return build_partition(m, probs, BalancedNested{mean_axes});
  if (mode == "symmetric") {
    const double center = b.contains("center") ? parse_real(b["center"], "field.partition.center") : 0.0;
    return build_partition(m, probs, SymmetricNested{center, mean_axes});
  }
  throw SchemaError("unknown partition mode '" + mode + "' (cells, balanced, symmetric)");
}

FieldSetup field_from_block(const json& b, const RunConfig& c) {
  allow_keys(b, "field", {"marginal", "partition", "covariances", "extents", "window", "horizon"});
  Marginal m = parse_marginal(field_of(b, "marginal", "field"));
  std::vector<CovarianceFunction> covs;
  if (auto o = override_covariances(c)) {
    covs = std::move(*o);
  } else {
    const auto& list = field_of(b, "covariances", "field");
    if (!list.is_array() || list.empty()) throw SchemaError("field.covariances must be a non-empty list");
    for (const auto& item : list) covs.push_back(parse_covariance(item));
  }
  const std::size_t axes = covs.size();
  const std::int64_t horizon = b.contains("horizon") ? int_value(b["horizon"], "field.horizon") : kDefaultHorizon;
  std::vector<std::int64_t> extents(axes, 100);
  if (b.contains("extents")) extents = int_list(b["extents"], "field.extents");
  if (auto v = override_value(c, "extents")) extents = int_list(*v, "overrides.extents");
  if (extents.size() != axes) throw SchemaError("field.extents needs one entry per axis");
  std::vector<std::int64_t> window = default_window(extents);
  if (b.contains("window")) window = int_list(b["window"], "field.window");
  if (auto v = override_value(c, "window")) window = int_list(*v, "overrides.window");
  try {
    Partition part = partition_from_block(m, field_of(b, "partition", "field"), axes);
    std::vector<GbpModel> gbps;
    for (std::size_t k = 0; k < axes; ++k) gbps.push_back(GbpModel::unchecked(part.probs()[k], covs[k], horizon));
    FieldSpec spec(std::move(part), std::move(gbps), std::move(extents));
    return {std::move(spec), "field", std::move(window)};
  } catch (const InvalidArgument& e) {
    throw SchemaError(std::string("field: ") + e.what());
  } catch (const NotRepresentable& e) {
    throw SchemaError(std::string("field: ") + e.what());
  }
}

ProcessSetup process_from_preset(const Preset& p, const RunConfig& c) {
  if (p.kind != PresetKind::Process) throw SchemaError("preset " + p.name + " describes a field");
  std::int64_t n = p.process->length();
  if (auto v = override_value(c, "n")) n = int_value(*v, "overrides.n");
  std::size_t max_lag = default_max_lag(n);
  if (auto v = override_value(c, "max_lag")) max_lag = positive_size(*v, "overrides.max_lag");
  if (auto cov = override_covariance(c)) {
    const auto& s = *p.process;
    ProcessSpec spec(s.marginal(), s.a(), GbpModel::unchecked(s.p(), std::move(*cov)), n);
    return {std::move(spec), p.name, max_lag};
  }
  return {p.process->with_length(n), p.name, max_lag};
}

FieldSetup field_from_preset(const Preset& p, const RunConfig& c) {
  if (p.kind != PresetKind::Field) throw SchemaError("preset " + p.name + " describes a process");
  const FieldSpec& s = *p.field;
  std::vector<std::int64_t> extents = s.extents();
  if (auto v = override_value(c, "extents")) extents = int_list(*v, "overrides.extents");
  if (extents.size() != s.axes()) throw SchemaError("overrides.extents needs one entry per axis");
  std::vector<std::int64_t> window = default_window(extents);
  if (auto v = override_value(c, "window")) window = int_list(*v, "overrides.window");
  if (auto covs = override_covariances(c)) {
    if (covs->size() != s.axes()) throw SchemaError("overrides.covariances needs one entry per axis");
    std::vector<GbpModel> gbps;
    for (std::size_t k = 0; k < s.axes(); ++k) gbps.push_back(GbpModel::unchecked(s.gbp(k).p(), (*covs)[k]));
    return {FieldSpec(s.partition(), std::move(gbps), std::move(extents)), p.name, std::move(window)};
  }
  return {s.with_extents(std::move(extents)), p.name, std::move(window)};
}

}  // namespace

double parse_real(const json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw SchemaError(where + " must be a number or \"inf\"/\"-inf\"");
}

CovarianceFunction parse_covariance(const json& v) {
  require_object(v, "covariance");
  if (!v.contains("family") || !v["family"].is_string()) throw SchemaError("covariance needs a 'family' string");
  const auto family = v["family"].get<std::string>();
  const std::string where = "covariance(" + family + ")";
  try {
    if (family == "exponential") {
      allow_keys(v, where, {"family", "c", "theta"});
      return CovarianceFunction::exponential(real_field(v, "c", where), real_field(v, "theta", where));
    }
    if (family == "stretched_exponential") {
      allow_keys(v, where, {"family", "c", "theta", "alpha"});
      return CovarianceFunction::stretched_exponential(real_field(v, "c", where), real_field(v, "theta", where),
                                                       real_field(v, "alpha", where));
    }
    if (family == "two_exponential") {
      allow_keys(v, where, {"family", "c1", "rho1", "c2", "rho2"});
      return CovarianceFunction::two_exponential(real_field(v, "c1", where), real_field(v, "rho1", where),
                                                 real_field(v, "c2", where), real_field(v, "rho2", where));
    }
    if (family == "power") {
      allow_keys(v, where, {"family", "c", "H"});
      return CovarianceFunction::power_law(real_field(v, "c", where), real_field(v, "H", where));
    }
    if (family == "tabulated") {
      allow_keys(v, where, {"family", "values", "tail"});
      const std::string tail = v.value("tail", "geometric");
      if (tail != "geometric" && tail != "reject") throw SchemaError("tabulated tail must be geometric or reject");
      return CovarianceFunction::tabulated(real_list(field_of(v, "values", where), where + ".values"),
                                           tail == "reject" ? TailRule::Reject : TailRule::Geometric);
    }
  } catch (const InvalidArgument& e) {
    throw SchemaError(where + ": " + e.what());
  }
  throw SchemaError("unknown covariance family '" + family +
                    "' (exponential, stretched_exponential, two_exponential, power, tabulated)");
}

json covariance_to_json(const CovarianceFunction& cov) {
  return std::visit(
      Overloaded{
          [](const Exponential& e) { return json{{"family", "exponential"}, {"c", e.c}, {"theta", e.theta}}; },
          [](const StretchedExponential& s) {
            return json{{"family", "stretched_exponential"}, {"c", s.c}, {"theta", s.theta}, {"alpha", s.alpha}};
          },
          [](const TwoExponential& t) {
            return json{{"family", "two_exponential"}, {"c1", t.c1}, {"rho1", t.rho1}, {"c2", t.c2}, {"rho2", t.rho2}};
          },
          [](const PowerLaw& pl) { return json{{"family", "power"}, {"c", pl.c}, {"H", pl.hurst}}; },
          [](const Tabulated& t) {
            return json{{"family", "tabulated"},
                        {"values", t.values},
                        {"tail", t.tail == TailRule::Reject ? "reject" : "geometric"}};
          },
      },
      cov.params());
}

Distribution1D parse_distribution(const json& v) {
  require_object(v, "distribution");
  if (!v.contains("type") || !v["type"].is_string()) throw SchemaError("distribution needs a 'type' string");
  const auto type = v["type"].get<std::string>();
  const std::string where = "distribution(" + type + ")";
  try {
    if (type == "exponential") {
      allow_keys(v, where, {"type", "rate"});
      return Distribution1D::exponential(v.contains("rate") ? real_field(v, "rate", where) : 1.0);
    }
    if (type == "uniform") {
      allow_keys(v, where, {"type", "lo", "hi"});
      return Distribution1D::uniform(v.contains("lo") ? real_field(v, "lo", where) : 0.0,
                                     v.contains("hi") ? real_field(v, "hi", where) : 1.0);
    }
    if (type == "normal") {
      allow_keys(v, where, {"type", "mean", "sd"});
      return Distribution1D::normal(v.contains("mean") ? real_field(v, "mean", where) : 0.0,
                                    v.contains("sd") ? real_field(v, "sd", where) : 1.0);
    }
    if (type == "binomial") {
      allow_keys(v, where, {"type", "trials", "prob"});
      return Distribution1D::binomial(int_value(field_of(v, "trials", where), where + ".trials"),
                                      real_field(v, "prob", where));
    }
    if (type == "bernoulli") {
      allow_keys(v, where, {"type", "prob"});
      return Distribution1D::bernoulli(real_field(v, "prob", where));
    }
    if (type == "discrete") {
      allow_keys(v, where, {"type", "name", "first", "pmf"});
      return Distribution1D::discrete(v.value("name", "discrete"),
                                      int_value(field_of(v, "first", where), where + ".first"),
                                      real_list(field_of(v, "pmf", where), where + ".pmf"));
    }
  } catch (const InvalidArgument& e) {
    throw SchemaError(where + ": " + e.what());
  }
  throw SchemaError("unknown distribution type '" + type + "' (exponential, uniform, normal, binomial, bernoulli, discrete)");
}

Marginal parse_marginal(const json& v) {
  require_object(v, "marginal");
  const std::string type = v.value("type", "");
  try {
    if (type == "product") {
      allow_keys(v, "marginal(product)", {"type", "components"});
      const auto& list = field_of(v, "components", "marginal(product)");
      if (!list.is_array() || list.empty()) throw SchemaError("marginal(product).components must be a non-empty list");
      std::vector<Distribution1D> comps;
      for (const auto& item : list) comps.push_back(parse_distribution(item));
      return Marginal::product(std::move(comps));
    }
    if (type == "gaussian") {
      allow_keys(v, "marginal(gaussian)", {"type", "mean", "covariance"});
      const auto mean = real_list(field_of(v, "mean", "marginal(gaussian)"), "marginal(gaussian).mean");
      const auto& rows = field_of(v, "covariance", "marginal(gaussian)");
      const auto d = static_cast<Eigen::Index>(mean.size());
      if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != d) {
        throw SchemaError("marginal(gaussian).covariance must be a d x d list");
      }
      Eigen::MatrixXd sigma(d, d);
      for (Eigen::Index i = 0; i < d; ++i) {
        const auto row = real_list(rows[static_cast<std::size_t>(i)], "marginal(gaussian).covariance");
        if (static_cast<Eigen::Index>(row.size()) != d) throw SchemaError("marginal(gaussian).covariance must be d x d");
        for (Eigen::Index j = 0; j < d; ++j) sigma(i, j) = row[static_cast<std::size_t>(j)];
      }
      return Marginal::gaussian(Eigen::Map<const Eigen::VectorXd>(mean.data(), d), sigma);
    }
    if (type == "coupled_pair") {
      allow_keys(v, "marginal(coupled_pair)", {"type", "base", "a0", "c0"});
      return Marginal::coupled_pair(parse_distribution(field_of(v, "base", "marginal(coupled_pair)")),
                                    parse_set(field_of(v, "a0", "marginal(coupled_pair)")),
                                    real_field(v, "c0", "marginal(coupled_pair)"));
    }
  } catch (const InvalidArgument& e) {
    throw SchemaError("marginal(" + type + "): " + e.what());
  }
  return Marginal::univariate(parse_distribution(v));
}

SupportSet parse_set(const json& v) {
  if (v.is_array()) return parse_intervals(v, "set");
  require_object(v, "set");
  if (v.contains("intervals")) {
    allow_keys(v, "set", {"intervals"});
    return parse_intervals(v["intervals"], "set.intervals");
  }
  if (v.contains("integers")) {
    allow_keys(v, "set", {"integers", "shares"});
    auto values = int_list(v["integers"], "set.integers");
    std::vector<double> shares;
    if (v.contains("shares")) shares = real_list(v["shares"], "set.shares");
    try {
      return IntegerSet(std::move(values), std::move(shares));
    } catch (const InvalidArgument& e) {
      throw SchemaError(std::string("set: ") + e.what());
    }
  }
  if (v.contains("boxes")) {
    allow_keys(v, "set", {"boxes", "complement"});
    const auto& list = v["boxes"];
    if (!list.is_array() || list.empty()) throw SchemaError("set.boxes must be a non-empty list");
    BoxUnion u;
    u.complement = v.value("complement", false);
    for (std::size_t b = 0; b < list.size(); ++b) {
      const std::string where = "set.boxes[" + std::to_string(b) + "]";
      if (!list[b].is_array()) throw SchemaError(where + " must be a list of [lo, hi] pairs");
      Box box;
      for (std::size_t k = 0; k < list[b].size(); ++k) box.push_back(parse_pair(list[b][k], where));
      if (!u.boxes.empty() && box.size() != u.boxes.front().size()) throw SchemaError("boxes differ in dimension");
      u.boxes.push_back(std::move(box));
    }
    return u;
  }
  throw SchemaError("set needs 'intervals', 'integers' or 'boxes'");
}

json RunConfig::to_json() const {
  json out = json::object();
  if (preset) out["preset"] = *preset;
  if (seed) out["seed"] = *seed;
  out["replicates"] = replicates;
  out["unchecked"] = unchecked;
  out["svg"] = svg;
  if (!gbp.is_null()) out["gbp"] = gbp;
  if (!process.is_null()) out["process"] = process;
  if (!field.is_null()) out["field"] = field;
  if (!analyze.is_null()) out["analyze"] = analyze;
  if (!overrides.is_null()) out["overrides"] = overrides;
  return out;
}

RunConfig parse_config(const json& doc) {
  allow_keys(doc, "config",
             {"preset", "seed", "replicates", "unchecked", "svg", "out", "gbp", "process", "field", "analyze",
              "overrides"});
  RunConfig c;
  if (doc.contains("preset")) {
    if (!doc["preset"].is_string()) throw SchemaError("preset must be a string");
    c.preset = doc["preset"].get<std::string>();
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) throw SchemaError("seed must be a non-negative integer");
    c.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("replicates")) c.replicates = positive_size(doc["replicates"], "replicates");
  if (doc.contains("unchecked")) {
    if (!doc["unchecked"].is_boolean()) throw SchemaError("unchecked must be true or false");
    c.unchecked = doc["unchecked"].get<bool>();
  }
  if (doc.contains("svg")) {
    if (!doc["svg"].is_boolean()) throw SchemaError("svg must be true or false");
    c.svg = doc["svg"].get<bool>();
  }
  if (doc.contains("out")) {
    if (!doc["out"].is_string()) throw SchemaError("out must be a path string");
    c.out = doc["out"].get<std::string>();
  }
  for (const char* key : {"gbp", "process", "field", "analyze", "overrides"}) {
    if (doc.contains(key)) require_object(doc[key], key);
  }
  c.gbp = doc.value("gbp", json());
  c.process = doc.value("process", json());
  c.field = doc.value("field", json());
  c.analyze = doc.value("analyze", json());
  c.overrides = doc.value("overrides", json());
  if (c.overrides.is_object()) {
    allow_keys(c.overrides, "overrides", {"n", "extents", "covariance", "covariances", "max_lag", "window", "axis"});
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

GbpSetup resolve_gbp(const RunConfig& c) {
  std::optional<std::int64_t> n_override;
  if (auto v = override_value(c, "n")) n_override = int_value(*v, "overrides.n");
  if (!c.gbp.is_null()) {
    allow_keys(c.gbp, "gbp", {"p", "covariance", "n", "horizon"});
    const double p = real_field(c.gbp, "p", "gbp");
    auto cov = override_covariance(c).value_or(parse_covariance(field_of(c.gbp, "covariance", "gbp")));
    const std::int64_t horizon = c.gbp.contains("horizon") ? int_value(c.gbp["horizon"], "gbp.horizon") : kDefaultHorizon;
    const std::int64_t n = n_override.value_or(c.gbp.contains("n") ? int_value(c.gbp["n"], "gbp.n") : 1000);
    try {
      return {GbpModel::unchecked(p, std::move(cov), horizon), n, "gbp"};
    } catch (const InvalidArgument& e) {
      throw SchemaError(std::string("gbp: ") + e.what());
    }
  }
  if (!c.process.is_null() || (c.preset && load_preset(*c.preset).kind == PresetKind::Process)) {
    auto s = resolve_process(c);
    return {s.spec.gbp(), s.spec.length(), s.label};
  }
  if (!c.field.is_null() || c.preset) {
    auto s = resolve_field(c);
    std::size_t axis = 1;
    if (auto v = override_value(c, "axis")) axis = positive_size(*v, "overrides.axis");
    auto out = field_axis_model(s.spec, axis, s.label);
    if (n_override) out.n = *n_override;
    return out;
  }
  throw SchemaError("no model given: use --preset or a gbp, process or field block");
}

ProcessSetup resolve_process(const RunConfig& c) {
  if (!c.process.is_null()) return process_from_block(c.process, c);
  if (c.preset) return process_from_preset(load_preset(*c.preset), c);
  throw SchemaError("no process given: use --preset or a process block");
}

FieldSetup resolve_field(const RunConfig& c) {
  if (!c.field.is_null()) return field_from_block(c.field, c);
  if (c.preset) return field_from_preset(load_preset(*c.preset), c);
  throw SchemaError("no field given: use --preset or a field block");
}

std::vector<GbpSetup> resolve_all_models(const RunConfig& c) {
  const bool field = !c.field.is_null() ||
                     (c.gbp.is_null() && c.process.is_null() && c.preset &&
                      load_preset(*c.preset).kind == PresetKind::Field);
  if (!field) return {resolve_gbp(c)};
  auto s = resolve_field(c);
  std::vector<GbpSetup> out;
  for (std::size_t k = 1; k <= s.spec.axes(); ++k) out.push_back(field_axis_model(s.spec, k, s.label));
  return out;
}

}  // namespace gbpf::cli
