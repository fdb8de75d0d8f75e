#include "commands.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>

#include "csv.hpp"
#include "errors.hpp"
#include "gbpf/field.hpp"
#include "gbpf/gbp.hpp"
#include "gbpf/presets.hpp"
#include "gbpf/process.hpp"
#include "gbpf/random.hpp"
#include "gbpf/stats.hpp"
#include "svg.hpp"

namespace gbpf::cli {

namespace fs = std::filesystem;

namespace {

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("gbpf", sink);
  logger->set_pattern("gbpf: %l: %v");
  return logger;
}

std::uint64_t require_seed(const RunConfig& c) {
  if (!c.seed) throw SchemaError("a seed is required: pass --seed or set \"seed\" in the config");
  return *c.seed;
}

fs::path output_dir(const RunConfig& c) {
  const fs::path dir = c.out.value_or("out");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw SchemaError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

std::string replicate_name(const std::string& stem, std::size_t r, std::size_t replicates) {
  if (replicates == 1) return stem + ".csv";
  std::string idx = std::to_string(r);
  const std::size_t width = std::max<std::size_t>(3, std::to_string(replicates - 1).size());
  idx.insert(0, width - idx.size(), '0');
  return stem + "_r" + idx + ".csv";
}

void save_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

json report_json(const std::string& label, const GbpModel& model) {
  const auto& r = model.validity();
  json violations = json::array();
  for (const auto& v : r.violated_clauses) {
    violations.push_back({{"clause", to_string(v.clause)}, {"witness_lag", v.witness_lag}, {"lhs", v.lhs}, {"rhs", v.rhs}});
  }
  return {{"label", label},
          {"p", model.p()},
          {"covariance", covariance_to_json(model.covariance())},
          {"pass", r.pass},
          {"horizon", r.horizon},
          {"violations", violations}};
}

// Returns an exit code when the gate stops the run.
std::optional<int> validity_gate(const std::string& label, const GbpModel& model, bool unchecked, const Io& io,
                                 spdlog::logger& log) {
  const auto& r = model.validity();
  if (r.pass) return std::nullopt;
  if (!unchecked) {
    io.err << "gbpf: validity check failed for " << label << ": " << r.summary() << "\n";
    return kValidityFailure;
  }
  log.warn("{} fails the validity check, continuing unchecked: {}", label, r.summary());
  return std::nullopt;
}

void write_manifest(const fs::path& dir, const std::string& command, const RunConfig& c, json extra) {
  json m = {{"command", command}, {"config", c.to_json()}};
  for (auto& [k, v] : extra.items()) m[k] = v;
  save_text(dir / "manifest.json", m.dump(2) + "\n");
}

json seed_list(std::uint64_t seed, std::size_t replicates) {
  json out = json::array();
  for (std::size_t r = 0; r < replicates; ++r) out.push_back(replicate_seed(seed, r));
  return out;
}

// Lagged covariance output shared by simulate-process and analyze.
struct LagTable {
  std::vector<std::int64_t> lags;
  std::vector<Eigen::MatrixXd> estimate;
  std::vector<Eigen::MatrixXd> se;  // empty with one replicate
};

LagTable lag_table(const std::vector<SeriesCovariance>& runs, std::size_t n) {
  LagTable t;
  for (std::size_t k = 0; k < runs.front().lags.size(); ++k) t.lags.push_back(static_cast<std::int64_t>(k));
  if (runs.size() == 1) {
    t.estimate = runs.front().lags;
    return t;
  }
  std::vector<std::vector<Eigen::MatrixXd>> raw;
  for (const auto& r : runs) raw.push_back(r.lags);
  auto stats = replicate_statistics(raw, t.lags, n);
  t.estimate = std::move(stats.estimates);
  t.se = std::move(stats.se);
  return t;
}

CsvWriter lag_csv(const LagTable& t, const ProcessSpec* spec) {
  std::vector<std::string> header = {"lag", "a", "b", "estimate"};
  if (!t.se.empty()) header.push_back("se");
  if (spec) header.push_back("theoretical");
  CsvWriter csv(header);
  const auto d = static_cast<std::size_t>(t.estimate.front().rows());
  for (std::size_t i = 0; i < t.lags.size(); ++i) {
    Eigen::MatrixXd theo;
    if (spec) theo = lag_covariance(*spec, t.lags[i]);
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b < d; ++b) {
        const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
        csv.add(t.lags[i]).add(std::uint64_t{a + 1}).add(std::uint64_t{b + 1}).add(t.estimate[i](ia, ib));
        if (!t.se.empty()) csv.add(t.se[i](ia, ib));
        if (spec) csv.add(theo(ia, ib));
        csv.end_row();
      }
    }
  }
  return csv;
}

std::string lag_svg(const LagTable& t, const ProcessSpec* spec, const std::string& title) {
  Series est{"estimate", {}, {}, "#1f77b4", true};
  Series theo{"theoretical", {}, {}, "#d62728", false};
  for (std::size_t i = 1; i < t.lags.size(); ++i) {
    est.x.push_back(static_cast<double>(t.lags[i]));
    est.y.push_back(t.estimate[i](0, 0));
    if (spec) {
      theo.x.push_back(static_cast<double>(t.lags[i]));
      theo.y.push_back(lag_covariance(*spec, t.lags[i])(0, 0));
    }
  }
  std::vector<Series> series = {est};
  if (spec) series.push_back(theo);
  return line_chart(title, "lag", series);
}

struct CorrelogramTable {
  std::vector<std::int64_t> window;
  std::size_t components = 0;
  // Per component: one Correlogram per replicate.
  std::vector<std::vector<Correlogram>> runs;
};

CsvWriter correlogram_csv(const CorrelogramTable& t, const FieldSpec* spec) {
  const std::size_t n = t.window.size();
  const std::size_t reps = t.runs.front().size();
  std::vector<std::string> header = {"component"};
  for (std::size_t k = 0; k < n; ++k) header.push_back("s" + std::to_string(k + 1));
  header.push_back("estimate");
  if (reps > 1) header.push_back("se");
  header.push_back("pairs");
  if (spec) header.push_back("theoretical");
  CsvWriter csv(header);
  const std::size_t size = t.runs.front().front().size();
  std::vector<Eigen::MatrixXd> theo;
  if (spec) {
    for (std::size_t i = 0; i < size; ++i) {
      theo.push_back(theoretical_field_cov(*spec, t.runs.front().front().lag(i)));
    }
  }
  for (std::size_t c = 0; c < t.components; ++c) {
    const auto& runs = t.runs[c];
    for (std::size_t i = 0; i < size; ++i) {
      double mean = 0.0;
      for (const auto& r : runs) mean += r.value(i);
      mean /= static_cast<double>(reps);
      csv.add(std::uint64_t{c + 1});
      for (const auto s : runs.front().lag(i)) csv.add(s);
      csv.add(mean);
      if (reps > 1) {
        double ss = 0.0;
        for (const auto& r : runs) ss += (r.value(i) - mean) * (r.value(i) - mean);
        csv.add(std::sqrt(ss / static_cast<double>(reps - 1) / static_cast<double>(reps)));
      }
      csv.add(runs.front().pair_count(i));
      if (spec) csv.add(theo[i](static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c)));
      csv.end_row();
    }
  }
  return csv;
}

std::string correlogram_svg(const CorrelogramTable& t, const FieldSpec* spec, const std::string& title) {
  // Slice along the first axis with every other lag coordinate at zero.
  Series est{"estimate", {}, {}, "#1f77b4", true};
  Series theo{"theoretical", {}, {}, "#d62728", false};
  const auto& runs = t.runs.front();
  std::vector<std::int64_t> lag(t.window.size(), 0);
  for (std::int64_t s = 0; s <= t.window.front(); ++s) {
    lag[0] = s;
    double mean = 0.0;
    for (const auto& r : runs) mean += r.at(lag);
    est.x.push_back(static_cast<double>(s));
    est.y.push_back(mean / static_cast<double>(runs.size()));
    if (spec) {
      theo.x.push_back(static_cast<double>(s));
      theo.y.push_back(theoretical_field_cov(*spec, lag)(0, 0));
    }
  }
  std::vector<Series> series = {est};
  if (spec) series.push_back(theo);
  return line_chart(title, "lag along axis 1", series);
}

std::vector<std::int64_t> json_window(const json& v) {
  if (!v.is_array()) throw SchemaError("window must be a list of integers");
  std::vector<std::int64_t> out;
  for (const auto& x : v) {
    if (!x.is_number_integer()) throw SchemaError("window must be a list of integers");
    out.push_back(x.get<std::int64_t>());
  }
  return out;
}

// Columns named prefix1, prefix2, ... in order; returns their indices.
std::vector<std::size_t> numbered_columns(const CsvTable& t, const std::string& prefix) {
  std::vector<std::size_t> out;
  for (std::size_t k = 1;; ++k) {
    const auto idx = t.column(prefix + std::to_string(k));
    if (idx < 0) break;
    out.push_back(static_cast<std::size_t>(idx));
  }
  return out;
}

bool has_spec(const RunConfig& c) { return c.preset || !c.process.is_null() || !c.field.is_null(); }

}  // namespace

std::uint64_t replicate_seed(std::uint64_t seed, std::size_t r) {
  return r == 0 ? seed : derive_seed(seed, StreamTag::Replicate, r);
}

int cmd_check(const RunConfig& c, const Io& io) {
  const auto models = resolve_all_models(c);
  bool pass = true;
  json reports = json::array();
  for (const auto& m : models) {
    const auto& r = m.model.validity();
    io.out << m.label << ": p = " << format_double(m.model.p()) << ", " << m.model.covariance().describe() << "\n";
    io.out << "  " << r.summary() << "\n";
    json rep = report_json(m.label, m.model);
    if (!r.pass) {
      if (c.unchecked) {
        // Unchecked mode accepts the model when its gap tables stay non-negative.
        bool ok = true;
        try {
          const auto tables = build_gap_tables(m.model, r.horizon);
          io.out << "  unchecked: gap tables non-negative to " << r.horizon << " (" << tables.clamped
                 << " entries clamped)\n";
        } catch (const NegativeGapProbability& e) {
          io.out << "  unchecked: " << e.what() << "\n";
          ok = false;
        }
        rep["gap_tables_nonnegative"] = ok;
        pass = pass && ok;
      } else {
        pass = false;
      }
    }
    reports.push_back(std::move(rep));
  }
  io.out << (pass ? "PASS" : "FAIL") << "\n";
  if (c.out) {
    const fs::path dir = output_dir(c);
    save_text(dir / "check.json", json{{"pass", pass}, {"unchecked", c.unchecked}, {"models", reports}}.dump(2) + "\n");
  }
  return pass ? kOk : kValidityFailure;
}

int cmd_simulate_gbp(const RunConfig& c, const Io& io) {
  auto log = make_logger(io.err);
  const auto setup = resolve_gbp(c);
  if (setup.n < 4) throw SchemaError("n must be at least 4");
  if (auto code = validity_gate(setup.label, setup.model, c.unchecked, io, *log)) return *code;
  const std::uint64_t seed = require_seed(c);
  const fs::path dir = output_dir(c);
  const auto tables = build_gap_tables(setup.model, setup.n);
  if (tables.clamped > 0) log->info("{} gap table entries in [-1e-9, 0) set to zero", tables.clamped);

  CsvWriter gaps({"k", "g", "h", "F", "F0"});
  for (std::size_t k = 0; k < tables.g.size(); ++k) {
    gaps.add(static_cast<std::int64_t>(k + 1)).add(tables.g[k]).add(tables.h[k]).add(tables.F[k]).add(tables.F0[k]);
    gaps.end_row();
  }
  gaps.save(dir / "gap_tables.csv");

  const auto n = static_cast<std::size_t>(setup.n);
  const std::size_t max_lag = std::min<std::size_t>(kDefaultMaxLag, (n - 1) / 4);
  std::vector<std::vector<double>> runs;
  json files = json::array({"gap_tables.csv"});
  for (std::size_t r = 0; r < c.replicates; ++r) {
    RandomStream rng(replicate_seed(seed, r));
    const auto path = sample_path(tables, setup.n, rng);
    CsvWriter csv({"i", "xi"});
    for (std::size_t i = 0; i < n; ++i) csv.add(std::uint64_t{i}).add(std::uint64_t{path.bits[i]}).end_row();
    const auto name = replicate_name("gbp", r, c.replicates);
    csv.save(dir / name);
    files.push_back(name);
    std::vector<double> x(path.bits.begin(), path.bits.end());
    runs.push_back(autocovariance(x, max_lag, Normalization::Biased));
  }
  std::vector<std::string> header = {"lag", "estimate"};
  if (c.replicates > 1) header.push_back("se");
  header.push_back("theoretical");
  CsvWriter ac(header);
  std::vector<std::int64_t> lags;
  for (std::size_t k = 0; k <= max_lag; ++k) lags.push_back(static_cast<std::int64_t>(k));
  std::optional<LagStatistics> stats;
  if (c.replicates > 1) stats = replicate_statistics(runs, lags, n);
  const double p = setup.model.p();
  for (std::size_t k = 0; k <= max_lag; ++k) {
    ac.add(lags[k]).add(stats ? stats->estimate(k) : runs.front()[k]);
    if (stats) ac.add(stats->standard_error(k));
    ac.add(k == 0 ? p * (1.0 - p) : setup.model.cov(lags[k]));
    ac.end_row();
  }
  ac.save(dir / "gbp_autocov.csv");
  files.push_back("gbp_autocov.csv");
  write_manifest(dir, "simulate-gbp", c,
                 {{"model", report_json(setup.label, setup.model)},
                  {"n", setup.n},
                  {"seeds", seed_list(seed, c.replicates)},
                  {"files", files}});
  io.out << "wrote " << c.replicates << " path(s) of length " << n << " to " << dir.string() << "\n";
  return kOk;
}

int cmd_simulate_process(const RunConfig& c, const Io& io) {
  auto log = make_logger(io.err);
  const auto setup = resolve_process(c);
  const auto& spec = setup.spec;
  if (4 * setup.max_lag >= static_cast<std::size_t>(spec.length())) {
    throw SchemaError("max_lag must be below n / 4");
  }
  if (auto code = validity_gate(setup.label, spec.gbp(), c.unchecked, io, *log)) return *code;
  const std::uint64_t seed = require_seed(c);
  const fs::path dir = output_dir(c);
  const auto tables = build_gap_tables(spec.gbp(), spec.length());
  if (tables.clamped > 0) log->info("{} gap table entries in [-1e-9, 0) set to zero", tables.clamped);

  const auto n = static_cast<std::size_t>(spec.length());
  const std::size_t d = spec.dimension();
  std::vector<std::string> header = {"i", "xi"};
  for (std::size_t k = 0; k < d; ++k) header.push_back("x" + std::to_string(k + 1));
  std::vector<SeriesCovariance> runs;
  json files = json::array();
  for (std::size_t r = 0; r < c.replicates; ++r) {
    const auto path = simulate_process(spec, tables, replicate_seed(seed, r));
    CsvWriter csv(header);
    for (std::size_t i = 0; i < n; ++i) {
      csv.add(std::uint64_t{i}).add(std::uint64_t{path.latent.bits[i]});
      for (std::size_t k = 0; k < d; ++k) csv.add(path.values[i * d + k]);
      csv.end_row();
    }
    const auto name = replicate_name("process", r, c.replicates);
    csv.save(dir / name);
    files.push_back(name);
    runs.push_back(autocovariance(path.values, n, d, setup.max_lag, Normalization::Biased));
  }
  const auto table = lag_table(runs, n);
  lag_csv(table, &spec).save(dir / "autocov.csv");
  files.push_back("autocov.csv");
  if (c.svg) {
    save_text(dir / "autocov.svg", lag_svg(table, &spec, setup.label + " autocovariance"));
    files.push_back("autocov.svg");
  }
  write_manifest(dir, "simulate-process", c,
                 {{"model", report_json(setup.label, spec.gbp())},
                  {"n", spec.length()},
                  {"dimension", d},
                  {"set_mass", spec.set_mass()},
                  {"max_lag", setup.max_lag},
                  {"seeds", seed_list(seed, c.replicates)},
                  {"files", files}});
  io.out << "wrote " << c.replicates << " series of length " << n << " to " << dir.string() << "\n";
  return kOk;
}

int cmd_simulate_field(const RunConfig& c, const Io& io) {
  auto log = make_logger(io.err);
  const auto setup = resolve_field(c);
  const auto& spec = setup.spec;
  for (std::size_t k = 0; k < spec.axes(); ++k) {
    if (auto code = validity_gate(setup.label + " axis " + std::to_string(k + 1), spec.gbp(k), c.unchecked, io, *log)) {
      return *code;
    }
  }
  if (setup.window.size() != spec.axes()) throw SchemaError("window needs one entry per axis");
  const std::uint64_t seed = require_seed(c);
  const fs::path dir = output_dir(c);
  const auto tables = field_gap_tables(spec);

  const std::size_t n = spec.axes();
  const std::size_t d = spec.dimension();
  std::vector<std::string> header;
  for (std::size_t k = 0; k < n; ++k) header.push_back("t" + std::to_string(k + 1));
  for (std::size_t k = 0; k < d; ++k) header.push_back("x" + std::to_string(k + 1));
  CorrelogramTable table{setup.window, d, std::vector<std::vector<Correlogram>>(d)};
  json files = json::array();
  for (std::size_t r = 0; r < c.replicates; ++r) {
    const auto sample = simulate_field(spec, tables, replicate_seed(seed, r));
    CsvWriter csv(header);
    std::vector<std::int64_t> t(n, 0);
    for (std::uint64_t s = 0; s < sample.sites(); ++s) {
      for (const auto v : t) csv.add(v);
      for (std::size_t k = 0; k < d; ++k) csv.add(sample.values[s * d + k]);
      csv.end_row();
      for (std::size_t k = n; k-- > 0;) {
        if (++t[k] < spec.extents()[k]) break;
        t[k] = 0;
      }
    }
    const auto name = replicate_name("field", r, c.replicates);
    csv.save(dir / name);
    files.push_back(name);
    for (std::size_t k = 0; k < d; ++k) table.runs[k].push_back(field_correlogram(sample, setup.window, k));
  }
  correlogram_csv(table, &spec).save(dir / "field_correlogram.csv");
  files.push_back("field_correlogram.csv");
  if (c.svg) {
    save_text(dir / "field_correlogram.svg", correlogram_svg(table, &spec, setup.label + " correlogram"));
    files.push_back("field_correlogram.svg");
  }
  json axes = json::array();
  for (std::size_t k = 0; k < n; ++k) axes.push_back(report_json(setup.label + " axis " + std::to_string(k + 1), spec.gbp(k)));
  write_manifest(dir, "simulate-field", c,
                 {{"axes", axes},
                  {"extents", spec.extents()},
                  {"window", setup.window},
                  {"seeds", seed_list(seed, c.replicates)},
                  {"files", files}});
  io.out << "wrote " << c.replicates << " field(s) of " << spec.sites() << " sites to " << dir.string() << "\n";
  return kOk;
}

int cmd_analyze(const RunConfig& c, const std::vector<fs::path>& extra_inputs, const Io& io) {
  std::vector<fs::path> inputs;
  std::optional<std::size_t> max_lag;
  std::optional<std::vector<std::int64_t>> window;
  if (!c.analyze.is_null()) {
    for (const auto& [key, value] : c.analyze.items()) {
      if (key != "input" && key != "max_lag" && key != "window") throw SchemaError("unknown key '" + key + "' in analyze");
    }
    if (c.analyze.contains("input")) {
      const auto& in = c.analyze["input"];
      if (in.is_string()) {
        inputs.emplace_back(in.get<std::string>());
      } else if (in.is_array()) {
        for (const auto& p : in) {
          if (!p.is_string()) throw SchemaError("analyze.input must hold path strings");
          inputs.emplace_back(p.get<std::string>());
        }
      } else {
        throw SchemaError("analyze.input must be a path or a list of paths");
      }
    }
    if (c.analyze.contains("max_lag")) {
      const auto& v = c.analyze["max_lag"];
      if (!v.is_number_unsigned()) throw SchemaError("analyze.max_lag must be a non-negative integer");
      max_lag = v.get<std::size_t>();
    }
    if (c.analyze.contains("window")) window = json_window(c.analyze["window"]);
  }
  inputs.insert(inputs.end(), extra_inputs.begin(), extra_inputs.end());
  if (inputs.empty()) throw SchemaError("analyze needs an input CSV (--input or analyze.input)");

  std::vector<CsvTable> tables;
  for (const auto& p : inputs) {
    if (!fs::exists(p)) throw SchemaError("input " + p.string() + " does not exist");
    tables.push_back(read_csv(p));
  }
  const auto xs = numbered_columns(tables.front(), "x");
  const auto ts = numbered_columns(tables.front(), "t");
  if (xs.empty()) throw SchemaError(inputs.front().string() + " has no value columns x1, x2, ...");
  for (std::size_t i = 1; i < tables.size(); ++i) {
    if (tables[i].header != tables.front().header) throw SchemaError("inputs have different columns");
  }
  const std::size_t d = xs.size();
  const fs::path dir = output_dir(c);
  json files = json::array({"analysis.csv"});

  if (ts.empty()) {
    const std::size_t n = tables.front().rows;
    for (const auto& t : tables) {
      if (t.rows != n) throw SchemaError("inputs have different lengths");
    }
    std::optional<ProcessSetup> setup;
    if (has_spec(c)) setup = resolve_process(c);
    const std::size_t lag = max_lag.value_or(setup ? setup->max_lag
                                                   : std::min<std::size_t>(kDefaultMaxLag, n > 0 ? (n - 1) / 4 : 0));
    if (4 * lag >= n) throw SchemaError("max_lag " + std::to_string(lag) + " must be below n / 4 = " + format_double(n / 4.0));
    std::vector<SeriesCovariance> runs;
    for (const auto& t : tables) {
      std::vector<double> values(n * d);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < d; ++k) values[i * d + k] = t.at(i, xs[k]);
      }
      runs.push_back(autocovariance(values, n, d, lag, Normalization::Biased));
    }
    const auto table = lag_table(runs, n);
    const ProcessSpec* spec = setup ? &setup->spec : nullptr;
    if (spec && spec->dimension() != d) throw SchemaError("input dimension does not match the spec");
    lag_csv(table, spec).save(dir / "analysis.csv");
    if (c.svg) {
      save_text(dir / "analysis.svg", lag_svg(table, spec, "autocovariance"));
      files.push_back("analysis.svg");
    }
    io.out << "analysed " << tables.size() << " series of length " << n << ", lags 0.." << lag << "\n";
  } else {
    const std::size_t axes = ts.size();
    std::vector<std::int64_t> extents(axes, 0);
    const auto& first = tables.front();
    for (std::size_t i = 0; i < first.rows; ++i) {
      for (std::size_t k = 0; k < axes; ++k) {
        extents[k] = std::max(extents[k], static_cast<std::int64_t>(first.at(i, ts[k])) + 1);
      }
    }
    std::uint64_t sites = 1;
    for (const auto e : extents) sites *= static_cast<std::uint64_t>(e);
    std::optional<FieldSetup> setup;
    if (has_spec(c)) setup = resolve_field(c);
    if (setup && setup->spec.axes() != axes) throw SchemaError("input axes do not match the spec");
    if (setup && setup->spec.dimension() != d) throw SchemaError("input dimension does not match the spec");
    std::vector<std::int64_t> w;
    if (window) {
      w = *window;
    } else if (setup && setup->spec.extents() == extents) {
      w = setup->window;
    } else {
      for (const auto e : extents) w.push_back(std::min(kDefaultWindow, e / 2));
    }
    if (w.size() != axes) throw SchemaError("window needs one entry per axis");
    CorrelogramTable table{w, d, std::vector<std::vector<Correlogram>>(d)};
    for (std::size_t r = 0; r < tables.size(); ++r) {
      const auto& t = tables[r];
      if (t.rows != sites) throw SchemaError(inputs[r].string() + " is not a full lattice in C order");
      FieldSample sample;
      sample.extents = extents;
      sample.d = d;
      sample.values.resize(sites * d);
      std::vector<std::int64_t> expect(axes, 0);
      for (std::size_t i = 0; i < t.rows; ++i) {
        for (std::size_t k = 0; k < axes; ++k) {
          if (static_cast<std::int64_t>(t.at(i, ts[k])) != expect[k]) {
            throw SchemaError(inputs[r].string() + " is not a full lattice in C order");
          }
        }
        for (std::size_t k = 0; k < d; ++k) sample.values[i * d + k] = t.at(i, xs[k]);
        for (std::size_t k = axes; k-- > 0;) {
          if (++expect[k] < extents[k]) break;
          expect[k] = 0;
        }
      }
      for (std::size_t k = 0; k < d; ++k) table.runs[k].push_back(field_correlogram(sample, w, k));
    }
    const FieldSpec* spec = setup ? &setup->spec : nullptr;
    correlogram_csv(table, spec).save(dir / "analysis.csv");
    if (c.svg) {
      save_text(dir / "analysis.svg", correlogram_svg(table, spec, "correlogram"));
      files.push_back("analysis.svg");
    }
    io.out << "analysed " << tables.size() << " field(s) of " << sites << " sites\n";
  }
  json names = json::array();
  for (const auto& p : inputs) names.push_back(p.string());
  write_manifest(dir, "analyze", c, {{"inputs", names}, {"files", files}});
  return kOk;
}

namespace {

template <class F>
int run_guarded(F&& f, const Io& io) {
  try {
    return f();
  } catch (const SchemaError& e) {
    io.err << "gbpf: " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidModel& e) {
    io.err << "gbpf: " << e.what() << "\n";
    return kValidityFailure;
  } catch (const InvalidArgument& e) {
    io.err << "gbpf: " << e.what() << "\n";
    return kUsage;
  } catch (const NegativeGapProbability& e) {
    io.err << "gbpf: " << e.what() << "\n";
    return kRuntime;
  } catch (const std::exception& e) {
    io.err << "gbpf: " << e.what() << "\n";
    return kRuntime;
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, const Io& io) {
  CLI::App app{"Binary-process driven simulation of stationary series and random fields"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");

  std::string config_path;
  std::string preset_name;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::size_t replicates = 0;
  bool unchecked = false;
  bool svg = false;
  std::vector<std::string> inputs;

  const auto common = [&](CLI::App* sub, bool simulate) {
    sub->add_option("--config", config_path, "JSON run config")->check(CLI::ExistingFile);
    sub->add_option("--preset", preset_name, "Named preset (see 'gbpf presets')");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_flag("--unchecked", unchecked, "Skip the validity gate; sampling still needs non-negative gap tables");
    if (simulate) {
      sub->add_option("--seed", seed, "Master seed");
      sub->add_option("--replicates", replicates, "Number of replicate runs")->check(CLI::PositiveNumber);
      sub->add_flag("--svg", svg, "Also write SVG charts");
    }
  };
  auto* check = app.add_subcommand("check", "Validity check of the latent covariance");
  common(check, false);
  auto* sim_gbp = app.add_subcommand("simulate-gbp", "Sample latent binary paths");
  common(sim_gbp, true);
  auto* sim_proc = app.add_subcommand("simulate-process", "Sample a stationary series");
  common(sim_proc, true);
  auto* sim_field = app.add_subcommand("simulate-field", "Sample a lattice field");
  common(sim_field, true);
  auto* analyze = app.add_subcommand("analyze", "Lag statistics of simulated CSVs");
  common(analyze, false);
  analyze->add_option("--input", inputs, "Input CSV (repeatable)");
  analyze->add_flag("--svg", svg, "Also write an SVG chart");
  auto* presets = app.add_subcommand("presets", "List the named presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, io.out, io.err);
    return code == 0 ? kOk : kUsage;
  }

  if (presets->parsed()) {
    for (const auto& name : preset_names()) io.out << name << "\n";
    return kOk;
  }

  return run_guarded(
      [&]() -> int {
        RunConfig c = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (!preset_name.empty()) c.preset = preset_name;
        if (!out_dir.empty()) c.out = out_dir;
        if (unchecked) c.unchecked = true;
        if (svg) c.svg = true;
        if (replicates > 0) c.replicates = replicates;
        auto* sub = app.get_subcommands().front();
        if (const auto* opt = sub->get_option_no_throw("--seed"); opt != nullptr && opt->count() > 0) c.seed = seed;
        if (check->parsed()) return cmd_check(c, io);
        if (sim_gbp->parsed()) return cmd_simulate_gbp(c, io);
        if (sim_proc->parsed()) return cmd_simulate_process(c, io);
        if (sim_field->parsed()) return cmd_simulate_field(c, io);
        std::vector<fs::path> paths(inputs.begin(), inputs.end());
        return cmd_analyze(c, paths, io);
      },
      io);
}

}  // namespace gbpf::cli
