#include "gbpf/field.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <map>
#include <sstream>

#include "gbpf/errors.hpp"
#include "gbpf/parallel.hpp"

namespace gbpf {

namespace {

constexpr double kProbabilityTolerance = 1e-8;

bool has_bit(std::size_t mask, std::size_t k) { return (mask >> k) & 1U; }

double axis_prob(double p, bool one) { return one ? p : 1.0 - p; }

std::uint32_t zero_mask(std::span<const std::int64_t> lag) {
  std::uint32_t o = 0;
  for (std::size_t k = 0; k < lag.size(); ++k) {
    if (lag[k] == 0) o |= 1U << k;
  }
  return o;
}

void require_lag(const FieldSpec& spec, std::span<const std::int64_t> lag) {
  if (lag.size() != spec.axes()) throw InvalidArgument("lag has the wrong number of axes");
}

Eigen::VectorXd overall_mean(const FieldSpec& spec) {
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.dimension()));
  for (std::size_t c = 0; c < spec.cell_means().size(); ++c) mu += spec.cell_probs()[c] * spec.cell_means()[c];
  return mu;
}

// Iterates the submasks of `mask`, including 0 and `mask` itself.
template <class F>
void for_submasks(std::uint32_t mask, F&& f) {
  std::uint32_t s = mask;
  while (true) {
    f(s);
    if (s == 0) break;
    s = (s - 1) & mask;
  }
}

}  // namespace

FieldSpec::FieldSpec(Partition partition, std::vector<GbpModel> gbps, std::vector<std::int64_t> extents)
    : partition_(std::move(partition)), gbps_(std::move(gbps)), extents_(std::move(extents)) {
  const std::size_t n = partition_.axes();
  if (n == 0) throw InvalidArgument("a field needs at least one axis");
  if (n > 16) throw SizeGuardExceeded("fields are limited to 16 axes");
  if (gbps_.size() != n) throw InvalidArgument("one latent process per partition axis is required");
  if (extents_.size() != n) throw InvalidArgument("one extent per axis is required");
  for (std::size_t k = 0; k < n; ++k) {
    if (extents_[k] < 1) throw InvalidArgument("extents must be positive");
    if (std::abs(partition_.probs()[k] - gbps_[k].p()) > kProbabilityTolerance) {
      std::ostringstream msg;
      msg << "axis " << k + 1 << ": partition probability " << partition_.probs()[k] << " differs from p = "
          << gbps_[k].p();
      throw InvalidArgument(msg.str());
    }
  }
  sites();
  std::vector<double> probs;
  for (const auto& g : gbps_) probs.push_back(g.p());
  for (std::size_t c = 0; c < partition_.size(); ++c) {
    cell_probs_.push_back(cell_probability(probs, c));
    cell_means_.push_back(partition_.conditional_mean(c));
    samplers_.emplace_back(partition_.marginal(), partition_.cell(c));
  }
}

std::uint64_t FieldSpec::sites() const {
  std::uint64_t total = dimension();
  for (const auto e : extents_) {
    const auto ue = static_cast<std::uint64_t>(e);
    if (total > kFieldBudget / ue) throw SizeGuardExceeded("field exceeds the budget of 1e8 stored values");
    total *= ue;
  }
  return total / dimension();
}

FieldSpec FieldSpec::with_extents(std::vector<std::int64_t> extents) const {
  return FieldSpec(partition_, gbps_, std::move(extents));
}

std::uint64_t FieldSample::sites() const {
  std::uint64_t total = 1;
  for (const auto e : extents) total *= static_cast<std::uint64_t>(e);
  return total;
}

std::uint64_t FieldSample::offset(std::span<const std::int64_t> t) const {
  if (t.size() != extents.size()) throw InvalidArgument("site has the wrong number of axes");
  std::uint64_t off = 0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < 0 || t[k] >= extents[k]) throw InvalidArgument("site outside the lattice");
    off = off * static_cast<std::uint64_t>(extents[k]) + static_cast<std::uint64_t>(t[k]);
  }
  return off;
}

std::vector<double> FieldSample::component(std::size_t k) const {
  const std::uint64_t n = sites();
  std::vector<double> out(n);
  for (std::uint64_t i = 0; i < n; ++i) out[i] = values[i * d + k];
  return out;
}

std::vector<GapTables> field_gap_tables(const FieldSpec& spec) {
  std::vector<GapTables> out;
  for (std::size_t k = 0; k < spec.axes(); ++k) out.push_back(build_gap_tables(spec.gbp(k), spec.extents()[k]));
  return out;
}

FieldSample simulate_field(const FieldSpec& spec, const std::vector<GapTables>& tables, std::uint64_t seed,
                           const SimulationOptions& options) {
  const std::size_t n = spec.axes();
  if (tables.size() != n) throw InvalidArgument("one gap table per axis is required");
  const RandomStream master(seed);
  FieldSample out;
  out.extents = spec.extents();
  out.d = spec.dimension();
  out.seed = seed;
  for (std::size_t k = 0; k < n; ++k) {
    RandomStream rng = master.split(StreamTag::Latent, k);
    out.latent.push_back(sample_path(tables[k], spec.extents()[k], rng));
    out.latent.back().seed = seed;
  }
  const std::uint64_t total = spec.sites();
  out.values.assign(total * out.d, 0.0);

  const std::uint64_t chunks = (total + kValueChunk - 1) / kValueChunk;
  parallel_for(chunks, options.threads, [&](std::size_t c) {
    RandomStream rng = master.split(StreamTag::Values, c);
    const std::uint64_t begin = c * kValueChunk;
    const std::uint64_t end = std::min<std::uint64_t>(total, begin + kValueChunk);
    std::vector<std::int64_t> t(n);
    std::uint64_t rest = begin;
    for (std::size_t k = n; k-- > 0;) {
      t[k] = static_cast<std::int64_t>(rest % static_cast<std::uint64_t>(out.extents[k]));
      rest /= static_cast<std::uint64_t>(out.extents[k]);
    }
    for (std::uint64_t i = begin; i < end; ++i) {
      std::size_t cell = 0;
      for (std::size_t k = 0; k < n; ++k) {
        if (out.latent[k].bits[static_cast<std::size_t>(t[k])]) cell |= std::size_t{1} << k;
      }
      spec.sampler(cell).draw(rng, std::span<double>(out.values.data() + i * out.d, out.d));
      for (std::size_t k = n; k-- > 0;) {
        if (++t[k] < out.extents[k]) break;
        t[k] = 0;
      }
    }
  });
  return out;
}

FieldSample simulate_field(const FieldSpec& spec, std::uint64_t seed, const SimulationOptions& options) {
  return simulate_field(spec, field_gap_tables(spec), seed, options);
}

Eigen::MatrixXd CovarianceDecomposition::structured(const FieldSpec& spec, std::span<const std::int64_t> lag) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(constant_term.rows(), constant_term.cols());
  for (const auto& term : terms) {
    double weight = 1.0;
    for (std::size_t k = 0; k < spec.axes(); ++k) {
      if (has_bit(term.axes, k)) weight *= spec.gbp(k).cov(std::llabs(lag[k]));
    }
    out += weight * term.matrix;
  }
  return out;
}

Eigen::MatrixXd CovarianceDecomposition::total(const FieldSpec& spec, std::span<const std::int64_t> lag) const {
  return structured(spec, lag) + constant_term;
}

CovarianceDecomposition decompose_field_cov(const FieldSpec& spec, std::span<const std::int64_t> lag) {
  require_lag(spec, lag);
  const std::size_t n = spec.axes();
  const auto d = static_cast<Eigen::Index>(spec.dimension());
  const std::uint32_t all = (n >= 32) ? ~0U : ((1U << n) - 1U);
  const std::uint32_t o = zero_mask(lag);
  if (o == all) throw InvalidArgument("decompose_field_cov needs a non-zero lag");
  const std::uint32_t free = all & ~o;

  CovarianceDecomposition out;
  out.zero_axes = o;
  out.constant_term = Eigen::MatrixXd::Zero(d, d);
  std::map<std::uint32_t, Eigen::MatrixXd> acc;
  for_submasks(free, [&](std::uint32_t k) {
    if (k != 0) acc[k] = Eigen::MatrixXd::Zero(d, d);
  });

  for_submasks(o, [&](std::uint32_t lo) {
    double w = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (has_bit(o, j)) w *= axis_prob(spec.gbp(j).p(), has_bit(lo, j));
    }
    for_submasks(free, [&](std::uint32_t k) {
      Eigen::VectorXd m = Eigen::VectorXd::Zero(d);
      for_submasks(free, [&](std::uint32_t lf) {
        double coef = ((std::popcount(k) - std::popcount(lf & k)) % 2 == 0) ? 1.0 : -1.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (has_bit(free, j) && !has_bit(k, j)) coef *= axis_prob(spec.gbp(j).p(), has_bit(lf, j));
        }
        m += coef * spec.cell_means()[lo | lf];
      });
      if (k == 0) {
        out.constant_term += w * m * m.transpose();
      } else {
        acc[k] += w * m * m.transpose();
      }
    });
  });
  const Eigen::VectorXd mu = overall_mean(spec);
  out.constant_term -= mu * mu.transpose();
  if (o == 0) out.constant_term.setZero();
  for (auto& [k, mat] : acc) out.terms.push_back({k, std::move(mat)});
  return out;
}

Eigen::MatrixXd theoretical_field_cov(const FieldSpec& spec, std::span<const std::int64_t> lag) {
  require_lag(spec, lag);
  if (std::all_of(lag.begin(), lag.end(), [](std::int64_t v) { return v == 0; })) {
    return spec.marginal().covariance();
  }
  return decompose_field_cov(spec, lag).total(spec, lag);
}

Eigen::MatrixXd structured_field_cov(const FieldSpec& spec, std::span<const std::int64_t> lag) {
  require_lag(spec, lag);
  if (std::all_of(lag.begin(), lag.end(), [](std::int64_t v) { return v == 0; })) {
    return spec.marginal().covariance();
  }
  return decompose_field_cov(spec, lag).structured(spec, lag);
}

Eigen::MatrixXd field_cov_oracle(const FieldSpec& spec, std::span<const std::int64_t> lag) {
  require_lag(spec, lag);
  const std::size_t n = spec.axes();
  if (n > kFieldOracleAxes) throw SizeGuardExceeded("field covariance oracle is limited to 6 axes");
  if (std::all_of(lag.begin(), lag.end(), [](std::int64_t v) { return v == 0; })) {
    return spec.marginal().covariance();
  }
  // Per axis: the probability of each (bit at t, bit at s) pair.
  std::vector<std::array<double, 4>> pair(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::int64_t a = 1;
    const std::int64_t b = 1 + std::llabs(lag[k]);
    for (int st = 0; st < 4; ++st) {
      const bool lt = st & 1;
      const bool ls = st & 2;
      if (a == b) {
        pair[k][st] = (lt == ls) ? (lt ? config_probability(spec.gbp(k), std::vector<std::int64_t>{a}, {})
                                       : config_probability(spec.gbp(k), {}, std::vector<std::int64_t>{a}))
                                 : 0.0;
        continue;
      }
      std::vector<std::int64_t> ones, zeros;
      (lt ? ones : zeros).push_back(a);
      (ls ? ones : zeros).push_back(b);
      std::sort(ones.begin(), ones.end());
      std::sort(zeros.begin(), zeros.end());
      pair[k][st] = config_probability(spec.gbp(k), ones, zeros);
    }
  }
  const auto d = static_cast<Eigen::Index>(spec.dimension());
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd first = Eigen::VectorXd::Zero(d);
  const std::size_t states = std::size_t{1} << (2 * n);
  for (std::size_t s = 0; s < states; ++s) {
    double w = 1.0;
    std::size_t ct = 0, cs = 0;
    for (std::size_t k = 0; k < n && w != 0.0; ++k) {
      const int st = static_cast<int>((s >> (2 * k)) & 3U);
      w *= pair[k][st];
      if (st & 1) ct |= std::size_t{1} << k;
      if (st & 2) cs |= std::size_t{1} << k;
    }
    if (w == 0.0) continue;
    second += w * spec.cell_means()[ct] * spec.cell_means()[cs].transpose();
    first += w * spec.cell_means()[ct];
  }
  return second - first * first.transpose();
}

PlaneCoefficients plane_coefficients(const FieldSpec& spec) {
  if (spec.axes() != 2) throw InvalidArgument("plane coefficients need exactly two axes");
  const auto& e = spec.cell_means();
  const Eigen::VectorXd& e00 = e[0];
  const Eigen::VectorXd& e10 = e[1];
  const Eigen::VectorXd& e01 = e[2];
  const Eigen::VectorXd& e11 = e[3];
  const double p1 = spec.gbp(0).p();
  const double p2 = spec.gbp(1).p();
  PlaneCoefficients out;
  out.m0 = e10 + e01 - e11 - e00;
  out.m1 = p2 * (e11 - e01) + (1.0 - p2) * (e10 - e00);
  out.m2 = p1 * (e11 - e10) + (1.0 - p1) * (e01 - e00);
  const Eigen::VectorXd u1101 = e11 - e01;
  const Eigen::VectorXd u1000 = e10 - e00;
  const Eigen::VectorXd u1110 = e11 - e10;
  const Eigen::VectorXd u0100 = e01 - e00;
  out.mstar1 = p2 * u1101 * u1101.transpose() + (1.0 - p2) * u1000 * u1000.transpose();
  out.mstar2 = p1 * u1110 * u1110.transpose() + (1.0 - p1) * u0100 * u0100.transpose();
  out.offset1 = p2 * (1.0 - p2) * out.m2 * out.m2.transpose();
  out.offset2 = p1 * (1.0 - p1) * out.m1 * out.m1.transpose();
  return out;
}

bool ZeroReport::consistent() const {
  return std::all_of(conditions.begin(), conditions.end(), [](const ZeroCondition& c) { return !c.holds || c.verified; });
}

std::string ZeroReport::summary() const {
  std::ostringstream out;
  out << "component " << component + 1 << ":";
  for (const auto& c : conditions) {
    out << "\n  " << c.name << ": " << (c.holds ? "holds" : "fails") << " (residual " << c.residual << ")";
    if (c.holds) out << (c.verified ? ", zeros confirmed" : ", zeros NOT confirmed") << " (worst " << c.worst_entry << ")";
  }
  return out.str();
}

namespace {

std::string axes_label(std::uint32_t mask, std::size_t n) {
  std::string s = "{";
  bool first = true;
  for (std::size_t k = 0; k < n; ++k) {
    if (!has_bit(mask, k)) continue;
    if (!first) s += ",";
    s += std::to_string(k + 1);
    first = false;
  }
  return s + "}";
}

// Largest scaled |entry| of row i' across the forced terms, over the lag
// patterns whose zero set lies in `zeros_allowed`.
double worst_forced_entry(const FieldSpec& spec, std::size_t row, const ZeroCondition& c, std::uint32_t zeros_allowed,
                          double scale) {
  const std::size_t n = spec.axes();
  const std::uint32_t all = (1U << n) - 1U;
  double worst = 0.0;
  for_submasks(zeros_allowed, [&](std::uint32_t o) {
    if (o == all) return;
    std::vector<std::int64_t> lag(n, 1);
    for (std::size_t k = 0; k < n; ++k) {
      if (has_bit(o, k)) lag[k] = 0;
    }
    const auto dec = decompose_field_cov(spec, lag);
    for (const auto& term : dec.terms) {
      if (std::find(c.forced.begin(), c.forced.end(), term.axes) == c.forced.end()) continue;
      worst = std::max(worst, term.matrix.row(static_cast<Eigen::Index>(row)).cwiseAbs().maxCoeff() / scale);
    }
    if (c.include_constant) {
      worst = std::max(worst, dec.constant_term.row(static_cast<Eigen::Index>(row)).cwiseAbs().maxCoeff() / scale);
    }
  });
  return worst;
}

}  // namespace

ZeroReport check_zero_conditions(const FieldSpec& spec, std::size_t component) {
  if (component >= spec.dimension()) throw InvalidArgument("component index out of range");
  const std::size_t n = spec.axes();
  const auto i = static_cast<Eigen::Index>(component);
  const std::uint32_t all = (1U << n) - 1U;
  const Partition& part = spec.partition();

  double mu = 0.0;
  double scale = 1.0;
  for (std::size_t c = 0; c < part.size(); ++c) {
    mu += part.means()[c][i];
    scale = std::max(scale, spec.cell_means()[c].squaredNorm());
  }
  const double tol = kZeroConditionTolerance * std::max(1.0, std::abs(mu));

  ZeroReport report;
  report.component = component;
  std::map<std::uint32_t, bool> balanced;
  std::map<std::uint32_t, double> balance_residual;
  for (std::uint32_t kp = 1; kp <= all; ++kp) {
    std::vector<std::size_t> axes;
    for (std::size_t k = 0; k < n; ++k) {
      if (has_bit(kp, k)) axes.push_back(k + 1);
    }
    double residual = 0.0;
    for (const auto& merged : merged_cell_means(part, axes)) {
      residual = std::max(residual, std::abs(merged.integral[i] - merged.target[i]));
    }
    ZeroCondition c;
    c.name = "balance on axes " + axes_label(kp, n);
    c.axes = axes;
    c.residual = residual;
    c.holds = residual <= tol;
    balanced[kp] = c.holds;
    balance_residual[kp] = residual;
    if (c.holds) {
      for_submasks(kp, [&](std::uint32_t k) {
        if (k != 0) c.forced.push_back(k);
      });
      c.include_constant = true;
      c.worst_entry = worst_forced_entry(spec, component, c, kp, scale);
      c.verified = c.worst_entry <= kZeroEntryTolerance;
    }
    report.conditions.push_back(std::move(c));
  }

  if (n == 2) {
    // Cell integrals on the two axes; index bit k is l_{k+1}.
    const double m11 = part.means()[3][i];
    const double p1 = spec.gbp(0).p();
    const double p2 = spec.gbp(1).p();
    const bool per_axis = balanced[1] && balanced[2];
    const double axis_residual = std::max(balance_residual[1], balance_residual[2]);
    const std::vector<std::pair<std::string, double>> corners = {
        {"corner rule mu11 = ((p1 + p2)/2 - 1/4) mu", (0.5 * (p1 + p2) - 0.25) * mu},
        {"corner rule mu11 = p1 p2 mu", p1 * p2 * mu},
    };
    {
      // m0 vanishes exactly when p2 mu10 + p1 mu01 = (1 - p1 - p2) mu11 + p1 p2 mu.
      const double m10 = part.means()[1][i];
      const double m01 = part.means()[2][i];
      ZeroCondition c;
      c.name = "cross term p2 mu10 + p1 mu01 = (1 - p1 - p2) mu11 + p1 p2 mu";
      c.axes = {1, 2};
      c.residual = std::abs(p2 * m10 + p1 * m01 - (1.0 - p1 - p2) * m11 - p1 * p2 * mu);
      c.holds = c.residual <= tol;
      if (c.holds) {
        c.forced = {3};
        c.worst_entry = worst_forced_entry(spec, component, c, 0, scale);
        c.verified = c.worst_entry <= kZeroEntryTolerance;
      }
      report.conditions.push_back(std::move(c));
    }
    for (const auto& [name, target] : corners) {
      ZeroCondition c;
      c.name = name;
      c.axes = {1, 2};
      c.residual = std::max(axis_residual, std::abs(m11 - target));
      c.holds = per_axis && std::abs(m11 - target) <= tol;
      if (c.holds) {
        c.forced = {1, 2, 3};
        c.worst_entry = worst_forced_entry(spec, component, c, 0, scale);
        c.verified = c.worst_entry <= kZeroEntryTolerance;
      }
      report.conditions.push_back(std::move(c));
    }
  }
  return report;
}

std::complex<double> field_joint_cf(const FieldSpec& spec, const std::vector<std::vector<double>>& thetas,
                                    const std::vector<std::vector<std::int64_t>>& sites) {
  const std::size_t n = spec.axes();
  const std::size_t k = sites.size();
  if (thetas.size() != k) throw InvalidArgument("one theta vector per site is required");
  if (k == 0) return 1.0;
  // Distinct coordinates per axis and each site's position among them.
  std::vector<std::vector<std::int64_t>> coords(n);
  for (const auto& t : sites) {
    if (t.size() != n) throw InvalidArgument("site has the wrong number of axes");
    for (std::size_t a = 0; a < n; ++a) coords[a].push_back(t[a]);
  }
  std::size_t bits = 0;
  std::vector<std::size_t> shift(n);
  for (std::size_t a = 0; a < n; ++a) {
    std::sort(coords[a].begin(), coords[a].end());
    coords[a].erase(std::unique(coords[a].begin(), coords[a].end()), coords[a].end());
    shift[a] = bits;
    bits += coords[a].size();
  }
  if (bits > kFieldCfBits) throw SizeGuardExceeded("field joint CF is limited to 12 latent bits");

  std::vector<std::vector<std::size_t>> pos(k, std::vector<std::size_t>(n));
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t a = 0; a < n; ++a) {
      pos[j][a] = static_cast<std::size_t>(std::lower_bound(coords[a].begin(), coords[a].end(), sites[j][a]) -
                                           coords[a].begin());
    }
  }
  // Probability of each bit pattern on each axis.
  std::vector<std::vector<double>> axis_prob_table(n);
  for (std::size_t a = 0; a < n; ++a) {
    const std::size_t r = coords[a].size();
    axis_prob_table[a].resize(std::size_t{1} << r);
    for (std::size_t mask = 0; mask < axis_prob_table[a].size(); ++mask) {
      std::vector<std::int64_t> ones, zeros;
      for (std::size_t b = 0; b < r; ++b) (has_bit(mask, b) ? ones : zeros).push_back(coords[a][b]);
      axis_prob_table[a][mask] = config_probability(spec.gbp(a), ones, zeros);
    }
  }
  std::vector<std::vector<std::complex<double>>> cell_cf(k, std::vector<std::complex<double>>(spec.partition().size()));
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t c = 0; c < spec.partition().size(); ++c) {
      cell_cf[j][c] = set_cf(spec.marginal(), spec.partition().cell(c), thetas[j]) / spec.partition().masses()[c];
    }
  }

  std::complex<double> total = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << bits); ++mask) {
    double w = 1.0;
    for (std::size_t a = 0; a < n; ++a) {
      w *= axis_prob_table[a][(mask >> shift[a]) & ((std::size_t{1} << coords[a].size()) - 1)];
    }
    if (w == 0.0) continue;
    std::complex<double> prod = 1.0;
    for (std::size_t j = 0; j < k; ++j) {
      std::size_t cell = 0;
      for (std::size_t a = 0; a < n; ++a) {
        if (has_bit(mask, shift[a] + pos[j][a])) cell |= std::size_t{1} << a;
      }
      prod *= cell_cf[j][cell];
    }
    total += w * prod;
  }
  return total;
}

}  // namespace gbpf
