#include "gbpf/partition.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gbpf/errors.hpp"

namespace gbpf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMassTolerance = 1e-8;
constexpr double kOverlapTolerance = 1e-10;

const Distribution1D& continuous_law(const Marginal& m) {
  if (m.dimension() != 1 || m.is_discrete()) {
    throw InvalidArgument("nested partitions need a continuous univariate marginal");
  }
  return m.component(0);
}

const IntervalUnion& as_intervals(const SupportSet& s) {
  const auto* u = s.get<IntervalUnion>();
  if (!u) throw InvalidArgument("expected an interval union");
  return *u;
}

// Point x in [lo, hi] with mass(lo, x) = t.
double point_at(const Distribution1D& law, const Interval& part, double t) {
  if (t <= 0.0) return part.lo;
  const double s_lo = law.sf(part.lo);
  double x;
  if (s_lo < 0.5) {
    x = law.quantile_upper(std::max(s_lo - t, 0.0));
  } else {
    x = law.quantile(std::min(law.cdf(part.lo) + t, 1.0));
  }
  return std::clamp(x, part.lo, part.hi);
}

struct MassLayout {
  std::vector<Interval> parts;
  std::vector<double> start;  // cumulative mass before each part
  double total = 0.0;
};

MassLayout layout(const Distribution1D& law, const IntervalUnion& a) {
  MassLayout out;
  for (const auto& iv : a.parts()) {
    const double m = law.mass(iv);
    if (m <= 0.0) continue;
    out.parts.push_back(iv);
    out.start.push_back(out.total);
    out.total += m;
  }
  return out;
}

// Integral of x f over the portion of `a` with mass coordinate <= u.
double first_moment_below(const Distribution1D& law, const MassLayout& lay, double u) {
  double total = 0.0;
  for (std::size_t i = 0; i < lay.parts.size(); ++i) {
    const double begin = lay.start[i];
    const double end = (i + 1 < lay.parts.size()) ? lay.start[i + 1] : lay.total;
    if (u <= begin) break;
    if (u >= end) {
      total += law.integrate(lay.parts[i], 1).real();
    } else {
      const double x = point_at(law, lay.parts[i], u - begin);
      total += law.integrate(Interval{lay.parts[i].lo, x}, 1).real();
    }
  }
  return total;
}

IntervalUnion window_of(const Distribution1D& law, const MassLayout& lay, double u0, double u1) {
  std::vector<Interval> out;
  for (std::size_t i = 0; i < lay.parts.size(); ++i) {
    const double begin = lay.start[i];
    const double end = (i + 1 < lay.parts.size()) ? lay.start[i + 1] : lay.total;
    const double lo = std::max(u0, begin);
    const double hi = std::min(u1, end);
    if (!(lo < hi)) continue;
    const Interval& part = lay.parts[i];
    const double x0 = (lo <= begin) ? part.lo : point_at(law, part, lo - begin);
    const double x1 = (hi >= end) ? part.hi : point_at(law, part, hi - begin);
    if (x0 < x1) out.push_back({x0, x1});
  }
  return IntervalUnion(std::move(out));
}

SupportSet balanced_integer_subset(const Marginal& m, const IntegerSet& a, double p, std::optional<std::size_t> component) {
  const Distribution1D& law = m.component(0);
  const auto& v = a.values();
  std::vector<double> w(v.size());
  double total = 0.0;
  double total_first = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    w[i] = a.shares()[i] * law.pdf(static_cast<double>(v[i]));
    total += w[i];
    total_first += w[i] * static_cast<double>(v[i]);
  }
  const double scale = std::sqrt(law.variance()) + std::abs(law.mean());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double mass = 0.0;
    double first = 0.0;
    for (std::size_t j = i; j < v.size(); ++j) {
      mass += w[j];
      first += w[j] * static_cast<double>(v[j]);
      if (std::abs(mass - p * total) > kMassTolerance) continue;
      if (component && std::abs(first - p * total_first) > 1e-6 * scale) continue;
      std::vector<std::int64_t> values(v.begin() + static_cast<std::ptrdiff_t>(i), v.begin() + static_cast<std::ptrdiff_t>(j) + 1);
      std::vector<double> shares(a.shares().begin() + static_cast<std::ptrdiff_t>(i),
                                 a.shares().begin() + static_cast<std::ptrdiff_t>(j) + 1);
      return IntegerSet(std::move(values), std::move(shares));
    }
  }
  throw NotRepresentable("no run of atoms carries the requested mass fraction");
}

void check_symmetric(const Distribution1D& law, double center) {
  for (double x : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    const double dx = x * std::sqrt(law.variance());
    if (std::abs(law.cdf(center - dx) - law.sf(center + dx)) > 1e-9) {
      throw InvalidArgument("marginal is not symmetric about the given center");
    }
  }
}

}  // namespace

std::string cell_label(std::size_t index, std::size_t axes) {
  std::string s(axes, '0');
  for (std::size_t k = 0; k < axes; ++k) {
    if (index & (std::size_t{1} << k)) s[k] = '1';
  }
  return s;
}

std::size_t cell_index(std::string_view label) {
  std::size_t index = 0;
  for (std::size_t k = 0; k < label.size(); ++k) {
    if (label[k] == '1') {
      index |= std::size_t{1} << k;
    } else if (label[k] != '0') {
      throw InvalidArgument("cell label must contain only 0 and 1");
    }
  }
  return index;
}

double cell_probability(const std::vector<double>& probs, std::size_t index) {
  double out = 1.0;
  for (std::size_t k = 0; k < probs.size(); ++k) out *= (index & (std::size_t{1} << k)) ? probs[k] : 1.0 - probs[k];
  return out;
}

Partition::Partition(Marginal marginal, std::vector<double> probs, std::vector<SupportSet> cells)
    : marginal_(std::move(marginal)), probs_(std::move(probs)), cells_(std::move(cells)) {}

Partition Partition::from_cells(Marginal marginal, std::vector<double> probs, std::vector<SupportSet> cells) {
  if (probs.empty() || probs.size() > 16) throw InvalidArgument("partition needs between 1 and 16 axes");
  for (double p : probs) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("axis probabilities must lie in (0, 1)");
  }
  if (cells.size() != (std::size_t{1} << probs.size())) throw InvalidArgument("partition needs 2^n cells");
  for (auto& c : cells) c = normalize_for(marginal, c);

  Partition out(marginal, probs, std::move(cells));
  const auto& m = out.marginal_;
  double total = 0.0;
  for (std::size_t i = 0; i < out.cells_.size(); ++i) {
    const double mass = set_mass(m, out.cells_[i]);
    const double expected = cell_probability(out.probs_, i);
    if (std::abs(mass - expected) > kMassTolerance) {
      std::ostringstream os;
      os.precision(12);
      os << "cell " << cell_label(i, out.axes()) << " has mass " << mass << ", expected " << expected;
      throw InvalidArgument(os.str());
    }
    out.masses_.push_back(mass);
    out.means_.push_back(set_mean(m, out.cells_[i]));
    total += mass;
  }
  if (std::abs(total - 1.0) > kMassTolerance) throw InvalidArgument("cell masses do not sum to 1");

  // Overlaps: exact for interval and integer cells, a sampled probe otherwise.
  bool probe = false;
  for (std::size_t i = 0; i < out.cells_.size(); ++i) {
    for (std::size_t j = i + 1; j < out.cells_.size(); ++j) {
      const auto* ui = out.cells_[i].get<IntervalUnion>();
      const auto* uj = out.cells_[j].get<IntervalUnion>();
      const auto* ii = out.cells_[i].get<IntegerSet>();
      const auto* ij = out.cells_[j].get<IntegerSet>();
      if (ui && uj) {
        if (set_mass(m, ui->intersect(*uj)) > kOverlapTolerance) {
          throw InvalidArgument("cells " + cell_label(i, out.axes()) + " and " + cell_label(j, out.axes()) + " overlap");
        }
      } else if (ii && ij) {
        for (std::int64_t v : ii->values()) {
          if (ii->share(v) + ij->share(v) > 1.0 + 1e-12) {
            throw InvalidArgument("cells " + cell_label(i, out.axes()) + " and " + cell_label(j, out.axes()) +
                                  " overlap at " + std::to_string(v));
          }
        }
      } else {
        probe = true;
      }
    }
  }
  if (probe) {
    RandomStream rng(0x0f1a9);
    std::vector<double> x(m.dimension());
    for (int draw = 0; draw < 20000; ++draw) {
      m.sample(rng, x);
      int hits = 0;
      for (const auto& c : out.cells_) hits += c.contains(x) ? 1 : 0;
      if (hits > 1) throw InvalidArgument("cells overlap on a set of positive mass");
    }
  }
  return out;
}

IntervalUnion mass_window(const Distribution1D& law, const IntervalUnion& a, double u0, double u1) {
  return window_of(law, layout(law, a), u0, u1);
}

SupportSet find_balanced_subset(const Marginal& m, const SupportSet& a, double p, std::optional<std::size_t> component) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("p must lie in (0, 1)");
  if (m.dimension() != 1) throw InvalidArgument("balanced subsets need a univariate marginal");
  if (component && *component != 0) throw InvalidArgument("component index out of range");
  const SupportSet set = normalize_for(m, a);
  if (const auto* ints = set.get<IntegerSet>()) return balanced_integer_subset(m, *ints, p, component);

  const Distribution1D& law = continuous_law(m);
  const MassLayout lay = layout(law, as_intervals(set));
  if (!(lay.total > 0.0)) throw InvalidArgument("balanced subset of a set with zero mass");
  const double width = p * lay.total;
  if (!component) return window_of(law, lay, 0.0, width);

  const double target = p * first_moment_below(law, lay, lay.total);
  auto gap = [&](double y) { return first_moment_below(law, lay, y + width) - first_moment_below(law, lay, y) - target; };
  double lo = 0.0;
  double hi = lay.total - width;
  double g_lo = gap(lo);
  if (g_lo >= 0.0) return window_of(law, lay, lo, lo + width);
  if (gap(hi) <= 0.0) return window_of(law, lay, hi, hi + width);
  for (int iter = 0; iter < 200 && hi - lo > 1e-16 * lay.total; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double g = gap(mid);
    if (g < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double y = 0.5 * (lo + hi);
  return window_of(law, lay, y, y + width);
}

Partition build_partition(const Marginal& m, std::vector<double> probs, const PartitionMode& mode) {
  const std::size_t n = probs.size();
  if (n == 0 || n > 16) throw InvalidArgument("partition needs between 1 and 16 axes");
  if (const auto* user = std::get_if<UserCells>(&mode)) return Partition::from_cells(m, std::move(probs), user->cells);

  const auto& mean_axes = std::holds_alternative<SymmetricNested>(mode) ? std::get<SymmetricNested>(mode).mean_axes
                                                                        : std::get<BalancedNested>(mode).mean_axes;
  std::vector<std::size_t> order;
  for (std::size_t a : mean_axes) {
    if (a < 1 || a > n) throw InvalidArgument("mean-matched axis out of range");
    if (std::find(order.begin(), order.end(), a - 1) != order.end()) throw InvalidArgument("repeated mean-matched axis");
    order.push_back(a - 1);
  }
  const std::size_t matched = order.size();
  for (std::size_t a = 0; a < n; ++a) {
    if (std::find(order.begin(), order.end(), a) == order.end()) order.push_back(a);
  }

  const Distribution1D& law = continuous_law(m);
  // Cells in nesting order; cell i at depth j covers the pattern given by the
  // low j bits of i over order[0..j).
  std::vector<IntervalUnion> cells;
  bool mirrored = false;
  double center = 0.0;
  if (const auto* sym = std::get_if<SymmetricNested>(&mode)) {
    center = sym->center;
    check_symmetric(law, center);
    cells.push_back(IntervalUnion{{center, kInf}});
    mirrored = true;
  } else {
    cells.push_back(IntervalUnion::real_line());
  }

  for (std::size_t depth = 0; depth < n; ++depth) {
    const double p = probs[order[depth]];
    const bool keep_mirror = mirrored && depth < matched;
    if (mirrored && !keep_mirror) {
      for (auto& c : cells) c = c.unite(c.mirrored(center));
      mirrored = false;
    }
    const bool balance = std::holds_alternative<BalancedNested>(mode) && depth < matched;
    std::vector<IntervalUnion> next(cells.size() * 2);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      IntervalUnion one;
      if (balance) {
        one = as_intervals(find_balanced_subset(m, cells[i], p, 0));
      } else {
        const MassLayout lay = layout(law, cells[i]);
        one = window_of(law, lay, 0.0, p * lay.total);
      }
      next[i] = cells[i].subtract(one);
      next[i + cells.size()] = one;
    }
    cells = std::move(next);
  }
  if (mirrored) {
    for (auto& c : cells) c = c.unite(c.mirrored(center));
  }

  // Re-index from nesting order to axis order.
  std::vector<SupportSet> by_axis(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    std::size_t index = 0;
    for (std::size_t depth = 0; depth < n; ++depth) {
      if (i & (std::size_t{1} << depth)) index |= std::size_t{1} << order[depth];
    }
    by_axis[index] = cells[i];
  }
  return Partition::from_cells(m, std::move(probs), std::move(by_axis));
}

std::vector<MergedCellMean> merged_cell_means(const Partition& partition, const std::vector<std::size_t>& axes) {
  const std::size_t n = partition.axes();
  for (std::size_t a : axes) {
    if (a < 1 || a > n) throw InvalidArgument("axis out of range");
  }
  const Eigen::VectorXd& mu = partition.marginal().mean();
  std::vector<MergedCellMean> out;
  const std::size_t patterns = std::size_t{1} << axes.size();
  for (std::size_t pat = 0; pat < patterns; ++pat) {
    MergedCellMean entry;
    entry.axes = axes;
    entry.integral = Eigen::VectorXd::Zero(mu.size());
    double prob = 1.0;
    for (std::size_t j = 0; j < axes.size(); ++j) {
      const int bit = (pat >> j) & 1;
      entry.pattern.push_back(bit);
      const double p = partition.probs()[axes[j] - 1];
      prob *= bit ? p : 1.0 - p;
    }
    for (std::size_t index = 0; index < partition.size(); ++index) {
      bool match = true;
      for (std::size_t j = 0; j < axes.size() && match; ++j) {
        match = ((index >> (axes[j] - 1)) & 1) == static_cast<std::size_t>(entry.pattern[j]);
      }
      if (match) entry.integral += partition.means()[index];
    }
    entry.target = mu * prob;
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace gbpf
