#include "gbpf/gbp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

namespace gbpf {

namespace {

std::vector<std::int64_t> sorted_copy(std::span<const std::int64_t> s) {
  std::vector<std::int64_t> v(s.begin(), s.end());
  std::sort(v.begin(), v.end());
  if (std::adjacent_find(v.begin(), v.end()) != v.end()) throw InvalidArgument("index set has repeated elements");
  return v;
}

void require_disjoint(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
  std::vector<std::int64_t> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  if (!common.empty()) throw InvalidArgument("ones and zeros must be disjoint");
}

double l_sorted(const GbpModel& model, const std::vector<std::int64_t>& s) {
  if (s.empty()) return 1.0 / model.p();
  double out = 1.0;
  for (std::size_t i = 1; i < s.size(); ++i) out *= model.step(s[i] - s[i - 1]);
  return out;
}

// Signed chain sum over subsets of zeros visited in order of distance from the
// anchor: 1 + sum over non-empty subsets of (-1)^|S| * product of steps.
double open_chain(const GbpModel& model, std::int64_t anchor, const std::vector<std::int64_t>& zeros) {
  const std::size_t r = zeros.size();
  std::vector<std::int64_t> dist(r);
  for (std::size_t j = 0; j < r; ++j) dist[j] = std::llabs(zeros[j] - anchor);
  std::sort(dist.begin(), dist.end());
  std::vector<double> u(r);
  double total = 1.0;
  for (std::size_t j = 0; j < r; ++j) {
    double acc = model.step(dist[j]);
    for (std::size_t i = 0; i < j; ++i) acc += u[i] * model.step(dist[j] - dist[i]);
    u[j] = -acc;
    total += u[j];
  }
  return total;
}

// Same chain closed by a one at `right`.
double closed_chain(const GbpModel& model, std::int64_t left, std::int64_t right, const std::vector<std::int64_t>& zeros) {
  const std::size_t r = zeros.size();
  std::vector<double> v(r);
  double total = model.step(right - left);
  for (std::size_t j = 0; j < r; ++j) {
    double acc = model.step(zeros[j] - left);
    for (std::size_t i = 0; i < j; ++i) acc += v[i] * model.step(zeros[j] - zeros[i]);
    v[j] = -acc;
    total += v[j] * model.step(right - zeros[j]);
  }
  return total;
}

}  // namespace

InvalidModel::InvalidModel(ValidityReport report)
    : Error("covariance fails the validity check: " + report.summary()), report_(std::move(report)) {}

GbpModel::GbpModel(double p, CovarianceFunction cov, ValidityReport validity, bool checked)
    : p_(p), cov_(std::move(cov)), validity_(std::move(validity)), checked_(checked) {}

GbpModel GbpModel::checked(double p, CovarianceFunction cov, std::int64_t horizon) {
  ValidityReport report = check_assumption(cov, p, horizon);
  if (!report.pass) throw InvalidModel(std::move(report));
  return GbpModel(p, std::move(cov), std::move(report), true);
}

GbpModel GbpModel::unchecked(double p, CovarianceFunction cov, std::int64_t horizon) {
  ValidityReport report = check_assumption(cov, p, horizon);
  return GbpModel(p, std::move(cov), std::move(report), false);
}

std::vector<double> GbpModel::step_table(std::int64_t n) const {
  std::vector<double> a = cov_.table(n);
  for (double& v : a) v = p_ + v / p_;
  return a;
}

double l_operator(const GbpModel& model, std::span<const std::int64_t> set) {
  return l_sorted(model, sorted_copy(set));
}

double d_operator(const GbpModel& model, std::span<const std::int64_t> ones, std::span<const std::int64_t> zeros) {
  const auto b = sorted_copy(ones);
  const auto f = sorted_copy(zeros);
  require_disjoint(b, f);
  if (f.size() > kSubsetSumCap) throw SizeGuardExceeded("d_operator: |F| exceeds 20");
  const std::size_t subsets = std::size_t{1} << f.size();
  std::vector<std::int64_t> merged;
  merged.reserve(b.size() + f.size());
  std::vector<std::int64_t> part;
  part.reserve(f.size());
  double total = 0.0;
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    part.clear();
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (mask & (std::size_t{1} << i)) part.push_back(f[i]);
    }
    merged.clear();
    std::merge(b.begin(), b.end(), part.begin(), part.end(), std::back_inserter(merged));
    const double term = l_sorted(model, merged);
    total += (part.size() % 2 == 0) ? term : -term;
  }
  return total;
}

double d_operator_factored(const GbpModel& model, std::span<const std::int64_t> ones,
                           std::span<const std::int64_t> zeros) {
  const auto b = sorted_copy(ones);
  const auto f = sorted_copy(zeros);
  require_disjoint(b, f);

  if (b.empty()) {
    // Group the subsets by their first element.
    double total = 1.0 / model.p();
    for (std::size_t i = 0; i < f.size(); ++i) {
      std::vector<std::int64_t> after(f.begin() + static_cast<std::ptrdiff_t>(i) + 1, f.end());
      total -= open_chain(model, f[i], after);
    }
    return total;
  }

  auto zeros_between = [&f](std::int64_t lo, std::int64_t hi) {
    std::vector<std::int64_t> out;
    for (std::int64_t z : f) {
      if (z > lo && z < hi) out.push_back(z);
    }
    return out;
  };
  constexpr auto lowest = std::numeric_limits<std::int64_t>::min();
  constexpr auto highest = std::numeric_limits<std::int64_t>::max();
  double total = open_chain(model, b.front(), zeros_between(lowest, b.front()));
  for (std::size_t i = 1; i < b.size(); ++i) total *= closed_chain(model, b[i - 1], b[i], zeros_between(b[i - 1], b[i]));
  total *= open_chain(model, b.back(), zeros_between(b.back(), highest));
  return total;
}

double config_probability(const GbpModel& model, std::span<const std::int64_t> ones,
                          std::span<const std::int64_t> zeros) {
  if (ones.size() + zeros.size() > kConfigCap) throw SizeGuardExceeded("config_probability: more than 21 indices");
  if (ones.empty() && zeros.empty()) throw InvalidArgument("config_probability: empty configuration");
  return model.p() * d_operator_factored(model, ones, zeros);
}

GapTables build_gap_tables(const GbpModel& model, std::int64_t n_max) {
  if (n_max < 1) throw InvalidArgument("n_max must be positive");
  const std::size_t n = static_cast<std::size_t>(n_max);
  const double p = model.p();
  const std::vector<double> a = model.step_table(n_max);
  std::vector<double> a_rev(a.rbegin(), a.rend());

  GapTables t;
  t.p = p;
  t.covariance = model.covariance().describe();
  t.n_max = n_max;
  t.g.resize(n);
  t.h.resize(n);
  t.F.resize(n);
  t.F0.resize(n);
  std::vector<double> raw(n);

  // Several independent Kahan lanes keep the inner loop pipelined.
  constexpr std::size_t kLanes = 32;
  double cum = 0.0;
  double cum_comp = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    // sum_{j < k} raw[j] * a[k - 1 - j]; a[k - 1 - j] = a_rev[n - k + j]
    const double* gp = raw.data();
    const double* ap = a_rev.data() + (n - k);
    std::array<double, kLanes> s{};
    std::array<double, kLanes> c{};
    std::size_t j = 0;
    for (; j + kLanes <= k; j += kLanes) {
      for (std::size_t l = 0; l < kLanes; ++l) {
        const double y = gp[j + l] * ap[j + l] - c[l];
        const double tt = s[l] + y;
        c[l] = (tt - s[l]) - y;
        s[l] = tt;
      }
    }
    double sum = 0.0;
    double comp = 0.0;
    auto add = [&sum, &comp](double v) {
      const double y = v - comp;
      const double tt = sum + y;
      comp = (tt - sum) - y;
      sum = tt;
    };
    for (std::size_t l = 0; l < kLanes; ++l) {
      add(s[l]);
      add(-c[l]);
    }
    for (; j < k; ++j) add(gp[j] * ap[j]);

    raw[k] = a[k] - sum;
    double gk = raw[k];
    if (gk < 0.0) {
      if (gk < -kClampTolerance) throw NegativeGapProbability('g', static_cast<std::int64_t>(k + 1), gk);
      ++t.clamped;
      gk = 0.0;
    }
    t.g[k] = gk;

    // h(k) = p (1 - F(k - 1)) uses the cumulative sum before adding g(k).
    double hk = p * (1.0 - cum);
    if (hk < 0.0) {
      if (hk < -kClampTolerance) throw NegativeGapProbability('h', static_cast<std::int64_t>(k + 1), hk);
      ++t.clamped;
      hk = 0.0;
    }
    t.h[k] = hk;

    const double y = gk - cum_comp;
    const double tt = cum + y;
    cum_comp = (tt - cum) - y;
    cum = tt;
    t.F[k] = cum;
    t.F0[k] = (k == 0 ? 0.0 : t.F0[k - 1]) + hk;
  }
  if (t.clamped > 0) {
    spdlog::warn("gap tables: {} entries in [-1e-9, 0) clamped to zero", t.clamped);
  }
  if (t.tail_mass() > 1e-3) {
    spdlog::info("gap tables: tail mass 1 - F({}) = {:.3e}", n_max, t.tail_mass());
  }
  return t;
}

WellDefinedness verify_well_defined(const GbpModel& model, int m) {
  if (m < 2) throw InvalidArgument("verify_well_defined: m must be at least 2");
  if (m > 12) throw SizeGuardExceeded("verify_well_defined: m must be at most 12");
  // Ternary digit per position: 0 absent, 1 one, 2 zero.
  std::vector<std::size_t> pow3(static_cast<std::size_t>(m) + 1, 1);
  for (int i = 1; i <= m; ++i) pow3[i] = pow3[i - 1] * 3;
  const std::size_t states = pow3[static_cast<std::size_t>(m)];
  std::vector<double> a = model.step_table(m);
  std::vector<double> d(states);
  std::vector<int> digits(static_cast<std::size_t>(m));

  double best = std::numeric_limits<double>::infinity();
  std::size_t best_state = 0;
  for (std::size_t s = 0; s < states; ++s) {
    std::size_t rest = s;
    int highest_zero = -1;
    for (int i = 0; i < m; ++i) {
      digits[i] = static_cast<int>(rest % 3);
      rest /= 3;
      if (digits[i] == 2) highest_zero = i;
    }
    if (highest_zero < 0) {
      int prev = -1;
      double l = 1.0;
      for (int i = 0; i < m; ++i) {
        if (digits[i] != 1) continue;
        if (prev >= 0) l *= a[static_cast<std::size_t>(i - prev - 1)];
        prev = i;
      }
      d[s] = prev < 0 ? 1.0 / model.p() : l;
    } else {
      const std::size_t w = pow3[static_cast<std::size_t>(highest_zero)];
      d[s] = d[s - 2 * w] - d[s - w];
    }
    if (s != 0 && d[s] < best) {
      best = d[s];
      best_state = s;
    }
  }

  WellDefinedness out;
  out.ok = best > 0.0;
  out.witness.value = best;
  std::size_t rest = best_state;
  for (int i = 0; i < m; ++i) {
    const auto digit = rest % 3;
    rest /= 3;
    if (digit == 1) out.witness.ones.push_back(i + 1);
    if (digit == 2) out.witness.zeros.push_back(i + 1);
  }
  return out;
}

std::optional<std::int64_t> first_one_position(const GapTables& tables, double u, std::int64_t n) {
  const auto lim = static_cast<std::ptrdiff_t>(std::min(n, tables.n_max));
  const auto end = tables.F0.begin() + lim;
  const auto it = std::upper_bound(tables.F0.begin(), end, u);
  if (it == end) return std::nullopt;
  return static_cast<std::int64_t>(it - tables.F0.begin()) + 1;
}

std::optional<std::int64_t> next_gap(const GapTables& tables, double u, std::int64_t remaining) {
  const auto lim = static_cast<std::ptrdiff_t>(std::min(remaining, tables.n_max));
  const auto end = tables.F.begin() + lim;
  const auto it = std::upper_bound(tables.F.begin(), end, u);
  if (it == end) return std::nullopt;
  return static_cast<std::int64_t>(it - tables.F.begin()) + 1;
}

BinaryPath sample_path(const GapTables& tables, std::int64_t n, RandomStream& rng) {
  if (n < 1) throw InvalidArgument("path length must be positive");
  if (tables.n_max < n) throw InvalidArgument("gap tables are shorter than the requested path");
  BinaryPath path;
  path.bits.assign(static_cast<std::size_t>(n), 0);
  path.seed = rng.seed();
  path.p = tables.p;
  path.covariance = tables.covariance;

  auto pos = first_one_position(tables, rng.uniform(), n);
  while (pos) {
    path.bits[static_cast<std::size_t>(*pos - 1)] = 1;
    const std::int64_t remaining = n - *pos;
    if (remaining == 0) break;
    const auto gap = next_gap(tables, rng.uniform(), remaining);
    if (!gap) break;
    *pos += *gap;
  }
  return path;
}

BinaryPath sample_path(const GbpModel& model, std::int64_t n, RandomStream& rng) {
  const GapTables tables = build_gap_tables(model, n);
  return sample_path(tables, n, rng);
}

}  // namespace gbpf
