#include "gbpf/process.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gbpf/errors.hpp"
#include "gbpf/parallel.hpp"

namespace gbpf {

namespace {

void require_increasing(std::span<const std::int64_t> indices) {
  for (std::size_t j = 1; j < indices.size(); ++j) {
    if (indices[j] <= indices[j - 1]) throw InvalidArgument("indices must be strictly increasing");
  }
}

// Splits of positions [0, r) into consecutive runs of length >= 2.
void run_splits(std::size_t start, std::size_t r, std::vector<std::pair<std::size_t, std::size_t>>& current,
                std::vector<std::vector<std::pair<std::size_t, std::size_t>>>& out) {
  if (start == r) {
    out.push_back(current);
    return;
  }
  for (std::size_t end = start + 2; end <= r; ++end) {
    if (r - end == 1) continue;
    current.emplace_back(start, end);
    run_splits(end, r, current, out);
    current.pop_back();
  }
}

Eigen::MatrixXd outer(const Eigen::VectorXd& v) { return v * v.transpose(); }

}  // namespace

ProcessSpec::ProcessSpec(Marginal marginal, SupportSet a, GbpModel gbp, std::int64_t length)
    : marginal_(std::move(marginal)),
      a_(normalize_for(marginal_, a)),
      ac_(complement(marginal_, a_)),
      gbp_(std::move(gbp)),
      length_(length),
      sampler_a_(marginal_, a_),
      sampler_ac_(marginal_, ac_) {
  if (length_ < 1) throw InvalidArgument("process length must be positive");
  const Estimate est = integrate_with_error(marginal_, a_, Integrand::mass());
  mass_ = est.value.real();
  const double tol = std::max(kMassConsistency, 4.0 * est.se);
  if (std::abs(mass_ - gbp_.p()) > tol) {
    std::ostringstream msg;
    msg << "set A has mass " << mass_ << " but the latent process has p = " << gbp_.p();
    throw InvalidArgument(msg.str());
  }
  const double mac = gbpf::set_mass(marginal_, ac_);
  mean_a_ = set_mean(marginal_, a_) / mass_;
  mean_ac_ = set_mean(marginal_, ac_) / mac;
}

ProcessSpec ProcessSpec::with_length(std::int64_t length) const {
  ProcessSpec out = *this;
  if (length < 1) throw InvalidArgument("process length must be positive");
  out.length_ = length;
  return out;
}

std::vector<double> ProcessPath::component(std::size_t k) const {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = at(i, k);
  return out;
}

ProcessPath simulate_process(const ProcessSpec& spec, const GapTables& tables, std::uint64_t seed,
                             const SimulationOptions& options) {
  const RandomStream master(seed);
  RandomStream latent_rng = master.split(StreamTag::Latent, 0);
  ProcessPath path;
  path.n = spec.length();
  path.d = spec.dimension();
  path.seed = seed;
  path.latent = sample_path(tables, path.n, latent_rng);
  path.latent.seed = seed;
  path.values.assign(static_cast<std::size_t>(path.n) * path.d, 0.0);

  const std::size_t n = static_cast<std::size_t>(path.n);
  const std::size_t chunks = (n + kValueChunk - 1) / kValueChunk;
  parallel_for(chunks, options.threads, [&](std::size_t c) {
    RandomStream rng = master.split(StreamTag::Values, c);
    const std::size_t end = std::min(n, (c + 1) * kValueChunk);
    for (std::size_t i = c * kValueChunk; i < end; ++i) {
      std::span<double> row(path.values.data() + i * path.d, path.d);
      if (path.latent.bits[i]) {
        spec.sampler_a().draw(rng, row);
      } else {
        spec.sampler_ac().draw(rng, row);
      }
    }
  });
  return path;
}

ProcessPath simulate_process(const ProcessSpec& spec, std::uint64_t seed, const SimulationOptions& options) {
  return simulate_process(spec, build_gap_tables(spec.gbp(), spec.length()), seed, options);
}

Eigen::MatrixXd theoretical_cov(const ProcessSpec& spec) { return outer(spec.mean_a() - spec.mean_ac()); }

Eigen::MatrixXd moment_cov(const ProcessSpec& spec, int q) {
  if (q < 1) throw InvalidArgument("moment order must be positive");
  if (q == 1) return theoretical_cov(spec);
  const Eigen::VectorXd ma = set_moment(spec.marginal(), spec.a(), q) / spec.set_mass();
  const Eigen::VectorXd mac = set_moment(spec.marginal(), spec.a_complement(), q) / (1.0 - spec.set_mass());
  return outer(ma - mac);
}

double indicator_cov(const ProcessSpec& spec, const SupportSet& b1, const SupportSet& b2) {
  const double p = spec.set_mass();
  double out = 1.0;
  for (const SupportSet* b : {&b1, &b2}) {
    const double in_a = set_mass(spec.marginal(), intersect(spec.marginal(), spec.a(), *b));
    const double in_ac = set_mass(spec.marginal(), intersect(spec.marginal(), spec.a_complement(), *b));
    out *= in_a / p - in_ac / (1.0 - p);
  }
  return out;
}

Eigen::MatrixXd lag_covariance(const ProcessSpec& spec, std::int64_t lag) {
  lag = std::llabs(lag);
  if (lag == 0) return spec.marginal().covariance();
  return theoretical_cov(spec) * spec.gbp().cov(lag);
}

std::complex<double> cf_a(const ProcessSpec& spec, std::span<const double> theta) {
  return set_cf(spec.marginal(), spec.a(), theta) / spec.set_mass();
}

std::complex<double> cf_ac(const ProcessSpec& spec, std::span<const double> theta) {
  return set_cf(spec.marginal(), spec.a_complement(), theta) / (1.0 - spec.set_mass());
}

std::complex<double> joint_cf_enumerated(const GbpModel& model, std::span<const std::int64_t> indices,
                                         std::span<const std::complex<double>> phi_a,
                                         std::span<const std::complex<double>> phi_ac) {
  const std::size_t k = indices.size();
  if (k > kJointCfCap) throw SizeGuardExceeded("joint characteristic function is limited to 16 indices");
  if (phi_a.size() != k || phi_ac.size() != k) throw InvalidArgument("one CF value per index is required");
  require_increasing(indices);
  std::complex<double> total = 0.0;
  std::vector<std::int64_t> ones, zeros;
  for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
    ones.clear();
    zeros.clear();
    std::complex<double> prod = 1.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (mask & (std::size_t{1} << j)) {
        ones.push_back(indices[j]);
        prod *= phi_a[j];
      } else {
        zeros.push_back(indices[j]);
        prod *= phi_ac[j];
      }
    }
    total += config_probability(model, ones, zeros) * prod;
  }
  return total;
}

std::complex<double> joint_cf_expansion(const GbpModel& model, std::span<const std::int64_t> indices,
                                        std::span<const std::complex<double>> phi_a,
                                        std::span<const std::complex<double>> phi_ac) {
  const std::size_t k = indices.size();
  if (k > kClosedFormCap) throw SizeGuardExceeded("closed-form joint CF is limited to 5 indices");
  if (phi_a.size() != k || phi_ac.size() != k) throw InvalidArgument("one CF value per index is required");
  require_increasing(indices);
  const double p = model.p();
  std::vector<std::complex<double>> phi(k);
  std::complex<double> total = 1.0;
  for (std::size_t j = 0; j < k; ++j) {
    phi[j] = p * phi_a[j] + (1.0 - p) * phi_ac[j];
    total *= phi[j];
  }
  for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
    std::vector<std::size_t> members;
    for (std::size_t j = 0; j < k; ++j) {
      if (mask & (std::size_t{1} << j)) members.push_back(j);
    }
    if (members.size() < 2) continue;
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> splits;
    std::vector<std::pair<std::size_t, std::size_t>> current;
    run_splits(0, members.size(), current, splits);
    for (const auto& split : splits) {
      double lstar = 1.0;
      std::vector<bool> interior(k, false);
      for (const auto& [b, e] : split) {
        double block = p;
        for (std::size_t t = b + 1; t < e; ++t) block *= model.cstar(indices[members[t]] - indices[members[t - 1]]);
        lstar *= block;
        for (std::size_t j = members[b] + 1; j < members[e - 1]; ++j) {
          if (!(mask & (std::size_t{1} << j))) interior[j] = true;
        }
      }
      std::complex<double> term = lstar;
      for (std::size_t j = 0; j < k; ++j) {
        if (mask & (std::size_t{1} << j)) {
          term *= phi_a[j] - phi_ac[j];
        } else if (interior[j]) {
          term *= phi_ac[j];
        } else {
          term *= phi[j];
        }
      }
      total += term;
    }
  }
  return total;
}

namespace {

void cell_cfs(const ProcessSpec& spec, const std::vector<std::vector<double>>& thetas, std::size_t k,
              std::vector<std::complex<double>>& phi_a, std::vector<std::complex<double>>& phi_ac) {
  if (thetas.size() != k) throw InvalidArgument("one theta vector per index is required");
  phi_a.resize(k);
  phi_ac.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    phi_a[j] = cf_a(spec, thetas[j]);
    phi_ac[j] = cf_ac(spec, thetas[j]);
  }
}

}  // namespace

std::complex<double> joint_cf(const ProcessSpec& spec, const std::vector<std::vector<double>>& thetas,
                              std::span<const std::int64_t> indices) {
  if (indices.size() > kJointCfCap) throw SizeGuardExceeded("joint characteristic function is limited to 16 indices");
  std::vector<std::complex<double>> phi_a, phi_ac;
  cell_cfs(spec, thetas, indices.size(), phi_a, phi_ac);
  return joint_cf_enumerated(spec.gbp(), indices, phi_a, phi_ac);
}

std::complex<double> joint_cf_closed_form(const ProcessSpec& spec, const std::vector<std::vector<double>>& thetas,
                                          std::span<const std::int64_t> indices) {
  if (indices.size() > kClosedFormCap) throw SizeGuardExceeded("closed-form joint CF is limited to 5 indices");
  std::vector<std::complex<double>> phi_a, phi_ac;
  cell_cfs(spec, thetas, indices.size(), phi_a, phi_ac);
  return joint_cf_expansion(spec.gbp(), indices, phi_a, phi_ac);
}

double joint_density_weight(const ProcessSpec& spec, const std::vector<bool>& in_a,
                            std::span<const std::int64_t> indices) {
  if (indices.size() > kJointCfCap) throw SizeGuardExceeded("joint density weights are limited to 16 indices");
  if (in_a.size() != indices.size()) throw InvalidArgument("one cell label per index is required");
  require_increasing(indices);
  const double p = spec.p();
  std::vector<std::int64_t> ones, zeros;
  double scale = 1.0;
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (in_a[j]) {
      ones.push_back(indices[j]);
      scale *= p;
    } else {
      zeros.push_back(indices[j]);
      scale *= 1.0 - p;
    }
  }
  return config_probability(spec.gbp(), ones, zeros) / scale;
}

}  // namespace gbpf
