#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gbpf/gbp.hpp"
#include "gbpf/marginal.hpp"
#include "gbpf/support_set.hpp"

namespace gbpf {

inline constexpr double kMassConsistency = 1e-8;

// X(i) = X^A(i) when xi_i = 1 and X^{A^c}(i) otherwise, with X^A ~ f restricted to A.
class ProcessSpec {
 public:
  // Throws InvalidArgument unless mass(A) matches gbp.p() within 1e-8 (or four
  // Monte Carlo standard errors for predicate sets).
  ProcessSpec(Marginal marginal, SupportSet a, GbpModel gbp, std::int64_t length);

  const Marginal& marginal() const noexcept { return marginal_; }
  const SupportSet& a() const noexcept { return a_; }
  const SupportSet& a_complement() const noexcept { return ac_; }
  const GbpModel& gbp() const noexcept { return gbp_; }
  std::int64_t length() const noexcept { return length_; }
  std::size_t dimension() const { return marginal_.dimension(); }
  double p() const { return gbp_.p(); }
  double set_mass() const noexcept { return mass_; }

  // E[X | X in A] and E[X | X in A^c]
  const Eigen::VectorXd& mean_a() const noexcept { return mean_a_; }
  const Eigen::VectorXd& mean_ac() const noexcept { return mean_ac_; }

  const RestrictedSampler& sampler_a() const noexcept { return sampler_a_; }
  const RestrictedSampler& sampler_ac() const noexcept { return sampler_ac_; }

  ProcessSpec with_length(std::int64_t length) const;

 private:
  Marginal marginal_;
  SupportSet a_;
  SupportSet ac_;
  GbpModel gbp_;
  std::int64_t length_;
  double mass_ = 0.0;
  Eigen::VectorXd mean_a_;
  Eigen::VectorXd mean_ac_;
  RestrictedSampler sampler_a_;
  RestrictedSampler sampler_ac_;
};

struct ProcessPath {
  std::int64_t n = 0;
  std::size_t d = 0;
  std::vector<double> values;  // row-major n x d
  BinaryPath latent;
  std::uint64_t seed = 0;

  double at(std::int64_t i, std::size_t k) const { return values[static_cast<std::size_t>(i) * d + k]; }
  // Component k as a series.
  std::vector<double> component(std::size_t k) const;
};

struct SimulationOptions {
  unsigned threads = 0;  // 0: GBPF_THREADS or the hardware count
};

inline constexpr std::size_t kValueChunk = 4096;

// The latent path comes from the Latent sub-stream of `seed`; values are filled in
// chunks of 4096 sites, each from its own Values sub-stream, so the output does
// not depend on the thread count.
ProcessPath simulate_process(const ProcessSpec& spec, const GapTables& tables, std::uint64_t seed,
                             const SimulationOptions& options = {});
ProcessPath simulate_process(const ProcessSpec& spec, std::uint64_t seed, const SimulationOptions& options = {});

// d d^T with d = E[X | A] - E[X | A^c]; cov(X(i), X(j)) is this times C(|i - j|).
Eigen::MatrixXd theoretical_cov(const ProcessSpec& spec);
// Same for the componentwise powers X^q.
Eigen::MatrixXd moment_cov(const ProcessSpec& spec, int q);
// d* with cov(1{X(i) in B1}, 1{X(j) in B2}) = d* C(|i - j|).
double indicator_cov(const ProcessSpec& spec, const SupportSet& b1, const SupportSet& b2);
// Marginal covariance at lag 0, theoretical_cov * C(lag) otherwise.
Eigen::MatrixXd lag_covariance(const ProcessSpec& spec, std::int64_t lag);

// E[e^{i theta . X^A}] and E[e^{i theta . X^{A^c}}]
std::complex<double> cf_a(const ProcessSpec& spec, std::span<const double> theta);
std::complex<double> cf_ac(const ProcessSpec& spec, std::span<const double> theta);

inline constexpr std::size_t kJointCfCap = 16;
inline constexpr std::size_t kClosedFormCap = 5;

// E[exp(i sum_j theta_j . X(indices_j))] by summing over all latent
// configurations. Indices strictly increasing, at most 16.
std::complex<double> joint_cf(const ProcessSpec& spec, const std::vector<std::vector<double>>& thetas,
                              std::span<const std::int64_t> indices);

// The same quantity as a sum over index subsets K, |K| >= 2, split into runs of
// length >= 2. Up to 5 indices.
std::complex<double> joint_cf_closed_form(const ProcessSpec& spec, const std::vector<std::vector<double>>& thetas,
                                          std::span<const std::int64_t> indices);

// Scalar versions taking the restricted CF values directly; phi_a[j] and
// phi_ac[j] belong to indices[j].
std::complex<double> joint_cf_enumerated(const GbpModel& model, std::span<const std::int64_t> indices,
                                         std::span<const std::complex<double>> phi_a,
                                         std::span<const std::complex<double>> phi_ac);
std::complex<double> joint_cf_expansion(const GbpModel& model, std::span<const std::int64_t> indices,
                                        std::span<const std::complex<double>> phi_a,
                                        std::span<const std::complex<double>> phi_ac);

// Factor multiplying prod f(x_j) in the joint density when x_j lies in A
// (in_a[j] true) or in A^c: p D(B, F) / (p^|B| (1 - p)^|F|).
double joint_density_weight(const ProcessSpec& spec, const std::vector<bool>& in_a,
                            std::span<const std::int64_t> indices);

}  // namespace gbpf
