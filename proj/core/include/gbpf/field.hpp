#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gbpf/gbp.hpp"
#include "gbpf/partition.hpp"
#include "gbpf/process.hpp"

namespace gbpf {

// Values times sites may not exceed this many doubles.
inline constexpr std::uint64_t kFieldBudget = 100000000;

// X(t) is drawn from the cell selected by the bits xi^1_{t_1}, ..., xi^n_{t_n}
// of n independent latent processes.
class FieldSpec {
 public:
  FieldSpec(Partition partition, std::vector<GbpModel> gbps, std::vector<std::int64_t> extents);

  const Partition& partition() const noexcept { return partition_; }
  const Marginal& marginal() const noexcept { return partition_.marginal(); }
  const std::vector<GbpModel>& gbps() const noexcept { return gbps_; }
  const GbpModel& gbp(std::size_t axis) const { return gbps_.at(axis); }
  const std::vector<std::int64_t>& extents() const noexcept { return extents_; }
  std::size_t axes() const noexcept { return gbps_.size(); }
  std::size_t dimension() const { return partition_.marginal().dimension(); }
  std::uint64_t sites() const;

  // E[X | X in cell]
  const std::vector<Eigen::VectorXd>& cell_means() const noexcept { return cell_means_; }
  // prod_k p_k^{l_k} (1 - p_k)^{1 - l_k} from the latent probabilities.
  const std::vector<double>& cell_probs() const noexcept { return cell_probs_; }
  const RestrictedSampler& sampler(std::size_t cell) const { return samplers_.at(cell); }

  FieldSpec with_extents(std::vector<std::int64_t> extents) const;

 private:
  Partition partition_;
  std::vector<GbpModel> gbps_;
  std::vector<std::int64_t> extents_;
  std::vector<Eigen::VectorXd> cell_means_;
  std::vector<double> cell_probs_;
  std::vector<RestrictedSampler> samplers_;
};

struct FieldSample {
  std::vector<std::int64_t> extents;
  std::size_t d = 0;
  // Sites in C order (last axis fastest), d values per site.
  std::vector<double> values;
  std::vector<BinaryPath> latent;
  std::uint64_t seed = 0;

  std::uint64_t sites() const;
  std::uint64_t offset(std::span<const std::int64_t> t) const;
  double at(std::span<const std::int64_t> t, std::size_t k = 0) const { return values[offset(t) * d + k]; }
  std::vector<double> component(std::size_t k) const;
};

// Latent path k comes from the Latent sub-stream k of `seed`; sites are filled
// in chunks of 4096 with their own Values sub-streams.
FieldSample simulate_field(const FieldSpec& spec, const std::vector<GapTables>& tables, std::uint64_t seed,
                           const SimulationOptions& options = {});
FieldSample simulate_field(const FieldSpec& spec, std::uint64_t seed, const SimulationOptions& options = {});

// Gap tables for every axis, each to its extent.
std::vector<GapTables> field_gap_tables(const FieldSpec& spec);

struct CovarianceTerm {
  std::uint32_t axes = 0;  // bit k set: axis k + 1 in K
  Eigen::MatrixXd matrix;  // coefficient of prod_{k in K} C_k(|lag_k|)
};

struct CovarianceDecomposition {
  std::uint32_t zero_axes = 0;  // O, the axes with zero lag
  std::vector<CovarianceTerm> terms;
  // Lag-independent part that appears when O is not empty. Zero otherwise.
  Eigen::MatrixXd constant_term;

  // Sum of the terms without the constant.
  Eigen::MatrixXd structured(const FieldSpec& spec, std::span<const std::int64_t> lag) const;
  Eigen::MatrixXd total(const FieldSpec& spec, std::span<const std::int64_t> lag) const;
};

// Terms M_K = sum over the bits on O of pi(l_O) m_K m_K^T, where
// m_K(l_O) = sum_{l off O} (-1)^{|K| - sum_K l} E[X | cell l] prod_{j not in K u O} pi_j(l_j).
// The lag must not be all zeros.
CovarianceDecomposition decompose_field_cov(const FieldSpec& spec, std::span<const std::int64_t> lag);

// cov(X(t + lag), X(t)). Marginal covariance at lag 0.
Eigen::MatrixXd theoretical_field_cov(const FieldSpec& spec, std::span<const std::int64_t> lag);

// The sum over K alone, omitting the constant term. Equals the full covariance
// when no lag coordinate is zero.
Eigen::MatrixXd structured_field_cov(const FieldSpec& spec, std::span<const std::int64_t> lag);

inline constexpr std::size_t kFieldOracleAxes = 6;

// E[X(t) X(s)^T] - mu mu^T by enumerating the latent bits at both sites, with
// pair probabilities from the D operator.
Eigen::MatrixXd field_cov_oracle(const FieldSpec& spec, std::span<const std::int64_t> lag);

// Two-axis coefficient vectors written per cell:
//   m0 = E10 + E01 - E11 - E00
//   m1 = p2 (E11 - E01) + (1 - p2)(E10 - E00)
//   m2 = p1 (E11 - E10) + (1 - p1)(E01 - E00)
//   M*1 = p2 u(11,01) u(11,01)^T + (1 - p2) u(10,00) u(10,00)^T, u(a,b) = Ea - Eb
// and M*2 likewise with the axes swapped. Elm is E[X | X in A^{lm}].
struct PlaneCoefficients {
  Eigen::VectorXd m0, m1, m2;
  Eigen::MatrixXd mstar1, mstar2;
  // p2 (1 - p2) m2 m2^T and p1 (1 - p1) m1 m1^T: the constant terms at lags
  // (d, 0) and (0, d).
  Eigen::MatrixXd offset1, offset2;
};

PlaneCoefficients plane_coefficients(const FieldSpec& spec);

struct ZeroCondition {
  std::string name;
  std::vector<std::size_t> axes;  // K', 1-based
  bool holds = false;
  double residual = 0.0;          // largest violation of the integral conditions
  std::vector<std::uint32_t> forced;  // K masks whose row i' should vanish
  bool include_constant = false;  // the constant term row should vanish too
  bool verified = false;          // the computed covariance shows the zeros
  double worst_entry = 0.0;       // largest |entry| among the forced rows, scaled
};

struct ZeroReport {
  std::size_t component = 0;
  std::vector<ZeroCondition> conditions;
  // True when every holding condition is verified.
  bool consistent() const;
  std::string summary() const;
};

inline constexpr double kZeroConditionTolerance = 1e-6;
inline constexpr double kZeroEntryTolerance = 1e-9;

// Evaluates, for component i', every merged-cell balance condition
// (integral of x_{i'} over the merged cell for a pattern on K' equals mu_{i'}
// times its probability) and, on two axes, the cross-term and corner forms.
// Each holding condition lists the coefficient rows it forces to zero and is
// checked against decompose_field_cov at lags where O is inside K'.
ZeroReport check_zero_conditions(const FieldSpec& spec, std::size_t component);

inline constexpr std::size_t kFieldCfBits = 12;

// Joint CF over lattice sites by enumerating the latent bits on each axis's
// distinct coordinates (at most 12 in total).
std::complex<double> field_joint_cf(const FieldSpec& spec, const std::vector<std::vector<double>>& thetas,
                                    const std::vector<std::vector<std::int64_t>>& sites);

}  // namespace gbpf
