#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gbpf/covariance.hpp"
#include "gbpf/errors.hpp"
#include "gbpf/random.hpp"

namespace gbpf {

class InvalidModel : public Error {
 public:
  explicit InvalidModel(ValidityReport report);
  const ValidityReport& report() const noexcept { return report_; }

 private:
  ValidityReport report_;
};

// Law of the latent binary sequence: P(xi_i = 1) = p, cov(xi_i, xi_j) = C(|i - j|).
class GbpModel {
 public:
  // Throws InvalidModel unless check_assumption passes.
  static GbpModel checked(double p, CovarianceFunction cov, std::int64_t horizon = kDefaultHorizon);
  // Keeps the validity report but never throws on it; sampling is then gated by
  // the sign of the gap tables.
  static GbpModel unchecked(double p, CovarianceFunction cov, std::int64_t horizon = kDefaultHorizon);

  double p() const noexcept { return p_; }
  const CovarianceFunction& covariance() const noexcept { return cov_; }
  const ValidityReport& validity() const noexcept { return validity_; }
  bool is_checked() const noexcept { return checked_; }

  double cov(std::int64_t lag) const { return cov_(lag); }
  double cstar(std::int64_t lag) const { return cov_(lag) / p_; }
  // p + C*(lag), the factor contributed by one gap.
  double step(std::int64_t lag) const { return p_ + cov_(lag) / p_; }
  // step(1..n), index k - 1.
  std::vector<double> step_table(std::int64_t n) const;

 private:
  GbpModel(double p, CovarianceFunction cov, ValidityReport validity, bool checked);

  double p_;
  CovarianceFunction cov_;
  ValidityReport validity_;
  bool checked_;
};

// Product of (p + C*(gap)) over consecutive sorted elements; 1/p for the empty
// set and 1 for a singleton. Input need not be sorted.
double l_operator(const GbpModel& model, std::span<const std::int64_t> set);

inline constexpr std::size_t kSubsetSumCap = 20;
inline constexpr std::size_t kConfigCap = 21;

// Alternating subset sum over F' of F of L(B u F'). Exponential in |F|, capped at 20.
double d_operator(const GbpModel& model, std::span<const std::int64_t> ones, std::span<const std::int64_t> zeros);

// Same value in O((|B| + |F|)^2): the sum factors into independent chains
// between consecutive ones.
double d_operator_factored(const GbpModel& model, std::span<const std::int64_t> ones,
                           std::span<const std::int64_t> zeros);

// P(xi = 1 on ones, xi = 0 on zeros) = p * D(ones, zeros). Combined size capped at 21.
double config_probability(const GbpModel& model, std::span<const std::int64_t> ones,
                          std::span<const std::int64_t> zeros);

struct GapTables {
  double p = 0.0;
  std::string covariance;
  std::int64_t n_max = 0;
  // g[k-1] = P(next one exactly k steps after a one)
  std::vector<double> g;
  // h[k-1] = P(first one at position k)
  std::vector<double> h;
  std::vector<double> F;
  std::vector<double> F0;
  // Entries in [-1e-9, 0) that were set to zero.
  std::int64_t clamped = 0;

  double tail_mass() const { return F.empty() ? 1.0 : 1.0 - F.back(); }
};

inline constexpr double kClampTolerance = 1e-9;

// Renewal recursion g(k) = a(k) - sum_{j<k} g(j) a(k - j) with a(k) = p + C*(k),
// accumulated with compensated summation, and h(k) = p (1 - F(k - 1)).
// Throws NegativeGapProbability for entries below -1e-9.
GapTables build_gap_tables(const GbpModel& model, std::int64_t n_max);

struct DWitness {
  std::vector<std::int64_t> ones;
  std::vector<std::int64_t> zeros;
  double value = 0.0;
};

struct WellDefinedness {
  bool ok = false;
  DWitness witness;  // the minimising pair
};

// Minimum of D(B, F) over all disjoint pairs with B u F a non-empty subset of {1..m}.
WellDefinedness verify_well_defined(const GbpModel& model, int m);

struct BinaryPath {
  std::vector<std::uint8_t> bits;
  std::uint64_t seed = 0;
  double p = 0.0;
  std::string covariance;
};

// Inversion helpers. Return the 1-based position, or nullopt when u lies past
// the table (no one within the window).
std::optional<std::int64_t> first_one_position(const GapTables& tables, double u, std::int64_t n);
std::optional<std::int64_t> next_gap(const GapTables& tables, double u, std::int64_t remaining);

BinaryPath sample_path(const GapTables& tables, std::int64_t n, RandomStream& rng);
BinaryPath sample_path(const GbpModel& model, std::int64_t n, RandomStream& rng);

}  // namespace gbpf
