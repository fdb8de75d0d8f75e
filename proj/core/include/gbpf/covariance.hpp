#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace gbpf {

enum class Family { Exponential, StretchedExponential, TwoExponential, PowerLaw, Tabulated };

std::string to_string(Family family);

// C(x) = c * exp(-theta * x)
struct Exponential {
  double c;
  double theta;
};

// C(x) = c * exp(-theta * x^alpha)
struct StretchedExponential {
  double c;
  double theta;
  double alpha;
};

// C(x) = c1 * rho1^x + c2 * rho2^x
struct TwoExponential {
  double c1;
  double rho1;
  double c2;
  double rho2;
};

// C(x) = c * x^(2H - 2)
struct PowerLaw {
  double c;
  double hurst;
};

enum class TailRule { Geometric, Reject };

// values[k - 1] = C(k). Past the table the geometric rule continues with the
// last observed ratio; the reject rule throws.
struct Tabulated {
  std::vector<double> values;
  TailRule tail = TailRule::Geometric;
};

class CovarianceFunction {
 public:
  using Params = std::variant<Exponential, StretchedExponential, TwoExponential, PowerLaw, Tabulated>;

  CovarianceFunction(Params params);  // NOLINT(google-explicit-constructor)

  static CovarianceFunction exponential(double c, double theta);
  static CovarianceFunction stretched_exponential(double c, double theta, double alpha);
  static CovarianceFunction two_exponential(double c1, double rho1, double c2, double rho2);
  static CovarianceFunction power_law(double c, double hurst);
  static CovarianceFunction tabulated(std::vector<double> values, TailRule tail = TailRule::Geometric);

  Family family() const noexcept;
  const Params& params() const noexcept { return params_; }

  // Throws InvalidArgument for lag < 1 or a lag past a rejecting table.
  double operator()(std::int64_t lag) const;

  // C(1..n) as a vector, index k - 1.
  std::vector<double> table(std::int64_t n) const;

  // Largest lag that can be evaluated, or -1 when unbounded.
  std::int64_t max_lag() const noexcept;

  std::string describe() const;

 private:
  Params params_;
};

double eval_cov(const CovarianceFunction& cov, std::int64_t lag);

enum class Clause { NotPositive, NotDecreasing, RatioNotNondecreasing, C1TooLarge, C2TooSmall };

std::string to_string(Clause clause);

struct Violation {
  Clause clause;
  std::int64_t witness_lag;
  double lhs;
  double rhs;
};

struct ValidityReport {
  bool pass = false;
  std::vector<Violation> violated_clauses;
  std::int64_t horizon = 0;

  bool violates(Clause clause) const;
  std::string summary() const;
};

inline constexpr std::int64_t kDefaultHorizon = 10000;
// Parametric covariances are scanned only while C(x) stays above this value.
inline constexpr double kUnderflowFloor = 1e-250;

// Sufficient condition for (p, C) to define a binary process: C positive,
// non-increasing, C(x+1)/C(x) non-decreasing, C(1) < p(1-p) and
// C(2) > (p^2 + C(1))^2 / p - p^2. Ratios are compared with a 1e-12 slack,
// the two strict inequalities exactly. A rejecting table shortens the horizon,
// and so does a parametric covariance or geometric table tail falling below
// kUnderflowFloor.
ValidityReport check_assumption(const CovarianceFunction& cov, double p,
                                std::int64_t horizon = kDefaultHorizon);

struct AdmissibleRegion {
  Family family;
  double p;
  // Human readable bounds, one per constraint.
  std::vector<std::string> bounds;
  // True when membership is proven to imply check_assumption passes; the other
  // regions are only checked on random draws.
  bool sufficiency_verified = false;

  bool contains(const CovarianceFunction& cov) const;
};

// Closed-form parameter region per family. Tabulated has none and throws
// InvalidArgument.
AdmissibleRegion admissible_region(Family family, double p);

// Upper bound on c for the power family at (p, H).
double power_law_c_bound(double p, double hurst);

}  // namespace gbpf
