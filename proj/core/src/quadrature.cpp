#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gbpf/errors.hpp"

namespace gbpf::detail {

namespace {

constexpr unsigned kMaxDepth = 15;
constexpr double kTolerance = 1e-12;
constexpr std::size_t kMaxPanels = 4096;

template <class F>
auto panelled(const F& f, double a, double b, double theta) {
  using Result = decltype(f(a));
  if (!(a < b)) return Result{};
  if (!std::isfinite(a) || !std::isfinite(b)) throw InvalidArgument("quadrature range must be finite");
  const double periods = (b - a) * std::abs(theta) / std::numbers::pi;
  const auto panels = static_cast<std::size_t>(std::clamp(std::ceil(periods), 1.0, static_cast<double>(kMaxPanels)));
  const double width = (b - a) / static_cast<double>(panels);
  Result total{};
  double error_total = 0.0;
  double l1_total = 0.0;
  for (std::size_t i = 0; i < panels; ++i) {
    const double lo = a + width * static_cast<double>(i);
    const double hi = (i + 1 == panels) ? b : lo + width;
    double error = 0.0;
    double l1 = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, kMaxDepth, kTolerance, &error,
                                                                           &l1);
    error_total += error;
    l1_total += l1;
  }
  if (!(error_total <= 1e-8 * std::max(1.0, l1_total))) {
    throw QuadratureError("quadrature did not converge (error estimate " + std::to_string(error_total) + ")");
  }
  return total;
}

}  // namespace

std::complex<double> integrate_complex(const ComplexFn& f, double a, double b, double theta) {
  return panelled(f, a, b, theta);
}

double integrate_real(const std::function<double(double)>& f, double a, double b) { return panelled(f, a, b, 0.0); }

}  // namespace gbpf::detail
