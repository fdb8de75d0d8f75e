#pragma once

#include <complex>
#include <functional>

namespace gbpf::detail {

using ComplexFn = std::function<std::complex<double>(double)>;

// Adaptive Gauss-Kronrod on a finite range, cut into panels no wider than
// pi / |theta| so oscillating integrands stay resolved. Throws QuadratureError
// when the error estimate stays above 1e-8 relative to the L1 norm.
std::complex<double> integrate_complex(const ComplexFn& f, double a, double b, double theta = 0.0);

double integrate_real(const std::function<double(double)>& f, double a, double b);

}  // namespace gbpf::detail
