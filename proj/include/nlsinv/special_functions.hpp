#pragma once

#include <complex>

namespace nlsinv {

using Complex = std::complex<double>;

/// Log of the Gamma function on the complex plane (Lanczos series,
/// reflection for Re z < 1/2). Throws std::domain_error at the poles
/// z = 0, -1, -2, ...
Complex log_gamma(Complex z);

/// Gamma itself; accurate to ~1e-13 relative wherever it does not
/// over/underflow.
Complex gamma_fn(Complex z);

/// Superlevel-set weight
///   w(k) = [(e^k-1)^{3/2} + 6 (e^k-1)^{1/2} - 6 atan((e^k-1)^{1/2})]
/// for k > 0 and 0 for k <= 0. A power series in s = (e^k-1)^{1/2} is
/// used below k = 1e-3 where the closed form cancels catastrophically.
double weight_w(double k);

/// Crossover point between the series and the closed form of weight_w.
inline constexpr double weight_w_series_crossover = 1e-3;

/// Series branch of weight_w, exposed for seam validation.
double weight_w_series(double k);

/// Laplace transform of w, meromorphic continuation
///   W(z) = 9 sqrt(pi) Gamma(z+1/2)/Gamma(z+1) * (z-1)/(z(2z-1)(2z-3)).
/// Throws std::domain_error at the poles z in {0, 1/2, 3/2} and where
/// Gamma(z+1/2) or Gamma(z+1) has a pole.
Complex weight_laplace_W(Complex z);

/// Independent oracle: adaptive quadrature of the defining integral
/// int_0^inf e^{-kz} w(k) dk, valid for Re z >= 3/2 + 0.1. `tol` is a
/// relative tolerance. Throws std::domain_error when Re z is too small
/// and QuadratureError when the tolerance is not met.
Complex weight_laplace_quadrature(Complex z, double tol = 1e-10);

/// Rademacher two-sided bound used for |W(z)| ~ |z|^{-5/2}:
///   |z+1/2|^{-1/2} <= |Gamma(z+1/2)/Gamma(z+1)| <= |z+1|^{1/2} / |z+1/2|
/// on Re z > -1/4.
bool gamma_ratio_bound_check(Complex z);

}  // namespace nlsinv
