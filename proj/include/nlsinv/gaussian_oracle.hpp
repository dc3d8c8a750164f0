#pragma once

#include <cmath>

#include "nlsinv/nonlinearity.hpp"

namespace nlsinv {

/// Gaussian probe u_0(x) = A exp(-|x|^2 / 4 sigma^2).
struct GaussianDatum {
    double amplitude = 1.0;  // A > 0
    double sigma = 1.0;      // width > 0

    double ell() const { return 2.0 * std::log(amplitude); }
};

enum class TimeSide { half, full };

/// e^{it Delta} u_0 at radius r (closed form):
///   A/(1+is) exp(-(r/sigma)^2 / (4 (1+is))),  s = t / sigma^2.
Complex free_evolution(const GaussianDatum& d, double t, double r);

/// Space-time measure of {(t, x) : t > 0, |e^{it Delta} u_0|^2 > lambda}.
/// Zero for lambda >= A^2; scales as sigma^4.
double superlevel_measure(const GaussianDatum& d, double lambda, double tol = 1e-12);

/// Convolution functional m(ell) = int_R H(k) w(k + ell) dk by adaptive
/// quadrature with an analytically bounded tail cutoff.
Complex h_weight_convolution(const Nonlinearity& nl, double ell, double tol = 1e-10);

/// (4 pi / 9) sigma^4 int H(k) w(k + 2 log A) dk; doubled on TimeSide::full.
Complex spacetime_G_exact(const Nonlinearity& nl, const GaussianDatum& d,
                          TimeSide side = TimeSide::half, double tol = 1e-10);

/// Independent route: direct quadrature of
///   int_0^inf int_{R^2} G(|e^{it Delta} u_0|^2) dx dt
/// (radial in x, compactified adaptive in t), evaluating the field via
/// free_evolution. TimeSide::full integrates both time half-lines.
Complex spacetime_G_direct(const Nonlinearity& nl, const GaussianDatum& d,
                           TimeSide side = TimeSide::half, double tol = 1e-8);

/// Same integral restricted to |t| > t_start on the chosen side(s);
/// used as the free-flight tail of a finite-horizon measurement.
Complex spacetime_G_direct_tail(const Nonlinearity& nl, const GaussianDatum& d,
                                double t_start, TimeSide side = TimeSide::half,
                                double tol = 1e-8);

/// Closed-form homogeneous Sobolev norm of the probe:
///   ||u_0||_{H^s-dot} = sqrt(2^{1-s} pi Gamma(s+1)) * A sigma^{1-s}.
double probe_hs_norm(const GaussianDatum& d, double s);

}  // namespace nlsinv
