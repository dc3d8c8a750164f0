#include "nlsinv/gaussian_oracle.hpp"

#include <numbers>
#include <stdexcept>

#include "nlsinv/quadrature.hpp"
#include "nlsinv/special_functions.hpp"

namespace nlsinv {

namespace {
constexpr double pi = std::numbers::pi;
}

Complex free_evolution(const GaussianDatum& d, double t, double r) {
    const double s = t / (d.sigma * d.sigma);
    const Complex denom(1.0, s);
    const double q = r / d.sigma;
    return d.amplitude / denom * std::exp(-q * q / (4.0 * denom));
}

double superlevel_measure(const GaussianDatum& d, double lambda, double tol) {
    if (!(lambda > 0.0)) throw std::invalid_argument("superlevel_measure: lambda must be > 0");
    const double A2 = d.amplitude * d.amplitude;
    if (lambda >= A2) return 0.0;
    // sigma = 1 case; general sigma scales the measure by sigma^4.
    const double t_max = std::sqrt(A2 / lambda - 1.0);
    auto integrand = [&](double t) {
        const double one_t2 = 1.0 + t * t;
        return 2.0 * one_t2 * std::log(A2 / (lambda * one_t2));
    };
    const double val =
        integrate_or_throw(integrand, 0.0, t_max, 0.0, tol, 4000, 8);
    const double s2 = d.sigma * d.sigma;
    return pi * val * s2 * s2;
}

Complex h_weight_convolution(const Nonlinearity& nl, double ell, double tol) {
    // Integrand H(k) w(k + ell) is supported on k > -ell. |H(k)| <= C' e^{-2k}
    // for k -> +infinity and w(k + ell) <= 7 e^{3(k+ell)/2}, so the tail
    // beyond K is below 14 C' e^{3 ell / 2} e^{-K/2}.
    double c_decay = 0.0;
    for (double k : {4.0, 6.0, 8.0, 12.0}) {
        c_decay = std::max(c_decay, std::abs(eval_H(nl, k)) * std::exp(2.0 * k));
    }
    if (c_decay == 0.0) return 0.0;  // zero nonlinearity

    auto integrand = [&](double k) { return eval_H(nl, k) * weight_w(k + ell); };
    const double lo = -ell;

    auto run = [&](double abs_target) {
        const double bound_scale = 140.0 * c_decay * std::exp(1.5 * ell);
        double K = 2.0 * std::log(bound_scale / std::max(abs_target, 1e-300));
        K = std::max(K, lo + 1.0);
        return integrate_adaptive(integrand, lo, K, abs_target, 0.0, 8000, 16);
    };

    auto first = run(std::max(tol, 1e-12));
    const double scale = std::max(std::abs(first.value), 1e-30);
    auto second = run(0.5 * tol * scale);
    if (!second.converged) {
        throw QuadratureError("h_weight_convolution: tolerance not reached (achieved " +
                                  std::to_string(second.error) + ")",
                              second.error);
    }
    return second.value;
}

Complex spacetime_G_exact(const Nonlinearity& nl, const GaussianDatum& d, TimeSide side,
                          double tol) {
    const double s2 = d.sigma * d.sigma;
    const Complex core = h_weight_convolution(nl, d.ell(), tol);
    const double factor = (side == TimeSide::full) ? 2.0 : 1.0;
    return factor * (4.0 * pi / 9.0) * s2 * s2 * core;
}

namespace {

// int_0^inf int_{R^2} G(|e^{it Delta}u_0|^2) dx dt over one time half-line
// (sign = +1 or -1), with t = sigma^2 tan(theta) compactifying the time
// axis and an adaptive radial integral at each node.
Complex spacetime_half_line(const Nonlinearity& nl, const GaussianDatum& d, int sign,
                            double theta_lo, double tol) {
    const double s2 = d.sigma * d.sigma;

    auto radial = [&](double t, double inner_tol) -> Complex {
        const double s = t / s2;
        const double spread = 1.0 + s * s;
        // Radius where the intensity falls to ~1e-22 of its peak;
        // G = O(lambda^2) makes the remainder negligible.
        const double r_max = d.sigma * std::sqrt(2.0 * spread * 22.0 * std::log(10.0));
        auto f = [&](double r) -> Complex {
            const double intensity = std::norm(free_evolution(d, t, r));
            return eval_G(nl, intensity) * r;
        };
        auto res = integrate_adaptive(f, 0.0, r_max, inner_tol, 1e-11, 2000, 8);
        return 2.0 * pi * res.value;
    };

    auto run = [&](double abs_target) {
        auto outer = [&](double theta) -> Complex {
            const double c = std::cos(theta);
            const double t = sign * s2 * std::tan(theta);
            // Inner absolute tolerance compensates the sec^2 jacobian.
            const double inner_tol = 1e-3 * abs_target * c * c / s2;
            return s2 / (c * c) * radial(t, inner_tol);
        };
        return integrate_adaptive(outer, theta_lo, 0.5 * pi, abs_target, 0.0, 2000, 8);
    };

    auto first = run(tol);
    const double scale = std::max(std::abs(first.value), 1e-30);
    auto second = run(0.5 * tol * scale);
    if (!second.converged) {
        throw QuadratureError("spacetime_G_direct: tolerance not reached (achieved " +
                                  std::to_string(second.error) + ")",
                              second.error);
    }
    return second.value;
}

}  // namespace

Complex spacetime_G_direct(const Nonlinearity& nl, const GaussianDatum& d, TimeSide side,
                           double tol) {
    Complex v = spacetime_half_line(nl, d, +1, 0.0, tol);
    if (side == TimeSide::full) v += spacetime_half_line(nl, d, -1, 0.0, tol);
    return v;
}

Complex spacetime_G_direct_tail(const Nonlinearity& nl, const GaussianDatum& d,
                                double t_start, TimeSide side, double tol) {
    const double s2 = d.sigma * d.sigma;
    const double theta_lo = std::atan(t_start / s2);
    Complex v = spacetime_half_line(nl, d, +1, theta_lo, tol);
    if (side == TimeSide::full) v += spacetime_half_line(nl, d, -1, theta_lo, tol);
    return v;
}

double probe_hs_norm(const GaussianDatum& d, double s) {
    const double c = std::sqrt(std::pow(2.0, 1.0 - s) * pi *
                               std::exp(std::lgamma(s + 1.0)));
    return c * d.amplitude * std::pow(d.sigma, 1.0 - s);
}

}  // namespace nlsinv
