#include "nlsinv/special_functions.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nlsinv/quadrature.hpp"

namespace nlsinv {

namespace {

constexpr double pi = std::numbers::pi;

// Lanczos coefficients, g = 7, n = 9. Good for ~14 significant digits
// on Re z >= 1/2.
constexpr double lanczos_g = 7.0;
constexpr double lanczos_c[9] = {
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
};

bool is_nonpositive_integer(Complex z) {
    if (z.imag() != 0.0) return false;
    const double r = z.real();
    return r <= 0.0 && r == std::floor(r);
}

Complex log_gamma_lanczos(Complex z) {
    // Requires Re z >= 1/2.
    Complex acc = lanczos_c[0];
    for (int i = 1; i < 9; ++i) {
        acc += lanczos_c[i] / (z - 1.0 + static_cast<double>(i));
    }
    const Complex t = z + (lanczos_g - 0.5);
    return 0.5 * std::log(2.0 * pi) + (z - 0.5) * std::log(t) - t + std::log(acc);
}

}  // namespace

Complex log_gamma(Complex z) {
    if (is_nonpositive_integer(z)) {
        throw std::domain_error("log_gamma: pole at z = " + std::to_string(z.real()));
    }
    if (z.real() >= 0.5) {
        return log_gamma_lanczos(z);
    }
    // Reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z).
    return std::log(pi) - std::log(std::sin(pi * z)) - log_gamma_lanczos(1.0 - z);
}

Complex gamma_fn(Complex z) { return std::exp(log_gamma(z)); }

double weight_w_series(double k) {
    // w = 3 s^3 - (6/5) s^5 + (6/7) s^7 - ...   with s = sqrt(e^k - 1);
    // the alternating part is 6 * sum_{m>=2} (-1)^m s^{2m+1}/(2m+1).
    const double s2 = std::expm1(k);
    const double s = std::sqrt(s2);
    const double s3 = s * s2;
    double term = s3 * s2;  // s^5
    double sum = 3.0 * s3;
    double sign = -1.0;
    for (int m = 2; m < 60; ++m) {
        const double inc = sign * 6.0 * term / (2 * m + 1);
        sum += inc;
        if (std::fabs(inc) < 1e-18 * std::fabs(sum)) break;
        term *= s2;
        sign = -sign;
    }
    return sum;
}

double weight_w(double k) {
    if (!(k > 0.0)) return 0.0;
    if (k < weight_w_series_crossover) return weight_w_series(k);
    const double s2 = std::expm1(k);
    const double s = std::sqrt(s2);
    return s * s2 + 6.0 * s - 6.0 * std::atan(s);
}

Complex weight_laplace_W(Complex z) {
    const double eps = 1e-13;
    if (std::abs(z) < eps) throw std::domain_error("weight_laplace_W: pole at z = 0");
    if (std::abs(z - 0.5) < eps) throw std::domain_error("weight_laplace_W: pole at z = 1/2");
    if (std::abs(z - 1.5) < eps) throw std::domain_error("weight_laplace_W: pole at z = 3/2");
    if (is_nonpositive_integer(z + 0.5)) {
        throw std::domain_error("weight_laplace_W: Gamma(z+1/2) pole");
    }
    if (is_nonpositive_integer(z + 1.0)) {
        throw std::domain_error("weight_laplace_W: Gamma(z+1) pole");
    }
    const Complex ratio = std::exp(log_gamma(z + 0.5) - log_gamma(z + 1.0));
    return 9.0 * std::sqrt(pi) * ratio * (z - 1.0) /
           (z * (2.0 * z - 1.0) * (2.0 * z - 3.0));
}

Complex weight_laplace_quadrature(Complex z, double tol) {
    const double a = z.real();
    if (a < 1.5 + 0.1) {
        throw std::domain_error(
            "weight_laplace_quadrature: integral diverges (needs Re z >= 1.6)");
    }
    // w(k) <= e^{3k/2} + 6 e^{k/2} <= 7 e^{3k/2} on k > 0, so the tail
    // beyond K is below 7 e^{-(a-3/2)K} / (a - 3/2).
    const double decay = a - 1.5;
    auto cutoff_for = [&](double abs_target) {
        return std::log(7.0 / (decay * std::max(abs_target, 1e-300))) / decay;
    };
    auto integrand = [&](double k) { return std::exp(-k * z) * weight_w(k); };

    auto run = [&](double abs_target) {
        const double K = std::max(1.0, cutoff_for(abs_target));
        // Pre-split so each panel sees at most ~one oscillation of e^{-i Im z k}.
        const double osc = std::abs(z.imag());
        int panels = 1 + static_cast<int>(std::min(2000.0, K * osc / pi));
        return integrate_adaptive(integrand, 0.0, K, abs_target, 0.0, 8000, panels);
    };

    // First pass fixes the scale; second pass meets the relative tolerance.
    auto first = run(tol);
    const double scale = std::max(std::abs(first.value), 1e-30);
    auto second = run(0.5 * tol * scale);
    if (!second.converged) {
        throw QuadratureError("weight_laplace_quadrature: tolerance not reached (achieved " +
                                  std::to_string(second.error) + ")",
                              second.error);
    }
    return second.value;
}

bool gamma_ratio_bound_check(Complex z) {
    if (z.real() <= -0.25) {
        throw std::domain_error("gamma_ratio_bound_check: requires Re z > -1/4");
    }
    const double ratio = std::abs(std::exp(log_gamma(z + 0.5) - log_gamma(z + 1.0)));
    const double lower = 1.0 / std::sqrt(std::abs(z + 0.5));
    const double upper = std::sqrt(std::abs(z + 1.0)) / std::abs(z + 0.5);
    return lower <= ratio && ratio <= upper;
}

}  // namespace nlsinv
