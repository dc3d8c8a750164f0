#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nlsinv/special_functions.hpp"

using namespace nlsinv;
namespace {
constexpr double pi = std::numbers::pi;

double rel_gap(Complex a, Complex b) { return std::abs(a - b) / std::abs(b); }
}

TEST_CASE("gamma at exact points") {
    CHECK(rel_gap(gamma_fn({1.0, 0.0}), {1.0, 0.0}) < 1e-14);
    CHECK(rel_gap(gamma_fn({0.5, 0.0}), {std::sqrt(pi), 0.0}) < 1e-14);
    CHECK(rel_gap(gamma_fn({5.0, 0.0}), {24.0, 0.0}) < 1e-13);
    CHECK(rel_gap(gamma_fn({3.5, 0.0}), {15.0 * std::sqrt(pi) / 8.0, 0.0}) < 1e-13);
}

TEST_CASE("gamma poles raise domain errors") {
    CHECK_THROWS_AS(log_gamma({0.0, 0.0}), std::domain_error);
    CHECK_THROWS_AS(log_gamma({-3.0, 0.0}), std::domain_error);
}

TEST_CASE("functional equation on the spec rectangle") {
    // 100 random z with Re z in [1/4, 10], |Im z| <= 50:
    // |Gamma(z+1) - z Gamma(z)| / |Gamma(z+1)| <= 1e-12.
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> re(0.25, 10.0), im(-50.0, 50.0);
    for (int i = 0; i < 100; ++i) {
        const Complex z(re(rng), im(rng));
        const Complex lhs = std::exp(log_gamma(z + 1.0));
        const Complex rhs = z * std::exp(log_gamma(z));
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(lhs));
    }
}

TEST_CASE("duplication formula cross-check") {
    // Gamma(2z) = 2^{2z-1}/sqrt(pi) Gamma(z) Gamma(z+1/2)
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> re(0.3, 8.0), im(-20.0, 20.0);
    for (int i = 0; i < 50; ++i) {
        const Complex z(re(rng), im(rng));
        const Complex lhs = log_gamma(2.0 * z);
        const Complex rhs = (2.0 * z - 1.0) * std::log(2.0) - 0.5 * std::log(pi) +
                            log_gamma(z) + log_gamma(z + 0.5);
        CHECK(std::abs(std::exp(lhs - rhs) - 1.0) < 1e-12);
    }
}

TEST_CASE("reflection region") {
    // Re z < 1/2 goes through the reflection branch.
    CHECK(rel_gap(gamma_fn({0.25, 0.0}), {3.6256099082219083119, 0.0}) < 1e-13);
    const Complex z(-0.5, 0.0);  // Gamma(-1/2) = -2 sqrt(pi)
    CHECK(rel_gap(gamma_fn(z), {-2.0 * std::sqrt(pi), 0.0}) < 1e-13);
}

TEST_CASE("weight w basic values") {
    CHECK(weight_w(-1.0) == 0.0);
    CHECK(weight_w(0.0) == 0.0);
    // e^k - 1 = 1 at k = ln 2: w = 1 + 6 - 6 atan(1) = 7 - 3 pi / 2
    CHECK(std::fabs(weight_w(std::log(2.0)) - (7.0 - 1.5 * pi)) < 1e-14);
}

TEST_CASE("weight w small-k series and seam") {
    // Leading behavior 3 k^{3/2} (1 + O(k)).
    const double k = 1e-4;
    const double lead = 3.0 * std::pow(k, 1.5);
    CHECK(std::fabs(weight_w(k) / lead - 1.0) < 5e-4);

    // Longhand series evaluation as an independent oracle at k = 1e-4.
    const double s2 = std::expm1(k);
    const double s = std::sqrt(s2);
    const double oracle = 3.0 * std::pow(s, 3.0) - 1.2 * std::pow(s, 5.0) +
                          (6.0 / 7.0) * std::pow(s, 7.0) - (6.0 / 9.0) * std::pow(s, 9.0);
    CHECK(std::fabs(weight_w(k) - oracle) < 1e-13 * oracle);

    // Seam: series vs closed form agree at the crossover to 1e-10 relative.
    const double k0 = weight_w_series_crossover;
    const double s0 = std::sqrt(std::expm1(k0));
    const double direct = s0 * s0 * s0 + 6.0 * s0 - 6.0 * std::atan(s0);
    CHECK(std::fabs(weight_w_series(k0) - direct) < 1e-10 * direct);
}

TEST_CASE("weight w is nonnegative and strictly increasing") {
    double prev = 0.0;
    for (int i = 0; i <= 4000; ++i) {
        const double k = 1e-6 * std::pow(2e7, i / 4000.0);  // 1e-6 .. 20
        const double v = weight_w(k);
        CHECK(v >= 0.0);
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("closed-form W at rational points") {
    CHECK(std::abs(weight_laplace_W({1.0, 0.0})) < 1e-14);
    CHECK(rel_gap(weight_laplace_W({2.0, 0.0}), {9.0 * pi / 16.0, 0.0}) < 1e-10);
    CHECK(rel_gap(weight_laplace_W({2.5, 0.0}), {18.0 / 25.0, 0.0}) < 1e-10);
    CHECK(rel_gap(weight_laplace_W({3.0, 0.0}), {pi / 8.0, 0.0}) < 1e-10);
}

TEST_CASE("W pole diagnostics") {
    CHECK_THROWS_WITH_AS(weight_laplace_W({0.0, 0.0}), "weight_laplace_W: pole at z = 0",
                         std::domain_error);
    CHECK_THROWS_WITH_AS(weight_laplace_W({0.5, 0.0}), "weight_laplace_W: pole at z = 1/2",
                         std::domain_error);
    CHECK_THROWS_WITH_AS(weight_laplace_W({1.5, 0.0}), "weight_laplace_W: pole at z = 3/2",
                         std::domain_error);
    CHECK_THROWS_AS(weight_laplace_W({-2.5, 0.0}), std::domain_error);  // Gamma(z+1/2) pole
}

TEST_CASE("quadrature oracle vs closed form") {
    // z = 2: the defining integral reproduces 9 pi / 16.
    const Complex q2 = weight_laplace_quadrature({2.0, 0.0}, 1e-10);
    CHECK(rel_gap(q2, {9.0 * pi / 16.0, 0.0}) < 1e-9);

    // z = 7/4: integrand is positive, so the value must be real positive.
    const Complex q74 = weight_laplace_quadrature({1.75, 0.0}, 1e-9);
    CHECK(q74.real() > 0.0);
    CHECK(std::fabs(q74.imag()) < 1e-9 * q74.real());

    // Oscillatory cross-validation pair.
    const Complex z(2.0, 10.0);
    CHECK(rel_gap(weight_laplace_quadrature(z, 1e-10), weight_laplace_W(z)) < 1e-8);

    CHECK_THROWS_AS(weight_laplace_quadrature({1.55, 0.0}), std::domain_error);
}

TEST_CASE("closed form vs quadrature on 100 random points") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> re(1.85, 10.0), im(-10.0, 10.0);
    for (int i = 0; i < 100; ++i) {
        const Complex z(re(rng), im(rng));
        const Complex wq = weight_laplace_quadrature(z, 1e-10);
        const Complex wc = weight_laplace_W(z);
        CHECK(std::abs(wc - wq) <= 1e-8 * std::abs(wc));
    }
}

TEST_CASE("gamma ratio bounds") {
    CHECK(gamma_ratio_bound_check({2.0, 0.0}));
    CHECK(gamma_ratio_bound_check({0.25, 5.0}));
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> re(-0.2499, 20.0), im(-30.0, 30.0);
    for (int i = 0; i < 1000; ++i) {
        CHECK(gamma_ratio_bound_check({re(rng), im(rng)}));
    }
}

TEST_CASE("two-sided |W| bound on the 7/4 line") {
    // |W(z)| ~ |z|^{-5/2}: fitted constants on Re z = 7/4, |Im z| <= 100,
    // with ratio c2/c1 <= 20.
    double c1 = 1e300, c2 = 0.0;
    for (int i = 0; i <= 2000; ++i) {
        const double xi = -100.0 + 0.1 * i;
        const Complex z(1.75, xi);
        const double r = std::abs(weight_laplace_W(z)) * std::pow(std::abs(z), 2.5);
        c1 = std::min(c1, r);
        c2 = std::max(c2, r);
    }
    CHECK(c1 > 0.0);
    CHECK(c2 / c1 <= 20.0);
}

TEST_CASE("nonvanishing on vertical lines") {
    // min |W(7/4 + i xi)| > 0 on |xi| <= 100 and on the (p+2)/2 lines.
    for (double line : {1.75, 2.0, 2.5, 3.0, 4.0}) {
        double lo = 1e300;
        for (int i = 0; i <= 2000; ++i) {
            const double xi = -100.0 + 0.1 * i;
            lo = std::min(lo, std::abs(weight_laplace_W({line, xi})));
        }
        CHECK(lo > 0.0);
    }
}
