#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nlsinv/pairing.hpp"

using namespace nlsinv;
namespace {
constexpr double pi = std::numbers::pi;
const Nonlinearity cubic = power_law(1.0, 2.0);
const Nonlinearity quintic = power_law(1.0, 4.0);
}

TEST_CASE("exact m closed forms") {
    // cubic: m(ell) = (9 pi / 8) e^{2 ell}; quintic: (3 pi / 8) e^{3 ell}.
    for (double ell : {-1.0, 0.0, 1.0}) {
        const Complex mc = exact_m(cubic, ell, 1e-10);
        const double cexp = 9.0 * pi / 8.0 * std::exp(2.0 * ell);
        CHECK(std::abs(mc - Complex{cexp, 0.0}) <= 1e-8 * cexp);

        const Complex mq = exact_m(quintic, ell, 1e-10);
        const double qexp = 3.0 * pi / 8.0 * std::exp(3.0 * ell);
        CHECK(std::abs(mq - Complex{qexp, 0.0}) <= 1e-8 * qexp);
    }
    CHECK(std::abs(exact_m(zero_nl(), 0.3)) == 0.0);
}

TEST_CASE("exact m is linear in the nonlinearity coefficients") {
    const double a = 0.7, b = 1.9;
    const Nonlinearity mix = polynomial_nl({{a, 2.0}, {b, 4.0}});
    for (double ell : {-2.0, 0.4}) {
        const Complex whole = exact_m(mix, ell, 1e-11);
        const Complex parts = a * exact_m(cubic, ell, 1e-11) + b * exact_m(quintic, ell, 1e-11);
        CHECK(std::abs(whole - parts) <= 1e-9 * std::abs(whole));
    }
}

TEST_CASE("extraction algebra and conventions") {
    CHECK(extract_m(Complex{0.0, 0.0}, 0.5, Convention::half) == Complex{0.0, 0.0});

    // Synthetic born = -i (4 pi / 9) sigma^4 m reproduces m exactly.
    const Complex m_true{3.2, -0.4};
    for (double sigma : {0.3, 1.0}) {
        const double s4 = std::pow(sigma, 4);
        const Complex born = Complex(0, -1) * (4.0 * pi / 9.0) * s4 * m_true;
        CHECK(std::abs(extract_m(born, sigma, Convention::half) - m_true) < 1e-13);
        CHECK(std::abs(extract_m(2.0 * born, sigma, Convention::full) - m_true) < 1e-13);
    }
    CHECK_THROWS_AS(extract_m({1.0, 0.0}, 0.0, Convention::half), std::invalid_argument);
}

TEST_CASE("born functional basics") {
    Grid2D g{8.0, 64};
    Field u0 = gaussian_field(g, {0.5, 1.0});
    CHECK(born_functional(u0, u0) == Complex{0.0, 0.0});

    Grid2D g2{8.0, 128};
    Field other = gaussian_field(g2, {0.5, 1.0});
    CHECK_THROWS_AS(born_functional(other, u0), std::invalid_argument);

    // The paired functional against the probe carries the dx^2 measure.
    Field shifted = u0;
    shifted.samples += Complex{0.1, 0.0};
    const Complex got = born_functional(shifted, u0);
    const Complex expect = Complex{0.1, 0.0} * u0.samples.sum() * g.spacing() * g.spacing();
    CHECK(std::abs(got - expect) < 1e-12 * std::abs(expect));
}

TEST_CASE("exact campaign over a small grid") {
    MeasurementDataset ds =
        measurement_campaign_exact(cubic, {-1.0, 0.0, 1.0}, 1.0, Convention::half, 1e-10);
    REQUIRE(ds.measurements.size() == 3);
    for (const auto& m : ds.measurements) {
        const double expect = 9.0 * pi / 8.0 * std::exp(2.0 * m.ell);
        CHECK(std::abs(m.value - Complex{expect, 0.0}) <= 1e-8 * expect);
        CHECK(m.source == "exact");
        CHECK(m.valid);
    }
    ds.validate();

    CHECK(measurement_campaign_exact(cubic, {}).measurements.empty());
    CHECK_THROWS_AS(measurement_campaign_exact(cubic, {1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("dataset validation") {
    MeasurementDataset ds;
    ds.measurements.push_back({0.0, 1.0, {1.0, 0.0}, "exact", 0.0, true});
    ds.measurements.push_back({-1.0, 1.0, {1.0, 0.0}, "exact", 0.0, true});
    CHECK_THROWS_AS(ds.validate(), std::invalid_argument);
}
