#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nlsinv/recovery.hpp"
#include "nlsinv/special_functions.hpp"
#include "nlsinv/quadrature.hpp"

using namespace nlsinv;
namespace {
constexpr double pi = std::numbers::pi;
const Nonlinearity cubic = power_law(1.0, 2.0);
const Nonlinearity quintic = power_law(1.0, 4.0);
const Nonlinearity mixture = polynomial_nl({{1.0, 2.0}, {0.5, 4.0}});

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

double table_rel_l2(const HTable& t, const Nonlinearity& truth, double k_lo, double k_hi) {
    double num = 0.0, den = 0.0;
    for (Eigen::Index j = 0; j < t.k_grid.size(); ++j) {
        const double k = t.k_grid[j];
        if (k < k_lo || k > k_hi) continue;
        const Complex ref = eval_H(truth, k);
        num += std::norm(t.values[j] - ref);
        den += std::norm(ref);
    }
    return std::sqrt(num / den);
}
}  // namespace

TEST_CASE("windowed deconvolution on exact cubic data") {
    MeasurementDataset ds = measurement_campaign_exact(cubic, linspace(-3.0, 1.0, 80));
    RecoveredH rh = deconvolve_windowed(ds, -1.0, 3.0);
    CHECK(table_rel_l2(rh.table, cubic, -1.0, 3.0) <= 1e-3);
    CHECK(rh.amplitude_disc == doctest::Approx(std::exp(0.5)));
    CHECK(rh.condition_number <= 1e12);
}

TEST_CASE("windowed deconvolution on the zero dataset") {
    MeasurementDataset ds = measurement_campaign_exact(zero_nl(), linspace(-3.0, 1.0, 40));
    RecoveredH rh = deconvolve_windowed(ds, -1.0, 2.0);
    for (Eigen::Index j = 0; j < rh.table.values.size(); ++j) {
        CHECK(std::abs(rh.table.values[j]) < 1e-12);
    }
}

TEST_CASE("windowed deconvolution on the exact mixture") {
    MeasurementDataset ds = measurement_campaign_exact(mixture, linspace(-3.0, 1.0, 80));
    RecoveredH rh = deconvolve_windowed(ds, -1.0, 3.0);
    CHECK(table_rel_l2(rh.table, mixture, -1.0, 3.0) <= 0.01);
}

TEST_CASE("windowed deconvolution input validation") {
    MeasurementDataset tiny = measurement_campaign_exact(cubic, linspace(-1.0, 0.0, 5));
    CHECK_THROWS_AS(deconvolve_windowed(tiny, -1.0, 2.0), std::invalid_argument);

    MeasurementDataset ds = measurement_campaign_exact(cubic, linspace(-3.0, 1.0, 30));
    CHECK_THROWS_AS(deconvolve_windowed(ds, 2.0, 2.0), std::invalid_argument);   // empty
    CHECK_THROWS_AS(deconvolve_windowed(ds, -5.0, 2.0), std::invalid_argument);  // beyond -max ell
}

TEST_CASE("shift covariance of the windowed deconvolution") {
    // Relabelling the data grid ell -> ell + c and shifting the window the
    // opposite way poses the identical convolution problem for
    // H~(k) = H(k + c); the recovered values must agree node for node.
    const double c = 0.8;
    MeasurementDataset base = measurement_campaign_exact(cubic, linspace(-3.0, 1.0, 70));
    MeasurementDataset relabeled = base;
    for (auto& m : relabeled.measurements) m.ell += c;

    RecoveredH rh0 = deconvolve_windowed(base, -0.5, 2.5);
    RecoveredH rh1 = deconvolve_windowed(relabeled, -0.5 - c, 2.5 - c);
    REQUIRE(rh0.table.k_grid.size() == rh1.table.k_grid.size());
    for (Eigen::Index j = 0; j < rh0.table.k_grid.size(); ++j) {
        CHECK(rh1.table.k_grid[j] == doctest::Approx(rh0.table.k_grid[j] - c));
        // H~(k - c) = H(k): values match up to the uniform reweighting the
        // solver applies internally.
        CHECK(std::abs(rh1.table.values[j] - rh0.table.values[j]) <=
              1e-6 * std::abs(rh0.table.values[j]) + 1e-12);
    }
    // Sanity against the truth; accuracy here depends on how the data
    // grid aligns with the window edge, so the bound is loose.
    CHECK(table_rel_l2(rh0.table, cubic, -0.5, 2.5) <= 0.02);
}

TEST_CASE("monotone regularization on exact data") {
    MeasurementDataset ds = measurement_campaign_exact(mixture, linspace(-3.0, 1.0, 60));
    double prev = -1.0;
    for (double reg : {1e-2, 1e-5, 1e-8, 1e-11}) {
        RecoveredH rh = deconvolve_windowed(ds, -1.0, 3.0, reg);
        if (prev >= 0.0) CHECK(rh.residual_norm <= prev + 1e-15);
        prev = rh.residual_norm;
    }
}

TEST_CASE("fourier deconvolution recovers a band-limited synthetic f exactly") {
    // Data built from harmonics of the sampled window: m(ell) =
    // e^{(7/4)ell} sum_q c_q e^{-i xi_q ell} W(7/4 - i xi_q).
    const int n = 96;
    const double l0 = -6.0, l1 = 6.0;
    const double dl = (l1 - l0) / (n - 1);
    const double period = n * dl;
    const double xi1 = 2.0 * pi / period * 3.0;  // third harmonic
    const double xi2 = 2.0 * pi / period * 7.0;
    const Complex c1{0.8, 0.0}, c2{0.0, 0.35};

    MeasurementDataset ds;
    ds.convention = "half";
    for (int i = 0; i < n; ++i) {
        const double ell = l0 + i * dl;
        Complex g = c1 * std::exp(Complex(0, -xi1 * ell)) * weight_laplace_W({1.75, -xi1}) +
                    c2 * std::exp(Complex(0, -xi2 * ell)) * weight_laplace_W({1.75, -xi2});
        Measurement m;
        m.ell = ell;
        m.sigma = 1.0;
        m.value = std::exp(1.75 * ell) * g;
        ds.measurements.push_back(m);
    }

    RecoveredH rh = deconvolve_fourier(ds, 10.0, 0.0);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < rh.table.k_grid.size(); ++j) {
        const double k = rh.table.k_grid[j];
        const Complex f_true = c1 * std::exp(Complex(0, xi1 * k)) +
                               c2 * std::exp(Complex(0, xi2 * k));
        const Complex f_got = rh.table.values[j] * std::exp(1.75 * k);
        worst = std::max(worst, std::abs(f_got - f_true));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("fourier deconvolution with the band removed returns zero") {
    MeasurementDataset ds = measurement_campaign_exact(cubic, linspace(-4.0, 2.0, 64));
    RecoveredH rh = deconvolve_fourier(ds, 0.0, 1e-10);
    for (Eigen::Index j = 0; j < rh.table.values.size(); ++j) {
        CHECK(std::abs(rh.table.values[j]) == 0.0);
    }
}

TEST_CASE("fourier deconvolution requires a uniform grid") {
    MeasurementDataset ds = measurement_campaign_exact(cubic, {-2.0, -1.0, -0.4, 0.0});
    CHECK_THROWS_AS(deconvolve_fourier(ds, 5.0, 1e-10), std::invalid_argument);
}

TEST_CASE("fourier and windowed methods agree on the mixture window") {
    // The division route needs the weighted data to decay inside the
    // sampled window, which raw nonlinearity data never does (it grows
    // like e^{((p+2)/2 - 7/4) ell} rightward). Both methods are exercised
    // on data generated from the mixture's H smoothly cut to a compact
    // window; on [-1, 3] the cut is inactive and the target equals the
    // true mixture H.
    auto chi = [](double k) {
        if (k <= -2.5 || k >= 5.0) return 0.0;
        if (k >= -2.0 && k <= 4.5) return 1.0;
        if (k < -2.0) return 0.5 * (1.0 + std::cos(pi * (-2.0 - k) / 0.5));
        return 0.5 * (1.0 + std::cos(pi * (k - 4.5) / 0.5));
    };
    auto h_cut = [&](double k) { return (chi(k) * eval_H(mixture, k)).real(); };

    // The division kernel itself decays only like e^{-ell/4} to the
    // right, so the window extends far enough for the truncated tail to
    // sit below the method's own tolerance (~10% here; the windowed
    // solver is the primary route and the stricter one).
    MeasurementDataset ds;
    const int n = 161;
    for (int i = 0; i < n; ++i) {
        const double ell = -6.0 + 20.0 * i / (n - 1);
        auto integrand = [&](double k) { return h_cut(k) * weight_w(k + ell); };
        Measurement m;
        m.ell = ell;
        m.sigma = 1.0;
        m.value = integrate_adaptive(integrand, -2.5, 5.0, 1e-12, 1e-11, 4000, 16).value;
        ds.measurements.push_back(m);
    }

    RecoveredH w = deconvolve_windowed(ds, -1.0, 3.0);
    RecoveredH f = deconvolve_fourier(ds, 8.0, 1e-12);
    CHECK(table_rel_l2(w.table, mixture, -1.0, 3.0) <= 0.05);
    CHECK(table_rel_l2(f.table, mixture, -1.0, 3.0) <= 0.10);

    // Method cross-validation: L2 gap within the larger method tolerance.
    double num = 0.0, den = 0.0;
    for (Eigen::Index j = 0; j < f.table.k_grid.size(); ++j) {
        const double k = f.table.k_grid[j];
        if (k < -1.0 || k > 3.0) continue;
        // windowed table is on midpoint nodes; interpolate linearly
        const auto& wg = w.table.k_grid;
        if (k < wg[0] || k > wg[wg.size() - 1]) continue;
        Eigen::Index lo = 0;
        while (lo + 2 < wg.size() && wg[lo + 1] <= k) ++lo;
        const double t = (k - wg[lo]) / (wg[lo + 1] - wg[lo]);
        const Complex wv = (1.0 - t) * w.table.values[lo] + t * w.table.values[lo + 1];
        num += std::norm(f.table.values[j] - wv);
        den += std::norm(wv);
    }
    CHECK(std::sqrt(num / den) <= 0.10);
}

TEST_CASE("polynomial fit on exact data") {
    MeasurementDataset cds = measurement_campaign_exact(cubic, linspace(-3.0, 1.0, 40));
    PolyFit fit = fit_polynomial(cds, {2.0});
    CHECK(std::abs(fit.coefficients[0] - Complex{1.0, 0.0}) <= 1e-10);
    CHECK(fit.basis_weights[0] == doctest::Approx(9.0 * pi / 16.0));

    MeasurementDataset mds = measurement_campaign_exact(mixture, linspace(-3.0, 1.0, 40));
    PolyFit mfit = fit_polynomial(mds, {2.0, 4.0});
    CHECK(std::abs(mfit.coefficients[0] - Complex{1.0, 0.0}) <= 1e-8);
    CHECK(std::abs(mfit.coefficients[1] - Complex{0.5, 0.0}) <= 1e-8);
    CHECK(mfit.condition_number < 1e6);
}

TEST_CASE("polynomial fit diagnostics") {
    MeasurementDataset ds = measurement_campaign_exact(cubic, linspace(-3.0, 1.0, 40));
    CHECK_THROWS_AS(fit_polynomial(ds, {}), std::invalid_argument);
    CHECK_THROWS_AS(fit_polynomial(ds, {2.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(fit_polynomial(ds, {1.5}), std::invalid_argument);

    // Near-collinear exponents are refused with both names in the message.
    bool threw = false;
    try {
        fit_polynomial(ds, {2.0, 2.0 + 1e-13});
    } catch (const std::runtime_error& e) {
        threw = true;
        CHECK(std::string(e.what()).find("near-collinear") != std::string::npos);
    }
    CHECK(threw);
}

TEST_CASE("positivity of the polynomial basis weights") {
    // W((r+2)/2) > 0 for real r >= 2.
    for (double r = 2.0; r <= 12.0; r += 0.5) {
        CHECK(weight_laplace_W({0.5 * (r + 2.0), 0.0}).real() > 0.0);
    }
}

TEST_CASE("exponent detection by matching pursuit") {
    MeasurementDataset cds = measurement_campaign_exact(cubic, linspace(-3.0, 1.0, 60));
    CHECK(detect_exponents(cds, {2.0, 3.0, 4.0, 5.0, 6.0}, 1e-4) ==
          std::vector<double>{2.0});

    MeasurementDataset zds = measurement_campaign_exact(zero_nl(), linspace(-3.0, 1.0, 60));
    CHECK(detect_exponents(zds, {2.0, 3.0, 4.0}, 1e-4).empty());

    MeasurementDataset mds = measurement_campaign_exact(mixture, linspace(-3.0, 1.0, 60));
    CHECK(detect_exponents(mds, {2.0, 3.0, 4.0, 5.0, 6.0}, 1e-5) ==
          std::vector<double>({2.0, 4.0}));
}

TEST_CASE("nonvanishing scans") {
    for (double p : {2.0, 3.0}) {
        const auto scan = check_nonvanishing(p, 50.0, 1001);
        CHECK(scan.min_modulus > 0.0);
    }
    CHECK_THROWS_AS(check_nonvanishing(1.0, 10.0), std::invalid_argument);

    // min modulus over [-X, X] decays like X^{-5/2}.
    std::vector<double> lx, ly;
    for (double X : {20.0, 40.0, 80.0}) {
        lx.push_back(std::log(X));
        ly.push_back(std::log(check_nonvanishing(2.0, X, 2001).min_modulus));
    }
    const double slope = (ly.back() - ly.front()) / (lx.back() - lx.front());
    CHECK(slope > -2.8);
    CHECK(slope < -2.2);
}

TEST_CASE("full recovery round trip on exact cubic measurements") {
    MeasurementDataset ds = measurement_campaign_exact(cubic, linspace(-3.0, 1.0, 80));
    RecoveredH rh = deconvolve_windowed(ds, -0.2, 3.2);
    Nonlinearity rec = recover_nonlinearity(rh);
    for (double lambda = 0.05; lambda <= 1.0; lambda += 0.05) {
        CHECK(std::abs(rec.h(lambda) - Complex{lambda, 0.0}) <= 0.01 * lambda);
    }
}

TEST_CASE("full recovery round trip on the saturating nonlinearity") {
    const Nonlinearity sat = saturating_nl();
    MeasurementDataset ds = measurement_campaign_exact(sat, linspace(-3.0, 1.5, 90));
    RecoveredH rh = deconvolve_windowed(ds, -0.5, 3.5);
    Nonlinearity rec = recover_nonlinearity(rh);
    for (double lambda = 0.05; lambda <= 1.2; lambda += 0.05) {
        const Complex truth = sat.h(lambda);
        CHECK(std::abs(rec.h(lambda) - truth) <= 0.02 * std::abs(truth));
    }
}

TEST_CASE("zero recovery stays zero") {
    MeasurementDataset ds = measurement_campaign_exact(zero_nl(), linspace(-3.0, 1.0, 40));
    RecoveredH rh = deconvolve_windowed(ds, -1.0, 2.0);
    Nonlinearity rec = recover_nonlinearity(rh);
    for (double lambda : {0.1, 0.5, 1.0}) CHECK(std::abs(rec.h(lambda)) < 1e-10);
}

TEST_CASE("injectivity witness: cubic and quintic datasets separate") {
    // Probes share the ell grid (hence equal L2 norms); the datasets must
    // differ by a positive sup-norm margin on [-3, 0].
    const auto ells = linspace(-3.0, 0.0, 31);
    MeasurementDataset dc = measurement_campaign_exact(cubic, ells);
    MeasurementDataset dq = measurement_campaign_exact(quintic, ells);
    double sup = 0.0;
    for (size_t i = 0; i < ells.size(); ++i) {
        sup = std::max(sup,
                       std::abs(dc.measurements[i].value - dq.measurements[i].value));
    }
    CHECK(sup > 1.0);  // analytically 3 pi / 4 at ell = 0
}
