#pragma once

#include <cmath>
#include <complex>
#include <queue>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace nlsinv {

struct QuadratureError : std::runtime_error {
    double achieved;
    QuadratureError(const std::string& what, double achieved_)
        : std::runtime_error(what), achieved(achieved_) {}
};

namespace detail {

// Gauss 7 / Kronrod 15 abscissae and weights on [-1, 1].
// Column layout follows the usual embedded-rule tables: abscissa,
// Gauss weight (zero on Kronrod-only nodes), Kronrod weight.
inline constexpr double gk15[8][3] = {
    {0.000000000000000000e+00, 4.179591836734693878e-01, 2.094821410847278280e-01},
    {4.058451513773971669e-01, 3.818300505051189449e-01, 1.903505780647854099e-01},
    {7.415311855993944399e-01, 2.797053914892766679e-01, 1.406532597155259187e-01},
    {9.491079123427585245e-01, 1.294849661688696933e-01, 6.309209262997855329e-02},
    {2.077849550078984676e-01, 0.0,                      2.044329400752988924e-01},
    {5.860872354676911303e-01, 0.0,                      1.690047266392679028e-01},
    {8.648644233597690728e-01, 0.0,                      1.047900103222501838e-01},
    {9.914553711208126392e-01, 0.0,                      2.293532201052922496e-02},
};

template <typename V>
double vabs(const V& v) {
    if constexpr (std::is_floating_point_v<V>) {
        return std::fabs(v);
    } else {
        return std::abs(v);
    }
}

}  // namespace detail

template <typename F>
using quad_value_t = std::invoke_result_t<F, double>;

/// One G7/K15 panel on [a, b]. Returns the K15 value; err receives
/// the magnitude of the Gauss/Kronrod difference.
template <typename F, typename V = quad_value_t<F>>
V gauss_kronrod_panel(F&& f, double a, double b, double& err) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    const V f0 = f(mid);
    V g7 = detail::gk15[0][1] * f0;
    V k15 = detail::gk15[0][2] * f0;
    for (int i = 1; i < 8; ++i) {
        const double dx = half * detail::gk15[i][0];
        const V fi = f(mid + dx) + f(mid - dx);
        g7 += detail::gk15[i][1] * fi;
        k15 += detail::gk15[i][2] * fi;
    }
    g7 *= half;
    k15 *= half;
    err = detail::vabs<V>(k15 - g7);
    return k15;
}

template <typename V>
struct QuadratureResult {
    V value{};
    double error = 0.0;      // accumulated panel error estimate
    int panels = 0;
    bool converged = false;
};

/// Globally adaptive Gauss-Kronrod integration over [a, b].
/// Splits the worst panel until the total error estimate drops below
/// max(abs_tol, rel_tol * |integral|).
template <typename F, typename V = quad_value_t<F>>
QuadratureResult<V> integrate_adaptive(F&& f, double a, double b, double abs_tol,
                                       double rel_tol = 0.0, int max_panels = 4000,
                                       int initial_panels = 1) {
    struct Panel {
        double a, b, err;
        V val;
        bool operator<(const Panel& o) const { return err < o.err; }
    };

    std::priority_queue<Panel> heap;
    V total{};
    double total_err = 0.0;

    initial_panels = std::max(1, initial_panels);
    for (int i = 0; i < initial_panels; ++i) {
        const double pa = a + (b - a) * i / initial_panels;
        const double pb = a + (b - a) * (i + 1) / initial_panels;
        double e;
        const V v = gauss_kronrod_panel(f, pa, pb, e);
        heap.push({pa, pb, e, v});
        total += v;
        total_err += e;
    }

    int used = initial_panels;
    auto tolerance = [&] { return std::max(abs_tol, rel_tol * detail::vabs<V>(total)); };

    while (total_err > tolerance() && used < max_panels) {
        const Panel worst = heap.top();
        heap.pop();
        total -= worst.val;
        total_err -= worst.err;

        const double mid = 0.5 * (worst.a + worst.b);
        double e1, e2;
        const V v1 = gauss_kronrod_panel(f, worst.a, mid, e1);
        const V v2 = gauss_kronrod_panel(f, mid, worst.b, e2);
        heap.push({worst.a, mid, e1, v1});
        heap.push({mid, worst.b, e2, v2});
        total += v1 + v2;
        total_err += e1 + e2;
        ++used;
    }

    QuadratureResult<V> res;
    res.value = total;
    res.error = total_err;
    res.panels = used;
    res.converged = total_err <= tolerance();
    return res;
}

/// As integrate_adaptive, but throws QuadratureError on non-convergence.
template <typename F, typename V = quad_value_t<F>>
V integrate_or_throw(F&& f, double a, double b, double abs_tol, double rel_tol = 0.0,
                     int max_panels = 4000, int initial_panels = 1) {
    auto res = integrate_adaptive(std::forward<F>(f), a, b, abs_tol, rel_tol, max_panels,
                                  initial_panels);
    if (!res.converged) {
        throw QuadratureError("adaptive quadrature did not reach the requested tolerance "
                              "(achieved " + std::to_string(res.error) + ")",
                              res.error);
    }
    return res.value;
}

/// Trapezoid weights for n uniformly spaced samples with spacing dt.
inline std::vector<double> trapezoid_weights(int n, double dt) {
    std::vector<double> w(static_cast<size_t>(n), dt);
    if (n >= 2) {
        w.front() = 0.5 * dt;
        w.back() = 0.5 * dt;
    } else if (n == 1) {
        w.front() = 0.0;
    }
    return w;
}

}  // namespace nlsinv
