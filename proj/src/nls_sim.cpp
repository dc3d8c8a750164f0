#include "nlsinv/nls_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>

#include <nlohmann/json_fwd.hpp>

#include "nlsinv/fft.hpp"
#include "nlsinv/quadrature.hpp"

#include <nlohmann/json.hpp>

namespace nlsinv {

namespace {
constexpr double pi = std::numbers::pi;

int next_pow2(int v) {
    int n = 1;
    while (n < v) n <<= 1;
    return n;
}
}  // namespace

double Grid2D::nyquist() const { return pi * n / (2.0 * half_length); }

Eigen::VectorXd Grid2D::coords() const {
    Eigen::VectorXd x(n);
    const double dx = spacing();
    for (int i = 0; i < n; ++i) x[i] = -half_length + i * dx;
    return x;
}

Eigen::VectorXd Grid2D::freqs() const {
    Eigen::VectorXd k(n);
    const double dk = pi / half_length;
    for (int i = 0; i < n; ++i) {
        const int j = (i <= n / 2 - 1) ? i : i - n;
        k[i] = dk * j;
    }
    return k;
}

void Grid2D::validate() const {
    if (half_length <= 0.0) throw std::invalid_argument("Grid2D: L must be positive");
    if (n < 2 || (n & (n - 1)) != 0) {
        throw std::invalid_argument("Grid2D: N must be a power of two");
    }
}

Grid2D Grid2D::for_probe(double sigma, double horizon, double leak_tol, int n_min,
                         int n_max) {
    const double s = horizon / (sigma * sigma);
    const double sigma_eff = sigma * std::sqrt(1.0 + s * s);
    // Mass outside radius R is exp(-R^2 / 2 sigma_eff^2); target an eighth
    // of leak_tol at R = L/2 so the run stays under the gate with margin.
    // Spectral mass outside xi is exp(-2 sigma^2 xi^2).
    const double logl = std::log(8.0 / leak_tol);
    const double L = 2.0 * sigma_eff * std::sqrt(2.0 * logl);
    const double xi_need = std::sqrt(0.5 * logl) / sigma;
    int n = next_pow2(static_cast<int>(std::ceil(2.0 * L * xi_need / pi)));
    n = std::clamp(n, n_min, n_max);
    Grid2D g{L, n};
    g.validate();
    return g;
}

Field Field::zero(const Grid2D& g) {
    return Field{g, Eigen::ArrayXXcd::Zero(g.n, g.n)};
}

Field gaussian_field(const Grid2D& g, const GaussianDatum& d) {
    g.validate();
    const Eigen::VectorXd x = g.coords();
    Field f{g, Eigen::ArrayXXcd(g.n, g.n)};
    const double inv4s2 = 1.0 / (4.0 * d.sigma * d.sigma);
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            const double r2 = x[i] * x[i] + x[j] * x[j];
            f.samples(i, j) = d.amplitude * std::exp(-r2 * inv4s2);
        }
    }
    return f;
}

double l2_norm(const Field& f) {
    const double dx = f.grid.spacing();
    return std::sqrt(f.samples.abs2().sum()) * dx;
}

double lp_norm(const Field& f, double p) {
    const double dx = f.grid.spacing();
    const double s = f.samples.abs().pow(p).sum();
    return std::pow(s * dx * dx, 1.0 / p);
}

double linf_norm(const Field& f) { return f.samples.abs().maxCoeff(); }

Complex inner_product(const Field& f, const Field& g) {
    if (!(f.grid == g.grid)) throw std::invalid_argument("inner_product: grid mismatch");
    const double dx = f.grid.spacing();
    return (f.samples * g.samples.conjugate()).sum() * dx * dx;
}

double hs_norm(const Field& f, double s) {
    Eigen::ArrayXXcd hat = f.samples;
    fft2(hat, false);
    const Eigen::VectorXd k = f.grid.freqs();
    const double dx = f.grid.spacing();
    // Continuous transform ~ dx^2 * DFT; Plancherel with dxi = pi / L.
    double acc = 0.0;
    for (int j = 0; j < f.grid.n; ++j) {
        for (int i = 0; i < f.grid.n; ++i) {
            const double k2 = k[i] * k[i] + k[j] * k[j];
            acc += std::pow(k2, s) * std::norm(hat(i, j));
        }
    }
    const double dxi = pi / f.grid.half_length;
    return std::sqrt(acc * dx * dx * dx * dx * dxi * dxi) / (2.0 * pi);
}

double boundary_mass_fraction(const Field& f) {
    const Eigen::VectorXd x = f.grid.coords();
    const double r2_cut = 0.25 * f.grid.half_length * f.grid.half_length;
    double out = 0.0, total = 0.0;
    for (int j = 0; j < f.grid.n; ++j) {
        for (int i = 0; i < f.grid.n; ++i) {
            const double m = std::norm(f.samples(i, j));
            total += m;
            if (x[i] * x[i] + x[j] * x[j] > r2_cut) out += m;
        }
    }
    return total > 0.0 ? out / total : 0.0;
}

namespace {

// e^{it Delta} in place on the spectral representation.
void apply_free_phase(Eigen::ArrayXXcd& hat, const Eigen::VectorXd& k, double t) {
    const int n = static_cast<int>(k.size());
    for (int j = 0; j < n; ++j) {
        const double kj2 = k[j] * k[j];
        for (int i = 0; i < n; ++i) {
            const double phase = -t * (k[i] * k[i] + kj2);
            hat(i, j) *= Complex(std::cos(phase), std::sin(phase));
        }
    }
}

// Multiplier array for e^{it Delta}: exp(-i t |k|^2).
Eigen::ArrayXXcd free_phase_array(const Eigen::VectorXd& k, double t) {
    const int n = static_cast<int>(k.size());
    Eigen::ArrayXXcd out(n, n);
    for (int j = 0; j < n; ++j) {
        const double kj2 = k[j] * k[j];
        for (int i = 0; i < n; ++i) {
            const double phase = -t * (k[i] * k[i] + kj2);
            out(i, j) = Complex(std::cos(phase), std::sin(phase));
        }
    }
    return out;
}

void apply_nonlinear_substep(const Nonlinearity& nl, double dt, Eigen::ArrayXXcd& u) {
    if (nl.real_valued) {
        // |u| is conserved: exact phase rotation u <- e^{-i dt h(|u|^2)} u.
        if (nl.h_bulk_real) {
            const Eigen::ArrayXXd theta = -dt * nl.h_bulk_real(u.abs2());
            u *= theta.cos().cast<Complex>() +
                 Complex(0, 1) * theta.sin().cast<Complex>();
            return;
        }
        Complex* p = u.data();
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            const double l = std::norm(p[i]);
            if (l == 0.0) continue;
            const double phase = -dt * nl.h(l).real();
            p[i] *= Complex(std::cos(phase), std::sin(phase));
        }
    } else {
        // RK4 on the pointwise ODE i u' = h(|u|^2) u.
        auto rhs = [&nl](Complex v) {
            const double l = std::norm(v);
            return (l == 0.0) ? Complex(0.0) : Complex(0, -1) * nl.h(l) * v;
        };
        Complex* p = u.data();
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            const Complex v = p[i];
            const Complex k1 = rhs(v);
            const Complex k2 = rhs(v + 0.5 * dt * k1);
            const Complex k3 = rhs(v + 0.5 * dt * k2);
            const Complex k4 = rhs(v + dt * k3);
            p[i] = v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }
}

}  // namespace

Field free_propagate(const Field& f, double t) {
    Field out = f;
    if (t == 0.0) return out;
    fft2(out.samples, false);
    apply_free_phase(out.samples, f.grid.freqs(), t);
    fft2(out.samples, true);
    return out;
}

Field splitstep_evolve(const EvolutionConfig& cfg, const Field& f0, double t0, double t1,
                       const StepObserver& observer) {
    f0.grid.validate();
    if (!(t1 > t0)) throw std::invalid_argument("splitstep_evolve: needs t1 > t0");
    const double span = t1 - t0;
    if (span < cfg.dt) throw std::invalid_argument("splitstep_evolve: |t1 - t0| < dt");
    const int steps = std::max(1, static_cast<int>(std::llround(span / cfg.dt)));
    const double dt = span / steps;

    const Eigen::VectorXd k = f0.grid.freqs();
    const Eigen::ArrayXXcd k_half = free_phase_array(k, 0.5 * dt);

    Field u = f0;
    const double linf0 = linf_norm(u);
    if (observer) observer(0, t0, u);

    // The spectral state is carried across node boundaries so each step
    // costs three transforms instead of four.
    Eigen::ArrayXXcd uhat = u.samples;
    fft2(uhat, false);

    for (int m = 1; m <= steps; ++m) {
        uhat *= k_half;
        u.samples = uhat;
        fft2(u.samples, true);

        apply_nonlinear_substep(cfg.nl, dt, u.samples);

        uhat = u.samples;
        fft2(uhat, false);
        uhat *= k_half;

        u.samples = uhat;
        fft2(u.samples, true);

        const double t = t0 + m * dt;
        if (linf0 > 0.0) {
            const double growth = linf_norm(u) / linf0;
            if (growth > cfg.blowup_factor) throw BlowupError(t, growth);
        }
        if (observer) observer(m, t, u);
    }
    return u;
}

namespace {

Eigen::ArrayXXcd eval_F_field(const Nonlinearity& nl, const Eigen::ArrayXXcd& u) {
    if (nl.real_valued && nl.h_bulk_real) {
        return (nl.h_bulk_real(u.abs2()).cast<Complex>() * u).eval();
    }
    Eigen::ArrayXXcd out(u.rows(), u.cols());
    const Complex* p = u.data();
    Complex* q = out.data();
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        const double l = std::norm(p[i]);
        q[i] = (l == 0.0) ? Complex(0.0) : nl.h(l) * p[i];
    }
    return out;
}

// Least-squares power-law fit v ~ c t^{-q} over samples with t in
// [T/10, T]; returns the implied tail integral int_T^inf c t^{-q} dt
// (inf if q <= 1 or the data is unusable).
double tail_from_decay(const std::vector<double>& ts, const std::vector<double>& fs,
                       double T) {
    std::vector<double> lx, ly;
    for (size_t i = 0; i < ts.size(); ++i) {
        if (ts[i] > 0.1 * T && fs[i] > 0.0) {
            lx.push_back(std::log(ts[i]));
            ly.push_back(std::log(fs[i]));
        }
    }
    if (lx.size() < 4) return std::numeric_limits<double>::infinity();
    const size_t n = lx.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += lx[i]; sy += ly[i]; sxx += lx[i] * lx[i]; sxy += lx[i] * ly[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom <= 0.0) return std::numeric_limits<double>::infinity();
    const double slope = (n * sxy - sx * sy) / denom;
    const double inter = (sy - slope * sx) / n;
    const double q = -slope;
    if (q <= 1.0) return std::numeric_limits<double>::infinity();
    const double c = std::exp(inter);
    return c * std::pow(T, 1.0 - q) / (q - 1.0);
}

// Signed tail extrapolation of a real sequence sampled on |t| in
// (T/2, T]: fits |v| ~ c |t|^{-q} and carries the sign of the last
// samples. Returns {tail, error_estimate}; {0, conservative} when the
// samples change sign or grow.
std::pair<double, double> signed_power_tail(const std::vector<double>& ts,
                                            const std::vector<double>& vs, double T,
                                            double dt) {
    std::vector<double> lx, ly;
    int sign = 0;
    double last_mag = 0.0;
    for (size_t i = 0; i < ts.size(); ++i) {
        const double at = std::fabs(ts[i]);
        if (at <= 0.5 * T || at > T + 1e-12) continue;
        const int s = vs[i] > 0.0 ? 1 : (vs[i] < 0.0 ? -1 : 0);
        last_mag = std::fabs(vs[i]);
        if (s == 0) continue;
        if (sign == 0) sign = s;
        if (s != sign) return {0.0, last_mag * T};  // sign change: no model
        lx.push_back(std::log(at));
        ly.push_back(std::log(std::fabs(vs[i])));
    }
    if (lx.size() < 6 || sign == 0) return {0.0, last_mag * T};
    const size_t n = lx.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += lx[i]; sy += ly[i]; sxx += lx[i] * lx[i]; sxy += lx[i] * ly[i];
        syy += ly[i] * ly[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom <= 0.0) return {0.0, last_mag * T};
    const double slope = (n * sxy - sx * sy) / denom;
    const double inter = (sy - slope * sx) / n;
    const double q = -slope;
    if (q <= 1.05) return {0.0, last_mag * T};
    const double c = std::exp(inter);
    const double tail = c * std::pow(T, 1.0 - q) / (q - 1.0);
    // Fit scatter as the error proxy, floored at one quadrature panel.
    double rms = 0.0;
    for (size_t i = 0; i < n; ++i) {
        rms += std::pow(ly[i] - (inter + slope * lx[i]), 2);
    }
    rms = std::sqrt(rms / n);
    const double err = tail * std::max(rms, 0.02) + last_mag * dt;
    return {sign * tail, err};
}

struct DuhamelAccumulator {
    const Nonlinearity& nl;
    Eigen::VectorXd k;
    double dx;
    int n_side;
    int last_step;
    Eigen::ArrayXXcd acc_hat;
    Eigen::ArrayXXcd ref_hat_conj;  // conj of the Born reference spectrum
    Eigen::ArrayXXcd phase;         // e^{+i t_m |k|^2}, advanced incrementally
    Eigen::ArrayXXcd phase_step;    // e^{+i dt |k|^2}
    bool phase_ready = false;
    double t_prev = 0.0;
    std::vector<double> ts, f_l2;
    std::vector<Complex> gb;  // Born integrand <F(u(t)), e^{it Delta} u_ref>
    double boundary_max = 0.0;

    DuhamelAccumulator(const Nonlinearity& nl_, const Field& reference, int steps)
        : nl(nl_), k(reference.grid.freqs()), dx(reference.grid.spacing()),
          n_side(reference.grid.n), last_step(steps),
          acc_hat(Eigen::ArrayXXcd::Zero(n_side, n_side)) {
        Eigen::ArrayXXcd ref = reference.samples;
        fft2(ref, false);
        ref_hat_conj = ref.conjugate();
    }

    void operator()(int step, double t, const Field& u) {
        Eigen::ArrayXXcd fu = eval_F_field(nl, u.samples);
        f_l2.push_back(std::sqrt(fu.abs2().sum()) * dx);
        ts.push_back(t);
        boundary_max = std::max(boundary_max, boundary_mass_fraction(u));

        // e^{-it Delta} multiplier exp(+i t |k|^2), built once and then
        // advanced by one exact per-step factor per node.
        if (!phase_ready) {
            phase = free_phase_array(k, -t);
            phase_ready = true;
        } else {
            if (phase_step.size() == 0) phase_step = free_phase_array(k, -(t - t_prev));
            phase *= phase_step;
        }
        t_prev = t;

        fft2(fu, false);
        const Eigen::ArrayXXcd shifted = phase * fu;
        const double w = (step == 0 || step == last_step) ? 0.5 : 1.0;
        acc_hat += w * shifted;

        // <e^{-it Delta} F, u_ref> = <F, e^{it Delta} u_ref> by Parseval.
        const double par = dx * dx / (static_cast<double>(n_side) * n_side);
        gb.push_back((shifted * ref_hat_conj).sum() * par);
    }


    // Finishes - i int e^{-it Delta} F(u) dt given the node spacing.
    Field finish(const Grid2D& g, double dt) const {
        Field integral{g, acc_hat * Complex(0, -1) * dt};
        fft2(integral.samples, true);
        return integral;
    }

    double duhamel_l1(double dt) const {
        double acc = 0.0;
        for (size_t i = 0; i + 1 < f_l2.size(); ++i) {
            acc += 0.5 * dt * (f_l2[i] + f_l2[i + 1]);
        }
        return acc;
    }

    double last_fifth_fraction(double dt) const {
        const double total = duhamel_l1(dt);
        if (total <= 0.0) return 0.0;
        double acc = 0.0;
        const double t_cut = ts.front() + 0.8 * (ts.back() - ts.front());
        for (size_t i = 0; i + 1 < f_l2.size(); ++i) {
            if (ts[i] >= t_cut) acc += 0.5 * dt * (f_l2[i] + f_l2[i + 1]);
        }
        return acc / total;
    }
};

// -i * extrapolated integral of gb over one time tail; ts must be the
// positive distances from t = 0 on that side.
std::pair<Complex, double> born_tail_one_side(const std::vector<double>& ts,
                                              const std::vector<Complex>& gb, double T,
                                              double dt) {
    std::vector<double> re(gb.size()), im(gb.size());
    for (size_t i = 0; i < gb.size(); ++i) {
        re[i] = gb[i].real();
        im[i] = gb[i].imag();
    }
    const auto [tr, er] = signed_power_tail(ts, re, T, dt);
    const auto [ti, ei] = signed_power_tail(ts, im, T, dt);
    return {Complex(0, -1) * Complex(tr, ti), er + ei};
}

}  // namespace

ScatteringResult wave_operator(const EvolutionConfig& cfg, const Field& u0) {
    const int steps = std::max(1, static_cast<int>(std::llround(cfg.horizon / cfg.dt)));
    const double dt = cfg.horizon / steps;
    DuhamelAccumulator acc(cfg.nl, u0, steps);
    splitstep_evolve(cfg, u0, 0.0, cfg.horizon,
                     [&acc](int s, double t, const Field& u) { acc(s, t, u); });

    ScatteringResult res;
    const Field integral = acc.finish(u0.grid, dt);
    res.out = Field{u0.grid, u0.samples + integral.samples};
    res.duhamel_l1 = acc.duhamel_l1(dt);
    res.tail_fraction = acc.last_fifth_fraction(dt);
    res.tail_bound = tail_from_decay(acc.ts, acc.f_l2, cfg.horizon);
    res.boundary_mass = acc.boundary_max;
    res.domain_ok = acc.boundary_max < cfg.boundary_leak_tol;
    res.horizon = cfg.horizon;
    std::tie(res.born_pairing_tail, res.born_tail_error) =
        born_tail_one_side(acc.ts, acc.gb, cfg.horizon, dt);
    return res;
}

ScatteringResult scattering_map(const EvolutionConfig& cfg, const Field& u_minus) {
    const double T = cfg.horizon;
    const int steps = std::max(1, static_cast<int>(std::llround(2.0 * T / cfg.dt)));
    const double dt = 2.0 * T / steps;

    Field u_start = free_propagate(u_minus, -T);
    DuhamelAccumulator acc(cfg.nl, u_minus, steps);
    Field u_end = splitstep_evolve(cfg, u_start, -T, T,
                                   [&acc](int s, double t, const Field& u) { acc(s, t, u); });

    ScatteringResult res;
    res.out = free_propagate(u_end, -T);
    res.duhamel_l1 = acc.duhamel_l1(dt);
    res.tail_fraction = acc.last_fifth_fraction(dt);
    // Each time end gets its own decay fit.
    std::vector<double> ts_pos, fs_pos, ts_neg, fs_neg;
    std::vector<Complex> gb_pos, gb_neg;
    for (size_t i = 0; i < acc.ts.size(); ++i) {
        if (acc.ts[i] > 0.0) {
            ts_pos.push_back(acc.ts[i]);
            fs_pos.push_back(acc.f_l2[i]);
            gb_pos.push_back(acc.gb[i]);
        } else if (acc.ts[i] < 0.0) {
            ts_neg.push_back(-acc.ts[i]);
            fs_neg.push_back(acc.f_l2[i]);
            gb_neg.push_back(acc.gb[i]);
        }
    }
    res.tail_bound = tail_from_decay(ts_pos, fs_pos, T) + tail_from_decay(ts_neg, fs_neg, T);
    res.boundary_mass = acc.boundary_max;
    res.domain_ok = acc.boundary_max < cfg.boundary_leak_tol;
    res.horizon = T;
    const auto [fwd, fwd_err] = born_tail_one_side(ts_pos, gb_pos, T, dt);
    const auto [bwd, bwd_err] = born_tail_one_side(ts_neg, gb_neg, T, dt);
    res.born_pairing_tail = fwd + bwd;
    res.born_tail_error = fwd_err + bwd_err;
    return res;
}

PicardResult picard_iterate(const EvolutionConfig& cfg, const Field& u0, int n_iter) {
    const Grid2D& g = u0.grid;
    g.validate();
    const int steps = std::max(1, static_cast<int>(std::llround(cfg.horizon / cfg.dt)));
    const double dt = cfg.horizon / steps;
    const Eigen::VectorXd k = g.freqs();
    const double dx = g.spacing();

    auto l6_cube = [&](const Eigen::ArrayXXcd& a) {
        // ||a||_{L^6}^3 = (dx^2 sum |a|^6)^{1/2}
        return std::sqrt(a.abs().pow(6.0).sum() * dx * dx);
    };
    auto traj_l3l6 = [&](const std::vector<Eigen::ArrayXXcd>& a,
                         const std::vector<Eigen::ArrayXXcd>& b) {
        double acc = 0.0;
        for (int m = 0; m <= steps; ++m) {
            const double w = (m == 0 || m == steps) ? 0.5 * dt : dt;
            acc += w * l6_cube(a[m] - b[m]);
        }
        return std::cbrt(acc);
    };
    auto propagate = [&](Eigen::ArrayXXcd& a, double t) {
        fft2(a, false);
        apply_free_phase(a, k, t);
        fft2(a, true);
    };

    // Free trajectory (also the zeroth iterate).
    std::vector<Eigen::ArrayXXcd> freeu(steps + 1);
    freeu[0] = u0.samples;
    for (int m = 1; m <= steps; ++m) {
        freeu[m] = freeu[m - 1];
        propagate(freeu[m], dt);
    }

    std::vector<Eigen::ArrayXXcd> cur = freeu, next(steps + 1);
    PicardResult res;
    res.final_state = Field{g, freeu[steps]};

    int rising = 0;
    for (int it = 0; it < n_iter; ++it) {
        // Phi(cur): next[m] = freeu[m] - i J_m with the trapezoid
        // recursion J_m = e^{i dt Delta}(J_{m-1} + dt/2 F(u_{m-1})) + dt/2 F(u_m).
        Eigen::ArrayXXcd J = Eigen::ArrayXXcd::Zero(g.n, g.n);
        Eigen::ArrayXXcd f_prev = eval_F_field(cfg.nl, cur[0]);
        next[0] = freeu[0];
        for (int m = 1; m <= steps; ++m) {
            J += 0.5 * dt * f_prev;
            propagate(J, dt);
            f_prev = eval_F_field(cfg.nl, cur[m]);
            J += 0.5 * dt * f_prev;
            next[m] = freeu[m] - Complex(0, 1) * J;
        }

        const double d = traj_l3l6(next, cur);
        res.distances.push_back(d);
        if (res.distances.size() >= 2) {
            const double prev = res.distances[res.distances.size() - 2];
            const double ratio = prev > 0.0 ? d / prev : 0.0;
            res.ratios.push_back(ratio);
            rising = (ratio >= 1.0) ? rising + 1 : 0;
            if (rising >= 2) res.contracting = false;
        }
        cur.swap(next);
        res.final_state = Field{g, cur[steps]};
    }
    return res;
}

void StrichartzAccumulator::push(const Field& u) {
    l6_.push_back(lp_norm(u, 6.0));
    lr_.push_back(lp_norm(u, 3.0 * p_));
}

StrichartzRecord StrichartzAccumulator::finalize() const {
    StrichartzRecord rec;
    rec.p = p_;
    double a3 = 0.0, aq = 0.0;
    const double q = 1.5 * p_;
    for (size_t i = 0; i < l6_.size(); ++i) {
        const double w = (i == 0 || i + 1 == l6_.size()) ? 0.5 * dt_ : dt_;
        a3 += w * std::pow(l6_[i], 3.0);
        aq += w * std::pow(lr_[i], q);
    }
    rec.l3_l6 = std::cbrt(a3);
    rec.lq_lr = std::pow(aq, 1.0 / q);
    return rec;
}

StrichartzRecord strichartz_norms(const std::vector<Field>& trajectory, double dt, double p) {
    StrichartzAccumulator acc(p, dt);
    for (const auto& f : trajectory) acc.push(f);
    return acc.finalize();
}

void write_field_binary(const std::string& base_path, const Field& f) {
    const int n = f.grid.n;
    std::ofstream bin(base_path + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("write_field_binary: cannot open " + base_path + ".bin");
    for (int i = 0; i < n; ++i) {      // row-major
        for (int j = 0; j < n; ++j) {
            const double re = f.samples(i, j).real();
            const double im = f.samples(i, j).imag();
            bin.write(reinterpret_cast<const char*>(&re), sizeof(double));
            bin.write(reinterpret_cast<const char*>(&im), sizeof(double));
        }
    }
    nlohmann::json header = {
        {"n", n},
        {"half_length", f.grid.half_length},
        {"layout", "row-major"},
        {"dtype", "float64-interleaved-re-im"},
        {"byte_order", "little-endian"},
    };
    std::ofstream side(base_path + ".json");
    side << header.dump(2) << "\n";
}

Field read_field_binary(const std::string& base_path) {
    std::ifstream side(base_path + ".json");
    if (!side) throw std::runtime_error("read_field_binary: missing header " + base_path + ".json");
    nlohmann::json header = nlohmann::json::parse(side);
    Grid2D g{header.at("half_length").get<double>(), header.at("n").get<int>()};
    g.validate();
    Field f = Field::zero(g);
    std::ifstream bin(base_path + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("read_field_binary: missing " + base_path + ".bin");
    for (int i = 0; i < g.n; ++i) {
        for (int j = 0; j < g.n; ++j) {
            double re, im;
            bin.read(reinterpret_cast<char*>(&re), sizeof(double));
            bin.read(reinterpret_cast<char*>(&im), sizeof(double));
            f.samples(i, j) = Complex(re, im);
        }
    }
    if (!bin) throw std::runtime_error("read_field_binary: truncated " + base_path + ".bin");
    return f;
}

}  // namespace nlsinv
