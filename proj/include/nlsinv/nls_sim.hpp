#pragma once

#include <Eigen/Core>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlsinv/gaussian_oracle.hpp"
#include "nlsinv/nonlinearity.hpp"

namespace nlsinv {

/// Square periodic grid standing in for R^2: points x_i = -L + i (2L/N),
/// N a power of two.
struct Grid2D {
    double half_length = 1.0;  // L
    int n = 64;                // points per side

    double spacing() const { return 2.0 * half_length / n; }
    double nyquist() const;  // pi N / (2L)
    Eigen::VectorXd coords() const;
    Eigen::VectorXd freqs() const;  // FFT-ordered
    void validate() const;
    bool operator==(const Grid2D& o) const {
        return half_length == o.half_length && n == o.n;
    }

    /// Sizes the box so that a width-sigma Gaussian probe keeps both its
    /// spatial mass within radius L/2 and its spectral mass within the
    /// Nyquist disc up to `leak_tol` over horizon T.
    static Grid2D for_probe(double sigma, double horizon, double leak_tol = 1e-8,
                            int n_min = 64, int n_max = 4096);
};

/// Complex field sampled on a Grid2D; samples(i, j) lives at
/// (x_i, y_j) with the grid's coords.
struct Field {
    Grid2D grid;
    Eigen::ArrayXXcd samples;

    static Field zero(const Grid2D& g);
};

Field gaussian_field(const Grid2D& g, const GaussianDatum& d);

double l2_norm(const Field& f);
double lp_norm(const Field& f, double p);
double linf_norm(const Field& f);
double hs_norm(const Field& f, double s);  // homogeneous H^s via FFT
Complex inner_product(const Field& f, const Field& g);  // dx^2 sum f conj(g)
double boundary_mass_fraction(const Field& f);  // mass outside radius L/2

/// Exact discrete free propagator e^{it Delta} (Fourier multiplier
/// e^{-i t |xi|^2}); unitary on the grid to roundoff.
Field free_propagate(const Field& f, double t);

struct EvolutionConfig {
    double horizon = 1.0;       // T
    double dt = 0.01;
    Nonlinearity nl;
    double blowup_factor = 100.0;
    double boundary_leak_tol = 1e-8;
};

struct BlowupError : std::runtime_error {
    double t;
    double factor;
    BlowupError(double t_, double factor_)
        : std::runtime_error("splitstep_evolve: sup norm grew by x" +
                             std::to_string(factor_) + " at t = " + std::to_string(t_) +
                             " (small-data regime violated)"),
          t(t_), factor(factor_) {}
};

/// Called at every node, including the initial one.
using StepObserver = std::function<void(int step, double t, const Field& u)>;

/// Second-order Strang splitting between t0 and t1 (t1 > t0). Real-valued
/// h uses the exact phase-rotation substep; complex h uses a pointwise
/// RK4 substep. Throws BlowupError when the guard trips.
Field splitstep_evolve(const EvolutionConfig& cfg, const Field& f0, double t0, double t1,
                       const StepObserver& observer = {});

struct PicardResult {
    std::vector<double> distances;  // d_n = ||u_{n+1} - u_n|| in L^3_t L^6_x
    std::vector<double> ratios;     // d_{n+1} / d_n
    bool contracting = true;
    Field final_state;              // last iterate at t = horizon
};

/// Duhamel/Picard iteration u -> Phi(u) on the node grid of [0, T],
/// starting from the free evolution.
PicardResult picard_iterate(const EvolutionConfig& cfg, const Field& u0, int n_iter);

struct ScatteringResult {
    Field out;              // Omega_F(u0) or S_F(u_minus)
    double tail_bound = 0;  // estimated L^2 size of the truncated Duhamel tail
    double tail_fraction = 0;  // last-20% share of int ||F(u(t))|| dt
    double duhamel_l1 = 0;     // int ||F(u(t))||_{L2} dt over the run
    double boundary_mass = 0;  // max mass fraction outside radius L/2 seen
    bool domain_ok = true;
    double horizon = 0;

    // Truncated part of the Born pairing -i int <F(u(t)), e^{it Delta} u_ref> dt
    // beyond the horizon, extrapolated from the run's own integrand samples
    // by a power-law decay fit, with a rough error estimate for it.
    Complex born_pairing_tail{};
    double born_tail_error = 0;
};

/// Omega_F(u0) = u0 - i int_0^T e^{-it Delta} F(u(t)) dt along the
/// split-step trajectory (trapezoid in t, phase-exact propagators).
ScatteringResult wave_operator(const EvolutionConfig& cfg, const Field& u0);

/// S_F(u_-) ~ free_propagate(u(T), -T) where u solves the equation with
/// u(-T) = free_propagate(u_-, -T).
ScatteringResult scattering_map(const EvolutionConfig& cfg, const Field& u_minus);

struct StrichartzRecord {
    double l3_l6 = 0;    // L^3_t L^6_x
    double lq_lr = 0;    // L^{3p/2}_t L^{3p}_x
    double p = 2;
};

/// Streaming accumulator for the mixed space-time norms; feed uniformly
/// spaced nodes (endpoints get trapezoid half-weights on finalize).
class StrichartzAccumulator {
  public:
    StrichartzAccumulator(double p, double dt) : p_(p), dt_(dt) {}
    void push(const Field& u);
    StrichartzRecord finalize() const;

  private:
    double p_, dt_;
    std::vector<double> l6_, lr_;
};

StrichartzRecord strichartz_norms(const std::vector<Field>& trajectory, double dt, double p);

/// Binary field dump: <base>.bin holds row-major interleaved (re, im)
/// float64 little-endian samples; <base>.json is the header sidecar.
void write_field_binary(const std::string& base_path, const Field& f);
Field read_field_binary(const std::string& base_path);

}  // namespace nlsinv
