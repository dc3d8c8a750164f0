#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nlsinv/nls_sim.hpp"

namespace nlsinv {

/// One sample of the convolution functional m(ell) = int H(k) w(k+ell) dk.
struct Measurement {
    double ell = 0.0;    // 2 ln A of the probe
    double sigma = 1.0;  // probe width
    Complex value{};     // extracted (or exact) m(ell)
    std::string source = "exact";  // "exact" | "simulated"
    double residual = 0.0;         // error estimate, >= 0
    bool valid = true;
};

struct MeasurementDataset {
    std::vector<Measurement> measurements;  // strictly increasing ell
    std::string nl_label;
    std::string convention = "half";  // "half" | "full"

    std::vector<const Measurement*> valid_points() const;
    void validate() const;
};

enum class Convention { half, full };

/// Discrete <omega_out - u0, u0> with <f, g> = int f conj(g).
Complex born_functional(const Field& omega_out, const Field& u0);

/// m_hat(ell) = i (9 / 4 pi) sigma^{-4} * born, halved for the full-line
/// convention.
Complex extract_m(Complex born, double sigma, Convention convention);

/// Exact m(ell) for a known nonlinearity (adaptive quadrature).
Complex exact_m(const Nonlinearity& nl, double ell, double tol = 1e-10);

enum class TailCorrection {
    none,         // truncation left entirely in the residual estimate
    extrapolate,  // power-law fit of the run's own Born integrand (default)
    oracle,       // free-flight G tail via quadrature (uses the known nl)
};

struct CampaignConfig {
    Nonlinearity nl;
    double sigma = 0.5;
    std::vector<double> ell_grid;
    Convention convention = Convention::half;

    // Simulation controls (scaled horizon T = horizon_scaled * sigma^2,
    // time step dt = dt_scaled * sigma^2; grid sized per probe). The
    // defaults keep a sigma = 0.5 probe on an N = 512 grid.
    double horizon_scaled = 16.0;
    double dt_scaled = 0.04;
    int n_max = 4096;
    double leak_tol = 1e-8;
    double blowup_factor = 100.0;
    TailCorrection tail = TailCorrection::extrapolate;
    double born_residual_coeff = 1.0;  // sigma^2-scale Born estimate factor
    int jobs = 1;
};

/// One wave-operator run per ell (A = e^{ell/2}); aborted simulations mark
/// the point invalid instead of failing the campaign. Points are
/// independent; `jobs` bounds the worker pool.
MeasurementDataset measurement_campaign_simulated(const CampaignConfig& cfg);

/// Closed-route dataset straight from exact_m.
MeasurementDataset measurement_campaign_exact(const Nonlinearity& nl,
                                              const std::vector<double>& ell_grid,
                                              double sigma = 1.0,
                                              Convention convention = Convention::half,
                                              double tol = 1e-10);

}  // namespace nlsinv
