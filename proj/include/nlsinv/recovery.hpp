#pragma once

#include <vector>

#include "nlsinv/nonlinearity.hpp"
#include "nlsinv/pairing.hpp"

namespace nlsinv {

/// Estimate of H(k) on a window, with the reconstruction metadata.
struct RecoveredH {
    HTable table;
    double regularization = 0.0;
    double residual_norm = 0.0;
    double amplitude_disc = 0.0;  // e^{ell_0 / 2}, ell_0 = largest probed ell
    double condition_number = 0.0;
    std::string method = "windowed";
};

struct PolyFit {
    std::vector<double> exponents;     // distinct p >= 2
    Eigen::VectorXcd coefficients;     // a_p of F = sum a_p |u|^p u
    Eigen::VectorXd basis_weights;     // W((p+2)/2), all positive
    double condition_number = 0.0;
    double residual_norm = 0.0;
};

/// Exponential weighting line adopted for the deconvolution variables
/// (any value in (3/2, 2) works; fixed for reproducibility).
inline constexpr double recovery_weight_line = 1.75;

/// Tikhonov-regularized collocation solve of
///   m(ell_i) = sum_j w(k_j + ell_i) H(k_j) Dk + c_tail T(ell_i)
/// in the weighted variables f = e^{(7/4)k} H, v = e^{-(7/4)(k+ell)} w,
/// data e^{-(7/4)ell} m. The tail column models H ~ c e^{-2k} beyond the
/// window. `reg` <= 0 selects the default 1e-8 * smax^2. `n_k` <= 0
/// selects an automatic grid density.
RecoveredH deconvolve_windowed(const MeasurementDataset& ds, double k_lo, double k_hi,
                               double reg = -1.0, int n_k = -1);

/// Fourier-division route on a uniform ell grid: divides the weighted
/// data spectrum by the symbol W(7/4 + i xi) with a spectral cutoff at
/// `band_limit` and Tikhonov floor `reg`.
RecoveredH deconvolve_fourier(const MeasurementDataset& ds, double band_limit,
                              double reg = 1e-12);

/// Linear least squares of m(ell) against the generalized-polynomial
/// basis ((p+2)/2) W((p+2)/2) e^{(p+2) ell / 2}; coefficients are the a_p.
PolyFit fit_polynomial(const MeasurementDataset& ds, const std::vector<double>& exponents);

/// Greedy (orthogonal) matching pursuit over an exponent dictionary;
/// stops when the relative residual improvement drops below `threshold`.
std::vector<double> detect_exponents(const MeasurementDataset& ds,
                                     const std::vector<double>& dictionary,
                                     double threshold = 1e-3);

struct NonvanishingScan {
    double min_modulus = 0.0;
    double xi_at_min = 0.0;
};

/// min over the scan of |W((p+2)/2 + i xi)|, xi in [-xi_max, xi_max].
NonvanishingScan check_nonvanishing(double p, double xi_max, int n = 2001);

/// Table inversion to a Nonlinearity; carries the amplitude disc.
Nonlinearity recover_nonlinearity(const RecoveredH& rh);

struct IterativeRecovery {
    RecoveredH estimate;             // final H estimate
    Nonlinearity nl;                 // reconstructed nonlinearity
    int refinements = 0;             // forward-simulation passes applied
    std::vector<double> update_l2;   // relative size of each H update
};

/// Born-iterative refinement: deconvolve, simulate the measurement of the
/// candidate through the same campaign operator, deconvolve the residual,
/// update. Shared discretization and Born-order errors cancel between the
/// data and the candidate's forward simulation, leaving the linearization
/// residual. `sim` describes the measurement operator (probe sigma, grids,
/// horizons); its nonlinearity field is replaced by each candidate in turn.
IterativeRecovery recover_iterative(const MeasurementDataset& data,
                                    const CampaignConfig& sim, double k_lo, double k_hi,
                                    double reg = -1.0, int max_refinements = 2,
                                    double damping = 0.75);

/// Polynomial flavor of the same refinement: fit coefficients, simulate
/// the candidate polynomial through the campaign operator, fit the
/// residual, update.
PolyFit recover_polynomial_iterative(const MeasurementDataset& data,
                                     const CampaignConfig& sim,
                                     const std::vector<double>& exponents,
                                     int max_refinements = 2, double damping = 0.75);

}  // namespace nlsinv
