#include "nlsinv/pairing.hpp"

#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace nlsinv {

namespace {
constexpr double pi = std::numbers::pi;
}

std::vector<const Measurement*> MeasurementDataset::valid_points() const {
    std::vector<const Measurement*> out;
    for (const auto& m : measurements) {
        if (m.valid) out.push_back(&m);
    }
    return out;
}

void MeasurementDataset::validate() const {
    for (size_t i = 0; i + 1 < measurements.size(); ++i) {
        if (!(measurements[i].ell < measurements[i + 1].ell)) {
            throw std::invalid_argument("MeasurementDataset: ell values must be increasing");
        }
    }
    for (const auto& m : measurements) {
        if (!(m.sigma > 0.0) || m.residual < 0.0) {
            throw std::invalid_argument("MeasurementDataset: bad sigma or residual");
        }
    }
}

Complex born_functional(const Field& omega_out, const Field& u0) {
    if (!(omega_out.grid == u0.grid)) {
        throw std::invalid_argument("born_functional: grid mismatch");
    }
    const double dx = u0.grid.spacing();
    return ((omega_out.samples - u0.samples) * u0.samples.conjugate()).sum() * dx * dx;
}

Complex extract_m(Complex born, double sigma, Convention convention) {
    if (!(sigma > 0.0)) throw std::invalid_argument("extract_m: sigma must be > 0");
    const double s2 = sigma * sigma;
    Complex m = Complex(0, 1) * (9.0 / (4.0 * pi)) / (s2 * s2) * born;
    if (convention == Convention::full) m *= 0.5;
    return m;
}

Complex exact_m(const Nonlinearity& nl, double ell, double tol) {
    return h_weight_convolution(nl, ell, tol);
}

namespace {

Measurement simulate_point(const CampaignConfig& cfg, double ell) {
    Measurement meas;
    meas.ell = ell;
    meas.sigma = cfg.sigma;
    meas.source = "simulated";

    const GaussianDatum probe{std::exp(0.5 * ell), cfg.sigma};
    const double s2 = cfg.sigma * cfg.sigma;
    const double horizon = cfg.horizon_scaled * s2;

    EvolutionConfig evo;
    evo.nl = cfg.nl;
    evo.horizon = horizon;
    evo.dt = cfg.dt_scaled * s2;
    evo.boundary_leak_tol = cfg.leak_tol;
    evo.blowup_factor = cfg.blowup_factor;

    const Grid2D grid = Grid2D::for_probe(cfg.sigma, horizon, cfg.leak_tol, 64, cfg.n_max);
    const Field u0 = gaussian_field(grid, probe);

    try {
        const ScatteringResult r = (cfg.convention == Convention::half)
                                       ? wave_operator(evo, u0)
                                       : scattering_map(evo, u0);
        Complex born = born_functional(r.out, u0);

        const double coeff = (9.0 / (4.0 * pi)) / (s2 * s2);
        double tail_resid;  // in born units
        switch (cfg.tail) {
            case TailCorrection::extrapolate:
                born += r.born_pairing_tail;
                tail_resid = r.born_tail_error;
                break;
            case TailCorrection::oracle: {
                const TimeSide side =
                    cfg.convention == Convention::half ? TimeSide::half : TimeSide::full;
                const Complex tail_g =
                    spacetime_G_direct_tail(cfg.nl, probe, horizon, side, 1e-8);
                born += Complex(0, -1) * tail_g;
                tail_resid = 1e-6 * std::abs(tail_g);
                break;
            }
            case TailCorrection::none:
            default:
                tail_resid = std::isfinite(r.tail_bound) ? r.tail_bound * l2_norm(u0)
                                                         : std::abs(r.born_pairing_tail);
                break;
        }
        meas.value = extract_m(born, cfg.sigma, cfg.convention);

        double conv_factor = coeff * (cfg.convention == Convention::full ? 0.5 : 1.0);
        meas.residual = conv_factor * tail_resid +
                        cfg.born_residual_coeff * s2 * std::abs(meas.value);
        meas.valid = true;
    } catch (const BlowupError&) {
        meas.valid = false;
        meas.value = 0.0;
        meas.residual = std::numeric_limits<double>::infinity();
    }
    return meas;
}

}  // namespace

MeasurementDataset measurement_campaign_simulated(const CampaignConfig& cfg) {
    for (size_t i = 0; i + 1 < cfg.ell_grid.size(); ++i) {
        if (!(cfg.ell_grid[i] < cfg.ell_grid[i + 1])) {
            throw std::invalid_argument("measurement_campaign: ell grid must be increasing");
        }
    }
    MeasurementDataset ds;
    ds.nl_label = cfg.nl.label;
    ds.convention = cfg.convention == Convention::half ? "half" : "full";
    ds.measurements.resize(cfg.ell_grid.size());

    const int jobs = std::max(1, cfg.jobs);
    std::atomic<size_t> cursor{0};
    auto worker = [&] {
        for (;;) {
            const size_t i = cursor.fetch_add(1);
            if (i >= cfg.ell_grid.size()) break;
            ds.measurements[i] = simulate_point(cfg, cfg.ell_grid[i]);
        }
    };
    if (jobs == 1 || cfg.ell_grid.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return ds;
}

MeasurementDataset measurement_campaign_exact(const Nonlinearity& nl,
                                              const std::vector<double>& ell_grid,
                                              double sigma, Convention convention,
                                              double tol) {
    for (size_t i = 0; i + 1 < ell_grid.size(); ++i) {
        if (!(ell_grid[i] < ell_grid[i + 1])) {
            throw std::invalid_argument("measurement_campaign: ell grid must be increasing");
        }
    }
    MeasurementDataset ds;
    ds.nl_label = nl.label;
    ds.convention = convention == Convention::half ? "half" : "full";
    for (double ell : ell_grid) {
        Measurement m;
        m.ell = ell;
        m.sigma = sigma;
        m.value = exact_m(nl, ell, tol);
        m.source = "exact";
        m.residual = tol * std::abs(m.value);
        ds.measurements.push_back(m);
    }
    return ds;
}

}  // namespace nlsinv
