// nlsinv command-line front end: tables, identity checks, simulation,
// measurement campaigns, and inverse-problem recovery.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <numbers>
#include <algorithm>
#include <optional>

#include "nlsinv/nls_sim.hpp"
#include "nlsinv/pairing.hpp"
#include "nlsinv/recovery.hpp"
#include "nlsinv/serialize.hpp"
#include "nlsinv/special_functions.hpp"

using namespace nlsinv;
using nlohmann::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_tolerance = 1;
constexpr int exit_usage = 2;
constexpr int exit_guard = 3;

// Splices config-file values into the argument list as synthetic tokens,
// skipping any option the user passed explicitly (flags win over config).
std::vector<std::string> merge_config_args(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string config_path;
    for (size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] == "--config") config_path = args[i + 1];
    }
    if (config_path.empty()) return args;

    std::ifstream cf(config_path);
    if (!cf) throw std::runtime_error("cannot open config " + config_path);
    const json cfg = json::parse(cf);

    std::vector<std::string> out = args;
    for (const auto& [key, value] : cfg.items()) {
        const std::string flag = "--" + key;
        if (std::find(args.begin(), args.end(), flag) != args.end()) continue;
        out.push_back(flag);
        out.push_back(value.is_string() ? value.get<std::string>() : value.dump());
    }
    return out;
}

int jobs_from_env(int flag_value) {
    if (const char* e = std::getenv("NLSINV_JOBS")) {
        const int v = std::atoi(e);
        if (v > 0) return v;
    }
    return flag_value;
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

RunManifest make_manifest(const std::string& command, json params) {
    RunManifest m;
    m.command = command;
    m.parameters = std::move(params);
    m.code_version = code_version;
    m.input_digests = json::object();
    m.output_digests = json::object();
    return m;
}

Nonlinearity load_nl(const std::string& path, RunManifest& manifest) {
    manifest.input_digests[path] = file_digest(path);
    return nl_spec_from_file(path).build();
}

void finish_manifest(RunManifest& m, const Timer& t,
                     const std::vector<std::string>& outputs) {
    m.wall_time_s = t.seconds();
    for (const auto& p : outputs) m.output_digests[p] = file_digest(p);
    if (!outputs.empty()) write_manifest(outputs.front() + ".manifest.json", m);
}

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stod(tok));
    }
    return out;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
    return v;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// --- subcommands ------------------------------------------------------------

int cmd_weight_table(double kmin, double kmax, int n, const std::string& out) {
    Timer timer;
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot open " + out);
    f << "k,w\n";
    for (int i = 0; i < n; ++i) {
        const double k = n == 1 ? kmin : kmin + (kmax - kmin) * i / (n - 1);
        f << format_full(k) << ',' << format_full(weight_w(k)) << '\n';
    }
    f.close();
    RunManifest m = make_manifest(
        "weight-table", json{{"kmin", kmin}, {"kmax", kmax}, {"n", n}, {"out", out}});
    finish_manifest(m, timer, {out});
    return exit_ok;
}

int cmd_laplace_table(double line, double ximax, int n, const std::string& out) {
    Timer timer;
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot open " + out);
    f << "xi,re_W,im_W,abs_W\n";
    for (int i = 0; i < n; ++i) {
        const double xi = n == 1 ? -ximax : -ximax + 2.0 * ximax * i / (n - 1);
        const Complex w = weight_laplace_W({line, xi});
        f << format_full(xi) << ',' << format_full(w.real()) << ',' << format_full(w.imag())
          << ',' << format_full(std::abs(w)) << '\n';
    }
    f.close();
    RunManifest m = make_manifest(
        "laplace-table",
        json{{"sigma-line", line}, {"ximax", ximax}, {"n", n}, {"out", out}});
    finish_manifest(m, timer, {out});
    return exit_ok;
}

int cmd_verify_identity(const std::string& nl_path, double A, double sigma, double tol) {
    Timer timer;
    RunManifest m = make_manifest("verify-identity",
                                  json{{"nl", nl_path}, {"A", A}, {"sigma", sigma}});
    const Nonlinearity nl = load_nl(nl_path, m);
    const GaussianDatum d{A, sigma};
    const Complex exact = spacetime_G_exact(nl, d, TimeSide::half, 1e-10);
    const Complex direct = spacetime_G_direct(nl, d, TimeSide::half, 1e-8);
    const double scale = std::max({std::abs(exact), std::abs(direct), 1e-300});
    const double gap = std::abs(exact - direct) / scale;
    std::cout << "layer-cake route : " << format_full(exact.real());
    if (exact.imag() != 0.0) std::cout << " + " << format_full(exact.imag()) << "i";
    std::cout << "\ndirect quadrature: " << format_full(direct.real());
    if (direct.imag() != 0.0) std::cout << " + " << format_full(direct.imag()) << "i";
    std::cout << "\nrelative gap     : " << format_full(gap) << "\n";
    if (std::abs(exact) == 0.0 && std::abs(direct) < 1e-12) return exit_ok;
    return gap <= tol ? exit_ok : exit_tolerance;
}

int cmd_simulate(const std::string& nl_path, double A, double sigma, double T, double dt,
                 double L, int N, const std::string& out) {
    Timer timer;
    RunManifest m = make_manifest("simulate", json{{"nl", nl_path},
                                                   {"A", A},
                                                   {"sigma", sigma},
                                                   {"T", T},
                                                   {"dt", dt},
                                                   {"L", L},
                                                   {"N", N},
                                                   {"out", out}});
    const Nonlinearity nl = load_nl(nl_path, m);

    Grid2D grid;
    if (L > 0.0 && N > 0) {
        grid = Grid2D{L, N};
        grid.validate();
    } else {
        grid = Grid2D::for_probe(sigma, T);
    }
    const Field u0 = gaussian_field(grid, {A, sigma});
    EvolutionConfig cfg{T, dt, nl};

    const double mass0 = l2_norm(u0);
    double mass_drift = 0.0, boundary = 0.0;
    StrichartzAccumulator stri(nl.growth_p, dt);
    const Field uT = splitstep_evolve(cfg, u0, 0.0, T, [&](int, double, const Field& u) {
        mass_drift = std::max(mass_drift, std::fabs(l2_norm(u) - mass0) / mass0);
        boundary = std::max(boundary, boundary_mass_fraction(u));
        stri.push(u);
    });

    const std::string base = out.size() > 5 && out.substr(out.size() - 5) == ".json"
                                 ? out.substr(0, out.size() - 5)
                                 : out;
    write_field_binary(base + ".u0", u0);
    write_field_binary(base + ".uT", uT);
    const StrichartzRecord rec = stri.finalize();

    json run = {
        {"grid", {{"half_length", grid.half_length}, {"n", grid.n}}},
        {"probe", {{"A", A}, {"sigma", sigma}}},
        {"horizon", T},
        {"dt", dt},
        {"nonlinearity", nl.label},
        {"mass_drift", mass_drift},
        {"boundary_mass_max", boundary},
        {"domain_ok", boundary < cfg.boundary_leak_tol},
        {"strichartz_l3_l6", rec.l3_l6},
        {"strichartz_lq_lr", rec.lq_lr},
        {"fields", {base + ".u0.bin", base + ".uT.bin"}},
    };
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot open " + out);
    f << run.dump(2) << "\n";
    f.close();

    finish_manifest(m, timer, {out, base + ".u0.bin", base + ".uT.bin"});
    std::cout << "mass drift " << format_full(mass_drift) << ", boundary mass "
              << format_full(boundary) << "\n";
    return exit_ok;
}

int cmd_campaign(const std::string& nl_path, double sigma, double lmin, double lmax, int n,
                 const std::string& source, const std::string& convention,
                 const std::string& tail, double horizon_scaled, double dt_scaled, int jobs,
                 const std::string& out) {
    Timer timer;
    RunManifest m = make_manifest("campaign", json{{"nl", nl_path},
                                                   {"sigma", sigma},
                                                   {"lmin", lmin},
                                                   {"lmax", lmax},
                                                   {"n", n},
                                                   {"source", source},
                                                   {"convention", convention},
                                                   {"tail", tail},
                                                   {"horizon-scaled", horizon_scaled},
                                                   {"dt-scaled", dt_scaled},
                                                   {"out", out}});
    const Nonlinearity nl = load_nl(nl_path, m);
    const Convention conv = convention == "full" ? Convention::full : Convention::half;

    MeasurementDataset ds;
    if (source == "exact") {
        ds = measurement_campaign_exact(nl, linspace(lmin, lmax, n), sigma, conv);
    } else if (source == "simulated") {
        CampaignConfig cfg;
        cfg.nl = nl;
        cfg.sigma = sigma;
        cfg.ell_grid = linspace(lmin, lmax, n);
        cfg.convention = conv;
        cfg.horizon_scaled = horizon_scaled;
        cfg.dt_scaled = dt_scaled;
        cfg.jobs = jobs;
        cfg.tail = tail == "none"     ? TailCorrection::none
                   : tail == "oracle" ? TailCorrection::oracle
                                      : TailCorrection::extrapolate;
        ds = measurement_campaign_simulated(cfg);
    } else {
        std::cerr << "campaign: unknown source '" << source << "'\n";
        return exit_usage;
    }
    write_dataset_csv(out, ds);
    finish_manifest(m, timer, {out});

    size_t invalid = 0;
    for (const auto& meas : ds.measurements) invalid += meas.valid ? 0 : 1;
    std::cout << ds.measurements.size() - invalid << " points written, " << invalid
              << " invalid\n";
    return exit_ok;
}

int cmd_recover(const std::string& data_path, const std::string& method, double kmin,
                double kmax, double reg, double band_limit, const std::string& exponents,
                const std::string& out) {
    Timer timer;
    RunManifest m = make_manifest("recover", json{{"data", data_path},
                                                  {"method", method},
                                                  {"kmin", kmin},
                                                  {"kmax", kmax},
                                                  {"reg", reg},
                                                  {"band-limit", band_limit},
                                                  {"exponents", exponents},
                                                  {"out", out}});
    m.input_digests[data_path] = file_digest(data_path);
    MeasurementDataset ds = read_dataset_csv(data_path);

    if (method == "poly") {
        PolyFit fit = fit_polynomial(ds, parse_list(exponents));
        json j = {{"method", "poly"},
                  {"exponents", fit.exponents},
                  {"condition_number", fit.condition_number},
                  {"residual_norm", fit.residual_norm}};
        for (Eigen::Index i = 0; i < fit.coefficients.size(); ++i) {
            j["coefficients"].push_back(
                {fit.coefficients[i].real(), fit.coefficients[i].imag()});
            j["basis_weights"].push_back(fit.basis_weights[i]);
        }
        std::ofstream f(out);
        if (!f) throw std::runtime_error("cannot open " + out);
        f << j.dump(2) << "\n";
        f.close();
        for (Eigen::Index i = 0; i < fit.coefficients.size(); ++i) {
            std::cout << "a[p=" << fit.exponents[i]
                      << "] = " << format_full(fit.coefficients[i].real());
            if (fit.coefficients[i].imag() != 0.0) {
                std::cout << " + " << format_full(fit.coefficients[i].imag()) << "i";
            }
            std::cout << "\n";
        }
        finish_manifest(m, timer, {out});
        return exit_ok;
    }

    RecoveredH rh;
    if (method == "windowed") {
        rh = deconvolve_windowed(ds, kmin, kmax, reg);
    } else if (method == "fourier") {
        rh = deconvolve_fourier(ds, band_limit, reg > 0 ? reg : 1e-12);
    } else {
        std::cerr << "recover: unknown method '" << method << "'\n";
        return exit_usage;
    }
    write_recovered_json(out, rh);
    finish_manifest(m, timer, {out});
    std::cout << "recovered H on [" << rh.table.k_lo << ", " << rh.table.k_hi
              << "], residual " << format_full(rh.residual_norm) << ", amplitude disc "
              << format_full(rh.amplitude_disc) << "\n";
    return exit_ok;
}

int cmd_check_contraction(const std::string& nl_path, double A, double sigma, double T,
                          double dt, int n_iter) {
    Timer timer;
    RunManifest m = make_manifest("check-contraction", json{{"nl", nl_path},
                                                            {"A", A},
                                                            {"sigma", sigma},
                                                            {"T", T},
                                                            {"dt", dt},
                                                            {"n-iter", n_iter}});
    const Nonlinearity nl = load_nl(nl_path, m);
    Grid2D grid = Grid2D::for_probe(sigma, T);
    const Field u0 = gaussian_field(grid, {A, sigma});
    EvolutionConfig cfg{T, dt, nl};
    PicardResult pr = picard_iterate(cfg, u0, n_iter);
    for (size_t i = 0; i < pr.distances.size(); ++i) {
        std::cout << "d" << i << " = " << format_full(pr.distances[i]);
        if (i > 0 && i - 1 < pr.ratios.size()) {
            std::cout << "   ratio = " << format_full(pr.ratios[i - 1]);
        }
        std::cout << "\n";
    }
    std::cout << (pr.contracting ? "contraction confirmed" : "NO contraction (data too large?)")
              << "\n";
    return pr.contracting ? exit_ok : exit_tolerance;
}

int cmd_born_scaling(const std::string& nl_path, double A, const std::string& sigmas,
                     const std::string& tail, double dt_scaled, double horizon_scaled,
                     int jobs, double min_slope) {
    Timer timer;
    RunManifest m = make_manifest("born-scaling", json{{"nl", nl_path},
                                                       {"A", A},
                                                       {"sigmas", sigmas},
                                                       {"tail", tail},
                                                       {"dt-scaled", dt_scaled},
                                                       {"horizon-scaled", horizon_scaled}});
    const Nonlinearity nl = load_nl(nl_path, m);
    const std::vector<double> sigma_list = parse_list(sigmas);
    const double ell = 2.0 * std::log(A);
    const Complex truth = exact_m(nl, ell, 1e-11);

    std::vector<double> xs, ys;
    for (double sigma : sigma_list) {
        CampaignConfig cfg;
        cfg.nl = nl;
        cfg.sigma = sigma;
        cfg.ell_grid = {ell};
        cfg.dt_scaled = dt_scaled;
        cfg.horizon_scaled = horizon_scaled;
        cfg.jobs = jobs;
        cfg.tail = tail == "none"          ? TailCorrection::none
                   : tail == "extrapolate" ? TailCorrection::extrapolate
                                           : TailCorrection::oracle;
        MeasurementDataset ds = measurement_campaign_simulated(cfg);
        if (!ds.measurements[0].valid) {
            std::cerr << "simulation aborted at sigma = " << sigma << "\n";
            return exit_guard;
        }
        const double gap = std::abs(ds.measurements[0].value - truth);
        std::cout << "sigma " << sigma << ": m_hat = "
                  << format_full(ds.measurements[0].value.real()) << ", |gap| = "
                  << format_full(gap) << "\n";
        xs.push_back(sigma);
        ys.push_back(gap);
    }
    const double floor = 1e-9 * std::abs(truth);
    for (double g : ys) {
        if (g < floor) {
            std::cout << "rate undefined, gap below floor\n";
            return exit_ok;
        }
    }
    const double slope = loglog_slope(xs, ys);
    std::cout << "log-log slope = " << format_full(slope) << "\n";
    return slope >= min_slope ? exit_ok : exit_tolerance;
}

int cmd_recover_end_to_end(const std::string& hidden_path, double sigma, double lmin,
                           double lmax, int n, const std::string& method,
                           const std::string& exponents, int refine, double kmin,
                           double kmax, double budget, int jobs,
                           const std::string& out) {
    Timer timer;
    RunManifest m = make_manifest("recover-end-to-end", json{{"hidden", hidden_path},
                                                             {"sigma", sigma},
                                                             {"lmin", lmin},
                                                             {"lmax", lmax},
                                                             {"n", n},
                                                             {"method", method},
                                                             {"refine", refine},
                                                             {"kmin", kmin},
                                                             {"kmax", kmax},
                                                             {"out", out}});
    const Nonlinearity hidden = load_nl(hidden_path, m);

    // Stage 1: simulated campaign against the hidden nonlinearity.
    CampaignConfig cfg;
    cfg.nl = hidden;
    cfg.sigma = sigma;
    cfg.ell_grid = linspace(lmin, lmax, n);
    cfg.jobs = jobs;
    MeasurementDataset data = measurement_campaign_simulated(cfg);

    // Stage 2: recovery sees only the dataset (plus the campaign operator
    // for candidate refinement); the hidden spec is not consulted again
    // until scoring.
    json report;
    Nonlinearity recovered;
    if (method == "poly") {
        CampaignConfig psim = cfg;
        psim.nl = Nonlinearity{};
        PolyFit fit =
            recover_polynomial_iterative(data, psim, parse_list(exponents), refine, 0.75);
        std::vector<PowerTerm> terms;
        for (size_t i = 0; i < fit.exponents.size(); ++i) {
            terms.push_back({fit.coefficients[static_cast<Eigen::Index>(i)],
                             fit.exponents[i]});
        }
        recovered = polynomial_nl(terms);
        for (size_t i = 0; i < fit.exponents.size(); ++i) {
            report["coefficients"].push_back(
                {fit.coefficients[static_cast<Eigen::Index>(i)].real(),
                 fit.coefficients[static_cast<Eigen::Index>(i)].imag()});
            report["exponents"].push_back(fit.exponents[i]);
        }
    } else {
        CampaignConfig sim = cfg;
        sim.nl = Nonlinearity{};  // replaced per candidate inside the loop
        IterativeRecovery rec = recover_iterative(data, sim, kmin, kmax, -1.0, refine, 0.75);
        recovered = rec.nl;
        report["refinements"] = rec.refinements;
        report["update_l2"] = rec.update_l2;
        report["residual_norm"] = rec.estimate.residual_norm;
        report["amplitude_disc"] = rec.estimate.amplitude_disc;
    }

    // Stage 3: score against the hidden truth on the amplitude window.
    const double lam_lo = std::exp(-kmax) * 1.1, lam_hi = std::exp(-kmin) * 0.5;
    double worst = 0.0, worst_lambda = 0.0;
    for (int i = 0; i <= 60; ++i) {
        const double lam = lam_lo + (lam_hi - lam_lo) * i / 60.0;
        const Complex truth = hidden.h(lam);
        const double scale = std::max(std::abs(truth), 1e-12);
        const double rel = std::abs(recovered.h(lam) - truth) / scale;
        if (rel > worst) {
            worst = rel;
            worst_lambda = lam;
        }
    }
    report["scored_lambda_window"] = {lam_lo, lam_hi};
    report["worst_rel_error"] = worst;
    report["worst_at_lambda"] = worst_lambda;
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot open " + out);
    f << report.dump(2) << "\n";
    f.close();
    finish_manifest(m, timer, {out});

    std::cout << "worst relative h error " << format_full(worst) << " at lambda = "
              << format_full(worst_lambda) << " (budget " << budget << ")\n";
    return worst <= budget ? exit_ok : exit_tolerance;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nlsinv: scattering-based recovery of NLS nonlinearities"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config merged under explicit flags");
    int jobs = 2;
    app.add_option("--jobs", jobs, "worker pool size for campaigns");

    // weight-table
    auto* wt = app.add_subcommand("weight-table", "tabulate the superlevel weight w(k)");
    double wt_kmin = 0.0, wt_kmax = 5.0;
    int wt_n = 101;
    std::string wt_out = "weight.csv";
    wt->add_option("--kmin", wt_kmin);
    wt->add_option("--kmax", wt_kmax);
    wt->add_option("--n", wt_n);
    wt->add_option("--out", wt_out);

    // laplace-table
    auto* lt = app.add_subcommand("laplace-table", "tabulate W on a vertical line");
    double lt_line = 1.75, lt_ximax = 100.0;
    int lt_n = 401;
    std::string lt_out = "laplace.csv";
    lt->add_option("--sigma-line", lt_line);
    lt->add_option("--ximax", lt_ximax);
    lt->add_option("--n", lt_n);
    lt->add_option("--out", lt_out);

    // verify-identity
    auto* vi = app.add_subcommand("verify-identity",
                                  "layer-cake vs direct space-time integral");
    std::string vi_nl;
    double vi_A = 1.0, vi_sigma = 1.0, vi_tol = 1e-6;
    vi->add_option("--nl", vi_nl)->required();
    vi->add_option("--A", vi_A);
    vi->add_option("--sigma", vi_sigma);
    vi->add_option("--tol", vi_tol);

    // simulate
    auto* si = app.add_subcommand("simulate", "split-step evolution of a Gaussian probe");
    std::string si_nl, si_out = "run.json";
    double si_A = 0.1, si_sigma = 1.0, si_T = 8.0, si_dt = 0.02, si_L = 0.0;
    int si_N = 0;
    si->add_option("--nl", si_nl)->required();
    si->add_option("--A", si_A);
    si->add_option("--sigma", si_sigma);
    si->add_option("--T", si_T);
    si->add_option("--dt", si_dt);
    si->add_option("--L", si_L);
    si->add_option("--N", si_N);
    si->add_option("--out", si_out);

    // campaign
    auto* ca = app.add_subcommand("campaign", "measurement sweep over ell = 2 ln A");
    std::string ca_nl, ca_source = "simulated", ca_conv = "half", ca_tail = "extrapolate",
                ca_out = "campaign.csv";
    double ca_sigma = 0.5, ca_lmin = -3.0, ca_lmax = 0.0, ca_hs = 16.0, ca_dts = 0.04;
    int ca_n = 40;
    ca->add_option("--nl", ca_nl)->required();
    ca->add_option("--sigma", ca_sigma);
    ca->add_option("--lmin", ca_lmin);
    ca->add_option("--lmax", ca_lmax);
    ca->add_option("--n", ca_n);
    ca->add_option("--source", ca_source);
    ca->add_option("--convention", ca_conv);
    ca->add_option("--tail", ca_tail);
    ca->add_option("--horizon-scaled", ca_hs);
    ca->add_option("--dt-scaled", ca_dts);
    ca->add_option("--out", ca_out);

    // recover
    auto* re = app.add_subcommand("recover", "invert a measurement dataset");
    std::string re_data, re_method = "windowed", re_exponents = "2,4", re_out = "recovered.json";
    double re_kmin = 0.0, re_kmax = 3.0, re_reg = -1.0, re_band = 8.0;
    re->add_option("--data", re_data)->required();
    re->add_option("--method", re_method);
    re->add_option("--kmin", re_kmin);
    re->add_option("--kmax", re_kmax);
    re->add_option("--reg", re_reg);
    re->add_option("--band-limit", re_band);
    re->add_option("--exponents", re_exponents);
    re->add_option("--out", re_out);

    // check-contraction
    auto* cc = app.add_subcommand("check-contraction", "Picard iteration diagnostics");
    std::string cc_nl;
    double cc_A = 0.05, cc_sigma = 1.0, cc_T = 6.0, cc_dt = 0.05;
    int cc_iter = 5;
    cc->add_option("--nl", cc_nl)->required();
    cc->add_option("--A", cc_A);
    cc->add_option("--sigma", cc_sigma);
    cc->add_option("--T", cc_T);
    cc->add_option("--dt", cc_dt);
    cc->add_option("--n-iter", cc_iter);

    // born-scaling
    auto* bs = app.add_subcommand("born-scaling", "sigma-rate of the Born extraction");
    std::string bs_nl, bs_sigmas = "0.8,0.4,0.2", bs_tail = "extrapolate";
    double bs_A = 0.3, bs_dts = 0.02, bs_hs = 16.0, bs_min_slope = 1.6;
    bs->add_option("--nl", bs_nl)->required();
    bs->add_option("--A", bs_A);
    bs->add_option("--sigmas", bs_sigmas);
    bs->add_option("--tail", bs_tail);
    bs->add_option("--dt-scaled", bs_dts);
    bs->add_option("--horizon-scaled", bs_hs);
    bs->add_option("--min-slope", bs_min_slope);

    // recover-end-to-end
    auto* ee = app.add_subcommand("recover-end-to-end",
                                  "hidden-truth campaign, recovery, and scoring");
    std::string ee_hidden, ee_method = "windowed", ee_exponents = "2,4",
                ee_out = "e2e_report.json";
    double ee_sigma = 0.5, ee_lmin = -3.0, ee_lmax = 0.0, ee_kmin = 0.0, ee_kmax = 3.4,
           ee_budget = 0.05;
    int ee_n = 40, ee_refine = 1;
    ee->add_option("--hidden", ee_hidden)->required();
    ee->add_option("--sigma", ee_sigma);
    ee->add_option("--lmin", ee_lmin);
    ee->add_option("--lmax", ee_lmax);
    ee->add_option("--n", ee_n);
    ee->add_option("--method", ee_method);
    ee->add_option("--exponents", ee_exponents);
    ee->add_option("--refine", ee_refine);
    ee->add_option("--kmin", ee_kmin);
    ee->add_option("--kmax", ee_kmax);
    ee->add_option("--budget", ee_budget);
    ee->add_option("--out", ee_out);

    try {
        std::vector<std::string> args = merge_config_args(argc, argv);
        std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    }

    jobs = jobs_from_env(jobs);

    try {
        for (CLI::App* sub : app.get_subcommands()) {
            const std::string& name = sub->get_name();
            if (name == "weight-table") {
                return cmd_weight_table(wt_kmin, wt_kmax, wt_n, wt_out);
            } else if (name == "laplace-table") {
                return cmd_laplace_table(lt_line, lt_ximax, lt_n, lt_out);
            } else if (name == "verify-identity") {
                return cmd_verify_identity(vi_nl, vi_A, vi_sigma, vi_tol);
            } else if (name == "simulate") {
                return cmd_simulate(si_nl, si_A, si_sigma, si_T, si_dt, si_L, si_N, si_out);
            } else if (name == "campaign") {
                return cmd_campaign(ca_nl, ca_sigma, ca_lmin, ca_lmax, ca_n, ca_source,
                                    ca_conv, ca_tail, ca_hs, ca_dts, jobs, ca_out);
            } else if (name == "recover") {
                return cmd_recover(re_data, re_method, re_kmin, re_kmax, re_reg, re_band,
                                   re_exponents, re_out);
            } else if (name == "check-contraction") {
                return cmd_check_contraction(cc_nl, cc_A, cc_sigma, cc_T, cc_dt, cc_iter);
            } else if (name == "born-scaling") {
                return cmd_born_scaling(bs_nl, bs_A, bs_sigmas, bs_tail, bs_dts, bs_hs, jobs,
                                        bs_min_slope);
            } else if (name == "recover-end-to-end") {
                return cmd_recover_end_to_end(ee_hidden, ee_sigma, ee_lmin, ee_lmax, ee_n,
                                              ee_method, ee_exponents, ee_refine, ee_kmin,
                                              ee_kmax, ee_budget, jobs, ee_out);
            }
        }
    } catch (const BlowupError& e) {
        std::cerr << "simulation guard: " << e.what() << "\n";
        return exit_guard;
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    }
    return exit_usage;
}
