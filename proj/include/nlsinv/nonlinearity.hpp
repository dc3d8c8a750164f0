#pragma once

#include <Eigen/Core>
#include <complex>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace nlsinv {

using Complex = std::complex<double>;

/// Gauge-invariant nonlinearity F(u) = h(|u|^2) u with h(0) = 0 and
/// |h'(lambda)| <= C (1 + lambda^{p/2-1}). `growth_p` is the growth
/// parameter p >= 2; `bound_constant` records C for this instance.
struct Nonlinearity {
    std::function<Complex(double)> h;
    std::function<Complex(double)> h_prime;
    double growth_p = 2.0;
    double bound_constant = 1.0;
    std::string label = "unnamed";
    bool real_valued = true;

    // Optional vectorized evaluator of h over an array of |u|^2 values;
    // built-ins provide it for the simulator's hot loops.
    std::function<Eigen::ArrayXXd(const Eigen::ArrayXXd&)> h_bulk_real;

    // Below k_min, eval_H would need h at lambda = e^{-k} beyond the
    // representable range for the instance; treated as a range error.
    double k_min = -80.0;

    // Validity window in lambda for reconstructed instances
    // (built-ins keep the full half-line).
    double valid_lambda_lo = 0.0;
    double valid_lambda_hi = std::numeric_limits<double>::infinity();

    double sobolev_index() const { return 1.0 - 2.0 / growth_p; }  // s_p
};

/// One term a |u|^p u of a generalized polynomial nonlinearity.
struct PowerTerm {
    Complex a;
    double p;
};

Nonlinearity power_law(Complex a, double p);
Nonlinearity polynomial_nl(std::vector<PowerTerm> terms);
Nonlinearity saturating_nl(Complex a = 1.0);
Nonlinearity zero_nl();

Complex eval_F(const Nonlinearity& nl, Complex u);
Complex eval_G(const Nonlinearity& nl, double lambda);        // G(l) = l h(l)
Complex eval_G_prime(const Nonlinearity& nl, double lambda);  // G' = h + l h'
Complex eval_H(const Nonlinearity& nl, double k);             // H(k) = G'(e^-k) e^-k

/// Spot check of the Definition-style bound |h'| <= C (1 + l^{p/2-1})
/// on a log grid lambda in [1e-8, 1e4]; returns the max of
/// |h'(l)| / (C (1 + l^{p/2-1})) observed (admissible iff <= 1).
double admissibility_ratio(const Nonlinearity& nl, int n_samples = 97);

/// Tabulated H(k) on an increasing grid.
struct HTable {
    Eigen::VectorXd k_grid;
    Eigen::VectorXcd values;
    double k_lo = 0.0;
    double k_hi = 0.0;

    void validate() const;  // throws std::invalid_argument
};

HTable tabulate_H(const Nonlinearity& nl, double k_lo, double k_hi, int n);

/// Inverts H(k) = G'(e^{-k}) e^{-k} on the table's window:
/// G'(lambda) = H(-ln lambda)/lambda on lambda in [e^{-k_hi}, e^{-k_lo}],
/// G by integrating G' from 0 with the forced small-lambda model
/// G'(lambda) ~ 2 h'(0) lambda below the window, h = G/lambda.
/// The result's valid_lambda window records where the table informs it.
Nonlinearity reconstruct_from_H(const HTable& table);

}  // namespace nlsinv
