#include "nlsinv/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace nlsinv {

namespace {

bool all_real(const std::vector<PowerTerm>& terms) {
    return std::all_of(terms.begin(), terms.end(),
                       [](const PowerTerm& t) { return t.a.imag() == 0.0; });
}

std::string poly_label(const std::vector<PowerTerm>& terms) {
    if (terms.empty()) return "zero";
    std::string s = "poly";
    for (const auto& t : terms) {
        s += "_p" + std::to_string(t.p);
    }
    return s;
}

}  // namespace

Nonlinearity power_law(Complex a, double p) {
    return polynomial_nl({{a, p}});
}

Nonlinearity polynomial_nl(std::vector<PowerTerm> terms) {
    for (const auto& t : terms) {
        if (t.p < 2.0) {
            throw std::invalid_argument("polynomial_nl: exponents must satisfy p >= 2");
        }
    }
    Nonlinearity nl;
    nl.real_valued = all_real(terms);
    nl.label = poly_label(terms);
    nl.growth_p = 2.0;
    double c = 0.0;
    for (const auto& t : terms) {
        nl.growth_p = std::max(nl.growth_p, t.p);
        c += std::abs(t.a) * (t.p / 2.0);
    }
    nl.bound_constant = c * 1.125 + 1e-12;  // margin over sum |a| p/2
    auto shared = std::make_shared<std::vector<PowerTerm>>(std::move(terms));
    nl.h = [shared](double l) {
        Complex v = 0.0;
        for (const auto& t : *shared) v += t.a * std::pow(l, t.p / 2.0);
        return v;
    };
    if (nl.real_valued) {
        nl.h_bulk_real = [shared](const Eigen::ArrayXXd& lam) {
            Eigen::ArrayXXd v = Eigen::ArrayXXd::Zero(lam.rows(), lam.cols());
            for (const auto& t : *shared) {
                if (t.p == 2.0) {
                    v += t.a.real() * lam;
                } else if (t.p == 4.0) {
                    v += t.a.real() * lam.square();
                } else if (t.p == 6.0) {
                    v += t.a.real() * lam.cube();
                } else {
                    v += t.a.real() * lam.pow(t.p / 2.0);
                }
            }
            return v;
        };
    }
    nl.h_prime = [shared](double l) {
        Complex v = 0.0;
        for (const auto& t : *shared) {
            const double q = t.p / 2.0 - 1.0;
            // lambda^q at lambda=0: 0 for q>0, 1 for q==0.
            const double lp = (q == 0.0) ? 1.0 : (l == 0.0 ? 0.0 : std::pow(l, q));
            v += t.a * (t.p / 2.0) * lp;
        }
        return v;
    };
    return nl;
}

Nonlinearity saturating_nl(Complex a) {
    Nonlinearity nl;
    nl.h = [a](double l) { return a * (-std::expm1(-l)); };
    nl.h_prime = [a](double l) { return a * std::exp(-l); };
    if (a.imag() == 0.0) {
        const double ar = a.real();
        nl.h_bulk_real = [ar](const Eigen::ArrayXXd& lam) {
            return (ar * (1.0 - (-lam).exp())).eval();
        };
    }
    nl.growth_p = 2.0;
    nl.bound_constant = std::abs(a) + 1e-12;
    nl.label = "saturating";
    nl.real_valued = a.imag() == 0.0;
    return nl;
}

Nonlinearity zero_nl() { return polynomial_nl({}); }

Complex eval_F(const Nonlinearity& nl, Complex u) {
    const double l = std::norm(u);
    if (l == 0.0) return 0.0;
    return nl.h(l) * u;
}

Complex eval_G(const Nonlinearity& nl, double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("eval_G: lambda must be >= 0");
    if (lambda == 0.0) return 0.0;
    return lambda * nl.h(lambda);
}

Complex eval_G_prime(const Nonlinearity& nl, double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("eval_G_prime: lambda must be >= 0");
    if (lambda == 0.0) return 0.0;
    return nl.h(lambda) + lambda * nl.h_prime(lambda);
}

Complex eval_H(const Nonlinearity& nl, double k) {
    if (k < nl.k_min) {
        throw std::range_error("eval_H: k below configured k_min (lambda = e^{-k} overflows)");
    }
    const double lambda = std::exp(-k);
    return eval_G_prime(nl, lambda) * lambda;
}

double admissibility_ratio(const Nonlinearity& nl, int n_samples) {
    double worst = 0.0;
    const double lo = std::log(1e-8), hi = std::log(1e4);
    for (int i = 0; i < n_samples; ++i) {
        const double l = std::exp(lo + (hi - lo) * i / (n_samples - 1));
        const double bound = nl.bound_constant * (1.0 + std::pow(l, nl.growth_p / 2.0 - 1.0));
        worst = std::max(worst, std::abs(nl.h_prime(l)) / bound);
    }
    return worst;
}

void HTable::validate() const {
    if (k_grid.size() != values.size()) {
        throw std::invalid_argument("HTable: grid/value size mismatch");
    }
    for (Eigen::Index i = 0; i + 1 < k_grid.size(); ++i) {
        if (!(k_grid[i] < k_grid[i + 1])) {
            throw std::invalid_argument("HTable: k grid must be strictly increasing");
        }
    }
    for (Eigen::Index i = 0; i < k_grid.size(); ++i) {
        if (!std::isfinite(k_grid[i]) || !std::isfinite(values[i].real()) ||
            !std::isfinite(values[i].imag())) {
            throw std::invalid_argument("HTable: non-finite entry");
        }
    }
}

HTable tabulate_H(const Nonlinearity& nl, double k_lo, double k_hi, int n) {
    if (n < 2 || !(k_lo < k_hi)) {
        throw std::invalid_argument("tabulate_H: need k_lo < k_hi and n >= 2");
    }
    HTable t;
    t.k_grid = Eigen::VectorXd::LinSpaced(n, k_lo, k_hi);
    t.values.resize(n);
    for (int i = 0; i < n; ++i) t.values[i] = eval_H(nl, t.k_grid[i]);
    t.k_lo = k_lo;
    t.k_hi = k_hi;
    return t;
}

namespace {

// Piecewise-linear complex interpolant with custom extensions.
struct LinearTable {
    Eigen::VectorXd x;   // increasing
    Eigen::VectorXcd y;

    Complex operator()(double q) const {
        const Eigen::Index n = x.size();
        if (q <= x[0]) return y[0];
        if (q >= x[n - 1]) return y[n - 1];
        // binary search for the panel
        Eigen::Index lo = 0, hi = n - 1;
        while (hi - lo > 1) {
            const Eigen::Index mid = (lo + hi) / 2;
            (x[mid] <= q ? lo : hi) = mid;
        }
        const double t = (q - x[lo]) / (x[lo + 1] - x[lo]);
        return (1.0 - t) * y[lo] + t * y[lo + 1];
    }
};

}  // namespace

Nonlinearity reconstruct_from_H(const HTable& table) {
    table.validate();
    const Eigen::Index n = table.k_grid.size();
    if (n < 2) throw std::invalid_argument("reconstruct_from_H: window needs >= 2 grid points");

    // lambda nodes in increasing order (reverse of the k grid).
    Eigen::VectorXd lambda(n);
    Eigen::VectorXcd gprime(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index j = n - 1 - i;
        lambda[i] = std::exp(-table.k_grid[j]);
        gprime[i] = table.values[j] / lambda[i];  // G'(l) = H(-ln l)/l
    }

    // Small-lambda model G'(l) ~ c1 l + c2 l^2 fitted on the smallest
    // nodes; c1 = 2 h'(0) is the forced leading asymptotic, the second
    // term absorbs the next order so c1 stays unbiased. The fit spans a
    // fixed lambda ratio: a thinner sliver cannot separate c1 from c2
    // once the table carries any noise.
    Eigen::Index n_fit = 2;
    while (n_fit < n && lambda[n_fit - 1] <= 3.0 * lambda[0]) ++n_fit;
    n_fit = std::max<Eigen::Index>(n_fit, std::min<Eigen::Index>(3, n));
    double s22 = 0, s23 = 0, s33 = 0;
    Complex r1 = 0, r2 = 0;
    for (Eigen::Index i = 0; i < n_fit; ++i) {
        const double l = lambda[i];
        s22 += l * l;
        s23 += l * l * l;
        s33 += l * l * l * l;
        r1 += gprime[i] * l;
        r2 += gprime[i] * l * l;
    }
    const double det = s22 * s33 - s23 * s23;
    Complex c1 = 0.0, c2 = 0.0;
    if (det > 1e-300) {
        c1 = (s33 * r1 - s23 * r2) / det;
        c2 = (s22 * r2 - s23 * r1) / det;
    } else if (s22 > 0.0) {
        c1 = r1 / s22;
    }
    const Complex h_prime_zero = 0.5 * c1;

    // Cumulative G by trapezoid, seeded with int_0^{l_min} (c1 t + c2 t^2) dt.
    Eigen::VectorXcd g(n);
    g[0] = 0.5 * c1 * lambda[0] * lambda[0] + c2 * lambda[0] * lambda[0] * lambda[0] / 3.0;
    for (Eigen::Index i = 1; i < n; ++i) {
        g[i] = g[i - 1] + 0.5 * (gprime[i - 1] + gprime[i]) * (lambda[i] - lambda[i - 1]);
    }

    auto gp_tab = std::make_shared<LinearTable>(LinearTable{lambda, gprime});
    auto g_tab = std::make_shared<LinearTable>(LinearTable{lambda, g});
    const double l_min = lambda[0], l_max = lambda[n - 1];

    Nonlinearity out;
    out.h = [=](double l) -> Complex {
        if (l <= 0.0) return 0.0;
        if (l < l_min) return h_prime_zero * l;
        return (*g_tab)(l) / l;
    };
    out.h_prime = [=](double l) -> Complex {
        if (l <= 0.0) return h_prime_zero;
        if (l < l_min) return h_prime_zero;
        const Complex h_here = (*g_tab)(l) / l;
        return ((*gp_tab)(l)-h_here) / l;  // from G' = h + l h'
    };
    out.growth_p = 2.0;
    double c = std::abs(h_prime_zero);
    for (Eigen::Index i = 0; i < n; ++i) c = std::max(c, std::abs(gprime[i]) / lambda[i]);
    out.bound_constant = 2.0 * c + 1e-12;
    out.label = "reconstructed";
    out.real_valued = false;
    out.valid_lambda_lo = l_min;
    out.valid_lambda_hi = l_max;
    return out;
}

}  // namespace nlsinv
