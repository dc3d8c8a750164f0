#include "nlsinv/fft.hpp"

#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace nlsinv {

namespace {

// Per-stage contiguous twiddle tables keep the butterfly inner loop on
// sequential loads; data is touched as raw (re, im) pairs.
struct Plan {
    std::size_t n = 0;
    std::vector<std::size_t> bitrev;
    std::vector<std::vector<double>> tw_re, tw_im;  // per stage, length = half

    explicit Plan(std::size_t n_) : n(n_) {
        bitrev.resize(n);
        std::size_t bits = 0;
        while ((std::size_t{1} << bits) < n) ++bits;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < bits; ++b) r = (r << 1) | ((i >> b) & 1);
            bitrev[i] = r;
        }
        for (std::size_t len = 2; len <= n; len <<= 1) {
            const std::size_t half = len >> 1;
            std::vector<double> re(half), im(half);
            for (std::size_t j = 0; j < half; ++j) {
                const double ang = -2.0 * std::numbers::pi * static_cast<double>(j) /
                                   static_cast<double>(len);
                re[j] = std::cos(ang);
                im[j] = std::sin(ang);
            }
            tw_re.push_back(std::move(re));
            tw_im.push_back(std::move(im));
        }
    }
};

const Plan& plan_for(std::size_t n) {
    static std::map<std::size_t, Plan> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, Plan(n)).first;
    return it->second;
}

template <bool Inverse>
void fft_kernel(double* d, const Plan& plan) {
    const std::size_t n = plan.n;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = plan.bitrev[i];
        if (i < j) {
            std::swap(d[2 * i], d[2 * j]);
            std::swap(d[2 * i + 1], d[2 * j + 1]);
        }
    }

    std::size_t stage = 0;
    for (std::size_t len = 2; len <= n; len <<= 1, ++stage) {
        const std::size_t half = len >> 1;
        const double* wr = plan.tw_re[stage].data();
        const double* wi = plan.tw_im[stage].data();
        for (std::size_t base = 0; base < n; base += len) {
            double* a = d + 2 * base;
            double* b = d + 2 * (base + half);
            for (std::size_t j = 0; j < half; ++j) {
                const double br = b[2 * j], bi = b[2 * j + 1];
                const double tw_i = Inverse ? -wi[j] : wi[j];
                const double tr = br * wr[j] - bi * tw_i;
                const double ti = br * tw_i + bi * wr[j];
                const double ar = a[2 * j], ai = a[2 * j + 1];
                a[2 * j] = ar + tr;
                a[2 * j + 1] = ai + ti;
                b[2 * j] = ar - tr;
                b[2 * j + 1] = ai - ti;
            }
        }
    }

    if (Inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < 2 * n; ++i) d[i] *= inv;
    }
}

void transpose_square(Eigen::ArrayXXcd& a) {
    constexpr Eigen::Index tile = 32;
    const Eigen::Index n = a.rows();
    for (Eigen::Index bi = 0; bi < n; bi += tile) {
        const Eigen::Index ei = std::min(bi + tile, n);
        // diagonal tile
        for (Eigen::Index i = bi; i < ei; ++i) {
            for (Eigen::Index j = i + 1; j < ei; ++j) std::swap(a(i, j), a(j, i));
        }
        for (Eigen::Index bj = bi + tile; bj < n; bj += tile) {
            const Eigen::Index ej = std::min(bj + tile, n);
            for (Eigen::Index i = bi; i < ei; ++i) {
                for (Eigen::Index j = bj; j < ej; ++j) std::swap(a(i, j), a(j, i));
            }
        }
    }
}

}  // namespace

void fft_inplace(Complex* data, std::size_t n, bool inverse) {
    if (n == 0 || (n & (n - 1)) != 0) {
        throw std::invalid_argument("fft_inplace: length must be a power of two");
    }
    if (n == 1) return;
    const Plan& plan = plan_for(n);
    double* d = reinterpret_cast<double*>(data);
    if (inverse) {
        fft_kernel<true>(d, plan);
    } else {
        fft_kernel<false>(d, plan);
    }
}

void fft2(Eigen::ArrayXXcd& a, bool inverse) {
    if (a.rows() != a.cols()) throw std::invalid_argument("fft2: array must be square");
    const std::size_t n = static_cast<std::size_t>(a.rows());
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
        fft_inplace(a.col(c).data(), n, inverse);
    }
    transpose_square(a);
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
        fft_inplace(a.col(c).data(), n, inverse);
    }
    transpose_square(a);
}

}  // namespace nlsinv
