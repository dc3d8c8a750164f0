#pragma once

#include <Eigen/Core>
#include <complex>

namespace nlsinv {

using Complex = std::complex<double>;

/// In-place radix-2 FFT of a contiguous length-n buffer (n a power of
/// two). Forward uses the e^{-i 2 pi jk/n} kernel; inverse includes the
/// 1/n normalization, so inverse(forward(x)) == x to roundoff.
void fft_inplace(Complex* data, std::size_t n, bool inverse);

/// 2D transform of a square Eigen array (columns then rows).
void fft2(Eigen::ArrayXXcd& a, bool inverse);

}  // namespace nlsinv
