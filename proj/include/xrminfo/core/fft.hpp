#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace xrminfo {

using Complex = std::complex<double>;

enum class FftDirection { Forward, Inverse };

// Thin wrappers over FFTW. Inverse transforms are scaled by 1/N so that
// inverse(forward(x)) == x.
std::vector<Complex> fft1d(std::span<const Complex> in, FftDirection dir);
std::vector<Complex> fft2d(std::span<const Complex> in, std::size_t rows, std::size_t cols,
                           FftDirection dir);

} // namespace xrminfo
