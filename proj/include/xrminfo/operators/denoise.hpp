#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

#include "xrminfo/core/image.hpp"

namespace xrminfo::operators {

enum class DenoiseMethod { Gaussian, Nlm, Tv };

std::string_view method_name(DenoiseMethod m) noexcept;
DenoiseMethod parse_method(std::string_view name);

struct DenoiseParams {
    DenoiseMethod method = DenoiseMethod::Gaussian;
    double gaussian_sigma = 1.0;    // pixels
    std::size_t nlm_patch = 5;      // odd side length
    std::size_t nlm_search = 11;    // odd side length
    std::optional<double> nlm_h;    // unset: 0.8 * estimate_noise_sigma(input)
    // The distance offset always uses estimate_noise_sigma(input).
    double tv_weight = 0.1;
    std::size_t tv_iterations = 100;

    void validate() const;
};

/// Applies the selected denoiser, clips to [0,1] and keeps the mask.
Image2D denoise(const Image2D &image, const DenoiseParams &params);

// Half-sample symmetric reflection (d c b a | a b c d | d c b a).
std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) noexcept;

/// Separable Gaussian convolution, kernel radius floor(4 sigma + 0.5).
Image2D gaussian_filter(const Image2D &image, double sigma);

/// Pixelwise non-local means; weights exp(-d^2/h^2) with d^2 the mean squared
/// difference between patches less the expected noise term 2 sigma^2
/// (floored at 0). h == 0 keeps only patches with d^2 == 0.
Image2D nlm_filter(const Image2D &image, std::size_t patch, std::size_t search, double h, double sigma = 0.0);

/// ROF denoising via Chambolle's dual projection, fixed iteration count.
Image2D tv_chambolle(const Image2D &image, double weight, std::size_t iterations);

/// Robust noise level: MAD of the 3x3 Laplacian-difference residual.
double estimate_noise_sigma(const Image2D &image);

} // namespace xrminfo::operators
