#pragma once

#include <cstddef>
#include <vector>

#include "xrminfo/core/image.hpp"

namespace xrminfo::operators {

/// Translation in pixels; positive dy moves content down, positive dx right.
struct Shift2D {
    double dy = 0.0;
    double dx = 0.0;

    Shift2D operator-() const noexcept { return {-dy, -dx}; }
};

/// out(r, c) = in(r - dy, c - dx), bilinear. Samples falling outside the
/// image take `fill`. A mask is carried along: an output pixel stays
/// analyzed only if every contributing source pixel was inside and analyzed.
Image2D translate(const Image2D &image, Shift2D shift, double fill = 0.0);

/// Tukey (cosine-taper) window of length n; `fraction` of the samples lie
/// in the two cosine lobes.
std::vector<double> cosine_taper(std::size_t n, double fraction);

/// Phase cross-correlation with upsampled-DFT subpixel refinement. Returns
/// the shift that maps `moving` onto `reference`, i.e.
/// translate(moving, result) ~= reference.
Shift2D estimate_shift(const Image2D &reference, const Image2D &moving, std::size_t upsample = 100);

struct Registration {
    Image2D registered;
    Shift2D shift;
};

/// estimate_shift followed by translate(moving, shift, 0).
Registration register_to(const Image2D &reference, const Image2D &moving, std::size_t upsample = 100);

} // namespace xrminfo::operators
