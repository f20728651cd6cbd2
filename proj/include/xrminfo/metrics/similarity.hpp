#pragma once

#include <span>

#include "xrminfo/core/image.hpp"

namespace xrminfo::metrics {

/// Single global SSIM over the pixels analyzed in both images, dynamic
/// range 1, C1 = 0.01^2, C2 = 0.03^2.
double ssim_global(const Image2D &x, const Image2D &y);

/// Sample Pearson correlation. Needs equal lengths >= 3 and nonzero variance.
double pearson(std::span<const double> a, std::span<const double> b);

} // namespace xrminfo::metrics
