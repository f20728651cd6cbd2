#pragma once

#include <span>
#include <vector>

#include "xrminfo/core/image.hpp"

namespace xrminfo::metrics {

/// Percentile clipping window applied before linear rescaling to [0,1].
/// Percentiles are given in percent.
struct NormalizationSpec {
    double lo_percentile = 1.0;
    double hi_percentile = 99.0;

    void validate() const;
};

/// Concrete clip bounds obtained from a NormalizationSpec over a pixel pool.
struct NormalizationParams {
    double lo = 0.0;
    double hi = 1.0;

    bool degenerate() const noexcept { return !(hi > lo); }
};

// Linear interpolation between order statistics, position q/100*(n-1).
// Takes the values by copy since it partially reorders them.
double percentile(std::vector<double> values, double q);

/// Clip bounds over the analyzed pixels of every image in `images` (pooled).
NormalizationParams fit_normalization(std::span<const Image2D> images, const NormalizationSpec &spec = {});
NormalizationParams fit_normalization(const Image2D &image, const NormalizationSpec &spec = {});

/// Clip every pixel to [lo,hi] and map affinely onto [0,1]. Degenerate
/// bounds map everything to 0 and set the degeneracy flag. Mask preserved.
Image2D apply_normalization(const Image2D &image, const NormalizationParams &params);

/// Per-image normalization: fit over this image's mask, then apply.
Image2D normalize(const Image2D &image, const NormalizationSpec &spec = {});

} // namespace xrminfo::metrics
