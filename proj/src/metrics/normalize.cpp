#include "xrminfo/metrics/normalize.hpp"

#include <algorithm>
#include <cmath>

#include "xrminfo/core/error.hpp"

namespace xrminfo::metrics {

void NormalizationSpec::validate() const {
    if (!(lo_percentile >= 0.0 && lo_percentile < hi_percentile && hi_percentile <= 100.0)) {
        fail(ErrorCategory::Param, "normalization percentiles must satisfy 0 <= lo < hi <= 100");
    }
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) fail(ErrorCategory::EmptyMask, "percentile of an empty pixel set");
    const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
    const auto k = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(k);
    auto kth = values.begin() + static_cast<std::ptrdiff_t>(k);
    std::nth_element(values.begin(), kth, values.end());
    const double below = *kth;
    if (frac == 0.0 || k + 1 >= values.size()) return below;
    const double above = *std::min_element(kth + 1, values.end());
    return below + frac * (above - below);
}

NormalizationParams fit_normalization(std::span<const Image2D> images, const NormalizationSpec &spec) {
    spec.validate();
    std::vector<double> pool;
    for (const auto &img : images) {
        const auto v = img.analyzed_values();
        pool.insert(pool.end(), v.begin(), v.end());
    }
    if (pool.empty()) fail(ErrorCategory::EmptyMask, "normalization over an empty mask");
    return {percentile(pool, spec.lo_percentile), percentile(pool, spec.hi_percentile)};
}

NormalizationParams fit_normalization(const Image2D &image, const NormalizationSpec &spec) {
    return fit_normalization(std::span<const Image2D>(&image, 1), spec);
}

Image2D apply_normalization(const Image2D &image, const NormalizationParams &params) {
    Image2D out = image;
    auto v = out.values();
    if (params.degenerate()) {
        std::fill(v.begin(), v.end(), 0.0);
        out.set_degenerate(true);
        return out;
    }
    const double range = params.hi - params.lo;
    for (double &x : v) {
        x = (std::clamp(x, params.lo, params.hi) - params.lo) / range;
    }
    out.set_degenerate(false);
    return out;
}

Image2D normalize(const Image2D &image, const NormalizationSpec &spec) {
    return apply_normalization(image, fit_normalization(image, spec));
}

} // namespace xrminfo::metrics
