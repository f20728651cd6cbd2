#include "xrminfo/metrics/similarity.hpp"

#include <cmath>

#include "xrminfo/core/error.hpp"

namespace xrminfo::metrics {

double ssim_global(const Image2D &x, const Image2D &y) {
    if (!x.same_shape(y)) fail(ErrorCategory::Shape, "SSIM of differently shaped images");
    const auto xv = x.values();
    const auto yv = y.values();
    double n = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < xv.size(); ++i) {
        if (!x.analyzed(i) || !y.analyzed(i)) continue;
        n += 1.0;
        sx += xv[i];
        sy += yv[i];
    }
    if (n == 0.0) fail(ErrorCategory::EmptyMask, "SSIM over an empty mask");
    const double mx = sx / n, my = sy / n;
    double vxx = 0.0, vyy = 0.0, vxy = 0.0;
    for (std::size_t i = 0; i < xv.size(); ++i) {
        if (!x.analyzed(i) || !y.analyzed(i)) continue;
        const double dx = xv[i] - mx, dy = yv[i] - my;
        vxx += dx * dx;
        vyy += dy * dy;
        vxy += dx * dy;
    }
    vxx /= n;
    vyy /= n;
    vxy /= n;
    constexpr double c1 = 0.01 * 0.01;
    constexpr double c2 = 0.03 * 0.03;
    return ((2.0 * mx * my + c1) * (2.0 * vxy + c2)) / ((mx * mx + my * my + c1) * (vxx + vyy + c2));
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) fail(ErrorCategory::Param, "pearson inputs differ in length");
    if (a.size() < 3) fail(ErrorCategory::Param, "pearson needs at least 3 samples");
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (saa == 0.0 || sbb == 0.0) fail(ErrorCategory::DegenerateInput, "pearson input has zero variance");
    return sab / std::sqrt(saa * sbb);
}

} // namespace xrminfo::metrics
