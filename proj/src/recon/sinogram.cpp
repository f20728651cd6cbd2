#include "xrminfo/recon/sinogram.hpp"

#include <cmath>
#include <string>

#include "xrminfo/core/error.hpp"

namespace xrminfo::recon {

std::vector<double> Sinogram::profile(std::size_t angle) const {
    std::vector<double> p(detectors);
    for (std::size_t d = 0; d < detectors; ++d) p[d] = at(d, angle);
    return p;
}

void Sinogram::validate() const {
    if (values.size() != detectors * angles.size()) fail(ErrorCategory::Shape, "sinogram size mismatch");
    for (std::size_t a = 1; a < angles.size(); ++a) {
        if (!(angles[a] > angles[a - 1])) fail(ErrorCategory::Param, "sinogram angles must be strictly increasing");
    }
    for (double v : values) {
        if (!std::isfinite(v)) fail(ErrorCategory::Range, "sinogram contains non-finite values");
    }
}

Image2D Sinogram::as_image() const { return Image2D(detectors, angles.size(), values); }

std::vector<double> uniform_angles(std::size_t count, double start, double end) {
    std::vector<double> a(count);
    for (std::size_t i = 0; i < count; ++i) {
        a[i] = start + (end - start) * static_cast<double>(i) / static_cast<double>(count);
    }
    return a;
}

Sinogram build_sinogram(std::span<const Image2D> stack, std::size_t band_center_row, std::size_t band_height,
                        double arc_start, double arc_end) {
    if (stack.empty()) fail(ErrorCategory::Param, "empty projection stack");
    if (band_height == 0) fail(ErrorCategory::Param, "band height must be positive");
    const std::size_t width = stack.front().width();
    const std::size_t height = stack.front().height();
    if (band_height / 2 > band_center_row || band_center_row - band_height / 2 + band_height > height) {
        fail(ErrorCategory::Param, "band of " + std::to_string(band_height) + " rows at row " +
                                       std::to_string(band_center_row) + " exceeds projection height " +
                                       std::to_string(height));
    }
    const std::size_t first_row = band_center_row - band_height / 2;
    Sinogram s;
    s.detectors = width;
    s.angles = uniform_angles(stack.size(), arc_start, arc_end);
    s.values.assign(width * stack.size(), 0.0);
    for (std::size_t a = 0; a < stack.size(); ++a) {
        const Image2D &p = stack[a];
        if (p.width() != width || p.height() != height) fail(ErrorCategory::Shape, "projections differ in shape");
        for (std::size_t d = 0; d < width; ++d) {
            double acc = 0.0;
            for (std::size_t r = first_row; r < first_row + band_height; ++r) acc += p(r, d);
            s.at(d, a) = acc / static_cast<double>(band_height);
        }
    }
    return s;
}

Sinogram select_angles(const Sinogram &s, std::span<const std::size_t> columns) {
    Sinogram out;
    out.detectors = s.detectors;
    for (std::size_t c : columns) {
        if (c >= s.angle_count()) fail(ErrorCategory::Param, "angle column out of range");
        out.angles.push_back(s.angles[c]);
    }
    out.values.resize(s.detectors * columns.size());
    for (std::size_t d = 0; d < s.detectors; ++d) {
        for (std::size_t j = 0; j < columns.size(); ++j) out.values[d * columns.size() + j] = s.at(d, columns[j]);
    }
    return out;
}

} // namespace xrminfo::recon
