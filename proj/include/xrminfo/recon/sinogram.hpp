#pragma once

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "xrminfo/core/image.hpp"

namespace xrminfo::recon {

/// Parallel-beam sinogram stored detectors x angles, row-major.
struct Sinogram {
    std::size_t detectors = 0;
    std::vector<double> angles; // radians, strictly increasing
    std::vector<double> values;

    std::size_t angle_count() const noexcept { return angles.size(); }
    double &at(std::size_t detector, std::size_t angle) { return values[detector * angles.size() + angle]; }
    double at(std::size_t detector, std::size_t angle) const { return values[detector * angles.size() + angle]; }
    std::vector<double> profile(std::size_t angle) const;
    void validate() const;

    /// Sinogram viewed as an image (rows = detectors, cols = angles).
    Image2D as_image() const;
};

/// `count` angles uniformly covering [start, end).
std::vector<double> uniform_angles(std::size_t count, double start = 0.0, double end = std::numbers::pi);

/// Averages `band_height` rows centred on `band_center_row` of each
/// projection into one detector profile; profiles become angle columns.
Sinogram build_sinogram(std::span<const Image2D> stack, std::size_t band_center_row, std::size_t band_height,
                        double arc_start = 0.0, double arc_end = std::numbers::pi);

/// Keeps the listed angle columns (in the given order).
Sinogram select_angles(const Sinogram &s, std::span<const std::size_t> columns);

} // namespace xrminfo::recon
