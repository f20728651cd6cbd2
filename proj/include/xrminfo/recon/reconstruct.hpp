#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "xrminfo/core/image.hpp"
#include "xrminfo/metrics/histogram.hpp"
#include "xrminfo/metrics/normalize.hpp"
#include "xrminfo/recon/sinogram.hpp"

namespace xrminfo::recon {

enum class ReconMethod { Fbp, Sart };

struct ReconConfig {
    ReconMethod method = ReconMethod::Fbp;
    std::size_t grid_size = 256;
    std::size_t sart_iterations = 5;
    double sart_relaxation = 0.2;
    bool circular_mask = true;

    void validate() const;
};

// Geometry shared by all projectors: pixel (r, c) of an N x N grid sits at
// x = c - (N-1)/2, y = (N-1)/2 - r; it projects to t = x cos(a) + y sin(a)
// and detector position t + (D-1)/2.

/// Forward projection of a square image onto `angles`, detector count equal
/// to the image side. Each unit pixel casts its exact trapezoidal shadow
/// onto unit detector bins, so every angle conserves the mass of pixels
/// that land on the detector.
Sinogram radon_forward(const Image2D &image, std::span<const double> angles);

/// Same projector, explicit detector count and optional support mask.
Sinogram project(const Image2D &image, std::span<const double> angles, std::size_t detectors);

/// Exact adjoint of project: each pixel gathers its footprint-weighted bins.
Image2D backproject(const Sinogram &s, std::size_t grid_size);

/// Ramp-filtered backprojection scaled by pi / (2 * angles).
Image2D fbp(const Sinogram &s, const ReconConfig &cfg);

/// SART from a uniform start; one iteration sweeps all angles in ascending
/// order. When `residual_history` is given it receives ||A x - b|| before
/// the first sweep and after each sweep.
Image2D sart(const Sinogram &s, const ReconConfig &cfg, std::vector<double> *residual_history = nullptr);

Image2D reconstruct(const Sinogram &s, const ReconConfig &cfg);

/// ||project(image) - s||_2
double data_residual(const Image2D &image, const Sinogram &s);

/// Pixels inside the inscribed circle of an N x N grid.
std::vector<std::uint8_t> circular_support(std::size_t grid_size);

struct ReconComparison {
    double entropy_a = 0.0;
    double entropy_b = 0.0;
    double mutual_information = 0.0;
    double symmetric_kl = 0.0;
};

/// Normalizes each reconstruction with the standard pipeline and compares
/// their grey-level statistics.
ReconComparison recon_compare(const Image2D &a, const Image2D &b, const metrics::NormalizationSpec &norm = {},
                              const metrics::HistogramSpec &hist = {});

} // namespace xrminfo::recon
