#pragma once

#include <cstdint>

#include "xrminfo/core/image.hpp"

namespace xrminfo::sampling {

/// Poisson-Gaussian acquisition model: counts ~ Poisson(fraction * N0 * value)
/// plus Normal(0, sigma^2) detector noise.
struct DoseModel {
    double fraction = 1.0;          // in (0,1]
    double full_dose_counts = 1000; // N0, mean photons per pixel at value 1
    double detector_sigma = 5.0;    // counts
    std::uint64_t seed = 0;

    void validate() const;
    double mean_counts(double value) const noexcept { return fraction * full_dose_counts * value; }
};

// Means at or below this use exact inversion; above, a rounded normal.
inline constexpr double kPoissonNormalThreshold = 1000.0;

/// Poisson quantile at probability u in (0,1) for means up to the threshold.
std::uint64_t poisson_inverse(double mean, double u);

/// Simulated counts (not normalized). Pixel i draws its Poisson and Gaussian
/// variates from counter (seed, i), so results do not depend on evaluation
/// order. Clean values are clamped to >= 0 before scaling.
Image2D simulate_dose(const Image2D &clean, const DoseModel &model);

/// 0.5 ln(2 pi e (lambda + sigma^2)): a scaling proxy for differential
/// entropy, never comparable to histogram entropies.
double dose_entropy_proxy(double lambda, double sigma);

/// d/dlambda of the proxy: 1 / (2 (lambda + sigma^2)).
double dose_sensitivity(double lambda, double sigma);

} // namespace xrminfo::sampling
