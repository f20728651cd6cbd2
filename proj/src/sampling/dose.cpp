#include "xrminfo/sampling/dose.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "xrminfo/core/error.hpp"
#include "xrminfo/core/random.hpp"

namespace xrminfo::sampling {
namespace {

constexpr std::uint32_t kPoissonStream = 0;
constexpr std::uint32_t kDetectorStream = 1;

double checked_variance(double lambda, double sigma) {
    const double v = lambda + sigma * sigma;
    if (!(v > 0.0)) fail(ErrorCategory::Domain, "lambda + sigma^2 must be positive");
    return v;
}

} // namespace

void DoseModel::validate() const {
    if (!(fraction > 0.0 && fraction <= 1.0)) fail(ErrorCategory::Param, "dose fraction must lie in (0,1]");
    if (!(full_dose_counts > 0.0)) fail(ErrorCategory::Param, "full-dose counts must be positive");
    if (!(detector_sigma >= 0.0)) fail(ErrorCategory::Param, "detector sigma must be nonnegative");
}

std::uint64_t poisson_inverse(double mean, double u) {
    if (!(mean > 0.0)) return 0;
    if (mean < 30.0) {
        std::uint64_t k = 0;
        double p = std::exp(-mean);
        double cdf = p;
        while (u > cdf && p > 0.0) {
            ++k;
            p *= mean / static_cast<double>(k);
            cdf += p;
        }
        return k;
    }
    // Start from the mode; exp(-mean) underflows for large means.
    const double mode = std::floor(mean);
    const double p_mode = std::exp(-mean + mode * std::log(mean) - std::lgamma(mode + 1.0));
    double lower = 0.0;
    double p = p_mode;
    for (double j = mode; j > 0.0; j -= 1.0) {
        p *= j / mean;
        lower += p;
        if (p < p_mode * 1e-17) break;
    }
    double cdf = lower + p_mode;
    auto k = static_cast<std::uint64_t>(mode);
    p = p_mode;
    if (u <= cdf) {
        while (k > 0 && cdf - p >= u) {
            cdf -= p;
            p *= static_cast<double>(k) / mean;
            --k;
        }
        return k;
    }
    while (u > cdf && p > 0.0) {
        ++k;
        p *= mean / static_cast<double>(k);
        cdf += p;
    }
    return k;
}

Image2D simulate_dose(const Image2D &clean, const DoseModel &model) {
    model.validate();
    const CounterRng rng(model.seed);
    Image2D out = clean;
    auto v = out.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double mean = model.mean_counts(std::max(v[i], 0.0));
        double counts;
        if (mean > kPoissonNormalThreshold) {
            counts = std::max(0.0, std::round(mean + std::sqrt(mean) * rng.normal(i, kPoissonStream)));
        } else {
            counts = static_cast<double>(poisson_inverse(mean, rng.uniform(i, kPoissonStream)));
        }
        const double detector = model.detector_sigma > 0.0
                                    ? model.detector_sigma * rng.normal(i, kDetectorStream)
                                    : 0.0;
        v[i] = counts + detector;
    }
    out.set_degenerate(false);
    return out;
}

double dose_entropy_proxy(double lambda, double sigma) {
    return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * checked_variance(lambda, sigma));
}

double dose_sensitivity(double lambda, double sigma) {
    return 1.0 / (2.0 * checked_variance(lambda, sigma));
}

} // namespace xrminfo::sampling
