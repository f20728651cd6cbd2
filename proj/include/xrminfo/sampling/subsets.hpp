#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "xrminfo/core/image.hpp"
#include "xrminfo/metrics/histogram.hpp"
#include "xrminfo/metrics/normalize.hpp"

namespace xrminfo::sampling {

/// Chosen projection indices out of an ordered pool.
struct SubsetPlan {
    std::vector<std::size_t> pool;
    std::size_t k = 0;
    std::vector<std::size_t> chosen;
};

/// k pool elements at rounded even strides, first and last always included.
/// Requires 2 <= k <= pool size.
SubsetPlan plan_subsets(std::span<const std::size_t> pool, std::size_t k);

/// Convenience: pool = {0, ..., n-1}.
SubsetPlan plan_subsets(std::size_t n, std::size_t k);

/// Entropy of the analyzed pixels of every chosen frame pooled into one
/// histogram. `stack` is indexed by pool element. Normalization bounds are
/// fitted once over all pool frames and shared by every subset.
double concat_entropy(std::span<const Image2D> stack, const SubsetPlan &plan,
                      const metrics::NormalizationSpec &shared_norm = {},
                      const metrics::HistogramSpec &hist = {});

/// Same, with precomputed shared bounds.
double concat_entropy(std::span<const Image2D> stack, const SubsetPlan &plan,
                      const metrics::NormalizationParams &bounds,
                      const metrics::HistogramSpec &hist = {});

/// H_k ~ H1 + c ln k, ordinary least squares in ln k.
struct LogTrendFit {
    double h1 = 0.0;
    double c = 0.0;            // bits per natural-log unit of k
    double residual_rms = 0.0; // bits
};

LogTrendFit fit_log_trend(std::span<const double> ks, std::span<const double> entropies);

} // namespace xrminfo::sampling
