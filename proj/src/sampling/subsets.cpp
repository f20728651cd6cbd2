#include "xrminfo/sampling/subsets.hpp"

#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "xrminfo/core/error.hpp"
#include "xrminfo/metrics/information.hpp"

namespace xrminfo::sampling {

SubsetPlan plan_subsets(std::span<const std::size_t> pool, std::size_t k) {
    const std::size_t n = pool.size();
    if (k < 2 || k > n) {
        fail(ErrorCategory::Param, "subset size " + std::to_string(k) + " outside [2, " + std::to_string(n) + "]");
    }
    SubsetPlan plan{{pool.begin(), pool.end()}, k, {}};
    plan.chosen.reserve(k);
    const double stride = static_cast<double>(n - 1) / static_cast<double>(k - 1);
    for (std::size_t i = 0; i < k; ++i) {
        const auto pos = static_cast<std::size_t>(std::llround(stride * static_cast<double>(i)));
        plan.chosen.push_back(pool[pos]);
    }
    return plan;
}

SubsetPlan plan_subsets(std::size_t n, std::size_t k) {
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    return plan_subsets(pool, k);
}

double concat_entropy(std::span<const Image2D> stack, const SubsetPlan &plan,
                      const metrics::NormalizationParams &bounds, const metrics::HistogramSpec &hist) {
    metrics::HistogramCounter counter(hist);
    for (std::size_t idx : plan.chosen) {
        if (idx >= stack.size()) fail(ErrorCategory::Param, "subset index outside the stack");
        counter.add(metrics::apply_normalization(stack[idx], bounds));
    }
    return metrics::entropy(counter.to_histogram());
}

double concat_entropy(std::span<const Image2D> stack, const SubsetPlan &plan,
                      const metrics::NormalizationSpec &shared_norm, const metrics::HistogramSpec &hist) {
    std::vector<Image2D> pool_frames;
    for (std::size_t idx : plan.pool) {
        if (idx >= stack.size()) fail(ErrorCategory::Param, "pool index outside the stack");
        pool_frames.push_back(stack[idx]);
    }
    return concat_entropy(stack, plan, metrics::fit_normalization(pool_frames, shared_norm), hist);
}

LogTrendFit fit_log_trend(std::span<const double> ks, std::span<const double> entropies) {
    if (ks.size() != entropies.size()) fail(ErrorCategory::Param, "k and entropy series differ in length");
    std::set<double> distinct(ks.begin(), ks.end());
    if (distinct.size() < 3) fail(ErrorCategory::Param, "log-trend fit needs at least 3 distinct k");
    const double n = static_cast<double>(ks.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (!(ks[i] > 0.0)) fail(ErrorCategory::Param, "k must be positive");
        mx += std::log(ks[i]);
        my += entropies[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const double dx = std::log(ks[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (entropies[i] - my);
    }
    LogTrendFit fit;
    fit.c = sxy / sxx;
    fit.h1 = my - fit.c * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const double r = entropies[i] - (fit.h1 + fit.c * std::log(ks[i]));
        ss += r * r;
    }
    fit.residual_rms = std::sqrt(ss / n);
    return fit;
}

} // namespace xrminfo::sampling
