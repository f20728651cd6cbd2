#include "xrminfo/metrics/histogram.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "xrminfo/core/error.hpp"

namespace xrminfo::metrics {
namespace {

void check_mass(std::span<const double> mass) {
    double total = 0.0;
    for (double m : mass) {
        if (!(m >= 0.0)) fail(ErrorCategory::Param, "histogram mass must be nonnegative");
        total += m;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        fail(ErrorCategory::Param, "histogram mass sums to " + std::to_string(total));
    }
}

} // namespace

void HistogramSpec::validate() const {
    if (bins < 2) fail(ErrorCategory::Param, "histogram needs at least 2 bins");
    if (!(epsilon > 0.0)) fail(ErrorCategory::Param, "smoothing epsilon must be positive");
}

std::size_t bin_index(double value, std::size_t bins) {
    if (!(value >= 0.0 && value <= 1.0)) {
        fail(ErrorCategory::Range, "value " + std::to_string(value) + " outside [0,1]");
    }
    const auto b = static_cast<std::size_t>(value * static_cast<double>(bins));
    return b < bins ? b : bins - 1;
}

ProbabilityHistogram::ProbabilityHistogram(std::vector<double> mass, HistogramSpec spec)
    : mass_(std::move(mass)), spec_(spec) {
    spec_.validate();
    if (mass_.size() != spec_.bins) fail(ErrorCategory::Spec, "mass length differs from bin count");
    check_mass(mass_);
}

JointHistogram::JointHistogram(std::vector<double> mass, HistogramSpec spec)
    : mass_(std::move(mass)), spec_(spec) {
    spec_.validate();
    if (mass_.size() != spec_.bins * spec_.bins) {
        fail(ErrorCategory::Spec, "joint mass size differs from bins^2");
    }
    check_mass(mass_);
}

ProbabilityHistogram JointHistogram::first_marginal() const {
    const std::size_t b = spec_.bins;
    std::vector<double> m(b, 0.0);
    for (std::size_t i = 0; i < b; ++i) {
        for (std::size_t j = 0; j < b; ++j) m[i] += mass_[i * b + j];
    }
    return {std::move(m), spec_};
}

ProbabilityHistogram JointHistogram::second_marginal() const {
    const std::size_t b = spec_.bins;
    std::vector<double> m(b, 0.0);
    for (std::size_t i = 0; i < b; ++i) {
        for (std::size_t j = 0; j < b; ++j) m[j] += mass_[i * b + j];
    }
    return {std::move(m), spec_};
}

JointHistogram JointHistogram::transposed() const {
    const std::size_t b = spec_.bins;
    std::vector<double> t(b * b);
    for (std::size_t i = 0; i < b; ++i) {
        for (std::size_t j = 0; j < b; ++j) t[j * b + i] = mass_[i * b + j];
    }
    return {std::move(t), spec_};
}

HistogramCounter::HistogramCounter(HistogramSpec spec) : spec_(spec), counts_(spec.bins, 0) {
    spec_.validate();
}

void HistogramCounter::add(const Image2D &image) {
    const auto v = image.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!image.analyzed(i)) continue;
        ++counts_[bin_index(v[i], spec_.bins)];
        ++total_;
    }
}

void HistogramCounter::add(const HistogramCounter &other) {
    if (!(other.spec_ == spec_)) fail(ErrorCategory::Spec, "histogram specs differ");
    for (std::size_t b = 0; b < counts_.size(); ++b) counts_[b] += other.counts_[b];
    total_ += other.total_;
}

ProbabilityHistogram HistogramCounter::to_histogram() const {
    if (total_ == 0) fail(ErrorCategory::EmptyMask, "histogram over an empty mask");
    std::vector<double> mass(counts_.size());
    const double n = static_cast<double>(total_);
    for (std::size_t b = 0; b < counts_.size(); ++b) mass[b] = static_cast<double>(counts_[b]) / n;
    return {std::move(mass), spec_};
}

ProbabilityHistogram histogram(const Image2D &image, const HistogramSpec &spec) {
    HistogramCounter counter(spec);
    counter.add(image);
    return counter.to_histogram();
}

ProbabilityHistogram pooled_histogram(std::span<const Image2D> images, const HistogramSpec &spec) {
    HistogramCounter counter(spec);
    for (const auto &img : images) counter.add(img);
    return counter.to_histogram();
}

JointHistogram joint_histogram(const Image2D &x, const Image2D &y, const HistogramSpec &spec) {
    spec.validate();
    if (!x.same_shape(y)) fail(ErrorCategory::Shape, "joint histogram of differently shaped images");
    const std::size_t b = spec.bins;
    std::vector<std::uint64_t> counts(b * b, 0);
    std::uint64_t total = 0;
    const auto xv = x.values();
    const auto yv = y.values();
    for (std::size_t i = 0; i < xv.size(); ++i) {
        if (!x.analyzed(i) || !y.analyzed(i)) continue;
        ++counts[bin_index(xv[i], b) * b + bin_index(yv[i], b)];
        ++total;
    }
    if (total == 0) fail(ErrorCategory::EmptyMask, "mask intersection is empty");
    std::vector<double> mass(counts.size());
    const double n = static_cast<double>(total);
    for (std::size_t k = 0; k < counts.size(); ++k) mass[k] = static_cast<double>(counts[k]) / n;
    return {std::move(mass), spec};
}

} // namespace xrminfo::metrics
