#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "xrminfo/core/image.hpp"

namespace xrminfo::metrics {

/// Uniform binning of [0,1] plus the smoothing constant used by MI and KL.
struct HistogramSpec {
    std::size_t bins = 256;
    double epsilon = 1e-12;

    void validate() const;
    bool operator==(const HistogramSpec &) const = default;
};

/// Bin of a value in [0,1]; the last bin includes its right edge.
std::size_t bin_index(double value, std::size_t bins);

class ProbabilityHistogram {
public:
    /// Validates nonnegativity and unit total (within 1e-9).
    ProbabilityHistogram(std::vector<double> mass, HistogramSpec spec);

    std::span<const double> mass() const noexcept { return mass_; }
    const HistogramSpec &spec() const noexcept { return spec_; }
    std::size_t bins() const noexcept { return mass_.size(); }
    double operator[](std::size_t b) const { return mass_[b]; }

private:
    std::vector<double> mass_;
    HistogramSpec spec_;
};

/// B x B table; the first axis indexes the first image.
class JointHistogram {
public:
    JointHistogram(std::vector<double> mass, HistogramSpec spec);

    std::span<const double> mass() const noexcept { return mass_; }
    const HistogramSpec &spec() const noexcept { return spec_; }
    std::size_t bins() const noexcept { return spec_.bins; }
    double operator()(std::size_t x, std::size_t y) const { return mass_[x * spec_.bins + y]; }

    ProbabilityHistogram first_marginal() const;
    ProbabilityHistogram second_marginal() const;
    JointHistogram transposed() const;

private:
    std::vector<double> mass_;
    HistogramSpec spec_;
};

/// Integer bin counts accumulated over any number of images. Pooling through
/// counts makes incremental and single-pass pooling agree exactly.
class HistogramCounter {
public:
    explicit HistogramCounter(HistogramSpec spec = {});

    void add(const Image2D &image);
    void add(const HistogramCounter &other);

    std::span<const std::uint64_t> counts() const noexcept { return counts_; }
    std::uint64_t total() const noexcept { return total_; }
    ProbabilityHistogram to_histogram() const;

private:
    HistogramSpec spec_;
    std::vector<std::uint64_t> counts_;
    std::uint64_t total_ = 0;
};

ProbabilityHistogram histogram(const Image2D &image, const HistogramSpec &spec = {});

/// Histogram of the analyzed pixels of all images pooled together.
ProbabilityHistogram pooled_histogram(std::span<const Image2D> images, const HistogramSpec &spec = {});

/// Co-located pixel pairs over the intersection of both masks.
JointHistogram joint_histogram(const Image2D &x, const Image2D &y, const HistogramSpec &spec = {});

} // namespace xrminfo::metrics
