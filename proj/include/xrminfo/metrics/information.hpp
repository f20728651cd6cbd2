#pragma once

#include <span>
#include <vector>

#include "xrminfo/metrics/histogram.hpp"

namespace xrminfo::metrics {

/// Shannon entropy in bits over the strictly positive bins. No smoothing.
double entropy(const ProbabilityHistogram &h);

/// (p + eps) / sum(p + eps)
std::vector<double> smooth(std::span<const double> mass, double epsilon);

/// Mutual information in bits. The joint table is eps-smoothed and both
/// marginals are taken from the smoothed table.
double mutual_information(const JointHistogram &joint);

/// Directed divergence D(p || q) in bits after smoothing p and q separately.
double kl_divergence(const ProbabilityHistogram &p, const ProbabilityHistogram &q);

struct KlReport {
    double bits = 0.0;
    // Mass of p lying in bins where q is empty, i.e. where the smoothed q is
    // nothing but epsilon.
    double epsilon_dominated_mass = 0.0;
    bool tail_dominated = false; // epsilon_dominated_mass > 0.1
};

KlReport kl_report(const ProbabilityHistogram &p, const ProbabilityHistogram &q);

double symmetric_kl(const ProbabilityHistogram &p, const ProbabilityHistogram &q);

// Image-level conveniences. Inputs must already be normalized to [0,1].
double entropy(const Image2D &image, const HistogramSpec &spec = {});
double mutual_information(const Image2D &x, const Image2D &y, const HistogramSpec &spec = {});
double kl_divergence(const Image2D &p, const Image2D &q, const HistogramSpec &spec = {});

} // namespace xrminfo::metrics
