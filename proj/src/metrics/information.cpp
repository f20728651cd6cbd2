#include "xrminfo/metrics/information.hpp"

#include <cmath>

#include "xrminfo/core/error.hpp"

namespace xrminfo::metrics {

double entropy(const ProbabilityHistogram &h) {
    double H = 0.0;
    for (double p : h.mass()) {
        if (p > 0.0) H -= p * std::log2(p);
    }
    return H;
}

std::vector<double> smooth(std::span<const double> mass, double epsilon) {
    std::vector<double> out(mass.size());
    double total = 0.0;
    for (std::size_t i = 0; i < mass.size(); ++i) {
        out[i] = mass[i] + epsilon;
        total += out[i];
    }
    for (double &m : out) m /= total;
    return out;
}

double mutual_information(const JointHistogram &joint) {
    const std::size_t b = joint.bins();
    const auto q = smooth(joint.mass(), joint.spec().epsilon);
    std::vector<double> px(b, 0.0), py(b, 0.0);
    for (std::size_t i = 0; i < b; ++i) {
        for (std::size_t j = 0; j < b; ++j) {
            px[i] += q[i * b + j];
            py[j] += q[i * b + j];
        }
    }
    double mi = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
        for (std::size_t j = 0; j < b; ++j) {
            const double pxy = q[i * b + j];
            mi += pxy * std::log2(pxy / (px[i] * py[j]));
        }
    }
    return mi;
}

KlReport kl_report(const ProbabilityHistogram &p, const ProbabilityHistogram &q) {
    if (!(p.spec() == q.spec())) fail(ErrorCategory::Spec, "KL divergence between different histogram specs");
    const double eps = p.spec().epsilon;
    const auto ps = smooth(p.mass(), eps);
    const auto qs = smooth(q.mass(), eps);
    KlReport r;
    for (std::size_t b = 0; b < ps.size(); ++b) {
        r.bits += ps[b] * std::log2(ps[b] / qs[b]);
        if (q[b] == 0.0) r.epsilon_dominated_mass += p[b];
    }
    r.tail_dominated = r.epsilon_dominated_mass > 0.1;
    return r;
}

double kl_divergence(const ProbabilityHistogram &p, const ProbabilityHistogram &q) {
    return kl_report(p, q).bits;
}

double symmetric_kl(const ProbabilityHistogram &p, const ProbabilityHistogram &q) {
    return 0.5 * (kl_divergence(p, q) + kl_divergence(q, p));
}

double entropy(const Image2D &image, const HistogramSpec &spec) {
    return entropy(histogram(image, spec));
}

double mutual_information(const Image2D &x, const Image2D &y, const HistogramSpec &spec) {
    return mutual_information(joint_histogram(x, y, spec));
}

double kl_divergence(const Image2D &p, const Image2D &q, const HistogramSpec &spec) {
    return kl_divergence(histogram(p, spec), histogram(q, spec));
}

} // namespace xrminfo::metrics
