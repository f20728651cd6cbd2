#include "xrminfo/budget/budget.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "xrminfo/core/error.hpp"
#include "xrminfo/metrics/information.hpp"
#include "xrminfo/metrics/similarity.hpp"

namespace xrminfo::budget {

std::string_view stage_name(Stage s) noexcept {
    switch (s) {
    case Stage::Raw: return "raw";
    case Stage::Denoise: return "denoise";
    case Stage::Align: return "align";
    case Stage::Sparse: return "sparse";
    case Stage::Dose: return "dose";
    case Stage::Recon: return "recon";
    }
    return "unknown";
}

Stage parse_stage(std::string_view name) {
    for (Stage s : {Stage::Raw, Stage::Denoise, Stage::Align, Stage::Sparse, Stage::Dose, Stage::Recon}) {
        if (stage_name(s) == name) return s;
    }
    fail(ErrorCategory::Param, "unknown stage '" + std::string(name) + "'");
}

double InformationBudget::total_change() const {
    double sum = 0.0;
    for (double d : deltas) sum += d;
    return sum;
}

InformationBudget compute_budget(std::vector<StageEntropy> stages) {
    if (stages.size() < 2) fail(ErrorCategory::Param, "a budget needs at least two stages");
    for (const auto &s : stages) {
        if (s.convention_id != stages.front().convention_id) {
            fail(ErrorCategory::Convention, "stage '" + std::string(stage_name(s.stage)) + "' uses convention '" +
                                                s.convention_id + "', expected '" + stages.front().convention_id +
                                                "'");
        }
        if (!(s.entropy >= 0.0)) fail(ErrorCategory::Param, "stage entropy must be nonnegative");
    }
    InformationBudget b;
    b.deltas.reserve(stages.size() - 1);
    for (std::size_t i = 1; i < stages.size(); ++i) b.deltas.push_back(stages[i].entropy - stages[i - 1].entropy);
    b.stages = std::move(stages);
    return b;
}

std::string_view class_name(OperationClass c) noexcept {
    switch (c) {
    case OperationClass::Denoise: return "denoise";
    case OperationClass::Align: return "align";
    case OperationClass::Sparse: return "sparse";
    case OperationClass::Dose: return "dose";
    }
    return "unknown";
}

ClassMagnitude summarize_magnitudes(std::span<const double> deltas) {
    if (deltas.empty()) fail(ErrorCategory::Param, "no deltas to summarize");
    std::vector<double> m(deltas.size());
    std::transform(deltas.begin(), deltas.end(), m.begin(), [](double d) { return std::abs(d); });
    std::sort(m.begin(), m.end());
    const std::size_t n = m.size();
    const double median = n % 2 ? m[n / 2] : 0.5 * (m[n / 2 - 1] + m[n / 2]);
    return {median, m.front(), m.back()};
}

HierarchyResult check_hierarchy(std::span<const std::optional<double>, kOperationClasses> magnitudes) {
    std::array<double, kOperationClasses> m{};
    for (std::size_t i = 0; i < kOperationClasses; ++i) {
        const auto name = std::string(class_name(static_cast<OperationClass>(i)));
        if (!magnitudes[i]) fail(ErrorCategory::Param, "missing magnitude for class '" + name + "'");
        if (!std::isfinite(*magnitudes[i])) fail(ErrorCategory::Param, "non-finite magnitude for class '" + name + "'");
        m[i] = std::abs(*magnitudes[i]);
    }
    HierarchyResult r;
    r.magnitudes = m;
    r.satisfied = true;
    for (std::size_t i = 0; i + 1 < kOperationClasses; ++i) {
        if (!(m[i] < m[i + 1])) r.satisfied = false;
    }
    std::array<std::size_t, kOperationClasses> idx{};
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return m[a] < m[b]; });
    for (std::size_t i = 0; i < kOperationClasses; ++i) {
        r.ordering.push_back(static_cast<OperationClass>(idx[i]));
        if (i > 0 && m[idx[i]] == m[idx[i - 1]]) r.tie = true;
    }
    if (r.tie) r.satisfied = false;
    return r;
}

HierarchyResult check_hierarchy(const std::array<double, kOperationClasses> &magnitudes) {
    std::array<std::optional<double>, kOperationClasses> m;
    for (std::size_t i = 0; i < kOperationClasses; ++i) m[i] = magnitudes[i];
    return check_hierarchy(std::span<const std::optional<double>, kOperationClasses>(m));
}

std::vector<RankedCandidate> mi_rank(const Image2D &reference, std::span<const Image2D> candidates,
                                     const metrics::NormalizationSpec &norm, const metrics::HistogramSpec &hist) {
    const Image2D ref = metrics::normalize(reference, norm);
    std::vector<RankedCandidate> out;
    out.reserve(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!candidates[i].same_shape(reference)) fail(ErrorCategory::Shape, "candidate shape differs from reference");
        const Image2D c = metrics::normalize(candidates[i], norm);
        out.push_back({i, metrics::mutual_information(c, ref, hist)});
    }
    std::stable_sort(out.begin(), out.end(), [](const RankedCandidate &a, const RankedCandidate &b) {
        return a.mutual_information > b.mutual_information;
    });
    return out;
}

std::size_t otsu_bin(std::span<const double> histogram) {
    const std::size_t bins = histogram.size();
    std::size_t occupied = 0;
    double total = 0.0, moment = 0.0;
    for (std::size_t i = 0; i < bins; ++i) {
        if (histogram[i] < 0.0) fail(ErrorCategory::Param, "negative histogram entry");
        if (histogram[i] > 0.0) ++occupied;
        total += histogram[i];
        moment += static_cast<double>(i) * histogram[i];
    }
    if (occupied < 2) fail(ErrorCategory::DegenerateInput, "Otsu threshold of a constant image");
    double w0 = 0.0, m0 = 0.0, best = -1.0;
    std::size_t best_t = 0;
    for (std::size_t t = 0; t + 1 < bins; ++t) {
        w0 += histogram[t];
        m0 += static_cast<double>(t) * histogram[t];
        const double w1 = total - w0;
        if (w0 <= 0.0 || w1 <= 0.0) continue;
        const double diff = m0 / w0 - (moment - m0) / w1;
        const double between = w0 * w1 * diff * diff;
        if (between > best) {
            best = between;
            best_t = t;
        }
    }
    return best_t;
}

double otsu_threshold(const Image2D &image) {
    const auto h = metrics::histogram(image, {256, 1e-12});
    return static_cast<double>(otsu_bin(h.mass()) + 1) / 256.0;
}

TaskValidation task_validate(std::span<const TaskPair> pairs, const metrics::NormalizationSpec &norm,
                             const metrics::HistogramSpec &hist) {
    TaskValidation out;
    for (const auto &p : pairs) {
        if (!p.reconstruction.same_shape(p.ground_truth)) {
            fail(ErrorCategory::Shape, "reconstruction and ground truth differ in shape");
        }
        const auto bounds = metrics::fit_normalization(p.ground_truth, norm);
        const Image2D truth = metrics::apply_normalization(p.ground_truth, bounds);
        Image2D recon = metrics::apply_normalization(p.reconstruction, bounds);
        if (truth.degenerate()) {
            out.skipped.push_back(p.slice_id);
            continue;
        }
        const double threshold = otsu_threshold(truth);
        const auto both = intersect_masks(p.reconstruction, p.ground_truth);
        double sum_r = 0.0, sum_t = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < both.size(); ++i) {
            if (!both[i] || !(truth.values()[i] > threshold)) continue;
            sum_r += p.reconstruction.values()[i];
            sum_t += p.ground_truth.values()[i];
            ++count;
        }
        if (count == 0) {
            out.skipped.push_back(p.slice_id);
            continue;
        }
        TaskRecord rec;
        rec.slice_id = p.slice_id;
        rec.roi_error = std::abs(sum_r - sum_t) / static_cast<double>(count);
        const auto hr = metrics::histogram(recon, hist);
        rec.entropy = metrics::entropy(hr);
        rec.mi_vs_truth = metrics::mutual_information(recon, truth, hist);
        rec.kl_vs_truth = metrics::symmetric_kl(hr, metrics::histogram(truth, hist));
        out.records.push_back(rec);
    }
    if (out.records.size() < 3) fail(ErrorCategory::Param, "task validation needs at least 3 pairs with a nonempty ROI");
    std::vector<double> err, h, mi, kl;
    for (const auto &r : out.records) {
        err.push_back(r.roi_error);
        h.push_back(r.entropy);
        mi.push_back(r.mi_vs_truth);
        kl.push_back(r.kl_vs_truth);
    }
    // A constant column (e.g. perfect reconstructions) leaves the
    // correlation undefined; report NaN rather than failing the table.
    const auto corr = [&](const std::vector<double> &v) {
        try {
            return metrics::pearson(err, v);
        } catch (const Error &e) {
            if (e.category() != ErrorCategory::DegenerateInput) throw;
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    out.corr_entropy = corr(h);
    out.corr_mi = corr(mi);
    out.corr_kl = corr(kl);
    return out;
}

} // namespace xrminfo::budget
