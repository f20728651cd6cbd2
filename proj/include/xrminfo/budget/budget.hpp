#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xrminfo/core/image.hpp"
#include "xrminfo/metrics/histogram.hpp"
#include "xrminfo/metrics/normalize.hpp"

namespace xrminfo::budget {

enum class Stage { Raw, Denoise, Align, Sparse, Dose, Recon };

std::string_view stage_name(Stage s) noexcept;
Stage parse_stage(std::string_view name);

struct StageEntropy {
    Stage stage = Stage::Raw;
    double entropy = 0.0; // bits
    std::string convention_id;
};

struct InformationBudget {
    std::vector<StageEntropy> stages;
    std::vector<double> deltas; // deltas[i] = H[i+1] - H[i]

    double total_change() const;
};

/// Needs at least two stages sharing one convention id.
InformationBudget compute_budget(std::vector<StageEntropy> stages);

enum class OperationClass { Denoise, Align, Sparse, Dose };
inline constexpr std::size_t kOperationClasses = 4;

std::string_view class_name(OperationClass c) noexcept;

struct ClassMagnitude {
    double median = 0.0;
    double min = 0.0;
    double max = 0.0;
};

/// Median, min and max of |values|. ParamError when empty.
ClassMagnitude summarize_magnitudes(std::span<const double> deltas);

struct HierarchyResult {
    std::array<double, kOperationClasses> magnitudes{}; // indexed by OperationClass
    bool satisfied = false;
    bool tie = false;
    std::vector<OperationClass> ordering; // ascending magnitude, stable
};

/// Evaluates |dH_denoise| < |dH_align| < |dH_sparse| < |dH_dose|. Every class
/// must be present and finite.
HierarchyResult check_hierarchy(std::span<const std::optional<double>, kOperationClasses> magnitudes);
HierarchyResult check_hierarchy(const std::array<double, kOperationClasses> &magnitudes);

struct RankedCandidate {
    std::size_t index = 0;
    double mutual_information = 0.0;
};

/// Candidates ordered by descending I(candidate; reference), ties by index.
/// Reference and candidates are each normalized with `norm` first.
std::vector<RankedCandidate> mi_rank(const Image2D &reference, std::span<const Image2D> candidates,
                                     const metrics::NormalizationSpec &norm = {},
                                     const metrics::HistogramSpec &hist = {});

/// Otsu threshold over a 256-bin histogram of a normalized image. Returns the
/// upper edge (t + 1) / 256 of the last bin of the lower class; the lowest
/// maximizing t wins ties.
double otsu_threshold(const Image2D &image);

/// Index t of the lower class's last bin maximizing between-class variance.
std::size_t otsu_bin(std::span<const double> histogram);

struct TaskRecord {
    std::size_t slice_id = 0;
    double entropy = 0.0;     // of the reconstruction, bits
    double mi_vs_truth = 0.0; // bits
    double kl_vs_truth = 0.0; // symmetric, bits
    double roi_error = 0.0;   // |mean recon - mean truth| over the ROI, input units
};

struct TaskPair {
    std::size_t slice_id = 0;
    Image2D reconstruction;
    Image2D ground_truth;
};

struct TaskValidation {
    std::vector<TaskRecord> records;
    std::vector<std::size_t> skipped; // slice ids with an empty ROI
    double corr_entropy = 0.0;
    double corr_mi = 0.0;
    double corr_kl = 0.0;
};

/// Per pair: bounds fitted on the ground truth normalize both images; the
/// ROI is every analyzed pixel whose normalized truth lies strictly above the
/// truth's Otsu threshold. Pairs with an empty ROI are skipped. Needs at
/// least 3 usable pairs. A correlation is NaN when either series is constant.
TaskValidation task_validate(std::span<const TaskPair> pairs, const metrics::NormalizationSpec &norm = {},
                             const metrics::HistogramSpec &hist = {});

} // namespace xrminfo::budget
