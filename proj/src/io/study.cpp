#include "xrminfo/io/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "xrminfo/budget/budget.hpp"
#include "xrminfo/core/error.hpp"
#include "xrminfo/core/random.hpp"
#include "xrminfo/io/phantom.hpp"
#include "xrminfo/metrics/information.hpp"
#include "xrminfo/metrics/normalize.hpp"
#include "xrminfo/metrics/similarity.hpp"
#include "xrminfo/operators/denoise.hpp"
#include "xrminfo/operators/registration.hpp"
#include "xrminfo/recon/reconstruct.hpp"
#include "xrminfo/sampling/dose.hpp"
#include "xrminfo/sampling/subsets.hpp"

namespace xrminfo::io {
namespace {

using nlohmann::json;
using metrics::NormalizationParams;

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

Cell real(double v) { return Cell{v}; }
Cell integer(std::int64_t v) { return Cell{v}; }
Cell text(std::string v) { return Cell{std::move(v)}; }

double parse_real(const std::string &key, const std::string &s) {
    char *end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
        fail(ErrorCategory::Param, "parameter '" + key + "' expects a number, got '" + s + "'");
    }
    return v;
}

std::int64_t parse_integer(const std::string &key, const std::string &s) {
    char *end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size()) {
        fail(ErrorCategory::Param, "parameter '" + key + "' expects an integer, got '" + s + "'");
    }
    return v;
}

class Params {
public:
    explicit Params(std::vector<std::pair<std::string, Cell>> entries) : entries_(std::move(entries)) {}

    void set(const std::string &key, const std::string &value) {
        for (auto &[k, v] : entries_) {
            if (k != key) continue;
            if (std::holds_alternative<double>(v)) v = parse_real(key, value);
            else if (std::holds_alternative<std::int64_t>(v)) v = parse_integer(key, value);
            else v = value;
            return;
        }
        fail(ErrorCategory::Param, "unknown parameter '" + key + "'");
    }

    double real(std::string_view key) const {
        const Cell &c = find(key);
        if (const auto *i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
        return std::get<double>(c);
    }

    std::int64_t integer(std::string_view key) const { return std::get<std::int64_t>(find(key)); }

    std::size_t count(std::string_view key, std::int64_t min = 0) const {
        const auto v = integer(key);
        if (v < min) fail(ErrorCategory::Param, "parameter '" + std::string(key) + "' must be >= " + std::to_string(min));
        return static_cast<std::size_t>(v);
    }

    double positive(std::string_view key) const {
        const double v = real(key);
        if (!(v > 0.0)) fail(ErrorCategory::Param, "parameter '" + std::string(key) + "' must be positive");
        return v;
    }

    const std::string &str(std::string_view key) const { return std::get<std::string>(find(key)); }

    std::vector<double> reals(std::string_view key) const {
        std::vector<double> out;
        std::stringstream ss(str(key));
        std::string item;
        while (std::getline(ss, item, ',')) {
            item.erase(0, item.find_first_not_of(' '));
            item.erase(item.find_last_not_of(' ') + 1);
            out.push_back(parse_real(std::string(key), item));
        }
        if (out.empty()) fail(ErrorCategory::Param, "parameter '" + std::string(key) + "' is an empty list");
        return out;
    }

    const std::vector<std::pair<std::string, Cell>> &entries() const noexcept { return entries_; }

private:
    const Cell &find(std::string_view key) const {
        for (const auto &[k, v] : entries_) {
            if (k == key) return v;
        }
        fail(ErrorCategory::Param, "undeclared parameter '" + std::string(key) + "'");
    }

    std::vector<std::pair<std::string, Cell>> entries_;
};

struct Context {
    StudyKind kind;
    const StudyConfig &cfg;
    Convention conv;
    Params params;
    Digest input;

    std::uint64_t seed() const noexcept { return cfg.seed; }
    const std::optional<DatasetConfig> &dataset() const noexcept { return cfg.dataset; }
};

void apply_mask(Image2D &img, const Convention &conv) {
    switch (conv.mask) {
    case MaskSource::None: img.clear_mask(); break;
    case MaskSource::CentralCrop: img.set_mask(central_crop_mask(img.height(), img.width(), conv.crop_fraction)); break;
    case MaskSource::File:
        if (!img.has_mask()) fail(ErrorCategory::Param, "mask source 'file' needs a dataset");
        break;
    }
}

void copy_mask(Image2D &img, const Image2D &from) {
    if (from.has_mask()) img.set_mask(*from.mask());
    else img.clear_mask();
}

NormalizationParams shared_bounds(std::span<const Image2D> images, const Convention &conv) {
    return metrics::fit_normalization(images, conv.norm);
}

/// Global scope: one set of bounds fitted over `fit_set` applied to every
/// image. Per-image scope: each image normalized on its own.
std::vector<Image2D> normalize_set(std::span<const Image2D> images, std::span<const Image2D> fit_set,
                                   const Convention &conv) {
    std::vector<Image2D> out;
    out.reserve(images.size());
    if (conv.scope == NormScope::Global) {
        const auto b = shared_bounds(fit_set, conv);
        for (const auto &img : images) out.push_back(metrics::apply_normalization(img, b));
    } else {
        for (const auto &img : images) out.push_back(metrics::normalize(img, conv.norm));
    }
    return out;
}

std::vector<Image2D> load_dataset_stack(Context &ctx) {
    auto stack = load_stack(*ctx.dataset());
    for (const auto &img : stack) ctx.input.update(img);
    return stack;
}

std::vector<Image2D> phantom_sequence(Context &ctx, std::size_t frames, double noise) {
    const auto &p = ctx.params;
    SequenceOptions so;
    so.frames = frames;
    so.step = p.real("step");
    so.noise_sigma = noise;
    so.flux_drift = p.real("flux_drift");
    auto stack = rotating_sequence(p.count("size"), ctx.seed(), so);
    for (auto &img : stack) {
        apply_mask(img, ctx.conv);
        ctx.input.update(img);
    }
    return stack;
}

std::string join_indices(std::span<const std::size_t> v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ' ';
        s += std::to_string(v[i]);
    }
    return s;
}

double kl_tail_mass(const Image2D &p, const Image2D &q, const metrics::HistogramSpec &hist) {
    return metrics::kl_report(metrics::histogram(p, hist), metrics::histogram(q, hist)).epsilon_dominated_mass;
}

// ---------------------------------------------------------------- denoise

StudyReport denoise_study(Context &ctx) {
    const auto &p = ctx.params;
    Image2D raw0;
    if (ctx.dataset()) {
        const auto stack = load_dataset_stack(ctx);
        raw0 = stack.at(p.count("image_index"));
    } else {
        raw0 = phantom_sequence(ctx, 1, p.real("noise")).front();
    }
    // The operators act on the normalized raw image.
    const Image2D raw = metrics::normalize(raw0, ctx.conv.norm);

    operators::DenoiseParams dp;
    dp.gaussian_sigma = p.real("gaussian_sigma");
    dp.nlm_patch = p.count("nlm_patch");
    dp.nlm_search = p.count("nlm_search");
    if (p.real("nlm_h") > 0.0) dp.nlm_h = p.real("nlm_h");
    dp.tv_weight = p.real("tv_weight");
    dp.tv_iterations = p.count("tv_iterations");

    std::vector<std::string> names{"raw"};
    std::vector<Image2D> outputs{raw};
    for (auto m : {operators::DenoiseMethod::Gaussian, operators::DenoiseMethod::Nlm, operators::DenoiseMethod::Tv}) {
        dp.method = m;
        names.emplace_back(operators::method_name(m));
        outputs.push_back(operators::denoise(raw, dp));
    }
    // Global scope keeps the raw image's bounds, which the outputs already
    // share; per-image scope renormalizes each output.
    if (ctx.conv.scope == NormScope::PerImage) {
        for (auto &img : outputs) img = metrics::normalize(img, ctx.conv.norm);
    }

    StudyReport r;
    r.columns = {"condition", "entropy", "kl_vs_raw", "kl_tail_mass", "ssim_vs_raw", "mi_vs_raw"};
    const Image2D &ref = outputs.front();
    const auto &hist = ctx.conv.hist;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        const Image2D &x = outputs[i];
        r.add_row({text(names[i]), real(metrics::entropy(x, hist)), real(metrics::kl_divergence(ref, x, hist)),
                   real(kl_tail_mass(ref, x, hist)), real(metrics::ssim_global(ref, x)),
                   real(metrics::mutual_information(x, ref, hist))});
    }
    return r;
}

// -------------------------------------------------------------- alignment

StudyReport alignment_study(Context &ctx) {
    const auto &p = ctx.params;
    std::vector<Image2D> original;
    std::vector<long> labels;
    if (ctx.dataset()) {
        original = load_dataset_stack(ctx);
        const auto idx = ctx.dataset()->range.indices();
        for (std::size_t i = 0; i < original.size(); ++i) {
            labels.push_back(idx.size() == original.size() ? idx[i] : static_cast<long>(i));
        }
    } else {
        original = phantom_sequence(ctx, p.count("frames", 2), p.real("noise"));
        for (std::size_t i = 0; i < original.size(); ++i) {
            labels.push_back(static_cast<long>(p.integer("first_index") + static_cast<std::int64_t>(i) * p.integer("index_step")));
        }
    }
    const std::size_t ref = p.count("reference");
    if (ref >= original.size()) fail(ErrorCategory::Param, "reference frame lies outside the sequence");
    const operators::Shift2D shift{p.real("shift_dy"), p.real("shift_dx")};
    const std::size_t upsample = p.count("upsample", 1);

    const std::size_t n = original.size();
    std::vector<Image2D> misaligned, registered;
    std::vector<operators::Shift2D> estimated, baseline;
    for (std::size_t i = 0; i < n; ++i) {
        Image2D mis = i == ref ? original[i] : operators::translate(original[i], shift, 0.0);
        copy_mask(mis, original[i]);
        auto reg = operators::register_to(original[ref], mis, upsample);
        copy_mask(reg.registered, original[i]);
        baseline.push_back(operators::estimate_shift(original[ref], original[i], upsample));
        estimated.push_back(reg.shift);
        misaligned.push_back(std::move(mis));
        registered.push_back(std::move(reg.registered));
    }
    // Global bounds come from the original window only.
    const auto norm = [&](std::span<const Image2D> set) { return normalize_set(set, original, ctx.conv); };
    const auto o = norm(original), m = norm(misaligned), g = norm(registered);
    const Image2D &reference = o[ref];

    StudyReport r;
    r.columns = {"frame", "projection_index", "condition", "entropy", "mi_vs_ref",
                 "shift_dy", "shift_dx", "baseline_dy", "baseline_dx"};
    const auto &hist = ctx.conv.hist;
    for (std::size_t i = 0; i < n; ++i) {
        const std::pair<const char *, const Image2D *> conds[3] = {{"original", &o[i]}, {"misaligned", &m[i]}, {"registered", &g[i]}};
        for (const auto &[name, img] : conds) {
            r.add_row({integer(static_cast<std::int64_t>(i)), integer(labels[i]), text(name),
                       real(metrics::entropy(*img, hist)), real(metrics::mutual_information(*img, reference, hist)),
                       real(estimated[i].dy), real(estimated[i].dx), real(baseline[i].dy), real(baseline[i].dx)});
        }
    }
    return r;
}

// ----------------------------------------------------------------- sparse

StudyReport sparse_study(Context &ctx) {
    const auto &p = ctx.params;
    const std::string &mode = p.str("mode");
    std::vector<Image2D> stack;
    if (mode == "projections") {
        stack = ctx.dataset() ? load_dataset_stack(ctx) : phantom_sequence(ctx, p.count("frames", 2), p.real("noise"));
    } else if (mode == "sinogram") {
        recon::Sinogram s;
        if (ctx.dataset()) {
            const auto proj = load_dataset_stack(ctx);
            s = recon::build_sinogram(proj, proj.front().height() / 2, p.count("band_rows", 1));
        } else {
            const Image2D slice = ellipses_phantom(p.count("size"), ctx.seed());
            ctx.input.update(slice);
            s = recon::radon_forward(slice, recon::uniform_angles(p.count("sinogram_angles", 2)));
        }
        // Each sinogram column is one profile; no spatial mask applies.
        for (std::size_t a = 0; a < s.angle_count(); ++a) stack.emplace_back(1, s.detectors, s.profile(a));
    } else {
        fail(ErrorCategory::Param, "unknown sparse mode '" + mode + "'");
    }

    NormalizationParams bounds{0.0, 1.0};
    std::vector<Image2D> used;
    if (ctx.conv.scope == NormScope::Global) {
        used = stack;
        bounds = shared_bounds(stack, ctx.conv);
    } else {
        for (const auto &img : stack) used.push_back(metrics::normalize(img, ctx.conv.norm));
    }

    std::vector<double> ks, hs;
    std::vector<std::string> chosen;
    for (double kv : p.reals("ks")) {
        if (kv != std::floor(kv) || kv < 2) fail(ErrorCategory::Param, "subset sizes must be integers >= 2");
        const auto plan = sampling::plan_subsets(stack.size(), static_cast<std::size_t>(kv));
        ks.push_back(kv);
        hs.push_back(sampling::concat_entropy(used, plan, bounds, ctx.conv.hist));
        chosen.push_back(join_indices(plan.chosen));
    }
    const auto fit = sampling::fit_log_trend(ks, hs);

    StudyReport r;
    r.columns = {"k", "entropy", "chosen", "fit_h1", "fit_c", "fit_residual_rms", "fit_prediction"};
    for (std::size_t i = 0; i < ks.size(); ++i) {
        r.add_row({integer(static_cast<std::int64_t>(ks[i])), real(hs[i]), text(chosen[i]), real(fit.h1), real(fit.c),
                   real(fit.residual_rms), real(fit.h1 + fit.c * std::log(ks[i]))});
    }
    return r;
}

// ------------------------------------------------------------------- dose

StudyReport dose_study(Context &ctx) {
    const auto &p = ctx.params;
    Image2D clean;
    if (ctx.dataset()) {
        clean = load_dataset_stack(ctx).at(p.count("image_index"));
    } else {
        const std::size_t frame = p.count("frame");
        clean = phantom_sequence(ctx, frame + 1, 0.0).back();
    }
    const auto levels = p.reals("doses");
    const double n0 = p.positive("full_dose_counts");
    const double sigma = p.real("detector_sigma");
    std::size_t full = 0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!(levels[i] > 0.0 && levels[i] <= 1.0)) fail(ErrorCategory::Param, "dose fractions must lie in (0,1]");
        if (levels[i] > levels[full]) full = i;
    }

    double clean_mean = 0.0;
    {
        const auto v = clean.analyzed_values();
        for (double x : v) clean_mean += std::max(x, 0.0);
        clean_mean /= static_cast<double>(std::max<std::size_t>(v.size(), 1));
    }

    std::vector<Image2D> ladder;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        sampling::DoseModel m{levels[i], n0, sigma, ctx.seed() + 1000 * (i + 1)};
        Image2D counts = sampling::simulate_dose(clean, m);
        copy_mask(counts, clean);
        ladder.push_back(std::move(counts));
    }
    const auto normed = normalize_set(ladder, ladder, ctx.conv);
    const Image2D &ref = normed[full];

    const std::size_t flat_size = p.count("flat_size", 2);
    const double flat_value = p.real("flat_value");
    StudyReport r;
    r.columns = {"dose", "mean_counts", "entropy", "mi_vs_full", "kl_vs_full", "kl_tail_mass",
                 "entropy_proxy", "proxy_sensitivity", "flat_variance", "model_variance"};
    const auto &hist = ctx.conv.hist;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const double lambda = levels[i] * n0 * clean_mean;
        sampling::DoseModel fm{levels[i], n0, sigma, ctx.seed() + 1000 * (i + 1) + 500};
        const Image2D flat = sampling::simulate_dose(Image2D(flat_size, flat_size, flat_value), fm);
        double mean = 0.0, var = 0.0;
        for (double v : flat.values()) mean += v;
        mean /= static_cast<double>(flat.size());
        for (double v : flat.values()) var += (v - mean) * (v - mean);
        var /= static_cast<double>(flat.size() - 1);
        const double flat_lambda = fm.mean_counts(flat_value);
        r.add_row({real(levels[i]), real(lambda), real(metrics::entropy(normed[i], hist)),
                   real(metrics::mutual_information(normed[i], ref, hist)),
                   real(metrics::kl_divergence(ref, normed[i], hist)), real(kl_tail_mass(ref, normed[i], hist)),
                   real(sampling::dose_entropy_proxy(lambda, sigma)), real(sampling::dose_sensitivity(lambda, sigma)),
                   real(var), real(flat_lambda + sigma * sigma)});
    }
    return r;
}

// ------------------------------------------------------------------ recon

double rmse_in_circle(const Image2D &a, const Image2D &b) {
    const auto support = recon::circular_support(a.width());
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!support[i]) continue;
        const double d = a.values()[i] - b.values()[i];
        s += d * d;
        ++n;
    }
    return std::sqrt(s / static_cast<double>(n));
}

StudyReport recon_study(Context &ctx) {
    const auto &p = ctx.params;
    recon::Sinogram s;
    std::optional<Image2D> truth;
    if (ctx.dataset()) {
        const auto proj = load_dataset_stack(ctx);
        s = recon::build_sinogram(proj, proj.front().height() / 2, p.count("band_rows", 1), 0.0,
                                  p.real("arc_degrees") * std::numbers::pi / 180.0);
    } else {
        const std::string &kind = p.str("phantom");
        const std::size_t size = p.count("size");
        if (kind == "ellipses") truth = ellipses_phantom(size, ctx.seed());
        else if (kind == "disk") truth = disk_phantom(size);
        else fail(ErrorCategory::Param, "recon phantom must be 'ellipses' or 'disk'");
        ctx.input.update(*truth);
        s = recon::radon_forward(*truth, recon::uniform_angles(p.count("angles", 2)));
    }

    recon::ReconConfig rc;
    rc.grid_size = s.detectors;
    rc.sart_iterations = p.count("sart_iterations", 1);
    rc.sart_relaxation = p.real("sart_relaxation");
    rc.method = recon::ReconMethod::Fbp;
    Image2D fbp = recon::reconstruct(s, rc);
    rc.method = recon::ReconMethod::Sart;
    std::vector<double> history;
    Image2D sart = recon::sart(s, rc, &history);

    const double res_fbp = recon::data_residual(fbp, s);
    const double res_sart = history.back();
    const double err_fbp = truth ? rmse_in_circle(fbp, *truth) : kMissing;
    const double err_sart = truth ? rmse_in_circle(sart, *truth) : kMissing;

    apply_mask(fbp, ctx.conv.mask == MaskSource::File ? Convention{} : ctx.conv);
    apply_mask(sart, ctx.conv.mask == MaskSource::File ? Convention{} : ctx.conv);
    const std::vector<Image2D> both{fbp, sart};
    const auto n = normalize_set(both, both, ctx.conv);
    const auto &hist = ctx.conv.hist;
    const double mi = metrics::mutual_information(n[0], n[1], hist);
    const double skl = metrics::symmetric_kl(metrics::histogram(n[0], hist), metrics::histogram(n[1], hist));

    StudyReport r;
    r.columns = {"method", "angles", "entropy", "mi_vs_other", "symkl_vs_other", "self_mi", "rmse_vs_truth",
                 "data_residual"};
    const auto angles = static_cast<std::int64_t>(s.angle_count());
    r.add_row({text("fbp"), integer(angles), real(metrics::entropy(n[0], hist)), real(mi), real(skl),
               real(metrics::mutual_information(n[0], n[0], hist)), real(err_fbp), real(res_fbp)});
    r.add_row({text("sart"), integer(angles), real(metrics::entropy(n[1], hist)), real(mi), real(skl),
               real(metrics::mutual_information(n[1], n[1], hist)), real(err_sart), real(res_sart)});
    return r;
}

// ------------------------------------------------------------------- task

StudyReport task_study(Context &ctx) {
    const auto &p = ctx.params;
    if (ctx.conv.scope != NormScope::Global) {
        fail(ErrorCategory::Param, "the task study normalizes each pair with ground-truth bounds; use global scope");
    }
    std::vector<budget::TaskPair> pairs;
    std::vector<double> grades;
    if (ctx.dataset()) {
        const auto recs = load_dataset_stack(ctx);
        const auto truths = load_truth(*ctx.dataset());
        if (recs.size() != truths.size()) fail(ErrorCategory::Format, "reconstruction and truth counts differ");
        for (std::size_t i = 0; i < recs.size(); ++i) {
            ctx.input.update(truths[i]);
            pairs.push_back({i, recs[i], truths[i]});
            grades.push_back(kMissing);
        }
    } else {
        const std::size_t slices = p.count("slices", 3);
        const std::size_t size = p.count("size");
        const double nmin = p.real("noise_min"), nmax = p.real("noise_max");
        const double bias = p.real("bias_max"), blur = p.real("blur_max");
        const CounterRng rng(ctx.seed());
        EllipsesOptions eo;
        for (std::size_t i = 0; i < slices; ++i) {
            const double g = rng.uniform(i, 11);
            Image2D truth = ellipses_phantom(size, ctx.seed() + i, eo);
            Image2D rec = operators::gaussian_filter(truth, 0.25 + blur * g);
            for (double &v : rec.values()) v += bias * g;
            add_gaussian_noise(rec, nmin + (nmax - nmin) * g, ctx.seed(), static_cast<std::uint32_t>(1000 + i));
            apply_mask(truth, ctx.conv);
            apply_mask(rec, ctx.conv);
            ctx.input.update(truth);
            pairs.push_back({i, std::move(rec), std::move(truth)});
            grades.push_back(g);
        }
    }
    const auto v = budget::task_validate(pairs, ctx.conv.norm, ctx.conv.hist);

    StudyReport r;
    r.columns = {"slice_id", "grade", "entropy", "mi_vs_truth", "kl_vs_truth", "roi_error",
                 "corr_entropy", "corr_mi", "corr_kl", "skipped"};
    for (const auto &rec : v.records) {
        r.add_row({integer(static_cast<std::int64_t>(rec.slice_id)), real(grades[rec.slice_id]), real(rec.entropy),
                   real(rec.mi_vs_truth), real(rec.kl_vs_truth), real(rec.roi_error), real(v.corr_entropy),
                   real(v.corr_mi), real(v.corr_kl), integer(static_cast<std::int64_t>(v.skipped.size()))});
    }
    return r;
}

// ----------------------------------------------------------------- budget

double pooled_entropy(std::span<const Image2D> images, const metrics::HistogramSpec &hist) {
    return metrics::entropy(metrics::pooled_histogram(images, hist));
}

std::vector<double> class_deltas(budget::OperationClass c, const StudyReport &r) {
    std::vector<double> d;
    const auto col = [&](std::size_t i, const char *name) { return r.number(i, name); };
    switch (c) {
    case budget::OperationClass::Denoise:
        for (std::size_t i = 1; i < r.rows.size(); ++i) d.push_back(col(i, "entropy") - col(0, "entropy"));
        break;
    case budget::OperationClass::Align: {
        // The stage maps misaligned frames to registered ones; the reference
        // frame is never shifted and is left out.
        for (std::size_t i = 0; i + 2 < r.rows.size(); i += 3) {
            if (r.text(i + 1, "condition") != "misaligned") continue;
            const bool is_ref = col(i, "entropy") == col(i + 1, "entropy") && col(i, "mi_vs_ref") == col(i + 1, "mi_vs_ref");
            if (!is_ref) d.push_back(col(i + 2, "entropy") - col(i + 1, "entropy"));
        }
        break;
    }
    case budget::OperationClass::Sparse:
        for (std::size_t i = 1; i < r.rows.size(); ++i) d.push_back(col(i, "entropy") - col(i - 1, "entropy"));
        break;
    case budget::OperationClass::Dose: {
        std::size_t full = 0;
        for (std::size_t i = 0; i < r.rows.size(); ++i) {
            if (col(i, "dose") > col(full, "dose")) full = i;
        }
        for (std::size_t i = 0; i < r.rows.size(); ++i) {
            if (i != full) d.push_back(col(i, "entropy") - col(full, "entropy"));
        }
        break;
    }
    }
    return d;
}

StudyReport budget_study(Context &ctx) {
    const auto &p = ctx.params;
    std::vector<Image2D> raw =
        ctx.dataset() ? load_dataset_stack(ctx) : phantom_sequence(ctx, p.count("frames", 2), p.real("noise"));
    const auto &hist = ctx.conv.hist;
    const std::string conv_id = ctx.conv.id();

    // Every stage lives in the space normalized by the raw stack's bounds.
    const auto bounds = shared_bounds(raw, ctx.conv);
    std::vector<Image2D> cur;
    for (const auto &img : raw) cur.push_back(metrics::apply_normalization(img, bounds));

    std::vector<budget::StageEntropy> stages;
    auto record = [&](budget::Stage s) { stages.push_back({s, pooled_entropy(cur, hist), conv_id}); };
    std::vector<std::string> chain;
    {
        std::stringstream ss(p.str("stages"));
        std::string item;
        while (std::getline(ss, item, ',')) chain.push_back(item);
    }
    std::vector<std::size_t> frame_ids(cur.size());
    for (std::size_t i = 0; i < frame_ids.size(); ++i) frame_ids[i] = i;

    for (const auto &name : chain) {
        const budget::Stage stage = budget::parse_stage(name);
        switch (stage) {
        case budget::Stage::Raw: break;
        case budget::Stage::Denoise: {
            operators::DenoiseParams dp;
            dp.method = operators::parse_method(p.str("denoise_method"));
            for (auto &img : cur) img = operators::denoise(img, dp);
            break;
        }
        case budget::Stage::Align: {
            const std::size_t ref = std::min(p.count("reference"), cur.size() - 1);
            const operators::Shift2D shift{p.real("shift_dy"), p.real("shift_dx")};
            const Image2D reference = cur[ref];
            for (std::size_t i = 0; i < cur.size(); ++i) {
                if (frame_ids[i] == ref) continue;
                Image2D mis = operators::translate(cur[i], shift, 0.0);
                Image2D reg = operators::register_to(reference, mis).registered;
                copy_mask(reg, cur[i]);
                cur[i] = std::move(reg);
            }
            break;
        }
        case budget::Stage::Sparse: {
            const auto plan = sampling::plan_subsets(cur.size(), p.count("subset_k", 2));
            std::vector<Image2D> kept;
            std::vector<std::size_t> ids;
            for (std::size_t c : plan.chosen) {
                kept.push_back(cur[c]);
                ids.push_back(frame_ids[c]);
            }
            cur = std::move(kept);
            frame_ids = std::move(ids);
            break;
        }
        case budget::Stage::Dose: {
            const double fraction = p.real("dose");
            for (std::size_t i = 0; i < cur.size(); ++i) {
                sampling::DoseModel m{fraction, 1000.0, 5.0, ctx.seed() + 7000 + frame_ids[i]};
                Image2D counts = sampling::simulate_dose(cur[i], m);
                for (double &v : counts.values()) v /= m.mean_counts(1.0);
                copy_mask(counts, cur[i]);
                cur[i] = metrics::apply_normalization(counts, NormalizationParams{0.0, 1.0});
            }
            break;
        }
        case budget::Stage::Recon:
            fail(ErrorCategory::Param, "the budget chain runs on projections; 'recon' is not a chain stage here");
        }
        record(stage);
    }
    const auto b = budget::compute_budget(std::move(stages));

    StudyReport r;
    r.columns = {"record", "name", "entropy", "delta", "median", "min", "max", "detail"};
    const Cell blank = text("");
    for (std::size_t i = 0; i < b.stages.size(); ++i) {
        r.add_row({text("stage"), text(std::string(budget::stage_name(b.stages[i].stage))), real(b.stages[i].entropy),
                   i == 0 ? blank : real(b.deltas[i - 1]), blank, blank, blank, blank});
    }
    r.add_row({text("total"), text("last_minus_first"), blank, real(b.total_change()), blank, blank, blank, blank});

    if (p.integer("hierarchy") != 0) {
        const std::pair<budget::OperationClass, StudyKind> classes[] = {
            {budget::OperationClass::Denoise, StudyKind::Denoise},
            {budget::OperationClass::Align, StudyKind::Alignment},
            {budget::OperationClass::Sparse, StudyKind::Sparse},
            {budget::OperationClass::Dose, StudyKind::Dose}};
        StudyConfig sub;
        sub.seed = ctx.cfg.seed;
        sub.convention = ctx.cfg.convention;
        sub.dataset = ctx.cfg.dataset;
        std::array<double, budget::kOperationClasses> medians{};
        for (const auto &[cls, kind] : classes) {
            const auto report = run_study(kind, sub);
            const auto deltas = class_deltas(cls, report);
            const auto mag = budget::summarize_magnitudes(deltas);
            medians[static_cast<std::size_t>(cls)] = mag.median;
            r.add_row({text("class"), text(std::string(budget::class_name(cls))), blank, blank, real(mag.median),
                       real(mag.min), real(mag.max), text(std::string(study_name(kind)))});
        }
        const auto h = budget::check_hierarchy(medians);
        std::string order;
        for (std::size_t i = 0; i < h.ordering.size(); ++i) {
            if (i) order += " < ";
            order += budget::class_name(h.ordering[i]);
        }
        r.add_row({text("hierarchy"), text(h.satisfied ? "satisfied" : (h.tie ? "tie" : "unsatisfied")), blank, blank,
                   blank, blank, blank, text(order)});
    }
    return r;
}

Convention resolve_convention(const StudyConfig &cfg) {
    Convention c = cfg.convention;
    if (cfg.dataset) {
        c.mask = cfg.dataset->mask;
        c.crop_fraction = cfg.dataset->crop_fraction;
        c.scope = cfg.dataset->scope;
    }
    c.validate();
    return c;
}

} // namespace

std::string_view study_name(StudyKind kind) noexcept {
    switch (kind) {
    case StudyKind::Denoise: return "denoise";
    case StudyKind::Alignment: return "alignment";
    case StudyKind::Sparse: return "sparse";
    case StudyKind::Dose: return "dose";
    case StudyKind::Recon: return "recon";
    case StudyKind::Budget: return "budget";
    case StudyKind::Task: return "task";
    }
    return "unknown";
}

StudyKind parse_study(std::string_view name) {
    for (auto k : kStudyKinds) {
        if (study_name(k) == name) return k;
    }
    fail(ErrorCategory::Param, "unknown study '" + std::string(name) + "'");
}

std::vector<std::pair<std::string, Cell>> study_defaults(StudyKind kind) {
    using V = std::vector<std::pair<std::string, Cell>>;
    const V sequence{{"size", integer(256)}, {"step", real(0.05)}, {"flux_drift", real(0.2)}};
    auto with = [&](V base, const V &extra) {
        base.insert(base.end(), extra.begin(), extra.end());
        return base;
    };
    switch (kind) {
    case StudyKind::Denoise:
        return with({{"size", integer(512)}, {"step", real(0.05)}, {"flux_drift", real(0.2)}},
                    {{"noise", real(0.02)},
                     {"image_index", integer(0)},
                     {"gaussian_sigma", real(1.0)},
                     {"nlm_patch", integer(5)},
                     {"nlm_search", integer(11)},
                     {"nlm_h", real(0.0)},
                     {"tv_weight", real(0.1)},
                     {"tv_iterations", integer(100)}});
    case StudyKind::Alignment:
        return with(sequence, {{"frames", integer(10)},
                               {"noise", real(0.002)},
                               {"reference", integer(4)},
                               {"first_index", integer(560)},
                               {"index_step", integer(10)},
                               {"shift_dy", real(5.0)},
                               {"shift_dx", real(-3.0)},
                               {"upsample", integer(100)}});
    case StudyKind::Sparse:
        return with(sequence, {{"mode", text("projections")},
                               {"frames", integer(10)},
                               {"noise", real(0.002)},
                               {"ks", text("2,4,6,8,10")},
                               {"sinogram_angles", integer(180)},
                               {"band_rows", integer(1)}});
    case StudyKind::Dose:
        return with(sequence, {{"frame", integer(4)},
                               {"image_index", integer(0)},
                               {"doses", text("0.1,0.25,0.5,1.0")},
                               {"full_dose_counts", real(1000.0)},
                               {"detector_sigma", real(5.0)},
                               {"flat_value", real(0.5)},
                               {"flat_size", integer(128)}});
    case StudyKind::Recon:
        return {{"phantom", text("ellipses")},
                {"size", integer(256)},
                {"angles", integer(100)},
                {"sart_iterations", integer(5)},
                {"sart_relaxation", real(0.2)},
                {"band_rows", integer(100)},
                {"arc_degrees", real(180.0)}};
    case StudyKind::Budget:
        return with(sequence, {{"frames", integer(10)},
                               {"noise", real(0.002)},
                               {"stages", text("raw,denoise,align,sparse,dose")},
                               {"denoise_method", text("gaussian")},
                               {"reference", integer(4)},
                               {"shift_dy", real(5.0)},
                               {"shift_dx", real(-3.0)},
                               {"subset_k", integer(4)},
                               {"dose", real(0.25)},
                               {"hierarchy", integer(1)}});
    case StudyKind::Task:
        return {{"slices", integer(200)},   {"size", integer(96)},      {"noise_min", real(0.005)},
                {"noise_max", real(0.08)},  {"bias_max", real(0.04)},   {"blur_max", real(1.5)}};
    }
    return {};
}

StudyConfig study_config_from_json(const json &j) {
    if (!j.is_object()) fail(ErrorCategory::Param, "study config must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto &k = it.key();
        if (k != "seed" && k != "convention" && k != "dataset" && k != "params") {
            fail(ErrorCategory::Param, "unknown key '" + k + "' in study config");
        }
    }
    StudyConfig cfg;
    try {
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("convention")) {
            const json &c = j.at("convention");
            for (auto it = c.begin(); it != c.end(); ++it) {
                static const char *allowed[] = {"lo_percentile", "hi_percentile", "bins", "epsilon", "mask", "crop_fraction", "scope"};
                if (std::find(std::begin(allowed), std::end(allowed), it.key()) == std::end(allowed)) {
                    fail(ErrorCategory::Param, "unknown key '" + it.key() + "' in convention");
                }
            }
            auto &cv = cfg.convention;
            cv.norm.lo_percentile = c.value("lo_percentile", cv.norm.lo_percentile);
            cv.norm.hi_percentile = c.value("hi_percentile", cv.norm.hi_percentile);
            cv.hist.bins = c.value("bins", cv.hist.bins);
            cv.hist.epsilon = c.value("epsilon", cv.hist.epsilon);
            cv.crop_fraction = c.value("crop_fraction", cv.crop_fraction);
            const std::string mask = c.value("mask", std::string("central_crop"));
            if (mask == "none") cv.mask = MaskSource::None;
            else if (mask == "central_crop") cv.mask = MaskSource::CentralCrop;
            else fail(ErrorCategory::Param, "convention mask must be 'none' or 'central_crop'");
            cv.scope = parse_scope(c.value("scope", std::string("global")));
        }
        if (j.contains("params")) {
            const json &ps = j.at("params");
            if (!ps.is_object()) fail(ErrorCategory::Param, "params must be an object");
            for (auto it = ps.begin(); it != ps.end(); ++it) {
                cfg.params.emplace_back(it.key(), it->is_string() ? it->get<std::string>() : it->dump());
            }
        }
    } catch (const json::exception &e) {
        fail(ErrorCategory::Param, std::string("bad study config: ") + e.what());
    }
    if (j.contains("dataset")) cfg.dataset = dataset_from_json(j.at("dataset"));
    cfg.convention.validate();
    return cfg;
}

StudyConfig load_study_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCategory::Io, "cannot open config '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error &e) {
        fail(ErrorCategory::Format, "config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    StudyConfig cfg = study_config_from_json(j);
    if (cfg.dataset && cfg.dataset->root.is_relative()) {
        cfg.dataset->root = path.parent_path() / cfg.dataset->root;
    }
    return cfg;
}

StudyReport run_study(StudyKind kind, const StudyConfig &cfg) {
    try {
        Context ctx{kind, cfg, resolve_convention(cfg), Params(study_defaults(kind)), {}};
        for (const auto &[k, v] : cfg.params) ctx.params.set(k, v);

        StudyReport r;
        switch (kind) {
        case StudyKind::Denoise: r = denoise_study(ctx); break;
        case StudyKind::Alignment: r = alignment_study(ctx); break;
        case StudyKind::Sparse: r = sparse_study(ctx); break;
        case StudyKind::Dose: r = dose_study(ctx); break;
        case StudyKind::Recon: r = recon_study(ctx); break;
        case StudyKind::Budget: r = budget_study(ctx); break;
        case StudyKind::Task: r = task_study(ctx); break;
        }
        r.study = std::string(study_name(kind));
        r.params = ctx.params.entries();
        r.convention = ctx.conv;

        nlohmann::ordered_json canon;
        canon["study"] = r.study;
        canon["seed"] = cfg.seed;
        canon["convention"] = ctx.conv.id();
        canon["dataset"] = cfg.dataset ? json(dataset_to_json(*cfg.dataset)) : json(nullptr);
        nlohmann::ordered_json params = nlohmann::ordered_json::object();
        for (const auto &[k, v] : r.params) {
            if (const auto *d = std::get_if<double>(&v)) params[k] = *d;
            else if (const auto *i = std::get_if<std::int64_t>(&v)) params[k] = *i;
            else params[k] = std::get<std::string>(v);
        }
        canon["params"] = params;
        r.provenance = {ctx.conv.id(), cfg.seed, ctx.input.hex(), digest_hex(canon.dump())};
        return r;
    } catch (const Error &e) {
        throw Error(e.category(), std::string(study_name(kind)) + " study: " + e.what());
    }
}

} // namespace xrminfo::io
