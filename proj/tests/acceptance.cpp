// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "xrminfo/budget/budget.hpp"
#include "xrminfo/core/error.hpp"
#include "xrminfo/core/random.hpp"
#include "xrminfo/io/phantom.hpp"
#include "xrminfo/io/report.hpp"
#include "xrminfo/io/study.hpp"
#include "xrminfo/metrics/histogram.hpp"
#include "xrminfo/metrics/information.hpp"
#include "xrminfo/metrics/normalize.hpp"
#include "xrminfo/recon/reconstruct.hpp"
#include "xrminfo/sampling/dose.hpp"
#include "xrminfo/sampling/subsets.hpp"

using namespace xrminfo;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char *name;
    double time_limit; // seconds, 0 for none
    std::function<Outcome()> run;
};

std::string fmt(const char *f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Reports from the first run of each study, reused by the determinism check.
std::vector<std::pair<io::StudyKind, io::StudyReport>> g_reports;

const io::StudyReport &study(io::StudyKind kind) {
    for (const auto &[k, r] : g_reports) {
        if (k == kind) return r;
    }
    g_reports.emplace_back(kind, io::run_study(kind, io::StudyConfig{}));
    return g_reports.back().second;
}

std::vector<std::size_t> rows_where(const io::StudyReport &r, std::string_view col, std::string_view value) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        if (r.text(i, col) == value) out.push_back(i);
    }
    return out;
}

Image2D row_image(const std::vector<double> &v) { return Image2D(1, v.size(), v); }

double centre(std::size_t bin, std::size_t bins) {
    return (static_cast<double>(bin) + 0.5) / static_cast<double>(bins);
}

// ---------------------------------------------------------------------------

Outcome estimator_oracles() {
    double worst = 0.0, worst_identity = 0.0, worst_kl_self = 0.0, worst_symmetry = 0.0;
    std::size_t images = 0, pairs = 0;

    // Entropy of every bin-count vector of n <= 16 pixels over B <= 8 bins;
    // the identities on every one with n <= 12.
    for (std::size_t bins = 2; bins <= 8; ++bins) {
        const metrics::HistogramSpec spec{bins, 1e-12};
        for (std::size_t n = 1; n <= 16; ++n) {
            std::vector<std::size_t> counts(bins, 0);
            counts[0] = n;
            for (;;) {
                std::vector<double> v;
                for (std::size_t b = 0; b < bins; ++b) v.insert(v.end(), counts[b], centre(b, bins));
                const double h = metrics::entropy(row_image(v), spec);
                worst = std::max(worst, std::abs(h - static_cast<double>(oracle::entropy(oracle::probabilities(v, bins)))));
                if (n <= 12) {
                    const Image2D img = row_image(v);
                    worst_identity = std::max(worst_identity, std::abs(metrics::mutual_information(img, img, spec) - h));
                    worst_kl_self = std::max(worst_kl_self, metrics::kl_divergence(img, img, spec));
                }
                ++images;
                // Next composition of n into `bins` parts.
                std::size_t k = 0;
                while (k + 1 < bins && counts[k] == 0) ++k;
                if (k + 1 == bins) break;
                const std::size_t moved = counts[k] - 1;
                counts[k] = 0;
                ++counts[k + 1];
                counts[0] = moved;
            }
        }
    }

    // MI and KL on every pair of images of n pixels over a B-level alphabet
    // while B^(2n) stays small, and on seeded pairs up to 16 pixels.
    const long double eps = 1e-12L;
    auto check_pair = [&](const std::vector<double> &x, const std::vector<double> &y, std::size_t bins) {
        const metrics::HistogramSpec spec{bins, 1e-12};
        const Image2D xi = row_image(x), yi = row_image(y);
        const double mi = metrics::mutual_information(xi, yi, spec);
        worst = std::max(worst, std::abs(mi - static_cast<double>(oracle::mutual_information(x, y, bins, eps))));
        worst_symmetry = std::max(worst_symmetry, std::abs(mi - metrics::mutual_information(yi, xi, spec)));
        const double kl = metrics::kl_divergence(xi, yi, spec);
        worst = std::max(worst, std::abs(kl - static_cast<double>(oracle::kl(oracle::probabilities(x, bins),
                                                                            oracle::probabilities(y, bins), eps))));
        ++pairs;
    };
    for (std::size_t bins = 2; bins <= 8; ++bins) {
        for (std::size_t n = 1; n <= 16; ++n) {
            double combos = std::pow(static_cast<double>(bins), static_cast<double>(2 * n));
            if (combos > 20000.0) break;
            std::vector<double> x(n), y(n);
            for (std::size_t code = 0; code < static_cast<std::size_t>(combos); ++code) {
                std::size_t c = code;
                for (std::size_t i = 0; i < n; ++i) {
                    x[i] = centre(c % bins, bins);
                    c /= bins;
                    y[i] = centre(c % bins, bins);
                    c /= bins;
                }
                check_pair(x, y, bins);
            }
        }
    }
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 20000; ++t) {
        const std::size_t n = 1 + static_cast<std::size_t>(t % 16);
        const std::size_t bins = 2 + static_cast<std::size_t>(t / 16 % 7);
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = u(rng);
            y[i] = u(rng);
        }
        check_pair(x, y, bins);
    }

    const bool ok = worst <= 1e-12 && worst_identity <= 1e-6 && worst_kl_self <= 1e-9 && worst_symmetry <= 1e-9;
    return {ok, fmt("%zu histograms, %zu pairs; max |err| %.2e, |I(X;X)-H| %.2e, KL(p,p) %.2e, MI asym %.2e", images,
                    pairs, worst, worst_identity, worst_kl_self, worst_symmetry)};
}

Outcome denoise_ordering() {
    const auto &r = study(io::StudyKind::Denoise);
    const char *order[] = {"raw", "gaussian", "nlm", "tv"};
    double h[4], kl[4], ssim[4], mi[4];
    for (int i = 0; i < 4; ++i) {
        const auto rows = rows_where(r, "condition", order[i]);
        if (rows.size() != 1) return {false, std::string("missing row ") + order[i]};
        h[i] = r.number(rows[0], "entropy");
        kl[i] = r.number(rows[0], "kl_vs_raw");
        ssim[i] = r.number(rows[0], "ssim_vs_raw");
        mi[i] = r.number(rows[0], "mi_vs_raw");
    }
    bool ok = true;
    for (int i = 0; i + 1 < 4; ++i) ok = ok && h[i] >= h[i + 1] && ssim[i] > ssim[i + 1] && mi[i] > mi[i + 1];
    ok = ok && kl[1] < kl[2] && kl[2] < kl[3];
    return {ok, fmt("H %.3f >= %.3f >= %.3f >= %.3f; KL %.3f < %.3f < %.3f; SSIM %.4f > %.4f > %.4f", h[0], h[1], h[2],
                    h[3], kl[1], kl[2], kl[3], ssim[1], ssim[2], ssim[3])};
}

Outcome alignment_recovery() {
    const auto &r = study(io::StudyKind::Alignment);
    const auto orig = rows_where(r, "condition", "original");
    const auto mis = rows_where(r, "condition", "misaligned");
    const auto reg = rows_where(r, "condition", "registered");
    if (orig.size() != 10 || mis.size() != 10 || reg.size() != 10) return {false, "expected 10 frames per condition"};
    std::int64_t reference = 0;
    for (const auto &[k, v] : r.params) {
        if (k == "reference") reference = std::get<std::int64_t>(v);
    }
    bool drop_everywhere = true, shifts_ok = true;
    double recovery = 0.0, worst_shift = 0.0;
    int counted = 0;
    for (std::size_t f = 0; f < 10; ++f) {
        if (static_cast<std::int64_t>(f) == reference) continue;
        const double mo = r.number(orig[f], "mi_vs_ref"), mm = r.number(mis[f], "mi_vs_ref");
        const double mr = r.number(reg[f], "mi_vs_ref");
        drop_everywhere = drop_everywhere && mm < mo;
        recovery += (mr - mm) / (mo - mm);
        ++counted;
        const double dy = r.number(reg[f], "shift_dy") - r.number(reg[f], "baseline_dy");
        const double dx = r.number(reg[f], "shift_dx") - r.number(reg[f], "baseline_dx");
        worst_shift = std::max({worst_shift, std::abs(dy + 5.0), std::abs(dx - 3.0)});
        shifts_ok = shifts_ok && std::abs(dy + 5.0) <= 0.05 && std::abs(dx - 3.0) <= 0.05;
    }
    recovery /= counted;
    return {drop_everywhere && recovery >= 0.9 && shifts_ok,
            fmt("MI drop on %d/%d frames; mean recovery %.1f%%; worst shift error %.3f px", drop_everywhere ? counted : 0,
                counted, 100.0 * recovery, worst_shift)};
}

Outcome sparsity_trend() {
    const auto &r = study(io::StudyKind::Sparse);
    std::vector<double> ks, hs;
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        ks.push_back(r.number(i, "k"));
        hs.push_back(r.number(i, "entropy"));
    }
    bool nondecreasing = true;
    for (std::size_t i = 1; i < hs.size(); ++i) nondecreasing = nondecreasing && hs[i] >= hs[i - 1];
    const auto fit = sampling::fit_log_trend(ks, hs);
    const double span = hs.back() - hs.front();

    std::vector<double> exact;
    for (double k : ks) exact.push_back(4.25 + 0.75 * std::log(k));
    const auto ef = sampling::fit_log_trend(ks, exact);
    const double exact_err = std::max(std::abs(ef.h1 - 4.25), std::abs(ef.c - 0.75));
    const bool ok = nondecreasing && fit.c > 0.0 && fit.residual_rms < 0.1 * span && exact_err <= 1e-9;
    return {ok, fmt("H_k %.3f..%.3f; c %.4f; rms %.4f < %.4f; exact-model error %.1e", hs.front(), hs.back(), fit.c,
                    fit.residual_rms, 0.1 * span, exact_err)};
}

Outcome dose_behaviour() {
    const auto &r = study(io::StudyKind::Dose);
    bool monotone = true, variance_ok = true;
    double worst_var = 0.0;
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        if (i > 0) {
            monotone = monotone && r.number(i, "dose") > r.number(i - 1, "dose") &&
                       r.number(i, "entropy") >= r.number(i - 1, "entropy") &&
                       r.number(i, "mi_vs_full") >= r.number(i - 1, "mi_vs_full");
        }
        const double rel = std::abs(r.number(i, "flat_variance") / r.number(i, "model_variance") - 1.0);
        worst_var = std::max(worst_var, rel);
        variance_ok = variance_ok && rel <= 0.05;
    }
    double worst_fd = 0.0;
    for (double lambda : {10.0, 100.0, 250.0, 1000.0}) {
        const double h = 1e-4 * lambda;
        const double fd = (sampling::dose_entropy_proxy(lambda + h, 5.0) - sampling::dose_entropy_proxy(lambda - h, 5.0)) / (2 * h);
        const double an = sampling::dose_sensitivity(lambda, 5.0);
        worst_fd = std::max(worst_fd, std::abs(fd - an) / an);
    }
    return {monotone && variance_ok && worst_fd <= 1e-6,
            fmt("H and MI nondecreasing in dose: %s; variance error %.2f%%; sensitivity FD error %.1e",
                monotone ? "yes" : "no", 100.0 * worst_var, worst_fd)};
}

Outcome reconstruction_round_trip() {
    // Disk at 256^2 and 180 angles through FBP.
    const std::size_t n = 256;
    const double radius = 0.6;
    const Image2D disk = io::disk_phantom(n, radius, 1.0);
    recon::ReconConfig fbp_cfg;
    fbp_cfg.grid_size = n;
    const Image2D rec = recon::fbp(recon::radon_forward(disk, recon::uniform_angles(180)), fbp_cfg);
    const double c = (static_cast<double>(n) - 1.0) / 2.0, rr = 0.9 * radius * static_cast<double>(n) / 2.0;
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t y = 0; y < n; ++y) {
        for (std::size_t x = 0; x < n; ++x) {
            const double dy = static_cast<double>(y) - c, dx = static_cast<double>(x) - c;
            if (dx * dx + dy * dy > rr * rr) continue;
            acc += (rec(y, x) - 1.0) * (rec(y, x) - 1.0);
            ++count;
        }
    }
    const double rmse = std::sqrt(acc / static_cast<double>(count));

    // SART residual over 5 iterations on the 256^2 / 100-angle slice.
    const Image2D slice = io::ellipses_phantom(n, 42);
    const auto sino = recon::radon_forward(slice, recon::uniform_angles(100));
    recon::ReconConfig sart_cfg;
    sart_cfg.method = recon::ReconMethod::Sart;
    sart_cfg.grid_size = n;
    std::vector<double> hist;
    const Image2D sart = recon::sart(sino, sart_cfg, &hist);
    bool nonincreasing = true;
    for (std::size_t i = 1; i < hist.size(); ++i) nonincreasing = nonincreasing && hist[i] <= hist[i - 1];

    const Image2D f = recon::fbp(sino, fbp_cfg);
    const auto cmp = recon::recon_compare(f, sart);
    const auto self = recon::recon_compare(f, f);
    // Smoothing keeps I(X;X) within B^2 eps (log2(1/eps) + 2 log2 B) of H(X).
    const double bound = 65536.0 * 1e-12 * (std::log2(1e12) + 16.0);
    const double anchor = std::abs(self.mutual_information - self.entropy_a);

    // The study itself at 256^2 / 100 angles.
    const auto &r = study(io::StudyKind::Recon);
    const bool study_ok = r.number(0, "mi_vs_other") > 0.0 && r.number(0, "symkl_vs_other") > 0.0;

    const bool ok = rmse < 0.05 && nonincreasing && cmp.mutual_information > 0.0 && cmp.symmetric_kl > 0.0 &&
                    anchor <= bound && study_ok;
    return {ok, fmt("disk FBP RMSE %.4f; SART residual %.1f -> %.1f (%s); MI %.3f, symKL %.3f; |I(x;x)-H(x)| %.1e",
                    rmse, hist.front(), hist.back(), nonincreasing ? "non-increasing" : "increased",
                    cmp.mutual_information, cmp.symmetric_kl, anchor)};
}

Outcome task_validation() {
    const auto &r = study(io::StudyKind::Task);
    const double corr_mi = r.number(0, "corr_mi"), corr_kl = r.number(0, "corr_kl");
    const bool full = r.rows.size() == 200;

    const CounterRng rng(7);
    int agree = 0;
    for (std::uint32_t k = 0; k < 20; ++k) {
        std::vector<double> h(256);
        for (std::size_t i = 0; i < 256; ++i) {
            const double u = rng.uniform(i, k);
            h[i] = u < 0.3 ? 0.0 : u;
        }
        if (budget::otsu_bin(h) == oracle::otsu(h)) ++agree;
    }
    return {full && corr_mi < -0.5 && corr_kl > 0.0 && agree == 20,
            fmt("%zu slices; corr(MI,err) %.3f; corr(KL,err) %.3f; Otsu agrees on %d/20", r.rows.size(), corr_mi,
                corr_kl, agree)};
}

Outcome hierarchy_and_budget() {
    const auto &r = study(io::StudyKind::Budget);
    std::vector<budget::StageEntropy> stages;
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        if (r.text(i, "record") != "stage") continue;
        stages.push_back({budget::parse_stage(r.text(i, "name")), r.number(i, "entropy"), r.provenance.convention_id});
    }
    const auto b = budget::compute_budget(stages);
    double sum = 0.0;
    for (double d : b.deltas) sum += d;
    const double telescope = std::abs(sum - (stages.back().entropy - stages.front().entropy));

    std::array<double, budget::kOperationClasses> mags{};
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        if (r.text(i, "record") != "class") continue;
        const std::string name = r.text(i, "name");
        const std::size_t idx = name == "denoise" ? 0 : name == "align" ? 1 : name == "sparse" ? 2 : 3;
        mags[idx] = r.number(i, "median");
    }
    const auto h = budget::check_hierarchy(mags);
    std::string order;
    for (auto cls : h.ordering) order += (order.empty() ? "" : " < ") + std::string(budget::class_name(cls));
    return {telescope <= 1e-12,
            fmt("telescoping error %.1e; hierarchy (reported, not asserted): %s [%s]", telescope,
                h.satisfied ? "satisfied" : "unsatisfied", order.c_str())};
}

Outcome determinism() {
    int identical = 0;
    std::string failed;
    for (auto kind : io::kStudyKinds) {
        const auto &first = study(kind);
        const auto second = io::run_study(kind, io::StudyConfig{});
        if (io::render_csv(first) == io::render_csv(second) && io::render_json(first) == io::render_json(second)) {
            ++identical;
        } else {
            failed += " " + std::string(io::study_name(kind));
        }
    }
    return {identical == static_cast<int>(io::kStudyKinds.size()),
            fmt("%d/%zu studies byte-identical in CSV and JSON%s", identical, io::kStudyKinds.size(),
                failed.empty() ? "" : (" (differs:" + failed + ")").c_str())};
}

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "estimator oracle suite", 5.0, estimator_oracles},
        {2, "denoise ordering", 60.0, denoise_ordering},
        {3, "alignment recovery", 30.0, alignment_recovery},
        {4, "sparsity trend", 10.0, sparsity_trend},
        {5, "dose behaviour", 20.0, dose_behaviour},
        {6, "reconstruction round trip", 120.0, reconstruction_round_trip},
        {7, "task validation", 60.0, task_validation},
        {8, "budget and hierarchy", 0.0, hierarchy_and_budget},
        {9, "determinism", 0.0, determinism},
    };
    int failures = 0;
    for (const auto &c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = c.time_limit <= 0.0 || secs < c.time_limit;
        const bool pass = o.pass && in_time;
        if (!pass) ++failures;
        std::printf("%s %d %s: %s [%.2f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                    in_time ? "" : fmt(", limit %.0f s", c.time_limit).c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
