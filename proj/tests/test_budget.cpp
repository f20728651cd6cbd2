#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "xrminfo/budget/budget.hpp"
#include "xrminfo/core/error.hpp"
#include "xrminfo/core/random.hpp"
#include "xrminfo/io/phantom.hpp"
#include "xrminfo/metrics/information.hpp"
#include "xrminfo/sampling/dose.hpp"

using namespace xrminfo;
using namespace xrminfo::budget;

namespace {

Image2D noisy(const Image2D &img, double sigma, std::uint64_t seed) {
    Image2D out = img;
    io::add_gaussian_noise(out, sigma, seed, 0);
    return out;
}

std::vector<StageEntropy> stages(std::initializer_list<double> hs, const char *id = "c") {
    std::vector<StageEntropy> out;
    Stage s = Stage::Raw;
    for (double h : hs) {
        out.push_back({s, h, id});
        s = static_cast<Stage>(static_cast<int>(s) + 1);
    }
    return out;
}

} // namespace

TEST_CASE("information budget deltas") {
    auto b = compute_budget(stages({3.0, 3.0}));
    REQUIRE(b.deltas.size() == 1);
    CHECK(b.deltas[0] == 0.0);
    b = compute_budget(stages({5.025, 4.981}));
    CHECK(b.deltas[0] == doctest::Approx(-0.044).epsilon(1e-12));
    b = compute_budget(stages({0.0321, 1.8485}));
    CHECK(b.deltas[0] == doctest::Approx(1.8164).epsilon(1e-12));

    b = compute_budget(stages({4.2, 5.1, 3.9, 4.4, 2.0}));
    double sum = 0.0;
    for (double d : b.deltas) sum += d;
    CHECK(sum == doctest::Approx(2.0 - 4.2).epsilon(1e-14));
    CHECK(b.total_change() == doctest::Approx(sum).epsilon(1e-14));

    auto mixed = stages({1.0, 2.0});
    mixed[1].convention_id = "other";
    CHECK_THROWS_AS(compute_budget(mixed), Error);
    try {
        compute_budget(mixed);
    } catch (const Error &e) {
        CHECK(e.category() == ErrorCategory::Convention);
    }
    CHECK_THROWS_AS(compute_budget(stages({1.0})), Error);
}

TEST_CASE("degradation hierarchy") {
    auto r = check_hierarchy(std::array<double, 4>{0.01, 0.1, 0.5, 1.0});
    CHECK(r.satisfied);
    CHECK_FALSE(r.tie);
    r = check_hierarchy(std::array<double, 4>{1.0, 0.1, 0.5, 0.01});
    CHECK_FALSE(r.satisfied);
    REQUIRE(r.ordering.size() == 4);
    CHECK(r.ordering.front() == OperationClass::Dose);
    CHECK(r.ordering.back() == OperationClass::Denoise);
    r = check_hierarchy(std::array<double, 4>{0.1, 0.1, 0.5, 1.0});
    CHECK_FALSE(r.satisfied);
    CHECK(r.tie);

    const std::array<std::optional<double>, 4> missing{0.1, std::nullopt, 0.5, 1.0};
    CHECK_THROWS_AS(check_hierarchy(std::span<const std::optional<double>, 4>(missing)), Error);

    const std::vector<double> ds{-0.5, 0.1, -0.2};
    const auto m = summarize_magnitudes(ds);
    CHECK(m.median == 0.2);
    CHECK(m.min == 0.1);
    CHECK(m.max == 0.5);
    CHECK_THROWS_AS(summarize_magnitudes(std::vector<double>{}), Error);
}

TEST_CASE("mutual information ranking") {
    const Image2D ref = io::ellipses_phantom(96, 3);
    std::vector<Image2D> cands{noisy(ref, 0.2, 1), ref, noisy(ref, 0.01, 2), noisy(ref, 0.05, 3)};
    const auto ranked = mi_rank(ref, cands);
    REQUIRE(ranked.size() == 4);
    CHECK(ranked[0].index == 1);
    CHECK(ranked[1].index == 2);
    CHECK(ranked[2].index == 3);
    CHECK(ranked[3].index == 0);
    for (std::size_t i = 1; i < ranked.size(); ++i)
        CHECK(ranked[i].mutual_information <= ranked[i - 1].mutual_information);

    // Positive affine maps of a candidate do not change its MI.
    Image2D scaled = cands[3];
    for (double &v : scaled.values()) v = 3.0 * v + 7.0;
    const std::vector<Image2D> pair{cands[3], scaled};
    const auto affine = mi_rank(ref, pair);
    CHECK(affine[0].mutual_information == doctest::Approx(affine[1].mutual_information).epsilon(1e-9));
    CHECK(affine[0].index == 0);
}

TEST_CASE("dose ladder ranks by dose") {
    const Image2D clean = io::ellipses_phantom(96, 8);
    std::vector<Image2D> ladder;
    for (double d : {0.1, 0.25, 0.5, 1.0}) ladder.push_back(sampling::simulate_dose(clean, {d, 1000.0, 5.0, 21}));
    const auto ranked = mi_rank(ladder.back(), ladder);
    CHECK(ranked[0].index == 3);
    CHECK(ranked[1].index == 2);
    CHECK(ranked[2].index == 1);
    CHECK(ranked[3].index == 0);
}

TEST_CASE("Otsu threshold") {
    Image2D bimodal(32, 32, 0.2);
    for (std::size_t i = bimodal.size() / 2; i < bimodal.size(); ++i) bimodal.values()[i] = 0.8;
    const double t = otsu_threshold(bimodal);
    CHECK(t > 0.2);
    CHECK(t < 0.8);

    std::vector<double> two(256, 0.0);
    two[50] = two[200] = 0.5;
    CHECK(otsu_bin(two) == 50);
    CHECK(otsu_bin(two) == oracle::otsu(two));

    const CounterRng rng(99);
    for (std::uint64_t k = 0; k < 20; ++k) {
        std::vector<double> h(256);
        for (std::size_t i = 0; i < 256; ++i) {
            const double u = rng.uniform(i, static_cast<std::uint32_t>(k));
            h[i] = u < 0.3 ? 0.0 : u;
        }
        CHECK(otsu_bin(h) == oracle::otsu(h));
    }
    CHECK_THROWS_AS(otsu_threshold(Image2D(8, 8, 0.4)), Error);
}

TEST_CASE("task validation") {
    std::vector<TaskPair> same;
    for (std::size_t i = 0; i < 4; ++i) {
        const Image2D g = io::ellipses_phantom(64, 30 + i);
        same.push_back({i, g, g});
    }
    const auto v = task_validate(same);
    REQUIRE(v.records.size() == 4);
    for (const auto &r : v.records) {
        CHECK(r.roi_error == 0.0);
        CHECK(r.mi_vs_truth == doctest::Approx(r.entropy).epsilon(1e-5));
        CHECK(r.kl_vs_truth == doctest::Approx(0.0).epsilon(1e-12));
    }
    CHECK(std::isnan(v.corr_mi));

    // Graded noise and bias on a fixed slice family.
    std::vector<TaskPair> graded;
    const CounterRng rng(5);
    for (std::size_t i = 0; i < 30; ++i) {
        const Image2D g = io::ellipses_phantom(64, 100 + i);
        const double q = rng.uniform(i, 0);
        Image2D r = noisy(g, 0.005 + 0.08 * q, 200 + i);
        for (double &x : r.values()) x += 0.04 * q;
        graded.push_back({i, r, g});
    }
    const auto res = task_validate(graded);
    CHECK(res.corr_mi < -0.5);
    CHECK(res.corr_kl > 0.0);

    std::vector<TaskPair> reversed(graded.rbegin(), graded.rend());
    const auto rev = task_validate(reversed);
    CHECK(rev.corr_mi == doctest::Approx(res.corr_mi).epsilon(1e-12));
    CHECK(rev.corr_kl == doctest::Approx(res.corr_kl).epsilon(1e-12));
    CHECK(rev.corr_entropy == doctest::Approx(res.corr_entropy).epsilon(1e-12));

    CHECK_THROWS_AS(task_validate(std::span<const TaskPair>(graded.data(), 2)), Error);
}
