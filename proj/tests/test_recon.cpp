#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "xrminfo/core/error.hpp"
#include "xrminfo/core/random.hpp"
#include "xrminfo/io/phantom.hpp"
#include "xrminfo/metrics/information.hpp"
#include "xrminfo/metrics/normalize.hpp"
#include "xrminfo/recon/reconstruct.hpp"

using namespace xrminfo;
using namespace xrminfo::recon;

namespace {

// RMSE against `value` over pixels within `frac` of the disk radius.
double disk_rmse(const Image2D &img, double radius, double value, double frac) {
    const double c = (static_cast<double>(img.width()) - 1.0) / 2.0;
    const double r = frac * radius * static_cast<double>(img.width()) / 2.0;
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t y = 0; y < img.height(); ++y) {
        for (std::size_t x = 0; x < img.width(); ++x) {
            const double dy = static_cast<double>(y) - c, dx = static_cast<double>(x) - c;
            if (dx * dx + dy * dy > r * r) continue;
            acc += (img(y, x) - value) * (img(y, x) - value);
            ++n;
        }
    }
    return std::sqrt(acc / static_cast<double>(n));
}

Image2D random_image(std::size_t n, std::uint64_t seed) {
    const CounterRng rng(seed);
    Image2D img(n, n);
    for (std::size_t i = 0; i < img.size(); ++i) img.values()[i] = rng.uniform(i, 0);
    return img;
}

} // namespace

TEST_CASE("forward projection basics") {
    const auto angles = uniform_angles(12);
    const Sinogram zero = radon_forward(Image2D(32, 32, 0.0), angles);
    for (double v : zero.values) CHECK(v == 0.0);

    // A centred disk has the same profile at every angle.
    const Image2D disk = io::disk_phantom(64, 0.6, 1.0);
    const Sinogram s = radon_forward(disk, uniform_angles(18));
    std::vector<double> mean(s.detectors, 0.0);
    for (std::size_t a = 0; a < s.angle_count(); ++a) {
        const auto p = s.profile(a);
        for (std::size_t d = 0; d < p.size(); ++d) mean[d] += p[d] / static_cast<double>(s.angle_count());
    }
    double norm = 0.0;
    for (double v : mean) norm += v * v;
    for (std::size_t a = 0; a < s.angle_count(); ++a) {
        const auto p = s.profile(a);
        double dev = 0.0;
        for (std::size_t d = 0; d < p.size(); ++d) dev += (p[d] - mean[d]) * (p[d] - mean[d]);
        CHECK(std::sqrt(dev / norm) < 0.01);
    }

    // Mass of a single central pixel is conserved at every angle.
    Image2D dot(33, 33, 0.0);
    dot(16, 16) = 1.0;
    const Sinogram sd = radon_forward(dot, uniform_angles(37));
    for (std::size_t a = 0; a < sd.angle_count(); ++a) {
        double total = 0.0;
        for (double v : sd.profile(a)) total += v;
        CHECK(std::abs(total - 1.0) <= 1e-3);
    }
}

TEST_CASE("backprojection is the adjoint of projection") {
    const auto angles = uniform_angles(23);
    const Image2D x = random_image(24, 3);
    Sinogram y = radon_forward(Image2D(24, 24, 0.0), angles);
    const CounterRng rng(4);
    for (std::size_t i = 0; i < y.values.size(); ++i) y.values[i] = rng.uniform(i, 0);
    const Sinogram ax = radon_forward(x, angles);
    const Image2D aty = backproject(y, 24);
    long double lhs = 0, rhs = 0;
    for (std::size_t i = 0; i < ax.values.size(); ++i) lhs += ax.values[i] * y.values[i];
    for (std::size_t i = 0; i < x.size(); ++i) rhs += x.values()[i] * aty.values()[i];
    CHECK(std::abs(static_cast<double>(lhs - rhs)) <= 1e-9 * static_cast<double>(std::abs(lhs)));
}

TEST_CASE("filtered backprojection of a disk") {
    const Image2D disk = io::disk_phantom(256, 0.6, 1.0);
    const Sinogram s = radon_forward(disk, uniform_angles(180));
    ReconConfig cfg;
    const Image2D rec = fbp(s, cfg);
    CHECK(disk_rmse(rec, 0.6, 1.0, 0.9) < 0.05);

    Sinogram zero = s;
    std::fill(zero.values.begin(), zero.values.end(), 0.0);
    for (double v : fbp(zero, cfg).values()) CHECK(v == 0.0);
}

TEST_CASE("SART reduces the data residual") {
    const Image2D truth = io::ellipses_phantom(64, 1);
    const Sinogram s = radon_forward(truth, uniform_angles(60));
    ReconConfig cfg;
    cfg.method = ReconMethod::Sart;
    cfg.grid_size = 64;
    std::vector<double> hist;
    sart(s, cfg, &hist);
    REQUIRE(hist.size() == cfg.sart_iterations + 1);
    CHECK(hist[1] < hist[0]);
    for (std::size_t i = 1; i < hist.size(); ++i) CHECK(hist[i] <= hist[i - 1] * (1.0 + 1e-12));
}

TEST_CASE("iterative reconstruction at more angles beats sparse FBP") {
    const Image2D truth = io::disk_phantom(128, 0.6, 1.0);
    auto rmse = [&](const Image2D &rec) {
        const auto support = circular_support(128);
        double acc = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            if (!support[i]) continue;
            const double d = rec.values()[i] - truth.values()[i];
            acc += d * d;
            ++n;
        }
        return std::sqrt(acc / static_cast<double>(n));
    };
    ReconConfig sart_cfg;
    sart_cfg.method = ReconMethod::Sart;
    sart_cfg.grid_size = 128;
    ReconConfig fbp_cfg;
    fbp_cfg.grid_size = 128;
    const double e_sart = rmse(reconstruct(radon_forward(truth, uniform_angles(100)), sart_cfg));
    const double e_fbp = rmse(reconstruct(radon_forward(truth, uniform_angles(40)), fbp_cfg));
    CHECK(e_sart < e_fbp);
}

TEST_CASE("reconstruction comparison") {
    const Image2D a = io::ellipses_phantom(64, 2);
    const auto same = recon_compare(a, a);
    CHECK(same.mutual_information == doctest::Approx(same.entropy_a).epsilon(1e-5));
    CHECK(same.symmetric_kl == doctest::Approx(0.0).epsilon(1e-12));

    const Sinogram s = radon_forward(a, uniform_angles(60));
    ReconConfig f, t;
    f.grid_size = t.grid_size = 64;
    t.method = ReconMethod::Sart;
    const auto cmp = recon_compare(reconstruct(s, f), reconstruct(s, t));
    CHECK(cmp.mutual_information > 0.0);
    CHECK(cmp.symmetric_kl > 0.0);
}

TEST_CASE("sinograms from projection stacks") {
    std::vector<Image2D> stack;
    for (std::size_t a = 0; a < 5; ++a) {
        Image2D p(6, 4);
        for (std::size_t r = 0; r < 6; ++r)
            for (std::size_t c = 0; c < 4; ++c) p(r, c) = static_cast<double>(10 * r + c + 100 * a);
        stack.push_back(p);
    }
    const Sinogram one = build_sinogram(stack, 2, 1);
    CHECK(one.detectors == 4);
    CHECK(one.angle_count() == 5);
    CHECK(one.at(3, 4) == 423.0);
    const Sinogram band = build_sinogram(stack, 3, 3);
    CHECK(band.at(1, 0) == doctest::Approx(31.0));
    CHECK(one.angles[1] == doctest::Approx(std::numbers::pi / 5));
    CHECK_THROWS_AS(build_sinogram(stack, 5, 4), Error);

    std::vector<Image2D> constant(100, Image2D(1100, 972, 0.7));
    const Sinogram big = build_sinogram(constant, 550, 100);
    CHECK(big.detectors == 972);
    CHECK(big.angle_count() == 100);
    for (double v : big.values) CHECK(v == doctest::Approx(0.7));

    const std::vector<std::size_t> cols{4, 0};
    const Sinogram sel = select_angles(one, cols);
    CHECK(sel.angle_count() == 2);
    CHECK(sel.at(0, 0) == one.at(0, 4));
    CHECK(sel.angles[1] == one.angles[0]);
}
