#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "xrminfo/core/error.hpp"
#include "xrminfo/core/fft.hpp"
#include "xrminfo/io/phantom.hpp"
#include "xrminfo/metrics/information.hpp"
#include "xrminfo/metrics/normalize.hpp"
#include "xrminfo/operators/denoise.hpp"
#include "xrminfo/operators/registration.hpp"

using namespace xrminfo;
using namespace xrminfo::operators;

namespace {

std::ptrdiff_t mirror(std::ptrdiff_t i, std::ptrdiff_t n) {
    while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - 1 - i;
    return i;
}

Image2D random_image(std::size_t h, std::size_t w, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Image2D img(h, w);
    for (double &v : img.values()) v = u(rng);
    return img;
}

// Circular translation by a phase ramp: out(r, c) = in(r - dy, c - dx).
Image2D fourier_shift(const Image2D &img, Shift2D s) {
    const std::size_t h = img.height(), w = img.width();
    std::vector<Complex> buf(img.values().begin(), img.values().end());
    auto spec = fft2d(buf, h, w, FftDirection::Forward);
    auto freq = [](std::size_t k, std::size_t n) {
        return (k <= n / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n)) /
               static_cast<double>(n);
    };
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c)
            spec[r * w + c] *= std::polar(1.0, -2.0 * M_PI * (freq(r, h) * s.dy + freq(c, w) * s.dx));
    const auto back = fft2d(spec, h, w, FftDirection::Inverse);
    Image2D out(h, w);
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] = back[i].real();
    return out;
}

template <typename E> ErrorCategory category_of(E &&fn) {
    try {
        fn();
    } catch (const Error &e) {
        return e.category();
    }
    return ErrorCategory::Spec; // sentinel, never expected
}

} // namespace

TEST_CASE("reflect_index mirrors with edge repetition") {
    CHECK(reflect_index(-1, 5) == 0);
    CHECK(reflect_index(-2, 5) == 1);
    CHECK(reflect_index(5, 5) == 4);
    CHECK(reflect_index(6, 5) == 3);
    for (std::ptrdiff_t i = -12; i < 20; ++i) CHECK(reflect_index(i, 5) == static_cast<std::size_t>(mirror(i, 5)));
}

TEST_CASE("gaussian blur of a single pixel matches direct convolution") {
    Image2D img(7, 7, 0.0);
    img(3, 3) = 2.0;
    const Image2D out = gaussian_filter(img, 1.0);
    const int radius = 4;
    std::vector<double> w(2 * radius + 1);
    double total = 0;
    for (int k = -radius; k <= radius; ++k) total += w[k + radius] = std::exp(-0.5 * k * k);
    for (double &x : w) x /= total;
    double mass = 0.0;
    for (std::ptrdiff_t y = 0; y < 7; ++y) {
        for (std::ptrdiff_t x = 0; x < 7; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                for (int l = -radius; l <= radius; ++l)
                    acc += w[k + radius] * w[l + radius] * img(mirror(y - k, 7), mirror(x - l, 7));
            CHECK(out(y, x) == doctest::Approx(acc).epsilon(1e-13));
            mass += out(y, x);
        }
    }
    CHECK(mass == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("non-local means agrees with a brute-force implementation") {
    const Image2D img = random_image(9, 10, 4);
    const std::size_t patch = 3, search = 5;
    const double h = 0.3, sigma = 0.05;
    const Image2D out = nlm_filter(img, patch, search, h, sigma);
    const auto H = static_cast<std::ptrdiff_t>(img.height()), W = static_cast<std::ptrdiff_t>(img.width());
    const auto at = [&](std::ptrdiff_t y, std::ptrdiff_t x) { return img(mirror(y, H), mirror(x, W)); };
    for (std::ptrdiff_t y = 0; y < H; ++y) {
        for (std::ptrdiff_t x = 0; x < W; ++x) {
            double num = 0, den = 0;
            for (int dy = -2; dy <= 2; ++dy) {
                for (int dx = -2; dx <= 2; ++dx) {
                    const std::ptrdiff_t qy = mirror(y + dy, H), qx = mirror(x + dx, W);
                    // Patch distance: mean over the window of the pixelwise
                    // offset-difference field, itself reflected at the border.
                    double d2 = 0;
                    for (int py = -1; py <= 1; ++py) {
                        for (int px = -1; px <= 1; ++px) {
                            const std::ptrdiff_t sy = mirror(y + py, H), sx = mirror(x + px, W);
                            const double diff = at(sy, sx) - at(sy + dy, sx + dx);
                            d2 += diff * diff;
                        }
                    }
                    d2 = std::max(d2 / 9.0 - 2 * sigma * sigma, 0.0);
                    const double wgt = std::exp(-d2 / (h * h));
                    num += wgt * img(qy, qx);
                    den += wgt;
                }
            }
            CHECK(out(y, x) == doctest::Approx(num / den).epsilon(1e-12));
        }
    }
}

TEST_CASE("non-local means with h = 0 keeps only identical patches") {
    const Image2D img = random_image(8, 8, 9);
    const Image2D out = nlm_filter(img, 3, 5, 0.0, 0.0);
    for (std::size_t i = 0; i < img.size(); ++i) CHECK(out.values()[i] == doctest::Approx(img.values()[i]).epsilon(1e-14));
}

TEST_CASE("constant images are fixed points of every denoiser") {
    const Image2D flat(16, 16, 0.4);
    for (auto m : {DenoiseMethod::Gaussian, DenoiseMethod::Nlm, DenoiseMethod::Tv}) {
        DenoiseParams p;
        p.method = m;
        const Image2D out = denoise(flat, p);
        for (double v : out.values()) CHECK(v == doctest::Approx(0.4).epsilon(1e-12));
    }
}

TEST_CASE("TV denoising keeps the mean and lowers total variation") {
    Image2D img = random_image(32, 32, 2);
    const Image2D out = tv_chambolle(img, 0.1, 100);
    auto mean = [](const Image2D &x) {
        double s = 0;
        for (double v : x.values()) s += v;
        return s / static_cast<double>(x.size());
    };
    auto tv = [](const Image2D &x) {
        double s = 0;
        for (std::size_t y = 0; y < x.height(); ++y)
            for (std::size_t c = 0; c < x.width(); ++c) {
                const double gx = c + 1 < x.width() ? x(y, c + 1) - x(y, c) : 0.0;
                const double gy = y + 1 < x.height() ? x(y + 1, c) - x(y, c) : 0.0;
                s += std::sqrt(gx * gx + gy * gy);
            }
        return s;
    };
    CHECK(mean(out) == doctest::Approx(mean(img)).epsilon(1e-3));
    CHECK(tv(out) < 0.5 * tv(img));
}

TEST_CASE("noise estimate recovers the level of white noise") {
    Image2D img(256, 256, 0.5);
    io::add_gaussian_noise(img, 0.05, 3);
    CHECK(estimate_noise_sigma(img) == doctest::Approx(0.05).epsilon(0.05));
}

TEST_CASE("denoise parameter validation") {
    DenoiseParams p;
    p.nlm_patch = 4;
    CHECK(category_of([&] { p.validate(); }) == ErrorCategory::Param);
    p = {};
    p.nlm_patch = 13;
    CHECK(category_of([&] { p.validate(); }) == ErrorCategory::Param);
    p = {};
    p.tv_weight = 0;
    CHECK(category_of([&] { p.validate(); }) == ErrorCategory::Param);
    CHECK(category_of([] { (void)parse_method("median"); }) == ErrorCategory::Param);
}

TEST_CASE("translate examples") {
    const Image2D img = random_image(6, 5, 1);
    const Image2D same = translate(img, {0, 0});
    for (std::size_t i = 0; i < img.size(); ++i) CHECK(same.values()[i] == img.values()[i]);

    const Image2D sq(2, 2, std::vector<double>{1, 2, 3, 4});
    const Image2D down = translate(sq, {1, 0}, 0.0);
    CHECK(down.values()[0] == 0.0);
    CHECK(down.values()[1] == 0.0);
    CHECK(down.values()[2] == 1.0);
    CHECK(down.values()[3] == 2.0);

    const Image2D col(3, 1, std::vector<double>{0, 1, 0});
    const Image2D half = translate(col, {0.5, 0});
    CHECK(half.values()[0] == 0.0);
    CHECK(half.values()[1] == doctest::Approx(0.5));
    CHECK(half.values()[2] == doctest::Approx(0.5));
}

TEST_CASE("translate matches a bilinear oracle") {
    const Image2D img = random_image(9, 11, 6);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int t = 0; t < 10; ++t) {
        const Shift2D s{u(rng), u(rng)};
        const double fill = 0.25;
        const Image2D out = translate(img, s, fill);
        for (std::size_t r = 0; r < img.height(); ++r) {
            for (std::size_t c = 0; c < img.width(); ++c) {
                const double sy = static_cast<double>(r) - s.dy, sx = static_cast<double>(c) - s.dx;
                const double y0 = std::floor(sy), x0 = std::floor(sx);
                double acc = 0;
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b) {
                        const double wy = a ? sy - y0 : 1 - (sy - y0);
                        const double wx = b ? sx - x0 : 1 - (sx - x0);
                        const double yy = y0 + a, xx = x0 + b;
                        const bool in = yy >= 0 && xx >= 0 && yy < 9 && xx < 11;
                        acc += wy * wx * (in ? img(static_cast<std::size_t>(yy), static_cast<std::size_t>(xx)) : fill);
                    }
                CHECK(out(r, c) == doctest::Approx(acc).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("translate carries the mask and drops pixels that leave it") {
    Image2D img(4, 4, 1.0);
    img.set_mask(std::vector<std::uint8_t>(16, 1));
    const Image2D out = translate(img, {1, 0});
    REQUIRE(out.has_mask());
    for (std::size_t c = 0; c < 4; ++c) CHECK_FALSE(out.analyzed(c));
    for (std::size_t i = 4; i < 16; ++i) CHECK(out.analyzed(i));
}

TEST_CASE("phase correlation recovers integer and subpixel shifts") {
    const Image2D ref = io::ellipses_phantom(128, 3);
    CHECK(estimate_shift(ref, ref).dy == 0.0);
    CHECK(estimate_shift(ref, ref).dx == 0.0);
    const Shift2D e = estimate_shift(ref, translate(ref, {5, -3}, 0.0), 100);
    CHECK(std::abs(e.dy + 5) <= 0.05);
    CHECK(std::abs(e.dx - 3) <= 0.05);
    // Ideal (Fourier) subpixel translation.
    for (const Shift2D s : {Shift2D{2.25, -1.5}, Shift2D{-0.4, 0.7}, Shift2D{0.5, 0.25}}) {
        const Shift2D f = estimate_shift(ref, fourier_shift(ref, s), 100);
        CHECK(std::abs(f.dy + s.dy) <= 0.05);
        CHECK(std::abs(f.dx + s.dx) <= 0.05);
    }
}

TEST_CASE("bilinear subpixel shifts carry the interpolator's phase bias") {
    // Linear interpolation has a nonlinear phase response except at half-pixel
    // offsets, so whitened correlation pulls quarter-pixel shifts toward the
    // grid. Pin the size of that effect.
    const Image2D ref = io::ellipses_phantom(128, 3);
    const Shift2D e = estimate_shift(ref, translate(ref, {2.25, -1.5}, 0.0), 100);
    CHECK(std::abs(e.dx - 1.5) <= 0.05);
    CHECK(std::abs(e.dy + 2.25) <= 0.2);
    CHECK(std::abs(e.dy + 2.25) > 0.05);
}

TEST_CASE("registration of an aligned pair is the identity") {
    const Image2D ref = io::ellipses_phantom(64, 1);
    const auto r = register_to(ref, ref);
    CHECK(r.shift.dy == 0.0);
    CHECK(r.shift.dx == 0.0);
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(r.registered.values()[i] == ref.values()[i]);
}

TEST_CASE("registration never lowers MI against the reference") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        Image2D ref = io::ellipses_phantom(96, seed);
        io::add_gaussian_noise(ref, 0.01, seed);
        const auto crop = central_crop_mask(96, 96, 0.8);
        const Shift2D s{3.5 * static_cast<double>(seed % 2 ? 1 : -1), -2.0};
        Image2D mis = translate(ref, s, 0.0);
        Image2D reg = register_to(ref, mis).registered;
        ref.set_mask(crop);
        mis.set_mask(crop);
        reg.set_mask(crop);
        const auto b = metrics::fit_normalization(ref);
        const Image2D rn = metrics::apply_normalization(ref, b);
        const double mi_mis = metrics::mutual_information(metrics::apply_normalization(mis, b), rn);
        const double mi_reg = metrics::mutual_information(metrics::apply_normalization(reg, b), rn);
        CHECK(mi_reg >= mi_mis);
    }
}

TEST_CASE("registration input errors") {
    CHECK(category_of([] { (void)estimate_shift(Image2D(4, 4, 1.0), Image2D(4, 5, 1.0)); }) == ErrorCategory::Shape);
    CHECK(category_of([] { (void)estimate_shift(Image2D(4, 4, 0.0), Image2D(4, 4, 1.0)); }) ==
          ErrorCategory::DegenerateInput);
    CHECK(category_of([] { (void)translate(Image2D(4, 4, 1.0), {NAN, 0}); }) == ErrorCategory::Param);
}
