#include "xrminfo/io/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "xrminfo/core/error.hpp"
#include "xrminfo/core/random.hpp"

namespace xrminfo::io {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kProjectionScale = 1.6;
constexpr std::uint32_t kLayoutStream = 7;

void check_size(std::size_t size) {
    if (size < 16) fail(ErrorCategory::Param, "phantom size must be at least 16");
}

// Normalized coordinate of sub-sample s (of n) inside pixel index i.
inline double coord(std::size_t i, std::size_t s, std::size_t n, std::size_t size) {
    const double pos = static_cast<double>(i) + (static_cast<double>(s) + 0.5) / static_cast<double>(n);
    return 2.0 * pos / static_cast<double>(size) - 1.0;
}

// Pixel index range [lo, hi) whose extent touches the normalized interval.
std::pair<std::size_t, std::size_t> pixel_span(double lo, double hi, std::size_t size) {
    const double n = static_cast<double>(size);
    const double a = std::floor((lo + 1.0) * n / 2.0) - 1.0;
    const double b = std::ceil((hi + 1.0) * n / 2.0) + 1.0;
    return {static_cast<std::size_t>(std::clamp(a, 0.0, n)), static_cast<std::size_t>(std::clamp(b, 0.0, n))};
}

} // namespace

Image2D render_ellipses(std::size_t size, std::span<const Ellipse> ellipses, std::size_t supersample) {
    check_size(size);
    if (supersample == 0) fail(ErrorCategory::Param, "supersample must be positive");
    Image2D out(size, size, 0.0);
    const double inv = 1.0 / static_cast<double>(supersample * supersample);
    for (const auto &e : ellipses) {
        const double ca = std::cos(e.angle), sa = std::sin(e.angle);
        const double ext = std::max(e.a, e.b);
        const auto [c0, c1] = pixel_span(e.cx - ext, e.cx + ext, size);
        // Rows run top to bottom, so y = +1 is row 0.
        const auto [r0, r1] = pixel_span(-e.cy - ext, -e.cy + ext, size);
        for (std::size_t r = r0; r < r1; ++r) {
            for (std::size_t c = c0; c < c1; ++c) {
                std::size_t hits = 0;
                for (std::size_t sy = 0; sy < supersample; ++sy) {
                    const double y = -coord(r, sy, supersample, size) - e.cy;
                    for (std::size_t sx = 0; sx < supersample; ++sx) {
                        const double x = coord(c, sx, supersample, size) - e.cx;
                        const double u = (x * ca + y * sa) / e.a;
                        const double v = (-x * sa + y * ca) / e.b;
                        if (u * u + v * v <= 1.0) ++hits;
                    }
                }
                if (hits) out(r, c) += e.value * static_cast<double>(hits) * inv;
            }
        }
    }
    return out;
}

Image2D disk_phantom(std::size_t size, double radius, double value) {
    if (!(radius > 0.0)) fail(ErrorCategory::Param, "disk radius must be positive");
    const Ellipse e{0.0, 0.0, radius, radius, 0.0, value};
    return render_ellipses(size, std::span<const Ellipse>(&e, 1));
}

std::vector<Ellipse> shepp_logan_ellipses() {
    return {
        {0.0, 0.0, 0.69, 0.92, 0.0, 1.0},
        {0.0, -0.0184, 0.6624, 0.874, 0.0, -0.8},
        {0.22, 0.0, 0.11, 0.31, -18.0 * kDeg, -0.2},
        {-0.22, 0.0, 0.16, 0.41, 18.0 * kDeg, -0.2},
        {0.0, 0.35, 0.21, 0.25, 0.0, 0.1},
        {0.0, 0.1, 0.046, 0.046, 0.0, 0.1},
        {0.0, -0.1, 0.046, 0.046, 0.0, 0.1},
        {-0.08, -0.605, 0.046, 0.023, 0.0, 0.1},
        {0.0, -0.606, 0.023, 0.023, 0.0, 0.1},
        {0.06, -0.605, 0.023, 0.046, 0.0, 0.1},
    };
}

Image2D ellipses_phantom(std::size_t size, std::uint64_t seed, const EllipsesOptions &opt) {
    auto ellipses = shepp_logan_ellipses();
    const CounterRng rng(seed);
    for (std::size_t i = 0; i < opt.texture_count; ++i) {
        const auto u = [&](std::uint32_t k) { return rng.uniform(i, kLayoutStream, k); };
        const double rad = 0.6 * std::sqrt(u(0));
        const double phi = 2.0 * std::numbers::pi * u(1);
        ellipses.push_back({rad * std::cos(phi), rad * std::sin(phi), 0.02 + 0.06 * u(2), 0.02 + 0.06 * u(3),
                            std::numbers::pi * u(4), opt.texture_amplitude * (2.0 * u(5) - 1.0)});
    }
    Image2D img = render_ellipses(size, ellipses);
    if (opt.noise_sigma > 0.0) add_gaussian_noise(img, opt.noise_sigma, seed, 1);
    return img;
}

std::vector<Ellipsoid> sequence_ellipsoids(std::uint64_t seed, std::size_t inclusions) {
    std::vector<Ellipsoid> bodies{
        {0.0, 0.0, 0.0, 0.62, 0.78, 0.56, 1.0},
        {0.0, 0.0, 0.0, 0.54, 0.70, 0.48, -0.7},
    };
    const CounterRng rng(seed);
    for (std::size_t i = 0; i < inclusions; ++i) {
        const auto u = [&](std::uint32_t k) { return rng.uniform(i, kLayoutStream, k); };
        const double s = 0.05 + 0.12 * u(0);
        bodies.push_back({0.7 * (0.54 - s) * (2.0 * u(1) - 1.0), 0.7 * (0.70 - s) * (2.0 * u(2) - 1.0),
                          0.7 * (0.48 - s) * (2.0 * u(3) - 1.0), s * (0.6 + 0.8 * u(4)), s * (0.6 + 0.8 * u(5)),
                          s * (0.6 + 0.8 * u(6)), 0.2 + 0.8 * u(7)});
    }
    return bodies;
}

Image2D project_ellipsoids(std::size_t size, std::span<const Ellipsoid> bodies, double angle) {
    check_size(size);
    constexpr std::size_t ss = 2;
    Image2D out(size, size, 0.0);
    const double ct = std::cos(angle), st = std::sin(angle);
    for (const auto &e : bodies) {
        // The body rotated about the vertical axis casts an elliptical
        // footprint of half-width w; its chord through the centre is 2ac/w.
        const double w = std::sqrt(e.a * e.a * ct * ct + e.c * e.c * st * st);
        const double uc = e.x * ct + e.z * st;
        const double peak = 2.0 * e.mu * e.a * e.c / w / kProjectionScale;
        const auto [c0, c1] = pixel_span(uc - w, uc + w, size);
        const auto [r0, r1] = pixel_span(-e.y - e.b, -e.y + e.b, size);
        for (std::size_t r = r0; r < r1; ++r) {
            for (std::size_t c = c0; c < c1; ++c) {
                double acc = 0.0;
                for (std::size_t sy = 0; sy < ss; ++sy) {
                    const double v = (-coord(r, sy, ss, size) - e.y) / e.b;
                    for (std::size_t sx = 0; sx < ss; ++sx) {
                        const double u = (coord(c, sx, ss, size) - uc) / w;
                        const double q = 1.0 - u * u - v * v;
                        if (q > 0.0) acc += std::sqrt(q);
                    }
                }
                out(r, c) += peak * acc / static_cast<double>(ss * ss);
            }
        }
    }
    return out;
}

std::vector<Image2D> rotating_sequence(std::size_t size, std::uint64_t seed, const SequenceOptions &opt) {
    check_size(size);
    if (opt.frames == 0) fail(ErrorCategory::Param, "sequence needs at least one frame");
    const auto bodies = sequence_ellipsoids(seed, opt.inclusions);
    std::vector<Image2D> frames;
    frames.reserve(opt.frames);
    for (std::size_t j = 0; j < opt.frames; ++j) {
        const double offset = static_cast<double>(j) * opt.step;
        Image2D f = project_ellipsoids(size, bodies, opt.start + offset);
        const double flux = 1.0 + opt.flux_drift * offset;
        for (double &v : f.values()) v = flux * std::exp(-opt.attenuation * v);
        if (opt.noise_sigma > 0.0) add_gaussian_noise(f, opt.noise_sigma, seed, static_cast<std::uint32_t>(100 + j));
        frames.push_back(std::move(f));
    }
    return frames;
}

PhantomKind parse_phantom_kind(std::string_view name) {
    if (name == "disk") return PhantomKind::Disk;
    if (name == "ellipses") return PhantomKind::Ellipses;
    if (name == "rotating_sequence") return PhantomKind::RotatingSequence;
    fail(ErrorCategory::Param, "unknown phantom kind '" + std::string(name) + "'");
}

std::string_view phantom_kind_name(PhantomKind kind) noexcept {
    switch (kind) {
    case PhantomKind::Disk: return "disk";
    case PhantomKind::Ellipses: return "ellipses";
    case PhantomKind::RotatingSequence: return "rotating_sequence";
    }
    return "unknown";
}

std::vector<Image2D> make_phantom(PhantomKind kind, std::size_t size, std::uint64_t seed) {
    switch (kind) {
    case PhantomKind::Disk: return {disk_phantom(size)};
    case PhantomKind::Ellipses: return {ellipses_phantom(size, seed)};
    case PhantomKind::RotatingSequence: return rotating_sequence(size, seed);
    }
    return {};
}

void add_gaussian_noise(Image2D &image, double sigma, std::uint64_t seed, std::uint32_t stream) {
    if (!(sigma >= 0.0)) fail(ErrorCategory::Param, "noise sigma must be nonnegative");
    const CounterRng rng(seed);
    auto v = image.values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += sigma * rng.normal(i, stream);
}

} // namespace xrminfo::io
