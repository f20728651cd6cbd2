#include "xrminfo/recon/reconstruct.hpp"

#include <cmath>
#include <numbers>
#include <optional>

#include "xrminfo/core/error.hpp"
#include "xrminfo/core/fft.hpp"
#include "xrminfo/metrics/information.hpp"

namespace xrminfo::recon {
namespace {

// Detector weights of one pixel: bins first .. first + 2.
struct Footprint {
    std::ptrdiff_t first;
    double w[3];
};

// Integral of a unit ramp: s^2/2 for s > 0.
inline double ramp2(double s) noexcept { return s > 0.0 ? 0.5 * s * s : 0.0; }

// Per-angle geometry. A unit square pixel casts a trapezoidal shadow on the
// detector, the convolution of boxes of widths |cos a| and |sin a|; each bin
// receives the shadow's integral over its unit interval.
class AngleGeometry {
public:
    AngleGeometry(std::size_t grid, std::size_t detectors, double angle)
        : grid_(grid), centre_((static_cast<double>(grid) - 1.0) / 2.0),
          det_centre_((static_cast<double>(detectors) - 1.0) / 2.0), cos_(std::cos(angle)),
          sin_(std::sin(angle)) {
        wide_ = std::max(std::abs(cos_), std::abs(sin_));
        narrow_ = std::min(std::abs(cos_), std::abs(sin_));
        half_ = 0.5 * (wide_ + narrow_);
    }

    Footprint at(std::size_t r, std::size_t c) const noexcept {
        const double x = static_cast<double>(c) - centre_;
        const double y = centre_ - static_cast<double>(r);
        const double u = x * cos_ + y * sin_ + det_centre_;
        Footprint f{};
        f.first = static_cast<std::ptrdiff_t>(std::floor(u - half_ + 0.5));
        double prev = cdf(static_cast<double>(f.first) - 0.5 - u);
        for (int k = 0; k < 3; ++k) {
            const double next = cdf(static_cast<double>(f.first + k) + 0.5 - u);
            f.w[k] = next - prev;
            prev = next;
        }
        return f;
    }

    std::size_t grid() const noexcept { return grid_; }

private:
    // Shadow mass to the left of offset t from the pixel's projected centre.
    double cdf(double t) const noexcept {
        if (t <= -half_) return 0.0;
        if (t >= half_) return 1.0;
        if (narrow_ < 1e-9) return (t + 0.5 * wide_) / wide_;
        const double d = 0.5 * (wide_ - narrow_);
        return (ramp2(t + half_) - ramp2(t + d) - ramp2(t - d) + ramp2(t - half_)) / (wide_ * narrow_);
    }

    std::size_t grid_;
    double centre_;
    double det_centre_;
    double cos_;
    double sin_;
    double wide_ = 1.0;
    double narrow_ = 0.0;
    double half_ = 0.5;
};

void check_angles(const Sinogram &s) {
    s.validate();
    if (s.angle_count() < 2) fail(ErrorCategory::Param, "reconstruction needs at least 2 angles");
}

// Forward projection of one angle restricted to pixels with support != 0.
void project_angle(const std::vector<double> &x, const std::vector<std::uint8_t> *support,
                   const AngleGeometry &g, std::vector<double> &out) {
    const auto d = static_cast<std::ptrdiff_t>(out.size());
    std::fill(out.begin(), out.end(), 0.0);
    const std::size_t n = g.grid();
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const std::size_t p = r * n + c;
            if (support && !(*support)[p]) continue;
            const double v = x[p];
            if (v == 0.0) continue;
            const Footprint f = g.at(r, c);
            for (int k = 0; k < 3; ++k) {
                const std::ptrdiff_t b = f.first + k;
                if (b >= 0 && b < d) out[static_cast<std::size_t>(b)] += v * f.w[k];
            }
        }
    }
}

// Footprint-weighted sum of a profile; `weight` receives the in-range weight.
inline double sample(const std::vector<double> &profile, const Footprint &f, double *weight = nullptr) {
    const auto d = static_cast<std::ptrdiff_t>(profile.size());
    double v = 0.0, w = 0.0;
    for (int k = 0; k < 3; ++k) {
        const std::ptrdiff_t b = f.first + k;
        if (b >= 0 && b < d) {
            v += f.w[k] * profile[static_cast<std::size_t>(b)];
            w += f.w[k];
        }
    }
    if (weight) *weight = w;
    return v;
}

std::vector<double> ramp_filter(std::size_t padded) {
    std::vector<Complex> kernel(padded, Complex{});
    kernel[0] = 0.25;
    for (std::size_t i = 1; i < padded; i += 2) {
        const double dist = static_cast<double>(std::min(i, padded - i));
        kernel[i] = -1.0 / (std::numbers::pi * std::numbers::pi * dist * dist);
    }
    const auto spectrum = fft1d(kernel, FftDirection::Forward);
    std::vector<double> filter(padded);
    for (std::size_t i = 0; i < padded; ++i) filter[i] = 2.0 * spectrum[i].real();
    return filter;
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

} // namespace

void ReconConfig::validate() const {
    if (grid_size == 0) fail(ErrorCategory::Param, "grid size must be positive");
    if (sart_iterations == 0) fail(ErrorCategory::Param, "SART needs at least one iteration");
    if (!(sart_relaxation > 0.0 && sart_relaxation < 2.0)) fail(ErrorCategory::Param, "SART relaxation must lie in (0,2)");
}

std::vector<std::uint8_t> circular_support(std::size_t grid_size) {
    const double centre = (static_cast<double>(grid_size) - 1.0) / 2.0;
    const double radius = static_cast<double>(grid_size) / 2.0;
    std::vector<std::uint8_t> mask(grid_size * grid_size, 0);
    for (std::size_t r = 0; r < grid_size; ++r) {
        for (std::size_t c = 0; c < grid_size; ++c) {
            const double x = static_cast<double>(c) - centre;
            const double y = centre - static_cast<double>(r);
            mask[r * grid_size + c] = (x * x + y * y <= radius * radius) ? 1 : 0;
        }
    }
    return mask;
}

Sinogram project(const Image2D &image, std::span<const double> angles, std::size_t detectors) {
    if (image.height() != image.width()) fail(ErrorCategory::Shape, "forward projection needs a square image");
    const std::size_t n = image.width();
    Sinogram s;
    s.detectors = detectors;
    s.angles.assign(angles.begin(), angles.end());
    s.values.assign(detectors * angles.size(), 0.0);
    const std::vector<double> x(image.values().begin(), image.values().end());
    std::vector<double> prof(detectors);
    for (std::size_t a = 0; a < angles.size(); ++a) {
        project_angle(x, nullptr, AngleGeometry(n, detectors, angles[a]), prof);
        for (std::size_t d = 0; d < detectors; ++d) s.at(d, a) = prof[d];
    }
    return s;
}

Sinogram radon_forward(const Image2D &image, std::span<const double> angles) {
    if (image.height() != image.width()) fail(ErrorCategory::Shape, "forward projection needs a square image");
    return project(image, angles, image.width());
}

Image2D backproject(const Sinogram &s, std::size_t grid_size) {
    Image2D out(grid_size, grid_size, 0.0);
    for (std::size_t a = 0; a < s.angle_count(); ++a) {
        const AngleGeometry g(grid_size, s.detectors, s.angles[a]);
        const auto prof = s.profile(a);
        for (std::size_t r = 0; r < grid_size; ++r) {
            for (std::size_t c = 0; c < grid_size; ++c) out(r, c) += sample(prof, g.at(r, c));
        }
    }
    return out;
}

Image2D fbp(const Sinogram &s, const ReconConfig &cfg) {
    cfg.validate();
    check_angles(s);
    const std::size_t padded = std::max<std::size_t>(64, next_pow2(2 * s.detectors));
    const auto filter = ramp_filter(padded);
    Sinogram filtered = s;
    std::vector<Complex> buf(padded);
    for (std::size_t a = 0; a < s.angle_count(); ++a) {
        std::fill(buf.begin(), buf.end(), Complex{});
        for (std::size_t d = 0; d < s.detectors; ++d) buf[d] = s.at(d, a);
        auto spec = fft1d(buf, FftDirection::Forward);
        for (std::size_t i = 0; i < padded; ++i) spec[i] *= filter[i];
        const auto back = fft1d(spec, FftDirection::Inverse);
        for (std::size_t d = 0; d < s.detectors; ++d) filtered.at(d, a) = back[d].real();
    }
    Image2D out = backproject(filtered, cfg.grid_size);
    const double scale = std::numbers::pi / (2.0 * static_cast<double>(s.angle_count()));
    for (double &v : out.values()) v *= scale;
    if (cfg.circular_mask) {
        const auto support = circular_support(cfg.grid_size);
        auto v = out.values();
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!support[i]) v[i] = 0.0;
        }
    }
    return out;
}

double data_residual(const Image2D &image, const Sinogram &s) {
    const Sinogram p = project(image, s.angles, s.detectors);
    double ss = 0.0;
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        const double d = p.values[i] - s.values[i];
        ss += d * d;
    }
    return std::sqrt(ss);
}

Image2D sart(const Sinogram &s, const ReconConfig &cfg, std::vector<double> *residual_history) {
    cfg.validate();
    check_angles(s);
    const std::size_t n = cfg.grid_size;
    const std::size_t npix = n * n;
    std::optional<std::vector<std::uint8_t>> support;
    if (cfg.circular_mask) support = circular_support(n);
    const std::vector<std::uint8_t> *sup = support ? &*support : nullptr;
    const std::size_t unknowns =
        support ? static_cast<std::size_t>(std::count(support->begin(), support->end(), 1)) : npix;

    // Uniform start matching the mean total projected mass.
    double mass = 0.0;
    for (double v : s.values) mass += v;
    mass /= static_cast<double>(s.angle_count());
    std::vector<double> x(npix, 0.0);
    for (std::size_t p = 0; p < npix; ++p) {
        if (!sup || (*sup)[p]) x[p] = mass / static_cast<double>(unknowns);
    }

    std::vector<AngleGeometry> geoms;
    geoms.reserve(s.angle_count());
    for (double a : s.angles) geoms.emplace_back(n, s.detectors, a);

    // Ray sums of the system matrix per angle (forward projection of ones).
    const std::vector<double> ones(npix, 1.0);
    std::vector<std::vector<double>> ray_sums(s.angle_count(), std::vector<double>(s.detectors));
    for (std::size_t a = 0; a < s.angle_count(); ++a) project_angle(ones, sup, geoms[a], ray_sums[a]);

    auto residual = [&] {
        Image2D img(n, n, x);
        return data_residual(img, s);
    };
    if (residual_history) residual_history->push_back(residual());

    std::vector<double> proj(s.detectors), corr(s.detectors);
    for (std::size_t it = 0; it < cfg.sart_iterations; ++it) {
        for (std::size_t a = 0; a < s.angle_count(); ++a) {
            const AngleGeometry &g = geoms[a];
            project_angle(x, sup, g, proj);
            for (std::size_t k = 0; k < s.detectors; ++k) {
                const double rs = ray_sums[a][k];
                corr[k] = rs > 1e-12 ? (s.at(k, a) - proj[k]) / rs : 0.0;
            }
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t c = 0; c < n; ++c) {
                    const std::size_t p = r * n + c;
                    if (sup && !(*sup)[p]) continue;
                    double col = 0.0;
                    const double num = sample(corr, g.at(r, c), &col);
                    if (col > 1e-12) x[p] += cfg.sart_relaxation * num / col;
                }
            }
        }
        if (residual_history) residual_history->push_back(residual());
    }
    return Image2D(n, n, std::move(x));
}

Image2D reconstruct(const Sinogram &s, const ReconConfig &cfg) {
    return cfg.method == ReconMethod::Fbp ? fbp(s, cfg) : sart(s, cfg);
}

ReconComparison recon_compare(const Image2D &a, const Image2D &b, const metrics::NormalizationSpec &norm,
                              const metrics::HistogramSpec &hist) {
    if (!a.same_shape(b)) fail(ErrorCategory::Shape, "reconstructions differ in shape");
    const Image2D na = metrics::normalize(a, norm);
    const Image2D nb = metrics::normalize(b, norm);
    const auto ha = metrics::histogram(na, hist);
    const auto hb = metrics::histogram(nb, hist);
    return {metrics::entropy(ha), metrics::entropy(hb), metrics::mutual_information(na, nb, hist),
            metrics::symmetric_kl(ha, hb)};
}

} // namespace xrminfo::recon
