#include "xrminfo/operators/registration.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "xrminfo/core/error.hpp"
#include "xrminfo/core/fft.hpp"

namespace xrminfo::operators {
namespace {

constexpr double kTaperFraction = 0.25;

// Signed DFT frequency index for position k of an n-point transform.
inline double signed_freq(std::size_t k, std::size_t n) {
    return k < (n + 1) / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
}

std::vector<Complex> windowed_spectrum(const Image2D &img, const std::vector<double> &wy,
                                       const std::vector<double> &wx) {
    const auto v = img.values();
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    std::vector<Complex> buf(v.size());
    for (std::size_t r = 0; r < img.height(); ++r) {
        for (std::size_t c = 0; c < img.width(); ++c) {
            buf[r * img.width() + c] = (img(r, c) - mean) * wy[r] * wx[c];
        }
    }
    return fft2d(buf, img.height(), img.width(), FftDirection::Forward);
}

bool all_zero(const Image2D &img) {
    const auto v = img.values();
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

} // namespace

Image2D translate(const Image2D &image, Shift2D shift, double fill) {
    if (!std::isfinite(shift.dy) || !std::isfinite(shift.dx)) {
        fail(ErrorCategory::Param, "shift must be finite");
    }
    const auto h = static_cast<std::ptrdiff_t>(image.height());
    const auto w = static_cast<std::ptrdiff_t>(image.width());
    Image2D out(image.height(), image.width(), fill);
    std::vector<std::uint8_t> mask;
    if (image.has_mask()) mask.assign(image.size(), 0);

    for (std::ptrdiff_t r = 0; r < h; ++r) {
        const double sy = static_cast<double>(r) - shift.dy;
        const double y0 = std::floor(sy);
        const double fy = sy - y0;
        for (std::ptrdiff_t c = 0; c < w; ++c) {
            const double sx = static_cast<double>(c) - shift.dx;
            const double x0 = std::floor(sx);
            const double fx = sx - x0;
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y0);
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(x0);
            const double wts[4] = {(1 - fy) * (1 - fx), (1 - fy) * fx, fy * (1 - fx), fy * fx};
            const std::ptrdiff_t ys[4] = {iy, iy, iy + 1, iy + 1};
            const std::ptrdiff_t xs[4] = {ix, ix + 1, ix, ix + 1};
            double acc = 0.0;
            bool valid = true;
            for (int k = 0; k < 4; ++k) {
                if (wts[k] == 0.0) continue;
                const bool inside = ys[k] >= 0 && ys[k] < h && xs[k] >= 0 && xs[k] < w;
                if (inside) {
                    const auto idx = static_cast<std::size_t>(ys[k] * w + xs[k]);
                    acc += wts[k] * image.values()[idx];
                    valid = valid && image.analyzed(idx);
                } else {
                    acc += wts[k] * fill;
                    valid = false;
                }
            }
            out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = acc;
            if (!mask.empty()) mask[static_cast<std::size_t>(r * w + c)] = valid ? 1 : 0;
        }
    }
    if (!mask.empty()) out.set_mask(std::move(mask));
    return out;
}

std::vector<double> cosine_taper(std::size_t n, double fraction) {
    std::vector<double> win(n, 1.0);
    if (n < 2 || fraction <= 0.0) return win;
    const double alpha = std::min(fraction, 1.0);
    const double m = static_cast<double>(n - 1);
    const double edge = alpha * m / 2.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = std::min(static_cast<double>(i), m - static_cast<double>(i));
        if (t < edge) win[i] = 0.5 * (1.0 - std::cos(std::numbers::pi * t / edge));
    }
    return win;
}

Shift2D estimate_shift(const Image2D &reference, const Image2D &moving, std::size_t upsample) {
    if (!reference.same_shape(moving)) fail(ErrorCategory::Shape, "registration of differently shaped images");
    if (upsample < 1) fail(ErrorCategory::Param, "upsample factor must be at least 1");
    if (reference.empty() || all_zero(reference) || all_zero(moving)) {
        fail(ErrorCategory::DegenerateInput, "phase correlation of an all-zero image");
    }
    const std::size_t h = reference.height(), w = reference.width();
    const auto wy = cosine_taper(h, kTaperFraction);
    const auto wx = cosine_taper(w, kTaperFraction);
    const auto fr = windowed_spectrum(reference, wy, wx);
    const auto fm = windowed_spectrum(moving, wy, wx);

    std::vector<Complex> cross(fr.size());
    for (std::size_t i = 0; i < cross.size(); ++i) {
        const Complex p = fr[i] * std::conj(fm[i]);
        const double mag = std::abs(p);
        cross[i] = mag > 1e-300 ? p / mag : Complex{};
    }
    const auto corr = fft2d(cross, h, w, FftDirection::Inverse);
    std::size_t best = 0;
    for (std::size_t i = 1; i < corr.size(); ++i) {
        if (std::abs(corr[i]) > std::abs(corr[best])) best = i;
    }
    double peak_y = signed_freq(best / w, h);
    double peak_x = signed_freq(best % w, w);
    if (upsample == 1) return {peak_y, peak_x};

    // Evaluate the inverse DFT of the cross-power spectrum on a fine grid of
    // 1/upsample spacing spanning 1.5 pixels around the integer peak.
    const auto up = static_cast<double>(upsample);
    const auto region = static_cast<std::size_t>(std::ceil(1.5 * up));
    const double centre = std::floor(static_cast<double>(region) / 2.0);
    std::vector<double> ys(region), xs(region);
    for (std::size_t i = 0; i < region; ++i) {
        ys[i] = peak_y + (static_cast<double>(i) - centre) / up;
        xs[i] = peak_x + (static_cast<double>(i) - centre) / up;
    }
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<Complex> ex(w * region), ey(region * h);
    for (std::size_t k = 0; k < w; ++k) {
        const double f = signed_freq(k, w) / static_cast<double>(w);
        for (std::size_t j = 0; j < region; ++j) ex[k * region + j] = std::polar(1.0, two_pi * f * xs[j]);
    }
    for (std::size_t i = 0; i < region; ++i) {
        for (std::size_t k = 0; k < h; ++k) {
            const double f = signed_freq(k, h) / static_cast<double>(h);
            ey[i * h + k] = std::polar(1.0, two_pi * f * ys[i]);
        }
    }
    // partial[ky][j] = sum_kx cross[ky][kx] * ex[kx][j]
    std::vector<Complex> partial(h * region, Complex{});
    for (std::size_t ky = 0; ky < h; ++ky) {
        for (std::size_t kx = 0; kx < w; ++kx) {
            const Complex c = cross[ky * w + kx];
            if (c == Complex{}) continue;
            const Complex *e = &ex[kx * region];
            Complex *p = &partial[ky * region];
            for (std::size_t j = 0; j < region; ++j) p[j] += c * e[j];
        }
    }
    double best_val = -1.0;
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < region; ++i) {
        for (std::size_t j = 0; j < region; ++j) {
            Complex acc{};
            for (std::size_t ky = 0; ky < h; ++ky) acc += ey[i * h + ky] * partial[ky * region + j];
            const double v = std::abs(acc);
            if (v > best_val) {
                best_val = v;
                bi = i;
                bj = j;
            }
        }
    }
    return {ys[bi], xs[bj]};
}

Registration register_to(const Image2D &reference, const Image2D &moving, std::size_t upsample) {
    const Shift2D s = estimate_shift(reference, moving, upsample);
    return {translate(moving, s, 0.0), s};
}

} // namespace xrminfo::operators
