#include "xrminfo/operators/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "xrminfo/core/error.hpp"

namespace xrminfo::operators {
namespace {

Image2D clip_unit(Image2D img) {
    for (double &v : img.values()) v = std::clamp(v, 0.0, 1.0);
    return img;
}

std::vector<double> gaussian_kernel(double sigma) {
    const auto radius = static_cast<std::ptrdiff_t>(std::floor(4.0 * sigma + 0.5));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double total = 0.0;
    for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
        const double w = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = w;
        total += w;
    }
    for (double &w : k) w /= total;
    return k;
}

// Box mean over a (2r+1)^2 window with reflected borders, via running sums.
std::vector<double> box_mean(const std::vector<double> &in, std::size_t h, std::size_t w, std::size_t r) {
    const auto rr = static_cast<std::ptrdiff_t>(r);
    const double norm = 1.0 / static_cast<double>((2 * r + 1) * (2 * r + 1));
    std::vector<double> tmp(in.size()), out(in.size());
    for (std::size_t y = 0; y < h; ++y) {
        const double *row = &in[y * w];
        double acc = 0.0;
        for (std::ptrdiff_t d = -rr; d <= rr; ++d) acc += row[reflect_index(d, w)];
        for (std::size_t x = 0; x < w; ++x) {
            tmp[y * w + x] = acc;
            const auto xi = static_cast<std::ptrdiff_t>(x);
            acc += row[reflect_index(xi + rr + 1, w)] - row[reflect_index(xi - rr, w)];
        }
    }
    for (std::size_t x = 0; x < w; ++x) {
        double acc = 0.0;
        for (std::ptrdiff_t d = -rr; d <= rr; ++d) acc += tmp[reflect_index(d, h) * w + x];
        for (std::size_t y = 0; y < h; ++y) {
            out[y * w + x] = acc * norm;
            const auto yi = static_cast<std::ptrdiff_t>(y);
            acc += tmp[reflect_index(yi + rr + 1, h) * w + x] - tmp[reflect_index(yi - rr, h) * w + x];
        }
    }
    return out;
}

} // namespace

std::string_view method_name(DenoiseMethod m) noexcept {
    switch (m) {
    case DenoiseMethod::Gaussian: return "gaussian";
    case DenoiseMethod::Nlm: return "nlm";
    case DenoiseMethod::Tv: return "tv";
    }
    return "unknown";
}

DenoiseMethod parse_method(std::string_view name) {
    if (name == "gaussian") return DenoiseMethod::Gaussian;
    if (name == "nlm") return DenoiseMethod::Nlm;
    if (name == "tv") return DenoiseMethod::Tv;
    fail(ErrorCategory::Param, "unknown denoise method '" + std::string(name) + "'");
}

void DenoiseParams::validate() const {
    if (!(gaussian_sigma > 0.0)) fail(ErrorCategory::Param, "gaussian_sigma must be positive");
    if (nlm_patch == 0 || nlm_search == 0 || nlm_patch % 2 == 0 || nlm_search % 2 == 0) {
        fail(ErrorCategory::Param, "NLM patch and search sizes must be positive and odd");
    }
    if (nlm_patch > nlm_search) fail(ErrorCategory::Param, "NLM patch larger than search window");
    if (nlm_h && !(*nlm_h > 0.0)) fail(ErrorCategory::Param, "nlm_h must be positive");
    if (!(tv_weight > 0.0)) fail(ErrorCategory::Param, "tv_weight must be positive");
    if (tv_iterations == 0) fail(ErrorCategory::Param, "tv_iterations must be positive");
}

std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) noexcept {
    const auto period = static_cast<std::ptrdiff_t>(2 * n);
    std::ptrdiff_t m = i % period;
    if (m < 0) m += period;
    const auto um = static_cast<std::size_t>(m);
    return um < n ? um : 2 * n - 1 - um;
}

Image2D gaussian_filter(const Image2D &image, double sigma) {
    const auto kernel = gaussian_kernel(sigma);
    const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
    const std::size_t h = image.height(), w = image.width();
    std::vector<double> tmp(image.size(), 0.0);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            double acc = 0.0;
            for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
                acc += kernel[static_cast<std::size_t>(k + radius)] *
                       image(y, reflect_index(static_cast<std::ptrdiff_t>(x) - k, w));
            }
            tmp[y * w + x] = acc;
        }
    }
    Image2D out = image;
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            double acc = 0.0;
            for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
                acc += kernel[static_cast<std::size_t>(k + radius)] *
                       tmp[reflect_index(static_cast<std::ptrdiff_t>(y) - k, h) * w + x];
            }
            out(y, x) = acc;
        }
    }
    return out;
}

Image2D nlm_filter(const Image2D &image, std::size_t patch, std::size_t search, double h, double sigma) {
    const std::size_t height = image.height(), width = image.width();
    const auto sr = static_cast<std::ptrdiff_t>(search / 2);
    const std::size_t pr = patch / 2;
    const auto src = image.values();
    std::vector<double> acc(image.size(), 0.0), wsum(image.size(), 0.0), diff(image.size());
    const double inv_h2 = h > 0.0 ? 1.0 / (h * h) : 0.0;
    const double offset = 2.0 * sigma * sigma;

    for (std::ptrdiff_t dy = -sr; dy <= sr; ++dy) {
        for (std::ptrdiff_t dx = -sr; dx <= sr; ++dx) {
            for (std::size_t y = 0; y < height; ++y) {
                const std::size_t ys = reflect_index(static_cast<std::ptrdiff_t>(y) + dy, height);
                for (std::size_t x = 0; x < width; ++x) {
                    const std::size_t xs = reflect_index(static_cast<std::ptrdiff_t>(x) + dx, width);
                    const double d = src[y * width + x] - src[ys * width + xs];
                    diff[y * width + x] = d * d;
                }
            }
            const auto dist = box_mean(diff, height, width, pr);
            for (std::size_t y = 0; y < height; ++y) {
                const std::size_t ys = reflect_index(static_cast<std::ptrdiff_t>(y) + dy, height);
                for (std::size_t x = 0; x < width; ++x) {
                    const std::size_t xs = reflect_index(static_cast<std::ptrdiff_t>(x) + dx, width);
                    const std::size_t i = y * width + x;
                    const double d2 = std::max(dist[i] - offset, 0.0);
                    const double wgt = h > 0.0 ? std::exp(-d2 * inv_h2) : (d2 == 0.0 ? 1.0 : 0.0);
                    acc[i] += wgt * src[ys * width + xs];
                    wsum[i] += wgt;
                }
            }
        }
    }
    Image2D out = image;
    auto ov = out.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = acc[i] / wsum[i];
    return out;
}

Image2D tv_chambolle(const Image2D &image, double weight, std::size_t iterations) {
    const std::size_t h = image.height(), w = image.width();
    const std::size_t n = image.size();
    const auto f = image.values();
    constexpr double tau = 0.25;
    std::vector<double> px(n, 0.0), py(n, 0.0), div(n, 0.0), term(n);

    auto divergence = [&] {
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                const std::size_t i = y * w + x;
                double d = 0.0;
                d += (x + 1 < w ? px[i] : 0.0) - (x > 0 ? px[i - 1] : 0.0);
                d += (y + 1 < h ? py[i] : 0.0) - (y > 0 ? py[i - w] : 0.0);
                div[i] = d;
            }
        }
    };

    for (std::size_t it = 0; it < iterations; ++it) {
        divergence();
        for (std::size_t i = 0; i < n; ++i) term[i] = div[i] - f[i] / weight;
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                const std::size_t i = y * w + x;
                const double gx = x + 1 < w ? term[i + 1] - term[i] : 0.0;
                const double gy = y + 1 < h ? term[i + w] - term[i] : 0.0;
                const double denom = 1.0 + tau * std::sqrt(gx * gx + gy * gy);
                px[i] = (px[i] + tau * gx) / denom;
                py[i] = (py[i] + tau * gy) / denom;
            }
        }
    }
    divergence();

    // The ROF minimizer obeys a min/max principle; clamp the truncated
    // iterate to the input range accordingly.
    const auto [lo_it, hi_it] = std::minmax_element(f.begin(), f.end());
    const double lo = *lo_it, hi = *hi_it;
    Image2D out = image;
    auto ov = out.values();
    for (std::size_t i = 0; i < n; ++i) ov[i] = std::clamp(f[i] - weight * div[i], lo, hi);
    return out;
}

double estimate_noise_sigma(const Image2D &image) {
    const std::size_t h = image.height(), w = image.width();
    if (h < 3 || w < 3) return 0.0;
    std::vector<double> residual;
    residual.reserve((h - 2) * (w - 2));
    for (std::size_t y = 1; y + 1 < h; ++y) {
        for (std::size_t x = 1; x + 1 < w; ++x) {
            const double r = image(y - 1, x - 1) - 2 * image(y - 1, x) + image(y - 1, x + 1) -
                             2 * image(y, x - 1) + 4 * image(y, x) - 2 * image(y, x + 1) +
                             image(y + 1, x - 1) - 2 * image(y + 1, x) + image(y + 1, x + 1);
            residual.push_back(r);
        }
    }
    auto median = [](std::vector<double> v) {
        auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
        std::nth_element(v.begin(), mid, v.end());
        double m = *mid;
        if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
        return m;
    };
    const double med = median(residual);
    for (double &r : residual) r = std::abs(r - med);
    // The residual filter has unit-noise gain sqrt(36) = 6.
    return 1.4826 * median(std::move(residual)) / 6.0;
}

Image2D denoise(const Image2D &image, const DenoiseParams &params) {
    params.validate();
    switch (params.method) {
    case DenoiseMethod::Gaussian:
        return clip_unit(gaussian_filter(image, params.gaussian_sigma));
    case DenoiseMethod::Nlm: {
        const double sigma = estimate_noise_sigma(image);
        const double h = params.nlm_h.value_or(0.8 * sigma);
        return clip_unit(nlm_filter(image, params.nlm_patch, params.nlm_search, h, sigma));
    }
    case DenoiseMethod::Tv:
        return clip_unit(tv_chambolle(image, params.tv_weight, params.tv_iterations));
    }
    return image;
}

} // namespace xrminfo::operators
