#include "xrminfo/core/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "xrminfo/core/error.hpp"

namespace xrminfo {

Image2D::Image2D(std::size_t height, std::size_t width, double fill)
    : height_(height), width_(width), values_(height * width, fill) {}

Image2D::Image2D(std::size_t height, std::size_t width, std::vector<double> values)
    : height_(height), width_(width), values_(std::move(values)) {
    if (values_.size() != height_ * width_) {
        fail(ErrorCategory::Shape, "value count " + std::to_string(values_.size()) +
                                       " does not match " + std::to_string(height_) + "x" +
                                       std::to_string(width_));
    }
}

void Image2D::set_mask(std::vector<std::uint8_t> mask) {
    if (mask.size() != values_.size()) {
        fail(ErrorCategory::Shape, "mask size does not match image size");
    }
    mask_ = std::move(mask);
}

std::size_t Image2D::analyzed_count() const noexcept {
    if (!mask_) return values_.size();
    return static_cast<std::size_t>(std::count_if(mask_->begin(), mask_->end(),
                                                  [](std::uint8_t m) { return m != 0; }));
}

std::vector<double> Image2D::analyzed_values() const {
    if (!mask_) return values_;
    std::vector<double> out;
    out.reserve(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if ((*mask_)[i]) out.push_back(values_[i]);
    }
    return out;
}

std::vector<std::uint8_t> central_crop_mask(std::size_t height, std::size_t width, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        fail(ErrorCategory::Param, "central crop fraction must lie in (0,1]");
    }
    auto span = [fraction](std::size_t n) {
        const auto keep = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))));
        const std::size_t lo = (n - keep) / 2;
        return std::pair{lo, lo + keep};
    };
    const auto [r0, r1] = span(height);
    const auto [c0, c1] = span(width);
    std::vector<std::uint8_t> mask(height * width, 0);
    for (std::size_t r = r0; r < r1; ++r) {
        std::fill(mask.begin() + static_cast<std::ptrdiff_t>(r * width + c0),
                  mask.begin() + static_cast<std::ptrdiff_t>(r * width + c1), 1);
    }
    return mask;
}

std::vector<std::uint8_t> intersect_masks(const Image2D &a, const Image2D &b) {
    if (!a.same_shape(b)) fail(ErrorCategory::Shape, "images differ in shape");
    std::vector<std::uint8_t> mask(a.size());
    for (std::size_t i = 0; i < mask.size(); ++i) {
        mask[i] = (a.analyzed(i) && b.analyzed(i)) ? 1 : 0;
    }
    return mask;
}

} // namespace xrminfo
