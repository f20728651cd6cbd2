#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace xrminfo {

/// Real-valued intensity grid, row-major, with an optional analysis mask.
///
/// The mask, when present, has the same shape as the values; a nonzero entry
/// marks a pixel that participates in metric evaluation. An image without a
/// mask analyzes every pixel.
class Image2D {
public:
    Image2D() = default;
    Image2D(std::size_t height, std::size_t width, double fill = 0.0);
    Image2D(std::size_t height, std::size_t width, std::vector<double> values);

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    double &operator()(std::size_t row, std::size_t col) { return values_[row * width_ + col]; }
    double operator()(std::size_t row, std::size_t col) const { return values_[row * width_ + col]; }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    bool has_mask() const noexcept { return mask_.has_value(); }
    const std::optional<std::vector<std::uint8_t>> &mask() const noexcept { return mask_; }
    void set_mask(std::vector<std::uint8_t> mask);
    void clear_mask() noexcept { mask_.reset(); }

    bool analyzed(std::size_t index) const noexcept { return !mask_ || (*mask_)[index] != 0; }
    std::size_t analyzed_count() const noexcept;

    /// Values of analyzed pixels in row-major order.
    std::vector<double> analyzed_values() const;

    bool same_shape(const Image2D &other) const noexcept {
        return height_ == other.height_ && width_ == other.width_;
    }

    /// Set by normalization when the analyzed pixels spanned a zero-width
    /// percentile interval and were mapped to zero.
    bool degenerate() const noexcept { return degenerate_; }
    void set_degenerate(bool d) noexcept { degenerate_ = d; }

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> values_;
    std::optional<std::vector<std::uint8_t>> mask_;
    bool degenerate_ = false;
};

/// Mask selecting a centered rectangle covering `fraction` of each dimension.
std::vector<std::uint8_t> central_crop_mask(std::size_t height, std::size_t width, double fraction);

/// Mask of pixels analyzed in both images (an absent mask means all pixels).
std::vector<std::uint8_t> intersect_masks(const Image2D &a, const Image2D &b);

} // namespace xrminfo
