#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "xrminfo/core/image.hpp"
#include "xrminfo/metrics/histogram.hpp"
#include "xrminfo/metrics/normalize.hpp"

namespace xrminfo::io {

enum class NormScope { Global, PerImage };
enum class MaskSource { None, CentralCrop, File };
enum class Layout { ProjectionStack, SlicePairs };
enum class FileFormat { Tiff16, RawFloat32 };

NormScope parse_scope(std::string_view name); // "global", "per_image" or "per-image"
std::string_view scope_name(NormScope s) noexcept;

/// Everything that decides how pixels become histograms. Two numbers are
/// comparable only when computed under the same convention.
struct Convention {
    metrics::NormalizationSpec norm;
    metrics::HistogramSpec hist;
    MaskSource mask = MaskSource::CentralCrop;
    double crop_fraction = 0.8;
    NormScope scope = NormScope::Global;

    void validate() const;
    /// Stable identifier, e.g. "clip1-99_b256_eps1e-12_crop0.8_global".
    std::string id() const;
};

struct IndexRange {
    long first = 0;
    long last = 0;
    long step = 1;
    std::vector<long> indices() const; // ascending; ParamError when empty or step <= 0
};

struct DatasetConfig {
    std::filesystem::path root;
    Layout layout = Layout::ProjectionStack;
    FileFormat format = FileFormat::Tiff16;
    std::size_t width = 0; // required for raw_float32
    std::size_t height = 0;
    std::size_t count = 1; // images per raw file
    std::string pattern;   // e.g. "proj_{index:04d}.tif"
    std::string truth_pattern; // ground truth files for slice_pairs
    IndexRange range;
    MaskSource mask = MaskSource::CentralCrop;
    double crop_fraction = 0.8;
    std::filesystem::path mask_path; // relative to root, for MaskSource::File
    NormScope scope = NormScope::Global;

    void validate() const;
};

DatasetConfig dataset_from_json(const nlohmann::json &j);
nlohmann::json dataset_to_json(const DatasetConfig &cfg);

/// Expands "{index}" and "{index:0Nd}" placeholders.
std::string format_pattern(std::string_view pattern, long index);

/// Images of the configured index range in ascending index order, masks
/// attached per config. For slice_pairs this loads `pattern` files.
std::vector<Image2D> load_stack(const DatasetConfig &cfg);

/// Ground-truth images of a slice_pairs dataset.
std::vector<Image2D> load_truth(const DatasetConfig &cfg);

/// Reads one file of the configured format (all images it holds).
std::vector<Image2D> read_images(const std::filesystem::path &path, const DatasetConfig &cfg);

/// Attaches the configured mask (none, central crop or file) to every image.
void attach_masks(std::span<Image2D> images, const DatasetConfig &cfg);

/// Little-endian float32 images, `count` of them, row-major.
std::vector<Image2D> read_raw_float32(const std::filesystem::path &path, std::size_t width, std::size_t height,
                                      std::size_t count);
void write_raw_float32(const std::filesystem::path &path, std::span<const Image2D> images);

/// Uncompressed baseline TIFF, one grey channel of 8 or 16 bit unsigned
/// integers (scaled by 1/255 or 1/65535) or 32-bit floats (as stored).
Image2D read_tiff(const std::filesystem::path &path);
/// 16-bit little-endian single-strip TIFF; values are clamped to [0,1] and
/// scaled by 65535 with rounding.
void write_tiff16(const std::filesystem::path &path, const Image2D &image);

} // namespace xrminfo::io
