#include "xrminfo/io/config.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>

#include "xrminfo/core/error.hpp"

namespace xrminfo::io {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::uint8_t> read_bytes(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCategory::Io, "cannot open '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) fail(ErrorCategory::Io, "read error on '" + path.string() + "'");
    return bytes;
}

void write_bytes(const fs::path &path, const std::vector<std::uint8_t> &bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCategory::Io, "cannot write '" + path.string() + "'");
    out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCategory::Io, "write error on '" + path.string() + "'");
}

class TiffCursor {
public:
    TiffCursor(const std::vector<std::uint8_t> &bytes, const fs::path &path) : b_(bytes), path_(path) {
        if (b_.size() < 8) bad("file too short");
        if (b_[0] == 'I' && b_[1] == 'I') little_ = true;
        else if (b_[0] == 'M' && b_[1] == 'M') little_ = false;
        else bad("missing byte-order mark");
        if (u16(2) != 42) bad("not a classic TIFF");
    }

    std::uint16_t u16(std::size_t off) const {
        need(off, 2);
        return little_ ? static_cast<std::uint16_t>(b_[off] | (b_[off + 1] << 8))
                       : static_cast<std::uint16_t>((b_[off] << 8) | b_[off + 1]);
    }

    std::uint32_t u32(std::size_t off) const {
        need(off, 4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            const std::uint32_t byte = b_[off + static_cast<std::size_t>(little_ ? 3 - i : i)];
            v = (v << 8) | byte;
        }
        return v;
    }

    bool little() const noexcept { return little_; }
    const std::vector<std::uint8_t> &bytes() const noexcept { return b_; }

    void need(std::size_t off, std::size_t n) const {
        if (off > b_.size() || n > b_.size() - off) bad("truncated data");
    }

    [[noreturn]] void bad(const std::string &what) const {
        fail(ErrorCategory::Format, "TIFF '" + path_.string() + "': " + what);
    }

private:
    const std::vector<std::uint8_t> &b_;
    fs::path path_;
    bool little_ = true;
};

struct IfdEntry {
    std::uint16_t type = 0;
    std::uint32_t count = 0;
    std::size_t value_offset = 0; // where the values live
};

std::vector<std::uint32_t> entry_values(const TiffCursor &t, const IfdEntry &e) {
    std::size_t size = 0;
    if (e.type == 3) size = 2;
    else if (e.type == 4) size = 4;
    else t.bad("unsupported field type " + std::to_string(e.type));
    std::vector<std::uint32_t> out(e.count);
    for (std::uint32_t i = 0; i < e.count; ++i) {
        const std::size_t off = e.value_offset + i * size;
        out[i] = size == 2 ? t.u16(off) : t.u32(off);
    }
    return out;
}

void check_keys(const json &j, const std::set<std::string> &allowed, const std::string &where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key())) fail(ErrorCategory::Param, "unknown key '" + it.key() + "' in " + where);
    }
}

template <typename T> T get_or(const json &j, const char *key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception &e) {
        fail(ErrorCategory::Param, std::string("bad value for '") + key + "': " + e.what());
    }
}

Image2D mask_image(const DatasetConfig &cfg) {
    const auto imgs = read_images(cfg.root / cfg.mask_path, cfg);
    if (imgs.empty()) fail(ErrorCategory::Format, "mask file holds no image");
    return imgs.front();
}

} // namespace

NormScope parse_scope(std::string_view name) {
    if (name == "global") return NormScope::Global;
    if (name == "per_image" || name == "per-image") return NormScope::PerImage;
    fail(ErrorCategory::Param, "unknown normalization scope '" + std::string(name) + "'");
}

std::string_view scope_name(NormScope s) noexcept { return s == NormScope::Global ? "global" : "per_image"; }

void Convention::validate() const {
    norm.validate();
    hist.validate();
    if (mask == MaskSource::CentralCrop && !(crop_fraction > 0.0 && crop_fraction <= 1.0)) {
        fail(ErrorCategory::Param, "crop fraction must lie in (0,1]");
    }
}

std::string Convention::id() const {
    char buf[160];
    std::string mask_part = "nomask";
    if (mask == MaskSource::CentralCrop) {
        char m[32];
        std::snprintf(m, sizeof m, "crop%g", crop_fraction);
        mask_part = m;
    } else if (mask == MaskSource::File) {
        mask_part = "maskfile";
    }
    std::snprintf(buf, sizeof buf, "clip%g-%g_b%zu_eps%g_%s_%s", norm.lo_percentile, norm.hi_percentile, hist.bins,
                  hist.epsilon, mask_part.c_str(), std::string(scope_name(scope)).c_str());
    return buf;
}

std::vector<long> IndexRange::indices() const {
    if (step <= 0) fail(ErrorCategory::Param, "index step must be positive");
    if (last < first) fail(ErrorCategory::Param, "index range is empty");
    std::vector<long> out;
    for (long i = first; i <= last; i += step) out.push_back(i);
    return out;
}

void DatasetConfig::validate() const {
    if (pattern.empty()) fail(ErrorCategory::Param, "dataset pattern is empty");
    if (layout == Layout::SlicePairs && truth_pattern.empty()) {
        fail(ErrorCategory::Param, "slice_pairs layout needs truth_pattern");
    }
    if (format == FileFormat::RawFloat32 && (width == 0 || height == 0 || count == 0)) {
        fail(ErrorCategory::Param, "raw_float32 needs width, height and count");
    }
    if (mask == MaskSource::CentralCrop && !(crop_fraction > 0.0 && crop_fraction <= 1.0)) {
        fail(ErrorCategory::Param, "crop fraction must lie in (0,1]");
    }
    if (mask == MaskSource::File && mask_path.empty()) fail(ErrorCategory::Param, "mask source 'file' needs a path");
    (void)range.indices();
}

DatasetConfig dataset_from_json(const json &j) {
    if (!j.is_object()) fail(ErrorCategory::Param, "dataset config must be an object");
    check_keys(j, {"root", "layout", "format", "width", "height", "count", "pattern", "truth_pattern", "index", "mask",
                   "normalization_scope"},
               "dataset");
    DatasetConfig c;
    c.root = get_or<std::string>(j, "root", ".");
    const auto layout = get_or<std::string>(j, "layout", "projection_stack");
    if (layout == "projection_stack") c.layout = Layout::ProjectionStack;
    else if (layout == "slice_pairs") c.layout = Layout::SlicePairs;
    else fail(ErrorCategory::Param, "unknown layout '" + layout + "'");
    const auto format = get_or<std::string>(j, "format", "tiff16");
    if (format == "tiff16") c.format = FileFormat::Tiff16;
    else if (format == "raw_float32") c.format = FileFormat::RawFloat32;
    else fail(ErrorCategory::Param, "unknown format '" + format + "'");
    c.width = get_or<std::size_t>(j, "width", 0);
    c.height = get_or<std::size_t>(j, "height", 0);
    c.count = get_or<std::size_t>(j, "count", 1);
    c.pattern = get_or<std::string>(j, "pattern", "");
    c.truth_pattern = get_or<std::string>(j, "truth_pattern", "");
    if (j.contains("index")) {
        const json &r = j.at("index");
        check_keys(r, {"first", "last", "step"}, "index");
        c.range.first = get_or<long>(r, "first", 0);
        c.range.last = get_or<long>(r, "last", c.range.first);
        c.range.step = get_or<long>(r, "step", 1);
    }
    if (j.contains("mask")) {
        const json &m = j.at("mask");
        check_keys(m, {"source", "fraction", "path"}, "mask");
        const auto src = get_or<std::string>(m, "source", "central_crop");
        if (src == "none") c.mask = MaskSource::None;
        else if (src == "central_crop") c.mask = MaskSource::CentralCrop;
        else if (src == "file") c.mask = MaskSource::File;
        else fail(ErrorCategory::Param, "unknown mask source '" + src + "'");
        c.crop_fraction = get_or<double>(m, "fraction", 0.8);
        c.mask_path = get_or<std::string>(m, "path", "");
    }
    c.scope = parse_scope(get_or<std::string>(j, "normalization_scope", "global"));
    c.validate();
    return c;
}

json dataset_to_json(const DatasetConfig &c) {
    json j = json::object();
    j["root"] = c.root.generic_string();
    j["layout"] = c.layout == Layout::ProjectionStack ? "projection_stack" : "slice_pairs";
    j["format"] = c.format == FileFormat::Tiff16 ? "tiff16" : "raw_float32";
    j["width"] = c.width;
    j["height"] = c.height;
    j["count"] = c.count;
    j["pattern"] = c.pattern;
    j["truth_pattern"] = c.truth_pattern;
    j["index"] = {{"first", c.range.first}, {"last", c.range.last}, {"step", c.range.step}};
    json m = json::object();
    m["source"] = c.mask == MaskSource::None ? "none" : c.mask == MaskSource::CentralCrop ? "central_crop" : "file";
    m["fraction"] = c.crop_fraction;
    m["path"] = c.mask_path.generic_string();
    j["mask"] = m;
    j["normalization_scope"] = std::string(scope_name(c.scope));
    return j;
}

std::string format_pattern(std::string_view pattern, long index) {
    std::string out;
    std::size_t i = 0;
    while (i < pattern.size()) {
        if (pattern.compare(i, 6, "{index") == 0) {
            const std::size_t close = pattern.find('}', i);
            if (close == std::string_view::npos) fail(ErrorCategory::Param, "unterminated placeholder in pattern");
            const std::string_view spec = pattern.substr(i + 6, close - i - 6);
            char buf[64];
            if (spec.empty()) {
                std::snprintf(buf, sizeof buf, "%ld", index);
            } else {
                // Only ":0Nd" / ":Nd" are accepted.
                const std::string s(spec);
                unsigned width = 0;
                char pad = ' ';
                if (s.size() < 3 || s.front() != ':' || s.back() != 'd') {
                    fail(ErrorCategory::Param, "unsupported placeholder '{index" + s + "}'");
                }
                std::string digits = s.substr(1, s.size() - 2);
                if (!digits.empty() && digits.front() == '0') {
                    pad = '0';
                    digits.erase(0, 1);
                }
                for (char ch : digits) {
                    if (ch < '0' || ch > '9') fail(ErrorCategory::Param, "unsupported placeholder '{index" + s + "}'");
                    width = width * 10 + static_cast<unsigned>(ch - '0');
                }
                if (pad == '0') std::snprintf(buf, sizeof buf, "%0*ld", static_cast<int>(width), index);
                else std::snprintf(buf, sizeof buf, "%*ld", static_cast<int>(width), index);
            }
            out += buf;
            i = close + 1;
        } else {
            out += pattern[i++];
        }
    }
    return out;
}

std::vector<Image2D> read_raw_float32(const fs::path &path, std::size_t width, std::size_t height, std::size_t count) {
    if (!fs::exists(path)) fail(ErrorCategory::Io, "missing file '" + path.string() + "'");
    const auto bytes = read_bytes(path);
    const std::size_t expected = width * height * count * 4;
    if (bytes.size() != expected) {
        fail(ErrorCategory::Format, "'" + path.string() + "' holds " + std::to_string(bytes.size()) + " bytes, expected " +
                                        std::to_string(expected));
    }
    std::vector<Image2D> out;
    std::size_t off = 0;
    for (std::size_t k = 0; k < count; ++k) {
        Image2D img(height, width, 0.0);
        for (double &v : img.values()) {
            const std::uint32_t bits = static_cast<std::uint32_t>(bytes[off]) | (static_cast<std::uint32_t>(bytes[off + 1]) << 8) |
                                       (static_cast<std::uint32_t>(bytes[off + 2]) << 16) |
                                       (static_cast<std::uint32_t>(bytes[off + 3]) << 24);
            float f;
            std::memcpy(&f, &bits, 4);
            v = static_cast<double>(f);
            off += 4;
        }
        out.push_back(std::move(img));
    }
    return out;
}

void write_raw_float32(const fs::path &path, std::span<const Image2D> images) {
    std::vector<std::uint8_t> bytes;
    for (const auto &img : images) {
        for (double v : img.values()) {
            const float f = static_cast<float>(v);
            std::uint32_t bits;
            std::memcpy(&bits, &f, 4);
            for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
        }
    }
    write_bytes(path, bytes);
}

Image2D read_tiff(const fs::path &path) {
    if (!fs::exists(path)) fail(ErrorCategory::Io, "missing file '" + path.string() + "'");
    const auto bytes = read_bytes(path);
    const TiffCursor t(bytes, path);
    const std::size_t ifd = t.u32(4);
    const std::size_t n = t.u16(ifd);
    std::size_t width = 0, height = 0, bps = 1, compression = 1, spp = 1, sample_format = 1;
    std::size_t rows_per_strip = 0;
    std::vector<std::uint32_t> offsets, counts;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t base = ifd + 2 + 12 * i;
        const std::uint16_t tag = t.u16(base);
        IfdEntry e{t.u16(base + 2), t.u32(base + 4), base + 8};
        const std::size_t unit = e.type == 3 ? 2 : e.type == 4 ? 4 : 0;
        if (unit == 0) continue; // fields we never read may use other types
        if (static_cast<std::size_t>(e.count) * unit > 4) e.value_offset = t.u32(base + 8);
        auto single = [&] {
            const auto v = entry_values(t, e);
            if (v.empty()) t.bad("empty field");
            return static_cast<std::size_t>(v.front());
        };
        switch (tag) {
        case 256: width = single(); break;
        case 257: height = single(); break;
        case 258: bps = single(); break;
        case 259: compression = single(); break;
        case 273: offsets = entry_values(t, e); break;
        case 277: spp = single(); break;
        case 278: rows_per_strip = single(); break;
        case 279: counts = entry_values(t, e); break;
        case 339: sample_format = single(); break;
        default: break;
        }
    }
    if (width == 0 || height == 0) t.bad("missing dimensions");
    if (compression != 1) t.bad("compressed data is not supported");
    if (spp != 1) t.bad("only single-channel images are supported");
    const bool is_float = sample_format == 3;
    if (is_float ? bps != 32 : (bps != 8 && bps != 16)) t.bad("unsupported sample layout");
    if (offsets.empty() || offsets.size() != counts.size()) t.bad("inconsistent strip tables");
    (void)rows_per_strip;

    const std::size_t bytes_per = bps / 8;
    std::vector<std::uint8_t> raw;
    raw.reserve(width * height * bytes_per);
    for (std::size_t s = 0; s < offsets.size(); ++s) {
        t.need(offsets[s], counts[s]);
        raw.insert(raw.end(), bytes.begin() + offsets[s], bytes.begin() + offsets[s] + counts[s]);
    }
    if (raw.size() < width * height * bytes_per) t.bad("strips hold fewer samples than the image size");

    Image2D img(height, width, 0.0);
    auto v = img.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::uint8_t *p = &raw[i * bytes_per];
        if (bps == 8) {
            v[i] = p[0] / 255.0;
        } else if (bps == 16) {
            const unsigned x = t.little() ? (p[0] | (p[1] << 8)) : ((p[0] << 8) | p[1]);
            v[i] = x / 65535.0;
        } else {
            std::uint32_t bits = 0;
            for (int k = 0; k < 4; ++k) bits = (bits << 8) | p[t.little() ? 3 - k : k];
            float f;
            std::memcpy(&f, &bits, 4);
            v[i] = static_cast<double>(f);
        }
    }
    return img;
}

void write_tiff16(const fs::path &path, const Image2D &image) {
    std::vector<std::uint8_t> b;
    auto put16 = [&](std::uint32_t v) {
        b.push_back(static_cast<std::uint8_t>(v));
        b.push_back(static_cast<std::uint8_t>(v >> 8));
    };
    auto put32 = [&](std::uint32_t v) {
        put16(v & 0xFFFF);
        put16(v >> 16);
    };
    const auto w = static_cast<std::uint32_t>(image.width()), h = static_cast<std::uint32_t>(image.height());
    const std::uint32_t entries = 9;
    const std::uint32_t data_offset = 8 + 2 + entries * 12 + 4;
    const std::uint32_t data_bytes = w * h * 2;
    b.insert(b.end(), {'I', 'I'});
    put16(42);
    put32(8);
    put16(entries);
    auto entry = [&](std::uint16_t tag, std::uint16_t type, std::uint32_t value) {
        put16(tag);
        put16(type);
        put32(1);
        if (type == 3) {
            put16(value);
            put16(0);
        } else {
            put32(value);
        }
    };
    entry(256, 4, w);
    entry(257, 4, h);
    entry(258, 3, 16);
    entry(259, 3, 1);
    entry(262, 3, 1);
    entry(273, 4, data_offset);
    entry(277, 3, 1);
    entry(278, 4, h);
    entry(279, 4, data_bytes);
    put32(0);
    for (double v : image.values()) {
        const double c = std::clamp(v, 0.0, 1.0);
        put16(static_cast<std::uint32_t>(std::lround(c * 65535.0)));
    }
    write_bytes(path, b);
}

std::vector<Image2D> read_images(const fs::path &path, const DatasetConfig &cfg) {
    if (cfg.format == FileFormat::RawFloat32) return read_raw_float32(path, cfg.width, cfg.height, cfg.count);
    Image2D img = read_tiff(path);
    if ((cfg.width && img.width() != cfg.width) || (cfg.height && img.height() != cfg.height)) {
        fail(ErrorCategory::Format, "'" + path.string() + "' is " + std::to_string(img.width()) + "x" +
                                        std::to_string(img.height()) + ", expected " + std::to_string(cfg.width) + "x" +
                                        std::to_string(cfg.height));
    }
    return {std::move(img)};
}

void attach_masks(std::span<Image2D> images, const DatasetConfig &cfg) {
    if (images.empty() || cfg.mask == MaskSource::None) return;
    std::vector<std::uint8_t> mask;
    if (cfg.mask == MaskSource::CentralCrop) {
        mask = central_crop_mask(images.front().height(), images.front().width(), cfg.crop_fraction);
    } else {
        const Image2D m = mask_image(cfg);
        if (!m.same_shape(images.front())) fail(ErrorCategory::Format, "mask shape differs from the images");
        mask.resize(m.size());
        for (std::size_t i = 0; i < m.size(); ++i) mask[i] = m.values()[i] != 0.0 ? 1 : 0;
    }
    for (auto &img : images) img.set_mask(mask);
}

namespace {

std::vector<Image2D> load_pattern(const DatasetConfig &cfg, const std::string &pattern) {
    cfg.validate();
    std::vector<Image2D> out;
    for (long idx : cfg.range.indices()) {
        const fs::path path = cfg.root / format_pattern(pattern, idx);
        if (!fs::exists(path)) fail(ErrorCategory::Io, "missing file '" + path.string() + "'");
        for (auto &img : read_images(path, cfg)) {
            if (!out.empty() && !img.same_shape(out.front())) {
                fail(ErrorCategory::Format, "'" + path.string() + "' differs in size from earlier images");
            }
            out.push_back(std::move(img));
        }
    }
    attach_masks(out, cfg);
    return out;
}

} // namespace

std::vector<Image2D> load_stack(const DatasetConfig &cfg) { return load_pattern(cfg, cfg.pattern); }

std::vector<Image2D> load_truth(const DatasetConfig &cfg) {
    if (cfg.layout != Layout::SlicePairs) fail(ErrorCategory::Param, "ground truth needs the slice_pairs layout");
    return load_pattern(cfg, cfg.truth_pattern);
}

} // namespace xrminfo::io
