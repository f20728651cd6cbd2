#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "xrminfo/core/image.hpp"
#include "xrminfo/io/config.hpp"

namespace xrminfo::io {

using Cell = std::variant<double, std::int64_t, std::string>;

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
class Digest {
public:
    void update(std::string_view bytes) noexcept;
    void update(std::span<const double> values) noexcept;
    void update(const Image2D &image) noexcept; // shape, values and mask
    std::uint64_t value() const noexcept { return state_; }
    std::string hex() const;

private:
    std::uint64_t state_ = 0xcbf29ce484222325ull;
};

std::string digest_hex(std::string_view bytes);

struct Provenance {
    std::string convention_id;
    std::uint64_t seed = 0;
    std::string input_digest;
    std::string config_digest;
};

/// Tabular study output. Every emitted row is followed by the provenance
/// columns convention_id, seed and config_digest.
struct StudyReport {
    std::string study;
    std::vector<std::pair<std::string, Cell>> params; // in declaration order
    Convention convention;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    Provenance provenance;

    /// ParamError when the cell count differs from the column count.
    void add_row(std::vector<Cell> row);
    /// Column index by name; ParamError when absent.
    std::size_t column(std::string_view name) const;
    double number(std::size_t row, std::string_view name) const;
    const std::string &text(std::size_t row, std::string_view name) const;
};

enum class ReportFormat { Csv, Json };
ReportFormat parse_format(std::string_view name);

/// Numbers use printf "%.6g"; non-finite values print as nan, inf or -inf
/// in CSV and as null in JSON.
std::string format_number(double v);
std::string render_csv(const StudyReport &report);
std::string render_json(const StudyReport &report);
std::string render(const StudyReport &report, ReportFormat format);

/// Writes the rendered report; IoError when the path cannot be written.
void emit(const StudyReport &report, ReportFormat format, const std::filesystem::path &path);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};
/// Parses the CSV dialect written by render_csv (RFC 4180 quoting).
CsvTable parse_csv(std::string_view text);

} // namespace xrminfo::io
