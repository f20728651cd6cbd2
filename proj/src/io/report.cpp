#include "xrminfo/io/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "xrminfo/core/error.hpp"

namespace xrminfo::io {
namespace {

using ojson = nlohmann::ordered_json;

std::string csv_field(const std::string &s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string cell_text(const Cell &c) {
    if (const auto *d = std::get_if<double>(&c)) return format_number(*d);
    if (const auto *i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    return std::get<std::string>(c);
}

ojson cell_json(const Cell &c) {
    if (const auto *d = std::get_if<double>(&c)) {
        if (!std::isfinite(*d)) return nullptr;
        // Same 6 significant digits as the CSV, so both formats agree.
        return std::strtod(format_number(*d).c_str(), nullptr);
    }
    if (const auto *i = std::get_if<std::int64_t>(&c)) return *i;
    return std::get<std::string>(c);
}

std::string_view mask_name(MaskSource m) {
    switch (m) {
    case MaskSource::None: return "none";
    case MaskSource::CentralCrop: return "central_crop";
    case MaskSource::File: return "file";
    }
    return "none";
}

} // namespace

void Digest::update(std::string_view bytes) noexcept {
    for (unsigned char b : bytes) {
        state_ ^= b;
        state_ *= 0x100000001b3ull;
    }
}

void Digest::update(std::span<const double> values) noexcept {
    for (double v : values) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        char buf[8];
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>(bits >> (8 * i));
        update(std::string_view(buf, 8));
    }
}

void Digest::update(const Image2D &image) noexcept {
    const double shape[2] = {static_cast<double>(image.height()), static_cast<double>(image.width())};
    update(std::span<const double>(shape));
    update(image.values());
    if (image.has_mask()) {
        const auto &m = *image.mask();
        update(std::string_view(reinterpret_cast<const char *>(m.data()), m.size()));
    }
}

std::string Digest::hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
    return buf;
}

std::string digest_hex(std::string_view bytes) {
    Digest d;
    d.update(bytes);
    return d.hex();
}

void StudyReport::add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) {
        fail(ErrorCategory::Param, "report row has " + std::to_string(row.size()) + " cells for " +
                                       std::to_string(columns.size()) + " columns");
    }
    rows.push_back(std::move(row));
}

std::size_t StudyReport::column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) return i;
    }
    fail(ErrorCategory::Param, "report has no column '" + std::string(name) + "'");
}

double StudyReport::number(std::size_t row, std::string_view name) const {
    const Cell &c = rows.at(row).at(column(name));
    if (const auto *d = std::get_if<double>(&c)) return *d;
    if (const auto *i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
    fail(ErrorCategory::Param, "column '" + std::string(name) + "' is not numeric");
}

const std::string &StudyReport::text(std::size_t row, std::string_view name) const {
    const Cell &c = rows.at(row).at(column(name));
    if (const auto *s = std::get_if<std::string>(&c)) return *s;
    fail(ErrorCategory::Param, "column '" + std::string(name) + "' is not text");
}

ReportFormat parse_format(std::string_view name) {
    if (name == "csv") return ReportFormat::Csv;
    if (name == "json") return ReportFormat::Json;
    fail(ErrorCategory::Param, "unknown report format '" + std::string(name) + "'");
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0"; // folds -0
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string render_csv(const StudyReport &report) {
    std::string out;
    auto line = [&out](const std::vector<std::string> &fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out += ',';
            out += csv_field(fields[i]);
        }
        out += '\n';
    };
    std::vector<std::string> header = report.columns;
    header.insert(header.end(), {"convention_id", "seed", "config_digest"});
    line(header);
    for (const auto &row : report.rows) {
        std::vector<std::string> fields;
        for (const auto &c : row) fields.push_back(cell_text(c));
        fields.push_back(report.provenance.convention_id);
        fields.push_back(std::to_string(report.provenance.seed));
        fields.push_back(report.provenance.config_digest);
        line(fields);
    }
    return out;
}

std::string render_json(const StudyReport &report) {
    ojson j;
    j["study"] = report.study;
    ojson params = ojson::object();
    for (const auto &[k, v] : report.params) params[k] = cell_json(v);
    j["params"] = params;
    const Convention &c = report.convention;
    j["convention"] = {{"id", report.provenance.convention_id},
                       {"lo_percentile", c.norm.lo_percentile},
                       {"hi_percentile", c.norm.hi_percentile},
                       {"bins", c.hist.bins},
                       {"epsilon", c.hist.epsilon},
                       {"mask", mask_name(c.mask)},
                       {"crop_fraction", c.crop_fraction},
                       {"scope", scope_name(c.scope)},
                       {"entropy_unit", "bits"},
                       {"trend_log_base", "e"}};
    ojson rows = ojson::array();
    for (const auto &row : report.rows) {
        ojson r = ojson::object();
        for (std::size_t i = 0; i < row.size(); ++i) r[report.columns[i]] = cell_json(row[i]);
        r["convention_id"] = report.provenance.convention_id;
        r["seed"] = report.provenance.seed;
        r["config_digest"] = report.provenance.config_digest;
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    j["provenance"] = {{"convention_id", report.provenance.convention_id},
                       {"seed", report.provenance.seed},
                       {"input_digest", report.provenance.input_digest},
                       {"config_digest", report.provenance.config_digest}};
    return j.dump(2) + "\n";
}

std::string render(const StudyReport &report, ReportFormat format) {
    return format == ReportFormat::Csv ? render_csv(report) : render_json(report);
}

void emit(const StudyReport &report, ReportFormat format, const std::filesystem::path &path) {
    const std::string text = render(report, format);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCategory::Io, "cannot write '" + path.string() + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.close();
    if (!out) fail(ErrorCategory::Io, "write error on '" + path.string() + "'");
}

CsvTable parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            record.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            record.push_back(std::move(field));
            field.clear();
            records.push_back(std::move(record));
            record.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (quoted) fail(ErrorCategory::Format, "unterminated quoted CSV field");
    if (any) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
    }
    CsvTable t;
    if (records.empty()) return t;
    t.header = std::move(records.front());
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != t.header.size()) fail(ErrorCategory::Format, "CSV row width differs from header");
        t.rows.push_back(std::move(records[r]));
    }
    return t;
}

} // namespace xrminfo::io
