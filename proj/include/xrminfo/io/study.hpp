#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "xrminfo/io/config.hpp"
#include "xrminfo/io/report.hpp"

namespace xrminfo::io {

enum class StudyKind { Denoise, Alignment, Sparse, Dose, Recon, Budget, Task };
inline constexpr std::array<StudyKind, 7> kStudyKinds{StudyKind::Denoise, StudyKind::Alignment, StudyKind::Sparse,
                                                      StudyKind::Dose,    StudyKind::Recon,     StudyKind::Budget,
                                                      StudyKind::Task};

std::string_view study_name(StudyKind kind) noexcept;
StudyKind parse_study(std::string_view name);

struct StudyConfig {
    std::uint64_t seed = 42;
    Convention convention;
    // When set, studies read this data instead of generating phantoms, and
    // its mask and scope replace those of `convention`.
    std::optional<DatasetConfig> dataset;
    // Parameter overrides as text, applied in order.
    std::vector<std::pair<std::string, std::string>> params;
};

/// Keys: seed, convention {lo_percentile, hi_percentile, bins, epsilon, mask,
/// crop_fraction, scope}, dataset {...}, params {name: value}.
StudyConfig study_config_from_json(const nlohmann::json &j);
/// Reads a JSON config file. IoError when unreadable, FormatError when not JSON.
StudyConfig load_study_config(const std::filesystem::path &path);

/// Declared parameters and their defaults, in report order.
std::vector<std::pair<std::string, Cell>> study_defaults(StudyKind kind);

/// Runs one study end to end. Failures keep their category and gain the
/// study name as context.
StudyReport run_study(StudyKind kind, const StudyConfig &cfg);

} // namespace xrminfo::io
