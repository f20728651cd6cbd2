#include "xrminfo/core/error.hpp"

namespace xrminfo {

std::string_view category_name(ErrorCategory c) noexcept {
    switch (c) {
    case ErrorCategory::EmptyMask: return "EmptyMask";
    case ErrorCategory::Range: return "RangeError";
    case ErrorCategory::Shape: return "ShapeError";
    case ErrorCategory::Spec: return "SpecError";
    case ErrorCategory::DegenerateInput: return "DegenerateInput";
    case ErrorCategory::Param: return "ParamError";
    case ErrorCategory::Domain: return "DomainError";
    case ErrorCategory::Convention: return "ConventionError";
    case ErrorCategory::Io: return "IoError";
    case ErrorCategory::Format: return "FormatError";
    }
    return "Unknown";
}

int category_exit_code(ErrorCategory c) noexcept {
    switch (c) {
    case ErrorCategory::Io: return 3;
    case ErrorCategory::Format: return 4;
    case ErrorCategory::Param: return 5;
    case ErrorCategory::EmptyMask: return 6;
    case ErrorCategory::Range: return 7;
    case ErrorCategory::Shape: return 8;
    case ErrorCategory::Spec: return 9;
    case ErrorCategory::DegenerateInput: return 10;
    case ErrorCategory::Domain: return 11;
    case ErrorCategory::Convention: return 12;
    }
    return 1;
}

void fail(ErrorCategory category, const std::string &what) {
    throw Error(category, what);
}

} // namespace xrminfo
