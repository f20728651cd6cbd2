#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace xrminfo {

enum class ErrorCategory {
    EmptyMask,
    Range,
    Shape,
    Spec,
    DegenerateInput,
    Param,
    Domain,
    Convention,
    Io,
    Format,
};

// Stable machine-readable name, used by the CLI on stderr.
std::string_view category_name(ErrorCategory c) noexcept;

// Process exit code associated with a category (always nonzero).
int category_exit_code(ErrorCategory c) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string &what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

[[noreturn]] void fail(ErrorCategory category, const std::string &what);

} // namespace xrminfo
