#ifndef ATD_ERROR_HPP
#define ATD_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

/**
 * @file error.hpp
 *
 * @brief Error type shared by every module.
 */

namespace atd {

/**
 * Machine-readable failure class. The CLI prints `category_name()` on the
 * diagnostic stream so that scripts can branch on it.
 */
enum class ErrorCategory {
    argument,
    degenerate_vector,
    degenerate_output,
    unsupported_category_count,
    missing_category,
    insufficient_samples,
    schema_violation,
    parse,
    undefined_correlation,
    unsupported_version,
    corruption,
    io,
};

inline std::string_view category_name(ErrorCategory category) {
    switch (category) {
        case ErrorCategory::argument: return "argument";
        case ErrorCategory::degenerate_vector: return "degenerate-vector";
        case ErrorCategory::degenerate_output: return "degenerate-output";
        case ErrorCategory::unsupported_category_count: return "unsupported-category-count";
        case ErrorCategory::missing_category: return "missing-category";
        case ErrorCategory::insufficient_samples: return "insufficient-samples";
        case ErrorCategory::schema_violation: return "schema-violation";
        case ErrorCategory::parse: return "parse";
        case ErrorCategory::undefined_correlation: return "undefined-correlation";
        case ErrorCategory::unsupported_version: return "unsupported-version";
        case ErrorCategory::corruption: return "corruption";
        case ErrorCategory::io: return "io";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& message) :
        std::runtime_error(message), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

namespace detail {

[[noreturn]] inline void fail(ErrorCategory category, const std::string& message) {
    throw Error(category, message);
}

inline void require(bool condition, ErrorCategory category, const std::string& message) {
    if (!condition) {
        fail(category, message);
    }
}

}

}

#endif
