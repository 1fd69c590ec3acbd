#ifndef ATD_TEXT_HPP
#define ATD_TEXT_HPP

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "error.hpp"

namespace atd::text {

/** Shortest decimal form that parses back to the identical double. */
inline std::string format_double(double value) {
    char buffer[64];
    auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return {buffer, result.ptr};
}

inline double parse_double(std::string_view token) {
    double value = 0;
    auto result = std::from_chars(token.data(), token.data() + token.size(), value);
    detail::require(result.ec == std::errc() && result.ptr == token.data() + token.size(), ErrorCategory::parse,
        "'" + std::string(token) + "' is not a number");
    return value;
}

template<typename Integer>
Integer parse_integer(std::string_view token) {
    Integer value{};
    auto result = std::from_chars(token.data(), token.data() + token.size(), value);
    detail::require(result.ec == std::errc() && result.ptr == token.data() + token.size(), ErrorCategory::parse,
        "'" + std::string(token) + "' is not an integer");
    return value;
}

inline std::string_view trim(std::string_view s) {
    const char* ws = " \t\r\n";
    auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) {
        return {};
    }
    auto last = s.find_last_not_of(ws);
    return s.substr(first, last - first + 1);
}

/** Split on `delimiter`, trimming whitespace around every piece. */
inline std::vector<std::string> split(std::string_view s, char delimiter) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(delimiter, start);
        out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) {
            out += sep;
        }
        out += parts[i];
    }
    return out;
}

}

#endif
