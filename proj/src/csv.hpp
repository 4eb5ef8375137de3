#pragma once

// Small CSV helpers shared by the readers/writers in src/.

#include <charconv>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

namespace eyeadv::csv {

inline std::vector<std::string_view> split(std::string_view line, char sep = ',')
{
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = line.find(sep, pos);
        if (next == std::string_view::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, next - pos));
        pos = next + 1;
    }
    return out;
}

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline double parse_double(std::string_view field)
{
    field = trim(field);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw std::invalid_argument("not a number: '" + std::string(field) + "'");
    }
    return v;
}

/// Shortest representation that round-trips exactly.
inline std::string format_double(double v)
{
    return fmt::format("{}", v);
}

}  // namespace eyeadv::csv
