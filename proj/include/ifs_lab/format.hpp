#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <system_error>

namespace ifs {

/// Shortest round-trip decimal form; identical on every conforming platform.
inline std::string format_double(double value)
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) {
        return "nan";
    }
    return std::string(buf, end);
}

inline std::string format_u64(std::uint64_t value)
{
    return std::to_string(value);
}

}  // namespace ifs
