#pragma once

// Timestamp text forms: integer epoch milliseconds or RFC 3339.

#include "triad/chronos.hpp"
#include "triad/error.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <string>
#include <string_view>

namespace triad {

namespace detail {

inline bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    const char* b = s.data() + pos;
    auto [p, ec] = std::from_chars(b, b + len, out);
    return ec == std::errc{} && p == b + len;
}

} // namespace detail

/// Accepts "1700000000000" or "2024-05-04T19:00:00Z" / "...T19:00:00.250+02:00".
inline Timestamp parse_timestamp(std::string_view text) {
    auto fail = [&] { return error(errc::invalid_argument, "bad timestamp '" + std::string(text) + "'"); };
    if (text.empty()) throw fail();
    if (text.find('-', 1) == std::string_view::npos && text.find(':') == std::string_view::npos) {
        std::int64_t ms = 0;
        auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), ms);
        if (ec != std::errc{} || p != text.data() + text.size()) throw fail();
        return at_ms(ms);
    }
    int y, mo, d, h, mi, sec;
    if (text.size() < 20 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != 't' && text[10] != ' ') ||
        text[13] != ':' || text[16] != ':' || !detail::read_int(text, 0, 4, y) || !detail::read_int(text, 5, 2, mo) ||
        !detail::read_int(text, 8, 2, d) || !detail::read_int(text, 11, 2, h) || !detail::read_int(text, 14, 2, mi) ||
        !detail::read_int(text, 17, 2, sec)) {
        throw fail();
    }
    std::size_t pos = 19;
    std::int64_t millis = 0;
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        int digits = 0;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            if (digits < 3) millis = millis * 10 + (text[pos] - '0');
            ++digits;
            ++pos;
        }
        if (digits == 0) throw fail();
        for (int i = digits; i < 3; ++i) millis *= 10;
    }
    std::int64_t offset_min = 0;
    if (pos < text.size() && (text[pos] == 'Z' || text[pos] == 'z')) {
        ++pos;
    } else if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
        int oh, om;
        if (pos + 6 != text.size() || text[pos + 3] != ':' || !detail::read_int(text, pos + 1, 2, oh) ||
            !detail::read_int(text, pos + 4, 2, om)) {
            throw fail();
        }
        offset_min = (text[pos] == '-' ? -1 : 1) * (oh * 60 + om);
        pos += 6;
    } else {
        throw fail();
    }
    if (pos != text.size()) throw fail();
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                                          std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) throw fail();
    const auto days = std::chrono::sys_days{ymd};
    return std::chrono::time_point_cast<Duration>(days) + std::chrono::hours{h} + std::chrono::minutes{mi} +
           std::chrono::seconds{sec} + Duration{millis} - std::chrono::minutes{offset_min};
}

/// RFC 3339 in UTC with millisecond precision.
inline std::string format_timestamp(Timestamp t) {
    const auto days = std::chrono::floor<std::chrono::days>(t);
    const std::chrono::year_month_day ymd{days};
    const auto ms = (t - days).count();
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long long>(ms / 3600000), static_cast<long long>(ms / 60000 % 60),
                  static_cast<long long>(ms / 1000 % 60), static_cast<long long>(ms % 1000));
    return buf;
}

} // namespace triad
