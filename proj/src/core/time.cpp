#include "ctindex/time.hpp"

#include <charconv>
#include <cstdio>

namespace ctindex {

namespace {

bool parse_fixed(std::string_view text, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > text.size()) {
        return false;
    }
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (text[i] < '0' || text[i] > '9') {
            return false;
        }
    }
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
    return ec == std::errc{} && ptr == text.data() + pos + len;
}

}  // namespace

std::optional<Date> parse_iso_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        return std::nullopt;
    }
    int y = 0;
    int m = 0;
    int d = 0;
    if (!parse_fixed(text, 0, 4, y) || !parse_fixed(text, 5, 2, m) || !parse_fixed(text, 8, 2, d)) {
        return std::nullopt;
    }
    Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
              std::chrono::day{static_cast<unsigned>(d)}};
    if (!date.ok()) {
        return std::nullopt;
    }
    return date;
}

std::string format_iso_date(Date date) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

std::int32_t to_day_number(Date date) noexcept {
    return static_cast<std::int32_t>(std::chrono::sys_days{date}.time_since_epoch().count());
}

Date from_day_number(std::int32_t days) noexcept {
    return Date{std::chrono::sys_days{std::chrono::days{days}}};
}

std::string format_timestamp(Timestamp ts) {
    using namespace std::chrono;
    const auto day = floor<days>(ts);
    const Date date{day};
    const hh_mm_ss<milliseconds> tod{ts - day};
    char buf[40];
    const auto ms = tod.subseconds().count();
    if (ms == 0) {
        std::snprintf(buf, sizeof(buf), "%sT%02ld:%02ld:%02lldZ", format_iso_date(date).c_str(),
                      static_cast<long>(tod.hours().count()), static_cast<long>(tod.minutes().count()),
                      static_cast<long long>(tod.seconds().count()));
    } else {
        std::snprintf(buf, sizeof(buf), "%sT%02ld:%02ld:%02lld.%03lldZ", format_iso_date(date).c_str(),
                      static_cast<long>(tod.hours().count()), static_cast<long>(tod.minutes().count()),
                      static_cast<long long>(tod.seconds().count()), static_cast<long long>(ms));
    }
    return buf;
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
    using namespace std::chrono;
    if (text.size() < 20 || text[10] != 'T' || text.back() != 'Z' || text[13] != ':' ||
        text[16] != ':') {
        return std::nullopt;
    }
    const auto date = parse_iso_date(text.substr(0, 10));
    int hh = 0;
    int mm = 0;
    int ss = 0;
    if (!date || !parse_fixed(text, 11, 2, hh) || !parse_fixed(text, 14, 2, mm) ||
        !parse_fixed(text, 17, 2, ss) || hh > 23 || mm > 59 || ss > 60) {
        return std::nullopt;
    }
    int ms = 0;
    if (text.size() == 24) {
        if (text[19] != '.' || !parse_fixed(text, 20, 3, ms)) {
            return std::nullopt;
        }
    } else if (text.size() != 20) {
        return std::nullopt;
    }
    return Timestamp{sys_days{*date}} + hours{hh} + minutes{mm} + seconds{ss} + milliseconds{ms};
}

Timestamp now_utc() noexcept {
    return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

Date today_utc() noexcept {
    return Date{std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now())};
}

}  // namespace ctindex
