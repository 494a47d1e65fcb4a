#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace ctindex {

using Date = std::chrono::year_month_day;
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

/// Parses `YYYY-MM-DD`. Returns nullopt for anything else, including
/// impossible calendar dates.
std::optional<Date> parse_iso_date(std::string_view text);
std::string format_iso_date(Date date);

/// Days since 1970-01-01.
std::int32_t to_day_number(Date date) noexcept;
Date from_day_number(std::int32_t days) noexcept;

/// UTC instant as `YYYY-MM-DDThh:mm:ssZ`, with `.mmm` when the
/// millisecond part is non-zero.
std::string format_timestamp(Timestamp ts);
std::optional<Timestamp> parse_timestamp(std::string_view text);

Timestamp now_utc() noexcept;
Date today_utc() noexcept;

}  // namespace ctindex
