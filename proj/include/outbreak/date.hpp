#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace outbreak {

using Date = std::chrono::year_month_day;

/// Strict `YYYY-MM-DD`; returns nullopt for anything else, including
/// impossible calendar dates such as 2019-02-30.
std::optional<Date> parse_date(std::string_view text);

std::string format_date(Date d);

inline std::chrono::sys_days to_days(Date d) { return std::chrono::sys_days{d}; }
inline Date from_days(std::chrono::sys_days d) { return Date{d}; }

inline Date add_days(Date d, int n) { return from_days(to_days(d) + std::chrono::days{n}); }

/// Inclusive day count of [start, end].
inline int days_between_inclusive(Date start, Date end) {
  return static_cast<int>((to_days(end) - to_days(start)).count()) + 1;
}

/// Calendar midpoint of an inclusive period, rounded toward the start.
inline Date period_midpoint(Date start, Date end) {
  auto span = (to_days(end) - to_days(start)).count();
  return from_days(to_days(start) + std::chrono::days{span / 2});
}

}  // namespace outbreak
