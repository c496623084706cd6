#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace mna {

/// Calendar day (proleptic Gregorian). Ordered, cheap to copy.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::chrono::sys_days days) : days_(days) {}
  Date(int year, unsigned month, unsigned day);

  /// Strict ISO-8601 calendar date `YYYY-MM-DD`.
  static std::optional<Date> parse(std::string_view text);

  static Date first_of_year(int year) { return Date(year, 1, 1); }
  static Date last_of_year(int year) { return Date(year, 12, 31); }

  int year() const;
  std::string to_string() const;
  constexpr std::chrono::sys_days days() const { return days_; }

  friend constexpr auto operator<=>(const Date&, const Date&) = default;

 private:
  std::chrono::sys_days days_{};
};

}  // namespace mna
