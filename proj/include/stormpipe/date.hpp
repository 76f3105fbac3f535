#pragma once

#include <charconv>
#include <chrono>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "stormpipe/error.hpp"

namespace stormpipe {

/// Calendar day (UTC), stored as days since 1970-01-01.
class Day {
 public:
  constexpr Day() = default;
  constexpr explicit Day(std::int32_t serial) : serial_(serial) {}

  static constexpr Day from_ymd(int y, unsigned m, unsigned d) {
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                          std::chrono::day{d}};
    return Day(static_cast<std::int32_t>(
        std::chrono::sys_days{ymd}.time_since_epoch().count()));
  }

  /// Strict "YYYY-MM-DD".
  static Day parse(std::string_view s) {
    auto bad = [&] { return ValidationError("invalid date '" + std::string(s) + "'"); };
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') throw bad();
    int y = 0;
    unsigned m = 0, d = 0;
    auto num = [&](std::string_view part, auto& out) {
      for (char c : part)
        if (c < '0' || c > '9') throw bad();
      std::from_chars(part.data(), part.data() + part.size(), out);
    };
    num(s.substr(0, 4), y);
    num(s.substr(5, 2), m);
    num(s.substr(8, 2), d);
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                          std::chrono::day{d}};
    if (!ymd.ok()) throw bad();
    return from_ymd(y, m, d);
  }

  std::string str() const {
    const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{serial_}}};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
  }

  constexpr std::int32_t serial() const noexcept { return serial_; }

  constexpr Day operator+(std::int32_t days) const noexcept { return Day(serial_ + days); }
  constexpr Day operator-(std::int32_t days) const noexcept { return Day(serial_ - days); }
  constexpr std::int32_t operator-(Day other) const noexcept { return serial_ - other.serial_; }
  constexpr Day& operator+=(std::int32_t days) noexcept {
    serial_ += days;
    return *this;
  }
  constexpr auto operator<=>(const Day&) const = default;

 private:
  std::int32_t serial_ = 0;
};

/// Inclusive day range.
struct DateRange {
  Day start;
  Day end;

  constexpr bool contains(Day d) const noexcept { return start <= d && d <= end; }
  constexpr std::int32_t days() const noexcept { return end - start + 1; }
  constexpr bool operator==(const DateRange&) const = default;
};

}  // namespace stormpipe
