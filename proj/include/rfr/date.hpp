#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace rfr {

// Calendar day. Parsed from and formatted as ISO-8601 (YYYY-MM-DD).
class Date {
 public:
  Date() = default;
  explicit Date(std::chrono::sys_days days) : days_(days) {}
  Date(int year, unsigned month, unsigned day);

  // Throws DataError on anything that is not a valid YYYY-MM-DD day.
  static Date parse(std::string_view text);

  std::string str() const;
  std::chrono::sys_days days() const { return days_; }

  auto operator<=>(const Date&) const = default;

 private:
  std::chrono::sys_days days_{};
};

}  // namespace rfr
