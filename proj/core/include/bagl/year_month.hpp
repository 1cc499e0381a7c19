#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace bagl {

/// Calendar month stamp. Arithmetic is in whole months.
class YearMonth {
 public:
  constexpr YearMonth() = default;
  constexpr YearMonth(int year, int month) : year_(year), month_(month) {}

  /// Parses "YYYYMM" or "YYYY-MM", ignoring surrounding blanks. Throws DataError on anything else.
  static YearMonth parse(std::string_view text);
  static YearMonth from_serial(int serial);

  [[nodiscard]] constexpr int year() const { return year_; }
  [[nodiscard]] constexpr int month() const { return month_; }
  [[nodiscard]] constexpr bool valid() const { return month_ >= 1 && month_ <= 12; }

  /// Months since year 0, January.
  [[nodiscard]] constexpr int serial() const { return year_ * 12 + (month_ - 1); }

  [[nodiscard]] YearMonth plus_months(int months) const { return from_serial(serial() + months); }

  /// "YYYYMM", the layout used by the French data library.
  [[nodiscard]] std::string compact() const;
  /// "YYYY-MM".
  [[nodiscard]] std::string iso() const;

  friend constexpr auto operator<=>(const YearMonth& a, const YearMonth& b) {
    return a.serial() <=> b.serial();
  }
  friend constexpr bool operator==(const YearMonth& a, const YearMonth& b) {
    return a.serial() == b.serial();
  }

 private:
  int year_ = 0;
  int month_ = 1;
};

/// Signed month distance b - a.
inline int months_between(const YearMonth& a, const YearMonth& b) { return b.serial() - a.serial(); }

}  // namespace bagl
