#include "bagl/year_month.hpp"

#include <cctype>
#include <cstdio>

#include "bagl/errors.hpp"

namespace bagl {

namespace {

bool all_digits(std::string_view s) {
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return !s.empty();
}

int to_int(std::string_view s) {
  int v = 0;
  for (char c : s) v = v * 10 + (c - '0');
  return v;
}

}  // namespace

YearMonth YearMonth::parse(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  std::string_view year_part, month_part;
  if (text.size() == 6) {
    year_part = text.substr(0, 4);
    month_part = text.substr(4, 2);
  } else if (text.size() == 7 && text[4] == '-') {
    year_part = text.substr(0, 4);
    month_part = text.substr(5, 2);
  } else {
    throw DataError("malformed date stamp '" + std::string(text) + "'");
  }
  if (!all_digits(year_part) || !all_digits(month_part))
    throw DataError("malformed date stamp '" + std::string(text) + "'");
  YearMonth ym(to_int(year_part), to_int(month_part));
  if (!ym.valid()) throw DataError("month out of range in '" + std::string(text) + "'");
  return ym;
}

YearMonth YearMonth::from_serial(int serial) {
  int year = serial / 12;
  int rem = serial % 12;
  if (rem < 0) {
    rem += 12;
    --year;
  }
  return {year, rem + 1};
}

std::string YearMonth::compact() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d%02d", year_, month_);
  return buf;
}

std::string YearMonth::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d", year_, month_);
  return buf;
}

}  // namespace bagl
