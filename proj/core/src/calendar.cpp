#include "tariffopt/calendar.hpp"

#include <charconv>
#include <cstdio>

namespace tariffopt {

namespace {

constexpr std::int64_t kMinutesPerDay = 24 * 60;

bool parse_int(std::string_view text, int& out) {
  if (text.empty()) return false;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

Timestamp Timestamp::from_date_slot(Date date, int slot) {
  return Timestamp(static_cast<std::int64_t>(date.time_since_epoch().count()) * kMinutesPerDay +
                   static_cast<std::int64_t>(slot) * kMinutesPerSlot);
}

std::optional<Timestamp> Timestamp::parse(std::string_view text) {
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  if (text.size() < 16) return std::nullopt;
  auto date = parse_date(text.substr(0, 10));
  if (!date || (text[10] != 'T' && text[10] != ' ') || text[13] != ':') return std::nullopt;
  int hour = 0, minute = 0, second = 0;
  if (!parse_int(text.substr(11, 2), hour) || !parse_int(text.substr(14, 2), minute)) return std::nullopt;
  if (text.size() > 16) {
    if (text.size() != 19 || text[16] != ':' || !parse_int(text.substr(17, 2), second)) return std::nullopt;
  }
  if (hour < 0 || hour > 23 || minute < 0 || minute > 59 || second != 0) return std::nullopt;
  return Timestamp(static_cast<std::int64_t>(date->time_since_epoch().count()) * kMinutesPerDay +
                   hour * 60 + minute);
}

Date Timestamp::date() const {
  return Date(std::chrono::days(floor_div(minutes_, kMinutesPerDay)));
}

int Timestamp::minute_of_day() const {
  return static_cast<int>(minutes_ - floor_div(minutes_, kMinutesPerDay) * kMinutesPerDay);
}

int Timestamp::slot_of_day() const { return minute_of_day() / kMinutesPerSlot; }

std::string Timestamp::iso() const {
  const int mod = minute_of_day();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%sT%02d:%02d:00", format_date(date()).c_str(), mod / 60, mod % 60);
  return buf;
}

std::int64_t slots_between(Timestamp from, Timestamp to) {
  return floor_div(to.minutes() - from.minutes(), kMinutesPerSlot);
}

int weekday_index(Date date) {
  return static_cast<int>(std::chrono::weekday(date).iso_encoding()) - 1;
}

unsigned month_of(Date date) {
  return static_cast<unsigned>(std::chrono::year_month_day(date).month());
}

int year_of(Date date) { return static_cast<int>(std::chrono::year_month_day(date).year()); }

int day_of_year(Date date) {
  const auto ymd = std::chrono::year_month_day(date);
  const Date jan1 = std::chrono::year_month_day(ymd.year(), std::chrono::January, std::chrono::day(1));
  return static_cast<int>((date - jan1).count());
}

std::optional<Date> parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) ||
      !parse_int(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd(std::chrono::year(y), std::chrono::month(static_cast<unsigned>(m)),
                                        std::chrono::day(static_cast<unsigned>(d)));
  if (!ymd.ok()) return std::nullopt;
  return Date(ymd);
}

std::string format_date(Date date) {
  const auto ymd = std::chrono::year_month_day(date);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

Date make_date(int year, unsigned month, unsigned day) {
  return Date(std::chrono::year_month_day(std::chrono::year(year), std::chrono::month(month),
                                          std::chrono::day(day)));
}

}  // namespace tariffopt
