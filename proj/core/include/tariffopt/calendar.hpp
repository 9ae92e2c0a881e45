#pragma once

#include <chrono>
#include <cstdint>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace tariffopt {

using Date = std::chrono::sys_days;

inline constexpr int kSlotsPerDay = 48;
inline constexpr int kMinutesPerSlot = 30;

// Naive local wall-clock time at minute resolution. No timezone or DST
// handling: duplicated or missing DST slots must be resolved before ingest.
class Timestamp {
 public:
  constexpr Timestamp() = default;
  constexpr explicit Timestamp(std::int64_t minutes_since_epoch) : minutes_(minutes_since_epoch) {}

  static Timestamp from_date_slot(Date date, int slot);
  // Accepts "YYYY-MM-DDTHH:MM[:SS]" or the same with a space separator.
  static std::optional<Timestamp> parse(std::string_view text);

  constexpr std::int64_t minutes() const { return minutes_; }
  Date date() const;
  int slot_of_day() const;  // 0..47, floor of minutes-of-day / 30
  int minute_of_day() const;
  bool on_slot_boundary() const { return minute_of_day() % kMinutesPerSlot == 0; }
  Timestamp plus_slots(std::int64_t slots) const {
    return Timestamp(minutes_ + slots * kMinutesPerSlot);
  }
  std::string iso() const;

  constexpr auto operator<=>(const Timestamp&) const = default;

 private:
  std::int64_t minutes_ = 0;
};

std::int64_t slots_between(Timestamp from, Timestamp to);

// Monday = 0 ... Sunday = 6.
int weekday_index(Date date);
unsigned month_of(Date date);
int year_of(Date date);
int day_of_year(Date date);  // 0-based
std::optional<Date> parse_date(std::string_view text);  // "YYYY-MM-DD"
std::string format_date(Date date);
Date make_date(int year, unsigned month, unsigned day);

// Inclusive range of calendar dates.
struct DateRange {
  Date first;
  Date last;

  bool contains(Date d) const { return d >= first && d <= last; }
  bool contains(Timestamp t) const { return contains(t.date()); }
  long days() const { return (last - first).count() + 1; }
};

}  // namespace tariffopt
