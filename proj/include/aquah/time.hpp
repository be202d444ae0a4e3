#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace aquah {

/// UTC instant at one-second resolution.
using Instant = std::chrono::sys_seconds;

/// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH:MM[:SS]" and "YYYY-MM-DD HH:MM[:SS]",
/// with an optional trailing 'Z'. Throws ParseError.
Instant parse_instant(std::string_view text);

/// "YYYY-MM-DDTHH:MM:SS"
std::string format_instant(Instant t);
/// "YYYY-MM-DD"
std::string format_date(Instant t);

/// strftime-style expansion (%Y %m %d %H %M %S %j %%) in UTC.
std::string format_pattern(Instant t, const std::string& pattern);

/// Half-open simulation window [start, end) split into steps of dt seconds.
/// Step k covers [start + k*dt, start + (k+1)*dt) and is labelled by its
/// start instant.
struct TimeWindow {
  Instant start;
  Instant end;
  std::int64_t dt = 3600;

  /// Throws StepError unless start < end, dt > 0 and dt divides the span.
  void validate() const;
  std::size_t steps() const;
  Instant step_time(std::size_t k) const;
  std::vector<Instant> timestamps() const;
};

/// Build a window from inclusive calendar dates, i.e. end is the day after
/// `last_day` at midnight.
TimeWindow window_from_dates(Instant first_day, Instant last_day, std::int64_t dt);

}  // namespace aquah
