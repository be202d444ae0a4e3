#include "aquah/time.hpp"

#include <cstdio>
#include <ctime>

#include "aquah/error.hpp"

namespace aquah {

namespace {

using namespace std::chrono;

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    v = v * 10 + (s[i] - '0');
  }
  out = v;
  return true;
}

std::tm to_tm(Instant t) {
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  std::tm tm{};
  tm.tm_year = int(ymd.year()) - 1900;
  tm.tm_mon = int(unsigned(ymd.month())) - 1;
  tm.tm_mday = int(unsigned(ymd.day()));
  tm.tm_hour = int(hms.hours().count());
  tm.tm_min = int(hms.minutes().count());
  tm.tm_sec = int(hms.seconds().count());
  tm.tm_yday = int((day - sys_days{ymd.year() / January / 1}).count());
  tm.tm_wday = int(weekday{day}.c_encoding());
  return tm;
}

}  // namespace

Instant parse_instant(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == 'Z'))
    s.remove_suffix(1);

  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  bool ok = s.size() >= 10 && read_int(s, 0, 4, y) && s[4] == '-' && read_int(s, 5, 2, mo) &&
            s[7] == '-' && read_int(s, 8, 2, d);
  if (ok && s.size() > 10) {
    ok = (s[10] == 'T' || s[10] == ' ') && s.size() >= 16 && read_int(s, 11, 2, h) &&
         s[13] == ':' && read_int(s, 14, 2, mi);
    if (ok && s.size() > 16) ok = s.size() == 19 && s[16] == ':' && read_int(s, 17, 2, sec);
  }
  const year_month_day ymd{year{y}, month{unsigned(mo)}, day{unsigned(d)}};
  if (!ok || !ymd.ok() || h > 23 || mi > 59 || sec > 59)
    throw ParseError("invalid timestamp '" + std::string(text) + "'");
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec};
}

std::string format_instant(Instant t) { return format_pattern(t, "%Y-%m-%dT%H:%M:%S"); }

std::string format_date(Instant t) { return format_pattern(t, "%Y-%m-%d"); }

std::string format_pattern(Instant t, const std::string& pattern) {
  const std::tm tm = to_tm(t);
  std::string out;
  char buf[16];
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (pattern[i] != '%' || i + 1 == pattern.size()) {
      out += pattern[i];
      continue;
    }
    const char spec = pattern[++i];
    switch (spec) {
      case 'Y': std::snprintf(buf, sizeof buf, "%04d", tm.tm_year + 1900); break;
      case 'm': std::snprintf(buf, sizeof buf, "%02d", tm.tm_mon + 1); break;
      case 'd': std::snprintf(buf, sizeof buf, "%02d", tm.tm_mday); break;
      case 'H': std::snprintf(buf, sizeof buf, "%02d", tm.tm_hour); break;
      case 'M': std::snprintf(buf, sizeof buf, "%02d", tm.tm_min); break;
      case 'S': std::snprintf(buf, sizeof buf, "%02d", tm.tm_sec); break;
      case 'j': std::snprintf(buf, sizeof buf, "%03d", tm.tm_yday + 1); break;
      case '%': std::snprintf(buf, sizeof buf, "%%"); break;
      default: throw ParseError(std::string("unsupported pattern directive %") + spec);
    }
    out += buf;
  }
  return out;
}

void TimeWindow::validate() const {
  const auto span = (end - start).count();
  if (dt <= 0) throw StepError("time step must be positive");
  if (span <= 0) throw StepError("window start must precede end");
  if (span % dt != 0)
    throw StepError("window length " + std::to_string(span) + " s is not a multiple of dt " +
                    std::to_string(dt) + " s");
}

std::size_t TimeWindow::steps() const {
  return static_cast<std::size_t>((end - start).count() / dt);
}

Instant TimeWindow::step_time(std::size_t k) const {
  return start + seconds{static_cast<std::int64_t>(k) * dt};
}

std::vector<Instant> TimeWindow::timestamps() const {
  std::vector<Instant> out;
  out.reserve(steps());
  for (std::size_t k = 0; k < steps(); ++k) out.push_back(step_time(k));
  return out;
}

TimeWindow window_from_dates(Instant first_day, Instant last_day, std::int64_t dt) {
  TimeWindow w{floor<days>(first_day), floor<days>(last_day) + days{1}, dt};
  w.validate();
  return w;
}

}  // namespace aquah
