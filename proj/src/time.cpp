#include "plowtrack/time.hpp"

#include <absl/time/civil_time.h>
#include <absl/time/time.h>

#include <array>
#include <cstdio>
#include <stdexcept>

#include "plowtrack/io.hpp"

namespace plowtrack {

struct LocalZone::Impl {
  absl::TimeZone tz;
};

namespace {

Timestamp from_absl(absl::Time t) { return Timestamp{std::chrono::milliseconds{absl::ToUnixMillis(t)}}; }

absl::Time to_absl(Timestamp t) { return absl::FromUnixMillis(t.time_since_epoch().count()); }

LocalDate from_civil(absl::CivilDay d) {
  return LocalDate{std::chrono::year{static_cast<int>(d.year())}, std::chrono::month{static_cast<unsigned>(d.month())},
                   std::chrono::day{static_cast<unsigned>(d.day())}};
}

std::optional<LocalDate> make_date(int y, int m, int d) {
  const LocalDate out{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                      std::chrono::day{static_cast<unsigned>(d)}};
  if (!out.ok()) return std::nullopt;
  return out;
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

}  // namespace

std::int64_t unix_seconds(Timestamp t) {
  return std::chrono::floor<std::chrono::seconds>(t).time_since_epoch().count();
}

std::optional<LocalDate> parse_date(std::string_view text) {
  text = trim(text);
  if (const auto sp = text.find_first_of(" T"); sp != std::string_view::npos) text = text.substr(0, sp);
  const auto to_int = [](std::string_view s) { return static_cast<int>(parse_integer(s).value_or(-1)); };
  if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
    const auto y = text.substr(0, 4), m = text.substr(5, 2), d = text.substr(8, 2);
    if (all_digits(y) && all_digits(m) && all_digits(d)) return make_date(to_int(y), to_int(m), to_int(d));
    return std::nullopt;
  }
  const auto s1 = text.find('/');
  const auto s2 = s1 == std::string_view::npos ? s1 : text.find('/', s1 + 1);
  if (s2 == std::string_view::npos) return std::nullopt;
  const auto m = text.substr(0, s1), d = text.substr(s1 + 1, s2 - s1 - 1), y = text.substr(s2 + 1);
  if (!all_digits(m) || !all_digits(d) || y.size() != 4 || !all_digits(y)) return std::nullopt;
  return make_date(to_int(y), to_int(m), to_int(d));
}

std::string format_date(LocalDate d) {
  std::array<char, 16> buf{};
  std::snprintf(buf.data(), buf.size(), "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf.data();
}

int days_between(LocalDate a, LocalDate b) {
  return static_cast<int>((std::chrono::sys_days{b} - std::chrono::sys_days{a}).count());
}

LocalZone::LocalZone(std::string name, std::shared_ptr<const Impl> impl)
    : name_(std::move(name)), impl_(std::move(impl)) {}

LocalZone LocalZone::load(std::string_view name) {
  absl::TimeZone tz;
  if (name.empty() || !absl::LoadTimeZone(std::string(name), &tz)) {
    throw std::invalid_argument("unknown time zone '" + std::string(name) + "'");
  }
  return LocalZone(std::string(name), std::make_shared<const Impl>(Impl{tz}));
}

LocalDate LocalZone::day_of(Timestamp t) const { return from_civil(absl::ToCivilDay(to_absl(t), impl_->tz)); }

Timestamp LocalZone::start_of(LocalDate d) const {
  const absl::CivilDay civil(static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                             static_cast<unsigned>(d.day()));
  return from_absl(absl::FromCivil(civil, impl_->tz));
}

std::optional<Timestamp> LocalZone::parse(std::string_view text) const {
  std::string s(trim(text));
  if (s.empty()) return std::nullopt;
  if (s.size() > 10 && s[10] == ' ' && s[4] == '-') s[10] = 'T';
  if (s.back() == 'Z' || s.back() == 'z') {
    s.pop_back();
    s += "+00:00";
  }
  static constexpr std::array<const char*, 6> kFormats{
      "%Y-%m-%dT%H:%M:%E*S%Ez", "%Y-%m-%dT%H:%M:%E*S%z", "%Y-%m-%dT%H:%M:%E*S",
      "%Y-%m-%dT%H:%M",         "%m/%d/%Y %H:%M:%S",     "%m/%d/%Y %H:%M",
  };
  for (const char* fmt : kFormats) {
    absl::Time t;
    std::string err;
    if (absl::ParseTime(fmt, s, impl_->tz, &t, &err)) return from_absl(t);
  }
  return std::nullopt;
}

std::string LocalZone::format(Timestamp t) const {
  return absl::FormatTime("%Y-%m-%dT%H:%M:%E*S%Ez", to_absl(t), impl_->tz);
}

}  // namespace plowtrack
