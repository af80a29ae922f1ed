#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace mwtp {

/// Calendar date without a zone.
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;

    std::chrono::sys_days to_sys_days() const;
    static Date from_sys_days(std::chrono::sys_days d);

    Date plus_days(int n) const;
    bool valid() const;

    /// YYYY-MM-DD
    std::string str() const;
    static Date parse(std::string_view text);
};

/// Wall-clock time as reported by a station. Sorting matches chronological
/// order within one zone.
struct LocalDateTime {
    Date date;
    int hour = 0;
    int minute = 0;
    int second = 0;

    auto operator<=>(const LocalDateTime&) const = default;

    /// Minutes since midnight.
    int minute_of_day() const { return hour * 60 + minute; }

    LocalDateTime plus_minutes(std::int64_t minutes) const;
    std::int64_t seconds_since_epoch() const;
    static LocalDateTime from_seconds_since_epoch(std::int64_t s);

    /// "YYYY-MM-DD HH:MM:SS", the storage representation.
    std::string str() const;
    /// "YYYY-MM-DDTHH:MM:SS", the fixture representation.
    std::string iso() const;

    /// Accepts either separator ('T' or ' '). Seconds are optional.
    static LocalDateTime parse(std::string_view text);

    static LocalDateTime at(Date d, int hour, int minute = 0, int second = 0) {
        return LocalDateTime{d, hour, minute, second};
    }
};

/// Inclusive on both ends.
struct TimeRange {
    LocalDateTime from;
    LocalDateTime to;

    bool contains(const LocalDateTime& t) const { return from <= t && t <= to; }
};

} // namespace mwtp
