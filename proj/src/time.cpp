#include "mwtp/time.hpp"

#include <charconv>
#include <cstdio>

#include "mwtp/errors.hpp"

namespace mwtp {

namespace {

int parse_fixed(std::string_view text, std::size_t pos, std::size_t width, std::string_view whole)
{
    if (pos + width > text.size())
        throw ParseError("truncated date-time '" + std::string(whole) + "'");
    int value = 0;
    auto first = text.data() + pos;
    auto last = first + width;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw ParseError("malformed date-time '" + std::string(whole) + "'");
    return value;
}

void expect_char(std::string_view text, std::size_t pos, char c, std::string_view whole)
{
    if (pos >= text.size() || text[pos] != c)
        throw ParseError("malformed date-time '" + std::string(whole) + "'");
}

} // namespace

std::chrono::sys_days Date::to_sys_days() const
{
    using namespace std::chrono;
    return sys_days{year_month_day{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                                   std::chrono::day{static_cast<unsigned>(day)}}};
}

Date Date::from_sys_days(std::chrono::sys_days d)
{
    std::chrono::year_month_day ymd{d};
    return Date{static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month())),
                static_cast<int>(static_cast<unsigned>(ymd.day()))};
}

Date Date::plus_days(int n) const
{
    return from_sys_days(to_sys_days() + std::chrono::days{n});
}

bool Date::valid() const
{
    if (month < 1 || month > 12 || day < 1 || day > 31)
        return false;
    std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                                    std::chrono::day{static_cast<unsigned>(day)}};
    return ymd.ok();
}

std::string Date::str() const
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
}

Date Date::parse(std::string_view text)
{
    if (text.size() != 10)
        throw ParseError("malformed date '" + std::string(text) + "'");
    Date d;
    d.year = parse_fixed(text, 0, 4, text);
    expect_char(text, 4, '-', text);
    d.month = parse_fixed(text, 5, 2, text);
    expect_char(text, 7, '-', text);
    d.day = parse_fixed(text, 8, 2, text);
    if (!d.valid())
        throw ParseError("invalid calendar date '" + std::string(text) + "'");
    return d;
}

LocalDateTime LocalDateTime::plus_minutes(std::int64_t minutes) const
{
    return from_seconds_since_epoch(seconds_since_epoch() + minutes * 60);
}

std::int64_t LocalDateTime::seconds_since_epoch() const
{
    auto days = date.to_sys_days().time_since_epoch().count();
    return static_cast<std::int64_t>(days) * 86400 + hour * 3600 + minute * 60 + second;
}

LocalDateTime LocalDateTime::from_seconds_since_epoch(std::int64_t s)
{
    std::int64_t days = s / 86400;
    std::int64_t rem = s % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    LocalDateTime t;
    t.date = Date::from_sys_days(std::chrono::sys_days{std::chrono::days{days}});
    t.hour = static_cast<int>(rem / 3600);
    t.minute = static_cast<int>(rem % 3600 / 60);
    t.second = static_cast<int>(rem % 60);
    return t;
}

std::string LocalDateTime::str() const
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d %02d:%02d:%02d", date.year, date.month, date.day, hour, minute,
                  second);
    return buf;
}

std::string LocalDateTime::iso() const
{
    auto s = str();
    s[10] = 'T';
    return s;
}

LocalDateTime LocalDateTime::parse(std::string_view text)
{
    if (text.size() != 16 && text.size() != 19)
        throw ParseError("malformed date-time '" + std::string(text) + "'");
    LocalDateTime t;
    t.date = Date::parse(text.substr(0, 10));
    if (text[10] != 'T' && text[10] != ' ')
        throw ParseError("malformed date-time '" + std::string(text) + "'");
    t.hour = parse_fixed(text, 11, 2, text);
    expect_char(text, 13, ':', text);
    t.minute = parse_fixed(text, 14, 2, text);
    if (text.size() == 19) {
        expect_char(text, 16, ':', text);
        t.second = parse_fixed(text, 17, 2, text);
    }
    if (t.hour > 23 || t.minute > 59 || t.second > 59)
        throw ParseError("time of day out of range in '" + std::string(text) + "'");
    return t;
}

} // namespace mwtp
