#include "mwtp/model.hpp"

#include <cmath>

#include "mwtp/errors.hpp"

namespace mwtp {

namespace {

constexpr std::array<std::string_view, 6> contaminant_tags{"PM10", "O3", "CO", "SO2", "NO2", "PM25"};
constexpr std::array<std::string_view, 6> contaminant_columns{"pm10", "o3", "co", "so2", "no2", "pm25"};

void check_point(double lat, double lon, const std::string& who)
{
    if (!valid_latitude(lat) || !valid_longitude(lon))
        throw ConfigError(who + ": coordinates out of range");
}

} // namespace

std::string_view contaminant_tag(Contaminant c)
{
    return contaminant_tags[static_cast<std::size_t>(c)];
}

std::string_view contaminant_column(Contaminant c)
{
    return contaminant_columns[static_cast<std::size_t>(c)];
}

std::optional<Contaminant> contaminant_from_tag(std::string_view tag)
{
    for (std::size_t i = 0; i < contaminant_tags.size(); ++i)
        if (contaminant_tags[i] == tag)
            return all_contaminants[i];
    return std::nullopt;
}

std::size_t count_na(const WeatherRecord& r)
{
    std::size_t n = 0;
    for (const auto& a : weather_numbers)
        n += !(r.*a.member).has_value();
    for (const auto& a : weather_codes)
        n += !(r.*a.member).has_value();
    for (const auto& a : weather_flags)
        n += !(r.*a.member).has_value();
    n += !r.metar.has_value();
    return n;
}

std::size_t count_na(const PollutionRecord& r)
{
    std::size_t n = 0;
    for (const auto& v : r.readings)
        n += !v.has_value();
    return n;
}

bool valid_latitude(double lat)
{
    return std::isfinite(lat) && lat >= -90.0 && lat <= 90.0;
}

bool valid_longitude(double lon)
{
    return std::isfinite(lon) && lon >= -180.0 && lon <= 180.0;
}

void WeatherStation::check() const
{
    if (file_id.empty())
        throw ConfigError("weather station without file_id");
    if (station_id.has_value() == airport_code.has_value())
        throw ConfigError("weather station '" + file_id + "': exactly one of station_id/airport_code must be set");
    check_point(lat, lon, "weather station '" + file_id + "'");
}

void TrafficRoute::check() const
{
    if (file_id.empty())
        throw ConfigError("traffic route without file_id");
    check_point(start_lat, start_lon, "route '" + file_id + "' start");
    check_point(end_lat, end_lon, "route '" + file_id + "' end");
    if (start_lat == end_lat && start_lon == end_lon)
        throw ConfigError("route '" + file_id + "': start and end coincide");
}

void PollutionStation::check() const
{
    if (file_id.empty())
        throw ConfigError("pollution station without file_id");
    check_point(lat, lon, "pollution station '" + file_id + "'");
}

} // namespace mwtp
