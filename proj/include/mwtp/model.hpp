#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "mwtp/time.hpp"

namespace mwtp {

using LocationId = std::int64_t;

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

/// One observation at one weather station. Every attribute except the
/// timestamp, zone and location may be NA (std::nullopt). Lookup attributes
/// (wdire, cond, icon, time_zone) hold catalog codes; storage resolves them to
/// catalog ids on insert.
struct WeatherRecord {
    LocalDateTime timestamp;
    std::string time_zone = "CST";

    std::optional<double> temp;
    std::optional<double> dewpt;
    std::optional<double> hum;
    std::optional<double> wspd;
    std::optional<double> wgust;
    std::optional<double> wdird;
    std::optional<std::string> wdire;
    std::optional<double> pressure;
    std::optional<double> windchill;
    std::optional<double> heatindex;
    std::optional<double> preciprate;
    std::optional<double> preciptotal;
    std::optional<double> solarradiation;
    std::optional<double> uv;
    std::optional<double> vis;
    std::optional<double> precip;
    std::optional<std::string> cond;
    std::optional<std::string> icon;
    std::optional<bool> fog;
    std::optional<bool> rain;
    std::optional<bool> snow;
    std::optional<bool> hail;
    std::optional<bool> thunder;
    std::optional<bool> tornado;
    std::optional<std::string> metar;

    LocationId location = 0;

    bool operator==(const WeatherRecord&) const = default;
};

/// One atomic registry: distance (m), typical time (s) and current time (s).
struct TrafficRecord {
    LocalDateTime timestamp;
    double traveldist = 0;
    double traveltime_std = 0;
    double traveltime_curr = 0;
    LocationId location = 0;

    bool operator==(const TrafficRecord&) const = default;
};

enum class Contaminant { pm10, o3, co, so2, no2, pm25 };

inline constexpr std::array<Contaminant, 6> all_contaminants{Contaminant::pm10, Contaminant::o3,  Contaminant::co,
                                                             Contaminant::so2,  Contaminant::no2, Contaminant::pm25};

/// Tag used in pollution fixtures: PM10, O3, CO, SO2, NO2, PM25.
std::string_view contaminant_tag(Contaminant c);
/// Column name in the pollutions table: pm10, o3, ...
std::string_view contaminant_column(Contaminant c);
std::optional<Contaminant> contaminant_from_tag(std::string_view tag);

/// Hourly IMECA readings at one station.
struct PollutionRecord {
    LocalDateTime timestamp;
    std::array<std::optional<int>, 6> readings{};
    LocationId location = 0;

    std::optional<int>& reading(Contaminant c) { return readings[static_cast<std::size_t>(c)]; }
    const std::optional<int>& reading(Contaminant c) const { return readings[static_cast<std::size_t>(c)]; }

    bool operator==(const PollutionRecord&) const = default;
};

// ---------------------------------------------------------------------------
// Attribute descriptors for the weather row
// ---------------------------------------------------------------------------

struct WeatherNumber {
    std::string_view name;
    std::optional<double> WeatherRecord::*member;
    bool airport_only;
};

struct WeatherFlag {
    std::string_view name;
    std::optional<bool> WeatherRecord::*member;
};

enum class LookupCatalog { time_zones, wdires, conds, icons };

struct WeatherCode {
    std::string_view name;
    std::optional<std::string> WeatherRecord::*member;
    LookupCatalog catalog;
};

inline constexpr std::array<WeatherNumber, 15> weather_numbers{{
    {"temp", &WeatherRecord::temp, false},
    {"dewpt", &WeatherRecord::dewpt, false},
    {"hum", &WeatherRecord::hum, false},
    {"wspd", &WeatherRecord::wspd, false},
    {"wgust", &WeatherRecord::wgust, false},
    {"wdird", &WeatherRecord::wdird, false},
    {"pressure", &WeatherRecord::pressure, false},
    {"windchill", &WeatherRecord::windchill, false},
    {"heatindex", &WeatherRecord::heatindex, false},
    {"preciprate", &WeatherRecord::preciprate, false},
    {"preciptotal", &WeatherRecord::preciptotal, false},
    {"solarradiation", &WeatherRecord::solarradiation, false},
    {"uv", &WeatherRecord::uv, false},
    {"vis", &WeatherRecord::vis, true},
    {"precip", &WeatherRecord::precip, true},
}};

// All presence flags are airport-only.
inline constexpr std::array<WeatherFlag, 6> weather_flags{{
    {"fog", &WeatherRecord::fog},
    {"rain", &WeatherRecord::rain},
    {"snow", &WeatherRecord::snow},
    {"hail", &WeatherRecord::hail},
    {"thunder", &WeatherRecord::thunder},
    {"tornado", &WeatherRecord::tornado},
}};

inline constexpr std::array<WeatherCode, 3> weather_codes{{
    {"wdire", &WeatherRecord::wdire, LookupCatalog::wdires},
    {"cond", &WeatherRecord::cond, LookupCatalog::conds},
    {"icon", &WeatherRecord::icon, LookupCatalog::icons},
}};

/// Number of NA-able attributes in a weather row (numbers + codes + flags + metar).
inline constexpr std::size_t weather_attribute_count = weather_numbers.size() + weather_codes.size() +
                                                       weather_flags.size() + 1;

std::size_t count_na(const WeatherRecord& r);
std::size_t count_na(const PollutionRecord& r);

// ---------------------------------------------------------------------------
// Locations and lookups
// ---------------------------------------------------------------------------

struct WeatherStation {
    LocationId id = 0;
    std::string file_id;
    std::optional<std::string> station_id;
    std::optional<std::string> airport_code;
    double lat = 0;
    double lon = 0;
    std::string description;
    std::optional<std::string> software_type;
    Date since;

    bool is_airport() const { return airport_code.has_value(); }
    /// Throws ConfigError when an invariant is broken.
    void check() const;

    bool operator==(const WeatherStation&) const = default;
};

struct TrafficRoute {
    LocationId id = 0;
    std::string file_id;
    double start_lat = 0;
    double start_lon = 0;
    double end_lat = 0;
    double end_lon = 0;
    std::string description_from;
    std::string description_to;

    void check() const;

    bool operator==(const TrafficRoute&) const = default;
};

struct PollutionStation {
    LocationId id = 0;
    std::string file_id;
    double lat = 0;
    double lon = 0;
    std::string description;

    void check() const;

    bool operator==(const PollutionStation&) const = default;
};

struct Lookup {
    std::int64_t id = 0;
    std::string code;
    std::string description;

    bool operator==(const Lookup&) const = default;
};

bool valid_latitude(double lat);
bool valid_longitude(double lon);

} // namespace mwtp
