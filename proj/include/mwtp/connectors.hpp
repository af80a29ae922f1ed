#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mwtp/model.hpp"
#include "mwtp/time.hpp"

namespace mwtp {

enum class SourceKind { weather, traffic, pollution };

std::string_view source_kind_name(SourceKind k);

/// Raw text delivered by a source, before any parsing.
struct SourcePayload {
    SourceKind kind = SourceKind::weather;
    LocalDateTime fetched_at;
    std::string body;
    std::string origin;
};

struct Provenance {
    std::string origin;
    LocalDateTime fetched_at;
    std::size_t line = 0;

    bool operator==(const Provenance&) const = default;
};

/// Station file_id -> resolved location, as known to the collector.
struct LocationIndex {
    struct Weather {
        LocationId id = 0;
        bool airport = false;
        std::string time_zone = "CST";
    };

    std::map<std::string, Weather, std::less<>> weather;
    std::map<std::string, LocationId, std::less<>> routes;
    std::map<std::string, LocationId, std::less<>> pollution;
};

// ---------------------------------------------------------------------------
// Raw readings: values kept as delivered text
// ---------------------------------------------------------------------------

struct RawWeather {
    std::string station;
    std::optional<LocalDateTime> timestamp;
    std::optional<LocationId> location;
    bool airport = false;
    std::string time_zone = "CST";
    /// Weather column name -> value text, exactly as in the payload.
    std::map<std::string, std::string, std::less<>> fields;
    Provenance provenance;

    bool operator==(const RawWeather&) const = default;
};

struct RawTraffic {
    std::string route;
    std::optional<LocalDateTime> timestamp;
    std::optional<LocationId> location;
    std::string traveldist;
    std::string traveltime_std;
    std::string traveltime_curr;
    Provenance provenance;

    bool operator==(const RawTraffic&) const = default;
};

/// One (station, hour, contaminant) cell. `value` is nullopt for a dash or
/// blank cell.
struct RawPollutionCell {
    std::string station;
    std::optional<LocationId> location;
    Contaminant contaminant = Contaminant::pm10;
    LocalDateTime timestamp;
    std::optional<std::string> value;
    Provenance provenance;

    bool operator==(const RawPollutionCell&) const = default;
};

using RawReading = std::variant<RawWeather, RawTraffic, RawPollutionCell>;

/// All contaminant cells of one station-hour, still unvalidated.
struct PollutionCandidate {
    std::string station;
    std::optional<LocationId> location;
    LocalDateTime timestamp;
    std::array<std::optional<std::string>, 6> readings{};

    std::optional<std::string>& reading(Contaminant c) { return readings[static_cast<std::size_t>(c)]; }
    const std::optional<std::string>& reading(Contaminant c) const
    {
        return readings[static_cast<std::size_t>(c)];
    }

    bool operator==(const PollutionCandidate&) const = default;
};

// ---------------------------------------------------------------------------
// Quarantine
// ---------------------------------------------------------------------------

struct QuarantinedItem {
    SourceKind kind = SourceKind::weather;
    std::string origin;
    std::size_t line = 0;
    std::string reason;
    std::string text;
};

/// Rows that could not be attributed to a known location. Thread-safe.
class QuarantineSink {
public:
    void add(QuarantinedItem item);
    std::vector<QuarantinedItem> items() const;
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::vector<QuarantinedItem> items_;
};

// ---------------------------------------------------------------------------
// Parsers
// ---------------------------------------------------------------------------

/// Throws ParseError on malformed lines. Unknown stations and airport-only
/// attributes on a personal station are quarantined.
std::vector<RawWeather> parse_weather_observations(const SourcePayload& payload, const LocationIndex& index,
                                                   QuarantineSink& quarantine);

/// All registry lines of a traffic payload. Unknown routes are quarantined.
std::vector<RawTraffic> parse_traffic_lines(const SourcePayload& payload, const LocationIndex& index,
                                            QuarantineSink& quarantine);

/// The single registry answering a call for `route`.
RawTraffic parse_traffic_response(const SourcePayload& payload, const TrafficRoute& route);

/// Throws ParseError for unknown contaminant tags, hours 00/01 and
/// off-hour times; ConflictError for a repeated (station, hour, contaminant).
std::vector<RawPollutionCell> parse_pollution_tables(const SourcePayload& payload, const LocationIndex& index,
                                                     QuarantineSink& quarantine);

/// Joins per-contaminant cells into one candidate per hour, ordered by hour.
/// Throws PreconditionError if a cell belongs to another station or day.
std::vector<PollutionCandidate> assemble_station_day(std::span<const RawPollutionCell> cells,
                                                     const PollutionStation& station, Date day);

// ---------------------------------------------------------------------------
// Writers (inverse of the parsers)
// ---------------------------------------------------------------------------

std::string format_weather_line(std::string_view station_file_id, const WeatherRecord& r);
std::string format_weather_observations(std::string_view station_file_id, std::span<const WeatherRecord> records);
std::string format_traffic_line(std::string_view route_file_id, const TrafficRecord& r);
/// Six blocks, one per contaminant, each listing the hours of `records`.
std::string format_pollution_day(std::string_view station_file_id, Date day,
                                 std::span<const PollutionRecord> records);

/// Raw view of a cleaned record, as a parser would have produced it.
RawWeather to_raw(const WeatherRecord& r, std::string_view station_file_id, bool airport);
RawTraffic to_raw(const TrafficRecord& r, std::string_view route_file_id);
PollutionCandidate to_raw(const PollutionRecord& r, std::string_view station_file_id);

/// Byte sequence written for an NA pollution cell (U+2014).
inline constexpr std::string_view pollution_dash = "\xE2\x80\x94";

} // namespace mwtp
