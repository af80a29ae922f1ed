#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mwtp/catalog.hpp"
#include "mwtp/connectors.hpp"
#include "mwtp/model.hpp"
#include "mwtp/time.hpp"

namespace mwtp {

/// splitmix64 stream. Uniform doubles use the top 53 bits so output does not
/// depend on the standard library's distributions.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();
    /// [0, 1)
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Inclusive on both ends.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    bool chance(double p) { return uniform() < p; }

private:
    std::uint64_t state_;
};

/// Independent stream for (seed, purpose, target, day).
SplitMix64 synth_stream(std::uint64_t seed, std::string_view purpose, std::string_view target, Date day);

/// [start, end) in minutes of day.
struct PeakWindow {
    int start_min = 0;
    int end_min = 0;

    bool operator==(const PeakWindow&) const = default;
};

struct SynthProfile {
    std::uint64_t seed = 2017;

    double temp_mean = 22.0;
    double temp_amplitude = 7.0;
    double temp_peak_hour = 15.0;
    /// Half-width of the uniform temperature noise, as a fraction of the amplitude.
    double temp_noise = 0.15;
    /// Chance that any one weather attribute is NA in an observation.
    double weather_na_probability = 0.03;

    /// Route speed at free flow is drawn from [min, max] m/s.
    double free_flow_speed_min = 9.0;
    double free_flow_speed_max = 15.0;
    double peak_multiplier = 1.6;
    std::vector<PeakWindow> peak_windows{{7 * 60, 9 * 60}, {18 * 60, 20 * 60}};

    /// IMECA baseline per contaminant, in all_contaminants order.
    std::array<int, 6> pollution_baseline{40, 30, 10, 8, 20, 35};
    /// Half-width of the integer noise added to each reading.
    int pollution_noise = 10;
    double episode_probability = 0.1;
    /// Peak IMECA points added at the top of an episode.
    int episode_boost = 80;
    double outage_probability = 0.02;
    /// Chance that one pollution cell is missing outside an outage.
    double pollution_na_probability = 0.01;

    /// Throws ConfigError when an invariant is broken.
    void check() const;
    /// Sets one `[synth]` key. Throws ConfigError for unknown keys or bad values.
    void set(std::string_view key, std::string_view value);

    bool operator==(const SynthProfile&) const = default;
};

/// Shortest route length the generator produces, in metres.
inline constexpr double synth_min_distance = 12300;
inline constexpr double synth_max_distance = 60400;

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

/// Observations at the site's interval over the whole day.
std::vector<WeatherRecord> synth_weather_day(const SynthProfile& p, const WeatherSite& site, Date day);

double synth_route_distance(const SynthProfile& p, const TrafficRoute& route);
double synth_route_free_flow(const SynthProfile& p, const TrafficRoute& route);
/// 1 outside the peak windows, the profile's multiplier inside.
double synth_congestion(const SynthProfile& p, const LocalDateTime& at);
TrafficRecord synth_traffic(const SynthProfile& p, const TrafficRoute& route, const LocalDateTime& at);

bool synth_outage(const SynthProfile& p, const PollutionStation& station, Date day);
/// Hours 02 through request_hour. Throws PreconditionError for a request
/// hour outside 2..23.
std::vector<PollutionRecord> synth_pollution_day(const SynthProfile& p, const PollutionStation& station, Date day,
                                                 int request_hour);

// ---------------------------------------------------------------------------
// Payloads in the connector fixture formats
// ---------------------------------------------------------------------------

SourcePayload gen_weather_day(const SynthProfile& p, const WeatherSite& site, Date day);
SourcePayload gen_traffic_response(const SynthProfile& p, const TrafficRoute& route, const LocalDateTime& at);
SourcePayload gen_pollution_day(const SynthProfile& p, const PollutionStation& station, Date day, int request_hour);

/// Condition codes the generator emits, with descriptions, for seeding lookups.
const std::vector<std::pair<std::string, std::string>>& synth_conditions();
const std::vector<std::pair<std::string, std::string>>& synth_icons();

} // namespace mwtp
