#include "mwtp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mwtp/domain.hpp"
#include "mwtp/errors.hpp"
#include "mwtp/text.hpp"

namespace mwtp {

namespace {

constexpr std::uint64_t fnv_offset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t fnv_prime = 0x100000001b3ULL;

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = fnv_offset)
{
    for (unsigned char c : s) {
        h ^= c;
        h *= fnv_prime;
    }
    return h;
}

std::uint64_t mix(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double round_to(double v, int decimals)
{
    double scale = std::pow(10.0, decimals);
    double r = std::round(v * scale) / scale;
    return r == 0.0 ? 0.0 : r;
}

struct Sky {
    std::string_view cond;
    std::string_view icon;
    double weight;
    double cloud;
    bool wet;
};

constexpr std::array<Sky, 7> skies{{
    {"Clear", "clear", 0.35, 0.0, false},
    {"Partly Cloudy", "partlycloudy", 0.25, 0.25, false},
    {"Mostly Cloudy", "mostlycloudy", 0.15, 0.5, false},
    {"Overcast", "cloudy", 0.12, 0.75, false},
    {"Fog", "fog", 0.03, 0.8, false},
    {"Rain", "rain", 0.08, 0.85, true},
    {"Thunderstorm", "tstorms", 0.02, 0.9, true},
}};

const Sky& pick_sky(SplitMix64& rng)
{
    double u = rng.uniform();
    for (const auto& s : skies) {
        if (u < s.weight)
            return s;
        u -= s.weight;
    }
    return skies.front();
}

void check_probability(double p, std::string_view name)
{
    if (!(p >= 0.0 && p <= 1.0))
        throw ConfigError("synth " + std::string(name) + " must be in [0, 1]");
}

double parse_double(std::string_view key, std::string_view value)
{
    auto v = text::parse_number(value);
    if (!v)
        throw ConfigError("synth " + std::string(key) + ": '" + std::string(value) + "' is not a number");
    return *v;
}

int parse_int(std::string_view key, std::string_view value)
{
    double v = parse_double(key, value);
    if (v != std::floor(v) || std::abs(v) > 1e9)
        throw ConfigError("synth " + std::string(key) + ": '" + std::string(value) + "' is not an integer");
    return static_cast<int>(v);
}

int parse_clock(std::string_view key, std::string_view hhmm)
{
    auto colon = hhmm.find(':');
    if (colon == std::string_view::npos)
        throw ConfigError("synth " + std::string(key) + ": expected HH:MM, got '" + std::string(hhmm) + "'");
    int h = parse_int(key, hhmm.substr(0, colon));
    int m = parse_int(key, hhmm.substr(colon + 1));
    if (h < 0 || h > 24 || m < 0 || m > 59 || (h == 24 && m != 0))
        throw ConfigError("synth " + std::string(key) + ": bad time '" + std::string(hhmm) + "'");
    return h * 60 + m;
}

std::vector<std::string_view> split_list(std::string_view s)
{
    std::vector<std::string_view> out;
    while (true) {
        auto comma = s.find(',');
        out.push_back(text::trim(s.substr(0, comma)));
        if (comma == std::string_view::npos)
            break;
        s.remove_prefix(comma + 1);
    }
    return out;
}

std::string metar_for(const WeatherStation& station, const LocalDateTime& ts, const WeatherRecord& r)
{
    auto two = [](int v) {
        std::string s = std::to_string(v < 0 ? -v : v);
        return (v < 0 ? "M" : "") + (s.size() < 2 ? "0" + s : s);
    };
    std::string out = "METAR " + station.airport_code.value_or("XXXX") + " " + two(ts.date.day) + two(ts.hour) +
                      two(ts.minute) + "Z";
    if (r.wdird && r.wspd) {
        std::string dir = std::to_string(static_cast<int>(*r.wdird));
        dir.insert(0, 3 - dir.size(), '0');
        out += " " + dir + two(static_cast<int>(std::lround(*r.wspd / 1.852))) + "KT";
    }
    if (r.temp && r.dewpt)
        out += " " + two(static_cast<int>(std::lround(*r.temp))) + "/" + two(static_cast<int>(std::lround(*r.dewpt)));
    if (r.pressure)
        out += " Q" + std::to_string(static_cast<int>(std::lround(*r.pressure)));
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

std::uint64_t SplitMix64::next()
{
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
}

double SplitMix64::uniform()
{
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::int64_t SplitMix64::uniform_int(std::int64_t lo, std::int64_t hi)
{
    if (hi <= lo)
        return lo;
    auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    // Rejection keeps the draw unbiased.
    std::uint64_t limit = span == 0 ? 0 : (~std::uint64_t{0} - span + 1) % span;
    std::uint64_t x;
    do {
        x = next();
    } while (x < limit);
    return lo + static_cast<std::int64_t>(x % span);
}

SplitMix64 synth_stream(std::uint64_t seed, std::string_view purpose, std::string_view target, Date day)
{
    std::uint64_t h = fnv1a(purpose);
    h = fnv1a("/", h);
    h = fnv1a(target, h);
    auto serial = static_cast<std::uint64_t>(day.to_sys_days().time_since_epoch().count());
    return SplitMix64(mix(seed ^ mix(h ^ mix(serial))));
}

// ---------------------------------------------------------------------------
// Profile
// ---------------------------------------------------------------------------

void SynthProfile::check() const
{
    if (!(peak_multiplier >= 1.0))
        throw ConfigError("synth peak_multiplier must be >= 1");
    check_probability(weather_na_probability, "weather_na_probability");
    check_probability(episode_probability, "episode_probability");
    check_probability(outage_probability, "outage_probability");
    check_probability(pollution_na_probability, "pollution_na_probability");
    if (!(temp_amplitude >= 0.0) || !(temp_noise >= 0.0))
        throw ConfigError("synth temperature amplitude and noise must be >= 0");
    if (!(temp_peak_hour >= 0.0 && temp_peak_hour < 24.0))
        throw ConfigError("synth temp_peak_hour must be in [0, 24)");
    if (!(free_flow_speed_min > 0.0) || !(free_flow_speed_min <= free_flow_speed_max))
        throw ConfigError("synth free-flow speeds must satisfy 0 < min <= max");
    for (const auto& w : peak_windows)
        if (w.start_min < 0 || w.end_min > 24 * 60 || w.start_min >= w.end_min)
            throw ConfigError("synth peak window must satisfy 00:00 <= start < end <= 24:00");
    for (int b : pollution_baseline)
        if (b < imeca_min || b > imeca_max)
            throw ConfigError("synth pollution baseline outside the IMECA scale");
    if (pollution_noise < 0 || episode_boost < 0)
        throw ConfigError("synth pollution_noise and episode_boost must be >= 0");
}

void SynthProfile::set(std::string_view key, std::string_view value)
{
    value = text::trim(value);
    auto probability = [&] {
        double v = parse_double(key, value);
        if (!(v >= 0.0 && v <= 1.0))
            throw ConfigError("synth " + std::string(key) + " must be in [0, 1]");
        return v;
    };
    auto non_negative = [&] {
        double v = parse_double(key, value);
        if (v < 0.0)
            throw ConfigError("synth " + std::string(key) + " must be >= 0");
        return v;
    };
    if (key == "seed") {
        double v = parse_double(key, value);
        if (v < 0 || v != std::floor(v) || v > 9007199254740992.0)
            throw ConfigError("synth seed must be a non-negative integer");
        seed = static_cast<std::uint64_t>(v);
    } else if (key == "temp_mean") {
        temp_mean = parse_double(key, value);
    } else if (key == "temp_amplitude") {
        temp_amplitude = non_negative();
    } else if (key == "temp_peak_hour") {
        temp_peak_hour = parse_double(key, value);
    } else if (key == "temp_noise") {
        temp_noise = non_negative();
    } else if (key == "weather_na_probability") {
        weather_na_probability = probability();
    } else if (key == "free_flow_speed_min") {
        free_flow_speed_min = parse_double(key, value);
    } else if (key == "free_flow_speed_max") {
        free_flow_speed_max = parse_double(key, value);
    } else if (key == "peak_multiplier") {
        peak_multiplier = parse_double(key, value);
        if (peak_multiplier < 1.0)
            throw ConfigError("synth peak_multiplier must be >= 1");
    } else if (key == "peak_windows") {
        peak_windows.clear();
        if (!value.empty() && value != "-") {
            for (auto item : split_list(value)) {
                auto dash = item.find('-');
                if (dash == std::string_view::npos)
                    throw ConfigError("synth peak_windows: expected HH:MM-HH:MM, got '" + std::string(item) + "'");
                peak_windows.push_back({parse_clock(key, item.substr(0, dash)), parse_clock(key, item.substr(dash + 1))});
            }
        }
    } else if (key == "pollution_baseline") {
        auto items = split_list(value);
        if (items.size() != pollution_baseline.size())
            throw ConfigError("synth pollution_baseline needs six comma-separated values");
        for (std::size_t i = 0; i < items.size(); ++i)
            pollution_baseline[i] = parse_int(key, items[i]);
    } else if (key == "pollution_noise") {
        pollution_noise = parse_int(key, value);
    } else if (key == "episode_probability") {
        episode_probability = probability();
    } else if (key == "episode_boost") {
        episode_boost = parse_int(key, value);
    } else if (key == "outage_probability") {
        outage_probability = probability();
    } else if (key == "pollution_na_probability") {
        pollution_na_probability = probability();
    } else {
        throw ConfigError("unknown synth key '" + std::string(key) + "'");
    }
}

// ---------------------------------------------------------------------------
// Weather
// ---------------------------------------------------------------------------

std::vector<WeatherRecord> synth_weather_day(const SynthProfile& p, const WeatherSite& site, Date day)
{
    if (site.interval_min <= 0)
        throw PreconditionError("weather interval must be positive");
    const auto& station = site.station;
    const bool airport = station.is_airport();
    auto rng = synth_stream(p.seed, "weather", station.file_id, day);
    auto na = synth_stream(p.seed, "weather-na", station.file_id, day);

    std::vector<WeatherRecord> out;
    double rain_total = 0.0;
    for (int m = 0; m < 24 * 60; m += site.interval_min) {
        WeatherRecord r;
        r.timestamp = LocalDateTime::at(day, m / 60, m % 60);
        r.time_zone = site.time_zone;
        r.location = station.id;

        double h = m / 60.0;
        double noise = p.temp_noise * p.temp_amplitude;
        double temp = p.temp_mean +
                      p.temp_amplitude * std::cos(2.0 * std::numbers::pi * (h - p.temp_peak_hour) / 24.0) +
                      rng.uniform(-noise, noise);
        temp = std::clamp(round_to(temp, 1), -30.0, 55.0);
        const Sky& sky = pick_sky(rng);
        double hum = std::clamp(std::round(65.0 - 2.0 * (temp - p.temp_mean) + 20.0 * sky.cloud + rng.uniform(-5, 5)),
                                5.0, 100.0);
        double dewpt = std::clamp(round_to(temp - (100.0 - hum) / 5.0, 1), -30.0, 55.0);
        double wspd = round_to(rng.uniform(0, 20), 1);
        double wgust = round_to(wspd + rng.uniform(0, 12), 1);
        double wdird = static_cast<double>(rng.uniform_int(0, 359));
        double pressure = round_to(1013.0 + rng.uniform(-6, 6), 1);
        double windchill = temp <= 10.0 ? std::max(-60.0, round_to(temp - wspd / 10.0, 1)) : std::min(temp, 30.0);
        double heatindex =
            temp >= 27.0 ? std::min(70.0, round_to(temp + std::max(0.0, hum - 40.0) / 10.0, 1)) : std::max(0.0, temp);
        double sun = std::max(0.0, std::sin(std::numbers::pi * (h - 6.5) / 13.0));
        double solar = std::round(950.0 * sun * (1.0 - 0.7 * sky.cloud));
        double uv = round_to(solar / 100.0, 1);
        double rate = sky.wet ? round_to(rng.uniform(0.5, 12.0), 1) : 0.0;
        double fallen = round_to(rate * site.interval_min / 60.0, 2);
        rain_total = std::min(500.0, round_to(rain_total + fallen, 2));

        r.temp = temp;
        r.dewpt = dewpt;
        r.hum = hum;
        r.wspd = wspd;
        r.wgust = wgust;
        r.wdird = wdird;
        r.wdire = std::string(compass_point(wdird));
        r.pressure = pressure;
        r.windchill = windchill;
        r.heatindex = heatindex;
        r.preciprate = rate;
        r.preciptotal = rain_total;
        r.solarradiation = solar;
        r.uv = uv;
        r.cond = std::string(sky.cond);
        r.icon = std::string(sky.icon);
        if (airport) {
            r.vis = round_to(sky.wet || sky.cond == "Fog" ? rng.uniform(1, 8) : rng.uniform(10, 16), 1);
            r.precip = fallen;
            r.fog = sky.cond == "Fog";
            r.rain = sky.cond == "Rain" || sky.cond == "Thunderstorm";
            r.snow = false;
            r.hail = false;
            r.thunder = sky.cond == "Thunderstorm";
            r.tornado = false;
            r.metar = metar_for(station, r.timestamp, r);
        }

        for (const auto& a : weather_numbers)
            if (na.chance(p.weather_na_probability))
                (r.*a.member).reset();
        for (const auto& a : weather_codes)
            if (na.chance(p.weather_na_probability))
                (r.*a.member).reset();
        for (const auto& a : weather_flags)
            if (na.chance(p.weather_na_probability))
                (r.*a.member).reset();
        if (na.chance(p.weather_na_probability))
            r.metar.reset();
        if (!airport) {
            r.vis.reset();
            r.precip.reset();
            r.metar.reset();
            for (const auto& a : weather_flags)
                (r.*a.member).reset();
        }
        out.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Traffic
// ---------------------------------------------------------------------------

double synth_route_distance(const SynthProfile& p, const TrafficRoute& route)
{
    auto rng = synth_stream(p.seed, "route-distance", route.file_id, Date{});
    return std::round(rng.uniform(synth_min_distance, synth_max_distance));
}

double synth_route_free_flow(const SynthProfile& p, const TrafficRoute& route)
{
    auto rng = synth_stream(p.seed, "route-speed", route.file_id, Date{});
    double speed = rng.uniform(p.free_flow_speed_min, p.free_flow_speed_max);
    return std::max(1.0, std::round(synth_route_distance(p, route) / speed));
}

double synth_congestion(const SynthProfile& p, const LocalDateTime& at)
{
    int m = at.minute_of_day();
    for (const auto& w : p.peak_windows)
        if (m >= w.start_min && m < w.end_min)
            return p.peak_multiplier;
    return 1.0;
}

TrafficRecord synth_traffic(const SynthProfile& p, const TrafficRoute& route, const LocalDateTime& at)
{
    TrafficRecord r;
    r.timestamp = at;
    r.location = route.id;
    r.traveldist = synth_route_distance(p, route);
    r.traveltime_std = synth_route_free_flow(p, route);
    r.traveltime_curr = static_cast<double>(std::llround(r.traveltime_std * synth_congestion(p, at)));
    return r;
}

// ---------------------------------------------------------------------------
// Pollution
// ---------------------------------------------------------------------------

bool synth_outage(const SynthProfile& p, const PollutionStation& station, Date day)
{
    return synth_stream(p.seed, "outage", station.file_id, day).chance(p.outage_probability);
}

std::vector<PollutionRecord> synth_pollution_day(const SynthProfile& p, const PollutionStation& station, Date day,
                                                 int request_hour)
{
    if (request_hour < 2 || request_hour > 23)
        throw PreconditionError("request hour must be in 2..23");
    const bool outage = synth_outage(p, station, day);

    auto ep = synth_stream(p.seed, "episode", station.file_id, day);
    bool episode = ep.chance(p.episode_probability);
    int ep_start = static_cast<int>(ep.uniform_int(6, 18));
    int ep_len = static_cast<int>(ep.uniform_int(3, 8));

    auto rng = synth_stream(p.seed, "pollution", station.file_id, day);
    std::vector<PollutionRecord> out;
    // Draws cover every hour so a shorter request is a prefix of a longer one.
    for (int hour = 2; hour <= 23; ++hour) {
        PollutionRecord r;
        r.timestamp = LocalDateTime::at(day, hour);
        r.location = station.id;
        double boost = 0.0;
        if (episode && hour >= ep_start && hour < ep_start + ep_len) {
            double mid = ep_start + (ep_len - 1) / 2.0;
            boost = p.episode_boost * (1.0 - std::abs(hour - mid) / (ep_len / 2.0 + 1.0));
        }
        for (std::size_t c = 0; c < all_contaminants.size(); ++c) {
            auto noise = rng.uniform_int(-p.pollution_noise, p.pollution_noise);
            bool missing = rng.chance(p.pollution_na_probability);
            auto v = std::clamp<std::int64_t>(p.pollution_baseline[c] + noise + std::llround(boost), imeca_min,
                                              imeca_max);
            if (!outage && !missing)
                r.readings[c] = static_cast<int>(v);
        }
        if (hour <= request_hour)
            out.push_back(r);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Payloads
// ---------------------------------------------------------------------------

SourcePayload gen_weather_day(const SynthProfile& p, const WeatherSite& site, Date day)
{
    auto records = synth_weather_day(p, site, day);
    SourcePayload out;
    out.kind = SourceKind::weather;
    out.fetched_at = LocalDateTime::at(day.plus_days(1), 0, 30);
    out.body = format_weather_observations(site.station.file_id, records);
    out.origin = "synth:weather/" + site.station.file_id + "/" + day.str();
    return out;
}

SourcePayload gen_traffic_response(const SynthProfile& p, const TrafficRoute& route, const LocalDateTime& at)
{
    SourcePayload out;
    out.kind = SourceKind::traffic;
    out.fetched_at = at;
    out.body = format_traffic_line(route.file_id, synth_traffic(p, route, at)) + "\n";
    out.origin = "synth:traffic/" + route.file_id + "/" + at.iso();
    return out;
}

SourcePayload gen_pollution_day(const SynthProfile& p, const PollutionStation& station, Date day, int request_hour)
{
    auto records = synth_pollution_day(p, station, day, request_hour);
    SourcePayload out;
    out.kind = SourceKind::pollution;
    out.fetched_at = LocalDateTime::at(day, request_hour, 30);
    out.body = format_pollution_day(station.file_id, day, records);
    out.origin = "synth:pollution/" + station.file_id + "/" + day.str();
    return out;
}

const std::vector<std::pair<std::string, std::string>>& synth_conditions()
{
    static const std::vector<std::pair<std::string, std::string>> v = [] {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& s : skies)
            out.emplace_back(std::string(s.cond), std::string(s.cond));
        return out;
    }();
    return v;
}

const std::vector<std::pair<std::string, std::string>>& synth_icons()
{
    static const std::vector<std::pair<std::string, std::string>> v = [] {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& s : skies)
            out.emplace_back(std::string(s.icon), std::string(s.cond));
        return out;
    }();
    return v;
}

} // namespace mwtp
