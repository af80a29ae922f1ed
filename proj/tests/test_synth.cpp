#include <doctest.h>

#include <set>

#include "mwtp/connectors.hpp"
#include "mwtp/domain.hpp"
#include "mwtp/errors.hpp"
#include "mwtp/synth.hpp"
#include "mwtp/validation.hpp"
#include "support.hpp"

using namespace mwtp;

namespace {

WeatherSite pws(int interval = 5)
{
    WeatherSite s;
    s.station.id = 1;
    s.station.file_id = "IMONTERR2";
    s.station.station_id = "IMONTERR2";
    s.station.lat = 25.63;
    s.station.lon = -100.4;
    s.interval_min = interval;
    return s;
}

WeatherSite airport()
{
    WeatherSite s;
    s.station.id = 31;
    s.station.file_id = "MMMY";
    s.station.airport_code = "MMMY";
    s.station.lat = 25.77;
    s.station.lon = -100.1;
    s.interval_min = 60;
    return s;
}

TrafficRoute route(const std::string& id = "Centro-Aeropuerto")
{
    return {5, id, 25.67, -100.31, 25.78, -100.11, "Downtown", "Airport"};
}

PollutionStation station(const std::string& id = "OBISPADO")
{
    return {2, id, 25.67, -100.33, ""};
}

LocationIndex index_for_all()
{
    LocationIndex idx;
    idx.weather["IMONTERR2"] = {1, false, "CST"};
    idx.weather["MMMY"] = {31, true, "CST"};
    idx.routes["Centro-Aeropuerto"] = 5;
    idx.pollution["OBISPADO"] = 2;
    return idx;
}

} // namespace

TEST_CASE("splitmix64 reference values and ranges")
{
    // first outputs for seed 0 from the reference implementation
    SplitMix64 r(0);
    CHECK(r.next() == 0xE220A8397B1DCDAFULL);
    CHECK(r.next() == 0x6E789E6AA1B965F4ULL);
    CHECK(r.next() == 0x06C45D188009454FULL);

    SplitMix64 u(9);
    for (int i = 0; i < 10000; ++i) {
        double x = u.uniform();
        CHECK((x >= 0.0 && x < 1.0));
        auto k = u.uniform_int(-3, 3);
        CHECK((k >= -3 && k <= 3));
    }
    auto a = synth_stream(1, "weather", "X", {2017, 1, 1});
    auto b = synth_stream(1, "weather", "X", {2017, 1, 2});
    auto c = synth_stream(1, "weather", "Y", {2017, 1, 1});
    auto a2 = synth_stream(1, "weather", "X", {2017, 1, 1});
    auto first = a.next();
    CHECK(first == a2.next());
    CHECK(first != b.next());
    CHECK(first != c.next());
}

TEST_CASE("weather day shape")
{
    SynthProfile p;
    CHECK(synth_weather_day(p, pws(5), {2017, 3, 1}).size() == 288);
    CHECK(synth_weather_day(p, pws(30), {2017, 3, 1}).size() == 48);
    CHECK(synth_weather_day(p, airport(), {2017, 3, 1}).size() == 24);

    p.temp_amplitude = 0;
    p.weather_na_probability = 0;
    for (const auto& r : synth_weather_day(p, pws(15), {2017, 7, 4}))
        CHECK(r.temp == p.temp_mean);
}

TEST_CASE("generated weather passes the default rules untouched")
{
    SynthProfile p;
    p.weather_na_probability = 0.2;
    auto rules = RuleSet::defaults();
    for (const auto& site : {pws(5), airport()}) {
        for (int d = 1; d <= 5; ++d) {
            for (const auto& r : synth_weather_day(p, site, {2017, 5, d})) {
                auto v = validate_weather(to_raw(r, site.station.file_id, site.station.is_airport()), rules);
                REQUIRE(v.accepted());
                CHECK(v.report.empty());
                CHECK(*v.record == r);
                if (!site.station.is_airport()) {
                    CHECK_FALSE(r.vis);
                    CHECK_FALSE(r.metar);
                    CHECK_FALSE(r.fog);
                }
            }
        }
    }
}

TEST_CASE("traffic generation")
{
    SynthProfile p;
    std::vector<NamedPoint> pts{{"A", 25.60, -100.3, ""}, {"B", 25.70, -100.2, ""}, {"C", 25.75, -100.4, ""},
                                {"D", 25.65, -100.1, ""}, {"E", 25.55, -100.5, ""}};
    for (const auto& r : enumerate_routes(pts)) {
        double dist = synth_route_distance(p, r);
        CHECK(dist >= synth_min_distance);
        CHECK(dist <= synth_max_distance);
        CHECK(dist == std::round(dist));
        double ff = synth_route_free_flow(p, r);
        CHECK(ff >= std::floor(dist / p.free_flow_speed_max));
        CHECK(ff <= std::ceil(dist / p.free_flow_speed_min));
        for (int m = 5 * 60; m < 23 * 60; m += 12) {
            auto t = synth_traffic(p, r, LocalDateTime::at({2017, 3, 1}, m / 60, m % 60));
            CHECK(t.traveltime_curr >= t.traveltime_std);
            CHECK(t.traveldist == dist);
            CHECK(t.traveltime_std == ff);
        }
    }

    auto off = synth_traffic(p, route(), LocalDateTime::at({2017, 3, 1}, 3));
    CHECK(off.traveltime_curr == off.traveltime_std);
    CHECK(synth_congestion(p, LocalDateTime::at({2017, 3, 1}, 8)) == 1.6);
    CHECK(std::llround(2100 * synth_congestion(p, LocalDateTime::at({2017, 3, 1}, 8))) == 3360);
    CHECK(synth_congestion(p, LocalDateTime::at({2017, 3, 1}, 9)) == 1.0); // end is exclusive
    auto peak = synth_traffic(p, route(), LocalDateTime::at({2017, 3, 1}, 18, 30));
    CHECK(peak.traveltime_curr == std::llround(peak.traveltime_std * 1.6));
}

TEST_CASE("pollution generation")
{
    SynthProfile p;
    auto day = synth_pollution_day(p, station(), {2017, 3, 1}, 23);
    if (!synth_outage(p, station(), {2017, 3, 1}))
        CHECK(day.size() == 22);
    auto at10 = synth_pollution_day(p, station(), {2017, 3, 1}, 10);
    CHECK(at10.size() == 9);
    for (std::size_t i = 0; i < at10.size(); ++i)
        CHECK(at10[i] == day[i]); // a later request only adds hours
    CHECK_THROWS_AS(synth_pollution_day(p, station(), {2017, 3, 1}, 1), PreconditionError);
    CHECK_THROWS_AS(synth_pollution_day(p, station(), {2017, 3, 1}, 24), PreconditionError);

    p.outage_probability = 1;
    for (const auto& r : synth_pollution_day(p, station(), {2017, 3, 1}, 23))
        CHECK(count_na(r) == 6);

    SynthProfile clean;
    clean.pollution_baseline = {40, 40, 40, 40, 40, 40};
    clean.pollution_noise = 10;
    clean.episode_probability = 0;
    clean.outage_probability = 0;
    clean.pollution_na_probability = 0;
    for (int d = 1; d <= 28; ++d)
        for (const auto& r : synth_pollution_day(clean, station(), {2017, 2, d}, 23))
            for (auto c : all_contaminants)
                CHECK(classify_imeca(*r.reading(c)) == ImecaCategory::good);
}

TEST_CASE("payloads are deterministic and parse back to what was generated")
{
    SynthProfile p;
    auto idx = index_for_all();
    QuarantineSink q;
    Date day{2017, 4, 2};

    for (const auto& site : {pws(10), airport()}) {
        auto a = gen_weather_day(p, site, day);
        auto b = gen_weather_day(p, site, day);
        CHECK(a.body == b.body);
        CHECK(a.kind == SourceKind::weather);
        auto expected = synth_weather_day(p, site, day);
        auto parsed = parse_weather_observations(a, idx, q);
        REQUIRE(parsed.size() == expected.size());
        for (std::size_t i = 0; i < parsed.size(); ++i) {
            auto want = to_raw(expected[i], site.station.file_id, site.station.is_airport());
            want.provenance = parsed[i].provenance;
            CHECK(parsed[i] == want);
        }
    }

    auto at = LocalDateTime::at(day, 8, 12);
    auto t = gen_traffic_response(p, route(), at);
    CHECK(t.body == gen_traffic_response(p, route(), at).body);
    auto raw = parse_traffic_response(t, route());
    auto want = to_raw(synth_traffic(p, route(), at), route().file_id);
    want.provenance = raw.provenance;
    CHECK(raw == want);

    auto pp = gen_pollution_day(p, station(), day, 23);
    CHECK(pp.body == gen_pollution_day(p, station(), day, 23).body);
    auto cells = parse_pollution_tables(pp, idx, q);
    auto cands = assemble_station_day(cells, station(), day);
    auto recs = synth_pollution_day(p, station(), day, 23);
    REQUIRE(cands.size() == recs.size());
    for (std::size_t i = 0; i < cands.size(); ++i) {
        auto w = to_raw(recs[i], station().file_id);
        CHECK(cands[i] == w);
    }
    CHECK(q.size() == 0);

    SynthProfile other = p;
    other.seed = 99;
    CHECK(gen_weather_day(other, pws(10), day).body != gen_weather_day(p, pws(10), day).body);
}

TEST_CASE("profile keys and invariants")
{
    SynthProfile p;
    p.set("peak_multiplier", "2");
    CHECK(p.peak_multiplier == 2);
    p.set("peak_windows", "06:30-09:00,17:00-20:15");
    REQUIRE(p.peak_windows.size() == 2);
    CHECK(p.peak_windows[0] == PeakWindow{390, 540});
    CHECK(p.peak_windows[1] == PeakWindow{1020, 1215});
    p.set("pollution_baseline", "1,2,3,4,5,6");
    CHECK(p.pollution_baseline == std::array<int, 6>{1, 2, 3, 4, 5, 6});
    p.set("seed", "7");
    CHECK(p.seed == 7);

    CHECK_THROWS_AS(p.set("peak_multiplier", "0.5"), ConfigError);
    CHECK_THROWS_AS(p.set("outage_probability", "1.5"), ConfigError);
    CHECK_THROWS_AS(p.set("colour", "1"), ConfigError);
    CHECK_THROWS_AS(p.set("pollution_baseline", "1,2"), ConfigError);
    CHECK_THROWS_AS(p.set("peak_windows", "9-7"), ConfigError);
}
