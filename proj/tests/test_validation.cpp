#include <doctest.h>

#include <random>

#include "mwtp/connectors.hpp"
#include "mwtp/domain.hpp"
#include "mwtp/errors.hpp"
#include "mwtp/text.hpp"
#include "mwtp/validation.hpp"

using namespace mwtp;

namespace {

RawWeather pws_raw(std::map<std::string, std::string, std::less<>> fields)
{
    RawWeather r;
    r.station = "IMONTERR2";
    r.timestamp = LocalDateTime::at({2017, 3, 13}, 10);
    r.location = 1;
    r.fields = std::move(fields);
    return r;
}

RawTraffic traffic_raw(std::string d, std::string s, std::string c)
{
    RawTraffic r;
    r.route = "A-B";
    r.timestamp = LocalDateTime::at({2017, 3, 14}, 7);
    r.location = 3;
    r.traveldist = std::move(d);
    r.traveltime_std = std::move(s);
    r.traveltime_curr = std::move(c);
    return r;
}

PollutionCandidate pollution_raw(int hour)
{
    PollutionCandidate c;
    c.station = "OBISPADO";
    c.location = 2;
    c.timestamp = LocalDateTime::at({2017, 3, 14}, hour);
    return c;
}

// --- random candidates --------------------------------------------------------

struct Fuzz {
    std::mt19937_64 rng;

    explicit Fuzz(std::uint64_t seed) : rng(seed) {}

    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }
    bool coin(double p = 0.5) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; }
    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

    std::string number_text(double lo, double hi)
    {
        switch (pick(6)) {
        case 0:
            return text::format_number(real(lo - (hi - lo), lo)); // below
        case 1:
            return text::format_number(real(hi, hi + (hi - lo) + 1)); // above
        case 2:
            return std::vector<std::string>{"abc", "12x", "", "nan", "--1", "1e999"}[pick(6)];
        default:
            return text::format_number(real(lo, hi));
        }
    }

    RawWeather weather(const RuleSet& rules)
    {
        RawWeather r;
        r.station = "S";
        r.airport = coin();
        if (!coin(0.02))
            r.timestamp = LocalDateTime::at({2017, 1 + pick(12), 1 + pick(28)}, pick(24), pick(60));
        if (!coin(0.02))
            r.location = 1 + pick(32);
        for (const auto& a : weather_numbers) {
            if (coin(0.3))
                continue;
            const auto* rule = rules.find("weathers", a.name);
            r.fields.emplace(a.name, number_text(*rule->min, *rule->max));
        }
        for (const auto& a : weather_codes) {
            if (coin(0.3))
                continue;
            if (a.catalog == LookupCatalog::wdires)
                r.fields.emplace(a.name, coin(0.8) ? std::string(compass_rose[pick(16)].code) : "NORTH");
            else
                r.fields.emplace(a.name, coin(0.9) ? "Clear" : "");
        }
        for (const auto& f : weather_flags)
            if (coin(0.5))
                r.fields.emplace(f.name, std::vector<std::string>{"0", "1", "2", "yes", "1.0"}[pick(5)]);
        if (coin(0.5))
            r.fields.emplace("metar", "MMMY 131240Z 09004KT");
        return r;
    }

    RawTraffic traffic()
    {
        auto r = traffic_raw(number_text(1, 200000), number_text(1, 86400), number_text(1, 86400));
        if (coin(0.02))
            r.location.reset();
        return r;
    }

    PollutionCandidate pollution()
    {
        auto c = pollution_raw(pick(24));
        if (coin(0.02))
            c.location.reset();
        for (auto k : all_contaminants) {
            if (coin(0.2))
                continue;
            if (coin(0.1))
                c.reading(k) = text::format_number(real(0, 500)); // fractional
            else
                c.reading(k) = number_text(0, 500);
            if (coin(0.7) && c.reading(k) && text::parse_number(*c.reading(k)))
                c.reading(k) = std::to_string(static_cast<int>(std::floor(*text::parse_number(*c.reading(k)))));
        }
        return c;
    }
};

std::size_t raw_na(const RawWeather& r)
{
    return weather_attribute_count - r.fields.size();
}

std::size_t raw_na(const PollutionCandidate& c)
{
    std::size_t n = 0;
    for (auto k : all_contaminants)
        n += !c.reading(k);
    return n;
}

bool weather_has(const WeatherRecord& r, std::string_view name)
{
    for (const auto& a : weather_numbers)
        if (a.name == name)
            return (r.*a.member).has_value();
    for (const auto& a : weather_codes)
        if (a.name == name)
            return (r.*a.member).has_value();
    for (const auto& a : weather_flags)
        if (a.name == name)
            return (r.*a.member).has_value();
    return r.metar.has_value();
}

std::vector<std::string_view> weather_names()
{
    std::vector<std::string_view> n;
    for (const auto& a : weather_numbers)
        n.push_back(a.name);
    for (const auto& a : weather_codes)
        n.push_back(a.name);
    for (const auto& a : weather_flags)
        n.push_back(a.name);
    n.push_back("metar");
    return n;
}

} // namespace

TEST_CASE("wind direction 365 becomes NA and is reported")
{
    auto v = validate_weather(pws_raw({{"temp", "21.5"}, {"wdird", "365"}, {"wdire", "N"}}), RuleSet::defaults());
    REQUIRE(v.accepted());
    CHECK_FALSE(v.record->wdird);
    CHECK(v.record->temp == 21.5);
    CHECK(v.record->wdire == "N");
    REQUIRE(v.report.violations.size() == 1);
    CHECK(v.report.violations[0] == Violation{"wdird", "365", "range 0..360"});
    CHECK(v.report.lists("wdird"));

    auto edge = validate_weather(pws_raw({{"wdird", "360"}}), RuleSet::defaults());
    CHECK(edge.record->wdird == 360);
}

TEST_CASE("negative humidity is nulled, temperature kept")
{
    auto v = validate_weather(pws_raw({{"temp", "25"}, {"hum", "-3"}}), RuleSet::defaults());
    REQUIRE(v.accepted());
    CHECK(v.record->temp == 25);
    CHECK_FALSE(v.record->hum);
    CHECK(v.report.violations.size() == 1);
    CHECK(v.report.lists("hum"));
}

TEST_CASE("weather: empty record kept, misplaced and malformed fields nulled")
{
    auto empty = validate_weather(pws_raw({}), RuleSet::defaults());
    REQUIRE(empty.accepted());
    CHECK(count_na(*empty.record) == weather_attribute_count);
    CHECK(empty.report.empty());

    auto v = validate_weather(pws_raw({{"vis", "3"}, {"fog", "1"}, {"metar", "X"}, {"pressure", "abc"},
                                       {"wdire", "NORTH"}}),
                              RuleSet::defaults());
    REQUIRE(v.accepted());
    CHECK(v.report.violations.size() == 5);
    CHECK(count_na(*v.record) == weather_attribute_count);

    auto airport = pws_raw({{"vis", "3"}, {"fog", "1"}, {"metar", "X"}});
    airport.airport = true;
    auto a = validate_weather(airport, RuleSet::defaults());
    CHECK(a.report.empty());
    CHECK(a.record->vis == 3);
    CHECK(a.record->fog == true);

    auto no_loc = pws_raw({});
    no_loc.location.reset();
    CHECK_FALSE(validate_weather(no_loc, RuleSet::defaults()).accepted());
    auto no_ts = pws_raw({});
    no_ts.timestamp.reset();
    CHECK_FALSE(validate_weather(no_ts, RuleSet::defaults()).accepted());
}

TEST_CASE("traffic registries are atomic")
{
    auto rules = RuleSet::defaults();
    auto ok = validate_traffic(traffic_raw("35000", "2100", "3300"), rules);
    REQUIRE(ok.accepted());
    CHECK(ok.record->traveldist == 35000);
    CHECK(ok.record->traveltime_std == 2100);
    CHECK(ok.record->traveltime_curr == 3300);

    CHECK_FALSE(validate_traffic(traffic_raw("0", "2100", "3300"), rules).accepted());
    auto neg = validate_traffic(traffic_raw("35000", "2100", "-10"), rules);
    CHECK_FALSE(neg.accepted());
    CHECK(neg.report.lists("traveltime_curr"));
    CHECK_FALSE(validate_traffic(traffic_raw("35000", "x", "3300"), rules).accepted());
    CHECK(validate_traffic(traffic_raw("35000", "2100", "2100"), rules).accepted());
}

TEST_CASE("pollution cells")
{
    auto rules = RuleSet::defaults();
    auto c = pollution_raw(9);
    c.reading(Contaminant::pm10) = "600";
    c.reading(Contaminant::o3) = "41";
    c.reading(Contaminant::co) = "12.5";
    auto v = validate_pollution(c, rules);
    REQUIRE(v.accepted());
    CHECK_FALSE(v.record->reading(Contaminant::pm10));
    CHECK(v.record->reading(Contaminant::o3) == 41);
    CHECK_FALSE(v.record->reading(Contaminant::co));
    CHECK(v.report.violations.size() == 2);

    auto all_na = validate_pollution(pollution_raw(5), rules);
    REQUIRE(all_na.accepted());
    CHECK(count_na(*all_na.record) == 6);

    CHECK_FALSE(validate_pollution(pollution_raw(1), rules).accepted());
    CHECK_FALSE(validate_pollution(pollution_raw(0), rules).accepted());
    auto off = pollution_raw(5);
    off.timestamp.minute = 30;
    CHECK_FALSE(validate_pollution(off, rules).accepted());
}

TEST_CASE("rule sets")
{
    auto r = RuleSet::parse("# comment\nweathers.temp -10 40\n\ntraffics.traveldist - 5000\n");
    REQUIRE(r.find("weathers", "temp"));
    CHECK(r.find("weathers", "temp")->min == -10);
    CHECK_FALSE(r.find("traffics", "traveldist")->min);
    CHECK(r.find("traffics", "traveldist")->max == 5000);
    CHECK(r.find("traffics", "traveldist")->str() == "traffics.traveldist - 5000");

    auto d = RuleSet::defaults();
    d.merge(r);
    CHECK(d.find("weathers", "temp")->max == 40);
    CHECK(d.find("weathers", "hum")->max == 100);

    CHECK_THROWS_AS(RuleSet::parse("weathers.temp 5 1"), ParseError);
    CHECK_THROWS_AS(RuleSet::parse("weatherstemp 5 10"), ParseError);
    CHECK_THROWS_AS(RuleSet::parse("weathers.temp 5"), ParseError);
    CHECK_THROWS_AS(RuleSet::parse("x.y 1 z"), ParseError);
    CHECK_THROWS_AS(d.set({"weathers", "temp", 3, 2}), ConfigError);

    auto v = validate_weather(pws_raw({{"temp", "45"}}), d);
    CHECK_FALSE(v.record->temp);
}

TEST_CASE("validation properties over random candidates")
{
    auto rules = RuleSet::defaults();
    Fuzz fz(20170314);
    const auto names = weather_names();

    for (int i = 0; i < 3000; ++i) {
        auto raw = fz.weather(rules);
        auto v = validate_weather(raw, rules);
        auto again = validate_weather(raw, rules);
        CHECK(again.record == v.record);
        if (!v.accepted())
            continue;
        for (auto name : names)
            if (weather_has(*v.record, name))
                CHECK(raw.fields.count(name) == 1);
        CHECK(count_na(*v.record) - raw_na(raw) == v.report.violations.size());

        auto second = validate_weather(to_raw(*v.record, raw.station, raw.airport), rules);
        REQUIRE(second.accepted());
        CHECK(*second.record == *v.record);
        CHECK(second.report.empty());
    }

    for (int i = 0; i < 3000; ++i) {
        auto raw = fz.traffic();
        auto v = validate_traffic(raw, rules);
        if (!v.accepted()) {
            CHECK_FALSE(v.rejection.empty());
            continue;
        }
        CHECK(v.report.empty());
        auto second = validate_traffic(to_raw(*v.record, raw.route), rules);
        REQUIRE(second.accepted());
        CHECK(*second.record == *v.record);
    }

    for (int i = 0; i < 3000; ++i) {
        auto raw = fz.pollution();
        auto v = validate_pollution(raw, rules);
        if (!v.accepted()) {
            CHECK((raw.timestamp.hour < 2 || !raw.location));
            continue;
        }
        CHECK(v.record->timestamp.hour >= 2);
        for (auto k : all_contaminants)
            if (v.record->reading(k))
                CHECK(raw.reading(k).has_value());
        CHECK(count_na(*v.record) - raw_na(raw) == v.report.violations.size());
        auto second = validate_pollution(to_raw(*v.record, raw.station), rules);
        REQUIRE(second.accepted());
        CHECK(*second.record == *v.record);
        CHECK(second.report.empty());
    }
}
