#include <doctest.h>

#include <set>

#include "mwtp/connectors.hpp"
#include "mwtp/errors.hpp"
#include "mwtp/text.hpp"
#include "support.hpp"

using namespace mwtp;
using testing::fixture_dir;
using testing::manifest;
using testing::read_file;

namespace {

SourcePayload load(SourceKind kind, const std::filesystem::path& rel)
{
    auto p = fixture_dir() / rel;
    return {kind, LocalDateTime::at({2017, 3, 14}, 0, 30), read_file(p), p.string()};
}

LocationIndex fixture_index()
{
    static const LocationIndex index = [] {
        testing::Loaded l(testing::fixture_config());
        return l.catalog.index();
    }();
    return index;
}

PollutionStation station_named(const std::string& id)
{
    for (const auto& s : testing::fixture_config().pollution)
        if (s.file_id == id)
            return s;
    FAIL("no station " << id);
    return {};
}

template <class Fn>
void expect_parse_error_at(Fn&& fn, std::size_t line)
{
    try {
        fn();
        FAIL("no error raised");
    } catch (const ParseError& e) {
        CHECK(e.line() == line);
        CHECK(e.column() >= 1);
    }
}

} // namespace

TEST_CASE("weather fixture: three personal-station rows")
{
    const auto& m = manifest()["weather"]["IMONTERR2"];
    QuarantineSink q;
    auto rows = parse_weather_observations(load(SourceKind::weather, "weather/2017-03-13/IMONTERR2.txt"),
                                           fixture_index(), q);
    CHECK(q.size() == 0);
    REQUIRE(rows.size() == m["rows"].get<std::size_t>());
    for (const auto& r : rows) {
        CHECK(r.station == "IMONTERR2");
        CHECK_FALSE(r.airport);
        REQUIRE(r.location);
        for (const auto& k : m["present_every_row"])
            CHECK(r.fields.count(k.get<std::string>()) == 1);
        for (const auto& k : m["absent_every_row"])
            CHECK(r.fields.count(k.get<std::string>()) == 0);
    }
    for (const auto& [k, v] : m["first"].items())
        CHECK(rows[0].fields.at(k) == v.get<std::string>());
    CHECK(rows[0].provenance.line == 2); // after the comment line
    CHECK(*rows[0].timestamp == LocalDateTime::at({2017, 3, 13}, 6));
}

TEST_CASE("weather fixture: airport-only fields at an airport")
{
    const auto& m = manifest()["weather"]["MMMY"];
    QuarantineSink q;
    auto rows = parse_weather_observations(load(SourceKind::weather, "weather/2017-03-13/MMMY.txt"), fixture_index(), q);
    REQUIRE(rows.size() == m["rows"].get<std::size_t>());
    CHECK(rows[0].airport);
    for (const auto& [k, v] : m["first"].items())
        CHECK(rows[0].fields.at(k) == v.get<std::string>());
}

TEST_CASE("weather parsing edge cases")
{
    QuarantineSink q;
    auto idx = fixture_index();
    SourcePayload p{SourceKind::weather, {}, "", "inline"};
    CHECK(parse_weather_observations(p, idx, q).empty());

    p.body = "NOPE 2017-03-13T06:00:00 temp=1\nIMONTERR2 2017-03-13T06:00:00 temp=1\n";
    auto rows = parse_weather_observations(p, idx, q);
    CHECK(rows.size() == 1);
    REQUIRE(q.size() == 1);
    CHECK(q.items()[0].line == 1);

    p.body = "IMONTERR2 2017-03-13T06:00:00 metar=\"X 1\"\n";
    rows = parse_weather_observations(p, idx, q);
    CHECK(rows.empty());
    CHECK(q.size() == 2); // airport field at a personal station

    p.body = "IMONTERR2 2017-03-13T06:00:00 temp=1 temp=2\n";
    expect_parse_error_at([&] { parse_weather_observations(p, idx, q); }, 1);
    p.body = "IMONTERR2 2017-03-13T06:00:00 colour=red\n";
    expect_parse_error_at([&] { parse_weather_observations(p, idx, q); }, 1);
    p.body = "\nIMONTERR2 2017-03-13T06:00:00 temp\n";
    expect_parse_error_at([&] { parse_weather_observations(p, idx, q); }, 2);

    SourcePayload wrong{SourceKind::traffic, {}, "", "inline"};
    CHECK_THROWS_AS(parse_weather_observations(wrong, idx, q), PreconditionError);
}

TEST_CASE("traffic fixture registries")
{
    const auto& m = manifest()["traffic"];
    QuarantineSink q;
    auto all = parse_traffic_lines(load(SourceKind::traffic, "traffic/2017-03-14.txt"), fixture_index(), q);
    CHECK(all.size() == m["lines"].get<std::size_t>());
    CHECK(q.size() == 0);
    for (std::size_t i = 0; i < m["registries"].size(); ++i) {
        const auto& e = m["registries"][i];
        CHECK(all[i].route == e["route"].get<std::string>());
        CHECK(all[i].timestamp->iso() == e["timestamp"].get<std::string>());
        CHECK(text::parse_number(all[i].traveldist) == e["traveldist"].get<double>());
        CHECK(text::parse_number(all[i].traveltime_std) == e["traveltime_std"].get<double>());
        CHECK(text::parse_number(all[i].traveltime_curr) == e["traveltime_curr"].get<double>());
    }
}

TEST_CASE("single traffic response")
{
    TrafficRoute route{7, "Aeropuerto-Centro", 25.78, -100.11, 25.67, -100.31, "Airport", "Downtown"};
    SourcePayload p{SourceKind::traffic, LocalDateTime::at({2017, 3, 14}, 7), "", "inline"};
    p.body = "Aeropuerto-Centro 2017-03-14T07:00:00 35000 2100 3300\n";
    auto raw = parse_traffic_response(p, route);
    CHECK(raw.traveldist == "35000");
    CHECK(raw.traveltime_std == "2100");
    CHECK(raw.traveltime_curr == "3300");
    CHECK(raw.location == 7);

    p.body = "Aeropuerto-Centro 2017-03-14T07:00:00 35000 2100 2100\n";
    CHECK(parse_traffic_response(p, route).traveltime_curr == "2100");

    p.body = read_file(fixture_dir() / "malformed/traffic_missing_curr.txt");
    expect_parse_error_at([&] { parse_traffic_response(p, route); }, 1);
    p.body = "Aeropuerto-Centro 2017-03-14T07:00:00 35000 2100 2100 9\n";
    expect_parse_error_at([&] { parse_traffic_response(p, route); }, 1);
    p.body = "Centro-Aeropuerto 2017-03-14T07:00:00 35000 2100 2100\n";
    CHECK_THROWS_AS(parse_traffic_response(p, route), ParseError);
    p.body = "Aeropuerto-Centro 2017-03-14T07:00:00 1 2 3\nAeropuerto-Centro 2017-03-14T07:00:00 1 2 3\n";
    expect_parse_error_at([&] { parse_traffic_response(p, route); }, 2);
    p.body = "\n";
    CHECK_THROWS_AS(parse_traffic_response(p, route), ParseError);
}

TEST_CASE("pollution fixture: full day has 22 hours per contaminant")
{
    const auto& m = manifest()["pollution"]["OBISPADO"];
    QuarantineSink q;
    auto cells = parse_pollution_tables(load(SourceKind::pollution, "pollution/2017-03-14/OBISPADO.txt"),
                                        fixture_index(), q);
    std::map<Contaminant, int> per;
    for (const auto& c : cells) {
        ++per[c.contaminant];
        CHECK(c.timestamp.hour >= m["first_hour"].get<int>());
        CHECK(c.timestamp.hour <= m["last_hour"].get<int>());
        bool is_dash = contaminant_tag(c.contaminant) == m["dash"]["contaminant"].get<std::string>() &&
                       c.timestamp.hour == m["dash"]["hour"].get<int>();
        CHECK(c.value.has_value() == !is_dash);
    }
    for (auto c : all_contaminants)
        CHECK(per[c] == m["hours_per_contaminant"].get<int>());
}

TEST_CASE("pollution fixture requested at 10:00 keeps 02:00 through 10:00")
{
    testing::Loaded l(testing::fixture_config());
    FixtureSource src(fixture_dir());
    auto station = l.catalog.pollution[0];
    REQUIRE(station.file_id == "OBISPADO");
    auto payload = src.fetch_pollution(station, {2017, 3, 14}, 10);
    QuarantineSink q;
    auto cells = parse_pollution_tables(payload, l.catalog.index(), q);
    std::map<Contaminant, std::set<int>> hours;
    for (const auto& c : cells)
        hours[c.contaminant].insert(c.timestamp.hour);
    auto expected = manifest()["pollution"]["OBISPADO"]["readings_at_request_10"].get<std::size_t>();
    for (auto c : all_contaminants) {
        CHECK(hours[c].size() == expected);
        CHECK(*hours[c].begin() == 2);
        CHECK(*hours[c].rbegin() == 10);
    }
}

TEST_CASE("malformed fixtures fail at the recorded line")
{
    QuarantineSink q;
    auto idx = fixture_index();
    for (const auto& [file, e] : manifest()["malformed"].items()) {
        CAPTURE(file);
        auto kind_name = e["kind"].get<std::string>();
        auto kind = kind_name == "weather"   ? SourceKind::weather
                    : kind_name == "traffic" ? SourceKind::traffic
                                             : SourceKind::pollution;
        auto payload = load(kind, "malformed/" + file);
        auto line = e["line"].get<std::size_t>();
        bool conflict = e["error"].get<std::string>() == "conflict";
        try {
            switch (kind) {
            case SourceKind::weather:
                parse_weather_observations(payload, idx, q);
                break;
            case SourceKind::traffic:
                parse_traffic_lines(payload, idx, q);
                break;
            case SourceKind::pollution:
                parse_pollution_tables(payload, idx, q);
                break;
            }
            FAIL("no error raised");
        } catch (const ConflictError& err) {
            CHECK(conflict);
            CHECK(err.line() == line);
        } catch (const ParseError& err) {
            CHECK_FALSE(conflict);
            CHECK(err.line() == line);
        }
    }
}

TEST_CASE("pollution cells: dash, blank, unknown station")
{
    QuarantineSink q;
    auto idx = fixture_index();
    SourcePayload p{SourceKind::pollution, {}, "", "inline"};
    p.body = "station=OBISPADO contaminant=CO date=2017-03-14\n02:00 -\n03:00\n04:00 \xE2\x80\x94\n05:00 7\n";
    auto cells = parse_pollution_tables(p, idx, q);
    REQUIRE(cells.size() == 4);
    CHECK_FALSE(cells[0].value);
    CHECK_FALSE(cells[1].value);
    CHECK_FALSE(cells[2].value);
    CHECK(cells[3].value == "7");

    p.body = "station=NOWHERE contaminant=CO date=2017-03-14\n02:00 1\n";
    CHECK(parse_pollution_tables(p, idx, q).empty());
    CHECK(q.size() == 1);

    p.body = "02:00 1\n";
    expect_parse_error_at([&] { parse_pollution_tables(p, idx, q); }, 1);
    p.body = "station=OBISPADO contaminant=CO date=2017-03-14\n02:30 1\n";
    expect_parse_error_at([&] { parse_pollution_tables(p, idx, q); }, 2);
    p.body = "station=OBISPADO contaminant=CO date=2017-03-14\n00:00 1\n";
    expect_parse_error_at([&] { parse_pollution_tables(p, idx, q); }, 2);
}

TEST_CASE("assembling a station day")
{
    const auto& m = manifest()["pollution"]["SANNICOLAS"];
    auto station = station_named("SANNICOLAS");
    QuarantineSink q;
    auto cells = parse_pollution_tables(load(SourceKind::pollution, "pollution/2017-03-14/SANNICOLAS.txt"),
                                        fixture_index(), q);
    auto cands = assemble_station_day(cells, station, {2017, 3, 14});
    REQUIRE(cands.size() == m["candidates"].get<std::size_t>());
    int o3_na = 0;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        CHECK(cands[i].timestamp.hour == static_cast<int>(i) + 2);
        CHECK(cands[i].reading(Contaminant::pm10));
        o3_na += !cands[i].reading(Contaminant::o3);
        CHECK_FALSE(cands[i].reading(Contaminant::co));
    }
    CHECK(o3_na == m["O3_na"].get<int>());

    CHECK(assemble_station_day({}, station, {2017, 3, 14}).empty());

    RawPollutionCell one;
    one.station = "SANNICOLAS";
    one.contaminant = Contaminant::so2;
    one.timestamp = LocalDateTime::at({2017, 3, 14}, 9);
    one.value = "12";
    auto single = assemble_station_day(std::span(&one, 1), station, {2017, 3, 14});
    REQUIRE(single.size() == 1);
    int na = 0;
    for (auto c : all_contaminants)
        na += !single[0].reading(c);
    CHECK(na == 5);

    auto other_day = one;
    other_day.timestamp.date = {2017, 3, 15};
    CHECK_THROWS_AS(assemble_station_day(std::span(&other_day, 1), station, {2017, 3, 14}), PreconditionError);
    auto other_station = one;
    other_station.station = "OBISPADO";
    CHECK_THROWS_AS(assemble_station_day(std::span(&other_station, 1), station, {2017, 3, 14}), PreconditionError);
}

TEST_CASE("parsing never fabricates values")
{
    // every value the parsers hand out appears verbatim on its source line
    auto idx = fixture_index();
    QuarantineSink q;
    for (auto file : {"weather/2017-03-13/IMONTERR2.txt", "weather/2017-03-13/ISANNICO2.txt",
                      "weather/2017-03-13/MMMY.txt"}) {
        auto payload = load(SourceKind::weather, file);
        auto lines = text::lines(payload.body);
        for (const auto& r : parse_weather_observations(payload, idx, q)) {
            auto line = std::string(lines[r.provenance.line - 1]);
            for (const auto& [k, v] : r.fields)
                CHECK(line.find(v) != std::string::npos);
        }
    }
    auto tp = load(SourceKind::traffic, "traffic/2017-03-14.txt");
    auto tlines = text::lines(tp.body);
    for (const auto& r : parse_traffic_lines(tp, idx, q)) {
        auto line = std::string(tlines[r.provenance.line - 1]);
        for (const auto* v : {&r.traveldist, &r.traveltime_std, &r.traveltime_curr})
            CHECK(line.find(*v) != std::string::npos);
    }
    for (auto file : {"pollution/2017-03-14/OBISPADO.txt", "pollution/2017-03-14/SANNICOLAS.txt"}) {
        auto pp = load(SourceKind::pollution, file);
        auto plines = text::lines(pp.body);
        for (const auto& c : parse_pollution_tables(pp, idx, q)) {
            CHECK(c.timestamp.hour >= 2);
            if (c.value)
                CHECK(std::string(plines[c.provenance.line - 1]).find(*c.value) != std::string::npos);
        }
    }
}

TEST_CASE("writers invert the parsers")
{
    auto idx = fixture_index();
    QuarantineSink q;

    WeatherRecord w;
    w.timestamp = LocalDateTime::at({2017, 3, 13}, 6, 40);
    w.temp = 13.5;
    w.hum = 88;
    w.wdire = "NE";
    w.cond = "Partly Cloudy";
    w.fog = true;
    w.rain = false;
    w.metar = "MMMY 131240Z \"quoted\" \\ end";
    auto line = format_weather_line("MMMY", w);
    SourcePayload p{SourceKind::weather, {}, line + "\n", "inline"};
    auto rows = parse_weather_observations(p, idx, q);
    REQUIRE(rows.size() == 1);
    auto expected = to_raw(w, "MMMY", true);
    expected.location = rows[0].location;
    expected.provenance = rows[0].provenance;
    CHECK(rows[0] == expected);

    TrafficRecord t{LocalDateTime::at({2017, 3, 14}, 7), 35000, 2100, 3300, 0};
    SourcePayload tp{SourceKind::traffic, {}, format_traffic_line("Centro-Aeropuerto", t), "inline"};
    auto traw = parse_traffic_lines(tp, idx, q);
    REQUIRE(traw.size() == 1);
    auto texp = to_raw(t, "Centro-Aeropuerto");
    texp.location = traw[0].location;
    texp.provenance = traw[0].provenance;
    CHECK(traw[0] == texp);
}
