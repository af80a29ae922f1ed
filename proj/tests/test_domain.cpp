#include <doctest.h>

#include <set>

#include "mwtp/domain.hpp"
#include "mwtp/errors.hpp"

using namespace mwtp;

namespace {

std::vector<NamedPoint> grid_points(int n)
{
    std::vector<NamedPoint> pts;
    for (int i = 0; i < n; ++i)
        pts.push_back({"P" + std::to_string(10 + i), 25.5 + 0.01 * i, -100.3 - 0.02 * i, "point " + std::to_string(i)});
    return pts;
}

int rank(ImecaCategory c)
{
    return static_cast<int>(c);
}

} // namespace

TEST_CASE("IMECA band edges")
{
    CHECK(classify_imeca(0) == ImecaCategory::good);
    CHECK(classify_imeca(50) == ImecaCategory::good);
    CHECK(classify_imeca(51) == ImecaCategory::regular);
    CHECK(classify_imeca(100) == ImecaCategory::regular);
    CHECK(classify_imeca(101) == ImecaCategory::bad);
    CHECK(classify_imeca(150) == ImecaCategory::bad);
    CHECK(classify_imeca(151) == ImecaCategory::very_bad);
    CHECK(classify_imeca(200) == ImecaCategory::very_bad);
    CHECK(classify_imeca(201) == ImecaCategory::extremely_bad);
    CHECK(classify_imeca(500) == ImecaCategory::extremely_bad);
    CHECK(imeca_label(ImecaCategory::very_bad) == "VERY_BAD");

    CHECK_THROWS_AS(classify_imeca(-1), OutOfScaleError);
    CHECK_THROWS_AS(classify_imeca(501), OutOfScaleError);
}

TEST_CASE("IMECA classification is monotone over the whole scale")
{
    int prev = -1;
    for (int v = imeca_min; v <= imeca_max; ++v) {
        int r = rank(classify_imeca(v));
        CHECK(r >= prev);
        prev = r;
    }
}

TEST_CASE("compass point sectors")
{
    CHECK(compass_point(0) == "N");
    CHECK(compass_point(360) == "N");
    CHECK(compass_point(11.24) == "N");
    CHECK(compass_point(11.25) == "NNE");
    CHECK(compass_point(348.75) == "N");
    CHECK(compass_point(348.74) == "NNW");
    CHECK(compass_point(90) == "E");
    CHECK(compass_point(180) == "S");
    CHECK(compass_point(270) == "W");
    CHECK_THROWS_AS(compass_point(-0.5), ValidationError);
    CHECK_THROWS_AS(compass_point(365), ValidationError);

    for (const auto& p : compass_rose)
        CHECK(is_compass_code(p.code));
    CHECK_FALSE(is_compass_code("n"));
    CHECK_FALSE(is_compass_code("NNNE"));
}

TEST_CASE("compass_point is total on [0, 360] and lands on the nearest sector")
{
    for (int tenth = 0; tenth <= 3600; ++tenth) {
        double deg = tenth / 10.0;
        auto code = compass_point(deg);
        REQUIRE(is_compass_code(code));
        // nearest sector centre, ties going clockwise
        int expected = static_cast<int>((deg + 11.25) / 22.5) % 16;
        CHECK(code == compass_rose[static_cast<std::size_t>(expected)].code);
    }
}

TEST_CASE("seven points give 42 routes")
{
    auto routes = enumerate_routes(grid_points(7));
    CHECK(routes.size() == 42);
    std::set<std::string> ids;
    for (const auto& r : routes)
        ids.insert(r.file_id);
    CHECK(ids.size() == 42);
}

TEST_CASE("route enumeration matches a brute-force pair oracle")
{
    for (int n = 2; n <= 10; ++n) {
        auto pts = grid_points(n);
        std::set<std::pair<std::string, std::string>> oracle;
        for (const auto& a : pts)
            for (const auto& b : pts)
                if (a.name != b.name)
                    oracle.emplace(a.name, b.name);

        auto routes = enumerate_routes(pts);
        CHECK(routes.size() == static_cast<std::size_t>(n * (n - 1)));
        std::set<std::pair<std::string, std::string>> seen;
        for (std::size_t i = 0; i < routes.size(); ++i) {
            const auto& r = routes[i];
            CHECK(r.id == static_cast<LocationId>(i + 1));
            CHECK_FALSE((r.start_lat == r.end_lat && r.start_lon == r.end_lon));
            auto dash = r.file_id.find('-');
            seen.emplace(r.file_id.substr(0, dash), r.file_id.substr(dash + 1));
            r.check();
        }
        CHECK(seen == oracle);
    }
}

TEST_CASE("route enumeration rejects degenerate point sets")
{
    CHECK_THROWS_AS(enumerate_routes(grid_points(1)), ConfigError);
    auto dup = grid_points(3);
    dup[2].name = dup[0].name;
    CHECK_THROWS_AS(enumerate_routes(dup), ConfigError);
    auto same = grid_points(3);
    same[1].lat = same[0].lat;
    same[1].lon = same[0].lon;
    CHECK_THROWS_AS(enumerate_routes(same), ConfigError);
}

TEST_CASE("route ordering: start name, then end name")
{
    std::vector<NamedPoint> pts{{"Centro", 25.67, -100.31, "Downtown"}, {"Aeropuerto", 25.78, -100.11, "Airport"}};
    auto routes = enumerate_routes(pts);
    REQUIRE(routes.size() == 2);
    CHECK(routes[0].file_id == "Aeropuerto-Centro");
    CHECK(routes[0].description_from == "Airport");
    CHECK(routes[0].description_to == "Downtown");
    CHECK(routes[1].file_id == "Centro-Aeropuerto");
}

TEST_CASE("location invariants")
{
    WeatherStation ws;
    ws.file_id = "X";
    ws.lat = 25;
    ws.lon = -100;
    CHECK_THROWS_AS(ws.check(), ConfigError); // neither id
    ws.station_id = "IX";
    ws.check();
    ws.airport_code = "MMMY";
    CHECK_THROWS_AS(ws.check(), ConfigError); // both
    ws.airport_code.reset();
    ws.lat = 91;
    CHECK_THROWS_AS(ws.check(), ConfigError);
    ws.lat = -90;
    ws.lon = 180.5;
    CHECK_THROWS_AS(ws.check(), ConfigError);

    PollutionStation ps{0, "OBISPADO", 25.6, -100.3, ""};
    ps.check();
    ps.lon = -181;
    CHECK_THROWS_AS(ps.check(), ConfigError);

    TrafficRoute r{0, "A-B", 25, -100, 25, -100, "", ""};
    CHECK_THROWS_AS(r.check(), ConfigError);
}
