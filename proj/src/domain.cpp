#include "mwtp/domain.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <utility>

#include "mwtp/errors.hpp"

namespace mwtp {

ImecaCategory classify_imeca(int value)
{
    if (value < imeca_min || value > imeca_max)
        throw OutOfScaleError("IMECA value " + std::to_string(value) + " outside 0..500");
    for (const auto& band : imeca_bands)
        if (value <= band.high)
            return band.category;
    return ImecaCategory::extremely_bad; // unreachable
}

std::string_view imeca_label(ImecaCategory c)
{
    return imeca_bands[static_cast<std::size_t>(c)].label;
}

std::string_view compass_point(double degrees)
{
    if (!(degrees >= 0.0 && degrees <= 360.0))
        throw ValidationError("wind direction " + std::to_string(degrees) + " outside 0..360");
    auto sector = static_cast<std::size_t>(std::floor((degrees + 11.25) / 22.5)) % compass_rose.size();
    return compass_rose[sector].code;
}

bool is_compass_code(std::string_view code)
{
    return std::any_of(compass_rose.begin(), compass_rose.end(), [&](const auto& p) { return p.code == code; });
}

std::string route_file_id(std::string_view from, std::string_view to)
{
    std::string id;
    id.reserve(from.size() + to.size() + 1);
    id.append(from).append("-").append(to);
    return id;
}

std::vector<TrafficRoute> enumerate_routes(std::span<const NamedPoint> points)
{
    if (points.size() < 2)
        throw ConfigError("route enumeration needs at least two points");

    std::set<std::string> names;
    std::set<std::pair<double, double>> coords;
    for (const auto& p : points) {
        if (p.name.empty() || !std::all_of(p.name.begin(), p.name.end(), [](unsigned char c) {
                return std::isalnum(c) || c == '_';
            }))
            throw ConfigError("point name '" + p.name + "' must be non-empty and use only [A-Za-z0-9_]");
        if (!valid_latitude(p.lat) || !valid_longitude(p.lon))
            throw ConfigError("point '" + p.name + "': coordinates out of range");
        if (!names.insert(p.name).second)
            throw ConfigError("duplicate point name '" + p.name + "'");
        if (!coords.insert({p.lat, p.lon}).second)
            throw ConfigError("point '" + p.name + "' duplicates the coordinates of another point");
    }

    std::vector<const NamedPoint*> sorted;
    for (const auto& p : points)
        sorted.push_back(&p);
    std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->name < b->name; });

    std::vector<TrafficRoute> routes;
    routes.reserve(points.size() * (points.size() - 1));
    for (const auto* a : sorted) {
        for (const auto* b : sorted) {
            if (a == b)
                continue;
            TrafficRoute r;
            r.id = static_cast<LocationId>(routes.size() + 1);
            r.file_id = route_file_id(a->name, b->name);
            r.start_lat = a->lat;
            r.start_lon = a->lon;
            r.end_lat = b->lat;
            r.end_lon = b->lon;
            r.description_from = a->description.empty() ? a->name : a->description;
            r.description_to = b->description.empty() ? b->name : b->description;
            routes.push_back(std::move(r));
        }
    }
    return routes;
}

} // namespace mwtp
