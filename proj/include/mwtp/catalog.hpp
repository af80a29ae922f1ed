#pragma once

#include <string>
#include <vector>

#include "mwtp/connectors.hpp"
#include "mwtp/model.hpp"

namespace mwtp {

/// A weather station plus the collection facts that are not stored with it.
struct WeatherSite {
    WeatherStation station;
    /// Minutes between observations.
    int interval_min = 5;
    std::string time_zone = "CST";

    bool operator==(const WeatherSite&) const = default;
};

/// Everything a collection day needs to know about locations.
struct Catalog {
    std::vector<WeatherSite> weather;
    std::vector<TrafficRoute> routes;
    std::vector<PollutionStation> pollution;

    LocationIndex index() const;
};

} // namespace mwtp
