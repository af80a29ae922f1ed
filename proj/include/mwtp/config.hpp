#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mwtp/catalog.hpp"
#include "mwtp/domain.hpp"
#include "mwtp/scheduler.hpp"
#include "mwtp/synth.hpp"
#include "mwtp/time.hpp"
#include "mwtp/validation.hpp"

namespace mwtp {

struct LookupSeed {
    std::string code;
    std::string description;

    bool operator==(const LookupSeed&) const = default;
};

/// Collector configuration. The file format is described in docs/formats.md.
struct Config {
    std::string store_path = "mwtp.db";

    std::vector<LookupSeed> time_zones;
    std::vector<LookupSeed> conds;
    std::vector<LookupSeed> icons;

    std::vector<WeatherSite> weather;
    std::vector<PollutionStation> pollution;
    std::vector<NamedPoint> points;

    /// default_cadence() unless the file has a [cadence] section.
    std::vector<CadenceWindow> cadence = default_cadence();
    /// Built-in defaults with the [rules] section laid over them.
    RuleSet rules = RuleSet::defaults();
    SynthProfile synth;

    Date start{2017, 1, 1};
    /// Fixture directory to collect from instead of the generator.
    std::optional<std::filesystem::path> fixtures;

    /// Throws ParseError with the offending line, or ConfigError for
    /// cross-line problems (duplicate file ids, overlapping windows, ...).
    static Config parse(std::string_view text, const std::filesystem::path& base_dir = {});
    static Config load(const std::filesystem::path& path);

    /// Sites, routes and pollution stations with ids left at 0.
    Catalog catalog() const;
};

} // namespace mwtp
