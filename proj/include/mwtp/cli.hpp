#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mwtp/config.hpp"
#include "mwtp/scheduler.hpp"
#include "mwtp/storage.hpp"

namespace mwtp {

/// Environment variable that overrides the configured store path.
inline constexpr const char* store_env_var = "MWTP_STORE";

/// Store path for `cfg`: $MWTP_STORE if set, otherwise the configured path
/// resolved against the config file's directory.
std::string resolve_store_path(const Config& cfg, const std::filesystem::path& config_path);

struct InitSummary {
    std::size_t weather_stations = 0;
    std::size_t routes = 0;
    std::size_t pollution_stations = 0;
    std::size_t lookups = 0;
};

/// Creates the schema, seeds lookups and loads the location catalogs.
/// Idempotent.
InitSummary init_store(Store& store, const Config& cfg);

/// Catalog with the ids assigned by the store. Throws ConfigError when a
/// configured station is missing from the store (init not run).
Catalog load_catalog(const Store& store, const Config& cfg);

/// One collection day per entry, starting at `start`.
std::vector<RunSummary> run_days(Store& store, const Config& cfg, Source& source, Date start, int days,
                                 QuarantineSink& quarantine, const RunOptions& options = {});

/// A date-only `from` starts at 00:00:00 and a date-only `to` ends at
/// 23:59:59. Missing ends are unbounded.
TimeRange parse_time_range(const std::optional<std::string>& from, const std::optional<std::string>& to);

/// Attribute names are matched case-insensitively. An empty location list
/// selects every location of the table.
QueryResult run_query(const Store& store, RecordTable table, const std::vector<std::string>& attributes,
                      const std::vector<LocationId>& locations, const TimeRange& range);

/// One line per attribute: table, attribute, non-empty count, monthly average.
std::string format_report(const NonEmptySummary& summary);

// ---------------------------------------------------------------------------
// Commands; each returns the process exit status.
// ---------------------------------------------------------------------------

struct RunArgs {
    int days = 1;
    bool wall_clock = false;
    std::optional<Date> start;
    std::optional<std::filesystem::path> fixtures;
    bool sequential = false;
};

struct QueryArgs {
    std::string table;
    std::vector<std::string> attributes;
    std::vector<LocationId> locations;
    std::optional<std::string> from;
    std::optional<std::string> to;
    std::optional<std::filesystem::path> csv;
};

struct ExportArgs {
    std::string table;
    std::optional<std::string> from;
    std::optional<std::string> to;
    std::optional<std::filesystem::path> out;
};

int cmd_init(const std::filesystem::path& config, std::ostream& out, std::ostream& err);
int cmd_run(const std::filesystem::path& config, const RunArgs& args, std::ostream& out, std::ostream& err);
int cmd_query(const std::filesystem::path& config, const QueryArgs& args, std::ostream& out, std::ostream& err);
int cmd_report(const std::filesystem::path& config, std::ostream& out, std::ostream& err);
int cmd_export(const std::filesystem::path& config, const ExportArgs& args, std::ostream& out, std::ostream& err);

/// Parses argv (argv[0] is the program name) and dispatches.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace mwtp
