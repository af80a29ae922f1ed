#include "mwtp/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "mwtp/domain.hpp"
#include "mwtp/errors.hpp"

namespace mwtp {

namespace {

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

LocalDateTime parse_bound(const std::string& text, bool end_of_day)
{
    if (text.size() == 10) {
        auto d = Date::parse(text);
        return end_of_day ? LocalDateTime::at(d, 23, 59, 59) : LocalDateTime::at(d, 0);
    }
    return LocalDateTime::parse(text);
}

RecordTable table_arg(const std::string& name)
{
    auto t = record_table_from_name(lower(name));
    if (!t)
        throw QueryError("unknown table '" + name + "' (expected weathers, traffics or pollutions)");
    return *t;
}

std::vector<LocationId> all_locations(const Store& store, RecordTable table)
{
    std::vector<LocationId> ids;
    switch (table) {
    case RecordTable::weathers:
        for (const auto& s : store.weather_stations())
            ids.push_back(s.id);
        break;
    case RecordTable::traffics:
        for (const auto& r : store.traffic_routes())
            ids.push_back(r.id);
        break;
    case RecordTable::pollutions:
        for (const auto& s : store.pollution_stations())
            ids.push_back(s.id);
        break;
    }
    return ids;
}

void write_file(const std::filesystem::path& path, const std::string& body)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path.string());
    out << body;
    if (!out)
        throw Error("write to " + path.string() + " failed");
}

struct Opened {
    Config cfg;
    std::unique_ptr<Store> store;
};

Opened open(const std::filesystem::path& config_path)
{
    Opened o{Config::load(config_path), nullptr};
    o.store = std::make_unique<Store>(resolve_store_path(o.cfg, config_path));
    return o;
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn)
{
    try {
        return fn();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace

std::string resolve_store_path(const Config& cfg, const std::filesystem::path& config_path)
{
    if (const char* env = std::getenv(store_env_var); env && *env)
        return env;
    if (cfg.store_path == ":memory:")
        return cfg.store_path;
    std::filesystem::path p(cfg.store_path);
    if (p.is_relative())
        p = config_path.parent_path() / p;
    return p.string();
}

InitSummary init_store(Store& store, const Config& cfg)
{
    // Route enumeration validates the points before anything is written.
    auto catalog = cfg.catalog();
    store.init_schema();
    InitSummary s;
    Store::Transaction tx(store);
    for (const auto& tz : cfg.time_zones)
        store.upsert_lookup(LookupCatalog::time_zones, tz.code, tz.description);
    for (const auto& c : compass_rose)
        store.upsert_lookup(LookupCatalog::wdires, c.code, c.description);
    for (const auto& c : cfg.conds)
        store.upsert_lookup(LookupCatalog::conds, c.code, c.description);
    for (const auto& i : cfg.icons)
        store.upsert_lookup(LookupCatalog::icons, i.code, i.description);
    s.lookups = cfg.time_zones.size() + compass_rose.size() + cfg.conds.size() + cfg.icons.size();
    for (const auto& w : catalog.weather)
        store.upsert_location(w.station);
    for (const auto& r : catalog.routes)
        store.upsert_location(r);
    for (const auto& p : catalog.pollution)
        store.upsert_location(p);
    tx.commit();
    s.weather_stations = catalog.weather.size();
    s.routes = catalog.routes.size();
    s.pollution_stations = catalog.pollution.size();
    return s;
}

Catalog load_catalog(const Store& store, const Config& cfg)
{
    Catalog c;
    std::map<std::string, WeatherStation, std::less<>> weather;
    for (auto& s : store.weather_stations())
        weather.emplace(s.file_id, s);
    for (const auto& site : cfg.weather) {
        auto it = weather.find(site.station.file_id);
        if (it == weather.end())
            throw ConfigError("weather station '" + site.station.file_id + "' is not in the store; run init");
        WeatherSite loaded = site;
        loaded.station = it->second;
        c.weather.push_back(std::move(loaded));
    }
    std::map<std::string, PollutionStation, std::less<>> pollution;
    for (auto& s : store.pollution_stations())
        pollution.emplace(s.file_id, s);
    for (const auto& st : cfg.pollution) {
        auto it = pollution.find(st.file_id);
        if (it == pollution.end())
            throw ConfigError("pollution station '" + st.file_id + "' is not in the store; run init");
        c.pollution.push_back(it->second);
    }
    std::map<std::string, TrafficRoute, std::less<>> routes;
    for (auto& r : store.traffic_routes())
        routes.emplace(r.file_id, r);
    for (const auto& r : cfg.catalog().routes) {
        auto it = routes.find(r.file_id);
        if (it == routes.end())
            throw ConfigError("route '" + r.file_id + "' is not in the store; run init");
        c.routes.push_back(it->second);
    }
    return c;
}

std::vector<RunSummary> run_days(Store& store, const Config& cfg, Source& source, Date start, int days,
                                 QuarantineSink& quarantine, const RunOptions& options)
{
    auto catalog = load_catalog(store, cfg);
    std::vector<RunSummary> out;
    for (int i = 0; i < days; ++i) {
        Date day = start.plus_days(i);
        auto plan = build_plan(cfg.cadence, catalog.routes, day);
        RunOptions opts = options;
        if (i > 0)
            opts.resume_at.reset();
        out.push_back(run_day(plan, source, store, catalog, cfg.rules, quarantine, opts));
        if (out.back().aborted)
            break;
    }
    return out;
}

TimeRange parse_time_range(const std::optional<std::string>& from, const std::optional<std::string>& to)
{
    TimeRange r{LocalDateTime::at(Date{1, 1, 1}, 0), LocalDateTime::at(Date{9999, 12, 31}, 23, 59, 59)};
    if (from)
        r.from = parse_bound(*from, false);
    if (to)
        r.to = parse_bound(*to, true);
    return r;
}

QueryResult run_query(const Store& store, RecordTable table, const std::vector<std::string>& attributes,
                      const std::vector<LocationId>& locations, const TimeRange& range)
{
    std::vector<std::string> attrs;
    for (const auto& a : attributes)
        attrs.push_back(lower(a));
    if (attrs.empty())
        attrs = record_attributes(table);
    auto locs = locations.empty() ? all_locations(store, table) : locations;
    return store.query_attribute(table, attrs, locs, range);
}

std::string format_report(const NonEmptySummary& summary)
{
    std::ostringstream out;
    out << std::left << std::setw(12) << "table" << std::setw(18) << "attribute" << std::right << std::setw(12)
        << "non_empty" << std::setw(16) << "monthly_avg" << "\n";
    for (const auto& a : summary.attributes) {
        out << std::left << std::setw(12) << table_name(a.table) << std::setw(18) << a.attribute << std::right
            << std::setw(12) << a.non_empty << std::setw(16) << std::fixed << std::setprecision(1)
            << a.monthly_average << "\n";
    }
    out << "months:";
    for (auto t : all_record_tables) {
        auto it = summary.months.find(t);
        out << " " << table_name(t) << "=" << (it == summary.months.end() ? 0 : it->second);
    }
    out << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_init(const std::filesystem::path& config, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        auto o = open(config);
        auto s = init_store(*o.store, o.cfg);
        out << "initialized " << resolve_store_path(o.cfg, config) << ": " << s.weather_stations
            << " weather stations, " << s.routes << " routes, " << s.pollution_stations << " pollution stations, "
            << s.lookups << " lookup codes\n";
        return 0;
    });
}

int cmd_run(const std::filesystem::path& config, const RunArgs& args, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        if (args.days < 0)
            throw ConfigError("--days must be >= 0");
        auto o = open(config);
        auto fixtures = args.fixtures ? args.fixtures : o.cfg.fixtures;
        std::unique_ptr<Source> source;
        if (fixtures)
            source = std::make_unique<FixtureSource>(*fixtures);
        else
            source = std::make_unique<SynthSource>(o.cfg.synth);

        WallClock wall;
        RunOptions opts;
        opts.concurrent = !args.sequential;
        Date start = args.start.value_or(o.cfg.start);
        std::unique_ptr<SimulatedClock> sim;
        if (args.wall_clock) {
            opts.clock = &wall;
            auto now = wall.now();
            if (!args.start)
                start = now.date;
            opts.resume_at = now;
        }
        QuarantineSink quarantine;
        int status = 0;
        if (args.wall_clock) {
            auto summaries = run_days(*o.store, o.cfg, *source, start, args.days, quarantine, opts);
            for (const auto& s : summaries) {
                out << s.str();
                if (s.aborted)
                    status = 1;
            }
        } else {
            // A fresh simulated clock per day, starting at that day's midnight.
            for (int i = 0; i < args.days; ++i) {
                Date day = start.plus_days(i);
                sim = std::make_unique<SimulatedClock>(LocalDateTime::at(day, 0));
                opts.clock = sim.get();
                auto s = run_days(*o.store, o.cfg, *source, day, 1, quarantine, opts);
                out << s.front().str();
                if (s.front().aborted) {
                    status = 1;
                    break;
                }
            }
        }
        if (quarantine.size() > 0)
            out << "quarantined items: " << quarantine.size() << "\n";
        return status;
    });
}

int cmd_query(const std::filesystem::path& config, const QueryArgs& args, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        auto o = open(config);
        auto result = run_query(*o.store, table_arg(args.table), args.attributes, args.locations,
                                parse_time_range(args.from, args.to));
        auto csv = export_csv(result);
        if (args.csv) {
            write_file(*args.csv, csv);
            out << result.rows.size() << " rows written to " << args.csv->string() << "\n";
        } else {
            out << csv;
        }
        return 0;
    });
}

int cmd_report(const std::filesystem::path& config, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        auto o = open(config);
        o.store->init_schema();
        out << format_report(o.store->summarize_nonempty());
        auto integrity = o.store->check_integrity();
        if (!integrity.clean()) {
            for (const auto& d : integrity.dangling)
                out << "dangling: " << d << "\n";
            return 1;
        }
        return 0;
    });
}

int cmd_export(const std::filesystem::path& config, const ExportArgs& args, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        auto o = open(config);
        auto table = table_arg(args.table);
        auto result = run_query(*o.store, table, {}, {}, parse_time_range(args.from, args.to));
        auto csv = export_csv(result);
        if (args.out) {
            write_file(*args.out, csv);
            out << result.rows.size() << " rows written to " << args.out->string() << "\n";
        } else {
            out << csv;
        }
        return 0;
    });
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Weather, traffic and air-pollution collector for the Monterrey metropolitan area"};
    app.require_subcommand(1);
    std::string config = "config/mwtp.conf";
    app.add_option("-c,--config", config, "Config file")->capture_default_str();

    auto* init = app.add_subcommand("init", "Create the schema and load location catalogs");

    RunArgs run_args;
    std::string clock = "simulated";
    std::string start;
    std::string fixtures;
    auto* run = app.add_subcommand("run", "Run collection days");
    run->add_option("-d,--days", run_args.days, "Number of days")->capture_default_str();
    run->add_option("--clock", clock, "simulated or wall")
        ->check(CLI::IsMember({"simulated", "wall"}))
        ->capture_default_str();
    run->add_option("--start", start, "First day (YYYY-MM-DD); defaults to [run] start");
    run->add_option("--fixtures", fixtures, "Collect from a fixture directory instead of the generator");
    run->add_flag("--sequential", run_args.sequential, "Run all task kinds on one thread");

    QueryArgs query_args;
    std::string q_from, q_to, q_csv;
    auto* query = app.add_subcommand("query", "Select attributes over locations and a time range");
    query->add_option("table", query_args.table, "weathers, traffics or pollutions")->required();
    query->add_option("attributes", query_args.attributes, "Attribute columns (default: all)");
    query->add_option("--loc", query_args.locations, "Location ids (default: all)")->delimiter(',');
    query->add_option("--from", q_from, "Start (YYYY-MM-DD or YYYY-MM-DDTHH:MM:SS)");
    query->add_option("--to", q_to, "End; a bare date includes the whole day");
    query->add_option("--csv", q_csv, "Write CSV to this file instead of stdout");

    auto* report = app.add_subcommand("report", "Non-empty record accounting per attribute");

    ExportArgs export_args;
    std::string e_from, e_to, e_out;
    auto* exp = app.add_subcommand("export", "Plot-ready CSV of every attribute of a table");
    exp->add_option("table", export_args.table, "weathers, traffics or pollutions")->required();
    exp->add_option("--from", e_from, "Start");
    exp->add_option("--to", e_to, "End");
    exp->add_option("-o,--out", e_out, "Output file (default: stdout)");

    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    auto opt = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<std::string>(s); };
    if (init->parsed())
        return cmd_init(config, out, err);
    if (run->parsed()) {
        run_args.wall_clock = clock == "wall";
        if (!fixtures.empty())
            run_args.fixtures = fixtures;
        if (!start.empty()) {
            try {
                run_args.start = Date::parse(start);
            } catch (const std::exception& e) {
                err << "error: --start: " << e.what() << "\n";
                return 1;
            }
        }
        return cmd_run(config, run_args, out, err);
    }
    if (query->parsed()) {
        query_args.from = opt(q_from);
        query_args.to = opt(q_to);
        if (!q_csv.empty())
            query_args.csv = q_csv;
        return cmd_query(config, query_args, out, err);
    }
    if (report->parsed())
        return cmd_report(config, out, err);
    if (exp->parsed()) {
        export_args.from = opt(e_from);
        export_args.to = opt(e_to);
        if (!e_out.empty())
            export_args.out = e_out;
        return cmd_export(config, export_args, out, err);
    }
    return 1;
}

} // namespace mwtp
