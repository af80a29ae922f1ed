#include "mwtp/scheduler.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "mwtp/errors.hpp"
#include "mwtp/text.hpp"

namespace mwtp {

namespace {

constexpr std::array<std::string_view, 3> kind_names{"weather_backfill", "traffic_poll", "pollution_scrape"};

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw SourceError("no fixture at " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

std::string_view task_kind_name(TaskKind k)
{
    return kind_names[static_cast<std::size_t>(k)];
}

std::optional<TaskKind> task_kind_from_name(std::string_view name)
{
    for (auto k : all_task_kinds)
        if (task_kind_name(k) == name)
            return k;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Plans
// ---------------------------------------------------------------------------

int CadenceWindow::ticks() const
{
    if (interval_min <= 0 || end_hour <= start_hour)
        return 0;
    int span = (end_hour - start_hour) * 60;
    return (span + interval_min - 1) / interval_min;
}

void check_windows(std::span<const CadenceWindow> windows)
{
    for (const auto& w : windows) {
        auto where = std::string(task_kind_name(w.kind)) + " " + std::to_string(w.start_hour) + "-" +
                     std::to_string(w.end_hour);
        if (w.start_hour < 0 || w.end_hour > 24 || w.start_hour >= w.end_hour)
            throw ConfigError("cadence window " + where + ": need 0 <= start < end <= 24");
        if (w.interval_min <= 0)
            throw ConfigError("cadence window " + where + ": interval must be positive");
        if (w.kind != TaskKind::traffic_poll)
            throw ConfigError("cadence window " + where + ": " + std::string(task_kind_name(w.kind)) +
                              " runs once a day and takes no window");
    }
    for (std::size_t i = 0; i < windows.size(); ++i)
        for (std::size_t j = i + 1; j < windows.size(); ++j) {
            const auto& a = windows[i];
            const auto& b = windows[j];
            if (a.kind == b.kind && a.start_hour < b.end_hour && b.start_hour < a.end_hour)
                throw ConfigError("cadence windows " + std::to_string(a.start_hour) + "-" +
                                  std::to_string(a.end_hour) + " and " + std::to_string(b.start_hour) + "-" +
                                  std::to_string(b.end_hour) + " overlap");
        }
}

std::vector<CadenceWindow> default_cadence()
{
    return {
        {5, 6, 20, TaskKind::traffic_poll},
        {6, 10, 12, TaskKind::traffic_poll},
        {10, 17, 30, TaskKind::traffic_poll},
        {17, 21, 12, TaskKind::traffic_poll},
        {21, 23, 30, TaskKind::traffic_poll},
    };
}

std::size_t CadencePlan::count(TaskKind k) const
{
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [k](const PlanEntry& e) { return e.kind == k; }));
}

CadencePlan build_plan(std::span<const CadenceWindow> windows, std::span<const TrafficRoute> routes, Date day)
{
    check_windows(windows);
    std::set<std::string_view> seen;
    for (const auto& r : routes)
        if (!seen.insert(r.file_id).second)
            throw ConfigError("route '" + r.file_id + "' listed twice");

    CadencePlan plan;
    plan.day = day;
    for (const auto& w : windows) {
        for (int m = w.start_hour * 60; m < w.end_hour * 60; m += w.interval_min) {
            auto at = LocalDateTime::at(day, m / 60, m % 60);
            for (const auto& r : routes)
                plan.entries.push_back({at, w.kind, r.file_id});
        }
    }
    plan.entries.push_back({LocalDateTime::at(day, weather_backfill_hour, weather_backfill_minute),
                            TaskKind::weather_backfill, std::string(all_targets)});
    plan.entries.push_back({LocalDateTime::at(day, pollution_scrape_hour, pollution_scrape_minute),
                            TaskKind::pollution_scrape, std::string(all_targets)});
    std::sort(plan.entries.begin(), plan.entries.end());
    return plan;
}

std::optional<PlanEntry> next_due(const CadencePlan& plan, const LocalDateTime& now)
{
    auto it = std::find_if(plan.entries.begin(), plan.entries.end(),
                           [&](const PlanEntry& e) { return e.fire_time >= now; });
    if (it == plan.entries.end())
        return std::nullopt;
    return *it;
}

// ---------------------------------------------------------------------------
// Clocks
// ---------------------------------------------------------------------------

LocalDateTime SimulatedClock::now() const
{
    std::lock_guard lock(mutex_);
    return now_;
}

void SimulatedClock::sleep_until(const LocalDateTime& t)
{
    std::lock_guard lock(mutex_);
    if (now_ < t)
        now_ = t;
}

LocalDateTime WallClock::now() const
{
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    localtime_r(&t, &tm);
    return LocalDateTime{Date{tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday}, tm.tm_hour, tm.tm_min, tm.tm_sec};
}

void WallClock::sleep_until(const LocalDateTime& t)
{
    while (true) {
        auto wait = t.seconds_since_epoch() - now().seconds_since_epoch();
        if (wait <= 0)
            return;
        std::this_thread::sleep_for(std::chrono::seconds(std::min<std::int64_t>(wait, 60)));
    }
}

// ---------------------------------------------------------------------------
// Sources
// ---------------------------------------------------------------------------

SourcePayload SynthSource::fetch_weather(const WeatherSite& site, Date day)
{
    return gen_weather_day(profile_, site, day);
}

SourcePayload SynthSource::fetch_traffic(const TrafficRoute& route, const LocalDateTime& at)
{
    return gen_traffic_response(profile_, route, at);
}

SourcePayload SynthSource::fetch_pollution(const PollutionStation& station, Date day, int request_hour)
{
    return gen_pollution_day(profile_, station, day, request_hour);
}

SourcePayload FixtureSource::fetch_weather(const WeatherSite& site, Date day)
{
    auto path = root_ / "weather" / day.str() / (site.station.file_id + ".txt");
    return {SourceKind::weather, LocalDateTime::at(day.plus_days(1), 0, 30), read_file(path), path.string()};
}

SourcePayload FixtureSource::fetch_traffic(const TrafficRoute& route, const LocalDateTime& at)
{
    auto path = root_ / "traffic" / (at.date.str() + ".txt");
    auto body = read_file(path);
    std::string selected;
    for (auto line : text::lines(body)) {
        auto tokens = text::split_ws(line);
        if (tokens.size() < 2 || tokens[0] != route.file_id)
            continue;
        try {
            if (LocalDateTime::parse(tokens[1]) != at)
                continue;
        } catch (const Error&) {
            continue;
        }
        selected.append(line).push_back('\n');
    }
    if (selected.empty())
        throw SourceError("no registry for " + route.file_id + " at " + at.iso() + " in " + path.string());
    return {SourceKind::traffic, at, std::move(selected), path.string()};
}

SourcePayload FixtureSource::fetch_pollution(const PollutionStation& station, Date day, int request_hour)
{
    auto path = root_ / "pollution" / day.str() / (station.file_id + ".txt");
    auto body = read_file(path);
    std::string kept;
    for (auto line : text::lines(body)) {
        auto t = text::trim(line);
        if (t.size() >= 5 && t[2] == ':' && std::isdigit(static_cast<unsigned char>(t[0])) &&
            std::isdigit(static_cast<unsigned char>(t[1]))) {
            int hour = (t[0] - '0') * 10 + (t[1] - '0');
            if (hour > request_hour)
                continue;
        }
        kept.append(line).push_back('\n');
    }
    return {SourceKind::pollution, LocalDateTime::at(day, request_hour, 30), std::move(kept), path.string()};
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

KindCounts& KindCounts::operator+=(const KindCounts& o)
{
    fired += o.fired;
    skipped += o.skipped;
    failures += o.failures;
    stored += o.stored;
    duplicates += o.duplicates;
    rejected += o.rejected;
    fields_nulled += o.fields_nulled;
    quarantined += o.quarantined;
    return *this;
}

KindCounts RunSummary::total() const
{
    KindCounts t;
    for (const auto& k : kinds)
        t += k;
    return t;
}

std::string RunSummary::str() const
{
    std::ostringstream out;
    out << day.str() << (aborted ? " ABORTED" : "") << "\n";
    for (auto k : all_task_kinds) {
        const auto& c = of(k);
        out << "  " << task_kind_name(k) << ": fired " << c.fired << ", skipped " << c.skipped << ", failures "
            << c.failures << ", stored " << c.stored << ", duplicates " << c.duplicates << ", rejected "
            << c.rejected << ", fields nulled " << c.fields_nulled << ", quarantined " << c.quarantined << "\n";
    }
    return out.str();
}

namespace {

class DayRunner {
public:
    DayRunner(const CadencePlan& plan, Source& source, Store& store, const Catalog& catalog, const RuleSet& rules,
              QuarantineSink& quarantine)
        : plan_(plan), source_(source), store_(store), catalog_(catalog), rules_(rules), quarantine_(quarantine),
          index_(catalog.index())
    {
        for (const auto& r : catalog.routes)
            routes_.emplace(r.file_id, &r);
    }

    struct Lane {
        KindCounts counts;
        std::vector<std::string> errors;
    };

    /// Runs the entries of `only` (every kind when unset) in plan order.
    /// Each entry touches only the lane of its own kind.
    void run_entries(std::optional<TaskKind> only, Clock& clock, const std::optional<LocalDateTime>& resume_at,
                     std::array<Lane, 3>& lanes)
    {
        for (const auto& entry : plan_.entries) {
            if (only && entry.kind != *only)
                continue;
            if (aborted_.load())
                return;
            auto& lane = lanes[static_cast<std::size_t>(entry.kind)];
            bool late = resume_at && entry.fire_time < *resume_at;
            if (late && entry.kind == TaskKind::traffic_poll) {
                ++lane.counts.skipped;
                continue;
            }
            if (!late)
                clock.sleep_until(entry.fire_time);
            ++lane.counts.fired;
            try {
                if (!execute(entry, lane))
                    ++lane.counts.failures;
            } catch (const StorageUnavailable& e) {
                ++lane.counts.failures;
                lane.errors.push_back(describe(entry) + ": " + e.what());
                aborted_.store(true);
                return;
            }
        }
    }

    bool aborted() const { return aborted_.load(); }

private:
    static std::string describe(const PlanEntry& e)
    {
        return e.fire_time.iso() + " " + std::string(task_kind_name(e.kind)) + " " + e.target;
    }

    /// Returns false when any part of the entry failed.
    bool execute(const PlanEntry& entry, Lane& lane)
    {
        switch (entry.kind) {
        case TaskKind::weather_backfill:
            return backfill_weather(entry, lane);
        case TaskKind::traffic_poll:
            return poll_traffic(entry, lane);
        case TaskKind::pollution_scrape:
            return scrape_pollution(entry, lane);
        }
        return false;
    }

    template <class Fn>
    bool guarded(const PlanEntry& entry, std::string_view target, Lane& lane, Fn&& fn)
    {
        try {
            fn();
            return true;
        } catch (const StorageUnavailable&) {
            throw;
        } catch (const std::exception& e) {
            lane.errors.push_back(describe(entry) + " [" + std::string(target) + "]: " + e.what());
            return false;
        }
    }

    template <class Record>
    void store_validated(const Validated<Record>& v, Lane& lane)
    {
        if (!v.accepted()) {
            ++lane.counts.rejected;
            lane.errors.push_back("rejected " + v.report.key + ": " + v.rejection);
            return;
        }
        lane.counts.fields_nulled += v.report.violations.size();
        try {
            if (store_.insert(*v.record) == InsertOutcome::inserted)
                ++lane.counts.stored;
            else
                ++lane.counts.duplicates;
        } catch (const ReferentialError& e) {
            ++lane.counts.rejected;
            lane.errors.push_back("rejected " + v.report.key + ": " + e.what());
        }
    }

    void forward_quarantine(QuarantineSink& local, Lane& lane)
    {
        auto items = local.items();
        lane.counts.quarantined += items.size();
        for (auto& item : items)
            quarantine_.add(std::move(item));
    }

    bool backfill_weather(const PlanEntry& entry, Lane& lane)
    {
        const Date yesterday = plan_.day.plus_days(-1);
        bool ok = true;
        for (const auto& site : catalog_.weather) {
            ok &= guarded(entry, site.station.file_id, lane, [&] {
                auto payload = source_.fetch_weather(site, yesterday);
                QuarantineSink local;
                auto raws = parse_weather_observations(payload, index_, local);
                forward_quarantine(local, lane);
                Store::Transaction tx(store_);
                for (const auto& raw : raws)
                    store_validated(validate_weather(raw, rules_), lane);
                tx.commit();
            });
        }
        return ok;
    }

    bool poll_traffic(const PlanEntry& entry, Lane& lane)
    {
        return guarded(entry, entry.target, lane, [&] {
            auto it = routes_.find(entry.target);
            if (it == routes_.end())
                throw PreconditionError("route '" + entry.target + "' is not in the catalog");
            auto payload = source_.fetch_traffic(*it->second, entry.fire_time);
            auto raw = parse_traffic_response(payload, *it->second);
            store_validated(validate_traffic(raw, rules_), lane);
        });
    }

    bool scrape_pollution(const PlanEntry& entry, Lane& lane)
    {
        bool ok = true;
        for (const auto& station : catalog_.pollution) {
            ok &= guarded(entry, station.file_id, lane, [&] {
                auto payload = source_.fetch_pollution(station, plan_.day, pollution_request_hour);
                QuarantineSink local;
                auto cells = parse_pollution_tables(payload, index_, local);
                forward_quarantine(local, lane);
                auto candidates = assemble_station_day(cells, station, plan_.day);
                Store::Transaction tx(store_);
                for (const auto& c : candidates)
                    store_validated(validate_pollution(c, rules_), lane);
                tx.commit();
            });
        }
        return ok;
    }

    const CadencePlan& plan_;
    Source& source_;
    Store& store_;
    const Catalog& catalog_;
    const RuleSet& rules_;
    QuarantineSink& quarantine_;
    LocationIndex index_;
    std::map<std::string, const TrafficRoute*, std::less<>> routes_;
    std::atomic<bool> aborted_{false};
};

} // namespace

RunSummary run_day(const CadencePlan& plan, Source& source, Store& store, const Catalog& catalog,
                   const RuleSet& rules, QuarantineSink& quarantine, const RunOptions& options)
{
    RunSummary summary;
    summary.day = plan.day;
    if (plan.entries.empty())
        return summary;

    SimulatedClock fallback(LocalDateTime::at(plan.day, 0));
    Clock& clock = options.clock ? *options.clock : fallback;
    DayRunner runner(plan, source, store, catalog, rules, quarantine);
    std::array<DayRunner::Lane, 3> lanes;

    if (options.concurrent) {
        std::vector<std::thread> threads;
        for (auto k : all_task_kinds)
            if (plan.count(k) > 0)
                threads.emplace_back([&, k] { runner.run_entries(k, clock, options.resume_at, lanes); });
        for (auto& t : threads)
            t.join();
    } else {
        runner.run_entries(std::nullopt, clock, options.resume_at, lanes);
    }

    for (auto k : all_task_kinds) {
        auto& lane = lanes[static_cast<std::size_t>(k)];
        summary.of(k) = lane.counts;
        for (auto& e : lane.errors)
            summary.errors.push_back(std::move(e));
    }
    summary.aborted = runner.aborted();
    return summary;
}

} // namespace mwtp
