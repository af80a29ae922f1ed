#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mwtp/catalog.hpp"
#include "mwtp/connectors.hpp"
#include "mwtp/storage.hpp"
#include "mwtp/synth.hpp"
#include "mwtp/time.hpp"
#include "mwtp/validation.hpp"

namespace mwtp {

enum class TaskKind { weather_backfill, traffic_poll, pollution_scrape };

inline constexpr std::array<TaskKind, 3> all_task_kinds{TaskKind::weather_backfill, TaskKind::traffic_poll,
                                                        TaskKind::pollution_scrape};

std::string_view task_kind_name(TaskKind k);
std::optional<TaskKind> task_kind_from_name(std::string_view name);

/// Calls every `interval_min` minutes from start_hour:00 up to, not
/// including, end_hour:00.
struct CadenceWindow {
    int start_hour = 0;
    int end_hour = 0;
    int interval_min = 0;
    TaskKind kind = TaskKind::traffic_poll;

    /// Number of ticks in the window.
    int ticks() const;
    bool operator==(const CadenceWindow&) const = default;
};

/// Throws ConfigError for start >= end, hours outside 0..24, a non-positive
/// interval, overlapping windows of one kind, or a window for a daily job.
void check_windows(std::span<const CadenceWindow> windows);

/// Traffic cadence used when the config has no [cadence] section:
/// 61 calls per route and day.
std::vector<CadenceWindow> default_cadence();

/// Fire times of the two daily jobs.
inline constexpr int weather_backfill_hour = 0;
inline constexpr int weather_backfill_minute = 30;
inline constexpr int pollution_scrape_hour = 23;
inline constexpr int pollution_scrape_minute = 30;
/// Last hour the pollution scrape asks for.
inline constexpr int pollution_request_hour = 23;

/// Target of the daily jobs, which cover every station.
inline constexpr std::string_view all_targets = "*";

struct PlanEntry {
    LocalDateTime fire_time;
    TaskKind kind = TaskKind::traffic_poll;
    /// Route file_id, or "*" for the daily jobs.
    std::string target;

    auto operator<=>(const PlanEntry&) const = default;
};

struct CadencePlan {
    Date day;
    /// Sorted by (fire time, kind, target).
    std::vector<PlanEntry> entries;

    std::size_t count(TaskKind k) const;
    bool operator==(const CadencePlan&) const = default;
};

/// One traffic entry per route per window tick plus the two daily jobs.
CadencePlan build_plan(std::span<const CadenceWindow> windows, std::span<const TrafficRoute> routes, Date day);

/// Earliest entry firing at or after `now`.
std::optional<PlanEntry> next_due(const CadencePlan& plan, const LocalDateTime& now);

// ---------------------------------------------------------------------------
// Clocks
// ---------------------------------------------------------------------------

class Clock {
public:
    virtual ~Clock() = default;
    virtual LocalDateTime now() const = 0;
    /// Returns once now() >= t.
    virtual void sleep_until(const LocalDateTime& t) = 0;
};

/// Jumps forward instead of waiting. Thread-safe.
class SimulatedClock : public Clock {
public:
    explicit SimulatedClock(LocalDateTime start) : now_(start) {}
    LocalDateTime now() const override;
    void sleep_until(const LocalDateTime& t) override;

private:
    mutable std::mutex mutex_;
    LocalDateTime now_;
};

/// The host's local time.
class WallClock : public Clock {
public:
    LocalDateTime now() const override;
    void sleep_until(const LocalDateTime& t) override;
};

// ---------------------------------------------------------------------------
// Sources
// ---------------------------------------------------------------------------

/// Where payloads come from. Implementations must be safe to call from one
/// thread per task kind at once. Failures throw SourceError.
class Source {
public:
    virtual ~Source() = default;
    virtual SourcePayload fetch_weather(const WeatherSite& site, Date day) = 0;
    virtual SourcePayload fetch_traffic(const TrafficRoute& route, const LocalDateTime& at) = 0;
    virtual SourcePayload fetch_pollution(const PollutionStation& station, Date day, int request_hour) = 0;
};

class SynthSource : public Source {
public:
    explicit SynthSource(SynthProfile profile) : profile_(std::move(profile)) {}
    SourcePayload fetch_weather(const WeatherSite& site, Date day) override;
    SourcePayload fetch_traffic(const TrafficRoute& route, const LocalDateTime& at) override;
    SourcePayload fetch_pollution(const PollutionStation& station, Date day, int request_hour) override;

private:
    SynthProfile profile_;
};

/// Reads a fixture directory:
///   weather/<YYYY-MM-DD>/<file_id>.txt
///   traffic/<YYYY-MM-DD>.txt             (the line for the route and time is served)
///   pollution/<YYYY-MM-DD>/<file_id>.txt (cells after request_hour are dropped)
class FixtureSource : public Source {
public:
    explicit FixtureSource(std::filesystem::path root) : root_(std::move(root)) {}
    SourcePayload fetch_weather(const WeatherSite& site, Date day) override;
    SourcePayload fetch_traffic(const TrafficRoute& route, const LocalDateTime& at) override;
    SourcePayload fetch_pollution(const PollutionStation& station, Date day, int request_hour) override;

private:
    std::filesystem::path root_;
};

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

struct KindCounts {
    std::size_t fired = 0;
    std::size_t skipped = 0;
    std::size_t failures = 0;
    std::size_t stored = 0;
    std::size_t duplicates = 0;
    std::size_t rejected = 0;
    std::size_t fields_nulled = 0;
    std::size_t quarantined = 0;

    KindCounts& operator+=(const KindCounts& o);
    bool operator==(const KindCounts&) const = default;
};

struct RunSummary {
    Date day;
    std::array<KindCounts, 3> kinds{};
    /// Storage became unavailable; later entries did not run.
    bool aborted = false;
    /// One line per failure, in no particular order across kinds.
    std::vector<std::string> errors;

    const KindCounts& of(TaskKind k) const { return kinds[static_cast<std::size_t>(k)]; }
    KindCounts& of(TaskKind k) { return kinds[static_cast<std::size_t>(k)]; }
    KindCounts total() const;
    std::string str() const;
};

struct RunOptions {
    /// Process start time when resuming a day; traffic entries before it
    /// are skipped and the daily jobs run once on start.
    std::optional<LocalDateTime> resume_at;
    /// Defaults to a simulated clock starting at midnight of the plan's day.
    Clock* clock = nullptr;
    /// One executor thread per task kind.
    bool concurrent = true;
};

/// Runs every entry once, in fire-time order per kind. Source, parse and
/// validation failures are counted and never stop the day; StorageUnavailable
/// aborts it with the counts so far.
RunSummary run_day(const CadencePlan& plan, Source& source, Store& store, const Catalog& catalog,
                   const RuleSet& rules, QuarantineSink& quarantine, const RunOptions& options = {});

} // namespace mwtp
