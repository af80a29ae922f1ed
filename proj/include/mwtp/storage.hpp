#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mwtp/model.hpp"
#include "mwtp/time.hpp"

struct sqlite3;

namespace mwtp {

enum class RecordTable { weathers, traffics, pollutions };

inline constexpr std::array<RecordTable, 3> all_record_tables{RecordTable::weathers, RecordTable::traffics,
                                                              RecordTable::pollutions};

std::string_view table_name(RecordTable t);
std::optional<RecordTable> record_table_from_name(std::string_view name);
std::string_view timestamp_column(RecordTable t);
std::string_view location_column(RecordTable t);

/// Selectable attribute columns of a record table, in schema order.
const std::vector<std::string>& record_attributes(RecordTable t);
/// Whether an attribute column holds text rather than a number.
bool is_text_attribute(RecordTable t, std::string_view attribute);

// ---------------------------------------------------------------------------
// Schema catalog
// ---------------------------------------------------------------------------

struct ForeignKey {
    std::string column;
    std::string table;
    std::string ref_column;

    bool operator==(const ForeignKey&) const = default;
};

struct TableInfo {
    std::string name;
    std::string primary_key;
    std::vector<std::string> columns;
    std::vector<ForeignKey> foreign_keys;

    bool operator==(const TableInfo&) const = default;
};

/// The ten tables of the collection database, as found in the store.
struct SchemaCatalog {
    std::vector<TableInfo> tables;

    const TableInfo* find(std::string_view name) const;
    bool operator==(const SchemaCatalog&) const = default;
};

/// Names of the ten tables, record tables first.
const std::vector<std::string>& schema_table_names();

// ---------------------------------------------------------------------------
// Query results
// ---------------------------------------------------------------------------

using Value = std::variant<double, std::string>;
/// nullopt is NA.
using Cell = std::optional<Value>;

struct QueryRow {
    LocalDateTime timestamp;
    LocationId location = 0;
    std::vector<Cell> values;

    bool operator==(const QueryRow&) const = default;
};

struct QueryResult {
    RecordTable table = RecordTable::weathers;
    std::vector<std::string> attributes;
    std::vector<QueryRow> rows;

    bool operator==(const QueryResult&) const = default;
};

struct AttributeSummary {
    RecordTable table;
    std::string attribute;
    std::int64_t non_empty = 0;
    /// non_empty / number of distinct calendar months with any row in the table.
    double monthly_average = 0;
};

struct NonEmptySummary {
    std::vector<AttributeSummary> attributes;
    std::map<RecordTable, std::int64_t> months;

    const AttributeSummary* find(RecordTable t, std::string_view attribute) const;
};

/// Report rows in accounting order: measured weather attributes first, then
/// the weather lookups and METAR, then traffic and pollution.
std::vector<std::pair<RecordTable, std::string>> report_attributes();

struct IntegrityReport {
    /// One entry per foreign key with dangling rows: "table.column -> parent: n".
    std::vector<std::string> dangling;
    std::int64_t dangling_rows = 0;

    bool clean() const { return dangling_rows == 0; }
};

enum class InsertOutcome { inserted, duplicate };

// ---------------------------------------------------------------------------
// Store
// ---------------------------------------------------------------------------

/// Embedded relational store. All members are safe to call from several
/// threads; writes serialize on one connection.
class Store {
public:
    /// ":memory:" opens a private in-memory database.
    explicit Store(const std::string& path);
    ~Store();
    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    /// Creates missing tables; idempotent. Throws MigrationRequired when an
    /// existing table has different columns. Unrelated tables are left alone.
    SchemaCatalog init_schema();
    /// Catalog read back from the store (only the ten schema tables).
    SchemaCatalog catalog() const;
    /// Every table in the store, including foreign ones.
    std::vector<std::string> table_names() const;

    LocationId upsert_location(const WeatherStation& s);
    LocationId upsert_location(const TrafficRoute& r);
    LocationId upsert_location(const PollutionStation& s);

    std::vector<WeatherStation> weather_stations() const;
    std::vector<TrafficRoute> traffic_routes() const;
    std::vector<PollutionStation> pollution_stations() const;

    std::int64_t upsert_lookup(LookupCatalog catalog, std::string_view code, std::string_view description);
    std::vector<Lookup> lookups(LookupCatalog catalog) const;

    /// At most once per (timestamp, location). Throws ReferentialError for an
    /// unknown location or lookup code.
    InsertOutcome insert(const WeatherRecord& r);
    InsertOutcome insert(const TrafficRecord& r);
    InsertOutcome insert(const PollutionRecord& r);

    std::optional<WeatherRecord> fetch_weather(LocationId location, const LocalDateTime& ts) const;
    std::optional<TrafficRecord> fetch_traffic(LocationId location, const LocalDateTime& ts) const;
    std::optional<PollutionRecord> fetch_pollution(LocationId location, const LocalDateTime& ts) const;

    /// Rows with location in `locations` and timestamp in `range` (inclusive),
    /// ordered by (location, timestamp). Throws QueryError for unknown
    /// attributes or a reversed range.
    QueryResult query_attribute(RecordTable table, std::span<const std::string> attributes,
                                std::span<const LocationId> locations, const TimeRange& range) const;

    NonEmptySummary summarize_nonempty() const;
    IntegrityReport check_integrity() const;
    std::int64_t row_count(std::string_view table) const;

    /// RAII write batch; rolls back unless committed.
    class Transaction {
    public:
        explicit Transaction(Store& store);
        ~Transaction();
        Transaction(const Transaction&) = delete;
        Transaction& operator=(const Transaction&) = delete;
        void commit();

    private:
        Store& store_;
        std::unique_lock<std::recursive_mutex> lock_;
        bool done_ = false;
    };

    /// Further calls throw StorageUnavailable.
    void close();
    bool is_open() const;

private:
    struct Statements;

    void exec(const std::string& sql) const;
    std::int64_t lookup_id(LookupCatalog catalog, const std::string& code) const;
    void require_location(std::string_view table, std::string_view id_column, LocationId id) const;
    sqlite3* db() const;

    mutable std::recursive_mutex mutex_;
    sqlite3* db_ = nullptr;
    std::unique_ptr<Statements> stmts_;
    mutable std::map<std::pair<LookupCatalog, std::string>, std::int64_t> lookup_cache_;
};

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Header of column names, then one line per row. NA is an empty field;
/// fields holding separators, quotes or an empty string are double-quoted.
std::string export_csv(const QueryResult& result);

/// Inverse of export_csv. Throws ParseError.
QueryResult import_csv(std::string_view text);

} // namespace mwtp
