#include "mwtp/storage.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <array>
#include <set>

#include "mwtp/errors.hpp"
#include "mwtp/text.hpp"

namespace mwtp {

namespace {

struct TableDef {
    std::string_view name;
    std::string_view ddl;
    std::vector<std::string> columns;
};

// Column names mirror the attribute tables, lower-cased.
const std::vector<TableDef>& table_defs()
{
    static const std::vector<TableDef> defs{
        {"weathers",
         "CREATE TABLE IF NOT EXISTS weathers ("
         " id_weather INTEGER PRIMARY KEY,"
         " timestamp_w TEXT NOT NULL,"
         " id_time_zone INTEGER NOT NULL REFERENCES time_zones(id_time_zone),"
         " temp REAL, dewpt REAL, hum REAL, wspd REAL, wgust REAL, wdird REAL,"
         " id_wdire INTEGER REFERENCES wdires(id_wdire),"
         " pressure REAL, windchill REAL, heatindex REAL, preciprate REAL, preciptotal REAL,"
         " solarradiation REAL, uv REAL, vis REAL, precip REAL,"
         " id_cond INTEGER REFERENCES conds(id_cond),"
         " id_icon INTEGER REFERENCES icons(id_icon),"
         " fog INTEGER, rain INTEGER, snow INTEGER, hail INTEGER, thunder INTEGER, tornado INTEGER,"
         " metar TEXT,"
         " id_locations_w INTEGER NOT NULL REFERENCES locations_w(id_locations_w),"
         " UNIQUE (timestamp_w, id_locations_w))",
         {"id_weather", "timestamp_w", "id_time_zone", "temp", "dewpt", "hum", "wspd", "wgust", "wdird", "id_wdire",
          "pressure", "windchill", "heatindex", "preciprate", "preciptotal", "solarradiation", "uv", "vis", "precip",
          "id_cond", "id_icon", "fog", "rain", "snow", "hail", "thunder", "tornado", "metar", "id_locations_w"}},
        {"traffics",
         "CREATE TABLE IF NOT EXISTS traffics ("
         " id_traffic INTEGER PRIMARY KEY,"
         " timestamp_t TEXT NOT NULL,"
         " traveldist REAL NOT NULL, traveltime_std REAL NOT NULL, traveltime_curr REAL NOT NULL,"
         " id_locations_t INTEGER NOT NULL REFERENCES locations_t(id_locations_t),"
         " UNIQUE (timestamp_t, id_locations_t))",
         {"id_traffic", "timestamp_t", "traveldist", "traveltime_std", "traveltime_curr", "id_locations_t"}},
        {"pollutions",
         "CREATE TABLE IF NOT EXISTS pollutions ("
         " id_pollution INTEGER PRIMARY KEY,"
         " timestamp_p TEXT NOT NULL,"
         " pm10 INTEGER, o3 INTEGER, co INTEGER, so2 INTEGER, no2 INTEGER, pm25 INTEGER,"
         " id_locations_p INTEGER NOT NULL REFERENCES locations_p(id_locations_p),"
         " UNIQUE (timestamp_p, id_locations_p))",
         {"id_pollution", "timestamp_p", "pm10", "o3", "co", "so2", "no2", "pm25", "id_locations_p"}},
        {"locations_w",
         "CREATE TABLE IF NOT EXISTS locations_w ("
         " id_locations_w INTEGER PRIMARY KEY,"
         " file_id TEXT NOT NULL UNIQUE,"
         " station_id TEXT, airport_code TEXT,"
         " lat REAL NOT NULL CHECK (lat BETWEEN -90 AND 90),"
         " long REAL NOT NULL CHECK (long BETWEEN -180 AND 180),"
         " description TEXT, software_type TEXT, since TEXT,"
         " CHECK ((station_id IS NULL) <> (airport_code IS NULL)))",
         {"id_locations_w", "file_id", "station_id", "airport_code", "lat", "long", "description", "software_type",
          "since"}},
        {"locations_t",
         "CREATE TABLE IF NOT EXISTS locations_t ("
         " id_locations_t INTEGER PRIMARY KEY,"
         " file_id TEXT NOT NULL UNIQUE,"
         " start_lat REAL NOT NULL, start_long REAL NOT NULL, end_lat REAL NOT NULL, end_long REAL NOT NULL,"
         " description_from TEXT, description_to TEXT)",
         {"id_locations_t", "file_id", "start_lat", "start_long", "end_lat", "end_long", "description_from",
          "description_to"}},
        {"locations_p",
         "CREATE TABLE IF NOT EXISTS locations_p ("
         " id_locations_p INTEGER PRIMARY KEY,"
         " file_id TEXT NOT NULL UNIQUE,"
         " lat REAL NOT NULL CHECK (lat BETWEEN -90 AND 90),"
         " long REAL NOT NULL CHECK (long BETWEEN -180 AND 180),"
         " description TEXT)",
         {"id_locations_p", "file_id", "lat", "long", "description"}},
        {"conds",
         "CREATE TABLE IF NOT EXISTS conds (id_cond INTEGER PRIMARY KEY, cond TEXT NOT NULL UNIQUE, description TEXT)",
         {"id_cond", "cond", "description"}},
        {"icons",
         "CREATE TABLE IF NOT EXISTS icons (id_icon INTEGER PRIMARY KEY, icon TEXT NOT NULL UNIQUE, description TEXT)",
         {"id_icon", "icon", "description"}},
        {"time_zones",
         "CREATE TABLE IF NOT EXISTS time_zones (id_time_zone INTEGER PRIMARY KEY, time_zone TEXT NOT NULL UNIQUE,"
         " description TEXT)",
         {"id_time_zone", "time_zone", "description"}},
        {"wdires",
         "CREATE TABLE IF NOT EXISTS wdires (id_wdire INTEGER PRIMARY KEY, wdire TEXT NOT NULL UNIQUE,"
         " description TEXT)",
         {"id_wdire", "wdire", "description"}},
    };
    return defs;
}

struct LookupDef {
    std::string_view table;
    std::string_view id;
    std::string_view code;
};

LookupDef lookup_def(LookupCatalog c)
{
    switch (c) {
    case LookupCatalog::time_zones:
        return {"time_zones", "id_time_zone", "time_zone"};
    case LookupCatalog::wdires:
        return {"wdires", "id_wdire", "wdire"};
    case LookupCatalog::conds:
        return {"conds", "id_cond", "cond"};
    case LookupCatalog::icons:
        return {"icons", "id_icon", "icon"};
    }
    return {};
}

bool unavailable_code(int rc)
{
    switch (rc & 0xff) {
    case SQLITE_IOERR:
    case SQLITE_FULL:
    case SQLITE_CANTOPEN:
    case SQLITE_READONLY:
    case SQLITE_BUSY:
    case SQLITE_LOCKED:
    case SQLITE_CORRUPT:
    case SQLITE_NOTADB:
    case SQLITE_PERM:
        return true;
    default:
        return false;
    }
}

[[noreturn]] void raise(sqlite3* db, int rc, std::string_view context)
{
    std::string msg = std::string(context) + ": " + (db ? sqlite3_errmsg(db) : sqlite3_errstr(rc));
    if (unavailable_code(rc))
        throw StorageUnavailable(msg);
    if ((rc & 0xff) == SQLITE_CONSTRAINT)
        throw ReferentialError(msg);
    throw Error(msg);
}

class Stmt {
public:
    Stmt(sqlite3* db, const std::string& sql) : db_(db)
    {
        int rc = sqlite3_prepare_v2(db, sql.c_str(), static_cast<int>(sql.size()), &stmt_, nullptr);
        if (rc != SQLITE_OK)
            raise(db, rc, "prepare");
    }
    ~Stmt() { sqlite3_finalize(stmt_); }
    Stmt(const Stmt&) = delete;
    Stmt& operator=(const Stmt&) = delete;

    Stmt& reset()
    {
        sqlite3_reset(stmt_);
        sqlite3_clear_bindings(stmt_);
        return *this;
    }

    Stmt& bind(int i, std::nullopt_t)
    {
        sqlite3_bind_null(stmt_, i);
        return *this;
    }
    Stmt& bind(int i, double v)
    {
        sqlite3_bind_double(stmt_, i, v);
        return *this;
    }
    Stmt& bind(int i, std::int64_t v)
    {
        sqlite3_bind_int64(stmt_, i, v);
        return *this;
    }
    Stmt& bind(int i, std::string_view v)
    {
        sqlite3_bind_text(stmt_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
        return *this;
    }
    template <class T>
    Stmt& bind(int i, const std::optional<T>& v)
    {
        if (!v)
            return bind(i, std::nullopt);
        if constexpr (std::is_same_v<T, bool> || std::is_same_v<T, int>)
            return bind(i, static_cast<std::int64_t>(*v));
        else
            return bind(i, *v);
    }

    /// true while a row is available.
    bool step()
    {
        int rc = sqlite3_step(stmt_);
        if (rc == SQLITE_ROW)
            return true;
        if (rc == SQLITE_DONE)
            return false;
        raise(db_, rc, "step");
    }

    bool is_null(int col) const { return sqlite3_column_type(stmt_, col) == SQLITE_NULL; }
    int type(int col) const { return sqlite3_column_type(stmt_, col); }
    std::int64_t int64(int col) const { return sqlite3_column_int64(stmt_, col); }
    double real(int col) const { return sqlite3_column_double(stmt_, col); }
    std::string str(int col) const
    {
        auto p = sqlite3_column_text(stmt_, col);
        return p ? std::string(reinterpret_cast<const char*>(p), static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col)))
                 : std::string();
    }
    std::optional<double> opt_real(int col) const
    {
        return is_null(col) ? std::nullopt : std::optional<double>(real(col));
    }
    std::optional<std::string> opt_str(int col) const
    {
        return is_null(col) ? std::nullopt : std::optional<std::string>(str(col));
    }

private:
    sqlite3* db_;
    sqlite3_stmt* stmt_ = nullptr;
};

std::string join(const std::vector<std::string>& parts, std::string_view sep)
{
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i)
            out += sep;
        out += parts[i];
    }
    return out;
}

std::string placeholders(std::size_t n)
{
    std::string out;
    for (std::size_t i = 0; i < n; ++i)
        out += i ? ",?" : "?";
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// Table metadata
// ---------------------------------------------------------------------------

std::string_view table_name(RecordTable t)
{
    switch (t) {
    case RecordTable::weathers:
        return "weathers";
    case RecordTable::traffics:
        return "traffics";
    case RecordTable::pollutions:
        return "pollutions";
    }
    return "?";
}

std::optional<RecordTable> record_table_from_name(std::string_view name)
{
    for (auto t : all_record_tables)
        if (table_name(t) == name)
            return t;
    return std::nullopt;
}

std::string_view timestamp_column(RecordTable t)
{
    switch (t) {
    case RecordTable::weathers:
        return "timestamp_w";
    case RecordTable::traffics:
        return "timestamp_t";
    case RecordTable::pollutions:
        return "timestamp_p";
    }
    return "?";
}

std::string_view location_column(RecordTable t)
{
    switch (t) {
    case RecordTable::weathers:
        return "id_locations_w";
    case RecordTable::traffics:
        return "id_locations_t";
    case RecordTable::pollutions:
        return "id_locations_p";
    }
    return "?";
}

const std::vector<std::string>& record_attributes(RecordTable t)
{
    static const auto build = [](RecordTable table) {
        const auto& def = table_defs()[static_cast<std::size_t>(table)];
        std::vector<std::string> attrs;
        for (std::size_t i = 1; i < def.columns.size(); ++i) {
            const auto& c = def.columns[i];
            if (c != timestamp_column(table) && c != location_column(table))
                attrs.push_back(c);
        }
        return attrs;
    };
    static const std::array<std::vector<std::string>, 3> attrs{build(RecordTable::weathers),
                                                               build(RecordTable::traffics),
                                                               build(RecordTable::pollutions)};
    return attrs[static_cast<std::size_t>(t)];
}

bool is_text_attribute(RecordTable t, std::string_view attribute)
{
    return t == RecordTable::weathers && attribute == "metar";
}

const std::vector<std::string>& schema_table_names()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& d : table_defs())
            out.emplace_back(d.name);
        return out;
    }();
    return names;
}

const TableInfo* SchemaCatalog::find(std::string_view name) const
{
    for (const auto& t : tables)
        if (t.name == name)
            return &t;
    return nullptr;
}

const AttributeSummary* NonEmptySummary::find(RecordTable t, std::string_view attribute) const
{
    for (const auto& a : attributes)
        if (a.table == t && a.attribute == attribute)
            return &a;
    return nullptr;
}

std::vector<std::pair<RecordTable, std::string>> report_attributes()
{
    std::vector<std::pair<RecordTable, std::string>> out;
    const char* weather[] = {"temp",        "dewpt", "hum", "wspd", "wgust",          "wdird", "id_wdire",
                             "pressure",    "windchill",     "heatindex", "preciprate", "preciptotal",
                             "solarradiation", "uv", "vis", "precip", "fog", "rain", "snow", "hail", "thunder",
                             "tornado",     "id_cond",       "id_icon",   "metar",      "id_time_zone"};
    for (const char* a : weather)
        out.emplace_back(RecordTable::weathers, a);
    for (const auto& a : record_attributes(RecordTable::traffics))
        out.emplace_back(RecordTable::traffics, a);
    for (const auto& a : record_attributes(RecordTable::pollutions))
        out.emplace_back(RecordTable::pollutions, a);
    return out;
}

// ---------------------------------------------------------------------------
// Store
// ---------------------------------------------------------------------------

struct Store::Statements {
    std::map<std::string, std::unique_ptr<Stmt>, std::less<>> cache;

    Stmt& get(sqlite3* db, const std::string& sql)
    {
        auto it = cache.find(sql);
        if (it == cache.end())
            it = cache.emplace(sql, std::make_unique<Stmt>(db, sql)).first;
        return it->second->reset();
    }
};

Store::Store(const std::string& path) : stmts_(std::make_unique<Statements>())
{
    int rc = sqlite3_open_v2(path.c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                             nullptr);
    if (rc != SQLITE_OK) {
        std::string msg = db_ ? sqlite3_errmsg(db_) : sqlite3_errstr(rc);
        sqlite3_close(db_);
        db_ = nullptr;
        throw StorageUnavailable("cannot open store '" + path + "': " + msg);
    }
    sqlite3_busy_timeout(db_, 5000);
    exec("PRAGMA foreign_keys = ON");
    if (path != ":memory:") {
        exec("PRAGMA journal_mode = WAL");
        exec("PRAGMA synchronous = NORMAL");
    }
}

Store::~Store()
{
    close();
}

void Store::close()
{
    std::lock_guard lock(mutex_);
    if (stmts_)
        stmts_->cache.clear();
    if (db_) {
        sqlite3_close(db_);
        db_ = nullptr;
    }
}

bool Store::is_open() const
{
    std::lock_guard lock(mutex_);
    return db_ != nullptr;
}

sqlite3* Store::db() const
{
    if (!db_)
        throw StorageUnavailable("store is closed");
    return db_;
}

void Store::exec(const std::string& sql) const
{
    char* err = nullptr;
    int rc = sqlite3_exec(db(), sql.c_str(), nullptr, nullptr, &err);
    if (rc != SQLITE_OK) {
        std::string msg = err ? err : sqlite3_errstr(rc);
        sqlite3_free(err);
        if (unavailable_code(rc))
            throw StorageUnavailable(msg);
        throw Error(msg + " [" + sql.substr(0, 60) + "]");
    }
}

std::vector<std::string> Store::table_names() const
{
    std::lock_guard lock(mutex_);
    auto& st = stmts_->get(db(), "SELECT name FROM sqlite_master WHERE type='table' ORDER BY name");
    std::vector<std::string> out;
    while (st.step())
        out.push_back(st.str(0));
    return out;
}

SchemaCatalog Store::init_schema()
{
    std::lock_guard lock(mutex_);
    auto existing = table_names();
    std::set<std::string> present(existing.begin(), existing.end());

    for (const auto& def : table_defs()) {
        if (!present.count(std::string(def.name)))
            continue;
        std::vector<std::string> cols;
        Stmt info(db(), "PRAGMA table_info(" + std::string(def.name) + ")");
        while (info.step())
            cols.push_back(info.str(1));
        if (cols != def.columns)
            throw MigrationRequired("table '" + std::string(def.name) + "' has columns (" + join(cols, ", ") +
                                    "), expected (" + join(def.columns, ", ") + ")");
    }

    Transaction tx(*this);
    for (const auto& def : table_defs())
        exec(std::string(def.ddl));
    for (auto t : all_record_tables) {
        exec("CREATE INDEX IF NOT EXISTS idx_" + std::string(table_name(t)) + "_loc_ts ON " +
             std::string(table_name(t)) + " (" + std::string(location_column(t)) + ", " +
             std::string(timestamp_column(t)) + ")");
    }
    tx.commit();
    return catalog();
}

SchemaCatalog Store::catalog() const
{
    std::lock_guard lock(mutex_);
    auto existing = table_names();
    std::set<std::string> present(existing.begin(), existing.end());
    SchemaCatalog cat;
    for (const auto& def : table_defs()) {
        if (!present.count(std::string(def.name)))
            continue;
        TableInfo t;
        t.name = def.name;
        {
            Stmt info(db(), "PRAGMA table_info(" + t.name + ")");
            while (info.step()) {
                t.columns.push_back(info.str(1));
                if (info.int64(5) == 1)
                    t.primary_key = info.str(1);
            }
        }
        {
            Stmt fks(db(), "PRAGMA foreign_key_list(" + t.name + ")");
            while (fks.step())
                t.foreign_keys.push_back({fks.str(3), fks.str(2), fks.str(4)});
            std::sort(t.foreign_keys.begin(), t.foreign_keys.end(),
                      [](const auto& a, const auto& b) { return a.column < b.column; });
        }
        cat.tables.push_back(std::move(t));
    }
    return cat;
}

Store::Transaction::Transaction(Store& store) : store_(store), lock_(store.mutex_)
{
    store_.exec("BEGIN IMMEDIATE");
}

Store::Transaction::~Transaction()
{
    if (!done_ && store_.db_) {
        char* err = nullptr;
        sqlite3_exec(store_.db_, "ROLLBACK", nullptr, nullptr, &err);
        sqlite3_free(err);
    }
}

void Store::Transaction::commit()
{
    store_.exec("COMMIT");
    done_ = true;
}

// ---------------------------------------------------------------------------
// Locations and lookups
// ---------------------------------------------------------------------------

LocationId Store::upsert_location(const WeatherStation& s)
{
    s.check();
    std::lock_guard lock(mutex_);
    auto& find = stmts_->get(db(), "SELECT id_locations_w FROM locations_w WHERE file_id = ?");
    find.bind(1, s.file_id);
    std::optional<LocationId> id;
    if (find.step())
        id = find.int64(0);
    find.reset();

    auto since = s.since.str();
    if (id) {
        auto& up = stmts_->get(db(), "UPDATE locations_w SET station_id=?, airport_code=?, lat=?, long=?, "
                                     "description=?, software_type=?, since=? WHERE id_locations_w=?");
        up.bind(1, s.station_id).bind(2, s.airport_code).bind(3, s.lat).bind(4, s.lon);
        up.bind(5, s.description).bind(6, s.software_type).bind(7, std::string_view(since)).bind(8, *id);
        up.step();
        return *id;
    }
    auto& ins = stmts_->get(db(), "INSERT INTO locations_w (file_id, station_id, airport_code, lat, long, "
                                  "description, software_type, since) VALUES (?,?,?,?,?,?,?,?)");
    ins.bind(1, s.file_id).bind(2, s.station_id).bind(3, s.airport_code).bind(4, s.lat).bind(5, s.lon);
    ins.bind(6, s.description).bind(7, s.software_type).bind(8, std::string_view(since));
    ins.step();
    return sqlite3_last_insert_rowid(db());
}

LocationId Store::upsert_location(const TrafficRoute& r)
{
    r.check();
    std::lock_guard lock(mutex_);
    auto& find = stmts_->get(db(), "SELECT id_locations_t FROM locations_t WHERE file_id = ?");
    find.bind(1, r.file_id);
    std::optional<LocationId> id;
    if (find.step())
        id = find.int64(0);
    find.reset();
    if (id) {
        auto& up = stmts_->get(db(), "UPDATE locations_t SET start_lat=?, start_long=?, end_lat=?, end_long=?, "
                                     "description_from=?, description_to=? WHERE id_locations_t=?");
        up.bind(1, r.start_lat).bind(2, r.start_lon).bind(3, r.end_lat).bind(4, r.end_lon);
        up.bind(5, r.description_from).bind(6, r.description_to).bind(7, *id);
        up.step();
        return *id;
    }
    auto& ins = stmts_->get(db(), "INSERT INTO locations_t (file_id, start_lat, start_long, end_lat, end_long, "
                                  "description_from, description_to) VALUES (?,?,?,?,?,?,?)");
    ins.bind(1, r.file_id).bind(2, r.start_lat).bind(3, r.start_lon).bind(4, r.end_lat).bind(5, r.end_lon);
    ins.bind(6, r.description_from).bind(7, r.description_to);
    ins.step();
    return sqlite3_last_insert_rowid(db());
}

LocationId Store::upsert_location(const PollutionStation& s)
{
    s.check();
    std::lock_guard lock(mutex_);
    auto& find = stmts_->get(db(), "SELECT id_locations_p FROM locations_p WHERE file_id = ?");
    find.bind(1, s.file_id);
    std::optional<LocationId> id;
    if (find.step())
        id = find.int64(0);
    find.reset();
    if (id) {
        auto& up = stmts_->get(db(), "UPDATE locations_p SET lat=?, long=?, description=? WHERE id_locations_p=?");
        up.bind(1, s.lat).bind(2, s.lon).bind(3, s.description).bind(4, *id);
        up.step();
        return *id;
    }
    auto& ins = stmts_->get(db(), "INSERT INTO locations_p (file_id, lat, long, description) VALUES (?,?,?,?)");
    ins.bind(1, s.file_id).bind(2, s.lat).bind(3, s.lon).bind(4, s.description);
    ins.step();
    return sqlite3_last_insert_rowid(db());
}

std::vector<WeatherStation> Store::weather_stations() const
{
    std::lock_guard lock(mutex_);
    auto& st = stmts_->get(db(), "SELECT id_locations_w, file_id, station_id, airport_code, lat, long, description, "
                                 "software_type, since FROM locations_w ORDER BY id_locations_w");
    std::vector<WeatherStation> out;
    while (st.step()) {
        WeatherStation s;
        s.id = st.int64(0);
        s.file_id = st.str(1);
        s.station_id = st.opt_str(2);
        s.airport_code = st.opt_str(3);
        s.lat = st.real(4);
        s.lon = st.real(5);
        s.description = st.str(6);
        s.software_type = st.opt_str(7);
        if (auto since = st.opt_str(8); since && !since->empty())
            s.since = Date::parse(*since);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<TrafficRoute> Store::traffic_routes() const
{
    std::lock_guard lock(mutex_);
    auto& st = stmts_->get(db(), "SELECT id_locations_t, file_id, start_lat, start_long, end_lat, end_long, "
                                 "description_from, description_to FROM locations_t ORDER BY id_locations_t");
    std::vector<TrafficRoute> out;
    while (st.step()) {
        TrafficRoute r;
        r.id = st.int64(0);
        r.file_id = st.str(1);
        r.start_lat = st.real(2);
        r.start_lon = st.real(3);
        r.end_lat = st.real(4);
        r.end_lon = st.real(5);
        r.description_from = st.str(6);
        r.description_to = st.str(7);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<PollutionStation> Store::pollution_stations() const
{
    std::lock_guard lock(mutex_);
    auto& st = stmts_->get(db(), "SELECT id_locations_p, file_id, lat, long, description FROM locations_p "
                                 "ORDER BY id_locations_p");
    std::vector<PollutionStation> out;
    while (st.step()) {
        PollutionStation s;
        s.id = st.int64(0);
        s.file_id = st.str(1);
        s.lat = st.real(2);
        s.lon = st.real(3);
        s.description = st.str(4);
        out.push_back(std::move(s));
    }
    return out;
}

std::int64_t Store::upsert_lookup(LookupCatalog catalog, std::string_view code, std::string_view description)
{
    if (code.empty())
        throw ConfigError("empty lookup code");
    auto def = lookup_def(catalog);
    std::lock_guard lock(mutex_);
    auto table = std::string(def.table);
    auto& ins = stmts_->get(db(), "INSERT INTO " + table + " (" + std::string(def.code) +
                                      ", description) VALUES (?, ?) ON CONFLICT(" + std::string(def.code) +
                                      ") DO UPDATE SET description = excluded.description");
    ins.bind(1, code).bind(2, description);
    ins.step();
    lookup_cache_.clear();
    return lookup_id(catalog, std::string(code));
}

std::vector<Lookup> Store::lookups(LookupCatalog catalog) const
{
    auto def = lookup_def(catalog);
    std::lock_guard lock(mutex_);
    auto& st = stmts_->get(db(), "SELECT " + std::string(def.id) + ", " + std::string(def.code) +
                                     ", description FROM " + std::string(def.table) + " ORDER BY " +
                                     std::string(def.id));
    std::vector<Lookup> out;
    while (st.step())
        out.push_back({st.int64(0), st.str(1), st.str(2)});
    return out;
}

std::int64_t Store::lookup_id(LookupCatalog catalog, const std::string& code) const
{
    auto key = std::make_pair(catalog, code);
    if (auto it = lookup_cache_.find(key); it != lookup_cache_.end())
        return it->second;
    auto def = lookup_def(catalog);
    auto& st = stmts_->get(db(), "SELECT " + std::string(def.id) + " FROM " + std::string(def.table) + " WHERE " +
                                     std::string(def.code) + " = ?");
    st.bind(1, code);
    if (!st.step())
        throw ReferentialError("unknown " + std::string(def.code) + " code '" + code + "'");
    auto id = st.int64(0);
    st.reset();
    lookup_cache_.emplace(key, id);
    return id;
}

void Store::require_location(std::string_view table, std::string_view id_column, LocationId id) const
{
    auto& st = stmts_->get(db(), "SELECT 1 FROM " + std::string(table) + " WHERE " + std::string(id_column) + " = ?");
    st.bind(1, id);
    bool found = st.step();
    st.reset();
    if (!found)
        throw ReferentialError("no " + std::string(table) + " row with id " + std::to_string(id));
}

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

InsertOutcome Store::insert(const WeatherRecord& r)
{
    std::lock_guard lock(mutex_);
    require_location("locations_w", "id_locations_w", r.location);
    auto tz = lookup_id(LookupCatalog::time_zones, r.time_zone);
    auto code_id = [&](LookupCatalog c, const std::optional<std::string>& code) -> std::optional<std::int64_t> {
        if (!code)
            return std::nullopt;
        return lookup_id(c, *code);
    };
    auto wdire = code_id(LookupCatalog::wdires, r.wdire);
    auto cond = code_id(LookupCatalog::conds, r.cond);
    auto icon = code_id(LookupCatalog::icons, r.icon);

    auto& st = stmts_->get(
        db(), "INSERT INTO weathers (timestamp_w, id_time_zone, temp, dewpt, hum, wspd, wgust, wdird, id_wdire, "
              "pressure, windchill, heatindex, preciprate, preciptotal, solarradiation, uv, vis, precip, id_cond, "
              "id_icon, fog, rain, snow, hail, thunder, tornado, metar, id_locations_w) "
              "VALUES (" +
                  placeholders(28) + ") ON CONFLICT (timestamp_w, id_locations_w) DO NOTHING");
    auto ts = r.timestamp.str();
    int i = 1;
    auto next = [&](const auto& v) { st.bind(i++, v); };
    next(std::string_view(ts));
    next(tz);
    for (const auto& a : weather_numbers) {
        next(r.*a.member);
        if (a.name == "wdird")
            next(wdire);
    }
    next(cond);
    next(icon);
    for (const auto& f : weather_flags)
        next(r.*f.member);
    next(r.metar);
    next(r.location);
    st.step();
    return sqlite3_changes(db()) ? InsertOutcome::inserted : InsertOutcome::duplicate;
}

InsertOutcome Store::insert(const TrafficRecord& r)
{
    std::lock_guard lock(mutex_);
    require_location("locations_t", "id_locations_t", r.location);
    auto& st = stmts_->get(db(), "INSERT INTO traffics (timestamp_t, traveldist, traveltime_std, traveltime_curr, "
                                 "id_locations_t) VALUES (?,?,?,?,?) ON CONFLICT (timestamp_t, id_locations_t) "
                                 "DO NOTHING");
    auto ts = r.timestamp.str();
    st.bind(1, std::string_view(ts)).bind(2, r.traveldist).bind(3, r.traveltime_std).bind(4, r.traveltime_curr);
    st.bind(5, r.location);
    st.step();
    return sqlite3_changes(db()) ? InsertOutcome::inserted : InsertOutcome::duplicate;
}

InsertOutcome Store::insert(const PollutionRecord& r)
{
    std::lock_guard lock(mutex_);
    require_location("locations_p", "id_locations_p", r.location);
    auto& st = stmts_->get(db(), "INSERT INTO pollutions (timestamp_p, pm10, o3, co, so2, no2, pm25, id_locations_p) "
                                 "VALUES (?,?,?,?,?,?,?,?) ON CONFLICT (timestamp_p, id_locations_p) DO NOTHING");
    auto ts = r.timestamp.str();
    st.bind(1, std::string_view(ts));
    for (std::size_t c = 0; c < r.readings.size(); ++c)
        st.bind(static_cast<int>(c) + 2, r.readings[c]);
    st.bind(8, r.location);
    st.step();
    return sqlite3_changes(db()) ? InsertOutcome::inserted : InsertOutcome::duplicate;
}

std::optional<WeatherRecord> Store::fetch_weather(LocationId location, const LocalDateTime& ts) const
{
    std::lock_guard lock(mutex_);
    auto& st = stmts_->get(
        db(), "SELECT w.timestamp_w, tz.time_zone, w.temp, w.dewpt, w.hum, w.wspd, w.wgust, w.wdird, d.wdire, "
              "w.pressure, w.windchill, w.heatindex, w.preciprate, w.preciptotal, w.solarradiation, w.uv, w.vis, "
              "w.precip, c.cond, i.icon, w.fog, w.rain, w.snow, w.hail, w.thunder, w.tornado, w.metar, "
              "w.id_locations_w FROM weathers w "
              "JOIN time_zones tz ON tz.id_time_zone = w.id_time_zone "
              "LEFT JOIN wdires d ON d.id_wdire = w.id_wdire "
              "LEFT JOIN conds c ON c.id_cond = w.id_cond "
              "LEFT JOIN icons i ON i.id_icon = w.id_icon "
              "WHERE w.id_locations_w = ? AND w.timestamp_w = ?");
    auto key = ts.str();
    st.bind(1, location).bind(2, std::string_view(key));
    if (!st.step())
        return std::nullopt;
    WeatherRecord r;
    int i = 0;
    r.timestamp = LocalDateTime::parse(st.str(i++));
    r.time_zone = st.str(i++);
    r.temp = st.opt_real(i++);
    r.dewpt = st.opt_real(i++);
    r.hum = st.opt_real(i++);
    r.wspd = st.opt_real(i++);
    r.wgust = st.opt_real(i++);
    r.wdird = st.opt_real(i++);
    r.wdire = st.opt_str(i++);
    r.pressure = st.opt_real(i++);
    r.windchill = st.opt_real(i++);
    r.heatindex = st.opt_real(i++);
    r.preciprate = st.opt_real(i++);
    r.preciptotal = st.opt_real(i++);
    r.solarradiation = st.opt_real(i++);
    r.uv = st.opt_real(i++);
    r.vis = st.opt_real(i++);
    r.precip = st.opt_real(i++);
    r.cond = st.opt_str(i++);
    r.icon = st.opt_str(i++);
    for (const auto& f : weather_flags) {
        if (!st.is_null(i))
            r.*f.member = st.int64(i) != 0;
        ++i;
    }
    r.metar = st.opt_str(i++);
    r.location = st.int64(i++);
    st.reset();
    return r;
}

std::optional<TrafficRecord> Store::fetch_traffic(LocationId location, const LocalDateTime& ts) const
{
    std::lock_guard lock(mutex_);
    auto& st = stmts_->get(db(), "SELECT traveldist, traveltime_std, traveltime_curr FROM traffics "
                                 "WHERE id_locations_t = ? AND timestamp_t = ?");
    auto key = ts.str();
    st.bind(1, location).bind(2, std::string_view(key));
    if (!st.step())
        return std::nullopt;
    TrafficRecord r{ts, st.real(0), st.real(1), st.real(2), location};
    st.reset();
    return r;
}

std::optional<PollutionRecord> Store::fetch_pollution(LocationId location, const LocalDateTime& ts) const
{
    std::lock_guard lock(mutex_);
    auto& st = stmts_->get(db(), "SELECT pm10, o3, co, so2, no2, pm25 FROM pollutions "
                                 "WHERE id_locations_p = ? AND timestamp_p = ?");
    auto key = ts.str();
    st.bind(1, location).bind(2, std::string_view(key));
    if (!st.step())
        return std::nullopt;
    PollutionRecord r;
    r.timestamp = ts;
    r.location = location;
    for (int c = 0; c < 6; ++c)
        if (!st.is_null(c))
            r.readings[static_cast<std::size_t>(c)] = static_cast<int>(st.int64(c));
    st.reset();
    return r;
}

// ---------------------------------------------------------------------------
// Queries and reports
// ---------------------------------------------------------------------------

QueryResult Store::query_attribute(RecordTable table, std::span<const std::string> attributes,
                                   std::span<const LocationId> locations, const TimeRange& range) const
{
    const auto& known = record_attributes(table);
    for (const auto& a : attributes)
        if (std::find(known.begin(), known.end(), a) == known.end())
            throw QueryError("unknown attribute '" + a + "' in " + std::string(table_name(table)));
    if (range.to < range.from)
        throw QueryError("time range starts after it ends");

    QueryResult result;
    result.table = table;
    result.attributes.assign(attributes.begin(), attributes.end());
    if (locations.empty())
        return result;

    std::vector<LocationId> ids(locations.begin(), locations.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

    std::string ts_col(timestamp_column(table));
    std::string loc_col(location_column(table));
    std::string sql = "SELECT " + ts_col + ", " + loc_col;
    for (const auto& a : attributes)
        sql += ", " + a;
    sql += " FROM " + std::string(table_name(table)) + " WHERE " + loc_col + " IN (" + placeholders(ids.size()) +
           ") AND " + ts_col + " BETWEEN ? AND ? ORDER BY " + loc_col + ", " + ts_col;

    std::lock_guard lock(mutex_);
    Stmt st(db(), sql);
    int i = 1;
    for (auto id : ids)
        st.bind(i++, id);
    auto from = range.from.str();
    auto to = range.to.str();
    st.bind(i, std::string_view(from));
    st.bind(i + 1, std::string_view(to));
    while (st.step()) {
        QueryRow row;
        row.timestamp = LocalDateTime::parse(st.str(0));
        row.location = st.int64(1);
        row.values.reserve(attributes.size());
        for (std::size_t a = 0; a < attributes.size(); ++a) {
            int col = static_cast<int>(a) + 2;
            switch (st.type(col)) {
            case SQLITE_NULL:
                row.values.emplace_back(std::nullopt);
                break;
            case SQLITE_TEXT:
                row.values.emplace_back(Value{st.str(col)});
                break;
            default:
                row.values.emplace_back(Value{st.real(col)});
            }
        }
        result.rows.push_back(std::move(row));
    }
    return result;
}

NonEmptySummary Store::summarize_nonempty() const
{
    std::lock_guard lock(mutex_);
    NonEmptySummary summary;
    for (auto t : all_record_tables) {
        Stmt st(db(), "SELECT COUNT(DISTINCT substr(" + std::string(timestamp_column(t)) + ", 1, 7)) FROM " +
                          std::string(table_name(t)));
        st.step();
        summary.months[t] = st.int64(0);
    }
    for (const auto& [table, attr] : report_attributes()) {
        Stmt st(db(), "SELECT COUNT(" + attr + ") FROM " + std::string(table_name(table)));
        st.step();
        AttributeSummary a{table, attr, st.int64(0), 0.0};
        auto months = summary.months[table];
        a.monthly_average = months ? static_cast<double>(a.non_empty) / static_cast<double>(months) : 0.0;
        summary.attributes.push_back(std::move(a));
    }
    return summary;
}

IntegrityReport Store::check_integrity() const
{
    std::lock_guard lock(mutex_);
    IntegrityReport report;
    for (const auto& table : catalog().tables) {
        for (const auto& fk : table.foreign_keys) {
            Stmt st(db(), "SELECT COUNT(*) FROM " + table.name + " c LEFT JOIN " + fk.table + " p ON p." +
                              fk.ref_column + " = c." + fk.column + " WHERE c." + fk.column +
                              " IS NOT NULL AND p." + fk.ref_column + " IS NULL");
            st.step();
            auto n = st.int64(0);
            if (n > 0) {
                report.dangling.push_back(table.name + "." + fk.column + " -> " + fk.table + ": " +
                                          std::to_string(n));
                report.dangling_rows += n;
            }
        }
    }
    return report;
}

std::int64_t Store::row_count(std::string_view table) const
{
    const auto& names = schema_table_names();
    if (std::find(names.begin(), names.end(), table) == names.end())
        throw QueryError("unknown table '" + std::string(table) + "'");
    std::lock_guard lock(mutex_);
    Stmt st(db(), "SELECT COUNT(*) FROM " + std::string(table));
    st.step();
    return st.int64(0);
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

std::string csv_field(std::string_view v, bool force_quotes)
{
    bool quote = force_quotes || v.find_first_of(",\"\r\n") != std::string_view::npos;
    if (!quote)
        return std::string(v);
    std::string out = "\"";
    for (char c : v) {
        if (c == '"')
            out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

struct CsvField {
    std::string text;
    bool quoted = false;
};

std::vector<std::vector<CsvField>> parse_csv_records(std::string_view body)
{
    std::vector<std::vector<CsvField>> records;
    std::vector<CsvField> record;
    CsvField field;
    std::size_t line = 1;
    std::size_t i = 0;
    bool field_started = false;
    auto end_field = [&] {
        record.push_back(std::move(field));
        field = CsvField{};
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
    };
    while (i < body.size()) {
        char c = body[i];
        if (c == '"' && !field_started) {
            field.quoted = true;
            field_started = true;
            ++i;
            bool closed = false;
            while (i < body.size()) {
                if (body[i] == '"') {
                    if (i + 1 < body.size() && body[i + 1] == '"') {
                        field.text.push_back('"');
                        i += 2;
                        continue;
                    }
                    ++i;
                    closed = true;
                    break;
                }
                if (body[i] == '\n')
                    ++line;
                field.text.push_back(body[i++]);
            }
            if (!closed)
                throw ParseError("unterminated quoted CSV field", line, 1);
            if (i < body.size() && body[i] != ',' && body[i] != '\n' && body[i] != '\r')
                throw ParseError("text after closing quote", line, 1);
            continue;
        }
        if (c == ',') {
            end_field();
            ++i;
        } else if (c == '\r' || c == '\n') {
            end_record();
            if (c == '\r' && i + 1 < body.size() && body[i + 1] == '\n')
                ++i;
            ++i;
            ++line;
        } else {
            if (field.quoted)
                throw ParseError("text after closing quote", line, 1);
            field.text.push_back(c);
            field_started = true;
            ++i;
        }
    }
    if (field_started || !record.empty())
        end_record();
    return records;
}

} // namespace

std::string export_csv(const QueryResult& result)
{
    std::string out;
    out += timestamp_column(result.table);
    out += ',';
    out += location_column(result.table);
    for (const auto& a : result.attributes) {
        out += ',';
        out += a;
    }
    out += '\n';
    for (const auto& row : result.rows) {
        out += row.timestamp.str();
        out += ',';
        out += std::to_string(row.location);
        for (const auto& cell : row.values) {
            out += ',';
            if (!cell)
                continue;
            if (const auto* d = std::get_if<double>(&*cell))
                out += text::format_number(*d);
            else {
                const auto& s = std::get<std::string>(*cell);
                out += csv_field(s, s.empty());
            }
        }
        out += '\n';
    }
    return out;
}

QueryResult import_csv(std::string_view body)
{
    auto records = parse_csv_records(body);
    if (records.empty())
        throw ParseError("CSV without header");
    const auto& header = records.front();
    if (header.size() < 2)
        throw ParseError("CSV header needs timestamp and location columns", 1, 1);

    QueryResult result;
    std::optional<RecordTable> table;
    for (auto t : all_record_tables)
        if (header[0].text == timestamp_column(t) && header[1].text == location_column(t))
            table = t;
    if (!table)
        throw ParseError("CSV header does not name a record table's timestamp and location columns", 1, 1);
    result.table = *table;
    const auto& known = record_attributes(*table);
    for (std::size_t i = 2; i < header.size(); ++i) {
        if (std::find(known.begin(), known.end(), header[i].text) == known.end())
            throw ParseError("unknown attribute '" + header[i].text + "'", 1, i + 1);
        result.attributes.push_back(header[i].text);
    }

    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                                 std::to_string(rec.size()),
                             r + 1, 1);
        QueryRow row;
        row.timestamp = LocalDateTime::parse(rec[0].text);
        auto loc = text::parse_number(rec[1].text);
        if (!loc)
            throw ParseError("bad location id '" + rec[1].text + "'", r + 1, 1);
        row.location = static_cast<LocationId>(*loc);
        for (std::size_t i = 2; i < rec.size(); ++i) {
            const auto& f = rec[i];
            if (f.text.empty() && !f.quoted) {
                row.values.emplace_back(std::nullopt);
            } else if (is_text_attribute(*table, result.attributes[i - 2])) {
                row.values.emplace_back(Value{f.text});
            } else {
                auto v = text::parse_number(f.text);
                if (!v)
                    throw ParseError("non-numeric value '" + f.text + "' for " + result.attributes[i - 2], r + 1,
                                     i + 1);
                row.values.emplace_back(Value{*v});
            }
        }
        result.rows.push_back(std::move(row));
    }
    return result;
}

} // namespace mwtp
