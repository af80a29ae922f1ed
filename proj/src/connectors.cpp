#include "mwtp/connectors.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <tuple>

#include "mwtp/errors.hpp"
#include "mwtp/text.hpp"

namespace mwtp {

std::string_view source_kind_name(SourceKind k)
{
    switch (k) {
    case SourceKind::weather:
        return "weather";
    case SourceKind::traffic:
        return "traffic";
    case SourceKind::pollution:
        return "pollution";
    }
    return "?";
}

void QuarantineSink::add(QuarantinedItem item)
{
    std::lock_guard lock(mutex_);
    items_.push_back(std::move(item));
}

std::vector<QuarantinedItem> QuarantineSink::items() const
{
    std::lock_guard lock(mutex_);
    return items_;
}

std::size_t QuarantineSink::size() const
{
    std::lock_guard lock(mutex_);
    return items_.size();
}

namespace {

void require_kind(const SourcePayload& payload, SourceKind kind)
{
    if (payload.kind != kind)
        throw PreconditionError("payload from '" + payload.origin + "' is " +
                                std::string(source_kind_name(payload.kind)) + ", expected " +
                                std::string(source_kind_name(kind)));
}

bool is_comment_or_blank(std::string_view line)
{
    auto t = text::trim(line);
    return t.empty() || t.front() == '#';
}

// ---------------------------------------------------------------------------
// Weather line grammar
// ---------------------------------------------------------------------------

enum class WeatherKey { number, flag, code, metar };

struct KeyInfo {
    WeatherKey kind;
    bool airport_only;
};

std::optional<KeyInfo> weather_key(std::string_view key)
{
    for (const auto& a : weather_numbers)
        if (a.name == key)
            return KeyInfo{WeatherKey::number, a.airport_only};
    for (const auto& a : weather_flags)
        if (a.name == key)
            return KeyInfo{WeatherKey::flag, true};
    for (const auto& a : weather_codes)
        if (a.name == key)
            return KeyInfo{WeatherKey::code, false};
    if (key == "metar")
        return KeyInfo{WeatherKey::metar, true};
    return std::nullopt;
}

class LineCursor {
public:
    LineCursor(std::string_view line, std::size_t line_no) : line_(line), line_no_(line_no) {}

    bool at_end()
    {
        skip_ws();
        return pos_ >= line_.size();
    }

    std::size_t column() const { return pos_ + 1; }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_no_, column()); }

    std::string_view bare_token()
    {
        skip_ws();
        auto start = pos_;
        while (pos_ < line_.size() && line_[pos_] != ' ' && line_[pos_] != '\t')
            ++pos_;
        return line_.substr(start, pos_ - start);
    }

    /// key=value, value bare or double-quoted with \" and \\ escapes.
    std::pair<std::string, std::string> pair()
    {
        skip_ws();
        auto start = pos_;
        while (pos_ < line_.size() && line_[pos_] != '=' && line_[pos_] != ' ' && line_[pos_] != '\t')
            ++pos_;
        if (pos_ >= line_.size() || line_[pos_] != '=') {
            pos_ = start;
            fail("expected key=value");
        }
        std::string key(line_.substr(start, pos_ - start));
        if (key.empty())
            fail("empty key");
        ++pos_;
        std::string value;
        if (pos_ < line_.size() && line_[pos_] == '"') {
            ++pos_;
            bool closed = false;
            while (pos_ < line_.size()) {
                char c = line_[pos_++];
                if (c == '\\') {
                    if (pos_ >= line_.size())
                        fail("dangling escape");
                    char e = line_[pos_++];
                    if (e != '"' && e != '\\')
                        fail("unknown escape");
                    value.push_back(e);
                } else if (c == '"') {
                    closed = true;
                    break;
                } else {
                    value.push_back(c);
                }
            }
            if (!closed)
                fail("unterminated quoted value");
        } else {
            auto vstart = pos_;
            while (pos_ < line_.size() && line_[pos_] != ' ' && line_[pos_] != '\t') {
                if (line_[pos_] == '"')
                    fail("quote inside bare value");
                ++pos_;
            }
            value = std::string(line_.substr(vstart, pos_ - vstart));
            if (value.empty())
                fail("empty value for '" + key + "'");
        }
        if (pos_ < line_.size() && line_[pos_] != ' ' && line_[pos_] != '\t')
            fail("expected whitespace after value");
        return {std::move(key), std::move(value)};
    }

private:
    void skip_ws()
    {
        while (pos_ < line_.size() && (line_[pos_] == ' ' || line_[pos_] == '\t'))
            ++pos_;
    }

    std::string_view line_;
    std::size_t line_no_;
    std::size_t pos_ = 0;
};

bool needs_quotes(std::string_view v)
{
    if (v.empty())
        return true;
    return std::any_of(v.begin(), v.end(), [](char c) { return c == ' ' || c == '\t' || c == '"' || c == '\\'; });
}

std::string quote_if_needed(std::string_view v)
{
    if (!needs_quotes(v))
        return std::string(v);
    std::string out = "\"";
    for (char c : v) {
        if (c == '"' || c == '\\')
            out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string two_digits(int v)
{
    std::string s = std::to_string(v);
    return s.size() < 2 ? "0" + s : s;
}

} // namespace

// ---------------------------------------------------------------------------
// Weather
// ---------------------------------------------------------------------------

std::vector<RawWeather> parse_weather_observations(const SourcePayload& payload, const LocationIndex& index,
                                                   QuarantineSink& quarantine)
{
    require_kind(payload, SourceKind::weather);
    std::vector<RawWeather> out;
    auto all = text::lines(payload.body);
    for (std::size_t i = 0; i < all.size(); ++i) {
        auto line = all[i];
        if (is_comment_or_blank(line))
            continue;
        const std::size_t line_no = i + 1;
        LineCursor cur(line, line_no);

        RawWeather raw;
        raw.station = std::string(cur.bare_token());
        auto ts_col = cur.column();
        auto ts = cur.bare_token();
        if (ts.empty())
            cur.fail("missing timestamp");
        try {
            raw.timestamp = LocalDateTime::parse(ts);
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line_no, ts_col + 1);
        }
        bool airport_field = false;
        while (!cur.at_end()) {
            auto col = cur.column();
            auto [key, value] = cur.pair();
            auto info = weather_key(key);
            if (!info)
                throw ParseError("unknown attribute '" + key + "'", line_no, col);
            airport_field = airport_field || info->airport_only;
            if (!raw.fields.emplace(key, std::move(value)).second)
                throw ParseError("repeated attribute '" + key + "'", line_no, col);
        }
        raw.provenance = Provenance{payload.origin, payload.fetched_at, line_no};

        auto it = index.weather.find(raw.station);
        if (it == index.weather.end()) {
            quarantine.add({SourceKind::weather, payload.origin, line_no, "unknown station '" + raw.station + "'",
                            std::string(line)});
            continue;
        }
        if (airport_field && !it->second.airport) {
            quarantine.add({SourceKind::weather, payload.origin, line_no,
                            "airport-only attribute at personal station '" + raw.station + "'", std::string(line)});
            continue;
        }
        raw.location = it->second.id;
        raw.airport = it->second.airport;
        raw.time_zone = it->second.time_zone;
        out.push_back(std::move(raw));
    }
    return out;
}

std::string format_weather_line(std::string_view station_file_id, const WeatherRecord& r)
{
    std::string line(station_file_id);
    line += ' ';
    line += r.timestamp.iso();
    // Column order of the weathers table.
    auto put = [&](std::string_view key, const std::string& value) {
        line += ' ';
        line += key;
        line += '=';
        line += quote_if_needed(value);
    };
    auto number = [&](std::string_view key, const std::optional<double>& v) {
        if (v)
            put(key, text::format_number(*v));
    };
    auto code = [&](std::string_view key, const std::optional<std::string>& v) {
        if (v)
            put(key, *v);
    };
    number("temp", r.temp);
    number("dewpt", r.dewpt);
    number("hum", r.hum);
    number("wspd", r.wspd);
    number("wgust", r.wgust);
    number("wdird", r.wdird);
    code("wdire", r.wdire);
    number("pressure", r.pressure);
    number("windchill", r.windchill);
    number("heatindex", r.heatindex);
    number("preciprate", r.preciprate);
    number("preciptotal", r.preciptotal);
    number("solarradiation", r.solarradiation);
    number("uv", r.uv);
    number("vis", r.vis);
    number("precip", r.precip);
    code("cond", r.cond);
    code("icon", r.icon);
    for (const auto& f : weather_flags)
        if (const auto& v = r.*f.member)
            put(f.name, *v ? "1" : "0");
    code("metar", r.metar);
    return line;
}

std::string format_weather_observations(std::string_view station_file_id, std::span<const WeatherRecord> records)
{
    std::string body;
    for (const auto& r : records) {
        body += format_weather_line(station_file_id, r);
        body += '\n';
    }
    return body;
}

RawWeather to_raw(const WeatherRecord& r, std::string_view station_file_id, bool airport)
{
    RawWeather raw;
    raw.station = std::string(station_file_id);
    raw.timestamp = r.timestamp;
    raw.location = r.location;
    raw.airport = airport;
    raw.time_zone = r.time_zone;
    for (const auto& a : weather_numbers)
        if (const auto& v = r.*a.member)
            raw.fields.emplace(a.name, text::format_number(*v));
    for (const auto& a : weather_codes)
        if (const auto& v = r.*a.member)
            raw.fields.emplace(a.name, *v);
    for (const auto& a : weather_flags)
        if (const auto& v = r.*a.member)
            raw.fields.emplace(a.name, *v ? "1" : "0");
    if (r.metar)
        raw.fields.emplace("metar", *r.metar);
    return raw;
}

// ---------------------------------------------------------------------------
// Traffic
// ---------------------------------------------------------------------------

namespace {

constexpr std::array<std::string_view, 5> traffic_columns{"route", "timestamp", "traveldist", "traveltime_std",
                                                          "traveltime_curr"};

RawTraffic parse_traffic_line(std::string_view line, std::size_t line_no, const SourcePayload& payload)
{
    auto tokens = text::split_ws(line);
    if (tokens.size() < traffic_columns.size())
        throw ParseError("incomplete registry: missing " + std::string(traffic_columns[tokens.size()]), line_no,
                         line.size() + 1);
    if (tokens.size() > traffic_columns.size())
        throw ParseError("unexpected token '" + std::string(tokens[5]) + "'", line_no,
                         static_cast<std::size_t>(tokens[5].data() - line.data()) + 1);
    RawTraffic raw;
    raw.route = std::string(tokens[0]);
    try {
        raw.timestamp = LocalDateTime::parse(tokens[1]);
    } catch (const ParseError& e) {
        throw ParseError(e.what(), line_no, static_cast<std::size_t>(tokens[1].data() - line.data()) + 1);
    }
    raw.traveldist = std::string(tokens[2]);
    raw.traveltime_std = std::string(tokens[3]);
    raw.traveltime_curr = std::string(tokens[4]);
    raw.provenance = Provenance{payload.origin, payload.fetched_at, line_no};
    return raw;
}

} // namespace

std::vector<RawTraffic> parse_traffic_lines(const SourcePayload& payload, const LocationIndex& index,
                                            QuarantineSink& quarantine)
{
    require_kind(payload, SourceKind::traffic);
    std::vector<RawTraffic> out;
    auto all = text::lines(payload.body);
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (is_comment_or_blank(all[i]))
            continue;
        auto raw = parse_traffic_line(all[i], i + 1, payload);
        auto it = index.routes.find(raw.route);
        if (it == index.routes.end()) {
            quarantine.add({SourceKind::traffic, payload.origin, i + 1, "unknown route '" + raw.route + "'",
                            std::string(all[i])});
            continue;
        }
        raw.location = it->second;
        out.push_back(std::move(raw));
    }
    return out;
}

RawTraffic parse_traffic_response(const SourcePayload& payload, const TrafficRoute& route)
{
    require_kind(payload, SourceKind::traffic);
    std::optional<RawTraffic> found;
    auto all = text::lines(payload.body);
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (is_comment_or_blank(all[i]))
            continue;
        if (found)
            throw ParseError("more than one registry in a single response", i + 1, 1);
        auto raw = parse_traffic_line(all[i], i + 1, payload);
        if (raw.route != route.file_id)
            throw ParseError("response is for route '" + raw.route + "', expected '" + route.file_id + "'", i + 1,
                             1);
        raw.location = route.id;
        found = std::move(raw);
    }
    if (!found)
        throw ParseError("empty traffic response from '" + payload.origin + "'");
    return *found;
}

std::string format_traffic_line(std::string_view route_file_id, const TrafficRecord& r)
{
    std::string line(route_file_id);
    line += ' ';
    line += r.timestamp.iso();
    line += ' ';
    line += text::format_number(r.traveldist);
    line += ' ';
    line += text::format_number(r.traveltime_std);
    line += ' ';
    line += text::format_number(r.traveltime_curr);
    return line;
}

RawTraffic to_raw(const TrafficRecord& r, std::string_view route_file_id)
{
    RawTraffic raw;
    raw.route = std::string(route_file_id);
    raw.timestamp = r.timestamp;
    raw.location = r.location;
    raw.traveldist = text::format_number(r.traveldist);
    raw.traveltime_std = text::format_number(r.traveltime_std);
    raw.traveltime_curr = text::format_number(r.traveltime_curr);
    return raw;
}

// ---------------------------------------------------------------------------
// Pollution
// ---------------------------------------------------------------------------

std::vector<RawPollutionCell> parse_pollution_tables(const SourcePayload& payload, const LocationIndex& index,
                                                     QuarantineSink& quarantine)
{
    require_kind(payload, SourceKind::pollution);

    struct Block {
        std::string station;
        Contaminant contaminant;
        Date date;
        std::optional<LocationId> location;
    };
    std::optional<Block> block;
    std::set<std::tuple<std::string, Date, int, Contaminant>> seen;
    std::vector<RawPollutionCell> out;

    auto all = text::lines(payload.body);
    for (std::size_t i = 0; i < all.size(); ++i) {
        auto line = all[i];
        const std::size_t line_no = i + 1;
        if (is_comment_or_blank(line))
            continue;
        auto tokens = text::split_ws(line);
        auto col_of = [&](std::string_view tok) { return static_cast<std::size_t>(tok.data() - line.data()) + 1; };

        if (text::starts_with(text::trim(line), "station=")) {
            std::optional<std::string> station;
            std::optional<Contaminant> contaminant;
            std::optional<Date> date;
            for (auto tok : tokens) {
                auto eq = tok.find('=');
                if (eq == std::string_view::npos)
                    throw ParseError("expected key=value in table header", line_no, col_of(tok));
                auto key = tok.substr(0, eq);
                auto value = tok.substr(eq + 1);
                if (key == "station" && !station) {
                    station = std::string(value);
                } else if (key == "contaminant" && !contaminant) {
                    contaminant = contaminant_from_tag(value);
                    if (!contaminant)
                        throw ParseError("unknown contaminant '" + std::string(value) + "'", line_no,
                                         col_of(tok) + eq + 1);
                } else if (key == "date" && !date) {
                    try {
                        date = Date::parse(value);
                    } catch (const ParseError& e) {
                        throw ParseError(e.what(), line_no, col_of(tok) + eq + 1);
                    }
                } else {
                    throw ParseError("unexpected header field '" + std::string(key) + "'", line_no, col_of(tok));
                }
            }
            if (!station || station->empty() || !contaminant || !date)
                throw ParseError("table header needs station, contaminant and date", line_no, 1);
            block = Block{*station, *contaminant, *date, std::nullopt};
            if (auto it = index.pollution.find(*station); it != index.pollution.end())
                block->location = it->second;
            else
                quarantine.add({SourceKind::pollution, payload.origin, line_no,
                                "unknown station '" + *station + "'", std::string(line)});
            continue;
        }

        if (!block)
            throw ParseError("hourly cell before any table header", line_no, 1);
        if (tokens.size() > 2)
            throw ParseError("unexpected token '" + std::string(tokens[2]) + "'", line_no, col_of(tokens[2]));
        auto hhmm = tokens[0];
        if (hhmm.size() != 5 || hhmm[2] != ':' || !std::isdigit(static_cast<unsigned char>(hhmm[0])) ||
            !std::isdigit(static_cast<unsigned char>(hhmm[1])) || !std::isdigit(static_cast<unsigned char>(hhmm[3])) ||
            !std::isdigit(static_cast<unsigned char>(hhmm[4])))
            throw ParseError("expected HH:MM", line_no, col_of(hhmm));
        int hour = (hhmm[0] - '0') * 10 + (hhmm[1] - '0');
        int minute = (hhmm[3] - '0') * 10 + (hhmm[4] - '0');
        if (hour > 23 || minute != 0)
            throw ParseError("hourly table time must be HH:00", line_no, col_of(hhmm));
        if (hour < 2)
            throw ParseError("hours 00 and 01 are never reported", line_no, col_of(hhmm));

        std::optional<std::string> value;
        if (tokens.size() == 2 && tokens[1] != pollution_dash && tokens[1] != "-")
            value = std::string(tokens[1]);

        if (!seen.emplace(block->station, block->date, hour, block->contaminant).second)
            throw ConflictError("repeated cell for station '" + block->station + "' " +
                                    std::string(contaminant_tag(block->contaminant)) + " at " + two_digits(hour) +
                                    ":00",
                                line_no, col_of(hhmm));
        if (!block->location)
            continue; // quarantined with its header

        RawPollutionCell cell;
        cell.station = block->station;
        cell.location = block->location;
        cell.contaminant = block->contaminant;
        cell.timestamp = LocalDateTime::at(block->date, hour);
        cell.value = std::move(value);
        cell.provenance = Provenance{payload.origin, payload.fetched_at, line_no};
        out.push_back(std::move(cell));
    }
    return out;
}

std::vector<PollutionCandidate> assemble_station_day(std::span<const RawPollutionCell> cells,
                                                     const PollutionStation& station, Date day)
{
    std::map<int, PollutionCandidate> by_hour;
    std::set<std::pair<int, Contaminant>> seen;
    for (const auto& c : cells) {
        if (c.station != station.file_id)
            throw PreconditionError("cell from station '" + c.station + "' while assembling '" + station.file_id +
                                    "'");
        if (c.timestamp.date != day)
            throw PreconditionError("cell dated " + c.timestamp.date.str() + " while assembling " + day.str());
        if (!seen.emplace(c.timestamp.hour, c.contaminant).second)
            throw ConflictError("repeated " + std::string(contaminant_tag(c.contaminant)) + " cell at " +
                                c.timestamp.str());
        auto& cand = by_hour[c.timestamp.hour];
        if (cand.station.empty()) {
            cand.station = station.file_id;
            cand.location = station.id != 0 ? std::optional<LocationId>(station.id) : c.location;
            cand.timestamp = LocalDateTime::at(day, c.timestamp.hour);
        }
        cand.reading(c.contaminant) = c.value;
    }
    std::vector<PollutionCandidate> out;
    out.reserve(by_hour.size());
    for (auto& [hour, cand] : by_hour)
        out.push_back(std::move(cand));
    return out;
}

std::string format_pollution_day(std::string_view station_file_id, Date day, std::span<const PollutionRecord> records)
{
    std::vector<const PollutionRecord*> sorted;
    for (const auto& r : records)
        sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->timestamp < b->timestamp; });

    std::string body;
    for (auto c : all_contaminants) {
        body += "station=";
        body += station_file_id;
        body += " contaminant=";
        body += contaminant_tag(c);
        body += " date=";
        body += day.str();
        body += '\n';
        for (const auto* r : sorted) {
            body += two_digits(r->timestamp.hour);
            body += ":00 ";
            if (const auto& v = r->reading(c))
                body += std::to_string(*v);
            else
                body += pollution_dash;
            body += '\n';
        }
    }
    return body;
}

PollutionCandidate to_raw(const PollutionRecord& r, std::string_view station_file_id)
{
    PollutionCandidate cand;
    cand.station = std::string(station_file_id);
    cand.location = r.location;
    cand.timestamp = r.timestamp;
    for (auto c : all_contaminants)
        if (const auto& v = r.reading(c))
            cand.reading(c) = std::to_string(*v);
    return cand;
}

} // namespace mwtp
