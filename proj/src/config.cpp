#include "mwtp/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "mwtp/errors.hpp"
#include "mwtp/text.hpp"

namespace mwtp {

namespace {

enum class Section { none, store, time_zones, conds, icons, weather_stations, pollution_stations, points, cadence, rules,
                     synth, run };

Section section_from_name(std::string_view name, std::size_t line)
{
    static const std::pair<std::string_view, Section> names[] = {
        {"store", Section::store},
        {"time_zones", Section::time_zones},
        {"conds", Section::conds},
        {"icons", Section::icons},
        {"weather_stations", Section::weather_stations},
        {"pollution_stations", Section::pollution_stations},
        {"points", Section::points},
        {"cadence", Section::cadence},
        {"rules", Section::rules},
        {"synth", Section::synth},
        {"run", Section::run},
    };
    for (const auto& [n, s] : names)
        if (n == name)
            return s;
    throw ParseError("unknown section [" + std::string(name) + "]", line, 1);
}

/// Everything after the first `skip` tokens, with inner spacing kept.
std::string rest_after(std::string_view line, const std::vector<std::string_view>& tokens, std::size_t skip)
{
    if (tokens.size() <= skip)
        return {};
    auto offset = static_cast<std::size_t>(tokens[skip].data() - line.data());
    return std::string(text::trim(line.substr(offset)));
}

double number(std::string_view tok, std::size_t line, std::string_view what)
{
    auto v = text::parse_number(tok);
    if (!v)
        throw ParseError(std::string(what) + ": '" + std::string(tok) + "' is not a number", line, 1);
    return *v;
}

int integer(std::string_view tok, std::size_t line, std::string_view what)
{
    double v = number(tok, line, what);
    if (v != static_cast<double>(static_cast<int>(v)))
        throw ParseError(std::string(what) + ": '" + std::string(tok) + "' is not an integer", line, 1);
    return static_cast<int>(v);
}

std::pair<std::string, std::string> key_value(std::string_view line, std::size_t line_no, char sep = '=')
{
    auto pos = line.find(sep);
    if (pos == std::string_view::npos)
        throw ParseError(std::string("expected 'key ") + sep + " value'", line_no, 1);
    auto key = text::trim(line.substr(0, pos));
    if (key.empty())
        throw ParseError("empty key", line_no, 1);
    return {std::string(key), std::string(text::trim(line.substr(pos + 1)))};
}

/// Drops a '#' comment that starts the line or follows whitespace.
std::string_view strip_comment(std::string_view line)
{
    for (std::size_t i = 0; i < line.size(); ++i)
        if (line[i] == '#' && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t'))
            return text::trim(line.substr(0, i));
    return text::trim(line);
}

template <class Fn>
void rethrow_at(std::size_t line, Fn&& fn)
{
    try {
        fn();
    } catch (const ParseError& e) {
        throw ParseError(e.message(), line, e.column() ? e.column() : 1);
    } catch (const Error& e) {
        throw ParseError(e.what(), line, 1);
    }
}

} // namespace

Config Config::parse(std::string_view body, const std::filesystem::path& base_dir)
{
    Config cfg;
    Section section = Section::none;
    bool cadence_seen = false;
    RuleSet overrides;

    auto all = text::lines(body);
    for (std::size_t i = 0; i < all.size(); ++i) {
        const std::size_t line_no = i + 1;
        auto line = strip_comment(all[i]);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError("unterminated section header", line_no, 1);
            section = section_from_name(text::trim(line.substr(1, line.size() - 2)), line_no);
            if (section == Section::cadence && !cadence_seen) {
                cadence_seen = true;
                cfg.cadence.clear();
            }
            continue;
        }
        auto tokens = text::split_ws(line);
        switch (section) {
        case Section::none:
            throw ParseError("entry outside any section", line_no, 1);
        case Section::store: {
            auto [k, v] = key_value(line, line_no);
            if (k != "path")
                throw ParseError("unknown [store] key '" + k + "'", line_no, 1);
            cfg.store_path = v;
            break;
        }
        case Section::time_zones:
        case Section::conds:
        case Section::icons: {
            auto [k, v] = key_value(line, line_no);
            auto& seeds = section == Section::time_zones ? cfg.time_zones
                          : section == Section::conds    ? cfg.conds
                                                         : cfg.icons;
            seeds.push_back({k, v});
            break;
        }
        case Section::weather_stations: {
            if (tokens.size() < 9)
                throw ParseError("expected 'file_id pws|airport code lat long interval_min since tz software "
                                 "description'",
                                 line_no, 1);
            WeatherSite site;
            auto& st = site.station;
            st.file_id = std::string(tokens[0]);
            if (tokens[1] == "pws")
                st.station_id = std::string(tokens[2]);
            else if (tokens[1] == "airport")
                st.airport_code = std::string(tokens[2]);
            else
                throw ParseError("station kind must be pws or airport", line_no, 1);
            st.lat = number(tokens[3], line_no, "latitude");
            st.lon = number(tokens[4], line_no, "longitude");
            site.interval_min = integer(tokens[5], line_no, "interval");
            if (site.interval_min <= 0 || site.interval_min > 1440)
                throw ParseError("interval must be in 1..1440 minutes", line_no, 1);
            rethrow_at(line_no, [&] { st.since = Date::parse(tokens[6]); });
            site.time_zone = std::string(tokens[7]);
            if (tokens[8] != "-")
                st.software_type = std::string(tokens[8]);
            st.description = rest_after(line, tokens, 9);
            rethrow_at(line_no, [&] { st.check(); });
            cfg.weather.push_back(std::move(site));
            break;
        }
        case Section::pollution_stations: {
            if (tokens.size() < 3)
                throw ParseError("expected 'file_id lat long description'", line_no, 1);
            PollutionStation st;
            st.file_id = std::string(tokens[0]);
            st.lat = number(tokens[1], line_no, "latitude");
            st.lon = number(tokens[2], line_no, "longitude");
            st.description = rest_after(line, tokens, 3);
            rethrow_at(line_no, [&] { st.check(); });
            cfg.pollution.push_back(std::move(st));
            break;
        }
        case Section::points: {
            if (tokens.size() < 3)
                throw ParseError("expected 'name lat long description'", line_no, 1);
            cfg.points.push_back({std::string(tokens[0]), number(tokens[1], line_no, "latitude"),
                                  number(tokens[2], line_no, "longitude"), rest_after(line, tokens, 3)});
            break;
        }
        case Section::cadence: {
            if (tokens.size() != 4)
                throw ParseError("expected 'kind start end interval_min'", line_no, 1);
            auto kind = task_kind_from_name(tokens[0]);
            if (!kind)
                throw ParseError("unknown task kind '" + std::string(tokens[0]) + "'", line_no, 1);
            cfg.cadence.push_back({integer(tokens[1], line_no, "start hour"), integer(tokens[2], line_no, "end hour"),
                                   integer(tokens[3], line_no, "interval"), *kind});
            break;
        }
        case Section::rules:
            try {
                overrides.merge(RuleSet::parse(line));
            } catch (const ParseError& e) {
                throw ParseError(e.message(), line_no, e.column());
            }
            break;
        case Section::synth: {
            auto [k, v] = key_value(line, line_no);
            rethrow_at(line_no, [&] { cfg.synth.set(k, v); });
            break;
        }
        case Section::run: {
            auto [k, v] = key_value(line, line_no);
            if (k == "start")
                rethrow_at(line_no, [&] { cfg.start = Date::parse(v); });
            else if (k == "fixtures")
                cfg.fixtures = std::filesystem::path(v).is_absolute() ? std::filesystem::path(v) : base_dir / v;
            else
                throw ParseError("unknown [run] key '" + k + "'", line_no, 1);
            break;
        }
        }
    }

    cfg.rules.merge(overrides);
    cfg.synth.check();
    check_windows(cfg.cadence);
    if (cfg.time_zones.empty())
        cfg.time_zones.push_back({"CST", "Central Standard Time"});
    if (cfg.conds.empty())
        for (const auto& [code, desc] : synth_conditions())
            cfg.conds.push_back({code, desc});
    if (cfg.icons.empty())
        for (const auto& [code, desc] : synth_icons())
            cfg.icons.push_back({code, desc});

    std::set<std::string_view> ids;
    for (const auto& w : cfg.weather)
        if (!ids.insert(w.station.file_id).second)
            throw ConfigError("weather station '" + w.station.file_id + "' listed twice");
    ids.clear();
    for (const auto& p : cfg.pollution)
        if (!ids.insert(p.file_id).second)
            throw ConfigError("pollution station '" + p.file_id + "' listed twice");
    std::set<std::string_view> zones;
    for (const auto& tz : cfg.time_zones)
        zones.insert(tz.code);
    for (const auto& w : cfg.weather)
        if (!zones.count(w.time_zone))
            throw ConfigError("weather station '" + w.station.file_id + "' uses unknown time zone '" + w.time_zone +
                              "'");
    return cfg;
}

Config Config::load(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse(ss.str(), path.parent_path());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.message(), e.line(), e.column());
    }
}

Catalog Config::catalog() const
{
    Catalog c;
    c.weather = weather;
    c.pollution = pollution;
    if (!points.empty())
        c.routes = enumerate_routes(points);
    return c;
}

} // namespace mwtp
