#include "mwtp/validation.hpp"

#include <cmath>

#include "mwtp/domain.hpp"
#include "mwtp/errors.hpp"
#include "mwtp/text.hpp"

namespace mwtp {

namespace {

std::string bound_text(const std::optional<double>& b)
{
    return b ? text::format_number(*b) : std::string("-");
}

std::optional<double> parse_bound(std::string_view tok, std::size_t line_no, std::string_view line)
{
    if (tok == "-")
        return std::nullopt;
    auto v = text::parse_number(tok);
    if (!v)
        throw ParseError("bad bound '" + std::string(tok) + "'", line_no,
                         static_cast<std::size_t>(tok.data() - line.data()) + 1);
    return v;
}

std::string record_key(const std::optional<LocalDateTime>& ts, const std::optional<LocationId>& loc)
{
    return (ts ? ts->str() : std::string("?")) + " @ " + (loc ? std::to_string(*loc) : std::string("?"));
}

/// Checks `value` against the rule for table.attribute; returns the reason
/// it fails, or nullopt.
std::optional<std::string> range_failure(const RuleSet& rules, std::string_view table, std::string_view attribute,
                                         double value)
{
    const auto* rule = rules.find(table, attribute);
    if (rule && !rule->admits(value))
        return "range " + bound_text(rule->min) + ".." + bound_text(rule->max);
    return std::nullopt;
}

} // namespace

std::string RangeRule::str() const
{
    return table + "." + attribute + " " + bound_text(min) + " " + bound_text(max);
}

RuleSet RuleSet::defaults()
{
    RuleSet s;
    auto add = [&](std::string_view table, std::string_view attr, std::optional<double> lo, std::optional<double> hi) {
        s.set(RangeRule{std::string(table), std::string(attr), lo, hi});
    };
    add("weathers", "temp", -30, 55);
    add("weathers", "dewpt", -30, 55);
    add("weathers", "hum", 0, 100);
    add("weathers", "wspd", 0, 200);
    add("weathers", "wgust", 0, 200);
    add("weathers", "wdird", 0, 360);
    add("weathers", "pressure", 850, 1100);
    add("weathers", "windchill", -60, 30);
    add("weathers", "heatindex", 0, 70);
    add("weathers", "preciprate", 0, 300);
    add("weathers", "preciptotal", 0, 500);
    add("weathers", "solarradiation", 0, 1500);
    add("weathers", "uv", 0, 16);
    add("weathers", "vis", 0, 50);
    add("weathers", "precip", 0, 500);
    for (const auto& f : weather_flags)
        add("weathers", f.name, 0, 1);
    add("traffics", "traveldist", 1, 200000);
    add("traffics", "traveltime_std", 1, 86400);
    add("traffics", "traveltime_curr", 1, 86400);
    for (auto c : all_contaminants)
        add("pollutions", contaminant_column(c), imeca_min, imeca_max);
    return s;
}

RuleSet RuleSet::parse(std::string_view body)
{
    RuleSet s;
    auto all = text::lines(body);
    for (std::size_t i = 0; i < all.size(); ++i) {
        auto line = all[i];
        auto t = text::trim(line);
        if (t.empty() || t.front() == '#')
            continue;
        auto tokens = text::split_ws(line);
        if (tokens.size() != 3)
            throw ParseError("expected 'table.attribute min max'", i + 1, 1);
        auto dot = tokens[0].find('.');
        if (dot == std::string_view::npos || dot == 0 || dot + 1 == tokens[0].size())
            throw ParseError("expected table.attribute, got '" + std::string(tokens[0]) + "'", i + 1, 1);
        RangeRule r{std::string(tokens[0].substr(0, dot)), std::string(tokens[0].substr(dot + 1)),
                    parse_bound(tokens[1], i + 1, line), parse_bound(tokens[2], i + 1, line)};
        try {
            s.set(std::move(r));
        } catch (const ConfigError& e) {
            throw ParseError(e.what(), i + 1, 1);
        }
    }
    return s;
}

void RuleSet::set(RangeRule rule)
{
    if (rule.min && rule.max && *rule.min > *rule.max)
        throw ConfigError("rule " + rule.str() + ": min exceeds max");
    auto key = rule.table + "." + rule.attribute;
    rules_.insert_or_assign(std::move(key), std::move(rule));
}

void RuleSet::merge(const RuleSet& other)
{
    for (const auto& [key, rule] : other.rules_)
        rules_.insert_or_assign(key, rule);
}

const RangeRule* RuleSet::find(std::string_view table, std::string_view attribute) const
{
    std::string key;
    key.reserve(table.size() + attribute.size() + 1);
    key.append(table).append(".").append(attribute);
    auto it = rules_.find(key);
    return it == rules_.end() ? nullptr : &it->second;
}

std::string RuleSet::str() const
{
    std::string out;
    for (const auto& [key, rule] : rules_)
        out += rule.str() + "\n";
    return out;
}

bool ValidationReport::lists(std::string_view attribute) const
{
    for (const auto& v : violations)
        if (v.attribute == attribute)
            return true;
    return false;
}

Validated<WeatherRecord> validate_weather(const RawWeather& raw, const RuleSet& rules)
{
    Validated<WeatherRecord> out;
    out.report.key = record_key(raw.timestamp, raw.location);
    if (!raw.timestamp) {
        out.rejection = "missing timestamp";
        return out;
    }
    if (!raw.location) {
        out.rejection = "unresolved location '" + raw.station + "'";
        return out;
    }

    WeatherRecord rec;
    rec.timestamp = *raw.timestamp;
    rec.location = *raw.location;
    rec.time_zone = raw.time_zone;

    std::size_t consumed = 0;
    auto lookup = [&](std::string_view name) -> const std::string* {
        auto it = raw.fields.find(name);
        if (it == raw.fields.end())
            return nullptr;
        ++consumed;
        return &it->second;
    };
    auto reject_field = [&](std::string_view name, const std::string& value, std::string rule) {
        out.report.violations.push_back({std::string(name), value, std::move(rule)});
    };
    const std::string airport_rule = "airport-only attribute";

    for (const auto& a : weather_numbers) {
        const auto* text_value = lookup(a.name);
        if (!text_value)
            continue;
        if (a.airport_only && !raw.airport) {
            reject_field(a.name, *text_value, airport_rule);
            continue;
        }
        auto v = text::parse_number(*text_value);
        if (!v) {
            reject_field(a.name, *text_value, "numeric");
            continue;
        }
        if (auto why = range_failure(rules, "weathers", a.name, *v)) {
            reject_field(a.name, *text_value, *why);
            continue;
        }
        rec.*a.member = *v;
    }

    for (const auto& a : weather_codes) {
        const auto* text_value = lookup(a.name);
        if (!text_value)
            continue;
        if (text_value->empty()) {
            reject_field(a.name, *text_value, "non-empty code");
            continue;
        }
        if (a.catalog == LookupCatalog::wdires && !is_compass_code(*text_value)) {
            reject_field(a.name, *text_value, "16-point compass code");
            continue;
        }
        rec.*a.member = *text_value;
    }

    for (const auto& a : weather_flags) {
        const auto* text_value = lookup(a.name);
        if (!text_value)
            continue;
        if (!raw.airport) {
            reject_field(a.name, *text_value, airport_rule);
            continue;
        }
        auto v = text::parse_number(*text_value);
        if (!v || (*v != 0.0 && *v != 1.0)) {
            reject_field(a.name, *text_value, "flag 0/1");
            continue;
        }
        if (auto why = range_failure(rules, "weathers", a.name, *v)) {
            reject_field(a.name, *text_value, *why);
            continue;
        }
        rec.*a.member = *v == 1.0;
    }

    if (const auto* text_value = lookup("metar")) {
        if (!raw.airport)
            reject_field("metar", *text_value, airport_rule);
        else
            rec.metar = *text_value;
    }

    if (consumed != raw.fields.size()) {
        for (const auto& [name, value] : raw.fields) {
            (void)value;
            bool known = name == "metar";
            for (const auto& a : weather_numbers)
                known = known || a.name == name;
            for (const auto& a : weather_codes)
                known = known || a.name == name;
            for (const auto& a : weather_flags)
                known = known || a.name == name;
            if (!known) {
                out.rejection = "unknown attribute '" + name + "'";
                return out;
            }
        }
    }

    out.record = std::move(rec);
    return out;
}

Validated<TrafficRecord> validate_traffic(const RawTraffic& raw, const RuleSet& rules)
{
    Validated<TrafficRecord> out;
    out.report.key = record_key(raw.timestamp, raw.location);
    if (!raw.timestamp) {
        out.rejection = "missing timestamp";
        return out;
    }
    if (!raw.location) {
        out.rejection = "unresolved route '" + raw.route + "'";
        return out;
    }

    TrafficRecord rec;
    rec.timestamp = *raw.timestamp;
    rec.location = *raw.location;
    struct Field {
        std::string_view name;
        const std::string& text;
        double& target;
    };
    const Field fields[] = {
        {"traveldist", raw.traveldist, rec.traveldist},
        {"traveltime_std", raw.traveltime_std, rec.traveltime_std},
        {"traveltime_curr", raw.traveltime_curr, rec.traveltime_curr},
    };
    for (const auto& f : fields) {
        auto v = text::parse_number(f.text);
        if (!v) {
            out.report.violations.push_back({std::string(f.name), f.text, "numeric"});
            continue;
        }
        if (auto why = range_failure(rules, "traffics", f.name, *v)) {
            out.report.violations.push_back({std::string(f.name), f.text, *why});
            continue;
        }
        f.target = *v;
    }
    if (!out.report.empty()) {
        out.rejection = "registry rejected: " + out.report.violations.front().attribute + " invalid";
        return out;
    }
    out.record = rec;
    return out;
}

Validated<PollutionRecord> validate_pollution(const PollutionCandidate& raw, const RuleSet& rules)
{
    Validated<PollutionRecord> out;
    out.report.key = record_key(raw.timestamp, raw.location);
    if (!raw.location) {
        out.rejection = "unresolved station '" + raw.station + "'";
        return out;
    }
    if (raw.timestamp.hour < 2) {
        out.rejection = "hour " + std::to_string(raw.timestamp.hour) + " is never reported";
        return out;
    }
    if (raw.timestamp.minute != 0 || raw.timestamp.second != 0) {
        out.rejection = "timestamp not on an exact hour";
        return out;
    }

    PollutionRecord rec;
    rec.timestamp = raw.timestamp;
    rec.location = *raw.location;
    for (auto c : all_contaminants) {
        const auto& cell = raw.reading(c);
        if (!cell)
            continue;
        auto name = contaminant_column(c);
        auto v = text::parse_number(*cell);
        if (!v) {
            out.report.violations.push_back({std::string(name), *cell, "numeric"});
            continue;
        }
        if (*v != std::floor(*v)) {
            out.report.violations.push_back({std::string(name), *cell, "integer IMECA points"});
            continue;
        }
        if (auto why = range_failure(rules, "pollutions", name, *v)) {
            out.report.violations.push_back({std::string(name), *cell, *why});
            continue;
        }
        if (std::abs(*v) > 1e9) {
            out.report.violations.push_back({std::string(name), *cell, "integer IMECA points"});
            continue;
        }
        rec.reading(c) = static_cast<int>(*v);
    }
    out.record = rec;
    return out;
}

} // namespace mwtp
