#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mwtp/connectors.hpp"
#include "mwtp/model.hpp"

namespace mwtp {

/// Inclusive bounds for one attribute; an absent side is unbounded.
struct RangeRule {
    std::string table;
    std::string attribute;
    std::optional<double> min;
    std::optional<double> max;

    bool admits(double v) const { return (!min || v >= *min) && (!max || v <= *max); }
    /// "table.attribute min max" with '-' for an unbounded side.
    std::string str() const;

    bool operator==(const RangeRule&) const = default;
};

/// Immutable once built. Keys are "table.attribute".
class RuleSet {
public:
    /// Built-in table used when no rule file is given.
    static RuleSet defaults();

    /// One rule per line: `table.attribute min max`, '-' for unbounded.
    /// Blank lines and '#' comments are ignored. Throws ParseError.
    static RuleSet parse(std::string_view text);

    /// Throws ConfigError when min > max.
    void set(RangeRule rule);
    /// Rules in `other` replace rules with the same key.
    void merge(const RuleSet& other);

    const RangeRule* find(std::string_view table, std::string_view attribute) const;
    const std::map<std::string, RangeRule, std::less<>>& rules() const { return rules_; }

    std::string str() const;

private:
    std::map<std::string, RangeRule, std::less<>> rules_;
};

struct Violation {
    std::string attribute;
    std::string value;
    std::string rule;

    bool operator==(const Violation&) const = default;
};

struct ValidationReport {
    /// "<timestamp> @ <location>"
    std::string key;
    std::vector<Violation> violations;

    bool empty() const { return violations.empty(); }
    bool lists(std::string_view attribute) const;
};

/// Either a cleaned record or a rejection. The report is filled in both cases.
template <class Record>
struct Validated {
    std::optional<Record> record;
    ValidationReport report;
    std::string rejection;

    bool accepted() const { return record.has_value(); }
};

/// Out-of-range, malformed or misplaced (airport-only at a personal station)
/// fields become NA and are listed in the report. A missing timestamp or
/// unresolved location rejects the whole record.
Validated<WeatherRecord> validate_weather(const RawWeather& raw, const RuleSet& rules);

/// A registry is atomic: any bad measurement rejects it.
Validated<TrafficRecord> validate_traffic(const RawTraffic& raw, const RuleSet& rules);

/// Per-contaminant NA on bad cells; hours 00/01 reject the record. Fractional
/// IMECA points count as bad cells.
Validated<PollutionRecord> validate_pollution(const PollutionCandidate& raw, const RuleSet& rules);

} // namespace mwtp
