#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mwtp/model.hpp"

namespace mwtp {

// ---------------------------------------------------------------------------
// IMECA air-quality categories
// ---------------------------------------------------------------------------

enum class ImecaCategory { good, regular, bad, very_bad, extremely_bad };

struct ImecaBand {
    ImecaCategory category;
    int low;
    int high;
    std::string_view label;
};

/// Inclusive integer bands; together they partition 0..500.
inline constexpr std::array<ImecaBand, 5> imeca_bands{{
    {ImecaCategory::good, 0, 50, "GOOD"},
    {ImecaCategory::regular, 51, 100, "REGULAR"},
    {ImecaCategory::bad, 101, 150, "BAD"},
    {ImecaCategory::very_bad, 151, 200, "VERY_BAD"},
    {ImecaCategory::extremely_bad, 201, 500, "EXTREMELY_BAD"},
}};

inline constexpr int imeca_min = 0;
inline constexpr int imeca_max = 500;

/// Throws OutOfScaleError outside 0..500.
ImecaCategory classify_imeca(int value);
std::string_view imeca_label(ImecaCategory c);

// ---------------------------------------------------------------------------
// 16-point compass rose
// ---------------------------------------------------------------------------

struct CompassPoint {
    std::string_view code;
    std::string_view description;
};

/// Clockwise from north, 22.5 degrees apart.
inline constexpr std::array<CompassPoint, 16> compass_rose{{
    {"N", "North"},
    {"NNE", "North-northeast"},
    {"NE", "Northeast"},
    {"ENE", "East-northeast"},
    {"E", "East"},
    {"ESE", "East-southeast"},
    {"SE", "Southeast"},
    {"SSE", "South-southeast"},
    {"S", "South"},
    {"SSW", "South-southwest"},
    {"SW", "Southwest"},
    {"WSW", "West-southwest"},
    {"W", "West"},
    {"WNW", "West-northwest"},
    {"NW", "Northwest"},
    {"NNW", "North-northwest"},
}};

/// Sector i covers [22.5*i - 11.25, 22.5*i + 11.25). 360 maps like 0.
/// Throws ValidationError outside [0, 360].
std::string_view compass_point(double degrees);
bool is_compass_code(std::string_view code);

// ---------------------------------------------------------------------------
// Route enumeration
// ---------------------------------------------------------------------------

struct NamedPoint {
    std::string name;
    double lat = 0;
    double lon = 0;
    std::string description;
};

/// file_id of the route from `from` to `to`.
std::string route_file_id(std::string_view from, std::string_view to);

/// Every ordered pair (a, b) with a != b, sorted by start name then end name.
/// Ids are assigned 1..n(n-1) in that order. Throws ConfigError on fewer than
/// two points, duplicate names or duplicate coordinates.
std::vector<TrafficRoute> enumerate_routes(std::span<const NamedPoint> points);

} // namespace mwtp
