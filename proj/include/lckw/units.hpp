#pragma once

// Core quantities are miles, hours and vehicles per mile. Feet, seconds and
// metric units only appear at I/O boundaries.

namespace lckw::units {

inline constexpr double feet_per_mile = 5280.0;
inline constexpr double seconds_per_hour = 3600.0;
inline constexpr double km_per_mile = 1.609344;
inline constexpr double meters_per_foot = 0.3048;
inline constexpr double pi = 3.14159265358979323846;

constexpr double feet_to_miles(double ft) { return ft / feet_per_mile; }
constexpr double miles_to_feet(double mi) { return mi * feet_per_mile; }
constexpr double seconds_to_hours(double s) { return s / seconds_per_hour; }
constexpr double hours_to_seconds(double h) { return h * seconds_per_hour; }
constexpr double fps_to_mph(double fps) { return fps * seconds_per_hour / feet_per_mile; }
constexpr double mph_to_fps(double mph) { return mph * feet_per_mile / seconds_per_hour; }
constexpr double degrees_to_radians(double deg) { return deg * pi / 180.0; }
constexpr double radians_to_degrees(double rad) { return rad * 180.0 / pi; }

constexpr double km_to_miles(double km) { return km / km_per_mile; }
constexpr double miles_to_km(double mi) { return mi * km_per_mile; }
constexpr double per_km_to_per_mile(double d) { return d * km_per_mile; }
constexpr double per_mile_to_per_km(double d) { return d / km_per_mile; }
constexpr double meters_to_feet(double m) { return m / meters_per_foot; }
constexpr double feet_to_meters(double ft) { return ft * meters_per_foot; }

}  // namespace lckw::units
