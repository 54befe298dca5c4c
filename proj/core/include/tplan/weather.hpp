#pragma once

#include "tplan/grid.hpp"

#include <string>
#include <vector>

namespace tplan {

struct WeatherSample {
    std::string cell_id;
    long hour = 0; // hour index within the series
    double lat = 0, lon = 0;
    double ambient_temp = 0;   // degC
    double wind_speed = 0;     // m/s
    double wind_direction = 0; // deg from north
    double direct_flux = 0;    // W/m^2
    double diffuse_flux = 0;   // W/m^2
};

struct ConductorSpec {
    double diameter = 0.02814;        // m, Drake-class default
    double resistance_ref = 8.688e-5; // ohm/m at ref_temp
    double ref_temp = 25.0;           // degC
    double resistance_alpha = 0.0039; // 1/K
    double emissivity = 0.8;
    double absorptivity = 0.8;
    double max_conductor_temp = 100.0; // degC
    double nominal_voltage = 240.0;    // kV line-to-line
    double line_azimuth = 0.0;         // deg from north
};

struct DtrResult {
    double ampacity_a = 0; // A
    double power_pu = 0;   // p.u. on s_base
    bool clipped = false;  // heat balance had no real root; rating forced to 0
};

// steady-state conductor heat balance solved for current at max_conductor_temp
DtrResult compute_dtr(const WeatherSample& s, const ConductorSpec& spec, double s_base_mva);

// plane-of-array conversion; cf is relative to the module's rated output at
// 1000 W/m^2, so efficiency cancels but a nonpositive value is rejected
double compute_solar_cf(const WeatherSample& s, double sun_elevation_deg, double efficiency);

struct PowerCurve {
    std::vector<double> speed; // ascending knots, first = cut-in
    std::vector<double> power; // fraction of rated, last must be 1
    double cut_out = 0;        // m/s
};

PowerCurve load_power_curve(const std::string& path);
PowerCurve parse_power_curve(const std::string& text, const std::string& origin = "<string>");
double compute_wind_cf(double speed, const PowerCurve& curve);

// solar position from day-of-year and local solar time
double sun_elevation(double lat_deg, int day_of_year, double solar_hour);
double equation_of_time_min(int day_of_year);
double sun_elevation_utc(double lat_deg, double lon_deg, int day_of_year, double utc_hour);

struct CellSeries {
    std::string cell_id;
    double lat = 0, lon = 0;
    std::vector<double> series; // yearly hourly values, e.g. capacity factors
};

// DTW k-medoids over cells; zone area = cell_area * member_count / protection
std::vector<VresZone> reduce_zones(const std::vector<CellSeries>& cells, int k,
                                   double protection_factor, VresKind kind, const Network& net,
                                   double footprint, double cell_area_km2 = 2.5);

std::vector<WeatherSample> load_weather_grid(const std::string& path);
std::vector<WeatherSample> parse_weather_grid(const std::string& text,
                                              const std::string& origin = "<string>");
void save_weather_grid(const std::vector<WeatherSample>& samples, const std::string& path);

} // namespace tplan
