#include "tplan/weather.hpp"
#include "tplan/dtw.hpp"
#include "tplan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace tplan {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double d2r = kPi / 180.0;

double film_viscosity(double tf) { return 1.458e-6 * std::pow(tf + 273.0, 1.5) / (tf + 383.4); }
double film_density(double tf) { return 1.293 / (1.0 + 0.00367 * tf); } // sea level
double film_conductivity(double tf) { return 2.424e-2 + 7.477e-5 * tf - 4.407e-9 * tf * tf; }

double wind_attack_angle(double wind_dir, double azimuth) {
    double phi = std::fmod(std::fabs(wind_dir - azimuth), 180.0);
    if (phi > 90.0) phi = 180.0 - phi;
    return phi;
}

} // namespace

DtrResult compute_dtr(const WeatherSample& s, const ConductorSpec& spec, double s_base_mva) {
    if (s_base_mva <= 0) throw ValidationError("dtr: s_base must be positive");
    const double tc = spec.max_conductor_temp;
    const double ta = s.ambient_temp;
    const double dt = tc - ta;
    const double tf = 0.5 * (tc + ta);
    const double mu = film_viscosity(tf);
    const double rho = film_density(tf);
    const double kf = film_conductivity(tf);
    const double d = spec.diameter;

    double qc = 0;
    if (dt > 0) {
        double re = d * rho * s.wind_speed / mu;
        double phi = wind_attack_angle(s.wind_direction, spec.line_azimuth) * d2r;
        double kang = 1.194 - std::cos(phi) + 0.194 * std::cos(2 * phi) + 0.368 * std::sin(2 * phi);
        double q_low = kang * (1.01 + 1.35 * std::pow(re, 0.52)) * kf * dt;
        double q_high = kang * 0.754 * std::pow(re, 0.6) * kf * dt;
        double q_nat = 3.645 * std::sqrt(rho) * std::pow(d, 0.75) * std::pow(dt, 1.25);
        qc = std::max({q_low, q_high, q_nat});
    }
    double qr = 17.8 * d * spec.emissivity *
                (std::pow((tc + 273.0) / 100.0, 4) - std::pow((ta + 273.0) / 100.0, 4));
    double qs = spec.absorptivity * (s.direct_flux + s.diffuse_flux) * d;
    double r_tc = spec.resistance_ref * (1.0 + spec.resistance_alpha * (tc - spec.ref_temp));

    DtrResult out;
    double num = qc + qr - qs;
    if (num <= 0) {
        out.clipped = true;
        return out;
    }
    out.ampacity_a = std::sqrt(num / r_tc);
    double mw = std::sqrt(3.0) * spec.nominal_voltage * out.ampacity_a / 1000.0;
    out.power_pu = mw / s_base_mva;
    return out;
}

double compute_solar_cf(const WeatherSample& s, double sun_elevation_deg, double efficiency) {
    if (efficiency <= 0) throw ValidationError("solar: efficiency must be positive");
    if (sun_elevation_deg <= 0) return 0.0;
    double zenith = std::fabs(90.0 - sun_elevation_deg) * d2r;
    double divisor = std::max(std::cos(zenith), std::cos(89.0 * d2r));
    double poa = (s.direct_flux + s.diffuse_flux) / divisor;
    // module rating at 1000 W/m^2 already contains the efficiency
    double cf = poa * efficiency / (efficiency * 1000.0);
    return std::clamp(cf, 0.0, 1.0);
}

PowerCurve parse_power_curve(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    PowerCurve pc;
    bool header_seen = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string word;
            hs >> word;
            if (word == "tplan-power-curve") {
                int ver = 0;
                hs >> ver;
                if (ver != 1) throw ParseError(origin + ": unsupported power curve version");
                header_seen = true;
            } else if (word == "cut_out") {
                hs >> pc.cut_out;
            }
            continue;
        }
        double sp, pw;
        if (std::sscanf(line.c_str(), "%lf,%lf", &sp, &pw) != 2)
            throw ParseError(origin + ":" + std::to_string(lineno) + ": expected speed,power");
        pc.speed.push_back(sp);
        pc.power.push_back(pw);
    }
    if (!header_seen) throw ParseError(origin + ": missing tplan-power-curve header");
    if (pc.speed.size() < 2) throw ParseError(origin + ": need at least two curve points");
    for (size_t i = 1; i < pc.speed.size(); ++i) {
        if (pc.speed[i] <= pc.speed[i - 1])
            throw ParseError(origin + ": speeds must strictly increase");
        if (pc.power[i] < pc.power[i - 1])
            throw ParseError(origin + ": power must be non-decreasing");
    }
    for (double p : pc.power)
        if (p < 0 || p > 1) throw ParseError(origin + ": power must lie in [0,1]");
    if (std::fabs(pc.power.back() - 1.0) > 1e-12)
        throw ParseError(origin + ": last curve point must reach rated power 1");
    if (pc.cut_out <= pc.speed.back())
        throw ParseError(origin + ": cut_out must exceed the rated speed");
    return pc;
}

PowerCurve load_power_curve(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_power_curve(ss.str(), path);
}

double compute_wind_cf(double speed, const PowerCurve& curve) {
    if (speed < curve.speed.front()) return 0.0;
    if (speed > curve.cut_out) return 0.0;
    if (speed >= curve.speed.back()) return 1.0;
    auto it = std::upper_bound(curve.speed.begin(), curve.speed.end(), speed);
    size_t hi = it - curve.speed.begin();
    size_t lo = hi - 1;
    double w = (speed - curve.speed[lo]) / (curve.speed[hi] - curve.speed[lo]);
    return curve.power[lo] + w * (curve.power[hi] - curve.power[lo]);
}

double sun_elevation(double lat_deg, int day_of_year, double solar_hour) {
    double decl = 23.45 * std::sin(2 * kPi * (284.0 + day_of_year) / 365.0) * d2r;
    double hour_angle = 15.0 * (solar_hour - 12.0) * d2r;
    double lat = lat_deg * d2r;
    double sin_el = std::sin(lat) * std::sin(decl) + std::cos(lat) * std::cos(decl) * std::cos(hour_angle);
    return std::asin(std::clamp(sin_el, -1.0, 1.0)) / d2r;
}

double equation_of_time_min(int day_of_year) {
    double b = 2 * kPi * (day_of_year - 81) / 364.0;
    return 9.87 * std::sin(2 * b) - 7.53 * std::cos(b) - 1.5 * std::sin(b);
}

double sun_elevation_utc(double lat_deg, double lon_deg, int day_of_year, double utc_hour) {
    double solar_hour = utc_hour + lon_deg / 15.0 + equation_of_time_min(day_of_year) / 60.0;
    return sun_elevation(lat_deg, day_of_year, solar_hour);
}

std::vector<VresZone> reduce_zones(const std::vector<CellSeries>& cells, int k,
                                   double protection_factor, VresKind kind, const Network& net,
                                   double footprint, double cell_area_km2) {
    if (k <= 0) throw ValidationError("reduce_zones: k must be positive");
    if (k > static_cast<int>(cells.size()))
        throw ValidationError("reduce_zones: k exceeds cell count");
    if (protection_factor <= 0) throw ValidationError("reduce_zones: protection must be positive");
    for (const auto& c : cells)
        if (c.series.size() != cells.front().series.size())
            throw ValidationError("reduce_zones: cell series lengths differ");

    const int n = static_cast<int>(cells.size());
    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            dist[i][j] = dist[j][i] = dtw_distance(cells[i].series, cells[j].series);
    auto km = kmedoids(dist, k);

    std::vector<int> members(k, 0);
    for (int a : km.assignment) members[a]++;
    std::vector<VresZone> zones;
    for (int s = 0; s < k; ++s) {
        const auto& medoid = cells[km.medoids[s]];
        VresZone z;
        z.id = (kind == VresKind::Wind ? "zw_" : "zs_") + medoid.cell_id;
        z.kind = kind;
        z.lat = medoid.lat;
        z.lon = medoid.lon;
        z.area = cell_area_km2 * members[s] / protection_factor;
        z.footprint = footprint;
        int nb = nearest_bus(net, z.lat, z.lon);
        if (nb < 0) throw ValidationError("reduce_zones: network has no buses");
        z.bus = net.buses[nb].id;
        zones.push_back(std::move(z));
    }
    return zones;
}

std::vector<WeatherSample> parse_weather_grid(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool header_seen = false, columns_seen = false;
    std::map<std::string, std::pair<double, double>> cell_pos;
    std::vector<WeatherSample> out;
    while (std::getline(in, line)) {
        lineno++;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string word;
            hs >> word;
            if (word == "tplan-weather-grid") {
                int ver = 0;
                hs >> ver;
                if (ver != 1) throw ParseError(origin + ": unsupported weather grid version");
                header_seen = true;
            } else if (word == "cell") {
                std::string id;
                double lat, lon;
                if (!(hs >> id >> lat >> lon))
                    throw ParseError(origin + ":" + std::to_string(lineno) + ": bad cell header");
                cell_pos[id] = {lat, lon};
            }
            continue;
        }
        if (!columns_seen) {
            if (line != "cell,hour,temp,wind_speed,wind_dir,dirc,diff")
                throw ParseError(origin + ":" + std::to_string(lineno) + ": unexpected column row");
            columns_seen = true;
            continue;
        }
        char id[128];
        long hour;
        double temp, ws, wd, dirc, diff;
        if (std::sscanf(line.c_str(), "%127[^,],%ld,%lf,%lf,%lf,%lf,%lf", id, &hour, &temp, &ws,
                        &wd, &dirc, &diff) != 7)
            throw ParseError(origin + ":" + std::to_string(lineno) + ": bad sample row");
        auto it = cell_pos.find(id);
        if (it == cell_pos.end())
            throw ParseError(origin + ":" + std::to_string(lineno) + ": cell '" + id +
                             "' missing from header");
        WeatherSample s;
        s.cell_id = id;
        s.hour = hour;
        s.lat = it->second.first;
        s.lon = it->second.second;
        s.ambient_temp = temp;
        s.wind_speed = ws;
        s.wind_direction = wd;
        s.direct_flux = dirc;
        s.diffuse_flux = diff;
        if (s.wind_speed < 0 || s.direct_flux < 0 || s.diffuse_flux < 0)
            throw ValidationError(origin + ":" + std::to_string(lineno) +
                                  ": negative wind speed or flux");
        out.push_back(std::move(s));
    }
    if (!header_seen) throw ParseError(origin + ": missing tplan-weather-grid header");
    return out;
}

std::vector<WeatherSample> load_weather_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_weather_grid(ss.str(), path);
}

void save_weather_grid(const std::vector<WeatherSample>& samples, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path);
    out << "# tplan-weather-grid 1\n";
    std::map<std::string, std::pair<double, double>> cells;
    for (const auto& s : samples) cells[s.cell_id] = {s.lat, s.lon};
    char buf[256];
    for (const auto& [id, pos] : cells) {
        std::snprintf(buf, sizeof buf, "# cell %s %.17g %.17g", id.c_str(), pos.first, pos.second);
        out << buf << "\n";
    }
    out << "cell,hour,temp,wind_speed,wind_dir,dirc,diff\n";
    for (const auto& s : samples) {
        std::snprintf(buf, sizeof buf, "%s,%ld,%.17g,%.17g,%.17g,%.17g,%.17g", s.cell_id.c_str(),
                      s.hour, s.ambient_temp, s.wind_speed, s.wind_direction, s.direct_flux,
                      s.diffuse_flux);
        out << buf << "\n";
    }
}

} // namespace tplan
