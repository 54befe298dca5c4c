#pragma once

#include <map>
#include <string>
#include <vector>

namespace tplan {

// Bus-sited thermal builds use per-tech candidate areas; zone-sited VRES use
// zone areas. All powers are p.u. on the network file's declared MVA base.

struct Bus {
    std::string id;
    std::string name;
    double lat = 0, lon = 0;
    double avg_load = 0;           // p.u.
    double max_new_connection = 0; // p.u., cap on cumulative new thermal at this bus
    std::map<std::string, double> thermal_area; // km^2 per tech code (G/N/H)
    bool battery_candidate = false;
    bool hydro_candidate = false;
};

struct RightOfWay {
    std::string id;
    std::string from_bus, to_bus;
    double length_km = 0;
    double reactance = 0;               // p.u.
    bool existing_line = false;         // N_l
    double static_rating_existing = 0;  // p.u.
    double static_rating_new = 0;       // p.u.
    std::string dtr_ref;                // profile column key; empty = no DTR candidacy
    bool line_candidate = false;
    double sssc_voltage = 0;            // p.u.; > 0 enables SSSC candidacy
    double sssc_cut_in = 0;             // p.u. flow
    int sssc_max_units = 0;             // 0 = catalog default
};

struct ExistingGenerator {
    std::string id;
    std::string bus;
    double p_min = 0, p_max = 0;   // p.u.
    double ramp_up = 0, ramp_down = 0; // p.u./h, ramp_down <= 0 <= ramp_up
    double emissions_pre = 0, emissions_post = 0; // t per p.u.h
    double cost_pre = 0, cost_post = 0;           // $ per p.u.h
    double carbon_pre = 0, carbon_post = 0;       // $ per t embedded as $ per p.u.h
    double retrofit_cost = 0;
    bool retrofit_allowed = false;
};

enum class VresKind { Solar, Wind };

struct VresZone {
    std::string id;
    VresKind kind = VresKind::Wind;
    double lat = 0, lon = 0;
    std::string bus;          // nearest-bus association, resolved at load
    double area = 0;          // km^2
    double existing_capacity = 0; // p.u.
    double footprint = 0;     // km^2 per p.u.
};

struct Network {
    double power_base_mva = 0;
    std::vector<Bus> buses;
    std::vector<RightOfWay> rows;
    std::vector<ExistingGenerator> generators;
    std::vector<VresZone> zones;

    int bus_index(const std::string& id) const; // -1 when missing
    const Bus& bus(const std::string& id) const;
};

struct Tech {
    std::string code;  // one of G N H S W B P L D F R
    std::string label;
    double capex = 0;      // per p.u.; for L per km, for D per started 3 km, for F per unit
    double fixed_om = 0;   // per year
    double var_cost = 0;   // per p.u.h
    double gmin = 0, gmax = 1;
    double ramp_up_f = 1, ramp_dn_f = -1;
    double footprint = 0;  // km^2 per p.u.
    double lifetime = 1e9; // years
    double emissions = 0;  // t per p.u.h
    double carbon_price = 0;
    // battery
    double charge_max = 0, discharge_max = 0;
    double eta_ch = 1, eta_di = 1;
    double soc_min = 0, soc_max = 0;
    double shelf_degradation = 0;
    double end_of_life = 0.8;
    // pumped hydro
    double sigma_t = 0, sigma_p = 0;
    double vu_max = 0, vl_max = 0, vu0 = 0, vl0 = 0, w_max = 0;
    // sssc
    int max_units = 10;
};

struct TechnologyCatalog {
    std::map<std::string, Tech> techs;
    bool has(const std::string& code) const { return techs.count(code) != 0; }
    const Tech& at(const std::string& code) const;
};

enum class SocConvention { Physical, Paper };
enum class DegradationScale { Paper, Daily };

struct PlanningHorizon {
    int n_stages = 0;
    double years_per_stage = 0;
    std::vector<double> co2_targets; // per stage
    double theta_bound = 0.5235987755982988; // rad
    double voll = 100.0;
    double curtail_wind = -1;  // negative: derive 0.95 x min fuel cost
    double curtail_solar = -1;
    SocConvention soc_convention = SocConvention::Physical;
    DegradationScale degradation_scale = DegradationScale::Paper;
    double sssc_margin = 1e-6;
};

struct ValidationReport {
    std::vector<std::string> violations;
    std::vector<std::string> warnings;
    bool ok() const { return violations.empty(); }
};

double haversine_km(double lat1, double lon1, double lat2, double lon2);
// nearest bus by great-circle distance, ties to the lexicographically lower id
int nearest_bus(const Network& net, double lat, double lon);

Network load_network(const std::string& path);
void save_network(const Network& net, const std::string& path);
Network parse_network(const std::string& text, const std::string& origin = "<string>");
std::string network_to_json(const Network& net);

TechnologyCatalog load_catalog(const std::string& path);
TechnologyCatalog parse_catalog(const std::string& text, const std::string& origin = "<string>");

PlanningHorizon load_horizon(const std::string& path);
PlanningHorizon parse_horizon(const std::string& text, const std::string& origin = "<string>");

ValidationReport validate_network(const Network& net);
ValidationReport validate_catalog(const TechnologyCatalog& cat);
ValidationReport validate_horizon(const PlanningHorizon& hz);

} // namespace tplan
