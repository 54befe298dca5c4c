#include "tplan/grid.hpp"
#include "tplan/errors.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

using nlohmann::json;

namespace tplan {
namespace {

json parse_json(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(origin + ": " + e.what());
    }
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& ctx) {
    if (!j.is_object()) throw ParseError(ctx + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ParseError(ctx + ": unknown key '" + it.key() + "'");
}

template <typename T>
T req(const json& j, const std::string& key, const std::string& ctx) {
    if (!j.contains(key)) throw ParseError(ctx + ": missing key '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ParseError(ctx + ": bad type for '" + key + "'");
    }
}

template <typename T>
T opt(const json& j, const std::string& key, T dflt, const std::string& ctx) {
    if (!j.contains(key)) return dflt;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ParseError(ctx + ": bad type for '" + key + "'");
    }
}

void check_header(const json& j, const std::string& fmt, const std::string& origin) {
    if (req<std::string>(j, "format", origin) != fmt)
        throw ParseError(origin + ": format must be '" + fmt + "'");
    if (req<int>(j, "version", origin) != 1)
        throw ParseError(origin + ": unsupported version");
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::set<std::string> kTechCodes = {"G", "N", "H", "S", "W", "B", "P", "L", "D", "F", "R"};

} // namespace

int Network::bus_index(const std::string& id) const {
    for (size_t i = 0; i < buses.size(); ++i)
        if (buses[i].id == id) return static_cast<int>(i);
    return -1;
}

const Bus& Network::bus(const std::string& id) const {
    int i = bus_index(id);
    if (i < 0) throw ValidationError("unknown bus id '" + id + "'");
    return buses[i];
}

const Tech& TechnologyCatalog::at(const std::string& code) const {
    auto it = techs.find(code);
    if (it == techs.end()) throw ValidationError("catalog has no technology '" + code + "'");
    return it->second;
}

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
    constexpr double kEarthRadiusKm = 6371.0;
    constexpr double d2r = M_PI / 180.0;
    double dlat = (lat2 - lat1) * d2r, dlon = (lon2 - lon1) * d2r;
    double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
               std::cos(lat1 * d2r) * std::cos(lat2 * d2r) * std::sin(dlon / 2) * std::sin(dlon / 2);
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

int nearest_bus(const Network& net, double lat, double lon) {
    int best = -1;
    double best_d = 0;
    for (size_t i = 0; i < net.buses.size(); ++i) {
        double d = haversine_km(lat, lon, net.buses[i].lat, net.buses[i].lon);
        if (best < 0 || d < best_d - 1e-12 ||
            (std::fabs(d - best_d) <= 1e-12 && net.buses[i].id < net.buses[best].id)) {
            best = static_cast<int>(i);
            best_d = d;
        }
    }
    return best;
}

Network parse_network(const std::string& text, const std::string& origin) {
    json j = parse_json(text, origin);
    check_keys(j, {"format", "version", "power_base_mva", "buses", "rows", "generators", "zones"},
               origin);
    check_header(j, "tplan-network", origin);
    Network net;
    net.power_base_mva = req<double>(j, "power_base_mva", origin);

    for (const auto& bj : req<json>(j, "buses", origin)) {
        std::string ctx = origin + " bus";
        check_keys(bj,
                   {"id", "name", "lat", "lon", "avg_load", "max_new_connection", "thermal_area",
                    "battery_candidate", "hydro_candidate"},
                   ctx);
        Bus b;
        b.id = req<std::string>(bj, "id", ctx);
        ctx += " '" + b.id + "'";
        b.name = opt<std::string>(bj, "name", b.id, ctx);
        b.lat = req<double>(bj, "lat", ctx);
        b.lon = req<double>(bj, "lon", ctx);
        b.avg_load = opt<double>(bj, "avg_load", 0.0, ctx);
        b.max_new_connection = opt<double>(bj, "max_new_connection", 0.0, ctx);
        if (bj.contains("thermal_area")) {
            const auto& ta = bj.at("thermal_area");
            if (!ta.is_object()) throw ParseError(ctx + ": thermal_area must be an object");
            for (auto it = ta.begin(); it != ta.end(); ++it) {
                if (!kTechCodes.count(it.key()))
                    throw ParseError(ctx + ": thermal_area has unknown tech '" + it.key() + "'");
                b.thermal_area[it.key()] = it.value().get<double>();
            }
        }
        b.battery_candidate = opt<bool>(bj, "battery_candidate", false, ctx);
        b.hydro_candidate = opt<bool>(bj, "hydro_candidate", false, ctx);
        net.buses.push_back(std::move(b));
    }
    if (net.buses.empty()) throw ValidationError(origin + ": no buses");

    for (const auto& rj : req<json>(j, "rows", origin)) {
        std::string ctx = origin + " row";
        check_keys(rj,
                   {"id", "from", "to", "length_km", "reactance", "existing_line",
                    "static_rating_existing", "static_rating_new", "dtr_ref", "line_candidate",
                    "sssc_voltage", "sssc_cut_in", "sssc_max_units"},
                   ctx);
        RightOfWay r;
        r.id = req<std::string>(rj, "id", ctx);
        ctx += " '" + r.id + "'";
        r.from_bus = req<std::string>(rj, "from", ctx);
        r.to_bus = req<std::string>(rj, "to", ctx);
        r.length_km = req<double>(rj, "length_km", ctx);
        r.reactance = req<double>(rj, "reactance", ctx);
        r.existing_line = opt<bool>(rj, "existing_line", false, ctx);
        r.static_rating_existing = opt<double>(rj, "static_rating_existing", 0.0, ctx);
        r.static_rating_new = opt<double>(rj, "static_rating_new", 0.0, ctx);
        r.dtr_ref = opt<std::string>(rj, "dtr_ref", "", ctx);
        r.line_candidate = opt<bool>(rj, "line_candidate", false, ctx);
        r.sssc_voltage = opt<double>(rj, "sssc_voltage", 0.0, ctx);
        r.sssc_cut_in = opt<double>(rj, "sssc_cut_in", 0.0, ctx);
        r.sssc_max_units = opt<int>(rj, "sssc_max_units", 0, ctx);
        if (net.bus_index(r.from_bus) < 0)
            throw ValidationError(ctx + ": dangling from-bus '" + r.from_bus + "'");
        if (net.bus_index(r.to_bus) < 0)
            throw ValidationError(ctx + ": dangling to-bus '" + r.to_bus + "'");
        net.rows.push_back(std::move(r));
    }

    for (const auto& gj : req<json>(j, "generators", origin)) {
        std::string ctx = origin + " generator";
        check_keys(gj,
                   {"id", "bus", "p_min", "p_max", "ramp_up", "ramp_down", "emissions_pre",
                    "emissions_post", "cost_pre", "cost_post", "carbon_pre", "carbon_post",
                    "retrofit_cost", "retrofit_allowed"},
                   ctx);
        ExistingGenerator g;
        g.id = req<std::string>(gj, "id", ctx);
        ctx += " '" + g.id + "'";
        g.bus = req<std::string>(gj, "bus", ctx);
        g.p_min = opt<double>(gj, "p_min", 0.0, ctx);
        g.p_max = req<double>(gj, "p_max", ctx);
        g.ramp_up = opt<double>(gj, "ramp_up", g.p_max, ctx);
        g.ramp_down = opt<double>(gj, "ramp_down", -g.p_max, ctx);
        g.emissions_pre = opt<double>(gj, "emissions_pre", 0.0, ctx);
        g.emissions_post = opt<double>(gj, "emissions_post", 0.0, ctx);
        g.cost_pre = req<double>(gj, "cost_pre", ctx);
        g.cost_post = opt<double>(gj, "cost_post", g.cost_pre, ctx);
        g.carbon_pre = opt<double>(gj, "carbon_pre", 0.0, ctx);
        g.carbon_post = opt<double>(gj, "carbon_post", 0.0, ctx);
        g.retrofit_cost = opt<double>(gj, "retrofit_cost", 0.0, ctx);
        g.retrofit_allowed = opt<bool>(gj, "retrofit_allowed", false, ctx);
        if (net.bus_index(g.bus) < 0)
            throw ValidationError(ctx + ": dangling bus '" + g.bus + "'");
        net.generators.push_back(std::move(g));
    }

    for (const auto& zj : req<json>(j, "zones", origin)) {
        std::string ctx = origin + " zone";
        check_keys(zj,
                   {"id", "kind", "lat", "lon", "bus", "area", "existing_capacity", "footprint"},
                   ctx);
        VresZone z;
        z.id = req<std::string>(zj, "id", ctx);
        ctx += " '" + z.id + "'";
        std::string kind = req<std::string>(zj, "kind", ctx);
        if (kind == "wind")
            z.kind = VresKind::Wind;
        else if (kind == "solar")
            z.kind = VresKind::Solar;
        else
            throw ParseError(ctx + ": kind must be wind or solar");
        z.lat = req<double>(zj, "lat", ctx);
        z.lon = req<double>(zj, "lon", ctx);
        z.area = req<double>(zj, "area", ctx);
        z.existing_capacity = opt<double>(zj, "existing_capacity", 0.0, ctx);
        z.footprint = req<double>(zj, "footprint", ctx);
        int nb = nearest_bus(net, z.lat, z.lon);
        z.bus = net.buses[nb].id;
        if (zj.contains("bus")) {
            std::string declared = zj.at("bus").get<std::string>();
            if (net.bus_index(declared) < 0)
                throw ValidationError(ctx + ": dangling bus '" + declared + "'");
            if (declared != z.bus)
                throw ValidationError(ctx + ": declared bus '" + declared +
                                      "' is not the nearest bus '" + z.bus + "'");
        }
        net.zones.push_back(std::move(z));
    }
    return net;
}

Network load_network(const std::string& path) { return parse_network(slurp(path), path); }

std::string network_to_json(const Network& net) {
    json j;
    j["format"] = "tplan-network";
    j["version"] = 1;
    j["power_base_mva"] = net.power_base_mva;
    j["buses"] = json::array();
    for (const auto& b : net.buses) {
        json bj;
        bj["id"] = b.id;
        bj["name"] = b.name;
        bj["lat"] = b.lat;
        bj["lon"] = b.lon;
        bj["avg_load"] = b.avg_load;
        bj["max_new_connection"] = b.max_new_connection;
        if (!b.thermal_area.empty()) bj["thermal_area"] = b.thermal_area;
        if (b.battery_candidate) bj["battery_candidate"] = true;
        if (b.hydro_candidate) bj["hydro_candidate"] = true;
        j["buses"].push_back(bj);
    }
    j["rows"] = json::array();
    for (const auto& r : net.rows) {
        json rj;
        rj["id"] = r.id;
        rj["from"] = r.from_bus;
        rj["to"] = r.to_bus;
        rj["length_km"] = r.length_km;
        rj["reactance"] = r.reactance;
        rj["existing_line"] = r.existing_line;
        rj["static_rating_existing"] = r.static_rating_existing;
        rj["static_rating_new"] = r.static_rating_new;
        if (!r.dtr_ref.empty()) rj["dtr_ref"] = r.dtr_ref;
        rj["line_candidate"] = r.line_candidate;
        if (r.sssc_voltage > 0) {
            rj["sssc_voltage"] = r.sssc_voltage;
            rj["sssc_cut_in"] = r.sssc_cut_in;
            if (r.sssc_max_units > 0) rj["sssc_max_units"] = r.sssc_max_units;
        }
        j["rows"].push_back(rj);
    }
    j["generators"] = json::array();
    for (const auto& g : net.generators) {
        json gj;
        gj["id"] = g.id;
        gj["bus"] = g.bus;
        gj["p_min"] = g.p_min;
        gj["p_max"] = g.p_max;
        gj["ramp_up"] = g.ramp_up;
        gj["ramp_down"] = g.ramp_down;
        gj["emissions_pre"] = g.emissions_pre;
        gj["emissions_post"] = g.emissions_post;
        gj["cost_pre"] = g.cost_pre;
        gj["cost_post"] = g.cost_post;
        gj["carbon_pre"] = g.carbon_pre;
        gj["carbon_post"] = g.carbon_post;
        gj["retrofit_cost"] = g.retrofit_cost;
        gj["retrofit_allowed"] = g.retrofit_allowed;
        j["generators"].push_back(gj);
    }
    j["zones"] = json::array();
    for (const auto& z : net.zones) {
        json zj;
        zj["id"] = z.id;
        zj["kind"] = z.kind == VresKind::Wind ? "wind" : "solar";
        zj["lat"] = z.lat;
        zj["lon"] = z.lon;
        zj["bus"] = z.bus;
        zj["area"] = z.area;
        zj["existing_capacity"] = z.existing_capacity;
        zj["footprint"] = z.footprint;
        j["zones"].push_back(zj);
    }
    return j.dump(2);
}

void save_network(const Network& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path);
    out << network_to_json(net) << "\n";
}

TechnologyCatalog parse_catalog(const std::string& text, const std::string& origin) {
    json j = parse_json(text, origin);
    check_keys(j, {"format", "version", "techs"}, origin);
    check_header(j, "tplan-catalog", origin);
    TechnologyCatalog cat;
    const auto& tj = req<json>(j, "techs", origin);
    if (!tj.is_object()) throw ParseError(origin + ": techs must be an object");
    for (auto it = tj.begin(); it != tj.end(); ++it) {
        if (!kTechCodes.count(it.key()))
            throw ParseError(origin + ": unknown technology code '" + it.key() + "'");
        std::string ctx = origin + " tech '" + it.key() + "'";
        check_keys(it.value(),
                   {"label", "capex", "fixed_om", "var_cost", "gmin", "gmax", "ramp_up_f",
                    "ramp_dn_f", "footprint", "lifetime", "emissions", "carbon_price",
                    "charge_max", "discharge_max", "eta_ch", "eta_di", "soc_min", "soc_max",
                    "shelf_degradation", "end_of_life", "sigma_t", "sigma_p", "vu_max", "vl_max",
                    "vu0", "vl0", "w_max", "max_units"},
                   ctx);
        Tech t;
        t.code = it.key();
        const json& v = it.value();
        t.label = opt<std::string>(v, "label", t.code, ctx);
        t.capex = opt<double>(v, "capex", 0.0, ctx);
        t.fixed_om = opt<double>(v, "fixed_om", 0.0, ctx);
        t.var_cost = opt<double>(v, "var_cost", 0.0, ctx);
        t.gmin = opt<double>(v, "gmin", 0.0, ctx);
        t.gmax = opt<double>(v, "gmax", 1.0, ctx);
        t.ramp_up_f = opt<double>(v, "ramp_up_f", 1.0, ctx);
        t.ramp_dn_f = opt<double>(v, "ramp_dn_f", -1.0, ctx);
        t.footprint = opt<double>(v, "footprint", 0.0, ctx);
        t.lifetime = opt<double>(v, "lifetime", 1e9, ctx);
        t.emissions = opt<double>(v, "emissions", 0.0, ctx);
        t.carbon_price = opt<double>(v, "carbon_price", 0.0, ctx);
        t.charge_max = opt<double>(v, "charge_max", 0.0, ctx);
        t.discharge_max = opt<double>(v, "discharge_max", 0.0, ctx);
        t.eta_ch = opt<double>(v, "eta_ch", 1.0, ctx);
        t.eta_di = opt<double>(v, "eta_di", 1.0, ctx);
        t.soc_min = opt<double>(v, "soc_min", 0.0, ctx);
        t.soc_max = opt<double>(v, "soc_max", 0.0, ctx);
        t.shelf_degradation = opt<double>(v, "shelf_degradation", 0.0, ctx);
        t.end_of_life = opt<double>(v, "end_of_life", 0.8, ctx);
        t.sigma_t = opt<double>(v, "sigma_t", 0.0, ctx);
        t.sigma_p = opt<double>(v, "sigma_p", 0.0, ctx);
        t.vu_max = opt<double>(v, "vu_max", 0.0, ctx);
        t.vl_max = opt<double>(v, "vl_max", 0.0, ctx);
        t.vu0 = opt<double>(v, "vu0", 0.0, ctx);
        t.vl0 = opt<double>(v, "vl0", 0.0, ctx);
        t.w_max = opt<double>(v, "w_max", 0.0, ctx);
        t.max_units = opt<int>(v, "max_units", 10, ctx);
        cat.techs[t.code] = std::move(t);
    }
    return cat;
}

TechnologyCatalog load_catalog(const std::string& path) {
    return parse_catalog(slurp(path), path);
}

PlanningHorizon parse_horizon(const std::string& text, const std::string& origin) {
    json j = parse_json(text, origin);
    check_keys(j,
               {"format", "version", "n_stages", "years_per_stage", "co2_targets", "theta_bound",
                "voll", "curtail_wind", "curtail_solar", "soc_convention", "degradation_scale",
                "sssc_margin"},
               origin);
    check_header(j, "tplan-horizon", origin);
    PlanningHorizon hz;
    hz.n_stages = req<int>(j, "n_stages", origin);
    hz.years_per_stage = req<double>(j, "years_per_stage", origin);
    hz.co2_targets = req<std::vector<double>>(j, "co2_targets", origin);
    hz.theta_bound = opt<double>(j, "theta_bound", hz.theta_bound, origin);
    hz.voll = opt<double>(j, "voll", hz.voll, origin);
    hz.curtail_wind = opt<double>(j, "curtail_wind", -1.0, origin);
    hz.curtail_solar = opt<double>(j, "curtail_solar", -1.0, origin);
    std::string soc = opt<std::string>(j, "soc_convention", "physical", origin);
    if (soc == "physical")
        hz.soc_convention = SocConvention::Physical;
    else if (soc == "paper")
        hz.soc_convention = SocConvention::Paper;
    else
        throw ParseError(origin + ": soc_convention must be physical or paper");
    std::string ds = opt<std::string>(j, "degradation_scale", "paper", origin);
    if (ds == "paper")
        hz.degradation_scale = DegradationScale::Paper;
    else if (ds == "daily")
        hz.degradation_scale = DegradationScale::Daily;
    else
        throw ParseError(origin + ": degradation_scale must be paper or daily");
    hz.sssc_margin = opt<double>(j, "sssc_margin", 1e-6, origin);
    return hz;
}

PlanningHorizon load_horizon(const std::string& path) {
    return parse_horizon(slurp(path), path);
}

ValidationReport validate_network(const Network& net) {
    ValidationReport rep;
    auto bad = [&](const std::string& s) { rep.violations.push_back(s); };
    if (net.power_base_mva <= 0) bad("power_base_mva must be positive");
    if (net.buses.empty()) bad("no buses");
    std::set<std::string> ids;
    for (const auto& b : net.buses) {
        if (!ids.insert(b.id).second) bad("duplicate bus id '" + b.id + "'");
        if (b.max_new_connection < 0) bad("bus '" + b.id + "': max_new_connection < 0");
        for (const auto& [k, a] : b.thermal_area)
            if (a < 0) bad("bus '" + b.id + "': negative area for tech " + k);
    }
    std::set<std::string> rids;
    for (const auto& r : net.rows) {
        if (!rids.insert(r.id).second) bad("duplicate row id '" + r.id + "'");
        if (r.reactance <= 0) bad("row '" + r.id + "': reactance must be > 0");
        if (r.from_bus == r.to_bus) bad("row '" + r.id + "': from and to coincide");
        if (r.static_rating_existing < 0 || r.static_rating_new < 0)
            bad("row '" + r.id + "': negative rating");
        if (!r.existing_line && r.static_rating_existing != 0)
            bad("row '" + r.id + "': existing rating without existing line");
        if (r.length_km <= 0) bad("row '" + r.id + "': length must be > 0");
        if (r.sssc_voltage < 0 || r.sssc_cut_in < 0)
            bad("row '" + r.id + "': negative sssc parameter");
    }
    std::set<std::string> gids;
    for (const auto& g : net.generators) {
        if (!gids.insert(g.id).second) bad("duplicate generator id '" + g.id + "'");
        if (g.p_min < 0 || g.p_min > g.p_max)
            bad("generator '" + g.id + "': requires 0 <= p_min <= p_max");
        if (g.emissions_post > g.emissions_pre)
            bad("generator '" + g.id + "': retrofit emissions exceed pre-retrofit");
        if (!(g.ramp_down <= 0 && 0 <= g.ramp_up))
            bad("generator '" + g.id + "': ramps must satisfy ramp_down <= 0 <= ramp_up");
    }
    std::set<std::string> zids;
    for (const auto& z : net.zones) {
        if (!zids.insert(z.id).second) bad("duplicate zone id '" + z.id + "'");
        if (z.area < 0) bad("zone '" + z.id + "': area < 0");
        if (z.existing_capacity < 0) bad("zone '" + z.id + "': existing_capacity < 0");
        if (z.footprint <= 0) bad("zone '" + z.id + "': footprint must be > 0");
        int nb = nearest_bus(net, z.lat, z.lon);
        if (nb >= 0 && net.buses[nb].id != z.bus)
            bad("zone '" + z.id + "': bus association is not the nearest bus");
    }
    // connectivity over existing lines only, reported as a warning
    if (!net.buses.empty()) {
        std::vector<int> comp(net.buses.size(), -1);
        std::vector<int> stack = {0};
        comp[0] = 0;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (const auto& r : net.rows) {
                if (!r.existing_line) continue;
                int a = net.bus_index(r.from_bus), b = net.bus_index(r.to_bus);
                int v = -1;
                if (a == u) v = b;
                if (b == u) v = a;
                if (v >= 0 && comp[v] < 0) {
                    comp[v] = 0;
                    stack.push_back(v);
                }
            }
        }
        int unreached = 0;
        for (int c : comp)
            if (c < 0) unreached++;
        if (unreached > 0)
            rep.warnings.push_back(std::to_string(unreached) +
                                   " bus(es) unreachable over existing lines");
    }
    return rep;
}

ValidationReport validate_catalog(const TechnologyCatalog& cat) {
    ValidationReport rep;
    auto bad = [&](const std::string& s) { rep.violations.push_back(s); };
    for (const auto& [code, t] : cat.techs) {
        if (t.capex < 0 || t.fixed_om < 0 || t.var_cost < 0)
            bad("tech " + code + ": costs must be >= 0");
        if (t.lifetime < 1) bad("tech " + code + ": lifetime must be >= 1 year");
        if (code == "B") {
            if (!(t.eta_ch > 0 && t.eta_ch <= 1 && t.eta_di > 0 && t.eta_di <= 1))
                bad("tech B: efficiencies must lie in (0, 1]");
            if (!(t.soc_min < t.soc_max)) bad("tech B: soc_min must be < soc_max");
            if (t.charge_max <= 0 || t.discharge_max <= 0)
                bad("tech B: charge_max and discharge_max must be > 0");
            if (t.end_of_life <= 0 || t.end_of_life >= 1)
                bad("tech B: end_of_life fraction must lie in (0, 1)");
        }
        if (code == "P") {
            if (t.sigma_t <= 0 || t.sigma_p <= 0) bad("tech P: sigma factors must be > 0");
            if (t.vu_max <= 0 || t.vl_max <= 0) bad("tech P: reservoir bounds must be > 0");
            if (t.vu0 < 0 || t.vu0 > t.vu_max || t.vl0 < 0 || t.vl0 > t.vl_max)
                bad("tech P: initial volumes must lie within reservoir bounds");
            if (t.w_max <= 0) bad("tech P: w_max must be > 0");
        }
        if (code == "F" && t.max_units <= 0) bad("tech F: max_units must be > 0");
        if (t.gmin < 0 || t.gmin > t.gmax) bad("tech " + code + ": requires 0 <= gmin <= gmax");
        if (!(t.ramp_dn_f <= 0 && 0 <= t.ramp_up_f))
            bad("tech " + code + ": ramp factors must satisfy dn <= 0 <= up");
    }
    return rep;
}

ValidationReport validate_horizon(const PlanningHorizon& hz) {
    ValidationReport rep;
    auto bad = [&](const std::string& s) { rep.violations.push_back(s); };
    if (hz.n_stages < 2) bad("n_stages must be >= 2");
    if (hz.years_per_stage <= 0) bad("years_per_stage must be > 0");
    if (static_cast<int>(hz.co2_targets.size()) != hz.n_stages)
        bad("co2_targets must have one entry per stage");
    for (double t : hz.co2_targets)
        if (t < 0) bad("co2 targets must be >= 0");
    if (hz.theta_bound <= 0) bad("theta_bound must be > 0");
    if (hz.voll <= 0) bad("voll must be > 0");
    if (hz.sssc_margin < 0) bad("sssc_margin must be >= 0");
    return rep;
}

} // namespace tplan
