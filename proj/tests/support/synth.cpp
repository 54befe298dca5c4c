#include "support/synth.hpp"

#include "tplan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace tplan::synth {

DayVector flat_day(int hours, const std::vector<std::string>& cols,
                   const std::map<std::string, std::vector<double>>& series) {
    DayVector d;
    d.values.assign(static_cast<size_t>(hours) * cols.size(), 0.0);
    for (size_t c = 0; c < cols.size(); ++c) {
        auto it = series.find(cols[c]);
        if (it == series.end()) continue;
        if (static_cast<int>(it->second.size()) != hours)
            throw ValidationError("synth series length mismatch for " + cols[c]);
        for (int t = 0; t < hours; ++t)
            d.values[static_cast<size_t>(t) * cols.size() + c] = it->second[t];
    }
    return d;
}

MarkovState state_of(std::string label, DayVector day, double lf, double iv, double cf) {
    MarkovState s;
    s.label = std::move(label);
    s.load_factor = lf;
    s.invest_factor = iv;
    s.climate_factor = cf;
    NoiseProfile p;
    p.day = std::move(day);
    p.weight = 1.0;
    p.name = s.label;
    s.profiles.push_back(std::move(p));
    return s;
}

Instance storage_instance(int n_stages, int hours) {
    Instance in;
    Bus a;
    a.id = "a";
    a.name = "a";
    a.max_new_connection = 10;
    a.battery_candidate = true;
    a.hydro_candidate = true;
    in.net.power_base_mva = 100;
    in.net.buses = {a};

    ExistingGenerator g;
    g.id = "g1";
    g.bus = "a";
    g.p_min = 0;
    g.p_max = 1.5;
    g.ramp_up = 5;
    g.ramp_down = -5;
    g.cost_pre = 40;
    g.emissions_pre = 0.5;
    in.net.generators = {g};

    VresZone z;
    z.id = "wz";
    z.kind = VresKind::Wind;
    z.bus = "a";
    z.area = 40;
    z.existing_capacity = 2.0;
    z.footprint = 0.5;
    in.net.zones = {z};

    Tech B;
    B.code = "B";
    B.capex = 90;
    B.fixed_om = 1;
    B.lifetime = 10.0 * n_stages;
    B.charge_max = 0.5;
    B.discharge_max = 0.5;
    B.eta_ch = 0.9;
    B.eta_di = 0.9;
    B.soc_min = 0.1;
    B.soc_max = 1.0;
    B.shelf_degradation = 1e-5;
    B.end_of_life = 0.8;
    Tech P;
    P.code = "P";
    P.capex = 150;
    P.fixed_om = 2;
    P.lifetime = 30.0 * n_stages;
    P.sigma_t = 0.9;
    P.sigma_p = 1.1;
    P.vu_max = 4;
    P.vl_max = 4;
    P.vu0 = 2;
    P.vl0 = 2;
    P.w_max = 1.0;
    in.cat.techs = {{"B", B}, {"P", P}};

    in.hor.n_stages = n_stages;
    in.hor.years_per_stage = 10;
    in.hor.co2_targets.assign(n_stages, 1e9);
    in.hor.voll = 300;

    std::vector<std::string> cols = {"load:a", "wind:wz"};
    std::vector<double> loads(hours), wind(hours);
    for (int t = 0; t < hours; ++t) {
        double u = hours == 1 ? 0.0 : static_cast<double>(t) / (hours - 1);
        loads[t] = 1.0 + 1.4 * std::sin(3.14159265358979 * u);
        wind[t] = std::max(0.0, 0.9 - 1.6 * u + 0.7 * u * u);
    }
    std::vector<std::vector<MarkovState>> stages;
    for (int y = 0; y < n_stages; ++y)
        stages.push_back({state_of("s" + std::to_string(y + 1),
                                   flat_day(hours, cols,
                                            {{"load:a", loads}, {"wind:wz", wind}}))});
    in.chain = build_markov_chain(std::move(stages), {}, cols);
    in.factors.wind = false; // existing zone operates; no VRES candidacy
    return in;
}

Instance sweep_master(const SweepOpts& o) {
    Instance in;
    in.net.power_base_mva = 100;
    for (int i = 0; i < o.n_buses; ++i) {
        Bus b;
        b.id = "bus" + std::to_string(i);
        b.name = b.id;
        b.max_new_connection = 100;
        in.net.buses.push_back(b);
    }
    for (int i = 0; i < o.n_buses; ++i) {
        RightOfWay r;
        r.id = "ln" + std::to_string(i);
        r.from_bus = "bus" + std::to_string(i);
        r.to_bus = "bus" + std::to_string((i + 1) % o.n_buses);
        r.length_km = 100;
        r.reactance = 0.08 + 0.01 * (i % 5);
        r.existing_line = true;
        r.static_rating_existing = 2.5;
        in.net.rows.push_back(r);
    }
    ExistingGenerator g;
    g.id = "gref";
    g.bus = "bus0";
    g.p_max = 3.0 * o.n_buses;
    g.ramp_up = 1e3;
    g.ramp_down = -1e3;
    g.cost_pre = o.gen_cost;
    in.net.generators = {g};

    std::vector<std::string> cols;
    for (int i = 0; i < o.n_buses; ++i) cols.push_back("load:bus" + std::to_string(i));
    for (int j = 0; j < o.n_zones; ++j) {
        VresZone z;
        z.id = "z" + std::to_string(j);
        z.kind = VresKind::Wind;
        z.bus = "bus" + std::to_string(j % o.n_buses);
        z.area = 4;
        // one zone keeps a legacy farm so exclusion only removes candidacy
        z.existing_capacity = j == 0 ? 0.5 : 0.0;
        z.footprint = 1;
        in.net.zones.push_back(z);
        cols.push_back("wind:z" + std::to_string(j));
    }

    Tech W;
    W.code = "W";
    W.capex = 450;
    W.fixed_om = 2;
    W.lifetime = 100;
    in.cat.techs = {{"W", W}};

    in.hor.n_stages = o.n_stages;
    in.hor.years_per_stage = 5;
    in.hor.co2_targets.assign(o.n_stages, 1e9);
    in.hor.voll = 300;

    int T = o.hours;
    std::map<std::string, std::vector<double>> series;
    for (int i = 0; i < o.n_buses; ++i) {
        double scale = 0.8 + 0.4 * ((i * 13) % o.n_buses) / std::max(1, o.n_buses - 1);
        std::vector<double> v(T);
        for (int t = 0; t < T; ++t)
            v[t] = scale * (1.1 + 0.5 * std::sin(2 * 3.14159265358979 * t / std::max(T, 2)));
        series["load:bus" + std::to_string(i)] = v;
    }
    for (int j = 0; j < o.n_zones; ++j) {
        // quality spread is the whole point: good zones beat the backstop,
        // poor ones never pay off
        double q = 0.25 + 0.65 * ((j * 37) % o.n_zones) / std::max(1, o.n_zones - 1);
        std::vector<double> v(T);
        for (int t = 0; t < T; ++t)
            v[t] = std::clamp(
                q * (0.8 + 0.3 * std::sin(2 * 3.14159265358979 * (t + j % 3) / std::max(T, 2))),
                0.0, 1.0);
        series["wind:z" + std::to_string(j)] = v;
    }

    std::vector<std::vector<MarkovState>> stages;
    stages.push_back({state_of("y1", flat_day(T, cols, series))});
    for (int y = 2; y <= o.n_stages; ++y)
        stages.push_back(
            {state_of("y" + std::to_string(y), flat_day(T, cols, series), 1.15)});
    in.chain = build_markov_chain(std::move(stages), {}, cols);
    in.factors = FactorToggles{};
    in.factors.gas = false;
    in.factors.solar = false;
    in.factors.line = false;
    in.factors.battery = false;
    in.factors.hydro = false;
    in.factors.dtr = false;
    in.factors.sssc = false;
    in.factors.retrofit = false;
    in.factors.smr = false;
    in.factors.h2 = false;
    return in;
}

Instance corridor_instance(const CorridorOpts& o) {
    Instance in;
    Bus a, b;
    a.id = "a";
    a.name = "a";
    a.max_new_connection = 10;
    b.id = "b";
    b.name = "b";
    b.max_new_connection = 10;
    in.net.power_base_mva = 100;
    in.net.buses = {a, b};

    RightOfWay r;
    r.id = "r1";
    r.from_bus = "a";
    r.to_bus = "b";
    r.length_km = 120;
    r.reactance = o.reactance;
    r.existing_line = o.existing;
    r.static_rating_existing = o.existing ? o.sste : 0.0;
    r.static_rating_new = o.sstn;
    r.dtr_ref = o.dtr_cand ? "m1" : "";
    r.line_candidate = o.line_cand;
    r.sssc_voltage = o.sssc_v;
    r.sssc_cut_in = o.sssc_cut_in;
    r.sssc_max_units = o.sssc_units;
    in.net.rows = {r};

    ExistingGenerator ga;
    ga.id = "ga";
    ga.bus = "a";
    ga.p_max = o.gen_max;
    ga.ramp_up = 1e3;
    ga.ramp_down = -1e3;
    ga.cost_pre = o.gen_cost;
    in.net.generators = {ga};
    if (o.gen_at_b) {
        ExistingGenerator gb = ga;
        gb.id = "gb";
        gb.bus = "b";
        in.net.generators.push_back(gb);
    }

    Tech L;
    L.code = "L";
    L.capex = 100;
    L.fixed_om = 1;
    L.lifetime = 1000;
    Tech D;
    D.code = "D";
    D.capex = 8;
    D.fixed_om = 0.3;
    D.lifetime = 1000;
    Tech F;
    F.code = "F";
    F.capex = 25;
    F.fixed_om = 0.4;
    F.lifetime = 1000;
    F.max_units = 10;
    in.cat.techs = {{"L", L}, {"D", D}, {"F", F}};

    in.hor.n_stages = o.n_stages;
    in.hor.years_per_stage = 5;
    in.hor.co2_targets.assign(o.n_stages, 1e9);
    in.hor.voll = o.voll;

    std::vector<std::string> cols = {"load:a", "load:b"};
    std::map<std::string, std::vector<double>> series = {
        {"load:a", std::vector<double>(o.hours, o.load_a)},
        {"load:b", std::vector<double>(o.hours, o.load_b)}};
    if (o.dtr_cand) {
        cols.push_back("dtr_e:m1");
        series["dtr_e:m1"] = std::vector<double>(o.hours, o.dtre);
        if (o.line_cand) {
            cols.push_back("dtr_n:m1");
            series["dtr_n:m1"] = std::vector<double>(o.hours, o.dtrn);
        }
    }
    std::vector<std::vector<MarkovState>> stages;
    for (int y = 0; y < o.n_stages; ++y)
        stages.push_back(
            {state_of("s" + std::to_string(y + 1), flat_day(o.hours, cols, series))});
    in.chain = build_markov_chain(std::move(stages), {}, cols);
    return in;
}

Instance thermal_instance(const ThermalOpts& o) {
    Instance in;
    Bus a;
    a.id = "a";
    a.name = "a";
    a.max_new_connection = 10;
    a.thermal_area = {{"G", 10}};
    in.net.power_base_mva = 100;
    in.net.buses = {a};

    ExistingGenerator g;
    g.id = "g1";
    g.bus = "a";
    g.p_min = 0;
    g.p_max = 1.0;
    g.ramp_up = 10;
    g.ramp_down = -10;
    g.cost_pre = 30;
    in.net.generators = {g};

    Tech G;
    G.code = "G";
    G.capex = 50;
    G.fixed_om = 1;
    G.var_cost = 5;
    G.gmax = 1;
    G.footprint = 1;
    G.lifetime = 1000;
    in.cat.techs = {{"G", G}};

    in.hor.n_stages = o.n_stages;
    in.hor.years_per_stage = 10;
    in.hor.co2_targets.assign(o.n_stages, 1e9);
    in.hor.voll = 300;

    std::vector<std::string> cols = {"load:a"};
    DayVector base = flat_day(o.hours, cols, {{"load:a", std::vector<double>(o.hours, 2.0)}});
    DayVector peaky = flat_day(o.hours, cols, {{"load:a", std::vector<double>(o.hours, 2.3)}});

    std::vector<std::vector<MarkovState>> stages;
    std::vector<std::vector<std::vector<double>>> trans;
    stages.push_back({state_of("root", base)});
    for (int y = 2; y <= o.n_stages; ++y) {
        std::string suf = std::to_string(y);
        if (o.branch) {
            MarkovState hi = state_of("hi" + suf, base, 1.3);
            if (o.two_profiles) {
                hi.profiles[0].weight = 0.65;
                NoiseProfile alt;
                alt.day = peaky;
                alt.weight = 0.35;
                alt.name = "peaky" + suf;
                hi.profiles.push_back(std::move(alt));
            }
            stages.push_back({std::move(hi), state_of("lo" + suf, base, 0.8)});
            std::vector<double> row = {o.p_hi, 1.0 - o.p_hi};
            trans.push_back(std::vector<std::vector<double>>(stages[y - 2].size(), row));
        } else {
            stages.push_back({state_of("s" + suf, base)});
            trans.push_back(std::vector<std::vector<double>>(stages[y - 2].size(), {1.0}));
        }
    }
    in.chain = build_markov_chain(std::move(stages), std::move(trans), cols);
    return in;
}

Instance rich_instance(const RichOpts& o) {
    Instance in;
    Bus a, b;
    a.id = "a";
    a.name = "a";
    a.max_new_connection = 6;
    a.thermal_area = {{"G", 10}, {"N", 10}, {"H", 10}};
    a.battery_candidate = true;
    b.id = "b";
    b.name = "b";
    b.max_new_connection = 6;
    b.hydro_candidate = true;
    in.net.power_base_mva = 100;
    in.net.buses = {a, b};

    RightOfWay r1;
    r1.id = "r1";
    r1.from_bus = "a";
    r1.to_bus = "b";
    r1.length_km = 90;
    r1.reactance = 0.06;
    r1.existing_line = true;
    r1.static_rating_existing = 1.2;
    r1.static_rating_new = 1.4;
    r1.dtr_ref = "m1";
    r1.line_candidate = true;
    if (o.sssc) {
        r1.sssc_voltage = 0.06;
        r1.sssc_cut_in = 0.3;
        r1.sssc_max_units = 2;
    }
    RightOfWay r2;
    r2.id = "r2";
    r2.from_bus = "a";
    r2.to_bus = "b";
    r2.length_km = 150;
    r2.reactance = 0.08;
    r2.existing_line = false;
    r2.static_rating_new = 1.0;
    r2.line_candidate = true;
    in.net.rows = {r1, r2};

    ExistingGenerator g1;
    g1.id = "g1";
    g1.bus = "a";
    g1.p_min = 0.15;
    g1.p_max = 3;
    g1.ramp_up = 2;
    g1.ramp_down = -2;
    g1.cost_pre = 30;
    g1.cost_post = 28;
    g1.carbon_pre = 4;
    g1.carbon_post = 1.5;
    g1.emissions_pre = 0.8;
    g1.emissions_post = 0.3;
    g1.retrofit_cost = 50;
    g1.retrofit_allowed = true;
    ExistingGenerator g2;
    g2.id = "g2";
    g2.bus = "b";
    g2.p_max = 3;
    g2.ramp_up = 2;
    g2.ramp_down = -2;
    g2.cost_pre = 35;
    g2.emissions_pre = 0.4;
    in.net.generators = {g1, g2};

    VresZone wz;
    wz.id = "wz";
    wz.kind = VresKind::Wind;
    wz.bus = "b";
    wz.area = 50;
    wz.existing_capacity = 0.5;
    wz.footprint = 0.5;
    VresZone sz;
    sz.id = "sz";
    sz.kind = VresKind::Solar;
    sz.bus = "a";
    sz.area = 30;
    sz.existing_capacity = 0;
    sz.footprint = 0.4;
    in.net.zones = {wz, sz};

    auto mk = [&](const char* code, double capex, double fom, double var, double life) {
        Tech t;
        t.code = code;
        t.capex = capex;
        t.fixed_om = fom;
        t.var_cost = var;
        t.lifetime = life;
        return t;
    };
    double long_life = o.years_per_stage * (o.n_stages + 2);
    Tech G = mk("G", 120, 2, 18, long_life);
    G.ramp_up_f = 0.6;
    G.ramp_dn_f = -0.6;
    G.footprint = 0.3;
    G.carbon_price = 9;
    Tech N = mk("N", 300, 4, 9, long_life);
    N.ramp_up_f = 0.3;
    N.ramp_dn_f = -0.3;
    N.footprint = 0.2;
    Tech H = mk("H", 200, 3, 22, long_life);
    H.ramp_up_f = 0.8;
    H.ramp_dn_f = -0.8;
    H.footprint = 0.25;
    Tech S = mk("S", 60, 1, 0, long_life);
    Tech W = mk("W", 80, 1.5, 0, long_life);
    Tech B = mk("B", 90, 1, 0, o.short_battery ? o.years_per_stage : long_life);
    B.charge_max = 0.5;
    B.discharge_max = 0.5;
    B.eta_ch = 0.92;
    B.eta_di = 0.92;
    B.soc_min = 0.1;
    B.soc_max = 1.0;
    B.shelf_degradation = 1e-5;
    B.end_of_life = 0.8;
    Tech P = mk("P", 150, 2, 0, long_life);
    P.sigma_t = 0.85;
    P.sigma_p = 1.1;
    P.vu_max = 6;
    P.vl_max = 6;
    P.vu0 = 3;
    P.vl0 = 3;
    P.w_max = 1.5;
    Tech L = mk("L", 100, 1, 0, long_life);
    Tech D = mk("D", 8, 0.3, 0, long_life);
    Tech F = mk("F", 25, 0.4, 0, long_life);
    F.max_units = 10;
    Tech R = mk("R", 0, 1, 0, long_life);
    for (const Tech& t : {G, N, H, S, W, B, P, L, D, F, R}) in.cat.techs[t.code] = t;

    in.hor.n_stages = o.n_stages;
    in.hor.years_per_stage = o.years_per_stage;
    in.hor.co2_targets.assign(o.n_stages, o.co2_cap);
    in.hor.voll = 500;

    std::vector<std::string> cols = {"load:a", "load:b", "wind:wz",
                                     "solar:sz", "dtr_e:m1", "dtr_n:m1"};
    int T = o.hours;
    auto wave = [&](double base, double amp, double phase) {
        std::vector<double> v(T);
        for (int t = 0; t < T; ++t)
            v[t] = base + amp * std::sin(2 * 3.14159265358979 * (t + phase) / std::max(T, 2));
        return v;
    };
    std::map<std::string, std::vector<double>> series = {
        {"load:a", wave(1.2, 0.4, 0.0)},  {"load:b", wave(1.0, 0.4, 1.0)},
        {"wind:wz", wave(0.45, 0.25, 2.0)}, {"solar:sz", wave(0.3, 0.3, 0.5)},
        {"dtr_e:m1", wave(1.3, 0.05, 0.0)}, {"dtr_n:m1", wave(1.5, 0.05, 0.0)}};
    for (auto& [k, v] : series)
        for (double& x : v) x = std::max(0.0, x);

    auto day_scaled = [&](double f) {
        std::map<std::string, std::vector<double>> s2 = series;
        for (auto& [k, v] : s2)
            for (double& x : v) x *= f;
        return flat_day(T, cols, s2);
    };

    std::vector<std::vector<MarkovState>> stages;
    stages.push_back({state_of("root", day_scaled(1.0))});
    for (int y = 2; y <= o.n_stages; ++y) {
        if (o.branch) {
            MarkovState hi = state_of("hi" + std::to_string(y), day_scaled(1.0), 1.2, 0.95, 1.1);
            MarkovState lo = state_of("lo" + std::to_string(y), day_scaled(1.0), 0.9, 1.0, 0.95);
            if (o.second_profile) {
                NoiseProfile q;
                q.day = day_scaled(1.12);
                q.weight = 0.4;
                q.name = "alt";
                hi.profiles[0].weight = 0.6;
                hi.profiles.push_back(q);
            }
            stages.push_back({hi, lo});
        } else {
            stages.push_back({state_of("mid" + std::to_string(y), day_scaled(1.0), 1.05, 1.0, 1.0)});
        }
    }
    in.chain = build_markov_chain(std::move(stages), {}, cols);
    return in;
}

} // namespace tplan::synth
