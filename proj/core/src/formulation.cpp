#include "tplan/formulation.hpp"
#include "tplan/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

namespace tplan {

namespace {

constexpr std::array<char, 3> kThermal = {'G', 'N', 'H'};

std::string code_of(char c) { return std::string(1, c); }

int lifetime_stages(double lifetime_years, double years_per_stage) {
    return static_cast<int>(std::ceil(lifetime_years / years_per_stage - 1e-9));
}

// lifetime constraint family per allocation tech; 0 means no such constraint
int lifetime_family(char tech) {
    switch (tech) {
    case 'D': case 'F': return 5;
    case 'B': case 'P': return 6;
    case 'R': return 7;
    default: return 0;
    }
}

// realized exogenous data for one (state, profile): load and capacity factors
// scaled by the state's long-term factors, dtr ratings per carrying class
struct Realization {
    std::vector<std::vector<double>> load;          // [bus][t]
    std::vector<std::vector<double>> cf;            // [zone][t]
    std::vector<std::vector<double>> dtr_e, dtr_n;  // [row][t], empty when unused
};

struct ColRegistry {
    std::map<std::string, int> by_name;
    explicit ColRegistry(const std::vector<std::string>& cols) {
        for (size_t i = 0; i < cols.size(); ++i) by_name[cols[i]] = static_cast<int>(i);
    }
    int require(const std::string& key) const {
        auto it = by_name.find(key);
        if (it == by_name.end())
            throw ValidationError("scenario columns missing '" + key + "'");
        return it->second;
    }
};

Realization realize(const Instance& inst, const MarkovState& st, int profile_idx,
                    const StateLayout& lay) {
    const Network& net = inst.net;
    const auto& day = st.profiles.at(profile_idx).day;
    const int dims = static_cast<int>(inst.chain.columns.size());
    const int T = inst.chain.hours();
    if (static_cast<int>(day.values.size()) != T * dims)
        throw ValidationError("profile day length mismatch in state '" + st.label + "'");
    ColRegistry reg(inst.chain.columns);
    auto at = [&](int col, int t) { return day.values[static_cast<size_t>(t) * dims + col]; };

    Realization r;
    r.load.assign(net.buses.size(), std::vector<double>(T, 0.0));
    for (size_t b = 0; b < net.buses.size(); ++b) {
        int c = reg.require("load:" + net.buses[b].id);
        for (int t = 0; t < T; ++t) r.load[b][t] = std::max(0.0, at(c, t) * st.load_factor);
    }
    r.cf.assign(net.zones.size(), std::vector<double>(T, 0.0));
    for (size_t z = 0; z < net.zones.size(); ++z) {
        const char* pfx = net.zones[z].kind == VresKind::Wind ? "wind:" : "solar:";
        int c = reg.require(pfx + net.zones[z].id);
        for (int t = 0; t < T; ++t)
            r.cf[z][t] = std::clamp(at(c, t) * st.climate_factor, 0.0, 1.0);
    }
    r.dtr_e.assign(net.rows.size(), {});
    r.dtr_n.assign(net.rows.size(), {});
    for (size_t l = 0; l < net.rows.size(); ++l) {
        if (lay.row_dtr[l] < 0) continue;
        const auto& row = net.rows[l];
        if (row.existing_line) {
            int c = reg.require("dtr_e:" + row.dtr_ref);
            r.dtr_e[l].resize(T);
            for (int t = 0; t < T; ++t) r.dtr_e[l][t] = std::max(0.0, at(c, t) * st.climate_factor);
        }
        if (lay.row_line[l] >= 0) {
            int c = reg.require("dtr_n:" + row.dtr_ref);
            r.dtr_n[l].resize(T);
            for (int t = 0; t < T; ++t) r.dtr_n[l][t] = std::max(0.0, at(c, t) * st.climate_factor);
        }
    }
    return r;
}

struct Penalties {
    double voll, wind, solar;
};

Penalties penalties_of(const Instance& inst) {
    double def = curtailment_penalty(inst);
    Penalties p;
    p.voll = inst.hor.voll;
    p.wind = inst.hor.curtail_wind >= 0 ? inst.hor.curtail_wind : def;
    p.solar = inst.hor.curtail_solar >= 0 ? inst.hor.curtail_solar : def;
    return p;
}

class Builder {
public:
    explicit Builder(const Instance& inst)
        : inst_(inst), net_(inst.net), lay_(build_state_layout(inst)),
          T_(inst.chain.hours()), pen_(penalties_of(inst)) {
        carries_.resize(net_.rows.size());
        for (size_t l = 0; l < net_.rows.size(); ++l)
            carries_[l] = net_.rows[l].existing_line || lay_.row_line[l] >= 0;
        if (static_cast<int>(inst.hor.co2_targets.size()) < inst.chain.n_stages())
            throw ValidationError("horizon lacks a CO2 target for every stage");
    }

    Lp lp;
    std::set<std::string> extra;

    const StateLayout& layout() const { return lay_; }

    double invest_coef(const StateEntry& e, int stage, double zeta) {
        const auto& hor = inst_.hor;
        const int rem = inst_.chain.n_stages() - stage + 1;
        extra.insert("2");
        extra.insert("67");
        extra.insert("68");
        auto unit = [&](const Tech& th) {
            return stage_investment_cost(th.capex, th.fixed_om, hor.years_per_stage, rem, zeta);
        };
        switch (e.tech) {
        case 'G': case 'N': case 'H': case 'S': case 'W': case 'B': case 'P':
            return unit(inst_.cat.at(code_of(e.tech)));
        case 'L': {
            const auto& th = inst_.cat.at("L");
            double len = net_.rows[e.subject].length_km;
            return stage_investment_cost(th.capex * len, th.fixed_om * len,
                                         hor.years_per_stage, rem, zeta);
        }
        case 'D': {
            const auto& th = inst_.cat.at("D");
            double cnt = std::ceil(net_.rows[e.subject].length_km / 3.0 - 1e-9);
            cnt = std::max(1.0, cnt);
            return stage_investment_cost(th.capex, th.fixed_om, hor.years_per_stage, rem, zeta) * cnt;
        }
        case 'F':
            return unit(inst_.cat.at("F"));
        case 'R': {
            const auto& gen = net_.generators[e.subject];
            double fom = inst_.cat.has("R") ? inst_.cat.at("R").fixed_om : 0.0;
            return stage_investment_cost(gen.retrofit_cost, fom, hor.years_per_stage, rem, zeta);
        }
        case 'V': return 0.0;
        default: return 0.0;
        }
    }

    // creates the decision and outgoing-state columns plus transition-side rows
    StageBlock transition(int stage, int state_idx, const std::vector<int>& z_in,
                          double invest_weight, double zeta, const std::string& pfx) {
        StageBlock blk;
        blk.stage = stage;
        blk.state = state_idx;
        blk.z_in = z_in;
        blk.invest_weight = invest_weight;
        for (const auto& e : lay_.entries) {
            VarKind k = e.integral ? (e.ub <= 1.0 ? VarKind::Binary : VarKind::Integer)
                                   : VarKind::Continuous;
            double cost = invest_weight * invest_coef(e, stage, zeta);
            blk.delta.push_back(lp.add_var(pfx + ":d:" + e.name, 0.0, e.ub, cost, k, "delta"));
        }
        for (const auto& e : lay_.entries)
            blk.z_out.push_back(
                lp.add_var(pfx + ":z:" + e.name, 0.0, e.ub, 0.0, VarKind::Continuous, "zout"));
        for (int k = 0; k < lay_.size(); ++k) {
            int r = lp.add_row(RowSense::EQ, 0.0, pfx + ":def:" + lay_.entries[k].name, "state");
            lp.add_entry(r, blk.z_out[k], 1.0);
            lp.add_entry(r, blk.delta[k], -1.0);
            if (!z_in.empty()) lp.add_entry(r, z_in[k], -1.0);
        }

        // connection cap per bus over all new capacity routed to it
        for (size_t b = 0; b < net_.buses.size(); ++b) {
            std::vector<int> cols;
            for (int m = 0; m < 3; ++m)
                if (lay_.cap_at[b][m] >= 0) cols.push_back(blk.z_out[lay_.cap_at[b][m]]);
            for (size_t z = 0; z < net_.zones.size(); ++z)
                if (lay_.zone_cap[z] >= 0 && net_.zones[z].bus == net_.buses[b].id)
                    cols.push_back(blk.z_out[lay_.zone_cap[z]]);
            if (cols.empty()) continue;
            int r = lp.add_row(RowSense::LE, net_.buses[b].max_new_connection,
                               pfx + ":conn:" + net_.buses[b].id, "4");
            for (int c : cols) lp.add_entry(r, c, 1.0);
        }
        // area limits
        for (size_t b = 0; b < net_.buses.size(); ++b)
            for (int m = 0; m < 3; ++m) {
                int k = lay_.cap_at[b][m];
                if (k < 0) continue;
                const Tech& th = inst_.cat.at(code_of(kThermal[m]));
                double area = net_.buses[b].thermal_area.at(code_of(kThermal[m]));
                int r = lp.add_row(RowSense::LE, area,
                                   pfx + ":area:" + lay_.entries[k].name, "9");
                lp.add_entry(r, blk.z_out[k], th.footprint);
            }
        for (size_t z = 0; z < net_.zones.size(); ++z) {
            int k = lay_.zone_cap[z];
            if (k < 0) continue;
            int r = lp.add_row(RowSense::LE, net_.zones[z].area,
                               pfx + ":area:" + lay_.entries[k].name, "10");
            lp.add_entry(r, blk.z_out[k], net_.zones[z].footprint);
        }
        // sensors and injectors only on corridors with a conductor
        for (size_t l = 0; l < net_.rows.size(); ++l) {
            double n_l = net_.rows[l].existing_line ? 1.0 : 0.0;
            int kl = lay_.row_line[l];
            if (int kd = lay_.row_dtr[l]; kd >= 0) {
                int r = lp.add_row(RowSense::LE, n_l, pfx + ":onln:" + lay_.entries[kd].name, "8");
                lp.add_entry(r, blk.delta[kd], 1.0);
                if (kl >= 0) lp.add_entry(r, blk.z_out[kl], -1.0);
            }
            if (int kf = lay_.row_sssc[l]; kf >= 0) {
                double ubf = lay_.entries[kf].ub;
                int r = lp.add_row(RowSense::LE, ubf * n_l,
                                   pfx + ":onln:" + lay_.entries[kf].name, "8");
                lp.add_entry(r, blk.delta[kf], 1.0);
                if (kl >= 0) lp.add_entry(r, blk.z_out[kl], -ubf);
            }
            if (int kv = lay_.row_and[l]; kv >= 0) {
                int kd = lay_.row_dtr[l];
                int r = lp.add_row(RowSense::LE, 0.0, pfx + ":and_l:" + net_.rows[l].id, "50");
                lp.add_entry(r, blk.z_out[kv], 1.0);
                lp.add_entry(r, blk.z_out[kl], -1.0);
                r = lp.add_row(RowSense::LE, 0.0, pfx + ":and_d:" + net_.rows[l].id, "51");
                lp.add_entry(r, blk.z_out[kv], 1.0);
                lp.add_entry(r, blk.z_out[kd], -1.0);
                r = lp.add_row(RowSense::GE, -1.0, pfx + ":and_b:" + net_.rows[l].id, "52");
                lp.add_entry(r, blk.z_out[kv], 1.0);
                lp.add_entry(r, blk.z_out[kl], -1.0);
                lp.add_entry(r, blk.z_out[kd], -1.0);
                extra.insert("53");
            }
        }
        return blk;
    }

    // cumulative form of the allocation-lifetime limits, valid when every
    // lifetime spans the remaining horizon
    void lifetime_rows_cumulative(const StageBlock& blk, const std::string& pfx) {
        for (int k = 0; k < lay_.size(); ++k) {
            int fam = lifetime_family(lay_.entries[k].tech);
            if (fam == 0) continue;
            double cap = lay_.entries[k].tech == 'F' ? lay_.entries[k].ub : 1.0;
            int r = lp.add_row(RowSense::LE, cap, pfx + ":life:" + lay_.entries[k].name,
                               std::to_string(fam) + "b");
            lp.add_entry(r, blk.z_out[k], 1.0);
        }
    }

    double tech_lifetime(char tech, int subject) const {
        if (tech == 'R') return inst_.cat.has("R") ? inst_.cat.at("R").lifetime : 1e9;
        (void)subject;
        return inst_.cat.at(code_of(tech)).lifetime;
    }

    void require_full_horizon_lifetimes() const {
        for (const auto& e : lay_.entries) {
            if (lifetime_family(e.tech) == 0) continue;
            int g = lifetime_stages(tech_lifetime(e.tech, e.subject), inst_.hor.years_per_stage);
            if (g < inst_.chain.n_stages())
                throw ValidationError("stage decomposition requires full-horizon lifetimes; '" +
                                      e.name + "' renews mid-horizon");
        }
    }

    // one representative-day operations block; weight multiplies every cost term
    OpsIndex operations(StageBlock& blk, const MarkovState& st, int profile_idx, double weight,
                        const std::string& pfx) {
        extra.insert("3");
        const int T = T_;
        const int nb = static_cast<int>(net_.buses.size());
        const int nz = static_cast<int>(net_.zones.size());
        const int nr = static_cast<int>(net_.rows.size());
        const int ng = static_cast<int>(net_.generators.size());
        Realization R = realize(inst_, st, profile_idx, lay_);
        OpsIndex ox;
        ox.profile = profile_idx;
        auto zin = [&](int k) { return blk.z_in.empty() ? -1 : blk.z_in[k]; };
        auto put = [&](int row, int col, double c) {
            if (col >= 0 && c != 0.0) lp.add_entry(row, col, c);
        };
        auto tname = [&](const char* base, const std::string& id, int t) {
            return pfx + ":" + base + ":" + id + ":" + std::to_string(t);
        };

        // angles and flows
        double tb = inst_.hor.theta_bound;
        ox.angle.assign(nb, std::vector<int>(T, -1));
        for (int b = 0; b < nb; ++b)
            for (int t = 0; t < T; ++t)
                ox.angle[b][t] =
                    lp.add_var(tname("th", net_.buses[b].id, t), -tb, tb, 0.0,
                               VarKind::Continuous, "theta");
        extra.insert("21");
        ox.flow.assign(nr, {});
        ox.inject.assign(nr, {});
        for (int l = 0; l < nr; ++l) {
            if (!carries_[l]) continue;
            ox.flow[l].assign(T, -1);
            for (int t = 0; t < T; ++t)
                ox.flow[l][t] = lp.add_var(tname("f", net_.rows[l].id, t), -kInf, kInf, 0.0,
                                           VarKind::Continuous, "flow");
            if (lay_.row_sssc[l] >= 0) {
                ox.inject[l].assign(T, -1);
                for (int t = 0; t < T; ++t)
                    ox.inject[l][t] = lp.add_var(tname("df", net_.rows[l].id, t), -kInf, kInf,
                                                 0.0, VarKind::Continuous, "inject");
            }
        }

        // generation
        ox.p_exist.assign(ng, std::vector<int>(T, -1));
        ox.p_retro.assign(ng, std::vector<int>(T, -1));
        for (int g = 0; g < ng; ++g) {
            const auto& gen = net_.generators[g];
            bool retro = lay_.gen_retro[g] >= 0;
            double clb = retro ? 0.0 : gen.p_min;
            for (int t = 0; t < T; ++t)
                ox.p_exist[g][t] = lp.add_var(tname("pe", gen.id, t), clb, gen.p_max,
                                              weight * (gen.cost_pre + gen.carbon_pre),
                                              VarKind::Continuous, "p_exist");
            if (!retro) extra.insert("11");
            if (retro)
                for (int t = 0; t < T; ++t)
                    ox.p_retro[g][t] = lp.add_var(tname("pc", gen.id, t), 0.0, gen.p_max,
                                                  weight * (gen.cost_post + gen.carbon_post),
                                                  VarKind::Continuous, "p_retro");
        }
        ox.p_new.assign(nb, {});
        for (int b = 0; b < nb; ++b)
            for (int m = 0; m < 3; ++m) {
                if (lay_.cap_at[b][m] < 0) continue;
                const Tech& th = inst_.cat.at(code_of(kThermal[m]));
                ox.p_new[b][m].assign(T, -1);
                for (int t = 0; t < T; ++t)
                    ox.p_new[b][m][t] =
                        lp.add_var(tname("pn", net_.buses[b].id + code_of(kThermal[m]), t), 0.0,
                                   kInf, weight * (th.var_cost + th.carbon_price),
                                   VarKind::Continuous, "p_new");
            }
        ox.shed.assign(nb, std::vector<int>(T, -1));
        for (int b = 0; b < nb; ++b)
            for (int t = 0; t < T; ++t)
                ox.shed[b][t] = lp.add_var(tname("sh", net_.buses[b].id, t), 0.0, R.load[b][t],
                                           weight * pen_.voll, VarKind::Continuous, "shed");
        extra.insert("15");
        ox.curtail.assign(nz, std::vector<int>(T, -1));
        for (int z = 0; z < nz; ++z) {
            double pc = net_.zones[z].kind == VresKind::Wind ? pen_.wind : pen_.solar;
            for (int t = 0; t < T; ++t)
                ox.curtail[z][t] = lp.add_var(tname("cu", net_.zones[z].id, t), 0.0, kInf,
                                              weight * pc, VarKind::Continuous, "curtail");
        }

        // storage and hydro variables
        const bool has_batt = !lay_.batt_buses.empty();
        const Tech* bt = has_batt ? &inst_.cat.at("B") : nullptr;
        int nbat = static_cast<int>(lay_.batt_buses.size());
        ox.charge.assign(nbat, std::vector<int>(T, -1));
        ox.discharge.assign(nbat, std::vector<int>(T, -1));
        ox.soc.assign(nbat, std::vector<int>(T, -1));
        ox.excl.assign(nbat, std::vector<int>(T, -1));
        ox.wear.assign(nbat, std::vector<int>(T, -1));
        for (int i = 0; i < nbat; ++i) {
            const std::string& id = net_.buses[lay_.batt_buses[i]].id;
            for (int t = 0; t < T; ++t) {
                ox.charge[i][t] = lp.add_var(tname("bc", id, t), 0.0, bt->charge_max, 0.0,
                                             VarKind::Continuous, "charge");
                ox.discharge[i][t] = lp.add_var(tname("bd", id, t), 0.0, bt->discharge_max, 0.0,
                                                VarKind::Continuous, "discharge");
                double hi = t == 0 ? bt->soc_min : bt->soc_max;
                ox.soc[i][t] = lp.add_var(tname("soc", id, t), bt->soc_min, hi, 0.0,
                                          VarKind::Continuous, "soc");
                ox.excl[i][t] = lp.add_var(tname("bx", id, t), 0.0, 1.0, 0.0,
                                           VarKind::Binary, "excl");
                ox.wear[i][t] = lp.add_var(tname("dg", id, t), 0.0, kInf, 0.0,
                                           VarKind::Continuous, "wear");
            }
            extra.insert("27");
        }
        const bool has_hydro = !lay_.hydro_buses.empty();
        const Tech* pt = has_hydro ? &inst_.cat.at("P") : nullptr;
        int nhyd = static_cast<int>(lay_.hydro_buses.size());
        ox.turb.assign(nhyd, std::vector<int>(T, -1));
        ox.pump.assign(nhyd, std::vector<int>(T, -1));
        ox.vol_up.assign(nhyd, std::vector<int>(T, -1));
        ox.vol_lo.assign(nhyd, std::vector<int>(T, -1));
        std::vector<std::vector<int>> p_turb(nhyd, std::vector<int>(T, -1));
        std::vector<std::vector<int>> p_pump(nhyd, std::vector<int>(T, -1));
        for (int i = 0; i < nhyd; ++i) {
            const std::string& id = net_.buses[lay_.hydro_buses[i]].id;
            for (int t = 0; t < T; ++t) {
                ox.turb[i][t] = lp.add_var(tname("wt", id, t), 0.0, kInf, 0.0,
                                           VarKind::Continuous, "turb");
                ox.pump[i][t] = lp.add_var(tname("wp", id, t), 0.0, kInf, 0.0,
                                           VarKind::Continuous, "pump");
                bool edge = t == 0;
                bool last = t == T - 1;
                double lo_u = edge ? pt->vu0 : (last ? pt->vu0 : 0.0);
                double hi_u = edge ? pt->vu0 : pt->vu_max;
                double lo_l = edge ? pt->vl0 : (last ? pt->vl0 : 0.0);
                double hi_l = edge ? pt->vl0 : pt->vl_max;
                ox.vol_up[i][t] = lp.add_var(tname("vu", id, t), lo_u, hi_u, 0.0,
                                             VarKind::Continuous, "vol_up");
                ox.vol_lo[i][t] = lp.add_var(tname("vl", id, t), lo_l, hi_l, 0.0,
                                             VarKind::Continuous, "vol_lo");
                p_turb[i][t] = lp.add_var(tname("pt", id, t), 0.0, kInf, 0.0,
                                          VarKind::Continuous, "p_turb");
                p_pump[i][t] = lp.add_var(tname("pp", id, t), 0.0, kInf, 0.0,
                                          VarKind::Continuous, "p_pump");
            }
            extra.insert("35");
            extra.insert("36");
            extra.insert("37");
            extra.insert("38");
        }

        // output windows of existing units switch with the retrofit state
        for (int g = 0; g < ng; ++g) {
            const auto& gen = net_.generators[g];
            int kr = lay_.gen_retro[g];
            if (kr < 0) continue;
            for (int t = 0; t < T; ++t) {
                int r = lp.add_row(RowSense::GE, gen.p_min, tname("gmin", gen.id, t), "11a");
                lp.add_entry(r, ox.p_exist[g][t], 1.0);
                put(r, zin(kr), gen.p_min);
                r = lp.add_row(RowSense::LE, gen.p_max, tname("gmax", gen.id, t), "11b");
                lp.add_entry(r, ox.p_exist[g][t], 1.0);
                put(r, zin(kr), gen.p_max);
                r = lp.add_row(RowSense::LE, 0.0, tname("rmax", gen.id, t), "12");
                lp.add_entry(r, ox.p_retro[g][t], 1.0);
                put(r, zin(kr), -gen.p_max);
                if (blk.z_in.empty()) {
                    // incoming state is zero: the retrofitted unit cannot run yet
                    lp.ub[ox.p_retro[g][t]] = 0.0;
                } else {
                    r = lp.add_row(RowSense::GE, 0.0, tname("rmin", gen.id, t), "12");
                    lp.add_entry(r, ox.p_retro[g][t], 1.0);
                    lp.add_entry(r, zin(kr), -gen.p_min);
                }
            }
        }
        for (int b = 0; b < nb; ++b)
            for (int m = 0; m < 3; ++m) {
                int k = lay_.cap_at[b][m];
                if (k < 0) continue;
                const Tech& th = inst_.cat.at(code_of(kThermal[m]));
                for (int t = 0; t < T; ++t) {
                    int col = ox.p_new[b][m][t];
                    if (blk.z_in.empty()) {
                        lp.ub[col] = 0.0;
                        continue;
                    }
                    int r = lp.add_row(RowSense::LE, 0.0,
                                       tname("nmax", net_.buses[b].id + code_of(kThermal[m]), t),
                                       "13");
                    lp.add_entry(r, col, 1.0);
                    lp.add_entry(r, zin(k), -th.gmax);
                    r = lp.add_row(RowSense::GE, 0.0,
                                   tname("nmin", net_.buses[b].id + code_of(kThermal[m]), t),
                                   "13");
                    lp.add_entry(r, col, 1.0);
                    lp.add_entry(r, zin(k), -th.gmin);
                }
            }

        // emission budget for this representative day
        {
            double target = inst_.hor.co2_targets[blk.stage - 1];
            int r = lp.add_row(RowSense::LE, target, pfx + ":co2", "14");
            for (int g = 0; g < ng; ++g) {
                const auto& gen = net_.generators[g];
                for (int t = 0; t < T; ++t) {
                    put(r, ox.p_exist[g][t], gen.emissions_pre);
                    put(r, ox.p_retro[g][t], gen.emissions_post);
                }
            }
        }

        // available output caps curtailment
        for (int z = 0; z < nz; ++z) {
            int k = lay_.zone_cap[z];
            for (int t = 0; t < T; ++t) {
                int r = lp.add_row(RowSense::LE, R.cf[z][t] * net_.zones[z].existing_capacity,
                                   tname("avail", net_.zones[z].id, t), "16");
                lp.add_entry(r, ox.curtail[z][t], 1.0);
                if (k >= 0) put(r, zin(k), -R.cf[z][t]);
            }
        }

        // ramping
        for (int g = 0; g < ng; ++g) {
            const auto& gen = net_.generators[g];
            for (int t = 1; t < T; ++t) {
                int r = lp.add_row(RowSense::LE, gen.ramp_up, tname("rup", gen.id, t), "17");
                lp.add_entry(r, ox.p_exist[g][t], 1.0);
                lp.add_entry(r, ox.p_exist[g][t - 1], -1.0);
                r = lp.add_row(RowSense::GE, gen.ramp_down, tname("rdn", gen.id, t), "17");
                lp.add_entry(r, ox.p_exist[g][t], 1.0);
                lp.add_entry(r, ox.p_exist[g][t - 1], -1.0);
                if (ox.p_retro[g][t] >= 0) {
                    r = lp.add_row(RowSense::LE, gen.ramp_up, tname("crup", gen.id, t), "18");
                    lp.add_entry(r, ox.p_retro[g][t], 1.0);
                    lp.add_entry(r, ox.p_retro[g][t - 1], -1.0);
                    r = lp.add_row(RowSense::GE, gen.ramp_down, tname("crdn", gen.id, t), "18");
                    lp.add_entry(r, ox.p_retro[g][t], 1.0);
                    lp.add_entry(r, ox.p_retro[g][t - 1], -1.0);
                }
            }
        }
        for (int b = 0; b < nb; ++b)
            for (int m = 0; m < 3; ++m) {
                int k = lay_.cap_at[b][m];
                if (k < 0 || blk.z_in.empty()) continue;
                const Tech& th = inst_.cat.at(code_of(kThermal[m]));
                for (int t = 1; t < T; ++t) {
                    int r = lp.add_row(RowSense::GE, 0.0,
                                       tname("ndn", net_.buses[b].id + code_of(kThermal[m]), t),
                                       "19a");
                    lp.add_entry(r, ox.p_new[b][m][t], 1.0);
                    lp.add_entry(r, ox.p_new[b][m][t - 1], -1.0);
                    lp.add_entry(r, zin(k), -th.ramp_dn_f);
                    r = lp.add_row(RowSense::LE, 0.0,
                                   tname("nup", net_.buses[b].id + code_of(kThermal[m]), t),
                                   "19b");
                    lp.add_entry(r, ox.p_new[b][m][t], 1.0);
                    lp.add_entry(r, ox.p_new[b][m][t - 1], -1.0);
                    lp.add_entry(r, zin(k), -th.ramp_up_f);
                }
            }

        // power flow definition and corridor capacity
        for (int l = 0; l < nr; ++l) {
            if (!carries_[l]) continue;
            const auto& row = net_.rows[l];
            int j = net_.bus_index(row.from_bus);
            int kk = net_.bus_index(row.to_bus);
            double invx = 1.0 / row.reactance;
            int kl = lay_.row_line[l];
            int kd = lay_.row_dtr[l];
            int kv = lay_.row_and[l];
            int kf = lay_.row_sssc[l];
            double sste = row.static_rating_existing;
            double sstn = row.static_rating_new;
            double dtre_max = 0, dtrn_max = 0;
            for (int t = 0; t < T; ++t) {
                if (!R.dtr_e[l].empty()) dtre_max = std::max(dtre_max, R.dtr_e[l][t]);
                if (!R.dtr_n[l].empty()) dtrn_max = std::max(dtrn_max, R.dtr_n[l][t]);
            }
            double capmax = std::max(sstn, dtrn_max) + std::max(sste, dtre_max);
            double df_max = kf >= 0 ? lay_.entries[kf].ub * row.sssc_voltage * invx : 0.0;
            for (int t = 0; t < T; ++t) {
                int f = ox.flow[l][t];
                int df = kf >= 0 ? ox.inject[l][t] : -1;
                if (row.existing_line) {
                    int r = lp.add_row(RowSense::EQ, 0.0, tname("pf", row.id, t), "22");
                    lp.add_entry(r, f, 1.0);
                    lp.add_entry(r, ox.angle[j][t], -invx);
                    lp.add_entry(r, ox.angle[kk][t], invx);
                    put(r, df, -1.0);
                } else {
                    // the flow rule only binds once a line is built on the corridor
                    double big = capmax + 2.0 * tb * invx + df_max;
                    int r = lp.add_row(RowSense::LE, big, tname("pfu", row.id, t), "22");
                    lp.add_entry(r, f, 1.0);
                    lp.add_entry(r, ox.angle[j][t], -invx);
                    lp.add_entry(r, ox.angle[kk][t], invx);
                    put(r, df, -1.0);
                    put(r, zin(kl), big);
                    r = lp.add_row(RowSense::LE, big, tname("pfl", row.id, t), "22");
                    lp.add_entry(r, f, -1.0);
                    lp.add_entry(r, ox.angle[j][t], invx);
                    lp.add_entry(r, ox.angle[kk][t], -invx);
                    put(r, df, 1.0);
                    put(r, zin(kl), big);
                }
                // effective capacity: static or dynamic rating, existing plus new build
                double dtre = R.dtr_e[l].empty() ? 0.0 : R.dtr_e[l][t];
                double dtrn = R.dtr_n[l].empty() ? 0.0 : R.dtr_n[l][t];
                for (int sgn : {+1, -1}) {
                    int r = lp.add_row(RowSense::LE, sste,
                                       tname(sgn > 0 ? "capu" : "capl", row.id, t), "49");
                    lp.add_entry(r, f, static_cast<double>(sgn));
                    if (kl >= 0) put(r, zin(kl), -sstn);
                    if (kd >= 0) put(r, zin(kd), sste - dtre);
                    if (kv >= 0) put(r, zin(kv), sstn - dtrn);
                }
                // injection window scales with installed units
                if (kf >= 0) {
                    double vx = row.sssc_voltage * invx;
                    int r = lp.add_row(RowSense::LE, 0.0, tname("inju", row.id, t), "56");
                    lp.add_entry(r, df, 1.0);
                    put(r, zin(kf), -vx);
                    if (blk.z_in.empty()) { /* zero incoming: df forced to 0 */ }
                    r = lp.add_row(RowSense::LE, 0.0, tname("injl", row.id, t), "59");
                    lp.add_entry(r, df, -1.0);
                    put(r, zin(kf), -vx);
                    // cut-in: injection allowed only when |f| clears the threshold
                    double mf = 2.0 * std::max(std::max(sste, sstn), std::max(dtre_max, dtrn_max));
                    mf = std::max(mf, 1.0);
                    double mdx = (lay_.entries[kf].ub + 1.0) * invx;
                    double c = row.sssc_cut_in + inst_.hor.sssc_margin;
                    int ua = lp.add_var(tname("ua", row.id, t), 0.0, 1.0, 0.0, VarKind::Binary,
                                        "cutin");
                    int ub_ = lp.add_var(tname("ub", row.id, t), 0.0, 1.0, 0.0, VarKind::Binary,
                                         "cutin");
                    r = lp.add_row(RowSense::LE, 0.0, tname("injw_l", row.id, t), "60a");
                    lp.add_entry(r, df, -1.0);
                    lp.add_entry(r, ua, -mdx);
                    lp.add_entry(r, ub_, -mdx);
                    r = lp.add_row(RowSense::LE, 0.0, tname("injw_u", row.id, t), "60b");
                    lp.add_entry(r, df, 1.0);
                    lp.add_entry(r, ua, -mdx);
                    lp.add_entry(r, ub_, -mdx);
                    r = lp.add_row(RowSense::LE, c, tname("cia", row.id, t), "61");
                    lp.add_entry(r, f, 1.0);
                    lp.add_entry(r, ua, -mf);
                    r = lp.add_row(RowSense::LE, mf - c, tname("cib", row.id, t), "62");
                    lp.add_entry(r, f, -1.0);
                    lp.add_entry(r, ua, mf);
                    r = lp.add_row(RowSense::LE, c, tname("cic", row.id, t), "63");
                    lp.add_entry(r, f, -1.0);
                    lp.add_entry(r, ub_, -mf);
                    r = lp.add_row(RowSense::LE, mf - c, tname("cid", row.id, t), "64");
                    lp.add_entry(r, f, 1.0);
                    lp.add_entry(r, ub_, mf);
                }
            }
        }

        // storage blocks
        for (int i = 0; i < nbat; ++i) {
            int nbus = lay_.batt_buses[i];
            int kb = lay_.bus_batt[nbus];
            const std::string& id = net_.buses[nbus].id;
            for (int t = 0; t < T; ++t) {
                int r = lp.add_row(RowSense::LE, 0.0, tname("chc", id, t), "23");
                lp.add_entry(r, ox.charge[i][t], 1.0);
                put(r, zin(kb), -bt->charge_max);
                if (blk.z_in.empty()) lp.ub[ox.charge[i][t]] = 0.0;
                r = lp.add_row(RowSense::LE, 0.0, tname("dic", id, t), "24");
                lp.add_entry(r, ox.discharge[i][t], 1.0);
                put(r, zin(kb), -bt->discharge_max);
                if (blk.z_in.empty()) lp.ub[ox.discharge[i][t]] = 0.0;
                r = lp.add_row(RowSense::LE, 0.0, tname("chx", id, t), "25");
                lp.add_entry(r, ox.charge[i][t], 1.0);
                lp.add_entry(r, ox.excl[i][t], -bt->charge_max);
                r = lp.add_row(RowSense::LE, bt->discharge_max, tname("dix", id, t), "26");
                lp.add_entry(r, ox.discharge[i][t], 1.0);
                lp.add_entry(r, ox.excl[i][t], bt->discharge_max);
                if (t + 1 < T) {
                    r = lp.add_row(RowSense::EQ, 0.0, tname("socd", id, t), "28");
                    lp.add_entry(r, ox.soc[i][t + 1], 1.0);
                    lp.add_entry(r, ox.soc[i][t], -1.0);
                    lp.add_entry(r, ox.charge[i][t], -bt->eta_ch);
                    double di = inst_.hor.soc_convention == SocConvention::Physical
                                    ? 1.0 / bt->eta_di
                                    : bt->eta_di;
                    lp.add_entry(r, ox.discharge[i][t], di);
                }
                r = lp.add_row(RowSense::GE, 0.00051, tname("dga", id, t), "29a");
                lp.add_entry(r, ox.wear[i][t], 1.0);
                lp.add_entry(r, ox.soc[i][t], 0.00102 / bt->soc_max);
                r = lp.add_row(RowSense::GE, 0.00015, tname("dgb", id, t), "29b");
                lp.add_entry(r, ox.wear[i][t], 1.0);
                lp.add_entry(r, ox.soc[i][t], 0.000151 / bt->soc_max);
            }
            double budget = (1.0 - bt->end_of_life) / bt->lifetime;
            if (inst_.hor.degradation_scale == DegradationScale::Daily) budget /= 365.0;
            int r = lp.add_row(RowSense::LE, budget - T * bt->shelf_degradation,
                               pfx + ":dgs:" + id, "30");
            for (int t = 0; t < T; ++t) lp.add_entry(r, ox.wear[i][t], 1.0);
        }

        // hydro blocks
        for (int i = 0; i < nhyd; ++i) {
            int nbus = lay_.hydro_buses[i];
            int kp = lay_.bus_hydro[nbus];
            const std::string& id = net_.buses[nbus].id;
            for (int t = 0; t < T; ++t) {
                int r = lp.add_row(RowSense::EQ, 0.0, tname("pturb", id, t), "31");
                lp.add_entry(r, p_turb[i][t], 1.0);
                lp.add_entry(r, ox.turb[i][t], -pt->sigma_t);
                r = lp.add_row(RowSense::EQ, 0.0, tname("ppump", id, t), "32");
                lp.add_entry(r, p_pump[i][t], 1.0);
                lp.add_entry(r, ox.pump[i][t], -pt->sigma_p);
                if (t + 1 < T) {
                    r = lp.add_row(RowSense::EQ, 0.0, tname("volu", id, t), "33");
                    lp.add_entry(r, ox.vol_up[i][t + 1], 1.0);
                    lp.add_entry(r, ox.vol_up[i][t], -1.0);
                    lp.add_entry(r, ox.pump[i][t], -1.0);
                    lp.add_entry(r, ox.turb[i][t], 1.0);
                    r = lp.add_row(RowSense::EQ, 0.0, tname("voll", id, t), "34");
                    lp.add_entry(r, ox.vol_lo[i][t + 1], 1.0);
                    lp.add_entry(r, ox.vol_lo[i][t], -1.0);
                    lp.add_entry(r, ox.turb[i][t], -1.0);
                    lp.add_entry(r, ox.pump[i][t], 1.0);
                }
                r = lp.add_row(RowSense::LE, 0.0, tname("wtc", id, t), "39");
                lp.add_entry(r, ox.turb[i][t], 1.0);
                put(r, zin(kp), -pt->w_max);
                if (blk.z_in.empty()) lp.ub[ox.turb[i][t]] = 0.0;
                r = lp.add_row(RowSense::LE, 0.0, tname("wpc", id, t), "40");
                lp.add_entry(r, ox.pump[i][t], 1.0);
                put(r, zin(kp), -pt->w_max);
                if (blk.z_in.empty()) lp.ub[ox.pump[i][t]] = 0.0;
            }
        }

        // nodal balance
        for (int b = 0; b < nb; ++b) {
            int bat = lay_.bus_batt[b] >= 0
                          ? static_cast<int>(std::find(lay_.batt_buses.begin(),
                                                       lay_.batt_buses.end(), b) -
                                             lay_.batt_buses.begin())
                          : -1;
            int hyd = lay_.bus_hydro[b] >= 0
                          ? static_cast<int>(std::find(lay_.hydro_buses.begin(),
                                                       lay_.hydro_buses.end(), b) -
                                             lay_.hydro_buses.begin())
                          : -1;
            for (int t = 0; t < T; ++t) {
                double rhs = R.load[b][t];
                int r = lp.add_row(RowSense::EQ, 0.0, tname("bal", net_.buses[b].id, t), "20");
                for (int l = 0; l < nr; ++l) {
                    if (!carries_[l]) continue;
                    if (net_.rows[l].to_bus == net_.buses[b].id)
                        lp.add_entry(r, ox.flow[l][t], 1.0);
                    else if (net_.rows[l].from_bus == net_.buses[b].id)
                        lp.add_entry(r, ox.flow[l][t], -1.0);
                }
                for (int g = 0; g < ng; ++g) {
                    if (net_.generators[g].bus != net_.buses[b].id) continue;
                    lp.add_entry(r, ox.p_exist[g][t], 1.0);
                    put(r, ox.p_retro[g][t], 1.0);
                }
                for (int m = 0; m < 3; ++m)
                    if (lay_.cap_at[b][m] >= 0) lp.add_entry(r, ox.p_new[b][m][t], 1.0);
                for (int z = 0; z < nz; ++z) {
                    if (net_.zones[z].bus != net_.buses[b].id) continue;
                    rhs -= R.cf[z][t] * net_.zones[z].existing_capacity;
                    int k = lay_.zone_cap[z];
                    if (k >= 0) put(r, zin(k), R.cf[z][t]);
                    lp.add_entry(r, ox.curtail[z][t], -1.0);
                }
                if (bat >= 0) {
                    lp.add_entry(r, ox.discharge[bat][t], 1.0);
                    lp.add_entry(r, ox.charge[bat][t], -1.0);
                }
                if (hyd >= 0) {
                    lp.add_entry(r, p_turb[hyd][t], 1.0);
                    lp.add_entry(r, p_pump[hyd][t], -1.0);
                }
                lp.add_entry(r, ox.shed[b][t], 1.0);
                lp.rhs[r] = rhs;
            }
        }
        return ox;
    }

private:
    const Instance& inst_;
    const Network& net_;
    StateLayout lay_;
    int T_;
    Penalties pen_;
    std::vector<char> carries_;
};

} // namespace

StateLayout build_state_layout(const Instance& inst) {
    const Network& net = inst.net;
    const TechnologyCatalog& cat = inst.cat;
    const FactorToggles& fx = inst.factors;
    const int nb = static_cast<int>(net.buses.size());
    const int nz = static_cast<int>(net.zones.size());
    const int nr = static_cast<int>(net.rows.size());
    const int ng = static_cast<int>(net.generators.size());
    StateLayout L;
    L.cap_at.assign(nb, {-1, -1, -1});
    L.zone_cap.assign(nz, -1);
    L.row_line.assign(nr, -1);
    L.row_dtr.assign(nr, -1);
    L.row_and.assign(nr, -1);
    L.row_sssc.assign(nr, -1);
    L.bus_batt.assign(nb, -1);
    L.bus_hydro.assign(nb, -1);
    L.gen_retro.assign(ng, -1);
    auto need = [&](const std::string& code) -> const Tech& {
        if (!cat.has(code))
            throw ValidationError("catalog missing technology '" + code +
                                  "' required by an enabled candidate");
        return cat.at(code);
    };
    auto push = [&](char tech, int subject, const std::string& name, double ub, bool integral) {
        L.entries.push_back({tech, subject, name, ub, integral});
        return static_cast<int>(L.entries.size()) - 1;
    };
    for (int b = 0; b < nb; ++b)
        for (int m = 0; m < 3; ++m) {
            char tc = kThermal[m];
            bool on = tc == 'G' ? fx.gas : tc == 'N' ? fx.smr : fx.h2;
            auto it = net.buses[b].thermal_area.find(code_of(tc));
            if (!on || it == net.buses[b].thermal_area.end() || it->second <= 0) continue;
            need(code_of(tc));
            L.cap_at[b][m] = push(tc, b, std::string("c") + tc + ":" + net.buses[b].id,
                                  net.buses[b].max_new_connection, false);
        }
    for (int z = 0; z < nz; ++z) {
        const auto& zn = net.zones[z];
        bool on = zn.kind == VresKind::Wind ? fx.wind : fx.solar;
        if (!on) continue;
        char tc = zn.kind == VresKind::Wind ? 'W' : 'S';
        need(code_of(tc));
        double ub = zn.footprint > 0 ? zn.area / zn.footprint : kInf;
        L.zone_cap[z] = push(tc, z, std::string("c") + tc + ":" + zn.id, ub, false);
    }
    for (int l = 0; l < nr; ++l) {
        const auto& row = net.rows[l];
        if (row.line_candidate && fx.line) {
            need("L");
            L.row_line[l] = push('L', l, "xL:" + row.id, 1.0, true);
        }
        if (!row.dtr_ref.empty() && fx.dtr) {
            need("D");
            L.row_dtr[l] = push('D', l, "xD:" + row.id, 1.0, true);
        }
        if (L.row_line[l] >= 0 && L.row_dtr[l] >= 0)
            L.row_and[l] = push('V', l, "vLD:" + row.id, 1.0, true);
        if (row.sssc_voltage > 0 && fx.sssc && (row.existing_line || L.row_line[l] >= 0)) {
            const Tech& f = need("F");
            int ub = row.sssc_max_units > 0 ? row.sssc_max_units : f.max_units;
            L.row_sssc[l] = push('F', l, "xF:" + row.id, static_cast<double>(ub), true);
        }
    }
    for (int b = 0; b < nb; ++b) {
        if (net.buses[b].battery_candidate && fx.battery) {
            need("B");
            L.bus_batt[b] = push('B', b, "xB:" + net.buses[b].id, 1.0, true);
            L.batt_buses.push_back(b);
        }
    }
    for (int b = 0; b < nb; ++b) {
        if (net.buses[b].hydro_candidate && fx.hydro) {
            need("P");
            L.bus_hydro[b] = push('P', b, "xP:" + net.buses[b].id, 1.0, true);
            L.hydro_buses.push_back(b);
        }
    }
    for (int g = 0; g < ng; ++g) {
        if (net.generators[g].retrofit_allowed && fx.retrofit) {
            need("R");
            L.gen_retro[g] = push('R', g, "xR:" + net.generators[g].id, 1.0, true);
        }
    }
    return L;
}

double stage_investment_cost(double capex, double annual_fom, double years_per_stage,
                             int remaining_stages, double price_factor) {
    return (capex + annual_fom * years_per_stage * remaining_stages) * price_factor;
}

double curtailment_penalty(const Instance& inst) {
    double mn = kInf;
    for (const auto& g : inst.net.generators) {
        if (g.cost_pre > 0) mn = std::min(mn, g.cost_pre);
        if (g.retrofit_allowed && g.cost_post > 0) mn = std::min(mn, g.cost_post);
    }
    for (const char* c : {"G", "N", "H"})
        if (inst.cat.has(c) && inst.cat.at(c).var_cost > 0)
            mn = std::min(mn, inst.cat.at(c).var_cost);
    if (!std::isfinite(mn)) return 1.0;
    return 0.95 * mn;
}

StageProblem build_stage_problem(const Instance& inst, int stage, int state_idx,
                                 int profile_idx) {
    const int Y = inst.chain.n_stages();
    if (stage < 1 || stage > Y) throw ValidationError("stage out of range");
    const auto& states = inst.chain.stages[stage - 1];
    if (state_idx < 0 || state_idx >= static_cast<int>(states.size()))
        throw ValidationError("state index out of range");
    const MarkovState& st = states[state_idx];
    StageProblem sp;
    Builder bd(inst);
    bd.require_full_horizon_lifetimes();
    bd.lp.name = "stage" + std::to_string(stage) + "_s" + std::to_string(state_idx);
    const std::string pfx = "y" + std::to_string(stage) + "s" + std::to_string(state_idx);

    std::vector<int> z_in;
    if (stage > 1) {
        for (const auto& e : bd.layout().entries)
            z_in.push_back(bd.lp.add_var(pfx + ":in:" + e.name, -kInf, kInf, 0.0,
                                         VarKind::Continuous, "zin"));
        for (int k = 0; k < bd.layout().size(); ++k) {
            int r = bd.lp.add_row(RowSense::EQ, 0.0, pfx + ":fix:" + bd.layout().entries[k].name,
                                  "state");
            bd.lp.add_entry(r, z_in[k], 1.0);
            sp.copy_rows.push_back(r);
        }
    }
    StageBlock blk = bd.transition(stage, state_idx, z_in, 1.0, st.invest_factor, pfx);
    bd.lifetime_rows_cumulative(blk, pfx);
    if (profile_idx < 0) {
        for (size_t o = 0; o < st.profiles.size(); ++o) {
            double w = st.profiles[o].weight;
            blk.ops.push_back(bd.operations(blk, st, static_cast<int>(o), w,
                                            pfx + "o" + std::to_string(o)));
            blk.op_weight.push_back(w);
        }
    } else {
        if (profile_idx >= static_cast<int>(st.profiles.size()))
            throw ValidationError("profile index out of range");
        blk.ops.push_back(bd.operations(blk, st, profile_idx, 1.0,
                                        pfx + "o" + std::to_string(profile_idx)));
        blk.op_weight.push_back(1.0);
    }
    if (stage < Y)
        sp.theta_col = bd.lp.add_var(pfx + ":future", 0.0, kInf, 1.0, VarKind::Continuous,
                                     "theta_future");
    sp.lp = std::move(bd.lp);
    sp.layout = bd.layout();
    sp.block = std::move(blk);
    sp.census_extra = std::move(bd.extra);
    return sp;
}

void set_trial_state(StageProblem& sp, const std::vector<double>& z) {
    if (z.size() != sp.copy_rows.size())
        throw InternalError("trial state size mismatch");
    for (size_t k = 0; k < z.size(); ++k) sp.lp.rhs[sp.copy_rows[k]] = z[k];
}

MonolithicProblem build_monolithic(const Instance& inst) {
    MonolithicProblem mp;
    mp.tree = expand_to_tree(inst.chain);
    Builder bd(inst);
    bd.lp.name = "extensive";
    const int Y = inst.chain.n_stages();
    const int np = static_cast<int>(mp.tree.paths.size());
    const StateLayout& lay = bd.layout();

    for (int p = 0; p < np; ++p) {
        const auto& path = mp.tree.paths[p];
        double phi = path.probability;
        std::vector<StageBlock> chainblocks;
        std::vector<int> z_prev;
        for (int y = 1; y <= Y; ++y) {
            const MarkovState& st = inst.chain.stages[y - 1][path.state_idx[y - 1]];
            std::string pfx = "p" + std::to_string(p) + "y" + std::to_string(y);
            StageBlock blk =
                bd.transition(y, path.state_idx[y - 1], z_prev, phi, st.invest_factor, pfx);
            for (size_t o = 0; o < st.profiles.size(); ++o) {
                double w = phi * st.profiles[o].weight;
                blk.ops.push_back(bd.operations(blk, st, static_cast<int>(o), w,
                                                pfx + "o" + std::to_string(o)));
                blk.op_weight.push_back(w);
            }
            z_prev = blk.z_out;
            chainblocks.push_back(std::move(blk));
        }
        mp.blocks.push_back(std::move(chainblocks));
    }

    // allocation lifetimes: windowed when a lifetime renews inside the horizon
    for (int p = 0; p < np; ++p)
        for (int k = 0; k < lay.size(); ++k) {
            int fam = lifetime_family(lay.entries[k].tech);
            if (fam == 0) continue;
            double cap = lay.entries[k].tech == 'F' ? lay.entries[k].ub : 1.0;
            int g = lifetime_stages(bd.tech_lifetime(lay.entries[k].tech, lay.entries[k].subject),
                                    inst.hor.years_per_stage);
            std::string nm = "p" + std::to_string(p) + ":life:" + lay.entries[k].name;
            if (g >= Y) {
                for (int y = 1; y <= Y; ++y) {
                    int r = bd.lp.add_row(RowSense::LE, cap, nm + ":y" + std::to_string(y),
                                          std::to_string(fam) + "b");
                    bd.lp.add_entry(r, mp.blocks[p][y - 1].z_out[k], 1.0);
                }
            } else {
                for (int y = 1; y + g <= Y; ++y) {
                    int r = bd.lp.add_row(RowSense::LE, cap, nm + ":w" + std::to_string(y),
                                          std::to_string(fam) + "a");
                    for (int tau = y; tau <= y + g; ++tau)
                        bd.lp.add_entry(r, mp.blocks[p][tau - 1].delta[k], 1.0);
                }
                for (int y = std::max(1, Y - g + 1); y <= Y; ++y) {
                    int r = bd.lp.add_row(RowSense::LE, cap, nm + ":t" + std::to_string(y),
                                          std::to_string(fam) + "b");
                    for (int tau = y; tau <= Y; ++tau)
                        bd.lp.add_entry(r, mp.blocks[p][tau - 1].delta[k], 1.0);
                }
            }
        }

    // non-anticipativity: equal decisions across paths sharing history
    auto family_tag = [](char tech) -> const char* {
        switch (tech) {
        case 'G': case 'N': case 'H': return "41";
        case 'S': case 'W': return "42";
        case 'B': case 'P': return "43";
        case 'L': case 'D': case 'F': return "44";
        case 'R': return "45";
        default: return nullptr; // the and-flag is implied by its factors
        }
    };
    for (int y = 1; y <= Y; ++y) {
        std::map<std::vector<int>, std::vector<int>> groups;
        for (int p = 0; p < np; ++p) {
            std::vector<int> key(mp.tree.paths[p].state_idx.begin(),
                                 mp.tree.paths[p].state_idx.begin() + y);
            groups[key].push_back(p);
        }
        for (const auto& [key, members] : groups) {
            (void)key;
            for (size_t i = 1; i < members.size(); ++i) {
                int a = members[i - 1], b = members[i];
                for (int k = 0; k < lay.size(); ++k) {
                    const char* tag = family_tag(lay.entries[k].tech);
                    if (!tag) continue;
                    int r = bd.lp.add_row(
                        RowSense::EQ, 0.0,
                        "na:y" + std::to_string(y) + ":" + lay.entries[k].name + ":" +
                            std::to_string(a) + "_" + std::to_string(b),
                        tag);
                    bd.lp.add_entry(r, mp.blocks[a][y - 1].delta[k], 1.0);
                    bd.lp.add_entry(r, mp.blocks[b][y - 1].delta[k], -1.0);
                }
            }
        }
    }
    mp.lp = std::move(bd.lp);
    mp.layout = lay;
    mp.census_extra = std::move(bd.extra);
    return mp;
}

std::set<std::string> census(const Lp& lp, const std::set<std::string>& extra) {
    auto canonical = [](const std::string& tag) -> std::string {
        if (tag.empty()) return {};
        size_t digits = 0;
        while (digits < tag.size() && std::isdigit(static_cast<unsigned char>(tag[digits])))
            ++digits;
        if (digits == 0) return {};
        if (digits == tag.size()) return tag;
        if (digits + 1 == tag.size() && (tag[digits] == 'a' || tag[digits] == 'b')) {
            if (tag == "29a" || tag == "29b") return tag;
            return tag.substr(0, digits);
        }
        return {};
    };
    std::set<std::string> out;
    for (const auto& t : lp.row_tag) {
        auto c = canonical(t);
        if (!c.empty()) out.insert(c);
    }
    for (const auto& t : extra) {
        auto c = canonical(t);
        if (!c.empty()) out.insert(c);
    }
    return out;
}

bool CheckReport::ok() const {
    return battery_cross <= 1e-9 && soc_bound <= 1e-6 && hydro_drift <= 1e-9 &&
           emission_excess <= 1e-6 && balance_residual <= 1e-6 && na_residual <= 1e-9 &&
           degradation_excess <= 1e-6;
}

CheckReport verify_solution(const Instance& inst, const MonolithicProblem& mono,
                            const std::vector<double>& x) {
    CheckReport rep;
    const Network& net = inst.net;
    const StateLayout& lay = mono.layout;
    const int T = inst.chain.hours();
    const Tech* bt = lay.batt_buses.empty() ? nullptr : &inst.cat.at("B");
    auto val = [&](int col) { return col >= 0 ? x.at(col) : 0.0; };

    for (size_t p = 0; p < mono.blocks.size(); ++p) {
        for (size_t yi = 0; yi < mono.blocks[p].size(); ++yi) {
            const StageBlock& blk = mono.blocks[p][yi];
            const MarkovState& st =
                inst.chain.stages[yi][mono.tree.paths[p].state_idx[yi]];
            for (const OpsIndex& ox : blk.ops) {
                Realization R = realize(inst, st, ox.profile, lay);
                // battery
                for (size_t i = 0; i < lay.batt_buses.size(); ++i) {
                    double wearsum = 0;
                    for (int t = 0; t < T; ++t) {
                        double ch = val(ox.charge[i][t]), di = val(ox.discharge[i][t]);
                        rep.battery_cross = std::max(rep.battery_cross, ch * di);
                        double s = val(ox.soc[i][t]);
                        rep.soc_bound = std::max({rep.soc_bound, bt->soc_min - s, s - bt->soc_max});
                        wearsum += val(ox.wear[i][t]) + bt->shelf_degradation;
                    }
                    double budget = (1.0 - bt->end_of_life) / bt->lifetime;
                    if (inst.hor.degradation_scale == DegradationScale::Daily) budget /= 365.0;
                    rep.degradation_excess = std::max(rep.degradation_excess, wearsum - budget);
                }
                // hydro conservation
                for (size_t i = 0; i < lay.hydro_buses.size(); ++i) {
                    double base = val(ox.vol_up[i][0]) + val(ox.vol_lo[i][0]);
                    for (int t = 1; t < T; ++t)
                        rep.hydro_drift =
                            std::max(rep.hydro_drift,
                                     std::fabs(val(ox.vol_up[i][t]) + val(ox.vol_lo[i][t]) - base));
                }
                // emissions
                double co2 = 0;
                for (size_t g = 0; g < net.generators.size(); ++g)
                    for (int t = 0; t < T; ++t)
                        co2 += net.generators[g].emissions_pre * val(ox.p_exist[g][t]) +
                               net.generators[g].emissions_post * val(ox.p_retro[g][t]);
                rep.emission_excess =
                    std::max(rep.emission_excess, co2 - inst.hor.co2_targets[yi]);
                // nodal balance; operations see the state entering the stage
                const std::vector<int>& zin = blk.z_in;
                auto zin_val = [&](int k) { return zin.empty() ? 0.0 : x.at(zin[k]); };
                const Tech* pt = lay.hydro_buses.empty() ? nullptr : &inst.cat.at("P");
                for (size_t b = 0; b < net.buses.size(); ++b) {
                    for (int t = 0; t < T; ++t) {
                        double acc = -R.load[b][t] + val(ox.shed[b][t]);
                        for (size_t l = 0; l < net.rows.size(); ++l) {
                            if (ox.flow[l].empty()) continue;
                            if (net.rows[l].to_bus == net.buses[b].id)
                                acc += val(ox.flow[l][t]);
                            else if (net.rows[l].from_bus == net.buses[b].id)
                                acc -= val(ox.flow[l][t]);
                        }
                        for (size_t g = 0; g < net.generators.size(); ++g)
                            if (net.generators[g].bus == net.buses[b].id)
                                acc += val(ox.p_exist[g][t]) + val(ox.p_retro[g][t]);
                        for (int m = 0; m < 3; ++m)
                            if (lay.cap_at[b][m] >= 0 && !ox.p_new[b][m].empty())
                                acc += val(ox.p_new[b][m][t]);
                        for (size_t z = 0; z < net.zones.size(); ++z) {
                            if (net.zones[z].bus != net.buses[b].id) continue;
                            double cap = net.zones[z].existing_capacity;
                            if (lay.zone_cap[z] >= 0) cap += zin_val(lay.zone_cap[z]);
                            acc += R.cf[z][t] * cap - val(ox.curtail[z][t]);
                        }
                        for (size_t i = 0; i < lay.batt_buses.size(); ++i)
                            if (lay.batt_buses[i] == static_cast<int>(b))
                                acc += val(ox.discharge[i][t]) - val(ox.charge[i][t]);
                        for (size_t i = 0; i < lay.hydro_buses.size(); ++i)
                            if (lay.hydro_buses[i] == static_cast<int>(b))
                                acc += pt->sigma_t * val(ox.turb[i][t]) -
                                       pt->sigma_p * val(ox.pump[i][t]);
                        rep.balance_residual = std::max(rep.balance_residual, std::fabs(acc));
                    }
                }
            }
        }
    }
    // decision spread within shared histories
    const int Y = inst.chain.n_stages();
    for (int y = 1; y <= Y; ++y) {
        std::map<std::vector<int>, std::vector<int>> groups;
        for (size_t p = 0; p < mono.tree.paths.size(); ++p) {
            std::vector<int> key(mono.tree.paths[p].state_idx.begin(),
                                 mono.tree.paths[p].state_idx.begin() + y);
            groups[key].push_back(static_cast<int>(p));
        }
        for (const auto& [key, members] : groups) {
            (void)key;
            for (int k = 0; k < lay.size(); ++k) {
                double lo = kInf, hi = -kInf;
                for (int p : members) {
                    double v = x.at(mono.blocks[p][y - 1].delta[k]);
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
                if (lay.entries[k].tech != 'V')
                    rep.na_residual = std::max(rep.na_residual, hi - lo);
            }
        }
    }
    return rep;
}

} // namespace tplan
