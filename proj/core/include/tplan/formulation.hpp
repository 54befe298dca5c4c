#pragma once

// Builds the planning MILP. A stage subproblem covers one planning stage in one
// long-term state: transition decisions, a representative-day operations block
// per noise profile, and the linking state (cumulative builds). The monolithic
// builder lays the same blocks out per scenario path and ties shared histories
// with non-anticipativity rows. Row tags carry constraint family ids consumed
// by the census and by reporting.

#include "tplan/grid.hpp"
#include "tplan/lp.hpp"
#include "tplan/scenario.hpp"

#include <array>
#include <set>
#include <string>
#include <vector>

namespace tplan {

// investment candidacy switches; disabling a class removes its candidates
struct FactorToggles {
    bool gas = true, smr = true, h2 = true;
    bool solar = true, wind = true;
    bool retrofit = true;
    bool battery = true, hydro = true;
    bool line = true, dtr = true, sssc = true;
};

struct Instance {
    Network net;
    TechnologyCatalog cat;
    PlanningHorizon hor;
    MarkovChain chain;
    FactorToggles factors;
};

// one component of the stage-linking state (a cumulative build quantity)
struct StateEntry {
    char tech = 0;   // G N H S W L D V F B P R; V is the line-and-sensor product flag
    int subject = 0; // bus / zone / row / generator index
    std::string name;
    double ub = 0;
    bool integral = false;
};

struct StateLayout {
    std::vector<StateEntry> entries;
    // per-subject lookups into entries, -1 when the candidate does not exist
    std::vector<std::array<int, 3>> cap_at; // [bus][G,N,H]
    std::vector<int> zone_cap;              // [zone]
    std::vector<int> row_line, row_dtr, row_and, row_sssc; // [row]
    std::vector<int> bus_batt, bus_hydro;   // [bus]
    std::vector<int> gen_retro;             // [generator]
    std::vector<int> batt_buses, hydro_buses; // candidate bus lists, block order
    int size() const { return static_cast<int>(entries.size()); }
};

StateLayout build_state_layout(const Instance& inst);

// column indices of one operations block (one noise profile); -1 marks absent
struct OpsIndex {
    int profile = 0;
    std::vector<std::vector<int>> p_exist, p_retro;     // [gen][t]
    std::vector<std::array<std::vector<int>, 3>> p_new; // [bus][G,N,H][t]
    std::vector<std::vector<int>> shed;                 // [bus][t]
    std::vector<std::vector<int>> curtail;              // [zone][t]
    std::vector<std::vector<int>> flow, inject;         // [row][t]
    std::vector<std::vector<int>> angle;                // [bus][t]
    std::vector<std::vector<int>> charge, discharge, soc, excl, wear; // [batt slot][t]
    std::vector<std::vector<int>> turb, pump, vol_up, vol_lo;         // [hydro slot][t]
};

struct StageBlock {
    int stage = 1;  // 1-based
    int state = 0;
    std::vector<int> z_in;  // empty at stage 1 (incoming state is all zero)
    std::vector<int> delta; // current-stage decisions, layout order
    std::vector<int> z_out;
    std::vector<OpsIndex> ops;
    std::vector<double> op_weight; // objective weight per ops block
    double invest_weight = 1.0;
};

struct StageProblem {
    Lp lp;
    StateLayout layout;
    StageBlock block;
    int theta_col = -1;         // future-cost column, -1 in the last stage
    std::vector<int> copy_rows; // fix z_in to a trial state; parallel to layout
    std::set<std::string> census_extra;
};

struct MonolithicProblem {
    Lp lp;
    StateLayout layout;
    ScenarioTree tree;
    std::vector<std::vector<StageBlock>> blocks; // [path][stage-1]
    std::set<std::string> census_extra;
};

// profile_idx -1 builds the expected problem over all of the state's profiles;
// >= 0 isolates a single noise realization with weight 1
StageProblem build_stage_problem(const Instance& inst, int stage, int state_idx,
                                 int profile_idx = -1);

MonolithicProblem build_monolithic(const Instance& inst);

void set_trial_state(StageProblem& sp, const std::vector<double>& z);

// (CapEx + annual fom x years per stage x remaining stages) x price factor
double stage_investment_cost(double capex, double annual_fom, double years_per_stage,
                             int remaining_stages, double price_factor);

double curtailment_penalty(const Instance& inst);

// distinct constraint family ids present: numeric row tags plus bound-applied
// families recorded by the builder; subequation letters merge except 29a/29b
std::set<std::string> census(const Lp& lp, const std::set<std::string>& extra);

// independent residual scan of a monolithic solution vector
struct CheckReport {
    double battery_cross = 0;     // max p_ch * p_di
    double soc_bound = 0;         // max excursion outside [soc_min, soc_max]
    double hydro_drift = 0;       // max |(v_u + v_l)(t) - (v_u + v_l)(1)|
    double emission_excess = 0;   // max sum CO2.p - target
    double balance_residual = 0;  // max nodal imbalance
    double na_residual = 0;       // max decision spread within a shared history
    double degradation_excess = 0;
    bool ok() const;
};

CheckReport verify_solution(const Instance& inst, const MonolithicProblem& mono,
                            const std::vector<double>& x);

} // namespace tplan
