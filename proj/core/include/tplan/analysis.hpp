#pragma once
// Run orchestration on top of the builders and solvers: whole-instance solves
// with either backend, expected-value comparisons, ex-post re-evaluation of a
// fixed investment plan, and the zone-subset cost sweep.

#include "tplan/formulation.hpp"
#include "tplan/sddp.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace tplan {

enum class Backend { Monolithic, Sddp };

struct RunConfig {
    std::string network, catalog, horizon, scenarios; // file paths
    Backend backend = Backend::Monolithic;
    FactorToggles factors;
    std::string output_dir; // empty lets the caller pick a default
    std::uint64_t seed = 1;
    MilpOptions milp;       // monolithic backend
    TrainOptions train;     // sddp backend
    int simulate_samples = 50;
};

RunConfig load_run_config(const std::string& path);
Instance load_instance(const RunConfig& cfg);

struct AllocationRow {
    int path = 0, stage = 1;
    std::string state, entry;
    double added = 0; // built this stage
    double total = 0; // cumulative capacity after this stage
};

// objective-weighted contributions; summing invest + ops over all rows
// reproduces the reported objective
struct CostRow {
    int path = 0, stage = 1;
    std::string state;
    double probability = 0;
    double invest = 0, ops = 0;
};

// expected within the stage's noise profiles, hour-summed, per unit power
struct VolumeRow {
    int path = 0, stage = 1;
    std::string state;
    double shed = 0, curtail = 0;
};

struct PlanReport {
    Backend backend = Backend::Monolithic;
    bool converged = true; // false when a node/time/iteration limit cut the solve short
    double objective = 0;  // monolithic optimum, or the sddp lower bound
    double bound = 0;
    double gap = 0;
    long nodes = 0;
    long iterations = 0;
    double wall_s = 0;
    std::vector<std::string> entry_names;
    std::vector<double> first_stage;
    std::vector<AllocationRow> allocations;
    std::vector<CostRow> costs;
    std::vector<VolumeRow> volumes;
    CheckReport checks; // monolithic solutions are re-verified independently
    bool verified = false;
    std::vector<TrainLogEntry> training; // sddp bound curve
    double sim_mean = 0, sim_ci_low = 0, sim_ci_high = 0;
    bool sim_defined = false;
};

PlanReport run(const Instance& inst, const RunConfig& cfg);

void write_report_json(const PlanReport& rep, const std::string& path);
PlanReport read_report_json(const std::string& path);
void print_report(const PlanReport& rep, std::ostream& os);
// allocations.csv, costs.csv, volumes.csv, training.csv next to the report
void emit_plot_data(const PlanReport& rep, const std::string& dir);

// deterministic companion instance: one state per stage carrying the
// probability-weighted mean day, mean investment factor, unit noise weight
Instance expected_value_instance(const Instance& inst);

struct VossResult {
    double rp = 0;   // stochastic optimum
    double ev = 0;   // expected-value problem optimum
    double eev = 0;  // expected cost of the ev plan under the real chain
    double voss = 0; // eev - rp
    std::vector<std::vector<double>> delta_ev; // [stage][entry] ev investments
};

VossResult compute_voss(const Instance& inst, const MilpOptions& opts = {});

struct ExPostRecord {
    int path = 0;
    double probability = 0;
    std::vector<int> states;
    double invest = 0, ops = 0, total = 0;
    double shed = 0, curtail = 0;
};

// fix the stagewise investments and re-optimize operations along every state
// path of the chain; expectation over these records reproduces the plan cost
std::vector<ExPostRecord> expost_evaluate(const Instance& inst,
                                          const std::vector<std::vector<double>>& delta,
                                          const MilpOptions& opts = {});
void write_expost_csv(const std::vector<ExPostRecord>& records, const std::string& path);

// stagewise investments of a monolithic solution along its first path
std::vector<std::vector<double>> extract_deltas(const MonolithicProblem& mono,
                                                const std::vector<double>& x, int path = 0);

struct ZoneSweepRow {
    int n_zones = 0;
    double mean_cost = 0, std_cost = 0;
    double mean_wall_s = 0;
};

// nested random zone subsets: per repetition one shuffle, each size takes a
// prefix, so larger subsets contain smaller ones and costs are comparable
std::vector<ZoneSweepRow> zone_sweep(const Instance& master, const std::vector<int>& sizes,
                                     int repetitions, std::uint64_t seed);
void write_zone_sweep_csv(const std::vector<ZoneSweepRow>& rows, const std::string& path);

} // namespace tplan
