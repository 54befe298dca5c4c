#pragma once
// Markov-chain stochastic dual dynamic programming over the stage problems.
// Forward passes sample a state/noise path and solve with integrality; backward
// passes solve LP relaxations of every next-stage child and aggregate their
// copy-row duals into one cut per (stage, state) pool.

#include "tplan/formulation.hpp"
#include "tplan/milp.hpp"
#include "tplan/simplex.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace tplan {

struct Cut {
    int stage = 1; // pool stage: the problem holding the future-cost column
    int state = 0; // pool Markov state index within that stage
    double alpha = 0;
    std::vector<double> beta; // per state-layout entry, over that stage's z_out
    int iteration = 0;
};

struct TrainLogEntry {
    int iteration = 0;
    double lower_bound = 0; // best proven bound so far, non-decreasing
    double forward_cost = 0;
    std::vector<int> states;   // sampled state per stage (stage 1 is always 0)
    std::vector<int> profiles; // sampled profile per stage, -1 = expected block
    double wall_s = 0;
};

struct Policy {
    std::vector<Cut> cuts;
    std::vector<TrainLogEntry> log;
    std::uint64_t seed = 0;
    double lower_bound = 0;
    std::vector<std::string> state_names; // layout fingerprint for resume checks
};

enum class TrainMode { Synchronous, Asynchronous };
enum class NoiseMode { Sampled, Expected };

struct TrainOptions {
    double stall_tolerance = 1e-4; // absolute bound improvement
    int stall_iterations = 25;
    int max_iterations = 200;
    int workers = 1;
    TrainMode mode = TrainMode::Synchronous;
    NoiseMode noise = NoiseMode::Sampled; // forward pass noise handling
    std::uint64_t seed = 1;
    bool progress = false;
    MilpOptions milp; // forward solves keep integrality
    SimplexOptions lp; // backward relaxations
};

struct SimulationResult {
    double mean = 0;
    double std_dev = 0;
    double ci_low = 0, ci_high = 0; // 95% normal interval
    bool ci_defined = false;        // needs at least two samples
    std::vector<double> samples;
    std::vector<std::vector<int>> states;   // per sample, per stage
    std::vector<std::vector<int>> profiles;
};

bool check_stopping(const std::vector<TrainLogEntry>& log, const TrainOptions& opts);
long count_forward_samples(const MarkovChain& chain);

void save_policy(const Policy& p, const std::string& path);
Policy load_policy(const std::string& path);

class SddpEngine {
public:
    explicit SddpEngine(Instance inst, TrainOptions opts = {});
    ~SddpEngine();
    SddpEngine(const SddpEngine&) = delete;
    SddpEngine& operator=(const SddpEngine&) = delete;

    // run until the bound stalls or max_iterations pass; cumulative on resume
    Policy train();
    // Monte Carlo evaluation of the current policy; no cuts are added
    SimulationResult simulate(int n_samples, std::uint64_t seed);
    // stage-1 outgoing state under the current policy
    std::vector<double> first_stage_state();

    void resume(const Policy& saved);
    const Policy& policy() const;
    const StateLayout& layout() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace tplan
