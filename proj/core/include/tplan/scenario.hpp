#pragma once

#include "tplan/grid.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tplan {

// A day is a flattened hour-major block: values[t * dims + v] where the
// column registry names dimension v ("load:<bus>", "wind:<zone>",
// "solar:<zone>", "dtr_e:<ref>", "dtr_n:<ref>").
struct DayVector {
    int day_index = 0;
    std::vector<double> values;
    int hours(int dims) const { return dims == 0 ? 0 : static_cast<int>(values.size()) / dims; }
};

struct DaySet {
    std::vector<std::string> columns;
    std::vector<DayVector> days;
    int dims() const { return static_cast<int>(columns.size()); }
};

struct NoiseProfile {
    DayVector day;
    double weight = 0; // rho
    std::string name;  // file stem or generated id
};

struct MarkovState {
    std::string label;
    double load_factor = 1.0;
    double invest_factor = 1.0;  // multiplies investment costs
    double climate_factor = 1.0; // multiplies VRES and DTR columns
    std::vector<NoiseProfile> profiles;
};

struct MarkovChain {
    std::vector<std::string> columns;
    std::vector<std::vector<MarkovState>> stages; // stages[y-1]
    // transitions[y-1][from][to] gives P(state at y+1 = to | state at y = from)
    std::vector<std::vector<std::vector<double>>> transitions;

    int n_stages() const { return static_cast<int>(stages.size()); }
    int hours() const; // common day length; throws when inconsistent
};

struct ScenarioPath {
    std::vector<int> state_idx; // per stage
    double probability = 0;
};

struct ScenarioTree {
    std::vector<ScenarioPath> paths;
};

struct Clustering {
    std::vector<int> assignment; // day -> profile slot
    std::vector<NoiseProfile> profiles;
    double total_cost = 0;
    std::uint64_t seed = 0;
};

struct ClusterAgreement {
    double mi = 0, nmi = 0, ami = 0;
    bool defined = false;
    std::string note;
};

Clustering cluster_days(const DaySet& days, int k, std::uint64_t seed);
// classify validation days by nearest medoid, recluster them unsupervised,
// then score the two labelings against each other
ClusterAgreement validate_out_of_sample(const DaySet& train_medoids, const Clustering& clustering,
                                        const DaySet& validation);
ClusterAgreement mutual_information(const std::vector<int>& a, const std::vector<int>& b);

MarkovChain build_markov_chain(std::vector<std::vector<MarkovState>> stages,
                               std::vector<std::vector<std::vector<double>>> transitions,
                               std::vector<std::string> columns);
ValidationReport validate_chain(const MarkovChain& chain);
ScenarioTree expand_to_tree(const MarkovChain& chain);

MarkovChain load_scenarios(const std::string& bundle_path);
void save_scenarios(const MarkovChain& chain, const std::string& bundle_path,
                    const std::string& profile_dir);

DayVector load_day(const std::string& path, const std::vector<std::string>& expect_columns);
void save_day(const DayVector& day, const std::vector<std::string>& columns,
              const std::string& path);

} // namespace tplan
