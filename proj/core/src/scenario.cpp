#include "tplan/scenario.hpp"
#include "tplan/dtw.hpp"
#include "tplan/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using nlohmann::json;
namespace fs = std::filesystem;

namespace tplan {
namespace {

// z-normalize each variable dimension across the whole set so mixed units do
// not dominate the DTW metric
std::vector<DayVector> normalize(const DaySet& set) {
    const int dims = set.dims();
    std::vector<double> mean(dims, 0), var(dims, 0);
    long count = 0;
    for (const auto& d : set.days) {
        int hours = d.hours(dims);
        count += hours;
        for (int t = 0; t < hours; ++t)
            for (int v = 0; v < dims; ++v) mean[v] += d.values[t * dims + v];
    }
    if (count == 0) throw ValidationError("cluster_days: empty day set");
    for (int v = 0; v < dims; ++v) mean[v] /= count;
    for (const auto& d : set.days) {
        int hours = d.hours(dims);
        for (int t = 0; t < hours; ++t)
            for (int v = 0; v < dims; ++v) {
                double e = d.values[t * dims + v] - mean[v];
                var[v] += e * e;
            }
    }
    std::vector<double> sd(dims);
    for (int v = 0; v < dims; ++v) sd[v] = var[v] > 0 ? std::sqrt(var[v] / count) : 1.0;
    std::vector<DayVector> out = set.days;
    for (auto& d : out)
        for (int t = 0; t < d.hours(dims); ++t)
            for (int v = 0; v < dims; ++v)
                d.values[t * dims + v] = (d.values[t * dims + v] - mean[v]) / sd[v];
    return out;
}

double entropy(const std::vector<long>& counts, long n) {
    double h = 0;
    for (long c : counts)
        if (c > 0) h -= (double(c) / n) * std::log(double(c) / n);
    return h;
}

} // namespace

int MarkovChain::hours() const {
    int dims = static_cast<int>(columns.size());
    int h = -1;
    for (const auto& st : stages)
        for (const auto& s : st)
            for (const auto& p : s.profiles) {
                int ph = p.day.hours(dims);
                if (h < 0) h = ph;
                if (ph != h) throw ValidationError("profiles disagree on day length");
            }
    if (h <= 0) throw ValidationError("chain has no profiles");
    return h;
}

Clustering cluster_days(const DaySet& set, int k, std::uint64_t seed) {
    if (k <= 0) throw ValidationError("cluster_days: k must be positive");
    if (k > static_cast<int>(set.days.size()))
        throw ValidationError("cluster_days: k exceeds day count");
    const int dims = set.dims();
    for (const auto& d : set.days)
        if (d.values.size() != set.days.front().values.size() ||
            d.values.size() % std::max(1, dims) != 0)
            throw ValidationError("cluster_days: inconsistent day lengths");

    auto norm = normalize(set);
    const int n = static_cast<int>(norm.size());
    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            dist[i][j] = dist[j][i] = dtw_distance(norm[i].values, norm[j].values, dims);
    auto km = kmedoids(dist, k);

    Clustering out;
    out.assignment = km.assignment;
    out.total_cost = km.total_cost;
    out.seed = seed;
    std::vector<long> sizes(k, 0);
    for (int a : km.assignment) sizes[a]++;
    for (int s = 0; s < k; ++s) {
        NoiseProfile p;
        p.day = set.days[km.medoids[s]];
        p.weight = double(sizes[s]) / n;
        p.name = "p" + std::to_string(s + 1);
        out.profiles.push_back(std::move(p));
    }
    return out;
}

ClusterAgreement mutual_information(const std::vector<int>& a, const std::vector<int>& b) {
    ClusterAgreement out;
    if (a.size() != b.size() || a.empty())
        throw ValidationError("mutual_information: label vectors must match and be non-empty");
    const long n = static_cast<long>(a.size());
    int ka = *std::max_element(a.begin(), a.end()) + 1;
    int kb = *std::max_element(b.begin(), b.end()) + 1;
    std::vector<std::vector<long>> joint(ka, std::vector<long>(kb, 0));
    std::vector<long> ca(ka, 0), cb(kb, 0);
    for (long i = 0; i < n; ++i) {
        if (a[i] < 0 || b[i] < 0) throw ValidationError("mutual_information: negative label");
        joint[a[i]][b[i]]++;
        ca[a[i]]++;
        cb[b[i]]++;
    }
    double mi = 0;
    for (int i = 0; i < ka; ++i)
        for (int j = 0; j < kb; ++j)
            if (joint[i][j] > 0)
                mi += (double(joint[i][j]) / n) *
                      std::log(double(n) * joint[i][j] / (double(ca[i]) * cb[j]));
    double ha = entropy(ca, n), hb = entropy(cb, n);
    out.mi = std::max(0.0, mi);
    double denom = 0.5 * (ha + hb);
    if (denom <= 0) {
        out.defined = false;
        out.note = "degenerate single-cluster labeling; NMI and AMI undefined";
        return out;
    }
    out.nmi = mi / denom;

    // expected MI under the hypergeometric permutation model
    double emi = 0;
    auto lg = [](double x) { return std::lgamma(x + 1.0); };
    for (int i = 0; i < ka; ++i) {
        for (int j = 0; j < kb; ++j) {
            long lo = std::max(1L, ca[i] + cb[j] - n);
            long hi = std::min(ca[i], cb[j]);
            for (long nij = lo; nij <= hi; ++nij) {
                double term = (double(nij) / n) *
                              std::log(double(n) * nij / (double(ca[i]) * cb[j]));
                double lp = lg(ca[i]) + lg(cb[j]) + lg(n - ca[i]) + lg(n - cb[j]) - lg(n) -
                            lg(nij) - lg(ca[i] - nij) - lg(cb[j] - nij) -
                            lg(n - ca[i] - cb[j] + nij);
                emi += term * std::exp(lp);
            }
        }
    }
    double adj_denom = denom - emi;
    out.ami = std::fabs(adj_denom) < 1e-15 ? 0.0 : (mi - emi) / adj_denom;
    out.defined = true;
    return out;
}

ClusterAgreement validate_out_of_sample(const DaySet& train_medoids, const Clustering& clustering,
                                        const DaySet& validation) {
    const int k = static_cast<int>(clustering.profiles.size());
    if (k < 2) throw ValidationError("validate_out_of_sample: need at least 2 clusters");
    if (validation.days.size() < 2)
        throw ValidationError("validate_out_of_sample: need at least 2 validation days");
    if (train_medoids.columns != validation.columns)
        throw ValidationError("validate_out_of_sample: column registries differ");
    const int dims = validation.dims();

    // normalize the union so both labelings see the same scaling
    DaySet all;
    all.columns = validation.columns;
    for (const auto& p : clustering.profiles) all.days.push_back(p.day);
    for (const auto& d : validation.days) all.days.push_back(d);
    auto norm = normalize(all);
    std::vector<DayVector> med_norm(norm.begin(), norm.begin() + k);
    std::vector<DayVector> val_norm(norm.begin() + k, norm.end());

    std::vector<int> supervised(val_norm.size());
    for (size_t i = 0; i < val_norm.size(); ++i) {
        int best = 0;
        double bd = dtw_distance(val_norm[i].values, med_norm[0].values, dims);
        for (int s = 1; s < k; ++s) {
            double d = dtw_distance(val_norm[i].values, med_norm[s].values, dims);
            if (d < bd - 1e-12) {
                bd = d;
                best = s; // ties stay with the lower medoid index
            }
        }
        supervised[i] = best;
    }
    auto unsupervised = cluster_days(validation, k, clustering.seed);
    return mutual_information(supervised, unsupervised.assignment);
}

MarkovChain build_markov_chain(std::vector<std::vector<MarkovState>> stages,
                               std::vector<std::vector<std::vector<double>>> transitions,
                               std::vector<std::string> columns) {
    MarkovChain chain;
    chain.columns = std::move(columns);
    chain.stages = std::move(stages);
    chain.transitions = std::move(transitions);
    if (chain.transitions.empty() && chain.n_stages() >= 2) {
        // unspecified transitions default to the uniform distribution
        for (int y = 0; y + 1 < chain.n_stages(); ++y) {
            size_t from = chain.stages[y].size(), to = chain.stages[y + 1].size();
            chain.transitions.emplace_back(
                from, std::vector<double>(to, to == 0 ? 0.0 : 1.0 / to));
        }
    }
    auto rep = validate_chain(chain);
    if (!rep.ok()) throw ValidationError("markov chain invalid: " + rep.violations.front());
    return chain;
}

ValidationReport validate_chain(const MarkovChain& chain) {
    ValidationReport rep;
    auto bad = [&](const std::string& s) { rep.violations.push_back(s); };
    if (chain.n_stages() < 1) bad("chain needs at least one stage");
    if (!chain.stages.empty() && chain.stages[0].size() != 1)
        bad("stage 1 must have exactly one root state");
    for (int y = 0; y < chain.n_stages(); ++y) {
        if (chain.stages[y].empty()) bad("stage " + std::to_string(y + 1) + " has no states");
        for (const auto& s : chain.stages[y]) {
            if (s.load_factor <= 0 || s.invest_factor <= 0 || s.climate_factor <= 0)
                bad("state '" + s.label + "': scaling factors must be positive");
            double w = 0;
            for (const auto& p : s.profiles) {
                if (p.weight < 0) bad("state '" + s.label + "': negative profile weight");
                w += p.weight;
            }
            if (s.profiles.empty())
                bad("state '" + s.label + "': no noise profiles");
            else if (std::fabs(w - 1.0) > 1e-9)
                bad("state '" + s.label + "': profile weights sum to " + std::to_string(w));
        }
    }
    if (static_cast<int>(chain.transitions.size()) != std::max(0, chain.n_stages() - 1))
        bad("transition matrix count must be n_stages - 1");
    for (size_t y = 0; y < chain.transitions.size(); ++y) {
        const auto& tm = chain.transitions[y];
        if (y < chain.stages.size() && tm.size() != chain.stages[y].size())
            bad("transition matrix " + std::to_string(y + 1) + " row count mismatch");
        for (const auto& row : tm) {
            if (y + 1 < chain.stages.size() && row.size() != chain.stages[y + 1].size())
                bad("transition matrix " + std::to_string(y + 1) + " column count mismatch");
            double s = 0;
            for (double p : row) {
                if (p < 0) bad("negative transition probability");
                s += p;
            }
            if (std::fabs(s - 1.0) > 1e-9)
                bad("transition row sums to " + std::to_string(s));
        }
    }
    // consistent day shape across all profiles
    if (rep.ok()) {
        try {
            chain.hours();
        } catch (const ValidationError& e) {
            bad(e.what());
        }
    }
    return rep;
}

ScenarioTree expand_to_tree(const MarkovChain& chain) {
    ScenarioTree tree;
    std::vector<ScenarioPath> frontier;
    frontier.push_back({{0}, 1.0});
    for (int y = 1; y < chain.n_stages(); ++y) {
        std::vector<ScenarioPath> next;
        for (const auto& p : frontier) {
            int from = p.state_idx.back();
            const auto& row = chain.transitions[y - 1][from];
            for (size_t to = 0; to < row.size(); ++to) {
                if (row[to] <= 0) continue;
                ScenarioPath q = p;
                q.state_idx.push_back(static_cast<int>(to));
                q.probability *= row[to];
                next.push_back(std::move(q));
            }
        }
        frontier = std::move(next);
    }
    tree.paths = std::move(frontier);
    return tree;
}

DayVector load_day(const std::string& path, const std::vector<std::string>& expect_columns) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::string line;
    int lineno = 0;
    bool header_seen = false, columns_seen = false;
    DayVector day;
    const int dims = static_cast<int>(expect_columns.size());
    while (std::getline(in, line)) {
        lineno++;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string word;
            hs >> word;
            if (word == "tplan-day") {
                int ver = 0;
                hs >> ver;
                if (ver != 1) throw ParseError(path + ": unsupported day file version");
                header_seen = true;
            }
            continue;
        }
        if (!columns_seen) {
            std::string expected = "hour";
            for (const auto& c : expect_columns) expected += "," + c;
            if (line != expected)
                throw ParseError(path + ":" + std::to_string(lineno) +
                                 ": column row does not match the bundle registry");
            columns_seen = true;
            continue;
        }
        std::istringstream ls(line);
        std::string tok;
        std::vector<double> vals;
        while (std::getline(ls, tok, ',')) {
            try {
                vals.push_back(std::stod(tok));
            } catch (...) {
                throw ParseError(path + ":" + std::to_string(lineno) + ": bad number '" + tok + "'");
            }
        }
        if (static_cast<int>(vals.size()) != dims + 1)
            throw ParseError(path + ":" + std::to_string(lineno) + ": wrong column count");
        for (int v = 0; v < dims; ++v) day.values.push_back(vals[v + 1]);
    }
    if (!header_seen) throw ParseError(path + ": missing tplan-day header");
    if (day.values.empty()) throw ParseError(path + ": no hour rows");
    return day;
}

void save_day(const DayVector& day, const std::vector<std::string>& columns,
              const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path);
    out << "# tplan-day 1\n";
    out << "hour";
    for (const auto& c : columns) out << "," << c;
    out << "\n";
    const int dims = static_cast<int>(columns.size());
    char buf[64];
    for (int t = 0; t < day.hours(dims); ++t) {
        out << t;
        for (int v = 0; v < dims; ++v) {
            std::snprintf(buf, sizeof buf, ",%.17g", day.values[t * dims + v]);
            out << buf;
        }
        out << "\n";
    }
}

MarkovChain load_scenarios(const std::string& bundle_path) {
    std::ifstream in(bundle_path);
    if (!in) throw ParseError("cannot open " + bundle_path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ParseError(bundle_path + ": " + e.what());
    }
    auto reject = [&](const json& obj, std::initializer_list<const char*> keys,
                      const std::string& ctx) {
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            bool ok = false;
            for (const char* k : keys)
                if (it.key() == k) ok = true;
            if (!ok) throw ParseError(ctx + ": unknown key '" + it.key() + "'");
        }
    };
    reject(j, {"format", "version", "columns", "stages", "transitions"}, bundle_path);
    if (j.value("format", "") != "tplan-scenarios" || j.value("version", 0) != 1)
        throw ParseError(bundle_path + ": bad header");
    fs::path dir = fs::path(bundle_path).parent_path();

    std::vector<std::string> columns = j.at("columns").get<std::vector<std::string>>();
    std::vector<std::vector<MarkovState>> stages;
    for (const auto& sj : j.at("stages")) {
        reject(sj, {"stage", "states"}, bundle_path + " stage");
        std::vector<MarkovState> states;
        for (const auto& stj : sj.at("states")) {
            reject(stj, {"label", "load_factor", "invest_factor", "climate_factor", "profiles"},
                   bundle_path + " state");
            MarkovState ms;
            ms.label = stj.value("label", "");
            ms.load_factor = stj.value("load_factor", 1.0);
            ms.invest_factor = stj.value("invest_factor", 1.0);
            ms.climate_factor = stj.value("climate_factor", 1.0);
            for (const auto& pj : stj.at("profiles")) {
                reject(pj, {"file", "weight"}, bundle_path + " profile");
                NoiseProfile p;
                std::string rel = pj.at("file").get<std::string>();
                p.day = load_day((dir / rel).string(), columns);
                p.weight = pj.at("weight").get<double>();
                p.name = fs::path(rel).stem().string();
                ms.profiles.push_back(std::move(p));
            }
            states.push_back(std::move(ms));
        }
        stages.push_back(std::move(states));
    }
    std::vector<std::vector<std::vector<double>>> transitions;
    if (j.contains("transitions"))
        transitions = j.at("transitions").get<std::vector<std::vector<std::vector<double>>>>();
    return build_markov_chain(std::move(stages), std::move(transitions), std::move(columns));
}

void save_scenarios(const MarkovChain& chain, const std::string& bundle_path,
                    const std::string& profile_dir) {
    fs::path dir = fs::path(bundle_path).parent_path();
    fs::create_directories(dir / profile_dir);
    json j;
    j["format"] = "tplan-scenarios";
    j["version"] = 1;
    j["columns"] = chain.columns;
    j["stages"] = json::array();
    for (int y = 0; y < chain.n_stages(); ++y) {
        json sj;
        sj["stage"] = y + 1;
        sj["states"] = json::array();
        for (size_t s = 0; s < chain.stages[y].size(); ++s) {
            const auto& ms = chain.stages[y][s];
            json stj;
            stj["label"] = ms.label;
            stj["load_factor"] = ms.load_factor;
            stj["invest_factor"] = ms.invest_factor;
            stj["climate_factor"] = ms.climate_factor;
            stj["profiles"] = json::array();
            for (size_t p = 0; p < ms.profiles.size(); ++p) {
                std::string rel = profile_dir + "/y" + std::to_string(y + 1) + "_s" +
                                  std::to_string(s + 1) + "_p" + std::to_string(p + 1) + ".csv";
                save_day(ms.profiles[p].day, chain.columns, (dir / rel).string());
                json pj;
                pj["file"] = rel;
                pj["weight"] = ms.profiles[p].weight;
                stj["profiles"].push_back(pj);
            }
            sj["states"].push_back(stj);
        }
        j["stages"].push_back(sj);
    }
    j["transitions"] = chain.transitions;
    std::ofstream out(bundle_path);
    if (!out) throw ParseError("cannot write " + bundle_path);
    out << j.dump(2) << "\n";
}

} // namespace tplan
