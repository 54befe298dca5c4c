#include "tplan/analysis.hpp"

#include "tplan/errors.hpp"
#include "tplan/scenario.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace tplan {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double obj_sum(const Lp& lp, const std::vector<double>& x, const std::vector<int>& cols) {
    double s = 0;
    for (int c : cols)
        if (c >= 0) s += lp.obj[c] * x[c];
    return s;
}

double obj_sum(const Lp& lp, const std::vector<double>& x,
               const std::vector<std::vector<int>>& cols) {
    double s = 0;
    for (const auto& v : cols) s += obj_sum(lp, x, v);
    return s;
}

// every cost-bearing operations column lives in one of these index families
double ops_cost(const Lp& lp, const std::vector<double>& x, const OpsIndex& oi) {
    double s = 0;
    s += obj_sum(lp, x, oi.p_exist);
    s += obj_sum(lp, x, oi.p_retro);
    for (const auto& bus : oi.p_new)
        for (const auto& tech : bus) s += obj_sum(lp, x, tech);
    s += obj_sum(lp, x, oi.shed);
    s += obj_sum(lp, x, oi.curtail);
    s += obj_sum(lp, x, oi.flow);
    s += obj_sum(lp, x, oi.inject);
    s += obj_sum(lp, x, oi.angle);
    s += obj_sum(lp, x, oi.charge);
    s += obj_sum(lp, x, oi.discharge);
    s += obj_sum(lp, x, oi.soc);
    s += obj_sum(lp, x, oi.excl);
    s += obj_sum(lp, x, oi.wear);
    s += obj_sum(lp, x, oi.turb);
    s += obj_sum(lp, x, oi.pump);
    s += obj_sum(lp, x, oi.vol_up);
    s += obj_sum(lp, x, oi.vol_lo);
    return s;
}

double col_total(const std::vector<double>& x, const std::vector<std::vector<int>>& cols) {
    double s = 0;
    for (const auto& v : cols)
        for (int c : v)
            if (c >= 0) s += x[c];
    return s;
}

// noise weight of one ops block, straight from the chain
double rho_of(const Instance& inst, const StageBlock& b, const OpsIndex& oi) {
    return inst.chain.stages[b.stage - 1][b.state].profiles[oi.profile].weight;
}

void fill_block_rows(const Instance& inst, const Lp& lp, const std::vector<double>& x,
                     const StateLayout& lay, const StageBlock& b, int path, double prob,
                     PlanReport& rep) {
    const std::string& label = inst.chain.stages[b.stage - 1][b.state].label;
    for (int k = 0; k < lay.size(); ++k) {
        AllocationRow a;
        a.path = path;
        a.stage = b.stage;
        a.state = label;
        a.entry = lay.entries[k].name;
        a.added = x[b.delta[k]];
        a.total = x[b.z_out[k]];
        rep.allocations.push_back(std::move(a));
    }
    CostRow c;
    c.path = path;
    c.stage = b.stage;
    c.state = label;
    c.probability = prob;
    c.invest = obj_sum(lp, x, b.delta);
    for (const auto& oi : b.ops) c.ops += ops_cost(lp, x, oi);
    rep.costs.push_back(c);
    VolumeRow v;
    v.path = path;
    v.stage = b.stage;
    v.state = label;
    for (const auto& oi : b.ops) {
        double rho = rho_of(inst, b, oi);
        v.shed += rho * col_total(x, oi.shed);
        v.curtail += rho * col_total(x, oi.curtail);
    }
    rep.volumes.push_back(v);
}

std::string backend_name(Backend b) { return b == Backend::Monolithic ? "monolithic" : "sddp"; }

void csv_open(std::ofstream& out, const std::string& path) {
    out.open(path);
    if (!out) throw ParseError("cannot write " + path);
    out << std::setprecision(12);
}

std::string col_class(const std::string& name) {
    auto pos = name.find(':');
    return pos == std::string::npos ? name : name.substr(0, pos);
}

} // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open run config " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ParseError(std::string("run config ") + path + ": " + e.what());
    }
    RunConfig cfg;
    fs::path base = fs::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        if (p.empty()) return p;
        fs::path fp(p);
        return fp.is_absolute() ? fp.string() : (base / fp).string();
    };
    cfg.network = resolve(j.value("network", ""));
    cfg.catalog = resolve(j.value("catalog", ""));
    cfg.horizon = resolve(j.value("horizon", ""));
    cfg.scenarios = resolve(j.value("scenarios", ""));
    cfg.output_dir = resolve(j.value("output_dir", std::string("")));
    std::string be = j.value("backend", "monolithic");
    if (be == "monolithic" || be == "mono")
        cfg.backend = Backend::Monolithic;
    else if (be == "sddp")
        cfg.backend = Backend::Sddp;
    else
        throw ValidationError("unknown backend '" + be + "'");
    cfg.seed = j.value("seed", std::uint64_t{1});
    if (j.contains("factors")) {
        const json& f = j["factors"];
        cfg.factors.gas = f.value("gas", cfg.factors.gas);
        cfg.factors.smr = f.value("smr", cfg.factors.smr);
        cfg.factors.h2 = f.value("h2", cfg.factors.h2);
        cfg.factors.solar = f.value("solar", cfg.factors.solar);
        cfg.factors.wind = f.value("wind", cfg.factors.wind);
        cfg.factors.retrofit = f.value("retrofit", cfg.factors.retrofit);
        cfg.factors.battery = f.value("battery", cfg.factors.battery);
        cfg.factors.hydro = f.value("hydro", cfg.factors.hydro);
        cfg.factors.line = f.value("line", cfg.factors.line);
        cfg.factors.dtr = f.value("dtr", cfg.factors.dtr);
        cfg.factors.sssc = f.value("sssc", cfg.factors.sssc);
    }
    if (j.contains("milp")) {
        const json& m = j["milp"];
        cfg.milp.gap_tol = m.value("gap_tol", cfg.milp.gap_tol);
        cfg.milp.max_nodes = m.value("max_nodes", cfg.milp.max_nodes);
        cfg.milp.time_limit_s = m.value("time_limit_s", cfg.milp.time_limit_s);
        cfg.milp.workers = m.value("workers", cfg.milp.workers);
    }
    if (j.contains("sddp")) {
        const json& s = j["sddp"];
        cfg.train.stall_tolerance = s.value("stall_tolerance", cfg.train.stall_tolerance);
        cfg.train.stall_iterations = s.value("stall_iterations", cfg.train.stall_iterations);
        cfg.train.max_iterations = s.value("max_iterations", cfg.train.max_iterations);
        cfg.train.workers = s.value("workers", cfg.train.workers);
        std::string mode = s.value("mode", "sync");
        if (mode == "async")
            cfg.train.mode = TrainMode::Asynchronous;
        else if (mode != "sync")
            throw ValidationError("unknown sddp mode '" + mode + "'");
        std::string noise = s.value("noise", "sampled");
        if (noise == "expected")
            cfg.train.noise = NoiseMode::Expected;
        else if (noise != "sampled")
            throw ValidationError("unknown sddp noise mode '" + noise + "'");
        cfg.train.progress = s.value("progress", cfg.train.progress);
        cfg.simulate_samples = s.value("simulate_samples", cfg.simulate_samples);
    }
    cfg.train.seed = cfg.seed;
    cfg.train.milp = cfg.milp;
    return cfg;
}

Instance load_instance(const RunConfig& cfg) {
    for (const auto* p : {&cfg.network, &cfg.catalog, &cfg.horizon, &cfg.scenarios})
        if (p->empty()) throw ValidationError("run config must name network, catalog, horizon and scenarios files");
    Instance in;
    in.net = load_network(cfg.network);
    in.cat = load_catalog(cfg.catalog);
    in.hor = load_horizon(cfg.horizon);
    in.chain = load_scenarios(cfg.scenarios);
    in.factors = cfg.factors;
    bool any_gen = !in.net.generators.empty() || in.factors.gas || in.factors.smr ||
                   in.factors.h2 || in.factors.solar || in.factors.wind;
    if (!any_gen) throw ValidationError("no generation technology enabled");
    return in;
}

PlanReport run(const Instance& inst, const RunConfig& cfg) {
    PlanReport rep;
    rep.backend = cfg.backend;
    auto t0 = Clock::now();
    if (cfg.backend == Backend::Monolithic) {
        MonolithicProblem mono = build_monolithic(inst);
        MilpResult r = solve_milp(mono.lp, cfg.milp);
        rep.wall_s = seconds_since(t0);
        if (r.status == MilpStatus::Infeasible || r.status == MilpStatus::Unbounded)
            throw InternalError("monolithic problem is infeasible or unbounded");
        rep.converged = r.status == MilpStatus::Optimal;
        rep.objective = r.obj;
        rep.bound = r.bound;
        rep.gap = r.gap;
        rep.nodes = r.nodes;
        rep.iterations = r.lp_iterations;
        for (const auto& e : mono.layout.entries) rep.entry_names.push_back(e.name);
        if (!r.x.empty()) {
            for (std::size_t p = 0; p < mono.blocks.size(); ++p) {
                double prob = mono.tree.paths[p].probability;
                for (const auto& b : mono.blocks[p])
                    fill_block_rows(inst, mono.lp, r.x, mono.layout, b,
                                    static_cast<int>(p), prob, rep);
            }
            rep.first_stage.resize(mono.layout.entries.size());
            for (int k = 0; k < mono.layout.size(); ++k)
                rep.first_stage[k] = r.x[mono.blocks[0][0].z_out[k]];
            rep.checks = verify_solution(inst, mono, r.x);
            rep.verified = rep.checks.ok();
        }
    } else {
        TrainOptions to = cfg.train;
        SddpEngine eng(inst, to);
        Policy p = eng.train();
        rep.objective = p.lower_bound;
        rep.bound = p.lower_bound;
        rep.gap = 0;
        rep.converged = check_stopping(p.log, to);
        rep.training = p.log;
        rep.iterations = p.log.empty() ? 0 : p.log.back().iteration;
        for (const auto& e : eng.layout().entries) rep.entry_names.push_back(e.name);
        rep.first_stage = eng.first_stage_state();
        const std::string& label = inst.chain.stages[0][0].label;
        for (int k = 0; k < eng.layout().size(); ++k) {
            AllocationRow a;
            a.path = 0;
            a.stage = 1;
            a.state = label;
            a.entry = eng.layout().entries[k].name;
            a.added = rep.first_stage[k];
            a.total = rep.first_stage[k];
            rep.allocations.push_back(std::move(a));
        }
        if (cfg.simulate_samples > 0) {
            SimulationResult sim = eng.simulate(cfg.simulate_samples, cfg.seed + 1);
            rep.sim_mean = sim.mean;
            rep.sim_ci_low = sim.ci_low;
            rep.sim_ci_high = sim.ci_high;
            rep.sim_defined = sim.ci_defined;
        }
        rep.wall_s = seconds_since(t0);
    }
    return rep;
}

void write_report_json(const PlanReport& rep, const std::string& path) {
    json j;
    j["format"] = "tplan-report";
    j["version"] = 1;
    j["backend"] = backend_name(rep.backend);
    j["converged"] = rep.converged;
    j["objective"] = rep.objective;
    j["bound"] = rep.bound;
    j["gap"] = rep.gap;
    j["nodes"] = rep.nodes;
    j["iterations"] = rep.iterations;
    j["wall_s"] = rep.wall_s;
    j["entry_names"] = rep.entry_names;
    j["first_stage"] = rep.first_stage;
    json alloc = json::array();
    for (const auto& a : rep.allocations)
        alloc.push_back({{"path", a.path},
                         {"stage", a.stage},
                         {"state", a.state},
                         {"entry", a.entry},
                         {"added", a.added},
                         {"total", a.total}});
    j["allocations"] = std::move(alloc);
    json costs = json::array();
    for (const auto& c : rep.costs)
        costs.push_back({{"path", c.path},
                         {"stage", c.stage},
                         {"state", c.state},
                         {"probability", c.probability},
                         {"invest", c.invest},
                         {"ops", c.ops}});
    j["costs"] = std::move(costs);
    json vols = json::array();
    for (const auto& v : rep.volumes)
        vols.push_back({{"path", v.path},
                        {"stage", v.stage},
                        {"state", v.state},
                        {"shed", v.shed},
                        {"curtail", v.curtail}});
    j["volumes"] = std::move(vols);
    j["checks"] = {{"battery_cross", rep.checks.battery_cross},
                   {"soc_bound", rep.checks.soc_bound},
                   {"hydro_drift", rep.checks.hydro_drift},
                   {"emission_excess", rep.checks.emission_excess},
                   {"balance_residual", rep.checks.balance_residual},
                   {"na_residual", rep.checks.na_residual},
                   {"degradation_excess", rep.checks.degradation_excess}};
    j["verified"] = rep.verified;
    json train = json::array();
    for (const auto& e : rep.training)
        train.push_back({{"iteration", e.iteration},
                         {"lower_bound", e.lower_bound},
                         {"forward_cost", e.forward_cost},
                         {"wall_s", e.wall_s}});
    j["training"] = std::move(train);
    j["sim_mean"] = rep.sim_mean;
    j["sim_ci_low"] = rep.sim_ci_low;
    j["sim_ci_high"] = rep.sim_ci_high;
    j["sim_defined"] = rep.sim_defined;
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write report " + path);
    out << j.dump(2) << "\n";
}

PlanReport read_report_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open report " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ParseError(std::string("report ") + path + ": " + e.what());
    }
    if (j.value("format", "") != "tplan-report")
        throw ParseError("report " + path + ": not a tplan-report file");
    PlanReport rep;
    rep.backend = j.value("backend", "monolithic") == "sddp" ? Backend::Sddp : Backend::Monolithic;
    rep.converged = j.value("converged", true);
    rep.objective = j.value("objective", 0.0);
    rep.bound = j.value("bound", 0.0);
    rep.gap = j.value("gap", 0.0);
    rep.nodes = j.value("nodes", 0L);
    rep.iterations = j.value("iterations", 0L);
    rep.wall_s = j.value("wall_s", 0.0);
    rep.entry_names = j.value("entry_names", std::vector<std::string>{});
    rep.first_stage = j.value("first_stage", std::vector<double>{});
    for (const auto& a : j.value("allocations", json::array())) {
        AllocationRow r;
        r.path = a.value("path", 0);
        r.stage = a.value("stage", 1);
        r.state = a.value("state", "");
        r.entry = a.value("entry", "");
        r.added = a.value("added", 0.0);
        r.total = a.value("total", 0.0);
        rep.allocations.push_back(std::move(r));
    }
    for (const auto& c : j.value("costs", json::array())) {
        CostRow r;
        r.path = c.value("path", 0);
        r.stage = c.value("stage", 1);
        r.state = c.value("state", "");
        r.probability = c.value("probability", 0.0);
        r.invest = c.value("invest", 0.0);
        r.ops = c.value("ops", 0.0);
        rep.costs.push_back(std::move(r));
    }
    for (const auto& v : j.value("volumes", json::array())) {
        VolumeRow r;
        r.path = v.value("path", 0);
        r.stage = v.value("stage", 1);
        r.state = v.value("state", "");
        r.shed = v.value("shed", 0.0);
        r.curtail = v.value("curtail", 0.0);
        rep.volumes.push_back(std::move(r));
    }
    if (j.contains("checks")) {
        const json& c = j["checks"];
        rep.checks.battery_cross = c.value("battery_cross", 0.0);
        rep.checks.soc_bound = c.value("soc_bound", 0.0);
        rep.checks.hydro_drift = c.value("hydro_drift", 0.0);
        rep.checks.emission_excess = c.value("emission_excess", 0.0);
        rep.checks.balance_residual = c.value("balance_residual", 0.0);
        rep.checks.na_residual = c.value("na_residual", 0.0);
        rep.checks.degradation_excess = c.value("degradation_excess", 0.0);
    }
    rep.verified = j.value("verified", false);
    for (const auto& e : j.value("training", json::array())) {
        TrainLogEntry le;
        le.iteration = e.value("iteration", 0);
        le.lower_bound = e.value("lower_bound", 0.0);
        le.forward_cost = e.value("forward_cost", 0.0);
        le.wall_s = e.value("wall_s", 0.0);
        rep.training.push_back(std::move(le));
    }
    rep.sim_mean = j.value("sim_mean", 0.0);
    rep.sim_ci_low = j.value("sim_ci_low", 0.0);
    rep.sim_ci_high = j.value("sim_ci_high", 0.0);
    rep.sim_defined = j.value("sim_defined", false);
    return rep;
}

void print_report(const PlanReport& rep, std::ostream& os) {
    os << "backend        " << backend_name(rep.backend) << "\n";
    if (!rep.converged) os << "status         LIMIT REACHED, best bound reported\n";
    os << "objective      " << std::setprecision(10) << rep.objective << "\n";
    if (rep.backend == Backend::Monolithic) {
        os << "bound          " << rep.bound << "\n";
        os << "gap            " << rep.gap << "\n";
        os << "nodes          " << rep.nodes << "\n";
        os << "verified       " << (rep.verified ? "yes" : "NO") << "\n";
    } else {
        os << "iterations     " << rep.iterations << "\n";
        if (rep.sim_defined)
            os << "simulated mean " << rep.sim_mean << "  [" << rep.sim_ci_low << ", "
               << rep.sim_ci_high << "]\n";
    }
    os << "wall seconds   " << rep.wall_s << "\n";
    if (!rep.first_stage.empty()) {
        os << "\nfirst-stage plan\n";
        for (std::size_t k = 0; k < rep.first_stage.size(); ++k)
            if (std::abs(rep.first_stage[k]) > 1e-9)
                os << "  " << rep.entry_names[k] << "  " << rep.first_stage[k] << "\n";
    }
    if (!rep.costs.empty()) {
        double invest = 0, ops = 0;
        for (const auto& c : rep.costs) {
            invest += c.invest;
            ops += c.ops;
        }
        os << "\nexpected cost  invest " << invest << "  ops " << ops << "\n";
    }
    if (!rep.volumes.empty()) {
        double shed = 0, curtail = 0;
        for (const auto& v : rep.volumes) {
            shed += v.shed;
            curtail += v.curtail;
        }
        os << "volumes (sum over path-stages)  shed " << shed << "  curtail " << curtail << "\n";
    }
    if (!rep.training.empty()) {
        os << "\nbound curve (last 5)\n";
        std::size_t from = rep.training.size() > 5 ? rep.training.size() - 5 : 0;
        for (std::size_t i = from; i < rep.training.size(); ++i)
            os << "  it " << rep.training[i].iteration << "  lb " << rep.training[i].lower_bound
               << "\n";
    }
}

void emit_plot_data(const PlanReport& rep, const std::string& dir) {
    fs::create_directories(dir);
    std::ofstream out;
    csv_open(out, (fs::path(dir) / "allocations.csv").string());
    out << "path,stage,state,entry,added,total\n";
    for (const auto& a : rep.allocations)
        out << a.path << ',' << a.stage << ',' << a.state << ',' << a.entry << ',' << a.added
            << ',' << a.total << "\n";
    out.close();
    csv_open(out, (fs::path(dir) / "costs.csv").string());
    out << "path,stage,state,probability,invest,ops\n";
    for (const auto& c : rep.costs)
        out << c.path << ',' << c.stage << ',' << c.state << ',' << c.probability << ','
            << c.invest << ',' << c.ops << "\n";
    out.close();
    csv_open(out, (fs::path(dir) / "volumes.csv").string());
    out << "path,stage,state,shed,curtail\n";
    for (const auto& v : rep.volumes)
        out << v.path << ',' << v.stage << ',' << v.state << ',' << v.shed << ',' << v.curtail
            << "\n";
    out.close();
    csv_open(out, (fs::path(dir) / "training.csv").string());
    out << "iteration,lower_bound,forward_cost,wall_s\n";
    for (const auto& e : rep.training)
        out << e.iteration << ',' << e.lower_bound << ',' << e.forward_cost << ',' << e.wall_s
            << "\n";
    out.close();
}

Instance expected_value_instance(const Instance& inst) {
    const MarkovChain& ch = inst.chain;
    int Y = ch.n_stages();
    int dims = static_cast<int>(ch.columns.size());
    int H = ch.hours();
    // stagewise state marginals from the transition chain
    std::vector<std::vector<double>> marg(Y);
    marg[0] = {1.0};
    for (int y = 1; y < Y; ++y) {
        marg[y].assign(ch.stages[y].size(), 0.0);
        for (std::size_t f = 0; f < marg[y - 1].size(); ++f)
            for (std::size_t t = 0; t < marg[y].size(); ++t)
                marg[y][t] += marg[y - 1][f] * ch.transitions[y - 1][f][t];
    }
    std::vector<std::vector<MarkovState>> stages;
    for (int y = 0; y < Y; ++y) {
        DayVector mean;
        mean.values.assign(static_cast<std::size_t>(H) * dims, 0.0);
        double iv = 0;
        for (std::size_t m = 0; m < ch.stages[y].size(); ++m) {
            const MarkovState& st = ch.stages[y][m];
            iv += marg[y][m] * st.invest_factor;
            for (const auto& prof : st.profiles) {
                double w = marg[y][m] * prof.weight;
                for (int t = 0; t < H; ++t)
                    for (int c = 0; c < dims; ++c) {
                        std::string cls = col_class(ch.columns[c]);
                        double f = 1.0;
                        if (cls == "load")
                            f = st.load_factor;
                        else if (cls == "wind" || cls == "solar" || cls == "dtr_e" ||
                                 cls == "dtr_n")
                            f = st.climate_factor;
                        mean.values[static_cast<std::size_t>(t) * dims + c] +=
                            w * f * prof.day.values[static_cast<std::size_t>(t) * dims + c];
                    }
            }
        }
        MarkovState ev;
        ev.label = "ev" + std::to_string(y + 1);
        ev.invest_factor = iv;
        NoiseProfile p;
        p.day = std::move(mean);
        p.weight = 1.0;
        p.name = ev.label;
        ev.profiles.push_back(std::move(p));
        stages.push_back({std::move(ev)});
    }
    Instance out = inst;
    out.chain = build_markov_chain(std::move(stages), {}, ch.columns);
    return out;
}

std::vector<std::vector<double>> extract_deltas(const MonolithicProblem& mono,
                                                const std::vector<double>& x, int path) {
    if (path < 0 || path >= static_cast<int>(mono.blocks.size()))
        throw ValidationError("path index out of range");
    std::vector<std::vector<double>> delta;
    for (const auto& b : mono.blocks[path]) {
        std::vector<double> d(mono.layout.entries.size());
        for (int k = 0; k < mono.layout.size(); ++k) {
            d[k] = x[b.delta[k]];
            if (mono.layout.entries[k].integral) d[k] = std::round(d[k]);
            d[k] = std::max(0.0, d[k]);
        }
        delta.push_back(std::move(d));
    }
    return delta;
}

VossResult compute_voss(const Instance& inst, const MilpOptions& opts) {
    VossResult vr;
    MonolithicProblem rp = build_monolithic(inst);
    MilpResult r = solve_milp(rp.lp, opts);
    if (r.status != MilpStatus::Optimal)
        throw SolverLimit("stochastic problem did not solve to optimality");
    vr.rp = r.obj;

    Instance evi = expected_value_instance(inst);
    MonolithicProblem evp = build_monolithic(evi);
    MilpResult re = solve_milp(evp.lp, opts);
    if (re.status != MilpStatus::Optimal)
        throw SolverLimit("expected-value problem did not solve to optimality");
    vr.ev = re.obj;
    vr.delta_ev = extract_deltas(evp, re.x, 0);

    // fix the ev investments inside the stochastic problem and re-solve
    Lp fixed = rp.lp;
    for (const auto& blocks : rp.blocks)
        for (const auto& b : blocks)
            for (int k = 0; k < rp.layout.size(); ++k) {
                double v = vr.delta_ev[b.stage - 1][k];
                fixed.lb[b.delta[k]] = v;
                fixed.ub[b.delta[k]] = v;
            }
    MilpResult rf = solve_milp(fixed, opts);
    if (rf.status != MilpStatus::Optimal)
        throw InternalError("expected-value plan evaluation failed; recourse incomplete");
    vr.eev = rf.obj;
    vr.voss = vr.eev - vr.rp;
    return vr;
}

namespace {

struct StageEval {
    double invest = 0, ops = 0, shed = 0, curtail = 0;
};

StageEval eval_stage_fixed(const Instance& inst, int stage, int state,
                           const std::vector<double>& z_in, const std::vector<double>& delta,
                           const MilpOptions& opts) {
    StageProblem sp = build_stage_problem(inst, stage, state, -1);
    for (int k = 0; k < sp.layout.size(); ++k) {
        sp.lp.lb[sp.block.delta[k]] = delta[k];
        sp.lp.ub[sp.block.delta[k]] = delta[k];
    }
    if (!sp.copy_rows.empty()) set_trial_state(sp, z_in);
    MilpResult r = solve_milp(sp.lp, opts);
    if (r.status != MilpStatus::Optimal)
        throw InternalError("fixed-plan stage " + std::to_string(stage) + " state '" +
                            inst.chain.stages[stage - 1][state].label + "' did not solve");
    // the future-cost column sits at its zero lower bound: no cuts here
    StageEval ev;
    ev.invest = obj_sum(sp.lp, r.x, sp.block.delta);
    for (const auto& oi : sp.block.ops) {
        ev.ops += ops_cost(sp.lp, r.x, oi);
        double rho = rho_of(inst, sp.block, oi);
        ev.shed += rho * col_total(r.x, oi.shed);
        ev.curtail += rho * col_total(r.x, oi.curtail);
    }
    return ev;
}

} // namespace

std::vector<ExPostRecord> expost_evaluate(const Instance& inst,
                                          const std::vector<std::vector<double>>& delta,
                                          const MilpOptions& opts) {
    int Y = inst.chain.n_stages();
    if (static_cast<int>(delta.size()) != Y)
        throw ValidationError("plan must hold one investment vector per stage");
    StateLayout lay = build_state_layout(inst);
    for (const auto& d : delta)
        if (static_cast<int>(d.size()) != lay.size())
            throw ValidationError("plan vector length does not match the state layout");
    // cumulative capacity entering each stage
    std::vector<std::vector<double>> z_in(Y + 1, std::vector<double>(lay.entries.size(), 0.0));
    for (int y = 1; y <= Y; ++y)
        for (int k = 0; k < lay.size(); ++k) z_in[y][k] = z_in[y - 1][k] + delta[y - 1][k];

    // results depend on (stage, state) only: identical plan on every path
    std::vector<std::vector<StageEval>> cache(Y);
    for (int y = 1; y <= Y; ++y)
        cache[y - 1].resize(inst.chain.stages[y - 1].size());
    std::vector<std::vector<bool>> have(Y);
    for (int y = 1; y <= Y; ++y) have[y - 1].assign(inst.chain.stages[y - 1].size(), false);

    ScenarioTree tree = expand_to_tree(inst.chain);
    std::vector<ExPostRecord> records;
    for (std::size_t p = 0; p < tree.paths.size(); ++p) {
        ExPostRecord rec;
        rec.path = static_cast<int>(p);
        rec.probability = tree.paths[p].probability;
        rec.states = tree.paths[p].state_idx;
        for (int y = 1; y <= Y; ++y) {
            int m = rec.states[y - 1];
            if (!have[y - 1][m]) {
                cache[y - 1][m] = eval_stage_fixed(inst, y, m, z_in[y - 1], delta[y - 1], opts);
                have[y - 1][m] = true;
            }
            const StageEval& ev = cache[y - 1][m];
            rec.invest += ev.invest;
            rec.ops += ev.ops;
            rec.shed += ev.shed;
            rec.curtail += ev.curtail;
        }
        rec.total = rec.invest + rec.ops;
        records.push_back(std::move(rec));
    }
    return records;
}

void write_expost_csv(const std::vector<ExPostRecord>& records, const std::string& path) {
    std::ofstream out;
    csv_open(out, path);
    out << "path,probability,states,invest,ops,total,shed,curtail\n";
    for (const auto& r : records) {
        out << r.path << ',' << r.probability << ',';
        for (std::size_t i = 0; i < r.states.size(); ++i)
            out << (i ? "|" : "") << r.states[i];
        out << ',' << r.invest << ',' << r.ops << ',' << r.total << ',' << r.shed << ','
            << r.curtail << "\n";
    }
}

std::vector<ZoneSweepRow> zone_sweep(const Instance& master, const std::vector<int>& sizes,
                                     int repetitions, std::uint64_t seed) {
    if (repetitions < 1) throw ValidationError("zone sweep needs at least one repetition");
    int Z = static_cast<int>(master.net.zones.size());
    std::vector<ZoneSweepRow> rows;
    std::vector<std::vector<double>> costs(sizes.size());
    std::vector<std::vector<double>> walls(sizes.size());
    for (int rep = 0; rep < repetitions; ++rep) {
        std::vector<int> order(Z);
        std::iota(order.begin(), order.end(), 0);
        std::mt19937_64 rng(seed * 1000003ull + static_cast<std::uint64_t>(rep));
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t si = 0; si < sizes.size(); ++si) {
            int n = std::min(sizes[si], Z);
            Instance sub = master;
            std::vector<bool> keep(Z, false);
            for (int i = 0; i < n; ++i) keep[order[i]] = true;
            for (int zi = 0; zi < Z; ++zi)
                if (!keep[zi]) sub.net.zones[zi].area = 0; // candidacy off, physics kept
            auto t0 = Clock::now();
            MonolithicProblem mono = build_monolithic(sub);
            MilpResult r = solve_milp(mono.lp, {});
            if (r.status != MilpStatus::Optimal)
                throw InternalError("zone sweep solve failed at n=" + std::to_string(n));
            costs[si].push_back(r.obj);
            walls[si].push_back(seconds_since(t0));
        }
    }
    for (std::size_t si = 0; si < sizes.size(); ++si) {
        ZoneSweepRow row;
        row.n_zones = std::min(sizes[si], Z);
        double sum = 0;
        for (double c : costs[si]) sum += c;
        row.mean_cost = sum / repetitions;
        double ss = 0;
        for (double c : costs[si]) ss += (c - row.mean_cost) * (c - row.mean_cost);
        row.std_cost = repetitions >= 2 ? std::sqrt(ss / (repetitions - 1)) : 0.0;
        double ws = 0;
        for (double w : walls[si]) ws += w;
        row.mean_wall_s = ws / repetitions;
        rows.push_back(row);
    }
    return rows;
}

void write_zone_sweep_csv(const std::vector<ZoneSweepRow>& rows, const std::string& path) {
    std::ofstream out;
    csv_open(out, path);
    out << "n_zones,mean_cost,std_cost,mean_wall_s\n";
    for (const auto& r : rows)
        out << r.n_zones << ',' << r.mean_cost << ',' << r.std_cost << ',' << r.mean_wall_s
            << "\n";
}

} // namespace tplan
