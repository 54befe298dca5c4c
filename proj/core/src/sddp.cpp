#include "tplan/sddp.hpp"

#include "tplan/errors.hpp"
#include "tplan/scenario.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

namespace tplan {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t x = a * 0x9E3779B97F4A7C15ull + b * 0xBF58476D1CE4E5B9ull +
                      c * 0x94D049BB133111EBull + 0x2545F4914F6CDD1Dull;
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
}

// uniform in [0,1) from the raw engine output; std::uniform_real_distribution
// is not bit-stable across standard libraries, this mapping is
double u01(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

int pick(const std::vector<double>& w, double u) {
    double acc = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        acc += w[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(w.size()) - 1;
}

// run f(0..n-1) across up to `workers` threads; each index writes disjoint state
template <class F>
void parallel_for(int n, int workers, F&& f) {
    int use = std::min(n, std::max(1, workers));
    if (use <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(use);
    std::exception_ptr err;
    std::mutex err_mu;
    for (int t = 0; t < use; ++t)
        pool.emplace_back([&] {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> g(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

struct SolveCache {
    Basis basis;
};

struct ChildOut {
    double v = 0;
    std::vector<double> pi;
};

std::vector<std::string> layout_names(const StateLayout& lay) {
    std::vector<std::string> names;
    names.reserve(lay.entries.size());
    for (const auto& e : lay.entries) names.push_back(e.name);
    return names;
}

} // namespace

bool check_stopping(const std::vector<TrainLogEntry>& log, const TrainOptions& opts) {
    int n = static_cast<int>(log.size());
    int k = std::max(1, opts.stall_iterations);
    if (n - 1 < k) return false; // need k bound improvements to judge
    for (int i = n - k; i < n; ++i)
        if (log[i].lower_bound - log[i - 1].lower_bound >= opts.stall_tolerance) return false;
    return true;
}

long count_forward_samples(const MarkovChain& chain) {
    const long cap = std::numeric_limits<long>::max();
    long total = 1;
    for (int y = 2; y <= chain.n_stages(); ++y) {
        long per = 0;
        for (const auto& s : chain.stages[y - 1]) per += static_cast<long>(s.profiles.size());
        if (per == 0) per = 1;
        if (total > cap / per) return cap;
        total *= per;
    }
    return total;
}

void save_policy(const Policy& p, const std::string& path) {
    json j;
    j["format"] = "tplan-policy";
    j["version"] = 1;
    j["seed"] = p.seed;
    j["lower_bound"] = p.lower_bound;
    j["state_names"] = p.state_names;
    json cuts = json::array();
    for (const auto& c : p.cuts)
        cuts.push_back({{"stage", c.stage},
                        {"state", c.state},
                        {"alpha", c.alpha},
                        {"beta", c.beta},
                        {"iteration", c.iteration}});
    j["cuts"] = std::move(cuts);
    json log = json::array();
    for (const auto& e : p.log)
        log.push_back({{"iteration", e.iteration},
                       {"lower_bound", e.lower_bound},
                       {"forward_cost", e.forward_cost},
                       {"states", e.states},
                       {"profiles", e.profiles},
                       {"wall_s", e.wall_s}});
    j["log"] = std::move(log);
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write policy file " + path);
    out << j.dump(2) << "\n";
}

Policy load_policy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open policy file " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ParseError("policy file " + path + ": " + e.what());
    }
    if (j.value("format", "") != "tplan-policy")
        throw ParseError("policy file " + path + ": not a tplan-policy file");
    if (j.value("version", 0) != 1)
        throw ParseError("policy file " + path + ": unsupported version");
    Policy p;
    p.seed = j.value("seed", std::uint64_t{0});
    p.lower_bound = j.value("lower_bound", 0.0);
    p.state_names = j.value("state_names", std::vector<std::string>{});
    for (const auto& c : j.value("cuts", json::array())) {
        Cut cut;
        cut.stage = c.value("stage", 1);
        cut.state = c.value("state", 0);
        cut.alpha = c.value("alpha", 0.0);
        cut.beta = c.value("beta", std::vector<double>{});
        cut.iteration = c.value("iteration", 0);
        p.cuts.push_back(std::move(cut));
    }
    for (const auto& e : j.value("log", json::array())) {
        TrainLogEntry le;
        le.iteration = e.value("iteration", 0);
        le.lower_bound = e.value("lower_bound", 0.0);
        le.forward_cost = e.value("forward_cost", 0.0);
        le.states = e.value("states", std::vector<int>{});
        le.profiles = e.value("profiles", std::vector<int>{});
        le.wall_s = e.value("wall_s", 0.0);
        p.log.push_back(std::move(le));
    }
    return p;
}

struct SddpEngine::Impl {
    Instance inst;
    TrainOptions opts;
    StateLayout lay;
    int Y = 1;

    StageProblem root;
    std::vector<std::vector<std::vector<StageProblem>>> subs; // [y-2][m][o]
    std::vector<std::vector<StageProblem>> expected;          // [y-2][m], Expected noise only
    std::vector<std::vector<std::vector<double>>> prof_w;     // [y-2][m][o] noise weights

    using CacheArr = std::vector<std::vector<std::vector<SolveCache>>>;
    CacheArr shared_cache; // synchronous mode; each (y,m,o) touched by one task at a time

    Policy policy;
    std::mutex mu; // asynchronous mode: guards policy and the iteration counter
    double best_lb = -kInf;
    double wall_offset = 0;

    Impl(Instance in, TrainOptions op) : inst(std::move(in)), opts(op) {
        auto rep = validate_chain(inst.chain);
        if (!rep.ok()) throw ValidationError("markov chain invalid: " + rep.violations.front());
        Y = inst.chain.n_stages();
        lay = build_state_layout(inst);
        root = build_stage_problem(inst, 1, 0, -1);
        subs.resize(Y >= 2 ? Y - 1 : 0);
        prof_w.resize(subs.size());
        if (opts.noise == NoiseMode::Expected) expected.resize(subs.size());
        for (int y = 2; y <= Y; ++y) {
            const auto& states = inst.chain.stages[y - 1];
            subs[y - 2].resize(states.size());
            prof_w[y - 2].resize(states.size());
            if (!expected.empty()) expected[y - 2].reserve(states.size());
            for (int m = 0; m < static_cast<int>(states.size()); ++m) {
                int np = static_cast<int>(states[m].profiles.size());
                subs[y - 2][m].reserve(np);
                for (int o = 0; o < np; ++o) {
                    subs[y - 2][m].push_back(build_stage_problem(inst, y, m, o));
                    prof_w[y - 2][m].push_back(states[m].profiles[o].weight);
                }
                if (!expected.empty())
                    expected[y - 2].push_back(build_stage_problem(inst, y, m, -1));
            }
        }
        shared_cache.resize(subs.size());
        for (std::size_t a = 0; a < subs.size(); ++a) {
            shared_cache[a].resize(subs[a].size());
            for (std::size_t b = 0; b < subs[a].size(); ++b)
                shared_cache[a][b].resize(subs[a][b].size());
        }
        policy.seed = opts.seed;
        policy.state_names = layout_names(lay);
    }

    CacheArr make_cache() const {
        CacheArr c(subs.size());
        for (std::size_t a = 0; a < subs.size(); ++a) {
            c[a].resize(subs[a].size());
            for (std::size_t b = 0; b < subs[a].size(); ++b) c[a][b].resize(subs[a][b].size());
        }
        return c;
    }

    // copy of the base problem with the first ncuts matching cuts appended
    Lp with_cuts(const StageProblem& sp, const std::vector<Cut>& cuts, std::size_t ncuts) const {
        Lp lp = sp.lp;
        if (sp.theta_col < 0) return lp;
        ncuts = std::min(ncuts, cuts.size());
        for (std::size_t i = 0; i < ncuts; ++i) {
            const Cut& c = cuts[i];
            if (c.stage != sp.block.stage || c.state != sp.block.state) continue;
            int r = lp.add_row(RowSense::GE, c.alpha, "cut" + std::to_string(i), "cut");
            lp.add_entry(r, sp.theta_col, 1.0);
            for (int k = 0; k < lay.size(); ++k)
                if (c.beta[k] != 0.0) lp.add_entry(r, sp.block.z_out[k], -c.beta[k]);
        }
        return lp;
    }

    std::vector<double> snap_state(const StageProblem& sp, const std::vector<double>& x) const {
        std::vector<double> z(lay.entries.size());
        for (int k = 0; k < lay.size(); ++k) {
            double v = x[sp.block.z_out[k]];
            if (lay.entries[k].integral) v = std::round(v);
            z[k] = std::max(0.0, v);
        }
        return z;
    }

    struct RootSolve {
        double obj = 0;
        double stage_cost = 0;
        std::vector<double> z;
    };

    RootSolve solve_root(const std::vector<Cut>& cuts, std::size_t ncuts) {
        Lp lp = with_cuts(root, cuts, ncuts);
        MilpResult mr = solve_milp(lp, opts.milp);
        if (mr.status == MilpStatus::Limit)
            throw SolverLimit("stage 1 solve hit the node or time limit");
        if (mr.status != MilpStatus::Optimal)
            throw InternalError("stage 1 problem is infeasible or unbounded");
        RootSolve rs;
        rs.obj = mr.obj;
        double theta = root.theta_col >= 0 ? mr.x[root.theta_col] : 0.0;
        rs.stage_cost = mr.obj - theta;
        rs.z = snap_state(root, mr.x);
        return rs;
    }

    struct Traj {
        std::vector<int> states, profiles;
        std::vector<std::vector<double>> z; // z_out per stage, stages 1..Y-1
        double total = 0;
    };

    // sample_noise forces per-profile solves even when training uses expected blocks
    Traj roll_forward(const RootSolve& r1, std::mt19937_64& rng, const std::vector<Cut>& cuts,
                      std::size_t ncuts, bool sample_noise) {
        Traj tr;
        tr.states.push_back(0);
        tr.profiles.push_back(-1);
        tr.total = r1.stage_cost;
        if (Y >= 2) tr.z.push_back(r1.z);
        int m = 0;
        for (int y = 2; y <= Y; ++y) {
            m = pick(inst.chain.transitions[y - 2][m], u01(rng));
            int o = -1;
            const StageProblem* sp = nullptr;
            if (!sample_noise && opts.noise == NoiseMode::Expected) {
                sp = &expected[y - 2][m];
            } else {
                o = pick(prof_w[y - 2][m], u01(rng));
                sp = &subs[y - 2][m][o];
            }
            Lp lp = with_cuts(*sp, cuts, ncuts);
            for (int k = 0; k < lay.size(); ++k) lp.rhs[sp->copy_rows[k]] = tr.z[y - 2][k];
            MilpResult mr = solve_milp(lp, opts.milp);
            if (mr.status == MilpStatus::Limit)
                throw SolverLimit("forward solve hit the node or time limit at stage " +
                                  std::to_string(y));
            if (mr.status != MilpStatus::Optimal)
                throw InternalError("forward solve failed at stage " + std::to_string(y) +
                                    " state '" + inst.chain.stages[y - 1][m].label + "'");
            double theta = sp->theta_col >= 0 ? mr.x[sp->theta_col] : 0.0;
            tr.total += mr.obj - theta;
            tr.states.push_back(m);
            tr.profiles.push_back(o);
            if (y < Y) tr.z.push_back(snap_state(*sp, mr.x));
        }
        return tr;
    }

    ChildOut solve_child(int y, int m, int o, const std::vector<double>& zbar,
                         const std::vector<Cut>& cuts, std::size_t ncuts, SolveCache* cache) {
        const StageProblem& sp = subs[y - 2][m][o];
        Lp lp = with_cuts(sp, cuts, ncuts);
        for (int k = 0; k < lay.size(); ++k) lp.rhs[sp.copy_rows[k]] = zbar[k];
        Basis warm;
        if (cache && !cache->basis.empty()) {
            std::size_t want =
                static_cast<std::size_t>(lp.num_vars()) + static_cast<std::size_t>(lp.num_rows());
            if (cache->basis.status.size() <= want) {
                warm = cache->basis;
                // appended cut rows start with their slack basic
                warm.status.resize(want, VarStatus::Basic);
            }
        }
        SimplexResult sr = solve_lp(lp, opts.lp, warm);
        if (sr.sol.status == LpStatus::IterationLimit)
            throw SolverLimit("backward solve hit the iteration limit at stage " +
                              std::to_string(y));
        if (sr.sol.status != LpStatus::Optimal)
            throw InternalError("backward subproblem not solvable at stage " + std::to_string(y) +
                                " state '" + inst.chain.stages[y - 1][m].label + "' profile " +
                                std::to_string(o));
        if (cache) cache->basis = sr.basis;
        ChildOut out;
        out.v = sr.sol.obj;
        out.pi.resize(sp.copy_rows.size());
        for (std::size_t k = 0; k < sp.copy_rows.size(); ++k)
            out.pi[k] = sr.sol.row_dual[sp.copy_rows[k]];
        return out;
    }

    // solves every child along the trajectory and appends one cut per parent pool.
    // Cuts are appended to `cuts` so inner stages see the ones made for outer stages;
    // `fresh` additionally collects them for deferred publication.
    void backward(const Traj& tr, int iteration, std::vector<Cut>& cuts, std::vector<Cut>* fresh,
                  int fanout, CacheArr* caches) {
        for (int y = Y; y >= 2; --y) {
            const std::size_t ncuts = cuts.size();
            const std::vector<double>& zbar = tr.z[y - 2];
            const auto& states = inst.chain.stages[y - 1];
            std::vector<std::pair<int, int>> kids;
            for (int m = 0; m < static_cast<int>(states.size()); ++m)
                for (int o = 0; o < static_cast<int>(states[m].profiles.size()); ++o)
                    kids.emplace_back(m, o);
            std::vector<ChildOut> outs(kids.size());
            parallel_for(static_cast<int>(kids.size()), fanout, [&](int i) {
                SolveCache* c = caches ? &(*caches)[y - 2][kids[i].first][kids[i].second] : nullptr;
                outs[i] = solve_child(y, kids[i].first, kids[i].second, zbar, cuts, ncuts, c);
            });
            const auto& trans = inst.chain.transitions[y - 2];
            int nparents = static_cast<int>(inst.chain.stages[y - 2].size());
            for (int mp = 0; mp < nparents; ++mp) {
                Cut c;
                c.stage = y - 1;
                c.state = mp;
                c.iteration = iteration;
                c.beta.assign(lay.entries.size(), 0.0);
                for (std::size_t i = 0; i < kids.size(); ++i) {
                    double w = trans[mp][kids[i].first] *
                               prof_w[y - 2][kids[i].first][kids[i].second];
                    if (w == 0.0) continue;
                    c.alpha += w * outs[i].v;
                    for (int k = 0; k < lay.size(); ++k) {
                        c.alpha -= w * outs[i].pi[k] * zbar[k];
                        c.beta[k] += w * outs[i].pi[k];
                    }
                }
                if (fresh) fresh->push_back(c);
                cuts.push_back(std::move(c));
            }
        }
    }

    void log_progress(const TrainLogEntry& e) const {
        if (!opts.progress) return;
        std::cout << "[sddp] it " << e.iteration << "  lb " << e.lower_bound << "  fwd "
                  << e.forward_cost << "  cuts " << policy.cuts.size() << "\n";
    }

    void train_sync(int it0, Clock::time_point t0) {
        int W = std::max(1, opts.workers);
        for (int it = it0 + 1; it <= it0 + opts.max_iterations; ++it) {
            std::size_t ncuts = policy.cuts.size();
            RootSolve rs = solve_root(policy.cuts, ncuts);
            best_lb = std::max(best_lb, rs.obj);
            std::vector<Traj> trs(W);
            parallel_for(W, W, [&](int w) {
                std::mt19937_64 rng(mix64(opts.seed, static_cast<std::uint64_t>(it),
                                          static_cast<std::uint64_t>(w)));
                trs[w] = roll_forward(rs, rng, policy.cuts, ncuts, false);
            });
            for (int w = 0; w < W; ++w)
                backward(trs[w], it, policy.cuts, nullptr, opts.workers, &shared_cache);
            TrainLogEntry e;
            e.iteration = it;
            e.lower_bound = best_lb;
            e.forward_cost = trs[0].total;
            e.states = trs[0].states;
            e.profiles = trs[0].profiles;
            e.wall_s = wall_offset + std::chrono::duration<double>(Clock::now() - t0).count();
            policy.log.push_back(e);
            log_progress(e);
            if (check_stopping(policy.log, opts)) break;
        }
    }

    void train_async(int it0, Clock::time_point t0) {
        std::atomic<bool> stop{false};
        std::atomic<int> iter{it0};
        int W = std::max(1, opts.workers);
        std::vector<std::thread> crew;
        std::exception_ptr err;
        std::mutex err_mu;
        for (int w = 0; w < W; ++w)
            crew.emplace_back([&, w] {
                CacheArr caches = make_cache();
                try {
                    while (!stop.load()) {
                        int it = iter.fetch_add(1) + 1;
                        if (it > it0 + opts.max_iterations) {
                            stop.store(true);
                            break;
                        }
                        std::vector<Cut> local;
                        {
                            std::lock_guard<std::mutex> g(mu);
                            local = policy.cuts;
                        }
                        RootSolve rs = solve_root(local, local.size());
                        std::mt19937_64 rng(mix64(opts.seed, static_cast<std::uint64_t>(it),
                                                  static_cast<std::uint64_t>(w)));
                        Traj tr = roll_forward(rs, rng, local, local.size(), false);
                        std::vector<Cut> fresh;
                        backward(tr, it, local, &fresh, 1, &caches);
                        std::lock_guard<std::mutex> g(mu);
                        for (auto& c : fresh) policy.cuts.push_back(std::move(c));
                        best_lb = std::max(best_lb, rs.obj);
                        TrainLogEntry e;
                        e.iteration = it;
                        e.lower_bound = best_lb;
                        e.forward_cost = tr.total;
                        e.states = tr.states;
                        e.profiles = tr.profiles;
                        e.wall_s = wall_offset +
                                   std::chrono::duration<double>(Clock::now() - t0).count();
                        policy.log.push_back(e);
                        log_progress(e);
                        if (check_stopping(policy.log, opts)) stop.store(true);
                    }
                } catch (...) {
                    std::lock_guard<std::mutex> g(err_mu);
                    if (!err) err = std::current_exception();
                    stop.store(true);
                }
            });
        for (auto& th : crew) th.join();
        if (err) std::rethrow_exception(err);
    }

    Policy train() {
        auto t0 = Clock::now();
        int it0 = policy.log.empty() ? 0 : policy.log.back().iteration;
        if (!policy.log.empty()) {
            wall_offset = policy.log.back().wall_s;
            best_lb = std::max(best_lb, policy.log.back().lower_bound);
        }
        if (opts.mode == TrainMode::Asynchronous && opts.workers > 1)
            train_async(it0, t0);
        else
            train_sync(it0, t0);
        RootSolve fin = solve_root(policy.cuts, policy.cuts.size());
        best_lb = std::max(best_lb, fin.obj);
        policy.lower_bound = best_lb;
        return policy;
    }

    SimulationResult simulate(int n_samples, std::uint64_t seed) {
        if (n_samples < 1) throw ValidationError("simulate needs at least one sample");
        SimulationResult res;
        std::size_t ncuts = policy.cuts.size();
        RootSolve rs = solve_root(policy.cuts, ncuts);
        for (int i = 0; i < n_samples; ++i) {
            std::mt19937_64 rng(mix64(seed, static_cast<std::uint64_t>(i) + 1, 0x51u));
            Traj tr = roll_forward(rs, rng, policy.cuts, ncuts, true);
            res.samples.push_back(tr.total);
            res.states.push_back(tr.states);
            res.profiles.push_back(tr.profiles);
        }
        double sum = 0;
        for (double v : res.samples) sum += v;
        res.mean = sum / n_samples;
        if (n_samples >= 2) {
            double ss = 0;
            for (double v : res.samples) ss += (v - res.mean) * (v - res.mean);
            res.std_dev = std::sqrt(ss / (n_samples - 1));
            double half = 1.959963984540054 * res.std_dev / std::sqrt(double(n_samples));
            res.ci_low = res.mean - half;
            res.ci_high = res.mean + half;
            res.ci_defined = true;
        } else {
            res.std_dev = 0;
            res.ci_low = res.ci_high = res.mean;
            res.ci_defined = false;
        }
        return res;
    }
};

SddpEngine::SddpEngine(Instance inst, TrainOptions opts)
    : impl_(std::make_unique<Impl>(std::move(inst), opts)) {}

SddpEngine::~SddpEngine() = default;

Policy SddpEngine::train() { return impl_->train(); }

SimulationResult SddpEngine::simulate(int n_samples, std::uint64_t seed) {
    return impl_->simulate(n_samples, seed);
}

std::vector<double> SddpEngine::first_stage_state() {
    return impl_->solve_root(impl_->policy.cuts, impl_->policy.cuts.size()).z;
}

void SddpEngine::resume(const Policy& saved) {
    if (!saved.state_names.empty() && saved.state_names != impl_->policy.state_names)
        throw ValidationError("policy state layout does not match this instance");
    std::uint64_t seed = impl_->policy.seed;
    auto names = impl_->policy.state_names;
    impl_->policy = saved;
    impl_->policy.seed = seed;
    impl_->policy.state_names = std::move(names);
    impl_->best_lb = -kInf;
    for (const auto& e : impl_->policy.log) impl_->best_lb = std::max(impl_->best_lb, e.lower_bound);
    if (impl_->policy.log.empty() && !impl_->policy.cuts.empty())
        impl_->best_lb = std::max(impl_->best_lb, saved.lower_bound);
}

const Policy& SddpEngine::policy() const { return impl_->policy; }

const StateLayout& SddpEngine::layout() const { return impl_->lay; }

} // namespace tplan
