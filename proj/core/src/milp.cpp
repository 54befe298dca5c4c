#include "tplan/milp.hpp"
#include "tplan/errors.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <iostream>
#include <memory>
#include <mutex>
#include <queue>
#include <thread>
#include <vector>

namespace tplan {
namespace {

struct BoundChange {
    int col = -1;
    bool is_ub = false;
    double val = 0;
};

struct Node {
    double bound;
    long id;
    int depth;
    std::shared_ptr<const Node> parent;
    BoundChange change;
    std::shared_ptr<const Basis> warm;
};

struct NodeOrder {
    bool operator()(const std::shared_ptr<Node>& a, const std::shared_ptr<Node>& b) const {
        if (a->bound != b->bound) return a->bound > b->bound; // min-heap on bound
        return a->id > b->id;
    }
};

class Search {
public:
    Search(const Lp& lp, const MilpOptions& opts) : lp_(lp), opts_(opts) {
        for (int j = 0; j < lp.num_vars(); ++j)
            if (lp.kind[j] != VarKind::Continuous) int_cols_.push_back(j);
        start_ = std::chrono::steady_clock::now();
    }

    MilpResult run() {
        MilpResult out;
        Lp root = lp_;
        auto rres = solve_lp(root, opts_.lp);
        out.lp_iterations += rres.sol.iterations;
        if (rres.sol.status == LpStatus::Infeasible) {
            out.status = MilpStatus::Infeasible;
            return out;
        }
        if (rres.sol.status == LpStatus::Unbounded) {
            out.status = MilpStatus::Unbounded;
            return out;
        }
        if (rres.sol.status != LpStatus::Optimal)
            throw SolverLimit("milp: root relaxation hit the iteration limit");
        if (int_cols_.empty()) {
            out.status = MilpStatus::Optimal;
            out.obj = rres.sol.obj;
            out.bound = rres.sol.obj;
            out.gap = 0;
            out.x = rres.sol.x;
            out.nodes = 1;
            return out;
        }

        probe(rres.sol.x);
        int frac = pick_branch(rres.sol.x);
        if (frac < 0) {
            // relaxation already integral
            record_incumbent(rres.sol.obj, rres.sol.x);
            out.status = MilpStatus::Optimal;
            out.obj = inc_obj_;
            out.bound = rres.sol.obj;
            out.gap = 0;
            out.x = inc_x_;
            out.nodes = 1;
            out.lp_iterations = lp_iters_.load() + out.lp_iterations;
            return out;
        }

        auto rootb = std::make_shared<const Basis>(rres.basis);
        push_children(nullptr, 0, frac, rres.sol.x[frac], rres.sol.obj, rootb);

        int nworkers = std::max(1, opts_.workers);
        if (nworkers == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (int t = 0; t < nworkers; ++t) pool.emplace_back([this] { worker(); });
            for (auto& th : pool) th.join();
        }

        out.nodes = nodes_.load() + 1;
        out.lp_iterations = lp_iters_.load() + rres.sol.iterations;
        if (hit_limit_.load()) {
            out.status = MilpStatus::Limit;
            out.obj = inc_obj_;
            out.x = inc_x_;
            out.bound = queue_.empty() ? std::max(bound_floor_, rres.sol.obj)
                                       : queue_.top()->bound;
            out.gap = rel_gap(inc_obj_, out.bound);
            return out;
        }
        if (inc_obj_ >= kInf) {
            out.status = MilpStatus::Infeasible;
            return out;
        }
        out.status = MilpStatus::Optimal;
        out.obj = inc_obj_;
        out.x = inc_x_;
        // natural exhaustion proves the incumbent exactly; a dominance stop
        // proves it up to the prune cut recorded in bound_floor_
        out.bound = bound_floor_ > -kInf ? std::min(inc_obj_, bound_floor_) : inc_obj_;
        out.gap = rel_gap(out.obj, out.bound);
        return out;
    }

private:
    static double rel_gap(double ub, double lb) {
        if (ub >= kInf) return kInf;
        return (ub - lb) / std::max(1.0, std::fabs(ub));
    }

    bool over_limit() {
        if (opts_.max_nodes > 0 && nodes_.load() >= opts_.max_nodes) return true;
        if (opts_.time_limit_s > 0) {
            auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_);
            if (dt.count() > opts_.time_limit_s) return true;
        }
        return false;
    }

    int pick_branch(const std::vector<double>& x) const {
        int best = -1;
        double best_score = opts_.integrality_tol;
        for (int j : int_cols_) {
            double f = x[j] - std::floor(x[j]);
            double score = std::min(f, 1.0 - f);
            if (score > best_score + 1e-15) {
                best_score = score;
                best = j;
            }
        }
        return best;
    }

    void record_incumbent(double obj, const std::vector<double>& x) {
        std::lock_guard<std::mutex> g(inc_mtx_);
        if (obj < inc_obj_ - 1e-12) {
            inc_obj_ = obj;
            inc_x_ = x;
            if (opts_.log)
                std::cout << "  incumbent " << obj << " after " << nodes_.load() << " nodes\n";
        }
    }

    double incumbent() {
        std::lock_guard<std::mutex> g(inc_mtx_);
        return inc_obj_;
    }

    // round integers to nearest feasible value, fix them, re-solve the continuous part
    void probe(const std::vector<double>& x) {
        Lp fixed = lp_;
        for (int j : int_cols_) {
            double r = std::round(x[j]);
            r = std::min(std::max(r, lp_.lb[j]), lp_.ub[j]);
            fixed.lb[j] = r;
            fixed.ub[j] = r;
        }
        auto res = solve_lp(fixed, opts_.lp);
        lp_iters_ += res.sol.iterations;
        if (res.sol.status == LpStatus::Optimal) record_incumbent(res.sol.obj, res.sol.x);
    }

    void push_children(std::shared_ptr<const Node> parent, int depth, int col, double xval,
                       double bound, std::shared_ptr<const Basis> warm) {
        auto down = std::make_shared<Node>();
        down->bound = bound;
        down->depth = depth + 1;
        down->parent = parent;
        down->change = {col, true, std::floor(xval)};
        down->warm = warm;
        auto up = std::make_shared<Node>();
        up->bound = bound;
        up->depth = depth + 1;
        up->parent = parent;
        up->change = {col, false, std::ceil(xval)};
        up->warm = warm;
        std::lock_guard<std::mutex> g(q_mtx_);
        down->id = next_id_++;
        up->id = next_id_++;
        queue_.push(down);
        queue_.push(up);
        q_cv_.notify_all();
    }

    void apply_bounds(const Node* node, Lp& prob) const {
        // walk to the root; the nearest change for a column wins
        std::vector<const Node*> chain;
        for (const Node* n = node; n; n = n->parent.get()) chain.push_back(n);
        for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
            const auto& c = (*it)->change;
            if (c.col < 0) continue;
            if (c.is_ub)
                prob.ub[c.col] = std::min(prob.ub[c.col], c.val);
            else
                prob.lb[c.col] = std::max(prob.lb[c.col], c.val);
        }
    }

    void worker() {
        for (;;) {
            std::shared_ptr<Node> node;
            {
                std::unique_lock<std::mutex> lk(q_mtx_);
                q_cv_.wait(lk, [&] {
                    return stop_.load() || !queue_.empty() || active_ == 0;
                });
                if (stop_.load()) return;
                if (queue_.empty()) {
                    if (active_ == 0) {
                        q_cv_.notify_all();
                        return;
                    }
                    continue;
                }
                node = queue_.top();
                double inc = incumbent_unlocked();
                double cut = inc - std::max(1e-9, opts_.gap_tol * std::max(1.0, std::fabs(inc)));
                if (node->bound >= cut) {
                    // best-first: everything left is dominated
                    bound_floor_ = std::max(bound_floor_, std::min(node->bound, inc));
                    stop_.store(true);
                    q_cv_.notify_all();
                    return;
                }
                queue_.pop();
                active_++;
            }
            process(node);
            {
                std::lock_guard<std::mutex> g(q_mtx_);
                active_--;
            }
            q_cv_.notify_all();
            if (stop_.load()) return;
        }
    }

    double incumbent_unlocked() {
        std::lock_guard<std::mutex> g(inc_mtx_);
        return inc_obj_;
    }

    void process(const std::shared_ptr<Node>& node) {
        if (over_limit()) {
            hit_limit_.store(true);
            stop_.store(true);
            q_cv_.notify_all();
            return;
        }
        long n = nodes_.fetch_add(1) + 1;
        Lp prob = lp_;
        apply_bounds(node.get(), prob);
        for (int j = 0; j < prob.num_vars(); ++j)
            if (prob.lb[j] > prob.ub[j] + 1e-12) return; // contradictory branch
        Basis warm = node->warm ? *node->warm : Basis{};
        auto res = solve_lp(prob, opts_.lp, warm);
        lp_iters_ += res.sol.iterations;
        if (res.sol.status == LpStatus::Infeasible) return;
        if (res.sol.status != LpStatus::Optimal)
            throw InternalError("milp: node relaxation neither optimal nor infeasible");
        double inc = incumbent();
        if (res.sol.obj >= inc - 1e-9) return;
        int frac = pick_branch(res.sol.x);
        if (frac < 0) {
            record_incumbent(res.sol.obj, res.sol.x);
            return;
        }
        if (opts_.probe_every > 0 && n % opts_.probe_every == 0) probe(res.sol.x);
        auto wb = std::make_shared<const Basis>(res.basis);
        push_children(node, node->depth, frac, res.sol.x[frac], res.sol.obj, wb);
    }

    const Lp& lp_;
    const MilpOptions& opts_;
    std::vector<int> int_cols_;
    std::chrono::steady_clock::time_point start_;

    std::mutex q_mtx_;
    std::condition_variable q_cv_;
    std::priority_queue<std::shared_ptr<Node>, std::vector<std::shared_ptr<Node>>, NodeOrder>
        queue_;
    long next_id_ = 0;
    int active_ = 0;
    std::atomic<bool> stop_{false};
    std::atomic<bool> hit_limit_{false};
    std::atomic<long> nodes_{0};
    std::atomic<long> lp_iters_{0};

    std::mutex inc_mtx_;
    double inc_obj_ = kInf;
    std::vector<double> inc_x_;
    double bound_floor_ = -kInf;
};

} // namespace

MilpResult solve_milp(const Lp& lp, const MilpOptions& opts) {
    Search s(lp, opts);
    return s.run();
}

} // namespace tplan
