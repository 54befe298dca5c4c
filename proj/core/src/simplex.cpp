#include "tplan/simplex.hpp"
#include "tplan/errors.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <vector>

namespace tplan {

namespace {

constexpr double kPivotTol = 1e-8;   // smallest acceptable pivot magnitude
constexpr double kRateTol = 1e-10;   // below this a basic is not a ratio blocker
constexpr double kZero = 1e-12;

struct Col {
    double lb, ub, cost;
    std::vector<std::pair<int, double>> entries; // (internal row, coef)
};

// Internal problem: all rows are equalities over structural columns plus one
// slack per row whose bounds encode the original sense.
struct Internal {
    int m = 0;
    std::vector<Col> cols;            // structurals first, then m slacks
    std::vector<double> b;
    std::vector<int> orig_row;        // internal row -> original row
    std::vector<int> orig_col;        // internal structural -> original col
    int n_struct = 0;
    int ncols() const { return static_cast<int>(cols.size()); }
};

struct PresolveOut {
    bool decided = false;             // presolve settled the whole problem
    LpStatus status = LpStatus::Optimal;
    std::vector<double> farkas;       // original rows
    std::vector<double> ray;          // original cols

    std::vector<char> col_fixed;
    std::vector<double> col_value;
    std::vector<char> row_dropped;
    std::vector<double> work_lb, work_ub;
};

PresolveOut run_presolve(const Lp& lp, const SimplexOptions& opts) {
    const int n = lp.num_vars(), m = lp.num_rows();
    PresolveOut out;
    out.col_fixed.assign(n, 0);
    out.col_value.assign(n, 0.0);
    out.row_dropped.assign(m, 0);
    out.work_lb = lp.lb;
    out.work_ub = lp.ub;

    for (int j = 0; j < n; ++j) {
        if (out.work_lb[j] > out.work_ub[j] + opts.feas_tol) {
            out.decided = true;
            out.status = LpStatus::Infeasible;
            return out;
        }
    }
    if (!opts.presolve) return out;

    std::vector<char> col_used(n, 0);
    for (const auto& e : lp.entries) col_used[e.col] = 1;

    for (int j = 0; j < n; ++j) {
        if (out.work_ub[j] - out.work_lb[j] <= kZero) {
            out.col_fixed[j] = 1;
            out.col_value[j] = out.work_lb[j];
        }
    }
    for (int j = 0; j < n; ++j) {
        if (col_used[j] || out.col_fixed[j]) continue;
        double c = lp.obj[j];
        if (c > 0) {
            if (out.work_lb[j] <= -kInf) {
                out.decided = true;
                out.status = LpStatus::Unbounded;
                out.ray.assign(n, 0.0);
                out.ray[j] = -1.0;
                return out;
            }
            out.col_value[j] = out.work_lb[j];
        } else if (c < 0) {
            if (out.work_ub[j] >= kInf) {
                out.decided = true;
                out.status = LpStatus::Unbounded;
                out.ray.assign(n, 0.0);
                out.ray[j] = 1.0;
                return out;
            }
            out.col_value[j] = out.work_ub[j];
        } else {
            out.col_value[j] = out.work_lb[j] > -kInf ? out.work_lb[j]
                             : out.work_ub[j] < kInf ? out.work_ub[j] : 0.0;
        }
        out.col_fixed[j] = 1;
    }

    std::vector<double> shift(m, 0.0);
    std::vector<int> live_count(m, 0);
    for (const auto& e : lp.entries) {
        if (out.col_fixed[e.col]) shift[e.row] += e.coef * out.col_value[e.col];
        else live_count[e.row]++;
    }
    for (int i = 0; i < m; ++i) {
        if (live_count[i] > 0) continue;
        double r = lp.rhs[i] - shift[i];
        bool ok = lp.sense[i] == RowSense::LE ? r >= -opts.feas_tol
                : lp.sense[i] == RowSense::GE ? r <= opts.feas_tol
                                              : std::fabs(r) <= opts.feas_tol;
        if (!ok) {
            out.decided = true;
            out.status = LpStatus::Infeasible;
            out.farkas.assign(m, 0.0);
            out.farkas[i] = (lp.sense[i] == RowSense::LE || (lp.sense[i] == RowSense::EQ && r < 0))
                                ? -1.0 : 1.0;
            return out;
        }
        out.row_dropped[i] = 1;
    }

    if (opts.tighten_bounds) {
        std::vector<std::vector<std::pair<int, double>>> rows(m);
        for (const auto& e : lp.entries)
            if (!out.col_fixed[e.col] && !out.row_dropped[e.row])
                rows[e.row].push_back({e.col, e.coef});
        for (int i = 0; i < m; ++i) {
            if (rows[i].empty()) continue;
            double minact = 0, maxact = 0;
            int min_inf = 0, max_inf = 0;
            for (auto [j, a] : rows[i]) {
                double lo = a > 0 ? out.work_lb[j] : out.work_ub[j];
                double hi = a > 0 ? out.work_ub[j] : out.work_lb[j];
                double cmin = a * lo, cmax = a * hi;
                if (!std::isfinite(cmin)) min_inf++;
                else minact += cmin;
                if (!std::isfinite(cmax)) max_inf++;
                else maxact += cmax;
            }
            double r = lp.rhs[i] - shift[i];
            bool upper_applies = lp.sense[i] != RowSense::GE;
            bool lower_applies = lp.sense[i] != RowSense::LE;
            for (auto [j, a] : rows[i]) {
                double cmin = a > 0 ? a * out.work_lb[j] : a * out.work_ub[j];
                double cmax = a > 0 ? a * out.work_ub[j] : a * out.work_lb[j];
                if (upper_applies && (min_inf == 0 || (min_inf == 1 && !std::isfinite(cmin)))) {
                    double rest = std::isfinite(cmin) ? minact - cmin : minact;
                    double room = (r - rest) / a;
                    if (a > 0) out.work_ub[j] = std::min(out.work_ub[j], room);
                    else out.work_lb[j] = std::max(out.work_lb[j], room);
                }
                if (lower_applies && (max_inf == 0 || (max_inf == 1 && !std::isfinite(cmax)))) {
                    double rest = std::isfinite(cmax) ? maxact - cmax : maxact;
                    double room = (r - rest) / a;
                    if (a > 0) out.work_lb[j] = std::max(out.work_lb[j], room);
                    else out.work_ub[j] = std::min(out.work_ub[j], room);
                }
            }
            for (auto [j, a] : rows[i]) {
                (void)a;
                if (out.work_lb[j] > out.work_ub[j] + opts.feas_tol) {
                    out.decided = true;
                    out.status = LpStatus::Infeasible;
                    out.farkas.assign(m, 0.0);
                    out.farkas[i] = lp.sense[i] == RowSense::LE ? -1.0 : 1.0;
                    return out;
                }
            }
        }
    }
    return out;
}

Internal build_internal(const Lp& lp, const PresolveOut& pre) {
    Internal in;
    const int m = lp.num_rows();
    std::vector<int> int_row(m, -1);
    for (int i = 0; i < m; ++i) {
        if (!pre.row_dropped[i]) {
            int_row[i] = in.m++;
            in.orig_row.push_back(i);
        }
    }
    in.b.assign(in.m, 0.0);
    for (int i = 0; i < m; ++i)
        if (int_row[i] >= 0) in.b[int_row[i]] = lp.rhs[i];

    std::vector<int> int_col(lp.num_vars(), -1);
    for (int j = 0; j < lp.num_vars(); ++j) {
        if (pre.col_fixed[j]) continue;
        int_col[j] = static_cast<int>(in.cols.size());
        in.orig_col.push_back(j);
        in.cols.push_back({pre.work_lb[j], pre.work_ub[j], lp.obj[j], {}});
    }
    in.n_struct = static_cast<int>(in.cols.size());
    for (const auto& e : lp.entries) {
        if (int_row[e.row] < 0) continue;
        if (pre.col_fixed[e.col])
            in.b[int_row[e.row]] -= e.coef * pre.col_value[e.col];
        else
            in.cols[int_col[e.col]].entries.push_back({int_row[e.row], e.coef});
    }
    for (auto& c : in.cols) {
        std::sort(c.entries.begin(), c.entries.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<std::pair<int, double>> merged;
        for (auto& [r, v] : c.entries) {
            if (!merged.empty() && merged.back().first == r) merged.back().second += v;
            else merged.push_back({r, v});
        }
        c.entries = std::move(merged);
    }
    for (int i = 0; i < in.m; ++i) {
        Col slack;
        switch (lp.sense[in.orig_row[i]]) {
            case RowSense::LE: slack.lb = 0; slack.ub = kInf; break;
            case RowSense::GE: slack.lb = -kInf; slack.ub = 0; break;
            case RowSense::EQ: slack.lb = 0; slack.ub = 0; break;
        }
        slack.cost = 0;
        slack.entries = {{i, 1.0}};
        in.cols.push_back(std::move(slack));
    }
    return in;
}

class SimplexCore {
public:
    SimplexCore(const Internal& in, const SimplexOptions& opts) : in_(in), opts_(opts) {
        vstat_.assign(in_.ncols(), VarStatus::AtLower);
        x_.assign(in_.ncols(), 0.0);
        skip_.assign(in_.ncols(), 0);
        refactor_interval_ = std::clamp(static_cast<int>(4e6 / std::max(1, in_.m)), 8,
                                        opts_.refactor_interval);
    }

    void set_start(const std::vector<VarStatus>& start) {
        const int nc = in_.ncols();
        std::vector<int> basics;
        for (int j = 0; j < nc; ++j) {
            vstat_[j] = start[j];
            if (start[j] == VarStatus::Basic && static_cast<int>(basics.size()) < in_.m)
                basics.push_back(j);
        }
        std::vector<char> is_basic(nc, 0);
        for (int j : basics) is_basic[j] = 1;
        for (int i = 0; i < in_.m && static_cast<int>(basics.size()) < in_.m; ++i) {
            int sj = in_.n_struct + i;
            if (!is_basic[sj]) {
                basics.push_back(sj);
                is_basic[sj] = 1;
            }
        }
        for (int j = 0; j < nc; ++j)
            if (vstat_[j] == VarStatus::Basic) vstat_[j] = default_nonbasic(j);
        basic_ = basics;
        for (int p : basic_) vstat_[p] = VarStatus::Basic;
        if (!factorize()) {
            basic_.clear();
            for (int j = 0; j < nc; ++j)
                vstat_[j] = j < in_.n_struct ? default_nonbasic(j) : VarStatus::Basic;
            for (int i = 0; i < in_.m; ++i) basic_.push_back(in_.n_struct + i);
            if (!factorize()) throw InternalError("slack basis failed to factorize");
        }
        recompute_primal();
    }

    LpStatus run() {
        for (int attempt = 0; attempt < 6; ++attempt) {
            restart_ = false;
            if (total_infeas() > feas_threshold()) {
                LpStatus s = iterate(true);
                if (restart_) continue;
                if (s == LpStatus::IterationLimit) return s;
                if (total_infeas() > feas_threshold()) {
                    build_farkas();
                    return LpStatus::Infeasible;
                }
            }
            LpStatus s = iterate(false);
            if (restart_) continue;
            if (s != LpStatus::Optimal) return s;
            if (!refactor_or_reset()) continue;
            recompute_primal();
            if (total_infeas() <= feas_threshold()) return LpStatus::Optimal;
            // drift pushed a basic out of bounds: repair and re-optimize
        }
        return LpStatus::Optimal;
    }

    int iterations() const { return iter_; }
    const std::vector<double>& x() const { return x_; }
    const std::vector<VarStatus>& vstat() const { return vstat_; }
    const std::vector<double>& farkas_rows() const { return farkas_; }
    const std::vector<double>& ray_cols() const { return ray_; }

    std::vector<double> duals() {
        Eigen::VectorXd cb(in_.m);
        for (int p = 0; p < in_.m; ++p) cb[p] = in_.cols[basic_[p]].cost;
        Eigen::VectorXd y = btran(cb);
        return {y.data(), y.data() + in_.m};
    }

private:
    const Internal& in_;
    const SimplexOptions& opts_;
    std::vector<VarStatus> vstat_;
    std::vector<int> basic_;
    std::vector<double> x_;
    std::vector<double> farkas_, ray_;
    std::vector<char> skip_;
    int iter_ = 0;
    int refactor_interval_;
    bool restart_ = false;

    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
    struct Eta {
        int r;
        Eigen::VectorXd d;
    };
    std::vector<Eta> etas_;

    VarStatus default_nonbasic(int j) const {
        const Col& c = in_.cols[j];
        if (c.lb > -kInf) return VarStatus::AtLower;
        if (c.ub < kInf) return VarStatus::AtUpper;
        return VarStatus::FreeZero;
    }

    double nonbasic_value(int j) const {
        switch (vstat_[j]) {
            case VarStatus::AtLower: return in_.cols[j].lb;
            case VarStatus::AtUpper: return in_.cols[j].ub;
            default: return 0.0;
        }
    }

    double feas_threshold() const { return opts_.feas_tol * 10; }

    bool factorize() {
        Eigen::SparseMatrix<double> B(in_.m, in_.m);
        std::vector<Eigen::Triplet<double>> trips;
        for (int p = 0; p < in_.m; ++p)
            for (auto [r, v] : in_.cols[basic_[p]].entries) trips.emplace_back(r, p, v);
        B.setFromTriplets(trips.begin(), trips.end());
        lu_.compute(B);
        if (lu_.info() != Eigen::Success) return false;
        etas_.clear();
        return true;
    }

    // A failed factorize leaves the LU object unusable, so the caller must not
    // ftran or btran again before a successful one. Falls back to the slack
    // basis, which is an identity matrix, and flags the outer loop to restart.
    bool refactor_or_reset() {
        if (factorize()) return true;
        for (int j = 0; j < in_.n_struct; ++j)
            if (vstat_[j] == VarStatus::Basic) vstat_[j] = default_nonbasic(j);
        basic_.clear();
        for (int i = 0; i < in_.m; ++i) {
            basic_.push_back(in_.n_struct + i);
            vstat_[in_.n_struct + i] = VarStatus::Basic;
        }
        if (!factorize()) throw InternalError("slack basis failed to factorize");
        restart_ = true;
        return false;
    }

    Eigen::VectorXd ftran(const Eigen::VectorXd& v) const {
        Eigen::VectorXd w = lu_.solve(v);
        for (const auto& e : etas_) {
            double t = w[e.r] / e.d[e.r];
            w -= t * e.d;
            w[e.r] = t;
        }
        return w;
    }

    Eigen::VectorXd btran(const Eigen::VectorXd& c) const {
        Eigen::VectorXd u = c;
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
            double acc = u[it->r] - (it->d.dot(u) - it->d[it->r] * u[it->r]);
            u[it->r] = acc / it->d[it->r];
        }
        // SparseLU::transpose() is non-const in Eigen 3.4 though it does not mutate
        auto& lu = const_cast<Eigen::SparseLU<Eigen::SparseMatrix<double>>&>(lu_);
        return lu.transpose().solve(u);
    }

    void recompute_primal() {
        Eigen::VectorXd rhs(in_.m);
        for (int i = 0; i < in_.m; ++i) rhs[i] = in_.b[i];
        for (int j = 0; j < in_.ncols(); ++j) {
            if (vstat_[j] == VarStatus::Basic) continue;
            double v = nonbasic_value(j);
            x_[j] = v;
            if (v != 0.0)
                for (auto [r, a] : in_.cols[j].entries) rhs[r] -= a * v;
        }
        Eigen::VectorXd xb = ftran(rhs);
        for (int p = 0; p < in_.m; ++p) x_[basic_[p]] = xb[p];
    }

    double total_infeas() const {
        double s = 0;
        for (int p = 0; p < in_.m; ++p) {
            const Col& c = in_.cols[basic_[p]];
            double v = x_[basic_[p]];
            if (v < c.lb) s += c.lb - v;
            else if (v > c.ub) s += v - c.ub;
        }
        return s;
    }

    double p1cost(int j) const {
        const Col& c = in_.cols[j];
        if (x_[j] < c.lb - opts_.feas_tol) return -1.0;
        if (x_[j] > c.ub + opts_.feas_tol) return 1.0;
        return 0.0;
    }

    LpStatus iterate(bool phase1) {
        int degen_streak = 0;
        std::fill(skip_.begin(), skip_.end(), 0);
        while (true) {
            if (iter_ >= opts_.max_iterations) return LpStatus::IterationLimit;
            bool bland = degen_streak > opts_.degenerate_switch;

            Eigen::VectorXd cb(in_.m);
            bool any_infeas = false;
            for (int p = 0; p < in_.m; ++p) {
                cb[p] = phase1 ? p1cost(basic_[p]) : in_.cols[basic_[p]].cost;
                if (phase1 && cb[p] != 0.0) any_infeas = true;
            }
            if (phase1 && !any_infeas) return LpStatus::Optimal;
            Eigen::VectorXd y = btran(cb);

            int q = -1, sigma = 0;
            double best = 0;
            for (int j = 0; j < in_.ncols(); ++j) {
                if (vstat_[j] == VarStatus::Basic || skip_[j]) continue;
                const Col& c = in_.cols[j];
                if (c.ub - c.lb <= kZero) continue;
                double d = phase1 ? 0.0 : c.cost;
                for (auto [r, a] : c.entries) d -= y[r] * a;
                int s = 0;
                if (vstat_[j] == VarStatus::AtLower && d < -opts_.dual_tol) s = 1;
                else if (vstat_[j] == VarStatus::AtUpper && d > opts_.dual_tol) s = -1;
                else if (vstat_[j] == VarStatus::FreeZero && std::fabs(d) > opts_.dual_tol)
                    s = d < 0 ? 1 : -1;
                if (s == 0) continue;
                if (bland) {
                    q = j;
                    sigma = s;
                    break;
                }
                if (std::fabs(d) > best * (1 + 1e-12) + kZero) {
                    best = std::fabs(d);
                    q = j;
                    sigma = s;
                }
            }
            if (q < 0) return LpStatus::Optimal;

            Eigen::VectorXd aq = Eigen::VectorXd::Zero(in_.m);
            for (auto [r, a] : in_.cols[q].entries) aq[r] = a;
            Eigen::VectorXd w = ftran(aq);

            const Col& cq = in_.cols[q];
            double own_range = cq.ub - cq.lb;
            double t_best = vstat_[q] == VarStatus::FreeZero ? kInf : own_range;
            int leave = -1;
            bool leave_to_upper = false;
            for (int p = 0; p < in_.m; ++p) {
                double rate = -sigma * w[p];
                if (std::fabs(rate) < kRateTol) continue;
                const Col& c = in_.cols[basic_[p]];
                double v = x_[basic_[p]];
                double t;
                bool to_upper;
                if (phase1 && v < c.lb - opts_.feas_tol) {
                    if (rate <= 0) continue; // moving further below; phase-1 pricing nets out
                    t = (c.lb - v) / rate;
                    to_upper = false;
                } else if (phase1 && v > c.ub + opts_.feas_tol) {
                    if (rate >= 0) continue;
                    t = (c.ub - v) / rate;
                    to_upper = true;
                } else if (rate > 0) {
                    if (c.ub >= kInf) continue;
                    t = (c.ub - v) / rate;
                    to_upper = true;
                } else {
                    if (c.lb <= -kInf) continue;
                    t = (c.lb - v) / rate;
                    to_upper = false;
                }
                if (t < 0) t = 0;
                if (t < t_best - 1e-10) {
                    t_best = t;
                    leave = p;
                    leave_to_upper = to_upper;
                } else if (leave >= 0 && t <= t_best + 1e-10) {
                    // tie: pick the numerically safer pivot, lowest id on equal footing
                    double wi = std::fabs(w[p]), wl = std::fabs(w[leave]);
                    bool take = bland ? basic_[p] < basic_[leave]
                                      : (wi > wl * (1 + 1e-9) ||
                                         (wi >= wl * (1 - 1e-9) && basic_[p] < basic_[leave] &&
                                          wi >= kPivotTol));
                    if (take) {
                        leave = p;
                        leave_to_upper = to_upper;
                    }
                }
            }

            if (t_best >= kInf) {
                if (phase1) {
                    // cannot happen with exact arithmetic; skip this column
                    skip_[q] = 1;
                    continue;
                }
                ray_.assign(in_.ncols(), 0.0);
                ray_[q] = sigma;
                for (int p = 0; p < in_.m; ++p)
                    if (std::fabs(w[p]) > kZero) ray_[basic_[p]] = -sigma * w[p];
                return LpStatus::Unbounded;
            }

            ++iter_;
            std::fill(skip_.begin(), skip_.end(), 0);
            double step = t_best;
            if (step < 1e-11) degen_streak++;
            else degen_streak = 0;

            if (leave < 0) {
                // bound flip across the entering variable's own range
                double delta = sigma * own_range;
                for (int p = 0; p < in_.m; ++p)
                    if (w[p] != 0.0) x_[basic_[p]] -= w[p] * delta;
                x_[q] = vstat_[q] == VarStatus::AtLower ? cq.ub : cq.lb;
                vstat_[q] = vstat_[q] == VarStatus::AtLower ? VarStatus::AtUpper
                                                            : VarStatus::AtLower;
                continue;
            }

            if (std::fabs(w[leave]) < kPivotTol) {
                // refuse an unstable pivot; refactor once, then skip the column
                if (!etas_.empty()) {
                    if (!refactor_or_reset()) return LpStatus::Optimal;
                    recompute_primal();
                } else {
                    skip_[q] = 1;
                }
                continue;
            }

            int out_col = basic_[leave];
            double xq_new = x_[q] + sigma * step;
            for (int p = 0; p < in_.m; ++p)
                if (w[p] != 0.0) x_[basic_[p]] -= w[p] * sigma * step;
            x_[q] = xq_new;
            x_[out_col] = leave_to_upper ? in_.cols[out_col].ub : in_.cols[out_col].lb;
            vstat_[out_col] = leave_to_upper ? VarStatus::AtUpper : VarStatus::AtLower;
            vstat_[q] = VarStatus::Basic;
            basic_[leave] = q;
            etas_.push_back({leave, w});
            if (static_cast<int>(etas_.size()) >= refactor_interval_) {
                if (!refactor_or_reset()) return LpStatus::Optimal;
                recompute_primal();
            }
        }
    }

    void build_farkas() {
        Eigen::VectorXd cb(in_.m);
        for (int p = 0; p < in_.m; ++p) cb[p] = p1cost(basic_[p]);
        Eigen::VectorXd y = btran(cb);
        farkas_.assign(in_.m, 0.0);
        for (int i = 0; i < in_.m; ++i) farkas_[i] = y[i];
    }
};

} // namespace

SimplexResult solve_lp(const Lp& lp, const SimplexOptions& opts, const Basis& warm) {
    const int n = lp.num_vars(), m = lp.num_rows();
    SimplexResult res;
    LpSolution& sol = res.sol;
    sol.x.assign(n, 0.0);
    sol.row_dual.assign(m, 0.0);
    sol.reduced_cost.assign(n, 0.0);

    PresolveOut pre = run_presolve(lp, opts);
    if (pre.decided) {
        sol.status = pre.status;
        if (!pre.farkas.empty()) sol.farkas = pre.farkas;
        if (!pre.ray.empty()) sol.ray = pre.ray;
        return res;
    }

    Internal in = build_internal(lp, pre);
    if (in.m == 0) {
        // every row got eliminated; the rest is a separable box problem
        sol.status = LpStatus::Optimal;
        for (int j = 0; j < n; ++j) {
            if (pre.col_fixed[j]) sol.x[j] = pre.col_value[j];
            sol.reduced_cost[j] = lp.obj[j]; // all duals are zero here
        }
        for (int jj = 0; jj < in.n_struct; ++jj) {
            const auto& c = in.cols[jj];
            int j = in.orig_col[jj];
            double v;
            if (c.cost > 0) {
                if (c.lb <= -kInf) {
                    sol.status = LpStatus::Unbounded;
                    sol.ray.assign(n, 0.0);
                    sol.ray[j] = -1.0;
                    return res;
                }
                v = c.lb;
            } else if (c.cost < 0) {
                if (c.ub >= kInf) {
                    sol.status = LpStatus::Unbounded;
                    sol.ray.assign(n, 0.0);
                    sol.ray[j] = 1.0;
                    return res;
                }
                v = c.ub;
            } else {
                v = c.lb > -kInf ? c.lb : (c.ub < kInf ? c.ub : 0.0);
            }
            sol.x[j] = v;
        }
        sol.obj = lp.eval_obj(sol.x);
        sol.duality_residual = std::fabs(sol.obj - lp_dual_objective(lp, sol));
        res.basis.status.assign(n + m, VarStatus::AtLower);
        for (int i = 0; i < m; ++i) res.basis.status[n + i] = VarStatus::Basic;
        for (int jj = 0; jj < in.n_struct; ++jj) {
            const auto& c = in.cols[jj];
            res.basis.status[in.orig_col[jj]] =
                sol.x[in.orig_col[jj]] == c.lb ? VarStatus::AtLower
                : sol.x[in.orig_col[jj]] == c.ub ? VarStatus::AtUpper : VarStatus::FreeZero;
        }
        return res;
    }
    SimplexCore core(in, opts);

    std::vector<VarStatus> start(in.ncols(), VarStatus::AtLower);
    if (!warm.empty() && static_cast<int>(warm.status.size()) == n + m) {
        for (int jj = 0; jj < in.n_struct; ++jj) start[jj] = warm.status[in.orig_col[jj]];
        for (int ii = 0; ii < in.m; ++ii)
            start[in.n_struct + ii] = warm.status[n + in.orig_row[ii]];
        for (int jj = 0; jj < in.ncols(); ++jj) {
            const auto& c = in.cols[jj];
            if (start[jj] == VarStatus::AtLower && c.lb <= -kInf)
                start[jj] = c.ub < kInf ? VarStatus::AtUpper : VarStatus::FreeZero;
            if (start[jj] == VarStatus::AtUpper && c.ub >= kInf)
                start[jj] = c.lb > -kInf ? VarStatus::AtLower : VarStatus::FreeZero;
        }
    } else {
        for (int jj = 0; jj < in.n_struct; ++jj) {
            const auto& c = in.cols[jj];
            start[jj] = c.lb > -kInf ? VarStatus::AtLower
                      : c.ub < kInf  ? VarStatus::AtUpper : VarStatus::FreeZero;
        }
        for (int ii = 0; ii < in.m; ++ii) start[in.n_struct + ii] = VarStatus::Basic;
    }
    core.set_start(start);
    LpStatus st = core.run();
    sol.status = st;
    sol.iterations = core.iterations();

    const auto& xi = core.x();
    for (int j = 0; j < n; ++j)
        if (pre.col_fixed[j]) sol.x[j] = pre.col_value[j];
    for (int jj = 0; jj < in.n_struct; ++jj) sol.x[in.orig_col[jj]] = xi[jj];

    if (st == LpStatus::Infeasible) {
        sol.farkas.assign(m, 0.0);
        const auto& f = core.farkas_rows();
        for (int ii = 0; ii < in.m; ++ii) sol.farkas[in.orig_row[ii]] = f[ii];
        return res;
    }
    if (st == LpStatus::Unbounded) {
        sol.ray.assign(n, 0.0);
        const auto& r = core.ray_cols();
        for (int jj = 0; jj < in.n_struct; ++jj) sol.ray[in.orig_col[jj]] = r[jj];
        return res;
    }

    std::vector<double> y = core.duals();
    for (int ii = 0; ii < in.m; ++ii) sol.row_dual[in.orig_row[ii]] = y[ii];
    for (int j = 0; j < n; ++j) sol.reduced_cost[j] = lp.obj[j];
    for (const auto& e : lp.entries)
        sol.reduced_cost[e.col] -= sol.row_dual[e.row] * e.coef;
    for (int jj = 0; jj < in.n_struct; ++jj)
        if (core.vstat()[jj] == VarStatus::Basic) sol.reduced_cost[in.orig_col[jj]] = 0.0;

    sol.obj = lp.eval_obj(sol.x);
    if (st == LpStatus::Optimal)
        sol.duality_residual = std::fabs(sol.obj - lp_dual_objective(lp, sol));

    res.basis.status.assign(n + m, VarStatus::AtLower);
    for (int i = 0; i < m; ++i) res.basis.status[n + i] = VarStatus::Basic;
    for (int jj = 0; jj < in.n_struct; ++jj) res.basis.status[in.orig_col[jj]] = core.vstat()[jj];
    for (int ii = 0; ii < in.m; ++ii)
        res.basis.status[n + in.orig_row[ii]] = core.vstat()[in.n_struct + ii];
    return res;
}

} // namespace tplan
