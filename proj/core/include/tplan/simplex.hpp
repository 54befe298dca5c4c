#pragma once
// Bounded-variable primal simplex with a composite (artificial-free) phase 1.
// Dantzig pricing with a Bland's-rule fallback after a degenerate streak.
// Deterministic: no randomization, ties broken by lowest index.

#include "tplan/lp.hpp"

#include <memory>
#include <vector>

namespace tplan {

// Nonbasic variables rest at a bound (or at zero when free).
enum class VarStatus : std::uint8_t { Basic, AtLower, AtUpper, FreeZero };

// Basis snapshot for warm starts: one status per column (structurals then one
// slack per row). Empty means cold start from the all-slack basis.
struct Basis {
    std::vector<VarStatus> status;
    bool empty() const { return status.empty(); }
};

struct SimplexOptions {
    double feas_tol = 1e-9;         // bound/row feasibility
    double dual_tol = 1e-9;         // reduced-cost optimality threshold
    int max_iterations = 2000000;
    int refactor_interval = 96;     // pivots between basis refactorizations
    int degenerate_switch = 60;     // consecutive degenerate pivots before Bland
    bool presolve = true;           // empty rows/cols + fixed-variable substitution
    bool tighten_bounds = false;    // single-pass activity-based bound tightening;
                                    // off when duals must certify the original rows
};

struct SimplexResult {
    LpSolution sol;
    Basis basis;                    // final basis, valid for Optimal and for warm restarts
};

SimplexResult solve_lp(const Lp& lp, const SimplexOptions& opts = {},
                       const Basis& warm = {});

} // namespace tplan
