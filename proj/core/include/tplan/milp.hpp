#pragma once

#include "tplan/lp.hpp"
#include "tplan/simplex.hpp"

namespace tplan {

enum class MilpStatus { Optimal, Infeasible, Unbounded, Limit };

struct MilpOptions {
    double gap_tol = 1e-9;         // relative optimality gap
    double integrality_tol = 1e-6; // max distance from nearest integer
    long max_nodes = 2000000;
    double time_limit_s = 0;       // 0 disables the limit
    int workers = 1;
    int probe_every = 20;          // rounding heuristic cadence, 0 disables
    bool log = false;
    SimplexOptions lp;
};

struct MilpResult {
    MilpStatus status = MilpStatus::Infeasible;
    double obj = kInf;    // incumbent objective
    double bound = -kInf; // proven lower bound
    double gap = kInf;
    std::vector<double> x;
    long nodes = 0;
    long lp_iterations = 0;
};

MilpResult solve_milp(const Lp& lp, const MilpOptions& opts = {});

} // namespace tplan
