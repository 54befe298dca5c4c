#pragma once

#include <cstdint>
#include <vector>

namespace tplan {

// Series are flattened row-major: value(t, v) = data[t * dims + v].
// The local metric is the Euclidean distance across dims at an aligned
// (t, s) pair; alignment cost accumulates by summation.
double dtw_distance(const std::vector<double>& a, const std::vector<double>& b, int dims = 1);

struct KMedoidsResult {
    std::vector<int> medoids;    // indices into the item set
    std::vector<int> assignment; // item -> medoid slot
    double total_cost = 0;
};

// PAM over a precomputed symmetric distance matrix: deterministic greedy build
// then best-improving swap to a local optimum. The seed is recorded by callers
// for provenance; this path itself is deterministic.
KMedoidsResult kmedoids(const std::vector<std::vector<double>>& dist, int k);

} // namespace tplan
