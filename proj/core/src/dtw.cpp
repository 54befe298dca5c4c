#include "tplan/dtw.hpp"
#include "tplan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tplan {

double dtw_distance(const std::vector<double>& a, const std::vector<double>& b, int dims) {
    if (dims <= 0) throw ValidationError("dtw: dims must be positive");
    if (a.empty() || b.empty()) throw ValidationError("dtw: empty series");
    if (a.size() % dims != 0 || b.size() % dims != 0)
        throw ValidationError("dtw: series length not a multiple of dims");
    const int n = static_cast<int>(a.size()) / dims;
    const int m = static_cast<int>(b.size()) / dims;
    const double inf = std::numeric_limits<double>::infinity();
    auto local = [&](int i, int j) {
        double s = 0;
        for (int v = 0; v < dims; ++v) {
            double d = a[i * dims + v] - b[j * dims + v];
            s += d * d;
        }
        return std::sqrt(s);
    };
    // two-row dynamic program
    std::vector<double> prev(m + 1, inf), cur(m + 1, inf);
    prev[0] = 0;
    for (int i = 1; i <= n; ++i) {
        cur[0] = inf;
        for (int j = 1; j <= m; ++j)
            cur[j] = local(i - 1, j - 1) + std::min({prev[j], cur[j - 1], prev[j - 1]});
        std::swap(prev, cur);
    }
    return prev[m];
}

namespace {

double assignment_cost(const std::vector<std::vector<double>>& dist, const std::vector<int>& meds,
                       std::vector<int>* assign_out) {
    const int n = static_cast<int>(dist.size());
    double total = 0;
    for (int i = 0; i < n; ++i) {
        int best = 0;
        double bd = dist[i][meds[0]];
        for (size_t s = 1; s < meds.size(); ++s)
            if (dist[i][meds[s]] < bd) {
                bd = dist[i][meds[s]];
                best = static_cast<int>(s);
            }
        total += bd;
        if (assign_out) (*assign_out)[i] = best;
    }
    return total;
}

} // namespace

KMedoidsResult kmedoids(const std::vector<std::vector<double>>& dist, int k) {
    const int n = static_cast<int>(dist.size());
    if (k <= 0) throw ValidationError("kmedoids: k must be positive");
    if (k > n) throw ValidationError("kmedoids: k exceeds item count");

    std::vector<int> meds;
    std::vector<char> is_med(n, 0);
    // build: first medoid minimizes total distance, then greedy max decrease
    {
        int best = 0;
        double bc = std::numeric_limits<double>::infinity();
        for (int c = 0; c < n; ++c) {
            double t = 0;
            for (int i = 0; i < n; ++i) t += dist[i][c];
            if (t < bc) {
                bc = t;
                best = c;
            }
        }
        meds.push_back(best);
        is_med[best] = 1;
    }
    std::vector<double> near(n);
    for (int i = 0; i < n; ++i) near[i] = dist[i][meds[0]];
    while (static_cast<int>(meds.size()) < k) {
        int best = -1;
        double best_gain = -1;
        for (int c = 0; c < n; ++c) {
            if (is_med[c]) continue;
            double gain = 0;
            for (int i = 0; i < n; ++i) gain += std::max(0.0, near[i] - dist[i][c]);
            if (gain > best_gain) {
                best_gain = gain;
                best = c;
            }
        }
        meds.push_back(best);
        is_med[best] = 1;
        for (int i = 0; i < n; ++i) near[i] = std::min(near[i], dist[i][best]);
    }

    std::vector<int> assign(n);
    double cost = assignment_cost(dist, meds, &assign);
    // swap phase: take the single best improving (medoid, candidate) exchange
    for (;;) {
        double best_cost = cost;
        int best_slot = -1, best_cand = -1;
        for (size_t s = 0; s < meds.size(); ++s) {
            for (int c = 0; c < n; ++c) {
                if (is_med[c]) continue;
                std::vector<int> trial = meds;
                trial[s] = c;
                double t = assignment_cost(dist, trial, nullptr);
                if (t < best_cost - 1e-12) {
                    best_cost = t;
                    best_slot = static_cast<int>(s);
                    best_cand = c;
                }
            }
        }
        if (best_slot < 0) break;
        is_med[meds[best_slot]] = 0;
        is_med[best_cand] = 1;
        meds[best_slot] = best_cand;
        cost = assignment_cost(dist, meds, &assign);
    }

    KMedoidsResult out;
    out.medoids = meds;
    out.assignment = assign;
    out.total_cost = cost;
    return out;
}

} // namespace tplan
