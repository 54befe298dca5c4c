#include "doctest.h"
#include "tplan/lp.hpp"
#include "tplan/simplex.hpp"

#include <cmath>
#include <cstring>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <vector>

using namespace tplan;

namespace {

// dense Gaussian elimination with partial pivoting, independent of the solver path
std::optional<std::vector<double>> gauss_solve(std::vector<std::vector<double>> A,
                                               std::vector<double> b) {
    const int n = static_cast<int>(b.size());
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::fabs(A[i][k]) > std::fabs(A[piv][k])) piv = i;
        if (std::fabs(A[piv][k]) < 1e-11) return std::nullopt;
        std::swap(A[k], A[piv]);
        std::swap(b[k], b[piv]);
        for (int i = k + 1; i < n; ++i) {
            double f = A[i][k] / A[k][k];
            if (f == 0.0) continue;
            for (int j = k; j < n; ++j) A[i][j] -= f * A[k][j];
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j) s -= A[i][j] * x[j];
        x[i] = s / A[i][i];
    }
    return x;
}

// Exhaustive basic-solution enumeration for boxed LPs: every choice of basis
// columns and nonbasic bound assignment is checked for feasibility and the
// best objective is kept. Only valid when every structural bound is finite.
double enumerate_boxed_lp(const Lp& lp) {
    const int n = lp.num_vars(), m = lp.num_rows();
    const int N = n + m;
    // dense column matrix of [A | I]
    std::vector<std::vector<double>> W(N, std::vector<double>(m, 0.0));
    for (const auto& e : lp.entries) W[e.col][e.row] += e.coef;
    for (int i = 0; i < m; ++i) W[n + i][i] = 1.0;
    std::vector<double> lo(N), hi(N);
    for (int j = 0; j < n; ++j) {
        lo[j] = lp.lb[j];
        hi[j] = lp.ub[j];
    }
    for (int i = 0; i < m; ++i) {
        switch (lp.sense[i]) {
            case RowSense::LE: lo[n + i] = 0; hi[n + i] = kInf; break;
            case RowSense::GE: lo[n + i] = -kInf; hi[n + i] = 0; break;
            case RowSense::EQ: lo[n + i] = 0; hi[n + i] = 0; break;
        }
    }
    double best = kInf;
    std::vector<int> basis;
    std::vector<int> nonbasic;
    std::function<void(int)> choose_basis = [&](int from) {
        if (static_cast<int>(basis.size()) == m) {
            nonbasic.clear();
            std::vector<char> inb(N, 0);
            for (int j : basis) inb[j] = 1;
            for (int j = 0; j < N; ++j)
                if (!inb[j]) nonbasic.push_back(j);
            // enumerate nonbasic bound assignments with finite values
            std::vector<double> nb_val(nonbasic.size());
            std::function<void(size_t)> choose_bounds = [&](size_t k) {
                if (k == nonbasic.size()) {
                    std::vector<std::vector<double>> B(m, std::vector<double>(m));
                    std::vector<double> rhs(lp.rhs);
                    for (int i = 0; i < m; ++i)
                        for (int p = 0; p < m; ++p) B[i][p] = W[basis[p]][i];
                    for (size_t t = 0; t < nonbasic.size(); ++t)
                        for (int i = 0; i < m; ++i) rhs[i] -= W[nonbasic[t]][i] * nb_val[t];
                    auto xb = gauss_solve(B, rhs);
                    if (!xb) return;
                    for (int p = 0; p < m; ++p) {
                        int j = basis[p];
                        if ((*xb)[p] < lo[j] - 1e-7 || (*xb)[p] > hi[j] + 1e-7) return;
                    }
                    double obj = lp.obj_const;
                    for (int p = 0; p < m; ++p)
                        if (basis[p] < n) obj += lp.obj[basis[p]] * (*xb)[p];
                    for (size_t t = 0; t < nonbasic.size(); ++t)
                        if (nonbasic[t] < n) obj += lp.obj[nonbasic[t]] * nb_val[t];
                    best = std::min(best, obj);
                    return;
                }
                int j = nonbasic[k];
                if (lo[j] > -kInf) {
                    nb_val[k] = lo[j];
                    choose_bounds(k + 1);
                }
                if (hi[j] < kInf && hi[j] != lo[j]) {
                    nb_val[k] = hi[j];
                    choose_bounds(k + 1);
                }
            };
            choose_bounds(0);
            return;
        }
        for (int j = from; j < N; ++j) {
            basis.push_back(j);
            choose_basis(j + 1);
            basis.pop_back();
        }
    };
    choose_basis(0);
    return best;
}

Lp random_boxed_lp(std::mt19937_64& rng, int m, int n, bool force_feasible = true) {
    auto unif = [&](double a, double b) {
        return a + (b - a) * (static_cast<double>(rng() >> 11) / 9007199254740992.0);
    };
    Lp lp;
    lp.name = "rand";
    for (int j = 0; j < n; ++j)
        lp.add_var("x" + std::to_string(j), 0.0, unif(0.5, 4.0), unif(-5.0, 5.0));
    std::vector<double> x0(n);
    for (int j = 0; j < n; ++j) x0[j] = unif(0.0, lp.ub[j]);
    for (int i = 0; i < m; ++i) {
        double act = 0;
        std::vector<std::pair<int, double>> row;
        for (int j = 0; j < n; ++j) {
            if (unif(0, 1) < 0.4) continue;
            double a = unif(-3.0, 3.0);
            row.push_back({j, a});
            act += a * x0[j];
        }
        int pick = static_cast<int>(unif(0, 3));
        RowSense s = pick == 0 ? RowSense::LE : pick == 1 ? RowSense::GE : RowSense::EQ;
        double b = act;
        if (force_feasible) {
            if (s == RowSense::LE) b += unif(0.0, 2.0);
            if (s == RowSense::GE) b -= unif(0.0, 2.0);
        } else {
            b += unif(-2.0, 2.0);
        }
        int r = lp.add_row(s, b, "r" + std::to_string(i));
        for (auto [j, a] : row) lp.add_entry(r, j, a);
    }
    return lp;
}

} // namespace

TEST_CASE("one variable bounded maximization") {
    Lp lp;
    lp.add_var("x", 0, 10, -1.0);
    int r = lp.add_row(RowSense::LE, 4.0, "cap");
    lp.add_entry(r, 0, 1.0);
    auto res = solve_lp(lp);
    REQUIRE(res.sol.status == LpStatus::Optimal);
    CHECK(res.sol.obj == doctest::Approx(-4.0).epsilon(1e-12));
    CHECK(res.sol.x[0] == doctest::Approx(4.0));
    CHECK(res.sol.row_dual[0] == doctest::Approx(-1.0));
    CHECK(res.sol.reduced_cost[0] == doctest::Approx(0.0));
    CHECK(res.sol.duality_residual <= 1e-7 * (1 + std::fabs(res.sol.obj)));
}

TEST_CASE("equality rows and upper-bounded variables") {
    // min x + 2y  s.t. x + y = 3, y <= 2, x <= 2
    Lp lp;
    lp.add_var("x", 0, 2, 1.0);
    lp.add_var("y", 0, 2, 2.0);
    int r = lp.add_row(RowSense::EQ, 3.0, "sum");
    lp.add_entry(r, 0, 1.0);
    lp.add_entry(r, 1, 1.0);
    auto res = solve_lp(lp);
    REQUIRE(res.sol.status == LpStatus::Optimal);
    CHECK(res.sol.obj == doctest::Approx(4.0)); // x=2, y=1
    CHECK(res.sol.x[0] == doctest::Approx(2.0));
    CHECK(res.sol.x[1] == doctest::Approx(1.0));
}

TEST_CASE("infeasible pair yields a Farkas certificate") {
    Lp lp;
    lp.add_var("x", 0, 10, 0.0);
    int r1 = lp.add_row(RowSense::GE, 2.0, "low");
    int r2 = lp.add_row(RowSense::LE, 1.0, "high");
    lp.add_entry(r1, 0, 1.0);
    lp.add_entry(r2, 0, 1.0);
    auto res = solve_lp(lp);
    REQUIRE(res.sol.status == LpStatus::Infeasible);
    REQUIRE(res.sol.farkas.size() == 2);
    CHECK(lp_farkas_margin(lp, res.sol.farkas) > 1e-9);
}

TEST_CASE("unbounded problem returns an improving ray") {
    Lp lp;
    lp.add_var("x", 0, kInf, -1.0);
    lp.add_var("y", 0, 5, 0.0);
    int r = lp.add_row(RowSense::LE, 4.0, "cap");
    lp.add_entry(r, 1, 1.0);
    auto res = solve_lp(lp);
    REQUIRE(res.sol.status == LpStatus::Unbounded);
    REQUIRE(res.sol.ray.size() == 2);
    double cr = 0;
    for (int j = 0; j < 2; ++j) cr += lp.obj[j] * res.sol.ray[j];
    CHECK(cr < -1e-9);
}

TEST_CASE("degenerate cycling example reaches the optimum") {
    // Beale's classic cycling instance; Bland fallback must finish it
    Lp lp;
    lp.add_var("x1", 0, kInf, -0.75);
    lp.add_var("x2", 0, kInf, 150.0);
    lp.add_var("x3", 0, kInf, -0.02);
    lp.add_var("x4", 0, kInf, 6.0);
    int r1 = lp.add_row(RowSense::LE, 0.0, "r1");
    lp.add_entry(r1, 0, 0.25);
    lp.add_entry(r1, 1, -60.0);
    lp.add_entry(r1, 2, -0.04);
    lp.add_entry(r1, 3, 9.0);
    int r2 = lp.add_row(RowSense::LE, 0.0, "r2");
    lp.add_entry(r2, 0, 0.5);
    lp.add_entry(r2, 1, -90.0);
    lp.add_entry(r2, 2, -0.02);
    lp.add_entry(r2, 3, 3.0);
    int r3 = lp.add_row(RowSense::LE, 1.0, "r3");
    lp.add_entry(r3, 2, 1.0);
    auto res = solve_lp(lp);
    REQUIRE(res.sol.status == LpStatus::Optimal);
    CHECK(res.sol.obj == doctest::Approx(-0.05).epsilon(1e-9));
}

TEST_CASE("random boxed LPs match exhaustive basic-solution enumeration") {
    std::mt19937_64 rng(20240817);
    for (int trial = 0; trial < 30; ++trial) {
        Lp lp = random_boxed_lp(rng, 4 + trial % 3, 5 + trial % 4);
        auto res = solve_lp(lp);
        REQUIRE(res.sol.status == LpStatus::Optimal);
        double oracle = enumerate_boxed_lp(lp);
        REQUIRE(oracle < kInf);
        CHECK(res.sol.obj == doctest::Approx(oracle).epsilon(1e-7));
        CHECK(lp.max_violation(res.sol.x) < 1e-7);
    }
}

TEST_CASE("strong duality residual stays within tolerance on random LPs") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        Lp lp = random_boxed_lp(rng, 6, 8);
        auto res = solve_lp(lp);
        REQUIRE(res.sol.status == LpStatus::Optimal);
        CHECK(res.sol.duality_residual <= 1e-7 * (1 + std::fabs(res.sol.obj)));
    }
}

TEST_CASE("random mixed-sense LPs either solve or certify infeasibility") {
    std::mt19937_64 rng(7);
    int infeasible_seen = 0;
    for (int trial = 0; trial < 60; ++trial) {
        Lp lp = random_boxed_lp(rng, 6, 5, false);
        auto res = solve_lp(lp);
        if (res.sol.status == LpStatus::Infeasible) {
            infeasible_seen++;
            CHECK(lp_farkas_margin(lp, res.sol.farkas) > 0);
        } else {
            REQUIRE(res.sol.status == LpStatus::Optimal);
            CHECK(lp.max_violation(res.sol.x) < 1e-7);
        }
    }
    CHECK(infeasible_seen > 0);
}

TEST_CASE("warm start from a perturbed problem takes fewer iterations") {
    std::mt19937_64 rng(1234);
    Lp lp = random_boxed_lp(rng, 8, 12);
    auto cold = solve_lp(lp);
    REQUIRE(cold.sol.status == LpStatus::Optimal);
    Lp lp2 = lp;
    lp2.ub[0] = std::max(0.1, lp2.ub[0] * 0.7);
    auto recold = solve_lp(lp2);
    auto warm = solve_lp(lp2, {}, cold.basis);
    REQUIRE(warm.sol.status == LpStatus::Optimal);
    CHECK(warm.sol.obj == doctest::Approx(recold.sol.obj).epsilon(1e-9));
    CHECK(warm.sol.iterations <= recold.sol.iterations);
}

TEST_CASE("objective scaling leaves the optimal basis unchanged") {
    std::mt19937_64 rng(55);
    Lp lp = random_boxed_lp(rng, 6, 8);
    auto base = solve_lp(lp);
    REQUIRE(base.sol.status == LpStatus::Optimal);
    for (double lam : {2.0, 10.0}) {
        Lp scaled = lp;
        for (auto& c : scaled.obj) c *= lam;
        auto res = solve_lp(scaled);
        REQUIRE(res.sol.status == LpStatus::Optimal);
        CHECK(res.sol.obj == doctest::Approx(lam * base.sol.obj).epsilon(1e-9));
        REQUIRE(res.basis.status.size() == base.basis.status.size());
        bool same = true;
        for (size_t i = 0; i < base.basis.status.size(); ++i)
            if (base.basis.status[i] != res.basis.status[i]) same = false;
        CHECK(same);
    }
}

TEST_CASE("presolve handles fixed variables and empty rows") {
    Lp lp;
    lp.add_var("x", 2, 2, 3.0); // fixed
    lp.add_var("y", 0, 5, 1.0);
    int r1 = lp.add_row(RowSense::LE, 10.0, "uses_fixed");
    lp.add_entry(r1, 0, 1.0);
    lp.add_entry(r1, 1, 1.0);
    int r2 = lp.add_row(RowSense::LE, 4.0, "becomes_empty");
    lp.add_entry(r2, 0, 1.0);
    auto res = solve_lp(lp);
    REQUIRE(res.sol.status == LpStatus::Optimal);
    CHECK(res.sol.x[0] == doctest::Approx(2.0));
    CHECK(res.sol.x[1] == doctest::Approx(0.0));
    CHECK(res.sol.obj == doctest::Approx(6.0));

    Lp bad = lp;
    bad.rhs[1] = 1.0; // fixed x=2 violates x <= 1
    auto res2 = solve_lp(bad);
    CHECK(res2.sol.status == LpStatus::Infeasible);
    CHECK(lp_farkas_margin(bad, res2.sol.farkas) > 0);
}

TEST_CASE("single-pass bound tightening finds implied infeasibility") {
    Lp lp;
    lp.add_var("x", 0, 1, 0.0);
    lp.add_var("y", 0, 1, 0.0);
    int r = lp.add_row(RowSense::GE, 3.0, "too_much");
    lp.add_entry(r, 0, 1.0);
    lp.add_entry(r, 1, 1.0);
    SimplexOptions opts;
    opts.tighten_bounds = true;
    auto res = solve_lp(lp, opts);
    CHECK(res.sol.status == LpStatus::Infeasible);
}

TEST_CASE("lp text format round trip") {
    std::mt19937_64 rng(3);
    Lp lp = random_boxed_lp(rng, 5, 6);
    lp.kind[2] = VarKind::Binary;
    lp.col_tag[2] = "53";
    lp.row_tag[1] = "20";
    std::stringstream ss;
    write_lp(lp, ss);
    Lp back = read_lp(ss);
    // objective was not set through add_var in read; check structure matches
    REQUIRE(back.num_vars() == lp.num_vars());
    REQUIRE(back.num_rows() == lp.num_rows());
    for (int j = 0; j < lp.num_vars(); ++j) {
        CHECK(back.lb[j] == lp.lb[j]);
        CHECK(back.ub[j] == lp.ub[j]);
        CHECK(back.kind[j] == lp.kind[j]);
    }
    CHECK(back.row_tag[1] == "20");
    CHECK(back.col_tag[2] == "53");
    auto a = solve_lp(lp);
    // transfer objective coefs (read_lp stores them via obj records)
    auto b = solve_lp(back);
    REQUIRE(a.sol.status == LpStatus::Optimal);
    REQUIRE(b.sol.status == LpStatus::Optimal);
    CHECK(a.sol.obj == doctest::Approx(b.sol.obj).epsilon(1e-12));
}

TEST_CASE("determinism: repeated solves produce identical bits") {
    std::mt19937_64 rng(42);
    Lp lp = random_boxed_lp(rng, 8, 10);
    auto a = solve_lp(lp);
    auto b = solve_lp(lp);
    REQUIRE(a.sol.status == LpStatus::Optimal);
    CHECK(std::memcmp(a.sol.x.data(), b.sol.x.data(), a.sol.x.size() * sizeof(double)) == 0);
    CHECK(a.sol.obj == b.sol.obj);
    CHECK(a.sol.iterations == b.sol.iterations);
}
