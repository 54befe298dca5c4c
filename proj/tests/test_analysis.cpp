#include "doctest.h"

#include "support/synth.hpp"
#include "tplan/analysis.hpp"
#include "tplan/errors.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace tplan;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& leaf) {
    fs::path d = fs::temp_directory_path() / ("tplan_ana_" + leaf);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

void put(const fs::path& p, const std::string& text) {
    std::ofstream f(p);
    f << text;
}

double rel_diff(double a, double b) {
    return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1.0});
}

RunConfig quick_cfg(Backend be) {
    RunConfig cfg;
    cfg.backend = be;
    cfg.milp.gap_tol = 1e-9;
    cfg.train.stall_tolerance = 1e-9;
    cfg.train.stall_iterations = 4;
    cfg.train.max_iterations = 60;
    cfg.simulate_samples = 40;
    return cfg;
}

} // namespace

TEST_CASE("run configs resolve paths beside the file and parse every knob") {
    fs::path dir = fresh_dir("cfg");
    put(dir / "run.json", R"({
      "network": "net.json", "catalog": "cat.json",
      "horizon": "hor.json", "scenarios": "scn.json",
      "backend": "sddp", "seed": 42, "output_dir": "results",
      "factors": {"battery": false, "sssc": false},
      "milp": {"gap_tol": 0.001, "max_nodes": 77, "time_limit_s": 9.5, "workers": 2},
      "sddp": {"stall_tolerance": 0.01, "stall_iterations": 3, "max_iterations": 11,
               "workers": 2, "mode": "async", "noise": "expected",
               "simulate_samples": 7}
    })");
    RunConfig cfg = load_run_config((dir / "run.json").string());
    CHECK(cfg.backend == Backend::Sddp);
    CHECK(cfg.network == (dir / "net.json").string());
    CHECK(cfg.scenarios == (dir / "scn.json").string());
    CHECK(cfg.seed == 42);
    CHECK(cfg.factors.battery == false);
    CHECK(cfg.factors.sssc == false);
    CHECK(cfg.factors.gas == true);
    CHECK(cfg.milp.gap_tol == 0.001);
    CHECK(cfg.milp.max_nodes == 77);
    CHECK(cfg.milp.workers == 2);
    CHECK(cfg.train.stall_tolerance == 0.01);
    CHECK(cfg.train.stall_iterations == 3);
    CHECK(cfg.train.max_iterations == 11);
    CHECK(cfg.train.mode == TrainMode::Asynchronous);
    CHECK(cfg.train.noise == NoiseMode::Expected);
    CHECK(cfg.train.seed == 42);
    CHECK(cfg.train.milp.max_nodes == 77);
    CHECK(cfg.simulate_samples == 7);

    put(dir / "bad_backend.json", R"({"network":"n","catalog":"c","horizon":"h",
      "scenarios":"s","backend":"cplex"})");
    CHECK_THROWS_AS(load_run_config((dir / "bad_backend.json").string()), ValidationError);
    put(dir / "broken.json", "{ this is not json");
    CHECK_THROWS_AS(load_run_config((dir / "broken.json").string()), ParseError);
}

TEST_CASE("monolithic report rows account for the whole objective") {
    Instance in = synth::rich_instance({});
    PlanReport rep = run(in, quick_cfg(Backend::Monolithic));
    REQUIRE(rep.converged);
    REQUIRE(rep.verified);
    CHECK(rep.checks.ok());
    CHECK(rep.gap <= 1e-9);
    REQUIRE(rep.entry_names.size() == rep.first_stage.size());

    double total = 0;
    for (const auto& c : rep.costs) total += c.invest + c.ops;
    CHECK(rel_diff(total, rep.objective) <= 1e-8);

    // one cost and one volume row per path-stage of the tree
    REQUIRE(!rep.costs.empty());
    CHECK(rep.costs.size() == rep.volumes.size());
    for (const auto& a : rep.allocations) {
        CHECK(a.total >= a.added - 1e-9);
        CHECK(a.added >= -1e-9);
    }
    for (const auto& v : rep.volumes) {
        CHECK(v.shed >= -1e-12);
        CHECK(v.curtail >= -1e-12);
    }
}

TEST_CASE("the two backends price the same branching instance identically") {
    Instance in = synth::thermal_instance({.two_profiles = true});
    PlanReport mono = run(in, quick_cfg(Backend::Monolithic));
    PlanReport sddp = run(in, quick_cfg(Backend::Sddp));
    REQUIRE(mono.converged);
    REQUIRE(sddp.converged);
    CHECK(rel_diff(mono.objective, sddp.objective) <= 1e-6);
    CHECK(sddp.sim_defined);
    CHECK(sddp.sim_ci_low <= sddp.sim_mean);
    CHECK(sddp.sim_mean <= sddp.sim_ci_high);
    REQUIRE(!sddp.training.empty());
    CHECK(sddp.training.back().lower_bound == doctest::Approx(sddp.objective));
    // the first-stage build agrees as well
    REQUIRE(mono.first_stage.size() == sddp.first_stage.size());
    for (std::size_t i = 0; i < mono.first_stage.size(); ++i)
        CHECK(std::fabs(mono.first_stage[i] - sddp.first_stage[i]) <= 1e-5);
}

TEST_CASE("widening the factor menu never raises the optimum") {
    Instance in = synth::rich_instance({});
    // existing assets cover the stock demand; push load past them so the
    // candidate menu matters
    int dims = static_cast<int>(in.chain.columns.size());
    for (auto& stage : in.chain.stages)
        for (auto& st : stage)
            for (auto& pr : st.profiles)
                for (int c = 0; c < dims; ++c) {
                    if (in.chain.columns[c].rfind("load:", 0) != 0) continue;
                    for (std::size_t t = 0; t < pr.day.values.size() / dims; ++t)
                        pr.day.values[t * dims + c] *= 2.2;
                }
    auto solve_with = [&](FactorToggles f) {
        Instance copy = in;
        copy.factors = f;
        PlanReport rep = run(copy, quick_cfg(Backend::Monolithic));
        REQUIRE(rep.converged);
        return rep.objective;
    };
    FactorToggles none;
    none.gas = none.smr = none.h2 = none.solar = none.wind = false;
    none.retrofit = none.battery = none.hydro = false;
    none.line = none.dtr = none.sssc = false;
    FactorToggles thermal_only = none;
    thermal_only.gas = true;
    FactorToggles with_vres = thermal_only;
    with_vres.wind = with_vres.solar = true;
    FactorToggles everything; // defaults to all enabled

    double c0 = solve_with(none);
    double c1 = solve_with(thermal_only);
    double c2 = solve_with(with_vres);
    double c3 = solve_with(everything);
    CHECK(c1 <= c0 + 1e-6);
    CHECK(c2 <= c1 + 1e-6);
    CHECK(c3 <= c2 + 1e-6);
    CHECK(c3 < c0 - 1e-6); // the full menu must actually help on this instance
}

TEST_CASE("expected value companion folds states into one mean day") {
    Instance in = synth::thermal_instance({.two_profiles = true, .p_hi = 0.55});
    Instance ev = expected_value_instance(in);
    REQUIRE(ev.chain.n_stages() == in.chain.n_stages());
    for (const auto& stage : ev.chain.stages) REQUIRE(stage.size() == 1);
    CHECK(ev.chain.stages[1][0].load_factor == doctest::Approx(1.0));
    CHECK(ev.chain.stages[1][0].profiles.size() == 1);
    CHECK(ev.chain.stages[1][0].profiles[0].weight == doctest::Approx(1.0));

    // stage 2: hi state (p=.55, lf=1.3) holds two noise days, lo (lf=.8) one
    const auto& src = in.chain.stages[1];
    REQUIRE(src.size() == 2);
    const auto& hi = src[0];
    const auto& lo = src[1];
    REQUIRE(hi.profiles.size() == 2);
    int dims = static_cast<int>(in.chain.columns.size());
    int H = in.chain.hours();
    const auto& got = ev.chain.stages[1][0].profiles[0].day.values;
    for (int t = 0; t < H; ++t) {
        for (int c = 0; c < dims; ++c) {
            std::size_t k = static_cast<std::size_t>(t) * dims + c;
            double want = 0.55 * (hi.profiles[0].weight * hi.load_factor *
                                      hi.profiles[0].day.values[k] +
                                  hi.profiles[1].weight * hi.load_factor *
                                      hi.profiles[1].day.values[k]) +
                          0.45 * lo.load_factor * lo.profiles[0].day.values[k];
            CHECK(got[k] == doctest::Approx(want).epsilon(1e-12));
        }
    }
}

TEST_CASE("voss is nonnegative and both recourse routes agree") {
    Instance in = synth::thermal_instance({.two_profiles = true});
    VossResult v = compute_voss(in);
    CHECK(v.voss >= -1e-6);
    CHECK(v.ev <= v.rp + 1e-6);
    CHECK(v.rp <= v.eev + 1e-6);
    CHECK(v.voss == doctest::Approx(v.eev - v.rp));

    // route two: freeze the ev plan and re-price operations path by path
    auto records = expost_evaluate(in, v.delta_ev);
    REQUIRE(!records.empty());
    double mean = 0, mass = 0;
    for (const auto& r : records) {
        mean += r.probability * r.total;
        mass += r.probability;
        CHECK(r.total == doctest::Approx(r.invest + r.ops));
    }
    CHECK(mass == doctest::Approx(1.0));
    CHECK(rel_diff(mean, v.eev) <= 1e-6);
}

TEST_CASE("a deterministic chain makes uncertainty worthless") {
    Instance in = synth::thermal_instance({.branch = false});
    VossResult v = compute_voss(in);
    CHECK(std::fabs(v.voss) <= 1e-7 * std::max(1.0, std::fabs(v.rp)));

    // fixing the stochastic plan reproduces the stochastic cost exactly
    auto mono = build_monolithic(in);
    MilpResult r = solve_milp(mono.lp, {});
    REQUIRE(r.status == MilpStatus::Optimal);
    auto deltas = extract_deltas(mono, r.x);
    auto records = expost_evaluate(in, deltas);
    REQUIRE(records.size() == 1);
    CHECK(records[0].probability == doctest::Approx(1.0));
    CHECK(rel_diff(records[0].total, r.obj) <= 1e-7);
}

TEST_CASE("integer storage keeps the voss sign") {
    Instance in = synth::storage_instance(2);
    VossResult v = compute_voss(in);
    CHECK(v.voss >= -1e-6);
    CHECK(v.eev >= v.rp - 1e-6);
}

TEST_CASE("zone sweep costs fall and settle as the menu grows") {
    Instance master = synth::sweep_master({.n_buses = 8, .n_zones = 12, .hours = 3});
    auto rows = zone_sweep(master, {2, 5, 12}, 4, 17);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].n_zones == 2);
    CHECK(rows[2].n_zones == 12);
    CHECK(rows[1].mean_cost <= rows[0].mean_cost + 1e-6);
    CHECK(rows[2].mean_cost <= rows[1].mean_cost + 1e-6);
    // the full menu is the same set every repetition
    CHECK(rows[2].std_cost <= 1e-9);
    for (const auto& r : rows) {
        CHECK(r.std_cost >= 0);
        CHECK(r.mean_wall_s > 0);
    }

    fs::path dir = fresh_dir("zones");
    write_zone_sweep_csv(rows, (dir / "zones.csv").string());
    std::ifstream f(dir / "zones.csv");
    std::string line;
    int n = 0;
    while (std::getline(f, line)) ++n;
    CHECK(n == 4);
}

TEST_CASE("plan reports survive the json round trip") {
    Instance in = synth::thermal_instance({.two_profiles = true});
    PlanReport rep = run(in, quick_cfg(Backend::Sddp));
    fs::path dir = fresh_dir("report");
    write_report_json(rep, (dir / "report.json").string());
    PlanReport back = read_report_json((dir / "report.json").string());
    CHECK(back.backend == rep.backend);
    CHECK(back.converged == rep.converged);
    CHECK(back.objective == rep.objective);
    CHECK(back.bound == rep.bound);
    CHECK(back.entry_names == rep.entry_names);
    REQUIRE(back.first_stage.size() == rep.first_stage.size());
    for (std::size_t i = 0; i < rep.first_stage.size(); ++i)
        CHECK(back.first_stage[i] == rep.first_stage[i]);
    CHECK(back.training.size() == rep.training.size());
    CHECK(back.sim_mean == rep.sim_mean);
    CHECK(back.sim_defined == rep.sim_defined);

    emit_plot_data(rep, dir.string());
    for (const char* name : {"allocations.csv", "costs.csv", "volumes.csv", "training.csv"})
        CHECK(fs::exists(dir / name));
    std::ifstream tr(dir / "training.csv");
    std::string line;
    int n = 0;
    while (std::getline(tr, line)) ++n;
    CHECK(n == static_cast<int>(rep.training.size()) + 1);
}

#ifdef TPLAN_BIN
TEST_CASE("the command line maps outcomes onto exit codes") {
    auto run_cli = [](const std::string& args) {
        std::string cmd = std::string(TPLAN_BIN) + " " + args + " > /dev/null 2>&1";
        int rc = std::system(cmd.c_str());
        return WEXITSTATUS(rc);
    };
    std::string toy = std::string(TPLAN_DATA_DIR) + "/toy3/run.json";
    CHECK(run_cli("validate --config " + toy) == 0);

    fs::path dir = fresh_dir("cli");
    CHECK(run_cli("solve " + toy + " --out " + (dir / "solve").string()) == 0);
    CHECK(fs::exists(dir / "solve" / "report.json"));
    CHECK(run_cli("report " + (dir / "solve").string()) == 0);

    put(dir / "broken.json", "{ not json");
    CHECK(run_cli("validate --config " + (dir / "broken.json").string()) == 2);

    // an iteration budget of one cannot satisfy the stall rule
    put(dir / "limited.json", R"({
      "network": ")" + std::string(TPLAN_DATA_DIR) + R"(/toy3/network.json",
      "catalog": ")" + std::string(TPLAN_DATA_DIR) + R"(/toy3/catalog.json",
      "horizon": ")" + std::string(TPLAN_DATA_DIR) + R"(/toy3/horizon.json",
      "scenarios": ")" + std::string(TPLAN_DATA_DIR) + R"(/toy3/scenarios.json",
      "backend": "sddp",
      "sddp": {"max_iterations": 1, "stall_iterations": 5, "simulate_samples": 0}
    })");
    CHECK(run_cli("solve " + (dir / "limited.json").string() + " --out " +
                  (dir / "lim").string()) == 3);
}
#endif
