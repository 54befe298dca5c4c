#include "doctest.h"

#include "support/synth.hpp"
#include "tplan/errors.hpp"
#include "tplan/sddp.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

using namespace tplan;

namespace {

std::vector<TrainLogEntry> bounds(const std::vector<double>& lbs) {
    std::vector<TrainLogEntry> log;
    for (std::size_t i = 0; i < lbs.size(); ++i) {
        TrainLogEntry e;
        e.iteration = static_cast<int>(i) + 1;
        e.lower_bound = lbs[i];
        log.push_back(e);
    }
    return log;
}

double mono_opt(const Instance& in) {
    auto mono = build_monolithic(in);
    MilpResult r = solve_milp(mono.lp, {});
    REQUIRE(r.status == MilpStatus::Optimal);
    return r.obj;
}

// expected second-stage cost at trial state z, each child solved directly
double expected_future(const Instance& in, const std::vector<double>& z) {
    double total = 0;
    const auto& states = in.chain.stages[1];
    for (int m = 0; m < static_cast<int>(states.size()); ++m) {
        for (int o = 0; o < static_cast<int>(states[m].profiles.size()); ++o) {
            StageProblem sp = build_stage_problem(in, 2, m, o);
            set_trial_state(sp, z);
            SimplexResult sr = solve_lp(sp.lp);
            REQUIRE(sr.sol.status == LpStatus::Optimal);
            total += in.chain.transitions[0][0][m] * states[m].profiles[o].weight * sr.sol.obj;
        }
    }
    return total;
}

} // namespace

TEST_CASE("stopping rule waits for a run of small improvements") {
    TrainOptions o;
    o.stall_tolerance = 1e-4;
    o.stall_iterations = 2;
    CHECK_FALSE(check_stopping({}, o));
    CHECK_FALSE(check_stopping(bounds({10}), o));
    CHECK_FALSE(check_stopping(bounds({10, 11}), o));
    // improvements 1, 1, 0: the window still holds a real improvement
    CHECK_FALSE(check_stopping(bounds({10, 11, 12, 12}), o));
    CHECK(check_stopping(bounds({10, 11, 12, 12, 12}), o));
    // an improvement equal to the tolerance does not count as stalled
    o.stall_iterations = 3;
    CHECK_FALSE(check_stopping(bounds({0, 1e-4, 2e-4, 3e-4}), o));
    CHECK(check_stopping(bounds({0, 0.99e-4, 1.98e-4, 2.97e-4}), o));
    o.stall_iterations = 25;
    CHECK_FALSE(check_stopping(bounds(std::vector<double>(25, 5.0)), o));
    CHECK(check_stopping(bounds(std::vector<double>(26, 5.0)), o));
}

TEST_CASE("forward sample count multiplies the stagewise profile totals") {
    synth::ThermalOpts t;
    t.n_stages = 3;
    t.two_profiles = true;
    // stages 2 and 3 each carry hi with 2 profiles plus lo with 1
    CHECK(count_forward_samples(synth::thermal_instance(t).chain) == 9);
    t.two_profiles = false;
    CHECK(count_forward_samples(synth::thermal_instance(t).chain) == 4);
    t.n_stages = 2;
    CHECK(count_forward_samples(synth::thermal_instance(t).chain) == 2);
    t.branch = false;
    CHECK(count_forward_samples(synth::thermal_instance(t).chain) == 1);
    CHECK(count_forward_samples(synth::storage_instance(3).chain) == 1);
}

TEST_CASE("deterministic chain converges to the expectation model optimum") {
    synth::ThermalOpts t;
    t.branch = false;
    Instance in = synth::thermal_instance(t);
    double opt = mono_opt(in);

    TrainOptions o;
    o.max_iterations = 15;
    o.stall_iterations = 3;
    o.seed = 7;
    SddpEngine eng(in, o);
    Policy p = eng.train();

    CHECK(p.lower_bound == doctest::Approx(opt).epsilon(1e-7));
    REQUIRE(p.log.size() >= 2);
    for (std::size_t i = 0; i < p.log.size(); ++i) {
        CHECK(p.log[i].lower_bound <= opt + 1e-6 * std::abs(opt));
        if (i > 0) CHECK(p.log[i].lower_bound >= p.log[i - 1].lower_bound);
        CHECK(p.log[i].iteration == static_cast<int>(i) + 1);
    }
    CHECK(p.log.back().forward_cost == doctest::Approx(opt).epsilon(1e-7));
    CHECK(p.log.size() < 15); // stalled well before the iteration cap
}

TEST_CASE("branching chain matches the expectation model") {
    Instance in = synth::thermal_instance({});
    double opt = mono_opt(in);

    TrainOptions o;
    o.max_iterations = 20;
    o.stall_iterations = 4;
    o.seed = 3;
    SddpEngine eng(in, o);
    Policy p = eng.train();

    CHECK(p.lower_bound == doctest::Approx(opt).epsilon(1e-7));
    for (const auto& e : p.log) {
        CHECK(e.lower_bound <= opt + 1e-6 * std::abs(opt));
        REQUIRE(e.states.size() == 2);
        CHECK(e.states[0] == 0);
        CHECK(e.states[1] >= 0);
        CHECK(e.states[1] < 2);
    }

    // one continuous capacity entry; stage 1 must cover at least the 1.0 gap
    REQUIRE(eng.layout().entries.size() == 1);
    CHECK_FALSE(eng.layout().entries[0].integral);
    std::vector<double> z1 = eng.first_stage_state();
    REQUIRE(z1.size() == 1);
    CHECK(z1[0] >= 1.0 - 1e-6);

    SimulationResult sim = eng.simulate(400, 13);
    REQUIRE(sim.samples.size() == 400);
    CHECK(sim.ci_defined);
    CHECK(sim.ci_low <= sim.mean);
    CHECK(sim.mean <= sim.ci_high);
    double slack = std::max(4.0 * sim.std_dev / std::sqrt(400.0), 1e-6);
    CHECK(std::abs(sim.mean - opt) <= slack);
}

TEST_CASE("cuts stay below the exact recourse function") {
    synth::ThermalOpts t;
    t.two_profiles = true;
    Instance in = synth::thermal_instance(t);

    TrainOptions o;
    o.max_iterations = 6;
    o.stall_iterations = 2;
    o.seed = 5;
    SddpEngine eng(in, o);
    Policy p = eng.train();
    REQUIRE(!p.cuts.empty());

    for (double zv : {0.0, 0.4, 0.9, 1.3, 1.7, 2.0, 2.6, 3.3, 5.0, 8.5}) {
        std::vector<double> z = {zv};
        double exact = expected_future(in, z);
        for (const auto& c : p.cuts) {
            REQUIRE(c.stage == 1);
            REQUIRE(c.state == 0);
            CHECK(c.alpha + c.beta[0] * zv <= exact + 1e-6);
        }
    }
}

TEST_CASE("integer recourse keeps an honest bound") {
    Instance in = synth::storage_instance(2);
    double opt = mono_opt(in);

    TrainOptions o;
    o.max_iterations = 12;
    o.stall_iterations = 3;
    o.seed = 2;
    SddpEngine eng(in, o);
    Policy p = eng.train();

    CHECK(p.lower_bound <= opt + 1e-6 * std::abs(opt) + 1e-9);

    SimulationResult sim = eng.simulate(3, 5);
    REQUIRE(sim.samples.size() == 3);
    // deterministic chain: every sample follows the same path
    CHECK(sim.std_dev == 0.0);
    CHECK(sim.ci_defined);
    CHECK(sim.ci_high - sim.ci_low == 0.0);
    CHECK(sim.mean >= p.lower_bound - 1e-6 * std::abs(opt) - 1e-9);
    CHECK(sim.mean >= opt - 1e-6 * std::abs(opt) - 1e-9);

    SimulationResult one = eng.simulate(1, 5);
    CHECK_FALSE(one.ci_defined);
    CHECK(one.ci_low == one.mean);
    CHECK(one.ci_high == one.mean);
}

TEST_CASE("fixed seeds reproduce the run exactly") {
    synth::ThermalOpts t;
    t.n_stages = 3;
    Instance in = synth::thermal_instance(t);

    TrainOptions o;
    o.max_iterations = 8;
    o.stall_iterations = 3;
    o.seed = 11;

    SddpEngine a(in, o), b(in, o);
    Policy pa = a.train(), pb = b.train();

    REQUIRE(pa.log.size() == pb.log.size());
    for (std::size_t i = 0; i < pa.log.size(); ++i) {
        CHECK(pa.log[i].lower_bound == pb.log[i].lower_bound);
        CHECK(pa.log[i].forward_cost == pb.log[i].forward_cost);
        CHECK(pa.log[i].states == pb.log[i].states);
        CHECK(pa.log[i].profiles == pb.log[i].profiles);
    }
    REQUIRE(pa.cuts.size() == pb.cuts.size());
    for (std::size_t i = 0; i < pa.cuts.size(); ++i) {
        CHECK(pa.cuts[i].alpha == pb.cuts[i].alpha);
        CHECK(pa.cuts[i].beta == pb.cuts[i].beta);
    }
}

TEST_CASE("worker count does not change the answer") {
    Instance in = synth::thermal_instance({});
    double opt = mono_opt(in);

    TrainOptions o;
    o.max_iterations = 16;
    o.stall_iterations = 4;
    o.seed = 9;
    SddpEngine solo(in, o);
    double lb1 = solo.train().lower_bound;

    o.workers = 3;
    SddpEngine gang(in, o);
    double lb3 = gang.train().lower_bound;

    CHECK(lb1 == doctest::Approx(opt).epsilon(1e-7));
    CHECK(lb3 == doctest::Approx(opt).epsilon(1e-7));

    o.mode = TrainMode::Asynchronous;
    o.workers = 2;
    SddpEngine async(in, o);
    Policy pasync = async.train();
    CHECK(pasync.lower_bound == doctest::Approx(opt).epsilon(1e-7));
    CHECK(!pasync.log.empty());
}

TEST_CASE("policies survive the file round trip and resume") {
    Instance in = synth::thermal_instance({});
    double opt = mono_opt(in);

    TrainOptions o;
    o.max_iterations = 3;
    o.stall_iterations = 99; // run all three iterations
    o.seed = 21;
    SddpEngine a(in, o);
    Policy pa = a.train();
    REQUIRE(pa.log.size() == 3);

    std::string path = "sddp_roundtrip_policy.json";
    save_policy(pa, path);
    Policy back = load_policy(path);
    std::remove(path.c_str());

    CHECK(back.seed == pa.seed);
    CHECK(back.state_names == pa.state_names);
    REQUIRE(back.cuts.size() == pa.cuts.size());
    for (std::size_t i = 0; i < pa.cuts.size(); ++i) {
        CHECK(back.cuts[i].stage == pa.cuts[i].stage);
        CHECK(back.cuts[i].state == pa.cuts[i].state);
        CHECK(back.cuts[i].alpha == pa.cuts[i].alpha);
        CHECK(back.cuts[i].beta == pa.cuts[i].beta);
        CHECK(back.cuts[i].iteration == pa.cuts[i].iteration);
    }
    REQUIRE(back.log.size() == pa.log.size());
    CHECK(back.log.back().lower_bound == pa.log.back().lower_bound);

    TrainOptions o2 = o;
    o2.max_iterations = 6;
    o2.stall_iterations = 3;
    SddpEngine b(in, o2);
    b.resume(back);
    Policy pb = b.train();
    CHECK(pb.log.back().iteration > 3);
    CHECK(pb.lower_bound >= pa.log.back().lower_bound - 1e-9);
    CHECK(pb.lower_bound == doctest::Approx(opt).epsilon(1e-7));

    SddpEngine other(synth::storage_instance(2), o);
    CHECK_THROWS_AS(other.resume(back), ValidationError);
}

TEST_CASE("expected noise training still closes the bound") {
    synth::ThermalOpts t;
    t.two_profiles = true;
    Instance in = synth::thermal_instance(t);
    double opt = mono_opt(in);

    TrainOptions o;
    o.max_iterations = 16;
    o.stall_iterations = 4;
    o.seed = 17;
    o.noise = NoiseMode::Expected;
    SddpEngine eng(in, o);
    Policy p = eng.train();

    CHECK(p.lower_bound == doctest::Approx(opt).epsilon(1e-7));
    for (const auto& e : p.log) {
        REQUIRE(e.profiles.size() == 2);
        CHECK(e.profiles[1] == -1); // expected block, no sampled noise
    }

    // the trained policy still evaluates against sampled noise
    SimulationResult sim = eng.simulate(50, 23);
    std::set<int> seen;
    for (const auto& pr : sim.profiles) seen.insert(pr[1]);
    CHECK(seen.count(-1) == 0);
}
