#include "helpers.hpp"

#include "lcbf/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace lcbf;

namespace {

void check_trajectory_shape(const RunReport& r) {
    const Trajectory& t = r.trajectory;
    REQUIRE(t.size() == t.steps + 1);
    CHECK(t.t.size() == t.size());
    CHECK(t.controls.size() == t.size());
    CHECK(t.barrier_values.size() == t.size());
    CHECK(t.true_sdf_values.size() == t.size());
    CHECK(t.constraint_active.size() == t.size());
    for (std::size_t k = 0; k < t.size(); ++k) CHECK(t.t[k] == double(k) * r.control.dt);
    for (std::size_t k = 1; k < t.size(); ++k) CHECK(t.t[k] > t.t[k - 1]);
    CHECK(t.controls.back().norm() == 0.0);
    for (std::size_t k = 0; k + 1 < t.size(); ++k)
        CHECK((t.states[k + 1] - (t.states[k] + r.control.dt * t.controls[k])).norm() < 1e-12);
    const auto violations = std::count_if(t.true_sdf_values.begin(), t.true_sdf_values.end(),
                                          [](double d) { return d < 0.0; });
    CHECK(r.safety_violations == std::size_t(violations));
}

Scenario empty_scenario() { return testing::shipped("empty"); }

}  // namespace

TEST_SUITE("sim") {

TEST_CASE("mapping pass covers a circle without angular gaps") {
    const Scenario sc = testing::circle_scenario({1.6, 1.0}, 0.3);
    SensorConfig sensor;
    sensor.num_beams = 360;
    sensor.max_range = 1.0;
    const TrainingSet set = mapping_pass(sc, sensor, 0.5);
    std::vector<double> angles;
    for (const auto& s : set.samples) {
        if (s.label != Label::Unsafe) continue;
        const Vec2 d = s.position - Vec2(1.6, 1.0);
        CHECK(d.norm() == doctest::Approx(0.3).epsilon(1e-9));
        angles.push_back(std::atan2(d.y(), d.x()));
    }
    REQUIRE(angles.size() > 10);
    std::sort(angles.begin(), angles.end());
    double gap = angles.front() + 2.0 * std::numbers::pi - angles.back();
    for (std::size_t k = 1; k < angles.size(); ++k) gap = std::max(gap, angles[k] - angles[k - 1]);
    CHECK(gap < 5.0 * std::numbers::pi / 180.0);
}

TEST_CASE("mapping pass on empty and blocked arenas") {
    const Scenario empty = empty_scenario();
    CHECK(mapping_pass(empty, empty.sensor, 0.5).empty());
    CHECK_FALSE(mapping_vantages(empty, 0.5).empty());
    CHECK_THROWS_AS(mapping_vantages(empty, 0.0), Error);

    Scenario blocked;
    blocked.workspace = {0.0, 1.0, 0.0, 1.0};
    blocked.goal = {0.95, 0.95};
    blocked.obstacles.emplace_back(Polygon{{{-1.0, -1.0}, {0.9, -1.0}, {0.9, 0.9}, {-1.0, 0.9}}});
    try {
        mapping_pass(blocked, blocked.sensor, 0.5);
        FAIL("expected a geometry error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Geometry);
    }
}

TEST_CASE("every ellipse is well sampled") {
    const Scenario sc = testing::shipped("five_ellipse");
    const TrainingSet set = mapping_pass(sc, sc.sensor, sc.learner.vantage_spacing);
    std::vector<std::size_t> per(sc.obstacles.size(), 0);
    for (const auto& s : set.samples) {
        if (s.label != Label::Unsafe) continue;
        std::size_t best = 0;
        for (std::size_t i = 1; i < sc.obstacles.size(); ++i)
            if (std::abs(sc.obstacles[i].signed_distance(s.position)) <
                std::abs(sc.obstacles[best].signed_distance(s.position)))
                best = i;
        ++per[best];
    }
    for (std::size_t n : per) CHECK(n >= 100);
}

TEST_CASE("obstacle-free runs follow the straight line") {
    Scenario sc = empty_scenario();
    sc.goal_radius = 0.0025;
    const Vec2 start = sc.starts.front();
    const double expected = (sc.goal - start).norm() / (sc.control.delta * sc.control.dt);
    const RunReport off = run_offline(sc, start);
    const RunReport gt = run_ground_truth(sc, start);
    const RunReport on = run_online(sc, start, true);
    for (const RunReport* r : {&off, &gt, &on}) {
        check_trajectory_shape(*r);
        CHECK(r->trajectory.reached_goal);
        CHECK(std::abs(double(r->trajectory.steps) - expected) <= 2.0);
        for (char a : r->trajectory.constraint_active) CHECK(a == 0);
        const Vec2 dir = (sc.goal - start).normalized();
        for (const Vec2& x : r->trajectory.states) {
            const Vec2 d = x - start;
            CHECK(std::abs(d.x() * dir.y() - d.y() * dir.x()) < 1e-9);
        }
    }
    CHECK(on.unconstrained_steps == on.trajectory.steps);
    CHECK(on.retrain_count == 0);
    CHECK(off.trajectory.states == gt.trajectory.states);
}

TEST_CASE("offline run from the first five-ellipse start") {
    const Scenario sc = testing::shipped("five_ellipse");
    const RunReport r = run_offline(sc, sc.starts.front());
    check_trajectory_shape(r);
    CHECK(r.trajectory.reached_goal);
    CHECK(r.safety_violations == 0);
    CHECK(r.min_barrier >= -1e-6);
    CHECK(r.retrain_count == 1);
    CHECK(r.training_set_size > 1000);
    CHECK(r.final_model);
}

TEST_CASE("starts inside obstacles are refused") {
    const Scenario sc = testing::shipped("start_inside_obstacle");
    const Vec2 start = sc.starts.front();
    try {
        run_offline(sc, start);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::StartUnsafe);
        CHECK(std::string(e.what()).find("start outside learned safe set") != std::string::npos);
    }
    for (RunMode m : {RunMode::GroundTruth, RunMode::OnlineAggregate, RunMode::OnlineInstant}) {
        try {
            run_mode(sc, start, m);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::StartUnsafe);
        }
    }
    CHECK_THROWS_AS(run_ground_truth(sc, {5.0, 1.0}), Error);
}

TEST_CASE("online runs around a single circle") {
    const Scenario sc = testing::shipped("single_circle");
    const Vec2 start = sc.starts.front();
    const RunReport agg = run_online(sc, start, true);
    const RunReport inst = run_online(sc, start, false);
    for (const RunReport* r : {&agg, &inst}) {
        check_trajectory_shape(*r);
        CHECK(r->trajectory.reached_goal);
        CHECK(r->safety_violations == 0);
        CHECK(r->retrain_count + r->unconstrained_steps == r->trajectory.steps);
        CHECK(r->training_set_history.size() == r->trajectory.steps);
        CHECK(std::count(r->trajectory.constraint_active.begin(), r->trajectory.constraint_active.end(), 1) > 0);
        std::size_t recovering = 0;
        for (const auto& c : r->local_checks) {
            if (c.h_now >= 0.0 || r == &agg) {
                CHECK(c.h_next >= -r->control.gamma * r->control.dt * std::abs(c.h_now));
            } else {
                // A fresh instant barrier can already rate the pose unsafe; the filter must climb.
                ++recovering;
                CHECK(c.h_next > c.h_now);
            }
        }
        MESSAGE(std::string(to_string(r->mode)) << ": " << recovering << " constrained steps started below zero");
    }
    CHECK(std::is_sorted(agg.training_set_history.begin(), agg.training_set_history.end()));
    CHECK(agg.training_set_size > inst.training_set_size);
    CHECK(agg.retrain_count > 0);
}

TEST_CASE("ground truth keeps clearance around a blocking circle") {
    const Scenario sc = testing::shipped("single_circle");
    const RunReport r = run_ground_truth(sc, sc.starts.front());
    check_trajectory_shape(r);
    CHECK(r.trajectory.reached_goal);
    CHECK(r.min_true_sdf >= 0.0);
    CHECK(std::count(r.trajectory.constraint_active.begin(), r.trajectory.constraint_active.end(), 1) > 0);
}

TEST_CASE("runs are deterministic") {
    Scenario sc = testing::shipped("single_circle");
    sc.sensor.noise_sigma = 0.002;
    SimOptions opt;
    opt.seed = 99;
    for (RunMode m : {RunMode::Offline, RunMode::OnlineAggregate, RunMode::GroundTruth}) {
        const RunReport a = run_mode(sc, sc.starts.front(), m, opt);
        const RunReport b = run_mode(sc, sc.starts.front(), m, opt);
        CHECK(a.trajectory.states == b.trajectory.states);
        CHECK(a.trajectory.controls == b.trajectory.controls);
        CHECK(a.trajectory.barrier_values == b.trajectory.barrier_values);
        CHECK(a.training_set_size == b.training_set_size);
    }
}

TEST_CASE("learned barrier is at least as conservative as ground truth") {
    const Scenario sc = testing::shipped("five_ellipse");
    const OfflineModel off = build_offline_model(sc, 0);
    const SdfBarrier gt_barrier(build_sdf_grid(sc, 0.01));
    for (const Vec2& start : sc.starts) {
        const RunReport o = run_offline(sc, start, off);
        const RunReport g = run_ground_truth(sc, start, gt_barrier);
        CHECK(o.safety_violations == 0);
        CHECK(o.min_barrier >= -1e-6);
        CHECK(o.min_true_sdf >= g.min_true_sdf - 0.05);
    }
}

TEST_CASE("mode names") {
    for (RunMode m : {RunMode::GroundTruth, RunMode::Offline, RunMode::OnlineAggregate, RunMode::OnlineInstant})
        CHECK(parse_run_mode(to_string(m)) == m);
    CHECK(parse_run_mode("online-instant") == RunMode::OnlineInstant);
    CHECK(parse_run_mode("ground-truth") == RunMode::GroundTruth);
    CHECK_FALSE(parse_run_mode("all").has_value());
}

}  // TEST_SUITE
