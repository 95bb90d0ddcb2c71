#include "lcbf/sim.hpp"

#include "lcbf/sensor.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

namespace lcbf {

const char* to_string(RunMode mode) {
    switch (mode) {
        case RunMode::GroundTruth: return "ground_truth";
        case RunMode::Offline: return "offline";
        case RunMode::OnlineAggregate: return "online_aggregate";
        case RunMode::OnlineInstant: return "online_instant";
    }
    return "unknown";
}

std::optional<RunMode> parse_run_mode(std::string_view name) {
    if (name == "ground-truth" || name == "ground_truth") return RunMode::GroundTruth;
    if (name == "offline") return RunMode::Offline;
    if (name == "online-aggregate" || name == "online_aggregate") return RunMode::OnlineAggregate;
    if (name == "online-instant" || name == "online_instant") return RunMode::OnlineInstant;
    return std::nullopt;
}

namespace {

using Clock = std::chrono::steady_clock;

void record(Trajectory& traj, double t, const Vec2& x, const Vec2& u, double h, double sdf,
            bool active) {
    traj.t.push_back(t);
    traj.states.push_back(x);
    traj.controls.push_back(u);
    traj.barrier_values.push_back(h);
    traj.true_sdf_values.push_back(sdf);
    traj.constraint_active.push_back(active ? 1 : 0);
}

void finalize(RunReport& report, Clock::time_point started) {
    const auto& traj = report.trajectory;
    report.safety_violations = static_cast<std::size_t>(
        std::count_if(traj.true_sdf_values.begin(), traj.true_sdf_values.end(),
                      [](double d) { return d < 0.0; }));
    report.min_barrier = traj.barrier_values.empty()
                             ? 0.0
                             : *std::min_element(traj.barrier_values.begin(), traj.barrier_values.end());
    report.min_true_sdf = traj.true_sdf_values.empty()
                              ? 0.0
                              : *std::min_element(traj.true_sdf_values.begin(), traj.true_sdf_values.end());
    report.wall_time = std::chrono::duration<double>(Clock::now() - started).count();
}

void require_free_start(const Scenario& scenario, const Vec2& start) {
    if (!scenario.workspace.contains(start))
        throw Error(ErrorKind::StartUnsafe, "start lies outside the workspace");
    if (inside_any_obstacle(scenario, start) || true_signed_distance(scenario, start) <= 0.0)
        throw Error(ErrorKind::StartUnsafe,
                    fmt::format("start ({}, {}) lies inside an obstacle", start.x(), start.y()));
}

bool at_goal(const Scenario& scenario, const Vec2& x) {
    return (x - scenario.goal).norm() <= scenario.goal_radius;
}

// Euler rollout of x' = u under a fixed barrier (or the bare nominal policy when null).
RunReport rollout(const Scenario& scenario, const Vec2& start, const Barrier* barrier, RunMode mode) {
    const auto started = Clock::now();
    const ControlConfig& cc = scenario.control;
    RunReport report;
    report.mode = mode;
    report.control = cc;
    Trajectory& traj = report.trajectory;

    Vec2 x = start;
    double t = 0.0;
    for (std::size_t step = 0;; ++step) {
        const double sdf = true_signed_distance(scenario, x);
        if (at_goal(scenario, x) || step == cc.max_steps) {
            traj.reached_goal = at_goal(scenario, x);
            record(traj, t, x, Vec2::Zero(), barrier ? barrier->value(x) : sdf, sdf, false);
            traj.steps = step;
            break;
        }
        ControlOutput out;
        if (barrier) {
            out = safe_control(x, *barrier, cc, scenario.goal);
        } else {
            out.u = nominal_policy(x, scenario.goal, cc.delta);
            if (cc.u_max) out.u = out.u.cwiseMax(-*cc.u_max).cwiseMin(*cc.u_max);
            out.h_value = sdf;
        }
        if (out.infeasible_fallback) ++report.infeasible_steps;
        record(traj, t, x, out.u, out.h_value, sdf, out.constraint_active);
        x += cc.dt * out.u;
        t = double(step + 1) * cc.dt;
    }
    finalize(report, started);
    return report;
}

}  // namespace

std::vector<Vec2> mapping_vantages(const Scenario& scenario, double vantage_spacing) {
    if (!(vantage_spacing > 0.0))
        throw Error(ErrorKind::InvalidArgument, "vantage spacing must be > 0");
    const auto& ws = scenario.workspace;
    // Lattice centered in the workspace with a margin in (0, spacing / 2] to each wall.
    const auto nx = std::max<std::size_t>(1, std::size_t(std::ceil(ws.width() / vantage_spacing - 1e-9)));
    const auto ny = std::max<std::size_t>(1, std::size_t(std::ceil(ws.height() / vantage_spacing - 1e-9)));
    const double x0 = ws.x_min + 0.5 * (ws.width() - double(nx - 1) * vantage_spacing);
    const double y0 = ws.y_min + 0.5 * (ws.height() - double(ny - 1) * vantage_spacing);
    std::vector<Vec2> out;
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const Vec2 p(x0 + double(i) * vantage_spacing, y0 + double(j) * vantage_spacing);
            if (ws.interior(p) && !inside_any_obstacle(scenario, p) &&
                true_signed_distance(scenario, p) > 0.0)
                out.push_back(p);
        }
    }
    return out;
}

TrainingSet mapping_pass(const Scenario& scenario, const SensorConfig& sensor,
                         double vantage_spacing, std::uint64_t seed) {
    const auto vantages = mapping_vantages(scenario, vantage_spacing);
    if (vantages.empty())
        throw Error(ErrorKind::Geometry, "mapping pass: no collision-free vantage points");
    std::mt19937_64 rng(seed);
    SampleAccumulator acc(scenario.learner.dedup_tol);
    for (std::size_t k = 0; k < vantages.size(); ++k) {
        const LaserScan s = scan(scenario, vantages[k], sensor, &rng, double(k));
        acc.add(generate_training_data(s, scenario.learner.offset));
    }
    return acc.set();
}

OfflineModel build_offline_model(const Scenario& scenario, std::uint64_t seed) {
    OfflineModel out;
    out.vantages = mapping_vantages(scenario, scenario.learner.vantage_spacing);
    out.data = mapping_pass(scenario, scenario.sensor, scenario.learner.vantage_spacing, seed);
    if (out.data.empty()) return out;
    auto net = KernelNet::make(resolve_kernel_config(scenario.learner, scenario.workspace),
                               scenario.workspace);
    out.model = std::make_shared<const BarrierModel>(
        train(out.data, SvmConfig::from(scenario.learner), std::move(net)));
    return out;
}

RunReport run_offline(const Scenario& scenario, const Vec2& start, const OfflineModel& offline) {
    if (offline.model) {
        const double h0 = offline.model->decision(start);
        if (h0 <= 0.0 || inside_any_obstacle(scenario, start))
            throw Error(ErrorKind::StartUnsafe,
                        fmt::format("start outside learned safe set: h_hat({}, {}) = {:.6g}",
                                    start.x(), start.y(), h0));
    } else {
        require_free_start(scenario, start);
    }
    RunReport report = rollout(scenario, start, offline.model.get(), RunMode::Offline);
    report.training_set_size = offline.data.size();
    report.retrain_count = offline.model ? 1 : 0;
    report.final_model = offline.model;
    return report;
}

RunReport run_offline(const Scenario& scenario, const Vec2& start, const SimOptions& options) {
    const auto started = Clock::now();
    RunReport report = run_offline(scenario, start, build_offline_model(scenario, options.seed));
    report.wall_time = std::chrono::duration<double>(Clock::now() - started).count();
    return report;
}

RunReport run_ground_truth(const Scenario& scenario, const Vec2& start, const SdfBarrier& barrier) {
    require_free_start(scenario, start);
    return rollout(scenario, start, &barrier, RunMode::GroundTruth);
}

RunReport run_ground_truth(const Scenario& scenario, const Vec2& start, const SimOptions& options) {
    require_free_start(scenario, start);
    const auto started = Clock::now();
    const SdfBarrier barrier(build_sdf_grid(scenario, options.sdf_spacing));
    RunReport report = rollout(scenario, start, &barrier, RunMode::GroundTruth);
    report.wall_time = std::chrono::duration<double>(Clock::now() - started).count();
    return report;
}

RunReport run_online(const Scenario& scenario, const Vec2& start, bool aggregate,
                     const SimOptions& options) {
    require_free_start(scenario, start);
    const auto started = Clock::now();
    const ControlConfig& cc = scenario.control;
    const LearnerConfig& lc = scenario.learner;

    RunReport report;
    report.mode = aggregate ? RunMode::OnlineAggregate : RunMode::OnlineInstant;
    report.control = cc;
    Trajectory& traj = report.trajectory;

    std::mt19937_64 rng(options.seed);
    auto net = KernelNet::make(resolve_kernel_config(lc, scenario.workspace), scenario.workspace);
    SvmTrainer trainer(net, SvmConfig::from(lc));
    SampleAccumulator accumulated(lc.dedup_tol);
    std::shared_ptr<const BarrierModel> model;

    Vec2 x = start;
    double t = 0.0;
    for (std::size_t step = 0;; ++step) {
        const double sdf = true_signed_distance(scenario, x);
        if (at_goal(scenario, x) || step == cc.max_steps) {
            traj.reached_goal = at_goal(scenario, x);
            record(traj, t, x, Vec2::Zero(), model ? model->decision(x) : sdf, sdf, false);
            traj.steps = step;
            break;
        }

        if (step % std::size_t(lc.retrain_every) == 0) {
            const LaserScan s = scan(scenario, x, scenario.sensor, &rng, t);
            TrainingSet fresh = generate_training_data(s, lc.offset);
            // The scan origin is known free; it anchors the local estimate at the robot.
            fresh.samples.push_back({x, Label::Safe, t});
            if (aggregate) {
                const std::size_t before = accumulated.set().size();
                accumulated.add(fresh);
                TrainingSet added;
                added.samples.assign(accumulated.set().samples.begin() + std::ptrdiff_t(before),
                                     accumulated.set().samples.end());
                trainer.append(added);
                report.training_set_size = accumulated.set().size();
            } else {
                SampleAccumulator current(lc.dedup_tol);
                current.add(fresh);
                trainer.reset();
                trainer.append(current.set());
                report.training_set_size = current.set().size();
            }
            const bool trainable = aggregate ? accumulated.set().has_both_labels()
                                             : trainer.size() > 0 && fresh.has_both_labels();
            if (trainable) {
                model = std::make_shared<const BarrierModel>(trainer.solve());
                ++report.retrain_count;
            } else {
                model.reset();
            }
        }
        report.training_set_history.push_back(report.training_set_size);

        ControlOutput out;
        if (model) {
            out = safe_control(x, *model, cc, scenario.goal);
            if (out.infeasible_fallback) ++report.infeasible_steps;
        } else {
            out.u = nominal_policy(x, scenario.goal, cc.delta);
            if (cc.u_max) out.u = out.u.cwiseMax(-*cc.u_max).cwiseMin(*cc.u_max);
            out.h_value = sdf;
            ++report.unconstrained_steps;
        }
        record(traj, t, x, out.u, out.h_value, sdf, out.constraint_active);
        const Vec2 next = x + cc.dt * out.u;
        if (model && out.constraint_active)
            report.local_checks.push_back({step, out.h_value, model->decision(next)});
        x = next;
        t = double(step + 1) * cc.dt;
    }
    report.final_model = model;
    finalize(report, started);
    return report;
}

RunReport run_mode(const Scenario& scenario, const Vec2& start, RunMode mode,
                   const SimOptions& options) {
    switch (mode) {
        case RunMode::GroundTruth: return run_ground_truth(scenario, start, options);
        case RunMode::Offline: return run_offline(scenario, start, options);
        case RunMode::OnlineAggregate: return run_online(scenario, start, true, options);
        case RunMode::OnlineInstant: return run_online(scenario, start, false, options);
    }
    throw Error(ErrorKind::InvalidArgument, "unknown run mode");
}

}  // namespace lcbf
