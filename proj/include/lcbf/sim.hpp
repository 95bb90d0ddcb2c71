#pragma once

#include "lcbf/control.hpp"
#include "lcbf/dataset.hpp"
#include "lcbf/environment.hpp"
#include "lcbf/svm.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

namespace lcbf {

enum class RunMode { GroundTruth, Offline, OnlineAggregate, OnlineInstant };

const char* to_string(RunMode mode);
std::optional<RunMode> parse_run_mode(std::string_view name);

// Parallel per-step records; index k holds the state at time t[k] and the control applied
// from it. The final entry is the terminal state with a zero control.
struct Trajectory {
    std::vector<double> t;
    std::vector<Vec2> states;
    std::vector<Vec2> controls;
    std::vector<double> barrier_values;
    std::vector<double> true_sdf_values;
    std::vector<char> constraint_active;
    bool reached_goal = false;
    std::size_t steps = 0;

    std::size_t size() const { return states.size(); }
};

// One constrained online step: the barrier trained at step t, evaluated at x_t and x_{t+1}.
struct LocalSafetyCheck {
    std::size_t step;
    double h_now;
    double h_next;
};

struct RunReport {
    Trajectory trajectory;
    RunMode mode = RunMode::GroundTruth;
    ControlConfig control;
    std::size_t training_set_size = 0;
    std::size_t retrain_count = 0;
    double wall_time = 0.0;
    std::size_t safety_violations = 0;
    std::size_t unconstrained_steps = 0;  // online steps without a classifier
    std::size_t infeasible_steps = 0;
    double min_barrier = 0.0;
    double min_true_sdf = 0.0;
    std::vector<std::size_t> training_set_history;  // online: size after each step's update
    std::vector<LocalSafetyCheck> local_checks;
    std::shared_ptr<const BarrierModel> final_model;  // learned modes only
};

struct SimOptions {
    std::uint64_t seed = 0;
    double sdf_spacing = 0.01;  // ground-truth lattice
};

// Collision-free points of a regular grid over the workspace.
std::vector<Vec2> mapping_vantages(const Scenario& scenario, double vantage_spacing);

// Stand-in for the offline oracle: scans from every vantage, aggregated with deduplication.
TrainingSet mapping_pass(const Scenario& scenario, const SensorConfig& sensor,
                         double vantage_spacing, std::uint64_t seed = 0);

struct OfflineModel {
    TrainingSet data;
    std::vector<Vec2> vantages;
    std::shared_ptr<const BarrierModel> model;  // null when nothing was sensed
};

OfflineModel build_offline_model(const Scenario& scenario, std::uint64_t seed = 0);

RunReport run_offline(const Scenario& scenario, const Vec2& start, const SimOptions& options = {});
// Rollout against an already trained offline model (shared across start points).
RunReport run_offline(const Scenario& scenario, const Vec2& start, const OfflineModel& offline);
RunReport run_online(const Scenario& scenario, const Vec2& start, bool aggregate,
                     const SimOptions& options = {});
RunReport run_ground_truth(const Scenario& scenario, const Vec2& start,
                           const SimOptions& options = {});
RunReport run_ground_truth(const Scenario& scenario, const Vec2& start, const SdfBarrier& barrier);

RunReport run_mode(const Scenario& scenario, const Vec2& start, RunMode mode,
                   const SimOptions& options = {});

}  // namespace lcbf
