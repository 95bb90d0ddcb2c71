#pragma once

#include "lcbf/config.hpp"
#include "lcbf/core.hpp"

#include <optional>

namespace lcbf {

struct ControlOutput {
    Vec2 u{0.0, 0.0};
    bool constraint_active = false;
    double h_value = 0.0;
    Vec2 h_gradient{0.0, 0.0};
    bool infeasible_fallback = false;
};

// Go-to-goal: delta * (goal - x) / |goal - x|, zero within 1e-9 of the goal.
Vec2 nominal_policy(const Vec2& x, const Vec2& goal, double delta);

// argmin |u - k|^2 subject to a . u >= beta, solved as a half-space projection, then
// optionally clamped per axis to u_max. A vanishing `a` with beta > 0 stops the robot.
ControlOutput project_to_constraint(const Vec2& a, double beta, const Vec2& nominal,
                                    std::optional<double> u_max = std::nullopt);

// Barrier-filtered control for single-integrator dynamics (x' = u): the barrier
// condition grad h . u >= -gamma * h.
ControlOutput safe_control(const Vec2& x, const Barrier& barrier, const ControlConfig& config,
                           const Vec2& goal);

bool admissible(const Vec2& x, const Vec2& u, const Barrier& barrier, const ControlConfig& config);

}  // namespace lcbf
