#include "lcbf/control.hpp"

#include <algorithm>
#include <cmath>

namespace lcbf {

namespace {
constexpr double kGoalEps = 1e-9;
constexpr double kDegenerateGradient = 1e-12;
constexpr double kAdmissibleSlack = 1e-9;
}  // namespace

Vec2 nominal_policy(const Vec2& x, const Vec2& goal, double delta) {
    const Vec2 to_goal = goal - x;
    const double dist = to_goal.norm();
    if (dist < kGoalEps) return Vec2::Zero();
    return delta * to_goal / dist;
}

ControlOutput project_to_constraint(const Vec2& a, double beta, const Vec2& nominal_in,
                                    std::optional<double> u_max) {
    ControlOutput out;
    // The box applies to the nominal input as well, so an inactive filter passes it through.
    const Vec2 nominal = u_max ? Vec2(nominal_in.cwiseMax(-*u_max).cwiseMin(*u_max)) : nominal_in;
    const double a2 = a.squaredNorm();
    if (std::sqrt(a2) < kDegenerateGradient) {
        if (beta > 0.0) {
            out.u = Vec2::Zero();
            out.infeasible_fallback = true;
            out.constraint_active = true;
            return out;
        }
        out.u = nominal;
    } else if (a.dot(nominal) >= beta) {
        out.u = nominal;
    } else {
        out.u = nominal + ((beta - a.dot(nominal)) / a2) * a;
        out.constraint_active = true;
    }
    if (u_max) {
        const Vec2 clamped = out.u.cwiseMax(-*u_max).cwiseMin(*u_max);
        if (clamped != out.u) {
            out.u = clamped;
            if (a.dot(clamped) < beta - kAdmissibleSlack) out.infeasible_fallback = true;
        }
    }
    return out;
}

ControlOutput safe_control(const Vec2& x, const Barrier& barrier, const ControlConfig& config,
                           const Vec2& goal) {
    const double h = barrier.value(x);
    const Vec2 grad = barrier.gradient(x);
    ControlOutput out =
        project_to_constraint(grad, -config.gamma * h, nominal_policy(x, goal, config.delta), config.u_max);
    out.h_value = h;
    out.h_gradient = grad;
    return out;
}

bool admissible(const Vec2& x, const Vec2& u, const Barrier& barrier, const ControlConfig& config) {
    return barrier.gradient(x).dot(u) + config.gamma * barrier.value(x) >= -kAdmissibleSlack;
}

}  // namespace lcbf
