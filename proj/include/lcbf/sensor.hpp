#pragma once

#include "lcbf/environment.hpp"

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace lcbf {

// A beam either hits something within range or reports nothing; never a sentinel float.
using BeamReturn = std::optional<double>;

struct LaserScan {
    Vec2 pose{0.0, 0.0};
    double timestamp = 0.0;
    std::vector<BeamReturn> ranges;
    std::vector<double> beam_angles;  // world frame, radians

    std::size_t size() const { return ranges.size(); }
    std::size_t finite_count() const;
};

std::vector<double> beam_angles(const SensorConfig& config);

// Distance along a unit direction to the first boundary crossing, if any (t > 0).
std::optional<double> ray_intersect(const Obstacle& obstacle, const Vec2& origin, const Vec2& dir);
std::optional<double> ray_intersect(const Circle& c, const Vec2& origin, const Vec2& dir);
std::optional<double> ray_intersect(const Ellipse& e, const Vec2& origin, const Vec2& dir);
std::optional<double> ray_intersect(const Polygon& p, const Vec2& origin, const Vec2& dir);

// Simulated LiDAR sweep. `rng` is only consumed when config.noise_sigma > 0.
LaserScan scan(const Scenario& scenario, const Vec2& pose, const SensorConfig& config,
               std::mt19937_64* rng = nullptr, double timestamp = 0.0);

// pose + range * (cos theta_i, sin theta_i)
Vec2 scan_to_world(const LaserScan& scan, std::size_t beam_index, double range);

// Non-empty when max_range * theta_res is not below the smallest obstacle feature.
std::optional<std::string> resolution_warning(const Scenario& scenario, const SensorConfig& config);

}  // namespace lcbf
