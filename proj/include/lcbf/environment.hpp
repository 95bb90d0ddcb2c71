#pragma once

#include "lcbf/config.hpp"
#include "lcbf/core.hpp"

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace lcbf {

struct Workspace {
    double x_min = 0.0;
    double x_max = 3.2;
    double y_min = 0.0;
    double y_max = 2.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    bool contains(const Vec2& p) const;
    // Strictly inside (not on the boundary).
    bool interior(const Vec2& p) const;
    void validate() const;
};

struct Circle {
    Vec2 center;
    double radius;
};

struct Ellipse {
    Vec2 center;
    Vec2 semi_axes;   // (a, b) along the rotated local x and y axes
    double rotation;  // radians, counterclockwise
};

// Simple polygon, vertices in counterclockwise order.
struct Polygon {
    std::vector<Vec2> vertices;
};

using Shape = std::variant<Circle, Ellipse, Polygon>;

class Obstacle {
public:
    explicit Obstacle(Shape shape);

    const Shape& shape() const { return shape_; }
    bool contains(const Vec2& p) const;
    double signed_distance(const Vec2& p) const;
    // Length of the smallest geometric feature (radius, minor semi-axis, shortest edge).
    double smallest_feature() const;
    const char* kind() const;

private:
    Shape shape_;
};

// Signed distance to an ellipse boundary, negative inside. Newton projection on the
// boundary parameter seeded from 64 samples, iterated to 1e-10.
double ellipse_signed_distance(const Ellipse& e, const Vec2& p);
double polygon_signed_distance(const Polygon& poly, const Vec2& p);
bool polygon_contains(const Polygon& poly, const Vec2& p);

struct Scenario {
    std::string name;
    Workspace workspace;
    std::vector<Obstacle> obstacles;
    std::vector<Vec2> starts;
    Vec2 goal{0.0, 0.0};
    double goal_radius = 0.1;
    SensorConfig sensor;
    LearnerConfig learner;
    ControlConfig control;

    void validate() const;
};

// Distance reported when there is nothing to be near.
inline constexpr double kEmptyDistance = 1e9;

double true_signed_distance(const Scenario& scenario, const Vec2& x);
bool inside_any_obstacle(const Scenario& scenario, const Vec2& x);

// Samples of the true signed distance on a regular lattice covering the workspace.
class SignedDistanceGrid {
public:
    SignedDistanceGrid(Vec2 origin, double spacing, std::size_t nx, std::size_t ny,
                       std::vector<double> values);

    const Vec2& origin() const { return origin_; }
    double spacing() const { return spacing_; }
    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    double at(std::size_t i, std::size_t j) const { return values_[j * nx_ + i]; }
    const std::vector<double>& values() const { return values_; }

    // Bilinear interpolation; queries outside the lattice are clamped to it.
    double value(const Vec2& x) const;
    // Bilinear interpolation of node-wise central differences.
    Vec2 gradient(const Vec2& x) const;

private:
    Vec2 node_gradient(std::size_t i, std::size_t j) const;
    void locate(const Vec2& x, std::size_t& i, std::size_t& j, double& fx, double& fy) const;

    Vec2 origin_;
    double spacing_;
    std::size_t nx_;
    std::size_t ny_;
    std::vector<double> values_;
};

SignedDistanceGrid build_sdf_grid(const Scenario& scenario, double spacing);

// Grid-backed ground-truth barrier.
class SdfBarrier final : public Barrier {
public:
    explicit SdfBarrier(SignedDistanceGrid grid) : grid_(std::move(grid)) {}
    double value(const Vec2& x) const override { return grid_.value(x); }
    Vec2 gradient(const Vec2& x) const override { return grid_.gradient(x); }
    const SignedDistanceGrid& grid() const { return grid_; }

private:
    SignedDistanceGrid grid_;
};

// Parses and validates a scenario file (TOML).
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text, const std::string& source_name = "<string>");
// Applies "table.key=value" onto a scenario and re-validates.
void apply_override(Scenario& scenario, const std::string& assignment);

}  // namespace lcbf
