#include "lcbf/sensor.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace lcbf {

namespace {

constexpr double kMinHit = 1e-12;

// Smallest positive root of t^2 * qa + t * qb + qc = 0.
std::optional<double> smallest_positive_root(double qa, double qb, double qc) {
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0 || qa == 0.0) return std::nullopt;
    const double sq = std::sqrt(disc);
    // Numerically stable pair.
    const double q = -0.5 * (qb + std::copysign(sq, qb));
    double t1 = q / qa;
    double t2 = q != 0.0 ? qc / q : t1;
    if (t1 > t2) std::swap(t1, t2);
    if (t1 > kMinHit) return t1;
    // Origin on the surface with the ray heading in: contact, not the far-side exit.
    if (t2 > kMinHit) return t1 >= -kMinHit ? kMinHit : t2;
    return std::nullopt;
}

}  // namespace

std::size_t LaserScan::finite_count() const {
    return static_cast<std::size_t>(
        std::count_if(ranges.begin(), ranges.end(), [](const BeamReturn& r) { return r.has_value(); }));
}

std::vector<double> beam_angles(const SensorConfig& config) {
    std::vector<double> angles(static_cast<std::size_t>(config.num_beams));
    const double start = config.fov_start.value_or(0.0);
    const double step = config.angular_resolution();
    for (std::size_t i = 0; i < angles.size(); ++i) angles[i] = start + double(i) * step;
    return angles;
}

std::optional<double> ray_intersect(const Circle& c, const Vec2& origin, const Vec2& dir) {
    const Vec2 oc = origin - c.center;
    return smallest_positive_root(dir.squaredNorm(), 2.0 * oc.dot(dir),
                                  oc.squaredNorm() - c.radius * c.radius);
}

std::optional<double> ray_intersect(const Ellipse& e, const Vec2& origin, const Vec2& dir) {
    // De-rotate and scale to the unit circle; the ray parameter is unchanged.
    const double cs = std::cos(e.rotation), sn = std::sin(e.rotation);
    const Vec2 d = origin - e.center;
    const Vec2 o((cs * d.x() + sn * d.y()) / e.semi_axes.x(),
                 (-sn * d.x() + cs * d.y()) / e.semi_axes.y());
    const Vec2 v((cs * dir.x() + sn * dir.y()) / e.semi_axes.x(),
                 (-sn * dir.x() + cs * dir.y()) / e.semi_axes.y());
    return smallest_positive_root(v.squaredNorm(), 2.0 * o.dot(v), o.squaredNorm() - 1.0);
}

std::optional<double> ray_intersect(const Polygon& p, const Vec2& origin, const Vec2& dir) {
    std::optional<double> best;
    const auto& v = p.vertices;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2& a = v[i];
        const Vec2 edge = v[(i + 1) % v.size()] - a;
        const double denom = dir.x() * edge.y() - dir.y() * edge.x();
        if (std::abs(denom) < 1e-15) continue;  // parallel
        const Vec2 ao = a - origin;
        const double t = (ao.x() * edge.y() - ao.y() * edge.x()) / denom;
        const double s = (ao.x() * dir.y() - ao.y() * dir.x()) / denom;
        if (t > kMinHit && s >= 0.0 && s <= 1.0 && (!best || t < *best)) best = t;
    }
    return best;
}

std::optional<double> ray_intersect(const Obstacle& obstacle, const Vec2& origin, const Vec2& dir) {
    return std::visit([&](const auto& s) { return ray_intersect(s, origin, dir); }, obstacle.shape());
}

LaserScan scan(const Scenario& scenario, const Vec2& pose, const SensorConfig& config,
               std::mt19937_64* rng, double timestamp) {
    for (std::size_t i = 0; i < scenario.obstacles.size(); ++i) {
        if (scenario.obstacles[i].contains(pose))
            throw Error(ErrorKind::Geometry,
                        fmt::format("sensor pose ({}, {}) lies inside obstacle {}", pose.x(),
                                    pose.y(), i + 1));
    }
    if (config.noise_sigma > 0.0 && rng == nullptr)
        throw Error(ErrorKind::InvalidArgument, "noisy sensor requires a random generator");

    LaserScan out;
    out.pose = pose;
    out.timestamp = timestamp;
    out.beam_angles = beam_angles(config);
    out.ranges.reserve(out.beam_angles.size());
    std::normal_distribution<double> noise(0.0, config.noise_sigma > 0.0 ? config.noise_sigma : 1.0);
    for (double angle : out.beam_angles) {
        const Vec2 dir(std::cos(angle), std::sin(angle));
        std::optional<double> nearest;
        for (const auto& obstacle : scenario.obstacles) {
            const auto t = ray_intersect(obstacle, pose, dir);
            if (t && (!nearest || *t < *nearest)) nearest = t;
        }
        if (nearest && *nearest <= config.max_range) {
            double r = *nearest;
            if (config.noise_sigma > 0.0)
                r = std::clamp(r + noise(*rng), std::numeric_limits<double>::min(), config.max_range);
            out.ranges.emplace_back(r);
        } else {
            out.ranges.emplace_back(std::nullopt);
        }
    }
    return out;
}

Vec2 scan_to_world(const LaserScan& scan, std::size_t beam_index, double range) {
    if (beam_index >= scan.beam_angles.size())
        throw Error(ErrorKind::InvalidArgument,
                    fmt::format("beam index {} out of range ({} beams)", beam_index,
                                scan.beam_angles.size()));
    const double angle = scan.beam_angles[beam_index];
    return scan.pose + range * Vec2(std::cos(angle), std::sin(angle));
}

std::optional<std::string> resolution_warning(const Scenario& scenario, const SensorConfig& config) {
    if (scenario.obstacles.empty()) return std::nullopt;
    double feature = std::numeric_limits<double>::infinity();
    for (const auto& o : scenario.obstacles) feature = std::min(feature, o.smallest_feature());
    const double gap = config.max_range * config.angular_resolution();
    if (gap < feature) return std::nullopt;
    return fmt::format(
        "sensor arc spacing at max range ({:.4g} m) is not below the smallest obstacle feature "
        "({:.4g} m); thin features may be missed",
        gap, feature);
}

}  // namespace lcbf
