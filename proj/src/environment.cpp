#include "lcbf/environment.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace lcbf {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

// Proper or touching intersection of closed segments.
bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
    auto orient = [](const Vec2& a, const Vec2& b, const Vec2& c) {
        const double v = cross(b - a, c - a);
        return (v > 0.0) - (v < 0.0);
    };
    auto on_segment = [](const Vec2& a, const Vec2& b, const Vec2& c) {
        return std::min(a.x(), b.x()) <= c.x() && c.x() <= std::max(a.x(), b.x()) &&
               std::min(a.y(), b.y()) <= c.y() && c.y() <= std::max(a.y(), b.y());
    };
    const int o1 = orient(p1, p2, q1);
    const int o2 = orient(p1, p2, q2);
    const int o3 = orient(q1, q2, p1);
    const int o4 = orient(q1, q2, p2);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(p1, p2, q1)) return true;
    if (o2 == 0 && on_segment(p1, p2, q2)) return true;
    if (o3 == 0 && on_segment(q1, q2, p1)) return true;
    if (o4 == 0 && on_segment(q1, q2, p2)) return true;
    return false;
}

void validate_shape(const Circle& c) {
    if (!(c.radius > 0.0) || !c.center.allFinite())
        throw Error(ErrorKind::Validation, "circle obstacle: radius must be > 0");
}

void validate_shape(const Ellipse& e) {
    if (!(e.semi_axes.x() > 0.0) || !(e.semi_axes.y() > 0.0))
        throw Error(ErrorKind::Validation, "ellipse obstacle: semi_axes must both be > 0");
    if (!e.center.allFinite() || !std::isfinite(e.rotation))
        throw Error(ErrorKind::Validation, "ellipse obstacle: non-finite parameters");
}

void validate_shape(const Polygon& poly) {
    const auto& v = poly.vertices;
    const std::size_t n = v.size();
    if (n < 3) throw Error(ErrorKind::Validation, "polygon obstacle: needs at least 3 vertices");
    double area2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) area2 += cross(v[i], v[(i + 1) % n]);
    if (!(area2 > 0.0))
        throw Error(ErrorKind::Validation,
                    "polygon obstacle: vertices must be counterclockwise with nonzero area");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if (adjacent) continue;
            if (segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]))
                throw Error(ErrorKind::Validation, "polygon obstacle: polygon is not simple");
        }
    }
}

}  // namespace

bool Workspace::contains(const Vec2& p) const {
    return p.x() >= x_min && p.x() <= x_max && p.y() >= y_min && p.y() <= y_max;
}

bool Workspace::interior(const Vec2& p) const {
    return p.x() > x_min && p.x() < x_max && p.y() > y_min && p.y() < y_max;
}

void Workspace::validate() const {
    if (!(x_min < x_max) || !(y_min < y_max))
        throw Error(ErrorKind::Validation, "workspace: require x_min < x_max and y_min < y_max");
}

Obstacle::Obstacle(Shape shape) : shape_(std::move(shape)) {
    std::visit([](const auto& s) { validate_shape(s); }, shape_);
}

const char* Obstacle::kind() const {
    struct {
        const char* operator()(const Circle&) const { return "circle"; }
        const char* operator()(const Ellipse&) const { return "ellipse"; }
        const char* operator()(const Polygon&) const { return "polygon"; }
    } visitor;
    return std::visit(visitor, shape_);
}

bool Obstacle::contains(const Vec2& p) const {
    struct {
        const Vec2& p;
        bool operator()(const Circle& c) const { return (p - c.center).norm() < c.radius; }
        bool operator()(const Ellipse& e) const {
            const double cs = std::cos(e.rotation), sn = std::sin(e.rotation);
            const Vec2 d = p - e.center;
            const double u = (cs * d.x() + sn * d.y()) / e.semi_axes.x();
            const double v = (-sn * d.x() + cs * d.y()) / e.semi_axes.y();
            return u * u + v * v < 1.0;
        }
        bool operator()(const Polygon& poly) const { return polygon_contains(poly, p); }
    } visitor{p};
    return std::visit(visitor, shape_);
}

double Obstacle::signed_distance(const Vec2& p) const {
    struct {
        const Vec2& p;
        double operator()(const Circle& c) const { return (p - c.center).norm() - c.radius; }
        double operator()(const Ellipse& e) const { return ellipse_signed_distance(e, p); }
        double operator()(const Polygon& poly) const { return polygon_signed_distance(poly, p); }
    } visitor{p};
    return std::visit(visitor, shape_);
}

double Obstacle::smallest_feature() const {
    struct {
        double operator()(const Circle& c) const { return c.radius; }
        double operator()(const Ellipse& e) const { return e.semi_axes.minCoeff(); }
        double operator()(const Polygon& poly) const {
            double best = std::numeric_limits<double>::infinity();
            const auto& v = poly.vertices;
            for (std::size_t i = 0; i < v.size(); ++i)
                best = std::min(best, (v[(i + 1) % v.size()] - v[i]).norm());
            return best;
        }
    } visitor;
    return std::visit(visitor, shape_);
}

double ellipse_signed_distance(const Ellipse& e, const Vec2& p) {
    const double a = e.semi_axes.x();
    const double b = e.semi_axes.y();
    const double cs = std::cos(e.rotation), sn = std::sin(e.rotation);
    const Vec2 d = p - e.center;
    const double u = cs * d.x() + sn * d.y();
    const double v = -sn * d.x() + cs * d.y();

    auto dist2 = [&](double t) {
        const double du = a * std::cos(t) - u;
        const double dv = b * std::sin(t) - v;
        return du * du + dv * dv;
    };
    // Half derivative of dist2: (e(t) - p) . e'(t)
    auto f = [&](double t) {
        const double c = std::cos(t), s = std::sin(t);
        return (a * c - u) * (-a * s) + (b * s - v) * (b * c);
    };
    auto fprime = [&](double t) {
        const double c = std::cos(t), s = std::sin(t);
        return a * a * s * s + b * b * c * c - (a * c - u) * a * c - (b * s - v) * b * s;
    };

    constexpr int kSeeds = 64;
    constexpr double kStep = kTwoPi / kSeeds;
    double t0 = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < kSeeds; ++k) {
        const double t = k * kStep;
        const double d2 = dist2(t);
        if (d2 < best) {
            best = d2;
            t0 = t;
        }
    }

    // Safeguarded Newton inside the bracket around the best seed.
    double lo = t0 - kStep;
    double hi = t0 + kStep;
    const bool bracketed = f(lo) <= 0.0 && f(hi) >= 0.0;
    double t = t0;
    for (int it = 0; it < 100; ++it) {
        const double ft = f(t);
        const double fp = fprime(t);
        double next = (fp > 0.0) ? t - ft / fp : std::numeric_limits<double>::quiet_NaN();
        if (bracketed) {
            if (ft < 0.0) lo = t; else hi = t;
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        } else if (!std::isfinite(next)) {
            break;
        }
        const double step = next - t;
        t = next;
        if (std::abs(step) < 1e-10) break;
    }
    double dist = std::sqrt(std::min(dist2(t), best));
    const double level = (u / a) * (u / a) + (v / b) * (v / b);
    return level < 1.0 ? -dist : dist;
}

bool polygon_contains(const Polygon& poly, const Vec2& p) {
    // Crossing number; boundary points may land on either side.
    bool inside = false;
    const auto& v = poly.vertices;
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
        if ((v[i].y() > p.y()) != (v[j].y() > p.y())) {
            const double x = v[j].x() + (p.y() - v[j].y()) * (v[i].x() - v[j].x()) /
                                            (v[i].y() - v[j].y());
            if (p.x() < x) inside = !inside;
        }
    }
    return inside;
}

double polygon_signed_distance(const Polygon& poly, const Vec2& p) {
    double dist = std::numeric_limits<double>::infinity();
    const auto& v = poly.vertices;
    for (std::size_t i = 0; i < v.size(); ++i)
        dist = std::min(dist, segment_distance(p, v[i], v[(i + 1) % v.size()]));
    return polygon_contains(poly, p) ? -dist : dist;
}

void Scenario::validate() const {
    workspace.validate();
    if (!workspace.interior(goal))
        throw Error(ErrorKind::Validation, "goal must lie strictly inside the workspace");
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
        if (obstacles[i].contains(goal) || obstacles[i].signed_distance(goal) <= 0.0)
            throw Error(ErrorKind::Validation,
                        fmt::format("goal lies inside obstacle {}", i + 1));
    }
    if (!(goal_radius > 0.0)) throw Error(ErrorKind::Validation, "goal_radius must be > 0");
    for (std::size_t i = 0; i < starts.size(); ++i) {
        if (!workspace.contains(starts[i]))
            throw Error(ErrorKind::Validation,
                        fmt::format("start {} lies outside the workspace", i + 1));
    }
    sensor.validate();
    learner.validate();
    control.validate();
}

double true_signed_distance(const Scenario& scenario, const Vec2& x) {
    double d = kEmptyDistance;
    for (const auto& obstacle : scenario.obstacles) d = std::min(d, obstacle.signed_distance(x));
    return d;
}

bool inside_any_obstacle(const Scenario& scenario, const Vec2& x) {
    return std::any_of(scenario.obstacles.begin(), scenario.obstacles.end(),
                       [&](const Obstacle& o) { return o.contains(x); });
}

SignedDistanceGrid::SignedDistanceGrid(Vec2 origin, double spacing, std::size_t nx,
                                       std::size_t ny, std::vector<double> values)
    : origin_(origin), spacing_(spacing), nx_(nx), ny_(ny), values_(std::move(values)) {
    if (!(spacing_ > 0.0) || nx_ < 2 || ny_ < 2 || values_.size() != nx_ * ny_)
        throw Error(ErrorKind::InvalidArgument, "signed distance grid: inconsistent shape");
}

void SignedDistanceGrid::locate(const Vec2& x, std::size_t& i, std::size_t& j, double& fx,
                                double& fy) const {
    const double gx = std::clamp((x.x() - origin_.x()) / spacing_, 0.0, double(nx_ - 1));
    const double gy = std::clamp((x.y() - origin_.y()) / spacing_, 0.0, double(ny_ - 1));
    i = std::min(static_cast<std::size_t>(gx), nx_ - 2);
    j = std::min(static_cast<std::size_t>(gy), ny_ - 2);
    fx = gx - double(i);
    fy = gy - double(j);
}

double SignedDistanceGrid::value(const Vec2& x) const {
    std::size_t i, j;
    double fx, fy;
    locate(x, i, j, fx, fy);
    return (1 - fx) * (1 - fy) * at(i, j) + fx * (1 - fy) * at(i + 1, j) +
           (1 - fx) * fy * at(i, j + 1) + fx * fy * at(i + 1, j + 1);
}

Vec2 SignedDistanceGrid::node_gradient(std::size_t i, std::size_t j) const {
    const std::size_t il = i > 0 ? i - 1 : i;
    const std::size_t ih = i + 1 < nx_ ? i + 1 : i;
    const std::size_t jl = j > 0 ? j - 1 : j;
    const std::size_t jh = j + 1 < ny_ ? j + 1 : j;
    return {(at(ih, j) - at(il, j)) / (double(ih - il) * spacing_),
            (at(i, jh) - at(i, jl)) / (double(jh - jl) * spacing_)};
}

Vec2 SignedDistanceGrid::gradient(const Vec2& x) const {
    std::size_t i, j;
    double fx, fy;
    locate(x, i, j, fx, fy);
    return (1 - fx) * (1 - fy) * node_gradient(i, j) + fx * (1 - fy) * node_gradient(i + 1, j) +
           (1 - fx) * fy * node_gradient(i, j + 1) + fx * fy * node_gradient(i + 1, j + 1);
}

SignedDistanceGrid build_sdf_grid(const Scenario& scenario, double spacing) {
    const auto& ws = scenario.workspace;
    if (!(spacing > 0.0)) throw Error(ErrorKind::InvalidArgument, "sdf grid: spacing must be > 0");
    if (spacing > std::min(ws.width(), ws.height()) / 10.0)
        throw Error(ErrorKind::InvalidArgument,
                    fmt::format("sdf grid: spacing {} is coarser than workspace extent / 10",
                                spacing));
    const auto nx = static_cast<std::size_t>(std::ceil(ws.width() / spacing - 1e-9)) + 1;
    const auto ny = static_cast<std::size_t>(std::ceil(ws.height() / spacing - 1e-9)) + 1;
    std::vector<double> values(nx * ny);
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i)
            values[j * nx + i] = true_signed_distance(
                scenario, Vec2(ws.x_min + double(i) * spacing, ws.y_min + double(j) * spacing));
    return SignedDistanceGrid(Vec2(ws.x_min, ws.y_min), spacing, nx, ny, std::move(values));
}

}  // namespace lcbf
