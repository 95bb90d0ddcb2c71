#pragma once

#include "lcbf/core.hpp"

#include <vector>

namespace lcbf {

struct Polyline {
    std::vector<Vec2> points;

    Polyline() = default;
    explicit Polyline(std::vector<Vec2> pts) : points(std::move(pts)) {}

    std::size_t size() const { return points.size(); }
    double length() const;
    // Needs at least two finite points.
    void validate() const;
};

inline constexpr std::size_t kDefaultResampleCount = 256;

Polyline resample_by_arclength(const Polyline& traj, std::size_t m);

// Mean of the per-coordinate Pearson coefficients after resampling both inputs to m points.
double correlation(const Polyline& a, const Polyline& b, std::size_t m = kDefaultResampleCount);

// Pearson coefficient of two equal-length sequences; a constant sequence scores 1 against
// another constant sequence and 0 otherwise.
double pearson(const std::vector<double>& a, const std::vector<double>& b);

// Discrete Frechet distance over monotone couplings.
double frechet_distance(const Polyline& a, const Polyline& b);

}  // namespace lcbf
