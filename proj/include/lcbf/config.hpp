#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

namespace lcbf {

struct SensorConfig {
    int num_beams = 360;
    double max_range = 1.0;
    double noise_sigma = 0.0;
    // Both set: beams are spread evenly over [fov_start, fov_end] inclusive.
    // Unset: full sweep starting at 0 with increment 2*pi/num_beams.
    std::optional<double> fov_start;
    std::optional<double> fov_end;

    double angular_resolution() const;
    void validate() const;
};

struct LearnerConfig {
    // Hilbert-map layer. A non-positive spacing or sigma1 means "derive from workspace".
    double grid_spacing = 0.0;
    double sigma1 = 0.0;
    double sigma2 = 1.0;

    double c_plus = 10.0;
    double c_minus_init = 1e4;
    double c_minus_cap = 1e8;
    double kkt_tolerance = 1e-6;
    std::size_t max_iters = 10'000'000;

    double offset = 0.1;           // pull-back distance for safe samples
    double dedup_tol = 0.01;       // spatial deduplication radius
    double vantage_spacing = 0.5;  // mapping-pass grid
    int retrain_every = 1;         // online stride

    void validate() const;
};

struct ControlConfig {
    double delta = 0.2;  // nominal speed
    double gamma = 1.0;  // linear class-K gain
    double dt = 0.02;
    std::optional<double> u_max;
    std::size_t max_steps = 100'000;

    void validate() const;
};

}  // namespace lcbf
