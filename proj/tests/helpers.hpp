#pragma once

#include "lcbf/environment.hpp"

#include <doctest.h>

#include <filesystem>
#include <random>
#include <string>

namespace testing {

inline std::string scenario_path(const std::string& name) {
    return (std::filesystem::path(LCBF_SCENARIO_DIR) / (name + ".toml")).string();
}

inline lcbf::Scenario shipped(const std::string& name) { return lcbf::load_scenario(scenario_path(name)); }

inline lcbf::Scenario circle_scenario(lcbf::Vec2 center, double radius,
                                      lcbf::Workspace ws = {0.0, 3.2, 0.0, 2.0}) {
    lcbf::Scenario sc;
    sc.name = "test";
    sc.workspace = ws;
    sc.obstacles.emplace_back(lcbf::Circle{center, radius});
    sc.goal = {ws.x_max - 0.3, 0.5 * (ws.y_min + ws.y_max)};
    return sc;
}

inline lcbf::Vec2 uniform_point(std::mt19937_64& rng, const lcbf::Workspace& ws) {
    std::uniform_real_distribution<double> ux(ws.x_min, ws.x_max), uy(ws.y_min, ws.y_max);
    const double x = ux(rng);
    return {x, uy(rng)};
}

inline std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("lcbf_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testing
