#include "lcbf/lcbf.h"

#include "lcbf/export.hpp"
#include "lcbf/sensor.hpp"
#include "lcbf/sim.hpp"

#include <fmt/format.h>

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

struct lcbf_scenario {
    lcbf::Scenario scenario;
    std::string warning;
    bool has_warning = false;
};

struct lcbf_offline {
    lcbf::OfflineModel model;
};

struct lcbf_run {
    std::size_t case_index;
    lcbf::Vec2 start;
    lcbf::RunReport report;
};

namespace {

thread_local std::string g_last_error;

lcbf_status status_of(lcbf::ErrorKind kind) {
    using lcbf::ErrorKind;
    switch (kind) {
        case ErrorKind::Parse: return LCBF_ERR_PARSE;
        case ErrorKind::Validation: return LCBF_ERR_VALIDATION;
        case ErrorKind::InvalidArgument: return LCBF_ERR_INVALID_ARGUMENT;
        case ErrorKind::Geometry: return LCBF_ERR_GEOMETRY;
        case ErrorKind::DegenerateTrainingSet: return LCBF_ERR_DEGENERATE_TRAINING_SET;
        case ErrorKind::HardMarginInfeasible: return LCBF_ERR_HARD_MARGIN_INFEASIBLE;
        case ErrorKind::StartUnsafe: return LCBF_ERR_START_UNSAFE;
        case ErrorKind::Io: return LCBF_ERR_IO;
    }
    return LCBF_ERR_INTERNAL;
}

lcbf_status fail(lcbf_status status, std::string message) {
    g_last_error = std::move(message);
    return status;
}

template <class F>
lcbf_status guarded(F&& body) {
    try {
        g_last_error.clear();
        return body();
    } catch (const lcbf::Error& e) {
        return fail(status_of(e.kind()), e.what());
    } catch (const std::bad_alloc&) {
        return fail(LCBF_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(LCBF_ERR_INTERNAL, e.what());
    }
}

#define LCBF_REQUIRE(cond, what) \
    if (!(cond)) return fail(LCBF_ERR_INVALID_ARGUMENT, what)

lcbf::RunMode to_mode(lcbf_mode m) {
    switch (m) {
        case LCBF_MODE_GROUND_TRUTH: return lcbf::RunMode::GroundTruth;
        case LCBF_MODE_OFFLINE: return lcbf::RunMode::Offline;
        case LCBF_MODE_ONLINE_AGGREGATE: return lcbf::RunMode::OnlineAggregate;
        case LCBF_MODE_ONLINE_INSTANT: return lcbf::RunMode::OnlineInstant;
    }
    throw lcbf::Error(lcbf::ErrorKind::InvalidArgument, "unknown mode");
}

lcbf_mode from_mode(lcbf::RunMode m) {
    switch (m) {
        case lcbf::RunMode::GroundTruth: return LCBF_MODE_GROUND_TRUTH;
        case lcbf::RunMode::Offline: return LCBF_MODE_OFFLINE;
        case lcbf::RunMode::OnlineAggregate: return LCBF_MODE_ONLINE_AGGREGATE;
        case lcbf::RunMode::OnlineInstant: return LCBF_MODE_ONLINE_INSTANT;
    }
    return LCBF_MODE_GROUND_TRUTH;
}

std::ofstream open_file(const char* path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw lcbf::Error(lcbf::ErrorKind::Io, fmt::format("cannot open {} for writing", path));
    return out;
}

void refresh_warning(lcbf_scenario* s) {
    const auto w = lcbf::resolution_warning(s->scenario, s->scenario.sensor);
    s->has_warning = w.has_value();
    s->warning = w.value_or("");
}

}  // namespace

extern "C" {

const char* lcbf_version(void) { return "0.1.0"; }

const char* lcbf_last_error(void) { return g_last_error.c_str(); }

const char* lcbf_status_name(lcbf_status status) {
    switch (status) {
        case LCBF_OK: return "ok";
        case LCBF_ERR_PARSE: return "parse error";
        case LCBF_ERR_VALIDATION: return "validation error";
        case LCBF_ERR_INVALID_ARGUMENT: return "invalid argument";
        case LCBF_ERR_GEOMETRY: return "geometry error";
        case LCBF_ERR_DEGENERATE_TRAINING_SET: return "degenerate training set";
        case LCBF_ERR_HARD_MARGIN_INFEASIBLE: return "hard-margin infeasible";
        case LCBF_ERR_START_UNSAFE: return "unsafe start";
        case LCBF_ERR_IO: return "i/o error";
        case LCBF_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

lcbf_status lcbf_mode_parse(const char* name, lcbf_mode* out) {
    LCBF_REQUIRE(name && out, "null argument");
    const auto m = lcbf::parse_run_mode(name);
    if (!m) return fail(LCBF_ERR_INVALID_ARGUMENT, fmt::format("unknown mode '{}'", name));
    *out = from_mode(*m);
    return LCBF_OK;
}

const char* lcbf_mode_name(lcbf_mode mode) {
    try {
        return lcbf::to_string(to_mode(mode));
    } catch (...) {
        return "unknown";
    }
}

lcbf_status lcbf_scenario_load(const char* path, lcbf_scenario** out) {
    LCBF_REQUIRE(path && out, "null argument");
    return guarded([&] {
        auto s = std::make_unique<lcbf_scenario>();
        s->scenario = lcbf::load_scenario(path);
        refresh_warning(s.get());
        *out = s.release();
        return LCBF_OK;
    });
}

lcbf_status lcbf_scenario_parse(const char* text, const char* source_name, lcbf_scenario** out) {
    LCBF_REQUIRE(text && out, "null argument");
    return guarded([&] {
        auto s = std::make_unique<lcbf_scenario>();
        s->scenario = lcbf::parse_scenario(text, source_name ? source_name : "<string>");
        refresh_warning(s.get());
        *out = s.release();
        return LCBF_OK;
    });
}

void lcbf_scenario_free(lcbf_scenario* scenario) { delete scenario; }

lcbf_status lcbf_scenario_override(lcbf_scenario* scenario, const char* assignment) {
    LCBF_REQUIRE(scenario && assignment, "null argument");
    return guarded([&] {
        lcbf::Scenario copy = scenario->scenario;
        lcbf::apply_override(copy, assignment);
        scenario->scenario = std::move(copy);
        refresh_warning(scenario);
        return LCBF_OK;
    });
}

const char* lcbf_scenario_name(const lcbf_scenario* scenario) {
    return scenario ? scenario->scenario.name.c_str() : "";
}

size_t lcbf_scenario_start_count(const lcbf_scenario* scenario) {
    return scenario ? scenario->scenario.starts.size() : 0;
}

lcbf_status lcbf_scenario_start(const lcbf_scenario* scenario, size_t index, double* x, double* y) {
    LCBF_REQUIRE(scenario && x && y, "null argument");
    if (index >= scenario->scenario.starts.size())
        return fail(LCBF_ERR_INVALID_ARGUMENT, fmt::format("start index {} out of range", index));
    *x = scenario->scenario.starts[index].x();
    *y = scenario->scenario.starts[index].y();
    return LCBF_OK;
}

lcbf_status lcbf_scenario_goal(const lcbf_scenario* scenario, double* x, double* y) {
    LCBF_REQUIRE(scenario && x && y, "null argument");
    *x = scenario->scenario.goal.x();
    *y = scenario->scenario.goal.y();
    return LCBF_OK;
}

const char* lcbf_scenario_resolution_warning(const lcbf_scenario* scenario) {
    return scenario && scenario->has_warning ? scenario->warning.c_str() : nullptr;
}

lcbf_status lcbf_scenario_write_sdf(const lcbf_scenario* scenario, double spacing, const char* path) {
    LCBF_REQUIRE(scenario && path, "null argument");
    return guarded([&] {
        const auto grid = lcbf::build_sdf_grid(scenario->scenario, spacing);
        auto out = open_file(path);
        lcbf::write_sdf_csv(out, grid);
        return LCBF_OK;
    });
}

lcbf_status lcbf_offline_build(const lcbf_scenario* scenario, uint64_t seed, lcbf_offline** out) {
    LCBF_REQUIRE(scenario && out, "null argument");
    return guarded([&] {
        auto o = std::make_unique<lcbf_offline>();
        o->model = lcbf::build_offline_model(scenario->scenario, seed);
        *out = o.release();
        return LCBF_OK;
    });
}

void lcbf_offline_free(lcbf_offline* offline) { delete offline; }

size_t lcbf_offline_training_size(const lcbf_offline* offline) {
    return offline ? offline->model.data.size() : 0;
}

lcbf_status lcbf_offline_write_levelset(const lcbf_offline* offline, const lcbf_scenario* scenario,
                                        double spacing, const char* path) {
    LCBF_REQUIRE(offline && scenario && path, "null argument");
    if (!offline->model.model) return fail(LCBF_ERR_INVALID_ARGUMENT, "offline model is empty");
    return guarded([&] {
        auto out = open_file(path);
        lcbf::write_levelset_csv(out, *offline->model.model, scenario->scenario.workspace, spacing);
        return LCBF_OK;
    });
}

lcbf_status lcbf_offline_write_model(const lcbf_offline* offline, const char* path) {
    LCBF_REQUIRE(offline && path, "null argument");
    if (!offline->model.model) return fail(LCBF_ERR_INVALID_ARGUMENT, "offline model is empty");
    return guarded([&] {
        auto out = open_file(path);
        lcbf::write_model_csv(out, *offline->model.model);
        return LCBF_OK;
    });
}

lcbf_status lcbf_run_start(const lcbf_scenario* scenario, size_t start_index, lcbf_mode mode,
                           uint64_t seed, const lcbf_offline* offline, lcbf_run** out) {
    LCBF_REQUIRE(scenario && out, "null argument");
    const auto& sc = scenario->scenario;
    if (start_index >= sc.starts.size())
        return fail(LCBF_ERR_INVALID_ARGUMENT, fmt::format("start index {} out of range", start_index));
    return guarded([&] {
        auto r = std::make_unique<lcbf_run>();
        r->case_index = start_index + 1;
        r->start = sc.starts[start_index];
        lcbf::SimOptions options;
        options.seed = seed;
        const lcbf::RunMode m = to_mode(mode);
        if (m == lcbf::RunMode::Offline && offline)
            r->report = lcbf::run_offline(sc, r->start, offline->model);
        else
            r->report = lcbf::run_mode(sc, r->start, m, options);
        *out = r.release();
        return LCBF_OK;
    });
}

void lcbf_run_free(lcbf_run* run) { delete run; }

lcbf_status lcbf_run_summary_get(const lcbf_run* run, lcbf_run_summary* out) {
    LCBF_REQUIRE(run && out, "null argument");
    const auto& rep = run->report;
    out->mode = from_mode(rep.mode);
    out->reached_goal = rep.trajectory.reached_goal ? 1 : 0;
    out->steps = rep.trajectory.steps;
    out->training_set_size = rep.training_set_size;
    out->retrain_count = rep.retrain_count;
    out->safety_violations = rep.safety_violations;
    out->unconstrained_steps = rep.unconstrained_steps;
    out->infeasible_steps = rep.infeasible_steps;
    out->wall_time = rep.wall_time;
    out->min_h_hat = rep.min_barrier;
    out->min_true_sdf = rep.min_true_sdf;
    out->gamma = rep.control.gamma;
    return LCBF_OK;
}

lcbf_status lcbf_run_write_trajectory(const lcbf_run* run, const char* path) {
    LCBF_REQUIRE(run && path, "null argument");
    return guarded([&] {
        lcbf::write_trajectory_csv(std::filesystem::path(path), run->report.trajectory);
        return LCBF_OK;
    });
}

lcbf_status lcbf_run_write_levelset(const lcbf_run* run, const lcbf_scenario* scenario,
                                    double spacing, const char* path) {
    LCBF_REQUIRE(run && scenario && path, "null argument");
    if (!run->report.final_model) return fail(LCBF_ERR_INVALID_ARGUMENT, "run has no learned model");
    return guarded([&] {
        auto out = open_file(path);
        lcbf::write_levelset_csv(out, *run->report.final_model, scenario->scenario.workspace, spacing);
        return LCBF_OK;
    });
}

lcbf_status lcbf_write_report(const lcbf_scenario* scenario, uint64_t seed,
                              const lcbf_run* const* runs, size_t count, const char* path) {
    LCBF_REQUIRE(scenario && path && (runs || count == 0), "null argument");
    return guarded([&] {
        std::vector<lcbf::CaseResult> results;
        results.reserve(count);
        for (size_t i = 0; i < count; ++i) {
            if (!runs[i]) throw lcbf::Error(lcbf::ErrorKind::InvalidArgument, "null run handle");
            results.push_back({runs[i]->case_index, runs[i]->start, runs[i]->report});
        }
        auto out = open_file(path);
        lcbf::write_report_json(out, scenario->scenario, seed, results);
        return LCBF_OK;
    });
}

lcbf_status lcbf_eval(const char* trajectory_a, const char* trajectory_b, double* r, double* f) {
    LCBF_REQUIRE(trajectory_a && trajectory_b && r && f, "null argument");
    return guarded([&] {
        const auto a = lcbf::read_trajectory_csv(trajectory_a);
        const auto b = lcbf::read_trajectory_csv(trajectory_b);
        *r = lcbf::correlation(a, b);
        *f = lcbf::frechet_distance(lcbf::resample_by_arclength(a, lcbf::kDefaultResampleCount),
                                    lcbf::resample_by_arclength(b, lcbf::kDefaultResampleCount));
        return LCBF_OK;
    });
}

lcbf_status lcbf_metrics_append(const char* path, const char* case_name, const char* mode_a,
                                const char* mode_b, double r, double f) {
    LCBF_REQUIRE(path && case_name && mode_a && mode_b, "null argument");
    return guarded([&] {
        lcbf::append_metrics_csv(path, {{case_name, mode_a, mode_b, r, f}});
        return LCBF_OK;
    });
}

lcbf_status lcbf_table(const char* run_dir, const char* csv_path, char** text) {
    LCBF_REQUIRE(run_dir && text, "null argument");
    return guarded([&] {
        const auto table = lcbf::build_comparison_table(run_dir);
        if (csv_path) {
            auto out = open_file(csv_path);
            lcbf::write_table_csv(out, table);
        }
        std::ostringstream ss;
        lcbf::write_table_text(ss, table);
        const std::string s = ss.str();
        char* buf = static_cast<char*>(std::malloc(s.size() + 1));
        if (!buf) throw std::bad_alloc();
        std::memcpy(buf, s.c_str(), s.size() + 1);
        *text = buf;
        return LCBF_OK;
    });
}

void lcbf_string_free(char* text) { std::free(text); }

}  // extern "C"
