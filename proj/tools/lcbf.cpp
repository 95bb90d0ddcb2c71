// Command-line front end over the C interface.
#include "lcbf/lcbf.h"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#ifndef LCBF_SCENARIO_DIR
#define LCBF_SCENARIO_DIR "scenarios"
#endif

namespace fs = std::filesystem;

namespace {

constexpr double kLevelsetSpacing = 0.02;

struct ScenarioDeleter {
    void operator()(lcbf_scenario* s) const { lcbf_scenario_free(s); }
};
struct OfflineDeleter {
    void operator()(lcbf_offline* o) const { lcbf_offline_free(o); }
};
struct RunDeleter {
    void operator()(lcbf_run* r) const { lcbf_run_free(r); }
};
using ScenarioPtr = std::unique_ptr<lcbf_scenario, ScenarioDeleter>;
using OfflinePtr = std::unique_ptr<lcbf_offline, OfflineDeleter>;
using RunPtr = std::unique_ptr<lcbf_run, RunDeleter>;

int report_error(const std::string& context) {
    std::cerr << "error: " << context << ": " << lcbf_last_error() << '\n';
    return 1;
}

fs::path default_output_dir() {
    if (const char* env = std::getenv("LCBF_OUTPUT_DIR"); env && *env) return env;
    return "runs";
}

// Accepts a path or the bare name of a shipped scenario.
std::string resolve_scenario(const std::string& arg) {
    if (fs::exists(arg)) return arg;
    for (const fs::path& dir : {fs::path("scenarios"), fs::path(LCBF_SCENARIO_DIR)}) {
        const fs::path candidate = dir / (arg + ".toml");
        if (fs::exists(candidate)) return candidate.string();
    }
    return arg;
}

struct RunArgs {
    std::string scenario;
    std::string mode = "all";
    std::uint64_t seed = 0;
    std::string out;
    std::vector<std::string> overrides;
    unsigned jobs = 1;
};

struct Task {
    std::size_t start;
    lcbf_mode mode;
    RunPtr run;
    std::string error;
};

int cmd_run(const RunArgs& args) {
    lcbf_scenario* raw = nullptr;
    const std::string path = resolve_scenario(args.scenario);
    if (lcbf_scenario_load(path.c_str(), &raw) != LCBF_OK) return report_error(path);
    ScenarioPtr scenario(raw);
    for (const auto& ov : args.overrides)
        if (lcbf_scenario_override(scenario.get(), ov.c_str()) != LCBF_OK)
            return report_error("override '" + ov + "'");
    if (const char* warn = lcbf_scenario_resolution_warning(scenario.get()))
        std::cerr << "warning: " << warn << '\n';

    std::vector<lcbf_mode> modes;
    if (args.mode == "all") {
        modes = {LCBF_MODE_GROUND_TRUTH, LCBF_MODE_OFFLINE, LCBF_MODE_ONLINE_AGGREGATE,
                 LCBF_MODE_ONLINE_INSTANT};
    } else {
        lcbf_mode m;
        if (lcbf_mode_parse(args.mode.c_str(), &m) != LCBF_OK) return report_error("--mode");
        modes = {m};
    }

    const fs::path out_dir = args.out.empty() ? default_output_dir() : fs::path(args.out);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) {
        std::cerr << "error: cannot create output directory " << out_dir << '\n';
        return 1;
    }

    const std::size_t n_starts = lcbf_scenario_start_count(scenario.get());
    bool failed = false;

    OfflinePtr offline;
    if (std::find(modes.begin(), modes.end(), LCBF_MODE_OFFLINE) != modes.end()) {
        lcbf_offline* o = nullptr;
        if (lcbf_offline_build(scenario.get(), args.seed, &o) != LCBF_OK)
            return report_error("offline training");
        offline.reset(o);
        std::cout << "offline training set: " << lcbf_offline_training_size(offline.get())
                  << " samples\n";
        if (lcbf_offline_training_size(offline.get()) > 0) {
            const fs::path ls = out_dir / "levelset_offline.csv";
            const fs::path model = out_dir / "model_offline.csv";
            if (lcbf_offline_write_levelset(offline.get(), scenario.get(), kLevelsetSpacing,
                                            ls.string().c_str()) != LCBF_OK)
                return report_error(ls.string());
            if (lcbf_offline_write_model(offline.get(), model.string().c_str()) != LCBF_OK)
                return report_error(model.string());
        }
    }

    std::vector<Task> tasks;
    for (std::size_t s = 0; s < n_starts; ++s)
        for (lcbf_mode m : modes) tasks.push_back({s, m, nullptr, {}});

    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
            Task& t = tasks[i];
            lcbf_run* r = nullptr;
            if (lcbf_run_start(scenario.get(), t.start, t.mode, args.seed, offline.get(), &r) == LCBF_OK)
                t.run.reset(r);
            else
                t.error = lcbf_last_error();
        }
    };
    const unsigned jobs = std::max(1u, std::min<unsigned>(args.jobs, unsigned(tasks.size())));
    std::vector<std::thread> pool;
    for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::vector<const lcbf_run*> finished;
    for (const Task& t : tasks) {
        const std::size_t case_index = t.start + 1;
        const std::string stem = "case" + std::to_string(case_index) + "_" + lcbf_mode_name(t.mode);
        if (!t.run) {
            std::cerr << "error: " << stem << ": " << t.error << '\n';
            failed = true;
            continue;
        }
        finished.push_back(t.run.get());
        const fs::path csv = out_dir / (stem + ".csv");
        if (lcbf_run_write_trajectory(t.run.get(), csv.string().c_str()) != LCBF_OK) {
            failed = report_error(csv.string()) != 0;
            continue;
        }
        if (t.mode == LCBF_MODE_ONLINE_AGGREGATE || t.mode == LCBF_MODE_ONLINE_INSTANT) {
            const fs::path ls = out_dir / (stem + "_levelset.csv");
            lcbf_run_write_levelset(t.run.get(), scenario.get(), kLevelsetSpacing, ls.string().c_str());
        }
        lcbf_run_summary sum;
        lcbf_run_summary_get(t.run.get(), &sum);
        std::printf("%-26s steps=%zu reached_goal=%s violations=%zu min_h_hat=%.6g min_sdf=%.6g "
                    "train=%zu wall=%.2fs\n",
                    stem.c_str(), sum.steps, sum.reached_goal ? "yes" : "no",
                    sum.safety_violations, sum.min_h_hat, sum.min_true_sdf, sum.training_set_size,
                    sum.wall_time);
        if (sum.safety_violations > 0) {
            std::cerr << "error: " << stem << ": " << sum.safety_violations
                      << " steps with negative true clearance\n";
            failed = true;
        }
    }

    const fs::path report = out_dir / "report.json";
    if (lcbf_write_report(scenario.get(), args.seed, finished.data(), finished.size(),
                          report.string().c_str()) != LCBF_OK)
        failed = report_error(report.string()) != 0;

    if (modes.size() > 1) {
        const fs::path metrics = out_dir / "metrics.csv";
        fs::remove(metrics, ec);
        static const lcbf_mode pairs[3][2] = {{LCBF_MODE_OFFLINE, LCBF_MODE_GROUND_TRUTH},
                                              {LCBF_MODE_ONLINE_AGGREGATE, LCBF_MODE_GROUND_TRUTH},
                                              {LCBF_MODE_OFFLINE, LCBF_MODE_ONLINE_AGGREGATE}};
        for (std::size_t s = 0; s < n_starts; ++s) {
            const std::string case_name = "case" + std::to_string(s + 1);
            for (const auto& p : pairs) {
                const fs::path a = out_dir / (case_name + "_" + lcbf_mode_name(p[0]) + ".csv");
                const fs::path b = out_dir / (case_name + "_" + lcbf_mode_name(p[1]) + ".csv");
                if (!fs::exists(a) || !fs::exists(b)) continue;
                double r = 0, f = 0;
                if (lcbf_eval(a.string().c_str(), b.string().c_str(), &r, &f) != LCBF_OK ||
                    lcbf_metrics_append(metrics.string().c_str(), case_name.c_str(),
                                        lcbf_mode_name(p[0]), lcbf_mode_name(p[1]), r, f) != LCBF_OK)
                    failed = report_error("metrics " + case_name) != 0;
            }
        }
        char* text = nullptr;
        const fs::path table = out_dir / "table.csv";
        if (lcbf_table(out_dir.string().c_str(), table.string().c_str(), &text) == LCBF_OK) {
            std::cout << '\n' << text;
            lcbf_string_free(text);
        } else {
            failed = report_error("table") != 0;
        }
    }
    return failed ? 1 : 0;
}

int cmd_eval(const std::string& a, const std::string& b, const std::string& metrics_arg,
             const std::string& case_name) {
    double r = 0, f = 0;
    if (lcbf_eval(a.c_str(), b.c_str(), &r, &f) != LCBF_OK) return report_error("eval");
    std::printf("R=%.6f F=%.6f\n", r, f);
    const fs::path metrics = metrics_arg.empty() ? default_output_dir() / "metrics.csv" : fs::path(metrics_arg);
    std::error_code ec;
    if (metrics.has_parent_path()) fs::create_directories(metrics.parent_path(), ec);
    const std::string ma = fs::path(a).stem().string(), mb = fs::path(b).stem().string();
    if (lcbf_metrics_append(metrics.string().c_str(), case_name.c_str(), ma.c_str(), mb.c_str(), r,
                            f) != LCBF_OK)
        return report_error(metrics.string());
    return 0;
}

int cmd_table(const std::string& run_dir, const std::string& csv_arg) {
    const fs::path csv = csv_arg.empty() ? fs::path(run_dir) / "table.csv" : fs::path(csv_arg);
    char* text = nullptr;
    if (lcbf_table(run_dir.c_str(), csv.string().c_str(), &text) != LCBF_OK) return report_error("table");
    std::cout << text;
    lcbf_string_free(text);
    return 0;
}

int cmd_sdf(const std::string& scenario_arg, double spacing, const std::string& out) {
    lcbf_scenario* raw = nullptr;
    const std::string path = resolve_scenario(scenario_arg);
    if (lcbf_scenario_load(path.c_str(), &raw) != LCBF_OK) return report_error(path);
    ScenarioPtr scenario(raw);
    if (lcbf_scenario_write_sdf(scenario.get(), spacing, out.c_str()) != LCBF_OK)
        return report_error("sdf");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Learned control barrier functions from simulated LiDAR"};
    app.set_version_flag("--version", std::string(lcbf_version()));
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Run a scenario in one or all modes");
    run_cmd->add_option("--scenario", run.scenario, "Scenario file or shipped scenario name")->required();
    run_cmd->add_option("--mode", run.mode, "ground-truth | offline | online-aggregate | online-instant | all")
        ->check(CLI::IsMember({"ground-truth", "offline", "online-aggregate", "online-instant", "all"}));
    run_cmd->add_option("--seed", run.seed, "Seed for every random consumer");
    run_cmd->add_option("--out", run.out, "Output directory (default $LCBF_OUTPUT_DIR or ./runs)");
    run_cmd->add_option("--override", run.overrides, "table.key=value, repeatable")->take_all();
    run_cmd->add_option("--jobs", run.jobs, "Parallel runs")->check(CLI::PositiveNumber);

    std::string eval_a, eval_b, eval_metrics, eval_case = "-";
    auto* eval_cmd = app.add_subcommand("eval", "Correlation and Frechet distance of two trajectories");
    eval_cmd->add_option("traj_a", eval_a)->required();
    eval_cmd->add_option("traj_b", eval_b)->required();
    eval_cmd->add_option("--metrics", eval_metrics, "Metrics CSV to append to");
    eval_cmd->add_option("--case", eval_case, "Case label for the metrics row");

    std::string table_dir, table_csv;
    auto* table_cmd = app.add_subcommand("table", "Comparison table for a run directory");
    table_cmd->add_option("run_dir", table_dir)->required();
    table_cmd->add_option("--csv", table_csv, "CSV output (default <run_dir>/table.csv)");

    std::string sdf_scenario, sdf_out = "sdf.csv";
    double sdf_spacing = 0.01;
    auto* sdf_cmd = app.add_subcommand("sdf", "Dump the ground-truth signed-distance grid");
    sdf_cmd->add_option("--scenario", sdf_scenario)->required();
    sdf_cmd->add_option("--spacing", sdf_spacing)->check(CLI::PositiveNumber);
    sdf_cmd->add_option("--out", sdf_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (*run_cmd) return cmd_run(run);
    if (*eval_cmd) return cmd_eval(eval_a, eval_b, eval_metrics, eval_case);
    if (*table_cmd) return cmd_table(table_dir, table_csv);
    if (*sdf_cmd) return cmd_sdf(sdf_scenario, sdf_spacing, sdf_out);
    return 1;
}
