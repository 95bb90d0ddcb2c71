#pragma once

#include "lcbf/environment.hpp"
#include "lcbf/metrics.hpp"
#include "lcbf/sim.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lcbf {

inline constexpr const char* kTrajectoryHeader = "t,x,y,ux,uy,h_hat,true_sdf,constraint_active";

void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

// Parses a trajectory CSV back into its (x, y) polyline. Malformed rows raise a Parse error
// naming the file and row.
Polyline read_trajectory_csv(const std::filesystem::path& path);
Polyline parse_trajectory_csv(std::istream& in, const std::string& source_name);

// Barrier sampled on a regular lattice covering the workspace: x,y,h_hat.
void write_levelset_csv(std::ostream& out, const Barrier& barrier, const Workspace& workspace,
                        double spacing);
void write_sdf_csv(std::ostream& out, const SignedDistanceGrid& grid);
// Support vectors (kind=support) followed by one kind=bias row carrying b in the alpha column.
void write_model_csv(std::ostream& out, const BarrierModel& model);

struct MetricsRow {
    std::string case_name;
    std::string mode_a;
    std::string mode_b;
    double r;
    double f;
};

inline constexpr const char* kMetricsHeader = "case,mode_a,mode_b,R,F";

// Appends rows, writing the header first when the file is new or empty.
void append_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows);

// Per-case comparison table: offline vs ground truth, online vs ground truth, offline vs online.
struct ComparisonTable {
    struct Row {
        std::string case_name;
        std::optional<double> r[3];
        std::optional<double> f[3];
    };
    std::vector<Row> rows;
    std::optional<double> mean_r[3];
    std::optional<double> mean_f[3];
};

inline constexpr const char* kTableColumns[3] = {"offline_vs_ground_truth",
                                                  "online_vs_ground_truth",
                                                  "offline_vs_online"};

// Scans caseK_<mode>.csv files. The online column uses online_aggregate and falls back to
// online_instant when only that is present.
ComparisonTable build_comparison_table(const std::filesystem::path& run_dir);
void write_table_csv(std::ostream& out, const ComparisonTable& table);
void write_table_text(std::ostream& out, const ComparisonTable& table);

struct CaseResult {
    std::size_t case_index;  // 1-based
    Vec2 start;
    RunReport report;
};

void write_report_json(std::ostream& out, const Scenario& scenario, std::uint64_t seed,
                       const std::vector<CaseResult>& results);

std::string trajectory_file_name(std::size_t case_index, RunMode mode);

}  // namespace lcbf
