#include "lcbf/export.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

namespace lcbf {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::trunc) {
    std::ofstream out(path, std::ios::out | mode);
    if (!out) throw Error(ErrorKind::Io, fmt::format("cannot open {} for writing", path.string()));
    return out;
}

std::string num(double v) { return fmt::format("{:.12g}", v); }

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::optional<double> parse_double(const std::string& text) {
    const std::string s = trim(text);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace

std::string trajectory_file_name(std::size_t case_index, RunMode mode) {
    return fmt::format("case{}_{}.csv", case_index, to_string(mode));
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    out << kTrajectoryHeader << '\n';
    for (std::size_t k = 0; k < traj.size(); ++k) {
        out << num(traj.t[k]) << ',' << num(traj.states[k].x()) << ',' << num(traj.states[k].y())
            << ',' << num(traj.controls[k].x()) << ',' << num(traj.controls[k].y()) << ','
            << num(traj.barrier_values[k]) << ',' << num(traj.true_sdf_values[k]) << ','
            << int(traj.constraint_active[k]) << '\n';
    }
}

void write_trajectory_csv(const fs::path& path, const Trajectory& traj) {
    auto out = open_out(path);
    write_trajectory_csv(out, traj);
}

Polyline parse_trajectory_csv(std::istream& in, const std::string& source_name) {
    std::string line;
    std::size_t row = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++row;
        if (!trim(line).empty()) {
            header = split(line);
            break;
        }
    }
    if (header.empty()) throw Error(ErrorKind::Parse, fmt::format("{}: empty trajectory file", source_name));
    for (auto& h : header) h = trim(h);
    const auto col = [&](const char* name) -> std::size_t {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw Error(ErrorKind::Parse,
                        fmt::format("{}:{}: header lacks column '{}'", source_name, row, name));
        return std::size_t(it - header.begin());
    };
    const std::size_t ix = col("x"), iy = col("y");

    Polyline poly;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size())
            throw Error(ErrorKind::Parse, fmt::format("{}:{}: expected {} fields, got {}", source_name,
                                                      row, header.size(), cells.size()));
        const auto x = parse_double(cells[ix]);
        const auto y = parse_double(cells[iy]);
        if (!x || !y)
            throw Error(ErrorKind::Parse,
                        fmt::format("{}:{}: non-numeric or non-finite x/y value", source_name, row));
        poly.points.emplace_back(*x, *y);
    }
    if (poly.points.size() < 2)
        throw Error(ErrorKind::Parse, fmt::format("{}: trajectory needs at least 2 rows, found {}",
                                                  source_name, poly.points.size()));
    return poly;
}

Polyline read_trajectory_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open {}", path.string()));
    return parse_trajectory_csv(in, path.string());
}

void write_levelset_csv(std::ostream& out, const Barrier& barrier, const Workspace& ws,
                        double spacing) {
    if (!(spacing > 0.0)) throw Error(ErrorKind::InvalidArgument, "level-set spacing must be > 0");
    const auto nx = static_cast<std::size_t>(std::floor(ws.width() / spacing + 1e-9)) + 1;
    const auto ny = static_cast<std::size_t>(std::floor(ws.height() / spacing + 1e-9)) + 1;
    out << "x,y,h_hat\n";
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const Vec2 p(ws.x_min + double(i) * spacing, ws.y_min + double(j) * spacing);
            out << num(p.x()) << ',' << num(p.y()) << ',' << num(barrier.value(p)) << '\n';
        }
    }
}

void write_sdf_csv(std::ostream& out, const SignedDistanceGrid& grid) {
    out << "x,y,sdf\n";
    for (std::size_t j = 0; j < grid.ny(); ++j) {
        for (std::size_t i = 0; i < grid.nx(); ++i) {
            out << num(grid.origin().x() + double(i) * grid.spacing()) << ','
                << num(grid.origin().y() + double(j) * grid.spacing()) << ',' << num(grid.at(i, j))
                << '\n';
        }
    }
}

void write_model_csv(std::ostream& out, const BarrierModel& model) {
    out << "kind,x,y,label,alpha\n";
    for (std::size_t i = 0; i < model.support_count(); ++i) {
        const Vec2& p = model.support_points()[i];
        out << "support," << num(p.x()) << ',' << num(p.y()) << ',' << sign(model.support_labels()[i])
            << ',' << num(model.alphas()[i]) << '\n';
    }
    out << "bias,,,," << num(model.bias()) << '\n';
}

void append_metrics_csv(const fs::path& path, const std::vector<MetricsRow>& rows) {
    std::error_code ec;
    const bool fresh = !fs::exists(path, ec) || fs::file_size(path, ec) == 0;
    auto out = open_out(path, std::ios::app);
    if (fresh) out << kMetricsHeader << '\n';
    for (const auto& r : rows)
        out << r.case_name << ',' << r.mode_a << ',' << r.mode_b << ',' << num(r.r) << ',' << num(r.f)
            << '\n';
}

ComparisonTable build_comparison_table(const fs::path& run_dir) {
    if (!fs::is_directory(run_dir))
        throw Error(ErrorKind::Io, fmt::format("{} is not a directory", run_dir.string()));
    static const std::regex pattern(R"(case(\d+)_(ground_truth|offline|online_aggregate|online_instant)\.csv)");
    std::map<std::size_t, std::map<std::string, fs::path>> cases;
    for (const auto& entry : fs::directory_iterator(run_dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        std::smatch m;
        if (std::regex_match(name, m, pattern))
            cases[std::stoul(m[1].str())][m[2].str()] = entry.path();
    }

    ComparisonTable table;
    double sum_r[3] = {0, 0, 0}, sum_f[3] = {0, 0, 0};
    std::size_t count[3] = {0, 0, 0};
    for (const auto& [index, files] : cases) {
        ComparisonTable::Row row;
        row.case_name = fmt::format("case{}", index);
        const auto load = [&](const char* mode) -> std::optional<Polyline> {
            const auto it = files.find(mode);
            if (it == files.end()) return std::nullopt;
            return read_trajectory_csv(it->second);
        };
        const auto gt = load("ground_truth");
        const auto off = load("offline");
        auto on = load("online_aggregate");
        if (!on) on = load("online_instant");
        const std::optional<Polyline>* pairs[3][2] = {{&off, &gt}, {&on, &gt}, {&off, &on}};
        for (int c = 0; c < 3; ++c) {
            const auto& a = *pairs[c][0];
            const auto& b = *pairs[c][1];
            if (!a || !b) continue;
            row.r[c] = correlation(*a, *b);
            row.f[c] = frechet_distance(resample_by_arclength(*a, kDefaultResampleCount),
                                        resample_by_arclength(*b, kDefaultResampleCount));
            sum_r[c] += *row.r[c];
            sum_f[c] += *row.f[c];
            ++count[c];
        }
        table.rows.push_back(std::move(row));
    }
    for (int c = 0; c < 3; ++c) {
        if (count[c] == 0) continue;
        table.mean_r[c] = sum_r[c] / double(count[c]);
        table.mean_f[c] = sum_f[c] / double(count[c]);
    }
    return table;
}

namespace {

std::string cell(const std::optional<double>& v, int precision) {
    return v ? fmt::format("{:.{}f}", *v, precision) : std::string("absent");
}

}  // namespace

void write_table_csv(std::ostream& out, const ComparisonTable& table) {
    out << "case";
    for (const char* c : kTableColumns) out << ",R_" << c;
    for (const char* c : kTableColumns) out << ",F_" << c;
    out << '\n';
    const auto emit = [&](const std::string& name, const std::optional<double>* r,
                          const std::optional<double>* f) {
        out << name;
        for (int c = 0; c < 3; ++c) out << ',' << cell(r[c], 6);
        for (int c = 0; c < 3; ++c) out << ',' << cell(f[c], 6);
        out << '\n';
    };
    for (const auto& row : table.rows) emit(row.case_name, row.r, row.f);
    if (!table.rows.empty()) emit("average", table.mean_r, table.mean_f);
}

void write_table_text(std::ostream& out, const ComparisonTable& table) {
    static const char* short_names[3] = {"off/gt", "on/gt", "off/on"};
    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> head{"case"};
    for (const char* s : short_names) head.push_back(fmt::format("R {}", s));
    for (const char* s : short_names) head.push_back(fmt::format("F {}", s));
    grid.push_back(head);
    const auto add = [&](const std::string& name, const std::optional<double>* r,
                         const std::optional<double>* f) {
        std::vector<std::string> line{name};
        for (int c = 0; c < 3; ++c) line.push_back(cell(r[c], 4));
        for (int c = 0; c < 3; ++c) line.push_back(cell(f[c], 4));
        grid.push_back(std::move(line));
    };
    for (const auto& row : table.rows) add(row.case_name, row.r, row.f);
    if (!table.rows.empty()) add("Average", table.mean_r, table.mean_f);

    std::vector<std::size_t> width(head.size(), 0);
    for (const auto& line : grid)
        for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
    for (const auto& line : grid) {
        for (std::size_t c = 0; c < line.size(); ++c) {
            if (c == 0) out << fmt::format("{:<{}}", line[c], width[c]);
            else out << fmt::format("  {:>{}}", line[c], width[c]);
        }
        out << '\n';
    }
}

void write_report_json(std::ostream& out, const Scenario& scenario, std::uint64_t seed,
                       const std::vector<CaseResult>& results) {
    nlohmann::ordered_json doc;
    doc["scenario"] = scenario.name;
    doc["seed"] = seed;
    doc["control"] = {{"delta", scenario.control.delta},
                      {"gamma", scenario.control.gamma},
                      {"dt", scenario.control.dt},
                      {"max_steps", scenario.control.max_steps}};
    if (scenario.control.u_max) doc["control"]["u_max"] = *scenario.control.u_max;
    doc["runs"] = nlohmann::ordered_json::array();
    for (const auto& r : results) {
        const RunReport& rep = r.report;
        nlohmann::ordered_json run;
        run["case"] = r.case_index;
        run["start"] = {r.start.x(), r.start.y()};
        run["mode"] = to_string(rep.mode);
        run["gamma"] = rep.control.gamma;
        run["reached_goal"] = rep.trajectory.reached_goal;
        run["steps"] = rep.trajectory.steps;
        run["training_set_size"] = rep.training_set_size;
        run["retrain_count"] = rep.retrain_count;
        run["safety_violations"] = rep.safety_violations;
        run["unconstrained_steps"] = rep.unconstrained_steps;
        run["infeasible_steps"] = rep.infeasible_steps;
        run["min_h_hat"] = rep.min_barrier;
        run["min_true_sdf"] = rep.min_true_sdf;
        run["wall_time"] = rep.wall_time;
        if (rep.final_model) {
            const auto& d = rep.final_model->diagnostics();
            run["svm"] = {{"support_vectors", rep.final_model->support_count()},
                          {"iterations", d.iterations},
                          {"escalations", d.escalations},
                          {"c_minus", d.c_minus},
                          {"converged", d.converged},
                          {"negative_margin_violations", d.negative_margin_violations}};
        }
        doc["runs"].push_back(std::move(run));
    }
    out << doc.dump(2) << '\n';
}

}  // namespace lcbf
