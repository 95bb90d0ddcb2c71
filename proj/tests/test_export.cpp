#include "helpers.hpp"

#include "lcbf/export.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

using namespace lcbf;
namespace fs = std::filesystem;

namespace {

Trajectory line_trajectory(Vec2 from, Vec2 to, std::size_t n, double dt = 0.02) {
    Trajectory t;
    for (std::size_t k = 0; k < n; ++k) {
        const double s = double(k) / double(n - 1);
        t.t.push_back(double(k) * dt);
        t.states.push_back(from + s * (to - from));
        t.controls.push_back(k + 1 < n ? Vec2((to - from) / (double(n - 1) * dt)) : Vec2::Zero());
        t.barrier_values.push_back(0.5 - 0.1 * s);
        t.true_sdf_values.push_back(0.4);
        t.constraint_active.push_back(k % 3 == 0);
    }
    t.steps = n - 1;
    t.reached_goal = true;
    return t;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

void expect_parse_error(const std::string& text, const std::string& fragment) {
    std::istringstream in(text);
    try {
        parse_trajectory_csv(in, "traj.csv");
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Parse);
        CHECK(std::string(e.what()).find(fragment) != std::string::npos);
    }
}

}  // namespace

TEST_SUITE("export") {

TEST_CASE("trajectory csv round trip") {
    const Trajectory t = line_trajectory({0.1, 0.2}, {1.7, 1.3}, 37);
    std::stringstream buf;
    write_trajectory_csv(buf, t);
    std::string header;
    std::getline(buf, header);
    CHECK(header == kTrajectoryHeader);
    buf.seekg(0);
    const Polyline p = parse_trajectory_csv(buf, "mem");
    REQUIRE(p.size() == t.size());
    for (std::size_t k = 0; k < p.size(); ++k) CHECK((p.points[k] - t.states[k]).norm() < 1e-11);

    const fs::path dir = testing::fresh_dir("export_roundtrip");
    write_trajectory_csv(dir / "a.csv", t);
    CHECK(read_trajectory_csv(dir / "a.csv").size() == t.size());
    CHECK_THROWS_AS(read_trajectory_csv(dir / "missing.csv"), Error);
}

TEST_CASE("columns are located by header name") {
    std::istringstream in("y,x\n1,2\n3,4\n");
    const Polyline p = parse_trajectory_csv(in, "swapped");
    CHECK(p.points[0] == Vec2(2.0, 1.0));
    CHECK(p.points[1] == Vec2(4.0, 3.0));
}

TEST_CASE("malformed trajectories carry row diagnostics") {
    expect_parse_error("t,x,y\n0,1,2\n0.02,1\n", "traj.csv:3: expected 3 fields, got 2");
    expect_parse_error("t,x,y\n0,1,2\n0.02,abc,2\n", "traj.csv:3:");
    expect_parse_error("t,x,y\n0,1,2\n0.02,inf,2\n", "non-finite");
    expect_parse_error("t,x,y\n0,1,2\n", "at least 2 rows, found 1");
    expect_parse_error("", "empty");
    expect_parse_error("t,a,b\n0,1,2\n1,2,3\n", "lacks column 'x'");
}

TEST_CASE("comparison table with absent entries") {
    const fs::path dir = testing::fresh_dir("export_table");
    const Trajectory gt = line_trajectory({0.0, 0.0}, {2.0, 1.0}, 50);
    const Trajectory off = line_trajectory({0.0, 0.1}, {2.0, 1.1}, 70);
    write_trajectory_csv(dir / trajectory_file_name(1, RunMode::GroundTruth), gt);
    write_trajectory_csv(dir / trajectory_file_name(1, RunMode::Offline), off);
    write_trajectory_csv(dir / trajectory_file_name(1, RunMode::OnlineAggregate), gt);
    write_trajectory_csv(dir / trajectory_file_name(2, RunMode::GroundTruth), gt);
    write_trajectory_csv(dir / trajectory_file_name(2, RunMode::OnlineInstant), off);
    std::ofstream(dir / "notes.txt") << "ignored\n";

    const ComparisonTable table = build_comparison_table(dir);
    REQUIRE(table.rows.size() == 2);
    const auto& r1 = table.rows[0];
    CHECK(r1.case_name == "case1");
    CHECK(*r1.r[0] == doctest::Approx(1.0));
    CHECK(*r1.f[0] == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(*r1.r[1] == doctest::Approx(1.0));
    CHECK(*r1.f[1] == 0.0);
    const auto& r2 = table.rows[1];
    CHECK_FALSE(r2.r[0].has_value());
    CHECK(r2.f[1].has_value());  // online falls back to the instant run
    CHECK_FALSE(r2.r[2].has_value());
    CHECK(*table.mean_f[1] == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(*table.mean_f[0] == doctest::Approx(0.1).epsilon(1e-9));

    std::ostringstream csv, text;
    write_table_csv(csv, table);
    write_table_text(text, table);
    CHECK(csv.str().rfind("case,R_offline_vs_ground_truth,R_online_vs_ground_truth,R_offline_vs_online,"
                          "F_offline_vs_ground_truth,F_online_vs_ground_truth,F_offline_vs_online\n",
                          0) == 0);
    CHECK(csv.str().find("case2,absent,") != std::string::npos);
    CHECK(csv.str().find("\naverage,") != std::string::npos);
    CHECK(text.str().find("Average") != std::string::npos);
}

TEST_CASE("empty directory gives an empty table") {
    const fs::path dir = testing::fresh_dir("export_empty");
    const ComparisonTable table = build_comparison_table(dir);
    CHECK(table.rows.empty());
    std::ostringstream csv;
    write_table_csv(csv, table);
    const std::string text = csv.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 1);
    CHECK_THROWS_AS(build_comparison_table(dir / "nope"), Error);
}

TEST_CASE("level-set, sdf and model dumps") {
    const Scenario sc = testing::circle_scenario({1.6, 1.0}, 0.3);
    const SdfBarrier bar(build_sdf_grid(sc, 0.05));
    std::ostringstream out;
    write_levelset_csv(out, bar, sc.workspace, 0.4);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "x,y,h_hat");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 9 * 6);
    CHECK_THROWS_AS(write_levelset_csv(out, bar, sc.workspace, 0.0), Error);

    std::ostringstream sdf;
    write_sdf_csv(sdf, bar.grid());
    CHECK(sdf.str().rfind("x,y,sdf\n", 0) == 0);

    const KernelConfig kc{0.32, 1.0, 0.16};
    const BarrierModel m(KernelNet::make(kc, sc.workspace), {{1.0, 1.0}}, {Label::Unsafe}, {2.5}, 0.75);
    std::ostringstream model;
    write_model_csv(model, m);
    CHECK(model.str() == "kind,x,y,label,alpha\nsupport,1,1,-1,2.5\nbias,,,,0.75\n");
}

TEST_CASE("metrics header is written once") {
    const fs::path dir = testing::fresh_dir("export_metrics");
    append_metrics_csv(dir / "m.csv", {{"case1", "offline", "ground_truth", 0.99, 0.05}});
    append_metrics_csv(dir / "m.csv", {{"case2", "offline", "ground_truth", 0.5, 0.25}});
    CHECK(slurp(dir / "m.csv") ==
          "case,mode_a,mode_b,R,F\ncase1,offline,ground_truth,0.99,0.05\ncase2,offline,ground_truth,0.5,0.25\n");
}

TEST_CASE("report json") {
    Scenario sc = testing::circle_scenario({1.6, 1.0}, 0.3);
    sc.control.gamma = 2.0;
    RunReport r;
    r.mode = RunMode::Offline;
    r.control = sc.control;
    r.trajectory = line_trajectory({0.1, 0.2}, {1.0, 0.2}, 10);
    std::ostringstream out;
    write_report_json(out, sc, 7, {{1, {0.1, 0.2}, r}});
    const auto j = nlohmann::json::parse(out.str());
    CHECK(j["seed"] == 7);
    CHECK(j["control"]["gamma"] == 2.0);
    REQUIRE(j["runs"].size() == 1);
    CHECK(j["runs"][0]["mode"] == "offline");
    CHECK(j["runs"][0]["case"] == 1);
    CHECK(j["runs"][0]["gamma"] == 2.0);
    CHECK(trajectory_file_name(3, RunMode::OnlineAggregate) == "case3_online_aggregate.csv");
}

}  // TEST_SUITE
