#include "helpers.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

Result lcbf_cli(const std::string& args, const fs::path& scratch) {
    const fs::path out = scratch / "stdout.txt", err = scratch / "stderr.txt";
    const std::string cmd = std::string("\"") + LCBF_CLI_PATH + "\" " + args + " >\"" + out.string() +
                            "\" 2>\"" + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::size_t count_csv(const fs::path& dir, const std::string& suffix) {
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        if (name.rfind("case", 0) == 0 && name.size() > suffix.size() &&
            name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
            ++n;
    }
    return n;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("run all modes on the five-ellipse arena") {
    const fs::path dir = testing::fresh_dir("cli_all");
    const Result r = lcbf_cli("run --scenario " + testing::scenario_path("five_ellipse") +
                                  " --mode all --seed 7 --out \"" + (dir / "out").string() + "\"",
                              dir);
    INFO(r.err);
    CHECK(r.code == 0);
    const fs::path out = dir / "out";
    std::size_t trajectories = 0;
    for (const char* mode : {"ground_truth", "offline", "online_aggregate", "online_instant"})
        for (int c = 1; c <= 10; ++c)
            trajectories += fs::exists(out / ("case" + std::to_string(c) + "_" + mode + ".csv"));
    CHECK(trajectories == 40);
    CHECK(count_csv(out, "_levelset.csv") == 20);
    CHECK(fs::exists(out / "levelset_offline.csv"));
    CHECK(fs::exists(out / "model_offline.csv"));
    const std::string table = slurp(out / "table.csv");
    CHECK(std::count(table.begin(), table.end(), '\n') == 12);
    CHECK(table.find("\naverage,") != std::string::npos);
    CHECK(r.out.find("Average") != std::string::npos);
    const std::string metrics = slurp(out / "metrics.csv");
    CHECK(metrics.rfind("case,mode_a,mode_b,R,F\n", 0) == 0);
    CHECK(std::count(metrics.begin(), metrics.end(), '\n') == 31);
    const auto report = nlohmann::json::parse(slurp(out / "report.json"));
    CHECK(report["runs"].size() == 40);
    CHECK(report["seed"] == 7);
}

TEST_CASE("offline refuses a start inside an obstacle") {
    const fs::path dir = testing::fresh_dir("cli_inside");
    const Result r = lcbf_cli("run --scenario start_inside_obstacle --mode offline --out \"" +
                                  (dir / "out").string() + "\"",
                              dir);
    CHECK(r.code == 1);
    CHECK(r.err.find("start outside learned safe set") != std::string::npos);
}

TEST_CASE("overrides reach the report") {
    const fs::path dir = testing::fresh_dir("cli_override");
    const Result r = lcbf_cli("run --scenario single_circle --mode ground-truth --override control.gamma=2.0 "
                              "--out \"" + (dir / "out").string() + "\"",
                              dir);
    INFO(r.err);
    REQUIRE(r.code == 0);
    const auto report = nlohmann::json::parse(slurp(dir / "out" / "report.json"));
    CHECK(report["control"]["gamma"] == 2.0);
    CHECK(report["runs"][0]["gamma"] == 2.0);
    CHECK_FALSE(fs::exists(dir / "out" / "table.csv"));

    const Result bad = lcbf_cli("run --scenario single_circle --mode ground-truth --override control.gamma=-1 "
                                "--out \"" + (dir / "out").string() + "\"",
                                dir);
    CHECK(bad.code == 1);
    CHECK(bad.err.find("gamma") != std::string::npos);
}

TEST_CASE("eval") {
    const fs::path dir = testing::fresh_dir("cli_eval");
    std::ofstream(dir / "a.csv") << "t,x,y\n0,0,0\n1,1,0.5\n2,2,0.7\n";
    std::ofstream(dir / "one.csv") << "t,x,y\n0,0,0\n";
    const std::string metrics = (dir / "metrics.csv").string();
    const Result same = lcbf_cli("eval \"" + (dir / "a.csv").string() + "\" \"" + (dir / "a.csv").string() +
                                     "\" --metrics \"" + metrics + "\" --case demo",
                                 dir);
    CHECK(same.code == 0);
    CHECK(same.out == "R=1.000000 F=0.000000\n");
    CHECK(slurp(metrics) == "case,mode_a,mode_b,R,F\ndemo,a,a,1,0\n");

    const Result short_file = lcbf_cli("eval \"" + (dir / "a.csv").string() + "\" \"" +
                                           (dir / "one.csv").string() + "\" --metrics \"" + metrics + "\"",
                                       dir);
    CHECK(short_file.code == 1);
    CHECK(short_file.err.find("at least 2 rows") != std::string::npos);
}

TEST_CASE("table on an empty directory") {
    const fs::path dir = testing::fresh_dir("cli_table");
    fs::create_directories(dir / "empty");
    const Result r = lcbf_cli("table \"" + (dir / "empty").string() + "\"", dir);
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "empty" / "table.csv"));
}

TEST_CASE("sdf dump and argument errors") {
    const fs::path dir = testing::fresh_dir("cli_sdf");
    const Result r = lcbf_cli("sdf --scenario single_circle --spacing 0.05 --out \"" + (dir / "sdf.csv").string() +
                                  "\"",
                              dir);
    CHECK(r.code == 0);
    const std::string text = slurp(dir / "sdf.csv");
    CHECK(text.rfind("x,y,sdf\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 65 * 41);

    CHECK(lcbf_cli("run --scenario single_circle --mode sideways", dir).code == 1);
    CHECK(lcbf_cli("run --scenario /nonexistent.toml", dir).code == 1);
    CHECK(lcbf_cli("frobnicate", dir).code == 1);
}

}  // TEST_SUITE
