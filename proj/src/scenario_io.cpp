#include "lcbf/environment.hpp"

#include <fmt/format.h>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace lcbf {

void SensorConfig::validate() const {
    if (num_beams < 3) throw Error(ErrorKind::Validation, "sensor.num_beams must be >= 3");
    if (!(max_range > 0.0)) throw Error(ErrorKind::Validation, "sensor.max_range must be > 0");
    if (!(noise_sigma >= 0.0))
        throw Error(ErrorKind::Validation, "sensor.noise_sigma must be >= 0");
    if (fov_start.has_value() != fov_end.has_value())
        throw Error(ErrorKind::Validation, "sensor: fov_start and fov_end must be given together");
    if (fov_start && !(*fov_end > *fov_start))
        throw Error(ErrorKind::Validation, "sensor: fov_end must exceed fov_start");
}

double SensorConfig::angular_resolution() const {
    if (fov_start) return (*fov_end - *fov_start) / double(num_beams - 1);
    return 2.0 * std::numbers::pi / double(num_beams);
}

void LearnerConfig::validate() const {
    if (!(sigma2 > 0.0)) throw Error(ErrorKind::Validation, "learner.sigma2 must be > 0");
    if (!(c_plus > 1.0)) throw Error(ErrorKind::Validation, "learner.c_plus must be > 1");
    if (!(c_minus_init >= c_plus))
        throw Error(ErrorKind::Validation, "learner.c_minus_init must be >= c_plus");
    if (!(c_minus_cap >= c_minus_init))
        throw Error(ErrorKind::Validation, "learner.c_minus_cap must be >= c_minus_init");
    if (!(kkt_tolerance > 0.0))
        throw Error(ErrorKind::Validation, "learner.kkt_tolerance must be > 0");
    if (max_iters == 0) throw Error(ErrorKind::Validation, "learner.max_iters must be > 0");
    if (!(offset > 0.0)) throw Error(ErrorKind::Validation, "learner.offset must be > 0");
    if (!(dedup_tol >= 0.0)) throw Error(ErrorKind::Validation, "learner.dedup_tol must be >= 0");
    if (!(vantage_spacing > 0.0))
        throw Error(ErrorKind::Validation, "learner.vantage_spacing must be > 0");
    if (retrain_every < 1) throw Error(ErrorKind::Validation, "learner.retrain_every must be >= 1");
}

void ControlConfig::validate() const {
    if (!(delta > 0.0)) throw Error(ErrorKind::Validation, "control.delta must be > 0");
    if (!(gamma > 0.0)) throw Error(ErrorKind::Validation, "control.gamma must be > 0");
    if (!(dt > 0.0)) throw Error(ErrorKind::Validation, "control.dt must be > 0");
    if (u_max && !(*u_max > 0.0)) throw Error(ErrorKind::Validation, "control.u_max must be > 0");
    if (max_steps == 0) throw Error(ErrorKind::Validation, "control.max_steps must be > 0");
}

namespace {

std::string where(const toml::node& node, const std::string& source) {
    const auto& src = node.source();
    return fmt::format("{}:{}:{}", source, src.begin.line, src.begin.column);
}

[[noreturn]] void field_error(const toml::node& node, const std::string& source,
                              const std::string& field, const std::string& expected) {
    throw Error(ErrorKind::Parse,
                fmt::format("{}: field '{}' must be {}", where(node, source), field, expected));
}

double as_number(const toml::node& node, const std::string& source, const std::string& field) {
    if (auto v = node.value<double>()) return *v;
    field_error(node, source, field, "a number");
}

long long as_integer(const toml::node& node, const std::string& source, const std::string& field) {
    if (auto v = node.value<int64_t>()) return *v;
    field_error(node, source, field, "an integer");
}

Vec2 as_point(const toml::node& node, const std::string& source, const std::string& field) {
    const auto* arr = node.as_array();
    if (!arr || arr->size() != 2) field_error(node, source, field, "a 2-element array [x, y]");
    return {as_number(*arr->get(0), source, field), as_number(*arr->get(1), source, field)};
}

std::string as_string(const toml::node& node, const std::string& source, const std::string& field) {
    if (auto v = node.value<std::string>()) return *v;
    field_error(node, source, field, "a string");
}

void set_workspace(Workspace& ws, const toml::node& node, const std::string& source) {
    const auto* tbl = node.as_table();
    if (!tbl) field_error(node, source, "workspace", "a table {x_min, x_max, y_min, y_max}");
    int seen = 0;
    for (const auto& [key, value] : *tbl) {
        const std::string k(key.str());
        double* slot = k == "x_min"   ? &ws.x_min
                       : k == "x_max" ? &ws.x_max
                       : k == "y_min" ? &ws.y_min
                       : k == "y_max" ? &ws.y_max
                                      : nullptr;
        if (!slot)
            throw Error(ErrorKind::Parse,
                        fmt::format("{}: unknown workspace field '{}'", where(value, source), k));
        *slot = as_number(value, source, "workspace." + k);
        ++seen;
    }
    if (seen != 4)
        throw Error(ErrorKind::Parse, fmt::format("{}: workspace needs x_min, x_max, y_min, y_max",
                                                  where(node, source)));
}

void set_sensor(SensorConfig& s, const std::string& key, const toml::node& v,
                const std::string& source) {
    const std::string field = "sensor." + key;
    if (key == "num_beams") s.num_beams = static_cast<int>(as_integer(v, source, field));
    else if (key == "max_range") s.max_range = as_number(v, source, field);
    else if (key == "noise_sigma") s.noise_sigma = as_number(v, source, field);
    else if (key == "fov_start") s.fov_start = as_number(v, source, field);
    else if (key == "fov_end") s.fov_end = as_number(v, source, field);
    else throw Error(ErrorKind::Parse, fmt::format("{}: unknown field '{}'", where(v, source), field));
}

void set_learner(LearnerConfig& l, const std::string& key, const toml::node& v,
                 const std::string& source) {
    const std::string field = "learner." + key;
    if (key == "grid_spacing") l.grid_spacing = as_number(v, source, field);
    else if (key == "sigma1") l.sigma1 = as_number(v, source, field);
    else if (key == "sigma2") l.sigma2 = as_number(v, source, field);
    else if (key == "c_plus") l.c_plus = as_number(v, source, field);
    else if (key == "c_minus_init") l.c_minus_init = as_number(v, source, field);
    else if (key == "c_minus_cap") l.c_minus_cap = as_number(v, source, field);
    else if (key == "kkt_tolerance") l.kkt_tolerance = as_number(v, source, field);
    else if (key == "max_iters") {
        const auto n = as_integer(v, source, field);
        if (n <= 0) field_error(v, source, field, "a positive integer");
        l.max_iters = static_cast<std::size_t>(n);
    } else if (key == "offset") l.offset = as_number(v, source, field);
    else if (key == "dedup_tol") l.dedup_tol = as_number(v, source, field);
    else if (key == "vantage_spacing") l.vantage_spacing = as_number(v, source, field);
    else if (key == "retrain_every") l.retrain_every = static_cast<int>(as_integer(v, source, field));
    else throw Error(ErrorKind::Parse, fmt::format("{}: unknown field '{}'", where(v, source), field));
}

void set_control(ControlConfig& c, const std::string& key, const toml::node& v,
                 const std::string& source) {
    const std::string field = "control." + key;
    if (key == "delta") c.delta = as_number(v, source, field);
    else if (key == "gamma") c.gamma = as_number(v, source, field);
    else if (key == "dt") c.dt = as_number(v, source, field);
    else if (key == "u_max") c.u_max = as_number(v, source, field);
    else if (key == "max_steps") {
        const auto n = as_integer(v, source, field);
        if (n <= 0) field_error(v, source, field, "a positive integer");
        c.max_steps = static_cast<std::size_t>(n);
    } else throw Error(ErrorKind::Parse, fmt::format("{}: unknown field '{}'", where(v, source), field));
}

template <typename Setter>
void set_section(const toml::node& node, const std::string& section, const std::string& source,
                 Setter&& setter) {
    const auto* tbl = node.as_table();
    if (!tbl) field_error(node, source, section, "a table");
    for (const auto& [key, value] : *tbl) setter(std::string(key.str()), value);
}

Obstacle parse_obstacle(const toml::table& tbl, const std::string& source) {
    const auto* kind_node = tbl.get("kind");
    if (!kind_node)
        throw Error(ErrorKind::Parse,
                    fmt::format("{}: obstacle is missing 'kind'", where(tbl, source)));
    const std::string kind = as_string(*kind_node, source, "obstacle.kind");
    auto require = [&](const char* key) -> const toml::node& {
        const auto* n = tbl.get(key);
        if (!n)
            throw Error(ErrorKind::Parse, fmt::format("{}: {} obstacle is missing '{}'",
                                                      where(tbl, source), kind, key));
        return *n;
    };
    auto allow_only = [&](std::initializer_list<std::string_view> keys) {
        for (const auto& [key, value] : tbl) {
            if (std::find(keys.begin(), keys.end(), key.str()) == keys.end())
                throw Error(ErrorKind::Parse, fmt::format("{}: unknown {} obstacle field '{}'",
                                                          where(value, source), kind, key.str()));
        }
    };
    if (kind == "circle") {
        allow_only({"kind", "center", "radius"});
        return Obstacle(Circle{as_point(require("center"), source, "obstacle.center"),
                               as_number(require("radius"), source, "obstacle.radius")});
    }
    if (kind == "ellipse") {
        allow_only({"kind", "center", "semi_axes", "rotation"});
        const double rotation =
            tbl.get("rotation") ? as_number(*tbl.get("rotation"), source, "obstacle.rotation") : 0.0;
        return Obstacle(Ellipse{as_point(require("center"), source, "obstacle.center"),
                                as_point(require("semi_axes"), source, "obstacle.semi_axes"),
                                rotation});
    }
    if (kind == "polygon") {
        allow_only({"kind", "vertices"});
        const auto& vnode = require("vertices");
        const auto* arr = vnode.as_array();
        if (!arr) field_error(vnode, source, "obstacle.vertices", "an array of [x, y] points");
        Polygon poly;
        for (const auto& p : *arr) poly.vertices.push_back(as_point(p, source, "obstacle.vertices"));
        return Obstacle(std::move(poly));
    }
    throw Error(ErrorKind::Parse,
                fmt::format("{}: obstacle kind must be \"circle\", \"ellipse\" or \"polygon\", got "
                            "\"{}\"",
                            where(*kind_node, source), kind));
}

// Assigns one top-level key or one key inside a [sensor]/[learner]/[control] table.
void set_field(Scenario& sc, const std::string& section, const std::string& key,
               const toml::node& v, const std::string& source) {
    if (section == "sensor") return set_sensor(sc.sensor, key, v, source);
    if (section == "learner") return set_learner(sc.learner, key, v, source);
    if (section == "control") return set_control(sc.control, key, v, source);
    if (!section.empty())
        throw Error(ErrorKind::Parse, fmt::format("{}: unknown table '{}'", where(v, source), section));
    if (key == "name") sc.name = as_string(v, source, key);
    else if (key == "workspace") set_workspace(sc.workspace, v, source);
    else if (key == "goal") sc.goal = as_point(v, source, key);
    else if (key == "goal_radius") sc.goal_radius = as_number(v, source, key);
    else throw Error(ErrorKind::Parse, fmt::format("{}: unknown field '{}'", where(v, source), key));
}

toml::table parse_toml(const std::string& text, const std::string& source) {
    try {
        return toml::parse(text, std::string_view(source));
    } catch (const toml::parse_error& err) {
        const auto& b = err.source().begin;
        throw Error(ErrorKind::Parse,
                    fmt::format("{}:{}:{}: {}", source, b.line, b.column, err.description()));
    }
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& source_name) {
    const toml::table doc = parse_toml(text, source_name);
    Scenario sc;
    bool have_goal = false;
    for (const auto& [key, value] : doc) {
        const std::string k(key.str());
        if (k == "obstacle") {
            const auto* arr = value.as_array();
            if (!arr) field_error(value, source_name, "obstacle", "an array of tables [[obstacle]]");
            for (const auto& item : *arr) {
                const auto* tbl = item.as_table();
                if (!tbl) field_error(item, source_name, "obstacle", "a table");
                try {
                    sc.obstacles.push_back(parse_obstacle(*tbl, source_name));
                } catch (const Error& e) {
                    if (e.kind() != ErrorKind::Validation) throw;
                    throw Error(ErrorKind::Validation,
                                fmt::format("{}: {}", where(*tbl, source_name), e.what()));
                }
            }
        } else if (k == "start") {
            const auto* arr = value.as_array();
            if (!arr) field_error(value, source_name, "start", "an array of tables [[start]]");
            for (const auto& item : *arr) {
                const auto* tbl = item.as_table();
                const toml::node* pos = tbl ? tbl->get("position") : nullptr;
                if (!pos || tbl->size() != 1)
                    field_error(item, source_name, "start", "a table with only 'position = [x, y]'");
                sc.starts.push_back(as_point(*pos, source_name, "start.position"));
            }
        } else if (k == "sensor" || k == "learner" || k == "control") {
            set_section(value, k, source_name, [&](const std::string& sub, const toml::node& v) {
                set_field(sc, k, sub, v, source_name);
            });
        } else {
            if (k == "goal") have_goal = true;
            set_field(sc, "", k, value, source_name);
        }
    }
    if (!have_goal) throw Error(ErrorKind::Parse, fmt::format("{}: missing 'goal'", source_name));
    if (sc.name.empty()) sc.name = "scenario";
    sc.validate();
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open scenario file '{}'", path));
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path);
}

void apply_override(Scenario& scenario, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw Error(ErrorKind::InvalidArgument,
                    fmt::format("override '{}' is not of the form key=value", assignment));
    const std::string path = assignment.substr(0, eq);
    const std::string rhs = assignment.substr(eq + 1);
    const auto dot = path.find('.');
    const std::string section = dot == std::string::npos ? "" : path.substr(0, dot);
    const std::string key = dot == std::string::npos ? path : path.substr(dot + 1);

    const toml::table doc = parse_toml("value = " + rhs, "override '" + assignment + "'");
    const toml::node* node = doc.get("value");
    set_field(scenario, section, key, *node, "override");
    scenario.validate();
}

}  // namespace lcbf
