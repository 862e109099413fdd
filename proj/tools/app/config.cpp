#include "config.hpp"

#include "impulse/error.hpp"

#include "toml.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace impulse::app {
namespace {

using nlohmann::json;

json toml_to_json(const toml::node& node) {
    if (const auto* table = node.as_table()) {
        json out = json::object();
        for (const auto& [key, value] : *table) out[std::string(key.str())] = toml_to_json(value);
        return out;
    }
    if (const auto* array = node.as_array()) {
        json out = json::array();
        for (const auto& value : *array) out.push_back(toml_to_json(value));
        return out;
    }
    if (const auto* v = node.as_integer()) return v->get();
    if (const auto* v = node.as_floating_point()) return v->get();
    if (const auto* v = node.as_boolean()) return v->get();
    if (const auto* v = node.as_string()) return v->get();
    fail(ErrorKind::Configuration, "unsupported TOML value (dates and times are not accepted)");
}

double number(const json& value, const std::string& where) {
    require(value.is_number(), ErrorKind::Configuration, where + " must be a number");
    return value.get<double>();
}

std::size_t count(const json& value, const std::string& where) {
    require(value.is_number_integer() && value.get<long long>() > 0, ErrorKind::Configuration,
            where + " must be a positive integer");
    return value.get<std::size_t>();
}

bool boolean(const json& value, const std::string& where) {
    require(value.is_boolean(), ErrorKind::Configuration, where + " must be true or false");
    return value.get<bool>();
}

std::string text(const json& value, const std::string& where) {
    require(value.is_string(), ErrorKind::Configuration, where + " must be a string");
    return value.get<std::string>();
}

void require_object(const json& value, const std::string& where) {
    require(value.is_object(), ErrorKind::Configuration, where + " must be a table/object");
}

[[noreturn]] void unknown_key(const std::string& section, const std::string& key) {
    fail(ErrorKind::Configuration, "unknown key '" + key + "' in [" + section + "]");
}

StateInterval interval(const json& value, const std::string& where) {
    require(value.is_array() && value.size() == 2, ErrorKind::Configuration, where + " must be [lower, upper]");
    return {number(value[0], where), number(value[1], where)};
}

void apply_solver(RunConfig& config, const json& doc) {
    require_object(doc, "solver");
    for (const auto& [key, value] : doc.items()) {
        const std::string where = "solver." + key;
        if (key == "window") config.window = interval(value, where);
        else if (key == "r_variant") config.r_variant = parse_forex_r_variant(text(value, where));
        else if (key == "b_scan_points") config.threshold_solver.b_scan_points = count(value, where);
        else if (key == "a_grid_points") config.threshold_solver.a_grid_points = count(value, where);
        else if (key == "a_tolerance") config.threshold_solver.a_tolerance = number(value, where);
        else if (key == "residual_tolerance") {
            config.threshold_solver.residual_tolerance = number(value, where);
            config.band_solver.residual_tolerance = number(value, where);
        }
        else if (key == "majorant_points") config.threshold_solver.majorant_points = count(value, where);
        else if (key == "gamma_tolerance") config.threshold_solver.gamma_tolerance = number(value, where);
        else if (key == "pd_grid_points") config.band_solver.pd_grid_points = count(value, where);
        else if (key == "qc_grid_points") config.band_solver.qc_grid_points = count(value, where);
        else if (key == "outer_x_tolerance") config.band_solver.outer_x_tolerance = number(value, where);
        else if (key == "reference_state") config.band_solver.reference_state = number(value, where);
        else unknown_key("solver", key);
    }
}

void apply_simulation(RunConfig& config, const json& doc) {
    require_object(doc, "simulation");
    for (const auto& [key, value] : doc.items()) {
        const std::string where = "simulation." + key;
        if (key == "paths") config.sim.n_paths = count(value, where);
        else if (key == "dt") config.sim.dt = number(value, where);
        else if (key == "horizon") config.sim.horizon = number(value, where);
        else if (key == "seed") {
            require(value.is_number_unsigned(), ErrorKind::Configuration, where + " must be a non-negative integer");
            config.sim.seed = value.get<std::uint64_t>();
        }
        else if (key == "threads") config.sim.threads = static_cast<unsigned>(count(value, where));
        else if (key == "bridge_correction") config.sim.bridge_correction = boolean(value, where);
        else if (key == "antithetic") config.sim.antithetic = boolean(value, where);
        else if (key == "x0") {
            config.x0.clear();
            if (value.is_array())
                for (const auto& x : value) config.x0.push_back(number(x, where));
            else
                config.x0.push_back(number(value, where));
        }
        else unknown_key("simulation", key);
    }
}

void apply_output(RunConfig& config, const json& doc) {
    require_object(doc, "output");
    for (const auto& [key, value] : doc.items()) {
        const std::string where = "output." + key;
        if (key == "dir") config.output.dir = text(value, where);
        else if (key == "curve_points") config.output.curve_points = count(value, where);
        else if (key == "curve_min") config.output.curve_min = number(value, where);
        else if (key == "curve_max") config.output.curve_max = number(value, where);
        else unknown_key("output", key);
    }
}

}  // namespace

ModelKind parse_model_kind(const std::string& name) {
    if (name == "forex") return ModelKind::forex;
    if (name == "labor") return ModelKind::labor;
    fail(ErrorKind::Configuration, "unknown model '" + name + "' (expected forex or labor)");
}

std::string to_string(ModelKind kind) { return kind == ModelKind::forex ? "forex" : "labor"; }

void RunConfig::set_delay(double value) {
    if (model == ModelKind::forex) forex.delay = value;
    else labor.delay = value;
}

void RunConfig::validate() const {
    if (model == ModelKind::forex) forex.validate();
    else labor.validate();
    if (window) {
        require(window->lower < window->upper, ErrorKind::Configuration, "solver.window must have lower < upper");
        if (model == ModelKind::labor)
            require(window->lower > 0.0, ErrorKind::Configuration, "labor window must lie in (0, inf)");
    }
    require(threshold_solver.residual_tolerance > 0.0 && threshold_solver.a_tolerance > 0.0 &&
                threshold_solver.gamma_tolerance > 0.0 && band_solver.residual_tolerance > 0.0 &&
                band_solver.outer_x_tolerance > 0.0,
            ErrorKind::Configuration, "solver tolerances must be positive");
    require(output.curve_points >= 2, ErrorKind::Configuration, "output.curve_points must be at least 2");
    if (output.curve_min && output.curve_max)
        require(*output.curve_min < *output.curve_max, ErrorKind::Configuration, "curve_min must be below curve_max");
}

json read_document(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorKind::Configuration, "cannot open config file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    if (path.extension() == ".toml") {
        try {
            return toml_to_json(toml::parse(buffer.str(), path.string()));
        } catch (const toml::parse_error& e) {
            std::ostringstream msg;
            msg << path.string() << ": " << e.description() << " at line " << e.source().begin.line;
            fail(ErrorKind::Configuration, msg.str());
        }
    }
    try {
        return json::parse(buffer.str());
    } catch (const json::parse_error& e) {
        fail(ErrorKind::Configuration, path.string() + ": " + e.what());
    }
}

void apply_document(RunConfig& config, const json& doc) {
    require_object(doc, "config");
    if (doc.contains("model")) config.model = parse_model_kind(text(doc["model"], "model"));
    for (const auto& [key, value] : doc.items()) {
        if (key == "model" || key == "schema_version") continue;
        if (key == "params") {
            require_object(value, "params");
            for (const auto& [name, v] : value.items()) set_model_param(config, name, number(v, "params." + name));
        }
        else if (key == "solver") apply_solver(config, value);
        else if (key == "simulation") apply_simulation(config, value);
        else if (key == "output") apply_output(config, value);
        else unknown_key("config", key);
    }
}

std::vector<std::string> model_param_keys(ModelKind kind) {
    if (kind == ModelKind::forex) return {"c", "lambda", "alpha", "delta"};
    return {"b", "r", "mu", "sigma", "delta", "A", "w", "delta_lag", "c1", "c2", "c3", "c4"};
}

namespace {

double* param_slot(RunConfig& config, const std::string& key) {
    if (config.model == ModelKind::forex) {
        auto& p = config.forex;
        static const std::map<std::string, double ForexParams::*> slots{{"c", &ForexParams::fixed_cost},
                                                                        {"lambda", &ForexParams::proportional_cost},
                                                                        {"alpha", &ForexParams::discount},
                                                                        {"delta", &ForexParams::delay}};
        const auto it = slots.find(key);
        return it == slots.end() ? nullptr : &(p.*(it->second));
    }
    auto& p = config.labor;
    static const std::map<std::string, double LaborParams::*> slots{
        {"b", &LaborParams::demand_drift}, {"r", &LaborParams::rate},          {"mu", &LaborParams::mu},
        {"sigma", &LaborParams::sigma},    {"delta", &LaborParams::quit_rate}, {"A", &LaborParams::productivity},
        {"w", &LaborParams::wage},         {"delta_lag", &LaborParams::delay}, {"c1", &LaborParams::c1},
        {"c2", &LaborParams::c2},          {"c3", &LaborParams::c3},           {"c4", &LaborParams::c4}};
    const auto it = slots.find(key);
    return it == slots.end() ? nullptr : &(p.*(it->second));
}

}  // namespace

void set_model_param(RunConfig& config, const std::string& key, double value) {
    double* slot = param_slot(config, key);
    require(slot != nullptr, ErrorKind::Configuration,
            "unknown " + to_string(config.model) + " parameter '" + key + "'");
    *slot = value;
}

double get_model_param(const RunConfig& config, const std::string& key) {
    double* slot = param_slot(const_cast<RunConfig&>(config), key);
    require(slot != nullptr, ErrorKind::Configuration,
            "unknown " + to_string(config.model) + " parameter '" + key + "'");
    return *slot;
}

json params_to_json(const RunConfig& config) {
    json out = json::object();
    for (const auto& key : model_param_keys(config.model)) out[key] = get_model_param(config, key);
    return out;
}

ThresholdProblem make_threshold_problem(const RunConfig& config) {
    require(config.model == ModelKind::forex, ErrorKind::Configuration,
            "the threshold solver needs a one-sided model (forex); got " + to_string(config.model));
    const auto fx = config.window ? build_forex(config.forex, config.r_variant, *config.window)
                                  : build_forex(config.forex, config.r_variant);
    return ThresholdProblem(fx.model, fx.cost, config.threshold_solver);
}

BandProblem make_band_problem(const RunConfig& config) {
    require(config.model == ModelKind::labor, ErrorKind::Configuration,
            "the band solver needs a two-sided model (labor); got " + to_string(config.model));
    const auto lm = config.window ? build_labor(config.labor, *config.window) : build_labor(config.labor);
    return BandProblem(lm.model, lm.cost, config.band_solver);
}

}  // namespace impulse::app
