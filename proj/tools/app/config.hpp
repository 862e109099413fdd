#pragma once

#include "impulse/band.hpp"
#include "impulse/forex.hpp"
#include "impulse/labor.hpp"
#include "impulse/simulator.hpp"
#include "impulse/threshold.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace impulse::app {

enum class ModelKind { forex, labor };

ModelKind parse_model_kind(const std::string& name);
std::string to_string(ModelKind kind);

struct OutputConfig {
    std::optional<std::filesystem::path> dir;
    std::size_t curve_points = 401;
    std::optional<double> curve_min;
    std::optional<double> curve_max;
};

/// Everything a subcommand needs. Built from defaults, then a config file,
/// then command-line overrides, in that order.
struct RunConfig {
    ModelKind model = ModelKind::forex;
    ForexParams forex;
    LaborParams labor;
    ForexRVariant r_variant = ForexRVariant::exact;
    std::optional<StateInterval> window;
    ThresholdSolverConfig threshold_solver;
    BandSolverConfig band_solver;
    SimConfig sim;
    std::vector<double> x0;
    OutputConfig output;

    double delay() const { return model == ModelKind::forex ? forex.delay : labor.delay; }
    void set_delay(double value);
    /// Validates model parameters, windows and tolerances.
    void validate() const;
};

/// Parses a JSON or TOML document (chosen by extension, .toml or anything else
/// as JSON) into a JSON tree.
nlohmann::json read_document(const std::filesystem::path& path);

/// Applies a config tree on top of `config`. Unknown keys are rejected.
void apply_document(RunConfig& config, const nlohmann::json& doc);

/// Sets one named model parameter using the config-file key (forex: c, lambda,
/// alpha, delta; labor: b, r, mu, sigma, delta, A, w, delta_lag, c1..c4).
void set_model_param(RunConfig& config, const std::string& key, double value);
double get_model_param(const RunConfig& config, const std::string& key);
std::vector<std::string> model_param_keys(ModelKind kind);

nlohmann::json params_to_json(const RunConfig& config);

ThresholdProblem make_threshold_problem(const RunConfig& config);
BandProblem make_band_problem(const RunConfig& config);

}  // namespace impulse::app
