#include "commands.hpp"

#include "config.hpp"

#include "impulse/numerics.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <thread>

namespace impulse::app {
namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

/// Flags shared by every subcommand. Unset optionals leave the config alone.
struct Overrides {
    std::string config_path;
    std::string model;
    std::string r_variant;
    std::map<std::string, std::optional<double>> params;
    std::optional<double> delay;
    std::vector<double> window;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<double> dt;
    std::optional<double> horizon;
    std::optional<unsigned> threads;
    std::vector<double> x0;
    bool no_bridge = false;
    bool no_antithetic = false;
    std::string out;
    std::optional<std::size_t> curve_points;
};

// flag name -> (model, config key)
const std::vector<std::tuple<std::string, ModelKind, std::string, std::string>>& param_flags() {
    static const std::vector<std::tuple<std::string, ModelKind, std::string, std::string>> flags{
        {"--c", ModelKind::forex, "c", "fixed intervention cost"},
        {"--lambda", ModelKind::forex, "lambda", "proportional intervention cost"},
        {"--alpha", ModelKind::forex, "alpha", "discount rate"},
        {"--b", ModelKind::labor, "b", "demand drift"},
        {"--r", ModelKind::labor, "r", "interest rate"},
        {"--mu", ModelKind::labor, "mu", "monopoly exponent in (0,1)"},
        {"--sigma", ModelKind::labor, "sigma", "demand volatility"},
        {"--quit-rate", ModelKind::labor, "delta", "quit rate"},
        {"--A", ModelKind::labor, "A", "productivity"},
        {"--w", ModelKind::labor, "w", "wage"},
        {"--c1", ModelKind::labor, "c1", "hiring cost per worker"},
        {"--c2", ModelKind::labor, "c2", "hiring cost proportional to current labor"},
        {"--c3", ModelKind::labor, "c3", "firing cost per worker"},
        {"--c4", ModelKind::labor, "c4", "firing cost proportional to current labor"},
    };
    return flags;
}

void add_common(CLI::App* cmd, Overrides& o, bool with_model, bool with_sim) {
    cmd->add_option("--out", o.out, "output directory for summary and CSV files");
    if (!with_model) return;
    cmd->add_option("--config", o.config_path, "JSON or TOML config file (flags override it)")->check(CLI::ExistingFile);
    cmd->add_option("--model", o.model, "model name: forex or labor");
    cmd->add_option("--r-variant", o.r_variant, "forex delayed-cost formula: exact or printed");
    for (const auto& [flag, kind, key, help] : param_flags())
        cmd->add_option(flag, o.params[flag], help + " (" + to_string(kind) + ")");
    cmd->add_option("--delta", o.delay, "implementation delay");
    cmd->add_option("--window", o.window, "computational window: lower upper")->expected(2);
    cmd->add_option("--curve-points", o.curve_points, "samples in curve.csv")->check(CLI::PositiveNumber);
    if (!with_sim) return;
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--paths", o.paths, "Monte-Carlo paths")->check(CLI::PositiveNumber);
    cmd->add_option("--dt", o.dt, "time step")->check(CLI::PositiveNumber);
    cmd->add_option("--horizon", o.horizon, "simulation horizon")->check(CLI::PositiveNumber);
    cmd->add_option("--threads", o.threads, "worker threads (default: IMPULSE_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--x0", o.x0, "initial state(s)");
    cmd->add_flag("--no-bridge", o.no_bridge, "disable the Brownian-bridge crossing correction");
    cmd->add_flag("--no-antithetic", o.no_antithetic, "disable antithetic pairs");
}

RunConfig base_config(ModelKind model) {
    RunConfig config;
    config.model = model;
    // Library defaults favour accuracy; the tool favours a run that finishes.
    config.sim.n_paths = 20000;
    config.sim.dt = 0.01;
    return config;
}

void apply_overrides(RunConfig& config, const Overrides& o) {
    if (!o.config_path.empty()) apply_document(config, read_document(o.config_path));
    if (!o.model.empty()) config.model = parse_model_kind(o.model);
    if (!o.r_variant.empty()) config.r_variant = parse_forex_r_variant(o.r_variant);
    for (const auto& [flag, kind, key, help] : param_flags()) {
        const auto it = o.params.find(flag);
        if (it == o.params.end() || !it->second) continue;
        require(kind == config.model, ErrorKind::Configuration,
                flag + " applies to the " + to_string(kind) + " model, not " + to_string(config.model));
        set_model_param(config, key, *it->second);
    }
    if (o.delay) config.set_delay(*o.delay);
    if (!o.window.empty()) config.window = StateInterval{o.window[0], o.window[1]};
    if (o.seed) config.sim.seed = *o.seed;
    if (o.paths) config.sim.n_paths = *o.paths;
    if (o.dt) config.sim.dt = *o.dt;
    if (o.horizon) config.sim.horizon = *o.horizon;
    if (o.threads) config.sim.threads = *o.threads;
    if (!o.x0.empty()) config.x0 = o.x0;
    if (o.no_bridge) config.sim.bridge_correction = false;
    if (o.no_antithetic) config.sim.antithetic = false;
    if (!o.out.empty()) config.output.dir = o.out;
    if (o.curve_points) config.output.curve_points = *o.curve_points;
}

std::string fmt(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::filesystem::path output_file(const RunConfig& config, const std::string& name) {
    std::error_code ec;
    std::filesystem::create_directories(*config.output.dir, ec);
    if (ec) throw IoError("cannot create " + config.output.dir->string() + ": " + ec.message());
    return *config.output.dir / name;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    f << content;
    if (!f) throw IoError("cannot write " + path.string());
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

json window_json(const StateInterval& w) { return json::array({w.lower, w.upper}); }

json header(const RunConfig& config, const std::string& kind) {
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["kind"] = kind;
    doc["model"] = to_string(config.model);
    doc["params"] = params_to_json(config);
    if (config.model == ModelKind::forex) doc["r_variant"] = std::string(to_string(config.r_variant));
    return doc;
}

// ---- threshold ------------------------------------------------------------

json threshold_summary(const RunConfig& config, const ThresholdSolution& sol) {
    json doc = header(config, "threshold-solution");
    doc["window"] = window_json(sol.problem().model().window);
    doc["policy"] = {{"a", sol.a_star()}, {"b", sol.b_star()}};
    doc["rho"] = sol.rho_star();
    const auto res = sol.problem().smooth_fit_residual(sol.a_star(), sol.b_star());
    doc["smooth_fit"] = {{"raw", res.raw}, {"scaled", res.scaled}};
    doc["value_convention"] = "v is the maximized reward; the intervention cost of the forex model is -v";
    doc["warnings"] = sol.diagnostics().warnings;
    return doc;
}

void add_gamma_oracle(json& doc, const ThresholdSolution& sol) {
    try {
        const auto fp = sol.problem().gamma_fixed_point_oracle(sol.a_star());
        const double ua = sol.u(sol.a_star());
        doc["oracle"] = {{"gamma_star", fp.gamma_star},
                         {"u_at_a", ua},
                         {"relative_difference", std::abs(fp.gamma_star - ua) / std::max(std::abs(ua), 1e-300)},
                         {"tangency", fp.tangency},
                         {"iterations", fp.iterations}};
    } catch (const Error& e) {
        doc["oracle"] = {{"error", e.what()}};
    }
}

ThresholdSolution load_threshold(const RunConfig& config, const json& doc) {
    require(doc.value("kind", "") == "threshold-solution", ErrorKind::Configuration,
            "solution file is not a threshold solution");
    const auto problem = make_threshold_problem(config);
    const auto& pol = doc.at("policy");
    return ThresholdSolution(problem, pol.at("a").get<double>(), pol.at("b").get<double>(), doc.at("rho").get<double>());
}

std::vector<double> threshold_grid(const RunConfig& config, const ThresholdSolution& sol) {
    const double lo = config.output.curve_min.value_or(sol.a_star() - 15.0);
    const double hi = config.output.curve_max.value_or(sol.b_star() + 10.0);
    return linear_grid(lo, hi, config.output.curve_points);
}

std::string threshold_curve(const std::vector<double>& xs, const ThresholdSolution& sol) {
    std::string csv = "x,v,u,region\n";
    for (double x : xs)
        csv += fmt(x) + "," + fmt(sol.v(x)) + "," + fmt(sol.u(x)) + "," +
               (x < sol.b_star() ? "continuation" : "intervention") + "\n";
    return csv;
}

// ---- band -----------------------------------------------------------------

json band_summary(const RunConfig& config, const BandSolution& sol) {
    json doc = header(config, "band-solution");
    doc["window"] = window_json(sol.problem().model().window);
    const auto& p = sol.policy();
    doc["policy"] = {{"p", p.p}, {"q", p.q}, {"c", p.c}, {"d", p.d}};
    doc["rho"] = sol.rho_star();
    doc["tau"] = sol.tau_star();
    const auto res = sol.problem().smooth_fit_system(p);
    doc["smooth_fit"] = {{"p_scaled", res.p_scaled}, {"d_scaled", res.d_scaled}};
    doc["reference_state"] = sol.diagnostics().reference_state;
    doc["value_convention"] = "v(xi) = u(xi) + g(xi); the two-variable value is z v(l / z)";
    doc["warnings"] = sol.diagnostics().warnings;
    return doc;
}

BandSolution load_band(const RunConfig& config, const json& doc) {
    require(doc.value("kind", "") == "band-solution", ErrorKind::Configuration, "solution file is not a band solution");
    const auto problem = make_band_problem(config);
    const auto& pol = doc.at("policy");
    const BandPolicy policy{pol.at("p").get<double>(), pol.at("q").get<double>(), pol.at("c").get<double>(),
                            pol.at("d").get<double>()};
    return BandSolution(problem, policy, {doc.at("rho").get<double>(), doc.at("tau").get<double>()});
}

std::vector<double> band_grid(const RunConfig& config, const BandSolution& sol) {
    const double lo = config.output.curve_min.value_or(0.5 * sol.policy().p);
    const double hi = config.output.curve_max.value_or(2.0 * sol.policy().d);
    require(lo > 0.0, ErrorKind::Configuration, "labor curves need curve_min > 0");
    return log_grid(lo, hi, config.output.curve_points);
}

std::string band_curve(const std::vector<double>& xs, const BandSolution& sol) {
    std::string csv = "x,v,u,region\n";
    const auto& p = sol.policy();
    for (double x : xs) {
        const char* region = x <= p.p ? "hire" : (x >= p.d ? "fire" : "continuation");
        csv += fmt(x) + "," + fmt(sol.v(x)) + "," + fmt(sol.u(x)) + "," + region + "\n";
    }
    return csv;
}

// ---- shared pieces ----------------------------------------------------------

/// Applies the model and parameters stored in a solution file, so that the
/// solution is re-read against the model it was solved for.
json read_solution(RunConfig& config, const std::string& path) {
    json doc = read_document(path);
    require(doc.is_object() && doc.value("schema_version", 0) == kSchemaVersion, ErrorKind::Configuration,
            path + ": unsupported or missing schema_version");
    config.model = parse_model_kind(doc.at("model").get<std::string>());
    for (const auto& [key, value] : doc.at("params").items()) set_model_param(config, key, value.get<double>());
    if (doc.contains("r_variant")) config.r_variant = parse_forex_r_variant(doc["r_variant"].get<std::string>());
    if (doc.contains("window")) config.window = StateInterval{doc["window"][0].get<double>(), doc["window"][1].get<double>()};
    return doc;
}

std::string diff_csv(const std::vector<double>& xs, const std::function<double(double)>& v_delay,
                     const std::function<double(double)>& v_zero, double& min_cost) {
    std::string csv = "x,v_delay,v_no_delay,delay_cost\n";
    min_cost = std::numeric_limits<double>::infinity();
    for (double x : xs) {
        const double vd = v_delay(x), v0 = v_zero(x);
        min_cost = std::min(min_cost, v0 - vd);
        csv += fmt(x) + "," + fmt(vd) + "," + fmt(v0) + "," + fmt(v0 - vd) + "\n";
    }
    return csv;
}

int emit(std::ostream& out, const RunConfig& config, const json& summary,
         const std::vector<std::pair<std::string, std::string>>& files) {
    if (config.output.dir) {
        write_text(output_file(config, "summary.json"), dump(summary));
        for (const auto& [name, content] : files) write_text(output_file(config, name), content);
    }
    out << dump(summary);
    return exit_ok;
}

// ---- subcommands ------------------------------------------------------------

int solve_threshold_cmd(RunConfig config, const std::string& solution_path, bool emit_diff, std::ostream& out) {
    json loaded;
    if (!solution_path.empty()) loaded = read_solution(config, solution_path);
    config.validate();
    const auto sol = solution_path.empty() ? optimize_threshold(make_threshold_problem(config))
                                           : load_threshold(config, loaded);
    json summary = threshold_summary(config, sol);
    add_gamma_oracle(summary, sol);
    const auto xs = threshold_grid(config, sol);
    std::vector<std::pair<std::string, std::string>> files{{"curve.csv", threshold_curve(xs, sol)}};
    if (emit_diff) {
        RunConfig zero = config;
        zero.set_delay(0.0);
        const auto sol0 = optimize_threshold(make_threshold_problem(zero));
        double min_cost = 0.0;
        files.emplace_back("diff.csv", diff_csv(xs, [&](double x) { return sol.v(x); },
                                                [&](double x) { return sol0.v(x); }, min_cost));
        summary["no_delay"] = {{"policy", {{"a", sol0.a_star()}, {"b", sol0.b_star()}}}, {"rho", sol0.rho_star()}};
        summary["delay_comparison"] = {{"min_delay_cost", min_cost},
                                       {"delay_cost_nonnegative", min_cost >= 0.0},
                                       {"continuation_shrinks", sol.b_star() < sol0.b_star()}};
    }
    return emit(out, config, summary, files);
}

int solve_band_cmd(RunConfig config, const std::string& solution_path, bool emit_diff, std::ostream& out) {
    json loaded;
    if (!solution_path.empty()) loaded = read_solution(config, solution_path);
    config.validate();
    const auto sol = solution_path.empty() ? optimize_band(make_band_problem(config)) : load_band(config, loaded);
    json summary = band_summary(config, sol);
    for (const auto& w : labor_condition_warnings(config.labor, sol.policy().q)) summary["warnings"].push_back(w);
    const auto xs = band_grid(config, sol);
    std::vector<std::pair<std::string, std::string>> files{{"curve.csv", band_curve(xs, sol)}};
    if (emit_diff) {
        RunConfig zero = config;
        zero.set_delay(0.0);
        const auto sol0 = optimize_band(make_band_problem(zero));
        double min_cost = 0.0;
        files.emplace_back("diff.csv", diff_csv(xs, [&](double x) { return sol.v(x); },
                                                [&](double x) { return sol0.v(x); }, min_cost));
        const auto& p0 = sol0.policy();
        summary["no_delay"] = {{"policy", {{"p", p0.p}, {"q", p0.q}, {"c", p0.c}, {"d", p0.d}}},
                               {"rho", sol0.rho_star()},
                               {"tau", sol0.tau_star()}};
        summary["delay_comparison"] = {
            {"min_delay_cost", min_cost},
            {"delay_cost_nonnegative", min_cost >= 0.0},
            {"continuation_expands", sol.policy().p <= p0.p && sol.policy().d >= p0.d}};
    }
    return emit(out, config, summary, files);
}

json estimate_json(const PolicyEstimate& est, double x0, std::optional<double> analytic) {
    json r;
    r["x0"] = x0;
    r["mean"] = est.mean;
    r["standard_error"] = est.standard_error;
    r["n_paths"] = est.n_paths;
    r["discounted_tail_bound"] = est.discounted_tail_bound;
    if (analytic) {
        r["analytic"] = *analytic;
        r["z_score"] = est.z_score(*analytic);
    }
    const auto& d = est.diagnostics;
    r["diagnostics"] = {{"upper_impulses", d.upper_impulses},
                        {"lower_impulses", d.lower_impulses},
                        {"bridge_detections", d.bridge_detections},
                        {"exclusion_violations", d.exclusion_violations},
                        {"pending_at_horizon", d.pending_at_horizon},
                        {"bias_direction", d.bias_direction},
                        {"warnings", d.warnings}};
    return r;
}

int simulate_cmd(RunConfig config, const std::string& solution_path, const std::vector<double>& policy_values,
                 std::ostream& out) {
    json loaded;
    if (!solution_path.empty()) loaded = read_solution(config, solution_path);
    require(solution_path.empty() || policy_values.empty(), ErrorKind::Configuration,
            "give either --solution or --policy, not both");
    config.validate();
    config.sim.validate();

    json doc = header(config, "policy-estimate");
    doc["simulation"] = {{"paths", config.sim.n_paths},
                         {"dt", config.sim.dt},
                         {"seed", config.sim.seed},
                         {"bridge_correction", config.sim.bridge_correction},
                         {"antithetic", config.sim.antithetic}};
    json results = json::array();

    if (config.model == ModelKind::forex) {
        const auto problem = make_threshold_problem(config);
        std::optional<ThresholdSolution> sol;
        if (!solution_path.empty()) sol = load_threshold(config, loaded);
        else if (policy_values.empty()) sol = optimize_threshold(problem);
        ThresholdPolicy policy;
        if (sol) policy = {sol->a_star(), sol->b_star()};
        else {
            require(policy_values.size() == 2, ErrorKind::Configuration, "forex --policy takes two values: a b");
            policy = {policy_values[0], policy_values[1]};
            policy.validate(problem.model());
            sol = threshold_solution_for(problem, policy);
        }
        doc["policy"] = {{"a", policy.a}, {"b", policy.b}};
        doc["simulation"]["horizon"] = config.sim.horizon_for(problem.model().discount);
        const auto xs = config.x0.empty() ? std::vector<double>{0.0} : config.x0;
        for (double x0 : xs) {
            const auto est = simulate_threshold(problem, policy, x0, config.sim);
            results.push_back(estimate_json(est, x0, sol ? std::optional<double>(sol->v(x0)) : std::nullopt));
        }
    } else {
        const auto problem = make_band_problem(config);
        std::optional<BandSolution> sol;
        if (!solution_path.empty()) sol = load_band(config, loaded);
        else if (policy_values.empty()) sol = optimize_band(problem);
        BandPolicy policy;
        if (sol) policy = sol->policy();
        else {
            require(policy_values.size() == 4, ErrorKind::Configuration, "labor --policy takes four values: p q c d");
            policy = {policy_values[0], policy_values[1], policy_values[2], policy_values[3]};
            policy.validate(problem.model());
            sol = band_solution_for(problem, policy);
        }
        doc["policy"] = {{"p", policy.p}, {"q", policy.q}, {"c", policy.c}, {"d", policy.d}};
        doc["simulation"]["horizon"] = config.sim.horizon_for(problem.model().discount);
        const auto xs = config.x0.empty() ? std::vector<double>{10.0} : config.x0;
        for (double x0 : xs) {
            const auto est = simulate_band(problem, policy, x0, config.sim);
            results.push_back(estimate_json(est, x0, sol ? std::optional<double>(sol->v(x0)) : std::nullopt));
        }
    }
    doc["results"] = results;
    if (config.output.dir) write_text(output_file(config, "estimate.json"), dump(doc));
    out << dump(doc);
    return exit_ok;
}

struct SweepRow {
    std::vector<double> values;
    std::string status = "ok";
};

int sweep_cmd(RunConfig config, const std::string& param, const std::vector<double>& values, std::ostream& out,
              std::ostream& err) {
    config.validate();
    get_model_param(config, param);
    const bool forex = config.model == ModelKind::forex;
    std::vector<SweepRow> rows(values.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < values.size(); i = next++) {
            RunConfig local = config;
            try {
                set_model_param(local, param, values[i]);
                local.validate();
                if (forex) {
                    const auto s = optimize_threshold(make_threshold_problem(local));
                    rows[i].values = {s.a_star(), s.b_star(), s.rho_star()};
                } else {
                    const auto s = optimize_band(make_band_problem(local));
                    const auto& p = s.policy();
                    rows[i].values = {s.rho_star(), s.tau_star(), p.p, p.q, p.c, p.d};
                }
            } catch (const Error& e) {
                rows[i].status = std::string(to_string(e.kind()));
            }
        }
    };
    const unsigned n_threads =
        std::max(1u, std::min<unsigned>(config.sim.threads ? config.sim.threads : default_thread_count(),
                                        static_cast<unsigned>(values.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::string csv = param + (forex ? ",a,b,rho" : ",rho,tau,p,q,c,d") + ",status\n";
    const std::size_t width = forex ? 3 : 6;
    std::size_t failures = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        csv += fmt(values[i]);
        for (std::size_t k = 0; k < width; ++k) csv += "," + (rows[i].values.empty() ? std::string() : fmt(rows[i].values[k]));
        csv += "," + rows[i].status + "\n";
        if (rows[i].status != "ok") ++failures;
    }
    if (config.output.dir) write_text(output_file(config, "sweep.csv"), csv);
    out << csv;
    if (failures) err << failures << " of " << values.size() << " sweep points failed\n";
    return failures == values.size() && !values.empty() ? exit_solver : exit_ok;
}

struct Published {
    std::string name;
    double value;
    double computed;
};

int reference_table_cmd(RunConfig config, std::ostream& out) {
    std::string csv = "case,quantity,published,computed,relative_error\n";
    json cases = json::array();
    auto add_case = [&](const std::string& label, const std::vector<Published>& rows) {
        json c{{"case", label}, {"rows", json::array()}};
        for (const auto& r : rows) {
            const double rel = std::abs(r.computed - r.value) / std::abs(r.value);
            csv += label + "," + r.name + "," + fmt(r.value) + "," + fmt(r.computed) + "," + fmt(rel) + "\n";
            c["rows"].push_back({{"quantity", r.name}, {"published", r.value}, {"computed", r.computed},
                                 {"relative_error", rel}});
        }
        cases.push_back(c);
    };

    struct FxRow {
        double delay, a, b, rho;
    };
    for (auto variant : {ForexRVariant::exact, ForexRVariant::printed}) {
        for (const FxRow t : {FxRow{1.0, 5.066, 12.1756, 0.042423}, FxRow{0.0, 5.07723, 12.2611, 0.0492262}}) {
            RunConfig c = base_config(ModelKind::forex);
            c.forex.delay = t.delay;
            c.r_variant = variant;
            const auto s = optimize_threshold(make_threshold_problem(c));
            add_case("forex r=" + std::string(to_string(variant)) + " delta=" + fmt(t.delay),
                     {{"a", t.a, s.a_star()}, {"b", t.b, s.b_star()}, {"rho", t.rho, s.rho_star()}});
        }
    }
    struct LaborRow {
        double delay, rho, tau, p, q, c, d;
    };
    for (const LaborRow t : {LaborRow{0.0, 0.0002003, 38.1633, 1.0664, 2.125, 7.240, 35.728},
                             LaborRow{0.5, 0.0001725, 38.1597, 1.0661, 2.100, 7.120, 36.640}}) {
        RunConfig c = base_config(ModelKind::labor);
        c.labor.delay = t.delay;
        const auto s = optimize_band(make_band_problem(c));
        const auto& p = s.policy();
        add_case("labor delta=" + fmt(t.delay), {{"rho", t.rho, s.rho_star()},
                                                 {"tau", t.tau, s.tau_star()},
                                                 {"p", t.p, p.p},
                                                 {"q", t.q, p.q},
                                                 {"c", t.c, p.c},
                                                 {"d", t.d, p.d}});
    }
    if (config.output.dir) {
        json doc{{"schema_version", kSchemaVersion}, {"kind", "reference-table"}, {"cases", cases}};
        write_text(output_file(config, "table.json"), dump(doc));
        write_text(output_file(config, "table.csv"), csv);
    }
    out << csv;
    return exit_ok;
}

}  // namespace

int exit_code_for(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Configuration:
        case ErrorKind::Domain:
        case ErrorKind::NoAction:
            return exit_config;
        case ErrorKind::Simulation:
            return exit_simulation;
        default:
            return exit_solver;
    }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Optimal threshold and band impulse control with implementation delay"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "impulse 0.1.0");

    Overrides o;
    std::string solution;
    bool emit_diff = false;
    std::vector<double> policy;
    std::string sweep_param;
    std::vector<double> sweep_values;

    auto* st = app.add_subcommand("solve-threshold", "solve the one-sided threshold problem (forex)");
    add_common(st, o, true, false);
    st->add_option("--solution", solution, "re-assemble a previously written summary.json instead of solving")
        ->check(CLI::ExistingFile);
    st->add_flag("--emit-diff", emit_diff, "also solve without delay and write the delay cost v_0 - v_delay");

    auto* sb = app.add_subcommand("solve-band", "solve the two-sided band problem (labor)");
    add_common(sb, o, true, false);
    sb->add_option("--solution", solution, "re-assemble a previously written summary.json instead of solving")
        ->check(CLI::ExistingFile);
    sb->add_flag("--emit-diff", emit_diff, "also solve without delay and write the delay cost v_0 - v_delay");

    auto* sim = app.add_subcommand("simulate", "Monte-Carlo estimate of a policy's value");
    add_common(sim, o, true, true);
    sim->add_option("--solution", solution, "summary.json of a solved policy")->check(CLI::ExistingFile);
    sim->add_option("--policy", policy, "explicit policy: a b (forex) or p q c d (labor)");

    auto* sw = app.add_subcommand("sweep", "solve over a list of values of one model parameter");
    add_common(sw, o, true, true);
    sw->add_option("--param", sweep_param, "config-file parameter name, e.g. delta or delta_lag")->required();
    sw->add_option("--values", sweep_values, "parameter values")->required();

    auto* pt = app.add_subcommand("paper-table", "reproduce the reference solutions side by side with relative errors");
    add_common(pt, o, false, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        const ModelKind default_model = sb->parsed() ? ModelKind::labor : ModelKind::forex;
        RunConfig config = base_config(default_model);
        apply_overrides(config, o);
        if (st->parsed()) return solve_threshold_cmd(config, solution, emit_diff, out);
        if (sb->parsed()) return solve_band_cmd(config, solution, emit_diff, out);
        if (sim->parsed()) return simulate_cmd(config, solution, policy, out);
        if (sw->parsed()) return sweep_cmd(config, sweep_param, sweep_values, out, err);
        return reference_table_cmd(config, out);
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const IoError& e) {
        err << "error (io): " << e.what() << "\n";
        return exit_io;
    } catch (const nlohmann::json::exception& e) {
        err << "error (configuration): malformed document: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_io;
    }
}

}  // namespace impulse::app
