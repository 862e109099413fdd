// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance                 run every criterion
//   acceptance --criterion N   run criterion N only (exit status reflects it)

#include "CLI11.hpp"
#include "oracles.hpp"

#include "impulse/error.hpp"
#include "impulse/forex.hpp"
#include "impulse/labor.hpp"
#include "impulse/simulator.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace impulse;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Report {
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "  FAILED: " << what << "\n";
        }
    }
};

// ---------------------------------------------------------------- shared setup

ThresholdProblem fx_problem(double delay, ForexRVariant variant = ForexRVariant::exact) {
    ForexParams p;
    p.delay = delay;
    const auto fx = build_forex(p, variant);
    return ThresholdProblem(fx.model, fx.cost);
}

BandProblem labor_problem(double delay) {
    LaborParams p;
    p.delay = delay;
    const auto lm = build_labor(p);
    return BandProblem(lm.model, lm.cost);
}

struct FxTarget {
    double delay, a, b, rho;
};
constexpr FxTarget kFxTargets[] = {{1.0, 5.066, 12.1756, 0.042423}, {0.0, 5.07723, 12.2611, 0.0492262}};

struct LaborTarget {
    double delay, rho, tau, p, q, c, d;
};
constexpr LaborTarget kLaborTargets[] = {{0.0, 0.0002003, 38.1633, 1.0664, 2.125, 7.240, 35.728},
                                         {0.5, 0.0001725, 38.1597, 1.0661, 2.100, 7.120, 36.640}};

// ---------------------------------------------------------------- criteria

Report criterion_1() {
    Report rep;
    auto triplet_ok = [&](ForexRVariant variant, const FxTarget& t, bool record) {
        const auto t0 = Clock::now();
        const auto sol = optimize_threshold(fx_problem(t.delay, variant));
        const double secs = seconds_since(t0);
        const double ea = oracle::rel_err(sol.a_star(), t.a), eb = oracle::rel_err(sol.b_star(), t.b),
                     er = oracle::rel_err(sol.rho_star(), t.rho);
        rep.detail << "  r=" << to_string(variant) << " delay=" << t.delay << ": (a*, b*, rho*) = (" << sol.a_star() << ", "
                   << sol.b_star() << ", " << sol.rho_star() << ") rel.err (" << ea << ", " << eb << ", " << er
                   << ") in " << secs << " s\n";
        const bool ok = ea <= 0.02 && eb <= 0.02 && er <= 0.02;
        if (record) rep.check(secs < 10.0, "solve time < 10 s");
        return ok;
    };
    bool exact_ok = true;
    for (const auto& t : kFxTargets) exact_ok = triplet_ok(ForexRVariant::exact, t, true) && exact_ok;
    bool printed_ok = true;
    for (const auto& t : kFxTargets) printed_ok = triplet_ok(ForexRVariant::printed, t, false) && printed_ok;

    // Which closed form does the delayed-cost expectation actually follow?
    ForexParams fp;
    const auto exact = build_forex(fp, ForexRVariant::exact);
    const ThresholdProblem problem(exact.model, exact.cost);
    SimConfig cfg;
    cfg.n_paths = 400000;
    int exact_hits = 0, printed_hits = 0, pairs = 0;
    for (double x : {3.0, 5.0, 6.0, 7.0, 12.0}) {
        const double a = 5.066;
        const auto est = mc_delayed_cost(problem, x, a, cfg);
        exact_hits += std::abs(est.z_score(forex_r_exact(fp, x, a))) <= 3.0;
        printed_hits += std::abs(est.z_score(forex_r_printed(fp, x, a))) <= 3.0;
        ++pairs;
    }
    rep.detail << "  MC arbitration of r at 5 states near a: exact within 3 se at " << exact_hits << "/" << pairs
               << ", printed at " << printed_hits << "/" << pairs << "\n";
    if (exact_ok) {
        rep.detail << "  first-principles r reproduces both triplets within 2%\n";
    } else {
        rep.check(printed_ok, "printed r reproduces both triplets within 2%");
        rep.check(exact_hits == pairs, "MC oracle confirms the first-principles r");
    }
    return rep;
}

Report criterion_2() {
    Report rep;
    for (const auto& t : kLaborTargets) {
        const auto t0 = Clock::now();
        const auto sol = optimize_band(labor_problem(t.delay));
        const double secs = seconds_since(t0);
        const auto pol = sol.policy();
        const std::vector<std::pair<const char*, std::pair<double, double>>> entries = {
            {"rho", {sol.rho_star(), t.rho}}, {"tau", {sol.tau_star(), t.tau}}, {"p", {pol.p, t.p}},
            {"q", {pol.q, t.q}},              {"c", {pol.c, t.c}},              {"d", {pol.d, t.d}}};
        rep.detail << "  delay=" << t.delay << " (" << secs << " s):";
        for (const auto& [name, vals] : entries) {
            const double e = oracle::rel_err(vals.first, vals.second);
            rep.detail << " " << name << "=" << vals.first << " (" << 100.0 * e << "%)";
            rep.check(e <= 0.01, std::string("delay=") + (t.delay == 0.0 ? "0" : "0.5") + " " + name + " within 1%");
        }
        rep.detail << "\n";
        rep.check(secs < 60.0, "band solve < 60 s");
    }
    return rep;
}

Report criterion_3() {
    Report rep;
    const auto sd = optimize_threshold(fx_problem(1.0));
    const auto s0 = optimize_threshold(fx_problem(0.0));
    int violations = 0;
    for (double x : linear_grid(-25.0, 55.0, 801)) violations += forex_cost_value(sd, x) < forex_cost_value(s0, x);
    rep.detail << "  FX: v_D >= v_0 violated at " << violations << "/801 grid points; b*(1) = " << sd.b_star()
               << ", b*(0) = " << s0.b_star() << "\n";
    rep.check(violations == 0, "v_D >= v_0 on the FX grid");
    rep.check(sd.b_star() < s0.b_star(), "FX continuation region shrinks with delay");

    const auto l0 = optimize_band(labor_problem(0.0)).policy();
    const auto l5 = optimize_band(labor_problem(0.5)).policy();
    rep.detail << "  labor: (p, d) = (" << l0.p << ", " << l0.d << ") at delay 0, (" << l5.p << ", " << l5.d
               << ") at delay 0.5\n";
    rep.check(l5.p < l0.p && l5.d > l0.d, "labor continuation region expands with delay");
    return rep;
}

// Jump of W' across y computed from one-sided finite differences of W, scaled
// by the size of the one-sided slopes.
double fd_slope_jump(const std::function<double(double)>& W, double y) {
    const double h = 1e-5 * y;
    const double left = (3.0 * W(y) - 4.0 * W(y - h) + W(y - 2.0 * h)) / (2.0 * h);
    const double right = (-3.0 * W(y) + 4.0 * W(y + h) - W(y + 2.0 * h)) / (2.0 * h);
    return std::abs(left - right) / (std::abs(left) + std::abs(right));
}

double pde_residual(const DiffusionModel& model, const std::function<double(double)>& u, double x) {
    const double h = 1e-4 * std::max(1.0, std::abs(x));
    const double res = apply_discounted_generator(model, u, x, h);
    const double slope = central_difference(u, x);
    return std::abs(res) / (2.0 * model.discount * std::abs(u(x)) + std::abs(model.drift(x) * slope));
}

Report criterion_4() {
    Report rep;
    const auto t0 = Clock::now();
    double worst_jump = 0.0, worst_fd = 0.0, worst_pde = 0.0;

    const auto fx = fx_problem(1.0);
    for (double a : {2.0, 3.5, 5.066, 6.5, 8.0}) {
        const auto s = fx.solve_b_given_a(a);
        worst_jump = std::max(worst_jump, std::abs(s.residual.scaled));
        const auto sol = threshold_solution_for(fx, {a, s.b});
        const auto& F = fx.transform();
        worst_fd = std::max(worst_fd, fd_slope_jump([&](double y) { return sol.transformed_value(y); }, F(s.b)));
        for (double x : linear_grid(-20.0, s.b - 0.01, 12))
            worst_pde = std::max(worst_pde, pde_residual(fx.model(), [&](double z) { return sol.u(z); }, x));
    }
    const auto band = labor_problem(0.5);
    for (auto [q, c] : {std::pair{2.1, 7.12}, std::pair{1.8, 6.0}, std::pair{2.5, 9.0}}) {
        const auto s = band.solve_pd_given_qc(q, c);
        worst_jump = std::max(worst_jump, s.residuals.scaled_norm());
        const auto sol = band_solution_for(band, {s.p, q, c, s.d});
        const auto& F = band.transform();
        for (double b : {s.p, s.d})
            worst_fd = std::max(worst_fd, fd_slope_jump([&](double y) { return sol.transformed_value(y); }, F(b)));
        for (double x : log_grid(s.p * 1.001, s.d * 0.999, 12))
            worst_pde = std::max(worst_pde, pde_residual(band.model(), [&](double z) { return sol.u(z); }, x));
    }
    const double secs = seconds_since(t0);
    rep.detail << "  max scaled slope jump " << worst_jump << " (finite-difference cross-check " << worst_fd
               << "), max relative PDE residual " << worst_pde << ", " << secs << " s\n";
    rep.check(worst_jump < 1e-6, "scaled slope jumps < 1e-6");
    rep.check(worst_fd < 1e-4, "finite-difference slope jumps consistent");
    rep.check(worst_pde < 1e-5, "continuation PDE residual < 1e-5");
    rep.check(secs < 5.0, "suite runtime < 5 s");
    return rep;
}

Report criterion_5() {
    Report rep;
    const auto problem = fx_problem(1.0);
    const double resolution =
        (problem.model().window.upper - 3.0) / static_cast<double>(problem.config().majorant_points - 1);
    for (double a : {3.0, 4.0, 5.066, 6.0, 7.0}) {
        const auto fp = problem.gamma_fixed_point_oracle(a);
        const auto s = problem.solve_b_given_a(a);
        rep.detail << "  a=" << a << ": b*=" << s.b << " b^gamma=" << fp.tangency << " (" << fp.iterations
                   << " iterations)\n";
        rep.check(std::abs(fp.tangency - s.b) <= resolution, "tangency within majorant grid resolution");
    }
    const auto sol = optimize_threshold(problem);
    const auto fp = problem.gamma_fixed_point_oracle(sol.a_star());
    const double rel = std::abs(sol.u(sol.a_star()) - fp.gamma_star) / std::abs(fp.gamma_star);
    rep.detail << "  u(a*) = " << sol.u(sol.a_star()) << ", gamma* = " << fp.gamma_star << ", rel.diff " << rel << "\n";
    rep.check(rel <= 1e-6, "u(a*) = gamma* within 1e-6");
    return rep;
}

// Settings for the policy cross-validation. The horizons keep the discounted
// tail well below one standard error.
constexpr std::size_t kMcPaths = 100000;
constexpr double kFxDt = 0.01, kFxHorizon = 60.0;
constexpr double kLaborDt = 0.05, kLaborHorizon = 300.0;

Report criterion_6() {
    Report rep;
    const auto t0 = Clock::now();
    auto judge = [&](const char* model, double x0, const PolicyEstimate& est, double value) {
        const double z = est.z_score(value);
        const double rel_se = est.standard_error / std::abs(value);
        rep.detail << "  " << model << " x0=" << x0 << ": MC " << est.mean << " +/- " << est.standard_error
                   << " vs " << value << " (z = " << z << ", se/|v| = " << rel_se << ", tail " << est.discounted_tail_bound
                   << ", bridge hits " << est.diagnostics.bridge_detections << ")\n";
        rep.check(std::abs(z) <= 3.0, std::string(model) + " within 3 se");
        rep.check(rel_se < 0.005, std::string(model) + " se < 0.5% of |value|");
    };

    const auto fx = fx_problem(1.0);
    const auto fsol = optimize_threshold(fx);
    SimConfig fcfg;
    fcfg.n_paths = kMcPaths;
    fcfg.dt = kFxDt;
    fcfg.horizon = kFxHorizon;
    for (double x0 : {0.0, 5.0, 10.0})
        judge("FX", x0, simulate_threshold(fx, {fsol.a_star(), fsol.b_star()}, x0, fcfg), fsol.v(x0));

    const auto band = labor_problem(0.5);
    const auto bsol = optimize_band(band);
    SimConfig lcfg;
    lcfg.n_paths = kMcPaths;
    lcfg.dt = kLaborDt;
    lcfg.horizon = kLaborHorizon;
    for (double x0 : {3.0, 10.0, 30.0}) judge("labor", x0, simulate_band(band, bsol.policy(), x0, lcfg), bsol.v(x0));

    const double secs = seconds_since(t0);
    rep.detail << "  total " << secs << " s on " << default_thread_count() << " worker thread(s)\n";
    rep.check(secs < 300.0, "runtime < 5 min");
    return rep;
}

Report criterion_7() {
    Report rep;
    SimConfig cfg;
    cfg.n_paths = 200000;
    int fails = 0, total = 0;
    // When every sample agrees the sample error is zero; fall back to the rule of three, i.e. an event of
    // probability below 3/n can go unobserved, so allow 3 * scale / n where scale bounds the integrand there.
    auto audit = [&](const std::string& what, const PolicyEstimate& est, double value, double scale = 0.0) {
        ++total;
        const double floor = est.standard_error == 0.0 ? 3.0 * scale / static_cast<double>(cfg.n_paths) : 0.0;
        if (std::abs(est.mean - value) > 3.0 * est.standard_error + floor + 1e-12 * std::abs(value)) {
            ++fails;
            rep.detail << "  " << what << ": MC " << est.mean << " +/- " << est.standard_error << " vs " << value << "\n";
        }
    };

    ForexParams fp;
    const auto fx = fx_problem(1.0);
    const auto fxs = linear_grid(-6.0, 20.0, 5);
    for (double a : {0.0, 2.5, 5.066, 8.0})
        for (double x : fxs) audit("FX r(" + std::to_string(x) + ", " + std::to_string(a) + ")", mc_delayed_cost(fx, x, a, cfg), forex_r_exact(fp, x, a));
    for (double x : linear_grid(-10.0, 20.0, 10))
        audit("FX g(" + std::to_string(x) + ")", mc_expected_reward(fx.model(), fx.cost().running_reward, x, cfg), forex_g(fp, x));

    const LaborParams lp;
    const auto band = labor_problem(0.5);
    for (double c : {4.0, 7.12, 12.0, 20.0})
        for (double xi : {0.8, 3.0, 7.0, 15.0, 40.0})
            audit("labor r(" + std::to_string(xi) + ", " + std::to_string(c) + ")", mc_delayed_fire_cost(band, xi, c, cfg),
                  labor_r(lp, xi, c));
    for (double xi : log_grid(0.1, 80.0, 10))
        audit("labor g(" + std::to_string(xi) + ")", mc_expected_reward(band.model(), band.cost().running_reward, xi, cfg),
              labor_g(lp, xi));

    double worst_identity = 0.0;
    const auto& model = band.model();
    for (double xi : {1.0, 7.0, 30.0}) {
        for (double c : {2.1, 7.12, 36.6}) {
            const auto m = labor_moments(lp, xi, c);
            const std::string at = "(" + std::to_string(xi) + ", " + std::to_string(c) + ")";
            audit("A" + at, mc_transition_expectation(model, xi, lp.delay, [c](double y) { return y > c ? 1.0 : 0.0; }, cfg), m.A, 1.0);
            audit("B" + at, mc_transition_expectation(model, xi, lp.delay, [c](double y) { return y < c ? 1.0 : 0.0; }, cfg), m.B, 1.0);
            audit("D" + at, mc_transition_expectation(model, xi, lp.delay, [c](double y) { return y > c ? y : 0.0; }, cfg), m.D, c);
            audit("E" + at, mc_transition_expectation(model, xi, lp.delay, [c](double y) { return y < c ? y : 0.0; }, cfg), m.E, c);
            const double c1 = labor_power_moment(lp, xi, 1.0);
            worst_identity = std::max(worst_identity, std::abs(m.D + m.E - c1) / c1);
        }
        for (double theta : {lp.mu, 1.0, 2.0})
            audit("C(" + std::to_string(theta) + ")",
                  mc_transition_expectation(model, xi, lp.delay, [theta](double y) { return std::pow(y, theta); }, cfg),
                  labor_power_moment(lp, xi, theta));
    }
    rep.detail << "  " << total - fails << "/" << total << " MC audits within 3 se; max |D + E - C(1)|/C(1) = "
               << worst_identity << "\n";
    rep.check(fails == 0, "all formula audits within 3 standard errors");
    rep.check(worst_identity <= 1e-12, "D + E = C(1) to 1e-12");
    return rep;
}

bool same(const PolicyEstimate& a, const PolicyEstimate& b) {
    const auto& x = a.diagnostics;
    const auto& y = b.diagnostics;
    return a.mean == b.mean && a.standard_error == b.standard_error && a.discounted_tail_bound == b.discounted_tail_bound &&
           x.upper_impulses == y.upper_impulses && x.lower_impulses == y.lower_impulses &&
           x.bridge_detections == y.bridge_detections && x.exclusion_violations == y.exclusion_violations &&
           x.pending_at_horizon == y.pending_at_horizon && x.warnings == y.warnings;
}

Report criterion_8() {
    Report rep;
    const auto fx = fx_problem(1.0);
    const auto band = labor_problem(0.5);
    const BandPolicy bp{1.0655, 2.117, 7.108, 36.64};
    for (unsigned threads : {2u, 4u, 7u}) {
        SimConfig one;
        one.n_paths = 20000;
        one.dt = 0.02;
        one.horizon = 40.0;
        one.threads = 1;
        SimConfig many = one;
        many.threads = threads;
        const bool fx_same = same(simulate_threshold(fx, {5.066, 12.1756}, 2.0, one),
                                  simulate_threshold(fx, {5.066, 12.1756}, 2.0, many));
        one.n_paths = many.n_paths = 4000;
        one.horizon = many.horizon = 100.0;
        const bool band_same = same(simulate_band(band, bp, 10.0, one), simulate_band(band, bp, 10.0, many));
        rep.detail << "  1 vs " << threads << " threads: FX " << (fx_same ? "identical" : "DIFFERENT") << ", labor "
                   << (band_same ? "identical" : "DIFFERENT") << "\n";
        rep.check(fx_same && band_same, "bit-identical reports");
    }
    return rep;
}

const std::map<int, std::pair<const char*, std::function<Report()>>> kCriteria = {
    {1, {"FX triplet reproduction", criterion_1}},
    {2, {"labor table reproduction", criterion_2}},
    {3, {"qualitative reproductions", criterion_3}},
    {4, {"smooth-fit suite", criterion_4}},
    {5, {"oracle equivalence", criterion_5}},
    {6, {"MC cross-validation", criterion_6}},
    {7, {"formula audits", criterion_7}},
    {8, {"determinism", criterion_8}},
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"impulse acceptance suite"};
    int only = 0;
    app.add_option("--criterion", only, "run a single criterion (1-8)")->check(CLI::Range(1, 8));
    CLI11_PARSE(app, argc, argv);

    bool all_pass = true;
    for (const auto& [id, entry] : kCriteria) {
        if (only != 0 && id != only) continue;
        const auto t0 = Clock::now();
        Report rep;
        try {
            rep = entry.second();
        } catch (const Error& e) {
            rep.pass = false;
            rep.detail << "  error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        }
        std::printf("criterion %d [%s]: %s (%.1f s)\n", id, entry.first, rep.pass ? "PASS" : "FAIL", seconds_since(t0));
        std::fputs(rep.detail.str().c_str(), stdout);
        std::fflush(stdout);
        all_pass = all_pass && rep.pass;
    }
    return all_pass ? 0 : 1;
}
