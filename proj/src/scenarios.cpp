#include "agrospray/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "agrospray/error.hpp"

namespace agrospray {

namespace {

RunConfig simulation(double horizon, double control = 0.0)
{
    RunConfig c = default_run_config();
    c.solver = SolverChoice::Simulate;
    c.problem.horizon = horizon;
    c.constant_control = control;
    return c;
}

RunConfig fixed_solve(double weight, double horizon, int max_iterations)
{
    RunConfig c = default_run_config();
    c.solver = SolverChoice::Fixed;
    c.problem.params.control_weight = weight;
    c.problem.horizon = horizon;
    c.fixed.max_iterations = max_iterations;
    return c;
}

RunConfig min_time(const ModelParams& p)
{
    RunConfig c = default_run_config();
    c.solver = SolverChoice::MinTime;
    c.problem.params = p;
    c.problem.params.control_weight = 0.0;
    c.problem.kind = ProblemKind::MinTime;
    return c;
}

CheckResult verdict(std::string description, bool passed, std::string detail)
{
    return {std::move(description), passed, std::move(detail)};
}

double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }
double min_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::min_element(v.begin(), v.end()); }

QualitativeCheck control_identically_zero()
{
    return {"spraying column is identically 0", [](const RunRecord& r) {
                const double m = std::max(std::abs(max_of(r.series.u)), std::abs(min_of(r.series.u)));
                return verdict("u == 0", m == 0.0, fmt::format("max |u| = {:g}", m));
            }};
}

QualitativeCheck pests_oscillate()
{
    return {"pest count oscillates (at least three local maxima)", [](const RunRecord& r) {
                const auto& v = r.series.v;
                int peaks = 0;
                for (std::size_t i = 1; i + 1 < v.size(); ++i)
                    if (v[i] > v[i - 1] && v[i] >= v[i + 1]) ++peaks;
                return verdict("v oscillates", peaks >= 3, fmt::format("{} local maxima", peaks));
            }};
}

QualitativeCheck near_equilibrium(double relative)
{
    return {fmt::format("final state within {:g}% of the coexistence equilibrium", 100 * relative),
            [relative](const RunRecord& r) {
                const PopulationState eq = coexistence_equilibrium(r.config.problem.params);
                const std::size_t n = r.series.size() - 1;
                const double dev = std::max({std::abs(r.series.f[n] - eq.insects) / eq.insects,
                                             std::abs(r.series.s[n] - eq.spiders) / eq.spiders,
                                             std::abs(r.series.v[n] - eq.pests) / eq.pests});
                return verdict("near equilibrium", dev <= relative,
                               fmt::format("largest relative deviation {:.4f}", dev));
            }};
}

QualitativeCheck pests_persist()
{
    return {"pests persist without spraying", [](const RunRecord& r) {
                const double lowest = min_of(r.series.v);
                return verdict("v > 0 throughout", lowest > 0.0, fmt::format("min v = {:.6g}", lowest));
            }};
}

QualitativeCheck saturated_share(double share)
{
    return {fmt::format("u = 1 on at least {:g}% of the horizon", 100 * share), [share](const RunRecord& r) {
                const double horizon = r.config.problem.horizon;
                const SaturationStats st = saturation(r.fixed->control);
                return verdict("saturated share", st.total >= share * horizon,
                               fmt::format("u = 1 on {:.3f} days ({:.2f}%)", st.total, 100 * st.total / horizon));
            }};
}

QualitativeCheck saturated_run(double days)
{
    return {fmt::format("a contiguous stretch of u = 1 longer than {:g} days", days), [days](const RunRecord& r) {
                const SaturationStats st = saturation(r.fixed->control);
                return verdict("saturated run", st.longest > days,
                               fmt::format("longest stretch {:.3f} days", st.longest));
            }};
}

QualitativeCheck moderate_spraying()
{
    return {"max u < 0.4 and mean u over [20, T] < 0.05", [](const RunRecord& r) {
                const ControlSignal& u = r.fixed->control;
                const double mx = u.max();
                const double late = u.mean(20.0, u.end());
                return verdict("moderate spraying", mx < 0.4 && late < 0.05,
                               fmt::format("max u = {:.4f}, late mean = {:.5f}", mx, late));
            }};
}

QualitativeCheck stationary(double bound)
{
    return {fmt::format("stationarity residual <= {:g}", bound), [bound](const RunRecord& r) {
                const double res = r.fixed->stationarity_residual;
                return verdict("stationary", r.fixed->converged && res <= bound,
                               fmt::format("residual {:.3g}, converged {}", res, r.fixed->converged));
            }};
}

QualitativeCheck eradicated(std::optional<std::pair<double, double>> window)
{
    std::string text = "final |v| <= 1e-6 with spiders alive";
    if (window) text += fmt::format(", eradication time in [{:g}, {:g}]", window->first, window->second);
    return {text, [window](const RunRecord& r) {
                const MinTimeReport& m = *r.mintime;
                const double lowest_s = min_of(r.series.s);
                bool ok = std::abs(m.terminal.pests) <= 1e-6 && lowest_s > 0.0;
                if (window) ok = ok && m.minimal_time >= window->first && m.minimal_time <= window->second;
                return verdict("eradicated", ok,
                               fmt::format("T* = {:.6f}, v(T*) = {:.3g}, min s = {:.4f}", m.minimal_time,
                                           m.terminal.pests, lowest_s));
            }};
}

std::vector<ScenarioPreset> build_presets()
{
    std::vector<ScenarioPreset> out;
    out.push_back({"no-spray-50", "no spraying, reference parameters, 50 days", simulation(50.0),
                   {control_identically_zero(), pests_oscillate(), near_equilibrium(0.25)}});
    out.push_back({"xi0-T50", "minimize the pest integral with free spraying, 50 days", fixed_solve(0.0, 50.0, 2000),
                   {saturated_share(0.10)}});
    out.push_back({"xi0-T150", "minimize the pest integral with free spraying, 150 days",
                   fixed_solve(0.0, 150.0, 1000), {saturated_run(50.0)}});
    out.push_back({"xi50-T50", "pests plus quadratic spraying cost (weight 50), 50 days",
                   fixed_solve(50.0, 50.0, 2000), {moderate_spraying(), stationary(1e-3)}});
    out.push_back({"no-spray-150", "no spraying, reference parameters, 150 days", simulation(150.0),
                   {control_identically_zero(), near_equilibrium(0.10)}});

    ModelParams low_birth;
    low_birth.pest_birth = 0.3;
    RunConfig e03 = simulation(50.0);
    e03.problem.params.pest_birth = low_birth.pest_birth;
    out.push_back({"no-spray-e03", "no spraying, pest birth rate 0.3, 50 days", e03,
                   {control_identically_zero(), pests_persist()}});

    out.push_back({"mintime-paper", "least eradication time, c = 2 and e = 0.3", min_time(mintime_params()),
                   {eradicated(std::pair{0.45, 0.75})}});
    out.push_back({"mintime-prose", "least eradication time, c = 0.2 and e = 0.3", min_time(low_birth),
                   {eradicated(std::nullopt)}});
    return out;
}

template <class E>
[[noreturn]] void rethrow_as(std::string_view name, const E& err)
{
    throw E(fmt::format("scenario {}: {}", name, err.what()));
}

} // namespace

const std::vector<ScenarioPreset>& scenario_presets()
{
    static const std::vector<ScenarioPreset> presets = build_presets();
    return presets;
}

const ScenarioPreset* find_preset(std::string_view name)
{
    for (const auto& p : scenario_presets())
        if (p.name == name) return &p;
    return nullptr;
}

SaturationStats saturation(const ControlSignal& u, double slack)
{
    SaturationStats st;
    if (u.empty()) return st;
    const auto& g = u.grid();
    const auto& v = u.values();
    double run = 0.0;
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        if (v[i] >= 1.0 - slack && v[i + 1] >= 1.0 - slack) {
            const double dt = g[i + 1] - g[i];
            st.total += dt;
            run += dt;
            st.longest = std::max(st.longest, run);
        } else {
            run = 0.0;
        }
    }
    return st;
}

RunRecord execute(std::string name, const RunConfig& cfg)
{
    validate_run_config(cfg);
    RunRecord rec;
    rec.name = std::move(name);
    rec.config = cfg;
    const auto start = std::chrono::steady_clock::now();

    switch (cfg.solver) {
    case SolverChoice::Simulate: {
        ProblemSpec spec = cfg.problem;
        spec.kind = ProblemKind::FixedHorizon;
        const auto grid = uniform_grid(0.0, spec.horizon, cfg.step());
        const ControlSignal u = ControlSignal::constant(grid, cfg.constant_control);
        rec.series = make_series(integrate_forward_on(spec, u, grid), u);
        break;
    }
    case SolverChoice::Fixed: {
        ProblemSpec spec = cfg.problem;
        spec.kind = ProblemKind::FixedHorizon;
        SolveReport r;
        switch (cfg.method) {
        case FixedMethod::Sweep: r = solve_fbs(spec, cfg.fixed); break;
        case FixedMethod::ProjectedGradient: r = solve_projected_gradient(spec, cfg.fixed); break;
        case FixedMethod::Auto: r = solve_fixed(spec, cfg.fixed); break;
        }
        rec.series = make_series(r.states, r.control, &r.adjoints);
        rec.converged = r.converged;
        rec.fixed = std::move(r);
        break;
    }
    case SolverChoice::MinTime: {
        ProblemSpec spec = cfg.problem;
        spec.kind = ProblemKind::MinTime;
        MinTimeReport r = solve_min_time(spec, cfg.mintime);
        rec.series = make_series(r.states, r.control, &r.adjoints);
        rec.mintime = std::move(r);
        break;
    }
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

RunRecord execute_and_write(std::string name, const RunConfig& cfg, const std::filesystem::path& dir)
{
    RunRecord rec = execute(std::move(name), cfg);
    rec.files = emit_run(rec.series, dir, rec.name);
    return rec;
}

RunRecord run_scenario(std::string_view name, const std::filesystem::path& out_dir, std::optional<double> step)
{
    const ScenarioPreset* preset = find_preset(name);
    if (!preset) throw InvalidArgument(fmt::format("unknown scenario '{}'", name));
    RunConfig cfg = preset->config;
    if (step) cfg.set_step(*step);
    try {
        return execute_and_write(preset->name, cfg, out_dir / preset->name);
    } catch (const ConfigError&) {
        throw;
    } catch (const Infeasible& e) {
        rethrow_as(name, e);
    } catch (const InvalidArgument& e) {
        rethrow_as(name, e);
    } catch (const BlowUp& e) {
        throw BlowUp(fmt::format("scenario {}: {}", name, e.what()), e.time());
    } catch (const Error& e) {
        rethrow_as(name, e);
    }
}

std::vector<CheckResult> evaluate_checks(const ScenarioPreset& preset, const RunRecord& record)
{
    std::vector<CheckResult> out;
    for (const auto& c : preset.checks) {
        CheckResult r = c.evaluate(record);
        r.description = c.description;
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace agrospray
