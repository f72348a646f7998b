#include "agrospray/solver_mintime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "agrospray/error.hpp"

namespace agrospray {

namespace {

ProblemSpec with_horizon(const ProblemSpec& spec, double horizon)
{
    ProblemSpec s = spec;
    s.horizon = horizon;
    s.kind = ProblemKind::MinTime;
    return s;
}

// At least two integration steps, so that every control has three nodes.
std::vector<double> reach_grid(double horizon, const IntegratorConfig& cfg)
{
    return uniform_grid(0.0, horizon, std::min(cfg.step, 0.5 * horizon));
}

bool spiders_positive(const StateTrajectory& traj)
{
    return std::all_of(traj.values.begin(), traj.values.end(),
                       [](const PopulationState& x) { return x.spiders > 0.0; });
}

struct EventCheck {
    bool hit = false;
    EventResult result;
};

EventCheck pests_vanish(const ProblemSpec& spec, const ControlSignal& u, double horizon,
                        const IntegratorConfig& cfg)
{
    IntegratorConfig c = cfg;
    c.step = std::min(cfg.step, 0.5 * horizon);
    EventCheck out;
    out.result = integrate_with_event(with_horizon(spec, horizon), u, c);
    out.hit = out.result.event_time.has_value() && spiders_positive(out.result.trajectory);
    return out;
}

// Resample a control onto a (possibly shorter) grid, keeping at least three nodes.
ControlSignal restrict_control(const ControlSignal& u, std::vector<double> grid)
{
    if (grid.size() == 2) grid.insert(grid.begin() + 1, 0.5 * (grid[0] + grid[1]));
    std::vector<double> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) values[i] = u(grid[i]);
    return ControlSignal::projected(std::move(grid), std::move(values));
}

// Evaluates states, costates and the multiplier for a control that eradicates
// the pests at the end of `traj`.
void attach_extremal(MinTimeReport& report, const StateTrajectory& traj, const ControlSignal& u,
                     const ProblemSpec& spec, const MinTimeConfig& cfg)
{
    const ModelParams& p = spec.params;
    report.states = traj;
    report.control = restrict_control(u, traj.grid);
    if (report.states.size() == 2) report.states = integrate_forward_on(spec, report.control, report.control.grid());
    report.minimal_time = report.states.end();
    report.terminal = report.states.back();

    // f(T), s(T) free and v(T) fixed: the terminal costate is (0, 0, nu); nu = 1
    // normalizes it, and H(T) = 0 fixes the multiplier.
    AdjointState terminal{0.0, 0.0, 1.0, 0.0};
    const PopulationState rate_T = dynamics_rhs(report.terminal, report.control(report.minimal_time), p);
    terminal.multiplier = -rate_T.pests;
    report.multiplier = terminal.multiplier;
    report.adjoints = integrate_adjoint_backward(report.states, report.control, p, ProblemKind::MinTime,
                                                 terminal, cfg.integrator);
    const MinTimeDiagnostics d = pmp_diagnostics_mintime(report, p, cfg.singular_threshold);
    report.hamiltonian_residual = d.hamiltonian_residual;
    report.bang_disagreement = d.bang_disagreement;
    report.singular_nodes = d.singular_nodes;
}

} // namespace

void MinTimeConfig::validate() const
{
    integrator.validate();
    if (!(lower >= 0.0 && upper > lower)) throw InvalidArgument("min-time bracket must satisfy 0 <= T_lo < T_hi");
    if (!(time_tolerance > 0.0)) throw InvalidArgument("time tolerance must be positive");
    if (!(singular_threshold >= 0.0)) throw InvalidArgument("singular threshold must be non-negative");
    if (inner_max_iterations < 1) throw InvalidArgument("inner iterations must be positive");
}

bool check_reachability(const ProblemSpec& spec, const MinTimeConfig& cfg)
{
    cfg.validate();
    if (spec.init.pests <= 0.0) return true;
    const ControlSignal full = ControlSignal::constant(reach_grid(cfg.upper, cfg.integrator), 1.0);
    return pests_vanish(spec, full, cfg.upper, cfg.integrator).hit;
}

ReachResult reach_feasible(const ProblemSpec& spec, double horizon, const MinTimeConfig& cfg)
{
    const ProblemSpec s = with_horizon(spec, horizon);
    const std::vector<double> grid = reach_grid(horizon, cfg.integrator);
    const std::vector<double> w = trapezoid_weights(grid);
    const std::size_t n = grid.size();
    const ModelParams& p = spec.params;

    auto terminal_pests = [&](const std::vector<double>& u) {
        try {
            return integrate_forward_on(s, ControlSignal(grid, u), grid).back().pests;
        } catch (const BlowUp&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    ReachResult out;
    std::vector<double> u(n, 0.5), prev_u, prev_g, g(n), trial(n);
    double alpha = 1.0;
    for (int it = 0; it < cfg.inner_max_iterations; ++it) {
        out.iterations = it + 1;
        ControlSignal current(grid, u);
        if (pests_vanish(spec, current, horizon, cfg.integrator).hit) {
            out.feasible = true;
            out.control = std::move(current);
            out.terminal_pests = terminal_pests(u);
            return out;
        }
        const StateTrajectory traj = integrate_forward_on(s, current, grid);
        const double vT = traj.back().pests;
        out.terminal_pests = vT;
        const double objective = vT * vT;
        const AdjointTrajectory adj = integrate_adjoint_backward(traj, current, p, ProblemKind::MinTime,
                                                                 AdjointState{0.0, 0.0, 2.0 * vT, 0.0},
                                                                 cfg.integrator);
        for (std::size_t i = 0; i < n; ++i) g[i] = switching_function(adj.values[i], p);

        double pg = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            scale = std::max(scale, std::abs(g[i]));
            pg = std::max(pg, std::abs(std::clamp(u[i] - g[i], 0.0, 1.0) - u[i]));
        }
        if (pg <= cfg.inner_tolerance * (1.0 + objective)) break;

        if (!prev_u.empty()) {
            double ss = 0.0, sy = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double ds = u[i] - prev_u[i], dy = g[i] - prev_g[i];
                ss += w[i] * ds * ds;
                sy += w[i] * ds * dy;
            }
            alpha = sy > 0.0 ? ss / sy : 2.0 * alpha;
        } else {
            alpha = 1.0 / std::max(scale, 1e-300);
        }

        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            double decrease = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                trial[i] = std::clamp(u[i] - alpha * g[i], 0.0, 1.0);
                decrease += w[i] * g[i] * (trial[i] - u[i]);
            }
            const double vt = terminal_pests(trial);
            if (vt * vt <= objective + 1e-4 * decrease) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;
        prev_u = u;
        prev_g = g;
        u = trial;
    }
    out.control = ControlSignal(grid, u);
    return out;
}

MinTimeReport solve_min_time(const ProblemSpec& spec, const MinTimeConfig& cfg)
{
    cfg.validate();
    spec.params.validate();
    if (!spec.init.finite() || spec.init.insects < 0.0 || spec.init.spiders < 0.0 || spec.init.pests < 0.0)
        throw InvalidArgument("solve_min_time: initial populations must be finite and non-negative");

    MinTimeReport report;
    if (spec.init.pests <= 0.0) {
        report.states.grid = {0.0};
        report.states.values = {spec.init};
        report.states.rates = {dynamics_rhs(spec.init, 0.0, spec.params)};
        report.terminal = spec.init;
        return report;
    }

    // Continual full spraying supplies the first feasible upper bound.
    const ControlSignal full = ControlSignal::constant(reach_grid(cfg.upper, cfg.integrator), 1.0);
    const EventCheck saturated = pests_vanish(spec, full, cfg.upper, cfg.integrator);
    if (!saturated.hit)
        throw Infeasible("solve_min_time: pests cannot be eradicated within T_hi = " + std::to_string(cfg.upper)
                         + " (check_reachability fails)");
    report.saturated_time = *saturated.result.event_time;

    double lo = cfg.lower, hi = report.saturated_time;
    ControlSignal best = full;
    if (lo >= hi) lo = 0.0;
    if (lo > 0.0) {
        const ReachResult r = reach_feasible(spec, lo, cfg);
        report.inner_iterations += r.iterations;
        if (r.feasible) {
            hi = lo;
            lo = 0.0;
            best = r.control;
        }
    }
    while (hi - lo > cfg.time_tolerance) {
        report.brackets.emplace_back(lo, hi);
        const double mid = 0.5 * (lo + hi);
        const ReachResult r = reach_feasible(spec, mid, cfg);
        report.inner_iterations += r.iterations;
        if (r.feasible) {
            hi = mid;
            best = r.control;
        } else {
            lo = mid;
        }
    }

    // Locate the crossing of the best control exactly, then build the extremal.
    EventCheck found = pests_vanish(spec, best, hi, cfg.integrator);
    if (!found.hit) found = saturated;
    attach_extremal(report, found.result.trajectory, best, spec, cfg);

    // Switching-function synthesis: bang arcs from sign(phi), singular control
    // where |phi| is below the threshold.
    std::vector<double> synthesized(report.adjoints.size());
    for (std::size_t i = 0; i < synthesized.size(); ++i) {
        const AdjointState& l = report.adjoints.values[i];
        const double phi = switching_function(l, spec.params);
        if (phi < -cfg.singular_threshold) {
            synthesized[i] = 1.0;
        } else if (phi > cfg.singular_threshold) {
            synthesized[i] = 0.0;
        } else {
            try {
                synthesized[i] = std::clamp(singular_control(report.states.values[i], l, spec.params), 0.0, 1.0);
            } catch (const SingularDenominator&) {
                synthesized[i] = report.control.values()[i];
            }
        }
    }
    const ControlSignal candidate(report.adjoints.grid, synthesized);
    if (candidate.values() != report.control.values()) {
        ControlSignal extended = candidate;
        if (report.minimal_time < hi) {
            auto grid = candidate.grid();
            auto values = candidate.values();
            grid.push_back(hi);
            values.push_back(values.back());
            extended = ControlSignal(std::move(grid), std::move(values));
        }
        const EventCheck check = pests_vanish(spec, extended, hi, cfg.integrator);
        if (check.hit && *check.result.event_time <= report.minimal_time + cfg.time_tolerance) {
            MinTimeReport refined = report;
            attach_extremal(refined, check.result.trajectory, extended, spec, cfg);
            report = std::move(refined);
        }
    }
    return report;
}

MinTimeDiagnostics pmp_diagnostics_mintime(const MinTimeReport& report, const ModelParams& p, double threshold)
{
    if (report.adjoints.empty()) throw InvalidArgument("pmp_diagnostics_mintime: report carries no costates");
    const bool trivial = std::all_of(report.adjoints.values.begin(), report.adjoints.values.end(),
                                     [](const AdjointState& l) {
                                         return l.insects == 0.0 && l.spiders == 0.0 && l.pests == 0.0
                                                && l.multiplier == 0.0;
                                     });
    if (trivial) throw InvalidArgument("pmp_diagnostics_mintime: costates and multiplier all vanish");

    MinTimeDiagnostics d;
    const auto& grid = report.adjoints.grid;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const AdjointState& l = report.adjoints.values[i];
        const PopulationState& x = report.states.values[i];
        const double phi = switching_function(l, p);
        // H is affine in u, so its minimum over [0, 1] sits at u = 0 or u = 1.
        const double h_min = hamiltonian(x, 0.0, l, p, ProblemKind::MinTime) + std::min(0.0, phi);
        d.hamiltonian_residual = std::max(d.hamiltonian_residual, std::abs(h_min));

        if (std::abs(phi) <= threshold) {
            ++d.singular_nodes;
            continue;
        }
        const double bang = phi < 0.0 ? 1.0 : 0.0;
        const double u = report.control(grid[i]);
        if (std::abs(u - bang) > threshold && i + 1 < grid.size()) d.bang_disagreement += grid[i + 1] - grid[i];
    }
    return d;
}

} // namespace agrospray
