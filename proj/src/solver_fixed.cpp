#include "agrospray/solver_fixed.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "agrospray/error.hpp"

namespace agrospray {

namespace {

double weighted_dot(const std::vector<double>& w, const std::vector<double>& a, const std::vector<double>& b)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) sum += w[i] * a[i] * b[i];
    return sum;
}

std::vector<double> control_at_nodes(const ControlSignal& u, const std::vector<double>& grid)
{
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] = u(grid[i]);
    return out;
}

ProblemSpec fixed_problem(const ProblemSpec& spec)
{
    spec.validate();
    ProblemSpec s = spec;
    s.kind = ProblemKind::FixedHorizon;
    return s;
}

// Penalized merit of a trial control; +inf when the populations blow up.
double merit(const ProblemSpec& spec, const ControlSignal& u, const std::vector<double>& grid, double mu)
{
    try {
        const StateTrajectory traj = integrate_forward_on(spec, u, grid);
        return evaluate_cost(traj, u, spec.params) + negative_state_penalty(traj, mu);
    } catch (const BlowUp&) {
        return std::numeric_limits<double>::infinity();
    }
}

void finalize(SolveReport& report, const ProblemSpec& spec, const FixedSolveConfig& cfg)
{
    report.states = integrate_forward_on(spec, report.control, report.control.grid());
    report.adjoints = integrate_adjoint_backward(report.states, report.control, spec.params,
                                                 ProblemKind::FixedHorizon, AdjointState{0, 0, 0, 1},
                                                 cfg.integrator, cfg.state_penalty);
    report.objective = evaluate_cost(report.states, report.control, spec.params);
    report.merit = report.objective + negative_state_penalty(report.states, cfg.state_penalty);
    report.stationarity_residual = stationarity_residual(report.control, report.adjoints, spec.params);
    report.min_population = std::numeric_limits<double>::infinity();
    for (const auto& x : report.states.values)
        report.min_population = std::min({report.min_population, x.insects, x.spiders, x.pests});
}


// Adds `value` to the two control nodes whose hat functions are nonzero at t.
void scatter(const std::vector<double>& cg, double t, double value, std::vector<double>& grad)
{
    const auto it = std::upper_bound(cg.begin() + 1, cg.end() - 1, t);
    const std::size_t j = static_cast<std::size_t>(it - cg.begin()) - 1;
    const double theta = std::clamp((t - cg[j]) / (cg[j + 1] - cg[j]), 0.0, 1.0);
    grad[j] += (1.0 - theta) * value;
    grad[j + 1] += theta * value;
}

using Vec3 = std::array<double, 3>;

// J(x)^T l for the state Jacobian J of the dynamics.
Vec3 jacobian_transpose(const Vec3& x, const Vec3& l, const ModelParams& p)
{
    const AdjointState d =
        adjoint_rhs_mintime(AdjointState{l[0], l[1], l[2], 0.0}, PopulationState::from_array(x), p);
    return {-d.insects, -d.spiders, -d.pests};
}

// Exact derivative of the trapezoidal cost (plus penalty) of the RK4 solution
// with respect to the control node values: reverse-mode sweep through every
// RK4 stage. The control enters the dynamics additively, so df/du is the
// constant vector whose dot product with l is phi(l).
std::vector<double> discrete_gradient(const StateTrajectory& traj, const ControlSignal& u, const ModelParams& p,
                                      double mu)
{
    const auto& grid = traj.grid;
    const auto& cg = u.grid();
    const auto w = trapezoid_weights(grid);
    const std::size_t n = grid.size();
    std::vector<double> grad(cg.size(), 0.0);
    auto dfdu = [&](const Vec3& bar) { return switching_function(AdjointState{bar[0], bar[1], bar[2], 0.0}, p); };
    auto f = [&](const Vec3& x, double t) { return dynamics_rhs(PopulationState::from_array(x), u(t), p).as_array(); };
    auto node_cost = [&](std::size_t i, Vec3& bar) {
        const Vec3 x = traj.values[i].as_array();
        bar[2] += w[i];
        for (std::size_t c = 0; c < 3; ++c) bar[c] += w[i] * mu * std::min(x[c], 0.0);
        scatter(cg, grid[i], w[i] * p.control_weight * u(grid[i]), grad);
    };

    Vec3 bar{0.0, 0.0, 0.0};
    node_cost(n - 1, bar);
    for (std::size_t i = n - 1; i-- > 0;) {
        const double t = grid[i], h = grid[i + 1] - t;
        const Vec3 y = traj.values[i].as_array();
        auto axpy = [](const Vec3& a, double s, const Vec3& b) {
            return Vec3{a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]};
        };
        const Vec3 k1 = f(y, t);
        const Vec3 y2 = axpy(y, 0.5 * h, k1);
        const Vec3 k2 = f(y2, t + 0.5 * h);
        const Vec3 y3 = axpy(y, 0.5 * h, k2);
        const Vec3 k3 = f(y3, t + 0.5 * h);
        const Vec3 y4 = axpy(y, h, k3);

        Vec3 k1b, k2b, k3b, k4b;
        for (std::size_t c = 0; c < 3; ++c) {
            k1b[c] = h / 6.0 * bar[c];
            k2b[c] = h / 3.0 * bar[c];
            k3b[c] = h / 3.0 * bar[c];
            k4b[c] = h / 6.0 * bar[c];
        }
        Vec3 yb = bar;
        auto stage = [&](const Vec3& x, double s, const Vec3& kb, Vec3* into, double scale) {
            scatter(cg, s, dfdu(kb), grad);
            const Vec3 xb = jacobian_transpose(x, kb, p);
            for (std::size_t c = 0; c < 3; ++c) {
                yb[c] += xb[c];
                if (into) (*into)[c] += scale * xb[c];
            }
        };
        stage(y4, t + h, k4b, &k3b, h);
        stage(y3, t + 0.5 * h, k3b, &k2b, 0.5 * h);
        stage(y2, t + 0.5 * h, k2b, &k1b, 0.5 * h);
        stage(y, t, k1b, nullptr, 0.0);
        bar = yb;
        node_cost(i, bar);
    }
    return grad;
}

} // namespace

void FixedSolveConfig::validate() const
{
    integrator.validate();
    if (max_iterations < 0) throw InvalidArgument("max_iterations must be non-negative");
    if (!(relaxation > 0.0 && relaxation <= 1.0)) throw InvalidArgument("relaxation must lie in (0, 1]");
    if (!(tolerance > 0.0)) throw InvalidArgument("tolerance must be positive");
    if (!(state_penalty >= 0.0)) throw InvalidArgument("state_penalty must be non-negative");
    const auto& ls = line_search;
    if (!(ls.shrink > 0.0 && ls.shrink < 1.0)) throw InvalidArgument("line search shrink must lie in (0, 1)");
    if (!(ls.armijo > 0.0 && ls.armijo < 1.0)) throw InvalidArgument("Armijo constant must lie in (0, 1)");
    if (!(ls.initial_step > 0.0)) throw InvalidArgument("initial step must be positive");
}

double evaluate_cost(const StateTrajectory& traj, const ControlSignal& u, const ModelParams& p)
{
    if (traj.empty()) return 0.0;
    if (u.empty()) throw InvalidArgument("evaluate_cost: empty control");
    const double slack = 1e-9 * std::max(1.0, std::abs(traj.end()));
    if (std::abs(u.start() - traj.start()) > slack || std::abs(u.end() - traj.end()) > slack)
        throw InvalidArgument("evaluate_cost: control and trajectory span different intervals");
    const auto w = trapezoid_weights(traj.grid);
    double sum = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double ui = u(traj.grid[i]);
        sum += w[i] * (traj.values[i].pests + 0.5 * p.control_weight * ui * ui);
    }
    return sum;
}

double negative_state_penalty(const StateTrajectory& traj, double mu)
{
    if (!(mu > 0.0) || traj.empty()) return 0.0;
    const auto w = trapezoid_weights(traj.grid);
    double sum = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i)
        for (double c : traj.values[i].as_array())
            if (c < 0.0) sum += w[i] * c * c;
    return 0.5 * mu * sum;
}

GradientEvaluation cost_gradient(const ControlSignal& u, const ProblemSpec& spec, const IntegratorConfig& cfg,
                                 double state_penalty)
{
    const ProblemSpec fixed = fixed_problem(spec);
    if (fixed.params.control_weight < 0.0) throw InvalidArgument("cost_gradient: negative control weight");

    GradientEvaluation out;
    out.states = integrate_forward(fixed, u, cfg);
    out.cost = evaluate_cost(out.states, u, fixed.params) + negative_state_penalty(out.states, state_penalty);
    out.adjoints = integrate_adjoint_backward(out.states, u, fixed.params, ProblemKind::FixedHorizon,
                                              AdjointState{0, 0, 0, 1}, cfg, state_penalty);

    const auto& grid = out.states.grid;
    const auto w = trapezoid_weights(grid);
    out.sensitivity.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        out.sensitivity[i] = fixed.params.control_weight * u(grid[i])
                             + switching_function(out.adjoints.values[i], fixed.params);

    out.gradient = discrete_gradient(out.states, u, fixed.params, state_penalty);
    return out;
}

double stationarity_residual(const ControlSignal& u, const AdjointTrajectory& adjoints, const ModelParams& p)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < adjoints.size(); ++i) {
        const double ui = u(adjoints.grid[i]);
        const double r = p.control_weight > 0.0
                             ? std::abs(ui - control_from_adjoint(adjoints.values[i], p))
                             : std::min(ui, 1.0 - ui) * std::abs(switching_function(adjoints.values[i], p));
        worst = std::max(worst, r);
    }
    return worst;
}

SolveReport solve_fbs(const ProblemSpec& spec, const FixedSolveConfig& cfg)
{
    cfg.validate();
    const ProblemSpec fixed = fixed_problem(spec);
    if (!(fixed.params.control_weight > 0.0))
        throw DivisionByZero("solve_fbs: the sweep update needs a positive control weight");

    const std::vector<double> grid = uniform_grid(0.0, fixed.horizon, cfg.integrator.step);
    std::vector<double> u(grid.size(), 0.0);
    std::vector<double> proj(grid.size());

    SolveReport report;
    report.method = "forward-backward sweep";
    const double omega = cfg.relaxation;
    for (int it = 1; it <= cfg.max_iterations; ++it) {
        const ControlSignal current(grid, u);
        const StateTrajectory traj = integrate_forward_on(fixed, current, grid);
        report.objective_history.push_back(evaluate_cost(traj, current, fixed.params)
                                           + negative_state_penalty(traj, cfg.state_penalty));
        const AdjointTrajectory adj = integrate_adjoint_backward(traj, current, fixed.params,
                                                                 ProblemKind::FixedHorizon, AdjointState{0, 0, 0, 1},
                                                                 cfg.integrator, cfg.state_penalty);
        double change = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            proj[i] = control_from_adjoint(adj.values[i], fixed.params);
            const double next = (1.0 - omega) * u[i] + omega * proj[i];
            change = std::max(change, std::abs(next - u[i]));
            u[i] = next;
        }
        report.iterations = it;
        if (change < cfg.tolerance) {
            report.converged = true;
            break;
        }
    }
    report.control = ControlSignal::projected(grid, u);
    finalize(report, fixed, cfg);
    return report;
}

SolveReport solve_projected_gradient(const ProblemSpec& spec, const FixedSolveConfig& cfg,
                                     const std::optional<ControlSignal>& initial)
{
    cfg.validate();
    const ProblemSpec fixed = fixed_problem(spec);
    const auto& ls = cfg.line_search;
    const std::vector<double> grid = uniform_grid(0.0, fixed.horizon, cfg.integrator.step);
    const std::vector<double> w = trapezoid_weights(grid);
    const std::size_t n = grid.size();

    std::vector<double> u = initial ? control_at_nodes(*initial, grid) : std::vector<double>(n, 0.0);
    for (double& v : u) v = std::clamp(v, 0.0, 1.0);

    SolveReport report;
    report.method = "projected gradient";
    GradientEvaluation g = cost_gradient(ControlSignal(grid, u), fixed, cfg.integrator, cfg.state_penalty);
    report.objective_history.push_back(g.cost);

    std::vector<double> prev_u, prev_sens, trial(n), step(n);
    double alpha = ls.initial_step;
    for (int it = 1; it <= cfg.max_iterations; ++it) {
        const auto& sens = g.sensitivity;
        double pg = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            pg = std::max(pg, std::abs(std::clamp(u[i] - sens[i], 0.0, 1.0) - u[i]));
        if (pg < cfg.tolerance) {
            report.converged = true;
            break;
        }

        if (!prev_u.empty()) {
            // Barzilai-Borwein estimate in the L2 inner product.
            std::vector<double> ds(n), dy(n);
            for (std::size_t i = 0; i < n; ++i) {
                ds[i] = u[i] - prev_u[i];
                dy[i] = sens[i] - prev_sens[i];
            }
            const double sy = weighted_dot(w, ds, dy);
            const double ss = weighted_dot(w, ds, ds);
            alpha = sy > 0.0 ? ss / sy : alpha / ls.shrink;
        }
        alpha = std::clamp(alpha, ls.min_step, ls.max_step);

        bool accepted = false;
        for (int bt = 0; bt <= ls.max_backtracks; ++bt) {
            double decrease = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                trial[i] = std::clamp(u[i] - alpha * sens[i], 0.0, 1.0);
                step[i] = trial[i] - u[i];
                decrease += w[i] * sens[i] * step[i];
            }
            const double trial_cost = merit(fixed, ControlSignal(grid, trial), grid, cfg.state_penalty);
            if (trial_cost <= g.cost + ls.armijo * decrease) {
                accepted = true;
                break;
            }
            alpha *= ls.shrink;
            if (alpha < ls.min_step) break;
        }
        report.iterations = it;
        if (!accepted) break; // no descent possible at this resolution

        prev_u = u;
        prev_sens = sens;
        u = trial;
        g = cost_gradient(ControlSignal(grid, u), fixed, cfg.integrator, cfg.state_penalty);
        report.objective_history.push_back(g.cost);
    }
    report.control = ControlSignal(grid, u);
    finalize(report, fixed, cfg);
    return report;
}

SolveReport solve_fixed(const ProblemSpec& spec, const FixedSolveConfig& cfg)
{
    if (spec.params.control_weight > 0.0) return solve_fbs(spec, cfg);
    if (!cfg.bang_bang_zero_weight)
        throw DivisionByZero("solve_fixed: xi = 0 requires the projected-gradient route");
    return solve_projected_gradient(spec, cfg);
}

} // namespace agrospray
