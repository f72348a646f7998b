#include "agrospray/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "agrospray/error.hpp"

namespace agrospray {

namespace {

using Vec3 = std::array<double, 3>;

PopulationState hermite(const PopulationState& x0, const PopulationState& d0, const PopulationState& x1,
                        const PopulationState& d1, double dt, double theta)
{
    const double t2 = theta * theta, t3 = t2 * theta;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + theta;
    const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    auto mix = [&](double a0, double da0, double a1, double da1) {
        return h00 * a0 + h10 * dt * da0 + h01 * a1 + h11 * dt * da1;
    };
    return {mix(x0.insects, d0.insects, x1.insects, d1.insects),
            mix(x0.spiders, d0.spiders, x1.spiders, d1.spiders),
            mix(x0.pests, d0.pests, x1.pests, d1.pests)};
}

void require_covers(const ControlSignal& u, double t0, double t1, const char* op)
{
    if (u.empty()) throw InvalidArgument(std::string(op) + ": empty control");
    const double slack = 1e-9 * std::max(1.0, std::abs(t1));
    if (u.start() > t0 + slack || u.end() < t1 - slack)
        throw InvalidArgument(std::string(op) + ": control does not cover the integration interval");
}

Vec3 forward_step(const ProblemSpec& spec, const ControlSignal& u, double t, const Vec3& y, double dt)
{
    return rk4_step(
        [&](double s, const Vec3& z) {
            const auto x = PopulationState::from_array(z);
            if (!x.finite()) throw BlowUp("state became non-finite near t = " + std::to_string(s), s);
            return dynamics_rhs(x, u(s), spec.params).as_array();
        },
        t, y, dt);
}

void check_finite(const PopulationState& x, double t)
{
    if (!x.finite()) throw BlowUp("state became non-finite at t = " + std::to_string(t), t);
}

} // namespace

void IntegratorConfig::validate() const
{
    if (!(step > 0.0) || !std::isfinite(step)) throw InvalidArgument("integrator step must be positive");
    if (!(event_tolerance > 0.0)) throw InvalidArgument("event tolerance must be positive");
}

PopulationState StateTrajectory::at(double t) const
{
    if (t <= grid.front()) return values.front();
    if (t >= grid.back()) return values.back();
    const auto it = std::upper_bound(grid.begin(), grid.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - grid.begin()) - 1;
    const double dt = grid[i + 1] - grid[i];
    return hermite(values[i], rates[i], values[i + 1], rates[i + 1], dt, (t - grid[i]) / dt);
}

StateTrajectory integrate_forward_on(const ProblemSpec& spec, const ControlSignal& u,
                                     const std::vector<double>& grid)
{
    if (grid.size() < 2) throw InvalidArgument("integrate_forward: grid needs at least two nodes");
    require_covers(u, grid.front(), grid.back(), "integrate_forward");
    if (!spec.init.finite()) throw InvalidArgument("integrate_forward: non-finite initial state");

    StateTrajectory traj;
    traj.grid = grid;
    traj.values.reserve(grid.size());
    traj.rates.reserve(grid.size());
    Vec3 y = spec.init.as_array();
    traj.values.push_back(spec.init);
    traj.rates.push_back(dynamics_rhs(spec.init, u(grid[0]), spec.params));
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        y = forward_step(spec, u, grid[i], y, grid[i + 1] - grid[i]);
        const auto x = PopulationState::from_array(y);
        check_finite(x, grid[i + 1]);
        traj.values.push_back(x);
        traj.rates.push_back(dynamics_rhs(x, u(grid[i + 1]), spec.params));
    }
    return traj;
}

StateTrajectory integrate_forward(const ProblemSpec& spec, const ControlSignal& u,
                                  const IntegratorConfig& cfg)
{
    cfg.validate();
    return integrate_forward_on(spec, u, uniform_grid(0.0, spec.horizon, cfg.step));
}

AdjointTrajectory integrate_adjoint_backward(const StateTrajectory& traj, const ControlSignal& u,
                                             const ModelParams& p, ProblemKind kind,
                                             const AdjointState& terminal, const IntegratorConfig& cfg,
                                             double negative_state_penalty)
{
    cfg.validate();
    if (traj.size() < 2 || traj.rates.size() != traj.size())
        throw InvalidArgument("integrate_adjoint_backward: incomplete state trajectory");
    require_covers(u, traj.start(), traj.end(), "integrate_adjoint_backward");
    if (!terminal.finite()) throw InvalidArgument("integrate_adjoint_backward: non-finite terminal costate");

    const std::size_t n = traj.size();
    AdjointTrajectory out;
    out.grid = traj.grid;
    out.values.resize(n);
    out.values[n - 1] = terminal;
    Vec3 y = terminal.as_array();
    for (std::size_t i = n - 1; i > 0; --i) {
        const double t0 = traj.grid[i - 1], t1 = traj.grid[i], dt = t1 - t0;
        const PopulationState mid =
            hermite(traj.values[i - 1], traj.rates[i - 1], traj.values[i], traj.rates[i], dt, 0.5);
        auto rhs = [&](const PopulationState& x, const Vec3& z) {
            const auto l = AdjointState::from_array(z, terminal.multiplier);
            if (!l.finite()) throw BlowUp("costate became non-finite near t = " + std::to_string(t0), t0);
            Vec3 d = adjoint_rhs(kind, l, x, p).as_array();
            if (negative_state_penalty > 0.0) {
                const Vec3 xs = x.as_array();
                for (std::size_t j = 0; j < 3; ++j) d[j] -= negative_state_penalty * std::min(xs[j], 0.0);
            }
            return d;
        };
        auto axpy = [](const Vec3& a, double s, const Vec3& b) {
            return Vec3{a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]};
        };
        // Classical RK4 with step -dt; the stages sit at t1, the midpoint and t0.
        const double h = -dt;
        const Vec3 k1 = rhs(traj.values[i], y);
        const Vec3 k2 = rhs(mid, axpy(y, 0.5 * h, k1));
        const Vec3 k3 = rhs(mid, axpy(y, 0.5 * h, k2));
        const Vec3 k4 = rhs(traj.values[i - 1], axpy(y, h, k3));
        for (std::size_t j = 0; j < 3; ++j) y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        const auto l = AdjointState::from_array(y, terminal.multiplier);
        if (!l.finite()) throw BlowUp("costate became non-finite at t = " + std::to_string(t0), t0);
        out.values[i - 1] = l;
    }
    return out;
}

EventResult integrate_with_event(const ProblemSpec& spec, const ControlSignal& u, const IntegratorConfig& cfg)
{
    cfg.validate();
    const std::vector<double> grid = uniform_grid(0.0, spec.horizon, cfg.step);
    require_covers(u, grid.front(), grid.back(), "integrate_with_event");
    if (!spec.init.finite()) throw InvalidArgument("integrate_with_event: non-finite initial state");

    EventResult out;
    auto& traj = out.trajectory;
    auto push = [&](double t, const PopulationState& x) {
        traj.grid.push_back(t);
        traj.values.push_back(x);
        traj.rates.push_back(dynamics_rhs(x, u(t), spec.params));
    };
    push(grid[0], spec.init);
    if (spec.init.pests <= 0.0) {
        out.event_time = grid[0];
        return out;
    }

    Vec3 y = spec.init.as_array();
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double t = grid[i], dt = grid[i + 1] - grid[i];
        const Vec3 next = forward_step(spec, u, t, y, dt);
        check_finite(PopulationState::from_array(next), grid[i + 1]);
        if (next[2] > 0.0) {
            y = next;
            push(grid[i + 1], PopulationState::from_array(y));
            continue;
        }
        // Down-crossing inside (t, t + dt]: bisect on the length of the step.
        double lo = 0.0, hi = dt;
        Vec3 hit = next;
        double tau = dt;
        for (int it = 0; it < 200 && std::abs(hit[2]) > cfg.event_tolerance; ++it) {
            tau = 0.5 * (lo + hi);
            hit = forward_step(spec, u, t, y, tau);
            if (hit[2] > 0.0)
                lo = tau;
            else
                hi = tau;
            if (hi - lo <= 1e-15 * std::max(1.0, t)) break;
        }
        const auto x = PopulationState::from_array(hit);
        if (t + tau > traj.grid.back()) {
            push(t + tau, x);
        } else {
            traj.values.back() = x;
            traj.rates.back() = dynamics_rhs(x, u(t), spec.params);
        }
        out.event_time = traj.grid.back();
        return out;
    }
    return out;
}

} // namespace agrospray
