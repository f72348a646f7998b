#pragma once

#include <array>
#include <optional>
#include <vector>

#include "agrospray/control.hpp"
#include "agrospray/model.hpp"

namespace agrospray {

struct IntegratorConfig {
    double step = 0.01;             ///< RK4 step [days]
    double event_tolerance = 1e-8;  ///< |v| accepted at a located crossing

    void validate() const;
};

/// Values sampled on a strictly increasing grid.
template <class Value>
struct Trajectory {
    std::vector<double> grid;
    std::vector<Value> values;

    std::size_t size() const { return grid.size(); }
    bool empty() const { return grid.empty(); }
    double start() const { return grid.front(); }
    double end() const { return grid.back(); }
    const Value& back() const { return values.back(); }
};

/// State trajectory together with the state derivative at every node, which
/// the backward pass uses for cubic Hermite interpolation.
struct StateTrajectory : Trajectory<PopulationState> {
    std::vector<PopulationState> rates;

    /// Cubic Hermite interpolant at t (clamped to the grid).
    PopulationState at(double t) const;
};

using AdjointTrajectory = Trajectory<AdjointState>;

/// One classical Runge-Kutta step for y' = rhs(t, y). A negative dt steps
/// backwards in time.
template <class Rhs>
std::array<double, 3> rk4_step(Rhs&& rhs, double t, const std::array<double, 3>& y, double dt)
{
    auto axpy = [](const std::array<double, 3>& a, double s, const std::array<double, 3>& b) {
        return std::array<double, 3>{a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]};
    };
    const double half = 0.5 * dt;
    const auto k1 = rhs(t, y);
    const auto k2 = rhs(t + half, axpy(y, half, k1));
    const auto k3 = rhs(t + half, axpy(y, half, k2));
    const auto k4 = rhs(t + dt, axpy(y, dt, k3));
    std::array<double, 3> out;
    for (std::size_t i = 0; i < 3; ++i) out[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

/// RK4 solution of the controlled model on {0, dt, ..., T}, T = spec.horizon.
/// The control must cover [0, T]. Throws BlowUp on non-finite states.
StateTrajectory integrate_forward(const ProblemSpec& spec, const ControlSignal& u,
                                  const IntegratorConfig& cfg = {});

/// Same, on an explicit grid starting at 0.
StateTrajectory integrate_forward_on(const ProblemSpec& spec, const ControlSignal& u,
                                     const std::vector<double>& grid);

/// Integrates the costate system of `kind` from `terminal` at the end of
/// `traj` back to its start, on the same grid. `terminal.multiplier` is carried
/// through unchanged.
///
/// A positive `negative_state_penalty` mu adds the costate forcing of the
/// running penalty mu/2 * sum(min(x_i, 0)^2), i.e. l_i' -= mu * min(x_i, 0).
AdjointTrajectory integrate_adjoint_backward(const StateTrajectory& traj, const ControlSignal& u,
                                             const ModelParams& p, ProblemKind kind,
                                             const AdjointState& terminal,
                                             const IntegratorConfig& cfg = {},
                                             double negative_state_penalty = 0.0);

struct EventResult {
    StateTrajectory trajectory;      ///< truncated at the event when one occurs
    std::optional<double> event_time; ///< first down-crossing of the pest count
};

/// Forward integration on [0, spec.horizon] that stops at the first time the
/// pest count crosses zero from above. The crossing is located by bisection
/// on the length of the last step until |v| <= event tolerance.
EventResult integrate_with_event(const ProblemSpec& spec, const ControlSignal& u,
                                 const IntegratorConfig& cfg = {});

} // namespace agrospray
