#pragma once

#include <optional>
#include <string>
#include <vector>

#include "agrospray/control.hpp"
#include "agrospray/integrator.hpp"
#include "agrospray/model.hpp"

namespace agrospray {

/// Backtracking (Armijo) rule for the projected-gradient method. Trial steps
/// start from a Barzilai-Borwein estimate.
struct LineSearch {
    double initial_step = 1.0;
    double shrink = 0.5;
    double armijo = 1e-4;
    int max_backtracks = 60;
    double min_step = 1e-12;
    double max_step = 1e6;
};

struct FixedSolveConfig {
    int max_iterations = 2000;
    double relaxation = 0.5;   ///< weight of the new control in the sweep update
    double tolerance = 1e-6;   ///< sup-norm stop criterion (sweep update / projected gradient)
    LineSearch line_search;
    /// xi = 0 makes the Hamiltonian linear in u (bang-bang/singular regime);
    /// when set, solve_fixed routes it to the projected-gradient method.
    bool bang_bang_zero_weight = true;
    /// Weight mu of the exterior penalty mu/2 * integral of sum(min(x_i, 0)^2)
    /// that keeps populations non-negative. Without it the xi = 0 problem is
    /// unbounded below: spraying past v = 0 keeps lowering the integral of v.
    double state_penalty = 1e4;
    IntegratorConfig integrator;

    void validate() const;
};

struct SolveReport {
    std::string method;
    ControlSignal control;
    StateTrajectory states;
    AdjointTrajectory adjoints;
    double objective = 0.0;        ///< integral of v + xi/2 u^2
    double merit = 0.0;            ///< objective plus the negative-population penalty
    double min_population = 0.0;   ///< smallest state component along the trajectory
    int iterations = 0;
    /// xi > 0: sup |u - projection(l)|; xi = 0: sup min(u, 1 - u) |phi|.
    double stationarity_residual = 0.0;
    bool converged = false;
    /// Merit of every accepted iterate, starting with the initial guess.
    std::vector<double> objective_history;
};

/// Trapezoidal approximation of the integral of v + xi/2 u^2 over the
/// trajectory grid. Throws InvalidArgument when the control spans a different
/// interval.
double evaluate_cost(const StateTrajectory& traj, const ControlSignal& u, const ModelParams& p);

struct GradientEvaluation {
    /// Derivative of the discretized cost with respect to each control node.
    std::vector<double> gradient;
    /// dH/du = xi u + phi(l) at every integrator node.
    std::vector<double> sensitivity;
    StateTrajectory states;
    AdjointTrajectory adjoints;
    double cost = 0.0;
};

/// Penalty mu/2 * integral of sum(min(x_i, 0)^2), trapezoidal.
double negative_state_penalty(const StateTrajectory& traj, double mu);

/// Adjoint-based gradient: integrates the state forward and the costates
/// backward from zero for `sensitivity`, and differentiates the discretized
/// cost through every RK4 stage in reverse for `gradient`, which therefore
/// matches finite differences of evaluate_cost up to rounding. With a positive
/// `state_penalty` the cost and gradient are those of the penalized merit.
GradientEvaluation cost_gradient(const ControlSignal& u, const ProblemSpec& spec,
                                 const IntegratorConfig& cfg = {}, double state_penalty = 0.0);

/// Stationarity residual of a control against costates on the same grid.
double stationarity_residual(const ControlSignal& u, const AdjointTrajectory& adjoints,
                             const ModelParams& p);

/// Forward-backward sweep with relaxed projection updates. Requires xi > 0.
SolveReport solve_fbs(const ProblemSpec& spec, const FixedSolveConfig& cfg = {});

/// Projected gradient with backtracking on the control node values. Works for
/// any xi >= 0. Starts from u = 0 unless an initial control is given.
SolveReport solve_projected_gradient(const ProblemSpec& spec, const FixedSolveConfig& cfg = {},
                                     const std::optional<ControlSignal>& initial = std::nullopt);

/// Sweep for xi > 0, projected gradient for xi = 0.
SolveReport solve_fixed(const ProblemSpec& spec, const FixedSolveConfig& cfg = {});

} // namespace agrospray
