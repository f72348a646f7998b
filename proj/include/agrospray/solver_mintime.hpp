#pragma once

#include <utility>
#include <vector>

#include "agrospray/control.hpp"
#include "agrospray/integrator.hpp"
#include "agrospray/model.hpp"

namespace agrospray {

struct MinTimeConfig {
    double lower = 0.0;             ///< T_lo [days]
    double upper = 50.0;            ///< T_hi [days]
    double time_tolerance = 1e-4;   ///< bisection width on T [days]
    double singular_threshold = 1e-4; ///< |phi| below which the singular control is used
    int inner_max_iterations = 200;
    double inner_tolerance = 1e-12; ///< projected-gradient stop for the reach subproblem
    IntegratorConfig integrator;

    void validate() const;
};

struct MinTimeReport {
    double minimal_time = 0.0;
    ControlSignal control;          ///< empty when the pests are absent initially
    StateTrajectory states;
    AdjointTrajectory adjoints;
    double multiplier = 0.0;        ///< abnormal multiplier from H(T) = 0
    PopulationState terminal;
    double hamiltonian_residual = 0.0;
    double bang_disagreement = 0.0; ///< measure [days] where the control contradicts sign(phi)
    std::size_t singular_nodes = 0; ///< nodes where |phi| fell below the threshold
    double saturated_time = 0.0;    ///< eradication time of continual full spraying
    /// (T_lo, T_hi) at the start of every bisection step.
    std::vector<std::pair<double, double>> brackets;
    int inner_iterations = 0;
};

/// True when continual full spraying drives the pests to zero within
/// cfg.upper while the spiders stay positive.
bool check_reachability(const ProblemSpec& spec, const MinTimeConfig& cfg = {});

/// Is there an admissible control with v(t) <= 0 for some t <= horizon?
/// Solved by projected gradient on v(horizon)^2; returns the control found.
struct ReachResult {
    bool feasible = false;
    ControlSignal control;
    double terminal_pests = 0.0;
    int iterations = 0;
};
ReachResult reach_feasible(const ProblemSpec& spec, double horizon, const MinTimeConfig& cfg = {});

/// Least time to eradicate the pests: outer bisection on T over reach
/// feasibility, then switching-function synthesis of the control and a PMP
/// check. Throws Infeasible when check_reachability fails.
MinTimeReport solve_min_time(const ProblemSpec& spec, const MinTimeConfig& cfg = {});

struct MinTimeDiagnostics {
    double hamiltonian_residual = 0.0; ///< sup over the grid of |min_u H|
    double bang_disagreement = 0.0;    ///< measure where the control contradicts sign(phi)
    std::size_t singular_nodes = 0;
};

/// Throws InvalidArgument when every costate and the multiplier vanish.
MinTimeDiagnostics pmp_diagnostics_mintime(const MinTimeReport& report, const ModelParams& p,
                                           double threshold = 1e-4);

} // namespace agrospray
