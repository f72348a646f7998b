#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "agrospray/model.hpp"
#include "agrospray/solver_fixed.hpp"
#include "agrospray/solver_mintime.hpp"

namespace agrospray {

enum class SolverChoice { Simulate, Fixed, MinTime };

/// Which fixed-horizon method to run. Auto picks the sweep for xi > 0 and
/// projected gradient for xi = 0.
enum class FixedMethod { Auto, Sweep, ProjectedGradient };

/// Everything a run needs: the problem, the solver settings and the constant
/// spraying level used by plain simulation.
struct RunConfig {
    ProblemSpec problem;
    SolverChoice solver = SolverChoice::Fixed;
    FixedMethod method = FixedMethod::Auto;
    FixedSolveConfig fixed;
    MinTimeConfig mintime;
    double constant_control = 0.0; ///< u used by `simulate`
    std::string preset;            ///< preset the file started from, if any

    /// Sets the RK4 step of both solvers.
    void set_step(double dt);
    double step() const { return fixed.integrator.step; }
};

/// Reference parameters, xi = 50, T = 50, start (3.1, 3.7, 2.2).
RunConfig default_run_config();

/// Parses flat `key = value` text. `#` starts a comment. Resolution order is
/// defaults, then the preset named by `preset = ...` wherever it appears, then
/// the remaining keys. Throws ConfigError.
RunConfig parse_config(std::string_view text);

/// parse_config on the contents of a file.
RunConfig load_config(const std::filesystem::path& path);

/// Throws ConfigError(Invariant) naming the first invalid field.
void validate_run_config(const RunConfig& cfg);

/// Every key parse_config accepts, in documentation order.
const std::vector<std::string>& config_keys();

/// Flat key-value rendering that parse_config reads back to the same values.
std::string format_config(const RunConfig& cfg);

} // namespace agrospray
