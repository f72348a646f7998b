#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agrospray/config.hpp"
#include "agrospray/output.hpp"

namespace agrospray {

struct RunRecord {
    std::string name;
    RunConfig config;
    Series series;
    std::optional<SolveReport> fixed;
    std::optional<MinTimeReport> mintime;
    std::vector<std::filesystem::path> files;
    double seconds = 0.0;
    bool converged = true; ///< false when an iterative solver hit its iteration cap
};

struct CheckResult {
    std::string description;
    bool passed = false;
    std::string detail;
};

/// Expected qualitative feature of a preset's output.
struct QualitativeCheck {
    std::string description;
    std::function<CheckResult(const RunRecord&)> evaluate;
};

struct ScenarioPreset {
    std::string name;
    std::string summary;
    RunConfig config;
    std::vector<QualitativeCheck> checks;
};

/// All presets, in a fixed order. Names are unique.
const std::vector<ScenarioPreset>& scenario_presets();
const ScenarioPreset* find_preset(std::string_view name);

/// Runs the solver selected by `cfg` without writing anything.
RunRecord execute(std::string name, const RunConfig& cfg);

/// execute() followed by emit_run() into `dir`.
RunRecord execute_and_write(std::string name, const RunConfig& cfg, const std::filesystem::path& dir);

/// Runs a preset and writes its files under out_dir/<name>/. A given `step`
/// replaces the preset's RK4 step. Solver errors are rethrown with the preset
/// name prepended. Throws InvalidArgument for an unknown name.
RunRecord run_scenario(std::string_view name, const std::filesystem::path& out_dir,
                       std::optional<double> step = std::nullopt);

std::vector<CheckResult> evaluate_checks(const ScenarioPreset& preset, const RunRecord& record);

/// Measure of the grid cells on which u sits at 1 (both end nodes within
/// `slack` of 1), and the longest contiguous run of such cells.
struct SaturationStats {
    double total = 0.0;
    double longest = 0.0;
};
SaturationStats saturation(const ControlSignal& u, double slack = 1e-6);

} // namespace agrospray
