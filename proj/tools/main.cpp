// Command-line front end: simulation, the two optimal spraying problems and
// the reproducible scenario presets.

#include <cstdio>
#include <filesystem>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "agrospray/config.hpp"
#include "agrospray/error.hpp"
#include "agrospray/scenarios.hpp"

namespace fs = std::filesystem;
using namespace agrospray;

namespace {

enum Exit { Ok = 0, ConfigFailure = 1, NotConverged = 2, NoSolution = 3 };

struct Globals {
    std::string config;
    std::string out_dir = "out";
    std::optional<double> dt;
};

// Runs `body` and maps library errors onto exit codes.
template <class Body>
int guarded(Body&& body)
{
    try {
        return body();
    } catch (const ConfigError& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return ConfigFailure;
    } catch (const InvalidArgument& e) {
        fmt::print(stderr, "invalid input: {}\n", e.what());
        return ConfigFailure;
    } catch (const Infeasible& e) {
        fmt::print(stderr, "infeasible: {}\n", e.what());
        return NoSolution;
    } catch (const Error& e) {
        fmt::print(stderr, "solver failure: {}\n", e.what());
        return NotConverged;
    }
}

RunConfig resolve(const Globals& g)
{
    RunConfig cfg = g.config.empty() ? default_run_config() : load_config(g.config);
    if (g.dt) {
        cfg.set_step(*g.dt);
        validate_run_config(cfg);
    }
    return cfg;
}

void print_record(const RunRecord& r)
{
    fmt::print("{}: {} rows in {:.2f} s\n", r.name, r.series.size(), r.seconds);
    if (r.fixed) {
        const SolveReport& s = *r.fixed;
        fmt::print("  method {}, iterations {}, converged {}\n", s.method, s.iterations, s.converged);
        fmt::print("  objective {:.10g}, stationarity residual {:.3g}, max u {:.6g}\n", s.objective,
                   s.stationarity_residual, s.control.max());
        if (s.min_population < 0.0) fmt::print("  smallest population {:.3g}\n", s.min_population);
    }
    if (r.mintime) {
        const MinTimeReport& m = *r.mintime;
        fmt::print("  eradication time {:.6f} (full spraying {:.6f}), v(T) {:.3g}\n", m.minimal_time,
                   m.saturated_time, m.terminal.pests);
        fmt::print("  multiplier {:.6g}, max |min H| {:.3g}, sign mismatch {:.3g} days, singular nodes {}\n",
                   m.multiplier, m.hamiltonian_residual, m.bang_disagreement, m.singular_nodes);
    }
    for (const auto& f : r.files) fmt::print("  wrote {}\n", f.string());
}

int finish(const RunRecord& r)
{
    print_record(r);
    if (!r.converged) {
        fmt::print(stderr, "{}: iteration limit reached before convergence\n", r.name);
        return NotConverged;
    }
    return Ok;
}

int run_one_scenario(const std::string& name, const Globals& g, bool print_checks)
{
    const RunRecord r = run_scenario(name, g.out_dir, g.dt);
    const int code = finish(r);
    if (print_checks)
        for (const auto& c : evaluate_checks(*find_preset(name), r))
            fmt::print("  [{}] {} ({})\n", c.passed ? "ok" : "MISS", c.description, c.detail);
    return code;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Optimal spraying for a woods-insects / spiders / vineyard-pests model"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "flat key = value configuration file")->check(CLI::ExistingFile);
    app.add_option("--out-dir", g.out_dir, "directory for CSV and SVG output")->capture_default_str();
    app.add_option("--dt", g.dt, "RK4 step in days")->check(CLI::PositiveNumber);
    app.fallthrough();

    auto* simulate = app.add_subcommand("simulate", "integrate the model under constant spraying (config key u)");
    std::optional<double> control;
    simulate->add_option("--u", control, "constant spraying level in [0, 1]");

    auto* fixed = app.add_subcommand("solve-fixed", "minimize the pest integral plus spraying cost over [0, T]");
    std::string method;
    fixed->add_option("--method", method, "auto, fbs or pg")->check(CLI::IsMember({"auto", "fbs", "pg"}));

    auto* mintime = app.add_subcommand("solve-mintime", "least time to eradicate the vineyard pests");

    auto* scenario = app.add_subcommand("scenario", "run a named preset, or all of them");
    std::string name;
    bool all = false;
    scenario->add_option("name", name, "preset name (see list-scenarios)");
    scenario->add_flag("--all", all, "run every preset in parallel");

    auto* list = app.add_subcommand("list-scenarios", "print the available presets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? Ok : ConfigFailure;
    }

    if (*list) {
        for (const auto& p : scenario_presets()) fmt::print("{:<14} {}\n", p.name, p.summary);
        return Ok;
    }

    if (*scenario) {
        if (all == !name.empty()) {
            fmt::print(stderr, "scenario: give either a preset name or --all\n");
            return ConfigFailure;
        }
        if (!all) return guarded([&] { return run_one_scenario(name, g, true); });

        std::vector<std::future<std::pair<RunRecord, int>>> jobs;
        std::vector<std::string> errors(scenario_presets().size());
        for (std::size_t i = 0; i < scenario_presets().size(); ++i) {
            jobs.push_back(std::async(std::launch::async, [&g, &errors, i]() -> std::pair<RunRecord, int> {
                RunRecord rec;
                const int code = guarded([&] {
                    rec = run_scenario(scenario_presets()[i].name, g.out_dir, g.dt);
                    return rec.converged ? Ok : NotConverged;
                });
                if (rec.name.empty()) errors[i] = scenario_presets()[i].name;
                return {std::move(rec), code};
            }));
        }
        int worst = Ok;
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            auto [rec, code] = jobs[i].get();
            worst = std::max(worst, code);
            if (!errors[i].empty()) {
                fmt::print("{}: failed (exit {})\n", errors[i], code);
                continue;
            }
            print_record(rec);
            for (const auto& c : evaluate_checks(scenario_presets()[i], rec))
                fmt::print("  [{}] {} ({})\n", c.passed ? "ok" : "MISS", c.description, c.detail);
        }
        return worst;
    }

    return guarded([&] {
        RunConfig cfg = resolve(g);
        std::string label;
        if (*simulate) {
            cfg.solver = SolverChoice::Simulate;
            if (control) cfg.constant_control = *control;
            label = "simulate";
        } else if (*fixed) {
            cfg.solver = SolverChoice::Fixed;
            if (method == "fbs") cfg.method = FixedMethod::Sweep;
            else if (method == "pg") cfg.method = FixedMethod::ProjectedGradient;
            else if (method == "auto") cfg.method = FixedMethod::Auto;
            label = "solve-fixed";
        } else {
            (void)mintime;
            cfg.solver = SolverChoice::MinTime;
            cfg.problem.kind = ProblemKind::MinTime;
            label = "solve-mintime";
        }
        validate_run_config(cfg);
        return finish(execute_and_write(label, cfg, g.out_dir));
    });
}
