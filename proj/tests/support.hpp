#pragma once

// Helpers shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "agrospray/control.hpp"
#include "agrospray/error.hpp"
#include "agrospray/integrator.hpp"
#include "agrospray/model.hpp"
#include "agrospray/solver_fixed.hpp"

namespace support {

using namespace agrospray;

// Fixed-seed generator; every randomized test is reproducible.
inline std::mt19937_64 rng(unsigned long long seed = 20240611ULL) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(g);
}

/// A parameter draw that admits an interior coexistence equilibrium.
inline ModelParams random_params_with_equilibrium(std::mt19937_64& g)
{
    for (;;) {
        ModelParams p;
        p.insect_birth = uniform(g, 0.5, 2.0);
        p.pest_birth = uniform(g, 0.5, 5.0);
        p.spider_mortality = uniform(g, 0.5, 5.0);
        p.hunt_pests = uniform(g, 0.2, 2.0);
        p.hunt_insects = uniform(g, 0.05, 1.0);
        p.conversion = uniform(g, 0.1, 1.0);
        p.woods_capacity = uniform(g, 1.0, 10.0);
        p.vineyard_capacity = uniform(g, 10.0, 2000.0);
        try {
            (void)coexistence_equilibrium(p);
            return p;
        } catch (const NoInteriorEquilibrium&) {
        }
    }
}

// ---- Manufactured singular arc -------------------------------------------

using Joint = std::array<double, 6>; // (f, s, v, l1, l2, l3)

enum class Numerator { Derived, ClosedForm };

inline double singular_value(const Joint& y, const ModelParams& p, Numerator which)
{
    const PopulationState x{y[0], y[1], y[2]};
    const AdjointState l{y[3], y[4], y[5], 0.0};
    const SingularTerms t = which == Numerator::Derived ? singular_terms(x, l, p) : closed_form_singular_terms(x, l, p);
    return std::clamp(-t.numerator / (2.0 * t.denominator), 0.0, 1.0);
}

inline Joint joint_rhs(const Joint& y, const ModelParams& p, Numerator which)
{
    const PopulationState x{y[0], y[1], y[2]};
    const AdjointState l{y[3], y[4], y[5], 0.0};
    const PopulationState dx = dynamics_rhs(x, singular_value(y, p, which), p);
    const AdjointState dl = adjoint_rhs_mintime(l, x, p);
    return {dx.insects, dx.spiders, dx.pests, dl.insects, dl.spiders, dl.pests};
}

inline Joint joint_step(const Joint& y, double dt, const ModelParams& p, Numerator which)
{
    auto axpy = [](const Joint& a, double s, const Joint& b) {
        Joint o;
        for (std::size_t i = 0; i < 6; ++i) o[i] = a[i] + s * b[i];
        return o;
    };
    const Joint k1 = joint_rhs(y, p, which);
    const Joint k2 = joint_rhs(axpy(y, 0.5 * dt, k1), p, which);
    const Joint k3 = joint_rhs(axpy(y, 0.5 * dt, k2), p, which);
    const Joint k4 = joint_rhs(axpy(y, dt, k3), p, which);
    Joint o;
    for (std::size_t i = 0; i < 6; ++i) o[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return o;
}

/// Start point for the minimal-time parameter set whose singular control lies
/// well inside (0, 1), so the clamp stays inactive over a short arc.
inline Joint find_singular_start()
{
    const ModelParams p = mintime_params();
    auto g = rng(7);
    for (;;) {
        Joint y{uniform(g, 0.5, 4.0), uniform(g, 0.5, 4.0), uniform(g, 0.5, 4.0),
                uniform(g, -2.0, 2.0), uniform(g, -2.0, 2.0), uniform(g, -2.0, 2.0)};
        const PopulationState x{y[0], y[1], y[2]};
        const AdjointState l{y[3], y[4], y[5], 0.0};
        const SingularTerms t = singular_terms(x, l, p);
        if (std::abs(t.denominator) < 1e-6 * std::abs(t.numerator)) continue;
        const double u = -t.numerator / (2.0 * t.denominator);
        if (u < 0.3 || u > 0.7) continue;
        // Keep the control interior along the whole test arc.
        Joint z = y;
        bool interior = true;
        for (int i = 0; i < 200 && interior; ++i) {
            z = joint_step(z, 1e-3, p, Numerator::Derived);
            const PopulationState xz{z[0], z[1], z[2]};
            const AdjointState lz{z[3], z[4], z[5], 0.0};
            const SingularTerms tz = singular_terms(xz, lz, p);
            const double uz = -tz.numerator / (2.0 * tz.denominator);
            interior = uz > 0.05 && uz < 0.95;
        }
        if (interior) return y;
    }
}

inline const Joint& singular_start()
{
    static const Joint start = find_singular_start();
    return start;
}

/// Integrates the joint state/costate flow with u = clamp(-A/(2B)) using RK4
/// step dt over [0, span], then returns the largest central second difference
/// of the switching function on the interior nodes.
inline double switching_curvature(double dt, double span, Numerator which)
{
    const ModelParams p = mintime_params();
    Joint y = singular_start();
    const int steps = static_cast<int>(std::lround(span / dt));
    std::vector<double> phi;
    phi.reserve(steps + 1);
    auto phi_of = [&](const Joint& z) { return switching_function(AdjointState{z[3], z[4], z[5], 0.0}, p); };
    phi.push_back(phi_of(y));
    for (int i = 0; i < steps; ++i) {
        y = joint_step(y, dt, p, which);
        phi.push_back(phi_of(y));
    }
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < phi.size(); ++i)
        worst = std::max(worst, std::abs(phi[i + 1] - 2.0 * phi[i] + phi[i - 1]) / (dt * dt));
    return worst;
}

// ---- Piecewise-constant controls for the brute-force oracle --------------

inline ControlSignal piecewise_constant(const std::vector<double>& grid, const std::array<double, 3>& levels)
{
    const double T = grid.back();
    std::vector<double> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const std::size_t piece = std::min<std::size_t>(2, static_cast<std::size_t>(3.0 * grid[i] / T));
        values[i] = levels[piece];
    }
    return ControlSignal(grid, values);
}

struct BruteForce {
    double best_cost = 0.0;
    std::array<double, 3> best_levels{};
    int evaluations = 0;
};

/// Exhaustive search over 21 levels per third of [0, T].
inline BruteForce brute_force_three_pieces(const ProblemSpec& spec, double dt)
{
    const auto grid = uniform_grid(0.0, spec.horizon, dt);
    BruteForce out;
    out.best_cost = INFINITY;
    for (int i = 0; i <= 20; ++i)
        for (int j = 0; j <= 20; ++j)
            for (int k = 0; k <= 20; ++k) {
                const std::array<double, 3> levels{i / 20.0, j / 20.0, k / 20.0};
                const ControlSignal u = piecewise_constant(grid, levels);
                const double cost = evaluate_cost(integrate_forward_on(spec, u, grid), u, spec.params);
                ++out.evaluations;
                if (cost < out.best_cost) {
                    out.best_cost = cost;
                    out.best_levels = levels;
                }
            }
    return out;
}

// ---- Richardson order estimate -------------------------------------------

/// Observed order of the RK4 integrator on the unsprayed system from three
/// step sizes dt, dt/2, dt/4, measured at the final time.
inline double observed_order(const ProblemSpec& spec, double dt)
{
    auto final_state = [&](double h) {
        const auto grid = uniform_grid(0.0, spec.horizon, h);
        const ControlSignal u = ControlSignal::constant(grid, 0.0);
        return integrate_forward_on(spec, u, grid).back();
    };
    const PopulationState a = final_state(dt), b = final_state(dt / 2), c = final_state(dt / 4);
    auto norm = [](const PopulationState& x, const PopulationState& y) {
        return std::max({std::abs(x.insects - y.insects), std::abs(x.spiders - y.spiders),
                         std::abs(x.pests - y.pests)});
    };
    return std::log2(norm(a, b) / norm(b, c));
}

} // namespace support
