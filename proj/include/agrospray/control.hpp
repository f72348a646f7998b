#pragma once

#include <span>
#include <vector>

namespace agrospray {

/// Spraying schedule u(t) on [t0, tN], piecewise linear between nodes, with
/// every node value in [0, 1]. A default-constructed signal is empty.
class ControlSignal {
public:
    ControlSignal() = default;

    /// Throws InvalidArgument unless the grid has at least three strictly
    /// increasing nodes and every value lies in [0, 1].
    ControlSignal(std::vector<double> grid, std::vector<double> values);

    static ControlSignal constant(std::span<const double> grid, double value);
    /// Clamps every value into [0, 1] before construction.
    static ControlSignal projected(std::vector<double> grid, std::vector<double> values);

    bool empty() const { return grid_.empty(); }
    std::size_t size() const { return grid_.size(); }
    double start() const { return grid_.front(); }
    double end() const { return grid_.back(); }

    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }

    /// Linear interpolation; times outside the grid take the end values.
    double operator()(double t) const;

    double max() const;
    /// Trapezoidal mean over [a, b] (clipped to the grid).
    double mean(double a, double b) const;

private:
    std::vector<double> grid_;
    std::vector<double> values_;
};

/// Composite trapezoid weights of a grid.
std::vector<double> trapezoid_weights(std::span<const double> grid);

/// Uniform grid {t0, t0 + dt, ...} ending exactly at t1 (last step shortened
/// when dt does not divide the span).
std::vector<double> uniform_grid(double t0, double t1, double dt);

} // namespace agrospray
