#include "agrospray/control.hpp"

#include <algorithm>
#include <cmath>

#include "agrospray/error.hpp"

namespace agrospray {

ControlSignal::ControlSignal(std::vector<double> grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values))
{
    if (grid_.size() != values_.size())
        throw InvalidArgument("ControlSignal: grid and values differ in length");
    if (grid_.size() < 3) throw InvalidArgument("ControlSignal: at least three nodes are required");
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        if (!std::isfinite(grid_[i])) throw InvalidArgument("ControlSignal: non-finite grid node");
        if (i > 0 && !(grid_[i] > grid_[i - 1]))
            throw InvalidArgument("ControlSignal: grid must be strictly increasing");
        if (!(values_[i] >= 0.0 && values_[i] <= 1.0))
            throw InvalidArgument("ControlSignal: values must lie in [0, 1]");
    }
}

ControlSignal ControlSignal::constant(std::span<const double> grid, double value)
{
    return ControlSignal({grid.begin(), grid.end()}, std::vector<double>(grid.size(), value));
}

ControlSignal ControlSignal::projected(std::vector<double> grid, std::vector<double> values)
{
    for (double& v : values) v = std::clamp(v, 0.0, 1.0);
    return ControlSignal(std::move(grid), std::move(values));
}

double ControlSignal::operator()(double t) const
{
    if (t <= grid_.front()) return values_.front();
    if (t >= grid_.back()) return values_.back();
    const auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - grid_.begin()) - 1;
    const double w = (t - grid_[i]) / (grid_[i + 1] - grid_[i]);
    return values_[i] + w * (values_[i + 1] - values_[i]);
}

double ControlSignal::max() const
{
    return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

double ControlSignal::mean(double a, double b) const
{
    a = std::max(a, grid_.front());
    b = std::min(b, grid_.back());
    if (!(b > a)) return (*this)(a);
    // Integrate the interpolant exactly over [a, b].
    std::vector<double> nodes{a};
    for (double t : grid_)
        if (t > a && t < b) nodes.push_back(t);
    nodes.push_back(b);
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
        integral += 0.5 * ((*this)(nodes[i]) + (*this)(nodes[i + 1])) * (nodes[i + 1] - nodes[i]);
    return integral / (b - a);
}

std::vector<double> trapezoid_weights(std::span<const double> grid)
{
    std::vector<double> w(grid.size(), 0.0);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double half = 0.5 * (grid[i + 1] - grid[i]);
        w[i] += half;
        w[i + 1] += half;
    }
    return w;
}

std::vector<double> uniform_grid(double t0, double t1, double dt)
{
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("uniform_grid: step must be positive");
    if (!(t1 > t0)) throw InvalidArgument("uniform_grid: empty interval");
    const double span = t1 - t0;
    // Tolerate round-off so that e.g. 50 / 0.01 yields exactly 5000 steps.
    auto steps = static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
    steps = std::max<std::size_t>(steps, 1);
    std::vector<double> grid(steps + 1);
    for (std::size_t i = 0; i < steps; ++i) grid[i] = t0 + static_cast<double>(i) * dt;
    grid[steps] = t1;
    return grid;
}

} // namespace agrospray
