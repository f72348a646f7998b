#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "agrospray/control.hpp"
#include "agrospray/integrator.hpp"

namespace agrospray {

/// Column-major table written to CSV: time, populations, control, costates.
struct Series {
    std::vector<double> t, f, s, v, u, lambda1, lambda2, lambda3;

    std::size_t size() const { return t.size(); }
    bool empty() const { return t.empty(); }
};

inline constexpr std::string_view csv_header = "t,f,s,v,u,lambda1,lambda2,lambda3";

/// Samples the control and (when given) the costates at the state grid
/// nodes. Missing costates are written as zero.
Series make_series(const StateTrajectory& states, const ControlSignal& u,
                   const AdjointTrajectory* adjoints = nullptr);

/// CSV text with 12 significant digits, '.' decimal separator and one row per
/// sample. An empty series gives the header line alone.
std::string format_csv(const Series& series);

/// Parses text produced by format_csv. Throws InvalidArgument on a malformed
/// header or row.
Series parse_csv(std::string_view text);

/// Writes format_csv to `path`. I/O failures throw Error naming the path.
void emit_csv(const Series& series, const std::filesystem::path& path);
Series read_csv(const std::filesystem::path& path);

/// Line chart with axes, tick labels and a title; one polyline for the series.
std::string render_svg(std::string_view title, std::string_view y_label, const std::vector<double>& x,
                       const std::vector<double>& y);
void emit_svg(const std::filesystem::path& path, std::string_view title, std::string_view y_label,
              const std::vector<double>& x, const std::vector<double>& y);

/// Writes <stem>.csv plus f.svg, s.svg, v.svg and u.svg into `dir` and returns
/// the paths in that order.
std::vector<std::filesystem::path> emit_run(const Series& series, const std::filesystem::path& dir,
                                            std::string_view title);

} // namespace agrospray
