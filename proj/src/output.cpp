#include "agrospray/output.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "agrospray/error.hpp"

namespace agrospray {

namespace {

AdjointState adjoint_at(const AdjointTrajectory& adj, double t)
{
    const auto& g = adj.grid;
    if (t <= g.front()) return adj.values.front();
    if (t >= g.back()) return adj.values.back();
    const auto hi = static_cast<std::size_t>(std::upper_bound(g.begin(), g.end(), t) - g.begin());
    const std::size_t lo = hi - 1;
    const double theta = (t - g[lo]) / (g[hi] - g[lo]);
    const auto& a = adj.values[lo];
    const auto& b = adj.values[hi];
    auto mix = [theta](double x, double y) { return x + theta * (y - x); };
    return {mix(a.insects, b.insects), mix(a.spiders, b.spiders), mix(a.pests, b.pests), a.multiplier};
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << text;
    out.close();
    if (!out) throw Error("failed writing " + path.string());
}

std::string xml_escape(std::string_view s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

// Round tick spacing giving roughly `count` intervals over [lo, hi].
double tick_step(double lo, double hi, int count)
{
    const double raw = (hi - lo) / count;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0})
        if (m * mag >= raw) return m * mag;
    return 10.0 * mag;
}

} // namespace

Series make_series(const StateTrajectory& states, const ControlSignal& u, const AdjointTrajectory* adjoints)
{
    Series out;
    const bool aligned = adjoints && adjoints->grid == states.grid;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const double t = states.grid[i];
        const auto& x = states.values[i];
        out.t.push_back(t);
        out.f.push_back(x.insects);
        out.s.push_back(x.spiders);
        out.v.push_back(x.pests);
        out.u.push_back(u.empty() ? 0.0 : u(t));
        AdjointState l{0.0, 0.0, 0.0, 0.0};
        if (aligned) l = adjoints->values[i];
        else if (adjoints && !adjoints->empty()) l = adjoint_at(*adjoints, t);
        out.lambda1.push_back(l.insects);
        out.lambda2.push_back(l.spiders);
        out.lambda3.push_back(l.pests);
    }
    return out;
}

std::string format_csv(const Series& s)
{
    std::string out(csv_header);
    out += '\n';
    for (std::size_t i = 0; i < s.size(); ++i)
        out += fmt::format("{:.12g},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g}\n", s.t[i], s.f[i],
                           s.s[i], s.v[i], s.u[i], s.lambda1[i], s.lambda2[i], s.lambda3[i]);
    return out;
}

Series parse_csv(std::string_view text)
{
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != csv_header) throw InvalidArgument("CSV header mismatch");
    Series s;
    std::vector<double>* cols[] = {&s.t, &s.f, &s.s, &s.v, &s.u, &s.lambda1, &s.lambda2, &s.lambda3};
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        const char* p = line.data();
        const char* end = p + line.size();
        for (std::size_t c = 0; c < 8; ++c) {
            double value = 0.0;
            const auto [next, ec] = std::from_chars(p, end, value);
            const bool last = c == 7;
            if (ec != std::errc() || (last ? next != end : (next == end || *next != ',')))
                throw InvalidArgument("malformed CSV row " + std::to_string(row));
            cols[c]->push_back(value);
            p = last ? next : next + 1;
        }
    }
    return s;
}

void emit_csv(const Series& series, const std::filesystem::path& path) { write_file(path, format_csv(series)); }

Series read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str());
}

std::string render_svg(std::string_view title, std::string_view y_label, const std::vector<double>& x,
                       const std::vector<double>& y)
{
    constexpr double width = 640, height = 400, left = 70, right = 20, top = 40, bottom = 50;
    const double pw = width - left - right, ph = height - top - bottom;

    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
    if (!x.empty()) {
        x0 = x.front();
        x1 = x.back();
        const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
        y0 = std::min(0.0, *lo);
        y1 = *hi;
    }
    if (!(x1 > x0)) x1 = x0 + 1.0;
    if (!(y1 > y0)) y1 = y0 + 1.0;
    const double ystep = tick_step(y0, y1, 5);
    y0 = std::floor(y0 / ystep) * ystep;
    y1 = std::ceil(y1 / ystep) * ystep;
    const double xstep = tick_step(x0, x1, 6);

    auto px = [&](double v) { return left + (v - x0) / (x1 - x0) * pw; };
    auto py = [&](double v) { return top + (y1 - v) / (y1 - y0) * ph; };

    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n"
        "<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n"
        "<text x=\"{2}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{3}</text>\n",
        width, height, left + pw / 2, xml_escape(title));

    for (double v = y0; v <= y1 + 1e-9 * ystep; v += ystep) {
        const double yy = py(v);
        svg += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#e0e0e0\"/>\n",
                           left, yy, left + pw, yy);
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{:g}</text>\n", left - 6, yy + 4,
                           std::abs(v) < 1e-12 * ystep ? 0.0 : v);
    }
    for (double v = std::ceil(x0 / xstep) * xstep; v <= x1 + 1e-9 * xstep; v += xstep)
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{:g}</text>\n", px(v),
                           top + ph + 18, v);

    svg += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"black\"/>\n"
                       "<line x1=\"{0:.2f}\" y1=\"{3:.2f}\" x2=\"{0:.2f}\" y2=\"{1:.2f}\" stroke=\"black\"/>\n",
                       left, top + ph, left + pw, top);
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">t [days]</text>\n", left + pw / 2,
                       height - 10);
    svg += fmt::format("<text x=\"16\" y=\"{0:.2f}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0:.2f})\">"
                       "{1}</text>\n",
                       top + ph / 2, xml_escape(y_label));

    svg += "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < x.size(); ++i) svg += fmt::format("{}{:.2f},{:.2f}", i ? " " : "", px(x[i]), py(y[i]));
    svg += "\"/>\n</svg>\n";
    return svg;
}

void emit_svg(const std::filesystem::path& path, std::string_view title, std::string_view y_label,
              const std::vector<double>& x, const std::vector<double>& y)
{
    write_file(path, render_svg(title, y_label, x, y));
}

std::vector<std::filesystem::path> emit_run(const Series& series, const std::filesystem::path& dir,
                                            std::string_view title)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());

    std::vector<std::filesystem::path> files{dir / "trajectory.csv"};
    emit_csv(series, files.back());
    const struct {
        const char* file;
        const char* label;
        const std::vector<double>* data;
    } panels[] = {
        {"f.svg", "insects in the woods f(t)", &series.f},
        {"s.svg", "spiders s(t)", &series.s},
        {"v.svg", "pests in the vineyard v(t)", &series.v},
        {"u.svg", "spraying u(t)", &series.u},
    };
    for (const auto& p : panels) {
        files.push_back(dir / p.file);
        emit_svg(files.back(), fmt::format("{}: {}", title, p.label), p.label, series.t, *p.data);
    }
    return files;
}

} // namespace agrospray
