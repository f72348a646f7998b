#include "agrospray/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "agrospray/error.hpp"
#include "agrospray/scenarios.hpp"

namespace agrospray {

namespace {

struct Key {
    std::string name;
    std::function<void(RunConfig&, const std::string& value, int line)> set;
    std::function<std::string(const RunConfig&)> get;
};

double parse_number(const std::string& key, const std::string& text, int line)
{
    double value = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (!text.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw ConfigError(ConfigError::Kind::Parse,
                          fmt::format("line {}: value of '{}' is not a number: '{}'", line, key, text), line, key);
    return value;
}

int parse_count(const std::string& key, const std::string& text, int line)
{
    const double v = parse_number(key, text, line);
    if (!(v >= 0.0 && v <= 1e9 && v == std::floor(v)))
        throw ConfigError(ConfigError::Kind::Invariant,
                          fmt::format("line {}: {} must be a non-negative integer", line, key), line, key);
    return static_cast<int>(v);
}

std::string number(double v) { return fmt::format("{:.17g}", v); }

template <class Get>
Key numeric(std::string name, Get&& ref)
{
    Key k;
    k.name = name;
    k.set = [name, ref](RunConfig& c, const std::string& text, int line) { ref(c) = parse_number(name, text, line); };
    k.get = [ref](const RunConfig& c) { return number(ref(c)); };
    return k;
}

std::string method_name(FixedMethod m)
{
    switch (m) {
    case FixedMethod::Sweep: return "fbs";
    case FixedMethod::ProjectedGradient: return "pg";
    case FixedMethod::Auto: break;
    }
    return "auto";
}

const std::vector<Key>& key_table()
{
    static const std::vector<Key> keys = [] {
        std::vector<Key> k;
        k.push_back(numeric("r", [](auto& c) -> auto& { return c.problem.params.insect_birth; }));
        k.push_back(numeric("e", [](auto& c) -> auto& { return c.problem.params.pest_birth; }));
        k.push_back(numeric("a", [](auto& c) -> auto& { return c.problem.params.spider_mortality; }));
        k.push_back(numeric("b", [](auto& c) -> auto& { return c.problem.params.hunt_pests; }));
        k.push_back(numeric("c", [](auto& c) -> auto& { return c.problem.params.hunt_insects; }));
        k.push_back(numeric("h", [](auto& c) -> auto& { return c.problem.params.spray_intensity; }));
        k.push_back(numeric("q", [](auto& c) -> auto& { return c.problem.params.on_target; }));
        k.push_back(numeric("k", [](auto& c) -> auto& { return c.problem.params.conversion; }));
        k.push_back(numeric("W", [](auto& c) -> auto& { return c.problem.params.woods_capacity; }));
        k.push_back(numeric("V", [](auto& c) -> auto& { return c.problem.params.vineyard_capacity; }));
        k.push_back(numeric("K", [](auto& c) -> auto& { return c.problem.params.spider_kill; }));
        k.push_back(numeric("xi", [](auto& c) -> auto& { return c.problem.params.control_weight; }));
        k.push_back(numeric("f0", [](auto& c) -> auto& { return c.problem.init.insects; }));
        k.push_back(numeric("s0", [](auto& c) -> auto& { return c.problem.init.spiders; }));
        k.push_back(numeric("v0", [](auto& c) -> auto& { return c.problem.init.pests; }));
        k.push_back(numeric("T", [](auto& c) -> auto& { return c.problem.horizon; }));
        k.push_back(numeric("u", [](auto& c) -> auto& { return c.constant_control; }));

        Key dt;
        dt.name = "dt";
        dt.set = [](RunConfig& c, const std::string& text, int line) { c.set_step(parse_number("dt", text, line)); };
        dt.get = [](const RunConfig& c) { return number(c.step()); };
        k.push_back(dt);

        Key ev;
        ev.name = "event_tolerance";
        ev.set = [](RunConfig& c, const std::string& text, int line) {
            const double v = parse_number("event_tolerance", text, line);
            c.fixed.integrator.event_tolerance = v;
            c.mintime.integrator.event_tolerance = v;
        };
        ev.get = [](const RunConfig& c) { return number(c.mintime.integrator.event_tolerance); };
        k.push_back(ev);

        Key method;
        method.name = "method";
        method.set = [](RunConfig& c, const std::string& text, int line) {
            if (text == "auto") c.method = FixedMethod::Auto;
            else if (text == "fbs") c.method = FixedMethod::Sweep;
            else if (text == "pg") c.method = FixedMethod::ProjectedGradient;
            else
                throw ConfigError(ConfigError::Kind::Invariant,
                                  fmt::format("line {}: method must be auto, fbs or pg, got '{}'", line, text), line,
                                  "method");
        };
        method.get = [](const RunConfig& c) { return method_name(c.method); };
        k.push_back(method);

        Key iters;
        iters.name = "max_iterations";
        iters.set = [](RunConfig& c, const std::string& text, int line) {
            c.fixed.max_iterations = parse_count("max_iterations", text, line);
        };
        iters.get = [](const RunConfig& c) { return std::to_string(c.fixed.max_iterations); };
        k.push_back(iters);

        k.push_back(numeric("relaxation", [](auto& c) -> auto& { return c.fixed.relaxation; }));
        k.push_back(numeric("tolerance", [](auto& c) -> auto& { return c.fixed.tolerance; }));
        k.push_back(numeric("state_penalty", [](auto& c) -> auto& { return c.fixed.state_penalty; }));
        k.push_back(numeric("t_lo", [](auto& c) -> auto& { return c.mintime.lower; }));
        k.push_back(numeric("t_hi", [](auto& c) -> auto& { return c.mintime.upper; }));
        k.push_back(numeric("time_tolerance", [](auto& c) -> auto& { return c.mintime.time_tolerance; }));
        k.push_back(
            numeric("singular_threshold", [](auto& c) -> auto& { return c.mintime.singular_threshold; }));

        Key inner;
        inner.name = "inner_max_iterations";
        inner.set = [](RunConfig& c, const std::string& text, int line) {
            c.mintime.inner_max_iterations = parse_count("inner_max_iterations", text, line);
        };
        inner.get = [](const RunConfig& c) { return std::to_string(c.mintime.inner_max_iterations); };
        k.push_back(inner);
        return k;
    }();
    return keys;
}

const Key* find_key(const std::string& name)
{
    for (const auto& k : key_table())
        if (k.name == name) return &k;
    return nullptr;
}

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

struct Entry {
    std::string key, value;
    int line = 0;
};

[[noreturn]] void invalid(const std::string& field, const std::string& message)
{
    throw ConfigError(ConfigError::Kind::Invariant, "invalid " + field + ": " + message, 0, field);
}

} // namespace

void RunConfig::set_step(double dt)
{
    fixed.integrator.step = dt;
    mintime.integrator.step = dt;
}

RunConfig default_run_config()
{
    RunConfig c;
    c.problem.params.control_weight = 50.0;
    c.problem.horizon = 50.0;
    return c;
}

const std::vector<std::string>& config_keys()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out{"preset"};
        for (const auto& k : key_table()) out.push_back(k.name);
        return out;
    }();
    return names;
}

void validate_run_config(const RunConfig& c)
{
    if (auto v = c.problem.params.check()) invalid(v->field, v->message);
    const auto& x = c.problem.init;
    const std::pair<const char*, double> init[] = {{"f0", x.insects}, {"s0", x.spiders}, {"v0", x.pests}};
    for (const auto& [name, value] : init)
        if (!(std::isfinite(value) && value >= 0.0)) invalid(name, "initial population must be finite and >= 0");
    if (!(std::isfinite(c.problem.horizon) && c.problem.horizon > 0.0)) invalid("T", "horizon must be positive");
    if (!(c.constant_control >= 0.0 && c.constant_control <= 1.0)) invalid("u", "control must lie in [0, 1]");
    if (!(std::isfinite(c.step()) && c.step() > 0.0)) invalid("dt", "step must be positive");
    if (!(c.mintime.integrator.event_tolerance > 0.0)) invalid("event_tolerance", "must be positive");
    if (!(c.fixed.relaxation > 0.0 && c.fixed.relaxation <= 1.0)) invalid("relaxation", "must lie in (0, 1]");
    if (!(c.fixed.tolerance > 0.0)) invalid("tolerance", "must be positive");
    if (!(c.fixed.state_penalty >= 0.0)) invalid("state_penalty", "must be non-negative");
    if (!(c.mintime.lower >= 0.0)) invalid("t_lo", "must be non-negative");
    if (!(std::isfinite(c.mintime.upper) && c.mintime.upper > c.mintime.lower)) invalid("t_hi", "must exceed t_lo");
    if (!(c.mintime.time_tolerance > 0.0)) invalid("time_tolerance", "must be positive");
    if (!(c.mintime.singular_threshold >= 0.0)) invalid("singular_threshold", "must be non-negative");
    if (c.mintime.inner_max_iterations < 1) invalid("inner_max_iterations", "must be at least 1");
}

RunConfig parse_config(std::string_view text)
{
    std::vector<Entry> entries;
    std::map<std::string, int> seen;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string body = trim(std::string_view(raw).substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError(ConfigError::Kind::Parse, fmt::format("line {}: expected 'key = value'", line), line);
        Entry e{trim(std::string_view(body).substr(0, eq)), trim(std::string_view(body).substr(eq + 1)), line};
        if (e.key.empty())
            throw ConfigError(ConfigError::Kind::Parse, fmt::format("line {}: missing key before '='", line), line);
        if (e.value.empty())
            throw ConfigError(ConfigError::Kind::Parse, fmt::format("line {}: missing value for '{}'", line, e.key),
                              line, e.key);
        if (e.key != "preset" && !find_key(e.key))
            throw ConfigError(ConfigError::Kind::UnknownKey, fmt::format("line {}: unknown key '{}'", line, e.key),
                              line, e.key);
        if (auto [it, fresh] = seen.emplace(e.key, line); !fresh)
            throw ConfigError(ConfigError::Kind::Parse,
                              fmt::format("line {}: '{}' already set on line {}", line, e.key, it->second), line,
                              e.key);
        entries.push_back(std::move(e));
    }

    RunConfig cfg = default_run_config();
    for (const auto& e : entries) {
        if (e.key != "preset") continue;
        const ScenarioPreset* preset = find_preset(e.value);
        if (!preset)
            throw ConfigError(ConfigError::Kind::Invariant,
                              fmt::format("line {}: unknown preset '{}'", e.line, e.value), e.line, "preset");
        cfg = preset->config;
        cfg.preset = e.value;
    }
    for (const auto& e : entries)
        if (e.key != "preset") find_key(e.key)->set(cfg, e.value, e.line);

    try {
        validate_run_config(cfg);
    } catch (const ConfigError& err) {
        const auto it = seen.find(err.field());
        if (it == seen.end()) throw;
        throw ConfigError(ConfigError::Kind::Invariant, fmt::format("line {}: {}", it->second, err.what()),
                          it->second, err.field());
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream file(path, std::ios::binary);
    if (!file) throw ConfigError(ConfigError::Kind::Io, "cannot read config file " + path.string());
    std::ostringstream buf;
    buf << file.rdbuf();
    try {
        return parse_config(buf.str());
    } catch (const ConfigError& err) {
        throw ConfigError(err.kind(), path.string() + ": " + err.what(), err.line(), err.field());
    }
}

std::string format_config(const RunConfig& cfg)
{
    std::string out;
    for (const auto& k : key_table()) out += k.name + " = " + k.get(cfg) + "\n";
    return out;
}

} // namespace agrospray
