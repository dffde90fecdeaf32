#include "curvband/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace curvband {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

// Drops a trailing comment that is not inside quotes.
std::string_view strip_comment(std::string_view s)
{
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') quoted = !quoted;
        if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
}

struct Entry {
    std::string key;
    std::string value;
    int line = 0;
};

double to_double(const Entry& e)
{
    const std::string text{trim(e.value)};
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE)
        throw ConfigError(fmt::format("line {}: {} expects a number, got '{}'", e.line, e.key, text), e.line);
    if (!std::isfinite(v))
        throw ConfigError(fmt::format("line {}: {} must be finite", e.line, e.key), e.line);
    return v;
}

long long to_integer(const Entry& e, std::string_view text)
{
    const std::string s{trim(text)};
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
        throw ConfigError(fmt::format("line {}: {} expects an integer, got '{}'", e.line, e.key, s), e.line);
    return v;
}

std::size_t to_count(const Entry& e)
{
    const long long v = to_integer(e, e.value);
    if (v < 0) throw ConfigError(fmt::format("line {}: {} must be >= 0", e.line, e.key), e.line);
    return static_cast<std::size_t>(v);
}

std::string to_string_value(const Entry& e)
{
    std::string_view v = trim(e.value);
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
    if (v.empty()) throw ConfigError(fmt::format("line {}: {} is empty", e.line, e.key), e.line);
    return std::string{v};
}

std::vector<std::string> to_list(const Entry& e)
{
    std::string_view v = trim(e.value);
    if (v.size() < 2 || v.front() != '[' || v.back() != ']')
        throw ConfigError(fmt::format("line {}: {} expects a list like [a, b]", e.line, e.key), e.line);
    v = trim(v.substr(1, v.size() - 2));
    std::vector<std::string> items;
    while (!v.empty()) {
        const auto comma = v.find(',');
        items.emplace_back(trim(v.substr(0, comma)));
        if (items.back().empty())
            throw ConfigError(fmt::format("line {}: {} has an empty list item", e.line, e.key), e.line);
        if (comma == std::string_view::npos) break;
        v = trim(v.substr(comma + 1));
        if (v.empty())
            throw ConfigError(fmt::format("line {}: {} has a trailing comma", e.line, e.key), e.line);
    }
    return items;
}

using Setter = std::function<void(RunConfig&, const Entry&)>;

const std::map<std::string, Setter, std::less<>>& setters()
{
    static const std::map<std::string, Setter, std::less<>> table = {
        {"surface.kind", [](RunConfig& c, const Entry& e) { c.surface.kind = to_string_value(e); }},
        {"surface.rho_max", [](RunConfig& c, const Entry& e) { c.surface.rho_max = to_double(e); }},
        {"surface.a", [](RunConfig& c, const Entry& e) { c.surface.a = to_double(e); }},
        {"surface.amplitude", [](RunConfig& c, const Entry& e) { c.surface.amplitude = to_double(e); }},
        {"surface.sigma", [](RunConfig& c, const Entry& e) { c.surface.sigma = to_double(e); }},
        {"surface.radius", [](RunConfig& c, const Entry& e) { c.surface.radius = to_double(e); }},
        {"surface.derivatives",
         [](RunConfig& c, const Entry& e) { c.surface.derivatives = to_string_value(e); }},
        {"field.kind", [](RunConfig& c, const Entry& e) { c.field.kind = to_string_value(e); }},
        {"field.b", [](RunConfig& c, const Entry& e) { c.field.b = to_double(e); }},
        {"field.c", [](RunConfig& c, const Entry& e) { c.field.c = to_double(e); }},
        {"field.a1", [](RunConfig& c, const Entry& e) { c.field.a1 = to_double(e); }},
        {"field.a2", [](RunConfig& c, const Entry& e) { c.field.a2 = to_double(e); }},
        {"field.a3", [](RunConfig& c, const Entry& e) { c.field.a3 = to_double(e); }},
        {"field.coupling", [](RunConfig& c, const Entry& e) { c.field.coupling = to_double(e); }},
        {"field.gamma_interval",
         [](RunConfig& c, const Entry& e) {
             const auto items = to_list(e);
             if (items.size() != 2)
                 throw ConfigError(
                     fmt::format("line {}: field.gamma_interval needs exactly two values", e.line), e.line);
             c.field.gamma_interval = {to_double({e.key, items[0], e.line}),
                                       to_double({e.key, items[1], e.line})};
         }},
        {"grid.n_points", [](RunConfig& c, const Entry& e) { c.n_points = to_count(e); }},
        {"mode",
         [](RunConfig& c, const Entry& e) {
             try {
                 c.mode = parse_mode(to_string_value(e));
             } catch (const std::invalid_argument& ex) {
                 throw ConfigError(fmt::format("line {}: {}", e.line, ex.what()), e.line);
             }
         }},
        {"charge_e", [](RunConfig& c, const Entry& e) { c.charge_e = to_double(e); }},
        {"m_list",
         [](RunConfig& c, const Entry& e) {
             c.m_list.clear();
             for (const auto& item : to_list(e))
                 c.m_list.push_back(static_cast<int>(to_integer(e, item)));
         }},
        {"k_eigen", [](RunConfig& c, const Entry& e) { c.k_eigen = to_count(e); }},
        {"omega", [](RunConfig& c, const Entry& e) { c.omega = to_double(e); }},
        {"n_normal", [](RunConfig& c, const Entry& e) { c.n_normal = static_cast<int>(to_integer(e, e.value)); }},
        {"dt", [](RunConfig& c, const Entry& e) { c.dt = to_double(e); }},
        {"steps", [](RunConfig& c, const Entry& e) { c.steps = to_count(e); }},
        {"gauge_tol", [](RunConfig& c, const Entry& e) { c.gauge_tol = to_double(e); }},
        {"output_path", [](RunConfig& c, const Entry& e) { c.output_path = to_string_value(e); }},
    };
    return table;
}

}  // namespace

RunConfig parse_config(std::string_view text)
{
    RunConfig config;
    std::string section;
    std::set<std::string, std::less<>> seen;
    int line_no = 0;

    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        const std::string_view raw =
            text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        const std::string_view line = trim(strip_comment(raw));
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(fmt::format("line {}: unterminated section header", line_no), line_no);
            section = std::string{trim(line.substr(1, line.size() - 2))};
            if (section.empty())
                throw ConfigError(fmt::format("line {}: empty section header", line_no), line_no);
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(fmt::format("line {}: expected 'key = value'", line_no), line_no);
        const std::string_view bare = trim(line.substr(0, eq));
        if (bare.empty()) throw ConfigError(fmt::format("line {}: missing key", line_no), line_no);
        const std::string key = section.empty() ? std::string{bare} : section + "." + std::string{bare};

        const auto it = setters().find(key);
        if (it == setters().end())
            throw ConfigError(fmt::format("line {}: unknown key '{}'", line_no, key), line_no);
        if (!seen.insert(key).second)
            throw ConfigError(fmt::format("line {}: duplicate key '{}'", line_no, key), line_no);
        it->second(config, Entry{key, std::string{trim(line.substr(eq + 1))}, line_no});
    }

    validate(config);
    return config;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::string serialize(const RunConfig& c)
{
    auto num = [](double v) { return fmt::format("{:.17g}", v); };
    std::string out;
    auto put = [&out](std::string_view key, const std::string& value) {
        out += fmt::format("{} = {}\n", key, value);
    };
    put("surface.kind", c.surface.kind);
    put("surface.rho_max", num(c.surface.rho_max));
    put("surface.a", num(c.surface.a));
    put("surface.amplitude", num(c.surface.amplitude));
    put("surface.sigma", num(c.surface.sigma));
    put("surface.radius", num(c.surface.radius));
    put("surface.derivatives", c.surface.derivatives);
    put("field.kind", c.field.kind);
    put("field.b", num(c.field.b));
    put("field.c", num(c.field.c));
    put("field.a1", num(c.field.a1));
    put("field.a2", num(c.field.a2));
    put("field.a3", num(c.field.a3));
    if (c.field.coupling) put("field.coupling", num(*c.field.coupling));
    if (c.field.gamma_interval)
        put("field.gamma_interval",
            fmt::format("[{}, {}]", num(c.field.gamma_interval->first), num(c.field.gamma_interval->second)));
    put("grid.n_points", std::to_string(c.n_points));
    put("mode", std::string{to_string(c.mode)});
    put("charge_e", num(c.charge_e));
    put("m_list", fmt::format("[{}]", fmt::join(c.m_list, ", ")));
    put("k_eigen", std::to_string(c.k_eigen));
    put("omega", num(c.omega));
    put("n_normal", std::to_string(c.n_normal));
    put("dt", num(c.dt));
    put("steps", std::to_string(c.steps));
    put("gauge_tol", num(c.gauge_tol));
    put("output_path", fmt::format("\"{}\"", c.output_path));
    return out;
}

void validate(const RunConfig& c)
{
    auto fail = [](const std::string& msg) { throw ConfigError("invalid config: " + msg); };

    static const std::set<std::string, std::less<>> surfaces{"flat", "paraboloid", "gaussian-bump",
                                                             "sphere-cap"};
    static const std::set<std::string, std::less<>> fields{"none", "axial-uniform",
                                                           "cartesian-constant", "frame-synthetic"};
    if (!surfaces.contains(c.surface.kind))
        fail(fmt::format("surface.kind '{}' is not one of flat, paraboloid, gaussian-bump, sphere-cap",
                         c.surface.kind));
    if (!(c.surface.rho_max > 0.0)) fail("surface.rho_max must be > 0");
    if (c.surface.derivatives != "analytic" && c.surface.derivatives != "finite-difference")
        fail("surface.derivatives must be analytic or finite-difference");
    if (c.surface.kind == "gaussian-bump" && !(c.surface.sigma > 0.0)) fail("surface.sigma must be > 0");
    if (c.surface.kind == "sphere-cap" && !(c.surface.radius > c.surface.rho_max))
        fail("surface.radius must exceed surface.rho_max for a sphere cap");

    if (!fields.contains(c.field.kind))
        fail(fmt::format(
            "field.kind '{}' is not one of none, axial-uniform, cartesian-constant, frame-synthetic",
            c.field.kind));
    if (c.field.coupling && c.field.a3 != 0.0)
        fail("field.coupling and field.a3 are mutually exclusive");
    if ((c.field.coupling || c.field.gamma_interval) && c.field.kind != "frame-synthetic")
        fail("field.coupling and field.gamma_interval require field.kind = frame-synthetic");
    if (c.field.gamma_interval && !(c.field.gamma_interval->first < c.field.gamma_interval->second))
        fail("field.gamma_interval must satisfy lo < hi");

    if (c.n_points < RadialGrid::kMinPoints)
        fail(fmt::format("grid.n_points = {} violates n_points >= {}", c.n_points, RadialGrid::kMinPoints));
    if (c.m_list.empty()) fail("m_list must not be empty");
    if (c.k_eigen < 1) fail("k_eigen must be >= 1");
    if (c.k_eigen > c.n_points) fail("k_eigen must not exceed grid.n_points");
    if (!(c.omega > 0.0)) fail("omega must be > 0");
    if (c.n_normal < 0) fail("n_normal must be >= 0");
    if (!(c.dt > 0.0)) fail("dt must be > 0");
    if (c.steps < 1) fail("steps must be >= 1");
    if (!(c.gauge_tol >= 0.0)) fail("gauge_tol must be >= 0");
    if (c.output_path.empty()) fail("output_path must not be empty");
}

SurfaceProfile make_profile(const RunConfig& c)
{
    const SurfaceConfig& s = c.surface;
    SurfaceProfile p = s.kind == "paraboloid"      ? SurfaceProfile::paraboloid(s.a, s.rho_max)
                       : s.kind == "gaussian-bump" ? SurfaceProfile::gaussian_bump(s.amplitude, s.sigma, s.rho_max)
                       : s.kind == "sphere-cap"    ? SurfaceProfile::sphere_cap(s.radius, s.rho_max)
                                                   : SurfaceProfile::flat(s.rho_max);
    return s.derivatives == "finite-difference" ? p.with_finite_differences() : p;
}

VectorPotentialSpec make_field(const RunConfig& c, const SurfaceProfile& profile)
{
    const FieldConfig& f = c.field;
    if (f.kind == "axial-uniform") return VectorPotentialSpec::axial_uniform(f.b, profile);
    if (f.kind == "cartesian-constant") return VectorPotentialSpec::cartesian_constant(f.c, profile);
    if (f.kind == "frame-synthetic") {
        std::optional<GammaInterval> region;
        if (f.gamma_interval) region = GammaInterval{f.gamma_interval->first, f.gamma_interval->second};
        auto constant = [](double v) -> VectorPotentialSpec::Component {
            if (v == 0.0) return nullptr;
            return [v](double, double) { return v; };
        };
        VectorPotentialSpec spec;
        if (f.coupling) {
            spec = VectorPotentialSpec::uniform_coupling(profile, *f.coupling, region);
            spec.A1 = constant(f.a1);
            spec.A2 = constant(f.a2);
        } else {
            spec = VectorPotentialSpec::frame_synthetic(constant(f.a1), constant(f.a2), constant(f.a3), region);
        }
        return spec;
    }
    return VectorPotentialSpec::zero();
}

RadialGrid make_grid(const RunConfig& c)
{
    return {c.n_points, c.surface.rho_max};
}

}  // namespace curvband
