#pragma once

/**
 * @file io.hpp
 * @brief JSON and CSV views of the results, and the flat key=value run
 *        configuration.  Uses the vendored nlohmann json header.
 */

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mesh.hpp"
#include "trident.hpp"
#include "width_map.hpp"

namespace tridentlab {

using Json = nlohmann::ordered_json;

inline constexpr const char* summary_schema = "tridentlab-summary/1";

/// NaN and inf become null.
inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json to_json(const ContinuationStage& s)
{
    return {{"cap", s.cap},
            {"iterations", s.iterations},
            {"residual", number(s.residual)},
            {"indicator", number(s.indicator)},
            {"min_increment", number(s.min_increment)},
            {"min_increment_away", number(s.min_increment_away)},
            {"converged", s.converged}};
}

inline Json to_json(const std::vector<ContinuationStage>& trace)
{
    Json j = Json::array();
    for (const auto& s : trace)
        j.push_back(to_json(s));
    return j;
}

inline Json to_json(const AreaEstimate& e)
{
    return {{"interior", number(e.interior)}, {"tail", number(e.tail)}, {"total", number(e.total)},
            {"cap", number(e.cap)},           {"nx", e.nx},             {"ny", e.ny},
            {"rule", to_string(e.rule)}};
}

inline Json to_json(const AlphaEstimate& e)
{
    return {{"a", e.a},
            {"b", e.b},
            {"cap", e.cap},
            {"nx", e.nx},
            {"ny", e.ny},
            {"area", to_json(e.area)},
            {"wall", e.wall},
            {"slack", number(e.slack)},
            {"max_d2u", number(e.max_d2u)},
            {"verdict", to_string(e.verdict)},
            {"status", to_string(e.status)},
            {"failed_stage", e.failed_stage},
            {"monotone", e.monotone},
            {"note", e.note},
            {"trace", to_json(e.trace)}};
}

inline Json to_json(const Probe& p)
{
    Json j = {{"b", p.b},
              {"verdict", to_string(p.verdict)},
              {"growth", to_string(p.growth.growth)},
              {"increment_previous", number(p.growth.previous)},
              {"increment_last", number(p.growth.last)},
              {"cap_step", p.growth.step},
              {"escalated", p.escalated}};
    j["first_verdict"] = p.first_verdict ? Json(to_string(*p.first_verdict)) : Json(nullptr);
    j["alpha"] = to_json(p.alpha);
    return j;
}

inline Json to_json(const WidthEstimate& w)
{
    Json probes = Json::array();
    for (const auto& p : w.probes)
        probes.push_back(to_json(p));
    return {{"a", w.a},
            {"b_lo", number(w.b_lo)},
            {"b_hi", number(w.b_hi)},
            {"midpoint", number(w.midpoint())},
            {"width", number(w.width())},
            {"ok", w.ok},
            {"failure", w.failure},
            {"probes", probes}};
}

inline Json to_json(const WidthCurve& c)
{
    Json entries = Json::array();
    for (std::size_t k = 0; k < c.entries.size(); ++k) {
        Json e = to_json(c.entries[k]);
        e["error"] = c.errors[k];
        e["distance_to_half_pi"] = number(c.distance_to_half_pi[k]);
        e["distance_to_pi"] = number(c.distance_to_pi[k]);
        entries.push_back(e);
    }
    return {{"monotone", c.monotone}, {"entries", entries}};
}

inline Json to_json(const Check& c) { return {{"value", number(c.value)}, {"tolerance", number(c.tolerance)}, {"pass", c.pass}}; }

inline Json to_json(const std::vector<NodeRef>& nodes)
{
    Json j = Json::array();
    for (const auto& n : nodes)
        j.push_back({{"i", n.i}, {"j", n.j}, {"y", n.y}, {"det", n.value}});
    return j;
}

inline Json to_json(const PropertyReport& r)
{
    return {{"symmetry", to_json(r.symmetry)},
            {"symmetry_other", to_json(r.symmetry_other)},
            {"monotonicity", to_json(r.monotonicity)},
            {"uxx_left", to_json(r.uxx_left)},
            {"uxx_right", to_json(r.uxx_right)},
            {"max_abs_uxy_columns", number(r.max_abs_uxy_columns)},
            {"det_threshold", number(r.det_threshold)},
            {"det_positive", to_json(r.det_positive)},
            {"det_negative", to_json(r.det_negative)},
            {"curvature_witnesses", r.curvature_witnesses},
            {"midline",
             {{"y0", r.midline_y0},
              {"y1", r.midline_y1},
              {"max_margin", number(r.midline.max_margin)},
              {"tolerance", number(r.midline.tolerance)},
              {"strict", r.midline.strict}}},
            {"flux",
             {{"boundary_flux", number(r.flux.boundary_flux)},
              {"source", number(r.flux.source)},
              {"defect", to_json(r.flux_defect)}}},
            {"small_a_error", r.small_a_computed ? number(r.small_a.value) : Json(nullptr)},
            {"sine_comparison", number(r.sine_comparison)},
            {"tangency_angle_left", number(r.tangency_angle_left)},
            {"tangency_angle_right", number(r.tangency_angle_right)},
            {"all_pass", r.all_pass()}};
}

inline Json to_json(const TridentSolution& t)
{
    return {{"a", t.a},          {"b_used", t.b_used},       {"delta", t.delta},
            {"cap", t.cap},      {"tol", t.tol},             {"shift", t.shift},
            {"nx", t.u.grid().nx()}, {"ny", t.u.grid().ny()}, {"converged", t.converged},
            {"iterations", t.iterations}, {"residual", number(t.residual)}, {"trace", to_json(t.trace)},
            {"properties", to_json(t.report)}};
}

inline Json to_json(const TriangleMesh& m)
{
    std::map<std::string, int> counts;
    for (const auto& t : m.tags)
        ++counts[to_string(t)];
    Json tags = Json::object();
    for (const auto& [k, v] : counts)
        tags[k] = v;
    return {{"vertices", m.vertices.size()}, {"faces", m.faces.size()}, {"provenance", tags}};
}

/// a, b_lo, b_hi, midpoint, alpha_at_lo, alpha_at_hi, flags
inline void write_width_csv(std::ostream& os, const WidthCurve& c)
{
    os << "a,b_lo,b_hi,midpoint,alpha_at_lo,alpha_at_hi,flags\n";
    os << std::setprecision(17);
    for (std::size_t k = 0; k < c.entries.size(); ++k) {
        const WidthEstimate& w = c.entries[k];
        const Probe* lo = w.probe_at(w.b_lo);
        const Probe* hi = w.probe_at(w.b_hi);
        auto alpha = [](const Probe* p) { return p ? p->alpha.area.total : std::nan(""); };
        std::string flags = w.ok ? "ok" : (c.errors[k].empty() ? w.failure : c.errors[k]);
        for (char& ch : flags)
            if (ch == ',' || ch == '\n')
                ch = ';';
        os << w.a << ',' << w.b_lo << ',' << w.b_hi << ',' << w.midpoint() << ',' << alpha(lo) << ','
           << alpha(hi) << ',' << flags << '\n';
    }
}

inline void write_json(const std::string& path, const Json& j)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot open " + path);
    os << j.dump(2) << '\n';
}

inline Json read_json(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("cannot open " + path);
    return Json::parse(is);
}

// ---------------------------------------------------------------------------
// run configuration

/**
 * Everything a CLI run depends on.  Text form is one key = value per line,
 * '#' starts a comment; lists are comma separated.
 */
struct RunConfig {
    std::string command;
    std::vector<double> a_list{1.0};
    std::optional<double> b;
    int nx = 0;
    int ny = 0;
    int max_ny = 257;
    std::vector<double> caps{4, 8, 12, 16};
    double tol = 1e-6;
    double target_width = 0.05;
    double eps0 = 0.05;
    double delta = 0.0;
    int periods = 1;
    std::optional<double> zmin;
    std::optional<double> zmax;
    double bottom = 0.0; ///< solve: constant bottom value
    double top = 0.0;    ///< solve: constant top value
    std::string out_dir = ".";
    std::string export_path;
    std::string field_path;
    bool deterministic = true;

    Resolution resolution() const
    {
        Resolution r;
        r.nx = nx;
        r.ny = ny;
        r.max_ny = max_ny;
        return r;
    }

    WidthOptions width_options() const
    {
        WidthOptions o;
        o.target_width = target_width;
        o.eps0 = eps0;
        o.resolution = resolution();
        o.schedule = CapSchedule(caps);
        o.newton.tol = tol;
        return o;
    }
};

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v)
{
    std::size_t used = 0;
    double d = 0.0;
    try {
        d = std::stod(v, &used);
    } catch (const std::exception&) {
        throw InvalidInput("config key '" + key + "': not a number: " + v);
    }
    if (used != v.size())
        throw InvalidInput("config key '" + key + "': not a number: " + v);
    return d;
}

inline int parse_int(const std::string& key, const std::string& v)
{
    const double d = parse_double(key, v);
    if (d != std::floor(d) || std::abs(d) > 1e9)
        throw InvalidInput("config key '" + key + "': not an integer: " + v);
    return static_cast<int>(d);
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v)
{
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(parse_double(key, trim(item)));
    if (out.empty())
        throw InvalidInput("config key '" + key + "': empty list");
    return out;
}

inline std::string format_list(const std::vector<double>& v)
{
    std::ostringstream os;
    os << std::setprecision(17);
    for (std::size_t k = 0; k < v.size(); ++k)
        os << (k ? "," : "") << v[k];
    return os.str();
}

} // namespace detail

/// Applies one key = value pair; unknown keys are an error.
inline void set_config_value(RunConfig& c, const std::string& key, const std::string& value)
{
    using namespace detail;
    if (key == "command") c.command = value;
    else if (key == "a") c.a_list = parse_list(key, value);
    else if (key == "b") c.b = parse_double(key, value);
    else if (key == "nx") c.nx = parse_int(key, value);
    else if (key == "ny") c.ny = parse_int(key, value);
    else if (key == "max_ny") c.max_ny = parse_int(key, value);
    else if (key == "caps") c.caps = parse_list(key, value);
    else if (key == "tol") c.tol = parse_double(key, value);
    else if (key == "target_width") c.target_width = parse_double(key, value);
    else if (key == "eps0") c.eps0 = parse_double(key, value);
    else if (key == "delta") c.delta = parse_double(key, value);
    else if (key == "periods") c.periods = parse_int(key, value);
    else if (key == "zmin") c.zmin = parse_double(key, value);
    else if (key == "zmax") c.zmax = parse_double(key, value);
    else if (key == "bottom") c.bottom = parse_double(key, value);
    else if (key == "top") c.top = parse_double(key, value);
    else if (key == "out_dir") c.out_dir = value;
    else if (key == "export") c.export_path = value;
    else if (key == "field") c.field_path = value;
    else if (key == "deterministic") {
        if (value != "true" && value != "false")
            throw InvalidInput("config key 'deterministic' must be true or false");
        c.deterministic = value == "true";
    } else
        throw InvalidInput("unknown config key '" + key + "'");
}

inline RunConfig parse_config(std::istream& is, RunConfig base = {})
{
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = detail::trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidInput("config line " + std::to_string(lineno) + ": expected key = value");
        set_config_value(base, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
    return base;
}

inline RunConfig read_config(const std::string& path, RunConfig base = {})
{
    std::ifstream is(path);
    if (!is)
        throw InvalidInput("cannot open config file " + path);
    return parse_config(is, std::move(base));
}

inline std::string format_config(const RunConfig& c)
{
    std::ostringstream os;
    os << std::setprecision(17);
    os << "command = " << c.command << '\n';
    os << "a = " << detail::format_list(c.a_list) << '\n';
    if (c.b)
        os << "b = " << *c.b << '\n';
    os << "nx = " << c.nx << '\n' << "ny = " << c.ny << '\n' << "max_ny = " << c.max_ny << '\n';
    os << "caps = " << detail::format_list(c.caps) << '\n';
    os << "tol = " << c.tol << '\n' << "target_width = " << c.target_width << '\n' << "eps0 = " << c.eps0 << '\n';
    os << "delta = " << c.delta << '\n' << "periods = " << c.periods << '\n';
    if (c.zmin)
        os << "zmin = " << *c.zmin << '\n';
    if (c.zmax)
        os << "zmax = " << *c.zmax << '\n';
    os << "bottom = " << c.bottom << '\n' << "top = " << c.top << '\n';
    os << "out_dir = " << c.out_dir << '\n';
    if (!c.export_path.empty())
        os << "export = " << c.export_path << '\n';
    if (!c.field_path.empty())
        os << "field = " << c.field_path << '\n';
    os << "deterministic = " << (c.deterministic ? "true" : "false") << '\n';
    return os.str();
}

inline Json to_json(const RunConfig& c)
{
    Json j = {{"command", c.command}, {"a", c.a_list}};
    j["b"] = c.b ? Json(*c.b) : Json(nullptr);
    j["nx"] = c.nx;
    j["ny"] = c.ny;
    j["max_ny"] = c.max_ny;
    j["caps"] = c.caps;
    j["tol"] = c.tol;
    j["target_width"] = c.target_width;
    j["eps0"] = c.eps0;
    j["delta"] = c.delta;
    j["periods"] = c.periods;
    j["zmin"] = c.zmin ? Json(*c.zmin) : Json(nullptr);
    j["zmax"] = c.zmax ? Json(*c.zmax) : Json(nullptr);
    j["bottom"] = c.bottom;
    j["top"] = c.top;
    j["out_dir"] = c.out_dir;
    j["export"] = c.export_path;
    j["field"] = c.field_path;
    j["deterministic"] = c.deterministic;
    return j;
}

} // namespace tridentlab
