// tridentlab command line: solve, width, sweep, trident, verify, report.
//
// Exit codes: 0 all requested checks passed, 1 a check failed, 2 usage
// error, 3 solver failure.  Every run writes <out>/<verb>_summary.json.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <tridentlab/tridentlab.hpp>

namespace fs = std::filesystem;
using namespace tridentlab;

namespace {

enum Exit { ok = 0, check_failed = 1, usage = 2, solver_failed = 3 };

struct Outcome {
    int code = ok;
    Json result = Json::object();
    std::vector<std::string> artifacts;
};

std::string path_in(const RunConfig& c, const std::string& name) { return (fs::path(c.out_dir) / name).string(); }

void write_summary(const std::string& verb, const RunConfig& cfg, const Outcome& o, const std::string& error)
{
    Json j;
    j["schema"] = summary_schema;
    j["command"] = verb;
    j["exit_code"] = o.code;
    j["error"] = error;
    j["config"] = to_json(cfg);
    j["result"] = o.result;
    j["artifacts"] = o.artifacts;
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    const std::string p = path_in(cfg, verb + "_summary.json");
    try {
        write_json(p, j);
    } catch (const std::exception& e) {
        std::cerr << "warning: " << e.what() << '\n';
    }
}

bool bracket_inside(const WidthEstimate& w) { return w.ok && w.b_lo > 0.5 * pi && w.b_hi < pi; }

Outcome run_solve(const RunConfig& c)
{
    Outcome o;
    const double a = c.a_list.front();
    const double b = c.b.value_or(2.0);
    const Resolution res = c.resolution();
    const Grid g = res.grid_for(a, b);
    NewtonOptions opt;
    opt.tol = c.tol;
    SolveReport r = solve_bvp(g, BoundaryData::constant(g, c.bottom, c.top), std::nullopt, opt);
    o.result = {{"a", a},          {"b", b},
                {"nx", g.nx()},    {"ny", g.ny()},
                {"status", to_string(r.status)}, {"iterations", r.iterations},
                {"residual", number(r.residual)}, {"residual_history", r.residual_history},
                {"damping_history", r.damping_history}};
    if (auto p = one_d_profile(b, c.bottom, c.top)) {
        double err = 0.0;
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i)
                err = std::max(err, std::abs(r.solution(i, j) - (*p)(g.y(j))));
        o.result["profile_error"] = err;
    }
    const std::string bin = path_in(c, "solve_field.bin"), csv = path_in(c, "solve_field.csv");
    write_field_binary(bin, r.solution);
    write_field_csv(csv, r.solution);
    o.artifacts = {bin, csv};
    o.code = r.converged() ? ok : solver_failed;
    return o;
}

Outcome run_width(const RunConfig& c)
{
    Outcome o;
    const WidthEstimate w = estimate_width(c.a_list.front(), c.width_options());
    o.result = to_json(w);
    o.result["inside_interval"] = bracket_inside(w);
    o.code = bracket_inside(w) ? ok : check_failed;
    return o;
}

Outcome run_sweep(const RunConfig& c)
{
    Outcome o;
    const WidthCurve curve = width_curve(c.a_list, c.width_options());
    bool strict = true; // midpoints nondecreasing as numbers
    for (std::size_t k = 1; k < curve.entries.size(); ++k)
        strict = strict && curve.entries[k].midpoint() >= curve.entries[k - 1].midpoint();
    bool all_ok = true;
    for (const auto& w : curve.entries)
        all_ok = all_ok && bracket_inside(w);
    const std::string csv = path_in(c, "width_curve.csv"), audit = path_in(c, "width_audit.json");
    {
        std::ofstream os(csv, std::ios::binary);
        if (!os)
            throw std::runtime_error("cannot open " + csv);
        write_width_csv(os, curve);
    }
    write_json(audit, to_json(curve));
    o.artifacts = {csv, audit};
    Json rows = Json::array();
    for (std::size_t k = 0; k < curve.entries.size(); ++k) {
        const auto& w = curve.entries[k];
        rows.push_back({{"a", w.a}, {"b_lo", number(w.b_lo)}, {"b_hi", number(w.b_hi)},
                        {"midpoint", number(w.midpoint())}, {"ok", w.ok}, {"error", curve.errors[k]}});
    }
    o.result = {{"entries", rows}, {"monotone_within_widths", curve.monotone}, {"midpoints_nondecreasing", strict},
                {"all_inside_interval", all_ok}};
    o.code = (curve.monotone && strict && all_ok) ? ok : check_failed;
    return o;
}

Outcome run_trident(const RunConfig& c)
{
    Outcome o;
    const double a = c.a_list.front();
    double b_lo = 0.0;
    if (c.b) {
        b_lo = *c.b;
        o.result["width"] = nullptr;
    } else {
        const WidthEstimate w = estimate_width(a, c.width_options());
        o.result["width"] = to_json(w);
        if (!w.ok) {
            o.code = check_failed;
            o.result["error"] = "width bracket unusable: " + w.failure;
            return o;
        }
        b_lo = w.b_lo;
    }
    NewtonOptions opt;
    opt.tol = c.tol;
    const TridentSolution t = build_trident(a, b_lo, c.delta, c.resolution(), CapSchedule(c.caps), opt);
    o.result["trident"] = to_json(t);
    const std::string bin = path_in(c, "trident_field.bin"), csv = path_in(c, "trident_field.csv"),
                      props = path_in(c, "trident_properties.json");
    write_field_binary(bin, t.u);
    write_field_csv(csv, t.u);
    write_json(props, to_json(t));
    o.artifacts = {bin, csv, props};
    if (!t.converged) {
        o.code = solver_failed;
        return o;
    }
    if (!c.export_path.empty()) {
        MeshOptions mo;
        mo.periods = c.periods;
        if (c.zmin)
            mo.zmin = *c.zmin;
        if (c.zmax)
            mo.zmax = *c.zmax;
        const TriangleMesh m = reflect_and_tile(t, mo);
        export_obj(c.export_path, m);
        o.result["mesh"] = to_json(m);
        o.artifacts.push_back(c.export_path);
    }
    o.code = t.report.all_pass() ? ok : check_failed;
    return o;
}

Outcome run_verify(const RunConfig& c)
{
    Outcome o;
    if (c.field_path.empty())
        throw InvalidInput("verify needs --field (a binary field written by `trident`)");
    const ScalarField u = read_field_binary(c.field_path);
    const PropertyReport r = verify_properties(u, c.tol);
    o.result = to_json(r);
    o.code = r.all_pass() ? ok : check_failed;
    return o;
}

Outcome run_report(const RunConfig& c)
{
    Outcome o;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(c.out_dir)) {
        const std::string name = e.path().filename().string();
        if (e.is_regular_file() && name.size() > 13 && name.ends_with("_summary.json") && name != "report_summary.json")
            files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    Json runs = Json::array();
    const std::string csv = path_in(c, "report.csv");
    std::ofstream os(csv, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot open " + csv);
    os << "file,command,exit_code,error\n";
    bool all_zero = true;
    for (const auto& f : files) {
        const Json j = read_json(f.string());
        const int code = j.value("exit_code", -1);
        all_zero = all_zero && code == 0;
        runs.push_back({{"file", f.filename().string()}, {"command", j.value("command", "")}, {"exit_code", code},
                        {"result", j.value("result", Json::object())}});
        std::string err = j.value("error", "");
        std::replace(err.begin(), err.end(), ',', ';');
        os << f.filename().string() << ',' << j.value("command", "") << ',' << code << ',' << err << '\n';
    }
    const std::string agg = path_in(c, "report.json");
    write_json(agg, {{"schema", summary_schema}, {"runs", runs}});
    o.artifacts = {agg, csv};
    o.result = {{"runs", files.size()}, {"all_exit_zero", all_zero}};
    o.code = all_zero ? ok : check_failed;
    return o;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"tridentlab: translating-soliton tridents on periodic strips"};
    app.require_subcommand(1);

    // every option maps to a config key; flags given on the command line override the file
    std::map<std::string, std::string> flags;
    std::string config_file;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_file, "key = value config file");
        static const std::vector<std::pair<const char*, const char*>> keys = {
            {"a", "half period (sweep: comma separated list)"},
            {"b", "strip width (solve, or trident without a width run)"},
            {"nx", "grid columns, 0 = automatic"},
            {"ny", "grid rows, 0 = automatic"},
            {"max_ny", "row cap for the automatic choice"},
            {"caps", "cap schedule, comma separated"},
            {"tol", "solver tolerance"},
            {"target_width", "width bracket target"},
            {"eps0", "initial bracket offset from pi/2 and pi"},
            {"delta", "trident: solve at b_lo - delta"},
            {"periods", "mesh: number of periods"},
            {"zmin", "mesh: lower z clip"},
            {"zmax", "mesh: upper z clip"},
            {"bottom", "solve: bottom value"},
            {"top", "solve: top value"},
            {"field", "verify: stored field (.bin)"},
            {"export", "trident: OBJ path"}};
        for (const auto& [key, text] : keys)
            sub->add_option(std::string("--") + key, flags[key], text);
        sub->add_option("--out", flags["out_dir"], "output directory");
    };
    const std::map<std::string, std::function<Outcome(const RunConfig&)>> verbs = {
        {"solve", run_solve},     {"width", run_width},   {"sweep", run_sweep},
        {"trident", run_trident}, {"verify", run_verify}, {"report", run_report}};
    const std::map<std::string, std::string> help = {
        {"solve", "one boundary value problem with constant data"},
        {"width", "width bracket for one a"},
        {"sweep", "width curve over a list of a"},
        {"trident", "build, verify and optionally export the trident"},
        {"verify", "property suite on a stored field"},
        {"report", "aggregate the summaries in a run directory"}};
    for (const auto& [name, fn] : verbs)
        add_common(app.add_subcommand(name, help.at(name)));

    std::string verb = "tridentlab";
    RunConfig cfg;
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return usage;
    }
    for (auto* sub : app.get_subcommands())
        verb = sub->get_name();
    CLI::App* sub = app.get_subcommand(verb);

    try {
        if (!config_file.empty())
            cfg = read_config(config_file);
        for (const auto& [key, value] : flags)
            if (sub->count(key == "out_dir" ? "--out" : "--" + key) > 0)
                set_config_value(cfg, key, value);
        cfg.command = verb;
    } catch (const std::exception& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        Outcome o;
        o.code = usage;
        write_summary(verb, cfg, o, e.what());
        return usage;
    }

    Outcome o;
    std::string error;
    try {
        std::error_code ec;
        fs::create_directories(cfg.out_dir, ec);
        o = verbs.at(verb)(cfg);
    } catch (const InvalidInput& e) {
        o.code = usage;
        error = e.what();
    } catch (const std::exception& e) {
        o.code = solver_failed;
        error = e.what();
    }
    write_summary(verb, cfg, o, error);
    if (!error.empty())
        std::cerr << verb << ": " << error << '\n';
    std::cout << verb << ": exit " << o.code << " (" << path_in(cfg, verb + "_summary.json") << ")\n";
    return o.code;
}
