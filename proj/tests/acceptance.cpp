// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned here.
//
//   acceptance [--only 1,2,...] [--expect-fail 7,...]
//
// Exit status is 0 when the set of failing criteria equals the --expect-fail
// set (empty by default), 1 otherwise.  Expected failures still print FAIL.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <tridentlab/tridentlab.hpp>

using namespace tridentlab;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

std::string fmt(const char* f, auto... v)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, v...);
    return buf;
}

// shared work, computed on first use
struct Cache {
    std::map<double, WidthEstimate> widths;
    std::optional<TridentSolution> trident_a1;

    const WidthEstimate& width(double a, std::vector<std::string>& reused)
    {
        auto it = widths.find(a);
        if (it != widths.end()) {
            reused.push_back(fmt("width a=%g", a));
            return it->second;
        }
        return widths.emplace(a, estimate_width(a)).first->second;
    }
};

std::string reuse_note(const std::vector<std::string>& r)
{
    if (r.empty())
        return "";
    std::string s = " (reuses";
    for (const auto& x : r)
        s += " " + x;
    return s + ")";
}

double max_interior_residual(const ScalarField& u)
{
    return residual(u).max_abs();
}

Outcome c1()
{
    // grim reaper log cos(y - 0.75) + 0.3 on [0, 1.5]; log sin over the window y in [0.7, 2.2]
    auto grim = [](const Grid& g) {
        return ScalarField::sample(g, [](double, double y) { return std::log(std::cos(y - 0.75)) + 0.3; });
    };
    auto lsin = [](const Grid& g) {
        return ScalarField::sample(g, [](double, double y) { return std::log(std::sin(y + 0.7)); });
    };
    Grid coarse({1.0, 1.5}, 64, 65), fine({1.0, 1.5}, 128, 129);
    const double g0 = max_interior_residual(grim(coarse)), g1 = max_interior_residual(grim(fine));
    const double s0 = max_interior_residual(lsin(coarse)), s1 = max_interior_residual(lsin(fine));
    const double rg = g0 / g1, rs = s0 / s1;
    const bool ok = g0 <= 1e-3 && s0 <= 1e-3 && rg >= 3.5 && rg <= 4.5 && rs >= 3.5 && rs <= 4.5;
    return {ok, fmt("grim |R|=%.3e ratio %.3f; log sin |R|=%.3e ratio %.3f (bound 1e-3, ratio in [3.5,4.5])", g0, rg,
                    s0, rs)};
}

Outcome c2()
{
    Grid g({1.0, 2.0}, 32, 33);
    const double t = 0.35, c = std::cos(t);
    std::vector<ScalarField> bases = {
        ScalarField::sample(g, [](double, double y) { return std::log(std::cos(y - 1.0)); }),
        ScalarField::sample(g, [&](double x, double y) { return std::log(std::cos((y - 1.0) * c)) / (c * c) + x * std::tan(t); }),
        ScalarField::sample(g, [](double x, double y) { return std::sin(pi * x) * y * (2.0 - y) + 0.5 * y * y; })};
    std::mt19937 rng(20240611);
    std::normal_distribution<double> nd;
    double worst = 0.0;
    for (const ScalarField& base : bases) {
        const SparseMatrix L = linearize(base);
        for (int k = 0; k < 3; ++k) {
            ScalarField dir(g);
            for (double& v : dir.values())
                v = nd(rng);
            const double eps = 1e-6;
            const Eigen::VectorXd fd =
                (residual_vector(combine(1.0, base, eps, dir)) - residual_vector(combine(1.0, base, -eps, dir))) /
                (2.0 * eps);
            const Eigen::VectorXd lin = L * as_vector(dir);
            worst = std::max(worst, (fd - lin).norm() / lin.norm());
        }
    }
    return {worst <= 1e-6, fmt("max relative error %.3e over 3 fields x 3 directions (bound 1e-6)", worst)};
}

Outcome c3()
{
    Grid g({1.0, 2.0}, 64, 65);
    NewtonOptions opt;
    opt.tol = 1e-10;
    const SolveReport r = solve_bvp(g, BoundaryData::constant(g, 0.0, 0.0), std::nullopt, opt);
    double err = 0.0;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            err = std::max(err, std::abs(r.solution(i, j) - (std::log(std::cos(g.y(j) - 1.0)) - std::log(std::cos(1.0)))));
    const double mid = r.solution(0, (g.ny() - 1) / 2);
    const bool ok = r.converged() && err <= 5e-3 && std::abs(mid - 0.6156) <= 5e-3;
    return {ok, fmt("%s, max error %.3e, u(y=1)=%.5f vs 0.6156 (tol 5e-3)", to_string(r.status), err, mid)};
}

Outcome c4()
{
    const AlphaEstimate wide = estimate_alpha(1.0, pi, Resolution{128, 129});
    const AlphaEstimate narrow = estimate_alpha(1.0, 0.5);
    const bool ok = std::abs(wide.area.total - 3.0) <= 0.03 * 3.0 && narrow.area.total < 2.7;
    return {ok, fmt("alpha(1,pi)=%.5f (|rel err| %.3f%%, bound 3%%); alpha(1,0.5)=%.5f (bound 2.7)", wide.area.total,
                    100.0 * std::abs(wide.area.total - 3.0) / 3.0, narrow.area.total)};
}

Outcome c5()
{
    // ordered up to the combined slack of the two samples compared
    std::ostringstream os;
    bool ok = true;
    std::vector<AlphaEstimate> bs;
    for (double b : {1.0, 1.5, 2.0, 2.5})
        bs.push_back(estimate_alpha(1.0, b));
    os << "b:";
    for (std::size_t k = 0; k < bs.size(); ++k) {
        os << fmt(" %.4f(+-%.4f)", bs[k].area.total, bs[k].slack);
        if (k > 0 && bs[k].area.total < bs[k - 1].area.total - (bs[k].slack + bs[k - 1].slack))
            ok = false;
    }
    std::vector<AlphaEstimate> as;
    for (double a : {0.5, 1.0, 2.0})
        as.push_back(estimate_alpha(a, 2.0));
    os << "; a:";
    for (std::size_t k = 0; k < as.size(); ++k) {
        const double v = as[k].area.total / as[k].a, s = as[k].slack / as[k].a;
        os << fmt(" %.4f(+-%.4f)", v, s);
        if (k > 0) {
            const double pv = as[k - 1].area.total / as[k - 1].a, ps = as[k - 1].slack / as[k - 1].a;
            if (v > pv + s + ps)
                ok = false;
        }
    }
    return {ok, os.str()};
}

bool usable(const WidthEstimate& w)
{
    return w.ok && w.width() <= 0.05 + 1e-12 && w.b_lo > 0.5 * pi && w.b_hi < pi;
}

Outcome c6(Cache& cache)
{
    std::vector<std::string> reused;
    std::ostringstream os;
    bool ok = true;
    double prev = -1.0;
    for (double a : {0.25, 1.0, 4.0}) {
        const WidthEstimate& w = cache.width(a, reused);
        os << fmt("a=%g [%.5f, %.5f]%s ", a, w.b_lo, w.b_hi, w.ok ? "" : " not ok");
        if (!usable(w) || w.midpoint() < prev)
            ok = false;
        prev = w.midpoint();
    }
    return {ok, os.str() + "(width <= 0.05 inside (pi/2, pi), midpoints nondecreasing)" + reuse_note(reused)};
}

Outcome c7(Cache& cache)
{
    std::vector<std::string> reused;
    const WidthEstimate& w0 = cache.width(0.025, reused);
    const WidthEstimate& w1 = cache.width(0.1, reused);
    const WidthEstimate& w2 = cache.width(1.0, reused);
    const WidthEstimate& w4 = cache.width(4.0, reused);
    const bool small = w0.ok && w1.ok && w0.midpoint() - 0.5 * pi < w1.midpoint() - 0.5 * pi;
    const bool large = w2.ok && w4.ok && pi - w4.midpoint() < pi - w2.midpoint();
    auto desc = [](const WidthEstimate& w) {
        return fmt("a=%g [%.5f, %.5f]%s", w.a, w.b_lo, w.b_hi, w.ok ? "" : (" failed: " + w.failure).c_str());
    };
    return {small && large, fmt("small a %s (%s vs %s); large a %s (pi-mid %.4f vs %.4f)", small ? "ok" : "FAIL",
                                desc(w0).c_str(), desc(w1).c_str(), large ? "ok" : "FAIL", pi - w4.midpoint(),
                                pi - w2.midpoint()) +
                                reuse_note(reused)};
}

Outcome c8(Cache& cache)
{
    std::vector<std::string> reused;
    const WidthEstimate& w = cache.width(1.0, reused);
    if (!w.ok)
        return {false, "no usable width bracket at a=1" + reuse_note(reused)};
    cache.trident_a1 = build_trident(w);
    const TridentSolution& t = *cache.trident_a1;
    const PropertyReport& r = t.report;
    const bool ok = t.converged && r.all_pass();
    return {ok, fmt("b_used=%.5f sym %.1e/%.1e mono %.2e uxx(-a/2)>=%.2e uxx(a/2)<=%.2e det +%zu/-%zu midline "
                    "%.3f<-%.3f flux %.2e<=%.2e",
                    t.b_used, r.symmetry.value, r.symmetry.tolerance, r.monotonicity.value, r.uxx_left.value,
                    r.uxx_right.value, r.det_positive.size(), r.det_negative.size(), r.midline.max_margin,
                    r.midline.tolerance, r.flux_defect.value, r.flux_defect.tolerance) +
                reuse_note(reused)};
}

Outcome c9(Cache& cache)
{
    std::vector<std::string> reused;
    const WidthEstimate& w4 = cache.width(0.4, reused);
    const WidthEstimate& w1 = cache.width(0.1, reused);
    if (!w4.ok || !w1.ok)
        return {false, "width bracket missing at a=0.4 or a=0.1" + reuse_note(reused)};
    const TridentSolution t4 = build_trident(w4), t1 = build_trident(w1);
    const double e4 = t4.report.small_a.value, e1 = t1.report.small_a.value;
    const bool ok = t4.converged && t1.converged && std::isfinite(e4) && std::isfinite(e1) && e1 < e4;
    return {ok, fmt("a=0.4 (b_used %.4f): %.4f; a=0.1 (b_used %.4f): %.4f", t4.b_used, e4, t1.b_used, e1) +
                    reuse_note(reused)};
}

std::string obj_text(const TriangleMesh& m)
{
    std::ostringstream os;
    export_obj(os, m);
    return os.str();
}

Outcome c10(Cache& cache)
{
    std::vector<std::string> reused;
    const WidthEstimate& w = cache.width(1.0, reused);
    if (!cache.trident_a1) {
        if (!w.ok)
            return {false, "no usable width bracket at a=1" + reuse_note(reused)};
        cache.trident_a1 = build_trident(w);
    } else {
        reused.push_back("trident a=1");
    }
    const TridentSolution& t = *cache.trident_a1;
    const TriangleMesh m = reflect_and_tile(t);
    const std::string text = obj_text(m);
    // independent rebuild from the same bracket
    const std::string again = obj_text(reflect_and_tile(build_trident(w)));
    const bool repro = text == again;
    std::istringstream is(text);
    const TriangleMesh back = import_obj(is);
    bool round = back.vertices == m.vertices && back.faces == m.faces;
    const TriangleMesh rr = rotate_about_origin_line(rotate_about_origin_line(m));
    const bool invol = rr.vertices == m.vertices;
    const double weld = MeshOptions{}.weld_tol * bbox_scale(m);
    const double a = t.a;
    const double mir = vertex_set_defect(
        m, [a](std::array<double, 3> v) { return std::array<double, 3>{a - v[0], v[1], v[2]}; }, t.u.grid().hx(),
        2.0 * a);
    const bool ok = repro && round && invol && mir <= weld;
    return {ok, fmt("%zu vertices %zu faces; reproducible %s, OBJ round trip %s, double rotation %s, "
                    "x->a-x defect %.2e (weld %.2e)",
                    m.vertices.size(), m.faces.size(), repro ? "yes" : "no", round ? "exact" : "differs",
                    invol ? "exact" : "differs", mir, weld) +
                reuse_note(reused)};
}

std::set<int> parse_set(const std::string& s)
{
    std::set<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.insert(std::stoi(item));
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"tridentlab acceptance run"};
    std::string only, expect;
    app.add_option("--only", only, "comma separated criteria to run");
    app.add_option("--expect-fail", expect, "comma separated criteria known to fail");
    CLI11_PARSE(app, argc, argv);
    std::set<int> want = parse_set(only);
    const std::set<int> expected = parse_set(expect);

    Cache cache;
    struct Criterion {
        int id;
        double budget;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> all = {
        {1, 1.0, c1},
        {2, 5.0, c2},
        {3, 5.0, c3},
        {4, 120.0, c4},
        {5, 300.0, c5},
        {6, 900.0, [&] { return c6(cache); }},
        {7, 900.0, [&] { return c7(cache); }},
        {8, 300.0, [&] { return c8(cache); }},
        {9, 600.0, [&] { return c9(cache); }},
        {10, 60.0, [&] { return c10(cache); }},
    };

    std::set<int> failed;
    for (const Criterion& c : all) {
        if (!want.empty() && !want.count(c.id))
            continue;
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        const bool in_time = secs < c.budget;
        const bool pass = o.pass && in_time;
        if (!pass)
            failed.insert(c.id);
        std::printf("criterion %2d %s  %s  [%.2f s, budget %.0f s%s]%s\n", c.id, pass ? "PASS" : "FAIL",
                    o.detail.c_str(), secs, c.budget, in_time ? "" : ", over budget",
                    !pass && expected.count(c.id) ? " known failure" : "");
        std::fflush(stdout);
    }

    std::set<int> expected_run;
    for (int id : expected)
        if (want.empty() || want.count(id))
            expected_run.insert(id);
    const bool as_expected = failed == expected_run;
    std::printf("summary: %zu failing", failed.size());
    for (int id : failed)
        std::printf(" %d", id);
    std::printf("; %s\n", as_expected ? "matches the expected set" : "does not match the expected set");
    return as_expected ? 0 : 1;
}
