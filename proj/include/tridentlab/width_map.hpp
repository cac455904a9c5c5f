#pragma once

/**
 * @file width_map.hpp
 * @brief Area estimates alpha(a,b) for the capped spanning problem, the
 *        critical width b(a) by bisection with a two-signal classifier, and
 *        the width curve over a list of half periods.
 */

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "grid.hpp"
#include "solver.hpp"
#include "translator.hpp"

namespace tridentlab {

/**
 * Grid size for a probe.  nx = 0 picks 64 per two units of a (at least 64);
 * ny = 0 makes hy close to hx, clamped to [min_ny, max_ny] and odd so the
 * indicator row y = b/2 lands on a node.
 */
struct Resolution {
    int nx = 0;
    int ny = 0;
    int min_ny = 65;
    int max_ny = 257;

    int nx_for(double a) const
    {
        if (nx > 0)
            return nx;
        return 64 * std::max(1, static_cast<int>(std::lround(a / 2.0)));
    }

    int ny_for(double a, double b) const
    {
        if (ny > 0)
            return ny;
        const double hx = 2.0 * a / nx_for(a);
        int n = static_cast<int>(std::lround(b / hx)) + 1;
        n = std::clamp(n, min_ny, max_ny);
        return n % 2 == 0 ? n + 1 : n;
    }

    Grid grid_for(double a, double b) const { return Grid({a, b}, nx_for(a), ny_for(a, b)); }

    /// Twice as fine in both directions, for the given strip.
    Resolution refined(double a, double b) const
    {
        Resolution r = *this;
        r.nx = 2 * nx_for(a);
        r.ny = 2 * ny_for(a, b) - 1;
        r.max_ny = std::max(max_ny, r.ny);
        return r;
    }
};

enum class AreaVerdict { below_wall, at_wall_within_tol };

inline const char* to_string(AreaVerdict v)
{
    return v == AreaVerdict::below_wall ? "below-wall" : "at-wall-within-tol";
}

/// Area slack constant, fitted once to alpha(1, pi) = 3 at nx = 128, ny = 129, cap 16.
inline constexpr double slack_constant = 2.5e-5;

/// max |u_xx|, |u_yy|, |u_xy| over interior nodes
inline double max_second_derivative(const ScalarField& u)
{
    const Grid& g = u.grid();
    double m = 0.0;
    for (int j = 1; j < g.ny() - 1; ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const LocalDerivatives d = interior_derivatives(u, i, j);
            m = std::max({m, std::abs(d.uxx), std::abs(d.uyy), std::abs(d.uxy)});
        }
    return m;
}

/// C_q (hx^2 + hy^2) (2b+1) a max|D^2 u| + a e^{-cap}
inline double area_slack(const Grid& g, double max_d2u, double cap)
{
    const double h2 = g.hx() * g.hx() + g.hy() * g.hy();
    return slack_constant * h2 * (2.0 * g.b() + 1.0) * g.a() * max_d2u + g.a() * std::exp(-cap);
}

struct AlphaEstimate {
    double a = 0.0;
    double b = 0.0;
    double cap = 0.0;
    int nx = 0;
    int ny = 0;
    AreaEstimate area;
    double wall = 0.0;  ///< 3a
    double slack = 0.0;
    double max_d2u = 0.0;
    AreaVerdict verdict = AreaVerdict::at_wall_within_tol;
    SolveStatus status = SolveStatus::no_convergence;
    int failed_stage = -1;
    bool monotone = true;
    std::vector<ContinuationStage> trace;
    std::string note; ///< failure annotation, empty when every stage converged
};

/**
 * Capped spanning problem: u = +cap on P, 0 on the rest of the boundary,
 * continued over the schedule without stopping at failed stages (the
 * weighted area keeps decreasing even when no discrete minimizer exists at
 * the larger caps).  The area of the final iterate is the estimate.
 */
inline AlphaEstimate estimate_alpha(double a, double b, const Resolution& res = {},
                                    const CapSchedule& schedule = CapSchedule::standard(),
                                    const NewtonOptions& opt = {1e-6})
{
    if (!(a > 0.0) || !(b > 0.0))
        throw InvalidInput("estimate_alpha needs a > 0 and b > 0");
    if (b > pi + 0.5)
        throw InvalidInput("estimate_alpha: b beyond pi + 0.5 is outside the supported range");
    const Grid g = res.grid_for(a, b);
    SolveReport rep = cap_continuation(g, PatternKind::alpha, schedule, opt, Scheme::area, false);

    AlphaEstimate est;
    est.a = a;
    est.b = b;
    est.cap = schedule.last();
    est.nx = g.nx();
    est.ny = g.ny();
    est.area = weighted_area(rep.solution, est.cap);
    est.wall = 3.0 * a;
    est.max_d2u = max_second_derivative(rep.solution);
    est.slack = area_slack(g, est.max_d2u, est.cap);
    est.status = rep.status;
    est.failed_stage = rep.failed_stage;
    est.monotone = rep.monotone;
    est.trace = std::move(rep.trace);
    const bool below = est.area.total + est.slack < est.wall;
    if (rep.failed_stage >= 0) {
        est.note = "stage " + std::to_string(rep.failed_stage) + " (cap " +
                   std::to_string(est.trace[rep.failed_stage].cap) + "): " + to_string(rep.status);
        est.verdict = AreaVerdict::at_wall_within_tol;
    } else {
        est.verdict = below ? AreaVerdict::below_wall : AreaVerdict::at_wall_within_tol;
    }
    return est;
}

// ---------------------------------------------------------------------------
// degeneration indicator

enum class Growth { saturating, degenerating, undecided };

inline const char* to_string(Growth g)
{
    switch (g) {
    case Growth::saturating: return "saturating";
    case Growth::degenerating: return "degenerating";
    case Growth::undecided: return "undecided";
    }
    return "?";
}

struct GrowthReading {
    Growth growth = Growth::undecided;
    double previous = 0.0; ///< indicator increment over the second to last cap step
    double last = 0.0;     ///< indicator increment over the last cap step
    double step = 0.0;     ///< last cap step
};

/**
 * Reads the indicator u(-a/2, b/2) over the last two cap steps.  Saturating:
 * the increment at least halves, or is negligible.  Degenerating: the
 * increment does not shrink and is a fixed fraction of the cap step (the
 * graph follows the rising data).  Below the critical width the increments
 * decay geometrically; above it they approach cap-step/2 (small a, where the
 * indicator sits over the corner average) up to cap-step (larger a), so the
 * fraction is set at 0.4.  A failed stage counts as degenerating.
 */
inline GrowthReading read_growth(const std::vector<ContinuationStage>& trace)
{
    GrowthReading r;
    if (trace.size() < 3)
        throw InvalidInput("growth reading needs at least three cap stages");
    const std::size_t n = trace.size();
    r.previous = trace[n - 2].indicator - trace[n - 3].indicator;
    r.last = trace[n - 1].indicator - trace[n - 2].indicator;
    r.step = trace[n - 1].cap - trace[n - 2].cap;
    const bool failed = std::any_of(trace.begin(), trace.end(), [](const auto& s) { return !s.converged; });
    if (failed)
        r.growth = Growth::degenerating;
    else if (r.last <= 1e-3 * r.step || r.last <= 0.5 * r.previous)
        r.growth = Growth::saturating;
    else if (r.last >= 0.4 * r.step && r.last >= 0.9 * r.previous)
        r.growth = Growth::degenerating;
    else
        r.growth = Growth::undecided;
    return r;
}

// ---------------------------------------------------------------------------
// width bracket

enum class ProbeClass { below, at_wall, conflict };

inline const char* to_string(ProbeClass c)
{
    switch (c) {
    case ProbeClass::below: return "below";
    case ProbeClass::at_wall: return "at-wall";
    case ProbeClass::conflict: return "conflict";
    }
    return "?";
}

/**
 * Combines the two signals.  The area total is an upper bound, so only a
 * below-wall verdict is decisive; at-wall-within-tol is compatible with a
 * saturating indicator when the minimizer's area is within slack of 3a.
 */
inline ProbeClass combine(AreaVerdict v, Growth g)
{
    if (g == Growth::saturating)
        return ProbeClass::below;
    if (g == Growth::degenerating)
        return v == AreaVerdict::at_wall_within_tol ? ProbeClass::at_wall : ProbeClass::conflict;
    return ProbeClass::conflict;
}

struct Probe {
    double b = 0.0;
    AlphaEstimate alpha;
    GrowthReading growth;
    ProbeClass verdict = ProbeClass::conflict;
    bool escalated = false; ///< verdict taken from the refined rerun
    std::optional<ProbeClass> first_verdict; ///< verdict before escalation
};

struct WidthOptions {
    double target_width = 0.05;
    double eps0 = 0.05;          ///< initial bracket [pi/2 + eps0, pi - eps0]
    int max_extensions = 10;     ///< halvings of the distance to pi/2 or pi when an endpoint misclassifies
    int max_bisections = 40;
    int escalation_extra_caps = 2;
    Resolution resolution;
    CapSchedule schedule = CapSchedule::standard();
    NewtonOptions newton{1e-6};
};

struct WidthEstimate {
    double a = 0.0;
    double b_lo = 0.0;
    double b_hi = 0.0;
    bool ok = false;
    std::string failure; ///< "ClassifierConflict", "bracket" or empty
    std::vector<Probe> probes;

    double midpoint() const { return 0.5 * (b_lo + b_hi); }
    double width() const { return b_hi - b_lo; }
    const Probe* probe_at(double b) const
    {
        for (const Probe& p : probes)
            if (p.b == b)
                return &p;
        return nullptr;
    }
};

/// Classification of one width; on conflict reruns once at doubled resolution with a longer schedule.
inline Probe classify_width(double a, double b, const WidthOptions& opt)
{
    Probe p;
    p.b = b;
    p.alpha = estimate_alpha(a, b, opt.resolution, opt.schedule, opt.newton);
    p.growth = read_growth(p.alpha.trace);
    p.verdict = combine(p.alpha.verdict, p.growth.growth);
    if (p.verdict != ProbeClass::conflict || opt.escalation_extra_caps < 0)
        return p;
    p.first_verdict = p.verdict;
    p.escalated = true;
    p.alpha = estimate_alpha(a, b, opt.resolution.refined(a, b), opt.schedule.extended(opt.escalation_extra_caps),
                             opt.newton);
    p.growth = read_growth(p.alpha.trace);
    p.verdict = combine(p.alpha.verdict, p.growth.growth);
    return p;
}

/**
 * Bisection for b(a).  The endpoints of [pi/2 + eps0, pi - eps0] are probed
 * first; an endpoint on the wrong side moves halfway toward pi/2 (or pi)
 * until it classifies correctly, the old endpoint becoming the other end of
 * the bracket.  Stops when the bracket is no wider than target_width.
 */
inline WidthEstimate estimate_width(double a, const WidthOptions& opt = {})
{
    if (!(a > 0.0) || !std::isfinite(a))
        throw InvalidInput("estimate_width needs a > 0");
    if (!(opt.target_width > 0.0))
        throw InvalidInput("target bracket width must be positive");
    if (!(opt.eps0 > 0.0) || opt.eps0 >= 0.25 * pi)
        throw InvalidInput("eps0 must lie in (0, pi/4)");

    WidthEstimate w;
    w.a = a;
    auto probe = [&](double b) -> ProbeClass {
        w.probes.push_back(classify_width(a, b, opt));
        return w.probes.back().verdict;
    };
    auto conflict = [&](double lo, double hi) {
        w.b_lo = lo;
        w.b_hi = hi;
        w.ok = false;
        w.failure = "ClassifierConflict";
        return w;
    };

    double lo = 0.5 * pi + opt.eps0;
    double hi = pi - opt.eps0;

    // lower end: must be below the wall
    for (int k = 0;; ++k) {
        const ProbeClass c = probe(lo);
        if (c == ProbeClass::below)
            break;
        if (c == ProbeClass::conflict)
            return conflict(lo, hi);
        if (k == opt.max_extensions) {
            w.b_lo = 0.5 * pi;
            w.b_hi = lo;
            w.failure = "bracket";
            return w;
        }
        hi = lo;
        lo = 0.5 * pi + 0.5 * (lo - 0.5 * pi);
    }
    // upper end, unless the lower search already fixed it
    if (hi == pi - opt.eps0) {
        for (int k = 0;; ++k) {
            const ProbeClass c = probe(hi);
            if (c == ProbeClass::at_wall)
                break;
            if (c == ProbeClass::conflict)
                return conflict(lo, hi);
            if (k == opt.max_extensions) {
                w.b_lo = hi;
                w.b_hi = pi;
                w.failure = "bracket";
                return w;
            }
            lo = hi;
            hi = pi - 0.5 * (pi - hi);
        }
    }

    for (int k = 0; k < opt.max_bisections && hi - lo > opt.target_width; ++k) {
        const double mid = 0.5 * (lo + hi);
        const ProbeClass c = probe(mid);
        if (c == ProbeClass::conflict)
            return conflict(lo, hi);
        (c == ProbeClass::below ? lo : hi) = mid;
    }
    w.b_lo = lo;
    w.b_hi = hi;
    w.ok = hi - lo <= opt.target_width && lo > 0.5 * pi && hi < pi;
    if (!w.ok)
        w.failure = "bracket";
    return w;
}

// ---------------------------------------------------------------------------
// width curve

struct WidthCurve {
    std::vector<WidthEstimate> entries;
    std::vector<std::string> errors; ///< per entry, empty when the entry ran
    bool monotone = true;            ///< midpoints nondecreasing within bracket widths
    std::vector<double> distance_to_half_pi;
    std::vector<double> distance_to_pi;
};

/**
 * Ordering check used for the curve: consecutive usable midpoints may not
 * drop by more than the sum of the two half widths (brackets are ordered
 * when they could still contain a nondecreasing b).
 */
inline bool midpoints_ordered(const WidthEstimate& x, const WidthEstimate& y)
{
    return y.midpoint() + 0.5 * (x.width() + y.width()) >= x.midpoint();
}

inline WidthCurve width_curve(const std::vector<double>& as, const WidthOptions& opt = {})
{
    if (as.empty())
        throw InvalidInput("width_curve needs a nonempty list of a");
    for (std::size_t k = 1; k < as.size(); ++k)
        if (!(as[k] > as[k - 1]))
            throw InvalidInput("width_curve needs an increasing list of a");
    WidthCurve c;
    for (double a : as) {
        std::string err;
        WidthEstimate w;
        try {
            w = estimate_width(a, opt);
        } catch (const std::exception& e) {
            w.a = a;
            err = e.what();
        }
        if (err.empty() && !w.ok)
            err = w.failure;
        c.entries.push_back(std::move(w));
        c.errors.push_back(err);
    }
    const WidthEstimate* prev = nullptr;
    for (std::size_t k = 0; k < c.entries.size(); ++k) {
        const WidthEstimate& w = c.entries[k];
        c.distance_to_half_pi.push_back(w.midpoint() - 0.5 * pi);
        c.distance_to_pi.push_back(pi - w.midpoint());
        if (!w.ok)
            continue;
        if (prev && !midpoints_ordered(*prev, w))
            c.monotone = false;
        prev = &w;
    }
    return c;
}

} // namespace tridentlab
