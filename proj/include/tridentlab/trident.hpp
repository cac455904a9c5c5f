#pragma once

/**
 * @file trident.hpp
 * @brief The normalized capped trident on a certified sub-critical strip and
 *        the property suite run on it.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "analytic.hpp"
#include "grid.hpp"
#include "solver.hpp"
#include "translator.hpp"
#include "width_map.hpp"

namespace tridentlab {

/// A measured quantity with the bound it was judged against.
struct Check {
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct NodeRef {
    int i = 0;
    int j = 0;
    double y = 0.0;
    double value = 0.0;
};

struct PropertyReport {
    Check symmetry;         ///< max |u(x,y) - u(a - x, y)|
    Check symmetry_other;   ///< max |u(x,y) - u(-a - x, y)|
    Check monotonicity;     ///< min of u(i+1,j) - u(i,j) over the central band
    Check uxx_left;         ///< min u_xx on x = -a/2, must be > -tol
    Check uxx_right;        ///< max u_xx on x = a/2, must be < tol
    double max_abs_uxy_columns = 0.0;

    double det_threshold = 0.0; ///< tau
    std::vector<NodeRef> det_positive;
    std::vector<NodeRef> det_negative;
    bool curvature_witnesses = false;

    SupersolutionReport midline;
    double midline_y0 = 0.0;
    double midline_y1 = 0.0;

    FluxBalance flux;
    Check flux_defect;

    bool small_a_computed = false;
    Check small_a; ///< tolerance unused (trend diagnostic); pass = computed

    double sine_comparison = std::numeric_limits<double>::quiet_NaN(); ///< diagnostic, column x = -a/2 vs log sin y
    double tangency_angle_left = 0.0;  ///< gradient angle (rad) next to the origin corner, N side
    double tangency_angle_right = 0.0; ///< same, P side

    bool all_pass() const
    {
        return symmetry.pass && symmetry_other.pass && monotonicity.pass && uxx_left.pass && uxx_right.pass &&
               curvature_witnesses && midline.strict && flux_defect.pass;
    }
};

struct TridentSolution {
    explicit TridentSolution(ScalarField field) : u(std::move(field)) {}

    double a = 0.0;
    double b_used = 0.0;
    double delta = 0.0;
    double cap = 0.0;
    double tol = 0.0;
    double shift = 0.0; ///< subtracted from the raw solution
    ScalarField u;
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
    std::vector<ContinuationStage> trace;
    PropertyReport report;
};

/// Flux-defect constant: |defect| / (h^2 max|D^2 u|) on exact grim reapers stays below this.
inline constexpr double flux_constant = 0.4;

/// Fraction of the strip trimmed at each end before the midline test.
inline constexpr double midline_trim = 0.1;

inline double column_median(const ScalarField& u, int i)
{
    const Grid& g = u.grid();
    std::vector<double> c;
    for (int j = 1; j < g.ny() - 1; ++j)
        c.push_back(u(i, j));
    std::sort(c.begin(), c.end());
    const std::size_t n = c.size();
    return n % 2 ? c[n / 2] : 0.5 * (c[n / 2 - 1] + c[n / 2]);
}

inline int nearest_row(const Grid& g, double y)
{
    return std::clamp(static_cast<int>(std::lround(y / g.hy())), 0, g.ny() - 1);
}

/**
 * max over 0.4 <= y <= b - 0.2 of |u - log cos y - c|, c the same
 * difference at the node nearest (a/2, b/2).  NaN when the band is empty or
 * leaves the domain of log cos.
 */
inline double small_a_comparison(const ScalarField& u)
{
    const Grid& g = u.grid();
    const double y1 = g.b() - 0.2;
    if (!(y1 > 0.4) || y1 >= 0.5 * pi)
        return std::numeric_limits<double>::quiet_NaN();
    const int ir = 3 * g.nx() / 4;
    const int jr = nearest_row(g, 0.5 * g.b());
    const double c = u(ir, jr) - std::log(std::cos(g.y(jr)));
    double m = 0.0;
    for (int j = 1; j < g.ny() - 1; ++j) {
        const double y = g.y(j);
        if (y < 0.4 || y > y1)
            continue;
        for (int i = 0; i < g.nx(); ++i)
            m = std::max(m, std::abs(u(i, j) - std::log(std::cos(y)) - c));
    }
    return m;
}

/// Same idea along x = -a/2 against log sin y on [0.2, b - 0.2], matched at b/2.
inline double sine_column_comparison(const ScalarField& u)
{
    const Grid& g = u.grid();
    const int il = g.nx() / 4;
    const int jr = nearest_row(g, 0.5 * g.b());
    if (!(g.b() - 0.2 > 0.2) || g.b() - 0.2 >= pi)
        return std::numeric_limits<double>::quiet_NaN();
    const double c = u(il, jr) - std::log(std::sin(g.y(jr)));
    double m = 0.0;
    for (int j = 1; j < g.ny() - 1; ++j) {
        const double y = g.y(j);
        if (y < 0.2 || y > g.b() - 0.2)
            continue;
        m = std::max(m, std::abs(u(il, j) - std::log(std::sin(y)) - c));
    }
    return m;
}

/**
 * Property suite.  `tol` is the solver tolerance the field was computed
 * with; every bound below is stated in terms of it or of the grid.
 */
inline PropertyReport verify_properties(const ScalarField& u, double tol)
{
    const Grid& g = u.grid();
    const int nx = g.nx();
    const int ny = g.ny();
    const double hx = g.hx();
    PropertyReport r;

    // symmetry: x -> a - x and x -> -a - x, as index maps
    double s1 = 0.0, s2 = 0.0;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            s1 = std::max(s1, std::abs(u(i, j) - u(g.wrap(3 * nx / 2 - i), j)));
            s2 = std::max(s2, std::abs(u(i, j) - u(g.wrap(nx / 2 - i), j)));
        }
    r.symmetry = {s1, 10.0 * tol, s1 <= 10.0 * tol};
    r.symmetry_other = {s2, 10.0 * tol, s2 <= 10.0 * tol};

    // u increasing in x on -a/2 + 2hx <= x <= a/2 - 2hx
    const int i0 = nx / 4 + 2;
    const int i1 = 3 * nx / 4 - 2;
    double mono = std::numeric_limits<double>::infinity();
    for (int j = 1; j < ny - 1; ++j)
        for (int i = i0; i < i1; ++i)
            mono = std::min(mono, u(i + 1, j) - u(i, j));
    r.monotonicity = {mono, -10.0 * tol, mono >= -10.0 * tol};

    // second derivatives on the two symmetry columns
    const int il = nx / 4;
    const int ir = 3 * nx / 4;
    const double tol_xx = 10.0 * tol / (hx * hx);
    double min_l = std::numeric_limits<double>::infinity();
    double max_r = -std::numeric_limits<double>::infinity();
    double uxy = 0.0;
    std::vector<double> det(ny, 0.0);
    for (int j = 1; j < ny - 1; ++j) {
        const LocalDerivatives dl = interior_derivatives(u, il, j);
        const LocalDerivatives dr = interior_derivatives(u, ir, j);
        min_l = std::min(min_l, dl.uxx);
        max_r = std::max(max_r, dr.uxx);
        uxy = std::max({uxy, std::abs(dl.uxy), std::abs(dr.uxy)});
        det[j] = dr.uxx * dr.uyy - dr.uxy * dr.uxy;
    }
    r.uxx_left = {min_l, -tol_xx, min_l > -tol_xx};
    r.uxx_right = {max_r, tol_xx, max_r < tol_xx};
    r.max_abs_uxy_columns = uxy;

    // curvature sign witnesses along x = a/2; tau is relative to the median
    // |det| since the wall rows carry values many orders larger
    std::vector<double> mag;
    for (int j = 1; j < ny - 1; ++j)
        mag.push_back(std::abs(det[j]));
    std::nth_element(mag.begin(), mag.begin() + mag.size() / 2, mag.end());
    r.det_threshold = 1e-3 * mag[mag.size() / 2];
    for (int j = 1; j < ny - 1; ++j) {
        if (det[j] > r.det_threshold)
            r.det_positive.push_back({ir, j, g.y(j), det[j]});
        else if (det[j] < -r.det_threshold)
            r.det_negative.push_back({ir, j, g.y(j), det[j]});
    }
    r.curvature_witnesses = !r.det_positive.empty() && !r.det_negative.empty();

    // midline w(y) = u(-a/2, y) away from both walls
    std::vector<double> ys, ws;
    for (int j = 1; j < ny - 1; ++j) {
        const double y = g.y(j);
        if (y < midline_trim * g.b() || y > (1.0 - midline_trim) * g.b())
            continue;
        ys.push_back(y);
        ws.push_back(u(il, j));
    }
    r.midline_y0 = ys.empty() ? 0.0 : ys.front();
    r.midline_y1 = ys.empty() ? 0.0 : ys.back();
    if (ys.size() >= 5)
        r.midline = supersolution_check(ys, ws);

    // flux balance over the full period, one row in from each wall
    r.flux = flux_balance(u, GridRect::band(1, ny - 2));
    const double h = std::max(g.hx(), g.hy());
    const double lim = 10.0 * (tol + flux_constant * h * h * max_second_derivative(u));
    r.flux_defect = {std::abs(r.flux.defect), lim, std::abs(r.flux.defect) <= lim};

    const double sa = small_a_comparison(u);
    r.small_a_computed = std::isfinite(sa);
    r.small_a = {sa, 0.0, r.small_a_computed};
    r.sine_comparison = sine_column_comparison(u);

    // gradient directions one node off the origin corner, diagnostic only
    const int ic = g.corner_origin_i();
    const LocalDerivatives dn = interior_derivatives(u, ic - 1, 1);
    const LocalDerivatives dp = interior_derivatives(u, ic + 1, 1);
    r.tangency_angle_left = std::atan2(dn.uy, dn.ux);
    r.tangency_angle_right = std::atan2(dp.uy, dp.ux);
    return r;
}

inline PropertyReport verify_properties(const TridentSolution& t) { return verify_properties(t.u, t.tol); }

/**
 * Trident data (+cap on P, -cap on the rest of the bottom and on the top)
 * solved by cap continuation on [0, b_lo - delta], then shifted so the
 * median of u over the column x = a/2 is zero.
 */
inline TridentSolution build_trident(double a, double b_lo, double delta = 0.0, const Resolution& res = {},
                                     const CapSchedule& schedule = CapSchedule::standard(),
                                     const NewtonOptions& opt = {1e-6})
{
    if (!(a > 0.0))
        throw InvalidInput("build_trident needs a > 0");
    if (!(delta >= 0.0))
        throw InvalidInput("delta must be nonnegative");
    const double b = b_lo - delta;
    if (!(b > 0.0) || b >= pi)
        throw InvalidInput("b_lo - delta must lie in (0, pi)");
    const Grid g = res.grid_for(a, b);
    SolveReport rep = cap_continuation(g, PatternKind::trident, schedule, opt, Scheme::area, true);

    TridentSolution t(std::move(rep.solution));
    t.a = a;
    t.b_used = b;
    t.delta = delta;
    t.cap = schedule.last();
    t.tol = opt.tol;
    t.converged = rep.converged();
    t.iterations = rep.iterations;
    t.residual = rep.residual;
    t.trace = std::move(rep.trace);
    t.shift = column_median(t.u, 3 * g.nx() / 4);
    for (double& v : t.u.values())
        v -= t.shift;
    t.report = verify_properties(t);
    return t;
}

/// From a width estimate: uses its certified lower end.
inline TridentSolution build_trident(const WidthEstimate& w, double delta = 0.0, const Resolution& res = {},
                                     const CapSchedule& schedule = CapSchedule::standard(),
                                     const NewtonOptions& opt = {1e-6})
{
    if (!w.ok)
        throw InvalidInput("width bracket is not usable");
    const Probe* lo = w.probe_at(w.b_lo);
    if (lo && lo->verdict != ProbeClass::below)
        throw InvalidInput("bracket lower end did not classify below the wall");
    return build_trident(w.a, w.b_lo, delta, res, schedule, opt);
}

} // namespace tridentlab
