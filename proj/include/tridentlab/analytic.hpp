#pragma once

/**
 * @file analytic.hpp
 * @brief Closed-form comparison objects: untilted grim reapers, the
 *        x-independent translators fitted to two boundary values, and the
 *        discrete strict-supersolution test for 1D profiles.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "grid.hpp"

namespace tridentlab {

/// z = log(cos(y - y0)) + c, defined for |y - y0| < pi/2.
struct GrimReaper {
    double y0 = 0.0;
    double c = 0.0;

    double lower() const { return y0 - 0.5 * pi; }
    double upper() const { return y0 + 0.5 * pi; }
    bool contains(double y) const { return y > lower() && y < upper(); }

    double operator()(double y) const
    {
        if (!contains(y))
            throw InvalidInput("grim reaper evaluated outside its domain");
        return std::log(std::cos(y - y0)) + c;
    }

    double dy(double y) const { return -std::tan(y - y0); }
    double dyy(double y) const
    {
        const double s = 1.0 / std::cos(y - y0);
        return -s * s;
    }

    /// The member of the family equal to log sin y.
    static GrimReaper log_sine() { return {0.5 * pi, 0.0}; }
};

inline double grim_reaper_eval(const GrimReaper& g, double y) { return g(y); }

/**
 * The x-independent translator on [0, b] with w(0) = bottom, w(b) = top.
 * Such profiles are exactly the grim reaper arcs; the offset y0 solves
 * log cos y0 - log cos(b - y0) = bottom - top on (b - pi/2, pi/2), where the
 * left side decreases strictly from +inf to -inf, so bisection on the
 * bracket is exact up to round-off.  No arc fits when b >= pi.
 */
inline std::optional<GrimReaper> one_d_profile(double b, double bottom, double top)
{
    if (!(b > 0.0) || !std::isfinite(bottom) || !std::isfinite(top))
        throw InvalidInput("one_d_profile needs b > 0 and finite boundary values");
    if (b >= pi)
        return std::nullopt;
    const double target = bottom - top;
    auto f = [&](double y0) { return std::log(std::cos(y0)) - std::log(std::cos(b - y0)) - target; };
    double lo = b - 0.5 * pi;
    double hi = 0.5 * pi;
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        const double v = f(mid);
        if (!std::isfinite(v))
            return std::nullopt;
        (v > 0.0 ? lo : hi) = mid;
    }
    GrimReaper g{0.5 * (lo + hi), 0.0};
    g.c = bottom - std::log(std::cos(g.y0));
    return g;
}

struct SupersolutionReport {
    std::vector<double> margin; ///< w'' + (w')^2 + 1 at interior samples
    double max_margin = 0.0;
    double tolerance = 0.0;     ///< strict iff max_margin < -tolerance
    double width = 0.0;         ///< d - c of the sampled interval
    bool strict = false;
};

/**
 * Discrete w'' + (w')^2 + 1 with centered differences.  The default
 * tolerance is 10 h^2 max|w''|, which separates exactly critical profiles
 * (geodesics, margin O(h^2)) from strict supersolutions.
 */
inline SupersolutionReport supersolution_check(std::span<const double> y, std::span<const double> w,
                                               std::optional<double> tolerance = std::nullopt)
{
    if (y.size() != w.size())
        throw InvalidInput("sample coordinate and value counts differ");
    if (y.size() < 5)
        throw InvalidInput("supersolution_check needs at least 5 samples");
    const double h = (y.back() - y.front()) / static_cast<double>(y.size() - 1);
    if (!(h > 0.0))
        throw InvalidInput("samples must be increasing");
    for (std::size_t k = 1; k < y.size(); ++k)
        if (std::abs((y[k] - y[k - 1]) - h) > 1e-9 * h)
            throw InvalidInput("samples must be uniformly spaced");

    SupersolutionReport rep;
    rep.width = y.back() - y.front();
    double max_w2 = 0.0;
    rep.max_margin = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k + 1 < w.size(); ++k) {
        const double w1 = (w[k + 1] - w[k - 1]) / (2.0 * h);
        const double w2 = ((w[k + 1] + w[k - 1]) - 2.0 * w[k]) / (h * h);
        const double m = w2 + w1 * w1 + 1.0;
        rep.margin.push_back(m);
        rep.max_margin = std::max(rep.max_margin, m);
        max_w2 = std::max(max_w2, std::abs(w2));
    }
    rep.tolerance = tolerance ? *tolerance : 10.0 * h * h * max_w2;
    rep.strict = rep.max_margin < -rep.tolerance;
    return rep;
}

} // namespace tridentlab
