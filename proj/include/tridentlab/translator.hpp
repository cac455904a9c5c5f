#pragma once

/**
 * @file translator.hpp
 * @brief Pointwise and integral quantities attached to a graph z = u(x,y)
 *        over the periodic strip: translator residual, its exact discrete
 *        linearization, the flux field, the flux balance, the weighted
 *        (translator-metric) area and the Gauss-curvature sign field.
 *
 * Residual convention:
 *   R(u) = (1+u_y^2) u_xx + (1+u_x^2) u_yy - 2 u_x u_y u_xy + (1 + |Du|^2),
 * so translators are exactly the zeros of R.
 */

#include <Eigen/SparseCore>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "detail/exp_simplex.hpp"
#include "grid.hpp"

namespace tridentlab {

/// Residual values at interior nodes; boundary rows hold zero.
struct ResidualField {
    ScalarField values;

    double max_abs() const { return values.interior_max_abs(); }
};

inline double residual_at(const LocalDerivatives& d)
{
    const double ux2 = d.ux * d.ux;
    const double uy2 = d.uy * d.uy;
    return (1.0 + uy2) * d.uxx + (1.0 + ux2) * d.uyy - 2.0 * d.ux * d.uy * d.uxy + (1.0 + ux2 + uy2);
}

inline ResidualField residual(const ScalarField& u)
{
    const Grid& g = u.grid();
    ResidualField r{ScalarField(g)};
    for (int j = 1; j < g.ny() - 1; ++j)
        for (int i = 0; i < g.nx(); ++i)
            r.values(i, j) = residual_at(interior_derivatives(u, i, j));
    return r;
}

/// Interior residual as a flat vector ordered like the interior unknowns.
inline Eigen::VectorXd residual_vector(const ScalarField& u)
{
    const Grid& g = u.grid();
    Eigen::VectorXd r(static_cast<Eigen::Index>(g.interior_count()));
    Eigen::Index k = 0;
    for (int j = 1; j < g.ny() - 1; ++j)
        for (int i = 0; i < g.nx(); ++i)
            r[k++] = residual_at(interior_derivatives(u, i, j));
    return r;
}

using SparseMatrix = Eigen::SparseMatrix<double>;

/**
 * Exact derivative of the discrete residual with respect to the node values.
 * Rows are interior nodes (ordered as residual_vector), columns are all grid
 * nodes (Grid::index).  Every row couples the 3x3 block around its node.
 */
inline SparseMatrix linearize(const ScalarField& u)
{
    const Grid& g = u.grid();
    const double hx = g.hx();
    const double hy = g.hy();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(g.interior_count() * 9);

    Eigen::Index row = 0;
    for (int j = 1; j < g.ny() - 1; ++j) {
        for (int i = 0; i < g.nx(); ++i, ++row) {
            const LocalDerivatives d = interior_derivatives(u, i, j);
            // R = A uxx + B uyy + C uxy + S; partial derivatives w.r.t. the stencil quantities
            const double A = 1.0 + d.uy * d.uy;
            const double B = 1.0 + d.ux * d.ux;
            const double C = -2.0 * d.ux * d.uy;
            const double dR_dux = 2.0 * d.ux * d.uyy - 2.0 * d.uy * d.uxy + 2.0 * d.ux;
            const double dR_duy = 2.0 * d.uy * d.uxx - 2.0 * d.ux * d.uxy + 2.0 * d.uy;

            std::array<double, 9> w{}; // (di,dj) in {-1,0,1}^2, index (dj+1)*3 + (di+1)
            auto at = [&](int di, int dj) -> double& { return w[(dj + 1) * 3 + (di + 1)]; };
            at(1, 0) += A / (hx * hx) + dR_dux / (2.0 * hx);
            at(-1, 0) += A / (hx * hx) - dR_dux / (2.0 * hx);
            at(0, 0) += -2.0 * A / (hx * hx) - 2.0 * B / (hy * hy);
            at(0, 1) += B / (hy * hy) + dR_duy / (2.0 * hy);
            at(0, -1) += B / (hy * hy) - dR_duy / (2.0 * hy);
            const double cxy = C / (4.0 * hx * hy);
            at(1, 1) += cxy;
            at(-1, -1) += cxy;
            at(1, -1) -= cxy;
            at(-1, 1) -= cxy;
            for (int dj = -1; dj <= 1; ++dj)
                for (int di = -1; di <= 1; ++di)
                    if (at(di, dj) != 0.0)
                        trip.emplace_back(row, static_cast<Eigen::Index>(g.index(i + di, j + dj)), at(di, dj));
        }
    }
    SparseMatrix L(static_cast<Eigen::Index>(g.interior_count()), static_cast<Eigen::Index>(g.node_count()));
    L.setFromTriplets(trip.begin(), trip.end());
    return L;
}

/// Flattened node values of a field, in Grid::index order.
inline Eigen::VectorXd as_vector(const ScalarField& f)
{
    auto v = f.values();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// ---------------------------------------------------------------------------
// Flux field xi = Du / sqrt(1+|Du|^2)

struct FluxField {
    ScalarField xi_x;
    ScalarField xi_y;

    double max_norm() const
    {
        double m = 0.0;
        auto xs = xi_x.values();
        auto ys = xi_y.values();
        for (std::size_t k = 0; k < xs.size(); ++k)
            m = std::max(m, std::hypot(xs[k], ys[k]));
        return m;
    }
};

inline FluxField flux_field(const ScalarField& u)
{
    const ScalarField ux = diff(u, Derivative::x);
    const ScalarField uy = diff(u, Derivative::y);
    FluxField f{ScalarField(u.grid()), ScalarField(u.grid())};
    auto px = ux.values();
    auto py = uy.values();
    auto fx = f.xi_x.values();
    auto fy = f.xi_y.values();
    for (std::size_t k = 0; k < px.size(); ++k) {
        // 1/sqrt(1+p^2+q^2) computed via hypot to stay finite for huge gradients
        const double s = std::hypot(1.0, std::hypot(px[k], py[k]));
        fx[k] = px[k] / s;
        fy[k] = py[k] / s;
    }
    return f;
}

/// Node-aligned rectangle: columns i0..i1 (cyclic, i1 > i0, span <= nx) and rows j0..j1.
/// full_period means the x extent is the whole period (side fluxes cancel).
struct GridRect {
    int i0 = 0, i1 = 0;
    int j0 = 0, j1 = 0;
    bool full_period = false;

    static GridRect band(int j0, int j1) { return {0, 0, j0, j1, true}; }
};

struct FluxBalance {
    double boundary_flux = 0.0;
    double source = 0.0;
    double defect = 0.0;
    double h = 0.0; ///< max(hx, hy) of the quadrature
};

/**
 * Discrete form of  \oint xi.eta ds + \int (1+|Du|^2)^{-1/2} dA, which vanishes
 * for exact translators.  Boundary flux uses the trapezoid rule on node values
 * of xi (centered gradients); the source uses the cell midpoint rule with the
 * cell-centered gradient.
 */
inline FluxBalance flux_balance(const ScalarField& u, const GridRect& rect)
{
    const Grid& g = u.grid();
    const double hx = g.hx();
    const double hy = g.hy();
    if (rect.j0 < 1 || rect.j1 > g.ny() - 2 || rect.j1 <= rect.j0)
        throw InvalidInput("flux rectangle rows must be interior and increasing");
    if (!rect.full_period && (rect.i1 <= rect.i0 || rect.i1 - rect.i0 >= g.nx()))
        throw InvalidInput("flux rectangle columns must be increasing and shorter than a period");

    const FluxField xi = flux_field(u);
    const int ncols = rect.full_period ? g.nx() : rect.i1 - rect.i0;

    double flux = 0.0;
    // top (outward +y) and bottom (outward -y)
    auto row_integral = [&](int j) {
        double s = 0.0;
        if (rect.full_period) {
            for (int i = 0; i < g.nx(); ++i)
                s += xi.xi_y(i, j);
            return s * hx;
        }
        for (int i = rect.i0; i <= rect.i1; ++i) {
            const double wgt = (i == rect.i0 || i == rect.i1) ? 0.5 : 1.0;
            s += wgt * xi.xi_y(i, j);
        }
        return s * hx;
    };
    flux += row_integral(rect.j1) - row_integral(rect.j0);
    if (!rect.full_period) {
        auto col_integral = [&](int i) {
            double s = 0.0;
            for (int j = rect.j0; j <= rect.j1; ++j) {
                const double wgt = (j == rect.j0 || j == rect.j1) ? 0.5 : 1.0;
                s += wgt * xi.xi_x(i, j);
            }
            return s * hy;
        };
        flux += col_integral(rect.i1) - col_integral(rect.i0);
    }

    double source = 0.0;
    for (int j = rect.j0; j < rect.j1; ++j) {
        for (int c = 0; c < ncols; ++c) {
            const int i = rect.full_period ? c : rect.i0 + c;
            const double p = ((u(i + 1, j) + u(i + 1, j + 1)) - (u(i, j) + u(i, j + 1))) / (2.0 * hx);
            const double q = ((u(i, j + 1) + u(i + 1, j + 1)) - (u(i, j) + u(i + 1, j))) / (2.0 * hy);
            source += 1.0 / std::hypot(1.0, std::hypot(p, q));
        }
    }
    source *= hx * hy;
    return {flux, source, flux + source, std::max(hx, hy)};
}

// ---------------------------------------------------------------------------
// Weighted area in the translator metric e^{-z} delta

enum class Quadrature {
    midpoint,     ///< e^{-u} sqrt(1+|Du|^2) at cell centers
    exact_linear  ///< exact integral over the piecewise-linear interpolant
};

inline const char* to_string(Quadrature q)
{
    return q == Quadrature::midpoint ? "midpoint" : "exact_linear";
}

struct AreaEstimate {
    double interior = 0.0;
    double tail = 0.0;
    double total = 0.0;
    double cap = 0.0;
    int nx = 0;
    int ny = 0;
    Quadrature rule = Quadrature::exact_linear;
};


namespace detail {

/// \int_0^1 e^{t0 + s (t1 - t0)} ds
inline double exp_mean(double t0, double t1)
{
    const double hi = std::max(t0, t1);
    const double d = std::min(t0, t1) - hi;
    return d == 0.0 ? std::exp(hi) : std::exp(hi) * std::expm1(d) / d;
}

/// \int_0^1 |1 - e^{-g(s)}| ds for g linear from g0 to g1
inline double strip_to_zero(double g0, double g1)
{
    // a zero endpoint counts as either side; splitting there would not terminate
    if ((g0 >= 0.0 && g1 >= 0.0) || (g0 <= 0.0 && g1 <= 0.0)) {
        const double m = exp_mean(-g0, -g1);
        return g0 >= 0.0 && g1 >= 0.0 ? 1.0 - m : m - 1.0;
    }
    const double s = g0 / (g0 - g1); // zero crossing
    return s * strip_to_zero(g0, 0.0) + (1.0 - s) * strip_to_zero(0.0, g1);
}

} // namespace detail

/**
 * Translator-metric area of the graph of u, plus the tail that closes the
 * graph up to the spanning curve of the strip (N at height 0, P at +inf).
 * The tail is the area of the vertical strips between the boundary trace of
 * u and that curve: \int_P e^{-u} dx (the wall above the cap, a e^{-cap} for
 * capped data, plus the parts of the corner ramps) and \int_N |1 - e^{-u}| dx,
 * with u linear on each boundary cell.  Graph plus tail is then a surface
 * spanning the curve, so its area bounds alpha(a,b) from above.  Pass
 * cap = +inf for the graph area alone.
 *
 * The exact_linear rule integrates e^{-z} exactly over the polyhedral
 * surface that splits each cell into four triangles through its center.
 */
inline AreaEstimate weighted_area(const ScalarField& u, double cap, Quadrature rule = Quadrature::exact_linear)
{
    const Grid& g = u.grid();
    const double hx = g.hx();
    const double hy = g.hy();
    double interior = 0.0;
    for (int j = 0; j < g.ny() - 1; ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            const double z00 = u(i, j), z10 = u(i + 1, j), z01 = u(i, j + 1), z11 = u(i + 1, j + 1);
            if (rule == Quadrature::midpoint) {
                const double p = ((z10 + z11) - (z00 + z01)) / (2.0 * hx);
                const double q = ((z01 + z11) - (z00 + z10)) / (2.0 * hy);
                const double zc = 0.25 * (z00 + z10 + z01 + z11);
                interior += std::exp(-zc) * std::hypot(1.0, std::hypot(p, q)) * hx * hy;
                continue;
            }
            interior += detail::cell_weighted_area(z00, z10, z01, z11, hx, hy);
        }
    }
    AreaEstimate est;
    est.interior = interior;
    est.tail = 0.0;
    if (std::isfinite(cap)) {
        for (int i = 0; i < g.nx(); ++i) {
            const double b0 = u(i, 0), b1 = u(i + 1, 0);
            const bool on_p = i >= g.nx() / 2; // cell [x_i, x_{i+1}] inside [0, a]
            est.tail += hx * (on_p ? detail::exp_mean(-b0, -b1) : detail::strip_to_zero(b0, b1));
            est.tail += hx * detail::strip_to_zero(u(i, g.ny() - 1), u(i + 1, g.ny() - 1));
        }
    }
    est.total = est.interior + est.tail;
    est.cap = cap;
    est.nx = g.nx();
    est.ny = g.ny();
    est.rule = rule;
    return est;
}

/// u_xx u_yy - u_xy^2 at interior nodes (sign of the Gauss curvature); zero on boundary rows.
inline ScalarField gauss_sign_field(const ScalarField& u)
{
    const Grid& g = u.grid();
    ScalarField det(g);
    for (int j = 1; j < g.ny() - 1; ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const LocalDerivatives d = interior_derivatives(u, i, j);
            det(i, j) = d.uxx * d.uyy - d.uxy * d.uxy;
        }
    return det;
}

} // namespace tridentlab
