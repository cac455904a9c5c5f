#pragma once

/**
 * @file solver.hpp
 * @brief Damped Newton for the discrete translator equation with finite
 *        boundary data, and monotone cap continuation standing in for the
 *        +-infinity boundary values of the trident problem.
 */

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "area_energy.hpp"
#include "grid.hpp"
#include "translator.hpp"

namespace tridentlab {

/// Dirichlet data on the two boundary rows, one value per column.
struct BoundaryData {
    std::vector<double> bottom;
    std::vector<double> top;
    std::string corner_rule = "explicit";

    static BoundaryData constant(const Grid& g, double bottom, double top)
    {
        return {std::vector<double>(g.nx(), bottom), std::vector<double>(g.nx(), top), "explicit"};
    }

    template <class F, class G>
    static BoundaryData sampled(const Grid& g, F&& bottom, G&& top)
    {
        BoundaryData bd{std::vector<double>(g.nx()), std::vector<double>(g.nx()), "explicit"};
        for (int i = 0; i < g.nx(); ++i) {
            bd.bottom[i] = bottom(g.x(i));
            bd.top[i] = top(g.x(i));
        }
        return bd;
    }

    void validate(const Grid& g) const
    {
        if (static_cast<int>(bottom.size()) != g.nx() || static_cast<int>(top.size()) != g.nx())
            throw InvalidInput("boundary data size does not match nx");
        for (double v : bottom)
            if (!std::isfinite(v))
                throw InvalidInput("boundary data must be finite");
        for (double v : top)
            if (!std::isfinite(v))
                throw InvalidInput("boundary data must be finite");
    }
};

/// Which capped version of the trident boundary values to impose.
enum class PatternKind {
    trident, ///< +cap on P, -cap on the bottom part of N and on the top edge
    alpha    ///< +cap on P, 0 on N (the capped spanning problem for Gamma_{a,b})
};

inline const char* to_string(PatternKind k) { return k == PatternKind::trident ? "trident" : "alpha"; }

/**
 * Capped boundary data.  Corner nodes take the average of their two
 * neighbours on the bottom row, so the jump is a linear ramp over the two
 * cells that meet at each corner.
 */
inline BoundaryData trident_boundary(const Grid& g, PatternKind kind, double cap)
{
    const double low = kind == PatternKind::trident ? -cap : 0.0;
    BoundaryData bd{std::vector<double>(g.nx()), std::vector<double>(g.nx(), low), "corner-average"};
    for (int i = 0; i < g.nx(); ++i) {
        switch (g.kind(i, 0)) {
        case NodeKind::bottom_p: bd.bottom[i] = cap; break;
        case NodeKind::bottom_n: bd.bottom[i] = low; break;
        default: bd.bottom[i] = 0.5 * (cap + low); break;
        }
    }
    return bd;
}

inline void apply_boundary(ScalarField& u, const BoundaryData& bd)
{
    const Grid& g = u.grid();
    for (int i = 0; i < g.nx(); ++i) {
        u(i, 0) = bd.bottom[i];
        u(i, g.ny() - 1) = bd.top[i];
    }
}

struct NewtonOptions {
    double tol = 1e-8;       ///< on max interior |R| (residual scheme) or |scaled gradient| (area scheme)
    int max_iterations = 60;
    double armijo_c = 1e-4;
    double damping = 0.5;
    double min_step = 1.0 / 1048576.0; // 2^-20
};

enum class SolveStatus { converged, no_convergence, linear_solve_failure };

inline const char* to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::no_convergence: return "no_convergence";
    case SolveStatus::linear_solve_failure: return "linear_solve_failure";
    }
    return "?";
}

/// One entry per cap stage of a continuation.
struct ContinuationStage {
    double cap = 0.0;
    int iterations = 0;
    double residual = 0.0;
    double indicator = 0.0;      ///< u(-a/2, b/2)
    double min_increment = 0.0;  ///< min over interior of u_k - u_{k-1} (0 for the first stage)
    double min_increment_away = 0.0; ///< same, excluding the nodes near_corner()
    bool converged = false;
};

struct SolveReport {
    explicit SolveReport(ScalarField u) : solution(std::move(u)) {}

    ScalarField solution;
    SolveStatus status = SolveStatus::no_convergence;
    int iterations = 0;
    double residual = 0.0; ///< final max interior |R|
    double tol = 0.0;
    std::vector<double> residual_history;
    std::vector<double> damping_history;
    std::vector<ContinuationStage> trace;
    int failed_stage = -1; ///< continuation stage index that failed, -1 if none
    bool monotone = true;  ///< continuation iterates nondecreasing where the data is

    bool converged() const { return status == SolveStatus::converged; }
};

/**
 * Damped Newton on the interior unknowns.  Each step solves L_u delta = -R
 * by sparse LU and backtracks (factor `damping`) until the Armijo condition
 * on ||R||_2^2 holds.  Starts from `init` (boundary rows overwritten by bd)
 * or from u = 0.
 */
inline SolveReport solve_bvp(const Grid& grid, const BoundaryData& bd, const std::optional<ScalarField>& init,
                             const NewtonOptions& opt = {})
{
    bd.validate(grid);
    if (!(opt.tol > 0.0))
        throw InvalidInput("tolerance must be positive");
    ScalarField u = init ? *init : ScalarField(grid);
    if (!u.grid().same_shape(grid))
        throw InvalidInput("initial field lives on a different grid");
    apply_boundary(u, bd);

    SolveReport rep{u};
    rep.tol = opt.tol;
    const auto n_int = static_cast<Eigen::Index>(grid.interior_count());
    const auto offset = static_cast<Eigen::Index>(grid.nx());

    Eigen::VectorXd r = residual_vector(u);
    double merit = r.squaredNorm();
    rep.residual = r.lpNorm<Eigen::Infinity>();
    rep.residual_history.push_back(rep.residual);

    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    bool pattern_analyzed = false;
    for (int it = 0; it < opt.max_iterations; ++it) {
        if (rep.residual <= opt.tol) {
            rep.status = SolveStatus::converged;
            break;
        }
        SparseMatrix J = linearize(u).middleCols(offset, n_int);
        J.makeCompressed();
        if (!pattern_analyzed) {
            lu.analyzePattern(J);
            pattern_analyzed = true;
        }
        lu.factorize(J);
        if (lu.info() != Eigen::Success) {
            rep.status = SolveStatus::linear_solve_failure;
            break;
        }
        const Eigen::VectorXd delta = lu.solve(-r);
        if (lu.info() != Eigen::Success || !delta.allFinite()) {
            rep.status = SolveStatus::linear_solve_failure;
            break;
        }

        double t = 1.0;
        bool accepted = false;
        ScalarField trial = u;
        Eigen::VectorXd r_trial;
        while (t >= opt.min_step) {
            auto tv = trial.values();
            auto uv = u.values();
            for (Eigen::Index k = 0; k < n_int; ++k)
                tv[offset + k] = uv[offset + k] + t * delta[k];
            r_trial = residual_vector(trial);
            const double m = r_trial.squaredNorm();
            if (std::isfinite(m) && m <= (1.0 - 2.0 * opt.armijo_c * t) * merit) {
                accepted = true;
                merit = m;
                break;
            }
            t *= opt.damping;
        }
        rep.damping_history.push_back(accepted ? t : 0.0);
        if (!accepted) {
            rep.status = SolveStatus::no_convergence;
            break;
        }
        u = std::move(trial);
        r = std::move(r_trial);
        rep.iterations = it + 1;
        rep.residual = r.lpNorm<Eigen::Infinity>();
        rep.residual_history.push_back(rep.residual);
    }
    if (rep.status != SolveStatus::linear_solve_failure && rep.residual <= opt.tol)
        rep.status = SolveStatus::converged;
    rep.solution = std::move(u);
    return rep;
}

/**
 * Newton on the discrete weighted area in the variable v = e^{-u}, where it
 * is convex.  The Hessian is symmetrically scaled by its diagonal and
 * factored by sparse LDL^T (a diagonal shift is added if round-off makes it
 * indefinite).  Steps backtrack until v stays positive and the Armijo
 * condition on the energy holds; once energy differences reach round-off a
 * step is accepted when it reduces the residual.  The residual this scheme
 * reports is max |dE/dv_k| / (hx hy), which approximates max |R/W^3|.
 */
inline SolveReport minimize_area(const Grid& grid, const BoundaryData& bd, const std::optional<ScalarField>& init,
                                 const NewtonOptions& opt = {})
{
    bd.validate(grid);
    if (!(opt.tol > 0.0))
        throw InvalidInput("tolerance must be positive");
    ScalarField u = init ? *init : ScalarField(grid);
    if (!u.grid().same_shape(grid))
        throw InvalidInput("initial field lives on a different grid");
    apply_boundary(u, bd);

    SolveReport rep{u};
    rep.tol = opt.tol;
    const auto n = static_cast<Eigen::Index>(grid.interior_count());
    const auto offset = static_cast<std::size_t>(grid.nx());

    std::vector<double> v = to_log_variable(u);
    AreaSystem sys = assemble_area_system(grid, v);
    Eigen::VectorXd G = area_residual(grid, sys.gradient);
    rep.residual = G.lpNorm<Eigen::Infinity>();
    rep.residual_history.push_back(rep.residual);

    Eigen::SimplicialLDLT<SparseMatrix> ldlt;
    bool pattern_analyzed = false;
    for (int it = 0; it < opt.max_iterations; ++it) {
        if (rep.residual <= opt.tol)
            break;
        const Eigen::VectorXd s = sys.hessian.diagonal().cwiseAbs().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
        SparseMatrix S = s.asDiagonal() * sys.hessian * s.asDiagonal();
        S.makeCompressed();
        const Eigen::VectorXd rhs = -(s.array() * sys.gradient.array()).matrix();

        SparseMatrix I(n, n);
        I.setIdentity();
        double mu = 0.0;
        Eigen::VectorXd delta;
        bool have_step = false;
        for (int attempt = 0; attempt < 16; ++attempt) {
            const SparseMatrix A = mu > 0.0 ? SparseMatrix(S + mu * I) : S;
            if (!pattern_analyzed) {
                ldlt.analyzePattern(A);
                pattern_analyzed = true;
            }
            ldlt.factorize(A);
            if (ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 0.0) {
                const Eigen::VectorXd y = ldlt.solve(rhs);
                delta = (s.array() * y.array()).matrix();
                if (delta.allFinite() && sys.gradient.dot(delta) < 0.0) {
                    have_step = true;
                    break;
                }
            }
            mu = mu == 0.0 ? 1e-12 : 10.0 * mu;
        }
        if (!have_step) {
            rep.status = SolveStatus::linear_solve_failure;
            break;
        }

        const double slope = sys.gradient.dot(delta);
        double t = 1.0;
        bool accepted = false;
        std::vector<double> trial = v;
        AreaSystem trial_sys;
        Eigen::VectorXd trial_G;
        while (t >= opt.min_step) {
            bool positive = true;
            for (Eigen::Index k = 0; k < n; ++k) {
                trial[offset + k] = v[offset + k] + t * delta[k];
                positive = positive && trial[offset + k] > 0.0;
            }
            if (positive) {
                const double e = log_area_energy(grid, trial);
                const bool armijo = std::isfinite(e) && e <= sys.energy + opt.armijo_c * t * slope;
                const bool flat =
                    !armijo && std::isfinite(e) && std::abs(e - sys.energy) <= 1e-13 * std::abs(sys.energy);
                if (armijo || flat) {
                    trial_sys = assemble_area_system(grid, trial);
                    trial_G = area_residual(grid, trial_sys.gradient);
                    if (armijo || trial_G.lpNorm<Eigen::Infinity>() < rep.residual) {
                        accepted = true;
                        break;
                    }
                }
            }
            t *= opt.damping;
        }
        rep.damping_history.push_back(accepted ? t : 0.0);
        if (!accepted)
            break;
        v = std::move(trial);
        sys = std::move(trial_sys);
        G = std::move(trial_G);
        rep.iterations = it + 1;
        rep.residual = G.lpNorm<Eigen::Infinity>();
        rep.residual_history.push_back(rep.residual);
    }
    if (rep.status != SolveStatus::linear_solve_failure)
        rep.status = rep.residual <= opt.tol ? SolveStatus::converged : SolveStatus::no_convergence;
    auto uv = u.values();
    for (Eigen::Index k = 0; k < n; ++k)
        uv[offset + k] = -std::log(v[offset + k]);
    rep.solution = std::move(u);
    return rep;
}

/// Discretization used for capped solves.
enum class Scheme {
    residual, ///< pointwise residual R, solve_bvp
    area      ///< weighted-area energy, minimize_area
};

inline const char* to_string(Scheme s) { return s == Scheme::residual ? "residual" : "area"; }

inline SolveReport solve_with(Scheme scheme, const Grid& grid, const BoundaryData& bd,
                              const std::optional<ScalarField>& init, const NewtonOptions& opt)
{
    return scheme == Scheme::residual ? solve_bvp(grid, bd, init, opt) : minimize_area(grid, bd, init, opt);
}

/// Strictly increasing positive caps.
class CapSchedule {
public:
    CapSchedule() = default;
    explicit CapSchedule(std::vector<double> caps) : caps_(std::move(caps))
    {
        if (caps_.empty())
            throw InvalidInput("cap schedule must be nonempty");
        for (std::size_t k = 0; k < caps_.size(); ++k) {
            if (!(caps_[k] > 0.0) || !std::isfinite(caps_[k]))
                throw InvalidInput("caps must be positive and finite");
            if (k > 0 && !(caps_[k] > caps_[k - 1]))
                throw InvalidInput("caps must be strictly increasing");
        }
    }

    static CapSchedule standard() { return CapSchedule({4, 8, 12, 16}); }

    const std::vector<double>& caps() const { return caps_; }
    double last() const { return caps_.back(); }
    std::size_t size() const { return caps_.size(); }

    /// Same schedule continued by `extra` more steps of the last increment.
    CapSchedule extended(int extra) const
    {
        std::vector<double> c = caps_;
        const double step = c.size() > 1 ? c.back() - c[c.size() - 2] : c.back();
        for (int k = 0; k < extra; ++k)
            c.push_back(c.back() + step);
        return CapSchedule(std::move(c));
    }

private:
    std::vector<double> caps_;
};

/**
 * Nodes within `corner_band` cells of a corner in both directions.  The data
 * jumps there and the discrete comparison principle only holds up to a
 * discretization error, so the monotonicity audit leaves them out.
 */
inline constexpr int corner_band = 3;

inline bool near_corner(const Grid& g, int i, int j)
{
    if (j > corner_band)
        return false;
    const int half = g.nx() / 2;
    const int d0 = std::min(i, g.nx() - i);
    const int d1 = std::abs(i - half);
    return std::min(d0, d1) <= corner_band;
}

/// Node used for the degeneration indicator u(-a/2, b/2).
inline double indicator_value(const ScalarField& u)
{
    const Grid& g = u.grid();
    return u(g.nx() / 4, (g.ny() - 1) / 2);
}

/**
 * Solves the capped trident problem for cap_1 from u = 0, then for each later
 * cap warm-starts from the previous solution.  When a stage fails to converge
 * directly, the cap increment is bisected (up to `max_substeps` halvings)
 * before the stage is declared failed.  A failed stage ends the run unless
 * `stop_on_failure` is false, in which case later caps start from its best
 * iterate (used for the weighted area, which keeps decreasing even when no
 * discrete minimizer exists); failed_stage then records the first failure.
 */
inline SolveReport cap_continuation(const Grid& grid, PatternKind pattern, const CapSchedule& schedule,
                                    const NewtonOptions& opt = {}, Scheme scheme = Scheme::area,
                                    bool stop_on_failure = true, int max_substeps = 6)
{
    if (schedule.size() == 0)
        throw InvalidInput("cap schedule must be nonempty");
    SolveReport out{ScalarField(grid)};
    out.tol = opt.tol;
    std::optional<ScalarField> current;
    double current_cap = 0.0;

    for (std::size_t k = 0; k < schedule.size(); ++k) {
        const double target = schedule.caps()[k];
        SolveReport stage{ScalarField(grid)};
        int iterations = 0;
        // full increment first; halve the step on failure
        const double min_step = (target - current_cap) / std::pow(2.0, max_substeps);
        double step = target - current_cap;
        double reached = current_cap;
        std::optional<ScalarField> iterate = current;
        while (reached < target) {
            const double next = std::min(target, reached + step);
            SolveReport r = solve_with(scheme, grid, trident_boundary(grid, pattern, next), iterate, opt);
            iterations += r.iterations;
            const bool ok = r.converged();
            stage = std::move(r);
            if (ok) {
                reached = next;
                iterate = stage.solution;
                continue;
            }
            // without stopping, keep the iterate at the target cap itself
            if (!stop_on_failure && next == target)
                break;
            step *= 0.5;
            if (step < min_step * (1.0 - 1e-12))
                break;
        }

        ContinuationStage st;
        st.cap = target;
        st.iterations = iterations;
        st.residual = stage.residual;
        st.converged = stage.converged();
        st.indicator = indicator_value(stage.solution);
        if (current) {
            double m = std::numeric_limits<double>::infinity();
            double m_away = m;
            for (int j = 1; j < grid.ny() - 1; ++j)
                for (int i = 0; i < grid.nx(); ++i) {
                    const double d = stage.solution(i, j) - (*current)(i, j);
                    m = std::min(m, d);
                    if (!near_corner(grid, i, j))
                        m_away = std::min(m_away, d);
                }
            st.min_increment = m;
            st.min_increment_away = m_away;
            // only the alpha pattern has data nondecreasing in the cap at every node
            if (pattern == PatternKind::alpha && m_away < -10.0 * opt.tol)
                out.monotone = false;
        }
        out.trace.push_back(st);
        out.iterations += iterations;
        out.residual_history.insert(out.residual_history.end(), stage.residual_history.begin(),
                                    stage.residual_history.end());
        out.damping_history.insert(out.damping_history.end(), stage.damping_history.begin(),
                                   stage.damping_history.end());
        out.residual = stage.residual;
        if (out.failed_stage < 0)
            out.status = stage.status;
        out.solution = stage.solution;
        if (!stage.converged()) {
            if (out.failed_stage < 0)
                out.failed_stage = static_cast<int>(k);
            if (stop_on_failure)
                return out;
        }
        current = stage.solution;
        current_cap = target;
    }
    return out;
}

} // namespace tridentlab
