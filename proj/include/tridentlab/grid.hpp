#pragma once

/**
 * @file grid.hpp
 * @brief Periodic strip K_{a,b} = [-a,a) x [0,b] with the left/right edges
 *        identified, node-centered finite differences on it, and field I/O.
 *
 * Node (i,j) sits at (-a + i*hx, j*hy) with hx = 2a/nx and hy = b/(ny-1).
 * The x index is cyclic; the two boundary rows j = 0 and j = ny-1 are
 * explicit nodes.  Node (nx/2, 0) is the corner (0,0) and node (0, 0) is the
 * corner (-a,0) == (a,0).
 */

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tridentlab {

/// Thrown for malformed inputs (grids, fields, rectangles, files).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr double pi = 3.14159265358979323846;

/// Quotient domain: half period a, strip width b.
struct StripSpec {
    double a = 1.0;
    double b = 1.0;
};

/// Role a node plays with respect to the boundary partition P / N.
enum class NodeKind : std::uint8_t {
    interior,
    bottom_p,  ///< (x,0), 0 < x < a
    bottom_n,  ///< (x,0), -a < x < 0
    top,       ///< (x,b), part of N
    corner     ///< (0,0) and (a,0)
};

enum class Derivative { x, y, xx, yy, xy };

class Grid {
public:
    Grid(StripSpec spec, int nx, int ny) : spec_(spec), nx_(nx), ny_(ny)
    {
        if (!(spec.a > 0.0) || !std::isfinite(spec.a))
            throw InvalidInput("half period a must be positive");
        if (!(spec.b > 0.0) || !std::isfinite(spec.b))
            throw InvalidInput("strip width b must be positive");
        if (nx < 8)
            throw InvalidInput("nx must be at least 8");
        if (nx % 2 != 0)
            throw InvalidInput("nx must be even so both corners land on nodes");
        if (ny < 5)
            throw InvalidInput("ny must be at least 5");
        hx_ = 2.0 * spec.a / nx;
        hy_ = spec.b / (ny - 1);
    }

    const StripSpec& spec() const { return spec_; }
    double a() const { return spec_.a; }
    double b() const { return spec_.b; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double hx() const { return hx_; }
    double hy() const { return hy_; }
    double aspect_ratio() const { return hx_ / hy_; }

    std::size_t node_count() const { return static_cast<std::size_t>(nx_) * ny_; }
    std::size_t interior_count() const { return static_cast<std::size_t>(nx_) * (ny_ - 2); }

    /// Flat node index, row-major in y: interior rows form one contiguous block.
    std::size_t index(int i, int j) const
    {
        return static_cast<std::size_t>(j) * nx_ + static_cast<std::size_t>(wrap(i));
    }

    int wrap(int i) const
    {
        const int r = i % nx_;
        return r < 0 ? r + nx_ : r;
    }

    double x(int i) const { return -spec_.a + i * hx_; }
    double y(int j) const { return j * hy_; }

    int corner_origin_i() const { return nx_ / 2; }
    int corner_far_i() const { return 0; }

    /// Column of the mirror node under x -> -x.
    int mirror_origin(int i) const { return wrap(nx_ - i); }
    /// Column of the mirror node under x -> a - x (reflection in the plane x = a/2);
    /// modulo the period this is the same map as x -> -a - x.
    int mirror_half(int i) const { return wrap(nx_ / 2 - i); }

    NodeKind kind(int i, int j) const
    {
        i = wrap(i);
        if (j > 0 && j < ny_ - 1)
            return NodeKind::interior;
        if (j == ny_ - 1)
            return NodeKind::top;
        if (i == 0 || i == nx_ / 2)
            return NodeKind::corner;
        return i > nx_ / 2 ? NodeKind::bottom_p : NodeKind::bottom_n;
    }

    bool same_shape(const Grid& o) const
    {
        return nx_ == o.nx_ && ny_ == o.ny_ && spec_.a == o.spec_.a && spec_.b == o.spec_.b;
    }

private:
    StripSpec spec_;
    int nx_;
    int ny_;
    double hx_ = 0.0;
    double hy_ = 0.0;
};

inline Grid build_grid(StripSpec spec, int nx, int ny) { return Grid(spec, nx, ny); }

/// Node-sampled real function on a Grid.
class ScalarField {
public:
    explicit ScalarField(Grid grid, double fill = 0.0)
        : grid_(grid), values_(grid.node_count(), fill) {}

    ScalarField(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values))
    {
        if (values_.size() != grid_.node_count())
            throw InvalidInput("field size does not match grid");
    }

    template <class F>
    static ScalarField sample(const Grid& g, F&& f)
    {
        ScalarField out(g);
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i)
                out(i, j) = f(g.x(i), g.y(j));
        return out;
    }

    const Grid& grid() const { return grid_; }

    double& operator()(int i, int j) { return values_[grid_.index(i, j)]; }
    double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    NodeKind boundary_mask(int i, int j) const { return grid_.kind(i, j); }

    bool all_finite() const
    {
        for (double v : values_)
            if (!std::isfinite(v))
                return false;
        return true;
    }

    /// Max of |value| over interior nodes.
    double interior_max_abs() const
    {
        double m = 0.0;
        for (int j = 1; j < grid_.ny() - 1; ++j)
            for (int i = 0; i < grid_.nx(); ++i)
                m = std::max(m, std::abs((*this)(i, j)));
        return m;
    }

    double max_abs() const
    {
        double m = 0.0;
        for (double v : values_)
            m = std::max(m, std::abs(v));
        return m;
    }

    ScalarField& operator+=(double c)
    {
        for (double& v : values_)
            v += c;
        return *this;
    }

private:
    Grid grid_;
    std::vector<double> values_;
};

/// alpha*f + beta*g, node-wise.
inline ScalarField combine(double alpha, const ScalarField& f, double beta, const ScalarField& g)
{
    if (!f.grid().same_shape(g.grid()))
        throw InvalidInput("fields live on different grids");
    ScalarField out(f.grid());
    auto o = out.values();
    auto fv = f.values();
    auto gv = g.values();
    for (std::size_t k = 0; k < o.size(); ++k)
        o[k] = alpha * fv[k] + beta * gv[k];
    return out;
}

/// Centered second-order stencils at an interior node.  Sums are grouped so
/// that mirroring the field in x flips signs exactly (no rounding asymmetry).
struct LocalDerivatives {
    double ux, uy, uxx, uyy, uxy;
};

inline LocalDerivatives interior_derivatives(const ScalarField& u, int i, int j)
{
    const Grid& g = u.grid();
    const double hx = g.hx();
    const double hy = g.hy();
    const double c = u(i, j);
    const double e = u(i + 1, j), w = u(i - 1, j);
    const double n = u(i, j + 1), s = u(i, j - 1);
    const double ne = u(i + 1, j + 1), se = u(i + 1, j - 1);
    const double nw = u(i - 1, j + 1), sw = u(i - 1, j - 1);
    LocalDerivatives d;
    d.ux = (e - w) / (2.0 * hx);
    d.uy = (n - s) / (2.0 * hy);
    d.uxx = ((e + w) - 2.0 * c) / (hx * hx);
    d.uyy = ((n + s) - 2.0 * c) / (hy * hy);
    d.uxy = ((ne - se) - (nw - sw)) / (4.0 * hx * hy);
    return d;
}

/**
 * Finite-difference derivative of a field.  Interior rows use centered
 * stencils; boundary rows fall back to one-sided second-order stencils in y
 * (first derivatives) and first-order one-sided stencils for second
 * derivatives, which are lower accuracy and only meant for diagnostics.
 */
inline ScalarField diff(const ScalarField& u, Derivative which)
{
    const Grid& g = u.grid();
    const double hx = g.hx();
    const double hy = g.hy();
    const int ny = g.ny();
    ScalarField out(g);

    auto dy_at = [&](int i, int j) {
        if (j == 0)
            return (-3.0 * u(i, 0) + 4.0 * u(i, 1) - u(i, 2)) / (2.0 * hy);
        if (j == ny - 1)
            return (3.0 * u(i, ny - 1) - 4.0 * u(i, ny - 2) + u(i, ny - 3)) / (2.0 * hy);
        return (u(i, j + 1) - u(i, j - 1)) / (2.0 * hy);
    };

    for (int j = 0; j < ny; ++j) {
        const bool interior = j > 0 && j < ny - 1;
        for (int i = 0; i < g.nx(); ++i) {
            double v = 0.0;
            if (interior) {
                const LocalDerivatives d = interior_derivatives(u, i, j);
                switch (which) {
                case Derivative::x: v = d.ux; break;
                case Derivative::y: v = d.uy; break;
                case Derivative::xx: v = d.uxx; break;
                case Derivative::yy: v = d.uyy; break;
                case Derivative::xy: v = d.uxy; break;
                }
            } else {
                const int jj = j == 0 ? 1 : -1;
                switch (which) {
                case Derivative::x: v = (u(i + 1, j) - u(i - 1, j)) / (2.0 * hx); break;
                case Derivative::y: v = dy_at(i, j); break;
                case Derivative::xx: v = ((u(i + 1, j) + u(i - 1, j)) - 2.0 * u(i, j)) / (hx * hx); break;
                case Derivative::yy:
                    v = (u(i, j) - 2.0 * u(i, j + jj) + u(i, j + 2 * jj)) / (hy * hy);
                    break;
                case Derivative::xy:
                    v = (dy_at(i + 1, j) - dy_at(i - 1, j)) / (2.0 * hx);
                    break;
                }
            }
            out(i, j) = v;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

/// CSV with header "i,j,x,y,value"; values printed with 17 significant digits.
inline void write_field_csv(std::ostream& os, const ScalarField& f)
{
    const Grid& g = f.grid();
    os << "i,j,x,y,value\n";
    os << std::setprecision(17);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            os << i << ',' << j << ',' << g.x(i) << ',' << g.y(j) << ',' << f(i, j) << '\n';
}

inline void write_field_csv(const std::string& path, const ScalarField& f)
{
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("cannot open " + path + " for writing");
    write_field_csv(os, f);
}

namespace detail {
inline constexpr char field_magic[8] = {'T', 'R', 'D', 'F', 'L', 'D', '0', '1'};

template <class T>
void put(std::ostream& os, T v)
{
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    os.write(buf, sizeof(T));
}

template <class T>
T get(std::istream& is)
{
    char buf[sizeof(T)];
    if (!is.read(buf, sizeof(T)))
        throw InvalidInput("truncated field file");
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}
} // namespace detail

/// Binary layout: 8-byte magic, a, b (float64), nx, ny (int64), then the
/// node values row by row (float64, native byte order).
inline void write_field_binary(std::ostream& os, const ScalarField& f)
{
    const Grid& g = f.grid();
    os.write(detail::field_magic, sizeof(detail::field_magic));
    detail::put<double>(os, g.a());
    detail::put<double>(os, g.b());
    detail::put<std::int64_t>(os, g.nx());
    detail::put<std::int64_t>(os, g.ny());
    for (double v : f.values())
        detail::put<double>(os, v);
}

inline ScalarField read_field_binary(std::istream& is)
{
    char magic[sizeof(detail::field_magic)];
    if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, detail::field_magic, sizeof(magic)) != 0)
        throw InvalidInput("not a field file");
    const double a = detail::get<double>(is);
    const double b = detail::get<double>(is);
    const auto nx = detail::get<std::int64_t>(is);
    const auto ny = detail::get<std::int64_t>(is);
    if (nx <= 0 || ny <= 0 || nx > (1 << 20) || ny > (1 << 20))
        throw InvalidInput("implausible field dimensions");
    Grid g({a, b}, static_cast<int>(nx), static_cast<int>(ny));
    std::vector<double> values(g.node_count());
    for (double& v : values)
        v = detail::get<double>(is);
    return ScalarField(g, std::move(values));
}

inline void write_field_binary(const std::string& path, const ScalarField& f)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot open " + path + " for writing");
    write_field_binary(os, f);
}

inline ScalarField read_field_binary(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("cannot open " + path);
    return read_field_binary(is);
}

} // namespace tridentlab
