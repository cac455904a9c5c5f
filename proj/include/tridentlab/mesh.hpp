#pragma once

/**
 * @file mesh.hpp
 * @brief Triangle mesh of the periodic trident: the graph, its image under
 *        the rotation (x,y,z) -> (-x,-y,z) about the vertical line over the
 *        origin, and translated copies by (2a,0,0).  OBJ export and import.
 */

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "grid.hpp"
#include "trident.hpp"

namespace tridentlab {

enum class Provenance : std::uint8_t { graph, reflected, tiled };

struct VertexTag {
    Provenance source = Provenance::graph;
    int tile = 0; ///< period index; tile > 0 means tiled-k
};

inline std::string to_string(const VertexTag& t)
{
    if (t.source == Provenance::tiled)
        return "tiled-" + std::to_string(t.tile);
    return t.source == Provenance::graph ? "graph" : "reflected";
}

struct TriangleMesh {
    std::vector<std::array<double, 3>> vertices;
    std::vector<std::array<int, 3>> faces; ///< 0-based
    std::vector<VertexTag> tags;

    bool empty() const { return faces.empty(); }
};

struct MeshOptions {
    int periods = 1;
    double zmin = std::numeric_limits<double>::quiet_NaN(); ///< NaN: -cap/2
    double zmax = std::numeric_limits<double>::quiet_NaN(); ///< NaN: +cap/2
    double weld_tol = 1e-9;                                 ///< relative to the bounding box scale
};

inline double triangle_area(const std::array<double, 3>& p, const std::array<double, 3>& q,
                            const std::array<double, 3>& r)
{
    const double ux = q[0] - p[0], uy = q[1] - p[1], uz = q[2] - p[2];
    const double vx = r[0] - p[0], vy = r[1] - p[1], vz = r[2] - p[2];
    const double cx = uy * vz - uz * vy, cy = uz * vx - ux * vz, cz = ux * vy - uy * vx;
    return 0.5 * std::sqrt(cx * cx + cy * cy + cz * cz);
}

/// Largest extent of the vertex bounding box (1 for an empty mesh).
inline double bbox_scale(const TriangleMesh& m)
{
    if (m.vertices.empty())
        return 1.0;
    std::array<double, 3> lo = m.vertices[0], hi = m.vertices[0];
    for (const auto& v : m.vertices)
        for (int k = 0; k < 3; ++k) {
            lo[k] = std::min(lo[k], v[k]);
            hi[k] = std::max(hi[k], v[k]);
        }
    return std::max({hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2], 1e-300});
}

/**
 * Builds the closed graph over [-a, a] x [0, b] (boundary rows included so
 * the corner nodes can weld), the rotated copy over y <= 0, and
 * periods - 1 translates.  Each grid cell is split along the diagonal whose
 * endpoints differ most in u, i.e. the one running up the slope.  A
 * triangle is kept when all three heights lie in the window; vertices that
 * no kept triangle uses are dropped.  Vertices are identified by lattice
 * position (global column, signed row) and, on the row y = 0 where both
 * halves meet, by height within the weld tolerance.
 */
inline TriangleMesh reflect_and_tile(const ScalarField& u, double cap, const MeshOptions& opt = {})
{
    if (opt.periods < 1)
        throw InvalidInput("periods must be at least 1");
    const Grid& g = u.grid();
    const double zmin = std::isnan(opt.zmin) ? -0.5 * cap : opt.zmin;
    const double zmax = std::isnan(opt.zmax) ? 0.5 * cap : opt.zmax;
    if (!(zmin < zmax))
        throw InvalidInput("z window must satisfy zmin < zmax");
    const int nx = g.nx();
    const int ny = g.ny();
    const double a = g.a();
    const double weld = opt.weld_tol * std::max({2.0 * a * opt.periods, 2.0 * g.b(), zmax - zmin});

    struct Key {
        int col, row;
        bool operator<(const Key& o) const { return col != o.col ? col < o.col : row < o.row; }
    };
    TriangleMesh all;
    std::map<Key, std::vector<int>> at; // lattice position -> vertex ids (several only on row 0)

    auto vertex = [&](int col, int row, double z, VertexTag tag) {
        auto& ids = at[{col, row}];
        for (int id : ids)
            if (std::abs(all.vertices[id][2] - z) <= weld)
                return id;
        const double x = -a + col * g.hx();
        all.vertices.push_back({x, row * g.hy(), z});
        all.tags.push_back(tag);
        ids.push_back(static_cast<int>(all.vertices.size()) - 1);
        return ids.back();
    };

    for (int tile = 0; tile < opt.periods; ++tile) {
        for (int half = 0; half < 2; ++half) {
            VertexTag tag{tile > 0 ? Provenance::tiled : (half == 0 ? Provenance::graph : Provenance::reflected),
                          tile};
            // node (i, j) of the graph; the rotated copy puts it at column nx - i, row -j
            std::vector<int> id(static_cast<std::size_t>(nx + 1) * ny, -1);
            for (int j = 0; j < ny; ++j)
                for (int i = 0; i <= nx; ++i) {
                    const double z = u(i, j);
                    if (z < zmin || z > zmax)
                        continue;
                    const int col = tile * nx + (half == 0 ? i : nx - i);
                    id[static_cast<std::size_t>(j) * (nx + 1) + i] = vertex(col, half == 0 ? j : -j, z, tag);
                }
            auto node = [&](int i, int j) { return id[static_cast<std::size_t>(j) * (nx + 1) + i]; };
            for (int j = 0; j + 1 < ny; ++j)
                for (int i = 0; i < nx; ++i) {
                    const int v00 = node(i, j), v10 = node(i + 1, j), v01 = node(i, j + 1), v11 = node(i + 1, j + 1);
                    const bool main_diag = std::abs(u(i + 1, j + 1) - u(i, j)) >= std::abs(u(i + 1, j) - u(i, j + 1));
                    std::array<std::array<int, 3>, 2> tri;
                    if (main_diag)
                        tri = {{{v00, v10, v11}, {v00, v11, v01}}};
                    else
                        tri = {{{v00, v10, v01}, {v10, v11, v01}}};
                    for (auto t : tri) {
                        if (t[0] < 0 || t[1] < 0 || t[2] < 0)
                            continue;
                        all.faces.push_back(t);
                    }
                }
        }
    }

    // drop unused vertices and degenerate faces, keeping first-use order
    TriangleMesh m;
    const double scale = bbox_scale(all);
    std::vector<int> remap(all.vertices.size(), -1);
    for (const auto& f : all.faces) {
        if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2])
            continue;
        if (!(triangle_area(all.vertices[f[0]], all.vertices[f[1]], all.vertices[f[2]]) > 1e-12 * scale * scale))
            continue;
        std::array<int, 3> nf{};
        for (int k = 0; k < 3; ++k) {
            int& r = remap[f[k]];
            if (r < 0) {
                r = static_cast<int>(m.vertices.size());
                m.vertices.push_back(all.vertices[f[k]]);
                m.tags.push_back(all.tags[f[k]]);
            }
            nf[k] = r;
        }
        m.faces.push_back(nf);
    }
    if (m.empty())
        throw InvalidInput("mesh is empty after clipping to the z window");
    return m;
}

inline TriangleMesh reflect_and_tile(const TridentSolution& t, const MeshOptions& opt = {})
{
    if (!t.converged)
        throw InvalidInput("reflect_and_tile needs a converged trident");
    return reflect_and_tile(t.u, t.cap, opt);
}

/// (x, y, z) -> (-x, -y, z) on every vertex.
inline TriangleMesh rotate_about_origin_line(const TriangleMesh& m)
{
    TriangleMesh r = m;
    for (auto& v : r.vertices) {
        v[0] = -v[0];
        v[1] = -v[1];
    }
    return r;
}

/**
 * Largest distance from the image of a vertex under `map` to the nearest
 * mesh vertex, x taken modulo `period` when period > 0.  Uses a bucket grid
 * of cell `cell` in (x, y).
 */
template <class Map>
double vertex_set_defect(const TriangleMesh& m, Map&& map, double cell, double period = 0.0)
{
    auto wrap = [&](double x) {
        if (!(period > 0.0))
            return x;
        return x - period * std::floor(x / period);
    };
    auto key = [&](double x, double y) {
        return std::pair<long long, long long>(std::llround(std::floor(x / cell)), std::llround(std::floor(y / cell)));
    };
    std::map<std::pair<long long, long long>, std::vector<int>> buckets;
    for (int k = 0; k < static_cast<int>(m.vertices.size()); ++k) {
        const auto& v = m.vertices[k];
        buckets[key(wrap(v[0]), v[1])].push_back(k);
    }
    double worst = 0.0;
    for (const auto& v : m.vertices) {
        const std::array<double, 3> w = map(v);
        const double wx = wrap(w[0]);
        const auto [kx, ky] = key(wx, w[1]);
        double best = std::numeric_limits<double>::infinity();
        for (long long dx = -1; dx <= 1; ++dx)
            for (long long dy = -1; dy <= 1; ++dy) {
                long long bx = kx + dx;
                if (period > 0.0) {
                    const long long nb = std::llround(std::ceil(period / cell));
                    bx = ((bx % nb) + nb) % nb;
                }
                auto it = buckets.find({bx, ky + dy});
                if (it == buckets.end())
                    continue;
                for (int k : it->second) {
                    const auto& p = m.vertices[k];
                    double ddx = wrap(p[0]) - wx;
                    if (period > 0.0)
                        ddx -= period * std::round(ddx / period);
                    best = std::min(best, std::sqrt(ddx * ddx + (p[1] - w[1]) * (p[1] - w[1]) +
                                                    (p[2] - w[2]) * (p[2] - w[2])));
                }
            }
        worst = std::max(worst, best);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// OBJ

inline void export_obj(std::ostream& os, const TriangleMesh& m)
{
    if (m.empty())
        throw InvalidInput("cannot export an empty mesh");
    char buf[96];
    for (const auto& v : m.vertices) {
        std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v[0], v[1], v[2]);
        os << buf;
    }
    for (const auto& f : m.faces)
        os << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    if (!os)
        throw std::runtime_error("OBJ write failed");
}

inline void export_obj(const std::string& path, const TriangleMesh& m)
{
    if (m.empty())
        throw InvalidInput("cannot export an empty mesh");
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot open " + path);
    export_obj(os, m);
}

/// Reads `v` and triangular `f` lines (v, v/t, v/t/n and v//n forms); other lines are skipped.
inline TriangleMesh import_obj(std::istream& is)
{
    TriangleMesh m;
    std::string line;
    while (std::getline(is, line)) {
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "v") {
            std::array<double, 3> v{};
            if (!(ss >> v[0] >> v[1] >> v[2]))
                throw InvalidInput("malformed OBJ vertex line: " + line);
            m.vertices.push_back(v);
            m.tags.push_back({});
        } else if (tag == "f") {
            std::array<int, 3> f{};
            int n = 0;
            std::string tok;
            while (ss >> tok) {
                if (n == 3)
                    throw InvalidInput("only triangular OBJ faces are supported");
                const int idx = std::stoi(tok.substr(0, tok.find('/')));
                if (idx < 1 || idx > static_cast<int>(m.vertices.size()))
                    throw InvalidInput("OBJ face index out of range: " + line);
                f[n++] = idx - 1;
            }
            if (n != 3)
                throw InvalidInput("malformed OBJ face line: " + line);
            m.faces.push_back(f);
        }
    }
    return m;
}

inline TriangleMesh import_obj(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("cannot open " + path);
    return import_obj(is);
}

} // namespace tridentlab
