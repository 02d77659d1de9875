/**
 * @file level_set.hpp
 * @brief Cartesian signed-distance grid with trilinear queries and node projection.
 *
 * Samples live at origin + i * spacing. Sign convention: phi < 0 inside the
 * surface, phi > 0 outside. Normals are central differences of phi, normalized.
 */
#ifndef MOSPH_LEVEL_SET_HPP
#define MOSPH_LEVEL_SET_HPP

#include "core.hpp"
#include "mesh_distance.hpp"

#include <cmath>
#include <fstream>
#include <vector>

namespace mosph
{

class LevelSetGrid
{
  public:
    Vec3 origin = Vec3::Zero();
    Real spacing = 1.0;
    Vec3i dims = Vec3i::Zero();
    std::vector<Real> phi;    ///< row-major, z fastest
    std::vector<Vec3> normal; ///< unit where the gradient is nonzero, else zero

    std::size_t index(int i, int j, int k) const
    {
        return (static_cast<std::size_t>(i) * dims.y() + j) * dims.z() + k;
    }

    Vec3 samplePoint(int i, int j, int k) const
    {
        return origin + spacing * Vec3(i, j, k);
    }

    /// Trilinear interpolation of phi. Valid strictly inside the sample box.
    Real interpPhi(const Vec3 &p) const
    {
        Cell c = locate(p);
        Real value = 0;
        for (int di = 0; di < 2; ++di)
            for (int dj = 0; dj < 2; ++dj)
                for (int dk = 0; dk < 2; ++dk)
                    value += weight(c, di, dj, dk) * phi[index(c.i + di, c.j + dj, c.k + dk)];
        return value;
    }

    /// Trilinear blend of the stored normals, renormalized. Returns the zero
    /// vector where the blended gradient degenerates (level-set ridge).
    Vec3 interpNormal(const Vec3 &p) const
    {
        Cell c = locate(p);
        Vec3 value = Vec3::Zero();
        for (int di = 0; di < 2; ++di)
            for (int dj = 0; dj < 2; ++dj)
                for (int dk = 0; dk < 2; ++dk)
                    value += weight(c, di, dj, dk) * normal[index(c.i + di, c.j + dj, c.k + dk)];
        const Real n = value.norm();
        if (n < Real(1e-12))
            return Vec3::Zero();
        return value / n;
    }

    bool contains(const Vec3 &p) const
    {
        for (int a = 0; a < 3; ++a)
        {
            const Real u = (p[a] - origin[a]) / spacing;
            if (!(u >= 0.0) || !(u <= Real(dims[a] - 1)))
                return false;
        }
        return true;
    }

  private:
    struct Cell
    {
        int i, j, k;
        Real fx, fy, fz;
    };

    Cell locate(const Vec3 &p) const
    {
        Cell c;
        int *idx[3] = {&c.i, &c.j, &c.k};
        Real *frac[3] = {&c.fx, &c.fy, &c.fz};
        static const char *axis_name[3] = {"x", "y", "z"};
        for (int a = 0; a < 3; ++a)
        {
            const Real u = (p[a] - origin[a]) / spacing;
            if (!(u >= 0.0) || !(u <= Real(dims[a] - 1)))
                throw RangeError("level-set query outside grid: " + std::string(axis_name[a]) +
                                 " = " + std::to_string(p[a]));
            int base = static_cast<int>(std::floor(u));
            if (base > dims[a] - 2)
                base = dims[a] - 2;
            *idx[a] = base;
            *frac[a] = u - base;
        }
        return c;
    }

    Real weight(const Cell &c, int di, int dj, int dk) const
    {
        const Real wx = di ? c.fx : 1.0 - c.fx;
        const Real wy = dj ? c.fy : 1.0 - c.fy;
        const Real wz = dk ? c.fz : 1.0 - c.fz;
        return wx * wy * wz;
    }
};

/// Fills a grid by exact signed distance against the soup, then differentiates
/// phi for normals (central differences inside, one-sided at the boundary).
inline LevelSetGrid buildLevelSet(const TriangleSoup &soup, const Vec3 &origin, Real spacing,
                                  const Vec3i &dims)
{
    if (dims.x() < 3 || dims.y() < 3 || dims.z() < 3)
        throw ConfigError("level-set grid needs at least 3 samples per axis, got " +
                          std::to_string(dims.x()) + "x" + std::to_string(dims.y()) + "x" +
                          std::to_string(dims.z()));
    if (!(spacing > 0))
        throw ConfigError("level-set spacing must be positive");

    LevelSetGrid grid;
    grid.origin = origin;
    grid.spacing = spacing;
    grid.dims = dims;
    grid.phi.resize(std::size_t(dims.x()) * dims.y() * dims.z());
    grid.normal.assign(grid.phi.size(), Vec3::Zero());

    MeshDistance dist(soup);
    for (int i = 0; i < dims.x(); ++i)
        for (int j = 0; j < dims.y(); ++j)
            for (int k = 0; k < dims.z(); ++k)
                grid.phi[grid.index(i, j, k)] = dist.query(grid.samplePoint(i, j, k)).phi;

    auto diff = [&](int i, int j, int k, int axis) {
        int lo[3] = {i, j, k}, hi[3] = {i, j, k};
        Real denom = 2.0 * spacing;
        if (lo[axis] == 0)
            denom = spacing;
        else
            --lo[axis];
        if (hi[axis] == dims[axis] - 1)
            denom = spacing;
        else
            ++hi[axis];
        return (grid.phi[grid.index(hi[0], hi[1], hi[2])] - grid.phi[grid.index(lo[0], lo[1], lo[2])]) /
               denom;
    };
    for (int i = 0; i < dims.x(); ++i)
        for (int j = 0; j < dims.y(); ++j)
            for (int k = 0; k < dims.z(); ++k)
            {
                Vec3 g(diff(i, j, k, 0), diff(i, j, k, 1), diff(i, j, k, 2));
                const Real n = g.norm();
                if (n > Real(1e-12))
                    grid.normal[grid.index(i, j, k)] = g / n;
            }
    return grid;
}

/// Convenience builder: grid over the mesh bounding box with the given cell
/// padding (default 4 cells so near-surface projections never leave the grid).
inline LevelSetGrid buildLevelSet(const TriangleSoup &soup, Real spacing, int padding_cells = 4)
{
    const Vec3 lo = soup.boundsMin() - Vec3::Constant(padding_cells * spacing);
    const Vec3 hi = soup.boundsMax() + Vec3::Constant(padding_cells * spacing);
    Vec3i dims;
    for (int a = 0; a < 3; ++a)
        dims[a] = std::max(3, static_cast<int>(std::ceil((hi[a] - lo[a]) / spacing)) + 1);
    return buildLevelSet(soup, lo, spacing, dims);
}

inline Real interpPhi(const LevelSetGrid &grid, const Vec3 &p) { return grid.interpPhi(p); }
inline Vec3 interpNormal(const LevelSetGrid &grid, const Vec3 &p) { return grid.interpNormal(p); }

/// Binary dump: one text header line (origin, spacing, dims), then phi as
/// row-major (z fastest) 64-bit floats. A human-readable sidecar goes to
/// path + ".meta".
inline void saveLevelSet(const LevelSetGrid &grid, const std::string &path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot open level-set output file: " + path);
    out.precision(17);
    out << "levelset " << grid.origin.x() << ' ' << grid.origin.y() << ' ' << grid.origin.z() << ' '
        << grid.spacing << ' ' << grid.dims.x() << ' ' << grid.dims.y() << ' ' << grid.dims.z()
        << '\n';
    out.write(reinterpret_cast<const char *>(grid.phi.data()),
              static_cast<std::streamsize>(grid.phi.size() * sizeof(Real)));

    std::ofstream meta(path + ".meta");
    meta.precision(17);
    meta << "format: levelset-v1\n"
         << "payload: row-major float64, z fastest\n"
         << "origin_mm: " << grid.origin.x() << ' ' << grid.origin.y() << ' ' << grid.origin.z() << '\n'
         << "spacing_mm: " << grid.spacing << '\n'
         << "dims: " << grid.dims.x() << ' ' << grid.dims.y() << ' ' << grid.dims.z() << '\n'
         << "sign_convention: negative inside\n";
}

inline LevelSetGrid loadLevelSet(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open level-set file: " + path);
    std::string tag;
    LevelSetGrid grid;
    in >> tag;
    if (tag != "levelset")
        throw ParseError("bad level-set header tag '" + tag + "'", 0);
    in >> grid.origin.x() >> grid.origin.y() >> grid.origin.z() >> grid.spacing >> grid.dims.x() >>
        grid.dims.y() >> grid.dims.z();
    if (!in)
        throw ParseError("bad level-set header", static_cast<std::int64_t>(in.tellg()));
    in.ignore(1); // newline after the header
    grid.phi.resize(std::size_t(grid.dims.x()) * grid.dims.y() * grid.dims.z());
    in.read(reinterpret_cast<char *>(grid.phi.data()),
            static_cast<std::streamsize>(grid.phi.size() * sizeof(Real)));
    if (!in)
        throw ParseError("level-set payload truncated", static_cast<std::int64_t>(in.gcount()));

    // Rebuild normals from the stored phi.
    grid.normal.assign(grid.phi.size(), Vec3::Zero());
    auto diff = [&](int i, int j, int k, int axis) {
        int lo[3] = {i, j, k}, hi[3] = {i, j, k};
        Real denom = 2.0 * grid.spacing;
        if (lo[axis] == 0)
            denom = grid.spacing;
        else
            --lo[axis];
        if (hi[axis] == grid.dims[axis] - 1)
            denom = grid.spacing;
        else
            ++hi[axis];
        return (grid.phi[grid.index(hi[0], hi[1], hi[2])] -
                grid.phi[grid.index(lo[0], lo[1], lo[2])]) /
               denom;
    };
    for (int i = 0; i < grid.dims.x(); ++i)
        for (int j = 0; j < grid.dims.y(); ++j)
            for (int k = 0; k < grid.dims.z(); ++k)
            {
                Vec3 g(diff(i, j, k, 0), diff(i, j, k, 1), diff(i, j, k, 2));
                const Real n = g.norm();
                if (n > Real(1e-12))
                    grid.normal[grid.index(i, j, k)] = g / n;
            }
    return grid;
}

} // namespace mosph
#endif // MOSPH_LEVEL_SET_HPP
