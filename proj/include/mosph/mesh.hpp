/**
 * @file mesh.hpp
 * @brief Triangle-soup container, STL/OBJ parsing and analytic test surfaces.
 */
#ifndef MOSPH_MESH_HPP
#define MOSPH_MESH_HPP

#include "core.hpp"

#include <array>
#include <cctype>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace mosph
{

struct Triangle
{
    Vec3 v0, v1, v2;
    Vec3 normal; ///< unit facet normal
};

struct TriangleSoup
{
    std::vector<Triangle> triangles;

    Vec3 boundsMin() const
    {
        Vec3 lo = Vec3::Constant(std::numeric_limits<Real>::max());
        for (const auto &t : triangles)
            lo = lo.cwiseMin(t.v0).cwiseMin(t.v1).cwiseMin(t.v2);
        return lo;
    }
    Vec3 boundsMax() const
    {
        Vec3 hi = Vec3::Constant(std::numeric_limits<Real>::lowest());
        for (const auto &t : triangles)
            hi = hi.cwiseMax(t.v0).cwiseMax(t.v1).cwiseMax(t.v2);
        return hi;
    }
};

namespace detail
{

inline Vec3 windingNormal(const Vec3 &a, const Vec3 &b, const Vec3 &c)
{
    return (b - a).cross(c - a);
}

/// Renormalizes the stored normal, recomputing it from the vertex winding when
/// it is (near) zero. Returns false for degenerate (zero-area) facets.
inline bool finalizeTriangle(Triangle &t)
{
    const Vec3 wn = windingNormal(t.v0, t.v1, t.v2);
    const Real area2 = wn.norm();
    if (area2 <= Real(1e-14))
        return false;
    if (t.normal.norm() <= Real(1e-12))
        t.normal = wn / area2;
    else
        t.normal.normalize();
    if (!t.v0.allFinite() || !t.v1.allFinite() || !t.v2.allFinite() || !t.normal.allFinite())
        return false;
    return true;
}

inline void pushFinalized(TriangleSoup &soup, Triangle t, std::size_t &dropped)
{
    if (finalizeTriangle(t))
        soup.triangles.push_back(t);
    else
        ++dropped;
}

inline float readLeFloat(const char *p)
{
    std::uint32_t u;
    std::memcpy(&u, p, 4);
    float f;
    std::memcpy(&f, &u, 4);
    return f;
}

} // namespace detail

/// Parses binary STL: 80-byte header, uint32 facet count, 50-byte records.
inline TriangleSoup parseStlBinary(const std::string &bytes)
{
    if (bytes.size() < 84)
        throw ParseError("binary STL truncated before facet count", static_cast<std::int64_t>(bytes.size()));
    std::uint32_t count;
    std::memcpy(&count, bytes.data() + 80, 4);
    const std::size_t expected = 84 + std::size_t(count) * 50;
    if (bytes.size() < expected)
        throw ParseError("binary STL truncated: " + std::to_string(count) + " facets declared",
                         static_cast<std::int64_t>(bytes.size()));
    TriangleSoup soup;
    soup.triangles.reserve(count);
    std::size_t dropped = 0;
    for (std::uint32_t i = 0; i < count; ++i)
    {
        const char *rec = bytes.data() + 84 + std::size_t(i) * 50;
        Triangle t;
        auto vec = [&](int base) {
            return Vec3(detail::readLeFloat(rec + base), detail::readLeFloat(rec + base + 4),
                        detail::readLeFloat(rec + base + 8));
        };
        t.normal = vec(0);
        t.v0 = vec(12);
        t.v1 = vec(24);
        t.v2 = vec(36);
        detail::pushFinalized(soup, t, dropped);
    }
    if (dropped > 0)
        RunLog::instance().warn("dropped " + std::to_string(dropped) + " degenerate STL facets");
    if (soup.triangles.empty())
        throw ParseError("mesh contains zero usable triangles");
    return soup;
}

/// Parses ASCII STL. Reports the byte offset of the offending token on failure.
inline TriangleSoup parseStlAscii(const std::string &bytes)
{
    std::istringstream in(bytes);
    auto fail = [&](const std::string &msg) -> ParseError {
        const auto pos = in.tellg();
        return ParseError("ASCII STL: " + msg,
                          pos < 0 ? static_cast<std::int64_t>(bytes.size()) : static_cast<std::int64_t>(pos));
    };
    auto expect = [&](const char *token) {
        std::string word;
        if (!(in >> word) || word != token)
            throw fail(std::string("expected '") + token + "'" + (word.empty() ? "" : ", got '" + word + "'"));
    };
    auto readVec = [&]() {
        Vec3 v;
        if (!(in >> v.x() >> v.y() >> v.z()))
            throw fail("expected three numbers");
        return v;
    };

    expect("solid");
    std::string line;
    std::getline(in, line); // optional solid name

    TriangleSoup soup;
    std::size_t dropped = 0;
    std::string word;
    while (in >> word)
    {
        if (word == "endsolid")
            break;
        if (word != "facet")
            throw fail("expected 'facet' or 'endsolid', got '" + word + "'");
        expect("normal");
        Triangle t;
        t.normal = readVec();
        expect("outer");
        expect("loop");
        expect("vertex");
        t.v0 = readVec();
        expect("vertex");
        t.v1 = readVec();
        expect("vertex");
        t.v2 = readVec();
        expect("endloop");
        expect("endfacet");
        detail::pushFinalized(soup, t, dropped);
    }
    if (dropped > 0)
        RunLog::instance().warn("dropped " + std::to_string(dropped) + " degenerate STL facets");
    if (soup.triangles.empty())
        throw ParseError("mesh contains zero usable triangles");
    return soup;
}

/// Parses OBJ-style vertex/face text ("v x y z" and "f i j k ..." lines).
/// Faces with more than three vertices are fan-triangulated; facet normals
/// come from the vertex winding.
inline TriangleSoup parseObj(const std::string &bytes)
{
    std::istringstream in(bytes);
    std::vector<Vec3> vertices;
    TriangleSoup soup;
    std::size_t dropped = 0;
    std::string line;
    std::int64_t offset = 0;
    while (std::getline(in, line))
    {
        const std::int64_t line_offset = offset;
        offset += static_cast<std::int64_t>(line.size()) + 1;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag.empty() || tag[0] == '#')
            continue;
        if (tag == "v")
        {
            Vec3 v;
            if (!(ls >> v.x() >> v.y() >> v.z()))
                throw ParseError("OBJ: malformed vertex line", line_offset);
            vertices.push_back(v);
        }
        else if (tag == "f")
        {
            std::vector<std::size_t> idx;
            std::string token;
            while (ls >> token)
            {
                // accept i, i/t, i/t/n, i//n
                const std::size_t slash = token.find('/');
                const std::string head = slash == std::string::npos ? token : token.substr(0, slash);
                long k = 0;
                try
                {
                    k = std::stol(head);
                }
                catch (const std::exception &)
                {
                    throw ParseError("OBJ: malformed face index '" + token + "'", line_offset);
                }
                if (k <= 0 || static_cast<std::size_t>(k) > vertices.size())
                    throw ParseError("OBJ: face index " + std::to_string(k) + " out of range", line_offset);
                idx.push_back(static_cast<std::size_t>(k - 1));
            }
            if (idx.size() < 3)
                throw ParseError("OBJ: face with fewer than 3 vertices", line_offset);
            for (std::size_t i = 1; i + 1 < idx.size(); ++i)
            {
                Triangle t;
                t.v0 = vertices[idx[0]];
                t.v1 = vertices[idx[i]];
                t.v2 = vertices[idx[i + 1]];
                t.normal.setZero();
                detail::pushFinalized(soup, t, dropped);
            }
        }
        // other tags (vn, vt, o, g, s, usemtl, ...) are ignored
    }
    if (dropped > 0)
        RunLog::instance().warn("dropped " + std::to_string(dropped) + " degenerate OBJ facets");
    if (soup.triangles.empty())
        throw ParseError("mesh contains zero usable triangles");
    return soup;
}

/// Parses a mesh from raw bytes, auto-detecting ASCII STL, binary STL or
/// OBJ-style text.
inline TriangleSoup parseMesh(const std::string &bytes)
{
    if (bytes.empty())
        throw ParseError("empty mesh file", 0);

    // ASCII STL starts with "solid" and mentions "facet" early on. Binary
    // files sometimes carry "solid" in the 80-byte header, so require both.
    std::size_t first = bytes.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && bytes.compare(first, 5, "solid") == 0 &&
        bytes.find("facet", first) != std::string::npos)
        return parseStlAscii(bytes);

    if (bytes.size() >= 84)
    {
        std::uint32_t count;
        std::memcpy(&count, bytes.data() + 80, 4);
        if (count > 0 && bytes.size() >= 84 + std::size_t(count) * 50)
            return parseStlBinary(bytes);
    }

    if (bytes.find("\nv ") != std::string::npos || bytes.compare(0, 2, "v ") == 0)
        return parseObj(bytes);

    // Last resort: treat as binary STL so truncation is reported with offset.
    return parseStlBinary(bytes);
}

inline TriangleSoup loadMesh(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open mesh file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parseMesh(buf.str());
}

// ---------------------------------------------------------------------------
// Analytic surfaces used by scenarios and tests.
// ---------------------------------------------------------------------------

/// Large square patch of the plane z = z0, outward normal +z.
inline TriangleSoup makePlane(Real z0, Real half_extent)
{
    TriangleSoup soup;
    const Real e = half_extent;
    const Vec3 a(-e, -e, z0), b(e, -e, z0), c(e, e, z0), d(-e, e, z0);
    soup.triangles.push_back({a, b, c, Vec3(0, 0, 1)});
    soup.triangles.push_back({a, c, d, Vec3(0, 0, 1)});
    return soup;
}

/// Axis-aligned closed box with outward normals.
inline TriangleSoup makeBox(const Vec3 &lo, const Vec3 &hi)
{
    TriangleSoup soup;
    auto quad = [&](const Vec3 &a, const Vec3 &b, const Vec3 &c, const Vec3 &d) {
        Triangle t1{a, b, c, Vec3::Zero()};
        Triangle t2{a, c, d, Vec3::Zero()};
        detail::finalizeTriangle(t1);
        detail::finalizeTriangle(t2);
        soup.triangles.push_back(t1);
        soup.triangles.push_back(t2);
    };
    const Vec3 &l = lo, &h = hi;
    quad({l.x(), l.y(), l.z()}, {l.x(), h.y(), l.z()}, {h.x(), h.y(), l.z()}, {h.x(), l.y(), l.z()}); // z = lo
    quad({l.x(), l.y(), h.z()}, {h.x(), l.y(), h.z()}, {h.x(), h.y(), h.z()}, {l.x(), h.y(), h.z()}); // z = hi
    quad({l.x(), l.y(), l.z()}, {h.x(), l.y(), l.z()}, {h.x(), l.y(), h.z()}, {l.x(), l.y(), h.z()}); // y = lo
    quad({l.x(), h.y(), l.z()}, {l.x(), h.y(), h.z()}, {h.x(), h.y(), h.z()}, {h.x(), h.y(), l.z()}); // y = hi
    quad({l.x(), l.y(), l.z()}, {l.x(), l.y(), h.z()}, {l.x(), h.y(), h.z()}, {l.x(), h.y(), l.z()}); // x = lo
    quad({h.x(), l.y(), l.z()}, {h.x(), h.y(), l.z()}, {h.x(), h.y(), h.z()}, {h.x(), l.y(), h.z()}); // x = hi
    return soup;
}

/// Icosphere triangulation of an axis-aligned ellipsoid (sphere when the three
/// semi-axes coincide). `subdivisions` quadruples the facet count each level.
inline TriangleSoup makeEllipsoid(const Vec3 &center, const Vec3 &semi_axes, int subdivisions)
{
    // icosahedron seed
    const Real t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> verts = {
        {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t},  {0, 1, t},
        {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
    for (auto &v : verts)
        v.normalize();
    std::vector<std::array<std::size_t, 3>> faces = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},  {5, 11, 4},
        {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6},  {3, 6, 8},
        {3, 8, 9},   {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};

    std::map<std::pair<std::size_t, std::size_t>, std::size_t> midpoint_cache;
    auto midpoint = [&](std::size_t a, std::size_t b) {
        const auto key = std::minmax(a, b);
        auto it = midpoint_cache.find(key);
        if (it != midpoint_cache.end())
            return it->second;
        Vec3 m = (verts[a] + verts[b]).normalized();
        verts.push_back(m);
        const std::size_t id = verts.size() - 1;
        midpoint_cache.emplace(key, id);
        return id;
    };
    for (int level = 0; level < subdivisions; ++level)
    {
        std::vector<std::array<std::size_t, 3>> next;
        next.reserve(faces.size() * 4);
        for (const auto &f : faces)
        {
            const std::size_t ab = midpoint(f[0], f[1]);
            const std::size_t bc = midpoint(f[1], f[2]);
            const std::size_t ca = midpoint(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }

    TriangleSoup soup;
    soup.triangles.reserve(faces.size());
    std::size_t dropped = 0;
    for (const auto &f : faces)
    {
        Triangle tri;
        tri.v0 = center + verts[f[0]].cwiseProduct(semi_axes);
        tri.v1 = center + verts[f[1]].cwiseProduct(semi_axes);
        tri.v2 = center + verts[f[2]].cwiseProduct(semi_axes);
        tri.normal.setZero();
        detail::pushFinalized(soup, tri, dropped);
    }
    return soup;
}

inline TriangleSoup makeIcosphere(const Vec3 &center, Real radius, int subdivisions)
{
    return makeEllipsoid(center, Vec3::Constant(radius), subdivisions);
}

/// Serializes a soup as ASCII STL (testing and scenario plumbing).
inline std::string toStlAscii(const TriangleSoup &soup, const std::string &name = "mosph")
{
    std::ostringstream out;
    out.precision(17);
    out << "solid " << name << "\n";
    for (const auto &t : soup.triangles)
    {
        out << "  facet normal " << t.normal.x() << ' ' << t.normal.y() << ' ' << t.normal.z() << "\n"
            << "    outer loop\n"
            << "      vertex " << t.v0.x() << ' ' << t.v0.y() << ' ' << t.v0.z() << "\n"
            << "      vertex " << t.v1.x() << ' ' << t.v1.y() << ' ' << t.v1.z() << "\n"
            << "      vertex " << t.v2.x() << ' ' << t.v2.y() << ' ' << t.v2.z() << "\n"
            << "    endloop\n"
            << "  endfacet\n";
    }
    out << "endsolid " << name << "\n";
    return out.str();
}

} // namespace mosph
#endif // MOSPH_MESH_HPP
