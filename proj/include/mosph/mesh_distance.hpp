/**
 * @file mesh_distance.hpp
 * @brief Exact point-to-mesh signed distance with BVH acceleration.
 *
 * The sign comes from the angle-weighted pseudo-normal of the closest feature
 * (face, edge or vertex), which stays consistent at concave edges where raw
 * facet normals are ambiguous.
 */
#ifndef MOSPH_MESH_DISTANCE_HPP
#define MOSPH_MESH_DISTANCE_HPP

#include "core.hpp"
#include "mesh.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

namespace mosph
{

enum class TriFeature
{
    Vertex0,
    Vertex1,
    Vertex2,
    Edge01,
    Edge12,
    Edge20,
    Face
};

/// Closest point on triangle (a,b,c) to p, with the feature it lies on.
/// Region classification after Ericson, Real-Time Collision Detection.
inline Vec3 closestPointOnTriangle(const Vec3 &p, const Vec3 &a, const Vec3 &b, const Vec3 &c,
                                   TriFeature &feature)
{
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const Real d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0 && d2 <= 0)
    {
        feature = TriFeature::Vertex0;
        return a;
    }
    const Vec3 bp = p - b;
    const Real d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0 && d4 <= d3)
    {
        feature = TriFeature::Vertex1;
        return b;
    }
    const Real vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0)
    {
        feature = TriFeature::Edge01;
        const Real v = d1 / (d1 - d3);
        return a + v * ab;
    }
    const Vec3 cp = p - c;
    const Real d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0 && d5 <= d6)
    {
        feature = TriFeature::Vertex2;
        return c;
    }
    const Real vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0)
    {
        feature = TriFeature::Edge20;
        const Real w = d2 / (d2 - d6);
        return a + w * ac;
    }
    const Real va = d3 * d6 - d5 * d4;
    if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0)
    {
        feature = TriFeature::Edge12;
        const Real w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + w * (c - b);
    }
    feature = TriFeature::Face;
    const Real denom = 1.0 / (va + vb + vc);
    const Real v = vb * denom, w = vc * denom;
    return a + ab * v + ac * w;
}

struct SignedDistanceResult
{
    Real phi = 0;              ///< signed distance, negative inside
    Vec3 normal = Vec3::Zero(); ///< unit pseudo-normal of the closest feature
    Vec3 closest = Vec3::Zero();
    std::size_t triangle = 0;
};

/// Signed-distance oracle over a triangle soup. Vertices are welded by exact
/// coordinates to recover edge/vertex adjacency for pseudo-normals.
class MeshDistance
{
  public:
    explicit MeshDistance(const TriangleSoup &soup)
    {
        if (soup.triangles.empty())
            throw ParseError("mesh contains zero usable triangles");
        weld(soup);
        buildPseudoNormals();
        buildBvh();
    }

    SignedDistanceResult query(const Vec3 &p) const
    {
        SignedDistanceResult best;
        Real best_d2 = std::numeric_limits<Real>::max();
        TriFeature best_feature = TriFeature::Face;
        nearestRecurse(0, p, best, best_d2, best_feature);

        const Vec3 pseudo = featurePseudoNormal(best.triangle, best_feature);
        const Vec3 diff = p - best.closest;
        const Real dist = diff.norm();
        const Real side = diff.dot(pseudo);
        best.phi = (side < 0 ? -dist : dist);
        best.normal = pseudo;
        return best;
    }

    std::size_t triangleCount() const { return tri_.size(); }

  private:
    struct Tri
    {
        std::uint32_t v[3];
        Vec3 normal;
    };
    struct BvhNode
    {
        Vec3 lo, hi;
        std::int32_t left = -1;  ///< child index; -1 for leaves
        std::int32_t right = -1;
        std::uint32_t first = 0; ///< leaf triangle range in order_
        std::uint32_t count = 0;
    };

    void weld(const TriangleSoup &soup)
    {
        std::map<std::array<Real, 3>, std::uint32_t> ids;
        auto vertexId = [&](const Vec3 &v) {
            const std::array<Real, 3> key{v.x(), v.y(), v.z()};
            auto it = ids.find(key);
            if (it != ids.end())
                return it->second;
            verts_.push_back(v);
            const auto id = static_cast<std::uint32_t>(verts_.size() - 1);
            ids.emplace(key, id);
            return id;
        };
        tri_.reserve(soup.triangles.size());
        for (const auto &t : soup.triangles)
            tri_.push_back({{vertexId(t.v0), vertexId(t.v1), vertexId(t.v2)}, t.normal});
    }

    void buildPseudoNormals()
    {
        vertex_pseudo_.assign(verts_.size(), Vec3::Zero());
        for (const auto &t : tri_)
        {
            for (int k = 0; k < 3; ++k)
            {
                const Vec3 &v = verts_[t.v[k]];
                const Vec3 e1 = (verts_[t.v[(k + 1) % 3]] - v).normalized();
                const Vec3 e2 = (verts_[t.v[(k + 2) % 3]] - v).normalized();
                const Real angle = std::acos(std::clamp(e1.dot(e2), Real(-1), Real(1)));
                vertex_pseudo_[t.v[k]] += angle * t.normal;
            }
            for (int k = 0; k < 3; ++k)
            {
                const auto key = std::minmax(t.v[k], t.v[(k + 1) % 3]);
                // Eigen default-constructs uninitialized; insert an explicit zero
                auto [it, inserted] =
                    edge_pseudo_.try_emplace({key.first, key.second}, Vec3::Zero());
                it->second += t.normal;
            }
        }
        for (auto &n : vertex_pseudo_)
            if (n.norm() > 1e-14)
                n.normalize();
        for (auto &kv : edge_pseudo_)
            if (kv.second.norm() > 1e-14)
                kv.second.normalize();
    }

    Vec3 featurePseudoNormal(std::size_t tri_index, TriFeature f) const
    {
        const Tri &t = tri_[tri_index];
        auto edge = [&](int a, int b) {
            auto key = std::minmax(t.v[a], t.v[b]);
            return edge_pseudo_.at({key.first, key.second});
        };
        switch (f)
        {
        case TriFeature::Vertex0: return vertex_pseudo_[t.v[0]];
        case TriFeature::Vertex1: return vertex_pseudo_[t.v[1]];
        case TriFeature::Vertex2: return vertex_pseudo_[t.v[2]];
        case TriFeature::Edge01: return edge(0, 1);
        case TriFeature::Edge12: return edge(1, 2);
        case TriFeature::Edge20: return edge(2, 0);
        case TriFeature::Face: return t.normal;
        }
        return t.normal;
    }

    void buildBvh()
    {
        order_.resize(tri_.size());
        std::iota(order_.begin(), order_.end(), 0u);
        nodes_.reserve(2 * tri_.size());
        buildNode(0, static_cast<std::uint32_t>(order_.size()));
    }

    std::int32_t buildNode(std::uint32_t first, std::uint32_t count)
    {
        const auto index = static_cast<std::int32_t>(nodes_.size());
        nodes_.emplace_back();
        Vec3 lo = Vec3::Constant(std::numeric_limits<Real>::max());
        Vec3 hi = Vec3::Constant(std::numeric_limits<Real>::lowest());
        Vec3 clo = lo, chi = hi;
        for (std::uint32_t i = first; i < first + count; ++i)
        {
            const Tri &t = tri_[order_[i]];
            Vec3 tlo = verts_[t.v[0]].cwiseMin(verts_[t.v[1]]).cwiseMin(verts_[t.v[2]]);
            Vec3 thi = verts_[t.v[0]].cwiseMax(verts_[t.v[1]]).cwiseMax(verts_[t.v[2]]);
            lo = lo.cwiseMin(tlo);
            hi = hi.cwiseMax(thi);
            const Vec3 c = 0.5 * (tlo + thi);
            clo = clo.cwiseMin(c);
            chi = chi.cwiseMax(c);
        }
        nodes_[index].lo = lo;
        nodes_[index].hi = hi;
        if (count <= 4)
        {
            nodes_[index].first = first;
            nodes_[index].count = count;
            return index;
        }
        int axis;
        (chi - clo).maxCoeff(&axis);
        const std::uint32_t mid = first + count / 2;
        std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + first + count,
                         [&](std::uint32_t ia, std::uint32_t ib) {
                             return triCentroid(ia)[axis] < triCentroid(ib)[axis];
                         });
        const std::int32_t l = buildNode(first, mid - first);
        const std::int32_t r = buildNode(mid, first + count - mid);
        nodes_[index].left = l;
        nodes_[index].right = r;
        return index;
    }

    Vec3 triCentroid(std::uint32_t i) const
    {
        const Tri &t = tri_[i];
        return (verts_[t.v[0]] + verts_[t.v[1]] + verts_[t.v[2]]) / 3.0;
    }

    static Real boxDist2(const Vec3 &p, const Vec3 &lo, const Vec3 &hi)
    {
        Real d2 = 0;
        for (int k = 0; k < 3; ++k)
        {
            const Real v = std::max({lo[k] - p[k], Real(0), p[k] - hi[k]});
            d2 += v * v;
        }
        return d2;
    }

    void nearestRecurse(std::int32_t node, const Vec3 &p, SignedDistanceResult &best, Real &best_d2,
                        TriFeature &best_feature) const
    {
        const BvhNode &n = nodes_[node];
        if (n.left < 0)
        {
            for (std::uint32_t i = n.first; i < n.first + n.count; ++i)
            {
                const std::uint32_t ti = order_[i];
                const Tri &t = tri_[ti];
                TriFeature f;
                const Vec3 cp =
                    closestPointOnTriangle(p, verts_[t.v[0]], verts_[t.v[1]], verts_[t.v[2]], f);
                const Real d2 = (p - cp).squaredNorm();
                if (d2 < best_d2)
                {
                    best_d2 = d2;
                    best.closest = cp;
                    best.triangle = ti;
                    best_feature = f;
                }
            }
            return;
        }
        const Real dl = boxDist2(p, nodes_[n.left].lo, nodes_[n.left].hi);
        const Real dr = boxDist2(p, nodes_[n.right].lo, nodes_[n.right].hi);
        const std::int32_t near = dl <= dr ? n.left : n.right;
        const std::int32_t far = dl <= dr ? n.right : n.left;
        const Real dn = std::min(dl, dr), df = std::max(dl, dr);
        if (dn < best_d2)
            nearestRecurse(near, p, best, best_d2, best_feature);
        if (df < best_d2)
            nearestRecurse(far, p, best, best_d2, best_feature);
    }

    std::vector<Vec3> verts_;
    std::vector<Tri> tri_;
    std::vector<Vec3> vertex_pseudo_;
    std::map<std::pair<std::uint32_t, std::uint32_t>, Vec3> edge_pseudo_;
    std::vector<std::uint32_t> order_;
    std::vector<BvhNode> nodes_;
};

/// Signed distance of a single point against a soup (builds the acceleration
/// structure; use MeshDistance directly for repeated queries).
inline SignedDistanceResult signedDistance(const Vec3 &p, const TriangleSoup &soup)
{
    return MeshDistance(soup).query(p);
}

} // namespace mosph
#endif // MOSPH_MESH_DISTANCE_HPP
