/**
 * @file cll.hpp
 * @brief Cell-linked list over 3D points: O(1) insertion, ring-bounded queries.
 *
 * Cells are keyed on a sparse hash, so the domain needs no a-priori bounds and
 * nodes can be added while a network grows without rebuilding the structure.
 */
#ifndef MOSPH_CLL_HPP
#define MOSPH_CLL_HPP

#include "core.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <unordered_map>
#include <vector>

namespace mosph
{

struct NearestHit
{
    std::uint32_t id;
    Real distance;
};

class CellList
{
  public:
    explicit CellList(Real cell_size) : cell_size_(cell_size)
    {
        if (!(cell_size > 0))
            throw ConfigError("cell-linked list cell size must be positive");
    }

    Real cellSize() const { return cell_size_; }
    std::size_t size() const { return positions_.size(); }
    const Vec3 &position(std::uint32_t id) const { return positions_[id]; }

    /// Ids are expected to be dense and inserted in increasing order.
    void insert(std::uint32_t id, const Vec3 &p)
    {
        if (id != positions_.size())
            throw ConfigError("cell-linked list ids must be inserted densely");
        positions_.push_back(p);
        const Key key = keyOf(p);
        cells_[key].push_back(id);
        if (size() == 1)
        {
            lo_ = hi_ = cellCoords(p);
        }
        else
        {
            const Vec3i c = cellCoords(p);
            lo_ = lo_.cwiseMin(c);
            hi_ = hi_.cwiseMax(c);
        }
    }

    /// Globally nearest stored point not rejected by `excluded`, found by an
    /// expanding ring search. Equals brute force over all points.
    template <typename Excluded>
    std::optional<NearestHit> nearest(const Vec3 &p, Excluded &&excluded) const
    {
        if (positions_.empty())
            return std::nullopt;
        const Vec3i center = cellCoords(p);
        const int max_ring = maxRingFrom(center);
        Real best_d2 = std::numeric_limits<Real>::max();
        std::uint32_t best_id = 0;
        bool found = false;
        for (int ring = 0; ring <= max_ring; ++ring)
        {
            // Ring `ring` cells hold points no closer than (ring-1)*cell_size.
            if (found && best_d2 <= sq(Real(ring - 1) * cell_size_))
                break;
            forEachRingCell(center, ring, [&](const Key key) {
                auto it = cells_.find(key);
                if (it == cells_.end())
                    return;
                for (const std::uint32_t id : it->second)
                {
                    if (excluded(id))
                        continue;
                    const Real d2 = (positions_[id] - p).squaredNorm();
                    if (d2 < best_d2)
                    {
                        best_d2 = d2;
                        best_id = id;
                        found = true;
                    }
                }
            });
        }
        if (!found)
            return std::nullopt;
        return NearestHit{best_id, std::sqrt(best_d2)};
    }

    std::optional<NearestHit> nearest(const Vec3 &p) const
    {
        return nearest(p, [](std::uint32_t) { return false; });
    }

    /// True iff some non-excluded point lies within `radius` (inclusive).
    template <typename Excluded>
    bool hasWithin(const Vec3 &p, Real radius, Excluded &&excluded) const
    {
        const Real r2 = radius * radius;
        const Vec3i center = cellCoords(p);
        const int rings = static_cast<int>(std::floor(radius / cell_size_)) + 1;
        const int max_ring = std::min(rings, maxRingFrom(center));
        for (int ring = 0; ring <= max_ring; ++ring)
        {
            bool hit = false;
            forEachRingCell(center, ring, [&](const Key key) {
                if (hit)
                    return;
                auto it = cells_.find(key);
                if (it == cells_.end())
                    return;
                for (const std::uint32_t id : it->second)
                {
                    if (excluded(id))
                        continue;
                    if ((positions_[id] - p).squaredNorm() <= r2)
                    {
                        hit = true;
                        return;
                    }
                }
            });
            if (hit)
                return true;
        }
        return false;
    }

    /// All stored ids within `radius` (exclusive of exact cutoff), appended to `out`.
    void collectWithin(const Vec3 &p, Real radius, std::vector<std::uint32_t> &out) const
    {
        const Real r2 = radius * radius;
        const Vec3i center = cellCoords(p);
        const int rings = static_cast<int>(std::floor(radius / cell_size_)) + 1;
        const int max_ring = std::min(rings, maxRingFrom(center));
        for (int ring = 0; ring <= max_ring; ++ring)
            forEachRingCell(center, ring, [&](const Key key) {
                auto it = cells_.find(key);
                if (it == cells_.end())
                    return;
                for (const std::uint32_t id : it->second)
                    if ((positions_[id] - p).squaredNorm() < r2)
                        out.push_back(id);
            });
    }

  private:
    using Key = std::int64_t;

    Vec3i cellCoords(const Vec3 &p) const
    {
        return Vec3i(static_cast<int>(std::floor(p.x() / cell_size_)),
                     static_cast<int>(std::floor(p.y() / cell_size_)),
                     static_cast<int>(std::floor(p.z() / cell_size_)));
    }

    static Key pack(const Vec3i &c)
    {
        // 21 bits per axis, offset to stay positive
        const Key bias = Key(1) << 20;
        return ((Key(c.x()) + bias) << 42) | ((Key(c.y()) + bias) << 21) | (Key(c.z()) + bias);
    }

    Key keyOf(const Vec3 &p) const { return pack(cellCoords(p)); }

    static Real sq(Real v) { return v * v; }

    /// Largest Chebyshev ring around `center` that can touch an occupied cell.
    int maxRingFrom(const Vec3i &center) const
    {
        int m = 0;
        for (int a = 0; a < 3; ++a)
            m = std::max({m, std::abs(center[a] - lo_[a]), std::abs(hi_[a] - center[a])});
        return m;
    }

    template <typename Fn>
    void forEachRingCell(const Vec3i &center, int ring, Fn &&fn) const
    {
        if (ring == 0)
        {
            fn(pack(center));
            return;
        }
        for (int dx = -ring; dx <= ring; ++dx)
            for (int dy = -ring; dy <= ring; ++dy)
                for (int dz = -ring; dz <= ring; ++dz)
                {
                    if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring)
                        continue;
                    fn(pack(Vec3i(center.x() + dx, center.y() + dy, center.z() + dz)));
                }
    }

    Real cell_size_;
    std::vector<Vec3> positions_;
    std::unordered_map<Key, std::vector<std::uint32_t>> cells_;
    Vec3i lo_ = Vec3i::Zero(), hi_ = Vec3i::Zero();
};

} // namespace mosph
#endif // MOSPH_CLL_HPP
