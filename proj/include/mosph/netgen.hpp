/**
 * @file netgen.hpp
 * @brief Fractal network growth on a level-set surface.
 *
 * Branches grow segment by segment: directions chain from the previous
 * segment plus a repulsion gradient, every new node is projected onto the
 * surface and collision-checked against the existing network through a
 * cell-linked list (mother and brother branches excluded).
 */
#ifndef MOSPH_NETGEN_HPP
#define MOSPH_NETGEN_HPP

#include "cll.hpp"
#include "core.hpp"
#include "level_set.hpp"
#include "network.hpp"
#include "rng.hpp"

#include <cmath>
#include <unordered_set>

namespace mosph
{

struct GrowthParams
{
    int n_iterations = 0;        ///< bifurcation generations after the first branch
    int nodes_per_branch = 10;   ///< N: nodes created per child branch (first branch: N total)
    Real l_seg = 1.0;            ///< segment length (mm)
    Real alpha0 = 0.4;           ///< base branching angle (rad)
    Real repulsion_weight = 0.1; ///< w in the growth-direction rule
    Real sigma = -1.0;           ///< collision threshold; defaults to 5 * l_seg
    std::uint64_t seed = 0;
    Vec3 initial_node = Vec3::Zero();
    Vec3 initial_direction = Vec3::UnitX();

    Real sigmaValue() const { return sigma > 0 ? sigma : 5.0 * l_seg; }

    void validate() const
    {
        if (!(l_seg > 0))
            throw ConfigError("growth: l_seg must be positive");
        if (!(sigmaValue() > 0))
            throw ConfigError("growth: sigma must be positive");
        if (nodes_per_branch < 2)
            throw ConfigError("growth: nodes_per_branch must be at least 2");
        if (n_iterations < 0)
            throw ConfigError("growth: n_iterations must be non-negative");
        if (std::abs(initial_direction.norm() - 1.0) > 1e-6)
            throw ConfigError("growth: initial_direction must be a unit vector");
    }
};

/// Growth direction: rotate d0 by alpha in the tangent plane spanned with the
/// surface normal N0, add the weighted repulsion gradient, normalize.
inline Vec3 childDirection(const Vec3 &d0, const Vec3 &N0, Real alpha, Real w, const Vec3 &d_grad)
{
    const Vec3 rotated = d0 * std::cos(alpha) + d0.cross(N0) * std::sin(alpha);
    const Vec3 sum = rotated + w * d_grad;
    const Real n = sum.norm();
    if (n < Real(1e-12))
        throw NumericalError("degenerate growth direction: repulsion cancels rotated direction");
    return sum / n;
}

/// Central-difference gradient of the nearest-node distance field. Returns the
/// zero vector when no non-excluded node exists (first branch).
template <typename Excluded>
Vec3 distanceGradient(const Vec3 &p, const CellList &cll, Excluded &&excluded, Real eps)
{
    auto dist = [&](const Vec3 &q) -> Real {
        const auto hit = cll.nearest(q, excluded);
        return hit ? hit->distance : Real(-1);
    };
    Vec3 grad = Vec3::Zero();
    for (int a = 0; a < 3; ++a)
    {
        Vec3 e = Vec3::Zero();
        e[a] = eps;
        const Real dp = dist(p + e);
        const Real dm = dist(p - e);
        if (dp < 0 || dm < 0)
            return Vec3::Zero();
        grad[a] = (dp - dm) / (2.0 * eps);
    }
    return grad;
}

/// Single application of r - phi(r) * N(r). Skipped (with a run-log flag) when
/// the interpolated normal degenerates at a level-set ridge.
inline Vec3 projectNode(const Vec3 &p, const LevelSetGrid &grid)
{
    const Real phi = grid.interpPhi(p);
    const Vec3 n = grid.interpNormal(p);
    if (n.isZero())
    {
        RunLog::instance().warn("projection skipped: degenerate level-set normal");
        return p;
    }
    return p - phi * n;
}

/// True iff the nearest non-excluded node is within sigma (inclusive).
template <typename Excluded>
bool collisionCheck(const Vec3 &p_new, const CellList &cll, Excluded &&excluded, Real sigma)
{
    return cll.hasWithin(p_new, sigma, excluded);
}

namespace detail
{

struct GrowContext
{
    NetworkTree &tree;
    CellList &cll;
    const LevelSetGrid &grid;
    const GrowthParams &params;

    std::uint32_t addNode(const Vec3 &p, const Vec3 &dir, std::uint32_t branch)
    {
        const auto id = static_cast<std::uint32_t>(tree.node_pos.size());
        tree.node_pos.push_back(p);
        tree.node_dir.push_back(dir);
        tree.node_normal.push_back(grid.contains(p) ? grid.interpNormal(p) : Vec3::Zero());
        tree.node_branch.push_back(branch);
        cll.insert(id, p);
        return id;
    }
};

} // namespace detail

/// Grows a network per the fractal rule. Deterministic: identical params and
/// grid give a byte-identical tree.
inline NetworkTree growNetwork(const LevelSetGrid &grid, const GrowthParams &params)
{
    params.validate();
    const Real sigma = params.sigmaValue();
    const Real cll_cell = std::max(Real(2.6) * params.l_seg, sigma);

    NetworkTree tree;
    tree.l_seg = params.l_seg;
    CellList cll(cll_cell);
    Xoshiro256 rng(params.seed);
    detail::GrowContext ctx{tree, cll, grid, params};

    auto excludedIn = [&](const std::unordered_set<std::uint32_t> &set) {
        return [&set](std::uint32_t id) { return set.count(id) != 0; };
    };

    // Grows one branch: `start` is the inherited node, `d_first` the direction
    // of its first segment before repulsion, `n_new` the node budget. Returns
    // the branch id, or -1 when the very first node collides.
    auto growBranch = [&](std::uint32_t start, const Vec3 &d_first, const Vec3 &normal0, Real alpha,
                          int n_new, std::int32_t mother,
                          std::unordered_set<std::uint32_t> &exclusions) -> std::int32_t {
        Branch branch;
        branch.mother = mother;
        branch.node_ids.push_back(start);

        Vec3 d_prev = d_first;
        Vec3 n_prev = normal0;
        Vec3 pos_prev = tree.node_pos[start];
        bool collided = false;
        for (int j = 0; j < n_new; ++j)
        {
            const Vec3 d_grad =
                distanceGradient(pos_prev, cll, excludedIn(exclusions), params.l_seg);
            // alpha rotates only the first segment of a child branch
            Vec3 dir;
            Real alpha_j = j == 0 ? alpha : Real(0);
            for (int attempt = 0;; ++attempt)
            {
                try
                {
                    dir = childDirection(d_prev, n_prev, alpha_j, params.repulsion_weight, d_grad);
                    break;
                }
                catch (const NumericalError &)
                {
                    if (attempt >= 8)
                        throw;
                    alpha_j += 0.01 * (params.alpha0 != 0 ? params.alpha0 : Real(1));
                }
            }
            Vec3 pos = pos_prev + params.l_seg * dir;
            pos = projectNode(pos, grid);
            if (collisionCheck(pos, cll, excludedIn(exclusions), sigma))
            {
                collided = true;
                break;
            }
            const std::uint32_t id =
                ctx.addNode(pos, dir, static_cast<std::uint32_t>(tree.branches.size()));
            branch.node_ids.push_back(id);
            exclusions.insert(id);
            d_prev = dir;
            n_prev = tree.node_normal[id].isZero() ? n_prev : tree.node_normal[id];
            pos_prev = pos;
        }
        branch.terminated_by_collision = collided;
        if (branch.node_ids.size() == 1 && mother >= 0)
            return -1; // nothing grew; drop the record
        const auto id = static_cast<std::int32_t>(tree.branches.size());
        tree.branches.push_back(std::move(branch));
        return id;
    };

    // First branch: seed node plus N-1 segments from the prescribed direction.
    {
        if (!grid.contains(params.initial_node))
            throw RangeError("growth seed lies outside the level-set grid");
        const Vec3 seed_pos = projectNode(params.initial_node, grid);
        if (!grid.contains(seed_pos))
            throw RangeError("projected growth seed lies outside the level-set grid");
        const std::uint32_t seed_id = ctx.addNode(seed_pos, params.initial_direction, 0);
        std::unordered_set<std::uint32_t> exclusions{seed_id};
        const Vec3 n0 = tree.node_normal[seed_id].isZero() ? Vec3::UnitZ() : tree.node_normal[seed_id];
        const std::int32_t b0 = growBranch(seed_id, params.initial_direction, n0, 0.0,
                                           params.nodes_per_branch - 1, -1, exclusions);
        if (b0 < 0 || tree.branches[b0].terminated_by_collision)
            throw NumericalError("first branch collided immediately: degenerate seed placement");
    }

    std::vector<std::uint32_t> to_grow{0};
    for (int iter = 0; iter < params.n_iterations; ++iter)
    {
        fisherYatesShuffle(to_grow, rng);
        std::vector<std::uint32_t> next;
        for (const std::uint32_t mother_id : to_grow)
        {
            const std::uint32_t tip = tree.branches[mother_id].tip();
            const Vec3 d0 = tree.node_dir[tip];
            Vec3 n0 = tree.node_normal[tip];
            if (n0.isZero())
                n0 = Vec3::UnitZ();

            std::int32_t sibling = -1;
            for (int child = 0; child < 2; ++child)
            {
                Real alpha = params.alpha0 * (1.0 + 0.1 * rng.uniformPm1());
                if (child == 1)
                    alpha = -alpha;

                std::unordered_set<std::uint32_t> exclusions;
                for (const auto n : tree.branches[mother_id].node_ids)
                    exclusions.insert(n);
                if (sibling >= 0)
                    for (const auto n : tree.branches[sibling].node_ids)
                        exclusions.insert(n);

                const std::int32_t child_id = growBranch(tip, d0, n0, alpha,
                                                         params.nodes_per_branch, mother_id,
                                                         exclusions);
                if (child_id < 0)
                    continue;
                tree.branches[mother_id].children.push_back(static_cast<std::uint32_t>(child_id));
                if (!tree.branches[child_id].terminated_by_collision)
                    next.push_back(static_cast<std::uint32_t>(child_id));
                if (child == 0)
                    sibling = child_id;
            }
        }
        to_grow = std::move(next);
        if (to_grow.empty())
            break;
    }

    tree.rebuildTerminals();
    return tree;
}

} // namespace mosph
#endif // MOSPH_NETGEN_HPP
