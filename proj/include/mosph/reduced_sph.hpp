/**
 * @file reduced_sph.hpp
 * @brief Reduced-order particle discretization of the network monodomain
 *        equation: one particle per tree node, topology-derived neighbor
 *        lists, 1D Wendland kernel diffusion.
 */
#ifndef MOSPH_REDUCED_SPH_HPP
#define MOSPH_REDUCED_SPH_HPP

#include "aliev_panfilov.hpp"
#include "core.hpp"
#include "kernels.hpp"
#include "network.hpp"

#include <algorithm>
#include <fstream>
#include <vector>

namespace mosph
{

struct ReducedParticleSet
{
    std::vector<Vec3> ref_pos;
    std::vector<Real> volume; ///< l_seg^3 per particle (mm^3)
    std::vector<Real> vm, w;
    std::vector<std::uint8_t> terminal; ///< PMJ flags

    Real l_seg = 0;  ///< 1D integration measure per particle (mm)
    Real h = 0;      ///< smoothing length = 1.3 l_seg
    Real d_iso = 0;  ///< d^P_iso (mm^2/ms)
    ApParams ap;

    // topology-derived neighbor lists (CSR) with precomputed kernel quantities
    std::vector<std::uint32_t> nbr_offset;
    std::vector<std::uint32_t> nbr_id;
    std::vector<Real> nbr_r0;
    std::vector<Real> nbr_dwdr;

    std::size_t size() const { return ref_pos.size(); }

    std::size_t neighborCount(std::size_t i) const { return nbr_offset[i + 1] - nbr_offset[i]; }
};

/// Converts each tree node to one particle and builds the network-based
/// neighbor lists: up to two predecessors along the chain plus the one-step
/// and two-step successors (which fan into child branches at junctions).
/// Mother/child stitching follows from chains sharing the junction node;
/// brother branches never appear in each other's lists.
inline ReducedParticleSet particlesFromNetwork(const NetworkTree &tree, Real h, Real d_iso)
{
    if (tree.nodeCount() == 0)
        throw ConfigError("cannot build particles from an empty network");
    for (std::size_t b = 0; b < tree.branches.size(); ++b)
    {
        const Branch &br = tree.branches[b];
        if (!br.terminated_by_collision && br.node_ids.size() < 3)
            throw ConfigError("branch " + std::to_string(b) +
                              " has fewer than 3 nodes: stencil undefined");
    }

    ReducedParticleSet set;
    const std::size_t n = tree.nodeCount();
    set.ref_pos = tree.node_pos;
    set.l_seg = tree.l_seg;
    set.h = h;
    set.d_iso = d_iso;
    set.volume.assign(n, tree.l_seg * tree.l_seg * tree.l_seg);
    set.vm.assign(n, 0.0);
    set.w.assign(n, 0.0);
    set.terminal.assign(n, 0);
    for (const auto t : tree.terminal_node_ids)
        set.terminal[t] = 1;

    const auto pred = tree.predecessors();
    const auto succ = tree.successors();

    const KernelSpec spec{h, 1};
    set.nbr_offset.assign(n + 1, 0);
    std::vector<std::uint32_t> nbrs;
    for (std::size_t i = 0; i < n; ++i)
    {
        nbrs.clear();
        if (pred[i] >= 0)
        {
            nbrs.push_back(static_cast<std::uint32_t>(pred[i]));
            if (pred[pred[i]] >= 0)
                nbrs.push_back(static_cast<std::uint32_t>(pred[pred[i]]));
        }
        for (const auto s1 : succ[i])
        {
            nbrs.push_back(s1);
            for (const auto s2 : succ[s1])
                nbrs.push_back(s2);
        }
        std::sort(nbrs.begin(), nbrs.end());
        nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
        for (const auto j : nbrs)
        {
            set.nbr_id.push_back(j);
            const Real r0 = (tree.node_pos[i] - tree.node_pos[j]).norm();
            set.nbr_r0.push_back(r0);
            set.nbr_dwdr.push_back(w_radial_derivative(r0, spec));
        }
        set.nbr_offset[i + 1] = static_cast<std::uint32_t>(set.nbr_id.size());
    }
    return set;
}

/// Network diffusion rate:
///   dVm_i/dt = (2 d_iso / Cm) sum_j m_j (Vm_i - Vm_j) (1/r0) dW/dr
/// with the 1D line measure m_j = l_seg per particle. Free ends see truncated
/// stencils and are therefore flux-free.
inline void networkDiffusionRate(const ReducedParticleSet &set, std::vector<Real> &rate)
{
    const std::size_t n = set.size();
    rate.assign(n, 0.0);
    const Real factor = 2.0 * set.d_iso / set.ap.cm * set.l_seg;
    for (std::size_t i = 0; i < n; ++i)
    {
        Real sum = 0;
        for (std::uint32_t kk = set.nbr_offset[i]; kk < set.nbr_offset[i + 1]; ++kk)
        {
            const std::uint32_t j = set.nbr_id[kk];
            const Real r0 = set.nbr_r0[kk];
            if (r0 <= 0)
                continue;
            sum += (set.vm[i] - set.vm[j]) / r0 * set.nbr_dwdr[kk];
        }
        rate[i] = factor * sum;
    }
}

/// One Strang step S_r(dt/2) S_d(dt) S_r(dt/2) on the network particles.
/// Stimuli are re-applied after every substep at time t_end_of_step.
inline void networkStrangStep(ReducedParticleSet &set, Real dt, Real t_step_end,
                              const std::vector<Stimulus> &stimuli, std::vector<Real> &rate_scratch)
{
    auto clamp = [&]() {
        for (const auto &s : stimuli)
            applyStimulus(set, s, t_step_end);
    };
    const std::size_t n = set.size();
    for (std::size_t i = 0; i < n; ++i)
    {
        const ApState out = reactionSubstep({set.vm[i], set.w[i]}, 0.5 * dt, set.ap);
        set.vm[i] = out.vm;
        set.w[i] = out.w;
    }
    clamp();
    networkDiffusionRate(set, rate_scratch);
    for (std::size_t i = 0; i < n; ++i)
        set.vm[i] += dt * rate_scratch[i];
    clamp();
    for (std::size_t i = 0; i < n; ++i)
    {
        const ApState out = reactionSubstep({set.vm[i], set.w[i]}, 0.5 * dt, set.ap);
        set.vm[i] = out.vm;
        set.w[i] = out.w;
    }
    clamp();
}

/// Snapshot: edge-list format augmented with Vm and w columns.
inline void saveNetworkSnapshot(const ReducedParticleSet &set, const NetworkTree &tree,
                                const std::string &path)
{
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot open network snapshot file: " + path);
    out.precision(12);
    out << "# mosph network snapshot: nodes " << set.size() << "\n";
    out << "# n <id> <x> <y> <z> <branch> <is_terminal> <Vm> <w>\n";
    for (std::size_t i = 0; i < set.size(); ++i)
        out << "n " << i << ' ' << set.ref_pos[i].x() << ' ' << set.ref_pos[i].y() << ' '
            << set.ref_pos[i].z() << ' ' << tree.node_branch[i] << ' ' << int(set.terminal[i])
            << ' ' << set.vm[i] << ' ' << set.w[i] << "\n";
    for (const auto &e : tree.edges())
        out << "e " << e.first << ' ' << e.second << "\n";
}

} // namespace mosph
#endif // MOSPH_REDUCED_SPH_HPP
