/**
 * @file coupling.hpp
 * @brief Multi-order coupling: terminal (PMJ) network particles inject current
 *        flux into myocardium particles inside their 2h influence spheres.
 *
 * One-way by construction: network states are read, never written.
 */
#ifndef MOSPH_COUPLING_HPP
#define MOSPH_COUPLING_HPP

#include "cll.hpp"
#include "core.hpp"
#include "kernels.hpp"
#include "myocardium.hpp"
#include "reduced_sph.hpp"

#include <fstream>
#include <vector>

namespace mosph
{

struct PmjMap
{
    std::vector<std::uint32_t> terminal_ids; ///< network particle ids acting as PMJs
    // per-terminal CSR of influenced myocardium particles
    std::vector<std::uint32_t> offset;
    std::vector<std::uint32_t> myo_id;
    std::vector<Real> r0;
    std::vector<Real> dwdr; ///< full-order 3D kernel derivative at r0

    std::size_t terminalCount() const { return terminal_ids.size(); }
    std::size_t pairCount() const { return myo_id.size(); }
};

/// Builds the PMJ influence map in the reference configuration: a CLL query of
/// radius 2h around every terminal particle. Terminals with no myocardium
/// neighbor are logged as orphans, not fatal.
inline PmjMap buildPmjMap(const ReducedParticleSet &network, const MyoParticleSet &myo, Real h)
{
    const KernelSpec spec{h, 3};
    const Real cutoff = spec.cutoff();
    CellList cll(cutoff);
    for (std::size_t i = 0; i < myo.size(); ++i)
        cll.insert(static_cast<std::uint32_t>(i), myo.ref_pos[i]);

    PmjMap map;
    map.offset.push_back(0);
    std::vector<std::uint32_t> found;
    for (std::size_t i = 0; i < network.size(); ++i)
    {
        if (!network.terminal[i])
            continue;
        map.terminal_ids.push_back(static_cast<std::uint32_t>(i));
        found.clear();
        cll.collectWithin(network.ref_pos[i], cutoff, found);
        std::sort(found.begin(), found.end());
        for (const auto a : found)
        {
            const Real r = (myo.ref_pos[a] - network.ref_pos[i]).norm();
            map.myo_id.push_back(a);
            map.r0.push_back(r);
            map.dwdr.push_back(w_radial_derivative(r, spec));
        }
        if (found.empty())
            RunLog::instance().warn("orphan PMJ: terminal particle " + std::to_string(i) +
                                    " has no myocardium neighbor within 2h");
        map.offset.push_back(static_cast<std::uint32_t>(map.myo_id.size()));
    }
    return map;
}

/// Current flux per myocardium particle:
///   I_a = 2 (d^M_iso + d^P_iso) sum_i V0_i (Vm_a - Vm_i) (1/r0) dW/dr
/// over the PMJ terminals i whose influence sphere contains particle a.
/// Particles outside all influence spheres get exactly zero.
inline void pmjFlux(const PmjMap &map, const ReducedParticleSet &network, const MyoParticleSet &myo,
                    std::vector<Real> &flux)
{
    flux.assign(myo.size(), 0.0);
    const Real factor = 2.0 * (myo.d_iso + network.d_iso);
    for (std::size_t t = 0; t < map.terminalCount(); ++t)
    {
        const std::uint32_t i = map.terminal_ids[t];
        const Real vm_i = network.vm[i];
        const Real v0_i = network.volume[i];
        for (std::uint32_t kk = map.offset[t]; kk < map.offset[t + 1]; ++kk)
        {
            const std::uint32_t a = map.myo_id[kk];
            const Real r = map.r0[kk];
            if (r <= 0)
                continue;
            flux[a] += factor * v0_i * (myo.vm[a] - vm_i) / r * map.dwdr[kk];
        }
    }
}

/// Inspection export: one CSV row per (terminal, myocardium) pair.
inline void savePmjMap(const PmjMap &map, const std::string &path)
{
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot open PMJ map file: " + path);
    out << "terminal_id,myo_id,distance_mm\n";
    out.precision(12);
    for (std::size_t t = 0; t < map.terminalCount(); ++t)
        for (std::uint32_t kk = map.offset[t]; kk < map.offset[t + 1]; ++kk)
            out << map.terminal_ids[t] << ',' << map.myo_id[kk] << ',' << map.r0[kk] << "\n";
}

} // namespace mosph
#endif // MOSPH_COUPLING_HPP
