/**
 * @file myocardium.hpp
 * @brief Full-order myocardium particles: lattice construction, reference
 *        neighbor lists, anisotropic monodomain diffusion, PMJ flux intake.
 */
#ifndef MOSPH_MYOCARDIUM_HPP
#define MOSPH_MYOCARDIUM_HPP

#include "aliev_panfilov.hpp"
#include "cll.hpp"
#include "core.hpp"
#include "kernels.hpp"

#include <functional>
#include <vector>

namespace mosph
{

/// Assigns orthonormal fiber/sheet directions to a reference position.
using FiberRule = std::function<void(const Vec3 &, Vec3 &fiber, Vec3 &sheet)>;

inline FiberRule constantFiberRule(const Vec3 &fiber, const Vec3 &sheet)
{
    return [f = fiber.normalized(), s = sheet.normalized()](const Vec3 &, Vec3 &fo, Vec3 &so) {
        fo = f;
        so = s;
    };
}

struct MyoParticleSet
{
    std::vector<Vec3> ref_pos;
    std::vector<Real> volume; ///< dp0^3
    std::vector<Real> vm, w;
    std::vector<Vec3> fiber, sheet;

    Real dp0 = 0;
    Real h = 0; ///< 1.3 dp0
    Real d_iso = 0, d_ani = 0;
    ApParams ap;

    // reference-configuration neighbor lists (CSR)
    std::vector<std::uint32_t> nbr_offset;
    std::vector<std::uint32_t> nbr_id;
    std::vector<Real> nbr_r0;
    std::vector<Real> nbr_dwdr;
    std::vector<Real> nbr_dcoef; ///< (2/Cm) V_j dbar_ij (1/r0) dW/dr, frozen at build
    std::vector<Vec3> nbr_e0;    ///< unit i->j direction; kept for mechanics

    std::size_t size() const { return ref_pos.size(); }
    std::size_t neighborCount(std::size_t i) const { return nbr_offset[i + 1] - nbr_offset[i]; }
};

/// Uniform lattice over [0,extent] with spacing dp0 (cell-centered sites).
/// Optional keep predicate carves implicit shapes out of the box.
inline MyoParticleSet buildLattice(const Vec3 &extent, Real dp0, const FiberRule &fibers,
                                   int min_axis_particles = 5,
                                   const std::function<bool(const Vec3 &)> &keep = {},
                                   const Vec3 &origin = Vec3::Zero())
{
    if (!(dp0 > 0))
        throw ConfigError("lattice spacing dp0 must be positive");
    Vec3i counts;
    for (int a = 0; a < 3; ++a)
    {
        counts[a] = static_cast<int>(std::llround(extent[a] / dp0));
        if (counts[a] < min_axis_particles)
            throw ConfigError("lattice resolution too coarse along axis " + std::to_string(a) +
                              ": " + std::to_string(counts[a]) + " < " +
                              std::to_string(min_axis_particles) + " particles");
    }
    MyoParticleSet set;
    set.dp0 = dp0;
    set.h = 1.3 * dp0;
    set.ref_pos.reserve(std::size_t(counts.x()) * counts.y() * counts.z());
    for (int i = 0; i < counts.x(); ++i)
        for (int j = 0; j < counts.y(); ++j)
            for (int k = 0; k < counts.z(); ++k)
            {
                const Vec3 p = origin + dp0 * Vec3(i + 0.5, j + 0.5, k + 0.5);
                if (keep && !keep(p))
                    continue;
                set.ref_pos.push_back(p);
            }
    if (set.ref_pos.empty())
        throw ConfigError("lattice predicate kept zero particles");
    const std::size_t n = set.ref_pos.size();
    set.volume.assign(n, dp0 * dp0 * dp0);
    set.vm.assign(n, 0.0);
    set.w.assign(n, 0.0);
    set.fiber.resize(n);
    set.sheet.resize(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        fibers(set.ref_pos[i], set.fiber[i], set.sheet[i]);
        if (std::abs(set.fiber[i].norm() - 1.0) > 1e-9 || std::abs(set.sheet[i].norm() - 1.0) > 1e-9 ||
            std::abs(set.fiber[i].dot(set.sheet[i])) > 1e-9)
            throw ConfigError("fiber rule must return orthonormal fiber/sheet directions");
    }
    return set;
}

/// Builds symmetric reference neighbor lists with cutoff 2h via the CLL and
/// freezes the pair diffusion coefficients
///   dbar_ij = e0 . Dbar . e0,  Dbar = (D_i + D_j)/2,  D = d_iso I + d_ani f (x) f.
inline void buildMyoNeighborLists(MyoParticleSet &set, bool with_geometry_pairs = false)
{
    const std::size_t n = set.size();
    const KernelSpec spec{set.h, 3};
    const Real cutoff = spec.cutoff();
    CellList cll(cutoff);
    for (std::size_t i = 0; i < n; ++i)
        cll.insert(static_cast<std::uint32_t>(i), set.ref_pos[i]);

    set.nbr_offset.assign(n + 1, 0);
    set.nbr_id.clear();
    set.nbr_r0.clear();
    set.nbr_dwdr.clear();
    set.nbr_dcoef.clear();
    set.nbr_e0.clear();

    std::vector<std::uint32_t> found;
    for (std::size_t i = 0; i < n; ++i)
    {
        found.clear();
        cll.collectWithin(set.ref_pos[i], cutoff, found);
        std::sort(found.begin(), found.end());
        for (const auto j : found)
        {
            if (j == i)
                continue;
            const Vec3 d = set.ref_pos[j] - set.ref_pos[i];
            const Real r0 = d.norm();
            const Real dwdr = w_radial_derivative(r0, spec);
            const Vec3 e0 = d / r0;
            const Real pf = e0.dot(set.fiber[i]);
            const Real pg = e0.dot(set.fiber[j]);
            const Real dbar = set.d_iso + 0.5 * set.d_ani * (pf * pf + pg * pg);
            set.nbr_id.push_back(j);
            set.nbr_r0.push_back(r0);
            set.nbr_dwdr.push_back(dwdr);
            set.nbr_dcoef.push_back(2.0 / set.ap.cm * set.volume[j] * dbar / r0 * dwdr);
            if (with_geometry_pairs)
                set.nbr_e0.push_back(e0);
        }
        set.nbr_offset[i + 1] = static_cast<std::uint32_t>(set.nbr_id.size());
    }
}

/// Anisotropic diffusion rate dVm_i/dt from the frozen pair coefficients.
inline void anisoDiffusionRate(const MyoParticleSet &set, std::vector<Real> &rate)
{
    const std::size_t n = set.size();
    rate.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
    {
        Real sum = 0;
        const Real vmi = set.vm[i];
        for (std::uint32_t kk = set.nbr_offset[i]; kk < set.nbr_offset[i + 1]; ++kk)
            sum += set.nbr_dcoef[kk] * (vmi - set.vm[set.nbr_id[kk]]);
        rate[i] = sum;
    }
}

/// One Strang step on the myocardium with an optional external current flux
/// (PMJ injection) added to the diffusion stage as flux/Cm.
inline void myoStrangStep(MyoParticleSet &set, Real dt, Real t_step_end,
                          const std::vector<Stimulus> &stimuli, const std::vector<Real> *flux,
                          std::vector<Real> &rate_scratch)
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
    anisoDiffusionRate(set, rate_scratch);
    if (flux)
    {
        const Real inv_cm = 1.0 / set.ap.cm;
        for (std::size_t i = 0; i < n; ++i)
            set.vm[i] += dt * (rate_scratch[i] + (*flux)[i] * inv_cm);
    }
    else
    {
        for (std::size_t i = 0; i < n; ++i)
            set.vm[i] += dt * rate_scratch[i];
    }
    clamp();
    for (std::size_t i = 0; i < n; ++i)
    {
        const ApState out = reactionSubstep({set.vm[i], set.w[i]}, 0.5 * dt, set.ap);
        set.vm[i] = out.vm;
        set.w[i] = out.w;
    }
    clamp();
}

/// Nearest particle to a point (probe placement).
inline std::uint32_t nearestParticle(const std::vector<Vec3> &positions, const Vec3 &p)
{
    std::size_t best = 0;
    Real best_d2 = std::numeric_limits<Real>::max();
    for (std::size_t i = 0; i < positions.size(); ++i)
    {
        const Real d2 = (positions[i] - p).squaredNorm();
        if (d2 < best_d2)
        {
            best_d2 = d2;
            best = i;
        }
    }
    return static_cast<std::uint32_t>(best);
}

} // namespace mosph
#endif // MOSPH_MYOCARDIUM_HPP
