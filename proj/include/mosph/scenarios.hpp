/**
 * @file scenarios.hpp
 * @brief Built-in run scenarios and the assembly of particle systems from a
 *        SimConfig: geometry, network, coupling map, stimuli, probes.
 *
 * Built-ins: fiber, cuboid, lv-healthy, lv-pathological, lv-nonetwork.
 * The lv-* scenarios use an analytic truncated-ellipsoid shell with a
 * rule-based transmural fiber helix (+60 deg endo to -60 deg epi).
 */
#ifndef MOSPH_SCENARIOS_HPP
#define MOSPH_SCENARIOS_HPP

#include "config.hpp"
#include "coupling.hpp"
#include "level_set.hpp"
#include "mechanics.hpp"
#include "mesh.hpp"
#include "myocardium.hpp"
#include "netgen.hpp"
#include "network.hpp"
#include "reduced_sph.hpp"

#include <chrono>
#include <optional>

namespace mosph
{

struct Probe
{
    std::string name;
    bool on_network = false;
    std::uint32_t particle = 0;
};

struct Scenario
{
    SimConfig cfg;
    std::optional<NetworkTree> tree;
    std::optional<ReducedParticleSet> network;
    std::optional<MyoParticleSet> myo;
    std::optional<MechanicsState> mech;
    std::optional<PmjMap> pmj;
    std::vector<Stimulus> net_stimuli, myo_stimuli;
    std::vector<Probe> probes;
    Real wall_levelset_s = 0; ///< level-set pre-processing wall clock
    Real wall_growth_s = 0;   ///< network generation wall clock
};

inline SimConfig scenarioConfig(const std::string &name)
{
    SimConfig cfg;
    cfg.scenario = name;
    if (name == "custom")
        return cfg;
    if (name == "fiber")
    {
        // 20 mm fiber, 50 particles, d = 0.1 mm^2/ms, stimulus on the leftmost
        // particle for t in [0, 0.5] ms.
        cfg.geometry_kind = "fiber";
        cfg.extent = Vec3(20.0, 0.0, 0.0);
        cfg.l_seg = 0.4;
        cfg.dp0 = 0.4;
        cfg.d_iso_p = 0.1;
        cfg.network_on = true;
        cfg.network_source = "generic";
        cfg.t_end = 500.0;
        cfg.probe_every = 0.1;
        cfg.stimuli.push_back({"net", Vec3(0.0, 0.0, 0.0), 0.0, 1.0, 0.0, 0.5});
        cfg.probes.push_back({"x5", "net", Vec3(5.0, 0.0, 0.0)});
        cfg.probes.push_back({"x10", "net", Vec3(10.0, 0.0, 0.0)});
        cfg.probes.push_back({"x15", "net", Vec3(15.0, 0.0, 0.0)});
        cfg.probes.push_back({"right", "net", Vec3(19.8, 0.0, 0.0)});
        return cfg;
    }
    if (name == "cuboid")
    {
        // 40 x 1 x 20 mm slab, dp0 = 0.2 mm, generic three-branch network with
        // two PMJs, AV-node stimulus, probe P1 at (0.75 l0, h0, 0.5 w0).
        cfg.geometry_kind = "cuboid";
        cfg.extent = Vec3(40.0, 1.0, 20.0);
        cfg.dp0 = 0.2;
        cfg.l_seg = 0.2;
        cfg.d_iso_m = 0.1;
        cfg.d_ani_m = 0.01;
        cfg.d_iso_p = 0.1;
        cfg.network_on = true;
        cfg.network_source = "generic";
        cfg.t_end = 100.0;
        cfg.probe_every = 0.25;
        cfg.stimuli.push_back({"net", Vec3(4.0, 1.0, 10.0), 0.0, 1.0, 0.0, 0.5});
        cfg.probes.push_back({"P1", "myo", Vec3(30.0, 1.0, 10.0)});
        cfg.probes.push_back({"net_mid", "net", Vec3(16.0, 1.0, 13.5)});
        return cfg;
    }
    if (name == "lv-healthy" || name == "lv-pathological" || name == "lv-nonetwork")
    {
        cfg.geometry_kind = "ellipsoid";
        cfg.endo_radii = Vec3(7.0, 7.0, 11.0);
        cfg.epi_radii = Vec3(10.0, 10.0, 14.0);
        cfg.base_z = 0.0;
        cfg.dp0 = 1.0;
        cfg.l_seg = 1.0;
        cfg.d_iso_m = 0.8;
        cfg.d_ani_m = 1.2;
        cfg.d_iso_p = 22.0;
        cfg.ap_net.a = 0.01;
        cfg.ap_myo.a = 0.01;
        cfg.t_end = 40.0;
        cfg.probe_every = 0.25;
        cfg.network_on = name != "lv-nonetwork";
        cfg.network_source = "grown";
        cfg.growth.n_iterations = 14;
        cfg.growth.nodes_per_branch = 8;
        cfg.growth.alpha0 = 0.55;
        cfg.growth.repulsion_weight = 0.1;
        cfg.growth.seed = 42;
        cfg.growth.initial_node = Vec3(7.0, 0.0, -1.5);
        cfg.growth.initial_direction = Vec3(0.0, 0.0, -1.0);
        cfg.active_mode = "constant";
        cfg.ta_const = 0.1;
        if (name == "lv-nonetwork")
        {
            // unique muscular source close to the AV-node region, near the base
            cfg.stimuli.push_back({"myo", Vec3(8.5, 0.0, -1.5), 2.0, 1.0, 0.0, 0.5});
        }
        else
        {
            cfg.stimuli.push_back({"net", Vec3(7.0, 0.0, -1.5), 0.0, 1.0, 0.0, 0.5});
        }
        if (name == "lv-pathological")
        {
            // extra muscular intramyocardial source opposite the AV node
            cfg.stimuli.push_back({"myo", Vec3(-8.5, 0.0, -4.0), 2.0, 1.0, 0.0, 0.5});
        }
        cfg.probes.push_back({"apex", "myo", Vec3(0.0, 0.0, -12.5)});
        cfg.probes.push_back({"base", "myo", Vec3(0.0, 8.5, -1.5)});
        return cfg;
    }
    throw ConfigError("unknown scenario: '" + name + "'");
}

inline std::vector<std::string> builtinScenarios()
{
    return {"fiber", "cuboid", "lv-healthy", "lv-pathological", "lv-nonetwork"};
}

// ---------------------------------------------------------------------------
// Geometry helpers
// ---------------------------------------------------------------------------

/// Straight single-branch tree along +x: n nodes at ((i+0.5) l_seg, 0, 0).
inline NetworkTree makeFiberNetwork(Real length, Real l_seg)
{
    const int n = static_cast<int>(std::llround(length / l_seg));
    if (n < 3)
        throw ConfigError("fiber needs at least 3 particles");
    NetworkTree tree;
    tree.l_seg = l_seg;
    Branch b;
    for (int i = 0; i < n; ++i)
    {
        tree.node_pos.emplace_back((i + 0.5) * l_seg, 0.0, 0.0);
        tree.node_dir.emplace_back(1.0, 0.0, 0.0);
        tree.node_normal.emplace_back(0.0, 0.0, 1.0);
        tree.node_branch.push_back(0);
        b.node_ids.push_back(static_cast<std::uint32_t>(i));
    }
    tree.branches.push_back(std::move(b));
    tree.rebuildTerminals();
    return tree;
}

/// Generic three-branch network used by the cuboid test: a stem from the AV
/// node and two symmetric children ending at the PMJs T1 and T2. All nodes lie
/// on the slab's top plane y = h0.
inline NetworkTree makeGenericCuboidNetwork(const Vec3 &extent, Real l_seg)
{
    const Real y = extent.y();
    const Vec3 av(0.1 * extent.x(), y, 0.5 * extent.z());
    const Vec3 fork(0.3 * extent.x(), y, 0.5 * extent.z());
    const Vec3 t1(0.5 * extent.x(), y, 0.15 * extent.z());
    const Vec3 t2(0.5 * extent.x(), y, 0.85 * extent.z());

    NetworkTree tree;
    tree.l_seg = l_seg;
    auto addPolyline = [&](const Vec3 &from, const Vec3 &to, std::int32_t mother,
                           std::uint32_t start_node) {
        Branch b;
        b.mother = mother;
        const Vec3 d = (to - from).normalized();
        const int n_seg = std::max(2, static_cast<int>(std::llround((to - from).norm() / l_seg)));
        if (mother >= 0)
            b.node_ids.push_back(start_node);
        for (int i = (mother >= 0 ? 1 : 0); i <= n_seg; ++i)
        {
            const auto id = static_cast<std::uint32_t>(tree.node_pos.size());
            tree.node_pos.push_back(from + i * l_seg * d);
            tree.node_dir.push_back(d);
            tree.node_normal.emplace_back(0.0, 1.0, 0.0);
            tree.node_branch.push_back(static_cast<std::uint32_t>(tree.branches.size()));
            b.node_ids.push_back(id);
        }
        tree.branches.push_back(std::move(b));
        return static_cast<std::uint32_t>(tree.branches.size() - 1);
    };

    const std::uint32_t b0 = addPolyline(av, fork, -1, 0);
    const std::uint32_t fork_id = tree.branches[b0].tip();
    const Vec3 fork_pos = tree.node_pos[fork_id];
    const std::uint32_t b1 = addPolyline(fork_pos, t1, static_cast<std::int32_t>(b0), fork_id);
    const std::uint32_t b2 = addPolyline(fork_pos, t2, static_cast<std::int32_t>(b0), fork_id);
    tree.branches[b0].children = {b1, b2};
    tree.rebuildTerminals();
    return tree;
}

/// Transmural helix fiber rule for the truncated-ellipsoid shell: the helix
/// angle runs linearly from +60 deg at the endocardium to -60 deg at the
/// epicardium; the sheet direction is the outward wall normal.
inline FiberRule ellipsoidFiberRule(const Vec3 &endo, const Vec3 &epi)
{
    return [endo, epi](const Vec3 &p, Vec3 &fiber, Vec3 &sheet) {
        auto radial = [](const Vec3 &q, const Vec3 &r) {
            return std::sqrt(q.x() * q.x() / (r.x() * r.x()) + q.y() * q.y() / (r.y() * r.y()) +
                             q.z() * q.z() / (r.z() * r.z()));
        };
        const Real m_en = radial(p, endo);
        const Real m_ep = radial(p, epi);
        // transmural coordinate: 0 at endo (m_en = 1), 1 at epi (m_ep = 1)
        const Real span = (m_en - 1.0) + (1.0 - m_ep);
        const Real xi = span > 1e-12 ? std::clamp((m_en - 1.0) / span, 0.0, 1.0) : 0.5;

        // outward normal of the local ellipsoidal shell
        Vec3 n(p.x() / (epi.x() * epi.x()), p.y() / (epi.y() * epi.y()),
               p.z() / (epi.z() * epi.z()));
        if (n.norm() < 1e-12)
            n = Vec3::UnitZ();
        n.normalize();
        Vec3 circ = Vec3::UnitZ().cross(n);
        if (circ.norm() < 1e-8)
            circ = Vec3::UnitX(); // apex fallback
        circ.normalize();
        const Vec3 longi = n.cross(circ).normalized();
        const Real theta = (60.0 - 120.0 * xi) * pi / 180.0;
        fiber = (std::cos(theta) * circ + std::sin(theta) * longi).normalized();
        // orthonormalize the sheet against the fiber
        sheet = (n - n.dot(fiber) * fiber).normalized();
    };
}

// ---------------------------------------------------------------------------
// Scenario assembly
// ---------------------------------------------------------------------------

namespace detail
{

inline std::vector<std::uint32_t> particlesNear(const std::vector<Vec3> &positions, const Vec3 &site,
                                                Real radius)
{
    std::vector<std::uint32_t> ids;
    if (radius > 0)
    {
        for (std::size_t i = 0; i < positions.size(); ++i)
            if ((positions[i] - site).norm() <= radius)
                ids.push_back(static_cast<std::uint32_t>(i));
    }
    if (ids.empty())
        ids.push_back(nearestParticle(positions, site));
    return ids;
}

inline Real seconds(std::chrono::steady_clock::time_point a, std::chrono::steady_clock::time_point b)
{
    return std::chrono::duration<Real>(b - a).count();
}

} // namespace detail

/// Builds the complete particle systems for a validated config.
inline Scenario buildScenario(const SimConfig &cfg)
{
    validateConfig(cfg);
    Scenario sc;
    sc.cfg = cfg;
    const Real h_net = cfg.h_ratio * cfg.l_seg;

    // --- network geometry -------------------------------------------------
    if (cfg.network_on)
    {
        if (cfg.network_source == "file")
        {
            sc.tree = loadNetwork(cfg.network_file_prefix);
        }
        else if (cfg.geometry_kind == "fiber")
        {
            sc.tree = makeFiberNetwork(cfg.extent.x(), cfg.l_seg);
        }
        else if (cfg.network_source == "generic")
        {
            if (cfg.geometry_kind != "cuboid")
                throw ConfigError("network.source = generic requires cuboid geometry");
            sc.tree = makeGenericCuboidNetwork(cfg.extent, cfg.l_seg);
        }
        else // grown
        {
            TriangleSoup surface;
            if (cfg.geometry_kind == "mesh")
                surface = loadMesh(cfg.mesh_path);
            else if (cfg.geometry_kind == "ellipsoid")
                surface = makeEllipsoid(Vec3::Zero(), cfg.endo_radii, 4);
            else
                throw ConfigError("network.source = grown requires mesh or ellipsoid geometry");
            const Real spacing = cfg.grid_spacing > 0 ? cfg.grid_spacing : cfg.l_seg;
            const auto t0 = std::chrono::steady_clock::now();
            const LevelSetGrid grid = buildLevelSet(surface, spacing, cfg.grid_padding);
            const auto t1 = std::chrono::steady_clock::now();
            GrowthParams gp = cfg.growth;
            gp.l_seg = cfg.l_seg;
            gp.initial_direction.normalize();
            sc.tree = growNetwork(grid, gp);
            const auto t2 = std::chrono::steady_clock::now();
            sc.wall_levelset_s = detail::seconds(t0, t1);
            sc.wall_growth_s = detail::seconds(t1, t2);
        }
        sc.network = particlesFromNetwork(*sc.tree, h_net, cfg.d_iso_p);
        sc.network->ap = cfg.ap_net;
    }

    // --- myocardium -------------------------------------------------------
    if (cfg.geometry_kind == "cuboid")
    {
        sc.myo = buildLattice(cfg.extent, cfg.dp0,
                              constantFiberRule(Vec3::UnitX(), Vec3::UnitY()),
                              cfg.min_axis_particles);
    }
    else if (cfg.geometry_kind == "ellipsoid")
    {
        const Vec3 endo = cfg.endo_radii, epi = cfg.epi_radii;
        auto keep = [endo, epi, base_z = cfg.base_z](const Vec3 &p) {
            auto radial = [](const Vec3 &q, const Vec3 &r) {
                return q.x() * q.x() / (r.x() * r.x()) + q.y() * q.y() / (r.y() * r.y()) +
                       q.z() * q.z() / (r.z() * r.z());
            };
            return p.z() <= base_z && radial(p, epi) <= 1.0 && radial(p, endo) >= 1.0;
        };
        const Vec3 origin = -epi - Vec3::Constant(cfg.dp0);
        const Vec3 extent = 2.0 * epi + Vec3::Constant(2.0 * cfg.dp0);
        sc.myo = buildLattice(extent, cfg.dp0, ellipsoidFiberRule(endo, epi),
                              cfg.min_axis_particles, keep, origin);
    }
    else if (cfg.geometry_kind == "mesh")
    {
        const TriangleSoup surface = loadMesh(cfg.mesh_path);
        const Real spacing = cfg.grid_spacing > 0 ? cfg.grid_spacing : cfg.dp0;
        const LevelSetGrid grid = buildLevelSet(surface, spacing, cfg.grid_padding);
        auto keep = [&grid](const Vec3 &p) { return grid.contains(p) && grid.interpPhi(p) < 0.0; };
        const Vec3 lo = surface.boundsMin() - Vec3::Constant(cfg.dp0);
        const Vec3 extent = surface.boundsMax() - lo + Vec3::Constant(cfg.dp0);
        sc.myo = buildLattice(extent, cfg.dp0, constantFiberRule(Vec3::UnitX(), Vec3::UnitY()),
                              cfg.min_axis_particles, keep, lo);
    }
    // geometry_kind == fiber: no myocardium

    if (sc.myo)
    {
        sc.myo->d_iso = cfg.d_iso_m;
        sc.myo->d_ani = cfg.d_ani_m;
        sc.myo->ap = cfg.ap_myo;
        sc.myo->h = cfg.h_ratio * cfg.dp0;
        buildMyoNeighborLists(*sc.myo, cfg.mechanics_on);
    }

    // --- coupling ----------------------------------------------------------
    if (sc.myo && sc.network)
        sc.pmj = buildPmjMap(*sc.network, *sc.myo, cfg.h_ratio * cfg.dp0);

    // --- mechanics ----------------------------------------------------------
    if (cfg.mechanics_on)
    {
        if (!sc.myo)
            throw ConfigError("mechanics requires a myocardium");
        sc.mech.emplace();
        sc.mech->ho = cfg.ho;
        sc.mech->act = cfg.act;
        sc.mech->damping_on = cfg.damping_on;
        sc.mech->damping_ratio = cfg.damping_ratio;
        sc.mech->init(*sc.myo);
        if (cfg.geometry_kind == "ellipsoid")
        {
            // zero-displacement constraint on the top base
            for (std::size_t i = 0; i < sc.myo->size(); ++i)
                if (sc.myo->ref_pos[i].z() >= cfg.base_z - cfg.dp0)
                    sc.mech->constrained[i] = 1;
        }
        kernelCorrection(*sc.myo, *sc.mech);
    }

    // --- stimuli and probes --------------------------------------------------
    for (const auto &s : cfg.stimuli)
    {
        Stimulus st;
        st.value = s.value;
        st.t_begin = s.t_begin;
        st.t_end = s.t_end;
        if (s.target == "net")
        {
            if (!sc.network)
            {
                RunLog::instance().warn("network stimulus ignored: network disabled");
                continue;
            }
            st.particle_ids = detail::particlesNear(sc.network->ref_pos, s.site, s.radius);
            sc.net_stimuli.push_back(std::move(st));
        }
        else
        {
            if (!sc.myo)
            {
                RunLog::instance().warn("myocardium stimulus ignored: no myocardium");
                continue;
            }
            st.particle_ids = detail::particlesNear(sc.myo->ref_pos, s.site, s.radius);
            sc.myo_stimuli.push_back(std::move(st));
        }
    }
    if (sc.net_stimuli.empty() && sc.myo_stimuli.empty())
        RunLog::instance().warn("scenario has no stimulus: nothing will excite");

    for (const auto &p : cfg.probes)
    {
        Probe probe;
        probe.name = p.name;
        probe.on_network = p.target == "net";
        if (probe.on_network && sc.network)
            probe.particle = nearestParticle(sc.network->ref_pos, p.site);
        else if (!probe.on_network && sc.myo)
            probe.particle = nearestParticle(sc.myo->ref_pos, p.site);
        else
        {
            RunLog::instance().warn("probe '" + p.name + "' ignored: target system missing");
            continue;
        }
        sc.probes.push_back(std::move(probe));
    }
    return sc;
}

} // namespace mosph
#endif // MOSPH_SCENARIOS_HPP
