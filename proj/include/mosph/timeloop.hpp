/**
 * @file timeloop.hpp
 * @brief Step-size criteria and the multi-/single-rate time integration
 *        drivers orchestrating network EP, myocardium EP, coupling and
 *        mechanics.
 */
#ifndef MOSPH_TIMELOOP_HPP
#define MOSPH_TIMELOOP_HPP

#include "config.hpp"
#include "scenarios.hpp"
#include "vtk_io.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <vector>

namespace mosph
{

struct StepSizes
{
    Real dt_p = 0;  ///< network diffusion step (ms)
    Real dt_md = 0; ///< myocardium diffusion step (ms)
    Real dt_mm = 0; ///< mechanics step (ms)
    int kappa_network = 0; ///< floor(dt_md / dt_p) + 1
    int kappa_mech = 0;    ///< floor(dt_md / dt_mm) + 1
};

/// Network diffusion criterion dt = (1/2d) h^2 / d_iso with d the stencil
/// dimensionality (1 for the reduced network, 3 as conservative fallback).
inline Real networkDtCriterion(Real h, Real d_iso, int dim, Real safety)
{
    return safety * h * h / (2.0 * dim * d_iso);
}

/// Myocardium diffusion criterion dt = (1/2d) h^2 / |D| with |D| the trace of
/// the conductivity tensor and d = 3.
inline Real myoDtCriterion(Real h, Real d_iso, Real d_ani, Real safety)
{
    const Real trace = 3.0 * d_iso + d_ani;
    return safety * h * h / (6.0 * trace);
}

/// Mechanics criterion dt = 0.6 min(h/(c + |v|max), sqrt(h/|a|max)).
inline Real mechDtCriterion(Real h, Real c, Real v_max, Real a_max)
{
    if (!std::isfinite(v_max) || !std::isfinite(a_max))
        throw NumericalError("mechanics blow-up: non-finite velocity or acceleration");
    Real dt = h / (c + v_max);
    if (a_max > 0)
        dt = std::min(dt, std::sqrt(h / a_max));
    return 0.6 * dt;
}

inline StepSizes computeDt(const Scenario &sc)
{
    StepSizes out;
    const SimConfig &cfg = sc.cfg;
    if (sc.network)
        out.dt_p = networkDtCriterion(sc.network->h, sc.network->d_iso, cfg.dt_network_dim,
                                      cfg.dt_safety);
    if (sc.myo)
        out.dt_md = myoDtCriterion(sc.myo->h, sc.myo->d_iso, sc.myo->d_ani, cfg.dt_safety);
    if (sc.mech && sc.myo)
    {
        Real v_max = 0, a_max = 0;
        for (std::size_t i = 0; i < sc.myo->size(); ++i)
        {
            v_max = std::max(v_max, sc.mech->vel[i].norm());
            a_max = std::max(a_max, sc.mech->acc[i].norm());
        }
        out.dt_mm = mechDtCriterion(sc.myo->h, sc.mech->ho.c(), v_max, a_max);
    }
    if (out.dt_md > 0 && out.dt_p > 0)
        out.kappa_network = static_cast<int>(std::floor(out.dt_md / out.dt_p)) + 1;
    if (out.dt_md > 0 && out.dt_mm > 0)
        out.kappa_mech = static_cast<int>(std::floor(out.dt_md / out.dt_mm)) + 1;
    return out;
}

// ---------------------------------------------------------------------------
// Run driver
// ---------------------------------------------------------------------------

struct RunArtifacts
{
    std::vector<std::string> probe_files;
    std::string manifest_file;
    Real wall_run_s = 0;
    long outer_steps = 0;
    long network_substeps = 0;
    long mech_substeps = 0;
};

namespace detail
{

class ProbeWriter
{
  public:
    ProbeWriter(const Scenario &sc, const std::string &prefix, RunArtifacts &artifacts) : sc_(sc)
    {
        for (const auto &p : sc.probes)
        {
            const std::string path = prefix + ".probe-" + p.name + ".csv";
            auto out = std::make_unique<std::ofstream>(path);
            if (!*out)
                throw ConfigError("cannot open probe file: " + path);
            *out << "t_ms,Vm,w\n";
            files_.push_back(std::move(out));
            artifacts.probe_files.push_back(path);
        }
    }

    void emit(Real t)
    {
        char buf[96];
        for (std::size_t k = 0; k < sc_.probes.size(); ++k)
        {
            const Probe &p = sc_.probes[k];
            Real vm = 0, w = 0;
            if (p.on_network && sc_.network)
            {
                vm = sc_.network->vm[p.particle];
                w = sc_.network->w[p.particle];
            }
            else if (!p.on_network && sc_.myo)
            {
                vm = sc_.myo->vm[p.particle];
                w = sc_.myo->w[p.particle];
            }
            std::snprintf(buf, sizeof buf, "%.9g,%.12g,%.12g\n", t, vm, w);
            *files_[k] << buf;
        }
    }

  private:
    const Scenario &sc_;
    std::vector<std::unique_ptr<std::ofstream>> files_;
};

inline void writeSnapshot(const Scenario &sc, const std::string &prefix, Real t)
{
    char stamp[32];
    std::snprintf(stamp, sizeof stamp, "%08.3f", t);
    if (sc.myo)
    {
        VtkPointCloud cloud;
        cloud.points = sc.mech ? sc.mech->pos : sc.myo->ref_pos;
        cloud.scalars.emplace_back("Vm", &sc.myo->vm);
        cloud.scalars.emplace_back("w", &sc.myo->w);
        std::vector<Real> ta, von_mises;
        std::vector<Vec3> displacement;
        if (sc.mech)
        {
            ta = sc.mech->ta;
            displacement.resize(sc.myo->size());
            von_mises.resize(sc.myo->size());
            for (std::size_t i = 0; i < sc.myo->size(); ++i)
            {
                displacement[i] = sc.mech->pos[i] - sc.myo->ref_pos[i];
                const Mat3 &F = sc.mech->f_tensor[i];
                Mat3 P = passiveStress(F, sc.myo->fiber[i], sc.myo->sheet[i], sc.mech->ho);
                if (sc.mech->ta[i] != 0.0)
                    P += activeStress(F, sc.myo->fiber[i], sc.mech->ta[i]);
                von_mises[i] = vonMises(cauchyStress(P, F));
            }
            cloud.scalars.emplace_back("Ta", &ta);
            cloud.scalars.emplace_back("von_mises", &von_mises);
            cloud.vectors.emplace_back("displacement", &displacement);
        }
        writeVtkPointCloud(cloud, prefix + "-t" + stamp + ".vtk");
    }
    if (sc.network && sc.tree)
        saveNetworkSnapshot(*sc.network, *sc.tree, prefix + "-t" + stamp + ".net.txt");
}

} // namespace detail

/// Writes the run manifest: full config, derived hash, version, particle
/// counts and wall-clock phases.
inline void writeManifest(const Scenario &sc, const StepSizes &dt, const RunArtifacts &artifacts,
                          const std::string &path)
{
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot open manifest file: " + path);
    out << "# mosph run manifest\n";
    out << "version = " << version_string << "\n";
    out << "config_hash = " << configHash(sc.cfg) << "\n";
    out << "network_particles = " << (sc.network ? sc.network->size() : 0) << "\n";
    out << "myocardium_particles = " << (sc.myo ? sc.myo->size() : 0) << "\n";
    out << "pmj_terminals = " << (sc.pmj ? sc.pmj->terminalCount() : 0) << "\n";
    out.precision(17);
    out << "dt_p_ms = " << dt.dt_p << "\n";
    out << "dt_md_ms = " << dt.dt_md << "\n";
    out << "dt_mm_initial_ms = " << dt.dt_mm << "\n";
    out << "outer_steps = " << artifacts.outer_steps << "\n";
    out << "network_substeps = " << artifacts.network_substeps << "\n";
    out << "mech_substeps = " << artifacts.mech_substeps << "\n";
    out << "wall_levelset_s = " << sc.wall_levelset_s << "\n";
    out << "wall_growth_s = " << sc.wall_growth_s << "\n";
    out << "wall_run_s = " << artifacts.wall_run_s << "\n";
    out << "# resolved configuration\n";
    out << serializeConfig(sc.cfg);
}

/// Runs a scenario to t_end. Multirate follows the outer-myocardium /
/// inner-network / inner-mechanics nesting with the final substep of each
/// inner loop clipped so no subsystem drifts ahead; single-rate advances every
/// subsystem with the global minimum step. PMJ flux uses the network state at
/// the start of the outer step.
inline RunArtifacts runScenario(Scenario &sc, bool multirate)
{
    const SimConfig &cfg = sc.cfg;
    RunArtifacts artifacts;
    const auto wall0 = std::chrono::steady_clock::now();

    if (sc.mech && sc.myo)
        acceleration(*sc.myo, *sc.mech); // prime accelerations for the dt criterion

    StepSizes dt = computeDt(sc);

    detail::ProbeWriter probes(sc, cfg.out_prefix, artifacts);
    std::vector<Real> net_rate, myo_rate, flux;
    const bool has_flux = sc.pmj && sc.network && sc.myo;

    Real t = 0;
    Real next_probe = 0;
    Real last_probe_t = -1;
    Real next_snapshot = cfg.snapshot_every > 0 ? 0 : std::numeric_limits<Real>::max();
    auto emitOutputs = [&](bool force = false) {
        if ((force || t + 1e-12 >= next_probe) && t != last_probe_t)
        {
            probes.emit(t);
            last_probe_t = t;
            while (next_probe <= t + 1e-12)
                next_probe += cfg.probe_every;
        }
        if (t + 1e-12 >= next_snapshot)
        {
            detail::writeSnapshot(sc, cfg.out_prefix, t);
            while (next_snapshot <= t + 1e-12)
                next_snapshot += cfg.snapshot_every;
        }
    };
    emitOutputs(true);

    const Real t_eps = 1e-12 * std::max(Real(1), cfg.t_end);
    while (t < cfg.t_end - t_eps)
    {
        // outer step size
        Real dt_outer;
        if (multirate)
            dt_outer = sc.myo ? dt.dt_md : dt.dt_p;
        else
        {
            dt_outer = std::numeric_limits<Real>::max();
            if (sc.network)
                dt_outer = std::min(dt_outer, dt.dt_p);
            if (sc.myo)
                dt_outer = std::min(dt_outer, dt.dt_md);
            if (sc.mech)
            {
                dt = computeDt(sc); // dt_mm depends on the current state
                dt_outer = std::min(dt_outer, dt.dt_mm);
            }
        }
        dt_outer = std::min(dt_outer, cfg.t_end - t);

        if (has_flux)
            pmjFlux(*sc.pmj, *sc.network, *sc.myo, flux);

        if (sc.myo)
            myoStrangStep(*sc.myo, dt_outer, t + dt_outer, sc.myo_stimuli,
                          has_flux ? &flux : nullptr, myo_rate);

        if (sc.network)
        {
            if (multirate && sc.myo)
            {
                Real t_sum = 0;
                while (t_sum < dt_outer - t_eps)
                {
                    const Real dt_sub = std::min(dt.dt_p, dt_outer - t_sum);
                    networkStrangStep(*sc.network, dt_sub, t + t_sum + dt_sub, sc.net_stimuli,
                                      net_rate);
                    t_sum += dt_sub;
                    ++artifacts.network_substeps;
                }
            }
            else
            {
                networkStrangStep(*sc.network, dt_outer, t + dt_outer, sc.net_stimuli, net_rate);
                ++artifacts.network_substeps;
            }
        }

        if (sc.mech && sc.myo)
        {
            const bool const_mode = cfg.active_mode == "constant";
            if (multirate)
            {
                Real t_sum = 0;
                while (t_sum < dt_outer - t_eps)
                {
                    dt = computeDt(sc); // re-evaluate dt_mm from |v|max, |a|max
                    const Real dt_sub = std::min(dt.dt_mm, dt_outer - t_sum);
                    mechanicsStep(*sc.myo, *sc.mech, dt_sub, const_mode, cfg.ta_const);
                    t_sum += dt_sub;
                    ++artifacts.mech_substeps;
                }
            }
            else
            {
                mechanicsStep(*sc.myo, *sc.mech, dt_outer, const_mode, cfg.ta_const);
                ++artifacts.mech_substeps;
            }
        }

        t += dt_outer;
        ++artifacts.outer_steps;
        emitOutputs();
    }
    emitOutputs(true);

    artifacts.wall_run_s =
        std::chrono::duration<Real>(std::chrono::steady_clock::now() - wall0).count();
    artifacts.manifest_file = cfg.out_prefix + ".manifest.txt";
    writeManifest(sc, dt, artifacts, artifacts.manifest_file);
    return artifacts;
}

inline RunArtifacts runMultirate(Scenario &sc) { return runScenario(sc, true); }
inline RunArtifacts runSinglerate(Scenario &sc) { return runScenario(sc, false); }

} // namespace mosph
#endif // MOSPH_TIMELOOP_HPP
