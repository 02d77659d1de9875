/**
 * @file aliev_panfilov.hpp
 * @brief Aliev-Panfilov ionic model and the reaction-by-reaction QSS solver.
 *
 * The reaction step advances each right-hand-side term written as (p - q*y)
 * by its exact exponential update with cofactors frozen, composed in Strang
 * (symmetric) order within the substep. Terms with q <= 0 fall back to
 * forward Euler.
 */
#ifndef MOSPH_ALIEV_PANFILOV_HPP
#define MOSPH_ALIEV_PANFILOV_HPP

#include "core.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace mosph
{

struct ApParams
{
    Real k = 8.0;
    Real a = 0.15;
    Real b = 0.15;
    Real eps0 = 0.002;
    Real mu1 = 0.2;
    Real mu2 = 0.3;
    Real cm = 1.0; ///< membrane capacitance

    void validate() const
    {
        if (!(k > 0 && a > 0 && b > 0 && eps0 > 0 && mu1 > 0 && mu2 > 0 && cm > 0))
            throw ConfigError("Aliev-Panfilov parameters must all be positive");
        if (!(a < 1))
            throw ConfigError("Aliev-Panfilov parameter a must be below 1");
    }
};

struct ApState
{
    Real vm = 0.0; ///< nondimensional transmembrane potential
    Real w = 0.0;  ///< gating variable
};

/// I_ion(Vm, w) = -k Vm (Vm - a)(Vm - 1) - w Vm
inline Real i_ion(Real vm, Real w, const ApParams &p)
{
    return -p.k * vm * (vm - p.a) * (vm - 1.0) - w * vm;
}

/// g(Vm, w) = eps(Vm, w) (-k Vm (Vm - b - 1) - w), eps = eps0 + mu1 w / (mu2 + Vm)
inline Real g_gate(Real vm, Real w, const ApParams &p)
{
    const Real denom = p.mu2 + vm;
    if (denom == 0.0)
        throw NumericalError("gating singularity: mu2 + Vm = 0");
    const Real eps = p.eps0 + p.mu1 * w / denom;
    return eps * (-p.k * vm * (vm - p.b - 1.0) - w);
}

namespace detail
{

/// Exact exponential update of dy/dt = p - q y over dt (QSS form); forward
/// Euler when q <= 0. For q > 0 the result is a convex combination of y and
/// p/q, so the update never overshoots the term equilibrium.
inline Real qssTermUpdate(Real y, Real p, Real q, Real dt)
{
    if (q > 0.0)
    {
        const Real e = std::exp(-q * dt);
        return y * e + (p / q) * (1.0 - e);
    }
    return y + dt * (p - q * y);
}

} // namespace detail

/// Advances the reaction ODE system by dt. Term decomposition:
///   Vm: -k Vm (Vm-a)(Vm-1)  ->  q = (k/Cm)(Vm-a)(Vm-1), p = 0
///   Vm: -w Vm               ->  q = w/Cm,               p = 0
///   w : eps (f(Vm) - w)     ->  q = eps, p = eps f(Vm)
/// composed as T1(dt/2) T2(dt/2) T3(dt) T2(dt/2) T1(dt/2). Cofactors are
/// frozen at the term's own half-step predictor (midpoint), which keeps the
/// exponential update exact per frozen problem and the composition second
/// order overall.
inline ApState reactionSubstep(ApState s, Real dt, const ApParams &p)
{
    if (dt <= 0.0)
        return s;
    const Real half = 0.5 * dt;

    // advance y by the exponential update with (p, q) re-frozen at the
    // half-step predictor state
    auto midpointTerm = [](Real y, Real step, auto &&pq_of_y) {
        const auto [p0, q0] = pq_of_y(y);
        const Real y_mid = detail::qssTermUpdate(y, p0, q0, 0.5 * step);
        const auto [pm, qm] = pq_of_y(y_mid);
        return detail::qssTermUpdate(y, pm, qm, step);
    };

    auto cubic = [&](Real step) {
        s.vm = midpointTerm(s.vm, step, [&](Real vm) {
            return std::pair<Real, Real>(0.0, (p.k / p.cm) * (vm - p.a) * (vm - 1.0));
        });
    };
    auto gatingDrag = [&](Real step) {
        // q = w/Cm does not depend on Vm: the frozen update is already exact
        s.vm = detail::qssTermUpdate(s.vm, 0.0, s.w / p.cm, step);
    };
    auto gate = [&](Real step) {
        const Real denom = p.mu2 + s.vm;
        if (denom == 0.0)
            throw NumericalError("gating singularity: mu2 + Vm = 0");
        const Real target = -p.k * s.vm * (s.vm - p.b - 1.0);
        s.w = midpointTerm(s.w, step, [&](Real w) {
            const Real eps = p.eps0 + p.mu1 * w / denom;
            return std::pair<Real, Real>(eps * target, eps);
        });
    };

    cubic(half);
    gatingDrag(half);
    gate(dt);
    gatingDrag(half);
    cubic(half);
    return s;
}

struct Stimulus
{
    std::vector<std::uint32_t> particle_ids;
    Real value = 1.0;
    Real t_begin = 0.0;
    Real t_end = 0.5;

    bool active(Real t) const { return t >= t_begin && t <= t_end; }
};

/// Clamp semantics: while the window is active the listed particles report
/// exactly `value` regardless of diffusion in-flow. Applied after every substep.
template <typename ParticleSet>
void applyStimulus(ParticleSet &set, const Stimulus &stim, Real t)
{
    if (!stim.active(t))
        return;
    for (const auto id : stim.particle_ids)
        set.vm[id] = stim.value;
}

/// Strang composition S_r(dt/2) o S_d(dt) o S_r(dt/2) for one state; the
/// caller supplies the diffusion action. Particle-set drivers follow the same
/// ordering with vectorized substeps.
template <typename DiffusionOp>
ApState strangCompose(ApState s, Real dt, const ApParams &p, DiffusionOp &&diffusion)
{
    s = reactionSubstep(s, 0.5 * dt, p);
    s = diffusion(s, dt);
    s = reactionSubstep(s, 0.5 * dt, p);
    return s;
}

} // namespace mosph
#endif // MOSPH_ALIEV_PANFILOV_HPP
