/**
 * @file mechanics.hpp
 * @brief Total-Lagrangian SPH solid mechanics for the myocardium.
 *
 * Kinematics with kernel-corrected reference gradients, Holzapfel-Ogden-type
 * passive stress (stress-free reference via the -a ln J term), active stress
 * Ta F f0 (x) f0 with an exponentially integrated tension ODE, and the
 * symmetric pair-force momentum update with pairwise Kelvin-Voigt damping.
 */
#ifndef MOSPH_MECHANICS_HPP
#define MOSPH_MECHANICS_HPP

#include "core.hpp"
#include "myocardium.hpp"

#include <cmath>
#include <vector>

namespace mosph
{

struct HoParams
{
    Real a = 0.059, a_f = 18.472, a_s = 2.841, a_fs = 0.216; ///< kPa
    Real b = 8.023, b_f = 16.026, b_s = 11.12, b_fs = 11.436;
    Real lambda = 1.0;    ///< Lame parameter (kPa)
    Real rho0 = 1.06e-6;  ///< reference density (kg/mm^3)
    Real sound_speed = 0; ///< mm/ms; 0 means derive from sqrt((lambda + 2a)/rho0)
    bool fiber_tension_only = true;

    Real c() const
    {
        return sound_speed > 0 ? sound_speed : std::sqrt((lambda + 2.0 * a) * 1e-6 / rho0);
    }

    void validate() const
    {
        if (a < 0 || a_f < 0 || a_s < 0 || a_fs < 0)
            throw ConfigError("Holzapfel-Ogden a-parameters must be non-negative");
        if (!(b > 0 && b_f > 0 && b_s > 0 && b_fs > 0))
            throw ConfigError("Holzapfel-Ogden b-parameters must be positive");
        if (!(rho0 > 0))
            throw ConfigError("reference density must be positive");
    }
};

struct ActiveParams
{
    Real ka = 1.0;           ///< kPa per unit potential
    Real vr = 0.0;           ///< resting potential
    Real eps0 = 0.1;         ///< 1/ms, value approached as Vm -> -inf
    Real eps_inf = 1.0;      ///< 1/ms, limit as Vm -> +inf
    Real eps_neg_inf = 0.1;  ///< 1/ms
    Real xi = 1.0;           ///< transition slope (1/potential)
    Real vm_bar = 0.5;       ///< phase shift
};

/// Smooth activation rate; positive for all Vm when eps0 > max(0, eps_neg_inf - eps_inf).
inline Real activationRate(Real vm, const ActiveParams &p)
{
    return p.eps0 + (p.eps_inf - p.eps_neg_inf) * std::exp(-std::exp(-p.xi * (vm - p.vm_bar)));
}

/// Exact exponential update of dTa/dt = eps(Vm) [ka (Vm - Vr) - Ta] with
/// eps frozen over the step.
inline Real activeTensionStep(Real ta, Real vm, Real dt, const ActiveParams &p)
{
    const Real eps = activationRate(vm, p);
    const Real target = p.ka * (vm - p.vr);
    const Real e = std::exp(-eps * dt);
    return ta * e + target * (1.0 - e);
}

struct Invariants
{
    Real i1, j, i_ff, i_ss, i_fs;
};

inline Invariants invariants(const Mat3 &F, const Vec3 &f0, const Vec3 &s0)
{
    const Mat3 C = F.transpose() * F;
    Invariants out;
    out.i1 = C.trace();
    out.j = F.determinant();
    out.i_ff = f0.dot(C * f0);
    out.i_ss = s0.dot(C * s0);
    out.i_fs = f0.dot(C * s0);
    return out;
}

/// Strain energy density (kPa). Fiber/sheet exponentials contribute only in
/// tension (I_ii > 1) when fiber_tension_only is set; the switched terms are
/// C1-continuous at I_ii = 1 so the analytic stress stays consistent.
inline Real strainEnergy(const Mat3 &F, const Vec3 &f0, const Vec3 &s0, const HoParams &p)
{
    const Invariants iv = invariants(F, f0, s0);
    if (!(iv.j > 0))
        throw NumericalError("strain energy: det F <= 0");
    const Real ln_j = std::log(iv.j);
    Real w = p.a / (2.0 * p.b) * std::exp(p.b * (iv.i1 - 3.0)) - p.a * ln_j +
             0.5 * p.lambda * ln_j * ln_j;
    auto dirTerm = [&](Real ai, Real bi, Real ii) -> Real {
        if (ai == 0)
            return 0.0;
        if (p.fiber_tension_only && ii <= 1.0)
            return 0.0;
        const Real arg = bi * (ii - 1.0) * (ii - 1.0);
        if (arg > 500.0)
            throw NumericalError("material blow-up: directional invariant " + std::to_string(ii));
        return ai / (2.0 * bi) * (std::exp(arg) - 1.0);
    };
    w += dirTerm(p.a_f, p.b_f, iv.i_ff);
    w += dirTerm(p.a_s, p.b_s, iv.i_ss);
    const Real arg_fs = p.b_fs * iv.i_fs * iv.i_fs;
    if (arg_fs > 500.0)
        throw NumericalError("material blow-up: shear invariant " + std::to_string(iv.i_fs));
    w += p.a_fs / (2.0 * p.b_fs) * (std::exp(arg_fs) - 1.0);
    return w;
}

/// Passive first Piola-Kirchhoff stress P_p = F S with
///   S = a e^{b(I1-3)} I + 2 a_f (I_ff-1) e^{b_f (I_ff-1)^2} f0 (x) f0
///     + 2 a_s (I_ss-1) e^{b_s (I_ss-1)^2} s0 (x) s0
///     + a_fs I_fs e^{b_fs I_fs^2} (f0 (x) s0 + s0 (x) f0)
///     + (lambda ln J - a) C^{-1}.
/// The volumetric column comes from p = dW/dJ = (-a + lambda ln J)/J, so the
/// stress vanishes exactly in the reference configuration.
inline Mat3 passiveStress(const Mat3 &F, const Vec3 &f0, const Vec3 &s0, const HoParams &p)
{
    const Invariants iv = invariants(F, f0, s0);
    if (!(iv.j > 0))
        throw NumericalError("passive stress: det F <= 0 (inverted element)");
    const Real ln_j = std::log(iv.j);

    const Real iso_arg = p.b * (iv.i1 - 3.0);
    if (iso_arg > 500.0)
        throw NumericalError("material blow-up: I1 = " + std::to_string(iv.i1));
    Mat3 S = p.a * std::exp(iso_arg) * Mat3::Identity();

    auto dirCoeff = [&](Real ai, Real bi, Real ii) -> Real {
        if (ai == 0)
            return 0.0;
        if (p.fiber_tension_only && ii <= 1.0)
            return 0.0;
        const Real arg = bi * (ii - 1.0) * (ii - 1.0);
        if (arg > 500.0)
            throw NumericalError("material blow-up: directional invariant " + std::to_string(ii));
        return 2.0 * ai * (ii - 1.0) * std::exp(arg);
    };
    S += dirCoeff(p.a_f, p.b_f, iv.i_ff) * f0 * f0.transpose();
    S += dirCoeff(p.a_s, p.b_s, iv.i_ss) * s0 * s0.transpose();

    const Real arg_fs = p.b_fs * iv.i_fs * iv.i_fs;
    if (arg_fs > 500.0)
        throw NumericalError("material blow-up: shear invariant " + std::to_string(iv.i_fs));
    const Real shear = p.a_fs * iv.i_fs * std::exp(arg_fs);
    S += shear * (f0 * s0.transpose() + s0 * f0.transpose());

    const Mat3 C = F.transpose() * F;
    S += (p.lambda * ln_j - p.a) * C.inverse();

    return F * S;
}

/// Active stress P_a = Ta (F f0) (x) f0.
inline Mat3 activeStress(const Mat3 &F, const Vec3 &f0, Real ta)
{
    return ta * (F * f0) * f0.transpose();
}

/// Cauchy stress from first PK: sigma = J^{-1} P F^T (output only).
inline Mat3 cauchyStress(const Mat3 &P, const Mat3 &F)
{
    return P * F.transpose() / F.determinant();
}

inline Real vonMises(const Mat3 &sigma)
{
    const Mat3 dev = sigma - sigma.trace() / 3.0 * Mat3::Identity();
    return std::sqrt(1.5 * dev.cwiseProduct(dev).sum());
}

/// Mechanics state attached to a MyoParticleSet.
struct MechanicsState
{
    std::vector<Vec3> pos;          ///< current positions
    std::vector<Vec3> vel;
    std::vector<Vec3> acc;
    std::vector<Real> ta;           ///< active tension (kPa)
    std::vector<Mat3> b0;           ///< reference kernel-correction matrices
    std::vector<Mat3> f_tensor;     ///< deformation gradients (scratch, refreshed per force pass)
    std::vector<std::uint8_t> constrained; ///< zero-displacement dofs
    std::vector<std::uint8_t> activated;   ///< latched Vm > threshold (constant active mode)
    HoParams ho;
    ActiveParams act;
    bool damping_on = true;
    Real damping_ratio = 0.2; ///< nu = ratio * c * h

    void init(const MyoParticleSet &set)
    {
        pos = set.ref_pos;
        vel.assign(set.size(), Vec3::Zero());
        acc.assign(set.size(), Vec3::Zero());
        ta.assign(set.size(), 0.0);
        f_tensor.assign(set.size(), Mat3::Identity());
        constrained.assign(set.size(), 0);
        activated.assign(set.size(), 0);
    }
};

/// Reference kernel-correction matrices
///   B0_i = ( sum_j V_j (r0_j - r0_i) (x) grad_i W_ij )^{-1},
/// guaranteeing exact reproduction of linear displacement fields. The moment
/// matrix is symmetric positive definite on any non-degenerate neighborhood.
inline void kernelCorrection(const MyoParticleSet &set, MechanicsState &mech)
{
    if (set.nbr_e0.empty())
        throw ConfigError("kernel correction needs geometry pair data (build with mechanics on)");
    const std::size_t n = set.size();
    mech.b0.assign(n, Mat3::Zero());
    for (std::size_t i = 0; i < n; ++i)
    {
        Mat3 m = Mat3::Zero();
        for (std::uint32_t kk = set.nbr_offset[i]; kk < set.nbr_offset[i + 1]; ++kk)
        {
            const std::uint32_t j = set.nbr_id[kk];
            const Vec3 grad_w = -set.nbr_dwdr[kk] * set.nbr_e0[kk]; // grad_i W_ij
            m += set.volume[j] * (set.ref_pos[j] - set.ref_pos[i]) * grad_w.transpose();
        }
        const Real det = m.determinant();
        if (!(std::abs(det) > 1e-30))
            throw NumericalError("singular correction moment matrix at particle " +
                                 std::to_string(i));
        mech.b0[i] = m.inverse();
    }
}

/// Corrected deformation gradients F_i = I + sum_j V_j (u_j - u_i) (x) (B0_i grad_i W_ij).
inline void deformationGradients(const MyoParticleSet &set, MechanicsState &mech)
{
    const std::size_t n = set.size();
    for (std::size_t i = 0; i < n; ++i)
    {
        Mat3 grad_u = Mat3::Zero();
        const Vec3 u_i = mech.pos[i] - set.ref_pos[i];
        for (std::uint32_t kk = set.nbr_offset[i]; kk < set.nbr_offset[i + 1]; ++kk)
        {
            const std::uint32_t j = set.nbr_id[kk];
            const Vec3 grad_w = -set.nbr_dwdr[kk] * set.nbr_e0[kk];
            const Vec3 u_j = mech.pos[j] - set.ref_pos[j];
            grad_u += set.volume[j] * (u_j - u_i) * (mech.b0[i] * grad_w).transpose();
        }
        mech.f_tensor[i] = Mat3::Identity() + grad_u;
        if (!(mech.f_tensor[i].determinant() > 0))
            throw NumericalError("inverted element: det F <= 0 at particle " + std::to_string(i));
    }
}

/// Momentum rate: symmetric total-Lagrangian pair force with P = P_p + P_a,
///   dv_i/dt = (1/rho0) sum_j V_j (P_i B0_i + P_j B0_j) grad_i W_ij,
/// plus an optional pairwise velocity-difference damping (Kelvin-Voigt type)
/// with viscosity nu = damping_ratio * c * h.
inline void acceleration(const MyoParticleSet &set, MechanicsState &mech)
{
    const std::size_t n = set.size();
    deformationGradients(set, mech);

    std::vector<Mat3> pb(n); // (P_p + P_a) B0 per particle
    for (std::size_t i = 0; i < n; ++i)
    {
        Mat3 P = passiveStress(mech.f_tensor[i], set.fiber[i], set.sheet[i], mech.ho);
        if (mech.ta[i] != 0.0)
            P += activeStress(mech.f_tensor[i], set.fiber[i], mech.ta[i]);
        pb[i] = P * mech.b0[i];
    }

    // 1 kPa = 1e-6 kg/(mm ms^2) in the mm/ms/kg unit system
    constexpr Real kpa = 1e-6;
    const Real inv_rho = kpa / mech.ho.rho0;
    const Real nu = mech.damping_on ? mech.damping_ratio * mech.ho.c() * set.h : 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        Vec3 force = Vec3::Zero(); // kPa/mm
        Vec3 damp = Vec3::Zero();  // mm/ms^2
        for (std::uint32_t kk = set.nbr_offset[i]; kk < set.nbr_offset[i + 1]; ++kk)
        {
            const std::uint32_t j = set.nbr_id[kk];
            const Vec3 grad_w = -set.nbr_dwdr[kk] * set.nbr_e0[kk];
            force += set.volume[j] * ((pb[i] + pb[j]) * grad_w);
            if (nu > 0)
                damp += 2.0 * nu * set.volume[j] * (mech.vel[i] - mech.vel[j]) / set.nbr_r0[kk] *
                        set.nbr_dwdr[kk];
        }
        mech.acc[i] = inv_rho * force + damp;
        if (mech.constrained[i])
            mech.acc[i].setZero();
    }
}

/// One kick-drift-kick step. Active tension evolves per particle from the
/// frozen Vm of the current outer EP step.
inline void mechanicsStep(const MyoParticleSet &set, MechanicsState &mech, Real dt,
                          bool active_constant_mode, Real ta_const)
{
    const std::size_t n = set.size();
    if (active_constant_mode)
    {
        for (std::size_t i = 0; i < n; ++i)
        {
            if (!mech.activated[i] && set.vm[i] > 0.5)
                mech.activated[i] = 1;
            mech.ta[i] = mech.activated[i] ? ta_const : 0.0;
        }
    }
    else
    {
        for (std::size_t i = 0; i < n; ++i)
            mech.ta[i] = activeTensionStep(mech.ta[i], set.vm[i], dt, mech.act);
    }

    acceleration(set, mech);
    for (std::size_t i = 0; i < n; ++i)
    {
        if (mech.constrained[i])
            continue;
        mech.vel[i] += 0.5 * dt * mech.acc[i];
        mech.pos[i] += dt * mech.vel[i];
    }
    acceleration(set, mech);
    for (std::size_t i = 0; i < n; ++i)
    {
        if (mech.constrained[i])
        {
            mech.vel[i].setZero();
            continue;
        }
        mech.vel[i] += 0.5 * dt * mech.acc[i];
    }
}

} // namespace mosph
#endif // MOSPH_MECHANICS_HPP
