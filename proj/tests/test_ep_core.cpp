#include <catch2/catch_amalgamated.hpp>

#include "mosph/aliev_panfilov.hpp"

#include <cmath>

using namespace mosph;

namespace
{

// Forward-Euler oracle for the full reaction ODE system.
ApState eulerStep(ApState s, Real dt, const ApParams &p)
{
    const Real dv = i_ion(s.vm, s.w, p) / p.cm;
    const Real dw = g_gate(s.vm, s.w, p);
    return {s.vm + dt * dv, s.w + dt * dw};
}

// High-resolution reference: many tiny Euler steps.
ApState fineReference(ApState s, Real t, const ApParams &p, int n = 200000)
{
    const Real dt = t / n;
    for (int i = 0; i < n; ++i)
        s = eulerStep(s, dt, p);
    return s;
}

} // namespace

TEST_CASE("ionic current closed form")
{
    ApParams p; // table values k=8, a=0.15
    CHECK(i_ion(0.0, 0.37, p) == 0.0);
    CHECK(i_ion(1.0, 0.0, p) == 0.0);
    CHECK(i_ion(0.5, 0.0, p) == Catch::Approx(0.7).epsilon(1e-14));
}

TEST_CASE("gate rate closed form")
{
    ApParams p;
    CHECK(g_gate(0.0, 0.0, p) == 0.0);
    SECTION("nullcline")
    {
        const Real vm = 0.4;
        const Real w = -p.k * vm * (vm - p.b - 1.0);
        CHECK(g_gate(vm, w, p) == Catch::Approx(0.0).margin(1e-14));
    }
    SECTION("hand evaluation at Vm=0.5, w=0.1")
    {
        // eps = 0.002 + 0.2*0.1/0.8 = 0.027; inner = -8*0.5*(-0.65) - 0.1 = 2.5
        CHECK(g_gate(0.5, 0.1, p) == Catch::Approx(0.0675).epsilon(1e-12));
    }
    SECTION("singularity guard")
    {
        CHECK_THROWS_AS(g_gate(-p.mu2, 0.1, p), NumericalError);
    }
}

TEST_CASE("reaction substep basics")
{
    ApParams p;
    SECTION("dt = 0 is the identity")
    {
        const ApState s{0.37, 0.12};
        const ApState out = reactionSubstep(s, 0.0, p);
        CHECK(out.vm == s.vm);
        CHECK(out.w == s.w);
    }
    SECTION("the rest state (0,0) is exactly invariant for any dt")
    {
        for (const Real dt : {1e-4, 0.1, 1.0, 50.0})
        {
            const ApState out = reactionSubstep({0.0, 0.0}, dt, p);
            CHECK(out.vm == 0.0);
            CHECK(out.w == 0.0);
        }
    }
    SECTION("smooth-limit consistency with forward Euler at dt = 1e-4")
    {
        for (const ApState s : {ApState{0.3, 0.05}, ApState{0.8, 0.4}, ApState{0.05, 1.2}})
        {
            const ApState qss = reactionSubstep(s, 1e-4, p);
            const ApState eul = eulerStep(s, 1e-4, p);
            CHECK(qss.vm == Catch::Approx(eul.vm).margin(1e-8));
            CHECK(qss.w == Catch::Approx(eul.w).margin(1e-8));
        }
    }
}

TEST_CASE("QSS term update never overshoots its equilibrium")
{
    // for q > 0 the update is a convex combination of y and p/q
    for (const Real q : {0.01, 1.0, 50.0})
        for (const Real dt : {1e-3, 0.3, 10.0, 1e4})
            for (const Real y0 : {-1.0, 0.0, 2.0})
            {
                const Real p_over_q = 0.7;
                const Real y1 = detail::qssTermUpdate(y0, p_over_q * q, q, dt);
                const Real lo = std::min(y0, p_over_q), hi = std::max(y0, p_over_q);
                CHECK(y1 >= lo - 1e-13);
                CHECK(y1 <= hi + 1e-13);
            }
}

TEST_CASE("QSS stays accurate over a stiff interval")
{
    ApParams p;
    const ApState s0{0.9, 0.1};
    const Real t = 1.0; // ms
    const ApState ref = fineReference(s0, t, p);
    // 10 QSS substeps across the same interval
    ApState s = s0;
    for (int i = 0; i < 10; ++i)
        s = reactionSubstep(s, t / 10, p);
    CHECK(s.vm == Catch::Approx(ref.vm).margin(2e-3));
    CHECK(s.w == Catch::Approx(ref.w).margin(2e-3));
}

TEST_CASE("strang composition")
{
    ApParams p;
    SECTION("identity diffusion equals two half reactions")
    {
        const ApState s{0.4, 0.2};
        const Real dt = 0.05;
        const ApState via_compose =
            strangCompose(s, dt, p, [](ApState in, Real) { return in; });
        ApState direct = reactionSubstep(s, dt / 2, p);
        direct = reactionSubstep(direct, dt / 2, p);
        CHECK(via_compose.vm == Catch::Approx(direct.vm).margin(1e-15));
        CHECK(via_compose.w == Catch::Approx(direct.w).margin(1e-15));
    }
    SECTION("reaction disabled equals pure diffusion")
    {
        // with every term's rate zero the reaction is the identity: emulate by
        // starting at the fixed point
        const ApState s{0.0, 0.0};
        const ApState out = strangCompose(s, 0.1, p, [](ApState in, Real dt) {
            in.vm += 0.3 * dt;
            return in;
        });
        // the second half reaction acts on the diffused state
        const ApState expected = reactionSubstep({0.03, 0.0}, 0.05, p);
        CHECK(out.vm == Catch::Approx(expected.vm).margin(1e-15));
        CHECK(out.w == Catch::Approx(expected.w).margin(1e-15));
    }
}

TEST_CASE("strang splitting is second order on a forced system")
{
    // oscillatory linear "diffusion" forcing paired with the reaction:
    //   the composed error vs a dt/64 reference must decay ~O(dt^2):
    //   halving dt cuts the error by >= 3.5x in the asymptotic regime.
    ApParams p;
    auto diffusion = [](ApState s, Real dt) {
        s.vm += dt * 0.8 * std::sin(3.0 * s.vm + 1.0);
        return s;
    };
    auto integrate = [&](Real total, Real dt) {
        ApState s{0.25, 0.1};
        const int n = static_cast<int>(std::round(total / dt));
        for (int i = 0; i < n; ++i)
            s = strangCompose(s, dt, p, diffusion);
        return s;
    };
    const Real total = 1.0;
    const ApState ref = integrate(total, total / 4096);
    const ApState e1 = integrate(total, total / 16);
    const ApState e2 = integrate(total, total / 32);
    const Real err1 = std::abs(e1.vm - ref.vm) + std::abs(e1.w - ref.w);
    const Real err2 = std::abs(e2.vm - ref.vm) + std::abs(e2.w - ref.w);
    CHECK(err1 / err2 >= 3.5);
}
