/**
 * @file kernels.hpp
 * @brief Wendland C2 quintic smoothing kernel, full-order (3D) and reduced (1D).
 *
 * Both variants share the shape (1 + 2q)(1 - q/2)^4 on q = r/h in [0, 2] with
 * compact support radius 2h. Only the normalization constant differs:
 * 3/(4h) restores unit integral on the 1D manifold, 21/(16 pi h^3) in 3D.
 */
#ifndef MOSPH_KERNELS_HPP
#define MOSPH_KERNELS_HPP

#include "core.hpp"

#include <cmath>

namespace mosph
{

struct KernelSpec
{
    Real h = 1.0; ///< smoothing length (mm)
    int dim = 3;  ///< 1 for the reduced network kernel, 3 for the myocardium

    Real cutoff() const { return 2.0 * h; }

    Real alpha() const
    {
        return dim == 1 ? 3.0 / (4.0 * h) : 21.0 / (16.0 * pi * h * h * h);
    }
};

/// Kernel value W(r). Exactly zero for r >= 2h.
inline Real w_value(Real r, const KernelSpec &spec)
{
    const Real q = r / spec.h;
    if (q >= 2.0)
        return 0.0;
    const Real t = 1.0 - 0.5 * q;
    const Real t2 = t * t;
    return spec.alpha() * (1.0 + 2.0 * q) * t2 * t2;
}

/// Radial derivative dW/dr. Zero at r = 0 and for r >= 2h, non-positive on [0, 2h].
inline Real w_radial_derivative(Real r, const KernelSpec &spec)
{
    const Real q = r / spec.h;
    if (q >= 2.0)
        return 0.0;
    const Real t = 1.0 - 0.5 * q;
    return spec.alpha() * (-5.0 * q) * t * t * t / spec.h;
}

} // namespace mosph
#endif // MOSPH_KERNELS_HPP
