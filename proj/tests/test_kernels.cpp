#include <catch2/catch_amalgamated.hpp>

#include "mosph/kernels.hpp"

using namespace mosph;

namespace
{

// Simpson quadrature oracle for kernel integrals.
double simpson(double a, double b, int n, const std::function<double(double)> &f)
{
    if (n % 2)
        ++n;
    const double h = (b - a) / n;
    double sum = f(a) + f(b);
    for (int i = 1; i < n; ++i)
        sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

} // namespace

TEST_CASE("kernel support and peak values")
{
    const KernelSpec k1{0.52, 1};
    const KernelSpec k3{0.26, 3};

    CHECK(w_value(2.0 * k1.h, k1) == 0.0);
    CHECK(w_value(2.0 * k3.h, k3) == 0.0);
    CHECK(w_value(5.0 * k3.h, k3) == 0.0);

    // reduced 1D normalization constant 3/(4h) at r = 0
    CHECK(w_value(0.0, k1) == Catch::Approx(3.0 / (4.0 * k1.h)).epsilon(1e-14));

    CHECK(w_radial_derivative(0.0, k1) == 0.0);
    CHECK(w_radial_derivative(2.0 * k1.h, k1) == 0.0);
    CHECK(w_radial_derivative(3.0 * k3.h, k3) == 0.0);
}

TEST_CASE("kernel normalization by quadrature")
{
    const KernelSpec k1{0.7, 1};
    const double integral_1d =
        simpson(-2.0 * k1.h, 2.0 * k1.h, 4000,
                [&](double r) { return w_value(std::abs(r), k1); });
    CHECK(integral_1d == Catch::Approx(1.0).margin(1e-8));

    const KernelSpec k3{0.9, 3};
    const double integral_3d = simpson(0.0, 2.0 * k3.h, 4000, [&](double r) {
        return 4.0 * pi * r * r * w_value(r, k3);
    });
    CHECK(integral_3d == Catch::Approx(1.0).margin(1e-8));
}

TEST_CASE("radial derivative matches finite differences")
{
    const KernelSpec specs[] = {{0.52, 1}, {0.26, 3}};
    for (const auto &spec : specs)
    {
        const double eps = 1e-6 * spec.h;
        for (int i = 1; i < 100; ++i)
        {
            const double r = (2.0 * spec.h) * i / 100.5;
            const double fd = (w_value(r + eps, spec) - w_value(r - eps, spec)) / (2.0 * eps);
            const double an = w_radial_derivative(r, spec);
            CHECK(an == Catch::Approx(fd).epsilon(1e-7).margin(1e-9 * spec.alpha() / spec.h));
        }
    }
}

TEST_CASE("monotone decay on the support")
{
    const KernelSpec spec{1.1, 3};
    double prev = w_value(0.0, spec);
    for (int i = 1; i <= 200; ++i)
    {
        const double v = w_value(2.0 * spec.h * i / 200.0, spec);
        CHECK(v <= prev + 1e-15);
        prev = v;
    }
    for (int i = 0; i <= 200; ++i)
        CHECK(w_radial_derivative(2.0 * spec.h * i / 200.0, spec) <= 0.0);
}

TEST_CASE("partition of unity on uniform lattices")
{
    SECTION("1D chain")
    {
        const double dp = 0.4;
        const KernelSpec spec{1.3 * dp, 1};
        double sum = 0;
        for (int j = -3; j <= 3; ++j)
            sum += dp * w_value(std::abs(j) * dp, spec);
        CHECK(sum > 0.98);
        CHECK(sum < 1.02);
    }
    SECTION("3D lattice")
    {
        const double dp = 0.2;
        const KernelSpec spec{1.3 * dp, 3};
        double sum = 0;
        for (int i = -3; i <= 3; ++i)
            for (int j = -3; j <= 3; ++j)
                for (int k = -3; k <= 3; ++k)
                    sum += dp * dp * dp * w_value(dp * std::sqrt(double(i * i + j * j + k * k)), spec);
        CHECK(sum > 0.98);
        CHECK(sum < 1.02);
    }
}
