#include <catch2/catch_amalgamated.hpp>

#include "mosph/level_set.hpp"
#include "mosph/mesh.hpp"
#include "mosph/mesh_distance.hpp"
#include "mosph/rng.hpp"

#include <cstring>
#include <filesystem>

using namespace mosph;

namespace
{

std::string oneFacetAsciiStl()
{
    return "solid one\n"
           " facet normal 0 0 1\n"
           "  outer loop\n"
           "   vertex 0 0 0\n"
           "   vertex 1 0 0\n"
           "   vertex 0 1 0\n"
           "  endloop\n"
           " endfacet\n"
           "endsolid one\n";
}

std::string binaryStl(const std::vector<Triangle> &tris)
{
    std::string out(80, '\0');
    std::uint32_t n = static_cast<std::uint32_t>(tris.size());
    out.append(reinterpret_cast<const char *>(&n), 4);
    for (const auto &t : tris)
    {
        auto put = [&](const Vec3 &v) {
            for (int k = 0; k < 3; ++k)
            {
                const float f = static_cast<float>(v[k]);
                out.append(reinterpret_cast<const char *>(&f), 4);
            }
        };
        put(t.normal);
        put(t.v0);
        put(t.v1);
        put(t.v2);
        out.append(2, '\0');
    }
    return out;
}

// Brute-force signed distance oracle: exact point-triangle distance over every
// facet, sign from the globally nearest facet's plane side.
double bruteDistanceMagnitude(const Vec3 &p, const TriangleSoup &soup)
{
    double best = std::numeric_limits<double>::max();
    for (const auto &t : soup.triangles)
    {
        TriFeature f;
        const Vec3 cp = closestPointOnTriangle(p, t.v0, t.v1, t.v2, f);
        best = std::min(best, (p - cp).norm());
    }
    return best;
}

} // namespace

TEST_CASE("ASCII STL with one facet")
{
    const TriangleSoup soup = parseMesh(oneFacetAsciiStl());
    REQUIRE(soup.triangles.size() == 1);
    CHECK(soup.triangles[0].normal.isApprox(Vec3(0, 0, 1)));
}

TEST_CASE("binary STL with two records")
{
    std::vector<Triangle> tris(2);
    tris[0] = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    tris[1] = {{0, 0, 1}, {1, 0, 1}, {0, 1, 1}, {0, 0, 1}};
    const TriangleSoup soup = parseMesh(binaryStl(tris));
    REQUIRE(soup.triangles.size() == 2);
}

TEST_CASE("zero stored normal is recomputed from CCW winding")
{
    std::vector<Triangle> tris(1);
    tris[0] = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 0}};
    const TriangleSoup soup = parseMesh(binaryStl(tris));
    REQUIRE(soup.triangles.size() == 1);
    CHECK(soup.triangles[0].normal.isApprox(Vec3(0, 0, 1), 1e-12));
}

TEST_CASE("truncated binary STL reports byte offset")
{
    std::vector<Triangle> tris(2);
    tris[0] = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    tris[1] = {{0, 0, 1}, {1, 0, 1}, {0, 1, 1}, {0, 0, 1}};
    std::string bytes = binaryStl(tris);
    bytes.resize(bytes.size() - 30); // cut into the second record
    try
    {
        parseMesh(bytes);
        FAIL("expected ParseError");
    }
    catch (const ParseError &e)
    {
        CHECK(e.byteOffset() == static_cast<std::int64_t>(bytes.size()));
    }
}

TEST_CASE("empty mesh is an error")
{
    CHECK_THROWS_AS(parseMesh(binaryStl({})), ParseError);
    CHECK_THROWS_AS(parseMesh("solid empty\nendsolid empty\n"), ParseError);
}

TEST_CASE("OBJ vertex/face text parses and triangulates")
{
    const std::string obj = "# quad\n"
                            "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\n"
                            "f 1 2 3 4\n";
    const TriangleSoup soup = parseMesh(obj);
    REQUIRE(soup.triangles.size() == 2);
    CHECK(soup.triangles[0].normal.isApprox(Vec3(0, 0, 1), 1e-12));
    CHECK_THROWS_AS(parseMesh("v 0 0 0\nf 1 2 5\n"), ParseError);
}

TEST_CASE("degenerate facets are dropped with a warning")
{
    RunLog::instance().reset();
    std::vector<Triangle> tris(2);
    tris[0] = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    tris[1] = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {0, 0, 0}}; // zero area
    RunLog::instance().setEcho(false);
    const TriangleSoup soup = parseMesh(binaryStl(tris));
    RunLog::instance().setEcho(true);
    CHECK(soup.triangles.size() == 1);
    CHECK(RunLog::instance().warningCount() == 1);
}

TEST_CASE("signed distance: cube centroid and face offsets")
{
    const TriangleSoup cube = makeBox(Vec3(0, 0, 0), Vec3(1, 1, 1));
    const MeshDistance dist(cube);

    const auto center = dist.query(Vec3(0.5, 0.5, 0.5));
    CHECK(center.phi == Catch::Approx(-0.5).margin(1e-12));

    const auto outside = dist.query(Vec3(0.5, 0.5, 2.0));
    CHECK(outside.phi == Catch::Approx(1.0).margin(1e-12));

    const auto inside_off = dist.query(Vec3(0.25, 0.5, 0.5));
    CHECK(inside_off.phi == Catch::Approx(-0.25).margin(1e-12));
}

TEST_CASE("signed distance at icosphere center within facet-sag band")
{
    const double radius = 10.0;
    const TriangleSoup sphere = makeIcosphere(Vec3::Zero(), radius, 3);

    // oracle: brute-force distance magnitude over all facets
    const double brute = bruteDistanceMagnitude(Vec3::Zero(), sphere);
    const auto q = MeshDistance(sphere).query(Vec3::Zero());
    CHECK(q.phi < 0.0);
    CHECK(std::abs(-q.phi - brute) < 1e-12);
    CHECK(-q.phi <= radius + 1e-12);
    CHECK(-q.phi >= 0.9 * radius); // facets sag well below 10% at this subdivision
}

TEST_CASE("BVH query equals brute force on random points")
{
    const TriangleSoup sphere = makeIcosphere(Vec3(1, 2, 3), 5.0, 2);
    const MeshDistance dist(sphere);
    Xoshiro256 rng(7);
    for (int i = 0; i < 200; ++i)
    {
        const Vec3 p(1 + 8 * rng.uniformPm1(), 2 + 8 * rng.uniformPm1(), 3 + 8 * rng.uniformPm1());
        const double brute = bruteDistanceMagnitude(p, sphere);
        const auto q = dist.query(p);
        CHECK(std::abs(q.phi) == Catch::Approx(brute).margin(1e-10));
    }
}

TEST_CASE("level set over a plane half-space reproduces z")
{
    const TriangleSoup plane = makePlane(0.0, 100.0);
    const double spacing = 0.5;
    const LevelSetGrid grid =
        buildLevelSet(plane, Vec3(-2.0, -2.0, -2.0), spacing, Vec3i(9, 9, 9));
    for (int i = 1; i < 8; ++i)
        for (int j = 1; j < 8; ++j)
            for (int k = 0; k < 9; ++k)
            {
                const Vec3 p = grid.samplePoint(i, j, k);
                CHECK(grid.phi[grid.index(i, j, k)] == Catch::Approx(p.z()).margin(spacing / 10));
            }
}

TEST_CASE("level-set normals on a sphere point radially outward")
{
    const double radius = 8.0;
    const TriangleSoup sphere = makeIcosphere(Vec3::Zero(), radius, 3);
    const double spacing = 0.8;
    const LevelSetGrid grid = buildLevelSet(sphere, spacing, 4);
    int checked = 0;
    for (int i = 1; i < grid.dims.x() - 1; ++i)
        for (int j = 1; j < grid.dims.y() - 1; ++j)
            for (int k = 1; k < grid.dims.z() - 1; ++k)
            {
                const double phi = grid.phi[grid.index(i, j, k)];
                if (std::abs(phi) >= 5.0 * spacing)
                    continue;
                const Vec3 p = grid.samplePoint(i, j, k);
                if (p.norm() < 1e-9)
                    continue;
                const Vec3 n = grid.normal[grid.index(i, j, k)];
                CHECK(n.dot(p.normalized()) > 0.99);
                ++checked;
            }
    CHECK(checked > 100);
}

TEST_CASE("cells strictly inside a closed box are negative")
{
    const TriangleSoup box = makeBox(Vec3(-5, -5, -5), Vec3(5, 5, 5));
    const LevelSetGrid grid = buildLevelSet(box, Vec3(-4, -4, -4), 1.0, Vec3i(9, 9, 9));
    for (const double phi : grid.phi)
        CHECK(phi < 0.0);
}

TEST_CASE("grid needs at least 3 samples per axis")
{
    const TriangleSoup box = makeBox(Vec3(0, 0, 0), Vec3(1, 1, 1));
    CHECK_THROWS_AS(buildLevelSet(box, Vec3(0, 0, 0), 1.0, Vec3i(2, 5, 5)), ConfigError);
}

TEST_CASE("trilinear interpolation identities")
{
    LevelSetGrid grid;
    grid.origin = Vec3(1.0, 2.0, 3.0);
    grid.spacing = 0.5;
    grid.dims = Vec3i(6, 6, 6);
    grid.phi.resize(6 * 6 * 6);
    grid.normal.assign(grid.phi.size(), Vec3::UnitZ());
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            for (int k = 0; k < 6; ++k)
            {
                const Vec3 p = grid.samplePoint(i, j, k);
                grid.phi[grid.index(i, j, k)] = p.x() + 2.0 * p.y() + 3.0 * p.z();
            }

    SECTION("exact at sample points")
    {
        CHECK(grid.interpPhi(grid.samplePoint(2, 3, 4)) ==
              Catch::Approx(grid.phi[grid.index(2, 3, 4)]).margin(1e-13));
    }
    SECTION("exact for affine fields anywhere inside")
    {
        Xoshiro256 rng(3);
        for (int n = 0; n < 100; ++n)
        {
            const Vec3 p = grid.origin + Vec3(rng.uniform(0.0, 2.5), rng.uniform(0.0, 2.5),
                                              rng.uniform(0.0, 2.5));
            CHECK(grid.interpPhi(p) ==
                  Catch::Approx(p.x() + 2.0 * p.y() + 3.0 * p.z()).margin(1e-12));
        }
    }
    SECTION("midpoint along x is the mean of the two samples")
    {
        const Vec3 a = grid.samplePoint(1, 2, 2), b = grid.samplePoint(2, 2, 2);
        const double expected =
            0.5 * (grid.phi[grid.index(1, 2, 2)] + grid.phi[grid.index(2, 2, 2)]);
        CHECK(grid.interpPhi(0.5 * (a + b)) == Catch::Approx(expected).margin(1e-13));
    }
    SECTION("out-of-bounds query names the offending coordinate")
    {
        try
        {
            grid.interpPhi(Vec3(0.0, 2.5, 3.5));
            FAIL("expected RangeError");
        }
        catch (const RangeError &e)
        {
            CHECK(std::string(e.what()).find("x") != std::string::npos);
        }
    }
    SECTION("interpolated normal stays unit")
    {
        CHECK(grid.interpNormal(grid.origin + Vec3(1.1, 1.2, 1.3)).norm() ==
              Catch::Approx(1.0).margin(1e-9));
    }
}

TEST_CASE("sign changes exactly once along a ray crossing a closed surface")
{
    const TriangleSoup sphere = makeIcosphere(Vec3::Zero(), 6.0, 3);
    const MeshDistance dist(sphere);
    Xoshiro256 rng(11);
    for (int trial = 0; trial < 20; ++trial)
    {
        Vec3 dir(rng.uniformPm1(), rng.uniformPm1(), rng.uniformPm1());
        dir.normalize();
        int flips = 0;
        double prev = dist.query(Vec3::Zero()).phi;
        for (int s = 1; s <= 120; ++s)
        {
            const double cur = dist.query(dir * (12.0 * s / 120.0)).phi;
            if ((prev < 0) != (cur < 0))
                ++flips;
            prev = cur;
        }
        CHECK(flips == 1);
    }
}

TEST_CASE("eikonal band near a smooth surface")
{
    const TriangleSoup sphere = makeIcosphere(Vec3::Zero(), 8.0, 3);
    const double spacing = 0.8;
    const LevelSetGrid grid = buildLevelSet(sphere, spacing, 4);
    auto diff = [&](int i, int j, int k, int axis) {
        int lo[3] = {i, j, k}, hi[3] = {i, j, k};
        --lo[axis];
        ++hi[axis];
        return (grid.phi[grid.index(hi[0], hi[1], hi[2])] -
                grid.phi[grid.index(lo[0], lo[1], lo[2])]) /
               (2.0 * spacing);
    };
    int checked = 0;
    for (int i = 1; i < grid.dims.x() - 1; ++i)
        for (int j = 1; j < grid.dims.y() - 1; ++j)
            for (int k = 1; k < grid.dims.z() - 1; ++k)
            {
                if (std::abs(grid.phi[grid.index(i, j, k)]) >= 3.0 * spacing)
                    continue;
                const Vec3 g(diff(i, j, k, 0), diff(i, j, k, 1), diff(i, j, k, 2));
                CHECK(g.norm() > 0.8);
                CHECK(g.norm() < 1.2);
                ++checked;
            }
    CHECK(checked > 100);
}

TEST_CASE("level-set dump round-trips")
{
    const TriangleSoup box = makeBox(Vec3(0, 0, 0), Vec3(2, 2, 2));
    const LevelSetGrid grid = buildLevelSet(box, 0.5, 3);
    const std::string path = (std::filesystem::temp_directory_path() / "mosph_ls.bin").string();
    saveLevelSet(grid, path);
    const LevelSetGrid back = loadLevelSet(path);
    REQUIRE(back.dims == grid.dims);
    CHECK(back.spacing == grid.spacing);
    CHECK(back.origin.isApprox(grid.origin));
    for (std::size_t i = 0; i < grid.phi.size(); ++i)
        REQUIRE(back.phi[i] == grid.phi[i]);
    CHECK(std::filesystem::exists(path + ".meta"));
    std::filesystem::remove(path);
    std::filesystem::remove(path + ".meta");
}
