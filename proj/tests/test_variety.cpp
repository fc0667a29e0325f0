#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "germlab/rng.hpp"
#include "germlab/variety.hpp"

using namespace germlab;

namespace {

std::shared_ptr<const VarietySpec> shared(VarietySpec s) {
    return std::make_shared<const VarietySpec>(std::move(s));
}

VarietySpec make_real_plane_r3() {
    VarietySpec s;
    s.name = "plane-r3";
    s.field = Field::Real;
    s.variables = {"x", "y", "z"};
    s.equations.push_back(parse_polynomial("z", s.variables));
    s.finalize();
    return s;
}

}  // namespace

TEST_CASE("eval on the catalog germs") {
    auto a1 = make_ak(1);
    // (1, i, 0) packed as interleaved re/im pairs
    const double p[6] = {1, 0, 0, 1, 0, 0};
    auto vals = a1.eval(std::span<const double>(p, 6));
    REQUIRE(vals.size() == 1);
    CHECK(std::abs(vals[0]) == doctest::Approx(0.0).epsilon(1e-15));

    auto b235 = make_brieskorn(2, 3, 5);
    const double origin[6] = {0, 0, 0, 0, 0, 0};
    CHECK(std::abs(b235.eval(std::span<const double>(origin, 6))[0]) == 0.0);

    auto bs1 = make_briancon_speder(1.0);
    const double e1[6] = {1, 0, 0, 0, 0, 0};
    CHECK(bs1.eval(std::span<const double>(e1, 6))[0].real() == doctest::Approx(1.0));

    const double wrong[4] = {0, 0, 0, 0};
    CHECK_THROWS_AS(a1.eval(std::span<const double>(wrong, 4)), Error);
}

TEST_CASE("projection onto a real plane is the orthogonal projection") {
    auto plane = make_real_plane_r3();
    const double p0[3] = {1, 1, 1};
    auto g = project_to_variety(plane, std::span<const double>(p0, 3), 1e-12, 50);
    CHECK(g.coords[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(g.coords[1] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::fabs(g.coords[2]) < 1e-10);
    CHECK(g.residual <= 1e-12);
}

TEST_CASE("projection fixes points already on the variety") {
    auto a1 = make_ak(1);
    // (1, i, 0) is on x^2+y^2+z^2 = 0
    const double p0[6] = {1, 0, 0, 1, 0, 0};
    auto g = project_to_variety(a1, std::span<const double>(p0, 6), 1e-12, 50);
    for (int c = 0; c < 6; ++c) CHECK(g.coords[c] == doctest::Approx(p0[c]).epsilon(1e-9));
}

TEST_CASE("projection reaches residual tolerance from random starts") {
    auto a1 = make_ak(1);
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> p0(6);
        rng.unit_vector(p0);
        auto g = project_to_variety(a1, p0, 1e-10, 80);
        // oracle: re-evaluate the equations at the result
        auto vals = a1.eval(g.coords);
        const double scale = a1.equations[0].magnitude_at_radius(g.radius);
        CHECK(std::abs(vals[0]) <= 1e-10 * scale * 1.0001);
    }
}

TEST_CASE("projection near the singular origin is rejected") {
    auto a2 = make_ak(2);
    std::vector<double> p0(6, 1e-9);
    CHECK_THROWS_AS(project_to_variety(a2, p0, 1e-10, 50), Error);
}

TEST_CASE("sphere slice sampling: plane in R^3 gives the unit circle") {
    auto plane = shared(make_real_plane_r3());
    auto cloud = sample_sphere_slice(plane, 1.0, 200, 5);
    REQUIRE(cloud.n() == 200);
    for (int i = 0; i < cloud.n(); ++i) {
        auto p = cloud.point(i);
        CHECK(std::fabs(cloud.radius[i] - 1.0) <= 1e-9);
        CHECK(std::fabs(p[2]) < 1e-9);
    }
}

TEST_CASE("sphere slice sampling on the A2 link rechecks residuals") {
    auto a2 = shared(make_ak(2));
    auto cloud = sample_sphere_slice(a2, 1.0, 2000, 99);
    REQUIRE(cloud.n() == 2000);
    const double scale = a2->equations[0].magnitude_at_radius(1.0);
    for (int i = 0; i < cloud.n(); ++i) {
        CHECK(std::fabs(cloud.radius[i] - 1.0) <= 1e-9);
        auto vals = a2->eval(cloud.point(i));
        CHECK(std::abs(vals[0]) <= 1e-10 * scale * 1.01);
    }
}

TEST_CASE("sphere slice preconditions") {
    auto a2 = shared(make_ak(2));
    CHECK_THROWS_AS(sample_sphere_slice(a2, 1.0, 0, 1), Error);
    CHECK_THROWS_AS(sample_sphere_slice(a2, -1.0, 10, 1), Error);
}

TEST_CASE("seed determinism: identical clouds bit for bit") {
    auto a2 = shared(make_ak(2));
    auto c1 = sample_sphere_slice(a2, 0.5, 300, 1234);
    auto c2 = sample_sphere_slice(a2, 0.5, 300, 1234);
    REQUIRE(c1.n() == c2.n());
    CHECK(c1.coords == c2.coords);  // exact equality

    auto c3 = sample_sphere_slice(a2, 0.5, 300, 1235);
    CHECK(c1.coords != c3.coords);
}

TEST_CASE("weighted scale: identity, direct values, invariance of X") {
    WeightVector w{{3, 2, 1}};
    // complex (1,1,1) packed
    const double p[6] = {1, 0, 1, 0, 1, 0};
    auto id = weighted_scale(std::span<const double>(p, 6), w, 1.0);
    for (int c = 0; c < 6; ++c) CHECK(id[c] == p[c]);

    auto s2 = weighted_scale(std::span<const double>(p, 6), w, 2.0);
    CHECK(s2[0] == doctest::Approx(8.0));
    CHECK(s2[2] == doctest::Approx(4.0));
    CHECK(s2[4] == doctest::Approx(2.0));

    CHECK_THROWS_AS(weighted_scale(std::span<const double>(p, 6), w, 0.0), Error);
    CHECK_THROWS_AS(weighted_scale(std::span<const double>(p, 6), w, -2.0), Error);

    // scaling keeps Briancon-Speder X_1 inside its zero set
    auto bs1 = shared(make_briancon_speder(1.0));
    auto cloud = sample_sphere_slice(bs1, 1.0, 50, 3);
    for (int i = 0; i < cloud.n(); ++i) {
        for (double t : {0.3, 0.05}) {
            auto q = weighted_scale(cloud.point(i), *bs1->weights, t);
            CHECK(bs1->scaled_residual(q) <= 1e-8);
        }
    }
}

TEST_CASE("weighted homogeneity scaling law on random points") {
    auto a2 = make_ak(2);  // weights (3,3,2), degree 6
    Rng rng(21);
    const double dpw = 6.0 / 2.0;  // d / w_last
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<double> p(6);
        rng.unit_vector(p);
        for (auto& x : p) x *= rng.uniform(0.5, 2.0);
        const double t = rng.uniform(0.1, 10.0);
        auto q = weighted_scale(p, *a2.weights, t);
        const double lhs = std::abs(a2.eval(q)[0]);
        const double rhs = std::pow(t, dpw) * std::abs(a2.eval(p)[0]);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
    }
}

TEST_CASE("s1 action preserves the variety and the radius") {
    auto a2 = shared(make_ak(2));
    auto cloud = sample_sphere_slice(a2, 1.0, 40, 8);
    std::vector<double> q(6);
    for (int i = 0; i < cloud.n(); ++i) {
        for (double theta : {0.3, 1.1, 2.9}) {
            s1_action(cloud.point(i), *a2->weights, theta, q);
            CHECK(norm(q) == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(a2->scaled_residual(q) <= 1e-8);
        }
    }
}

TEST_CASE("orbit parameter hits the requested radius") {
    auto bs = make_briancon_speder(0.0);
    Rng rng(4);
    std::vector<double> p(6);
    rng.unit_vector(p);
    for (double s : {0.5, 0.01, 2.0}) {
        const double t = orbit_param_for_radius(p, *bs.weights, s);
        auto q = weighted_scale(p, *bs.weights, t);
        CHECK(norm(q) == doctest::Approx(s).epsilon(1e-10));
    }
}

TEST_CASE("branch components: A2 has two, cusp and BS t=0 have one") {
    auto a2 = shared(make_ak(2));
    auto bc = branch_components(a2, 2, 1.0, 600, 17);
    CHECK(bc.clusters.size() == 2);
    // branches are x = ±iy circles; both should carry mass
    CHECK(bc.clusters[1].size() > bc.slice_cloud.n() / 5u);

    // x^2 + y^3 is irreducible: a single branch
    auto cusp = shared(make_brieskorn(2, 3, 7));
    CHECK(branch_components(cusp, 2, 1.0, 600, 18).clusters.size() == 1);

    // x^5 = 0 cuts out the y-axis only
    auto bs0 = shared(make_briancon_speder(0.0));
    CHECK(branch_components(bs0, 2, 1.0, 400, 19).clusters.size() == 1);

    // X_t for t != 0: {x=0} plus the two branches of x^4 = -t y^6
    auto bs1 = shared(make_briancon_speder(1.0));
    CHECK(branch_components(bs1, 2, 1.0, 800, 20).clusters.size() == 3);
}

TEST_CASE("branch component count is stable when n doubles") {
    auto a2 = shared(make_ak(2));
    const auto c1 = branch_components(a2, 2, 1.0, 400, 23).clusters.size();
    const auto c2 = branch_components(a2, 2, 1.0, 800, 23).clusters.size();
    CHECK(c1 == c2);
}

TEST_CASE("variety config round trip") {
    const std::string cfg = R"(
# Kleinian A2 germ
name = a2-from-config
field = complex
variables = x y z
equation = x^2 + y^2 + z^3
weights = 3 3 2
)";
    auto spec = parse_variety_config(cfg);
    CHECK(spec.name == "a2-from-config");
    CHECK(spec.ambient_real_dim() == 6);
    CHECK(spec.is_weighted_homogeneous());
    CHECK(spec.weights->surface_hypothesis());

    const std::string bs = R"(
name = bs
variables = x y z
param.t = 1
equation = x^5 + z^15 + y^7z + txy^6
weights = 3 2 1
)";
    auto bspec = parse_variety_config(bs);
    CHECK(bspec.is_weighted_homogeneous());

    CHECK_THROWS_AS(parse_variety_config("variables = x\n"), Error);
    CHECK_THROWS_AS(parse_variety_config("bogus: line\n"), Error);
}

TEST_CASE("radial tangency weight is 1 on straight cones") {
    auto a1 = shared(make_ak(1));  // homogeneous: a genuine cone
    auto cloud = sample_sphere_slice(a1, 1.0, 60, 31);
    for (int i = 0; i < cloud.n(); ++i)
        CHECK(radial_tangency_weight(*a1, cloud.point(i)) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("weight vector hypothesis checks") {
    CHECK(WeightVector{{3, 3, 2}}.surface_hypothesis());
    CHECK(WeightVector{{3, 2, 1}}.surface_hypothesis());
    CHECK_FALSE(WeightVector{{1, 1, 1}}.surface_hypothesis());   // w2 = w3
    CHECK_FALSE(WeightVector{{2, 3, 1}}.surface_hypothesis());   // unsorted
    CHECK_FALSE(WeightVector{{0, 1, 1}}.valid());
}
