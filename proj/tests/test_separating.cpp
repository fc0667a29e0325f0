#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "germlab/kdtree.hpp"
#include "germlab/rng.hpp"
#include "germlab/separating.hpp"

using namespace germlab;

namespace {

std::shared_ptr<const VarietySpec> shared(VarietySpec s) {
    return std::make_shared<const VarietySpec>(std::move(s));
}

SampleCloud unit_circle_link(int n, uint64_t seed) {
    Rng rng(seed);
    SampleCloud c;
    c.dim = 2;
    c.law = SamplingLaw::SphereSlice;
    c.r_min = c.r_max = 1.0;
    c.seed = seed;
    std::vector<double> p(2);
    for (int i = 0; i < n; ++i) {
        const double a = rng.uniform(0.0, 2.0 * M_PI);
        p[0] = std::cos(a);
        p[1] = std::sin(a);
        c.push(p, 0.0);
    }
    return c;
}

// cone over a circle embedded in S^2 of R^3 (a genuine straight cone)
SampleCloud cone_link_in_r3(int n, uint64_t seed) {
    Rng rng(seed);
    SampleCloud c;
    c.dim = 3;
    c.law = SamplingLaw::SphereSlice;
    c.r_min = c.r_max = 1.0;
    c.seed = seed;
    const double phi = 1.0;  // polar angle of the link circle
    std::vector<double> p(3);
    for (int i = 0; i < n; ++i) {
        const double a = rng.uniform(0.0, 2.0 * M_PI);
        p[0] = std::sin(phi) * std::cos(a);
        p[1] = std::sin(phi) * std::sin(a);
        p[2] = std::cos(phi);
        c.push(p, 0.0);
    }
    return c;
}

SeparationParams quick_params(uint64_t seed) {
    SeparationParams p;
    p.link_n = 9000;
    p.branch_n = 700;
    p.slice_n = 900;
    p.eps_grid = geometric_grid(1e-1, 1e-3, 7);
    p.seed = seed;
    return p;
}

}  // namespace

TEST_CASE("conflict set of two poles on a circle is the equator pair") {
    auto link = unit_circle_link(4000, 5);
    const double a_pt[2] = {1.0, 0.0};
    const double b_pt[2] = {-1.0, 0.0};
    auto cs = conflict_set(link, {a_pt, 1, 2}, {b_pt, 1, 2});
    REQUIRE(cs.link_points.n() > 0);
    for (int i = 0; i < cs.link_points.n(); ++i) {
        const auto p = cs.link_points.point(i);
        // near (0, 1) or (0, -1)
        CHECK(std::fabs(p[0]) < 0.05);
        CHECK(std::fabs(std::fabs(p[1]) - 1.0) < 0.05);
    }
}

TEST_CASE("identical seeds raise SeedOverlap") {
    auto link = unit_circle_link(500, 6);
    const double a_pt[2] = {1.0, 0.0};
    CHECK_THROWS_AS(conflict_set(link, {a_pt, 1, 2}, {a_pt, 1, 2}), Error);
}

TEST_CASE("conflict set is symmetric in its seed sets") {
    auto link = unit_circle_link(3000, 7);
    const double a_pt[2] = {1.0, 0.0};
    const double b_pt[2] = {-1.0, 0.0};
    auto ab = conflict_set(link, {a_pt, 1, 2}, {b_pt, 1, 2});
    auto ba = conflict_set(link, {b_pt, 1, 2}, {a_pt, 1, 2});
    CHECK(ab.link_points.coords == ba.link_points.coords);
}

TEST_CASE("A2 conflict points avoid the slice plane by delta > 0") {
    auto a2 = shared(make_ak(2));
    auto bc = branch_components(a2, 2, 1.0, 700, 17);
    REQUIRE(bc.clusters.size() == 2);
    auto a_seed = bc.slice_cloud.subset(bc.clusters[0]);
    auto b_seed = bc.slice_cloud.subset(bc.clusters[1]);
    auto link = sample_sphere_slice(a2, 1.0, 9000, 18);
    auto cs = conflict_set(link, a_seed.view(), b_seed.view(), 0.0, 2);
    REQUIRE(cs.link_points.n() > 30);
    CHECK(cs.delta > 0.1);  // the conflict stays away from {z = 0}
    // every conflict point satisfies the band condition
    for (int i = 0; i < cs.link_points.n(); ++i)
        CHECK(std::fabs(cs.d_a[i] - cs.d_b[i]) <= cs.band * 1.0001);
}

TEST_CASE("the conflict construction is S1 invariant") {
    auto a2 = shared(make_ak(2));
    auto bc = branch_components(a2, 2, 1.0, 700, 21);
    auto a_seed = bc.slice_cloud.subset(bc.clusters[0]);
    auto b_seed = bc.slice_cloud.subset(bc.clusters[1]);
    auto link = sample_sphere_slice(a2, 1.0, 9000, 22);
    auto cs = conflict_set(link, a_seed.view(), b_seed.view(), 0.0, 2);

    KdTree tree(cs.link_points.coords.data(), cs.link_points.n(), cs.link_points.dim);
    const double med = median_nn_distance(cs.link_points.coords.data(), cs.link_points.n(),
                                          cs.link_points.dim);
    std::vector<double> q(6);
    int checked = 0;
    for (int i = 0; i < cs.link_points.n(); i += std::max(1, cs.link_points.n() / 40)) {
        for (int a = 0; a < 16; ++a) {
            s1_action(cs.link_points.point(i), *a2->weights, 2.0 * M_PI * a / 16.0, q);
            const double d = std::sqrt(tree.nearest(q).d2);
            CHECK(d <= cs.band + 3.0 * med);
            ++checked;
        }
    }
    CHECK(checked >= 16 * 30);
}

TEST_CASE("cone_down at t=1 reproduces the conflict points and stays on X") {
    auto a2 = shared(make_ak(2));
    auto bc = branch_components(a2, 2, 1.0, 700, 31);
    auto a_seed = bc.slice_cloud.subset(bc.clusters[0]);
    auto b_seed = bc.slice_cloud.subset(bc.clusters[1]);
    auto link = sample_sphere_slice(a2, 1.0, 6000, 32);
    auto cs = conflict_set(link, a_seed.view(), b_seed.view(), 0.0, 2);
    const double t_grid[2] = {1.0, 0.2};
    cone_down(cs, *a2->weights, std::span<const double>(t_grid, 2));
    const int m = cs.link_points.n();
    REQUIRE(cs.cone_cloud.n() == 2 * m);
    for (int i = 0; i < m; ++i) {
        CHECK(cs.cone_t[i] == 1.0);
        const auto orig = cs.link_points.point(i);
        const auto coned = cs.cone_cloud.point(i);
        for (int c = 0; c < 6; ++c) CHECK(coned[c] == doctest::Approx(orig[c]).epsilon(1e-12));
    }
    for (int i = 0; i < cs.cone_cloud.n(); ++i) CHECK(cs.cone_cloud.residual[i] <= 1e-7);
}

TEST_CASE("cone_down with equal weights is radial scaling") {
    auto link = unit_circle_link(300, 41);
    const double a_pt[2] = {1.0, 0.0};
    const double b_pt[2] = {-1.0, 0.0};
    auto cs = conflict_set(link, {a_pt, 1, 2}, {b_pt, 1, 2});
    WeightVector w{{1, 1}};
    const double t_grid[1] = {0.25};
    cone_down(cs, w, std::span<const double>(t_grid, 1));
    for (int i = 0; i < cs.cone_cloud.n(); ++i) {
        const auto q = cs.cone_cloud.point(i);
        const auto p = cs.link_points.point(i);
        CHECK(q[0] == doctest::Approx(0.25 * p[0]));
        CHECK(q[1] == doctest::Approx(0.25 * p[1]));
    }
    const double bad_t[1] = {0.0};
    CHECK_THROWS_AS(cone_down(cs, w, std::span<const double>(bad_t, 1)), Error);
}

TEST_CASE("A2 cone collapses onto the z axis as t shrinks") {
    auto a2 = shared(make_ak(2));
    auto bc = branch_components(a2, 2, 1.0, 700, 51);
    auto a_seed = bc.slice_cloud.subset(bc.clusters[0]);
    auto b_seed = bc.slice_cloud.subset(bc.clusters[1]);
    auto link = sample_sphere_slice(a2, 1.0, 6000, 52);
    auto cs = conflict_set(link, a_seed.view(), b_seed.view(), 0.0, 2);
    auto t_grid = geometric_grid(1.0, 1e-4, 9);
    cone_down(cs, *a2->weights, t_grid);
    auto angles = cone_axis_angles(cs, 2, t_grid);
    for (size_t i = 1; i < angles.size(); ++i) CHECK(angles[i] < angles[i - 1]);
    CHECK(angles.back() < 0.1);
}

TEST_CASE("A2 separating verdict comes out positive") {
    auto a2 = shared(make_ak(2));
    auto rep = separation_verdict(a2, 2, quick_params(61));
    INFO("notes: ", rep.notes);
    INFO("thin beta ", rep.thin.beta, " r2 ", rep.thin.beta_r2);
    INFO("fat thetas ", rep.fat_a.theta, " ", rep.fat_b.theta);
    CHECK(rep.branch_count == 2);
    CHECK(rep.components_found >= 2);
    CHECK(rep.thin.classification == DensityClass::Zero);
    CHECK(rep.fat_a.classification == DensityClass::Positive);
    CHECK(rep.fat_b.classification == DensityClass::Positive);
    CHECK(rep.verdict == Verdict::SeparatingSetFound);
    CHECK(rep.delta > 0.0);
    CHECK(rep.xi > 0.05);
}

TEST_CASE("single-branch germs trip the hypothesis gate") {
    auto cusp = shared(make_brieskorn(2, 3, 7));
    auto rep = separation_verdict(cusp, 2, quick_params(62));
    CHECK(rep.branch_count == 1);
    CHECK(rep.verdict == Verdict::NotFoundByThisConstruction);

    auto bs0 = shared(make_briancon_speder(0.0));
    auto rep2 = separation_verdict(bs0, 2, quick_params(63));
    CHECK(rep2.branch_count == 1);
    CHECK(rep2.verdict == Verdict::NotFoundByThisConstruction);
}

TEST_CASE("equal weights never claim a separating set") {
    auto a1 = shared(make_ak(1));  // weights (1,1,1): w2 > w3 fails
    auto rep = separation_verdict(a1, 2, quick_params(64));
    CHECK_FALSE(rep.hypothesis_ok);
    CHECK(rep.verdict == Verdict::NotFoundByThisConstruction);
    // the conflict cone of a straight cone is fat, never thin
    CHECK(rep.thin.classification == DensityClass::Positive);
}

TEST_CASE("straight cone over a circle: negative control with a fat bisector") {
    auto link = cone_link_in_r3(6000, 71);
    const double phi = 1.0;
    const double a_pt[3] = {std::sin(phi), 0.0, std::cos(phi)};
    const double b_pt[3] = {-std::sin(phi), 0.0, std::cos(phi)};
    SeparationParams p = quick_params(72);
    p.eps_grid = geometric_grid(1e-1, 1e-2, 6);
    auto rep = straight_cone_control(link, {a_pt, 1, 3}, {b_pt, 1, 3}, 2, p);
    INFO("notes: ", rep.notes);
    CHECK(rep.verdict == Verdict::NotFoundByThisConstruction);
    CHECK(rep.components_found >= 2);
    CHECK(rep.thin.classification == DensityClass::Positive);  // two rays are 1-fat
    CHECK(rep.fat_a.classification == DensityClass::Positive);
    CHECK(rep.fat_b.classification == DensityClass::Positive);
}

TEST_CASE("smooth C^2 control: any great-sphere split is fat") {
    // the unit 3-sphere sampled as the link of C^2 at 0
    Rng rng(81);
    SampleCloud link;
    link.dim = 4;
    link.law = SamplingLaw::SphereSlice;
    link.r_min = link.r_max = 1.0;
    std::vector<double> p(4);
    for (int i = 0; i < 7000; ++i) {
        rng.unit_vector(p);
        link.push(p, 0.0);
    }
    const double a_pt[4] = {1.0, 0.0, 0.0, 0.0};
    const double b_pt[4] = {-1.0, 0.0, 0.0, 0.0};
    SeparationParams params = quick_params(82);
    params.eps_grid = geometric_grid(1e-1, 1e-2, 6);
    auto rep = straight_cone_control(link, {a_pt, 1, 4}, {b_pt, 1, 4}, 4, params);
    INFO("notes: ", rep.notes);
    CHECK(rep.verdict == Verdict::NotFoundByThisConstruction);
    CHECK(rep.thin.classification == DensityClass::Positive);
}
