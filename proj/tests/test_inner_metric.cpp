#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "germlab/inner_metric.hpp"
#include "germlab/rng.hpp"
#include "germlab/variety.hpp"

using namespace germlab;

namespace {

std::shared_ptr<const VarietySpec> shared(VarietySpec s) {
    return std::make_shared<const VarietySpec>(std::move(s));
}

std::vector<double> circle_pts(int n, uint64_t seed, double radius = 1.0) {
    Rng rng(seed);
    std::vector<double> pts;
    for (int i = 0; i < n; ++i) {
        const double a = rng.uniform(0.0, 2.0 * M_PI);
        pts.push_back(radius * std::cos(a));
        pts.push_back(radius * std::sin(a));
    }
    return pts;
}

std::vector<double> segment_pts(int n, uint64_t seed, double y = 0.0) {
    Rng rng(seed);
    std::vector<double> pts;
    for (int i = 0; i < n; ++i) {
        pts.push_back(rng.uniform01());
        pts.push_back(y);
    }
    return pts;
}

std::vector<double> plane_disk_pts(int n, uint64_t seed) {
    Rng rng(seed);
    std::vector<double> pts;
    for (int i = 0; i < n; ++i) {
        const double r = std::sqrt(rng.uniform01());
        const double a = rng.uniform(0.0, 2.0 * M_PI);
        pts.push_back(r * std::cos(a));
        pts.push_back(r * std::sin(a));
    }
    return pts;
}

}  // namespace

TEST_CASE("graph on a circle is one component; parallel segments are two") {
    auto circ = circle_pts(1000, 3);
    auto g = build_graph({circ.data(), 1000, 2});
    CHECK(g.component_count == 1);

    auto seg = segment_pts(400, 4, 0.0);
    auto seg2 = segment_pts(400, 5, 1.0);
    seg.insert(seg.end(), seg2.begin(), seg2.end());
    auto g2 = build_graph({seg.data(), 800, 2});
    CHECK(g2.component_count == 2);

    GraphOptions strict;
    strict.expect_connected = true;
    CHECK_THROWS_AS(build_graph({seg.data(), 800, 2}, strict), Error);
}

TEST_CASE("A2 link graph is connected and stays connected when n grows") {
    auto a2 = shared(make_ak(2));
    for (int n : {3000, 6000}) {
        auto link = sample_sphere_slice(a2, 1.0, n, 71);
        auto g = build_graph(link.view());
        CHECK(g.component_count == 1);
    }
}

TEST_CASE("inner distance on a straight segment is the chord") {
    auto seg = segment_pts(1200, 9);
    // pin the endpoints
    seg[0] = 0.0;
    seg[1] = 0.0;
    seg[2] = 1.0;
    seg[3] = 0.0;
    const PointsView view{seg.data(), 1200, 2};
    auto g = build_graph(view);
    REQUIRE(g.component_count == 1);
    const double d = inner_distance(g, view, 0, 1);
    CHECK(d == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("inner distance between antipodes of a circle is pi") {
    auto circ = circle_pts(3000, 10);
    circ[0] = 1.0;
    circ[1] = 0.0;
    circ[2] = -1.0;
    circ[3] = 0.0;
    const PointsView view{circ.data(), 3000, 2};
    auto g = build_graph(view);
    const double d = inner_distance(g, view, 0, 1);
    CHECK(d == doctest::Approx(M_PI).epsilon(0.02));
}

TEST_CASE("unreachable pairs throw") {
    auto seg = segment_pts(300, 11, 0.0);
    auto far = segment_pts(300, 12, 5.0);
    seg.insert(seg.end(), far.begin(), far.end());
    const PointsView view{seg.data(), 600, 2};
    auto g = build_graph(view);
    CHECK_THROWS_AS(inner_distance(g, view, 0, 599), Error);
}

TEST_CASE("graph distances obey the triangle inequality and dominate chords") {
    auto circ = circle_pts(1500, 13);
    const PointsView view{circ.data(), 1500, 2};
    auto g = build_graph(view);
    const int a = 0, b = 500, c = 1000;
    const int srcs[3] = {a, b, c};
    auto da = graph_distances(g, view, std::span<const int>(srcs, 1));
    auto db = graph_distances(g, view, std::span<const int>(srcs + 1, 1));
    CHECK(da[c] <= da[b] + db[c] + 1e-9);
    // inner >= outer on a sample of nodes
    for (int i = 0; i < 1500; i += 97)
        CHECK(da[i] >= std::sqrt(dist2(view.point(a), view.point(i))) - 1e-9);
}

TEST_CASE("plane pairs have ratios near 1 that shrink under refinement") {
    // the same absolute pair-separation floor at both densities, so the
    // oracle comparison is like for like
    double worst_coarse = 0.0, worst_fine = 0.0;
    {
        auto disk = plane_disk_pts(2500, 15);
        const PointsView view{disk.data(), 2500, 2};
        auto g = build_graph(view);
        auto rep = normal_embedding_ratio(view, g, 300, 16, 60.0);
        worst_coarse = rep.max_ratio;
        CHECK(rep.pair_count > 60);
        CHECK(rep.max_ratio <= 1.05);
        CHECK(rep.max_ratio >= 0.999);
    }
    {
        auto disk = plane_disk_pts(10000, 17);
        const PointsView view{disk.data(), 10000, 2};
        auto g = build_graph(view);
        auto rep = normal_embedding_ratio(view, g, 300, 18, 120.0);
        worst_fine = rep.max_ratio;
        CHECK(rep.max_ratio <= 1.04);
    }
    CHECK(worst_fine <= worst_coarse + 0.01);
}

TEST_CASE("circle embedding ratio approaches pi/2") {
    auto circ = circle_pts(4000, 19);
    const PointsView view{circ.data(), 4000, 2};
    auto g = build_graph(view);
    auto rep = normal_embedding_ratio(view, g, 600, 20);
    INFO("max ratio ", rep.max_ratio);
    CHECK(rep.max_ratio <= M_PI / 2.0 * 1.03);
    CHECK(rep.max_ratio >= M_PI / 2.0 * 0.90);
}

TEST_CASE("sandwich on a flat disk: kappa near 1, same classification") {
    // multi-radius plane cloud about the origin in R^4
    auto plane = shared(make_real_plane2_in_r4());
    auto res = inner_density_sandwich(plane, 2, geometric_grid(0.3, 0.03, 5), 9000, 33);
    INFO("kappa [", res.kappa_lower, ", ", res.kappa_upper, "]");
    CHECK(res.outer.classification == DensityClass::Positive);
    CHECK(res.inner.classification == DensityClass::Positive);
    CHECK(res.kappa_lower > 0.8);
    CHECK(res.kappa_upper < 1.25);
}

TEST_CASE("sandwich on a circle germ stays within the arc/chord band") {
    // circle through the origin: germ of a 1-dimensional set at a point
    Rng rng(41);
    std::vector<double> pts;
    const int n = 9000;
    for (int i = 0; i < n; ++i) {
        const double a = rng.uniform(0.0, 2.0 * M_PI);
        // circle of radius 1 centred at (1, 0): passes through the origin
        pts.push_back(1.0 + std::cos(a + M_PI));
        pts.push_back(std::sin(a + M_PI));
    }
    std::vector<double> origin = {0.0, 0.0};
    auto res = inner_density_sandwich_cloud({pts.data(), n, 2}, origin, 1,
                                            geometric_grid(0.4, 0.05, 5));
    INFO("kappa [", res.kappa_lower, ", ", res.kappa_upper, "]");
    CHECK(res.kappa_lower >= 0.85);
    CHECK(res.kappa_upper <= M_PI / 2.0 * 1.05);
    CHECK(res.outer.classification == DensityClass::Positive);
    CHECK(res.inner.classification == DensityClass::Positive);
}

TEST_CASE("the Briancon-Speder double wedge has scale-independent distortion") {
    // X_0 restricted to {eps|y| <= |z| <= |y|/eps} is metrically conical:
    // the inner/outer ratio over a radius band must not grow as the band
    // shrinks toward the origin
    auto bs0 = shared(make_briancon_speder(0.0));
    const double eps = 0.3;
    auto in_wedge = [eps](std::span<const double> p) {
        const double ay = std::sqrt(p[2] * p[2] + p[3] * p[3]);
        const double az = std::sqrt(p[4] * p[4] + p[5] * p[5]);
        return eps * ay <= az && az <= ay / eps;
    };
    auto band_ratio = [&](double r, uint64_t seed) {
        SampleCloud cloud;
        int slice_idx = 0;
        for (double s = r; s <= 2.0 * r * 1.0001; s *= 1.15) {
            auto part = sample_region(bs0, s, 1200, substream_seed(seed, ++slice_idx),
                                      in_wedge);
            if (cloud.n() == 0) {
                cloud = part;
            } else {
                for (int i = 0; i < part.n(); ++i) cloud.push(part.point(i), part.residual[i]);
            }
        }
        auto g = build_graph(cloud.view());
        auto rep = normal_embedding_ratio(cloud.view(), g, 250, seed + 7, 40.0);
        return rep.max_ratio;
    };
    const double outer = band_ratio(0.1, 61);
    const double inner = band_ratio(0.02, 62);
    INFO("max ratio at r=0.1: ", outer, ", at r=0.02: ", inner);
    CHECK(outer < 3.0);
    CHECK(inner < 3.0);
    CHECK(inner <= outer * 1.5 + 0.2);
}

TEST_CASE("sandwich classifications agree on the A2 germ") {
    auto a2 = shared(make_ak(2));
    auto res = inner_density_sandwich(a2, 4, geometric_grid(0.4, 0.05, 5), 12000, 51);
    CHECK(res.outer.classification == DensityClass::Positive);
    CHECK(res.inner.classification == res.outer.classification);
    CHECK(res.kappa_lower > 0.0);
    CHECK(res.kappa_upper >= res.kappa_lower);
}
