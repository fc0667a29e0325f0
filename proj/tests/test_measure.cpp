#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "germlab/measure.hpp"
#include "germlab/rng.hpp"
#include "germlab/variety.hpp"

using namespace germlab;

namespace {

std::shared_ptr<const VarietySpec> shared(VarietySpec s) {
    return std::make_shared<const VarietySpec>(std::move(s));
}

// uniform points on the unit 2-disk embedded in R^3 at z = 0
std::vector<double> disk_cloud(int n, uint64_t seed) {
    Rng rng(seed);
    std::vector<double> pts;
    pts.reserve(3 * n);
    for (int i = 0; i < n; ++i) {
        const double r = std::sqrt(rng.uniform01());
        const double a = rng.uniform(0.0, 2.0 * M_PI);
        pts.push_back(r * std::cos(a));
        pts.push_back(r * std::sin(a));
        pts.push_back(0.0);
    }
    return pts;
}

std::vector<double> circle_cloud(int n, uint64_t seed, double cx = 0.0) {
    Rng rng(seed);
    std::vector<double> pts;
    for (int i = 0; i < n; ++i) {
        const double a = rng.uniform(0.0, 2.0 * M_PI);
        pts.push_back(cx + std::cos(a));
        pts.push_back(std::sin(a));
        pts.push_back(0.0);
    }
    return pts;
}

}  // namespace

TEST_CASE("unit ball volumes") {
    CHECK(unit_ball_volume(0) == doctest::Approx(1.0));
    CHECK(unit_ball_volume(1) == doctest::Approx(2.0));
    CHECK(unit_ball_volume(2) == doctest::Approx(M_PI));
    CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * M_PI / 3.0));
    CHECK(unit_ball_volume(4) == doctest::Approx(M_PI * M_PI / 2.0));
    CHECK_THROWS_AS(unit_ball_volume(-1), Error);
}

TEST_CASE("knn measure: unit disk area") {
    auto pts = disk_cloud(4000, 2024);
    const PointsView view{pts.data(), 4000, 3};
    const auto est = measure_knn(view, 2);
    INFO("disk area ", est.value, " +- ", est.std_error);
    CHECK(std::fabs(est.value - M_PI) <= 3.0 * est.std_error + 0.02 * M_PI);
}

TEST_CASE("knn measure: unit circle length") {
    auto pts = circle_cloud(3000, 5);
    const PointsView view{pts.data(), 3000, 3};
    const auto est = measure_knn(view, 1);
    INFO("circle length ", est.value, " +- ", est.std_error);
    CHECK(std::fabs(est.value - 2.0 * M_PI) <= 3.0 * est.std_error + 0.02 * 2.0 * M_PI);
}

TEST_CASE("knn measure additivity on a disjoint union") {
    auto a = circle_cloud(1500, 7, 0.0);
    auto b = circle_cloud(1500, 8, 10.0);
    const auto ea = measure_knn({a.data(), 1500, 3}, 1);
    const auto eb = measure_knn({b.data(), 1500, 3}, 1);
    auto both = a;
    both.insert(both.end(), b.begin(), b.end());
    const auto eab = measure_knn({both.data(), 3000, 3}, 1);
    const double tol = 3.0 * (ea.std_error + eb.std_error + eab.std_error) + 0.05;
    CHECK(std::fabs(eab.value - (ea.value + eb.value)) <= tol);
}

TEST_CASE("knn measure flags a dimension mismatch") {
    Rng rng(31);
    std::vector<double> solid;
    for (int i = 0; i < 1500; ++i) {
        double v[3];
        rng.unit_vector(v);
        const double r = std::cbrt(rng.uniform01());
        for (double x : v) solid.push_back(r * x);
    }
    CHECK_THROWS_AS(measure_knn({solid.data(), 1500, 3}, 2), Error);
}

TEST_CASE("A1 ball measure matches the cone formula oracle") {
    auto a1 = shared(make_ak(1));
    // oracle: a straight cone has H^4(X ∩ B(0,1)) = H^3(link at r=1) / 4
    auto link = sample_sphere_slice(a1, 1.0, 6000, 91);
    MeasureOptions link_opts;
    link_opts.boundary_correct = false;  // the link is closed
    link_opts.rank_check = false;
    const auto link_m = measure_knn(link.view(), 3, link_opts);
    const double oracle = link_m.value / 4.0;

    auto ball = sample_ball(a1, 0.02, 1.0, 8000, 92);
    MeasureOptions ball_opts;
    ball_opts.rank_check = false;
    const auto est = hausdorff_measure(ball, 4, ball_opts);
    INFO("cone formula ", oracle, " direct ", est.value);
    const double tol = 3.0 * (est.std_error + link_m.std_error / 4.0) + 0.06 * oracle;
    CHECK(std::fabs(est.value - oracle) <= tol);
}

TEST_CASE("density profile: 2-plane in R^4 is a unit density cone") {
    auto plane = shared(make_real_plane2_in_r4());
    auto est = density_profile(plane, 2, geometric_grid(1e-1, 1e-3, 9), 1500, 11);
    INFO("theta ", est.theta, " beta ", est.beta);
    CHECK(est.theta == doctest::Approx(1.0).epsilon(0.05));
    CHECK(std::fabs(est.beta) <= 0.05);
    CHECK(est.classification == DensityClass::Positive);
}

TEST_CASE("density profile: two transverse planes have density 2") {
    auto planes = shared(make_real_transverse_planes_r4());
    auto est = density_profile(planes, 2, geometric_grid(1e-1, 1e-3, 9), 1500, 12);
    INFO("theta ", est.theta, " beta ", est.beta);
    CHECK(est.theta == doctest::Approx(2.0).epsilon(0.06));
    CHECK(est.classification == DensityClass::Positive);
}

TEST_CASE("straight cones have constant ratios across the grid") {
    auto a1 = shared(make_ak(1));
    auto est = density_profile(a1, 4, geometric_grid(1e-1, 1e-3, 7), 1500, 13);
    double lo = est.ratios[0], hi = est.ratios[0], se = 0.0;
    for (size_t i = 0; i < est.ratios.size(); ++i) {
        lo = std::min(lo, est.ratios[i]);
        hi = std::max(hi, est.ratios[i]);
        se = std::max(se, est.ratio_stderr[i]);
    }
    INFO("ratio band [", lo, ", ", hi, "]");
    CHECK(hi - lo <= 3.0 * (2.0 * se) + 0.08 * hi);
    CHECK(est.classification == DensityClass::Positive);
}

TEST_CASE("A1 germ density agrees with the ball-cloud route and is about 2") {
    auto a1 = shared(make_ak(1));
    auto prof = density_profile(a1, 4, geometric_grid(0.5, 0.01, 7), 1800, 14);
    CHECK(prof.theta == doctest::Approx(2.0).epsilon(0.2));
    CHECK(prof.classification == DensityClass::Positive);

    // independent route: fixed ball cloud, boundary-corrected measures
    auto ball = sample_ball(a1, 0.005, 0.6, 16000, 15);
    auto ball_prof = density_profile_ball_cloud(ball.view(), 4, geometric_grid(0.5, 0.05, 5));
    for (size_t i = 0; i < ball_prof.ratios.size(); ++i) {
        INFO("eps ", ball_prof.eps_grid[i], ": slice route ", prof.theta, " ball route ",
             ball_prof.ratios[i]);
        CHECK(ball_prof.ratios[i] == doctest::Approx(prof.theta).epsilon(0.25));
    }
    CHECK(ball_prof.classification == DensityClass::Positive);
}

TEST_CASE("a thin horn classifies as Zero with a positive excess exponent") {
    // synthetic 2-dim horn: circles of radius s^2 at distance s from 0
    SliceSampler horn = [](double s, int n, uint64_t seed) {
        Rng rng(seed);
        SliceSample slice;
        slice.s = s;
        slice.dim = 3;
        const double w = s * s;
        const double x = std::sqrt(std::max(s * s - w * w, 0.0));
        for (int i = 0; i < n; ++i) {
            const double a = rng.uniform(0.0, 2.0 * M_PI);
            slice.pts.push_back(x);
            slice.pts.push_back(w * std::cos(a));
            slice.pts.push_back(w * std::sin(a));
            slice.weight.push_back(1.0);
        }
        return slice;
    };
    DensityOptions opts;
    auto est = density_profile_slices(horn, 2, geometric_grid(1e-1, 1e-3, 9), opts);
    INFO("beta ", est.beta, " r2 ", est.beta_r2, " theta ", est.theta);
    CHECK(est.classification == DensityClass::Zero);
    CHECK(est.beta > 0.2);
}

TEST_CASE("dimension drop forces a Zero classification") {
    // a complex line (real dim 2) probed at k = 3: slices are circles
    SliceSampler axis = [](double s, int n, uint64_t seed) {
        Rng rng(seed);
        SliceSample slice;
        slice.s = s;
        slice.dim = 6;
        for (int i = 0; i < n; ++i) {
            const double a = rng.uniform(0.0, 2.0 * M_PI);
            slice.pts.insert(slice.pts.end(),
                             {0.0, 0.0, 0.0, 0.0, s * std::cos(a), s * std::sin(a)});
            slice.weight.push_back(1.0);
        }
        return slice;
    };
    DensityOptions opts;
    auto est = density_profile_slices(axis, 3, geometric_grid(1e-1, 1e-3, 7), opts);
    INFO("theta_upper ", est.theta_upper);
    CHECK(est.classification == DensityClass::Zero);
}

TEST_CASE("ambient noise at a fixed scale is Inconclusive") {
    Rng rng(77);
    std::vector<double> pts;
    for (int i = 0; i < 1500; ++i) {  // plane disk points
        const double r = std::sqrt(rng.uniform01());
        const double a = rng.uniform(0.0, 2.0 * M_PI);
        pts.insert(pts.end(), {r * std::cos(a), r * std::sin(a), 0.0, 0.0});
    }
    for (int i = 0; i < 1500; ++i) {  // ambient noise in the unit 4-ball
        double v[4];
        rng.unit_vector(v);
        const double r = std::pow(rng.uniform01(), 0.25);
        pts.insert(pts.end(), {r * v[0], r * v[1], r * v[2], r * v[3]});
    }
    auto est = density_profile_ball_cloud({pts.data(), 3000, 4}, 2,
                                          geometric_grid(1.0, 0.03, 8));
    INFO("fit rms ", est.fit_rms, " class ", to_string(est.classification));
    CHECK(est.classification == DensityClass::Inconclusive);
}

TEST_CASE("refinement does not flip classifications") {
    auto plane = shared(make_real_plane2_in_r4());
    auto e1 = density_profile(plane, 2, geometric_grid(1e-1, 1e-3, 7), 1000, 21);
    auto e2 = density_profile(plane, 2, geometric_grid(1e-1, 1e-3, 7), 2000, 21);
    CHECK(e1.classification == DensityClass::Positive);
    CHECK(e2.classification == DensityClass::Positive);
}

TEST_CASE("classify_density applies explicit thresholds") {
    DensityEstimate est;
    est.k = 3;
    est.eps_grid = {0.1, 0.01};
    est.ratios = {0.5, 0.3};
    est.ratio_stderr = {0.01, 0.01};
    est.beta = 0.5;
    est.beta_r2 = 0.99;
    est.fit_rms = 0.01;
    est.theta = 0.3;
    est.theta_lower = 0.28;
    est.theta_upper = 0.32;
    CHECK(classify_density(est, 0.2, 0.05) == DensityClass::Zero);
    CHECK(classify_density(est, 0.8, 0.05) == DensityClass::Positive);  // beta gate off
    CHECK(classify_density(est, 0.8, 0.30) == DensityClass::Inconclusive);  // theta straddles
    CHECK(classify_density(est, 0.8, 0.50) == DensityClass::Zero);  // tail below threshold
    est.fit_rms = 1.0;
    CHECK(classify_density(est, 0.2, 0.05) == DensityClass::Inconclusive);
}
