#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "germlab/polynomial.hpp"

using namespace germlab;

namespace {
const std::vector<std::string> kXYZ = {"x", "y", "z"};
Cplx ev(const Polynomial& p, Cplx x, Cplx y, Cplx z) {
    const Cplx pt[3] = {x, y, z};
    return p.eval(std::span<const Cplx>(pt, 3));
}
}  // namespace

TEST_CASE("parser handles powers, implicit products and parameters") {
    auto p = parse_polynomial("x^2+y^2+z^3", kXYZ);
    CHECK(ev(p, {1, 0}, {0, 1}, {0, 0}) == Cplx(0, 0));  // 1 + (-1)
    CHECK(ev(p, {2, 0}, {0, 0}, {1, 0}) == Cplx(5, 0));

    auto bs = parse_polynomial("x^5+z^15+y^7z+txy^6", kXYZ, {{"t", Cplx(1, 0)}});
    // t=1, at (1,0,0): only x^5 survives
    CHECK(ev(bs, {1, 0}, {0, 0}, {0, 0}) == Cplx(1, 0));
    // term y^7 z present: at x=0,y=1,z=2 -> 2^15 + 2
    CHECK(ev(bs, {0, 0}, {1, 0}, {2, 0}).real() == doctest::Approx(32770.0));

    auto bs0 = parse_polynomial("x^5+z^15+y^7z+txy^6", kXYZ, {{"t", Cplx(0, 0)}});
    CHECK(ev(bs0, {1, 0}, {1, 0}, {0, 0}) == Cplx(1, 0));  // txy^6 gone

    auto c = parse_polynomial("(2+3i)x + 1.5e-1", kXYZ);
    CHECK(ev(c, {1, 0}, {0, 0}, {0, 0}) == Cplx(2.15, 3.0));

    auto m = parse_polynomial("x*y - 2(x+y)^2", kXYZ);
    CHECK(ev(m, {1, 0}, {2, 0}, {0, 0}).real() == doctest::Approx(2.0 - 18.0));
}

TEST_CASE("parser rejects malformed input") {
    CHECK_THROWS_AS(parse_polynomial("x^2 + q", kXYZ), Error);
    CHECK_THROWS_AS(parse_polynomial("x^", kXYZ), Error);
    CHECK_THROWS_AS(parse_polynomial("(x+y", kXYZ), Error);
    CHECK_THROWS_AS(parse_polynomial("", kXYZ), Error);
}

TEST_CASE("indexed variables parse with longest match") {
    const std::vector<std::string> zs = {"z1", "z2", "z3"};
    auto p = parse_polynomial("z1^2+z2^2+z3^3", zs);
    const Cplx pt[3] = {{1, 0}, {0, 1}, {0, 0}};
    CHECK(p.eval(std::span<const Cplx>(pt, 3)) == Cplx(0, 0));
}

TEST_CASE("derivative and substitution") {
    auto p = parse_polynomial("x^5+z^15+y^7z", kXYZ);
    auto px = p.derivative(0);
    CHECK(ev(px, {2, 0}, {0, 0}, {0, 0}).real() == doctest::Approx(5 * 16.0));
    auto pz = p.derivative(2);
    // d/dz = 15 z^14 + y^7
    CHECK(ev(pz, {0, 0}, {1, 0}, {1, 0}).real() == doctest::Approx(16.0));

    auto sliced = p.substitute_zero(2);  // z = 0 leaves x^5
    CHECK(ev(sliced, {2, 0}, {5, 0}, {7, 0}).real() == doctest::Approx(32.0));
    CHECK(sliced.total_degree() == 5);
}

TEST_CASE("weighted degree detects quasi-homogeneity") {
    auto bs = parse_polynomial("x^5+z^15+y^7z+xy^6", kXYZ);
    const int w[3] = {3, 2, 1};
    CHECK(bs.weighted_degree(std::span<const int>(w, 3)) == 15);

    auto bad = parse_polynomial("x^5+z^14", kXYZ);
    CHECK(bad.weighted_degree(std::span<const int>(w, 3)) == -1);
}

TEST_CASE("magnitude scale grows with the radius") {
    auto p = parse_polynomial("x^2+y^2+z^3", kXYZ);
    CHECK(p.magnitude_at_radius(1.0) == doctest::Approx(3.0));
    CHECK(p.magnitude_at_radius(2.0) == doctest::Approx(4.0 + 4.0 + 8.0));
}
