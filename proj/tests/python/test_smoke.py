"""Smoke tests for the python bindings: quick end-to-end calls only."""

import math
import sys

import germlab


def check(cond, msg):
    if not cond:
        print("FAIL:", msg)
        sys.exit(1)
    print("ok:", msg)


def main():
    check(abs(germlab.unit_ball_volume(2) - math.pi) < 1e-12, "unit_ball_volume(2) == pi")
    check(abs(germlab.unit_ball_volume(4) - math.pi**2 / 2) < 1e-12,
          "unit_ball_volume(4) == pi^2/2")

    a2 = germlab.make_ak(2)
    check(a2.ambient_real_dim == 6, "A2 lives in R^6")
    check(a2.germ_real_dim == 4, "A2 germ is 4-dimensional")
    check(a2.is_weighted_homogeneous(), "A2 is weighted homogeneous")

    # (1, i, 0) lies on x^2 + y^2 + z^3
    vals = a2.eval([1.0, 0.0, 0.0, 1.0, 0.0, 0.0])
    check(abs(vals[0][0]) < 1e-12 and abs(vals[0][1]) < 1e-12, "eval at (1, i, 0) vanishes")

    cloud = germlab.sample_sphere_slice(a2, 1.0, 500, seed=7)
    check(cloud.n == 500, "sphere slice has the requested count")
    check(cloud.points.shape == (500, 6), "points array shape")
    check(max(abs(r - 1.0) for r in cloud.radii) < 1e-8, "radii pinned to the sphere")
    check(max(cloud.residuals) <= 1e-9, "residuals within tolerance")

    # determinism across calls
    again = germlab.sample_sphere_slice(a2, 1.0, 500, seed=7)
    check((cloud.points == again.points).all(), "same seed, identical cloud")

    spec = germlab.parse_variety_config(
        "name = from-python\nvariables = x y z\nequation = x^2+y^2+z^3\nweights = 3 3 2\n"
    )
    check(spec.is_weighted_homogeneous(), "config round trip")

    scaled = germlab.weighted_scale(a2, [1.0, 0.0, 1.0, 0.0, 1.0, 0.0], 2.0)
    check(abs(scaled[0] - 2.0 ** 1.5) < 1e-12, "weighted scale exponent w1/w3")

    prof = germlab.density_profile(
        germlab.parse_variety_config(
            "name = plane\nfield = real\nvariables = x y z w\nequation = z\nequation = w\n"
        ),
        2, eps_hi=0.1, eps_lo=0.003, points=6, n_per_eps=1000, seed=3,
    )
    check(abs(prof["theta"] - 1.0) < 0.10, "plane density near 1, got %s" % prof["theta"])
    check(prof["classification"] == "Positive", "plane classified Positive")

    check("a2" in germlab.catalog_names(), "catalog contains a2")

    try:
        germlab.sample_sphere_slice(a2, -1.0, 10, seed=1)
        check(False, "negative radius must raise")
    except germlab.GermlabError:
        check(True, "negative radius raises GermlabError")

    print("python smoke: all checks passed")


if __name__ == "__main__":
    main()
