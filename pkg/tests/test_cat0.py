import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lstar.cat0 import (ORIGIN, ConeDirection, HypPoint, L2HypPoint, alexandrov_angle,
                        alexandrov_angle_limit, bounded_curvature_experiment, comparison_angle,
                        cone_distance, direction_to, euclidean_factor, exp_discontinuity_demo,
                        exp_map, hilbertian_product_distance, hyp_angle, hyp_distance, hyp_exp,
                        hyp_geodesic, hyp_symmetry, hyperbolic_factor, l2_distance, l2_geodesic,
                        l2_midpoint, l2_symmetry, large_rho_oracle, log_map, multihomothety_check,
                        product_geodesic, random_direction, random_hyp_point, random_l2_point,
                        ray_family, tangent_cone_check, base_point)
from lstar.errors import (DegeneracyError, InvalidDirectionError, InvalidPointError,
                          ParameterError)

hyp_points = st.builds(HypPoint, st.floats(0, 4), st.floats(-math.pi, math.pi))


def lorentz_cosh(a, b):
    x, y = a.coords, b.coords
    return x[0] * y[0] - x[1] * y[1] - x[2] * y[2]


def test_distance_by_construction():
    b = HypPoint.from_coords([math.cosh(1), math.sinh(1), 0])
    a = HypPoint.from_coords([1, 0, 0])
    assert hyp_distance(a, b) == pytest.approx(1.0, abs=1e-15)


def test_off_hyperboloid_rejected():
    with pytest.raises(InvalidPointError):
        HypPoint.from_coords([1.0, 0.5, 0.0])
    with pytest.raises(InvalidPointError):
        HypPoint(-1.0, 0.0)


@settings(max_examples=200, deadline=None)
@given(hyp_points, hyp_points)
def test_distance_matches_lorentz_oracle(a, b):
    # acosh near 1 is ill-conditioned, so compare on the cosh side
    assert math.cosh(hyp_distance(a, b)) == pytest.approx(lorentz_cosh(a, b), rel=1e-12)


def test_far_points_stay_finite():
    a, b = HypPoint(800.0, 0.15), HypPoint(800.0, -0.15)
    assert hyp_distance(a, b) == pytest.approx(large_rho_oracle(800.0, 0.3), rel=1e-14)
    with pytest.raises(InvalidPointError):
        a.coords


@settings(max_examples=100, deadline=None)
@given(hyp_points, hyp_points, st.floats(0, 1))
def test_geodesic_splits_distance(a, b, t):
    m = hyp_geodesic(a, b, t)
    d = hyp_distance(a, b)
    assert hyp_distance(a, m) == pytest.approx(t * d, abs=1e-8)
    assert hyp_distance(m, b) == pytest.approx((1 - t) * d, abs=1e-8)


@settings(max_examples=100, deadline=None)
@given(hyp_points, hyp_points, hyp_points)
def test_symmetry_is_isometric_involution(c, y, z):
    sy, sz = hyp_symmetry(c, y), hyp_symmetry(c, z)
    assert hyp_distance(hyp_symmetry(c, sy), y) <= 1e-7
    assert hyp_distance(sy, sz) == pytest.approx(hyp_distance(y, z), abs=1e-7)
    assert hyp_distance(c, sy) == pytest.approx(hyp_distance(c, y), abs=1e-7)


def test_hyp_angle_law_of_cosines(rng):
    for _ in range(50):
        h, y, z = (random_hyp_point(rng) for _ in range(3))
        a, b, c = hyp_distance(h, y), hyp_distance(h, z), hyp_distance(y, z)
        if min(a, b) < 1e-3:
            continue
        cos = (math.cosh(a) * math.cosh(b) - math.cosh(c)) / (math.sinh(a) * math.sinh(b))
        assert hyp_angle(h, y, z) == pytest.approx(math.acos(max(-1, min(1, cos))), abs=1e-7)


def test_l2_distance_formulas():
    a, b = HypPoint(1.0, 0.3), HypPoint(2.0, -1.0)
    assert l2_distance(L2HypPoint.constant(a), L2HypPoint.constant(b)) == hyp_distance(a, b)
    x = L2HypPoint(((0.5, ORIGIN), (0.5, ORIGIN)))
    y = L2HypPoint(((0.5, a), (0.5, b)))
    da, db = hyp_distance(ORIGIN, a), hyp_distance(ORIGIN, b)
    assert l2_distance(x, y) == pytest.approx(math.sqrt((da ** 2 + db ** 2) / 2), rel=1e-15)


def test_bad_weights_rejected():
    with pytest.raises(InvalidPointError):
        L2HypPoint(((0.4, ORIGIN), (0.4, ORIGIN)))
    with pytest.raises(InvalidPointError):
        L2HypPoint(())


def test_triangle_inequality(rng):
    for _ in range(1000):
        x, y, z = (random_l2_point(rng) for _ in range(3))
        assert l2_distance(x, z) <= l2_distance(x, y) + l2_distance(y, z) + 1e-12


def test_l2_geodesic_endpoints_and_midpoint(rng):
    x, y = random_l2_point(rng), random_l2_point(rng)
    assert l2_geodesic(x, y, 0) is x and l2_geodesic(x, y, 1) is y
    m = l2_midpoint(x, y)
    d = l2_distance(x, y)
    assert l2_distance(x, m) == pytest.approx(d / 2, abs=1e-9)
    # the symmetry at the midpoint exchanges the endpoints
    assert l2_distance(l2_symmetry(m, x), y) <= 1e-8


def test_comparison_angle_examples(rng):
    x = L2HypPoint.constant(ORIGIN)
    y = L2HypPoint.constant(HypPoint(1.0, 0.2))
    z = L2HypPoint.constant(HypPoint(2.5, 0.2))
    assert comparison_angle(x, y, z) == pytest.approx(0.0, abs=1e-7)
    a, b = random_l2_point(rng), random_l2_point(rng)
    assert comparison_angle(l2_midpoint(a, b), a, b) == pytest.approx(math.pi, abs=1e-6)
    p, q, r = (random_l2_point(rng) for _ in range(3))
    dpq, dpr, dqr = l2_distance(p, q), l2_distance(p, r), l2_distance(q, r)
    oracle = math.acos((dpq ** 2 + dpr ** 2 - dqr ** 2) / (2 * dpq * dpr))
    assert comparison_angle(p, q, r) == pytest.approx(oracle, abs=1e-12)
    with pytest.raises(DegeneracyError):
        comparison_angle(p, p, r)


def test_alexandrov_examples():
    x = L2HypPoint.constant(ORIGIN)
    d = ConeDirection(x, ((1.0, 0.4, 1.0),))
    assert alexandrov_angle(d, d) == 0.0
    e = ConeDirection(x, ((1.0, 1.1, 1.0),))
    assert alexandrov_angle(d, e) == pytest.approx(0.7, abs=1e-15)
    with pytest.raises(InvalidDirectionError):
        ConeDirection(x, ((1.0, 0.0, 2.0),))


@pytest.mark.parametrize("lam", [0.5, 1e-2, 1e-4])
def test_two_atom_angle_is_independent_of_mass(lam):
    base = L2HypPoint(((lam, ORIGIN), (1 - lam, ORIGIN)))
    d1 = ConeDirection(base, ((lam, 0.2, 1 / math.sqrt(lam)), (1 - lam, 0.0, 0.0)))
    d2 = ConeDirection(base, ((lam, -0.1, 1 / math.sqrt(lam)), (1 - lam, 0.0, 0.0)))
    assert alexandrov_angle(d1, d2) == pytest.approx(0.3, abs=1e-12)


def test_alexandrov_is_limit_of_comparison(rng):
    x = L2HypPoint.constant(HypPoint(0.7, 0.2))
    y = L2HypPoint.constant(HypPoint(2.0, 1.0))
    z = L2HypPoint.constant(HypPoint(1.5, -2.0))
    _, dy = direction_to(x, y)
    _, dz = direction_to(x, z)
    approx = alexandrov_angle_limit(x, y, z, ss=(1e-5,))
    assert approx[0] == pytest.approx(alexandrov_angle(dy, dz), abs=1e-5)
    assert alexandrov_angle(dy, dz) == pytest.approx(
        hyp_angle(x.points[0], y.points[0], z.points[0]), abs=1e-12)


def test_tangent_cone_isometry(rng):
    samples = []
    for _ in range(1000):
        x = random_l2_point(rng)
        samples.append(((rng.uniform(0, 3), random_direction(rng, x)),
                        (rng.uniform(0, 3), random_direction(rng, x))))
    assert tangent_cone_check(samples) <= 1e-12
    x = random_l2_point(rng)
    d = random_direction(rng, x)
    assert tangent_cone_check([((1.0, d), (1.0, d))]) == 0.0


def test_single_atom_cone_is_plane():
    x = L2HypPoint.constant(ORIGIN)
    d1 = ConeDirection(x, ((1.0, 0.0, 1.0),))
    d2 = ConeDirection(x, ((1.0, math.pi / 2, 1.0),))
    assert cone_distance(3.0, d1, 4.0, d2) == pytest.approx(5.0, rel=1e-15)


def test_exp_log_round_trip(rng):
    for _ in range(100):
        x, y = random_l2_point(rng), random_l2_point(rng)
        lam, d = log_map(x, y)
        assert l2_distance(exp_map(lam, d), y) <= 1e-9
    x = random_l2_point(rng)
    assert log_map(x, x) == (0.0, None)


def test_hyp_exp_moves_by_t():
    h = HypPoint(1.3, 0.4)
    assert hyp_distance(h, hyp_exp(h, 0.9, 2.0)) == pytest.approx(2.0, abs=1e-12)


def test_sweep_against_independent_oracle():
    row = bounded_curvature_experiment(1.0, 0.3, [1e-4])[0]
    rho, lam = 100.0, 1e-4
    # cosh d12 = cosh^2 rho - sinh^2 rho cos alpha, rewritten to avoid overflow
    d12 = large_rho_oracle(rho, 0.3)
    d_yz = math.sqrt(lam) * d12
    dxy = math.sqrt(lam) * rho
    oracle = math.acos((2 * dxy ** 2 - d_yz ** 2) / (2 * dxy ** 2))
    assert row["d_yz"] == pytest.approx(d_yz, rel=1e-12)
    assert row["comparison_angle_rad"] == pytest.approx(oracle, abs=1e-10)
    assert row["comparison_angle_rad"] == pytest.approx(2.75, abs=0.01)
    assert row["alexandrov_angle_rad"] == pytest.approx(0.3, abs=1e-12)


def test_sweep_increases_toward_pi():
    rows = bounded_curvature_experiment(1.0, 0.3, [1e-1, 1e-2, 1e-3, 1e-4, 1e-5])
    comp = [r["comparison_angle_rad"] for r in rows]
    assert all(a < b for a, b in zip(comp, comp[1:]))
    assert comp[-1] < math.pi
    assert all(abs(r["alexandrov_angle_rad"] - 0.3) <= 1e-12 for r in rows)


def test_ray_family_rejects_bad_parameters():
    for args in [(1.0, 0.3, 0.0), (1.0, 0.3, -1.0), (0.0, 0.3, 0.1), (1.0, 4.0, 0.1)]:
        with pytest.raises(ParameterError):
            ray_family(*args)


def test_exp_discontinuity():
    rows = exp_discontinuity_demo(1.0, [1e-6, 1e-8])
    for r in rows:
        assert r["cone_distance"] <= 1e-3
        assert r["exp_distance"] >= 0.5


def test_products():
    H, E = hyperbolic_factor(), euclidean_factor(2)
    u = [HypPoint(1.0, 0.0), np.array([3.0, 0.0])]
    v = [ORIGIN, np.array([0.0, 4.0])]
    assert hilbertian_product_distance([H, E], u, v) == pytest.approx(math.sqrt(1 + 25), rel=1e-15)
    assert hilbertian_product_distance([H, E], base_point([H, E]), base_point([H, E])) == 0.0
    mid = product_geodesic([H, E], u, v, 0.5)
    assert hilbertian_product_distance([H, E], u, mid) == pytest.approx(
        0.5 * hilbertian_product_distance([H, E], u, v), rel=1e-12)
    with pytest.raises(ParameterError):
        hilbertian_product_distance([], [], [])


def test_multihomothety():
    assert not multihomothety_check([1 / i for i in range(1, 21)], 0.1, 1.0)
    assert multihomothety_check([1 / i for i in range(1, 11)], 0.1, 1.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_cn_inequality_property(seed):
    r = np.random.default_rng(seed)
    x, y, z = (random_l2_point(r) for _ in range(3))
    m = l2_midpoint(x, y)
    rhs = 0.5 * l2_distance(z, x) ** 2 + 0.5 * l2_distance(z, y) ** 2 - 0.25 * l2_distance(x, y) ** 2
    assert l2_distance(z, m) ** 2 <= rhs + 1e-9
