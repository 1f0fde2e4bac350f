import math

import numpy as np
import pytest

from vortexdyn.core import VortexConfiguration, velocity_field
from vortexdyn.integrator import integrate
from vortexdyn.reduced import (
    RingSystem,
    RingVariant,
    collinear_rhs,
    detect_collinear,
    heron_area,
    integrate_ring,
    lift_ring,
    phase_state,
    ring_kernel_sum,
    ring_kernel_sum_direct,
    ring_radii,
    ring_rhs,
    ring_sum_rate,
    triangle_rhs_mixed,
    triangle_rhs_same_sign,
    triangle_state,
    unit_circle_point,
)
from vortexdyn.stepper import StepControl
from vortexdyn.suites import ring_lift_error

from conftest import random_config_positions

EXPECTED_SUMS = {
    RingVariant.ALIGNED_SAME: lambda n: 8 * n - 4,
    RingVariant.STAGGERED_SAME: lambda n: 8 * n - 4,
    RingVariant.STAGGERED_OPPOSITE: lambda n: -4,
    RingVariant.CENTER_ALIGNED_SAME: lambda n: 8 * n + 4,
    RingVariant.CENTER_STAGGERED_SAME: lambda n: 8 * n + 4,
    RingVariant.CENTER_ALIGNED_OPPOSITE_CENTER: lambda n: 8 * n - 12,
    RingVariant.CENTER_STAGGERED_OPPOSITE_CENTER: lambda n: 8 * n - 12,
    RingVariant.CENTER_STAGGERED_OPPOSITE_RING: lambda n: -4,
}


# collinear


def test_detect_collinear_on_axis():
    red = detect_collinear(np.array([(-1.0, 0.0), (0.0, 0.0), (2.0, 0.0)]))
    assert red.origin == pytest.approx((0, 0), abs=1e-15)
    assert red.direction == pytest.approx((1, 0), abs=1e-15)
    assert red.offsets == pytest.approx((-1, 0, 2), abs=1e-15)


def test_detect_collinear_rejects_triangle():
    tri = np.array([(0, 0), (1, 0), (0.5, math.sqrt(3) / 2)])
    assert detect_collinear(tri) is None


def test_detect_collinear_diagonal():
    t = np.array([-1.0, 0.5, 2.0])
    x = np.stack([t, t + np.array([1e-14, -1e-14, 0])], axis=1)
    red = detect_collinear(x)
    s = 1 / math.sqrt(2)
    assert red.direction == pytest.approx((s, s), abs=1e-12)
    np.testing.assert_allclose(red.lift(), x, atol=1e-10)


def test_collinear_rhs_examples():
    np.testing.assert_allclose(collinear_rhs((-1, 0, 1), (1, 1, 1)), (-3, 0, 3), atol=1e-15)
    np.testing.assert_allclose(collinear_rhs((-1, 0, 1), (1, -1, 1)), (1, 0, -1), atol=1e-15)
    r = 0.7
    np.testing.assert_allclose(collinear_rhs((-r, r), (1, 1)), (-1 / r, 1 / r), rtol=1e-15)


def test_collinear_rhs_lifts_to_velocity(rng):
    a = np.sort(rng.uniform(-3, 3, 6))
    w = (1, -1, -1, 1, 1, -1)
    e = np.array([0.6, 0.8])
    x = np.array([0.3, -0.2]) + a[:, None] * e
    np.testing.assert_allclose(collinear_rhs(a, w)[:, None] * e, velocity_field(VortexConfiguration(x, w)), atol=1e-12)


def test_collinear_rhs_coincident():
    with pytest.raises(ValueError):
        collinear_rhs((0.0, 0.0, 1.0), (1, 1, 1))


# rings


def test_ring_rhs_examples():
    d1, d2 = ring_rhs(RingSystem(2, RingVariant.ALIGNED_SAME, 1.0, 4.0))
    assert d1 == pytest.approx(-2 / 3, rel=1e-15) and d2 == pytest.approx(38 / 3, rel=1e-15)
    d1, _ = ring_rhs(RingSystem(3, RingVariant.CENTER_ALIGNED_OPPOSITE_CENTER, 1.0, 4.0))
    assert d1 == pytest.approx(-12 / 7, rel=1e-15)
    with pytest.raises(ValueError):
        ring_rhs(RingSystem(3, RingVariant.CENTER_ALIGNED_OPPOSITE_CENTER, 2.0, 2.0))


@pytest.mark.parametrize("variant", list(RingVariant))
def test_ring_sum_rules(variant, rng):
    for n in range(2, 9):
        assert ring_sum_rate(variant, n) == EXPECTED_SUMS[variant](n)
        for _ in range(5):
            r1 = rng.uniform(0.1, 5)
            r2 = r1 + rng.uniform(0.1, 5)
            d1, d2 = ring_rhs(RingSystem(n, variant, r1, r2))
            assert d1 + d2 == pytest.approx(EXPECTED_SUMS[variant](n), abs=1e-12 * (1 + abs(d1)))


@pytest.mark.parametrize("variant", list(RingVariant))
@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_ring_rhs_matches_lifted_velocity(variant, n):
    sys = RingSystem(n, variant, 1.3, 3.1)
    c = lift_ring(sys)
    v = velocity_field(c)
    x = c.positions
    # d|x|^2/dt = 2 x . v for the first vortex of each ring
    d1, d2 = ring_rhs(sys)
    assert 2 * x[0] @ v[0] == pytest.approx(d1, rel=1e-12, abs=1e-12)
    assert 2 * x[n] @ v[n] == pytest.approx(d2, rel=1e-12, abs=1e-12)


def test_kernel_sum_examples():
    assert ring_kernel_sum(2, 2, False) == pytest.approx(10 / 3, rel=1e-15)
    assert ring_kernel_sum(2, 3, True) == pytest.approx(7 / 3, rel=1e-15)
    assert ring_kernel_sum(1 + 1e-12, 4, True) < 1e-10
    with pytest.raises(ValueError):
        ring_kernel_sum(1.0, 3, True)


@pytest.mark.parametrize("n", range(1, 13))
@pytest.mark.parametrize("x", [1.1, 2.0, 10.0])
@pytest.mark.parametrize("staggered", [False, True])
def test_kernel_sum_matches_direct(n, x, staggered):
    assert ring_kernel_sum(x, n, staggered) == pytest.approx(ring_kernel_sum_direct(x, n, staggered), rel=1e-12)


def test_lift_examples():
    c = lift_ring(RingSystem(2, RingVariant.ALIGNED_SAME, 1.0, 4.0))
    np.testing.assert_array_equal(c.positions, [(1, 0), (-1, 0), (2, 0), (-2, 0)])
    c = lift_ring(RingSystem(2, RingVariant.STAGGERED_SAME, 1.0, 4.0))
    np.testing.assert_array_equal(c.positions, [(1, 0), (-1, 0), (0, 2), (0, -2)])
    c = lift_ring(RingSystem(3, RingVariant.CENTER_ALIGNED_OPPOSITE_CENTER, 1.0, 4.0))
    assert c.n == 7 and tuple(c.positions[-1]) == (0, 0)
    assert c.windings == (1,) * 6 + (-1,)
    c = lift_ring(RingSystem(3, RingVariant.CENTER_STAGGERED_OPPOSITE_RING, 1.0, 4.0))
    assert c.windings == (1, 1, 1, -1, -1, -1, -1)


def test_unit_circle_points_are_exactly_symmetric():
    from fractions import Fraction

    for n in (2, 3, 4, 5, 6, 8, 12):
        pts = np.array([unit_circle_point(Fraction(j, n)) for j in range(n)])
        mirrored = np.array([unit_circle_point(Fraction(-j, n)) for j in range(n)])
        np.testing.assert_array_equal(pts[:, 0], mirrored[:, 0])
        np.testing.assert_array_equal(pts[:, 1], -mirrored[:, 1])
    c, s = unit_circle_point(Fraction(1, 8))
    assert c == s


def test_ring_system_validation():
    with pytest.raises(ValueError):
        RingSystem.initial(3, RingVariant.ALIGNED_SAME, 2.0, 1.0)
    with pytest.raises(ValueError):
        RingSystem(1, RingVariant.ALIGNED_SAME, 1.0, 2.0)


@pytest.mark.parametrize("variant", list(RingVariant))
@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_lift_reduce_round_trip(variant, n):
    assert ring_lift_error(RingSystem(n, variant, 1.0, 4.0)) < 1e-6


@pytest.mark.parametrize(
    "variant,sign",
    [(RingVariant.CENTER_ALIGNED_OPPOSITE_CENTER, 1), (RingVariant.CENTER_STAGGERED_OPPOSITE_CENTER, -1)],
)
def test_n3_center_conserved_quantity(variant, sign):
    sys = RingSystem.initial(3, variant, 1.0, 2.0)
    traj = integrate_ring(sys, StepControl(t_end=1e3, sampling="log", sample_interval=1e-3, dt_max=1e2))
    q = 1 / np.sqrt(traj.rho[:, 0]) + sign / np.sqrt(traj.rho[:, 1])
    assert np.max(np.abs(q - q[0])) < 1e-8


def test_n3_opposite_center_inner_ring_approaches_limit():
    sys = RingSystem.initial(3, RingVariant.CENTER_ALIGNED_OPPOSITE_CENTER, 1.0, 2.0)
    traj = integrate_ring(sys, StepControl(t_end=1e6, sampling="log", sample_interval=1e-3, dt_max=1e5))
    limit = (2 / 3) ** 2
    gap = np.abs(traj.rho[:, 0] - limit)
    assert gap[-1] < 2e-3 * limit
    assert np.all(np.diff(gap[len(gap) // 2 :]) <= 0)


def test_staggered_opposite_sum_law():
    sys = RingSystem.initial(4, RingVariant.STAGGERED_OPPOSITE, 1.0, 2.0)
    traj = integrate_ring(sys, StepControl(t_end=2.0))
    assert traj.terminal == "collision"
    assert traj.t_stop == pytest.approx(1.25, abs=1e-6)
    np.testing.assert_allclose(traj.rho.sum(axis=1), 5 - 4 * traj.times, atol=1e-8)


def test_ring_radii_extraction():
    sys = RingSystem(3, RingVariant.STAGGERED_SAME, 0.5, 2.5)
    r1, r2 = ring_radii(lift_ring(sys).positions, 3)
    np.testing.assert_allclose(r1, 0.5, rtol=1e-15)
    np.testing.assert_allclose(r2, 2.5, rtol=1e-15)


# triangles


def test_triangle_state_examples():
    eq = np.array([(0, 0), (1, 0), (0.5, math.sqrt(3) / 2)])
    s = triangle_state(eq)
    for th in (s.theta1, s.theta2, s.theta3):
        assert th == pytest.approx(math.pi / 3, abs=1e-14)
    assert s.area == pytest.approx(math.sqrt(3) / 4, rel=1e-14)
    s = triangle_state(np.array([(0, 0), (1, 0), (0, 1)]))
    assert (s.theta1, s.theta2, s.theta3) == pytest.approx((math.pi / 2, math.pi / 4, math.pi / 4), abs=1e-14)


def test_triangle_area_matches_cross_product(rng):
    for _ in range(20):
        x = random_config_positions(rng, 3)
        s = triangle_state(x)
        u, v = x[1] - x[0], x[2] - x[0]
        cross = 0.5 * abs(u[0] * v[1] - u[1] * v[0])
        assert s.area == pytest.approx(cross, abs=1e-12)
        assert s.theta1 + s.theta2 + s.theta3 == pytest.approx(math.pi, abs=1e-10)
    assert heron_area(3, 4, 5) == pytest.approx(6.0, rel=1e-15)


def test_triangle_state_rejects_collinear():
    with pytest.raises(ValueError):
        triangle_rhs_same_sign(triangle_state(np.array([(0, 0), (1, 0), (3, 0)])))


def test_same_sign_equilateral_rates():
    s_len = 1.7
    eq = s_len * np.array([(0, 0), (1, 0), (0.5, math.sqrt(3) / 2)])
    d = triangle_rhs_same_sign(triangle_state(eq))
    np.testing.assert_allclose(d[:3], 6 / s_len, rtol=1e-14)
    np.testing.assert_allclose(d[3:], 0, atol=1e-14)


def test_same_sign_isoceles_symmetry():
    x = np.array([(0.0, 1.0), (-2.0, -1.0), (2.0, -1.0)])
    d = triangle_rhs_same_sign(triangle_state(x))
    assert d[4] == pytest.approx(d[5], abs=1e-14)


def test_mixed_isoceles_and_angle_sum(rng):
    x = np.array([(-1.0, 0.0), (0.0, 1.3), (1.0, 0.0)])
    d = triangle_rhs_mixed(triangle_state(x))
    assert d[0] == pytest.approx(d[2], abs=1e-14)
    for _ in range(20):
        d = triangle_rhs_mixed(triangle_state(random_config_positions(rng, 3)))
        assert abs(d[3:].sum()) < 1e-12 * max(1.0, np.abs(d[3:]).max())
        assert d[5] < 0 < d[4] and d[3] < 0


def _state_vector(x):
    s = triangle_state(x)
    return np.array([s.d12, s.d13, s.d23, s.theta1, s.theta2, s.theta3])


@pytest.mark.parametrize("windings,rhs", [((1, 1, 1), triangle_rhs_same_sign), ((1, -1, 1), triangle_rhs_mixed)])
def test_triangle_rhs_matches_full_flow(rng, windings, rhs):
    for _ in range(5):
        x = random_config_positions(rng, 3, min_sep=0.5)
        c = VortexConfiguration(x, windings)
        h = 1e-5
        grid = np.array([h, 2 * h])
        traj = integrate(c, StepControl(t_end=2 * h, rel_tol=1e-13, abs_tol=1e-15, dt_init=1e-7), sample_times=grid)
        y0, y1, y2 = (_state_vector(p) for p in traj.positions)
        fd = (-3 * y0 + 4 * y1 - y2) / (2 * h)
        np.testing.assert_allclose(rhs(triangle_state(x)), fd, rtol=1e-6, atol=1e-6)


def test_same_sign_angles_contract():
    x = np.array([(0.0, 0.0), (1.0, 0.1), (0.2, 0.5)])
    traj = integrate(VortexConfiguration(x, (1, 1, 1)), StepControl(t_end=50.0, sample_interval=0.5))
    th = np.array([[triangle_state(p).theta1, triangle_state(p).theta2, triangle_state(p).theta3] for p in traj.positions])
    assert np.all(np.diff(th.max(axis=1)) <= 1e-12)
    assert np.all(np.diff(th.min(axis=1)) >= -1e-12)
    assert np.abs(th[-1] - math.pi / 3).max() < 2e-2


# phase


def test_phase_state_examples():
    ang = 2 * np.pi * np.arange(3) / 3 + 0.3
    x = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    p = phase_state(x, 3.0)
    assert p.psi == pytest.approx((0, 0), abs=1e-14)
    assert p.s == pytest.approx(0.0, abs=1e-15)
    assert phase_state(math.exp(2) * x, 3.0).s == pytest.approx(1.0, rel=1e-14)


def test_phase_state_needs_centered_input():
    with pytest.raises(ValueError):
        phase_state(np.array([(1.0, 0), (0, 1.0), (1.0, 1.0)]), 1.0)
