import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vortexdyn.core import (
    DegenerateConfigurationError,
    VortexConfiguration,
    collective_winding,
    collision_upper_bound,
    integral_set,
    interaction_energy,
    min_pairwise_distance,
    pair_sum_m0,
    rotation,
    velocity_field,
    velocity_field_complex,
)

from conftest import random_config_positions


def cfg(points, windings):
    return VortexConfiguration(np.array(points, dtype=float), windings)


# velocity field


def test_pair_repels():
    v = velocity_field(cfg([(1, 0), (-1, 0)], (1, 1)))
    np.testing.assert_allclose(v, [[1, 0], [-1, 0]], atol=0)


def test_dipole_attracts():
    v = velocity_field(cfg([(1, 0), (-1, 0)], (1, -1)))
    np.testing.assert_allclose(v, [[-1, 0], [1, 0]], atol=0)


def test_triangle_on_unit_circle_moves_radially_with_speed_two():
    ang = 2 * np.pi * np.arange(3) / 3
    x = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    v = velocity_field(cfg(x, (1, 1, 1)))
    np.testing.assert_allclose(v, 2 * x, atol=1e-14)


def test_complex_form_matches_on_examples():
    ang = 2 * np.pi * np.arange(3) / 3
    cases = [
        cfg([(1, 0), (-1, 0)], (1, 1)),
        cfg([(1, 0), (-1, 0)], (1, -1)),
        cfg(np.stack([np.cos(ang), np.sin(ang)], axis=1), (1, 1, 1)),
    ]
    for c in cases:
        np.testing.assert_allclose(velocity_field_complex(c), velocity_field(c), atol=1e-15)


def test_complex_form_vertical_dipole():
    v = velocity_field_complex(cfg([(0, 1), (0, -1)], (1, -1)))
    np.testing.assert_allclose(v, [[0, -1], [0, 1]], atol=1e-15)


def test_complex_form_random(rng):
    x = random_config_positions(rng, 5)
    c = cfg(x, (1, -1, 1, 1, -1))
    np.testing.assert_allclose(velocity_field_complex(c), velocity_field(c), rtol=0, atol=1e-12)


def test_coincident_positions_rejected():
    with pytest.raises(DegenerateConfigurationError) as info:
        cfg([(0, 0), (1, 1), (0, 0)], (1, 1, -1))
    assert info.value.pair == (0, 2)


def test_winding_validation():
    with pytest.raises(ValueError):
        cfg([(0, 0), (1, 0)], (1, 2))
    with pytest.raises(ValueError):
        cfg([(0, 0), (1, 0)], (1,))
    with pytest.raises(ValueError):
        cfg([(0, 0)], (1,))


def test_configuration_is_read_only():
    c = cfg([(0, 0), (1, 0)], (1, 1))
    with pytest.raises(ValueError):
        c.positions[0, 0] = 5.0


# energy


def test_energy_unit_distance_is_zero():
    assert interaction_energy(cfg([(0, 0), (1, 0)], (1, 1))) == 0.0


def test_energy_distance_e():
    assert interaction_energy(cfg([(0, 0), (math.e, 0)], (1, 1))) == pytest.approx(-2.0, abs=1e-15)


def test_velocity_is_negative_energy_gradient(rng):
    x = random_config_positions(rng, 4)
    c = cfg(x, (1, -1, -1, 1))
    h = 1e-5
    grad = np.zeros_like(x)
    for j in range(4):
        for d in range(2):
            xp, xm = x.copy(), x.copy()
            xp[j, d] += h
            xm[j, d] -= h
            grad[j, d] = (interaction_energy(c.with_positions(xp)) - interaction_energy(c.with_positions(xm))) / (2 * h)
    np.testing.assert_allclose(-grad, velocity_field(c), atol=1e-6)


# winding combinatorics


def test_m0_examples():
    assert pair_sum_m0((1, -1, 1)) == -1
    assert pair_sum_m0((1, 1, 1, -1)) == 0
    assert pair_sum_m0((1, 1)) == 1


@pytest.mark.parametrize("n", range(2, 9))
def test_m0_closed_form_matches_double_sum(n):
    for w in itertools.product((1, -1), repeat=n):
        explicit = sum(w[j] * w[l] for j in range(n) for l in range(j + 1, n))
        assert pair_sum_m0(w) == explicit


def test_collective_winding_examples():
    assert collective_winding((1, -1, 1), (0, 1, 2)).m1 == -1
    assert collective_winding((1, 1, 1), (0, 1)).m1 == 1
    for n in range(2, 8):
        w = (1,) * n + (-1,)
        assert collective_winding(w, range(n + 1)).m1 == 0.5 * n * (n - 3)


def test_collective_winding_needs_two_indices():
    with pytest.raises(ValueError):
        collective_winding((1, -1, 1), (0,))


# first integrals


def test_integral_set_pair():
    s = integral_set(cfg([(1, 0), (-1, 0)], (1, 1)))
    assert s.h1 == 4.0 and s.m0 == 1


def test_h1_constant_on_exact_pair_solution():
    for t in (0.0, 0.3, 2.0, 10.0):
        d = math.sqrt(4 + 8 * t)
        s = integral_set(cfg([(d / 2, 0), (-d / 2, 0)], (1, 1)), t)
        assert s.h1 == pytest.approx(4.0, abs=1e-12)


def test_integral_set_mixed_equilateral():
    r = 2 / math.sqrt(3)
    ang = np.pi / 2 + 2 * np.pi * np.arange(3) / 3
    c = cfg(r * np.stack([np.cos(ang), np.sin(ang)], axis=1), (1, -1, 1))
    s = integral_set(c)
    assert s.h1 == pytest.approx(12.0, abs=1e-12)
    assert collision_upper_bound(s.h1, 3, s.m0) == pytest.approx(1.0, abs=1e-12)


def test_collision_upper_bound():
    assert collision_upper_bound(12, 3, -1) == 1
    assert collision_upper_bound(4, 2, 1) is None
    assert collision_upper_bound(4, 4, 0) is None


def test_h2_identity(rng):
    for n in range(2, 7):
        x = random_config_positions(rng, n)
        w = tuple(rng.choice([-1, 1], size=n))
        s = integral_set(cfg(x, w), t=rng.uniform(0, 3))
        assert s.h2 == pytest.approx((s.h1 + s.h3) / (2 * (n - 1)), rel=1e-12, abs=1e-12)


# minimal distance


def test_min_distance_examples(rng):
    assert min_pairwise_distance(cfg([(1, 0), (-1, 0)], (1, 1))) == (2.0, (0, 1))
    tri = np.array([(0, 0), (1, 0), (0.5, math.sqrt(3) / 2)])
    value, pair = min_pairwise_distance(cfg(tri, (1, 1, 1)))
    assert pair == (0, 1) and value == 1.0
    x = random_config_positions(rng, 5)
    brute = min(((math.dist(x[j], x[l]), (j, l)) for j in range(5) for l in range(j + 1, 5)))
    value, pair = min_pairwise_distance(x)
    assert pair == brute[1] and value == pytest.approx(brute[0], rel=1e-15)


# properties

coords = st.floats(-3, 3, allow_nan=False)


@st.composite
def configurations(draw, max_n=6):
    n = draw(st.integers(2, max_n))
    pts = draw(st.lists(st.tuples(coords, coords), min_size=n, max_size=n))
    x = np.array(pts)
    d = np.hypot(x[:, None, 0] - x[None, :, 0], x[:, None, 1] - x[None, :, 1])
    d[np.diag_indices(n)] = np.inf
    from hypothesis import assume

    assume(d.min() > 1e-2)
    w = draw(st.lists(st.sampled_from((1, -1)), min_size=n, max_size=n))
    return VortexConfiguration(x, tuple(w))


@settings(max_examples=200, deadline=None)
@given(configurations())
def test_velocities_sum_to_zero(c):
    v = velocity_field(c)
    scale = np.abs(v).max() + 1.0
    assert np.all(np.abs(v.sum(axis=0)) <= 1e-12 * scale * c.n)


@settings(max_examples=100, deadline=None)
@given(configurations(), st.floats(0.1, 10), st.floats(0, 2 * math.pi))
def test_scaling_and_rotation_covariance(c, alpha, theta):
    v = velocity_field(c)
    scaled = velocity_field(c.with_positions(alpha * c.positions))
    np.testing.assert_allclose(scaled, v / alpha, rtol=1e-9, atol=1e-9 * np.abs(v).max())
    q = rotation(theta)
    rotated = velocity_field(c.with_positions(c.positions @ q.T))
    np.testing.assert_allclose(rotated, v @ q.T, rtol=1e-9, atol=1e-9 * np.abs(v).max())


@settings(max_examples=100, deadline=None)
@given(configurations())
def test_complex_form_property(c):
    v = velocity_field(c)
    np.testing.assert_allclose(velocity_field_complex(c), v, rtol=0, atol=1e-12 * max(1.0, np.abs(v).max()))
