import math

import numpy as np
import pytest

from vortexdyn.analysis import (
    PatternVerdict,
    classify_three_vortex,
    dmin_monotone_check,
    estimate_slope,
    first_dmin_minimum,
    invariant_report,
    orbital_distance,
    orbital_distance_closed_form,
    phase_distance,
    phase_function,
    similarity_deviation,
)
from vortexdyn.analytic import FAMILY_VARIANTS, polygon_solution, solve_asymptotic_slopes
from vortexdyn.core import VortexConfiguration, integral_set
from vortexdyn.integrator import integrate
from vortexdyn.reduced import RingSystem, integrate_ring
from vortexdyn.stepper import StepControl

from conftest import random_config_positions


def equilateral(radius=1.0, phase=0.0):
    ang = phase + 2 * np.pi * np.arange(3) / 3
    return radius * np.stack([np.cos(ang), np.sin(ang)], axis=1)


# invariant report


def test_report_on_exact_polygon_is_zero():
    sol = polygon_solution(5, 1.0)
    times = np.linspace(0, 3, 31)
    pos = np.array([sol.state(t) for t in times])
    rep = invariant_report((times, pos), (1,) * 5)
    assert rep.max_drift < 1e-12
    assert rep.energy_increase.value == 0.0


def test_report_on_integrated_dipole():
    c = VortexConfiguration([(1.0, 0.0), (-1.0, 0.0)], (1, -1))
    traj = integrate(c, StepControl(t_end=0.99 * 0.5, sample_interval=0.01))
    assert invariant_report(traj).max_drift < 1e-6


def test_report_locates_corruption():
    sol = polygon_solution(4, 1.0)
    times = np.linspace(0, 1, 11)
    pos = np.array([sol.state(t) for t in times])
    pos[6, 2] += 0.01
    rep = invariant_report((times, pos), (1,) * 4)
    assert rep.h2.value > 1e-3 and rep.h2.time == times[6]


def test_report_needs_windings_for_raw_data():
    with pytest.raises(ValueError):
        invariant_report((np.zeros(2), np.zeros((2, 2, 2))))


# d_min monotonicity


def test_dmin_monotone_same_sign(rng):
    c = VortexConfiguration(random_config_positions(rng, 3), (1, 1, 1))
    assert dmin_monotone_check(integrate(c, StepControl(t_end=2.0))) is None


def test_dmin_monotone_collinear():
    a = np.array([-2.0, -1.2, -0.1, 0.3, 1.5, 2.6])
    c = VortexConfiguration(np.stack([a, 0.5 * a], axis=1), (1,) * 6)
    assert dmin_monotone_check(integrate(c, StepControl(t_end=2.0))) is None


def test_dmin_violation_for_dipole():
    c = VortexConfiguration([(1.0, 0.0), (-1.0, 0.0)], (1, -1))
    v = dmin_monotone_check(integrate(c, StepControl(t_end=0.4, sample_interval=0.1)))
    assert v is not None and v.index == 1 and v.time == pytest.approx(0.1)


def test_first_dmin_minimum_on_synthetic_data():
    times = np.arange(5.0)
    gaps = [2.0, 1.5, 1.2, 1.4, 1.8]
    pos = np.array([[(0.0, 0.0), (g, 0.0), (10.0, 0.0)] for g in gaps])
    hit = first_dmin_minimum((times, pos))
    assert hit.index == 2 and hit.drop == pytest.approx(0.8)
    assert first_dmin_minimum((times, pos[[0, 0, 0, 0, 0]])) is None


# orbital distance


def test_orbital_distance_zero_cases():
    assert orbital_distance(equilateral()) < 1e-9
    assert orbital_distance(7 * equilateral(phase=1.0)) < 1e-8


def test_orbital_distance_matches_closed_form(rng):
    for _ in range(20):
        x = random_config_positions(rng, 3)
        x -= x.mean(axis=0)
        assert orbital_distance(x) == pytest.approx(orbital_distance_closed_form(x), abs=1e-9)


def test_phase_distance_on_mirror_symmetric_states():
    for eps in (1e-3, 0.02, 0.1):
        # mirror symmetric about the ray of the first vortex in counterclockwise order
        ang = 0.5 + np.array([0.0, 2 * np.pi / 3 + eps, 4 * np.pi / 3 - eps])
        r = np.array([1.0, 1.1, 1.1])
        x = np.stack([r * np.cos(ang), r * np.sin(ang)], axis=1)
        x -= x.mean(axis=0)
        assert phase_distance(x) == pytest.approx(orbital_distance(x), abs=1e-8)


def test_phase_distance_bounds_orbital_distance(rng):
    for _ in range(20):
        x = equilateral(phase=rng.uniform(0, 6)) + rng.normal(scale=0.05, size=(3, 2))
        x -= x.mean(axis=0)
        assert phase_distance(x) >= orbital_distance(x) - 1e-10


def test_phase_function_equilateral():
    assert phase_function(2 * np.pi / 3, 2 * np.pi / 3) == pytest.approx(3.0, abs=1e-14)


def test_orbital_distance_requires_centered_input():
    with pytest.raises(ValueError):
        orbital_distance(equilateral() + 1.0)


def test_orbital_distance_decays_along_flow():
    x = np.array([(1.0, 0.0), (-0.4, 0.8), (-0.6, -0.9)])
    x -= x.mean(axis=0)
    traj = integrate(VortexConfiguration(x, (1, 1, 1)), StepControl(t_end=100.0, sample_interval=10.0, dt_max=10.0))
    rel = [orbital_distance(p) / math.sqrt(np.sum(p * p)) for p in traj.positions]
    assert rel[-1] < 0.1 * rel[0]


def test_similarity_deviation_ignores_rigid_motion_and_scale():
    e = equilateral()
    moved = 3 * e @ np.array([[0, -1], [1, 0]]).T + 2.0
    assert similarity_deviation(moved, e) < 1e-12


# three-vortex patterns


def test_isoceles_triangle_all_collide():
    x = np.array([(-1.0, 0.0), (0.0, math.sqrt(3)), (1.0, 0.0)])
    c = VortexConfiguration(x, (1, -1, 1))
    v = classify_three_vortex(c)
    bound = integral_set(c).h1 / 12
    assert v.case == "AllThreeCollide"
    assert abs(v.t_collision / bound - 1) < 1e-3
    assert v.bound_check.holds
    assert v.location == pytest.approx(tuple(x.mean(axis=0)), abs=1e-5)


def test_collinear_unequal_pair_collides():
    x = np.array([(0.0, 0.0), (1.0, 0.0), (4.0, 0.0)])
    c = VortexConfiguration(x, (1, -1, 1))
    v = classify_three_vortex(c)
    assert v.case == "PairCollides" and v.pair == (0, 1)
    assert v.t_collision < integral_set(c).h1 / 12


def test_symmetric_collinear_all_collide():
    c = VortexConfiguration([(-1.0, 0.0), (0.0, 0.0), (1.0, 0.0)], (1, -1, 1))
    v = classify_three_vortex(c)
    assert v.case == "AllThreeCollide"
    assert v.t_collision == pytest.approx(0.5, rel=1e-3)
    assert integral_set(c).h1 / 12 == 0.5


def test_classify_relabeled_and_sign_flipped():
    x = np.array([(0.0, 1.0), (-1.0, 0.0), (1.0, 0.0)])
    v = classify_three_vortex(VortexConfiguration(x, (1, -1, -1)))
    assert v.case == "AllThreeCollide"


def test_classify_rejects_wrong_windings():
    with pytest.raises(ValueError):
        classify_three_vortex(VortexConfiguration([(0, 0), (1, 0), (0, 1)], (1, 1, 1)))


def test_verdict_validation():
    with pytest.raises(ValueError):
        PatternVerdict("NoCollision", t_collision=None, bound_check=None, pair=(0, 1))
    PatternVerdict("NoCollision")


# slopes


def test_slope_of_line():
    t = np.linspace(1, 100, 50)
    assert estimate_slope(t, 12 * t + 3) == pytest.approx(12, rel=1e-12)


def test_slope_of_polygon_radius():
    sol = polygon_solution(4, 1.0)
    t = np.linspace(0, 10, 40)
    assert estimate_slope(t, [sol.radius(s) ** 2 for s in t]) == pytest.approx(6, rel=1e-12)


def test_slope_needs_ten_samples():
    with pytest.raises(ValueError):
        estimate_slope(np.arange(15.0), np.arange(15.0))


def test_slope_aligned_same_n3():
    p = solve_asymptotic_slopes(3, 1)
    sys = RingSystem(3, FAMILY_VARIANTS[1], 1.0, 4.0)
    traj = integrate_ring(sys, StepControl(t_end=1e3, sampling="log", sample_interval=1e-2, dt_max=1e2))
    assert estimate_slope(traj.times, traj.rho[:, 0]) == pytest.approx(p.alpha, rel=0.05)
    assert estimate_slope(traj.times, traj.rho[:, 1]) == pytest.approx(p.beta, rel=0.05)
