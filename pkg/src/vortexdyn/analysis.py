"""Post-hoc analysis of trajectories: invariant drift, monotonicity of the
minimal distance, distance to the equilateral family, three-vortex collision
patterns and slope estimation."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .core import (
    FloatArray,
    VortexConfiguration,
    first_integrals,
    integral_set,
    interaction_energy,
    mass_center,
    pair_sum_m0,
)
from .integrator import Trajectory, integrate
from .stepper import StepControl

EQUILATERAL_GAP = 2.0 * math.pi / 3.0
#: |d12 - d23| at or below this counts as an isoceles triangle
ISOCELES_TOL = 1e-12
_THETA_GRID = 720
_GOLDEN_TOL = 1e-10
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _unpack(trajectory, windings=None) -> tuple[FloatArray, FloatArray, tuple[int, ...]]:
    if isinstance(trajectory, Trajectory):
        return trajectory.times, trajectory.positions, tuple(windings or trajectory.windings)
    times, positions = trajectory
    if windings is None:
        raise ValueError("windings are required for a raw (times, positions) trajectory")
    return np.asarray(times, float), np.asarray(positions, float), tuple(windings)


# ------------------------------------------------------------- invariants


@dataclass(frozen=True)
class Drift:
    value: float
    time: float


@dataclass(frozen=True)
class InvariantReport:
    """Largest deviation of each monitor from its initial value.

    ``energy_increase`` is the largest rise of W between consecutive
    samples (zero for an exact gradient flow).
    """

    h1: Drift
    h2: Drift
    h3: Drift
    mass_center: Drift
    energy_increase: Drift
    samples: int

    @property
    def max_drift(self) -> float:
        return max(self.h1.value, self.h2.value, self.h3.value, self.mass_center.value)

    def to_dict(self) -> dict:
        out = {"samples": self.samples}
        for name in ("h1", "h2", "h3", "mass_center", "energy_increase"):
            d = getattr(self, name)
            out[name] = {"value": d.value, "time": d.time}
        return out


def _worst(values: FloatArray, times: FloatArray) -> Drift:
    k = int(np.argmax(values))
    return Drift(float(values[k]), float(times[k]))


def invariant_report(trajectory, windings=None) -> InvariantReport:
    """Drift of H1, H2, H3 and the mass center, and any increase of W."""
    times, positions, windings = _unpack(trajectory, windings)
    if len(times) == 0:
        raise ValueError("empty trajectory")
    m0 = pair_sum_m0(windings)
    ints = np.array([first_integrals(x, m0, t) for t, x in zip(times, positions)])
    mcs = np.array([mass_center(x) for x in positions])
    drift = np.abs(ints - ints[0])
    mc = np.hypot(*(mcs - mcs[0]).T)
    energy = np.array([interaction_energy(VortexConfiguration(x, windings)) for x in positions])
    rise = np.concatenate(([0.0], np.maximum(np.diff(energy), 0.0)))
    return InvariantReport(
        _worst(drift[:, 0], times),
        _worst(drift[:, 1], times),
        _worst(drift[:, 2], times),
        _worst(mc, times),
        _worst(rise, times),
        len(times),
    )


@dataclass(frozen=True)
class MonotonicityViolation:
    index: int
    time: float
    drop: float


def dmin_series(positions: FloatArray) -> FloatArray:
    x = np.asarray(positions)
    n = x.shape[1]
    iu, ju = np.triu_indices(n, k=1)
    d = np.hypot(x[:, iu, 0] - x[:, ju, 0], x[:, iu, 1] - x[:, ju, 1])
    return d.min(axis=1)


def dmin_monotone_check(trajectory, slack: float = 1e-10) -> MonotonicityViolation | None:
    """First sample where the minimal distance drops by more than ``slack``."""
    if isinstance(trajectory, Trajectory):
        times, positions = trajectory.times, trajectory.positions
    else:
        times, positions = (np.asarray(a, float) for a in trajectory)
    if len(times) < 2:
        raise ValueError("need at least two samples")
    d = dmin_series(positions)
    drops = d[:-1] - d[1:]
    bad = np.nonzero(drops > slack)[0]
    if bad.size == 0:
        return None
    k = int(bad[0]) + 1
    return MonotonicityViolation(k, float(times[k]), float(drops[k - 1]))


def first_dmin_minimum(trajectory) -> MonotonicityViolation | None:
    """First interior sample where d_min has a strict local minimum.

    For equal windings with N >= 5 the minimal distance need not be
    monotone; this locates the first dip, if any, in sampled data.
    """
    if isinstance(trajectory, Trajectory):
        times, positions = trajectory.times, trajectory.positions
    else:
        times, positions = (np.asarray(a, float) for a in trajectory)
    d = dmin_series(positions)
    for k in range(1, len(d) - 1):
        if d[k] < d[k - 1] and d[k] < d[k + 1]:
            return MonotonicityViolation(k, float(times[k]), float(d[0] - d[k]))
    return None


# ------------------------------------------------------- orbital distance


def _centered_ccw(config) -> tuple[np.ndarray, np.ndarray]:
    """Complex positions ordered counterclockwise, and their polar angles."""
    x = config.positions if isinstance(config, VortexConfiguration) else np.asarray(config, float)
    if x.shape != (3, 2):
        raise ValueError("need exactly three vortices")
    scale = math.sqrt(float(np.sum(x * x)) / 3.0)
    mc = mass_center(x)
    if math.hypot(*mc) > 1e-8 * max(scale, 1.0):
        raise ValueError(f"mass center {mc} is not at the origin")
    z = x[:, 0] + 1j * x[:, 1]
    theta = np.angle(z) % (2.0 * math.pi)
    order = np.argsort(theta, kind="stable")
    return z[order], theta[order]


def _reference(theta: float) -> np.ndarray:
    return np.exp(1j * (theta + EQUILATERAL_GAP * np.arange(3)))


def _projection(z: np.ndarray, theta: float) -> float:
    return float(np.sum((z * np.conj(_reference(theta))).real))


def _distance(z: np.ndarray, theta: float) -> float:
    r = max(_projection(z, theta), 0.0) / 3.0
    return float(np.sqrt(np.sum(np.abs(z - r * _reference(theta)) ** 2)))


def orbital_distance(config) -> float:
    """Distance from a centered three-vortex state to the equilateral family.

    Minimizes ``||X - r Q(theta) E||`` over ``r > 0`` and ``theta``, where
    ``E`` is the unit equilateral triangle with vertices matched to the
    vortices in counterclockwise order. For fixed ``theta`` the best ``r`` is
    ``max(<X, Q(theta) E>, 0) / 3``; ``theta`` is found on a 720-point grid
    refined by golden-section search on the distance itself (the projection
    is flat at its maximum, the distance is not when it vanishes).
    """
    z, _ = _centered_ccw(config)
    grid = np.linspace(0.0, 2.0 * math.pi, _THETA_GRID, endpoint=False)
    dist = np.array([_distance(z, th) for th in grid])
    k = int(np.argmin(dist))
    step = grid[1] - grid[0]
    a, b = grid[k] - step, grid[k] + step
    c, d = b - _INV_PHI * (b - a), a + _INV_PHI * (b - a)
    fc, fd = _distance(z, c), _distance(z, d)
    while b - a > _GOLDEN_TOL:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = _distance(z, c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = _distance(z, d)
    return min(fc, fd, _distance(z, 0.5 * (a + b)))


def orbital_distance_closed_form(config) -> float:
    """Same quantity from ``max_theta <X, Q(theta) E> = |sum_j z_j w^-j|``."""
    z, _ = _centered_ccw(config)
    total = float(np.sum(np.abs(z) ** 2))
    dmax = abs(np.sum(z * np.exp(-1j * EQUILATERAL_GAP * np.arange(3))))
    return math.sqrt(max(total - dmax * dmax / 3.0, 0.0))


def phase_function(phi1: float, phi2: float) -> float:
    """P(phi1, phi2); equals 3 exactly at the equilateral gaps."""
    s1, s2, s12 = math.sin(phi1), math.sin(phi2), math.sin(phi1 + phi2)
    d = s1 * s1 + s2 * s2 + s12 * s12
    bracket = s2 - s12 * math.cos(phi1 - EQUILATERAL_GAP) + s1 * math.cos(phi1 + phi2 - 2 * EQUILATERAL_GAP)
    return bracket * bracket / d


def phase_distance(config) -> float:
    """sqrt(|X|^2 (3 - P(Phi)) / 3) with the gaps of the counterclockwise order.

    This is the distance to the equilateral triangle whose first vertex
    lies on the ray of the first vortex. It equals :func:`orbital_distance`
    when that alignment is optimal (for example when the state is mirror
    symmetric about that ray) and bounds it from above otherwise.
    """
    z, theta = _centered_ccw(config)
    total = float(np.sum(np.abs(z) ** 2))
    p = phase_function(theta[1] - theta[0], theta[2] - theta[1])
    return math.sqrt(max(total * (3.0 - p) / 3.0, 0.0))


# ------------------------------------------------- three-vortex patterns


@dataclass(frozen=True)
class BoundCheck:
    t_collision: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.t_collision <= self.bound * (1.0 + 1e-9)


@dataclass(frozen=True)
class PatternVerdict:
    case: Literal["AllThreeCollide", "PairCollides", "NoCollision"]
    pair: tuple[int, int] | None = None
    t_collision: float | None = None
    location: tuple[float, float] | None = None
    bound_check: BoundCheck | None = None

    def __post_init__(self):
        if (self.case == "NoCollision") != (self.bound_check is None):
            raise ValueError("bound_check must be present exactly when a collision occurred")
        if (self.case == "PairCollides") != (self.pair is not None):
            raise ValueError("pair is set exactly for PairCollides")


def _canonical_isoceles(x: FloatArray, apex: int, others: tuple[int, int]):
    """Positions in a frame where the two base vortices are exact mirror
    images across the y-axis, plus the map back to the input frame."""
    p, q = x[others[0]], x[others[1]]
    mid = 0.5 * (p + q)
    half = 0.5 * math.dist(p, q)
    ex = (p - q) / (2.0 * half)
    ey = np.array([-ex[1], ex[0]])
    h = float((x[apex] - mid) @ ey)
    y = np.zeros((3, 2))
    y[others[0]] = (half, 0.0)
    y[others[1]] = (-half, 0.0)
    y[apex] = (0.0, h)

    def back(pt):
        return mid + pt[0] * ex + pt[1] * ey

    return y, back


def classify_three_vortex(config: VortexConfiguration, control: StepControl | None = None) -> PatternVerdict:
    """Integrate a (+,-,+) triple (up to relabeling and overall sign).

    With equal distances from the odd vortex to the other two, within
    ``ISOCELES_TOL``, the run is done in a frame where the two like vortices
    are exact mirror images, so the symmetry survives rounding.
    """
    if config.n != 3 or pair_sum_m0(config.windings) != -1:
        raise ValueError("need three vortices with windings (+1, -1, +1) up to relabeling and sign")
    w = config.windings
    apex = next(i for i in range(3) if w.count(w[i]) == 1)
    others = tuple(i for i in range(3) if i != apex)
    x = config.positions
    h1 = integral_set(config).h1
    bound = h1 / 12.0
    ctl = (control or StepControl(rel_tol=1e-10, abs_tol=1e-12)).replace(
        t_end=bound * 1.01, sample_interval=bound * 1.01
    )
    d_a = math.dist(x[apex], x[others[0]])
    d_b = math.dist(x[apex], x[others[1]])
    if abs(d_a - d_b) <= ISOCELES_TOL:
        y, back = _canonical_isoceles(x, apex, others)
        traj = integrate(VortexConfiguration(y, w), ctl)
    else:
        traj = integrate(config, ctl)

        def back(pt):
            return np.asarray(pt)

    ev = traj.terminal.collision
    if ev is None:
        return PatternVerdict("NoCollision")
    groups = ev.colliding
    loc = tuple(float(v) for v in back(np.asarray(ev.locations[0])))
    check = BoundCheck(ev.t_collision, bound)
    if len(groups[0]) == 3:
        return PatternVerdict("AllThreeCollide", None, ev.t_collision, loc, check)
    return PatternVerdict("PairCollides", tuple(groups[0]), ev.t_collision, loc, check)


# -------------------------------------------------------------- slopes


def estimate_slope(times, values, window_fraction: float = 0.5) -> float:
    """Least-squares slope over the trailing ``window_fraction`` of samples."""
    t = np.asarray(times, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    if t.shape != v.shape or t.ndim != 1:
        raise ValueError("times and values must be 1-d arrays of equal length")
    if not 0 < window_fraction <= 1:
        raise ValueError("window_fraction must lie in (0, 1]")
    k = int(math.ceil(window_fraction * len(t)))
    if k < 10:
        raise ValueError(f"only {k} samples in the window, need at least 10")
    slope, _ = np.polyfit(t[-k:], v[-k:], 1)
    return float(slope)


def similarity_deviation(positions, reference) -> float:
    """Distance from ``positions`` to the orbit of ``reference`` under
    rotation, scaling and translation (complex least squares)."""
    x = np.asarray(positions, dtype=np.float64)
    e = np.asarray(reference, dtype=np.float64)
    if x.shape != e.shape:
        raise ValueError("shape mismatch")
    z = x[:, 0] + 1j * x[:, 1]
    basis = np.stack([e[:, 0] + 1j * e[:, 1], np.ones(len(z))], axis=1)
    coef, *_ = np.linalg.lstsq(basis, z, rcond=None)
    return float(np.linalg.norm(z - basis @ coef))
