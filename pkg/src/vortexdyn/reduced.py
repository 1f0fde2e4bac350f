"""Symmetry-reduced systems: collinear lines, two concentric rings, triangles.

Ring setups place ``n`` vortices on an inner circle of squared radius
``rho1`` and ``n`` on an outer circle of squared radius ``rho2``, either on
the same rays (aligned) or rotated by ``pi/n`` (staggered), optionally with
one more vortex fixed at the center. The ansatz is preserved by the flow
and collapses to a two-dimensional ODE in ``(rho1, rho2)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import stepper
from .core import (
    FloatArray,
    VortexConfiguration,
    _check_windings,
    dmin_array,
    mass_center,
)
from .stepper import StepControl

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------- collinear


@dataclass(frozen=True)
class CollinearReduction:
    """Points ``origin + offsets[j] * direction`` on one line."""

    origin: tuple[float, float]
    direction: tuple[float, float]
    offsets: tuple[float, ...]

    def lift(self) -> FloatArray:
        o = np.asarray(self.origin)
        e = np.asarray(self.direction)
        return o[None, :] + np.asarray(self.offsets)[:, None] * e[None, :]


def detect_collinear(config, tol: float | None = None) -> CollinearReduction | None:
    """Line through the points if all lie within ``tol`` of it, else ``None``.

    The line is the principal axis of the centered second-moment matrix.
    ``tol`` defaults to ``1e-9`` times the configuration diameter. The
    direction has a non-negative first nonzero component and the origin is
    the foot of the perpendicular from ``(0, 0)`` onto the line.
    """
    x = config.positions if isinstance(config, VortexConfiguration) else np.asarray(config, float)
    if x.shape[0] < 2:
        raise ValueError("at least two points are required")
    c = x.mean(axis=0)
    y = x - c
    diameter = float(np.max(np.hypot(*(x[:, None, :] - x[None, :, :]).transpose(2, 0, 1))))
    if tol is None:
        tol = 1e-9 * diameter
    _, vecs = np.linalg.eigh(y.T @ y)
    e = vecs[:, -1]
    if e[0] < 0 or (e[0] == 0 and e[1] < 0):
        e = -e
    normal = np.array([-e[1], e[0]])
    if np.max(np.abs(y @ normal)) > tol:
        return None
    origin = c - (c @ e) * e
    offsets = (x - origin) @ e
    return CollinearReduction(
        (float(origin[0]), float(origin[1])),
        (float(e[0]), float(e[1])),
        tuple(float(a) for a in offsets),
    )


def collinear_rhs(offsets, windings) -> FloatArray:
    """Scalar velocities along the line: 2 m_j sum_k m_k / (a_j - a_k)."""
    a = np.asarray(offsets, dtype=np.float64)
    m = np.asarray(_check_windings(windings), dtype=np.float64)
    if a.shape != m.shape:
        raise ValueError("offsets and windings differ in length")
    diff = a[:, None] - a[None, :]
    np.fill_diagonal(diff, np.inf)
    if np.min(np.abs(diff)) < 1e-12:
        raise ValueError("coincident offsets")
    terms = m[None, :] / diff
    return 2.0 * m * np.array([math.fsum(r) for r in terms.tolist()])


# -------------------------------------------------------------------- rings


class RingVariant(str, enum.Enum):
    """The closed set of two-ring setups, by winding pattern and stagger."""

    ALIGNED_SAME = "aligned_same"
    STAGGERED_SAME = "staggered_same"
    STAGGERED_OPPOSITE = "staggered_opposite"
    CENTER_ALIGNED_SAME = "center_aligned_same"
    CENTER_STAGGERED_SAME = "center_staggered_same"
    CENTER_ALIGNED_OPPOSITE_CENTER = "center_aligned_opposite_center"
    CENTER_STAGGERED_OPPOSITE_CENTER = "center_staggered_opposite_center"
    CENTER_STAGGERED_OPPOSITE_RING = "center_staggered_opposite_ring"

    @property
    def staggered(self) -> bool:
        return self in _STAGGERED

    @property
    def has_center(self) -> bool:
        return self.value.startswith("center_")

    @property
    def outer_sign(self) -> int:
        """Winding of the outer ring relative to the inner ring."""
        return -1 if self in (RingVariant.STAGGERED_OPPOSITE, RingVariant.CENTER_STAGGERED_OPPOSITE_RING) else 1

    @property
    def center_sign(self) -> int | None:
        """Winding of the center vortex relative to the inner ring."""
        if not self.has_center:
            return None
        return 1 if self.value.endswith("_same") else -1


_STAGGERED = {
    RingVariant.STAGGERED_SAME,
    RingVariant.STAGGERED_OPPOSITE,
    RingVariant.CENTER_STAGGERED_SAME,
    RingVariant.CENTER_STAGGERED_OPPOSITE_CENTER,
    RingVariant.CENTER_STAGGERED_OPPOSITE_RING,
}

# (rho1 constant, rho2 constant) as (a*n + b) pairs and the sign with which
# the coupling term R enters rho1' (rho2' gets the opposite sign).
_RING_COEFFS = {
    RingVariant.ALIGNED_SAME: ((2, -2), (6, -2), -1),
    RingVariant.STAGGERED_SAME: ((2, -2), (6, -2), +1),
    RingVariant.STAGGERED_OPPOSITE: ((2, -2), (-2, -2), -1),
    RingVariant.CENTER_ALIGNED_SAME: ((2, 2), (6, 2), -1),
    RingVariant.CENTER_STAGGERED_SAME: ((2, 2), (6, 2), +1),
    RingVariant.CENTER_ALIGNED_OPPOSITE_CENTER: ((2, -6), (6, -6), -1),
    RingVariant.CENTER_STAGGERED_OPPOSITE_CENTER: ((2, -6), (6, -6), +1),
    RingVariant.CENTER_STAGGERED_OPPOSITE_RING: ((2, -6), (-2, 2), -1),
}


def ring_sum_rate(variant: RingVariant, n: int) -> int:
    """rho1' + rho2', constant along the flow."""
    (a1, b1), (a2, b2), _ = _RING_COEFFS[RingVariant(variant)]
    return (a1 + a2) * n + b1 + b2


@dataclass(frozen=True)
class RingSystem:
    n: int
    variant: RingVariant
    rho1: float
    rho2: float

    def __post_init__(self):
        object.__setattr__(self, "variant", RingVariant(self.variant))
        if int(self.n) != self.n or self.n < 2:
            raise ValueError("n must be an integer >= 2")
        if not (self.rho1 > 0 and self.rho2 > 0):
            raise ValueError("squared radii must be positive")

    @classmethod
    def initial(cls, n: int, variant, a1: float, a2: float) -> "RingSystem":
        """Rings of radii ``a1 < a2``."""
        if not 0 < a1 < a2:
            raise ValueError("need 0 < a1 < a2")
        return cls(n, RingVariant(variant), a1 * a1, a2 * a2)

    @property
    def size(self) -> int:
        return 2 * self.n + (1 if self.variant.has_center else 0)

    def windings(self, m0: int = 1) -> tuple[int, ...]:
        v = self.variant
        w = [m0] * self.n + [m0 * v.outer_sign] * self.n
        if v.has_center:
            w.append(m0 * v.center_sign)
        return tuple(w)

    def with_rho(self, rho1: float, rho2: float) -> "RingSystem":
        return RingSystem(self.n, self.variant, rho1, rho2)


def ring_rhs_array(n: int, variant: RingVariant, rho1: float, rho2: float) -> tuple[float, float]:
    (a1, b1), (a2, b2), sign = _RING_COEFFS[variant]
    p1 = rho1 ** (n / 2)
    p2 = rho2 ** (n / 2)
    if variant.staggered:
        den = p2 + p1
    else:
        den = p2 - p1
        if den == 0:
            raise ZeroDivisionError("equal radii make the aligned coupling singular")
    r = 4.0 * n * p1 / den
    return a1 * n + b1 + sign * r, a2 * n + b2 - sign * r


def ring_rhs(sys: RingSystem) -> tuple[float, float]:
    """(rho1', rho2') of the reduced two-ring system."""
    if not sys.variant.staggered and sys.rho1 == sys.rho2:
        raise ValueError("aligned rings with equal radii: the coupling term is singular")
    return ring_rhs_array(sys.n, sys.variant, sys.rho1, sys.rho2)


def ring_kernel_sum(x: float, n: int, staggered: bool) -> float:
    """sum_j (x^2 - 1) / (x^2 + 1 - 2x cos(phi_j)) over the ring offsets, closed form.

    ``phi_j = 2 pi j / n`` (aligned) or shifted by ``pi / n`` (staggered).
    """
    if not x > 1:
        raise ValueError("x must exceed 1")
    xn = x ** n
    if staggered:
        return n * (xn - 1.0) / (xn + 1.0)
    return n * (xn + 1.0) / (xn - 1.0)


def ring_kernel_sum_direct(x: float, n: int, staggered: bool) -> float:
    """The same sum evaluated term by term."""
    shift = math.pi / n if staggered else 0.0
    return math.fsum(
        (x * x - 1.0) / (x * x + 1.0 - 2.0 * x * math.cos(TWO_PI * j / n + shift)) for j in range(n)
    )


def unit_circle_point(turns) -> tuple[float, float]:
    """(cos, sin) of ``2*pi*turns``.

    Rational ``turns`` are reduced to the first octant with exact symmetry
    operations, so points related by reflections across the axes or the
    diagonals come out exactly mirrored.
    """
    if not isinstance(turns, Fraction):
        a = TWO_PI * float(turns)
        return math.cos(a), math.sin(a)
    f = turns % 1
    q = int(f * 4)
    r = f - Fraction(q, 4)
    if r > Fraction(1, 8):
        a = TWO_PI * float(Fraction(1, 4) - r)
        c, s = math.sin(a), math.cos(a)
    elif r == Fraction(1, 8):
        c = s = math.sqrt(0.5)
    elif r == 0:
        c, s = 1.0, 0.0
    else:
        a = TWO_PI * float(r)
        c, s = math.cos(a), math.sin(a)
    for _ in range(q):
        c, s = -s, c
    return c + 0.0, s + 0.0


def ring_unit_vectors(n: int, variant: RingVariant, theta0: float = 0.0) -> tuple[FloatArray, FloatArray]:
    """Unit vectors of the inner and outer ring positions."""
    variant = RingVariant(variant)
    shift = Fraction(1, 2 * n) if variant.staggered else Fraction(0)
    if theta0 == 0:
        inner = [unit_circle_point(Fraction(j, n)) for j in range(n)]
        outer = [unit_circle_point(Fraction(j, n) + shift) for j in range(n)]
    else:
        t0 = theta0 / TWO_PI
        inner = [unit_circle_point(j / n + t0) for j in range(n)]
        outer = [unit_circle_point(j / n + float(shift) + t0) for j in range(n)]
    return np.array(inner), np.array(outer)


def lift_ring(
    sys: RingSystem, theta0: float = 0.0, center=(0.0, 0.0), m0: int = 1
) -> VortexConfiguration:
    """Full configuration of a ring state: inner ring, outer ring, then center."""
    inner, outer = ring_unit_vectors(sys.n, sys.variant, theta0)
    c = np.asarray(center, dtype=np.float64)
    pts = [c + math.sqrt(sys.rho1) * inner, c + math.sqrt(sys.rho2) * outer]
    if sys.variant.has_center:
        pts.append(c[None, :])
    return VortexConfiguration(np.vstack(pts), sys.windings(m0))


def ring_radii(positions: FloatArray, n: int, center=(0.0, 0.0)) -> tuple[FloatArray, FloatArray]:
    """Squared distances from ``center`` of the inner and outer ring vortices."""
    x = np.asarray(positions) - np.asarray(center)[None, :]
    r2 = np.sum(x * x, axis=-1)
    return r2[..., :n], r2[..., n : 2 * n]


@dataclass(frozen=True, eq=False)
class RingTrajectory:
    times: FloatArray
    rho: FloatArray
    """shape (K, 2): columns rho1, rho2"""
    terminal: str
    t_stop: float
    system: RingSystem


#: step cap factor for the reduced ring systems
RING_STEP_FACTOR = 0.05


def _time_scale(value: float, rate: float) -> float:
    return math.inf if rate == 0 else max(value, 0.0) / abs(rate)


def integrate_ring(sys: RingSystem, control: StepControl | None = None, *, sample_times=None) -> RingTrajectory:
    """Integrate the reduced ring ODE.

    The run stops when the minimal distance in the lifted configuration
    drops below ``collision_eps`` (terminal ``"collision"``).
    """
    control = control or StepControl()
    n, variant = sys.n, sys.variant
    inner, outer = ring_unit_vectors(n, variant)
    center = variant.has_center

    def f(y):
        return np.array(ring_rhs_array(n, variant, y[0], y[1]))

    def gap(y):
        if y[0] <= 0 or y[1] <= 0:
            return 0.0
        pts = [math.sqrt(y[0]) * inner, math.sqrt(y[1]) * outer]
        if center:
            pts.append(np.zeros((1, 2)))
        return dmin_array(np.vstack(pts))

    def cap(y):
        # time for each radius (and the aligned radius gap) to reach zero at its current speed
        d1, d2 = ring_rhs_array(n, variant, y[0], y[1])
        scales = [_time_scale(y[0], d1), _time_scale(y[1], d2)]
        if not variant.staggered:
            scales.append(_time_scale(abs(y[1] - y[0]), abs(d2 - d1)))
        return RING_STEP_FACTOR * min(scales)

    res = stepper.run(f, np.array([sys.rho1, sys.rho2]), control, gap=gap, step_cap=cap, sample_times=sample_times)
    return RingTrajectory(res.times, res.states, res.kind, float(res.t_stop), sys)


# ----------------------------------------------------------------- triangle


@dataclass(frozen=True)
class TriangleState:
    """Side lengths, interior angles (``theta_j`` at vertex ``j``) and area."""

    d12: float
    d13: float
    d23: float
    theta1: float
    theta2: float
    theta3: float
    area: float

    def as_vector(self) -> FloatArray:
        return np.array([self.d12, self.d13, self.d23, self.theta1, self.theta2, self.theta3])


def _angle(adjacent1: float, adjacent2: float, opposite: float) -> float:
    c = (adjacent1**2 + adjacent2**2 - opposite**2) / (2.0 * adjacent1 * adjacent2)
    return math.acos(min(1.0, max(-1.0, c)))


def heron_area(a: float, b: float, c: float) -> float:
    # Kahan's ordering for accuracy on thin triangles
    a, b, c = sorted((a, b, c), reverse=True)
    p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    return 0.25 * math.sqrt(max(p, 0.0))


def triangle_state(config) -> TriangleState:
    x = config.positions if isinstance(config, VortexConfiguration) else np.asarray(config, float)
    if x.shape != (3, 2):
        raise ValueError("a triangle needs exactly three vortices")
    d12 = math.dist(x[0], x[1])
    d13 = math.dist(x[0], x[2])
    d23 = math.dist(x[1], x[2])
    area = heron_area(d12, d13, d23)
    if area <= 1e-14 * max(d12, d13, d23) ** 2:
        raise ValueError("collinear vortices do not form a triangle")
    t1 = _angle(d12, d13, d23)
    t2 = _angle(d12, d23, d13)
    t3 = math.pi - t1 - t2
    return TriangleState(d12, d13, d23, t1, t2, t3, area)


def _b_factor(s: TriangleState) -> float:
    if s.area <= 0:
        raise ValueError("degenerate triangle")
    return 4.0 * s.area / (s.d12 * s.d13 * s.d23) ** 2


def triangle_rhs_same_sign(s: TriangleState) -> FloatArray:
    """Time derivative of (d12, d13, d23, theta1, theta2, theta3), equal windings."""
    b = _b_factor(s)
    c1, c2, c3 = math.cos(s.theta1), math.cos(s.theta2), math.cos(s.theta3)
    q12, q13, q23 = s.d12**2, s.d13**2, s.d23**2
    return np.array(
        [
            4 / s.d12 + 2 * c1 / s.d13 + 2 * c2 / s.d23,
            4 / s.d13 + 2 * c1 / s.d12 + 2 * c3 / s.d23,
            4 / s.d23 + 2 * c2 / s.d12 + 2 * c3 / s.d13,
            b * (q12 + q13 - 2 * q23),
            b * (q12 + q23 - 2 * q13),
            b * (q13 + q23 - 2 * q12),
        ]
    )


def triangle_rhs_mixed(s: TriangleState) -> FloatArray:
    """Time derivative of (d12, d13, d23, theta1, theta2, theta3) for m = (+1, -1, +1)."""
    b = _b_factor(s)
    c1, c2, c3 = math.cos(s.theta1), math.cos(s.theta2), math.cos(s.theta3)
    q12, q13, q23 = s.d12**2, s.d13**2, s.d23**2
    return np.array(
        [
            -4 / s.d12 + 2 * c1 / s.d13 - 2 * c2 / s.d23,
            4 / s.d13 - 2 * c1 / s.d12 - 2 * c3 / s.d23,
            -4 / s.d23 - 2 * c2 / s.d12 + 2 * c3 / s.d13,
            -b * (q12 + q13),
            b * (q12 + q23 + 2 * q13),
            -b * (q13 + q23),
        ]
    )


# -------------------------------------------------------------------- phase

EQUILATERAL_GAP = TWO_PI / 3


@dataclass(frozen=True)
class PhaseState:
    """Angular gaps of three vortices around their mass center.

    ``order`` lists the vortex indices by increasing polar angle at the time
    the labels were fixed; ``s`` is the logarithmic time of the same-sign
    flow, ``s = log((12 t + H3_0) / H3_0) / 4``.
    """

    phi1: float
    phi2: float
    s: float
    psi: tuple[float, float]
    order: tuple[int, int, int]

    @property
    def psi_norm(self) -> float:
        return math.hypot(*self.psi)


def phase_state(config, h3_0: float, order=None) -> PhaseState:
    """Phase gaps and log-time of a same-sign triangle centered at the origin.

    ``12 t + H3_0`` is read off the configuration as ``sum_j |x_j|^2`` (the
    value of the conserved H3 combination), so no time argument is needed.
    Pass ``order`` from an earlier state to keep labels fixed along a run.
    """
    x = config.positions if isinstance(config, VortexConfiguration) else np.asarray(config, float)
    if x.shape != (3, 2):
        raise ValueError("phase_state needs three vortices")
    if isinstance(config, VortexConfiguration) and len(set(config.windings)) != 1:
        raise ValueError("phase_state needs equal winding numbers")
    mc = mass_center(x)
    scale = math.sqrt(float(np.sum(x * x)) / 3.0)
    if math.hypot(*mc) > 1e-8 * max(1.0, scale):
        raise ValueError(f"mass center {mc} is not at the origin")
    theta = np.arctan2(x[:, 1], x[:, 0]) % TWO_PI
    if order is None:
        order = tuple(int(i) for i in np.argsort(theta, kind="stable"))
    th = theta[list(order)]
    phi1 = (th[1] - th[0]) % TWO_PI
    phi2 = (th[2] - th[1]) % TWO_PI
    big_h = float(np.sum(x * x))
    s = 0.25 * math.log(big_h / h3_0)
    return PhaseState(float(phi1), float(phi2), s, (phi1 - EQUILATERAL_GAP, phi2 - EQUILATERAL_GAP), tuple(order))
