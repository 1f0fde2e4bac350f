"""Closed-form solutions, asymptotic slope equations and special configurations.

These are the ground truth the numerical integrator is checked against.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import FloatArray, VortexConfiguration
from .reduced import RingVariant, detect_collinear, unit_circle_point


# ----------------------------------------------------------- closed forms


class SolutionKind(str, enum.Enum):
    PAIR = "pair"
    DIPOLE = "dipole"
    POLYGON = "polygon"
    RING_N2 = "ring_n2"


@dataclass(frozen=True)
class ClosedFormSolution:
    """An exact solution, evaluable on ``0 <= t < horizon``.

    ``parameters`` holds the defining constants by name. ``state(t)``
    returns positions ``(N, 2)`` for pair, dipole and polygon solutions and
    ``(rho1, rho2)`` for two-ring solutions.
    """

    kind: SolutionKind
    parameters: dict = field(compare=False)
    horizon: float | None = None
    variant: RingVariant | None = None
    collision_point: tuple[float, float] | None = None

    def _check_time(self, t: float):
        if t < 0 or (self.horizon is not None and t > self.horizon):
            raise ValueError(f"t={t!r} outside [0, {self.horizon}]")

    def state(self, t: float):
        self._check_time(t)
        p = self.parameters
        if self.kind in (SolutionKind.PAIR, SolutionKind.DIPOLE):
            sign = 1.0 if self.kind is SolutionKind.PAIR else -1.0
            d = math.sqrt(max(p["d0"] ** 2 + sign * 8.0 * t, 0.0))
            c, u = np.asarray(p["midpoint"]), np.asarray(p["unit"])
            return np.array([c + 0.5 * d * u, c - 0.5 * d * u])
        if self.kind is SolutionKind.POLYGON:
            return np.asarray(p["center"]) + self.radius(t) * np.asarray(p["unit_vectors"])
        return _RING_FORMS[self.variant](p, t)

    def radius(self, t: float) -> float:
        """Polygon radius, or half the pair separation."""
        self._check_time(t)
        p = self.parameters
        if self.kind is SolutionKind.POLYGON:
            return math.sqrt(p["r0"] ** 2 + 2.0 * (p["n"] - 1) * t)
        if self.kind is SolutionKind.RING_N2:
            raise TypeError("ring solutions have two radii; use state()")
        return 0.5 * math.dist(*self.state(t))

    def rho(self, t: float) -> tuple[float, float]:
        if self.kind is not SolutionKind.RING_N2:
            raise TypeError("rho() is defined for two-ring solutions only")
        return self.state(t)


def pair_dipole_solution(x1_0, x2_0, same_sign: bool) -> ClosedFormSolution:
    """Two vortices: separation sqrt(d0^2 + 8t) (pair) or sqrt(d0^2 - 8t) (dipole).

    The midpoint is fixed; a dipole collides there at ``t = d0^2 / 8``.
    """
    a = np.asarray(x1_0, dtype=np.float64)
    b = np.asarray(x2_0, dtype=np.float64)
    d0 = float(np.hypot(*(a - b)))
    if d0 < 1e-12:
        raise ValueError("coincident initial positions")
    mid = 0.5 * (a + b)
    params = {"d0": d0, "midpoint": tuple(mid.tolist()), "unit": tuple(((a - b) / d0).tolist())}
    if same_sign:
        return ClosedFormSolution(SolutionKind.PAIR, params)
    return ClosedFormSolution(
        SolutionKind.DIPOLE, params, horizon=d0 * d0 / 8.0, collision_point=tuple(mid.tolist())
    )


def polygon_solution(n: int, r0: float, theta0: float = 0.0, center=(0.0, 0.0)) -> ClosedFormSolution:
    """Equal windings on a regular ``n``-gon: radius sqrt(r0^2 + 2(n-1)t)."""
    if int(n) != n or n < 2:
        raise ValueError("n must be an integer >= 2")
    if not r0 > 0:
        raise ValueError("r0 must be positive")
    if theta0 == 0:
        units = [unit_circle_point(Fraction(j, n)) for j in range(n)]
    else:
        units = [unit_circle_point(j / n + theta0 / (2 * math.pi)) for j in range(n)]
    params = {
        "n": int(n),
        "r0": float(r0),
        "theta0": float(theta0),
        "center": tuple(float(c) for c in center),
        "unit_vectors": tuple(units),
    }
    return ClosedFormSolution(SolutionKind.POLYGON, params)


def polygon_configuration(n: int, r0: float, theta0: float = 0.0, center=(0.0, 0.0), m: int = 1) -> VortexConfiguration:
    sol = polygon_solution(n, r0, theta0, center)
    return VortexConfiguration(sol.state(0.0), (m,) * n)


def _sqrt_form(b: float, c: float):
    # rho = C1 + b t -/+ sqrt(C2^2 + 8 C1 t + c t^2)
    def f(p, t):
        root = math.sqrt(p["C2"] ** 2 + 8.0 * p["C1"] * t + c * t * t)
        mid = p["C1"] + b * t
        # rho1 from the product rho1*rho2 avoids cancellation
        rho2 = mid + root
        return (mid * mid - root * root) / rho2, rho2

    return f


def _power_form(b: float, expo: float):
    # rho = C1 + b t -/+ C2 (1 + b t / C1)^expo
    def f(p, t):
        mid = p["C1"] + b * t
        dev = p["C2"] * (1.0 + b * t / p["C1"]) ** expo
        return mid - dev, mid + dev

    return f


def _opposite_center_n2(p, t):
    mid = 2.0 * t + p["C1"]
    root = math.sqrt(8.0 * t * t + 8.0 * p["C1"] * t + p["C2"] ** 2)
    rho2 = mid + root
    return (mid * mid - root * root) / rho2, rho2


def _opposite_ring_n2(p, t):
    u = p["C1"] - 2.0 * t
    c3 = p["C3"]
    return u * (2.0 * c3 * u - 1.0), u * (3.0 - 2.0 * c3 * u)


_RING_FORMS = {
    RingVariant.ALIGNED_SAME: _sqrt_form(6.0, 24.0),
    RingVariant.STAGGERED_SAME: _power_form(6.0, 2.0 / 3.0),
    RingVariant.CENTER_ALIGNED_SAME: _sqrt_form(10.0, 40.0),
    RingVariant.CENTER_STAGGERED_SAME: _power_form(10.0, 2.0 / 5.0),
    RingVariant.CENTER_ALIGNED_OPPOSITE_CENTER: _opposite_center_n2,
    RingVariant.CENTER_STAGGERED_OPPOSITE_RING: _opposite_ring_n2,
}

#: variants with an n = 2 closed form
RING_N2_VARIANTS = tuple(_RING_FORMS)


def ring_n2_closed_form(variant, a1: float, a2: float) -> ClosedFormSolution:
    """Exact (rho1, rho2) for two rings of two vortices each.

    ``C1 = (a1^2 + a2^2)/2`` and ``C2 = (a2^2 - a1^2)/2``. Variants that send
    ``rho1`` to zero carry the time of that inner collapse as ``horizon``.
    """
    variant = RingVariant(variant)
    if variant not in _RING_FORMS:
        raise ValueError(f"no n = 2 closed form for {variant.value}")
    if not 0 < a1 < a2:
        raise ValueError("need 0 < a1 < a2")
    q1, q2 = a1 * a1, a2 * a2
    params = {"n": 2, "a1": float(a1), "a2": float(a2), "C1": 0.5 * (q1 + q2), "C2": 0.5 * (q2 - q1)}
    horizon = None
    if variant is RingVariant.CENTER_ALIGNED_OPPOSITE_CENTER:
        # positive root of 4t^2 + 4 C1 t - a1^2 a2^2 = 0, in cancellation-free form
        c1 = params["C1"]
        horizon = q1 * q2 / (2.0 * (c1 + math.sqrt(c1 * c1 + q1 * q2)))
    elif variant is RingVariant.CENTER_STAGGERED_OPPOSITE_RING:
        c3 = (3.0 * q1 + q2) / (q1 + q2) ** 2
        params["C3"] = c3
        # rho1 = u (2 C3 u - 1) with u = C1 - 2t vanishes at u = 1/(2 C3)
        horizon = q1 / (3.0 * q1 + q2) * (q1 + q2) / 2.0
    point = (0.0, 0.0) if horizon is not None else None
    return ClosedFormSolution(SolutionKind.RING_N2, params, horizon, variant, point)


# ------------------------------------------------------- asymptotic slopes


class NoSlopeRoot(ValueError):
    """The slope equations have no solution with 0 < alpha < beta.

    ``boundary`` carries the boundary solution when one exists.
    """

    def __init__(self, message: str, boundary: "SlopePair | None" = None):
        super().__init__(message)
        self.boundary = boundary


#: slope family k -> the two-ring variant whose large-time rates it describes
FAMILY_VARIANTS = {
    1: RingVariant.ALIGNED_SAME,
    2: RingVariant.STAGGERED_SAME,
    3: RingVariant.CENTER_ALIGNED_SAME,
    4: RingVariant.CENTER_STAGGERED_SAME,
    5: RingVariant.CENTER_ALIGNED_OPPOSITE_CENTER,
    6: RingVariant.CENTER_STAGGERED_OPPOSITE_CENTER,
}


def family_sum(n: int, family: int) -> int:
    """alpha + beta for the family: 8n - 4, 8n + 4 or 8n - 12."""
    return {1: 8 * n - 4, 2: 8 * n - 4, 3: 8 * n + 4, 4: 8 * n + 4, 5: 8 * n - 12, 6: 8 * n - 12}[family]


@dataclass(frozen=True)
class SlopePair:
    """Large-time rates ``rho1 ~ alpha t`` and ``rho2 ~ beta t``.

    ``degenerate`` is ``None`` for an interior solution. Otherwise it names
    the boundary point that solves the equations when no interior root
    exists: ``"alpha_zero"`` (``alpha = 0``: the inner ring stays bounded)
    or ``"equal_slopes"`` (``alpha = beta``: the radius ratio tends to one).
    """

    alpha: float
    beta: float
    n: int
    family: int
    residual: float
    degenerate: str | None = None

    def __post_init__(self):
        if self.degenerate is None and not 0 < self.alpha < self.beta:
            raise ValueError("need 0 < alpha < beta")

    @property
    def variant(self) -> RingVariant:
        return FAMILY_VARIANTS[self.family]


def slope_residuals(alpha: float, beta: float, n: int, family: int) -> tuple[float, float]:
    """Residuals of the sum equation and of the kernel equation at (alpha, beta)."""
    s = family_sum(n, family)
    if alpha == beta and family % 2 == 0:
        kernel = 0.0
    else:
        kernel = _kernel(alpha / beta, n, family)
    return abs(alpha + beta - s), abs((beta - alpha) - 4 * n * kernel)


def _kernel(q: float, n: int, family: int) -> float:
    p = q ** (n / 2)
    # odd families (aligned rings) use the + kernel, even ones (staggered) the - kernel
    return (1.0 + p) / (1.0 - p) if family % 2 else (1.0 - p) / (1.0 + p)


def _residual(alpha: float, n: int, family: int, s: float) -> float:
    beta = s - alpha
    return (beta - alpha) - 4 * n * _kernel(alpha / beta, n, family)


def solve_asymptotic_slopes(n: int, family: int, *, allow_boundary: bool = False) -> SlopePair:
    """Solve alpha + beta = S, beta - alpha = 4n K(alpha/beta) by bisection on alpha.

    The kernel ``K`` is ``(1+p)/(1-p)`` for odd families and ``(1-p)/(1+p)``
    for even ones, with ``p = (alpha/beta)^(n/2)``. When no root lies in
    ``0 < alpha < S/2`` :class:`NoSlopeRoot` is raised. If the equations
    hold at a boundary point, that pair (flagged via ``degenerate``) is
    attached to the exception, or returned when ``allow_boundary`` is set.
    """
    if family not in FAMILY_VARIANTS:
        raise ValueError(f"family must be one of 1..6, got {family!r}")
    if int(n) != n or n < 2:
        raise ValueError("n must be an integer >= 2")
    s = float(family_sum(n, family))
    if s <= 0:
        raise NoSlopeRoot(f"family {family}, n={n}: alpha + beta = {s:g} is not positive")
    lo, hi = 0.0, 0.5 * s
    f_lo = s - 4.0 * n  # limit alpha -> 0
    grid = np.linspace(0, 0.5 * s, 66)[1:-1]
    values = np.array([_residual(a, n, family, s) for a in grid])
    signs = np.sign(np.concatenate(([f_lo], values)))
    changes = int(np.count_nonzero(np.diff(signs[signs != 0]) != 0))
    if changes > 1:
        raise NoSlopeRoot(f"family {family}, n={n}: residual is not monotone, {changes} sign changes")
    if changes == 1 and f_lo > 0:
        while True:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if _residual(mid, n, family, s) > 0:
                lo = mid
            else:
                hi = mid
        # keep the endpoint with the smaller residual
        alpha = min((lo, hi), key=lambda a: abs(_residual(a, n, family, s)) if a > 0 else math.inf)
        beta = s - alpha
        return SlopePair(alpha, beta, int(n), family, max(slope_residuals(alpha, beta, n, family)))

    reason = f"family {family}, n={n}: no root with 0 < alpha < beta"
    boundary = None
    if f_lo == 0:
        boundary = SlopePair(0.0, s, int(n), family, max(slope_residuals(0.0, s, n, family)), "alpha_zero")
    elif family % 2 == 0 and f_lo > 0:
        # near q = 1 the even-family residual behaves like (S/2 - n^2)(1 - q)
        half = 0.5 * s
        boundary = SlopePair(half, half, int(n), family, max(slope_residuals(half, half, n, family)), "equal_slopes")
    if boundary is not None:
        if allow_boundary:
            return boundary
        reason += f"; the equations hold at the boundary ({boundary.degenerate})"
    raise NoSlopeRoot(reason, boundary)


# ------------------------------------------------------ special configurations


def build_equilibrium_n4(radius: float = 1.0, theta0: float = 0.0) -> VortexConfiguration:
    """Stationary four-vortex state: three +1 vortices on an equilateral
    triangle around a -1 vortex at the origin (listed last).

    Each outer vortex is pushed out by ``2/r`` from the other two and pulled
    in by ``2/r`` from the center, so all velocities vanish.
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    if theta0 == 0:
        units = [unit_circle_point(Fraction(j, 3)) for j in range(3)]
    else:
        units = [unit_circle_point(j / 3 + theta0 / (2 * math.pi)) for j in range(3)]
    pts = np.vstack([radius * np.array(units), np.zeros((1, 2))])
    return VortexConfiguration(pts, (1, 1, 1, -1))


def admissible_equilibrium_windings(n: int) -> tuple[tuple[int, int], ...] | None:
    """(N+, N-) splits allowed for a stationary state of ``n`` vortices.

    A stationary state needs M0 = 0, i.e. ``(N+ - N-)^2 = n``; so ``n`` must
    be a perfect square and ``N+ = (n +/- sqrt(n)) / 2``.
    """
    if int(n) != n or n < 2:
        raise ValueError("n must be an integer >= 2")
    k = math.isqrt(n)
    if k * k != n:
        return None
    hi, lo = (n + k) // 2, (n - k) // 2
    return ((hi, lo), (lo, hi))


@dataclass(frozen=True)
class Collinear3Limit:
    """Large-time picture of three equal-sign vortices on a line."""

    middle: int
    limit_point: tuple[float, float]
    outer: tuple[int, int]


def collinear3_asymptote(config, same_sign: bool = True) -> Collinear3Limit:
    """The middle vortex tends to the mass center; the outer two escape."""
    if isinstance(config, VortexConfiguration):
        if len(set(config.windings)) != 1 and same_sign:
            raise ValueError("windings are not all equal")
        x = config.positions
    else:
        x = np.asarray(config, dtype=np.float64)
    if x.shape != (3, 2):
        raise ValueError("need exactly three vortices")
    if not same_sign:
        raise ValueError("a limit is stated only for equal windings")
    line = detect_collinear(x)
    if line is None:
        raise ValueError("vortices are not collinear")
    order = np.argsort(line.offsets, kind="stable")
    mc = x.mean(axis=0)
    return Collinear3Limit(int(order[1]), (float(mc[0]), float(mc[1])), (int(order[0]), int(order[2])))


@dataclass(frozen=True)
class RingLimits:
    """Large-time rates for three-vortex rings with a center of opposite sign."""

    rho1_limit: float
    rho2_slope: float


def ring3_center_limits(a1: float, a2: float, variant) -> RingLimits:
    """rho1 tends to a constant and rho2 grows like 12 t.

    The constant is ``(a1 a2 / (a1 + a2))^2`` for aligned rings and
    ``(a1 a2 / (a2 - a1))^2`` for staggered rings.
    """
    variant = RingVariant(variant)
    if not 0 < a1 < a2:
        raise ValueError("need 0 < a1 < a2")
    if variant is RingVariant.CENTER_ALIGNED_OPPOSITE_CENTER:
        return RingLimits((a1 * a2 / (a1 + a2)) ** 2, 12.0)
    if variant is RingVariant.CENTER_STAGGERED_OPPOSITE_CENTER:
        return RingLimits((a1 * a2 / (a2 - a1)) ** 2, 12.0)
    raise ValueError(f"no bounded-ring limit for {variant.value}")
