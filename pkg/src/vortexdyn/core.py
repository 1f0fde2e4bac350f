"""Vortex configurations, the interaction law, energy and first integrals.

The state of ``N`` vortices is a ``(N, 2)`` float64 array of centers plus a
tuple of winding numbers in ``{+1, -1}``. Like signs repel and opposite
signs attract; vortex ``j`` moves with velocity

    2 m_j sum_{k != j} m_k (x_j - x_k) / |x_j - x_k|^2 .

Row reductions use exactly rounded summation (``math.fsum``). The result of
a sum then does not depend on the order of its terms, so any symmetry of a
configuration that is exact in floating point (mirror images across the
axes, swaps of coordinates) is preserved exactly by the discrete flow.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import NDArray

FloatArray = NDArray[np.float64]

#: pairwise distances below this are treated as a coincidence
DEGENERATE_DISTANCE = 1e-12


class DegenerateConfigurationError(ValueError):
    """Two vortex centers coincide (closer than ``DEGENERATE_DISTANCE``)."""

    def __init__(self, pair: tuple[int, int], distance: float):
        self.pair = pair
        self.distance = distance
        super().__init__(
            f"vortices {pair[0]} and {pair[1]} coincide "
            f"(distance {distance:.3e} < {DEGENERATE_DISTANCE:g})"
        )


def _check_windings(windings: Iterable[int]) -> tuple[int, ...]:
    out = []
    for m in windings:
        if isinstance(m, bool) or int(m) != m or int(m) not in (1, -1):
            raise ValueError(f"winding numbers must be +1 or -1, got {m!r}")
        out.append(int(m))
    return tuple(out)


def _frozen(arr) -> FloatArray:
    a = np.array(arr, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class VortexConfiguration:
    """Centers ``positions[j] = (x_j, y_j)`` and windings ``m_j``.

    Construction validates the shapes, the windings and that all centers
    are pairwise distinct; the position array is stored read-only.
    """

    positions: FloatArray
    windings: tuple[int, ...]

    def __post_init__(self):
        pos = np.array(self.positions, dtype=np.float64)
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise ValueError(f"positions must have shape (N, 2), got {pos.shape}")
        if pos.shape[0] < 2:
            raise ValueError("at least two vortices are required")
        if not np.isfinite(pos).all():
            raise ValueError("positions contain non-finite values")
        windings = _check_windings(self.windings)
        if len(windings) != pos.shape[0]:
            raise ValueError(
                f"{pos.shape[0]} positions but {len(windings)} winding numbers"
            )
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "windings", windings)
        value, pair = min_pairwise_distance(pos)
        if value < DEGENERATE_DISTANCE:
            raise DegenerateConfigurationError(pair, value)

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def m(self) -> FloatArray:
        return np.asarray(self.windings, dtype=np.float64)

    def with_positions(self, positions) -> "VortexConfiguration":
        return VortexConfiguration(positions, self.windings)

    def __eq__(self, other):
        if not isinstance(other, VortexConfiguration):
            return NotImplemented
        return self.windings == other.windings and np.array_equal(
            self.positions, other.positions
        )

    def __hash__(self):
        return hash((self.windings, self.positions.tobytes()))


@dataclass(frozen=True)
class IntegralSet:
    """The three time-dependent first integrals and related monitors."""

    h1: float
    h2: float
    h3: float
    m0: float
    mass_center: tuple[float, float]
    energy: float
    time: float

    def consistency_gap(self, n: int) -> float:
        """|h2 - (h1 + h3) / (2(N-1))|, zero up to rounding."""
        return abs(self.h2 - (self.h1 + self.h3) / (2.0 * (n - 1)))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["mass_center"] = list(self.mass_center)
        return out


@dataclass(frozen=True)
class SubsetWinding:
    """Collective winding number of a subset of vortices."""

    indices: frozenset[int]
    m1: float = field(compare=True)


def _as_positions(config_or_positions) -> FloatArray:
    if isinstance(config_or_positions, VortexConfiguration):
        return config_or_positions.positions
    return np.asarray(config_or_positions, dtype=np.float64)


def _row_fsum(a: FloatArray) -> FloatArray:
    return np.array([math.fsum(row) for row in a.tolist()])


def _pair_terms(x: FloatArray, m: FloatArray) -> tuple[FloatArray, FloatArray, FloatArray]:
    diff = x[:, None, :] - x[None, :, :]
    r2 = diff[..., 0] * diff[..., 0] + diff[..., 1] * diff[..., 1]
    np.fill_diagonal(r2, 1.0)
    w = m[None, :] / r2
    np.fill_diagonal(w, 0.0)
    return diff, r2, w


def velocity_array(x: FloatArray, m: FloatArray) -> FloatArray:
    """Velocity field on raw arrays; no validation. Shape ``(N, 2)``."""
    diff, _, w = _pair_terms(x, m)
    vx = _row_fsum(w * diff[..., 0])
    vy = _row_fsum(w * diff[..., 1])
    return (2.0 * m)[:, None] * np.stack((vx, vy), axis=1)


def velocity_field(config: VortexConfiguration) -> FloatArray:
    """Velocity of every vortex under the interaction law, shape ``(N, 2)``."""
    return velocity_array(config.positions, config.m)


def velocity_field_complex(config: VortexConfiguration) -> FloatArray:
    """Same field via ``dz_j/dt = 2 m_j sum_k m_k / (conj(z_j) - conj(z_k))``."""
    z = config.positions[:, 0] + 1j * config.positions[:, 1]
    m = config.m
    dz = np.conj(z)[:, None] - np.conj(z)[None, :]
    np.fill_diagonal(dz, 1.0)
    terms = m[None, :] / dz
    np.fill_diagonal(terms, 0.0)
    zdot = 2.0 * m * terms.sum(axis=1)
    return np.stack((zdot.real, zdot.imag), axis=1)


def interaction_energy(config: VortexConfiguration) -> float:
    """W(X) = -sum_{j != k} m_j m_k ln|x_j - x_k| (each pair counted twice)."""
    x, m = config.positions, config.m
    total = []
    for j, k in combinations(range(config.n), 2):
        d = math.hypot(x[j, 0] - x[k, 0], x[j, 1] - x[k, 1])
        total.append(-2.0 * m[j] * m[k] * math.log(d))
    return math.fsum(total)


def energy_gradient(config: VortexConfiguration) -> FloatArray:
    """Analytic gradient of ``interaction_energy``; equals minus the velocity."""
    return -velocity_field(config)


def pair_sum_m0(windings: Sequence[int]) -> float:
    """M0 = sum_{j<l} m_j m_l, from the counts of positive/negative vortices."""
    windings = _check_windings(windings)
    if len(windings) < 2:
        raise ValueError("at least two vortices are required")
    n = len(windings)
    n_plus = sum(1 for m in windings if m > 0)
    n_minus = n - n_plus
    return ((n_plus - n_minus) ** 2 - n) / 2.0


def collective_winding(windings: Sequence[int], indices: Iterable[int]) -> SubsetWinding:
    """M1 of a subset I: half the sum of m_j m_l over ordered pairs in I.

    A subset with ``m1 >= 0`` can never form a collision cluster.
    """
    windings = _check_windings(windings)
    idx = frozenset(int(i) for i in indices)
    if len(idx) < 2:
        raise ValueError("a subset needs at least two vortices")
    if min(idx) < 0 or max(idx) >= len(windings):
        raise IndexError(f"subset {sorted(idx)} out of range for N={len(windings)}")
    m1 = sum(windings[j] * windings[l] for j, l in combinations(sorted(idx), 2))
    return SubsetWinding(idx, float(m1))


def first_integrals(x: FloatArray, m0: float, t: float) -> tuple[float, float, float]:
    """(H1, H2, H3) at positions ``x`` and time ``t``."""
    n = x.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    dif = x[iu] - x[ju]
    tot = x[iu] + x[ju]
    h1 = -4.0 * n * m0 * t + math.fsum((dif * dif).ravel().tolist())
    h2 = -4.0 * m0 * t + math.fsum((x * x).ravel().tolist())
    h3 = -4.0 * (n - 2) * m0 * t + math.fsum((tot * tot).ravel().tolist())
    return h1, h2, h3


def mass_center(x: FloatArray) -> tuple[float, float]:
    n = x.shape[0]
    return (math.fsum(x[:, 0].tolist()) / n, math.fsum(x[:, 1].tolist()) / n)


def integral_set(config: VortexConfiguration, t: float = 0.0) -> IntegralSet:
    if t < 0:
        raise ValueError("time must be non-negative")
    m0 = pair_sum_m0(config.windings)
    h1, h2, h3 = first_integrals(config.positions, m0, t)
    return IntegralSet(
        h1=h1,
        h2=h2,
        h3=h3,
        m0=m0,
        mass_center=mass_center(config.positions),
        energy=interaction_energy(config),
        time=float(t),
    )


def collision_upper_bound(h1_0: float, n: int, m0: float) -> float | None:
    """Latest possible collision time -H1/(4 N M0) when M0 < 0, else None."""
    if h1_0 <= 0:
        raise ValueError("h1_0 must be positive")
    if m0 >= 0:
        return None
    return -h1_0 / (4.0 * n * m0)


def min_pairwise_distance(config_or_positions) -> tuple[float, tuple[int, int]]:
    """Smallest pairwise distance and the lexicographically first pair attaining it."""
    x = _as_positions(config_or_positions)
    n = x.shape[0]
    if n < 2:
        raise ValueError("at least two points are required")
    iu, ju = np.triu_indices(n, k=1)
    d = np.hypot(x[iu, 0] - x[ju, 0], x[iu, 1] - x[ju, 1])
    k = int(np.argmin(d))  # first occurrence == lexicographic order of triu_indices
    return float(d[k]), (int(iu[k]), int(ju[k]))


def dmin_array(x: FloatArray) -> float:
    n = x.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    return float(np.min(np.hypot(x[iu, 0] - x[ju, 0], x[iu, 1] - x[ju, 1])))


def rotation(theta: float) -> FloatArray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])
