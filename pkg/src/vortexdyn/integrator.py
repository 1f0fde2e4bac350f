"""Time integration of vortex configurations with collision detection.

A run stops at ``t_end``, at the first time the minimal pairwise distance
falls below ``collision_eps`` (a :class:`CollisionEvent` with a refined time
and the cluster partition), when the step size hits its floor, or when the
step budget is exhausted.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import stepper
from .core import (
    FloatArray,
    VortexConfiguration,
    dmin_array,
    velocity_array,
)
from .stepper import CrossingNotFound, StepControl, bisect_crossing

__all__ = [
    "StepControl",
    "CollisionEvent",
    "TerminalEvent",
    "Trajectory",
    "CrossingNotFound",
    "integrate",
    "refine_collision_time",
    "classify_clusters",
    "DMIN_STEP_FACTOR",
]

#: step cap dt <= DMIN_STEP_FACTOR * d_min**2
DMIN_STEP_FACTOR = 0.05


@dataclass(frozen=True)
class CollisionEvent:
    t_collision: float
    clusters: tuple[tuple[int, ...], ...]
    locations: tuple[tuple[float, float], ...]
    """one location per cluster of size >= 2, in the order of ``colliding``"""

    @property
    def colliding(self) -> tuple[tuple[int, ...], ...]:
        return tuple(c for c in self.clusters if len(c) >= 2)

    def to_dict(self) -> dict:
        return {
            "t_collision": self.t_collision,
            "clusters": [list(c) for c in self.clusters],
            "colliding": [list(c) for c in self.colliding],
            "locations": [list(p) for p in self.locations],
        }


@dataclass(frozen=True)
class TerminalEvent:
    kind: Literal["reached_end", "collision", "step_floor", "step_budget"]
    t: float
    collision: CollisionEvent | None = None

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "t": self.t}
        if self.collision is not None:
            out["collision"] = self.collision.to_dict()
        return out


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled solution: ``positions[k]`` is the state at ``times[k]``."""

    times: FloatArray
    positions: FloatArray
    windings: tuple[int, ...]
    terminal: TerminalEvent
    steps: int = 0

    def __len__(self):
        return len(self.times)

    def state(self, k: int) -> VortexConfiguration:
        return VortexConfiguration(self.positions[k], self.windings)

    @property
    def final(self) -> FloatArray:
        return self.positions[-1]

    @property
    def collided(self) -> bool:
        return self.terminal.kind == "collision"


def _flat_rhs(m: FloatArray):
    n = m.shape[0]

    def f(y):
        return velocity_array(y.reshape(n, 2), m).ravel()

    return f


def classify_clusters(
    positions, eps: float
) -> tuple[tuple[tuple[int, ...], ...], tuple[tuple[float, float], ...]]:
    """Single-linkage partition with linking radius ``2 * eps``.

    Returns the partition (every index exactly once, clusters ordered by
    their smallest member) and the centroid of every cluster with at least
    two members.
    """
    x = positions.positions if isinstance(positions, VortexConfiguration) else np.asarray(positions)
    n = x.shape[0]
    d = np.hypot(x[:, None, 0] - x[None, :, 0], x[:, None, 1] - x[None, :, 1])
    adj = csr_matrix(d <= 2.0 * eps)
    _, labels = connected_components(adj, directed=False)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(int(labels[i]), []).append(i)
    clusters = tuple(sorted((tuple(g) for g in groups.values()), key=lambda c: c[0]))
    locations = tuple(
        (float(x[list(c), 0].mean()), float(x[list(c), 1].mean())) for c in clusters if len(c) >= 2
    )
    return clusters, locations


def integrate(
    config: VortexConfiguration,
    control: StepControl | None = None,
    *,
    sample_times=None,
) -> Trajectory:
    """Integrate the interaction law from ``config`` at ``t = 0``."""
    control = control or StepControl()
    n = config.n
    m = config.m
    eps = control.collision_eps

    def gap(y):
        return dmin_array(y.reshape(n, 2))

    def cap(y):
        return DMIN_STEP_FACTOR * gap(y) ** 2

    res = stepper.run(
        _flat_rhs(m),
        config.positions.ravel(),
        control,
        gap=gap,
        step_cap=cap,
        sample_times=sample_times,
    )
    positions = res.states.reshape(len(res.times), n, 2)
    if res.kind == "collision":
        clusters, locations = classify_clusters(res.y_stop.reshape(n, 2), eps)
        event = CollisionEvent(float(res.t_stop), clusters, locations)
        terminal = TerminalEvent("collision", float(res.t_stop), event)
    else:
        kind = "reached_end" if res.kind == "end" else res.kind
        terminal = TerminalEvent(kind, float(res.t_stop))
    return Trajectory(res.times, positions, config.windings, terminal, res.steps)


def refine_collision_time(
    config: VortexConfiguration,
    t_start: float,
    t_stop: float,
    eps: float,
    control: StepControl | None = None,
) -> float:
    """Time at which d_min first falls below ``eps`` inside ``[t_start, t_stop]``.

    ``config`` is the state at ``t_start``. Each bisection probe integrates
    from ``t_start`` to the probe time; a probe counts as crossed when that
    integration detects ``d_min < eps`` on the way. Raises
    :class:`CrossingNotFound` when there is no crossing in the bracket.
    """
    if not t_stop > t_start:
        raise ValueError("empty bracket")
    base = (control or StepControl()).replace(collision_eps=eps)

    def crossed(tau: float) -> bool:
        ctl = base.replace(
            t_end=tau - t_start,
            dt_init=min(base.dt_init, tau - t_start),
            dt_max=max(base.dt_max, tau - t_start),
            sample_interval=tau - t_start,
        )
        return integrate(config, ctl).collided

    return t_start + bisect_crossing(lambda tau: crossed(t_start + tau), 0.0, t_stop - t_start)
