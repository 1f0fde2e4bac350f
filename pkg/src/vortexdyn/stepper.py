"""Embedded Dormand-Prince 5(4) stepping with PI step-size control.

The driver is generic over an autonomous right-hand side ``y' = f(y)`` on a
flat float array. Two problem-specific hooks shape a run:

* ``step_cap(y)`` bounds the step from above (used to keep steps small
  compared with the collision time scale);
* ``gap(y)`` is a non-negative separation measure; the run ends as soon as
  it drops below ``StepControl.collision_eps`` and the crossing time is
  localized by bisection.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Callable, Literal

import numpy as np

from .core import FloatArray

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B_LOW = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b - bl for b, bl in zip(_B, _B_LOW))

_SAFETY = 0.9
_FAC_MIN = 0.2
_FAC_MAX = 5.0
# PI controller exponents (Gustafsson / Hairer-Wanner II.4)
_ALPHA = 0.7 / 5
_BETA = 0.4 / 5

BISECTION_REL_WIDTH = 1e-9


class CrossingNotFound(RuntimeError):
    """The separation never drops below the threshold inside the bracket."""


@dataclass(frozen=True)
class StepControl:
    """Tolerances, step bounds, stopping rules and sampling of a run.

    ``sampling`` is ``"uniform"`` (every ``sample_interval``) or ``"log"``
    (``samples_per_decade`` points per decade from ``sample_interval`` up to
    ``t_end``). The terminal time is always sampled.
    """

    t_end: float = 1.0
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    dt_init: float = 1e-4
    dt_min: float = 1e-15
    dt_max: float = 0.1
    collision_eps: float = 1e-6
    sample_interval: float = 0.01
    max_steps: int = 2_000_000
    sampling: Literal["uniform", "log"] = "uniform"
    samples_per_decade: int = 20

    def __post_init__(self):
        if not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise ValueError("t_end must be positive and finite")
        if not (0 < self.dt_min <= self.dt_init <= self.dt_max):
            raise ValueError("need 0 < dt_min <= dt_init <= dt_max")
        if not self.collision_eps > 1e-12:
            raise ValueError("collision_eps must exceed 1e-12")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if not self.sample_interval > 0:
            raise ValueError("sample_interval must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if self.sampling not in ("uniform", "log"):
            raise ValueError(f"unknown sampling {self.sampling!r}")
        if self.samples_per_decade < 1:
            raise ValueError("samples_per_decade must be at least 1")

    def replace(self, **changes) -> "StepControl":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return StepControl(**values)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def sample_times(self) -> FloatArray:
        if self.sampling == "uniform":
            k = int(math.floor(self.t_end / self.sample_interval + 1e-9))
            grid = self.sample_interval * np.arange(1, k + 1)
        else:
            decades = math.log10(self.t_end / self.sample_interval)
            k = max(1, int(math.ceil(decades * self.samples_per_decade)))
            grid = self.sample_interval * 10.0 ** (np.arange(0, k + 1) / self.samples_per_decade)
        grid = grid[grid < self.t_end * (1 - 1e-12)]
        return np.append(grid, self.t_end)


@dataclass
class RunResult:
    times: FloatArray
    states: FloatArray
    kind: Literal["end", "collision", "step_floor", "step_budget"]
    t_stop: float
    y_stop: FloatArray
    steps: int


def dp_step(f: Callable[[FloatArray], FloatArray], y: FloatArray, h: float, k1: FloatArray):
    """One Dormand-Prince step from ``y`` with first stage ``k1 = f(y)``.

    Returns ``(y_new, error_vector, k_last)``; ``k_last = f(y_new)`` (FSAL).
    """
    ks = [k1]
    for i in range(1, 7):
        acc = y.copy()
        for a, k in zip(_A[i], ks):
            if a:
                acc += (h * a) * k
        ks.append(f(acc))
        if i == 6:
            y_new = acc
    err = np.zeros_like(y)
    for e, k in zip(_E, ks):
        if e:
            err += (h * e) * k
    return y_new, err, ks[6]


def _error_norm(err, y, y_new, control: StepControl) -> float:
    scale = control.abs_tol + control.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def bisect_crossing(
    crossed: Callable[[float], bool], lo: float, hi: float, scale: float | None = None
) -> float:
    """Smallest ``t`` with ``crossed(t)``, to width ``1e-9 * scale``; needs ``crossed(hi)``.

    ``scale`` defaults to ``max(1, |hi|)``.
    """
    if not crossed(hi):
        raise CrossingNotFound(f"no threshold crossing in [{lo!r}, {hi!r}]")
    width = BISECTION_REL_WIDTH * (max(1.0, abs(hi)) if scale is None else scale)
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if crossed(mid):
            hi = mid
        else:
            lo = mid
    return hi


def run(
    f: Callable[[FloatArray], FloatArray],
    y0: FloatArray,
    control: StepControl,
    *,
    gap: Callable[[FloatArray], float] | None = None,
    step_cap: Callable[[FloatArray], float] | None = None,
    sample_times: FloatArray | None = None,
    t0: float = 0.0,
) -> RunResult:
    """Integrate ``y' = f(y)`` from ``t0`` to ``control.t_end``.

    Steps are clipped to land exactly on sample times. When ``gap`` drops
    below ``control.collision_eps`` after a step, the crossing time is
    bisected inside that step (each probe is a single Dormand-Prince step
    from the step's start) and the run stops there.
    """
    y = np.array(y0, dtype=np.float64)
    eps = control.collision_eps
    if gap is not None and gap(y) < eps:
        raise ValueError("initial state is already within collision_eps")
    samples = control.sample_times() if sample_times is None else np.asarray(sample_times)
    samples = samples[samples > t0]
    times = [t0]
    states = [y.copy()]
    t = t0
    h = control.dt_init
    k1 = f(y)
    err_prev = 1.0
    steps = 0
    si = 0
    t_end = control.t_end

    def finish(kind, t_stop, y_stop):
        if times[-1] != t_stop:
            times.append(t_stop)
            states.append(y_stop.copy())
        return RunResult(np.array(times), np.array(states), kind, t_stop, y_stop, steps)

    while t < t_end:
        if steps >= control.max_steps:
            return finish("step_budget", t, y)
        h = min(h, control.dt_max)
        if step_cap is not None:
            h = min(h, step_cap(y))
        floor = max(control.dt_min, 4.0 * math.ulp(t))
        if h < floor:
            return finish("step_floor", t, y)
        target = samples[si] if si < len(samples) else t_end
        h_try = min(h, target - t)
        clipped = h_try < h
        y_new, err, k_new = dp_step(f, y, h_try, k1)
        if not np.all(np.isfinite(y_new)):
            h = 0.25 * h_try
            continue
        e = _error_norm(err, y, y_new, control)
        steps += 1
        if e > 1.0:
            h = h_try * max(_FAC_MIN, _SAFETY * e ** (-1.0 / 5.0))
            continue

        if gap is not None and gap(y_new) < eps:
            # bisect on the step length so the full step is reproduced exactly
            def crossed(h_sub, y_start=y, k_start=k1):
                y_sub, _, _ = dp_step(f, y_start, h_sub, k_start)
                return (not np.all(np.isfinite(y_sub))) or gap(y_sub) < eps

            h_hit = bisect_crossing(crossed, 0.0, h_try, scale=max(1.0, abs(t)))
            y_hit, _, _ = dp_step(f, y, h_hit, k1)
            steps += 1
            return finish("collision", t + h_hit, y_hit)

        t = target if clipped or h_try == target - t else t + h_try
        y, k1 = y_new, k_new
        if t == target:
            times.append(t)
            states.append(y.copy())
            si += 1
        fac = _SAFETY * max(e, 1e-10) ** (-_ALPHA) * err_prev ** _BETA
        err_prev = max(e, 1e-4)
        h_next = h_try * min(_FAC_MAX, max(_FAC_MIN, fac))
        # a step shortened only to land on a sample time keeps the old proposal
        h = h if clipped else h_next
    return finish("end", t, y)
