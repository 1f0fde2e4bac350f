"""Seeded property suites over random configurations.

Every sample draws from its own generator ``default_rng([seed, index])``,
so a suite's outcome depends only on ``(seed, samples)`` and not on the
order in which samples run.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import analysis
from .analytic import build_equilibrium_n4
from .core import (
    VortexConfiguration,
    collision_upper_bound,
    dmin_array,
    integral_set,
    interaction_energy,
    pair_sum_m0,
    velocity_field,
)
from .integrator import integrate
from .reduced import (
    RingSystem,
    RingVariant,
    integrate_ring,
    lift_ring,
    phase_state,
    ring_radii,
    triangle_rhs_mixed,
    triangle_state,
)
from .stepper import StepControl

MIN_SEPARATION = 0.1


@dataclass(frozen=True)
class PropertyResult:
    name: str
    samples: int
    worst: float
    threshold: float
    passed: bool
    worst_sample: int | None = None
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "samples": self.samples,
            "worst": self.worst,
            "threshold": self.threshold,
            "passed": self.passed,
            "worst_sample": self.worst_sample,
            "notes": self.notes,
        }

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag} {self.name}: samples={self.samples} worst={self.worst:.3e} threshold={self.threshold:.3e}"


def sample_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(index)])


def random_positions(rng: np.random.Generator, n: int, box: float = 2.0, min_sep: float = MIN_SEPARATION):
    while True:
        x = rng.uniform(-box, box, size=(n, 2))
        if dmin_array(x) >= min_sep:
            return x


def random_windings(rng: np.random.Generator, n: int, condition: Callable[[float], bool]) -> tuple[int, ...]:
    while True:
        w = tuple(int(v) for v in rng.choice([-1, 1], size=n))
        if condition(pair_sum_m0(w)):
            return w


def _collect(name, values, threshold, passes=None, notes=None) -> PropertyResult:
    values = np.asarray(values, dtype=np.float64)
    k = int(np.argmax(values)) if values.size else None
    worst = float(values[k]) if values.size else 0.0
    ok = bool(np.all(values < threshold)) if passes is None else bool(passes)
    return PropertyResult(name, int(values.size), worst, threshold, ok, k, notes or {})


# ------------------------------------------------------------------ suites


def gradient_identity(samples: int, seed: int) -> list[PropertyResult]:
    """velocity = -grad W, checked by central differences."""
    errs = []
    for i in range(samples):
        rng = sample_rng(seed, i)
        n = int(rng.integers(2, 7))
        x = random_positions(rng, n, box=1.0)
        w = tuple(int(v) for v in rng.choice([-1, 1], size=n))
        c = VortexConfiguration(x, w)
        h = 1e-6
        grad = np.zeros_like(x)
        for j in range(n):
            for d in range(2):
                xp, xm = x.copy(), x.copy()
                xp[j, d] += h
                xm[j, d] -= h
                grad[j, d] = (interaction_energy(c.with_positions(xp)) - interaction_energy(c.with_positions(xm))) / (2 * h)
        v = velocity_field(c)
        errs.append(np.linalg.norm(grad + v) / np.linalg.norm(v))
    return [_collect("gradient-identity", errs, 1e-5)]


def first_integrals(samples: int, seed: int, t_end: float = 1.0) -> list[PropertyResult]:
    """H1, H2, H3 and the mass center are conserved (mixed windings, t <= 1)."""
    ctl = StepControl(t_end=t_end, rel_tol=1e-10, abs_tol=1e-12, sample_interval=0.05)
    drifts, mcs, collided = [], [], 0
    for i in range(samples):
        rng = sample_rng(seed, i)
        n = int(rng.integers(2, 7))
        w = random_windings(rng, n, lambda m0: True)
        if len(set(w)) == 1:
            w = (-w[0],) + w[1:]
        traj = integrate(VortexConfiguration(random_positions(rng, n), w), ctl)
        collided += traj.collided
        rep = analysis.invariant_report(traj)
        drifts.append(max(rep.h1.value, rep.h2.value, rep.h3.value))
        mcs.append(rep.mass_center.value)
    notes = {"collided": collided}
    return [
        _collect("first-integrals/H", drifts, 1e-6, notes=notes),
        _collect("first-integrals/mass-center", mcs, 1e-6),
    ]


def no_collision_same_sign(samples: int, seed: int, t_end: float = 10.0) -> list[PropertyResult]:
    """Equal windings never collide."""
    ctl = StepControl(t_end=t_end, sample_interval=t_end)
    hits = []
    for i in range(samples):
        rng = sample_rng(seed, i)
        n = int(rng.integers(2, 7))
        m = int(rng.choice([-1, 1]))
        traj = integrate(VortexConfiguration(random_positions(rng, n), (m,) * n), ctl)
        hits.append(0.0 if traj.terminal.kind == "reached_end" else 1.0)
    return [_collect("no-collision-same-sign", hits, 0.5)]


def _monotone(name, configs, t_end):
    ctl = StepControl(t_end=t_end, sample_interval=t_end / 200)
    drops = []
    for c in configs:
        traj = integrate(c, ctl)
        d = analysis.dmin_series(traj.positions)
        drops.append(max(float(np.max(d[:-1] - d[1:])), 0.0))
    return _collect(name, drops, 1e-10)


def dmin_monotone_n4(samples: int, seed: int, t_end: float = 2.0) -> list[PropertyResult]:
    """d_min never decreases for N <= 4 equal windings."""
    configs = []
    for i in range(samples):
        rng = sample_rng(seed, i)
        n = int(rng.integers(2, 5))
        configs.append(VortexConfiguration(random_positions(rng, n), (1,) * n))
    return [_monotone("dmin-monotone-N4", configs, t_end)]


def dmin_monotone_collinear(samples: int, seed: int, t_end: float = 2.0) -> list[PropertyResult]:
    """d_min never decreases for collinear equal windings, N <= 8."""
    configs = []
    for i in range(samples):
        rng = sample_rng(seed, i)
        n = int(rng.integers(2, 9))
        while True:
            a = np.sort(rng.uniform(-3, 3, n))
            if n == 1 or np.min(np.diff(a)) >= MIN_SEPARATION:
                break
        phi = rng.uniform(0, math.pi)
        base = rng.uniform(-1, 1, 2)
        x = base[None, :] + a[:, None] * np.array([math.cos(phi), math.sin(phi)])[None, :]
        configs.append(VortexConfiguration(x, (1,) * n))
    return [_monotone("dmin-monotone-collinear", configs, t_end)]


def collision_bound(samples: int, seed: int) -> list[PropertyResult]:
    """With M0 < 0 a collision happens no later than -H1/(4 N M0)."""
    excess = []
    for i in range(samples):
        rng = sample_rng(seed, i)
        n = int(rng.integers(2, 7))
        w = random_windings(rng, n, lambda m0: m0 < 0)
        c = VortexConfiguration(random_positions(rng, n), w)
        s = integral_set(c)
        bound = collision_upper_bound(s.h1, n, s.m0)
        traj = integrate(c, StepControl(t_end=bound + 1e-3, sample_interval=bound + 1e-3))
        excess.append(traj.terminal.t - bound if traj.collided else math.inf)
    return [_collect("collision-bound", excess, 1e-3)]


def bounded_m0_zero(samples: int, seed: int, t_end: float = 10.0) -> list[PropertyResult]:
    """With M0 = 0 every vortex stays within sqrt(H2) of the origin."""
    ctl = StepControl(t_end=t_end, sample_interval=0.05)
    excess, collided = [], 0
    for i in range(samples):
        rng = sample_rng(seed, i)
        w = [1, 1, 1, -1] if rng.random() < 0.5 else [-1, -1, -1, 1]
        rng.shuffle(w)
        c = VortexConfiguration(random_positions(rng, 4), tuple(w))
        h2 = integral_set(c).h2
        traj = integrate(c, ctl)
        collided += traj.collided
        radius = float(np.max(np.hypot(traj.positions[..., 0], traj.positions[..., 1])))
        excess.append(radius - math.sqrt(h2))
    return [_collect("bounded-M0-zero", excess, 1e-6, notes={"collided": collided})]


def mixed_triangle(samples: int, seed: int) -> list[PropertyResult]:
    """Three-vortex (+,-,+) collision patterns and times.

    Even samples are isoceles about the odd vortex (all three collide at
    the mass center at H1/12), odd samples are generic (the closer pair
    collides before H1/12).
    """
    iso_err, generic_bad = [], []
    for i in range(samples):
        rng = sample_rng(seed, i)
        if i % 2 == 0:
            apex = rng.uniform(-2, 2, 2)
            d = rng.uniform(0.5, 2.0)
            a = rng.uniform(0, 2 * math.pi)
            b = a + rng.uniform(0.3, math.pi) * rng.choice([-1, 1])
            x = np.array([apex + d * np.array([math.cos(a), math.sin(a)]), apex, apex + d * np.array([math.cos(b), math.sin(b)])])
            c = VortexConfiguration(x, (1, -1, 1))
            v = analysis.classify_three_vortex(c)
            t_bound = integral_set(c).h1 / 12
            loc_err = math.dist(v.location, x.mean(axis=0)) if v.location else math.inf
            ok = v.case == "AllThreeCollide"
            iso_err.append(max(abs(v.t_collision / t_bound - 1), loc_err * 1e-3) if ok else math.inf)
        else:
            while True:
                x = random_positions(rng, 3, min_sep=0.2)
                d01, d12 = math.dist(x[0], x[1]), math.dist(x[1], x[2])
                if abs(d01 - d12) > 1e-3 * max(d01, d12):
                    break
            c = VortexConfiguration(x, (1, -1, 1))
            v = analysis.classify_three_vortex(c)
            expected = (0, 1) if d01 < d12 else (1, 2)
            t_bound = integral_set(c).h1 / 12
            ok = v.case == "PairCollides" and v.pair == expected and v.t_collision < t_bound
            generic_bad.append(0.0 if ok else 1.0)
    return [
        _collect("mixed-triangle/isoceles", iso_err, 1e-3),
        _collect("mixed-triangle/generic", generic_bad, 0.5),
    ]


def near_equilateral(rng: np.random.Generator, max_psi: float = 0.05) -> VortexConfiguration:
    while True:
        ang = np.array([0.0, 2 * math.pi / 3, 4 * math.pi / 3]) + rng.uniform(-0.03, 0.03, 3) + rng.uniform(0, 2 * math.pi)
        r = rng.uniform(0.5, 2.0) * (1 + rng.uniform(-0.03, 0.03, 3))
        x = np.stack([r * np.cos(ang), r * np.sin(ang)], axis=1)
        x -= x.mean(axis=0)
        c = VortexConfiguration(x, (1, 1, 1))
        if phase_state(c, float(np.sum(x * x))).psi_norm <= max_psi:
            return c


def orbital_stability(samples: int, seed: int, s_end: float = 3.0) -> list[PropertyResult]:
    """|Psi(s)| e^s <= |Psi(0)| (1 + 1e-3) up to s_end, and d_S shrinks relative to the size."""
    ratios, dists = [], []
    for i in range(samples):
        rng = sample_rng(seed, i)
        c = near_equilateral(rng)
        h3 = float(np.sum(c.positions**2))
        t_end = h3 * (math.exp(4 * s_end) - 1) / 12
        traj = integrate(c, StepControl(t_end=t_end, sampling="log", sample_interval=1e-3 * h3, dt_max=t_end))
        p0 = phase_state(c, h3)
        worst = 0.0
        for x in traj.positions:
            p = phase_state(x, h3, order=p0.order)
            worst = max(worst, p.psi_norm * math.exp(p.s) / p0.psi_norm)
        ratios.append(worst - 1.0)
        x_end = traj.positions[-1]
        dists.append(analysis.orbital_distance(x_end) / math.sqrt(float(np.sum(x_end**2))))
    return [
        _collect("orbital-stability/psi-decay", ratios, 1e-3),
        _collect("orbital-stability/distance", dists, 1e-3),
    ]


def orbital_invariance(samples: int, seed: int) -> list[PropertyResult]:
    """orbital_distance is unchanged by rotation and scaling."""
    errs = []
    for i in range(samples):
        rng = sample_rng(seed, i)
        x = random_positions(rng, 3, min_sep=0.2)
        x -= x.mean(axis=0)
        base = analysis.orbital_distance(x)
        th, k = rng.uniform(0, 2 * math.pi), rng.uniform(0.2, 5.0)
        rot = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
        moved = analysis.orbital_distance(k * x @ rot.T) / k
        errs.append(abs(moved - base))
    return [_collect("orbital-invariance", errs, 1e-9)]


def ring_lift(samples: int, seed: int) -> list[PropertyResult]:
    """Full integration of lifted rings agrees with the reduced ODE.

    The grid property runs every variant for n = 2..6 from rho = (1, 4).
    The random property draws radii per sample; near the collapse of the
    odd-n opposite-sign variants the full system amplifies rounding-level
    asymmetry, so it can fail there.
    """
    grid = [ring_lift_error(RingSystem(n, v, 1.0, 4.0)) for v in RingVariant for n in range(2, 7)]
    variants = list(RingVariant)
    errs = []
    for i in range(samples):
        rng = sample_rng(seed, i)
        v = variants[i % len(variants)]
        n = 2 + (i // len(variants)) % 5
        a1 = rng.uniform(0.5, 1.5)
        a2 = a1 + rng.uniform(0.3, 1.5)
        errs.append(ring_lift_error(RingSystem.initial(n, v, a1, a2)))
    return [_collect("ring-lift/grid", grid, 1e-6), _collect("ring-lift/random-radii", errs, 1e-6)]


def ring_lift_error(sys: RingSystem, t_end: float = 1.0, collapse_fraction: float = 0.99) -> float:
    """Largest relative gap between reduced and lifted radii up to ``t_end``
    or ``collapse_fraction`` of the reduced collapse time."""
    probe = integrate_ring(sys, StepControl(t_end=t_end))
    t_stop = t_end if probe.terminal == "end" else collapse_fraction * probe.t_stop
    ctl = StepControl(t_end=t_stop, sample_interval=t_stop / 50)
    red = integrate_ring(sys, ctl)
    full = integrate(lift_ring(sys), ctl)
    if len(full.times) != len(red.times):
        return math.inf
    r1, r2 = ring_radii(full.positions, sys.n)
    e1 = np.abs(r1 - red.rho[:, [0]]) / red.rho[:, [0]]
    e2 = np.abs(r2 - red.rho[:, [1]]) / red.rho[:, [1]]
    return float(max(e1.max(), e2.max()))


def collinear_invariance(samples: int, seed: int, t_end: float = 10.0) -> list[PropertyResult]:
    """Collinear starts stay on their line (mixed windings, stopping at collisions)."""
    ctl = StepControl(t_end=t_end, sample_interval=0.1)
    offs = []
    for i in range(samples):
        rng = sample_rng(seed, i)
        n = int(rng.integers(2, 9))
        while True:
            a = np.sort(rng.uniform(-3, 3, n))
            if np.min(np.diff(a)) >= MIN_SEPARATION:
                break
        phi = rng.uniform(0, math.pi)
        u = np.array([math.cos(phi), math.sin(phi)])
        base = rng.uniform(-1, 1, 2)
        w = tuple(int(v) for v in rng.choice([-1, 1], size=n))
        traj = integrate(VortexConfiguration(base[None, :] + a[:, None] * u[None, :], w), ctl)
        normal = np.array([-u[1], u[0]])
        offs.append(float(np.max(np.abs((traj.positions - base) @ normal))))
    return [_collect("collinear-invariance", offs, 1e-8)]


def triangle_angles(samples: int, seed: int, t_end: float = 2.0) -> list[PropertyResult]:
    """Equal windings: the largest angle shrinks and the smallest grows.
    Windings (+,-,+): the angle derivatives keep their signs."""
    ctl = StepControl(t_end=t_end, sample_interval=t_end / 100)
    same, mixed = [], []
    for i in range(samples):
        rng = sample_rng(seed, i)
        x = random_positions(rng, 3, min_sep=0.2)
        traj = integrate(VortexConfiguration(x, (1, 1, 1)), ctl)
        th = []
        for y in traj.positions:
            st = triangle_state(y)
            th.append((st.theta1, st.theta2, st.theta3))
        th = np.array(th)
        hi, lo = th.max(axis=1), th.min(axis=1)
        same.append(max(float(np.max(hi[1:] - hi[:-1])), float(np.max(lo[:-1] - lo[1:])), 0.0))
        traj = integrate(VortexConfiguration(x, (1, -1, 1)), ctl)
        wrong = 0.0
        for y in traj.positions[:-1]:
            st = triangle_state(y)
            if st.area <= 0:
                continue
            d = triangle_rhs_mixed(st)
            wrong = max(wrong, float(d[3] >= 0), float(d[4] <= 0), float(d[5] >= 0))
        mixed.append(wrong)
    return [
        _collect("triangle-angles/same-sign", same, 1e-10),
        _collect("triangle-angles/mixed-signs", mixed, 0.5),
    ]


def scaling_covariance(samples: int, seed: int, t_end: float = 0.5) -> list[PropertyResult]:
    """Integrating alpha X0 to alpha^2 t reproduces alpha X(t)."""
    errs = []
    for i in range(samples):
        rng = sample_rng(seed, i)
        n = int(rng.integers(2, 6))
        x = random_positions(rng, n)
        w = tuple(int(v) for v in rng.choice([-1, 1], size=n))
        k = rng.uniform(0.5, 2.0)
        grid = np.linspace(0.0, t_end, 11)[1:]
        base = integrate(VortexConfiguration(x, w), StepControl(t_end=t_end), sample_times=grid)
        t_stop = base.terminal.t
        keep = min(len(base.times), int(np.searchsorted(base.times, 0.9 * t_stop, side="right")))
        scaled = integrate(
            VortexConfiguration(k * x, w), StepControl(t_end=k * k * t_end), sample_times=k * k * grid
        )
        m = min(keep, len(scaled.times))
        errs.append(float(np.max(np.abs(scaled.positions[:m] / k - base.positions[:m]))))
    return [_collect("scaling-covariance", errs, 1e-6)]


def equilibrium(samples: int, seed: int) -> list[PropertyResult]:
    """The four-vortex equilibrium is stationary at any scale and rotation."""
    vals = []
    for i in range(samples):
        rng = sample_rng(seed, i)
        c = build_equilibrium_n4(rng.uniform(0.1, 10.0), rng.uniform(0, 2 * math.pi))
        vals.append(float(np.max(np.abs(velocity_field(c)))) * np.linalg.norm(c.positions[0]))
    return [_collect("equilibrium", vals, 1e-12)]


SUITES: dict[str, Callable[[int, int], list[PropertyResult]]] = {
    "gradient-identity": gradient_identity,
    "first-integrals": first_integrals,
    "no-collision-same-sign": no_collision_same_sign,
    "dmin-monotone-N4": dmin_monotone_n4,
    "dmin-monotone-collinear": dmin_monotone_collinear,
    "collision-bound": collision_bound,
    "bounded-M0-zero": bounded_m0_zero,
    "mixed-triangle": mixed_triangle,
    "orbital-stability": orbital_stability,
    "orbital-invariance": orbital_invariance,
    "ring-lift": ring_lift,
    "collinear-invariance": collinear_invariance,
    "triangle-angles": triangle_angles,
    "scaling-covariance": scaling_covariance,
    "equilibrium": equilibrium,
}


def run_suite(name: str, samples: int, seed: int) -> list[PropertyResult]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; known: {', '.join(sorted(SUITES))}")
    if samples < 1:
        raise ValueError("samples must be at least 1")
    return SUITES[name](samples, seed)
