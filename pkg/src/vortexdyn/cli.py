"""Command line front end: ``vortexdyn {simulate,oracle,figures,verify,slopes}``.

Scenario files are JSON documents::

    {
      "vortices": [{"x": 1.0, "y": 0.0, "m": 1}, ...],     # or "generator"
      "generator": {"kind": "polygon", "n": 4, "r0": 1.0, "theta0": 0.0, "m": 1},
      "integrator": {"t_end": 1.5, "sample_interval": 0.1},
      "outputs": {"trajectory": "trajectory.csv", "events": "events.json"}
    }

Exactly one of ``vortices`` and ``generator`` must be present. Generator
parameters have no defaults; integrator fields default to
:class:`~vortexdyn.stepper.StepControl`.

Exit codes: 0 finished (a detected collision counts as finished), 1 a
verification property failed, 2 bad input, 3 numerical failure (step
floor or step budget reached).
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import analysis
from .analytic import (
    FAMILY_VARIANTS,
    RING_N2_VARIANTS,
    ClosedFormSolution,
    NoSlopeRoot,
    pair_dipole_solution,
    polygon_configuration,
    polygon_solution,
    ring_n2_closed_form,
    solve_asymptotic_slopes,
)
from .core import DegenerateConfigurationError, VortexConfiguration, integral_set
from .integrator import Trajectory, integrate
from .reduced import RingSystem, RingVariant, integrate_ring, lift_ring, ring_radii
from .stepper import StepControl
from .suites import SUITES, run_suite

EXIT_OK = 0
EXIT_PROPERTY_FAILED = 1
EXIT_SPEC_ERROR = 2
EXIT_NUMERICAL = 3

GENERATOR_PARAMS = {
    "polygon": ("n", "r0", "theta0", "m"),
    "collinear": ("offsets", "windings"),
    "two_rings": ("n", "variant", "a1", "a2", "theta0"),
    "two_rings_center": ("n", "variant", "a1", "a2", "theta0"),
    "three_vortex": ("d12", "d23", "angle", "windings"),
}
DEFAULT_OUTPUTS = {"trajectory": "trajectory.csv", "events": "events.json", "report": "oracle.json"}

FIGURE_VARIANTS = {
    2: RingVariant.ALIGNED_SAME,
    3: RingVariant.STAGGERED_OPPOSITE,
    4: RingVariant.CENTER_ALIGNED_OPPOSITE_CENTER,
    5: RingVariant.CENTER_STAGGERED_OPPOSITE_RING,
}
FIGURE_RHO0 = (1.0, 4.0)


class SpecError(ValueError):
    """The scenario document is malformed or describes an invalid configuration."""


# ------------------------------------------------------------------ scenario


@dataclass(frozen=True)
class ScenarioSpec:
    vortices: tuple[tuple[float, float, int], ...] | None = None
    generator: dict | None = None
    integrator: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out: dict = {}
        if self.vortices is not None:
            out["vortices"] = [{"x": x, "y": y, "m": m} for x, y, m in self.vortices]
        if self.generator is not None:
            out["generator"] = dict(self.generator)
        out["integrator"] = dict(self.integrator)
        out["outputs"] = dict(self.outputs)
        return out

    def control(self) -> StepControl:
        return StepControl(**self.integrator)

    def output_name(self, key: str) -> str:
        return self.outputs.get(key, DEFAULT_OUTPUTS[key])


def _number(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise SpecError(f"{name} must be a finite number, got {value!r}")
    return float(value)


def _integer(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SpecError(f"{name} must be an integer, got {value!r}")
    return value


def _winding(value, name: str) -> int:
    if _integer(value, name) not in (1, -1):
        raise SpecError(f"{name} must be +1 or -1, got {value!r}")
    return value


def _parse_generator(gen) -> dict:
    if not isinstance(gen, dict):
        raise SpecError("generator must be an object")
    kind = gen.get("kind")
    if kind not in GENERATOR_PARAMS:
        raise SpecError(f"generator kind must be one of {sorted(GENERATOR_PARAMS)}, got {kind!r}")
    required = GENERATOR_PARAMS[kind]
    missing = [k for k in required if k not in gen]
    if missing:
        raise SpecError(f"generator {kind} is missing {', '.join(missing)}")
    extra = sorted(set(gen) - set(required) - {"kind"})
    if extra:
        raise SpecError(f"generator {kind} does not take {', '.join(extra)}")
    out: dict = {"kind": kind}
    for key in required:
        v = gen[key]
        if key == "n":
            out[key] = _integer(v, key)
        elif key == "m":
            out[key] = _winding(v, key)
        elif key == "variant":
            try:
                variant = RingVariant(v)
            except ValueError:
                raise SpecError(f"unknown ring variant {v!r}") from None
            if variant.has_center != (kind == "two_rings_center"):
                raise SpecError(f"variant {v!r} does not fit generator {kind}")
            out[key] = variant.value
        elif key == "offsets":
            if not isinstance(v, list):
                raise SpecError("offsets must be a list")
            out[key] = [_number(a, "offsets[]") for a in v]
        elif key == "windings":
            if not isinstance(v, list):
                raise SpecError("windings must be a list")
            out[key] = [_winding(a, "windings[]") for a in v]
        else:
            out[key] = _number(v, key)
    return out


def parse_spec(doc) -> ScenarioSpec:
    """Validate a decoded JSON document."""
    if not isinstance(doc, dict):
        raise SpecError("scenario must be a JSON object")
    extra = sorted(set(doc) - {"vortices", "generator", "integrator", "outputs"})
    if extra:
        raise SpecError(f"unknown top-level keys: {', '.join(extra)}")
    if ("vortices" in doc) == ("generator" in doc):
        raise SpecError("exactly one of 'vortices' and 'generator' is required")
    vortices = generator = None
    if "vortices" in doc:
        if not isinstance(doc["vortices"], list):
            raise SpecError("vortices must be a list")
        vs = []
        for k, v in enumerate(doc["vortices"]):
            if not isinstance(v, dict) or set(v) != {"x", "y", "m"}:
                raise SpecError(f"vortex {k} must have exactly the keys x, y, m")
            vs.append((_number(v["x"], f"vortex {k} x"), _number(v["y"], f"vortex {k} y"), _winding(v["m"], f"vortex {k} m")))
        vortices = tuple(vs)
    else:
        generator = _parse_generator(doc["generator"])

    integ = doc.get("integrator", {})
    if not isinstance(integ, dict):
        raise SpecError("integrator must be an object")
    known = {f.name for f in fields(StepControl)}
    unknown = sorted(set(integ) - known)
    if unknown:
        raise SpecError(f"unknown integrator fields: {', '.join(unknown)}")
    try:
        StepControl(**integ)
    except (TypeError, ValueError) as exc:
        raise SpecError(f"integrator: {exc}") from None

    outputs = doc.get("outputs", {})
    if not isinstance(outputs, dict) or not all(isinstance(v, str) for v in outputs.values()):
        raise SpecError("outputs must map names to file names")
    bad = sorted(set(outputs) - set(DEFAULT_OUTPUTS))
    if bad:
        raise SpecError(f"unknown outputs: {', '.join(bad)}")
    return ScenarioSpec(vortices, generator, dict(integ), dict(outputs))


def load_spec(path) -> ScenarioSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path} is not valid JSON: {exc}") from None
    return parse_spec(doc)


def _three_vortex_positions(d12: float, d23: float, angle: float) -> np.ndarray:
    # vortex 2 at the corner on the y axis, ``angle`` is the interior angle there;
    # equal sides give an exactly mirror-symmetric start
    s, c = math.sin(0.5 * angle), math.cos(0.5 * angle)
    x = np.array([[-d12 * s, -d12 * c], [0.0, 0.0], [d23 * s, -d23 * c]])
    return x - x.mean(axis=0)


def ring_system_of(spec: ScenarioSpec) -> RingSystem | None:
    g = spec.generator
    if g is None or not g["kind"].startswith("two_rings"):
        return None
    try:
        return RingSystem.initial(g["n"], g["variant"], g["a1"], g["a2"])
    except ValueError as exc:
        raise SpecError(f"generator {g['kind']}: {exc}") from None


def build_configuration(spec: ScenarioSpec) -> VortexConfiguration:
    """The initial configuration; raises :class:`SpecError` when invalid."""
    try:
        if spec.vortices is not None:
            x = [(v[0], v[1]) for v in spec.vortices]
            return VortexConfiguration(x, [v[2] for v in spec.vortices])
        g = spec.generator
        kind = g["kind"]
        if kind == "polygon":
            return polygon_configuration(g["n"], g["r0"], g["theta0"], m=g["m"])
        if kind == "collinear":
            a = np.asarray(g["offsets"])
            return VortexConfiguration(np.stack([a, np.zeros_like(a)], axis=1), g["windings"])
        if kind == "three_vortex":
            if len(g["windings"]) != 3:
                raise SpecError("three_vortex needs three windings")
            if not (g["d12"] > 0 and g["d23"] > 0):
                raise SpecError("three_vortex side lengths must be positive")
            return VortexConfiguration(_three_vortex_positions(g["d12"], g["d23"], g["angle"]), g["windings"])
        return lift_ring(ring_system_of(spec), g["theta0"])
    except DegenerateConfigurationError as exc:
        raise SpecError(f"invalid configuration: {exc}") from None
    except SpecError:
        raise
    except ValueError as exc:
        raise SpecError(f"invalid configuration: {exc}") from None


# ------------------------------------------------------------------- output


def _g17(v: float) -> str:
    return format(float(v), ".17g")


def write_trajectory_csv(path: Path, traj: Trajectory) -> None:
    n = traj.positions.shape[1]
    header = ["t"] + [f"{c}_{j}" for j in range(n) for c in ("x", "y")]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for t, x in zip(traj.times, traj.positions):
            w.writerow([_g17(t)] + [_g17(v) for v in x.ravel()])


def write_json(path: Path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")


def _err(msg: str) -> None:
    print(f"vortexdyn: {msg}", file=sys.stderr)


# ----------------------------------------------------------------- commands


def cmd_simulate(spec_path, out_dir) -> int:
    try:
        spec = load_spec(spec_path)
        config = build_configuration(spec)
    except SpecError as exc:
        _err(str(exc))
        return EXIT_SPEC_ERROR
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    control = spec.control()
    traj = integrate(config, control)
    write_trajectory_csv(out / spec.output_name("trajectory"), traj)
    s0 = integral_set(config)
    events = {
        "windings": list(config.windings),
        "n": config.n,
        "control": control.to_dict(),
        "initial_integrals": s0.to_dict(),
        "terminal": traj.terminal.to_dict(),
        "steps": traj.steps,
        "invariants": analysis.invariant_report(traj).to_dict(),
    }
    write_json(out / spec.output_name("events"), events)
    if traj.terminal.kind in ("step_floor", "step_budget"):
        _err(f"integration stopped early ({traj.terminal.kind}) at t={traj.terminal.t!r}")
        return EXIT_NUMERICAL
    return EXIT_OK


def oracle_for(spec: ScenarioSpec, config: VortexConfiguration) -> ClosedFormSolution:
    """The closed form matching a scenario, or :class:`SpecError`."""
    if config.n == 2:
        same = config.windings[0] == config.windings[1]
        return pair_dipole_solution(config.positions[0], config.positions[1], same)
    g = spec.generator
    if g is not None and g["kind"] == "polygon":
        return polygon_solution(g["n"], g["r0"], g["theta0"])
    if g is not None and g["kind"].startswith("two_rings"):
        variant = RingVariant(g["variant"])
        if g["n"] == 2 and variant in RING_N2_VARIANTS:
            return ring_n2_closed_form(variant, g["a1"], g["a2"])
    raise SpecError("no closed-form oracle for this scenario")


def compare_with_oracle(traj: Trajectory, sol: ClosedFormSolution, n_ring: int | None = None) -> dict:
    """Largest relative deviation per component on ``[0, 0.99 * horizon]``."""
    limit = math.inf if sol.horizon is None else 0.99 * sol.horizon
    keep = traj.times <= limit
    times, pos = traj.times[keep], traj.positions[keep]
    if sol.kind.value == "ring_n2":
        r1, r2 = ring_radii(pos, n_ring)
        exact = np.array([sol.rho(t) for t in times])
        comps = {
            "rho1": float(np.max(np.abs(r1 - exact[:, [0]]) / exact[:, [0]])),
            "rho2": float(np.max(np.abs(r2 - exact[:, [1]]) / exact[:, [1]])),
        }
    else:
        radii = np.array([sol.radius(t) for t in times])
        exact = np.array([sol.state(t) for t in times])
        if sol.kind.value == "polygon":
            center = np.asarray(sol.parameters["center"])
        else:
            center = np.asarray(sol.parameters["midpoint"])
        r_num = np.hypot(*(pos - center).transpose(2, 0, 1))
        comps = {
            "radius": float(np.max(np.abs(r_num - radii[:, None]) / radii[:, None])),
            "positions": float(np.max(np.hypot(*(pos - exact).transpose(2, 0, 1)) / radii[:, None])),
        }
    return {"samples": int(times.size), "t_max": float(times[-1]), "max_relative_deviation": comps}


def cmd_oracle(spec_path, out_dir) -> int:
    try:
        spec = load_spec(spec_path)
        config = build_configuration(spec)
        sol = oracle_for(spec, config)
    except SpecError as exc:
        _err(str(exc))
        return EXIT_SPEC_ERROR
    control = spec.control()
    traj = integrate(config, control)
    ring = ring_system_of(spec)
    report = {
        "oracle": sol.kind.value,
        "variant": sol.variant.value if sol.variant is not None else None,
        "horizon": sol.horizon,
        "terminal": traj.terminal.to_dict(),
        **compare_with_oracle(traj, sol, ring.n if ring is not None else None),
    }
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / spec.output_name("report"), report)
    for name, value in report["max_relative_deviation"].items():
        print(f"{name}: {value:.3e}")
    if traj.terminal.kind in ("step_floor", "step_budget"):
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_figures(figure: int, out_dir, t_end: float = 2.0, sample_interval: float = 0.01) -> int:
    if figure not in FIGURE_VARIANTS:
        _err(f"figure must be one of {sorted(FIGURE_VARIANTS)}")
        return EXIT_SPEC_ERROR
    variant = FIGURE_VARIANTS[figure]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = {"figure": figure, "variant": variant.value, "rho0": list(FIGURE_RHO0), "runs": []}
    control = StepControl(t_end=t_end, sample_interval=sample_interval)
    for n in (2, 3, 4, 5):
        sys_ = RingSystem(n, variant, *FIGURE_RHO0)
        traj = integrate_ring(sys_, control)
        name = f"figure{figure}_n{n}.csv"
        with open(out / name, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "rho1", "rho2"])
            for t, (r1, r2) in zip(traj.times, traj.rho):
                w.writerow([_g17(t), _g17(r1), _g17(r2)])
        summary["runs"].append({"n": n, "file": name, "terminal": traj.terminal, "t_stop": traj.t_stop})
    write_json(out / f"figure{figure}.json", summary)
    return EXIT_OK


def cmd_verify(suite: str, samples: int, seed: int, out_dir=None) -> int:
    names = sorted(SUITES) if suite == "all" else [suite]
    if any(s not in SUITES for s in names):
        _err(f"unknown suite {suite!r}; known: all, {', '.join(sorted(SUITES))}")
        return EXIT_SPEC_ERROR
    if samples < 1:
        _err("samples must be at least 1")
        return EXIT_SPEC_ERROR
    results = []
    for name in names:
        results.extend(run_suite(name, samples, seed))
    for r in results:
        print(r.line())
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "verify.json", {"suite": suite, "samples": samples, "seed": seed, "properties": [r.to_dict() for r in results]})
    return EXIT_OK if all(r.passed for r in results) else EXIT_PROPERTY_FAILED


def cmd_slopes(n_values, families) -> int:
    print(f"{'n':>3} {'family':>6} {'variant':<34} {'alpha':>20} {'beta':>20} {'residual':>10}  note")
    for n in n_values:
        for fam in families:
            try:
                p = solve_asymptotic_slopes(n, fam)
            except NoSlopeRoot as exc:
                if exc.boundary is None:
                    print(f"{n:>3} {fam:>6} {FAMILY_VARIANTS[fam].value:<34} {'-':>20} {'-':>20} {'-':>10}  no root")
                    continue
                p = exc.boundary
            note = f"no interior root, boundary {p.degenerate}" if p.degenerate else ""
            print(f"{n:>3} {fam:>6} {p.variant.value:<34} {p.alpha:>20.14g} {p.beta:>20.14g} {p.residual:>10.2e}  {note}")
    return EXIT_OK


# ------------------------------------------------------------------- parser


def _int_range(text: str) -> list[int]:
    try:
        if "-" in text:
            lo, hi = (int(v) for v in text.split("-", 1))
            return list(range(lo, hi + 1))
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'a-b' or 'a,b,c', got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vortexdyn", description="Simulate and verify quantized vortex dynamics.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="integrate a scenario, write trajectory CSV and events JSON")
    s.add_argument("--spec", required=True)
    s.add_argument("--out", required=True)

    s = sub.add_parser("oracle", help="compare a scenario against its closed-form solution")
    s.add_argument("--spec", required=True)
    s.add_argument("--out", required=True)

    s = sub.add_parser("figures", help="write ring-radius data for figures 2-5")
    s.add_argument("--figure", type=int, required=True, choices=sorted(FIGURE_VARIANTS))
    s.add_argument("--out", required=True)
    s.add_argument("--t-end", type=float, default=2.0)
    s.add_argument("--sample-interval", type=float, default=0.01)

    s = sub.add_parser("verify", help="run a seeded property suite")
    s.add_argument("--suite", required=True, help=f"all or one of: {', '.join(sorted(SUITES))}")
    s.add_argument("--samples", type=int, default=50)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default=None)

    s = sub.add_parser("slopes", help="tabulate asymptotic slope pairs")
    s.add_argument("--n", type=_int_range, default=_int_range("3-8"), help="e.g. 3-8 or 3,5,7")
    s.add_argument("--families", type=_int_range, default=_int_range("1-6"))
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "simulate":
        return cmd_simulate(args.spec, args.out)
    if args.command == "oracle":
        return cmd_oracle(args.spec, args.out)
    if args.command == "figures":
        return cmd_figures(args.figure, args.out, args.t_end, args.sample_interval)
    if args.command == "verify":
        return cmd_verify(args.suite, args.samples, args.seed, args.out)
    if any(f not in FAMILY_VARIANTS for f in args.families):
        _err(f"families must be among {sorted(FAMILY_VARIANTS)}")
        return EXIT_SPEC_ERROR
    return cmd_slopes(args.n, args.families)


if __name__ == "__main__":
    sys.exit(main())
