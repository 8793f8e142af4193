"""Scenario-driven command line front end.

Every invocation is reduced to a scenario dictionary (from ``--config``
JSON files and/or flags), validated against a strict schema, normalized
with defaults and dispatched. Artifacts go to ``<out>/<name>/``; the output
root is ``--out``, else ``$METRICLAG_OUT``, else the scenario's
``output.directory``, else ``./metriclag_out``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import copy
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
from jsonschema import Draft202012Validator

from . import expr as ex
from .artifacts import emit_plot, write_csv
from .deform_ops import (
    DeformationParams,
    Func1D,
    conformable_deriv,
    hausdorff_deriv,
    katugampola_deriv,
)
from .errors import (
    ConvergenceError,
    DomainError,
    EvaluationError,
    ExprSyntaxError,
    GridError,
    IntegrationError,
    ParameterError,
    RangeError,
    UnknownIdentifierError,
    ValidationError,
)
from .lagrangian import FieldLagrangian, FieldVariant, MechLagrangian, Option

__all__ = ["main", "run", "normalize", "serialize", "validate", "run_scenario", "SCHEMA"]

TASKS = ("derive", "newton", "schrodinger", "action_min", "hamilton", "noether_check", "props")
KINDS = ("classical", "conformable", "hausdorff", "katugampola", "q_deriv", "scale_q")

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_int_pos = {"type": "integer", "minimum": 1}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["task"],
    "properties": {
        "name": {"type": "string", "minLength": 1, "pattern": r"^[A-Za-z0-9_.-]+$"},
        "task": {"enum": list(TASKS)},
        "seed": {"type": "integer", "minimum": 0},
        "potential": {"type": "string", "minLength": 1},
        "option": {"enum": [1, 2, 3, "opt1", "opt2", "opt3"]},
        "deformation": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": list(KINDS)},
                "alpha": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "zeta": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "l0_meters": _pos,
                "q": _num,
                "lambda": _num,
                "normalization": {"enum": ["cutoff", "conformable_map"]},
            },
        },
        "physics": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mass_kg": _pos,
                "hbar_joule_seconds": _pos,
                "stiffness_newton_per_meter": _pos,
            },
        },
        "controls": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                # derive
                "expr": {"type": "string", "minLength": 1},
                "at": _num,
                "mode": {"enum": ["kernel", "limit"]},
                # mechanics
                "t0_seconds": _num,
                "t1_seconds": _num,
                "x0_meters": _num,
                "v0_meters_per_second": _num,
                "v0_kind": {"enum": ["deformed", "ordinary"]},
                "p0_kg_meters_per_second": _num,
                "tol": _pos,
                "points": {"type": "integer", "minimum": 2},
                "shifted": {"type": "boolean"},
                # action
                "x_start_meters": _num,
                "x_end_meters": _num,
                "nodes": {"type": "integer", "minimum": 16},
                "starts": _int_pos,
                "gtol": _pos,
                # schrodinger / noether
                "variant": {"enum": [v.value for v in FieldVariant]},
                "x_min_meters": _num,
                "x_max_meters": _num,
                "grid_points": {"type": "integer", "minimum": 64},
                "steps": {"type": "integer", "minimum": 8},
                "packet_x0_meters": _num,
                "packet_sigma_meters": _pos,
                "packet_k0_per_meter": _num,
                "method": {"enum": ["cn", "spectral"]},
                "form": {"enum": ["full", "linearized"]},
                "power": {"enum": ["derived", "printed"]},
                "boundary": {"enum": ["dirichlet", "periodic"]},
                # props
                "cases": _int_pos,
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "directory": {"type": "string", "minLength": 1},
                "plot": {"type": "boolean"},
                "snapshot_stride": _int_pos,
            },
        },
    },
}

TASK_CONTROLS = {
    "derive": {"mode": "kernel"},
    "newton": {
        "t0_seconds": 0.0,
        "t1_seconds": 1.0,
        "x0_meters": 0.0,
        "v0_meters_per_second": 1.0,
        "v0_kind": "deformed",
        "tol": 1e-10,
        "points": 201,
        "shifted": False,
    },
    "action_min": {
        "t0_seconds": 0.0,
        "t1_seconds": 1.0,
        "x_start_meters": 0.0,
        "x_end_meters": 1.0,
        "nodes": 200,
        "starts": 1,
        "gtol": 1e-9,
    },
    "hamilton": {
        "t0_seconds": 0.0,
        "t1_seconds": 1.0,
        "x0_meters": 0.0,
        "p0_kg_meters_per_second": 1.0,
        "tol": 1e-12,
        "points": 201,
    },
    "schrodinger": {
        "variant": "time_deformed",
        "x_min_meters": -10.0,
        "x_max_meters": 10.0,
        "grid_points": 257,
        "t0_seconds": 0.0,
        "t1_seconds": 1.0,
        "steps": 200,
        "packet_x0_meters": 0.0,
        "packet_sigma_meters": 1.0,
        "packet_k0_per_meter": 0.0,
        "method": "cn",
        "form": "full",
        "power": "derived",
        "boundary": "dirichlet",
    },
    "props": {},
}
TASK_CONTROLS["noether_check"] = dict(TASK_CONTROLS["schrodinger"])
TASK_REQUIRED = {"derive": ("expr", "at")}

DEFAULT_DEFORMATION = {"kind": "classical", "normalization": "cutoff"}
DEFAULT_PHYSICS = {"mass_kg": 1.0, "hbar_joule_seconds": 1.0, "stiffness_newton_per_meter": 1.0}
DEFAULT_OUTPUT = {"plot": False, "snapshot_stride": 1}

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3
_INVALID = (ValidationError, ParameterError, DomainError, GridError, RangeError, ExprSyntaxError, UnknownIdentifierError)
_NUMERIC = (IntegrationError, ConvergenceError, EvaluationError, FloatingPointError, np.linalg.LinAlgError)


# --------------------------------------------------------------------------
# config handling


def validate(cfg) -> None:
    """Raise :class:`ValidationError` listing every schema violation."""
    problems = []
    for err in sorted(Draft202012Validator(SCHEMA).iter_errors(cfg), key=lambda e: list(map(str, e.absolute_path))):
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        problems.append(f"{where}: {err.message}")
    if problems:
        raise ValidationError(problems)


def normalize(cfg: dict) -> dict:
    """Validate and fill defaults; the result is a fixed point of normalize."""
    validate(cfg)
    cfg = copy.deepcopy(cfg)
    task = cfg["task"]
    out = {
        "name": cfg.get("name", task),
        "task": task,
        "seed": cfg.get("seed", 0),
        "potential": cfg.get("potential", "0"),
        "option": Option.coerce(cfg.get("option", 1)).value,
        "deformation": {**DEFAULT_DEFORMATION, **cfg.get("deformation", {})},
        "physics": {**DEFAULT_PHYSICS, **cfg.get("physics", {})},
        "controls": {**TASK_CONTROLS[task], **cfg.get("controls", {})},
        "output": {**DEFAULT_OUTPUT, **cfg.get("output", {})},
    }
    d = out["deformation"]
    if "kind" not in cfg.get("deformation", {}):
        for key, kind in (("alpha", "conformable"), ("zeta", "hausdorff"), ("lambda", "scale_q"), ("q", "q_deriv")):
            if key in d:
                d["kind"] = kind
                break
    problems = [f"controls: '{k}' is required for task {task}" for k in TASK_REQUIRED.get(task, ()) if k not in out["controls"]]
    if problems:
        raise ValidationError(problems)
    validate(out)
    return out


def serialize(cfg: dict) -> str:
    return json.dumps(cfg, sort_keys=True, indent=2) + "\n"


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as err:
        raise ValidationError([f"config file not found: {path}"]) from err
    except json.JSONDecodeError as err:
        raise ValidationError([f"{path}: invalid JSON at line {err.lineno} column {err.colno}: {err.msg}"]) from err


def build_deformation(sec: dict) -> DeformationParams:
    kind = sec.get("kind", "classical")
    if kind == "classical":
        return DeformationParams.classical()
    if kind in ("conformable", "katugampola"):
        if "alpha" not in sec:
            raise ValidationError([f"deformation: '{kind}' needs alpha"])
        return getattr(DeformationParams, kind)(sec["alpha"])
    if kind == "hausdorff":
        if "zeta" not in sec:
            raise ValidationError(["deformation: 'hausdorff' needs zeta"])
        return DeformationParams.hausdorff(sec["zeta"], sec.get("l0_meters", 1.0), sec.get("normalization", "cutoff"))
    if "q" not in sec:
        raise ValidationError([f"deformation: '{kind}' needs q"])
    if kind == "q_deriv":
        return DeformationParams.q_deriv(sec["q"], sec.get("l0_meters", 1.0))
    return DeformationParams.scale_q(sec["q"], sec.get("lambda", 1.0))


def _mech(cfg: dict) -> MechLagrangian:
    ph = cfg["physics"]
    return MechLagrangian(
        ph["mass_kg"],
        cfg["potential"],
        build_deformation(cfg["deformation"]),
        cfg["option"],
        {"k": ph["stiffness_newton_per_meter"]},
    )


def _field(cfg: dict) -> FieldLagrangian:
    ph = cfg["physics"]
    return FieldLagrangian(
        cfg["controls"]["variant"],
        ph["mass_kg"],
        cfg["potential"],
        ph["hbar_joule_seconds"],
        build_deformation(cfg["deformation"]),
        {"k": ph["stiffness_newton_per_meter"]},
    )


def _out_dir(cfg: dict, out_root: str | None) -> Path:
    root = out_root or os.environ.get("METRICLAG_OUT") or cfg["output"].get("directory") or "metriclag_out"
    return Path(root) / cfg["name"]


def _fmt(v: float) -> str:
    return f"{v:.6g}"


# --------------------------------------------------------------------------
# tasks


def _task_derive(cfg, outdir):
    c = cfg["controls"]
    d = build_deformation(cfg["deformation"])
    e = ex.parse(c["expr"])
    var = (ex.free_vars(e) or {"t"}).pop() if len(ex.free_vars(e)) <= 1 else None
    if var is None:
        raise ValidationError([f"controls/expr: expected one variable, got {sorted(ex.free_vars(e))}"])
    de = ex.diff(e, var)
    f = Func1D(ex.to_callable(e, var), ex.to_callable(de, var)) if c["mode"] == "kernel" else Func1D(ex.to_callable(e, var))
    at, mode, k = float(c["at"]), c["mode"], d.kind.value
    if k == "classical":
        val = f.deriv(at)
    elif k == "conformable":
        val = conformable_deriv(f, at, d.alpha, mode)
    elif k == "katugampola":
        val = katugampola_deriv(f, at, d.alpha, mode)
    elif k == "hausdorff":
        val = hausdorff_deriv(f, at, d.zeta, d.l0, mode, d.normalization)
    elif k == "q_deriv":
        from .q_algebra import q_deriv

        val = d.l0 * q_deriv(f, at, d.q, mode)
    else:
        from .q_algebra import scale_q_deriv

        val = scale_q_deriv(f, at, d.q, d.lam)
    write_csv(outdir / "derive.csv", [("expr", "at", "kind", "value"), (c["expr"], at, k, float(val))])
    return repr(float(val))


def _task_newton(cfg, outdir):
    from .dynamics import solve_newton, solve_newton_opt12

    c = cfg["controls"]
    L = _mech(cfg)
    t_eval = np.linspace(c["t0_seconds"], c["t1_seconds"], c["points"])
    if c["shifted"]:
        t_eval = t_eval - c["t0_seconds"]
    args = (L, c["x0_meters"], c["v0_meters_per_second"], c["t0_seconds"], c["t1_seconds"], c["tol"])
    if L.option is not Option.OPT3 and not c["shifted"]:
        tr = solve_newton_opt12(*args, t_eval=t_eval, v0_kind=c["v0_kind"])
    else:
        tr = solve_newton(*args, t_eval=t_eval, shifted=c["shifted"])
    v = tr.velocity()
    cols = tr.columns
    nan = np.full(len(tr), np.nan)
    fi = cols.get("first_integral", nan)
    res = cols.get("el_residual", nan)
    rows = [("t", "x", "v", "first_integral", "el_residual")] + list(zip(tr.t, tr.x, v, fi, res))
    write_csv(outdir / "trajectory.csv", rows)
    if cfg["output"]["plot"]:
        emit_plot([("x", tr.t, tr.x), ("v", tr.t, v)], outdir / "trajectory.svg", cfg["name"], "t", "x, v")
    rmax = float(np.nanmax(np.abs(res))) if np.any(np.isfinite(res)) else float("nan")
    return f"newton {cfg['name']}: x(t1)={_fmt(tr.x[-1])} v(t1)={_fmt(v[-1])} max|el_residual|={rmax:.3e}"


def _task_action(cfg, outdir):
    from .action import ActionProblem, minimize_action

    c = cfg["controls"]
    L = _mech(cfg)
    pb = ActionProblem(L, c["t0_seconds"], c["t1_seconds"], c["x_start_meters"], c["x_end_meters"], c["nodes"])
    res = minimize_action(pb, gtol=c["gtol"], starts=c["starts"], seed=cfg["seed"])
    tr = res.trajectory
    write_csv(outdir / "trajectory.csv", [("t", "x", "clock")] + list(zip(tr.t, tr.x, tr.columns["clock"])))
    write_csv(outdir / "convergence.csv", res.report.rows())
    if cfg["output"]["plot"]:
        emit_plot([("x", tr.t, tr.x)], outdir / "trajectory.svg", cfg["name"], "t", "x")
    line = (
        f"action_min {cfg['name']}: J={res.action:.12g} |grad|={res.report.grad_norm:.3e} "
        f"iterations={res.report.iterations} monotone={res.report.monotone}"
    )
    if not res.report.converged:
        raise ConvergenceError(line + " (not converged)")
    return line


def _task_hamilton(cfg, outdir):
    from .hamiltonian import PhaseState, integrate_hamilton

    c = cfg["controls"]
    L = _mech(cfg)
    t_eval = np.linspace(c["t0_seconds"], c["t1_seconds"], c["points"])
    st = PhaseState(c["t0_seconds"], c["x0_meters"], c["p0_kg_meters_per_second"])
    tr = integrate_hamilton(L.option, L, st, c["t1_seconds"], c["tol"], t_eval)
    write_csv(outdir / "phase.csv", tr.rows())
    if cfg["output"]["plot"]:
        emit_plot([("orbit", tr.q, tr.p)], outdir / "phase.svg", cfg["name"], "q", "p")
    drift = float(np.max(np.abs(tr.H - tr.H[0])))
    return f"hamilton {cfg['name']}: q(t1)={_fmt(tr.q[-1])} p(t1)={_fmt(tr.p[-1])} H drift={drift:.3e}"


def _initial_wave(cfg, L: FieldLagrangian):
    from .schrodinger import WaveFunction, gaussian

    c = cfg["controls"]
    periodic = c["boundary"] == "periodic"
    x = np.linspace(c["x_min_meters"], c["x_max_meters"], c["grid_points"], endpoint=not periodic)
    psi = gaussian(x, c["packet_x0_meters"], c["packet_sigma_meters"], c["packet_k0_per_meter"])
    if L.variant is FieldVariant.SPATIAL_DEFORMED:
        wf = WaveFunction.on_grid(x, psi, L.deform)
    else:
        wf = WaveFunction(x, psi, boundary=c["boundary"])
    return wf.normalized()


def _evolve(cfg):
    from . import schrodinger as sc

    c = cfg["controls"]
    L = _field(cfg)
    wf = _initial_wave(cfg, L)
    v = L.variant
    if v is not FieldVariant.NRT_NONLINEAR and c["boundary"] == "periodic":
        raise ValidationError(["controls/boundary: periodic grids are supported by the nrt_nonlinear variant only"])
    if v is FieldVariant.TIME_DEFORMED:
        return L, sc.solve_time_deformed(wf, L, c["t1_seconds"], c["steps"], c["t0_seconds"], c["method"])
    if c["t0_seconds"] != 0.0:
        raise ValidationError([f"controls/t0_seconds: the {v.value} solver starts at t = 0"])
    if v is FieldVariant.SCALE_Q_TIME:
        return L, sc.solve_scale_q_time(wf, L, c["t1_seconds"], c["steps"], store_every=None)
    if v is FieldVariant.NRT_NONLINEAR:
        return L, sc.solve_nrt_nonlinear(wf, L, c["t1_seconds"], c["steps"], store_every=None)
    if v is FieldVariant.SPATIAL_DEFORMED:
        return L, sc.solve_spatial_deformed(wf, L, c["t1_seconds"], c["steps"])
    return L, sc.solve_opt3_spatial(wf, L, c["t1_seconds"], c["steps"], c["form"], c["power"])


def _task_schrodinger(cfg, outdir):
    L, evo = _evolve(cfg)
    write_csv(outdir / "snapshots.csv", evo.snapshot_rows(cfg["output"]["snapshot_stride"]))
    write_csv(outdir / "norm.csv", evo.norm_rows())
    if cfg["output"]["plot"]:
        emit_plot(
            [("t0", evo.x, np.abs(evo.psi[0]) ** 2), ("t1", evo.x, np.abs(evo.psi[-1]) ** 2)],
            outdir / "density.svg",
            cfg["name"],
            "x",
            "|psi|^2",
        )
    return f"schrodinger {cfg['name']} ({L.variant.value}): snapshots={len(evo)} norm drift={evo.norm_drift:.3e}"


def _task_noether(cfg, outdir):
    from .noether import evolution_currents

    L, evo = _evolve(cfg)
    if L.variant not in (FieldVariant.TIME_DEFORMED, FieldVariant.SPATIAL_DEFORMED):
        raise ValidationError([f"controls/variant: noether_check supports time_deformed and spatial_deformed, got {L.variant.value}"])
    J0, J1, Q, div = evolution_currents(evo, L)
    inner = div[:, 2:-2]
    per_t = np.max(np.abs(inner), axis=1)
    write_csv(outdir / "noether.csv", [("t", "Q", "max_divergence")] + list(zip(evo.t, Q, per_t)))
    if cfg["output"]["plot"]:
        emit_plot([("Q", evo.t, Q)], outdir / "charge.svg", cfg["name"], "t", "Q")
    return (
        f"noether_check {cfg['name']}: charge drift={float(np.max(np.abs(Q - Q[0]))):.3e} "
        f"max divergence={float(np.max(per_t)):.3e}"
    )


def _task_props(cfg, outdir):
    from .props import run_props

    results = run_props(cfg["controls"].get("cases"), cfg["seed"])
    write_csv(outdir / "props.csv", [("property", "passed", "worst", "tol", "cases")] +
              [(r.name, r.passed, r.worst, r.tol, r.cases) for r in results])
    lines = [r.line() for r in results]
    failed = [r for r in results if not r.passed]
    lines.append(f"props: {len(results) - len(failed)}/{len(results)} passed")
    text = "\n".join(lines)
    if failed:
        raise ConvergenceError(text)
    return text


_TASKS = {
    "derive": _task_derive,
    "newton": _task_newton,
    "schrodinger": _task_schrodinger,
    "action_min": _task_action,
    "hamilton": _task_hamilton,
    "noether_check": _task_noether,
    "props": _task_props,
}


def run_scenario(cfg: dict, out_root: str | None = None) -> tuple[int, str]:
    """Normalize and run one scenario; returns ``(exit_code, message)``."""
    try:
        cfg = normalize(cfg)
        outdir = _out_dir(cfg, out_root)
        return EXIT_OK, _TASKS[cfg["task"]](cfg, outdir)
    except ValidationError as err:
        return EXIT_INVALID, "invalid scenario:\n  " + "\n  ".join(err.problems)
    except _INVALID as err:
        return EXIT_INVALID, f"invalid input: {err}"
    except _NUMERIC as err:
        return EXIT_NUMERIC, f"numerical failure: {err}"
    except OSError as err:
        return EXIT_INVALID, f"i/o error: {err}"


# --------------------------------------------------------------------------
# argument parsing

# flag -> (section, key, type)
FLAGS = {
    "name": (None, "name", str),
    "seed": (None, "seed", int),
    "potential": (None, "potential", str),
    "option": (None, "option", int),
    "kind": ("deformation", "kind", str),
    "alpha": ("deformation", "alpha", float),
    "zeta": ("deformation", "zeta", float),
    "l0": ("deformation", "l0_meters", float),
    "q": ("deformation", "q", float),
    "lam": ("deformation", "lambda", float),
    "normalization": ("deformation", "normalization", str),
    "mass": ("physics", "mass_kg", float),
    "hbar": ("physics", "hbar_joule_seconds", float),
    "k": ("physics", "stiffness_newton_per_meter", float),
    "expr": ("controls", "expr", str),
    "at": ("controls", "at", float),
    "mode": ("controls", "mode", str),
    "t0": ("controls", "t0_seconds", float),
    "t1": ("controls", "t1_seconds", float),
    "x0": ("controls", "x0_meters", float),
    "v0": ("controls", "v0_meters_per_second", float),
    "v0_kind": ("controls", "v0_kind", str),
    "p0": ("controls", "p0_kg_meters_per_second", float),
    "tol": ("controls", "tol", float),
    "points": ("controls", "points", int),
    "x_start": ("controls", "x_start_meters", float),
    "x_end": ("controls", "x_end_meters", float),
    "nodes": ("controls", "nodes", int),
    "starts": ("controls", "starts", int),
    "gtol": ("controls", "gtol", float),
    "variant": ("controls", "variant", str),
    "x_min": ("controls", "x_min_meters", float),
    "x_max": ("controls", "x_max_meters", float),
    "grid_points": ("controls", "grid_points", int),
    "steps": ("controls", "steps", int),
    "packet_x0": ("controls", "packet_x0_meters", float),
    "sigma": ("controls", "packet_sigma_meters", float),
    "k0": ("controls", "packet_k0_per_meter", float),
    "method": ("controls", "method", str),
    "form": ("controls", "form", str),
    "power": ("controls", "power", str),
    "boundary": ("controls", "boundary", str),
    "cases": ("controls", "cases", int),
    "stride": ("output", "snapshot_stride", int),
}


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", action="append", default=[], metavar="PATH", help="scenario JSON (repeatable)")
    common.add_argument("--out", default=None, help="output root (overrides METRICLAG_OUT)")
    common.add_argument("--jobs", type=int, default=1, help="run several --config scenarios concurrently")
    common.add_argument("--plot", action="store_true", default=None, help="also write SVG plots")
    common.add_argument("--shifted", action="store_true", default=None, help="newton: use the shifted time axis")
    for flag, (_, _, typ) in FLAGS.items():
        common.add_argument("--" + flag.replace("_", "-"), dest=flag, type=typ, default=None)
    p = argparse.ArgumentParser(prog="metriclag", description="Deformed-calculus mechanics and Schrödinger solvers.")
    sub = p.add_subparsers(dest="task", required=True)
    for task in TASKS:
        sub.add_parser(task, parents=[common])
    return p


def _flags_to_cfg(ns) -> dict:
    cfg: dict = {}
    for flag, (sec, key, _) in FLAGS.items():
        val = getattr(ns, flag)
        if val is None:
            continue
        (cfg if sec is None else cfg.setdefault(sec, {}))[key] = val
    if ns.plot:
        cfg.setdefault("output", {})["plot"] = True
    if ns.shifted:
        cfg.setdefault("controls", {})["shifted"] = True
    return cfg


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = {**out[k], **v}
        else:
            out[k] = v
    return out


def _run_one(args):
    cfg, out_root = args
    return run_scenario(cfg, out_root)


def main(argv=None) -> int:
    ns = _parser().parse_args(argv)
    flags = _flags_to_cfg(ns)
    scenarios = []
    try:
        for path in ns.config or [None]:
            base = load_config(path) if path else {}
            if path and base.get("task", ns.task) != ns.task:
                raise ValidationError([f"{path}: task {base.get('task')!r} does not match subcommand {ns.task!r}"])
            scenarios.append(_merge({**base, "task": ns.task}, flags))
    except ValidationError as err:
        print("invalid scenario:\n  " + "\n  ".join(err.problems), file=sys.stderr)
        return EXIT_INVALID
    if ns.jobs < 1:
        print("invalid input: --jobs must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    work = [(cfg, ns.out) for cfg in scenarios]
    if ns.jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=ns.jobs) as pool:
            results = list(pool.map(_run_one, work))
    else:
        results = [_run_one(w) for w in work]
    code = 0
    for rc, msg in results:
        print(msg, file=sys.stdout if rc == 0 else sys.stderr)
        code = max(code, rc)
    return code


def run(argv) -> int:
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
