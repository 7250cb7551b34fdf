"""Scenario files, batch execution and reports."""
from __future__ import annotations

import datetime
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .expr import ExprError, SampledFunc, as_func
from .extraction import ExtractionError, extract_darboux, extract_frenet
from .frames import (CONVENTION_NOTES, IntegratorConfig, darboux_from_frenet,
                     frames_from_frenet_frames, integrate_darboux, integrate_frenet)
from .helix import DUAL, ConstancyPolicy, DegenerateError, classify, classify_w, verify_axis
from .io import export_trajectory, ingest_trajectory
from .model import (DARBOUX, FRENET, DarbouxInvariants, FramePose,
                    FrenetInvariants, Scenario, validate)

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2

OUTPUT_KINDS = ("trajectory", "darboux_trajectory", "report")


class ScenarioError(ValueError):
    """Scenario is malformed or violates an invariant (exit code 1)."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        super().__init__("; ".join(violations))
        self.violations = list(violations)


class RunError(RuntimeError):
    """Evaluation or degeneracy failure while running (exit code 2)."""


@dataclass
class Result:
    name: str
    exit_code: int
    report: dict = None
    errors: list = field(default_factory=list)


# --------------------------------------------------------------------------
# loading

def _scalar(name, value):
    if isinstance(value, dict):
        try:
            return SampledFunc(value["s"], value["values"])
        except KeyError as exc:
            raise ScenarioError(f"invariant {name}: sample object needs {exc}") from None
        except ValueError as exc:
            raise ScenarioError(f"invariant {name}: {exc}") from None
    if isinstance(value, list):
        try:
            pts = np.asarray(value, dtype=float)
            return SampledFunc(pts[:, 0], pts[:, 1])
        except (ValueError, IndexError) as exc:
            raise ScenarioError(f"invariant {name}: bad sample array ({exc})") from None
    if isinstance(value, bool) or not isinstance(value, (str, int, float)):
        raise ScenarioError(f"invariant {name}: expected expression string, "
                            "number or samples")
    try:
        return as_func(value)
    except ExprError as exc:
        raise ScenarioError(f"invariant {name}: {exc}") from None


def scenario_from_dict(doc: dict, step: float = None) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object")
    problems = []
    frame = doc.get("frame")
    if frame not in (DARBOUX, FRENET):
        raise ScenarioError(f"frame must be 'darboux' or 'frenet', got {frame!r}")
    raw = doc.get("invariants")
    if not isinstance(raw, dict):
        raise ScenarioError("invariants must be an object")
    if frame == DARBOUX:
        required, optional, cls = ("G", "K", "T"), ("c1", "c2", "c3"), DarbouxInvariants
    else:
        required, optional, cls = ("K1", "K2"), ("a1", "a2", "a3"), FrenetInvariants
    unknown = sorted(set(raw) - set(required) - set(optional))
    if unknown:
        problems.append(f"unknown invariants {unknown} for a {frame} scenario")
    missing = [n for n in required if n not in raw]
    if missing:
        problems.append(f"missing invariants {missing}")
    if problems:
        raise ScenarioError(problems)
    inv = cls(**{n: _scalar(n, v) for n, v in raw.items()})

    psi = doc.get("psi")
    if psi is not None:
        psi = _scalar("psi", psi)

    dom = doc.get("domain")
    try:
        start, end = float(dom["start"]), float(dom["end"])
        dstep = float(step if step is not None else dom["step"])
    except (TypeError, KeyError, ValueError):
        raise ScenarioError("domain must be an object with numeric start, end, step") from None

    pose = doc.get("initial_pose")
    if pose is None:
        initial = FramePose.identity()
    else:
        try:
            rows = np.asarray(pose["rows"], dtype=float).reshape(3, 3)
            origin = np.asarray(pose.get("origin", [0, 0, 0]), dtype=float).reshape(3)
        except (TypeError, KeyError, ValueError):
            raise ScenarioError("initial_pose needs 'rows' (3x3) and optional 'origin'") from None
        initial = FramePose.from_matrix(origin, rows)

    analyses = doc.get("analyses", [])
    if not isinstance(analyses, list) or not all(isinstance(a, str) for a in analyses):
        raise ScenarioError("analyses must be a list of kind strings")
    outputs = doc.get("outputs", [])
    if not isinstance(outputs, list):
        raise ScenarioError("outputs must be a list")
    for out in outputs:
        if not isinstance(out, dict) or "path" not in out:
            raise ScenarioError("each output needs 'what' and 'path'")
        if out.get("what", "trajectory") not in OUTPUT_KINDS:
            raise ScenarioError(f"unknown output {out.get('what')!r}")
        if out.get("format", "csv") not in ("csv", "json"):
            raise ScenarioError(f"unknown output format {out.get('format')!r}")

    return Scenario(name=str(doc.get("name", "scenario")), frame_kind=frame,
                    invariants=inv, s_start=start, s_end=end, step=dstep,
                    initial=initial, analyses=tuple(analyses),
                    outputs=tuple(outputs), psi=psi)


def load_scenario(path, step: float = None) -> Scenario:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc}") from None
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc}") from None
    return scenario_from_dict(doc, step)


# --------------------------------------------------------------------------
# reports

def _clean(x):
    if isinstance(x, float):
        return x if math.isfinite(x) else None
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, np.generic):
        return _clean(x.item())
    return x


def verdict_summary(v) -> dict:
    out = {
        "kind": v.kind,
        "is_helix": bool(v.is_helix),
        "sigma_median": v.sigma_median,
        "sigma_spread": v.sigma_spread,
        "cone_angle_rad": v.cone_angle,
        "cone_angle_deg": None if v.cone_angle is None else math.degrees(v.cone_angle),
        "axis_frame": None if v.axis_frame_coords is None else v.axis_frame_coords[0],
        "axis_world": v.axis_world,
        "residuals": dict(v.residuals),
    }
    if v.kind in DUAL:
        out["dual"] = DUAL[v.kind]
    return _clean(out)


def format_report(report: dict, timestamp: bool = True) -> str:
    """Header comment line (the only place a timestamp appears) + JSON body."""
    body = json.dumps(report, indent=2)
    if not timestamp:
        return body + "\n"
    now = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    return f"# myller report generated {now}\n{body}\n"


def data_section(text: str) -> str:
    """Report text without its header comment lines."""
    return "".join(line for line in text.splitlines(keepends=True)
                   if not line.startswith("#"))


# --------------------------------------------------------------------------
# execution

def _analyze(kinds, darboux_inv, darboux_traj, frenet_inv, frenet_traj, grid, policy):
    verdicts = []
    for kind in kinds:
        if kind == "xi1":
            v = classify("xi1", frenet_inv, grid, policy)
            traj = frenet_traj
        elif kind in DUAL:
            v = classify_w(kind, darboux_inv, grid, policy)
            traj = darboux_traj
        else:
            v = classify(kind, darboux_inv, grid, policy)
            traj = darboux_traj
        if v.undefined_region is not None:
            raise RunError(f"{kind}: {v.message}")
        if traj is not None:
            v = verify_axis(traj, v)
        verdicts.append(v)
    return verdicts


def run_scenario(scenario: Scenario, policy: ConstancyPolicy = None,
                 base_dir=None) -> dict:
    """Integrate, analyze and write outputs; returns the report dict.

    Raises ScenarioError for invariant violations and RunError for
    evaluation or degeneracy failures.
    """
    problems = validate(scenario)
    if problems:
        raise ScenarioError(problems)
    policy = policy or ConstancyPolicy()
    base_dir = Path(base_dir or ".")
    grid = scenario.grid
    cfg = IntegratorConfig(step=scenario.step)
    warnings_ = []
    frenet_inv = frenet_traj = darboux_traj = darboux_inv = None
    try:
        if scenario.frame_kind == FRENET:
            frenet_inv = scenario.invariants
            frenet_traj = integrate_frenet(frenet_inv, scenario.initial, grid, cfg)
            warnings_ += [CONVENTION_NOTES["frenet_xi3"], CONVENTION_NOTES["frenet_K2"]]
            if scenario.psi is not None:
                darboux_inv = darboux_from_frenet(frenet_inv, scenario.psi)
                darboux_traj = frames_from_frenet_frames(frenet_traj, scenario.psi)
                warnings_.append(CONVENTION_NOTES["c2_relation"])
            main_traj = frenet_traj
        else:
            darboux_inv = scenario.invariants
            darboux_traj = integrate_darboux(darboux_inv, scenario.initial, grid, cfg)
            main_traj = darboux_traj
        verdicts = _analyze(scenario.analyses, darboux_inv, darboux_traj,
                            frenet_inv, frenet_traj, grid, policy)
    except (ExprError, DegenerateError) as exc:
        raise RunError(str(exc)) from exc

    report = _clean({
        "scenario": scenario.name,
        "frame": scenario.frame_kind,
        "domain": {"start": scenario.s_start, "end": scenario.s_end,
                   "step": scenario.step, "points": len(grid)},
        "policy": {"abs_tol": policy.abs_tol, "rel_tol": policy.rel_tol},
        "integration": {
            "max_orthonormality_error": main_traj.max_orthonormality_error(),
            "end_point": main_traj.r[-1],
        },
        "analyses": [verdict_summary(v) for v in verdicts],
        "warnings": list(dict.fromkeys(warnings_)),
    })

    for out in scenario.outputs:
        what = out.get("what", "trajectory")
        fmt = out.get("format", "csv")
        path = base_dir / out["path"]
        path.parent.mkdir(parents=True, exist_ok=True)
        if what == "trajectory":
            export_trajectory(main_traj, fmt, path)
        elif what == "darboux_trajectory":
            if darboux_traj is None:
                raise RunError("darboux_trajectory output needs psi for a Frenet scenario")
            export_trajectory(darboux_traj, fmt, path)
        elif what == "report":
            path.write_text(format_report(report), encoding="utf-8")
    return report


def run_file(path, step=None, policy=None) -> Result:
    path = Path(path)
    name = path.stem
    try:
        scenario = load_scenario(path, step)
        name = scenario.name
        report = run_scenario(scenario, policy, base_dir=path.parent)
    except ScenarioError as exc:
        return Result(name, EXIT_INVALID, errors=[f"invalid scenario: {v}" for v in exc.violations])
    except RunError as exc:
        return Result(name, EXIT_RUNTIME, errors=[f"runtime failure: {exc}"])
    except OSError as exc:
        return Result(name, EXIT_RUNTIME, errors=[f"I/O failure: {exc}"])
    return Result(name, EXIT_OK, report=report)


def classify_trajectory(path, frame_kind, kinds, policy=None) -> dict:
    """Extract invariants from a trajectory file and run helix tests on them."""
    traj = ingest_trajectory(path, frame_kind)
    policy = policy or ConstancyPolicy()
    warnings_ = []
    try:
        if frame_kind == FRENET:
            bad = [k for k in kinds if k != "xi1"]
            if bad:
                raise ScenarioError(f"kinds {bad} need a Darboux trajectory")
            inv = extract_frenet(traj)
            warnings_.append(CONVENTION_NOTES["frenet_K2"])
            verdicts = _analyze(kinds, None, None, inv, traj, traj.grid, policy)
        else:
            if "xi1" in kinds:
                raise ScenarioError("kind 'xi1' needs a Frenet-type trajectory")
            inv = extract_darboux(traj)
            verdicts = _analyze(kinds, inv, traj, None, None, traj.grid, policy)
    except (ExtractionError, ExprError, DegenerateError) as exc:
        raise RunError(str(exc)) from exc
    return _clean({
        "trajectory": str(path),
        "frame": frame_kind,
        "points": len(traj),
        "policy": {"abs_tol": policy.abs_tol, "rel_tol": policy.rel_tol},
        "analyses": [verdict_summary(v) for v in verdicts],
        "warnings": warnings_,
    })
