"""JSON problem specs and solution artifacts.

Floats are written with ``repr`` precision (Python's json default), so a
dump/load cycle is lossless.  Non-finite floats are stored as null.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import GradGraphError
from .odeflow import Controls
from .operators import OperatorParams, Regime, eval_G
from .solution import PuncturedSolution

PROBLEM_SCHEMA = "gradgraph.problem/1"
SOLUTION_SCHEMA = "gradgraph.solution/1"
REPORT_SCHEMA = "gradgraph.report/1"


class SpecError(GradGraphError, ValueError):
    """Malformed or inconsistent problem spec."""


def _clean(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=1, allow_nan=False) + "\n"


def write_json(path: str | Path, obj: Any) -> None:
    Path(path).write_text(dumps(obj))


def read_json(path: str | Path) -> Any:
    return json.loads(Path(path).read_text())


def _nan(v):
    return math.nan if v is None else v


def _inf(v):
    return math.inf if v is None else v


def solution_to_dict(sol: PuncturedSolution, summary: dict | None = None) -> dict:
    return {"schema": SOLUTION_SCHEMA, "solution": sol.to_dict(), "summary": summary or {}}


def solution_from_dict(d: dict) -> PuncturedSolution:
    if d.get("schema") != SOLUTION_SCHEMA:
        raise SpecError(f"not a solution artifact (schema={d.get('schema')!r})")
    s = json.loads(json.dumps(d["solution"]))
    s["params"]["a"] = _nan(s["params"]["a"])
    s["params"]["b"] = _nan(s["params"]["b"])
    prof = s["profile"]
    if "alpha" in prof:
        prof["alpha"] = _inf(prof["alpha"])
    if "s_cut" in prof:
        prof["s_cut"] = _inf(prof["s_cut"])
    return PuncturedSolution.from_dict(s)


def load_solution(path: str | Path) -> PuncturedSolution:
    return solution_from_dict(read_json(path))


# -- problem specs ----------------------------------------------------------

_CONTROL_KEYS = set(Controls().to_dict())


@dataclass
class ProblemSpec:
    params: OperatorParams
    eigvals: np.ndarray | None
    A: np.ndarray | None
    beta: np.ndarray | None
    c: float | None
    u0: float
    kind: str
    c1: float
    kappa: float | None
    controls: Controls
    seed: int = 0
    samples: int = 1000
    raw: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.params.n


def _params_from(d: dict, n: int, C0: float) -> OperatorParams:
    if "tau_pi" in d:
        tau = float(d["tau_pi"]) * math.pi
        return OperatorParams.from_tau(tau, n, C0)
    if "regime" not in d:
        raise SpecError("spec needs 'regime' or 'tau_pi'")
    r = Regime.parse(str(d["regime"]))
    if r is Regime.LOG_QUOTIENT:
        return OperatorParams.log_quotient(float(d.get("b", 1.0)), n, C0)
    if r is Regime.ARCTAN_SHIFTED:
        if "b" not in d:
            raise SpecError("ArcTanShifted needs b in (0, 1)")
        return OperatorParams.arctan_shifted(float(d["b"]), n, C0)
    return OperatorParams.simple(r, n, C0)


def parse_problem(d: dict) -> ProblemSpec:
    """Validate a problem spec dict (see README for the field list)."""
    if not isinstance(d, dict):
        raise SpecError("spec must be a JSON object")
    if d.get("schema", PROBLEM_SCHEMA) != PROBLEM_SCHEMA:
        raise SpecError(f"unsupported schema {d.get('schema')!r}")
    if ("A" in d) == ("eigenvalues" in d):
        raise SpecError("give exactly one of 'A' and 'eigenvalues'")
    try:
        if "A" in d:
            A = np.asarray(d["A"], dtype=float)
            if A.ndim != 2 or A.shape[0] != A.shape[1]:
                raise SpecError("A must be a square matrix")
            eig = np.linalg.eigvalsh(0.5 * (A + A.T))
        else:
            A = None
            eig = np.sort(np.asarray(d["eigenvalues"], dtype=float).ravel())
        n = int(d.get("n", eig.size))
        if n != eig.size:
            raise SpecError(f"n={n} but A has size {eig.size}")
        params = _params_from(d, n, 0.0)
        C0 = float(d["C0"]) if d.get("C0") is not None else eval_G(params, eig)
        params = params.with_level(C0)
        ctrl = dict(d.get("controls", {}))
        seed = int(ctrl.pop("seed", 0))
        samples = int(ctrl.pop("samples", 1000))
        unknown = set(ctrl) - _CONTROL_KEYS
        if unknown:
            raise SpecError(f"unknown controls {sorted(unknown)}")
        controls = Controls(**{k: float(v) if k != "max_doublings" else int(v)
                               for k, v in ctrl.items()})
        beta = None if d.get("beta") is None else np.asarray(d["beta"], dtype=float)
        if beta is not None and beta.shape != (n,):
            raise SpecError("beta must have length n")
        u0 = float(d.get("u0", 0.0))
        c = None if d.get("c") is None else float(d["c"])
        if c is not None and c < u0:
            raise SpecError(f"need c >= u0 (c={c}, u0={u0})")
        if samples < 1:
            raise SpecError("samples must be positive")
        return ProblemSpec(params, eig, A, beta, c, u0, str(d.get("kind", "auto")),
                           float(d.get("c1", 0.0)),
                           None if d.get("kappa") is None else float(d["kappa"]),
                           controls, seed, samples, d)
    except SpecError:
        raise
    except (GradGraphError, ValueError, TypeError, KeyError) as exc:
        raise SpecError(f"invalid spec: {exc}") from exc


def load_problem(path: str | Path) -> ProblemSpec:
    try:
        d = read_json(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read spec {path}: {exc}") from exc
    return parse_problem(d)
