"""Command-line front end: ``gradgraph {solve,verify,exponents,classify,tabulate}``.

Exit codes: 0 success / all checks pass, 1 verification failure,
2 decay exponent not admissible, 3 invalid input or I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import replace

import numpy as np

from . import artifacts as art
from .errors import GradGraphError, NotAdmissible
from .odeflow import MAProfile, RadialProfile
from .operators import OperatorParams, Regime, eval_G, isotropic_report
from .solution import (EXACT_ISOTROPIC, EXACT_MA, QUADRATIC, SUBSOLUTION, QuadraticModel,
                       exact_isotropic_solution, exact_ma_solution, quadratic_solution,
                       subsolution)
from .sympoly import delta0, xi_bounds
from .verify import ALL_CHECKS, rigidity_probe, sampler, verify_solution

EXIT_OK, EXIT_FAIL, EXIT_NOT_ADMISSIBLE, EXIT_INVALID = 0, 1, 2, 3


class _Invalid(Exception):
    pass


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _kv_table(rows: dict) -> str:
    w = max(len(k) for k in rows) if rows else 0
    lines = []
    for k, v in rows.items():
        if isinstance(v, float):
            v = repr(v)
        lines.append(f"{k.ljust(w)}  {v}")
    return "\n".join(lines) + "\n"


# -- solve -------------------------------------------------------------------

def build_solution(spec: art.ProblemSpec):
    """(solution, summary) for a validated spec."""
    p = spec.params
    kind = spec.kind
    if kind == "auto":
        if p.regime is Regime.MA:
            kind = EXACT_MA
        elif spec.kappa is not None:
            kind = EXACT_ISOTROPIC
        elif spec.c is None or spec.c == spec.u0:
            kind = QUADRATIC
        else:
            kind = SUBSOLUTION
    summary: dict = {"regime": p.regime.value, "n": p.n, "C0": p.C0, "kind_requested": kind}
    A = spec.A if spec.A is not None else spec.eigvals
    if kind == EXACT_MA:
        sol = exact_ma_solution(p, A, spec.c1, spec.u0, spec.beta)
        summary.update(c1=spec.c1, cone_coefficient=sol.profile.cone_coefficient()
                       if isinstance(sol.profile, MAProfile) else 0.0)
    else:
        model = (QuadraticModel.from_matrix(A, spec.beta) if spec.A is not None
                 else QuadraticModel.from_eigenvalues(A, spec.beta))
        if kind == QUADRATIC:
            c = spec.u0 if spec.c is None else spec.c
            if c != spec.u0:
                raise _Invalid("the quadratic kind needs c = u0")
            sol = quadratic_solution(p, model.with_constants(c, c))
        elif kind == SUBSOLUTION:
            c = spec.u0 if spec.c is None else spec.c
            sol = subsolution(p, model.with_constants(c, spec.u0), spec.controls)
        elif kind == EXACT_ISOTROPIC:
            if spec.kappa is None:
                raise _Invalid("ExactIsotropic needs kappa")
            sol = exact_isotropic_solution(p, model.eigvals, spec.kappa, spec.u0, spec.beta,
                                           model.O, spec.controls)
        else:
            raise _Invalid(f"unknown kind {kind!r}")
        if p.regime is Regime.LOG_QUOTIENT:
            d = delta0(p, model.eigvals)
            summary.update(delta0=d.delta0, admissible=d.admissible, c0=p.c0,
                           gprime1=-d.delta0 / 2)
    prof = sol.profile
    summary.update(kind=sol.kind, u0=sol.model.u0, c=sol.model.c, mu=prof.mu)
    if isinstance(prof, RadialProfile):
        summary.update(alpha=prof.alpha, kappa=prof.kappa,
                       s_cut=prof.s_cut if not prof.is_constant else None)
    return sol, summary


def cmd_solve(args) -> int:
    spec = art.load_problem(args.spec)
    if args.tol is not None:
        spec.controls = replace(spec.controls, mu_tol=args.tol)
    try:
        sol, summary = build_solution(spec)
    except NotAdmissible as exc:
        sys.stderr.write(f"not admissible: {exc}\n")
        return EXIT_NOT_ADMISSIBLE
    if sol.params.regime is Regime.MA and sol.kind != QUADRATIC:
        rep = verify_solution(sol, ["residual_Equality"], seed=spec.seed, samples=spec.samples)
        summary["det_residual"] = rep.checks[0].value
    doc = art.solution_to_dict(sol, summary)
    if args.out:
        art.write_json(args.out, doc)
    if args.format == "json":
        sys.stdout.write(art.dumps(summary))
    else:
        sys.stdout.write(_kv_table({k: summary[k] for k in sorted(summary)}))
    return EXIT_OK


# -- verify ------------------------------------------------------------------

def cmd_verify(args) -> int:
    sol = art.load_solution(args.artifact)
    checks = None
    if args.checks:
        checks = [c.strip() for c in args.checks.split(",") if c.strip()]
        bad = set(checks) - set(ALL_CHECKS)
        if bad:
            raise _Invalid(f"unknown checks {sorted(bad)}; choose from {', '.join(ALL_CHECKS)}")
    rep = verify_solution(sol, checks, seed=args.seed, samples=args.samples)
    doc = {"schema": art.REPORT_SCHEMA, "seed": args.seed, "samples": args.samples,
           **rep.to_dict()}
    if args.out:
        art.write_json(args.out, doc)
    sys.stdout.write(art.dumps(doc) if args.format == "json" else rep.table() + "\n")
    return EXIT_OK if rep.overall else EXIT_FAIL


# -- exponents ---------------------------------------------------------------

# tau/pi values used when the problem file does not name a regime
SWEEP_TAU_PI = (0.125, 0.25, 0.375, 0.5)


def exponent_rows(spec: art.ProblemSpec, sweep: bool = False) -> list[dict]:
    lam = spec.eigvals
    if not sweep:
        plist = [spec.params]
    else:
        plist = []
        for t in SWEEP_TAU_PI:
            p = OperatorParams.from_tau(t * math.pi, spec.n)
            plist.append(p.with_level(eval_G(p, lam)))
    xb = xi_bounds(lam)
    rows = []
    for p in plist:
        d = delta0(p, lam)
        row = {"regime": p.regime.value, "tau_pi": p.tau / math.pi, "a": p.a, "b": p.b,
               "C0": p.C0, "delta0": d.delta0, "admissible": d.admissible,
               "xi_lower": xb.lower.tolist(), "xi_upper": xb.upper.tolist()}
        row.update({f"term_{k}": v for k, v in d.terms.items()})
        rows.append(row)
    return rows


def cmd_exponents(args) -> int:
    try:
        raw = art.read_json(args.spec)
    except (OSError, ValueError) as exc:
        raise _Invalid(f"cannot read spec {args.spec}: {exc}") from exc
    sweep = isinstance(raw, dict) and "regime" not in raw and "tau_pi" not in raw
    # the sweep sets its own regimes; any placeholder lets the rest of the problem validate
    spec = art.parse_problem(dict(raw, tau_pi=SWEEP_TAU_PI[0]) if sweep else raw)
    if spec.params.regime is Regime.MA:
        raise _Invalid("decay exponents are not defined here for the MA regime")
    rows = exponent_rows(spec, sweep)
    if args.format == "json":
        text = art.dumps({"eigenvalues": spec.eigvals.tolist(), "rows": rows})
    elif args.format == "csv":
        buf = io.StringIO()
        keys = ["regime", "tau_pi", "a", "b", "C0", "delta0", "admissible"]
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(keys)
        for r in rows:
            w.writerow([repr(r[k]) if isinstance(r[k], float) else r[k] for k in keys])
        text = buf.getvalue()
    else:
        parts = []
        for r in rows:
            parts.append(_kv_table({k: (_inline(v) if isinstance(v, list) else v)
                                    for k, v in r.items()}))
        text = "\n".join(parts)
    _emit(text, args.out)
    return EXIT_OK


# -- classify ----------------------------------------------------------------

def cmd_classify(args) -> int:
    spec = art.load_problem(args.spec)
    p = spec.params
    result: dict = {"regime": p.regime.value, "n": p.n, "C0": p.C0}
    rep = isotropic_report(p)
    result["isotropic_root"] = {"value": rep.value, "residual": rep.residual,
                                "closed_form": rep.closed_form, "quoted_form": rep.quoted_form,
                                "discrepancy": rep.discrepancy, "notes": list(rep.notes)}
    if p.regime is not Regime.MA:
        if args.artifact:
            profile = art.load_solution(args.artifact).profile
            source = str(args.artifact)
        else:
            profile = MAProfile(p.n, 1.0)
            source = "probe profile (1 + (2s)^(-n/2))^(1/n)"
        threshold = 1e-6 if args.tol is None else args.tol
        rig = rigidity_probe(p, spec.eigvals, profile)
        result["rigidity"] = {"spread": rig.spread, "s_at_max": rig.s_at_max,
                              "per_axis": rig.per_axis.tolist(), "profile": source,
                              "threshold": threshold,
                              "verdict": ("axis-dependent: only quadratic profiles solve "
                                          "the equation for this A") if rig.spread > threshold
                              else "axis-independent"}
    _emit(art.dumps(result) if args.format == "json" else _flat_table(result), args.out)
    return EXIT_OK


def _inline(values: list) -> str:
    return "[" + ", ".join(f"{v:.12g}" if isinstance(v, float) else str(v) for v in values) + "]"


def _flat_table(d: dict, prefix: str = "") -> str:
    rows = {}

    def walk(obj, pre):
        for k, v in obj.items():
            if isinstance(v, dict):
                walk(v, f"{pre}{k}.")
            else:
                rows[f"{pre}{k}"] = v
    walk(d, prefix)
    return _kv_table(rows)


# -- tabulate ----------------------------------------------------------------

def _parse_grid(text: str) -> np.ndarray:
    try:
        lo, hi, num = text.split(":")
        return np.geomspace(float(lo), float(hi), int(num))
    except ValueError as exc:
        raise _Invalid(f"grid must be lo:hi:num, got {text!r}") from exc


def cmd_tabulate(args) -> int:
    sol = art.load_solution(args.artifact)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if args.rays:
        radii = _parse_grid(args.radii)
        dirs = sampler(sol.n, args.rays, args.seed, (1.0, 1.0))
        w.writerow(["ray", "r", "u", "gap", "lambda_min", "G_residual"])
        for k, d in enumerate(dirs):
            X = radii[:, None] * d
            u = sol.u(X)
            gap = sol.comparison_gap(X)
            spec = sol.spectra(X)
            G = [eval_G(sol.params, lam) - sol.params.C0 for lam in spec]
            for i, r in enumerate(radii):
                w.writerow([k, repr(float(r)), repr(float(u[i])), repr(float(gap[i])),
                            repr(float(spec[i, 0])), repr(float(G[i]))])
    else:
        s = _parse_grid(args.grid)
        prof = sol.profile
        w.writerow(["s", "psi", "dpsi", "U"])
        for row in zip(s, prof.psi(s), prof.dpsi(s), prof.U(s)):
            w.writerow([repr(float(v)) for v in row])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


# -- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gradgraph",
                                 description="Generalized-symmetric solutions on punctured space.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, spec=True, artifact=False):
        if spec:
            p.add_argument("--spec", required=True, help="problem spec (JSON)")
        if artifact:
            p.add_argument("artifact", help="solution artifact (JSON)")
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--samples", type=int, default=1000)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--format", choices=("json", "csv", "table"), default="table")

    p = sub.add_parser("solve", help="construct a solution and write its artifact")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="run verification checks on an artifact")
    common(p, spec=False, artifact=True)
    p.add_argument("--checks", help="comma-separated subset of: " + ", ".join(ALL_CHECKS))
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("exponents", help="decay exponents and their intermediate terms")
    common(p)
    p.set_defaults(func=cmd_exponents)

    p = sub.add_parser("classify", help="isotropic root and rigidity probe")
    common(p)
    p.add_argument("--artifact", help="take the probe profile from this solution artifact")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("tabulate", help="CSV of profile or ray values")
    common(p, spec=False, artifact=True)
    p.add_argument("--grid", default="1e-3:1e6:50", help="s grid lo:hi:num (geometric)")
    p.add_argument("--rays", type=int, default=0, help="tabulate along this many random rays")
    p.add_argument("--radii", default="1e-2:1e3:25", help="ray radii lo:hi:num (geometric)")
    p.set_defaults(func=cmd_tabulate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "samples", 1) < 1:
        sys.stderr.write("error: --samples must be positive\n")
        return EXIT_INVALID
    if args.tol is not None and not args.tol > 0:
        sys.stderr.write("error: --tol must be positive\n")
        return EXIT_INVALID
    try:
        return args.func(args)
    except NotAdmissible as exc:
        sys.stderr.write(f"not admissible: {exc}\n")
        return EXIT_NOT_ADMISSIBLE
    except (_Invalid, art.SpecError, GradGraphError, OSError, ValueError, KeyError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
