"""Numerical certificates for constructed solutions.

Every check returns a :class:`CheckResult`; a :class:`VerificationReport`
collects them and passes only if all of them do.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateFit, DomainViolation
from .odeflow import MAProfile, RadialProfile, ode_residual
from .operators import OperatorParams, Regime, eval_G
from .radial import RadialFrame, sigma_k_profile, sigma_n_shifted
from .solution import EXACT_ISOTROPIC, EXACT_MA, QUADRATIC, PuncturedSolution
from .sympoly import ck_coefficients, delta0, quotient_argument, sigma_table

PASS, FAIL, EXACT = "pass", "fail", "exact"

AT_LEAST_TOL = 1e-9
EQUALITY_TOL = 1e-7
MA_DET_TOL = 1e-8
PATH_AGREEMENT_TOL = 1e-9
DECAY_REL_TOL = 0.05
SYMMETRY_TOL = 1e-10
ODE_TOL = 1e-8


@dataclass
class CheckResult:
    name: str
    status: str
    value: float
    tol: float
    samples: int
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status != FAIL

    def to_dict(self) -> dict:
        return {"name": self.name, "status": self.status, "value": self.value,
                "tol": self.tol, "samples": self.samples, "detail": self.detail}


@dataclass
class VerificationReport:
    checks: list[CheckResult]

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        checks = sorted(self.checks, key=lambda c: c.name)
        return {"overall": PASS if self.overall else FAIL,
                "checks": [c.to_dict() for c in checks]}

    def table(self) -> str:
        rows = [("check", "status", "value", "tol", "samples")]
        for c in sorted(self.checks, key=lambda c: c.name):
            rows.append((c.name, c.status, f"{c.value:.3e}", f"{c.tol:.1e}", str(c.samples)))
        w = [max(len(r[i]) for r in rows) for i in range(5)]
        lines = ["  ".join(r[i].ljust(w[i]) for i in range(5)) for r in rows]
        lines.append(f"overall: {PASS if self.overall else FAIL}")
        return "\n".join(lines)


def sampler(n: int, count: int = 1000, seed: int = 0,
            radii: tuple[float, float] = (1e-2, 1e3)) -> np.ndarray:
    """Points with uniform directions and log-uniform radii."""
    if radii[0] <= 0:
        raise DomainViolation("sampler radii must avoid the origin")
    rng = np.random.default_rng(seed)
    d = rng.standard_normal((count, n))
    d /= np.linalg.norm(d, axis=1)[:, None]
    r = np.exp(rng.uniform(math.log(radii[0]), math.log(radii[1]), count))
    return d * r[:, None]


# -- residuals --------------------------------------------------------------

def _sigma_path(sol: PuncturedSolution, X: np.ndarray) -> np.ndarray:
    """G_tau(lambda(D^2 u)) - C0 from the closed radial sigma formulas (no eigenvalues)."""
    p = sol.params
    a = sol.a
    n = a.size
    Y, s = sol.frame(X)
    Up = sol.profile.psi(s)
    Upp = sol.profile.dpsi(s)
    key = sol.profile.radial_key(s)
    out = np.empty(s.size)
    ln_sn = float(np.sum(np.log(a)))
    for k in range(s.size):
        # det D^2 u = sigma_n(a) U'^(n-1) (U' + 2 s U'')
        log_det = ln_sn + (n - 1) * math.log(Up[k]) + math.log(key[k])
        if p.regime is Regime.MA:
            out[k] = log_det / n - p.C0
        elif p.regime is Regime.LOG_QUOTIENT:
            frame = RadialFrame.at(a, Y[k], Up[k], Upp[k])
            log_q = log_det - math.log(sigma_n_shifted(frame, 2 * p.b))
            out[k] = p.scale * (log_q - math.log(p.c0))
        else:
            frame = RadialFrame.at(a, Y[k], Up[k], Upp[k])
            sk = np.array([1.0] + [sigma_k_profile(frame, j) for j in range(1, n + 1)])
            if p.regime is Regime.INVERSE_HARMONIC:
                out[k] = -math.sqrt(2.0) * sk[n - 1] / sk[n] - p.C0
            else:
                # phase of prod(1 + i l) = sum arctan l (mod 2 pi)
                alt = (-1.0) ** (np.arange(n + 1) // 2)
                re = float(np.sum((alt * sk)[0::2]))
                im = float(np.sum((alt * sk)[1::2]))
                phase = math.atan2(im, re)
                G = eval_G(p, sol.spectra(X[k:k + 1])[0])
                total = G if p.regime is Regime.SPECIAL_LAGRANGIAN else G / p.scale + n * math.pi / 4
                phase += 2 * math.pi * round((total - phase) / (2 * math.pi))
                G2 = phase if p.regime is Regime.SPECIAL_LAGRANGIAN else p.scale * (phase - n * math.pi / 4)
                out[k] = G2 - p.C0
    return out


def _eigen_path(sol: PuncturedSolution, X: np.ndarray, spectra=None) -> np.ndarray:
    spectra = sol.spectra(X) if spectra is None else spectra
    return np.array([eval_G(sol.params, lam) for lam in spectra]) - sol.params.C0


def residual_check(sol: PuncturedSolution, X: np.ndarray, mode: str = "AtLeast",
                   spectra=None) -> CheckResult:
    """AtLeast: min (G - C0) >= -1e-9.  Equality: max |G - C0| <= 1e-7
    (relative det defect <= 1e-8 for the MA regime).  Both evaluation
    paths must agree to 1e-9."""
    if mode not in ("AtLeast", "Equality"):
        raise ValueError(f"unknown residual mode {mode!r}")
    X = np.atleast_2d(X)
    r1 = _eigen_path(sol, X, spectra)
    r2 = _sigma_path(sol, X)
    agree = float(np.max(np.abs(r1 - r2)))
    detail = {"path_disagreement": agree, "min": float(np.min(r1)), "max": float(np.max(r1))}
    name = f"residual_{mode}"
    if mode == "AtLeast":
        value, tol = float(np.min(r1)), AT_LEAST_TOL
        ok = value >= -tol
    elif sol.params.regime is Regime.MA:
        value = float(np.max(np.abs(np.expm1(sol.n * r1))))
        tol = MA_DET_TOL
        ok = value <= tol
        detail["measure"] = "relative det defect"
    else:
        value, tol = float(np.max(np.abs(r1))), EQUALITY_TOL
        ok = value <= tol
    ok = ok and agree <= PATH_AGREEMENT_TOL
    return CheckResult(name, PASS if ok else FAIL, value, tol, len(X), detail)


def convexity_check(sol: PuncturedSolution, X: np.ndarray, spectra=None) -> CheckResult:
    X = np.atleast_2d(X)
    spectra = sol.spectra(X) if spectra is None else spectra
    lam_min = float(np.min(spectra[:, 0]))
    s = _profile_grid(sol.profile)
    key = sol.profile.psi(s) + 2 * s * sol.profile.dpsi(s)
    kmin = float(np.min(key)) if key.size else 1.0
    ok = lam_min > 0 and kmin > 0
    return CheckResult("convexity", PASS if ok else FAIL, lam_min, 0.0, len(X),
                       {"min_U'+2sU''": kmin, "grid_points": int(s.size)})


def _profile_grid(profile) -> np.ndarray:
    if isinstance(profile, RadialProfile) and not profile.is_constant:
        s = profile.s_grid()
        return s[s > 0]
    return np.logspace(-6, 8, 300)


def comparison_check(sol: PuncturedSolution, X: np.ndarray) -> CheckResult:
    gap = sol.comparison_gap(X)
    g0 = float(sol.comparison_gap(np.zeros(sol.n))[0])
    expect0 = sol.model.c - sol.model.u0
    ok = float(np.min(gap)) >= -AT_LEAST_TOL and abs(g0 - expect0) <= 1e-12 * max(1, abs(expect0))
    return CheckResult("comparison", PASS if ok else FAIL, float(np.min(gap)), AT_LEAST_TOL,
                       len(gap), {"gap_at_origin": g0, "c_minus_u0": expect0})


def symmetry_check(sol: PuncturedSolution, X: np.ndarray) -> CheckResult:
    """All 2^n reflections preserve u - beta.x, relative to max(1, |u - beta.x|)."""
    X = np.atleast_2d(X)
    worst = 0.0
    for x in X:
        scale = max(1.0, abs(float(sol.u(x)[0] - sol.model.beta @ x)))
        worst = max(worst, sol.symmetry_defect(x) / scale)
    return CheckResult("symmetry", PASS if worst < SYMMETRY_TOL else FAIL, worst,
                       SYMMETRY_TOL, len(X), {"reflections": 2 ** sol.n})


def expected_decay(sol: PuncturedSolution) -> float:
    """delta0 of the solution's quadratic asymptote."""
    if sol.params.regime is Regime.MA:
        return float(sol.n)
    return delta0(sol.params, sol.a).delta0


def fit_exponent(radii, gaps) -> float:
    radii = np.asarray(radii, dtype=float)
    gaps = np.abs(np.asarray(gaps, dtype=float))
    if np.any(gaps < 1e-300):
        raise DegenerateFit("gap vanishes on the fit window")
    return float(np.polyfit(np.log(radii), np.log(gaps), 1)[0])


def decay_fit(sol: PuncturedSolution, direction, radii=None) -> CheckResult:
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    radii = np.geomspace(30.0, 3000.0, 13) if radii is None else np.asarray(radii, dtype=float)
    if radii.max() / radii.min() < 100 * (1 - 1e-12):
        raise DomainViolation("decay fit radii must span two decades")
    target = 2.0 - expected_decay(sol)
    if sol.kind == QUADRATIC:
        return CheckResult("decay", EXACT, 0.0, DECAY_REL_TOL, radii.size,
                           {"reason": "ExactMatch", "expected": target})
    gaps = sol.comparison_gap(radii[:, None] * direction)
    try:
        slope = fit_exponent(radii, gaps)
    except DegenerateFit:
        return CheckResult("decay", EXACT, 0.0, DECAY_REL_TOL, radii.size,
                           {"reason": "ExactMatch", "expected": target})
    rel = abs(slope - target) / abs(target)
    return CheckResult("decay", PASS if rel <= DECAY_REL_TOL else FAIL, slope, DECAY_REL_TOL,
                       radii.size, {"expected": target, "relative_error": rel})


def ode_check(sol: PuncturedSolution) -> CheckResult:
    prof = sol.profile
    if isinstance(prof, MAProfile) or prof.is_constant:
        s = np.logspace(-6, 8, 300)
        if isinstance(prof, MAProfile) and not prof.is_constant:
            n = prof.n
            up, upp = prof.psi(s), prof.dpsi(s)
            r = float(np.max(np.abs(1.0 + 2 * s * upp / up - up ** (-n))))
        else:
            r = 0.0
        return CheckResult("ode_residual", PASS if r <= ODE_TOL else FAIL, r, ODE_TOL, s.size)
    r = ode_residual(prof)
    return CheckResult("ode_residual", PASS if r <= ODE_TOL else FAIL, r, ODE_TOL,
                       2 * prof.t.size - 1)


# -- admissibility and rigidity ---------------------------------------------

def two_large_family(b: float, c0: float, M_values: Iterable[float]) -> list[tuple[list[float], float]]:
    """(a, delta0) for a = (a1, M, M) with a1 fixed by prod a_i/(a_i + 2b) = c0."""
    out = []
    for M in M_values:
        q = c0 * ((M + 2 * b) / M) ** 2
        if not q < 1:
            continue
        a1 = 2 * b * q / (1 - q)
        a = np.sort([a1, M, M])
        d = float(np.sum((a[0] + 2 * b) / (a + 2 * b)))
        out.append((a.tolist(), d))
    return out


def admissibility(params: OperatorParams, lamA: Sequence[float]) -> CheckResult:
    dec = delta0(params, lamA)
    detail: dict = {"regime": params.regime.value}
    if params.regime is Regime.LOG_QUOTIENT:
        fam = two_large_family(params.b, params.c0, [10.0, 1e2, 1e3, 1e4, 1e6])
        detail["two_large_family"] = [{"a": a, "delta0": d} for a, d in fam]
    return CheckResult("admissibility", PASS if dec.admissible else FAIL, dec.delta0, 2.0, 1, detail)


@dataclass
class RigidityResult:
    spread: float
    s_at_max: float
    per_axis: np.ndarray
    regime: Regime


def rigidity_axis_values(params: OperatorParams, lamA: Sequence[float], Up: float, Upp: float,
                         s: float) -> np.ndarray:
    """Axis-dependent side of the per-axis identity, one entry per axis i0."""
    a = np.asarray(lamA, dtype=float)
    n = a.size
    r = params.regime
    if r is Regime.LOG_QUOTIENT:
        p = Up + 2 * params.b / a
        return np.array([params.c0 * 2 * s * Upp * np.prod(np.delete(p, i)) for i in range(n)])
    tab = sigma_table(a)
    if r is Regime.INVERSE_HARMONIC:
        return np.array([2 * s * Upp * Up ** (n - 2) * a[i] * tab.excl(n - 2, i) for i in range(n)])
    if r in (Regime.SPECIAL_LAGRANGIAN, Regime.ARCTAN_SHIFTED):
        ck = ck_coefficients(quotient_argument(params), n)
        return np.array([sum(ck[m + 1] * 2 * s * Upp * Up ** m * a[i] * tab.excl(m, i)
                             for m in range(n - 1)) for i in range(n)])
    raise DomainViolation(f"no rigidity identity for {r.value}")


def rigidity_probe(params: OperatorParams, lamA: Sequence[float], profile,
                   s_values=None) -> RigidityResult:
    """max over s of (max_i - min_i) of the axis-dependent side."""
    s_values = np.logspace(-2, 3, 51) if s_values is None else np.asarray(s_values, dtype=float)
    Up = np.atleast_1d(profile.psi(s_values))
    Upp = np.atleast_1d(profile.dpsi(s_values))
    best = (-1.0, math.nan, np.zeros(0))
    for s, up, upp in zip(s_values, Up, Upp):
        vals = rigidity_axis_values(params, lamA, up, upp, s)
        spread = float(np.max(vals) - np.min(vals))
        if spread > best[0]:
            best = (spread, float(s), vals)
    return RigidityResult(best[0], best[1], best[2], params.regime)


# -- orchestration ----------------------------------------------------------

ALL_CHECKS = ("residual_AtLeast", "residual_Equality", "convexity", "comparison", "symmetry",
              "decay", "ode_residual", "admissibility")


def default_checks(sol: PuncturedSolution) -> list[str]:
    names = ["residual_AtLeast", "convexity", "comparison", "symmetry", "decay", "ode_residual"]
    if sol.kind in (EXACT_ISOTROPIC, EXACT_MA, QUADRATIC):
        names.insert(1, "residual_Equality")
    if sol.params.regime is Regime.LOG_QUOTIENT and sol.kind != QUADRATIC:
        names.append("admissibility")
    return names


def verify_solution(sol: PuncturedSolution, checks: Sequence[str] | None = None, seed: int = 0,
                    samples: int = 1000, n_rays: int = 4) -> VerificationReport:
    checks = list(default_checks(sol) if checks is None else checks)
    unknown = set(checks) - set(ALL_CHECKS)
    if unknown:
        raise ValueError(f"unknown checks {sorted(unknown)}")
    X = sampler(sol.n, samples, seed)
    spectra = sol.spectra(X) if any(c.startswith("residual_") or c == "convexity"
                                    for c in checks) else None
    out = []
    for name in checks:
        if name.startswith("residual_"):
            out.append(residual_check(sol, X, name.split("_", 1)[1], spectra))
        elif name == "convexity":
            out.append(convexity_check(sol, X, spectra))
        elif name == "comparison":
            out.append(comparison_check(sol, X))
        elif name == "symmetry":
            out.append(symmetry_check(sol, X[: max(1, min(samples, 100))]))
        elif name == "decay":
            rays = sampler(sol.n, n_rays, seed + 1, (1.0, 1.0))
            fits = [decay_fit(sol, d) for d in rays]
            worst = max(fits, key=lambda c: (c.status == FAIL, c.detail.get("relative_error", 0)))
            worst.samples = sum(f.samples for f in fits)
            out.append(worst)
        elif name == "ode_residual":
            out.append(ode_check(sol))
        elif name == "admissibility":
            out.append(admissibility(sol.params, sol.a))
    return VerificationReport(out)
