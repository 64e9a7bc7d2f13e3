"""The operator family F_tau / G_tau on Hessian spectra.

Five regimes are distinguished by the angle tau in [0, pi/2]:

    MA                 tau = 0            (1/n) sum ln l
    LogQuotient        0 < tau < pi/4     K sum ln(l / (l + 2b)),   K = sqrt(a^2+1)/(2b)
    InverseHarmonic    tau = pi/4         -sqrt(2) sum 1/l
    ArcTanShifted      pi/4 < tau < pi/2  (sqrt(a^2+1)/b)(sum arctan l - n pi/4)
    SpecialLagrangian  tau = pi/2         sum arctan l

with a = cot(tau) and b = sqrt(|cot(tau)^2 - 1|).  The G-form above is what
the rest of the package works with; the F-form is related to it by an affine
shift of the spectrum (``translate_spectrum``).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainViolation, RegimeMismatch, Unattainable

SQRT2 = math.sqrt(2.0)
_TAU_ATOL = 1e-12


class Regime(enum.Enum):
    MA = "MA"
    LOG_QUOTIENT = "LogQuotient"
    INVERSE_HARMONIC = "InverseHarmonic"
    ARCTAN_SHIFTED = "ArcTanShifted"
    SPECIAL_LAGRANGIAN = "SpecialLagrangian"

    @classmethod
    def parse(cls, name: str) -> "Regime":
        key = name.replace("_", "").replace("-", "").lower()
        for r in cls:
            if r.value.lower() == key or r.name.replace("_", "").lower() == key:
                return r
        raise ValueError(f"unknown regime {name!r}")


def regime_for_tau(tau: float) -> Regime:
    if not 0.0 <= tau <= math.pi / 2 + _TAU_ATOL:
        raise DomainViolation(f"tau={tau} outside [0, pi/2]")
    if tau <= _TAU_ATOL:
        return Regime.MA
    if abs(tau - math.pi / 4) <= _TAU_ATOL:
        return Regime.INVERSE_HARMONIC
    if abs(tau - math.pi / 2) <= _TAU_ATOL:
        return Regime.SPECIAL_LAGRANGIAN
    return Regime.LOG_QUOTIENT if tau < math.pi / 4 else Regime.ARCTAN_SHIFTED


@dataclass(frozen=True)
class OperatorParams:
    """Regime, dimension and level of the equation G_tau(lambda(D^2 u)) = C0.

    ``a`` and ``b`` are the derived constants cot(tau) and sqrt(|cot^2 tau - 1|).
    They may also be supplied directly (with ``tau=None``) for the pure
    evaluation routines, which only need the algebraic shape of the formula.
    """

    regime: Regime
    n: int
    C0: float = 0.0
    tau: float | None = None
    a: float = float("nan")
    b: float = float("nan")

    def __post_init__(self):
        if self.n < 1:
            raise DomainViolation(f"dimension n={self.n} must be positive")
        if self.regime in (Regime.LOG_QUOTIENT, Regime.ARCTAN_SHIFTED):
            if not (self.b > 0 and np.isfinite(self.a)):
                raise DomainViolation(
                    f"{self.regime.value} needs finite a and b > 0 (got a={self.a}, b={self.b})")

    # -- constructors -------------------------------------------------------
    @classmethod
    def from_tau(cls, tau: float, n: int, C0: float = 0.0) -> "OperatorParams":
        regime = regime_for_tau(tau)
        if regime is Regime.MA:
            return cls(regime, n, C0, 0.0)
        if regime is Regime.SPECIAL_LAGRANGIAN:
            return cls(regime, n, C0, math.pi / 2, 0.0, 1.0)
        if regime is Regime.INVERSE_HARMONIC:
            return cls(regime, n, C0, math.pi / 4, 1.0, 0.0)
        a = 1.0 / math.tan(tau)
        return cls(regime, n, C0, tau, a, math.sqrt(abs(a * a - 1.0)))

    @classmethod
    def log_quotient(cls, b: float, n: int, C0: float = 0.0) -> "OperatorParams":
        """LogQuotient regime parametrised by b > 0 (then a = sqrt(b^2 + 1))."""
        if b <= 0:
            raise DomainViolation("b must be positive")
        a = math.sqrt(b * b + 1.0)
        return cls(Regime.LOG_QUOTIENT, n, C0, math.atan2(1.0, a), a, b)

    @classmethod
    def arctan_shifted(cls, b: float, n: int, C0: float = 0.0) -> "OperatorParams":
        """ArcTanShifted regime parametrised by b in (0, 1) (then a = sqrt(1 - b^2))."""
        if not 0 < b < 1:
            raise DomainViolation("ArcTanShifted needs b in (0, 1)")
        a = math.sqrt(1.0 - b * b)
        return cls(Regime.ARCTAN_SHIFTED, n, C0, math.atan2(1.0, a), a, b)

    @classmethod
    def simple(cls, regime: Regime | str, n: int, C0: float = 0.0) -> "OperatorParams":
        regime = Regime.parse(regime) if isinstance(regime, str) else regime
        tau = {Regime.MA: 0.0, Regime.INVERSE_HARMONIC: math.pi / 4,
               Regime.SPECIAL_LAGRANGIAN: math.pi / 2}.get(regime)
        if tau is None:
            raise RegimeMismatch(f"{regime.value} needs b; use log_quotient/arctan_shifted")
        return cls.from_tau(tau, n, C0)

    def with_level(self, C0: float) -> "OperatorParams":
        return OperatorParams(self.regime, self.n, float(C0), self.tau, self.a, self.b)

    # -- derived constants --------------------------------------------------
    @property
    def scale(self) -> float:
        """Multiplier in front of the branch sum (1 for MA's 1/n handled separately)."""
        r = self.regime
        if r is Regime.LOG_QUOTIENT:
            return math.sqrt(self.a ** 2 + 1.0) / (2.0 * self.b)
        if r is Regime.ARCTAN_SHIFTED:
            return math.sqrt(self.a ** 2 + 1.0) / self.b
        if r is Regime.INVERSE_HARMONIC:
            return -SQRT2
        if r is Regime.MA:
            return 1.0 / self.n
        return 1.0

    @property
    def c0(self) -> float:
        """exp(2 b C0 / sqrt(a^2 + 1)); only meaningful for LogQuotient."""
        if self.regime is not Regime.LOG_QUOTIENT:
            raise RegimeMismatch("c0 is defined for the LogQuotient regime only")
        return math.exp(2.0 * self.b * self.C0 / math.sqrt(self.a ** 2 + 1.0))

    def to_dict(self) -> dict:
        return {"regime": self.regime.value, "n": self.n, "C0": self.C0,
                "tau": self.tau, "a": self.a, "b": self.b}

    @classmethod
    def from_dict(cls, d: dict) -> "OperatorParams":
        return cls(Regime.parse(d["regime"]), int(d["n"]), float(d["C0"]),
                   None if d.get("tau") is None else float(d["tau"]),
                   float(d["a"]), float(d["b"]))


def as_spectrum(values: Sequence[float], n: int | None = None) -> np.ndarray:
    """Canonical spectrum: float array sorted ascending, optionally length-checked."""
    lam = np.sort(np.asarray(values, dtype=float).ravel())
    if n is not None and lam.size != n:
        raise DomainViolation(f"spectrum has {lam.size} entries, expected n={n}")
    return lam


def _gate(ok: np.ndarray, what: str, lam: np.ndarray) -> None:
    if not np.all(ok):
        raise DomainViolation(f"{what}: offending eigenvalues {lam[~ok]}")


def eval_G(params: OperatorParams, spec: Sequence[float]) -> float:
    """G_tau evaluated on a spectrum."""
    lam = as_spectrum(spec, params.n)
    r = params.regime
    if r is Regime.MA:
        _gate(lam > 0, "MA needs positive eigenvalues", lam)
        return float(np.mean(np.log(lam)))
    if r is Regime.LOG_QUOTIENT:
        _gate(lam > 0, "LogQuotient needs positive eigenvalues", lam)
        return float(-params.scale * np.sum(np.log1p(2.0 * params.b / lam)))
    if r is Regime.INVERSE_HARMONIC:
        _gate(lam != 0, "InverseHarmonic needs nonzero eigenvalues", lam)
        return float(-SQRT2 * np.sum(1.0 / lam))
    if r is Regime.ARCTAN_SHIFTED:
        return float(params.scale * (np.sum(np.arctan(lam)) - lam.size * math.pi / 4))
    return float(np.sum(np.arctan(lam)))


def eval_F(params: OperatorParams, spec: Sequence[float]) -> float:
    """F_tau (the untranslated operator) evaluated on a spectrum."""
    lam = as_spectrum(spec, params.n)
    r, a, b = params.regime, params.a, params.b
    if r is Regime.LOG_QUOTIENT:
        shifted = lam + a - b
        _gate(shifted > 0, "LogQuotient F needs l > b - a", lam)
        return float(-params.scale * np.sum(np.log1p(2.0 * b / shifted)))
    if r is Regime.INVERSE_HARMONIC:
        _gate(lam != -1.0, "InverseHarmonic F needs l != -1", lam)
        return float(-SQRT2 * np.sum(1.0 / (1.0 + lam)))
    if r is Regime.ARCTAN_SHIFTED:
        den = lam + a + b
        _gate(den != 0, "ArcTanShifted F needs l != -(a+b)", lam)
        return float(params.scale * np.sum(np.arctan((lam + a - b) / den)))
    return eval_G(params, lam)


def translate_spectrum(params: OperatorParams, spec: Sequence[float]) -> np.ndarray:
    """Map an F-form spectrum to the G-form spectrum of the translated function."""
    lam = as_spectrum(spec, params.n)
    r = params.regime
    if r is Regime.LOG_QUOTIENT:
        return lam + (params.a - params.b)
    if r is Regime.INVERSE_HARMONIC:
        return lam + 1.0
    if r is Regime.ARCTAN_SHIFTED:
        return (lam + params.a) / params.b
    raise RegimeMismatch(f"{r.value}: translation is the identity")


def arctan_identity_defect(lam: Sequence[float], a: float, b: float) -> float:
    """|sum arctan((l+a-b)/(l+a+b)) - (sum arctan((l+a)/b) - n pi/4)|."""
    lam = np.asarray(lam, dtype=float)
    if b <= 0:
        raise DomainViolation("identity needs b > 0")
    _gate(lam > -a - b, "identity needs l > -a-b", lam)
    lhs = np.sum(np.arctan((lam + a - b) / (lam + a + b)))
    rhs = np.sum(np.arctan((lam + a) / b)) - lam.size * math.pi / 4
    return float(abs(lhs - rhs))


def check_arctan_identity(params: OperatorParams, spec: Sequence[float]) -> float:
    return arctan_identity_defect(as_spectrum(spec, params.n), params.a, params.b)


# -- isotropic roots --------------------------------------------------------

@dataclass(frozen=True)
class IsotropicRoot:
    """Root of G_tau(l, ..., l) = C0 with the commonly quoted closed form alongside."""

    value: float
    residual: float
    closed_form: float
    quoted_form: float
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def discrepancy(self) -> float:
        return abs(self.value - self.quoted_form)


def _scalar_branch(params: OperatorParams) -> tuple[Callable, Callable, tuple[float, float]]:
    """(f, f', domain) with f(l) = G_tau(l*1), strictly increasing on domain."""
    n, r, b, K = params.n, params.regime, params.b, params.scale
    if r is Regime.MA:
        return math.log, lambda l: 1.0 / l, (0.0, math.inf)
    if r is Regime.LOG_QUOTIENT:
        return (lambda l: -n * K * math.log1p(2 * b / l),
                lambda l: n * K * (1 / l - 1 / (l + 2 * b)), (0.0, math.inf))
    if r is Regime.INVERSE_HARMONIC:
        dom = (0.0, math.inf) if params.C0 < 0 else (-math.inf, 0.0)
        return lambda l: -SQRT2 * n / l, lambda l: SQRT2 * n / l ** 2, dom
    if r is Regime.ARCTAN_SHIFTED:
        return (lambda l: K * n * (math.atan(l) - math.pi / 4),
                lambda l: K * n / (1 + l * l), (-math.inf, math.inf))
    return lambda l: n * math.atan(l), lambda l: n / (1 + l * l), (-math.inf, math.inf)


def _attainable(params: OperatorParams) -> bool:
    n, C0, r = params.n, params.C0, params.regime
    if r is Regime.LOG_QUOTIENT:
        return C0 < 0
    if r is Regime.INVERSE_HARMONIC:
        return C0 != 0
    if r is Regime.ARCTAN_SHIFTED:
        K = params.scale
        return -3 * n * math.pi / 4 * K < C0 < n * math.pi / 4 * K
    if r is Regime.SPECIAL_LAGRANGIAN:
        return abs(C0) < n * math.pi / 2
    return math.isfinite(C0)


def _bracket(f, target, lo_dom, hi_dom, cap=2000):
    # expand geometrically towards whichever end of the domain is needed
    if lo_dom == 0.0:
        lo = hi = 1.0
        while f(lo) >= target:
            lo *= 0.5
            cap -= 1
        while f(hi) <= target:
            hi *= 2.0
            cap -= 1
    elif hi_dom == 0.0:
        lo = hi = -1.0
        while f(hi) <= target:
            hi *= 0.5
            cap -= 1
        while f(lo) >= target:
            lo *= 2.0
            cap -= 1
    else:
        lo, hi = -1.0, 1.0
        while f(lo) >= target:
            lo *= 2.0
            cap -= 1
        while f(hi) <= target:
            hi *= 2.0
            cap -= 1
    if cap < 0:
        raise Unattainable("bracket expansion did not terminate")
    return lo, hi


def _rtsafe(f, df, target, lo, hi, ftol=1e-14, maxiter=400):
    """Bisection safeguarded Newton for an increasing f on [lo, hi]."""
    x = 0.5 * (lo + hi)
    for _ in range(maxiter):
        fx = f(x) - target
        if abs(fx) <= ftol:
            return x
        if fx < 0:
            lo = x
        else:
            hi = x
        d = df(x)
        xn = x - fx / d if d > 0 else math.nan
        if not (lo < xn < hi):
            xn = 0.5 * (lo + hi)
        if xn == x or hi - lo <= 4 * np.finfo(float).eps * max(abs(lo), abs(hi)):
            return xn
        x = xn
    return x


def isotropic_closed_forms(params: OperatorParams) -> tuple[float, float]:
    """(consistent closed form, commonly quoted form) for l*."""
    n, C0, r, b = params.n, params.C0, params.regime, params.b
    if r is Regime.MA:
        v = math.exp(C0)
        return v, v
    if r is Regime.LOG_QUOTIENT:
        q = math.exp(2 * b * C0 / (n * math.sqrt(params.a ** 2 + 1)))
        v = 2 * b / (1 - q) - 2 * b
        return v, v
    if r is Regime.INVERSE_HARMONIC:
        return -SQRT2 * n / C0, -SQRT2 * C0 / (2 * n)
    if r is Regime.ARCTAN_SHIFTED:
        v = math.tan(b * C0 / (n * math.sqrt(params.a ** 2 + 1)) + math.pi / 4)
        return v, v
    v = math.tan(C0 / n)
    return v, v


def isotropic_root(params: OperatorParams) -> float:
    """Scalar l* with G_tau(l*, ..., l*) = C0, found by safeguarded Newton."""
    if not _attainable(params):
        raise Unattainable(f"C0={params.C0} outside the isotropic range of {params.regime.value}")
    f, df, (lo_dom, hi_dom) = _scalar_branch(params)
    lo, hi = _bracket(f, params.C0, lo_dom, hi_dom)
    return _rtsafe(f, df, params.C0, lo, hi)


def isotropic_report(params: OperatorParams) -> IsotropicRoot:
    lam = isotropic_root(params)
    closed, quoted = isotropic_closed_forms(params)
    residual = abs(eval_G(params, np.full(params.n, lam)) - params.C0)
    notes = []
    if not math.isclose(closed, quoted, rel_tol=1e-12, abs_tol=1e-14):
        quoted_res = math.nan
        try:
            quoted_res = abs(eval_G(params, np.full(params.n, quoted)) - params.C0)
        except DomainViolation:
            pass
        notes.append(
            f"commonly quoted isotropic value {quoted!r} differs from the root {lam!r}; "
            f"its residual in the defining equation is {quoted_res!r}")
    return IsotropicRoot(lam, residual, closed, quoted, tuple(notes))
