"""Elementary symmetric polynomials and the decay exponent delta0."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainViolation, Unsupported
from .operators import OperatorParams, Regime, eval_G


def sigma(base: Sequence[float]) -> np.ndarray:
    """sigma_0..sigma_n of ``base`` by the prefix product recurrence."""
    base = np.asarray(base, dtype=float).ravel()
    e = np.zeros(base.size + 1)
    e[0] = 1.0
    for j, x in enumerate(base, start=1):
        e[1:j + 1] = e[1:j + 1] + x * e[0:j]
    return e


@dataclass(frozen=True)
class SigmaTable:
    """sigma[k] = sigma_k(base); sigma_excl[k, i] = sigma_k of base with entry i removed."""

    base: np.ndarray
    sigma: np.ndarray
    sigma_excl: np.ndarray

    @property
    def n(self) -> int:
        return self.base.size

    def excl(self, k: int, i: int) -> float:
        """sigma_{k;i}, extended by sigma_{-1;i} = 0 and sigma_{n;i} = 0."""
        if k < 0 or k >= self.n:
            return 0.0
        return float(self.sigma_excl[k, i])


def sigma_table(base: Sequence[float]) -> SigmaTable:
    base = np.asarray(base, dtype=float).ravel()
    if not np.all(np.isfinite(base)):
        raise DomainViolation("sigma_table needs finite entries")
    s = sigma(base)
    n = base.size
    excl = np.zeros((max(n, 1), n))
    # sigma of each leave-one-out vector directly; the subtractive recurrence
    # sigma_{k;i} = sigma_k - a_i sigma_{k-1;i} loses digits when the a_i spread
    for i in range(n):
        excl[:, i] = sigma(np.delete(base, i))[: max(n, 1)]
    return SigmaTable(base, s, excl[:n])


def ck_coefficients(C: float, n: int) -> np.ndarray:
    """c_k(C) for k = 0..n: c_{2j} = (-1)^{j+1} sin C, c_{2j+1} = (-1)^j cos C."""
    k = np.arange(n + 1)
    j = k // 2
    sign = np.where(j % 2 == 0, 1.0, -1.0)
    return np.where(k % 2 == 0, -sign * math.sin(C), sign * math.cos(C))


@dataclass(frozen=True)
class XiBounds:
    """Extremes of Xi_k over directions, indexed k = 0..n (k = 0 is identically 0)."""

    lower: np.ndarray
    upper: np.ndarray
    argmin: np.ndarray
    argmax: np.ndarray


def _positive(lamA: Sequence[float]) -> np.ndarray:
    lam = np.sort(np.asarray(lamA, dtype=float).ravel())
    if lam.size == 0 or not np.all(lam > 0):
        raise DomainViolation(f"eigenvalues of A must be positive: {lam}")
    return lam


def xi_value(lamA: Sequence[float], x: Sequence[float], k: int) -> float:
    """Xi_k(lambda(A), x) evaluated directly (lamA in the order matching x)."""
    lam = np.asarray(lamA, dtype=float)
    x = np.asarray(x, dtype=float)
    tab = sigma_table(lam)
    x2 = x * x
    num = sum(tab.excl(k - 1, i) * lam[i] ** 2 * x2[i] for i in range(lam.size))
    return float(num / (tab.sigma[k] * np.dot(lam, x2)))


def xi_bounds(lamA: Sequence[float]) -> XiBounds:
    """Xi_k is a weighted mean of l_i sigma_{k-1;i}/sigma_k with weights l_i x_i^2,
    so its sup/inf over directions sit at coordinate axes."""
    lam = _positive(lamA)
    n = lam.size
    tab = sigma_table(lam)
    lower = np.zeros(n + 1)
    upper = np.zeros(n + 1)
    amin = np.zeros(n + 1, dtype=int)
    amax = np.zeros(n + 1, dtype=int)
    for k in range(1, n + 1):
        vert = lam * tab.sigma_excl[k - 1] / tab.sigma[k]
        amin[k], amax[k] = int(np.argmin(vert)), int(np.argmax(vert))
        lower[k], upper[k] = vert[amin[k]], vert[amax[k]]
    return XiBounds(lower, upper, amin, amax)


@dataclass(frozen=True)
class DecayExponent:
    delta0: float
    regime: Regime
    admissible: bool
    terms: dict = field(default_factory=dict, compare=False)


def quotient_argument(params: OperatorParams) -> float:
    """The angle C fed to c_k and xi_k in the arctan-type regimes."""
    if params.regime is Regime.SPECIAL_LAGRANGIAN:
        return params.C0
    if params.regime is Regime.ARCTAN_SHIFTED:
        return params.n * math.pi / 4 + params.b * params.C0 / math.sqrt(params.a ** 2 + 1)
    raise Unsupported(f"no quotient angle for {params.regime.value}")


def delta0(params: OperatorParams, lamA: Sequence[float], level_tol: float = 1e-8) -> DecayExponent:
    lam = _positive(lamA)
    r = params.regime
    if r is Regime.MA:
        raise Unsupported("tau = 0 decay rates are not computed here")
    if lam.size != params.n:
        raise DomainViolation(f"need {params.n} eigenvalues, got {lam.size}")
    try:
        level = eval_G(params, lam)
        if abs(level - params.C0) > level_tol:
            warnings.warn(f"G(lambda(A)) = {level!r} differs from C0 = {params.C0!r}",
                          stacklevel=2)
    except DomainViolation:
        pass

    terms: dict = {}
    lmin = lam[0]
    if r is Regime.LOG_QUOTIENT:
        b = params.b
        d = float(np.sum((lmin + 2 * b) / (lam + 2 * b)))
    elif r is Regime.INVERSE_HARMONIC:
        s = sigma(lam)
        d = float(s[-2] * lmin / s[-1])
        terms = {"sigma": s.tolist()}
    else:
        C = quotient_argument(params)
        s = sigma(lam)
        ck = ck_coefficients(C, lam.size)
        xb = xi_bounds(lam)
        xi = np.where(ck > 0, xb.upper, xb.lower)
        k = np.arange(lam.size + 1)
        num = float(np.sum(k * ck * s))
        den = float(np.sum(xi * ck * s))
        d = num / den
        terms = {"C": C, "sigma": s.tolist(), "c_k": ck.tolist(), "xi_k": xi.tolist(),
                 "xi_lower": xb.lower.tolist(), "xi_upper": xb.upper.tolist(),
                 "numerator": num, "denominator": den}
    return DecayExponent(d, r, bool(d > 2), terms)


def arctan_algebraic_form(C0: float, spec: Sequence[float]) -> float:
    """cos C0 sum (-1)^k sigma_{2k+1} - sin C0 sum (-1)^k sigma_{2k}.

    Vanishes exactly when sum arctan(l_i) = C0 modulo pi.
    """
    s = sigma(spec)
    odd = s[1::2]
    even = s[0::2]
    alt_odd = np.sum(odd * (-1.0) ** np.arange(odd.size))
    alt_even = np.sum(even * (-1.0) ** np.arange(even.size))
    return float(math.cos(C0) * alt_odd - math.sin(C0) * alt_even)
