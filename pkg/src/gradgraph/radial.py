"""Hessian structure of u(x) = U(s), s = 1/2 sum a_i x_i^2.

The Hessian is diag(U' a) + U'' v v^T with v = (a_1 x_1, ..., a_n x_n), a
diagonal-plus-rank-one matrix whose spectrum comes from the secular equation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import math

import numpy as np

from .errors import DomainViolation
from .sympoly import sigma_table

DEFLATE_TOL = 1e-14
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class RadialFrame:
    a: np.ndarray
    s: float
    x: np.ndarray
    Up: float
    Upp: float

    @classmethod
    def at(cls, a: Sequence[float], x: Sequence[float], Up: float, Upp: float) -> "RadialFrame":
        a = np.asarray(a, dtype=float)
        x = np.asarray(x, dtype=float)
        if a.shape != x.shape:
            raise DomainViolation("a and x must have the same length")
        if not np.all(a > 0):
            raise DomainViolation("a must be positive")
        return cls(a, float(0.5 * np.dot(a, x * x)), x, float(Up), float(Upp))

    def __post_init__(self):
        s = 0.5 * np.dot(self.a, self.x * self.x)
        if abs(s - self.s) > 1e-12 * max(1.0, abs(s)):
            raise DomainViolation(f"frame inconsistent: s={self.s} but 1/2 a.x^2 = {s}")

    @property
    def v(self) -> np.ndarray:
        return self.a * self.x


def hessian_matrix(frame: RadialFrame) -> np.ndarray:
    v = frame.v
    return np.diag(frame.Up * frame.a) + frame.Upp * np.outer(v, v)


def gradient(frame: RadialFrame) -> np.ndarray:
    return frame.Up * frame.a * frame.x


def _secular_root(d, z2, rho, jl, jr, spread):
    """Root of h(l) = 1/rho + sum z2/(d - l) between poles d[jl] and d[jr].

    A missing pole (jl = -1 or jr = n) is replaced by the outer bound
    d[jr] - spread or d[jl] + spread, spread = |rho| sum z2.

    h is increasing between consecutive poles.  Poles d[:jl+1] lie left of
    the interval and d[jr:] right of it.  The iteration runs in e = l - org,
    org being the pole nearer to the root, so that d_i - l = (d_i - org) - e
    keeps full relative accuracy close to a pole.  Each side of the sum is
    replaced by a one-pole rational model matched in value and slope at the
    current iterate; the model root is the next iterate (bisection if it
    leaves the bracket).
    """
    inv = 1.0 / rho
    n = len(d)
    has_l, has_r = jl >= 0, jr < n

    def h(lam):
        return inv + sum(z2[i] / (d[i] - lam) for i in range(n))

    if has_l and has_r:
        org = d[jl] if h(0.5 * (d[jl] + d[jr])) > 0 else d[jr]
    else:
        org = d[jl] if has_l else d[jr]
    dd = [di - org for di in d]
    pL = dd[jl] if has_l else None
    pR = dd[jr] if has_r else None
    # brackets in shifted coordinates, where a tiny spread is not rounded away
    lo = pL if has_l else pR - spread
    hi = pR if has_r else pL + spread
    x = 0.5 * (lo + hi)
    for _ in range(100):
        psiL = dpsiL = psiR = dpsiR = mag = 0.0
        for i in range(n):
            r = 1.0 / (dd[i] - x)
            t = z2[i] * r
            mag += abs(t)
            if i <= jl:
                psiL += t
                dpsiL += t * r
            else:
                psiR += t
                dpsiR += t * r
        fx = inv + psiL + psiR
        # h is known only to within its rounding error
        if abs(fx) <= 8 * _EPS * (abs(inv) + mag):
            return x + org
        if fx < 0:
            lo = x
        else:
            hi = x
        C = inv
        xn = math.nan
        if has_l and has_r:
            sL = dpsiL * (pL - x) ** 2
            sR = dpsiR * (pR - x) ** 2
            C += psiL - sL / (pL - x) + psiR - sR / (pR - x)
            # C (pL - l)(pR - l) + sL (pR - l) + sR (pL - l) = 0
            qa = C
            qb = -(C * (pL + pR) + sL + sR)
            qc = C * pL * pR + sL * pR + sR * pL
            disc = qb * qb - 4 * qa * qc
            if disc >= 0 and qa != 0:
                q = -0.5 * (qb + math.copysign(math.sqrt(disc), qb))
                for cand in (q / qa, (qc / q) if q != 0 else math.nan):
                    if lo < cand < hi:
                        xn = cand
                        break
        elif has_l:
            sL = dpsiL * (pL - x) ** 2
            C += psiL - sL / (pL - x)
            if C != 0:
                xn = pL + sL / C
        else:
            sR = dpsiR * (pR - x) ** 2
            C += psiR - sR / (pR - x)
            if C != 0:
                xn = pR + sR / C
        if not (lo < xn < hi):
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= 2 * _EPS * abs(x) or hi - lo <= 2 * _EPS * max(abs(lo), abs(hi)):
            return xn + org
        x = xn
    return x + org


def eigen_rank_one(d: Sequence[float], v: Sequence[float], rho: float,
                   det_factor: float | None = None) -> np.ndarray:
    """Eigenvalues of diag(d) + rho v v^T, sorted ascending.

    ``det_factor``, if given, is 1 + rho sum v_i^2 / d_i evaluated by the caller
    without cancellation.  For rho < 0 the smallest eigenvalue is then taken as
    det / (product of the others), which keeps its relative accuracy when it is
    tiny compared with the poles.
    """
    result = _eigen_rank_one(d, v, rho)
    if det_factor is not None and rho < 0 and det_factor > 0 and np.all(np.asarray(d) > 0):
        det = float(np.prod(d)) * det_factor
        result[0] = det / float(np.prod(result[1:]))
    return result


def _eigen_rank_one(d, v, rho) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    v = np.asarray(v, dtype=float)
    n = d.size
    vnorm = np.linalg.norm(v)
    if rho == 0 or vnorm == 0:
        return np.sort(d)

    order = np.argsort(d)
    d, v = d[order], v[order]
    coupled = np.abs(v) > DEFLATE_TOL * vnorm
    out = list(d[~coupled])

    # merge (numerically) repeated poles: a Givens rotation leaves one coupled copy
    dc, vc = d[coupled], v[coupled]
    scale = max(np.max(np.abs(d)), 1e-300)
    poles, weights = [], []
    for di, vi in zip(dc, vc):
        if poles and abs(di - poles[-1]) <= 8 * _EPS * scale:
            out.append(di)
            weights[-1] += vi * vi
        else:
            poles.append(di)
            weights.append(vi * vi)
    poles = np.asarray(poles)
    z2 = np.asarray(weights)
    m = poles.size
    spread = abs(rho) * np.sum(z2)
    roots = np.empty(m)
    pl, zl = poles.tolist(), z2.tolist()
    for j in range(m):
        if rho > 0:
            roots[j] = _secular_root(pl, zl, rho, j, j + 1, spread)
        else:
            roots[j] = _secular_root(pl, zl, rho, j - 1, j, spread)
    result = np.sort(np.concatenate([np.asarray(out), roots]))

    if _residual(poles, z2, rho, roots) > 1e-8:
        full = np.diag(np.asarray(d)) + rho * np.outer(v, v)
        return np.linalg.eigvalsh(full)
    assert result.size == n
    return result


def _residual(poles, z2, rho, roots):
    # ||(D + rho z z^T - l I) w|| / (scale ||w||) with w_i = z_i / (d_i - l)
    z = np.sqrt(z2)
    scale = max(np.max(np.abs(poles)), abs(rho) * np.sum(z2), 1e-300)
    den = poles[None, :] - np.asarray(roots)[:, None]
    ok = np.all(den != 0, axis=1)
    if not np.any(ok):
        return 0.0
    W = z / den[ok]
    R = den[ok] * W + rho * z * (W @ z)[:, None]
    return float(np.max(np.linalg.norm(R, axis=1) / (scale * np.linalg.norm(W, axis=1))))


def spectrum(frame: RadialFrame) -> np.ndarray:
    return eigen_rank_one(frame.Up * frame.a, frame.v, frame.Upp)


def sigma_k_profile(frame: RadialFrame, k: int) -> float:
    """sigma_k of the Hessian via (U')^k sigma_k(a) + U''(U')^{k-1} sum (a_i x_i)^2 sigma_{k-1;i}(a)."""
    n = frame.a.size
    if not 1 <= k <= n:
        raise DomainViolation(f"k={k} outside 1..{n}")
    tab = sigma_table(frame.a)
    v2 = frame.v ** 2
    return float(frame.Up ** k * tab.sigma[k]
                 + frame.Upp * frame.Up ** (k - 1) * np.dot(v2, tab.sigma_excl[k - 1]))


def sigma_n_shifted(frame: RadialFrame, shift: float) -> float:
    """det of the Hessian of u + (shift/4)|x|^2, i.e. of D^2 u + shift * I.

    ``shift`` plays the role of 2b.
    """
    a, x = frame.a, frame.x
    sn = float(np.prod(a))
    p = frame.Up + shift / a
    total = np.prod(p)
    cross = 0.0
    for i in range(a.size):
        cross += a[i] * x[i] ** 2 * np.prod(np.delete(p, i))
    return float(sn * total + frame.Upp * sn * cross)
