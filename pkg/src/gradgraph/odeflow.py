"""Radial profiles U(s) for generalized-symmetric sub- and exact solutions.

Write psi = U' and phi = psi - 1.  Both the shooting equation
psi' = g(psi)/(s + 1) and the isotropic equality equation psi' = g(psi)/s
become autonomous in t = ln(s + 1) (resp. t = ln s):

    dphi/dt = g(1 + phi) = -N(phi) / (2 D(phi)),

where N and D are polynomials with positive coefficients once c0 is
eliminated through c0 * prod(1 + 2b/a_i) = 1.  We integrate y = ln(phi),
whose right-hand side -N(phi)/phi / (2 D(phi)) is free of cancellation both
at phi -> 0 and phi -> infinity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq
from scipy.special import comb

from .errors import (BracketFailure, DomainViolation, Incompatible, NotAdmissible,
                     RegimeMismatch, ToleranceFailure)
from .operators import OperatorParams, Regime, eval_G
from .sympoly import DecayExponent, delta0, sigma

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


@dataclass
class Controls:
    rtol: float = 1e-11
    atol: float = 1e-12
    grid_dt: float = 0.01
    tail_threshold: float = 1e-6
    s_tail_min: float = 1e6
    mu_tol: float = 1e-8
    max_doublings: int = 60
    s_max: float = 1e10
    s_min: float = 1e-6

    def __post_init__(self):
        for name, val in self.__dict__.items():
            if not val > 0:
                raise ValueError(f"control {name} must be positive, got {val!r}")

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class RadialODE:
    """dphi/dt = -N(phi) / (2 D(phi)).

    ``num[k]`` is the coefficient of phi^(k+1) in N (N has no constant term),
    ``den[k]`` the coefficient of phi^k in D.
    """

    num: tuple[float, ...]
    den: tuple[float, ...]

    @classmethod
    def log_quotient(cls, a: Sequence[float], b: float) -> "RadialODE":
        a = np.sort(np.asarray(a, dtype=float))
        n = a.size
        w = a / (a + 2 * b)
        sw = sigma(w)
        sw_tail = sigma(w[1:])
        num = [comb(n, k, exact=True) - sw[k] for k in range(1, n + 1)]
        den = [comb(n - 1, k, exact=True) - w[0] * sw_tail[k] for k in range(n)]
        return cls(tuple(float(c) for c in num), tuple(float(c) for c in den))

    @classmethod
    def monge_ampere(cls, n: int) -> "RadialODE":
        """psi' = (1 - psi^n) / (2 s psi^(n-1)), the tau = 0 radial equation."""
        return cls(tuple(float(comb(n, k, exact=True)) for k in range(1, n + 1)),
                   tuple(float(comb(n - 1, k, exact=True)) for k in range(n)))

    @property
    def gprime1(self) -> float:
        return -self.num[0] / (2.0 * self.den[0])

    @property
    def tail_c2(self) -> float:
        """c2 in phi = E + c2 E^2 + O(E^3), E the linearised solution of dphi/dt = h(phi)."""
        n0, n1 = self.num[0], self.num[1] if len(self.num) > 1 else 0.0
        d0, d1 = self.den[0], self.den[1] if len(self.den) > 1 else 0.0
        h2 = -(n1 * d0 - n0 * d1) / (2.0 * d0 * d0)
        return h2 / self.gprime1

    def tail_phi(self, E):
        return E + self.tail_c2 * E * E

    def tail_E(self, phi: float) -> float:
        """Inverse of tail_phi near 0."""
        c2 = self.tail_c2
        return 2.0 * phi / (1.0 + math.sqrt(1.0 + 4.0 * c2 * phi))

    def _poly(self, coeffs, x):
        acc = 0.0 * x
        for c in reversed(coeffs):
            acc = acc * x + c
        return acc

    def F(self, y):
        """dy/dt for y = ln(phi)."""
        phi = np.exp(y)
        return -self._poly(self.num, phi) / (2.0 * self._poly(self.den, phi))

    def h(self, phi):
        """dphi/dt = g(1 + phi)."""
        return -phi * self._poly(self.num, phi) / (2.0 * self._poly(self.den, phi))

    def D(self, phi):
        return self._poly(self.den, phi)


@dataclass(frozen=True)
class GData:
    params: OperatorParams
    a: np.ndarray
    c0: float
    decay: DecayExponent
    gprime1: float
    ode: RadialODE

    @property
    def delta0(self) -> float:
        return self.decay.delta0

    @property
    def n(self) -> int:
        return self.a.size

    @property
    def b(self) -> float:
        return self.params.b

    @classmethod
    def build(cls, params: OperatorParams, a: Sequence[float], tol: float = 1e-10) -> "GData":
        if params.regime is not Regime.LOG_QUOTIENT:
            raise RegimeMismatch("the shooting construction is for the LogQuotient regime")
        a = np.sort(np.asarray(a, dtype=float))
        if a.size != params.n:
            raise Incompatible(f"need {params.n} eigenvalues, got {a.size}")
        if params.n < 3:
            raise DomainViolation("constructions need n >= 3")
        if not np.all(a > 0):
            raise DomainViolation("eigenvalues of A must be positive")
        c0 = params.c0
        defect = c0 * np.prod(1.0 + 2.0 * params.b / a) - 1.0
        if abs(defect) > tol:
            raise Incompatible(f"c0 * prod(1 + 2b/a_i) - 1 = {defect:.3e}: A does not match C0")
        ode = RadialODE.log_quotient(a, params.b)
        return cls(params, a, c0, delta0(params, a), ode.gprime1, ode)

    @classmethod
    def from_eigenvalues(cls, b: float, a: Sequence[float]) -> "GData":
        """GData with C0 set from A itself, C0 = G_tau(lambda(A))."""
        a = np.sort(np.asarray(a, dtype=float))
        p = OperatorParams.log_quotient(b, a.size)
        return cls.build(p.with_level(eval_G(p, a)), a)

    @property
    def is_isotropic(self) -> bool:
        return bool(self.a[-1] - self.a[0] <= 1e-12 * self.a[-1])


def g_eval(gd: GData, psi):
    """g(psi) = -(psi^n - c0 prod(psi + 2b/a_i)) / (2 (psi^(n-1) - c0 prod_{i>=2}(psi + 2b/a_i)))."""
    psi = np.asarray(psi, dtype=float)
    if np.any(psi < 1):
        raise DomainViolation("g is evaluated on psi >= 1")
    out = gd.ode.h(psi - 1.0)
    return float(out) if out.ndim == 0 else out


# -- profiles ---------------------------------------------------------------

SHOOTING, EXACT, CONSTANT = "shooting", "exact", "constant"


@dataclass
class RadialProfile:
    """Sampled phi = U' - 1 on a uniform grid in t with Hermite dense output.

    kind ``shooting``: t = ln(1 + s), grid starts at s = 0 with psi(0) = alpha.
    kind ``exact``:    t = ln s, grid covers [s_min, s_cut]; below s_min phi
                       follows its local power law.
    kind ``constant``: psi = 1 identically.
    Beyond s_cut the two-term expansion of the autonomous flow is used:
    phi = E + c2 E^2 with E = kappa (s + offset)^gprime, so that
    phi ~ kappa s^gprime as s -> infinity.
    """

    kind: str
    u0: float
    gprime: float
    ode: RadialODE | None = None
    alpha: float = 1.0
    t: np.ndarray = field(default_factory=lambda: np.zeros(0))
    y: np.ndarray = field(default_factory=lambda: np.zeros(0))
    dy: np.ndarray = field(default_factory=lambda: np.zeros(0))
    s_cut: float = math.inf
    kappa: float = 0.0

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        self.dy = np.asarray(self.dy, dtype=float)
        if self.kind == CONSTANT:
            self.mu = 0.0
            return
        if self.kind not in (SHOOTING, EXACT):
            raise ValueError(f"unknown profile kind {self.kind!r}")
        self.offset = 1.0 if self.kind == SHOOTING else 0.0
        self._spline = CubicHermiteSpline(self.t, self.y, self.dy)
        pieces = self._gl_integral(self.t[:-1], self.t[1:])
        if self.kind == EXACT:
            # near s = 0, g(psi) = p psi + const + O(1/psi), so psi = A s^p + B + ...
            self.s_min = math.exp(self.t[0])
            self.p_low = -self.ode.num[-1] / (2.0 * self.ode.den[-1])
            if not -1 < self.p_low < 0:
                raise ToleranceFailure(f"leading power {self.p_low} makes U(0) infinite")
            phi_min = math.exp(self.y[0])
            dpsi_min = phi_min * float(self.dy[0]) / self.s_min
            self.A_low = dpsi_min * self.s_min ** (1.0 - self.p_low) / self.p_low
            self.B_low = 1.0 + phi_min - self.A_low * self.s_min ** self.p_low
            m_start = float(self._low_M(self.s_min))
        else:
            m_start = 0.0
        self._c2 = self.ode.tail_c2
        self.tail_integral = (float(self._tail(np.array([self.s_cut]))[2][0])
                              if self.gprime < -1 else math.inf)
        self._M = m_start + np.concatenate([[0.0], np.cumsum(pieces)])
        self._R = self.tail_integral + np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]])
        self.mu = float(self._M[-1] + self.tail_integral)

    # -- construction helpers --
    @property
    def is_constant(self) -> bool:
        return self.kind == CONSTANT

    def _gl_integral(self, ta, tb):
        ta = np.asarray(ta, dtype=float)
        tb = np.asarray(tb, dtype=float)
        half = 0.5 * (tb - ta)
        nodes = ta[..., None] + half[..., None] * (_GL_X + 1.0)
        vals = np.exp(self._spline(nodes) + nodes)
        return half * (vals @ _GL_W)

    def _tail(self, s):
        """(phi, dphi/ds, int_s^inf phi) on the tail region."""
        g = self.gprime
        u = s + self.offset
        E = self.kappa * u ** g
        c2 = self._c2
        phi = E + c2 * E * E
        dphi = g * (E + 2 * c2 * E * E) / u
        R = u * (E / (-g - 1.0) + c2 * E * E / (-2 * g - 1.0))
        return phi, dphi, R

    def _low_phi(self, s):
        with np.errstate(divide="ignore"):
            return self.A_low * s ** self.p_low + (self.B_low - 1.0)

    def _low_M(self, s):
        return self.A_low * s ** (self.p_low + 1.0) / (self.p_low + 1.0) + (self.B_low - 1.0) * s

    def s_grid(self) -> np.ndarray:
        if self.is_constant:
            return np.zeros(0)
        return np.exp(self.t) - self.offset

    # -- pointwise evaluation (vectorised in s) --
    def _regions(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(s < 0):
            raise DomainViolation("profiles are defined for s >= 0")
        tail = s > self.s_cut
        low = (s < self.s_min) if self.kind == EXACT else np.zeros(s.shape, bool)
        mid = ~(tail | low)
        return s, tail, low, mid

    def phi(self, s):
        s = np.asarray(s, dtype=float)
        if self.is_constant:
            return np.zeros_like(s)
        s, tail, low, mid = self._regions(s)
        out = np.empty_like(s)
        out[tail] = self._tail(s[tail])[0]
        if np.any(low):
            out[low] = self._low_phi(s[low])
        out[mid] = np.exp(self._spline(np.log(s[mid] + self.offset)))
        return out

    def psi(self, s):
        return 1.0 + self.phi(s)

    def dpsi(self, s):
        """U''(s), taken from the ODE itself on the integrated range."""
        s = np.asarray(s, dtype=float)
        if self.is_constant:
            return np.zeros_like(s)
        s, tail, low, mid = self._regions(s)
        out = np.empty_like(s)
        out[tail] = self._tail(s[tail])[1]
        if np.any(low):
            with np.errstate(divide="ignore"):
                out[low] = self.A_low * self.p_low * s[low] ** (self.p_low - 1.0)
        ym = self._spline(np.log(s[mid] + self.offset))
        out[mid] = np.exp(ym) * self.ode.F(ym) / (s[mid] + self.offset)
        return out

    def radial_key(self, s):
        """U' + 2 s U'', the Hessian eigenvalue along the radial direction (per unit a)."""
        s = np.asarray(s, dtype=float)
        if self.is_constant:
            return np.ones_like(s)
        s, tail, low, mid = self._regions(s)
        out = self.psi(s) + 2.0 * s * self.dpsi(s)
        if np.any(low):
            # psi = A s^p + B gives psi + 2 s psi' = A (1 + 2p) s^p + B exactly
            with np.errstate(divide="ignore"):
                out[low] = self.A_low * (1.0 + 2.0 * self.p_low) * s[low] ** self.p_low + self.B_low
        return out

    def _M_R(self, s):
        """(int_0^s phi, int_s^inf phi) for each s."""
        s, tail, low, mid = self._regions(s)
        M = np.empty_like(s)
        R = np.empty_like(s)
        R[tail] = self._tail(s[tail])[2]
        M[tail] = self.mu - R[tail]
        if np.any(low):
            M[low] = self._low_M(s[low])
            R[low] = self.mu - M[low]
        tq = np.log(s[mid] + self.offset)
        k = np.clip(np.searchsorted(self.t, tq, side="right") - 1, 0, self.t.size - 2)
        M[mid] = self._M[k] + self._gl_integral(self.t[k], tq)
        R[mid] = self._R[k + 1] + self._gl_integral(tq, self.t[k + 1])
        return M, R

    def U(self, s):
        s = np.asarray(s, dtype=float)
        if self.is_constant:
            return self.u0 + s
        M, _ = self._M_R(s)
        return self.u0 + s + M

    def excess(self, s):
        """U(s) - s - u0 - mu = -int_s^inf (psi - 1), computed without cancellation."""
        s = np.asarray(s, dtype=float)
        if self.is_constant:
            return np.zeros_like(s)
        _, R = self._M_R(s)
        return -R

    @property
    def c(self) -> float:
        """Asymptotic constant: U(s) = s + c + o(1)."""
        return self.u0 + self.mu

    @property
    def bounded_slope(self) -> bool:
        return self.kind != EXACT

    def cone_coefficient(self) -> float:
        """lim_{s->0} psi(s) sqrt(2s), nonzero only for conical origins."""
        if self.kind != EXACT:
            return 0.0
        # psi ~ A s^(-1/2) = sqrt(2) A / |y|_a when p = -1/2
        return math.sqrt(2.0) * self.A_low if abs(self.p_low + 0.5) < 1e-12 else math.inf

    def tail_fit_window(self, s_lo: float, s_hi: float) -> tuple[float, float]:
        """Least-squares (slope, intercept) of ln phi against ln s on grid nodes in [s_lo, s_hi]."""
        s = self.s_grid()
        m = (s >= s_lo) & (s <= s_hi)
        if m.sum() < 3:
            raise DegenerateWindow(f"fewer than 3 grid points in [{s_lo}, {s_hi}]")
        slope, icpt = np.polyfit(np.log(s[m]), self.y[m], 1)
        return float(slope), float(icpt)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "u0": self.u0, "gprime": self.gprime, "alpha": self.alpha}
        if not self.is_constant:
            d.update({"num": list(self.ode.num), "den": list(self.ode.den),
                      "t": self.t.tolist(), "y": self.y.tolist(), "dy": self.dy.tolist(),
                      "s_cut": self.s_cut, "kappa": self.kappa})
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RadialProfile":
        if d["kind"] == CONSTANT:
            return cls(CONSTANT, float(d["u0"]), float(d["gprime"]), alpha=float(d["alpha"]))
        return cls(d["kind"], float(d["u0"]), float(d["gprime"]),
                   RadialODE(tuple(d["num"]), tuple(d["den"])), float(d["alpha"]),
                   np.array(d["t"]), np.array(d["y"]), np.array(d["dy"]),
                   float(d["s_cut"]), float(d["kappa"]))


class DegenerateWindow(ValueError):
    pass


def constant_profile(u0: float = 0.0, gprime: float = -1.5) -> RadialProfile:
    return RadialProfile(CONSTANT, float(u0), float(gprime))


def _uniform_grid(t0: float, t1: float, dt: float) -> np.ndarray:
    m = max(int(math.ceil(abs(t1 - t0) / dt)), 2)
    return np.linspace(t0, t1, m + 1)


def _match_kappa(ode: RadialODE, phi_cut: float, u_cut: float) -> float:
    """kappa making the tail expansion pass through phi_cut at s + offset = u_cut."""
    return ode.tail_E(phi_cut) * u_cut ** (-ode.gprime1)


def _shoot_solve(ode: RadialODE, alpha: float, controls: Controls):
    t1 = math.log1p(controls.s_tail_min)
    lnthr = math.log(controls.tail_threshold)

    def stop(t, y):
        return max(y[0] - lnthr, t1 - t)

    stop.terminal = True
    stop.direction = -1
    sol = solve_ivp(lambda t, y: [ode.F(y[0])], (0.0, t1 + 1e4), [math.log(alpha - 1.0)],
                    method="DOP853", rtol=controls.rtol, atol=controls.atol,
                    events=stop, dense_output=True)
    if sol.status != 1 or not sol.t_events[0].size:
        raise ToleranceFailure(f"forward integration failed: {sol.message}")
    return sol, float(sol.t_events[0][0])


def solve_psi(gd: GData, alpha: float, controls: Controls | None = None) -> RadialProfile:
    """Solve psi' = g(psi)/(s+1), psi(0) = alpha, and attach the power-law tail."""
    controls = controls or Controls()
    if not alpha >= 1:
        raise DomainViolation(f"alpha={alpha} < 1")
    if alpha == 1:
        return constant_profile(0.0, gd.gprime1)
    sol, t_end = _shoot_solve(gd.ode, alpha, controls)
    t = _uniform_grid(0.0, t_end, controls.grid_dt)
    y = sol.sol(t)[0]
    y[0] = math.log(alpha - 1.0)
    dy = gd.ode.F(y)
    s_cut = math.expm1(t_end)
    kappa = _match_kappa(gd.ode, math.exp(y[-1]), math.exp(t[-1]))
    return RadialProfile(SHOOTING, 0.0, gd.gprime1, gd.ode, float(alpha), t, y, dy, s_cut, kappa)


def build_profile(gd: GData, alpha: float, u0: float = 0.0,
                  controls: Controls | None = None) -> RadialProfile:
    prof = solve_psi(gd, alpha, controls)
    prof.u0 = float(u0)
    return prof


def _require_admissible(gd: GData):
    if not gd.decay.admissible:
        raise NotAdmissible(f"delta0 = {gd.delta0:.6g} <= 2: mu(alpha) diverges")


def mu(gd: GData, alpha: float, controls: Controls | None = None) -> float:
    """Total excess int_0^inf (psi(s, alpha) - 1) ds."""
    _require_admissible(gd)
    return solve_psi(gd, alpha, controls).mu


def shoot_alpha(gd: GData, target: float, controls: Controls | None = None) -> float:
    """Initial slope alpha with mu(alpha) = target (target = c - u0 >= 0)."""
    controls = controls or Controls()
    _require_admissible(gd)
    if target < 0:
        raise DomainViolation("need c >= u0")
    if target == 0:
        return 1.0
    lo, hi = 1.0, 2.0
    for _ in range(controls.max_doublings):
        if mu(gd, hi, controls) >= target:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise BracketFailure(f"mu stayed below {target} up to alpha = {hi}")

    def f(al):
        return mu(gd, al, controls) - target

    alpha = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    # brentq stops on alpha; finish with bisection on the mu residual if needed
    r = f(alpha)
    a_lo, a_hi = (alpha, hi) if r < 0 else (lo, alpha)
    while abs(r) >= controls.mu_tol and a_hi - a_lo > 4 * np.finfo(float).eps * a_hi:
        alpha = 0.5 * (a_lo + a_hi)
        r = f(alpha)
        if r < 0:
            a_lo = alpha
        else:
            a_hi = alpha
    if abs(r) >= controls.mu_tol:
        raise ToleranceFailure(f"|mu - target| = {abs(r):.3e} after bisection")
    return float(alpha)


def integrate_inward(ode: RadialODE, phi_start: float, u0: float = 0.0,
                     controls: Controls | None = None) -> RadialProfile:
    """Integrate psi' = g(psi)/s from s_max down to s_min starting at psi = 1 + phi_start."""
    controls = controls or Controls()
    if not phi_start > 0:
        raise DomainViolation("phi_start must be positive")
    t_hi, t_lo = math.log(controls.s_max), math.log(controls.s_min)
    sol = solve_ivp(lambda t, y: [ode.F(y[0])], (t_hi, t_lo), [math.log(phi_start)],
                    method="DOP853", rtol=controls.rtol, atol=controls.atol, dense_output=True)
    if sol.status != 0:
        raise ToleranceFailure(f"inward integration failed: {sol.message}")
    t = _uniform_grid(t_lo, t_hi, controls.grid_dt)
    y = sol.sol(t)[0]
    y[-1] = math.log(phi_start)
    dy = ode.F(y)
    gp = ode.gprime1
    kappa = _match_kappa(ode, phi_start, controls.s_max)
    return RadialProfile(EXACT, float(u0), gp, ode, math.inf, t, y, dy, controls.s_max, kappa)


def exact_isotropic_profile(gd: GData, kappa: float, u0: float = 0.0,
                            controls: Controls | None = None) -> RadialProfile:
    """Equality solution of G = C0 for isotropic A with tail psi ~ 1 + kappa s^g'(1)."""
    controls = controls or Controls()
    if not gd.is_isotropic:
        raise Incompatible("exact radial solutions need a multiple of the identity")
    if kappa < 0:
        raise DomainViolation("kappa must be nonnegative")
    if kappa == 0:
        return constant_profile(u0, gd.gprime1)
    return integrate_inward(gd.ode, gd.ode.tail_phi(kappa * controls.s_max ** gd.gprime1),
                            u0, controls)


def ode_residual(profile: RadialProfile, c0_form: bool = True) -> float:
    """Max normalised residual of the profile ODE at grid nodes and midpoints.

    The residual is (N(phi) + 2 D(phi) dphi/dt) / psi^n, i.e. the second-order
    radial equation divided by (U')^n, with dphi/dt taken from the Hermite
    interpolant (midpoints) or the stored slopes (nodes).
    """
    if profile.is_constant:
        return 0.0
    ode = profile.ode
    n = len(ode.num)
    mid = 0.5 * (profile.t[:-1] + profile.t[1:])
    worst = 0.0
    for y, dy in ((profile.y, profile.dy),
                  (profile._spline(mid), profile._spline(mid, 1))):
        phi = np.exp(y)
        res = 2.0 * ode.D(phi) * phi * (dy - ode.F(y)) / (1.0 + phi) ** n
        worst = max(worst, float(np.max(np.abs(res))))
    return worst


# -- tau = 0 closed form ----------------------------------------------------

@dataclass
class MAProfile:
    """U'(s) = (1 + c1 (2s)^(-n/2))^(1/n), the radial Monge-Ampere solution.

    With u(x) = U(x^T A x / 2) and det A = exp(n C0) this solves
    det D^2 u = exp(n C0) on the punctured space.
    """

    n: int
    c1: float
    u0: float = 0.0

    def __post_init__(self):
        if self.c1 < 0:
            raise DomainViolation("c1 must be nonnegative")
        self.gprime = -self.n / 2.0
        self.kind = "ma" if self.c1 > 0 else CONSTANT
        self.mu = self.c1 ** (2.0 / self.n) * _ma_unit_excess(self.n) if self.c1 > 0 else 0.0

    @property
    def is_constant(self) -> bool:
        return self.c1 == 0

    def _q(self, s):
        with np.errstate(divide="ignore", over="ignore"):
            return self.c1 * (2.0 * s) ** (-self.n / 2.0)

    def phi(self, s):
        s = np.asarray(s, dtype=float)
        if self.c1 == 0:
            return np.zeros_like(s)
        return np.expm1(np.log1p(self._q(s)) / self.n)

    def psi(self, s):
        return 1.0 + self.phi(s)

    def dpsi(self, s):
        s = np.asarray(s, dtype=float)
        if self.c1 == 0:
            return np.zeros_like(s)
        q = self._q(s)
        # d/ds (1+q)^(1/n) with dq/ds = -(n/2) q / s
        return -0.5 * (1.0 + q) ** (1.0 / self.n - 1.0) * q / s

    def radial_key(self, s):
        """U' + 2 s U'' = (1 + q)^(1/n - 1), free of the cancellation near the origin."""
        s = np.asarray(s, dtype=float)
        if self.c1 == 0:
            return np.ones_like(s)
        return (1.0 + self._q(s)) ** (1.0 / self.n - 1.0)

    def excess(self, s):
        """U(s) - s - u0 - mu = -int_{sqrt(2s)}^inf ((r^n + c1)^(1/n) - r) dr."""
        s = np.asarray(s, dtype=float)
        if self.c1 == 0:
            return np.zeros_like(s)
        out = np.array([-_ma_tail(self.n, self.c1, math.sqrt(2.0 * v)) for v in s.ravel()])
        return out.reshape(s.shape)

    def U(self, s):
        s = np.asarray(s, dtype=float)
        return self.u0 + s + self.mu + self.excess(s)

    @property
    def c(self) -> float:
        return self.u0 + self.mu

    @property
    def bounded_slope(self) -> bool:
        return self.c1 == 0

    def cone_coefficient(self) -> float:
        return self.c1 ** (1.0 / self.n)

    def to_dict(self) -> dict:
        return {"kind": "ma", "n": self.n, "c1": self.c1, "u0": self.u0}

    @classmethod
    def from_dict(cls, d: dict) -> "MAProfile":
        return cls(int(d["n"]), float(d["c1"]), float(d["u0"]))


def _ma_integrand(r, n, c1):
    # (r^n + c1)^(1/n) - r without cancellation at large r
    if r == 0:
        return c1 ** (1.0 / n)
    return r * math.expm1(math.log1p(c1 * r ** (-n)) / n)


def _ma_tail(n, c1, R):
    from scipy.integrate import quad
    if R == 0:
        return c1 ** (2.0 / n) * _ma_unit_excess(n)
    val, _ = quad(_ma_integrand, R, math.inf, args=(n, c1), epsabs=1e-15, epsrel=1e-13, limit=200)
    return val


_UNIT_EXCESS: dict[int, float] = {}


def _ma_unit_excess(n: int) -> float:
    """int_0^inf ((r^n + 1)^(1/n) - r) dr."""
    if n not in _UNIT_EXCESS:
        from scipy.integrate import quad
        v1, _ = quad(_ma_integrand, 0, 1, args=(n, 1.0), epsabs=1e-15, epsrel=1e-13)
        v2, _ = quad(_ma_integrand, 1, math.inf, args=(n, 1.0), epsabs=1e-15, epsrel=1e-13)
        _UNIT_EXCESS[n] = v1 + v2
    return _UNIT_EXCESS[n]


def ma_closed_form(n: int, C0: float, c1: float, lamA: Sequence[float],
                   u0: float = 0.0, tol: float = 1e-8) -> MAProfile:
    lam = np.asarray(lamA, dtype=float)
    if lam.size != n or not np.all(lam > 0):
        raise Incompatible("A must be positive definite of size n")
    if abs(np.mean(np.log(lam)) - C0) > tol:
        raise Incompatible(f"(1/n) sum ln lambda(A) = {np.mean(np.log(lam))!r} != C0 = {C0!r}")
    return MAProfile(n, float(c1), float(u0))
