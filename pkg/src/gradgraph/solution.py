"""Full solutions u(x) = U(1/2 (Ox)^T Lambda (Ox)) + beta.x on the punctured space."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainViolation, Incompatible, OriginHessian
from .odeflow import (Controls, GData, MAProfile, RadialProfile, build_profile,
                      constant_profile, exact_isotropic_profile, shoot_alpha)
from .operators import OperatorParams, Regime, eval_G
from .radial import eigen_rank_one

SUBSOLUTION = "Subsolution"
EXACT_ISOTROPIC = "ExactIsotropic"
EXACT_MA = "ExactMA"
QUADRATIC = "Quadratic"
KINDS = (SUBSOLUTION, EXACT_ISOTROPIC, EXACT_MA, QUADRATIC)


@dataclass(frozen=True)
class QuadraticModel:
    """Asymptote 1/2 x^T A x + beta.x + c with A = O^T diag(eigvals) O."""

    A: np.ndarray
    eigvals: np.ndarray
    O: np.ndarray
    beta: np.ndarray
    c: float
    u0: float

    def __post_init__(self):
        n = self.eigvals.size
        if self.A.shape != (n, n) or self.O.shape != (n, n) or self.beta.shape != (n,):
            raise DomainViolation("inconsistent shapes in quadratic model")
        if not np.all(self.eigvals > 0):
            raise DomainViolation("A must be positive definite")
        if np.any(np.diff(self.eigvals) < 0):
            raise DomainViolation("eigvals must be sorted ascending")
        if np.max(np.abs(self.O @ self.O.T - np.eye(n))) > 1e-12:
            raise DomainViolation("O is not orthogonal")
        scale = max(1.0, float(np.max(np.abs(self.A))))
        if np.max(np.abs(self.O.T @ np.diag(self.eigvals) @ self.O - self.A)) > 1e-12 * scale:
            raise DomainViolation("O^T Lambda O does not reconstruct A")
        if self.c < self.u0:
            raise DomainViolation(f"need c >= u0 (c={self.c}, u0={self.u0})")

    @property
    def n(self) -> int:
        return self.eigvals.size

    @classmethod
    def from_matrix(cls, A, beta=None, c: float = 0.0, u0: float = 0.0) -> "QuadraticModel":
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DomainViolation("A must be square")
        if np.max(np.abs(A - A.T)) > 1e-12 * max(1.0, np.max(np.abs(A))):
            raise DomainViolation("A must be symmetric")
        A = 0.5 * (A + A.T)
        lam, V = np.linalg.eigh(A)
        n = lam.size
        beta = np.zeros(n) if beta is None else np.asarray(beta, dtype=float)
        return cls(A, lam, V.T.copy(), beta, float(c), float(u0))

    @classmethod
    def from_eigenvalues(cls, eigvals, beta=None, c: float = 0.0, u0: float = 0.0) -> "QuadraticModel":
        lam = np.sort(np.asarray(eigvals, dtype=float))
        n = lam.size
        beta = np.zeros(n) if beta is None else np.asarray(beta, dtype=float)
        return cls(np.diag(lam), lam, np.eye(n), beta, float(c), float(u0))

    def with_constants(self, c: float, u0: float) -> "QuadraticModel":
        return QuadraticModel(self.A, self.eigvals, self.O, self.beta, float(c), float(u0))

    def quadratic(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return 0.5 * np.einsum("ij,jk,ik->i", x, self.A, x) + x @ self.beta + self.c

    def to_dict(self) -> dict:
        return {"A": self.A.tolist(), "eigvals": self.eigvals.tolist(), "O": self.O.tolist(),
                "beta": self.beta.tolist(), "c": self.c, "u0": self.u0}

    @classmethod
    def from_dict(cls, d: dict) -> "QuadraticModel":
        return cls(np.array(d["A"], dtype=float), np.array(d["eigvals"], dtype=float),
                   np.array(d["O"], dtype=float), np.array(d["beta"], dtype=float),
                   float(d["c"]), float(d["u0"]))


class Evaluation(NamedTuple):
    u: float
    Du: np.ndarray | None
    spectrum: np.ndarray | None
    s: float


@dataclass
class PuncturedSolution:
    model: QuadraticModel
    profile: RadialProfile | MAProfile
    params: OperatorParams
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown solution kind {self.kind!r}")
        if (self.kind == QUADRATIC) != self.profile.is_constant:
            raise DomainViolation("kind Quadratic must pair with a constant-slope profile")

    @property
    def n(self) -> int:
        return self.model.n

    @property
    def a(self) -> np.ndarray:
        return self.model.eigvals

    def frame(self, X) -> tuple[np.ndarray, np.ndarray]:
        """(y, s) for rows of X, with y = O x and s = 1/2 sum a_i y_i^2."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = X @ self.model.O.T
        return Y, 0.5 * (Y * Y) @ self.a

    def _U(self, s):
        # the quadratic kind stores U(s) = s + c so that u0 enters only via c
        return self.profile.U(s)

    def u(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        _, s = self.frame(X)
        return self._U(s) + X @ self.model.beta

    def gradient(self, X) -> np.ndarray:
        Y, s = self.frame(X)
        Up = self.profile.psi(s)
        if np.any((s == 0) & ~np.isfinite(Up)):
            raise OriginHessian("gradient is undefined at the conical origin")
        return (Up[:, None] * self.a * Y) @ self.model.O + self.model.beta

    def spectra(self, X) -> np.ndarray:
        """Hessian eigenvalues at each row of X (rows must avoid the origin)."""
        Y, s = self.frame(X)
        if np.any(s == 0):
            raise OriginHessian("the Hessian is not defined at x = 0")
        Up = self.profile.psi(s)
        Upp = self.profile.dpsi(s)
        factor = self.profile.radial_key(s) / Up
        out = np.empty((s.size, self.n))
        for k in range(s.size):
            out[k] = eigen_rank_one(Up[k] * self.a, self.a * Y[k], Upp[k], factor[k])
        return out

    def evaluate(self, x) -> Evaluation:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise DomainViolation(f"x must have length {self.n}")
        _, s = self.frame(x)
        u = float(self.u(x)[0])
        if s[0] == 0:
            Du = self.model.beta.copy() if self.profile.bounded_slope else None
            return Evaluation(u, Du, None, 0.0)
        return Evaluation(u, self.gradient(x)[0], self.spectra(x)[0], float(s[0]))

    def hessian_spectrum(self, x) -> np.ndarray:
        return self.spectra(np.asarray(x, dtype=float))[0]

    def origin_slope_radius(self) -> tuple[float, float] | None:
        """Range of lim |Du - beta| at the origin along directions; None if Du(0) = beta."""
        if self.profile.bounded_slope:
            return None
        L = self.profile.cone_coefficient()
        return float(L * np.sqrt(self.a[0])), float(L * np.sqrt(self.a[-1]))

    def reflect(self, x, signs) -> np.ndarray:
        signs = np.asarray(signs, dtype=float)
        if signs.shape != (self.n,) or not np.all(np.abs(signs) == 1):
            raise DomainViolation("signs must be a vector of +-1")
        O = self.model.O
        return O.T @ (signs * (O @ np.asarray(x, dtype=float)))

    def symmetry_defect(self, x) -> float:
        """max over all 2^n reflections of |(u - beta.x)(x~) - (u - beta.x)(x)|."""
        x = np.asarray(x, dtype=float)
        beta = self.model.beta
        base = float(self.u(x)[0] - beta @ x)
        pts = np.array([self.reflect(x, s) for s in itertools.product((1.0, -1.0), repeat=self.n)])
        vals = self.u(pts) - pts @ beta
        return float(np.max(np.abs(vals - base)))

    def comparison_gap(self, X) -> np.ndarray:
        """(1/2 x^T A x + beta.x + c) - u(x)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return self.model.quadratic(X) - self.u(X)

    def G_values(self, X) -> np.ndarray:
        return np.array([eval_G(self.params, lam) for lam in self.spectra(X)])

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": self.params.to_dict(),
                "model": self.model.to_dict(), "profile": self.profile.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "PuncturedSolution":
        pd = d["profile"]
        profile = MAProfile.from_dict(pd) if pd["kind"] == "ma" else RadialProfile.from_dict(pd)
        return cls(QuadraticModel.from_dict(d["model"]), profile,
                   OperatorParams.from_dict(d["params"]), d["kind"])


def check_level(params: OperatorParams, model: QuadraticModel, tol: float = 1e-8) -> None:
    level = eval_G(params, model.eigvals)
    if abs(level - params.C0) > tol:
        raise Incompatible(f"G(lambda(A)) = {level!r} but C0 = {params.C0!r}")


def quadratic_solution(params: OperatorParams, model: QuadraticModel) -> PuncturedSolution:
    check_level(params, model)
    model = model.with_constants(model.c, model.c)
    return PuncturedSolution(model, constant_profile(model.c), params, QUADRATIC)


def subsolution(params: OperatorParams, model: QuadraticModel,
                controls: Controls | None = None) -> PuncturedSolution:
    """Generalized-symmetric subsolution with u(0) = u0 and asymptote constant c."""
    check_level(params, model)
    gd = GData.build(params, model.eigvals)
    alpha = shoot_alpha(gd, model.c - model.u0, controls)
    if alpha == 1.0:
        return PuncturedSolution(model, constant_profile(model.u0, gd.gprime1), params, QUADRATIC)
    prof = build_profile(gd, alpha, model.u0, controls)
    return PuncturedSolution(model, prof, params, SUBSOLUTION)


def exact_isotropic_solution(params: OperatorParams, eigvals: Sequence[float], kappa: float,
                             u0: float = 0.0, beta=None, O=None,
                             controls: Controls | None = None) -> PuncturedSolution:
    """Equality solution for A = a I; c is determined by kappa and u0."""
    lam = np.sort(np.asarray(eigvals, dtype=float))
    gd = GData.build(params, lam)
    prof = exact_isotropic_profile(gd, kappa, u0, controls)
    model = _model(lam, beta, prof.c, u0, O)
    check_level(params, model)
    kind = QUADRATIC if prof.is_constant else EXACT_ISOTROPIC
    return PuncturedSolution(model, prof, params, kind)


def exact_ma_solution(params: OperatorParams, A, c1: float, u0: float = 0.0,
                      beta=None) -> PuncturedSolution:
    """u = u0 + int_0^{sqrt(x^T A x)} (r^n + c1)^(1/n) dr + beta.x, det D^2 u = exp(n C0)."""
    if params.regime is not Regime.MA:
        raise Incompatible("exact_ma_solution needs the MA regime")
    A = np.asarray(A, dtype=float)
    base = (QuadraticModel.from_eigenvalues(A, beta) if A.ndim == 1
            else QuadraticModel.from_matrix(A, beta))
    check_level(params, base)
    prof = MAProfile(params.n, float(c1), float(u0))
    model = base.with_constants(prof.c, u0)
    kind = QUADRATIC if prof.is_constant else EXACT_MA
    if prof.is_constant:
        prof = constant_profile(u0, -params.n / 2.0)
    return PuncturedSolution(model, prof, params, kind)


def _model(lam, beta, c, u0, O=None) -> QuadraticModel:
    if O is None:
        return QuadraticModel.from_eigenvalues(lam, beta, c, u0)
    O = np.asarray(O, dtype=float)
    A = O.T @ np.diag(lam) @ O
    A = 0.5 * (A + A.T)
    n = lam.size
    beta = np.zeros(n) if beta is None else np.asarray(beta, dtype=float)
    return QuadraticModel(A, lam, O, beta, float(c), float(u0))


def with_rotation(sol: PuncturedSolution, O) -> PuncturedSolution:
    """Same profile and eigenvalues, asymptote matrix O^T Lambda O."""
    m = sol.model
    return PuncturedSolution(_model(m.eigvals, m.beta, m.c, m.u0, O), sol.profile, sol.params, sol.kind)
