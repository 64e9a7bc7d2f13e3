"""Generalized-symmetric solutions of the G_tau Hessian equations on punctured space."""
from .errors import (BracketFailure, DegenerateFit, DomainViolation, GradGraphError,
                     Incompatible, NotAdmissible, OriginHessian, RegimeMismatch,
                     ToleranceFailure, Unattainable, Unsupported)
from .odeflow import (Controls, GData, MAProfile, RadialProfile, build_profile,
                      exact_isotropic_profile, g_eval, ma_closed_form, mu, shoot_alpha,
                      solve_psi)
from .operators import (OperatorParams, Regime, eval_F, eval_G, isotropic_report,
                        isotropic_root, translate_spectrum)
from .radial import RadialFrame, eigen_rank_one, sigma_k_profile, sigma_n_shifted
from .solution import (PuncturedSolution, QuadraticModel, exact_isotropic_solution,
                       exact_ma_solution, quadratic_solution, subsolution)
from .sympoly import delta0, sigma, sigma_table, xi_bounds
from .verify import VerificationReport, rigidity_probe, verify_solution

__version__ = "0.1.0"

__all__ = [
    "BracketFailure", "DegenerateFit", "DomainViolation", "GradGraphError", "Incompatible",
    "NotAdmissible", "OriginHessian", "RegimeMismatch", "ToleranceFailure", "Unattainable",
    "Unsupported",
    "Controls", "GData", "MAProfile", "RadialProfile", "build_profile", "exact_isotropic_profile",
    "g_eval", "ma_closed_form", "mu", "shoot_alpha", "solve_psi",
    "OperatorParams", "Regime", "eval_F", "eval_G", "isotropic_report", "isotropic_root",
    "translate_spectrum",
    "RadialFrame", "eigen_rank_one", "sigma_k_profile", "sigma_n_shifted",
    "PuncturedSolution", "QuadraticModel", "exact_isotropic_solution", "exact_ma_solution",
    "quadratic_solution", "subsolution",
    "delta0", "sigma", "sigma_table", "xi_bounds",
    "VerificationReport", "rigidity_probe", "verify_solution",
]
