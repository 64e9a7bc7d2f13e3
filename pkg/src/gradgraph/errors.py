"""Exception types raised across the package."""


class GradGraphError(Exception):
    """Base class for all package errors."""


class DomainViolation(GradGraphError, ValueError):
    """An eigenvalue or argument lies outside the domain of a formula."""


class RegimeMismatch(GradGraphError, ValueError):
    """The operation is not defined for the requested operator regime."""


class Unattainable(GradGraphError, ValueError):
    """The operator level cannot be reached on the isotropic diagonal."""


class Unsupported(GradGraphError, NotImplementedError):
    """The regime is routed to external theory and not computed here."""


class NotAdmissible(GradGraphError, ValueError):
    """The decay exponent does not exceed 2, so the construction diverges."""


class ToleranceFailure(GradGraphError, RuntimeError):
    """Step control could not meet the requested accuracy."""


class BracketFailure(GradGraphError, RuntimeError):
    """Bracket expansion exceeded its configured cap."""


class OriginHessian(GradGraphError, ValueError):
    """The Hessian was requested at the puncture."""


class Incompatible(GradGraphError, ValueError):
    """Inputs are mutually inconsistent (e.g. A does not match the level)."""


class DegenerateFit(GradGraphError, ValueError):
    """A log-log fit was requested on data that vanishes identically."""
