"""Exception types raised by the converter library."""


class DbsrcError(Exception):
    """Base class for all library errors."""


class DegenerateTankCurrentError(DbsrcError):
    """Harmonic coefficients collapsed (A = B = 0): alignment undefined."""


class BelowResonanceError(DbsrcError):
    """Requested frequency gives Z(omega) <= 0; the control laws assume
    inductive (above-resonance) operation."""


class InfeasibleReferenceError(DbsrcError):
    """The requested alignment angles are not achievable at this gain."""


class ZeroPowerReferenceError(DbsrcError):
    """W* = 0 has no finite required impedance; use the low-power path."""


class UnreachablePowerError(DbsrcError):
    """No short-time in [0, pi] meets the power request under omega_max."""


class UndefinedAtUnityGainError(DbsrcError):
    """The linearized inverse map is singular at G = 1."""
