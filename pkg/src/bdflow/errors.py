"""Exception hierarchy shared by every module."""


class BdflowError(Exception):
    """Base class for all errors raised by the package."""


class DomainError(BdflowError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateLame(DomainError):
    """Power-law viscosity with alpha <= 1 - 1/N (Lame combination not positive)."""


class VacuumSingular(DomainError):
    """A vacuum-singular quantity (phi for alpha <= 1) was requested at rho = 0."""


class ExtinctionRegime(DomainError):
    """Fast-diffusion exponent at or below the critical value m_c."""


class NoScalingInvariance(DomainError):
    """theta == gamma: the Navier-Stokes system has no scaling invariance."""


class UnsupportedRegime(DomainError):
    """Operation not defined for the requested regime."""


class StabilityViolation(BdflowError):
    """Explicit time step exceeds the stability bound."""


class NumericalBlowup(BdflowError):
    """NaN or infinite value detected during time stepping."""


class InconsistentTriple(BdflowError):
    """Snapshot triple is unevenly spaced or has non-quasi velocities."""


class GridMismatch(BdflowError, ValueError):
    """Two fields live on different grids."""


class ConfigError(BdflowError):
    """Configuration text could not be parsed or validated."""

    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class ConfigSyntaxError(ConfigError):
    pass


class ConfigSemanticError(ConfigError):
    def __init__(self, message, key=None, line=None, cause=None):
        self.cause = cause
        super().__init__(message, line=line, key=key)


class ConfigRegimeError(ConfigSemanticError, ExtinctionRegime):
    """Config asks the solver for an exponent inside the extinction regime."""
