"""Viscosity laws obeying the Bresch-Desjardins relation.

A law carries the shear viscosity ``mu``, the bulk coefficient
``lam = 2 rho mu' - 2 mu`` and the derived scalar functions used by the
quasi-solution machinery:

* ``phi`` with ``phi'(rho) = 2 mu'(rho) / rho`` (the velocity potential,
  ``u = -grad phi(rho)``),
* ``f`` with ``f'(rho) = sqrt(rho) phi'(rho)``,
* ``psi``, the primitive of ``mu`` vanishing at 0.

Power laws ``mu(rho) = mu_c rho**alpha`` get closed forms.  General monotone
laws are given by ``mu`` and ``mu'`` and the rest is obtained by quadrature.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate

from .errors import DegenerateLame, DomainError, VacuumSingular

__all__ = [
    "LawKind",
    "ViscosityLaw",
    "LawValues",
    "ConditionReport",
    "make_power_law",
    "make_general_law",
    "eval_law",
    "check_conditions",
    "lame_constant",
]

_QUAD_ABSTOL = 1e-10
_CHECK_RTOL = 1e-12


class LawKind(enum.Enum):
    POWER = "power"
    GENERAL = "general"


def lame_constant(alpha: float, dim: int) -> float:
    """nu1 = nu2 = 2(1 + N(alpha - 1)) for a power law."""
    return 2.0 * (1.0 + dim * (alpha - 1.0))


@dataclass(frozen=True)
class ViscosityLaw:
    """Immutable viscosity law.

    Construct through :func:`make_power_law` or :func:`make_general_law`;
    the bare constructor skips the Lame admissibility check so that laws in
    the extinction regime can still be evaluated by the exact solutions.
    """

    kind: LawKind
    mu_c: float = 1.0
    alpha: float = 1.0
    dim: int = 1
    nu1: float = 2.0
    nu2: float = 2.0
    mu_fn: Optional[Callable[[float], float]] = field(default=None, compare=False)
    mu_prime_fn: Optional[Callable[[float], float]] = field(default=None, compare=False)
    lambda_fn: Optional[Callable[[float], float]] = field(default=None, compare=False)
    base_point: float = 1.0
    vacuum_threshold: float = 1e-10

    @property
    def is_power(self) -> bool:
        return self.kind is LawKind.POWER

    # -- primary coefficients -------------------------------------------------

    def mu(self, rho):
        if self.is_power:
            return self.mu_c * np.power(rho, self.alpha)
        return _apply(self.mu_fn, rho)

    def mu_prime(self, rho):
        if self.is_power:
            if self.alpha == 1.0:
                return self.mu_c * np.ones_like(np.asarray(rho, dtype=float))[()]
            return self.alpha * self.mu_c * np.power(rho, self.alpha - 1.0)
        return _apply(self.mu_prime_fn, rho)

    def lam(self, rho):
        if self.lambda_fn is not None:
            return _apply(self.lambda_fn, rho)
        if self.is_power:
            return 2.0 * (self.alpha - 1.0) * self.mu_c * np.power(rho, self.alpha)
        rho = np.asarray(rho, dtype=float)
        return (2.0 * rho * self.mu_prime(rho) - 2.0 * self.mu(rho))[()]

    def lam_prime(self, rho, h: float = 1e-6):
        if self.is_power and self.lambda_fn is None:
            if self.alpha == 1.0:
                return np.zeros_like(np.asarray(rho, dtype=float))[()]
            return 2.0 * (self.alpha - 1.0) * self.alpha * self.mu_c * np.power(rho, self.alpha - 1.0)
        rho = np.asarray(rho, dtype=float)
        step = h * np.maximum(rho, 1e-8)
        return ((self.lam(rho + step) - self.lam(rho - step)) / (2.0 * step))[()]

    # -- derived potentials -----------------------------------------------------

    def phi_prime(self, rho):
        rho = np.asarray(rho, dtype=float)
        if self.is_power:
            if self.alpha < 2.0 and np.any(rho <= 0.0):
                raise VacuumSingular("phi' is singular at rho = 0 for alpha < 2")
            return (2.0 * self.alpha * self.mu_c * np.power(rho, self.alpha - 2.0))[()]
        if np.any(rho <= 0.0):
            raise VacuumSingular("phi' is not available on vacuum for a general law")
        return (2.0 * self.mu_prime(rho) / rho)[()]

    def phi(self, rho):
        rho = np.asarray(rho, dtype=float)
        _check_nonnegative(rho)
        if self.is_power:
            a = self.alpha
            if a <= 1.0 and np.any(rho == 0.0):
                raise VacuumSingular("phi(0) is undefined for alpha <= 1")
            if a == 1.0:
                return (2.0 * self.mu_c * np.log(rho))[()]
            return (2.0 * self.mu_c * a / (a - 1.0) * np.power(rho, a - 1.0))[()]
        if np.any(rho == 0.0):
            raise VacuumSingular("phi(0) is not available for a general law")
        return _quad_from(self.phi_prime, self.base_point, rho)

    def f(self, rho):
        rho = np.asarray(rho, dtype=float)
        _check_nonnegative(rho)
        if self.is_power:
            a = self.alpha
            if a <= 0.5 and np.any(rho == 0.0):
                raise VacuumSingular("f(0) is undefined for alpha <= 1/2")
            if a == 0.5:
                return (2.0 * self.mu_c * a * np.log(rho))[()]
            return (2.0 * self.mu_c * a * np.power(rho, a - 0.5) / (a - 0.5))[()]
        if np.any(rho == 0.0):
            raise VacuumSingular("f(0) is not available for a general law")
        return _quad_from(lambda s: 2.0 * self.mu_prime(s) / np.sqrt(s), self.base_point, rho)

    def psi(self, rho):
        rho = np.asarray(rho, dtype=float)
        _check_nonnegative(rho)
        if self.is_power:
            a = self.alpha
            return (self.mu_c * np.power(rho, a + 1.0) / (a + 1.0))[()]
        return _quad_from(self.mu, 0.0, rho)

    def lame_combination(self, rho):
        """2 mu + N lambda."""
        return 2.0 * self.mu(rho) + self.dim * self.lam(rho)


def _apply(fn, rho):
    arr = np.asarray(rho, dtype=float)
    out = fn(arr)
    out = np.asarray(out, dtype=float)
    if out.shape != arr.shape:
        out = np.vectorize(lambda s: float(fn(float(s))))(arr)
    return out[()]


def _check_nonnegative(rho):
    if np.any(rho < 0.0):
        raise DomainError("density must be nonnegative")


def _quad_from(integrand, base: float, rho):
    def one(r):
        value, _ = integrate.quad(lambda s: float(integrand(s)), base, float(r),
                                  epsabs=_QUAD_ABSTOL, limit=200)
        return value

    arr = np.asarray(rho, dtype=float)
    return np.vectorize(one, otypes=[float])(arr)[()]


def make_power_law(mu_c: float, alpha: float, dim: int,
                   vacuum_threshold: float = 1e-10) -> ViscosityLaw:
    """Build ``mu(rho) = mu_c rho**alpha`` with its BD partner ``lambda``.

    Raises :class:`DegenerateLame` unless ``alpha > 1 - 1/dim``.
    """
    if not mu_c > 0.0:
        raise DomainError(f"mu_c must be positive, got {mu_c}")
    if int(dim) != dim or dim < 1:
        raise DomainError(f"dim must be a positive integer, got {dim}")
    dim = int(dim)
    if not alpha > 1.0 - 1.0 / dim:
        raise DegenerateLame(
            f"alpha = {alpha} violates alpha > 1 - 1/N = {1.0 - 1.0 / dim} for N = {dim}"
        )
    nu = lame_constant(alpha, dim)
    return ViscosityLaw(LawKind.POWER, mu_c=float(mu_c), alpha=float(alpha), dim=dim,
                        nu1=nu, nu2=nu, vacuum_threshold=vacuum_threshold)


def make_general_law(mu_fn, mu_prime_fn, dim: int, nu1: float, nu2: float,
                     base_point: float = 1.0, lambda_fn=None) -> ViscosityLaw:
    """General increasing ``mu`` with ``mu(0) = 0``; potentials by quadrature."""
    if nu1 <= 0.0 or nu2 <= 0.0:
        raise DomainError("nu1 and nu2 must be positive")
    if abs(float(mu_fn(0.0))) > 0.0:
        raise DomainError("a general law needs mu(0) = 0")
    return ViscosityLaw(LawKind.GENERAL, dim=int(dim), nu1=float(nu1), nu2=float(nu2),
                        mu_fn=mu_fn, mu_prime_fn=mu_prime_fn, lambda_fn=lambda_fn,
                        base_point=float(base_point))


@dataclass(frozen=True)
class LawValues:
    mu: float
    lambda_: float
    mu_prime: float
    phi: float
    f: float
    psi: float


def eval_law(law: ViscosityLaw, rho: float) -> LawValues:
    """All scalar coefficients of ``law`` at one density."""
    rho = float(rho)
    if rho < 0.0:
        raise DomainError(f"density must be nonnegative, got {rho}")
    if rho == 0.0 and (not law.is_power or law.alpha <= 1.0):
        raise VacuumSingular("phi is singular on vacuum for alpha <= 1")
    try:
        fval = float(law.f(rho))
    except VacuumSingular:
        fval = float("-inf")
    return LawValues(
        mu=float(law.mu(rho)),
        lambda_=float(law.lam(rho)),
        mu_prime=float(law.mu_prime(rho)),
        phi=float(law.phi(rho)),
        f=fval,
        psi=float(law.psi(rho)),
    )


@dataclass
class ConditionReport:
    """Per-sample verdicts for the structural viscosity conditions.

    ``lambda_prime_nu`` is the best constant ``c`` with ``|lambda'| <= mu'/c``
    on the samples; ``lambda_prime_with_nu1`` repeats that bound with the
    law's own ``nu1`` and is informational only (it fails for power laws
    whenever ``nu1 = 2(1 + N(alpha - 1))`` and ``alpha != 1``).
    """

    samples: np.ndarray
    bd_relation: np.ndarray
    lame_lower: np.ndarray
    lame_upper: np.ndarray
    log_derivative_lower: np.ndarray
    log_derivative_upper: np.ndarray
    power_bounds: np.ndarray  # shape (n, 4): lower/upper for rho > 1, lower/upper for rho <= 1
    monotone: np.ndarray
    lambda_prime_nu: float
    lambda_prime_with_nu1: np.ndarray
    power_constant: float
    linear_growth_constant: float
    linear_growth: bool

    @property
    def passed(self) -> bool:
        return bool(
            self.bd_relation.all()
            and self.lame_lower.all()
            and self.lame_upper.all()
            and self.log_derivative_lower.all()
            and self.log_derivative_upper.all()
            and self.power_bounds.all()
            and self.monotone.all()
            and self.lambda_prime_nu > 0.0
            and self.linear_growth
        )


def _le(a, b):
    return a <= b + _CHECK_RTOL * np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))


def check_conditions(law: ViscosityLaw, rho_samples: Sequence[float]) -> ConditionReport:
    """Check the BD relation, the Lame bounds and the induced power bounds."""
    rho = np.asarray(list(rho_samples), dtype=float)
    if rho.size == 0:
        raise DomainError("need at least one sample")
    if np.any(rho <= 0.0):
        raise DomainError("samples must be positive")
    N = law.dim
    mu = np.asarray(law.mu(rho), dtype=float)
    mup = np.asarray(law.mu_prime(rho), dtype=float)
    lam = np.asarray(law.lam(rho), dtype=float)
    bd_expected = 2.0 * rho * mup - 2.0 * mu
    bd_ok = np.abs(lam - bd_expected) <= 1e-12 * np.maximum(1.0, np.abs(lam))

    lame = 2.0 * mu + N * lam
    lame_lo = _le(law.nu1 * mu, lame)
    lame_hi = _le(lame, law.nu2 * mu)

    logd = rho * mup / mu
    lo_exp = (N - 1.0 + law.nu1 / 2.0) / N
    hi_exp = (N - 1.0 + law.nu2 / 2.0) / N
    logd_lo = _le(lo_exp, logd)
    logd_hi = _le(logd, hi_exp)

    # integrating the log-derivative bounds from rho = 1 anchors the constant at mu(1)
    c1 = float(law.mu(1.0))
    a1 = 1.0 - 1.0 / N + law.nu1 / (2.0 * N)
    a2 = 1.0 - 1.0 / N + law.nu2 / (2.0 * N)
    big = rho > 1.0
    bounds = np.ones((rho.size, 4), dtype=bool)
    bounds[big, 0] = _le(c1 * rho[big] ** a1, mu[big])
    bounds[big, 1] = _le(mu[big], c1 * rho[big] ** a2)
    bounds[~big, 2] = _le(c1 * rho[~big] ** a2, mu[~big])
    bounds[~big, 3] = _le(mu[~big], c1 * rho[~big] ** a1)

    order = np.argsort(rho)
    mono = mup > 0.0
    mono[order[1:]] &= np.diff(mu[order]) > 0.0

    lp = np.abs(np.asarray(law.lam_prime(rho), dtype=float))
    with np.errstate(divide="ignore"):
        ratios = np.where(lp > 0.0, mup / np.where(lp > 0.0, lp, 1.0), np.inf)
    lp_nu = float(np.min(ratios))
    lp_nu1 = _le(lp, mup / law.nu1)

    growth_samples = rho[rho >= 1.0]
    if growth_samples.size:
        c_lin = float(np.min(np.asarray(law.mu(growth_samples)) / growth_samples))
    else:
        c_lin = float(law.mu(1.0))
    return ConditionReport(
        samples=rho,
        bd_relation=bd_ok,
        lame_lower=lame_lo,
        lame_upper=lame_hi,
        log_derivative_lower=np.broadcast_to(logd_lo, rho.shape).copy(),
        log_derivative_upper=np.broadcast_to(logd_hi, rho.shape).copy(),
        power_bounds=bounds,
        monotone=mono,
        lambda_prime_nu=lp_nu,
        lambda_prime_with_nu1=lp_nu1,
        power_constant=c1,
        linear_growth_constant=c_lin,
        linear_growth=bool(c_lin > 0.0 and math.isfinite(c_lin)),
    )
