"""Closed-form solutions of d_t rho = 2 Delta mu(rho) and scaling exponents.

All self-similar formulas are written for the normalised equation
``d_t U = Delta U**alpha``; a coefficient ``mu_c`` enters through the exact
time rescale ``t -> 2 mu_c t``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import integrate, optimize

from .discrete import DensityField, Grid, flux_laplacian, gradient
from .errors import DomainError, ExtinctionRegime, NoScalingInvariance, UnsupportedRegime
from .viscosity import LawKind, ViscosityLaw

__all__ = [
    "critical_exponent",
    "ExponentSet",
    "pme_exponents",
    "Regime",
    "BarenblattSolution",
    "HeatKernel",
    "ExtinctionSolution",
    "make_barenblatt",
    "SimilarityExponents",
    "similarity_exponents_cns",
    "pde_residual_of_exact",
    "profile_residual",
    "sphere_area",
]


def critical_exponent(dim: int) -> float:
    """m_c = max(0, (N - 2)/N)."""
    return max(0.0, (dim - 2.0) / dim)


def sphere_area(dim: int) -> float:
    """Surface measure of the unit sphere in R^N (2 for N = 1)."""
    return 2.0 * math.pi ** (dim / 2.0) / math.gamma(dim / 2.0)


@dataclass(frozen=True)
class ExponentSet:
    alpha: float
    dim: int
    gamma1: float
    beta_space: float
    sigma_mass: float
    m_c: float

    def _denominator(self) -> float:
        return self.dim * (self.alpha - 1.0) + 2.0

    def time_exp(self, p: float) -> float:
        """Decay exponent of ||rho(t)||_p: N(p-1) / ((N(alpha-1)+2) p)."""
        if p < 1.0:
            raise DomainError("p must be >= 1")
        if math.isinf(p):
            return self.gamma1
        return self.dim * (p - 1.0) / (self._denominator() * p)

    def mass_exp(self, p: float) -> float:
        """Power of ||rho_0||_1 in the L^1-L^p smoothing bound."""
        if p < 1.0:
            raise DomainError("p must be >= 1")
        if math.isinf(p):
            return self.sigma_mass
        return (self.dim * (self.alpha - 1.0) + 2.0 * p) / (self._denominator() * p)


def pme_exponents(alpha: float, dim: int) -> ExponentSet:
    if dim < 1:
        raise DomainError("dim must be >= 1")
    mc = critical_exponent(dim)
    if not alpha > mc:
        raise ExtinctionRegime(
            f"alpha = {alpha} <= m_c = {mc}: solutions can vanish in finite time; "
            "use ExtinctionSolution"
        )
    den = dim * (alpha - 1.0) + 2.0
    return ExponentSet(alpha=float(alpha), dim=int(dim), gamma1=dim / den,
                       beta_space=1.0 / den, sigma_mass=2.0 / den, m_c=mc)


class Regime(enum.Enum):
    POROUS = "porous"
    FAST = "fast"
    HEAT = "heat"


@dataclass(frozen=True)
class BarenblattSolution:
    """Source-type solution U(t, x) = T^-gamma1 F(x T^-beta) with T = 2 mu_c t."""

    regime: Regime
    alpha: float
    dim: int
    C: float
    mass: float
    mu_c: float
    k: float

    @property
    def exponents(self) -> ExponentSet:
        return pme_exponents(self.alpha, self.dim)

    def _scaled_time(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0.0):
            raise DomainError("Barenblatt solutions are evaluated at t > 0")
        return 2.0 * self.mu_c * t

    def profile(self, xi_radius):
        """F as a function of |xi|."""
        r2 = np.asarray(xi_radius, dtype=float) ** 2
        if self.regime is Regime.POROUS:
            base = np.maximum(self.C - self.k * r2, 0.0)
            return np.power(base, 1.0 / (self.alpha - 1.0))
        return np.power(self.C + self.k * r2, -1.0 / (1.0 - self.alpha))

    def profile_derivative(self, xi_radius):
        """d/dr of F at |xi| = r (zero outside the porous support)."""
        r = np.asarray(xi_radius, dtype=float)
        if self.regime is Regime.POROUS:
            m = 1.0 / (self.alpha - 1.0)
            base = self.C - self.k * r * r
            inside = base > 0.0
            safe = np.where(inside, base, 1.0)
            return np.where(inside, m * np.power(safe, m - 1.0) * (-2.0 * self.k * r), 0.0)
        n = 1.0 / (1.0 - self.alpha)
        return -n * np.power(self.C + self.k * r * r, -n - 1.0) * 2.0 * self.k * r

    def eval_radial(self, t, r):
        ex = self.exponents
        T = self._scaled_time(t)
        return np.power(T, -ex.gamma1) * self.profile(np.asarray(r) * np.power(T, -ex.beta_space))

    def eval(self, t, *coords):
        r = np.sqrt(sum(np.asarray(c, dtype=float) ** 2 for c in coords))
        return self.eval_radial(t, r)

    def time_derivative_radial(self, t, r):
        ex = self.exponents
        T = self._scaled_time(t)
        xi = np.asarray(r, dtype=float) * np.power(T, -ex.beta_space)
        F = self.profile(xi)
        dF = self.profile_derivative(xi)
        return 2.0 * self.mu_c * (-np.power(T, -ex.gamma1 - 1.0)) * (ex.gamma1 * F + ex.beta_space * xi * dF)

    def gradient_radial(self, t, r):
        """d/dr of U(t, r)."""
        ex = self.exponents
        T = self._scaled_time(t)
        xi = np.asarray(r, dtype=float) * np.power(T, -ex.beta_space)
        return np.power(T, -ex.gamma1 - ex.beta_space) * self.profile_derivative(xi)

    def support_radius(self, t) -> float:
        if self.regime is not Regime.POROUS:
            return math.inf
        T = float(self._scaled_time(t))
        return math.sqrt(self.C / self.k) * T ** self.exponents.beta_space

    def sample(self, grid: Grid, t: float, center=None) -> DensityField:
        return DensityField(grid, self.eval_radial(t, grid.radius(center)), t)


@dataclass(frozen=True)
class HeatKernel:
    """Gaussian of mass m solving d_t rho = 2 mu_c Delta rho."""

    mass: float
    dim: int
    mu_c: float
    alpha: float = 1.0
    regime: Regime = Regime.HEAT

    @property
    def diffusivity(self) -> float:
        return 2.0 * self.mu_c

    def eval_radial(self, t, r):
        t = np.asarray(t, dtype=float)
        D = self.diffusivity
        r = np.asarray(r, dtype=float)
        return self.mass * np.power(4.0 * math.pi * D * t, -self.dim / 2.0) * np.exp(-r * r / (4.0 * D * t))

    def eval(self, t, *coords):
        r = np.sqrt(sum(np.asarray(c, dtype=float) ** 2 for c in coords))
        return self.eval_radial(t, r)

    def time_derivative_radial(self, t, r):
        D = self.diffusivity
        r = np.asarray(r, dtype=float)
        return self.eval_radial(t, r) * (-self.dim / (2.0 * t) + r * r / (4.0 * D * t * t))

    def gradient_radial(self, t, r):
        r = np.asarray(r, dtype=float)
        return self.eval_radial(t, r) * (-r / (2.0 * self.diffusivity * t))

    def support_radius(self, t) -> float:
        return math.inf

    def sample(self, grid: Grid, t: float, center=None) -> DensityField:
        return DensityField(grid, self.eval_radial(t, grid.radius(center)), t)


@dataclass(frozen=True)
class ExtinctionSolution:
    """rho = c ((T - t)/|x|^2)^(1/(1-alpha)), vanishing at t = T.

    Solves ``d_t rho = 2 mu_c Delta rho**alpha`` when
    ``c**(1-alpha) = 4 mu_c alpha (N - 2/(1-alpha))``.  The default
    ``mu_c = 1/(2 alpha)`` makes this ``2 (N - 2/(1-alpha))``.
    """

    alpha: float
    dim: int
    T: float
    mu_c: float
    c_alpha: float

    @classmethod
    def create(cls, alpha: float, dim: int, T: float, mu_c: Optional[float] = None) -> "ExtinctionSolution":
        mc = critical_exponent(dim)
        if not (0.0 < alpha < mc):
            raise DomainError(f"extinction profile needs 0 < alpha < m_c = {mc}")
        if not T > 0.0:
            raise DomainError("extinction time must be positive")
        if mu_c is None:
            mu_c = 1.0 / (2.0 * alpha)
        base = 4.0 * mu_c * alpha * (dim - 2.0 / (1.0 - alpha))
        return cls(float(alpha), int(dim), float(T), float(mu_c), base ** (1.0 / (1.0 - alpha)))

    def _check_time(self, t):
        if np.any(np.asarray(t) >= self.T):
            raise DomainError("the extinction profile is identically zero for t >= T")

    def eval_radial(self, t, r):
        self._check_time(t)
        r = np.asarray(r, dtype=float)
        return self.c_alpha * np.power((self.T - t) / (r * r), 1.0 / (1.0 - self.alpha))

    def eval(self, t, *coords):
        r = np.sqrt(sum(np.asarray(c, dtype=float) ** 2 for c in coords))
        return self.eval_radial(t, r)

    def time_derivative_radial(self, t, r):
        self._check_time(t)
        n = 1.0 / (1.0 - self.alpha)
        return -n * self.eval_radial(t, r) / (self.T - t)

    def law(self) -> ViscosityLaw:
        """The (Lame-inadmissible) power law this profile solves."""
        return ViscosityLaw(LawKind.POWER, mu_c=self.mu_c, alpha=self.alpha, dim=self.dim,
                            nu1=1.0, nu2=1.0)


ExactSolution = Union[BarenblattSolution, HeatKernel, ExtinctionSolution]


def _porous_k(alpha: float, dim: int) -> float:
    return (alpha - 1.0) * pme_exponents(alpha, dim).gamma1 / (2.0 * alpha * dim)


def _fast_kappa(alpha: float, dim: int) -> float:
    return (1.0 - alpha) * pme_exponents(alpha, dim).gamma1 / (2.0 * dim * alpha)


def _profile_mass(regime: Regime, alpha: float, dim: int, C: float, k: float) -> float:
    omega = sphere_area(dim)
    if regime is Regime.POROUS:
        m = 1.0 / (alpha - 1.0)
        R = math.sqrt(C / k)
        val, _ = integrate.quad(lambda r: (C - k * r * r) ** m * r ** (dim - 1), 0.0, R,
                                epsabs=0.0, epsrel=1e-13, limit=400)
    else:
        n = 1.0 / (1.0 - alpha)
        val, _ = integrate.quad(lambda r: (C + k * r * r) ** (-n) * r ** (dim - 1), 0.0, np.inf,
                                epsabs=0.0, epsrel=1e-13, limit=400)
    return omega * val


def make_barenblatt(alpha: float, dim: int, mu_c: float = 0.5, *, mass: Optional[float] = None,
                    C: Optional[float] = None):
    """Barenblatt profile fixed by either its ``mass`` or its constant ``C``.

    ``alpha == 1`` returns the Gaussian heat kernel with the given mass.
    """
    if (mass is None) == (C is None):
        raise DomainError("give exactly one of mass= or C=")
    if not mu_c > 0.0:
        raise DomainError("mu_c must be positive")
    given = mass if mass is not None else C
    if not given > 0.0:
        raise DomainError("mass and C must be positive")
    if alpha == 1.0:
        if mass is None:
            raise DomainError("the heat kernel is fixed by its mass")
        return HeatKernel(float(mass), int(dim), float(mu_c))
    pme_exponents(alpha, dim)  # raises in the extinction regime
    if alpha > 1.0:
        regime, k = Regime.POROUS, _porous_k(alpha, dim)
    else:
        regime, k = Regime.FAST, _fast_kappa(alpha, dim)
    if C is not None:
        return BarenblattSolution(regime, float(alpha), int(dim), float(C),
                                  _profile_mass(regime, alpha, dim, C, k), float(mu_c), k)
    target = math.log(mass)

    def gap(logc):
        return math.log(_profile_mass(regime, alpha, dim, math.exp(logc), k)) - target

    lo, hi = -1.0, 1.0
    while gap(lo) * gap(hi) > 0.0:
        lo -= 4.0
        hi += 4.0
        if hi > 700.0:
            raise DomainError("could not bracket the Barenblatt constant")
    logc = optimize.bisect(gap, lo, hi, xtol=1e-12, rtol=1e-12, maxiter=400)
    Cval = math.exp(logc)
    return BarenblattSolution(regime, float(alpha), int(dim), Cval,
                              _profile_mass(regime, alpha, dim, Cval, k), float(mu_c), k)


@dataclass(frozen=True)
class SimilarityExponents:
    theta: float
    gamma: float
    e_rho: float
    e_u: float
    e_x: float


def similarity_exponents_cns(theta: float, gamma: float) -> SimilarityExponents:
    """Scaling exponents (density, velocity, space) of the Navier-Stokes system."""
    if theta == gamma:
        raise NoScalingInvariance("theta == gamma: the system has no scaling invariance")
    d = theta - gamma
    e_rho = -1.0 / d
    e_u = (1.0 - gamma) / (2.0 * d)
    e_x = (2.0 * theta - gamma - 1.0) / (2.0 * d)
    assert abs(e_u + e_x - 1.0) <= 1e-12 * max(1.0, abs(e_u), abs(e_x))
    return SimilarityExponents(float(theta), float(gamma), e_rho, e_u, e_x)


def _radial_laplacian(g_of_r, r: np.ndarray, h: float, dim: int) -> np.ndarray:
    """Conservative radial Laplacian r^(1-N) d/dr (r^(N-1) dg/dr); ghosts sampled exactly."""
    gc = g_of_r(r)
    gp = g_of_r(r + h)
    gm = g_of_r(r - h)
    rp = (r + 0.5 * h) ** (dim - 1)
    rm = (r - 0.5 * h) ** (dim - 1)
    return (rp * (gp - gc) - rm * (gc - gm)) / (h * h * r ** (dim - 1))


def pde_residual_of_exact(sol, law: ViscosityLaw, t: float, grid: Grid) -> np.ndarray:
    """Pointwise ``d_t rho - 2 Delta_h mu(rho)`` of an exact solution on ``grid``.

    When the solution lives in more dimensions than the grid, the (1D) grid
    coordinate is read as the radius and the radial Laplacian is used.
    """
    if isinstance(sol, ExtinctionSolution):
        sol._check_time(t)
    if sol.dim == grid.dim:
        r = grid.radius()
        rho = DensityField(grid, sol.eval_radial(t, r), t)
        dt = sol.time_derivative_radial(t, r)
        return dt - 2.0 * flux_laplacian(law.mu, rho)
    if grid.dim != 1:
        raise DomainError("radial evaluation needs a 1D grid")
    r = grid.axis_centers(0)
    if np.any(r <= 0.0):
        raise DomainError("radial grids must lie in r > 0")
    lap = _radial_laplacian(lambda s: law.mu(sol.eval_radial(t, s)), r, grid.spacing[0], sol.dim)
    return sol.time_derivative_radial(t, r) - 2.0 * lap


def profile_residual(sol: BarenblattSolution, grid: Grid) -> np.ndarray:
    """Discrete ``Delta F^alpha + beta xi.grad F + gamma1 F`` on ``grid`` (xi = grid coordinates)."""
    if isinstance(sol, HeatKernel) or getattr(sol, "regime", None) is Regime.HEAT:
        raise UnsupportedRegime("the profile equation assumes alpha != 1")
    ex = sol.exponents
    if sol.dim == grid.dim:
        xi = grid.centers()
        F = sol.profile(grid.radius())
        fld = DensityField(grid, F)
        lap = flux_laplacian(lambda v: np.power(v, sol.alpha), fld)
        g = gradient(fld)
        adv = sum(x * g.components[i] for i, x in enumerate(xi))
        return lap + ex.beta_space * adv + ex.gamma1 * F
    if grid.dim != 1:
        raise DomainError("radial evaluation needs a 1D grid")
    r = grid.axis_centers(0)
    h = grid.spacing[0]
    lap = _radial_laplacian(lambda s: np.power(sol.profile(s), sol.alpha), r, h, sol.dim)
    dF = (sol.profile(r + h) - sol.profile(r - h)) / (2.0 * h)
    return lap + ex.beta_space * r * dF + ex.gamma1 * sol.profile(r)

