"""Quasi-solutions u = -grad phi(rho) and the momentum/mass compatibility check."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple

import numpy as np

from .diagnostics import grad_phi
from .discrete import (DensityField, Grid, VelocityField, _centered_diff, curl2d,
                       flux_laplacian, interior_mask)
from .errors import DomainError, GridMismatch, InconsistentTriple
from .viscosity import ViscosityLaw

__all__ = [
    "QuasiSnapshotTriple",
    "ResidualReport",
    "RESIDUAL_HEADER",
    "velocity_from_density",
    "triple_from_exact",
    "triple_from_fields",
    "quasi_momentum_residual",
    "curl_norm",
    "write_residual_csv",
]

RESIDUAL_HEADER = ("t", "dx", "dt", "direct", "identity", "mismatch")


def _default_eps(fld: DensityField) -> float:
    return 1e-10 * float(fld.values.max()) if fld.values.size else 0.0


def velocity_from_density(fld: DensityField, law: ViscosityLaw,
                          vacuum_eps: Optional[float] = None) -> VelocityField:
    """u = -phi'(rho) grad_h rho cellwise, zero where rho < vacuum_eps."""
    if np.any(fld.values < 0.0):
        raise DomainError("density must be nonnegative")
    if vacuum_eps is None:
        vacuum_eps = _default_eps(fld)
    return VelocityField(fld.grid, -grad_phi(fld, law, vacuum_eps), fld.time)


@dataclass
class QuasiSnapshotTriple:
    times: Tuple[float, float, float]
    fields: Tuple[DensityField, DensityField, DensityField]
    velocities: Tuple[VelocityField, VelocityField, VelocityField]

    def __post_init__(self):
        g = self.fields[0].grid
        if any(f.grid != g for f in self.fields) or any(v.grid != g for v in self.velocities):
            raise GridMismatch("triple members live on different grids")
        t0, t1, t2 = self.times
        h1, h2 = t1 - t0, t2 - t1
        if not (h1 > 0.0 and abs(h1 - h2) <= 1e-9 * h1):
            raise InconsistentTriple("snapshot times must be increasing and evenly spaced")

    @property
    def grid(self) -> Grid:
        return self.fields[0].grid

    @property
    def dt(self) -> float:
        return self.times[1] - self.times[0]


def triple_from_fields(fields: Sequence[DensityField], law: ViscosityLaw,
                       vacuum_eps: Optional[float] = None) -> QuasiSnapshotTriple:
    fields = tuple(fields)
    vel = tuple(velocity_from_density(f, law, vacuum_eps) for f in fields)
    return QuasiSnapshotTriple(tuple(f.time for f in fields), fields, vel)


def triple_from_exact(sol, grid: Grid, t: float, dt: float, law: ViscosityLaw,
                      vacuum_eps: Optional[float] = None) -> QuasiSnapshotTriple:
    """Sample an exact solution at t - dt, t, t + dt and attach quasi velocities."""
    return triple_from_fields([sol.sample(grid, s) for s in (t - dt, t, t + dt)], law, vacuum_eps)


@dataclass
class ResidualReport:
    time: float
    dx: float
    dt: float
    direct_residual_norm: float
    identity_rhs_norm: float
    mismatch_norm: float
    cells: int

    def row(self):
        return (self.time, self.dx, self.dt, self.direct_residual_norm,
                self.identity_rhs_norm, self.mismatch_norm)


def _d(v, grid, ax):
    return _centered_diff(v, ax, grid.spacing[ax], grid.periodic)


def _masked_l2(vec: np.ndarray, mask: np.ndarray, vol: float) -> float:
    return math.sqrt(vol * float(np.sum(np.sum(vec * vec, axis=0)[mask])))


def quasi_momentum_residual(triple: QuasiSnapshotTriple, law: ViscosityLaw,
                            vacuum_eps: Optional[float] = None) -> ResidualReport:
    """Direct momentum residual against -grad(2 mu'(rho)(d_t rho - 2 Lap mu(rho))).

    Both sides are evaluated at the middle snapshot with centred differences and
    compared in L^2 on cells with rho >= 10 vacuum_eps, three cells clear of vacuum.
    """
    grid = triple.grid
    f0, f1, f2 = triple.fields
    if vacuum_eps is None:
        vacuum_eps = _default_eps(f1)
    for f, v in zip(triple.fields, triple.velocities):
        expected = velocity_from_density(f, law, vacuum_eps).components
        tol = 1e-10 * max(1.0, float(np.abs(expected).max()))
        if float(np.abs(v.components - expected).max()) > tol:
            raise InconsistentTriple(f"velocity at t = {f.time:.6g} is not -grad phi(rho)")
    dt = triple.dt
    dim = grid.dim
    rho = f1.values
    u = triple.velocities[1].components

    dmom = (f2.values[None] * triple.velocities[2].components
            - f0.values[None] * triple.velocities[0].components) / (2.0 * dt)
    mu = law.mu(rho)
    lam = law.lam(rho)
    grad_u = [[_d(u[i], grid, j) for j in range(dim)] for i in range(dim)]
    div_u = sum(grad_u[i][i] for i in range(dim))
    direct = np.empty_like(u)
    for i in range(dim):
        r = dmom[i]
        for j in range(dim):
            r = r + _d(rho * u[i] * u[j], grid, j)
            strain = 0.5 * (grad_u[i][j] + grad_u[j][i])
            r = r - _d(2.0 * mu * strain, grid, j)
        direct[i] = r - _d(lam * div_u, grid, i)

    drho = (f2.values - f0.values) / (2.0 * dt)
    lap = flux_laplacian(law.mu, f1)
    q = 2.0 * law.mu_prime(rho) * (drho - 2.0 * lap)
    identity = -np.stack([_d(q, grid, i) for i in range(dim)])

    thr = 10.0 * vacuum_eps
    mask = (interior_mask(rho, thr, 3, grid.periodic)
            & interior_mask(f0.values, thr, 3, grid.periodic)
            & interior_mask(f2.values, thr, 3, grid.periodic))
    vol = grid.cell_volume
    return ResidualReport(f1.time, grid.dx, dt, _masked_l2(direct, mask, vol),
                          _masked_l2(identity, mask, vol), _masked_l2(direct - identity, mask, vol),
                          int(mask.sum()))


def curl_norm(vel: VelocityField, mask: Optional[np.ndarray] = None) -> float:
    """Discrete L^2 norm of the 2D curl, optionally restricted to ``mask``."""
    c = curl2d(vel)
    if mask is None:
        mask = np.ones(c.shape, dtype=bool)
    return math.sqrt(vel.grid.cell_volume * float(np.sum(c[mask] ** 2)))


def write_residual_csv(path, reports: Sequence[ResidualReport]) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESIDUAL_HEADER)
        for rep in reports:
            w.writerow([repr(float(v)) for v in rep.row()])
    return path
