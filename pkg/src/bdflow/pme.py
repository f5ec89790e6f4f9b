"""Explicit conservative solver for d_t rho = 2 Delta mu(rho).

Covers the porous medium (alpha > 1), heat (alpha = 1) and fast diffusion
(m_c < alpha < 1) regimes as well as general monotone ``mu``.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import kernels
from .discrete import (DensityField, Grid, VelocityField, face_gradient, flux_laplacian, lp_norm,
                       support_extent, write_field_csv)
from .errors import DomainError, ExtinctionRegime, GridMismatch, NumericalBlowup, StabilityViolation
from .exact import critical_exponent
from .viscosity import ViscosityLaw

log = logging.getLogger(__name__)

SERIES_HEADER = ("t", "dt", "mass", "l1", "l2", "linf", "support_radius")
_D_FLOOR = 1e-30
_TIME_EPS = 1e-12


@dataclass
class PmeConfig:
    law: ViscosityLaw
    grid: Grid
    t_end: float
    cfl: float = 0.5
    snapshot_times: Sequence[float] = ()
    vacuum_floor: float = 0.0
    support_threshold: Optional[float] = None  # absolute; default 1e-12 * max(rho0)
    series_every: int = 1

    def __post_init__(self):
        if not 0.0 < self.cfl <= 1.0:
            raise DomainError(f"cfl must lie in (0, 1], got {self.cfl}")
        if not self.t_end > 0.0:
            raise DomainError("t_end must be positive")
        times = [float(s) for s in self.snapshot_times]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise DomainError("snapshot_times must be strictly increasing")
        if times and (times[0] < 0.0 or times[-1] > self.t_end * (1.0 + _TIME_EPS)):
            raise DomainError("snapshot_times must lie in [0, t_end]")
        self.snapshot_times = tuple(times)
        if self.vacuum_floor < 0.0:
            raise DomainError("vacuum_floor must be nonnegative")


@dataclass
class Snapshot:
    time: float
    field: DensityField
    velocity: Optional[VelocityField] = None


@dataclass
class Trajectory:
    config: object
    snapshots: List[Snapshot] = field(default_factory=list)
    series: Dict[str, List[float]] = field(default_factory=lambda: {k: [] for k in SERIES_HEADER})
    min_pre_clamp: float = math.inf
    clamped_mass: float = 0.0
    steps: int = 0
    t0: float = 0.0
    mass0: float = 0.0

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.snapshots])

    def snapshot_at(self, t: float) -> Snapshot:
        for s in self.snapshots:
            if abs(s.time - t) <= _TIME_EPS * max(1.0, abs(t)):
                return s
        raise KeyError(f"no snapshot at t = {t}")

    def series_array(self, key: str) -> np.ndarray:
        return np.asarray(self.series[key], dtype=float)

    def write_series_csv(self, path) -> Path:
        path = Path(path)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.series.keys())
            for row in zip(*self.series.values()):
                w.writerow([repr(float(v)) for v in row])
        return path

    def write_snapshots(self, directory) -> List[Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        out = []
        for i, s in enumerate(self.snapshots):
            name = f"snap_{i:04d}_{s.time:.6g}.csv"
            out.append(write_field_csv(directory / name, s.field, s.velocity))
        return out


def _max_diffusivity(values: np.ndarray, law: ViscosityLaw) -> float:
    if law.is_power:
        return float(kernels.max_diffusivity_power(values, law.mu_c, law.alpha))
    return float(2.0 * np.max(law.mu_prime(values)))


def _dt_from_diffusivity(grid: Grid, d_max: float, cfl: float) -> float:
    d_max = max(d_max, _D_FLOOR)
    return cfl * grid.dx ** 2 / (4.0 * grid.dim * d_max)


def stable_dt(fld: DensityField, law: ViscosityLaw, cfl: float = 0.5,
              remaining: Optional[float] = None) -> float:
    """Explicit step bound ``cfl dx^2 / (4 dim max 2 mu'(rho))``, capped at ``remaining``."""
    if np.any(fld.values < 0.0):
        raise DomainError("stable_dt needs a nonnegative field")
    d_max = _max_diffusivity(fld.values, law)
    if not math.isfinite(d_max):
        raise DomainError("fast diffusion needs strictly positive data (mu' is infinite on vacuum)")
    dt = _dt_from_diffusivity(fld.grid, d_max, cfl)
    if remaining is not None:
        if d_max <= _D_FLOOR:
            return remaining
        dt = min(dt, remaining)
    return dt


def clamp_redistribute(values: np.ndarray, floor: float = 0.0) -> float:
    """Raise cells below ``floor`` to it and take the deficit from the others, in place.

    Returns the redistributed deficit (sum over cells, without the cell volume).
    """
    below = values < floor
    if not below.any():
        return 0.0
    deficit = float(np.sum(floor - values[below]))
    values[below] = floor
    excess = values - floor
    total = float(excess.sum())
    if total > 0.0:
        values -= deficit * excess / total
    log.debug("clamped %d cells, deficit %.3e", int(below.sum()), deficit)
    return deficit


def _raw_step(values: np.ndarray, grid: Grid, law: ViscosityLaw, dt: float):
    if law.is_power:
        new, vmin, dmax = kernels.pme_step_power(values, law.mu_c, law.alpha, dt, grid.spacing, grid.periodic)
        return np.asarray(new), float(vmin), float(dmax)
    lap = kernels.flux_laplacian(np.ascontiguousarray(law.mu(values), dtype=float), grid.spacing, grid.periodic)
    new = values + 2.0 * dt * lap
    return new, float(new.min()), None


def step(fld: DensityField, law: ViscosityLaw, dt: float, vacuum_floor: float = 0.0) -> DensityField:
    """One explicit step; raises :class:`StabilityViolation` above the cfl = 1 bound."""
    limit = stable_dt(fld, law, 1.0)
    if dt > limit * (1.0 + 1e-12):
        raise StabilityViolation(f"dt = {dt:.3e} exceeds the stability bound {limit:.3e}")
    new, _, _ = _raw_step(fld.values, fld.grid, law, dt)
    clamp_redistribute(new, vacuum_floor)
    return DensityField(fld.grid, new, fld.time + dt)


def _check_regime(law: ViscosityLaw, grid: Grid):
    if law.is_power:
        for n in {law.dim, grid.dim}:
            if not law.alpha > critical_exponent(n):
                raise ExtinctionRegime(
                    f"alpha = {law.alpha} <= m_c = {critical_exponent(n)} (N = {n}); "
                    "the solver does not cover the extinction regime"
                )


def run(config: PmeConfig, rho0: DensityField) -> Trajectory:
    """Advance ``rho0`` from ``rho0.time`` to ``config.t_end`` with adaptive steps."""
    if rho0.grid != config.grid:
        raise GridMismatch("initial field is not on the configured grid")
    if np.any(rho0.values < 0.0):
        raise DomainError("initial density must be nonnegative")
    if not rho0.mass > 0.0:
        raise DomainError("initial mass must be positive")
    _check_regime(config.law, config.grid)
    grid, law = config.grid, config.law
    t = float(rho0.time)
    if config.t_end <= t:
        raise DomainError("t_end must exceed the initial time")
    threshold = config.support_threshold
    if threshold is None:
        threshold = 1e-12 * float(rho0.values.max())
    pending = [s for s in config.snapshot_times if s >= t - _TIME_EPS]
    traj = Trajectory(config, t0=rho0.time, mass0=rho0.mass)
    values = rho0.values.copy()

    vol = grid.cell_volume
    coords = grid.centers()

    def record(dt_used):
        s = traj.series
        a = np.abs(values)
        total = float(a.sum())
        s["t"].append(t)
        s["dt"].append(dt_used)
        s["mass"].append(vol * float(values.sum()))
        s["l1"].append(vol * total)
        s["l2"].append(math.sqrt(vol * float(np.dot(a.ravel(), a.ravel()))))
        s["linf"].append(float(a.max()))
        s["support_radius"].append(support_extent(values, coords, threshold))

    record(0.0)
    if pending and abs(pending[0] - t) <= _TIME_EPS * max(1.0, abs(t)):
        traj.snapshots.append(Snapshot(t, DensityField(grid, values.copy(), t)))
        pending.pop(0)

    d_max = _max_diffusivity(values, law)
    if not math.isfinite(d_max):
        raise DomainError("fast diffusion needs strictly positive data (mu' is infinite on vacuum)")
    while t < config.t_end * (1.0 - _TIME_EPS):
        target = pending[0] if pending else config.t_end
        dt = _dt_from_diffusivity(grid, d_max, config.cfl)
        landing = dt >= target - t or d_max <= _D_FLOOR
        if landing:
            dt = target - t
        new, vmin, dmax_new = _raw_step(values, grid, law, dt)
        if not np.all(np.isfinite(new)):
            raise NumericalBlowup(f"non-finite density after step {traj.steps + 1} at t = {t + dt:.6g}")
        traj.min_pre_clamp = min(traj.min_pre_clamp, vmin)
        if vmin < config.vacuum_floor:
            traj.clamped_mass += grid.cell_volume * clamp_redistribute(new, config.vacuum_floor)
            dmax_new = None
        values = new
        t = target if landing else t + dt
        traj.steps += 1
        d_max = dmax_new if dmax_new is not None else _max_diffusivity(values, law)
        if traj.steps % config.series_every == 0 or landing:
            record(dt)
        if landing and pending and target == pending[0]:
            traj.snapshots.append(Snapshot(t, DensityField(grid, values.copy(), t)))
            pending.pop(0)
    return traj


@dataclass
class ContractionResult:
    lhs: float
    rhs: float
    positive_part_lhs: float
    positive_part_rhs: float
    steps: int


def l1_contraction_trial(rho01: DensityField, rho02: DensityField, law: ViscosityLaw, t: float,
                         cfl: float = 0.5) -> ContractionResult:
    """Evolve two data with a shared time step and compare their L^1 distances."""
    if rho01.grid != rho02.grid:
        raise GridMismatch("contraction trial needs both fields on one grid")
    if np.any(rho01.values < 0.0) or np.any(rho02.values < 0.0):
        raise DomainError("densities must be nonnegative")
    grid = rho01.grid
    _check_regime(law, grid)
    a = rho01.values.copy()
    b = rho02.values.copy()
    vol = grid.cell_volume
    rhs = vol * float(np.abs(a - b).sum())
    rhs_pos = vol * float(np.maximum(a - b, 0.0).sum())
    now = float(rho01.time)
    steps = 0
    while now < t * (1.0 - _TIME_EPS):
        d = max(_max_diffusivity(a, law), _max_diffusivity(b, law))
        dt = min(_dt_from_diffusivity(grid, d, cfl), t - now)
        a, _, _ = _raw_step(a, grid, law, dt)
        b, _, _ = _raw_step(b, grid, law, dt)
        clamp_redistribute(a)
        clamp_redistribute(b)
        now = t if dt == t - now else now + dt
        steps += 1
    return ContractionResult(
        lhs=vol * float(np.abs(a - b).sum()),
        rhs=rhs,
        positive_part_lhs=vol * float(np.maximum(a - b, 0.0).sum()),
        positive_part_rhs=rhs_pos,
        steps=steps,
    )


def dissipation_defect(before: DensityField, after: DensityField, law: ViscosityLaw, dt: float):
    """Per-step defect of d/dt int psi(rho) = -2 int |grad mu(rho)|^2.

    Returns ``(defect, scale)`` where the gradient uses face differences and
    ``scale = int mu'(rho) (2 Delta_h mu(rho))^2`` sets the size of the
    O(dt^2) Taylor remainder of the explicit step.
    """
    grid = before.grid
    vol = grid.cell_volume
    d_psi = vol * float(np.sum(law.psi(after.values) - law.psi(before.values)))
    g = np.asarray(law.mu(before.values), dtype=float)
    dissip = 0.0
    for ax in range(grid.dim):
        fg = face_gradient(grid, g, ax)
        dissip += float(np.sum(fg * fg))
    dissip *= vol
    lap = flux_laplacian(law.mu, before)
    scale = vol * float(np.sum(law.mu_prime(before.values) * (2.0 * lap) ** 2))
    return d_psi + 2.0 * dt * dissip, scale
