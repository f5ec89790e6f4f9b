"""1D compressible Navier-Stokes with BD viscosity and vanishing pressure eps a rho^gamma."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .diagnostics import ENTROPY_HEADER, EntropyReport, entropy_report, support_radius
from .discrete import DensityField, Grid, VelocityField, lp_norm
from .errors import DomainError, GridMismatch, NumericalBlowup, StabilityViolation
from .pme import PmeConfig, Snapshot
from .pme import run as pme_run
from .quasi import velocity_from_density
from .viscosity import ViscosityLaw

__all__ = [
    "PressureSpec",
    "CnsState",
    "Admissibility",
    "CnsConfig",
    "CnsTrajectory",
    "ConvergenceRow",
    "ConvergenceTable",
    "CONVERGENCE_HEADER",
    "gamma_window",
    "cns_stable_dt",
    "cns_step",
    "cns_run",
    "quasi_state",
    "vanishing_pressure_sweep",
]

CONVERGENCE_HEADER = ("eps", "sup_l1_dist", "final_l1_dist", "final_l2_dist", "support_excess",
                      "pressure_l1l1", "pressure_linf_l1")

_TIME_EPS = 1e-12


@dataclass(frozen=True)
class PressureSpec:
    eps: float
    a: float = 1.0
    gamma: float = 2.0

    def __post_init__(self):
        if not self.eps >= 0.0:
            raise DomainError("eps must be nonnegative")
        if not self.a > 0.0:
            raise DomainError("a must be positive")
        if not self.gamma > 1.0:
            raise DomainError("gamma must exceed 1")

    def pressure(self, rho):
        if self.eps == 0.0:
            return np.zeros_like(np.asarray(rho, dtype=float))
        return self.eps * self.a * np.power(np.maximum(rho, 0.0), self.gamma)


@dataclass
class CnsState:
    grid: Grid
    rho: np.ndarray
    mom: np.ndarray
    time: float = 0.0
    rho_min: float = 0.0

    def __post_init__(self):
        if self.grid.dim != 1:
            raise GridMismatch("the Navier-Stokes solver is one-dimensional")
        self.rho = np.asarray(self.rho, dtype=float)
        self.mom = np.asarray(self.mom, dtype=float)
        if self.rho.shape != self.grid.shape or self.mom.shape != self.grid.shape:
            raise GridMismatch("state arrays do not match the grid")
        if not np.all(np.isfinite(self.mom)):
            raise DomainError("momentum must be finite")
        if self.rho_min <= 0.0:
            self.rho_min = max(1e-10 * float(self.rho.max()), np.finfo(float).tiny)

    def velocity(self) -> np.ndarray:
        return self.mom / np.maximum(self.rho, self.rho_min)

    @property
    def mass(self) -> float:
        return self.grid.cell_volume * float(self.rho.sum())

    def density(self) -> DensityField:
        return DensityField(self.grid, self.rho.copy(), self.time)

    def copy(self) -> "CnsState":
        return CnsState(self.grid, self.rho.copy(), self.mom.copy(), self.time, self.rho_min)


def quasi_state(rho0: DensityField, law: ViscosityLaw, vacuum_eps: Optional[float] = None) -> CnsState:
    """State with u0 = -grad phi(rho0)."""
    u = velocity_from_density(rho0, law, vacuum_eps).components[0]
    return CnsState(rho0.grid, rho0.values.copy(), rho0.values * u, rho0.time)


# -- admissibility ---------------------------------------------------------

@dataclass
class Admissibility:
    gamma: Fraction
    nu1: Fraction
    nu2: Fraction
    dim: int
    windows_hit: List[str]

    @property
    def admissible(self) -> bool:
        return bool(self.windows_hit)


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def gamma_window(gamma, nu1, nu2, dim: int) -> Admissibility:
    """Evaluate every sufficient gamma window for (dim, nu1); admissible if any holds.

    Arguments may be ints, Fractions or floats; floats are converted exactly.
    """
    g, n1, n2 = _frac(gamma), _frac(nu1), _frac(nu2)
    if dim not in (2, 3):
        raise DomainError("gamma windows are defined for dim 2 and 3")
    if not g > 1:
        raise DomainError("gamma must exceed 1")
    if not (n1 > 0 and n2 > 0):
        raise DomainError("nu1 and nu2 must be positive")
    hit = []
    if dim == 2:
        if Fraction(1, 4) + n2 / 8 < g:
            hit.append("lower: 1/4 + nu2/8 < gamma")
        return Admissibility(g, n1, n2, dim, hit)
    low = Fraction(5, 6) + n2 / 12
    if n1 >= 2:
        if low < g < 2 + n1 / 2:
            hit.append("5/6 + nu2/12 < gamma < 2 + nu1/2")
    else:
        if low < g < (4 - n1) * (1 + n1) / (2 - n1):
            hit.append("5/6 + nu2/12 < gamma < (4 - nu1)(1 + nu1)/(2 - nu1)")
    if low < g < Fraction(5, 6) + 7 * n1 / 12:
        hit.append("5/6 + nu2/12 < gamma < 5/6 + 7 nu1/12")
    return Admissibility(g, n1, n2, dim, hit)


# -- time stepping -------------------------------------------------------------

def _signal_bounds(state: CnsState, law: ViscosityLaw, spec: PressureSpec):
    rho = state.rho
    live = rho > state.rho_min
    if not live.any():
        return 0.0, 0.0
    r = rho[live]
    speed = np.abs(state.velocity()[live])
    if spec.eps > 0.0:
        speed = speed + np.sqrt(spec.eps * spec.a * spec.gamma * np.power(r, spec.gamma - 1.0))
    # (2 mu + lambda) / rho = 2 mu'(rho) in one dimension
    nu_kin = 2.0 * law.mu_prime(r)
    return float(speed.max()), float(np.max(nu_kin))


def cns_stable_dt(state: CnsState, law: ViscosityLaw, spec: PressureSpec, cfl: float = 0.5,
                  remaining: Optional[float] = None) -> float:
    """cfl min(dx / max(|u| + c), dx^2 / (2 max nu_kin)), capped at ``remaining``."""
    dx = state.grid.dx
    smax, numax = _signal_bounds(state, law, spec)
    bounds = []
    if smax > 0.0:
        bounds.append(dx / smax)
    if numax > 0.0:
        bounds.append(dx * dx / (2.0 * numax))
    if not bounds:
        return remaining if remaining is not None else math.inf
    dt = cfl * min(bounds)
    return min(dt, remaining) if remaining is not None else dt


def cns_step(state: CnsState, law: ViscosityLaw, spec: PressureSpec, dt: float,
             check: bool = True) -> CnsState:
    """One conservative explicit step; mass is preserved to rounding."""
    if not law.is_power:
        raise DomainError("the Navier-Stokes kernel supports power laws only")
    if check:
        limit = cns_stable_dt(state, law, spec, 1.0)
        if dt > limit * (1.0 + 1e-12):
            raise StabilityViolation(f"dt = {dt:.6g} exceeds the stability bound {limit:.6g}")
    rho, mom = kernels.cns_step_1d(state.rho, state.mom, law.mu_c, law.alpha, spec.eps, spec.a,
                                   spec.gamma, dt, state.grid.dx, state.grid.periodic, state.rho_min)
    if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(mom))):
        raise NumericalBlowup(f"non-finite state at t = {state.time + dt:.6g}")
    return CnsState(state.grid, rho, mom, state.time + dt, state.rho_min)


@dataclass
class CnsConfig:
    law: ViscosityLaw
    grid: Grid
    spec: PressureSpec
    t_end: float
    cfl: float = 0.5
    snapshot_times: Tuple[float, ...] = ()
    entropy_every: int = 1

    def __post_init__(self):
        if not 0.0 < self.cfl <= 1.0:
            raise DomainError("cfl must lie in (0, 1]")
        if not self.t_end > 0.0:
            raise DomainError("t_end must be positive")
        self.snapshot_times = tuple(sorted(float(t) for t in self.snapshot_times))
        if self.entropy_every < 1:
            raise DomainError("entropy_every must be at least 1")


@dataclass
class CnsTrajectory:
    config: CnsConfig
    snapshots: List[Snapshot] = field(default_factory=list)
    entropy: List[EntropyReport] = field(default_factory=list)
    mass: List[float] = field(default_factory=list)
    pressure_l1l1: float = 0.0
    pressure_linf_l1: float = 0.0
    pressure_l53: float = 0.0
    min_rho: float = math.inf
    steps: int = 0
    t0: float = 0.0

    def snapshot_at(self, t: float) -> Snapshot:
        for s in self.snapshots:
            if abs(s.time - t) <= 1e-9 * max(1.0, abs(t)):
                return s
        raise KeyError(f"no snapshot at t = {t}")

    def write_entropy_csv(self, path) -> Path:
        path = Path(path)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(ENTROPY_HEADER)
            for rep in self.entropy:
                w.writerow([repr(float(v)) for v in rep.row()])
        return path


def _snapshot(state: CnsState) -> Snapshot:
    u = state.velocity()
    return Snapshot(state.time, state.density(), VelocityField(state.grid, u[None, :].copy(), state.time))


def cns_run(config: CnsConfig, state0: CnsState) -> CnsTrajectory:
    """Adaptive explicit run with entropy series and pressure-norm accumulators.

    ``pressure_l1l1`` is the space-time integral of eps rho^gamma,
    ``pressure_linf_l1`` its largest spatial integral and ``pressure_l53``
    the L^{5/3} space-time norm.
    """
    if state0.grid != config.grid:
        raise GridMismatch("initial state is not on the configured grid")
    if np.any(state0.rho < 0.0):
        raise DomainError("initial density must be nonnegative")
    law, spec = config.law, config.spec
    state = state0.copy()
    if config.t_end <= state.time:
        raise DomainError("t_end must exceed the initial time")
    traj = CnsTrajectory(config, t0=state.time)
    pending = [t for t in config.snapshot_times if t >= state.time - _TIME_EPS]
    vol = config.grid.cell_volume
    l53 = 0.0

    def pressure_integrals(s):
        p = spec.pressure(s.rho)
        return vol * float(p.sum()), vol * float(np.sum(p ** (5.0 / 3.0)))

    def record():
        traj.entropy.append(entropy_report(state, law, spec if spec.eps > 0.0 else None,
                                           vacuum_eps=state.rho_min))
        traj.mass.append(state.mass)

    record()
    if pending and abs(pending[0] - state.time) <= _TIME_EPS * max(1.0, state.time):
        traj.snapshots.append(_snapshot(state))
        pending.pop(0)
    p1, p53 = pressure_integrals(state)
    traj.pressure_linf_l1 = p1
    while state.time < config.t_end * (1.0 - _TIME_EPS):
        target = pending[0] if pending else config.t_end
        remaining = target - state.time
        dt = cns_stable_dt(state, law, spec, config.cfl, remaining)
        landing = dt >= remaining
        new = cns_step(state, law, spec, remaining if landing else dt, check=False)
        if landing:
            new.time = target
        q1, q53 = pressure_integrals(new)
        h = new.time - state.time
        traj.pressure_l1l1 += 0.5 * h * (p1 + q1)
        l53 += 0.5 * h * (p53 + q53)
        traj.pressure_linf_l1 = max(traj.pressure_linf_l1, q1)
        p1, p53 = q1, q53
        state = new
        traj.steps += 1
        traj.min_rho = min(traj.min_rho, float(state.rho.min()))
        if traj.steps % config.entropy_every == 0 or landing:
            record()
        if landing and pending and target == pending[0]:
            traj.snapshots.append(_snapshot(state))
            pending.pop(0)
    traj.pressure_l53 = l53 ** 0.6
    return traj


# -- vanishing pressure study ----------------------------------------------------

@dataclass
class ConvergenceRow:
    eps: float
    sup_l1_dist: float
    final_l1_dist: float
    final_l2_dist: float
    support_excess: float
    pressure_l1l1: float
    pressure_linf_l1: float
    pressure_l53: float = math.nan

    def row(self):
        return tuple(getattr(self, k) for k in CONVERGENCE_HEADER)


@dataclass
class ConvergenceTable:
    rows: List[ConvergenceRow]
    compare_times: Tuple[float, ...]
    support_threshold: float

    def column(self, key: str) -> np.ndarray:
        return np.array([getattr(r, key) for r in self.rows])

    def write_csv(self, path) -> Path:
        path = Path(path)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CONVERGENCE_HEADER)
            for r in self.rows:
                w.writerow([repr(float(v)) for v in r.row()])
        return path


def _sweep_one(args):
    config, state0, ref_fields, threshold, ref_radius = args
    traj = cns_run(config, state0)
    grid = config.grid
    dists = []
    for t, ref in ref_fields:
        s = traj.snapshot_at(t)
        dists.append(lp_norm(DensityField(grid, s.field.values - ref), 1.0))
    final = traj.snapshot_at(config.t_end).field
    ref_final = ref_fields[-1][1]
    diff = DensityField(grid, final.values - ref_final)
    return ConvergenceRow(
        eps=config.spec.eps,
        sup_l1_dist=max(dists),
        final_l1_dist=lp_norm(diff, 1.0),
        final_l2_dist=lp_norm(diff, 2.0),
        support_excess=support_radius(final, threshold) - ref_radius,
        pressure_l1l1=traj.pressure_l1l1,
        pressure_linf_l1=traj.pressure_linf_l1,
        pressure_l53=traj.pressure_l53,
    )


def vanishing_pressure_sweep(base: CnsConfig, rho0: DensityField, eps_list: Sequence[float],
                             n_compare: int = 20, workers: Optional[int] = None,
                             support_threshold: Optional[float] = None) -> ConvergenceTable:
    """Run the quasi-data CNS problem for each eps and compare with the PME solution.

    ``eps_list`` must be strictly decreasing; rows come back in that order.
    """
    eps_list = [float(e) for e in eps_list]
    if not eps_list or any(e < 0.0 for e in eps_list):
        raise DomainError("eps_list must be a nonempty list of nonnegative values")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise DomainError("eps_list must be strictly decreasing")
    t0 = rho0.time
    compare = tuple(float(t) for t in np.linspace(t0, base.t_end, n_compare + 1)[1:])
    compare = compare[:-1] + (float(base.t_end),)
    if support_threshold is None:
        support_threshold = 1e-6 * float(rho0.values.max())
    ref = pme_run(PmeConfig(base.law, base.grid, base.t_end, cfl=base.cfl, snapshot_times=compare,
                            series_every=10 ** 9), rho0)
    ref_fields = [(t, ref.snapshot_at(t).field.values) for t in compare]
    ref_radius = support_radius(ref.snapshot_at(base.t_end).field, support_threshold)
    state0 = quasi_state(rho0, base.law)
    jobs = [(replace(base, spec=replace(base.spec, eps=e), snapshot_times=compare,
                     entropy_every=10 ** 9), state0, ref_fields, support_threshold, ref_radius)
            for e in eps_list]
    if workers == 1 or len(jobs) == 1:
        rows = [_sweep_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_one, jobs))
    return ConvergenceTable(rows, compare, support_threshold)
