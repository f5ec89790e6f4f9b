"""Quantitative checks on trajectories: decay rates, supports, distances, entropies."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence, Tuple

import numpy as np

from .discrete import DensityField, VelocityField, gradient, lp_norm, support_extent
from .errors import DomainError, UnsupportedRegime
from .exact import make_barenblatt, pme_exponents
from .viscosity import ViscosityLaw

__all__ = [
    "DecayFit",
    "GrowthFit",
    "EntropyReport",
    "ABReport",
    "decay_fit",
    "support_radius",
    "support_growth_fit",
    "barenblatt_distance",
    "entropy_report",
    "grad_phi",
    "aronson_benilan_monitor",
    "dominating_barenblatt",
    "format_report",
    "write_summary_csv",
]

ENTROPY_HEADER = ("t", "energy", "bd", "mv", "pressure_cross_term")


@dataclass
class DecayFit:
    p: float
    fitted_slope: float
    theory_slope: float
    relative_error: float
    time_window: Tuple[float, float]
    n_points: int


@dataclass
class GrowthFit:
    applicable: bool
    fitted_slope: float = math.nan
    theory_slope: float = math.nan
    relative_error: float = math.nan
    time_window: Tuple[float, float] = (math.nan, math.nan)
    n_points: int = 0


def _fit_window(times: np.ndarray, values: np.ndarray, window, skip_fraction: float = 0.2):
    t_lo, t_hi = window if window is not None else (times.min(), times.max())
    sel = (times >= t_lo * (1 - 1e-12)) & (times <= t_hi * (1 + 1e-12)) & (times > 0.0) & (values > 0.0)
    t = times[sel]
    v = values[sel]
    if t.size:
        lt = np.log(t)
        cut = lt.min() + skip_fraction * (lt.max() - lt.min())
        keep = lt >= cut - 1e-12
        t, v = t[keep], v[keep]
    if t.size < 5:
        raise DomainError(f"need at least 5 snapshots in the fit window, found {t.size}")
    slope, _ = np.polyfit(np.log(t), np.log(v), 1)
    return float(slope), (float(t_lo), float(t_hi)), int(t.size)


def _law_and_dim(traj, alpha, dim):
    cfg = getattr(traj, "config", None)
    if alpha is None:
        alpha = cfg.law.alpha
    if dim is None:
        dim = cfg.grid.dim
    return alpha, dim


def decay_fit(traj, p: float, window=None, alpha: Optional[float] = None,
              dim: Optional[int] = None) -> DecayFit:
    """Least-squares slope of ln ||rho(t)||_p against ln t over ``window``."""
    alpha, dim = _law_and_dim(traj, alpha, dim)
    times = np.array([s.time for s in traj.snapshots])
    norms = np.array([lp_norm(s.field, p) for s in traj.snapshots])
    slope, win, n = _fit_window(times, norms, window)
    theory = -pme_exponents(alpha, dim).time_exp(p)
    err = abs(slope - theory) / abs(theory) if theory != 0.0 else abs(slope - theory)
    return DecayFit(p, slope, theory, err, win, n)


def support_radius(fld: DensityField, threshold: float) -> float:
    """Largest distance from the mass centroid to a cell with rho >= threshold."""
    if not threshold > 0.0:
        raise DomainError("support threshold must be positive")
    return support_extent(fld.values, fld.grid.centers(), threshold)


def support_growth_fit(traj, threshold: float, window=None, alpha: Optional[float] = None,
                       dim: Optional[int] = None) -> GrowthFit:
    """Fit radius ~ t^slope; only meaningful in the porous regime."""
    alpha, dim = _law_and_dim(traj, alpha, dim)
    if alpha <= 1.0:
        return GrowthFit(applicable=False)
    times = np.array([s.time for s in traj.snapshots])
    radii = np.array([support_radius(s.field, threshold) for s in traj.snapshots])
    slope, win, n = _fit_window(times, radii, window)
    theory = pme_exponents(alpha, dim).beta_space
    return GrowthFit(True, slope, theory, abs(slope - theory) / theory, win, n)


@dataclass
class BarenblattDistance:
    l1_dist: float
    scaled_linf_dist: float
    reference: object


def barenblatt_distance(fld: DensityField, t: float, mass: float, law: ViscosityLaw,
                        center=None) -> BarenblattDistance:
    """L^1 and t^gamma1-scaled sup distance to the same-mass source solution at time t."""
    if not t > 0.0:
        raise DomainError("t must be positive")
    grid = fld.grid
    field_mass = fld.mass
    if abs(field_mass - mass) > 0.01 * mass:
        warnings.warn(f"field mass {field_mass:.6g} differs from {mass:.6g} by more than 1%; "
                      "using the field mass", RuntimeWarning, stacklevel=2)
        mass = field_mass
    ref = make_barenblatt(law.alpha, grid.dim, law.mu_c, mass=mass)
    u = ref.eval_radial(t, grid.radius(center))
    diff = DensityField(grid, fld.values - u)
    gamma1 = grid.dim / (grid.dim * (law.alpha - 1.0) + 2.0)
    return BarenblattDistance(lp_norm(diff, 1.0), t ** gamma1 * lp_norm(diff, math.inf), ref)


@dataclass
class EntropyReport:
    time: float
    energy: float
    bd: float
    mv: float
    pressure_cross: float

    def row(self):
        return (self.time, self.energy, self.bd, self.mv, self.pressure_cross)


def grad_phi(fld: DensityField, law: ViscosityLaw, vacuum_eps: Optional[float] = None) -> np.ndarray:
    """Chain-rule gradient phi'(rho) grad_h rho, zero on cells below ``vacuum_eps``."""
    v = fld.values
    if vacuum_eps is None:
        vacuum_eps = 1e-10 * float(v.max()) if v.size else 0.0
    live = v >= vacuum_eps
    if vacuum_eps <= 0.0:
        live &= v > 0.0
    g = gradient(fld).components
    phip = np.zeros_like(v)
    phip[live] = law.phi_prime(v[live])
    return g * phip[None, ...] * live[None, ...]


def _unpack_state(state):
    if hasattr(state, "mom") and hasattr(state, "rho"):
        fld = DensityField(state.grid, state.rho, state.time)
        u = state.velocity()
        return fld, u.reshape((1,) + u.shape) if u.ndim == 1 else u
    if hasattr(state, "field") and hasattr(state, "velocity"):
        return state.field, state.velocity.components
    fld, vel = state
    comps = vel.components if isinstance(vel, VelocityField) else np.asarray(vel, dtype=float)
    if comps.ndim == fld.values.ndim:
        comps = comps[None, ...]
    return fld, comps


def entropy_report(state, law: ViscosityLaw, spec=None, vacuum_eps: Optional[float] = None) -> EntropyReport:
    """Energy, BD entropy, Mellet-Vasseur functional and the pressure cross term.

    ``spec`` carries ``eps``, ``a`` and ``gamma``; ``None`` means no pressure.
    """
    fld, u = _unpack_state(state)
    rho = fld.values
    vol = fld.grid.cell_volume
    eps = a = 0.0
    gamma = 2.0
    if spec is not None:
        eps, a, gamma = spec.eps, spec.a, spec.gamma
    pressure = eps * a / (gamma - 1.0) * np.power(rho, gamma) if eps else np.zeros_like(rho)
    u2 = np.sum(u * u, axis=0)
    gphi = grad_phi(fld, law, vacuum_eps)
    w = u + gphi
    energy = vol * float(np.sum(0.5 * rho * u2 + pressure))
    bd = vol * float(np.sum(0.5 * rho * np.sum(w * w, axis=0) + pressure))
    mv = vol * float(np.sum(rho * (1.0 + u2) / 2.0 * np.log1p(u2)))
    if eps:
        grad_rho = gradient(fld).components
        dp = gamma * np.power(rho, gamma - 1.0)[None, ...] * grad_rho
        cross = eps * a * vol * float(np.sum(dp * gphi))
    else:
        cross = 0.0
    return EntropyReport(fld.time, energy, bd, mv, cross)


@dataclass
class ABReport:
    applicable: bool
    worst_violation: float = 0.0
    worst_time: float = math.nan
    times: Tuple[float, ...] = ()
    violations: Tuple[float, ...] = ()
    l1_ratios: Tuple[float, ...] = ()
    spacing: float = math.nan

    @property
    def max_l1_ratio(self) -> float:
        return max(self.l1_ratios) if self.l1_ratios else math.nan


def aronson_benilan_monitor(traj, law: ViscosityLaw, t_origin: Optional[float] = None,
                            window=None, rtol: float = 1e-9) -> ABReport:
    """Worst violation of d_t rho >= -rho/((alpha-1) t) and the L^1 bound on d_t rho.

    Uses centred differences over consecutive, evenly spaced snapshot triples.
    ``l1_ratios`` holds ||d_t rho||_1 (alpha-1) t / (2 ||rho_0||_1).
    """
    if not law.alpha > 1.0:
        return ABReport(applicable=False)
    snaps = list(traj.snapshots)
    if t_origin is None:
        t_origin = getattr(traj, "t0", snaps[0].time if snaps else 0.0)
    mass0 = getattr(traj, "mass0", None) or (snaps[0].field.mass if snaps else 1.0)
    times, viols, ratios = [], [], []
    spacing = math.nan
    for s0, s1, s2 in zip(snaps, snaps[1:], snaps[2:]):
        h1 = s1.time - s0.time
        h2 = s2.time - s1.time
        if abs(h1 - h2) > rtol * max(h1, h2):
            continue
        t = s1.time - t_origin
        if t <= 0.0:
            continue
        if window is not None and not (window[0] <= s1.time <= window[1]):
            continue
        dt_rho = (s2.field.values - s0.field.values) / (h1 + h2)
        bound = -s1.field.values / ((law.alpha - 1.0) * t)
        viol = float(np.max(np.maximum(bound - dt_rho, 0.0)))
        l1 = s1.field.grid.cell_volume * float(np.abs(dt_rho).sum())
        times.append(s1.time)
        viols.append(viol)
        ratios.append(l1 * (law.alpha - 1.0) * t / (2.0 * mass0))
        spacing = h1 if math.isnan(spacing) else max(spacing, h1)
    if not times:
        raise DomainError("no evenly spaced snapshot triples in the trajectory")
    k = int(np.argmax(viols))
    return ABReport(True, viols[k], times[k], tuple(times), tuple(viols), tuple(ratios), spacing)


def dominating_barenblatt(fld: DensityField, law: ViscosityLaw, t_ref: float,
                          taus: Sequence[float] = tuple(np.logspace(-4, 2, 61))):
    """Source solution U and time shift tau with U(tau, x) >= rho(x) on every cell.

    Among the candidate shifts, returns the one whose support radius at
    ``tau + t_ref`` is smallest.  Porous regime only.
    """
    if not law.alpha > 1.0:
        raise UnsupportedRegime("dominating envelopes need finite propagation (alpha > 1)")
    grid = fld.grid
    ex = pme_exponents(law.alpha, grid.dim)
    k = (law.alpha - 1.0) * ex.gamma1 / (2.0 * law.alpha * grid.dim)
    half_cell = 0.5 * math.sqrt(sum(h * h for h in grid.spacing))
    r = grid.radius() + half_cell
    v = fld.values
    live = v > 0.0
    best = None
    for tau in taus:
        T = 2.0 * law.mu_c * tau
        need = (v[live] * T ** ex.gamma1) ** (law.alpha - 1.0) + k * r[live] ** 2 * T ** (-2.0 * ex.beta_space)
        C = float(need.max())
        radius = math.sqrt(C / k) * (2.0 * law.mu_c * (tau + t_ref)) ** ex.beta_space
        if best is None or radius < best[2]:
            best = (C, tau, radius)
    C, tau, _ = best
    sol = make_barenblatt(law.alpha, grid.dim, law.mu_c, C=C)
    return sol, tau


def format_report(title: str, fields: Mapping[str, object]) -> str:
    """Plain-text block with one ``key = value`` line per field, in insertion order."""
    lines = [f"[{title}]"]
    for key, value in fields.items():
        if isinstance(value, float):
            value = repr(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def write_summary_csv(path, rows: Sequence[Mapping[str, object]]) -> Path:
    path = Path(path)
    if not rows:
        path.write_text("")
        return path
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0].keys()), lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return path
