"""Self-check suites run by ``bdflow verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List

import numpy as np

from . import cns, diagnostics, pme, quasi
from .discrete import DensityField, interior_mask, make_grid
from .errors import NoScalingInvariance
from .exact import (ExtinctionSolution, make_barenblatt, pde_residual_of_exact, pme_exponents,
                    similarity_exponents_cns)
from .viscosity import make_power_law

__all__ = ["CheckResult", "SUITES", "run_suite", "format_results"]


@dataclass
class CheckResult:
    suite: str
    name: str
    passed: bool
    value: float
    tolerance: float


class _Recorder:
    def __init__(self, suite: str):
        self.suite = suite
        self.results: List[CheckResult] = []

    def le(self, name: str, value: float, tol: float):
        self.results.append(CheckResult(self.suite, name, bool(value <= tol), float(value), float(tol)))

    def ge(self, name: str, value: float, tol: float):
        self.results.append(CheckResult(self.suite, name, bool(value >= tol), float(value), float(tol)))

    def true(self, name: str, ok: bool):
        self.results.append(CheckResult(self.suite, name, bool(ok), float(ok), 1.0))


def _suite_exact(seed: int) -> List[CheckResult]:
    r = _Recorder("exact")
    e = similarity_exponents_cns(2, 3)
    r.true("cns exponents (2, 3) = (1, 1, 0)", (e.e_rho, e.e_u, e.e_x) == (1, 1, 0))
    try:
        similarity_exponents_cns(2, 2)
        r.true("theta = gamma rejected", False)
    except NoScalingInvariance:
        r.true("theta = gamma rejected", True)
    ex = pme_exponents(2.0, 3)
    r.le("gamma1 (alpha 2, N 3) - 3/5", abs(ex.gamma1 - 0.6), 1e-15)
    r.le("p = 1 time exponent", abs(ex.time_exp(1.0)), 1e-15)
    law = make_power_law(0.5, 2.0, 1)
    sol = make_barenblatt(2.0, 1, 0.5, C=1.0)
    errs = []
    for n in (200, 400):
        g = make_grid(n, -3.0, 3.0)
        res = pde_residual_of_exact(sol, law, 1.0, g)
        mask = interior_mask(sol.sample(g, 1.0).values, 0.05, 3)
        errs.append(float(np.abs(res[mask]).max()))
    r.ge("Barenblatt residual order", math.log2(errs[0] / errs[1]), 1.8)
    ext = ExtinctionSolution.create(0.2, 3, 1.0)
    errs = []
    for n in (200, 400):
        g = make_grid(n, 0.5, 2.0)
        errs.append(float(np.abs(pde_residual_of_exact(ext, ext.law(), 0.5, g)).max()))
    r.ge("extinction residual order", math.log2(errs[0] / errs[1]), 1.8)
    return r.results


def _suite_pme_core(seed: int) -> List[CheckResult]:
    r = _Recorder("pme-core")
    rng = np.random.default_rng(seed)
    law = make_power_law(0.5, 2.0, 1)
    g = make_grid(256, -6.0, 6.0)
    x = g.centers()[0]
    drift = 0.0
    min_pre = math.inf
    worst_expand = 0.0
    worst_order = 0.0
    for _ in range(10):
        a = rng.uniform(0.0, 1.0, g.shape) * (np.abs(x) < 2.0)
        b = rng.uniform(0.0, 1.0, g.shape) * (np.abs(x) < 2.0)
        res = pme.l1_contraction_trial(DensityField(g, a), DensityField(g, b), law, 0.2)
        worst_expand = max(worst_expand, res.lhs - res.rhs)
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        res = pme.l1_contraction_trial(DensityField(g, lo), DensityField(g, hi), law, 0.2)
        worst_order = max(worst_order, res.positive_part_lhs)
        tr = pme.run(pme.PmeConfig(law, g, 0.2, series_every=10 ** 9), DensityField(g, a))
        m = tr.series_array("mass")
        drift = max(drift, abs(m[-1] - m[0]) / m[0])
        min_pre = min(min_pre, tr.min_pre_clamp)
    r.le("L1 contraction excess", worst_expand, 1e-12)
    r.le("comparison positive part", worst_order, 1e-12)

    box = DensityField(g, np.where(np.abs(x) < 0.25, 2.0, 0.0), 0.0)
    h = 0.05
    times = tuple(c + k * h for c in (2.0, 4.0) for k in (-1, 0, 1))
    tr = pme.run(pme.PmeConfig(law, g, 4.05, snapshot_times=times), box)
    m = tr.series_array("mass")
    drift = max(drift, float(np.max(np.abs(m - m[0]))) / m[0])
    min_pre = min(min_pre, tr.min_pre_clamp)
    ab = diagnostics.aronson_benilan_monitor(tr, law)
    scale = max(s.field.values.max() for s in tr.snapshots)
    r.le("Aronson-Benilan violation", ab.worst_violation, 10.0 * (h + g.dx ** 2) * scale)
    r.le("d_t rho L1 ratio", ab.max_l1_ratio, 1.1)
    r.le("relative mass drift", drift, 1e-10)
    r.ge("min density before clamping", min_pre, -1e-15)

    f = box
    worst = 0.0
    for _ in range(200):
        dt = pme.stable_dt(f, law, 0.5)
        nf = pme.step(f, law, dt)
        defect, sc = pme.dissipation_defect(f, nf, law, dt)
        worst = max(worst, abs(defect) / ((dt * dt + dt * g.dx ** 2) * sc))
        f = nf
    r.le("dissipation defect / (dt^2 + dt dx^2) scale", worst, 10.0)
    return r.results


def _suite_quasi(seed: int) -> List[CheckResult]:
    r = _Recorder("quasi")
    law = make_power_law(0.5, 2.0, 1)
    sol = make_barenblatt(2.0, 1, 0.5, C=1.0)
    reps = []
    for n, dt in ((128, 0.02), (256, 0.005), (512, 0.00125)):
        g = make_grid(n, -3.0, 3.0)
        reps.append(quasi.quasi_momentum_residual(quasi.triple_from_exact(sol, g, 1.0, dt, law), law))
    orders = [math.log2(a.mismatch_norm / b.mismatch_norm) for a, b in zip(reps, reps[1:])]
    r.ge("mismatch order", min(orders), 1.0)
    r.true("residual norms decrease", all(b.direct_residual_norm < a.direct_residual_norm
                                          and b.identity_rhs_norm < a.identity_rhs_norm
                                          for a, b in zip(reps, reps[1:])))
    g = make_grid(256, -3.0, 3.0)
    f = sol.sample(g, 1.0)
    u = quasi.velocity_from_density(f, law)
    rep = diagnostics.entropy_report((f, u), law)
    r.le("BD functional of quasi data / mass", rep.bd / f.mass, 1e-20)
    return r.results


def _suite_cns(seed: int) -> List[CheckResult]:
    r = _Recorder("cns")
    law = make_power_law(0.5, 2.0, 1)
    g = make_grid(128, 0.0, 1.0, boundary="periodic")
    x = g.centers()[0]
    rho = 1.0 + 0.3 * np.sin(2 * np.pi * x)
    state = cns.CnsState(g, rho, rho * 0.5 * np.sin(2 * np.pi * x))
    spec = cns.PressureSpec(1.0, 1.0, 2.0)
    tr = cns.cns_run(cns.CnsConfig(law, g, spec, 0.01), state)
    e = np.array([rep.energy for rep in tr.entropy])
    b = np.array([rep.bd for rep in tr.entropy])
    r.le("energy increase per step / E0", float(np.diff(e).max()) / e[0], 1e-6)
    r.le("BD increase per step / B0", float(np.diff(b).max()) / b[0], 1e-6)
    r.ge("pressure cross term", min(rep.pressure_cross for rep in tr.entropy), 0.0)
    r.le("relative mass drift", abs(tr.mass[-1] - tr.mass[0]) / tr.mass[0], 1e-12)
    r.true("gamma window (2, 2, 2, N 3)", cns.gamma_window(2, 2, 2, 3).admissible)
    r.true("gamma window (4, 2, 2, N 3) rejected", not cns.gamma_window(4, 2, 2, 3).admissible)
    r.true("gamma window exact at 5/6 + nu2/12",
           not cns.gamma_window(Fraction(3, 2), Fraction(5, 2), 8, 3).admissible)
    return r.results


SUITES: Dict[str, Callable[[int], List[CheckResult]]] = {
    "exact": _suite_exact,
    "pme-core": _suite_pme_core,
    "quasi": _suite_quasi,
    "cns": _suite_cns,
}


def run_suite(name: str = "all", seed: int = 42) -> List[CheckResult]:
    if name == "all":
        out = []
        for fn in SUITES.values():
            out.extend(fn(seed))
        return out
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from all, " + ", ".join(SUITES))
    return SUITES[name](seed)


def format_results(results: List[CheckResult], seed: int) -> str:
    lines = [f"seed = {seed}"]
    for c in results:
        mark = "PASS" if c.passed else "FAIL"
        lines.append(f"{mark}  [{c.suite}] {c.name}: {c.value:.6g} (tol {c.tolerance:.3g})")
    n_fail = sum(not c.passed for c in results)
    lines.append(f"{len(results) - n_fail} passed, {n_fail} failed")
    return "\n".join(lines) + "\n"
