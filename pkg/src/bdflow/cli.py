"""Command-line entry point: ``bdflow {exponents,pme,cns,sweep,verify}``."""

from __future__ import annotations

import argparse
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import cns, diagnostics, kernels, pme, verify
from .config import RunConfig, load_config
from .discrete import DensityField, lp_norm, write_field_csv
from .errors import BdflowError, ConfigError, DomainError
from .exact import pme_exponents, similarity_exponents_cns

log = logging.getLogger("bdflow")

EXIT_OK, EXIT_FAILED, EXIT_ERROR = 0, 1, 2


def _frac(x: float) -> str:
    if not np.isfinite(x):
        return str(x)
    f = Fraction(x).limit_denominator(10 ** 6)
    if abs(float(f) - x) <= 1e-12 * max(1.0, abs(x)):
        return str(f)
    return repr(x)


def _out_dir(args, cfg: RunConfig) -> Path:
    out = Path(args.out if args.out else cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_report(out: Path, title: str, fields: dict) -> Path:
    path = out / "report.txt"
    path.write_text(diagnostics.format_report(title, fields))
    return path


def cmd_exponents(args) -> int:
    alpha, dim = args.alpha, args.dim
    ex = pme_exponents(alpha, dim)
    lines = [
        f"alpha = {_frac(alpha)}, N = {dim}",
        f"gamma1 = {_frac(ex.gamma1)}",
        f"beta = {_frac(ex.beta_space)}",
        f"sigma = {_frac(ex.sigma_mass)}",
        f"m_c = {_frac(ex.m_c)}",
    ]
    for p in args.p:
        lines.append(f"time_exp({_frac(p)}) = {_frac(ex.time_exp(p))}, mass_exp({_frac(p)}) = "
                     f"{_frac(ex.mass_exp(p))}")
    if args.theta is not None and args.gamma is not None:
        s = similarity_exponents_cns(args.theta, args.gamma)
        lines.append(f"theta = {_frac(args.theta)}, gamma = {_frac(args.gamma)}: "
                     f"rho {_frac(s.e_rho)}, u {_frac(s.e_u)}, x {_frac(s.e_x)}")
    print("\n".join(lines))
    return EXIT_OK


def _snapshot_times(cfg: RunConfig):
    return cfg.snapshot_times if cfg.snapshot_times else (cfg.t_end,)


def cmd_pme(args) -> int:
    cfg = load_config(args.config, "pme")
    out = _out_dir(args, cfg)
    law, grid = cfg.law(), cfg.grid()
    rho0 = cfg.initial_field(grid)
    tr = pme.run(pme.PmeConfig(law, grid, cfg.t_end, cfl=cfg.cfl, snapshot_times=_snapshot_times(cfg)), rho0)
    tr.write_series_csv(out / "series.csv")
    tr.write_snapshots(out / "snapshots")
    mass = tr.series_array("mass")
    final = tr.snapshots[-1].field
    fields = {
        "command": "pme",
        "backend": kernels.BACKEND,
        "alpha": law.alpha,
        "mu_c": law.mu_c,
        "dim": grid.dim,
        "n": ",".join(str(k) for k in grid.n),
        "boundary": grid.boundary.value,
        "kind": cfg.kind,
        "t_start": rho0.time,
        "t_end": cfg.t_end,
        "cfl": cfg.cfl,
        "steps": tr.steps,
        "mass_drift": float(np.max(np.abs(mass - mass[0])) / mass[0]),
        "min_pre_clamp": tr.min_pre_clamp,
        "clamped_mass": tr.clamped_mass,
        "mass_drift_within_tol": bool(np.max(np.abs(mass - mass[0])) / mass[0] <= cfg.mass_drift),
        "min_density_within_tol": bool(tr.min_pre_clamp >= cfg.min_density),
        "final_linf": float(final.values.max()),
        "final_support_radius": float(tr.series_array("support_radius")[-1]),
    }
    ref = cfg.reference()
    if ref is not None:
        exact = ref.sample(grid, final.time, [cfg.center] * grid.dim)
        fields["l1_error_vs_exact"] = lp_norm(DensityField(grid, final.values - exact.values), 1.0)
        fields["relative_l1_error"] = fields["l1_error_vs_exact"] / exact.mass
    for p in (2.0, np.inf):
        try:
            fit = diagnostics.decay_fit(tr, p)
        except DomainError as exc:
            log.info("decay fit skipped: %s", exc)
            break
        fields[f"decay_slope_p{p:g}"] = fit.fitted_slope
        fields[f"decay_theory_p{p:g}"] = fit.theory_slope
    _write_report(out, "pme", fields)
    print(diagnostics.format_report("pme", fields), end="")
    return EXIT_OK


def _pressure(cfg: RunConfig, eps: float) -> cns.PressureSpec:
    return cns.PressureSpec(eps, cfg.pressure_a, cfg.gamma)


def cmd_cns(args) -> int:
    cfg = load_config(args.config, "cns")
    out = _out_dir(args, cfg)
    law, grid = cfg.law(), cfg.grid()
    state0 = cns.quasi_state(cfg.initial_field(grid), law)
    spec = _pressure(cfg, cfg.eps)
    tr = cns.cns_run(cns.CnsConfig(law, grid, spec, cfg.t_end, cfl=cfg.cfl,
                                   snapshot_times=_snapshot_times(cfg)), state0)
    tr.write_entropy_csv(out / "entropy.csv")
    snap_dir = out / "snapshots"
    snap_dir.mkdir(exist_ok=True)
    for i, s in enumerate(tr.snapshots):
        write_field_csv(snap_dir / f"snap_{i:04d}_{s.time:.6g}.csv", s.field, s.velocity)
    e = np.array([r.energy for r in tr.entropy])
    b = np.array([r.bd for r in tr.entropy])
    mv = np.array([r.mv for r in tr.entropy])
    fields = {
        "command": "cns",
        "backend": kernels.BACKEND,
        "alpha": law.alpha,
        "mu_c": law.mu_c,
        "eps": spec.eps,
        "a": spec.a,
        "gamma": spec.gamma,
        "n": grid.n[0],
        "t_end": cfg.t_end,
        "steps": tr.steps,
        "mass_drift": abs(tr.mass[-1] - tr.mass[0]) / tr.mass[0],
        "max_energy_increase": float(np.diff(e).max()) if e.size > 1 else 0.0,
        "max_bd_increase": float(np.diff(b).max()) if b.size > 1 else 0.0,
        "min_pressure_cross": float(min(r.pressure_cross for r in tr.entropy)),
        "entropy_within_slack": bool(e.size < 2 or (np.diff(e).max() <= cfg.entropy_slack * e[0]
                                                     and np.diff(b).max() <= cfg.entropy_slack * b[0])),
        "mv_excess": float(mv.max() - mv[0]),
        "pressure_l1l1": tr.pressure_l1l1,
        "pressure_linf_l1": tr.pressure_linf_l1,
        "pressure_l53": tr.pressure_l53,
    }
    _write_report(out, "cns", fields)
    print(diagnostics.format_report("cns", fields), end="")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config, "sweep")
    out = _out_dir(args, cfg)
    law, grid = cfg.law(), cfg.grid()
    base = cns.CnsConfig(law, grid, _pressure(cfg, cfg.eps_list[0]), cfg.t_end, cfl=cfg.cfl)
    table = cns.vanishing_pressure_sweep(base, cfg.initial_field(grid), cfg.eps_list,
                                         workers=cfg.workers or None)
    table.write_csv(out / "convergence.csv")
    fields = {"command": "sweep", "backend": kernels.BACKEND, "alpha": law.alpha, "gamma": cfg.gamma,
              "n": grid.n[0], "t_end": cfg.t_end, "support_threshold": table.support_threshold}
    for row in table.rows:
        fields[f"sup_l1_dist[eps={row.eps:g}]"] = row.sup_l1_dist
    _write_report(out, "sweep", fields)
    print(diagnostics.format_report("sweep", fields), end="")
    return EXIT_OK


def cmd_verify(args) -> int:
    results = verify.run_suite(args.suite, args.seed)
    text = verify.format_results(results, args.seed)
    print(text, end="")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.txt").write_text(text)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bdflow", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exponents", help="print self-similar exponents")
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--p", type=float, action="append", default=[], help="Lebesgue exponent (repeatable)")
    p.add_argument("--theta", type=float)
    p.add_argument("--gamma", type=float)
    p.set_defaults(func=cmd_exponents)

    for name, fn, help_text in (("pme", cmd_pme, "run the porous-medium solver"),
                                ("cns", cmd_cns, "run the Navier-Stokes solver"),
                                ("sweep", cmd_sweep, "vanishing-pressure study")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True)
        p.add_argument("--out")
        p.set_defaults(func=fn)

    p = sub.add_parser("verify", help="run self-check suites")
    p.add_argument("--suite", default="all", choices=["all", *verify.SUITES])
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"bdflow: config error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (BdflowError, OSError) as exc:
        print(f"bdflow: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
