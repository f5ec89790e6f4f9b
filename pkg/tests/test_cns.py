import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bdflow import cns, pme
from bdflow.discrete import DensityField, lp_norm, make_grid
from bdflow.errors import DomainError, GridMismatch, StabilityViolation
from bdflow.exact import make_barenblatt
from bdflow.viscosity import make_general_law, make_power_law


def periodic_wave(n=128, eps=1.0):
    g = make_grid(n, 0.0, 1.0, boundary="periodic")
    x = g.centers()[0]
    rho = 1.0 + 0.3 * np.sin(2 * np.pi * x)
    return g, cns.CnsState(g, rho, rho * 0.5 * np.sin(2 * np.pi * x)), cns.PressureSpec(eps)


def test_pressure_spec_validation():
    with pytest.raises(DomainError):
        cns.PressureSpec(-1.0)
    with pytest.raises(DomainError):
        cns.PressureSpec(1.0, a=0.0)
    with pytest.raises(DomainError):
        cns.PressureSpec(1.0, gamma=1.0)
    assert cns.PressureSpec(0.5, 2.0, 2.0).pressure(3.0) == pytest.approx(9.0)
    assert np.all(cns.PressureSpec(0.0).pressure(np.ones(3)) == 0.0)


def test_state_validation():
    g = make_grid(16, 0.0, 1.0)
    with pytest.raises(GridMismatch):
        cns.CnsState(make_grid(8, 0.0, 1.0, dim=2), np.ones((8, 8)), np.zeros((8, 8)))
    with pytest.raises(GridMismatch):
        cns.CnsState(g, np.ones(15), np.zeros(15))
    with pytest.raises(DomainError):
        cns.CnsState(g, np.ones(16), np.full(16, np.nan))


@pytest.mark.parametrize("gamma, nu1, nu2, dim, ok", [
    (2, 2, 2, 3, True),
    (Fraction(21, 20), 2, 2, 2, True),
    (4, 2, 2, 3, False),
    (Fraction(1, 1) + Fraction(1, 100), 2, 2, 3, True),
    (1 + Fraction(1, 10 ** 6), 2, 2, 3, True),
])
def test_gamma_window_examples(gamma, nu1, nu2, dim, ok):
    assert cns.gamma_window(gamma, nu1, nu2, dim).admissible is ok


def test_gamma_window_boundaries_are_strict():
    # lower end 5/6 + nu2/12 = 1 for nu2 = 2; upper end 2 + nu1/2 = 3
    assert not cns.gamma_window(3, 2, 2, 3).admissible
    assert cns.gamma_window(Fraction(29, 10), 2, 2, 3).windows_hit
    # 5/6 + 7 nu1/12 exceeds 2 + nu1/2 only once nu1 > 14
    hit = cns.gamma_window(Fraction(61, 5), 20, 2, 3).windows_hit
    assert len(hit) == 1 and "7 nu1/12" in hit[0]


def test_gamma_window_errors():
    with pytest.raises(DomainError):
        cns.gamma_window(2, 2, 2, 1)
    with pytest.raises(DomainError):
        cns.gamma_window(1, 2, 2, 3)
    with pytest.raises(DomainError):
        cns.gamma_window(2, 0, 2, 3)


def test_stable_dt_pure_viscosity():
    law = make_power_law(0.7, 1.0, 1)
    g = make_grid(50, 0.0, 1.0)
    st_ = cns.CnsState(g, np.ones(50), np.zeros(50))
    assert cns.cns_stable_dt(st_, law, cns.PressureSpec(0.0), 0.5) == pytest.approx(0.5 * g.dx ** 2 / (2 * 2 * 0.7))


def test_stable_dt_sound_speed_scaling():
    law = make_power_law(1e-6, 1.0, 1)
    g = make_grid(50, 0.0, 1.0)
    st_ = cns.CnsState(g, np.ones(50), np.zeros(50))
    a = cns.cns_stable_dt(st_, law, cns.PressureSpec(1.0), 0.5)
    b = cns.cns_stable_dt(st_, law, cns.PressureSpec(2.0), 0.5)
    assert a / b == pytest.approx(math.sqrt(2.0))


def test_stable_dt_vacuum():
    law = make_power_law(0.5, 2.0, 1)
    g = make_grid(50, 0.0, 1.0)
    st_ = cns.CnsState(g, np.zeros(50), np.zeros(50), rho_min=1e-10)
    assert cns.cns_stable_dt(st_, law, cns.PressureSpec(1.0), 0.5, remaining=0.3) == 0.3


@pytest.mark.parametrize("eps", [0.0, 1.0])
@pytest.mark.parametrize("boundary", ["periodic", "zeroflux"])
def test_constant_state_is_stationary(eps, boundary, law2):
    g = make_grid(32, 0.0, 1.0, boundary=boundary)
    st_ = cns.CnsState(g, np.full(32, 1.3), np.zeros(32))
    tr = cns.cns_run(cns.CnsConfig(law2, g, cns.PressureSpec(eps), 0.05, snapshot_times=(0.05,)), st_)
    assert np.allclose(tr.snapshots[-1].field.values, 1.3, rtol=0, atol=1e-14)
    assert np.abs(tr.snapshots[-1].velocity.components).max() < 1e-14


def test_step_rejects_large_dt(law2):
    g, st_, spec = periodic_wave()
    with pytest.raises(StabilityViolation):
        cns.cns_step(st_, law2, spec, 10 * cns.cns_stable_dt(st_, law2, spec, 1.0))


def test_step_needs_power_law():
    law = make_general_law(lambda s: s ** 2, lambda s: 2 * s, 1, 1.0, 1.0)
    g, st_, spec = periodic_wave()
    with pytest.raises(DomainError):
        cns.cns_step(st_, law, spec, 1e-6)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2 ** 31), eps=st.sampled_from([0.0, 0.1, 1.0]))
def test_mass_and_momentum_conservation_periodic(seed, eps):
    rng = np.random.default_rng(seed)
    law = make_power_law(0.5, 2.0, 1)
    g = make_grid(64, 0.0, 1.0, boundary="periodic")
    rho = rng.uniform(0.5, 1.5, 64)
    st_ = cns.CnsState(g, rho, rho * rng.normal(scale=0.2, size=64))
    spec = cns.PressureSpec(eps)
    new = cns.cns_step(st_, law, spec, cns.cns_stable_dt(st_, law, spec, 0.5))
    assert new.rho.sum() == pytest.approx(st_.rho.sum(), rel=1e-14)
    assert abs(new.mom.sum() - st_.mom.sum()) <= 1e-12 * np.abs(st_.mom).sum()


def test_energy_and_bd_decrease_on_wave(law2):
    g, st_, spec = periodic_wave()
    tr = cns.cns_run(cns.CnsConfig(law2, g, spec, 0.01), st_)
    e = np.array([r.energy for r in tr.entropy])
    b = np.array([r.bd for r in tr.entropy])
    assert np.diff(e).max() <= 1e-6 * e[0]
    assert np.diff(b).max() <= 1e-6 * b[0]
    assert min(r.pressure_cross for r in tr.entropy) >= 0.0
    assert abs(tr.mass[-1] - tr.mass[0]) <= 1e-12 * tr.mass[0]


def test_quasi_data_tracks_pme(law2, barenblatt2):
    g = make_grid(256, -5.0, 5.0)
    rho0 = barenblatt2.sample(g, 1.0)
    st_ = cns.quasi_state(rho0, law2)
    tr = cns.cns_run(cns.CnsConfig(law2, g, cns.PressureSpec(0.0), 1.1, snapshot_times=(1.1,)), st_)
    ref = pme.run(pme.PmeConfig(law2, g, 1.1, snapshot_times=(1.1,)), rho0)
    diff = tr.snapshots[-1].field.values - ref.snapshots[-1].field.values
    assert lp_norm((g, diff), 1.0) < 0.02 * rho0.mass
    bd = np.array([r.bd for r in tr.entropy])
    assert bd.max() <= 1e-3 * tr.entropy[0].energy


def test_pressure_accumulators_scale_with_eps(law2):
    g, st_, _ = periodic_wave(64)
    out = []
    for eps in (0.2, 0.1):
        tr = cns.cns_run(cns.CnsConfig(law2, g, cns.PressureSpec(eps), 0.002), st_)
        out.append(tr)
    assert out[0].pressure_l1l1 / out[1].pressure_l1l1 == pytest.approx(2.0, rel=0.02)
    assert out[0].pressure_linf_l1 > out[1].pressure_linf_l1 > 0.0
    assert out[0].pressure_l53 > 0.0


def test_entropy_csv(tmp_path, law2):
    g, st_, spec = periodic_wave(32)
    tr = cns.cns_run(cns.CnsConfig(law2, g, spec, 0.001, entropy_every=5), st_)
    lines = tr.write_entropy_csv(tmp_path / "e.csv").read_text().splitlines()
    assert lines[0] == "t,energy,bd,mv,pressure_cross_term"
    assert len(lines) == len(tr.entropy) + 1


def test_sweep_input_checks(law2, barenblatt2):
    g = make_grid(64, -4.0, 4.0)
    base = cns.CnsConfig(law2, g, cns.PressureSpec(0.1), 1.05)
    with pytest.raises(DomainError):
        cns.vanishing_pressure_sweep(base, barenblatt2.sample(g, 1.0), [0.01, 0.1])
    with pytest.raises(DomainError):
        cns.vanishing_pressure_sweep(base, barenblatt2.sample(g, 1.0), [])


def test_small_sweep(tmp_path, law2, barenblatt2):
    g = make_grid(96, -4.0, 4.0)
    base = cns.CnsConfig(law2, g, cns.PressureSpec(0.1), 1.1)
    table = cns.vanishing_pressure_sweep(base, barenblatt2.sample(g, 1.0), [0.1, 0.0], n_compare=4, workers=1)
    d = table.column("sup_l1_dist")
    assert d[0] > d[1]
    assert table.rows[1].pressure_l1l1 == 0.0
    assert len(table.compare_times) == 4 and table.compare_times[-1] == 1.1
    lines = table.write_csv(tmp_path / "c.csv").read_text().splitlines()
    assert lines[0] == ",".join(cns.CONVERGENCE_HEADER) and len(lines) == 3
