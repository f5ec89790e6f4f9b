import dataclasses
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bdflow.discrete import interior_mask, make_grid
from bdflow.errors import DomainError, ExtinctionRegime, NoScalingInvariance, UnsupportedRegime
from bdflow.exact import (ExtinctionSolution, HeatKernel, Regime, critical_exponent, make_barenblatt,
                          pde_residual_of_exact, pme_exponents, profile_residual,
                          similarity_exponents_cns)
from bdflow.viscosity import make_power_law


def beta_fn(a, b):
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


def sphere(dim):
    return 2.0 * math.pi ** (dim / 2) / math.gamma(dim / 2)


def mass_oracle(alpha, dim, C, k):
    # closed forms of the radial integrals through the Beta function
    if alpha > 1.0:
        m = 1.0 / (alpha - 1.0)
        return 0.5 * sphere(dim) * C ** (m + dim / 2) * k ** (-dim / 2) * beta_fn(dim / 2, m + 1)
    n = 1.0 / (1.0 - alpha)
    return 0.5 * sphere(dim) * C ** (dim / 2 - n) * k ** (-dim / 2) * beta_fn(dim / 2, n - dim / 2)


@pytest.mark.parametrize("alpha, dim", [(2.0, 1), (2.0, 2), (2.0, 3), (3.0, 1), (1.5, 2), (0.8, 1), (0.9, 3)])
@pytest.mark.parametrize("C", [0.5, 1.0, 3.0])
def test_mass_matches_beta_function(alpha, dim, C):
    sol = make_barenblatt(alpha, dim, 0.5, C=C)
    assert sol.mass == pytest.approx(mass_oracle(alpha, dim, C, sol.k), rel=1e-9)


@pytest.mark.parametrize("alpha, dim", [(2.0, 1), (2.0, 3), (0.8, 2)])
def test_mass_roundtrip(alpha, dim):
    ref = make_barenblatt(alpha, dim, 0.5, C=1.7)
    sol = make_barenblatt(alpha, dim, 0.5, mass=ref.mass)
    assert sol.C == pytest.approx(1.7, rel=1e-9)


def test_k_for_alpha2_dim1():
    sol = make_barenblatt(2.0, 1, 0.5, C=1.0)
    assert sol.regime is Regime.POROUS
    assert sol.k == pytest.approx(1.0 / 12.0)
    assert sol.support_radius(1.0) == pytest.approx(math.sqrt(12.0))


@pytest.mark.parametrize("alpha, dim", [(2.0, 1), (2.0, 2), (3.0, 2), (0.8, 2)])
def test_profile_equation(alpha, dim):
    sol = make_barenblatt(alpha, dim, 0.5, C=1.0)
    errs = []
    for n in (96, 192):
        g = make_grid(n, -6.0, 6.0, dim=dim)
        res = profile_residual(sol, g)
        if alpha > 1.0:
            mask = g.radius() < 0.8 * math.sqrt(sol.C / sol.k)
        else:
            mask = g.radius() < 4.0
        errs.append(np.abs(res[mask]).max())
    assert errs[1] < errs[0]
    assert errs[1] < 5e-3


def test_k_without_dimension_factor_fails_in_2d():
    sol = make_barenblatt(2.0, 2, 0.5, C=1.0)
    wrong = dataclasses.replace(sol, k=sol.k * 2)
    g = make_grid(128, -3.0, 3.0, dim=2)
    mask = interior_mask(sol.profile(g.radius()), 0.05, 3) & interior_mask(wrong.profile(g.radius()), 0.05, 3)
    good = np.abs(profile_residual(sol, g)[mask]).max()
    bad = np.abs(profile_residual(wrong, g)[mask]).max()
    assert bad > 50 * good


@settings(max_examples=30, deadline=None)
@given(lam=st.floats(0.2, 5.0), t=st.floats(0.1, 10.0), r=st.floats(0.0, 3.0))
def test_scaling_identity(lam, t, r):
    sol = make_barenblatt(2.0, 2, 0.5, C=1.0)
    ex = sol.exponents
    lhs = sol.eval_radial(lam * t, lam ** ex.beta_space * r)
    rhs = lam ** (-ex.gamma1) * sol.eval_radial(t, r)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-14)


@pytest.mark.parametrize("t", [0.5, 1.0, 4.0])
def test_time_derivative_matches_difference(t):
    sol = make_barenblatt(2.0, 1, 0.5, C=1.0)
    r = np.linspace(0.0, 0.8 * sol.support_radius(t), 7)
    h = 1e-6
    fd = (sol.eval_radial(t + h, r) - sol.eval_radial(t - h, r)) / (2 * h)
    assert np.allclose(sol.time_derivative_radial(t, r), fd, rtol=1e-6, atol=1e-9)


def test_mass_constant_in_time():
    sol = make_barenblatt(2.0, 1, 0.5, C=1.0)
    g = make_grid(4000, -20.0, 20.0)
    for t in (0.5, 2.0, 8.0):
        assert sol.sample(g, t).mass == pytest.approx(sol.mass, rel=1e-4)


def test_heat_kernel():
    hk = make_barenblatt(1.0, 1, 0.5, mass=2.0)
    assert isinstance(hk, HeatKernel)
    r = np.array([0.0, 1.0])
    expected = 2.0 * (8 * math.pi * 0.5 * 1.0) ** -0.5 * np.exp(-r ** 2 / (8 * 0.5 * 1.0))
    assert np.allclose(hk.eval_radial(1.0, r), expected, rtol=1e-14)
    with pytest.raises(DomainError):
        make_barenblatt(1.0, 1, 0.5, C=1.0)
    with pytest.raises(UnsupportedRegime):
        profile_residual(hk, make_grid(16, -1, 1))


@pytest.mark.parametrize("alpha, dim, g1, beta", [
    (2.0, 3, Fraction(3, 5), Fraction(1, 5)),
    (2.0, 1, Fraction(1, 3), Fraction(1, 3)),
    (1.0, 2, Fraction(1), Fraction(1, 2)),
    (3.0, 2, Fraction(1, 3), Fraction(1, 6)),
])
def test_exponent_values(alpha, dim, g1, beta):
    ex = pme_exponents(alpha, dim)
    assert ex.gamma1 == pytest.approx(float(g1), rel=1e-15)
    assert ex.beta_space == pytest.approx(float(beta), rel=1e-15)
    assert ex.sigma_mass == pytest.approx(2 * float(beta), rel=1e-15)


@settings(max_examples=50, deadline=None)
@given(alpha=st.floats(1.0, 4.0), dim=st.integers(1, 3), p=st.floats(1.0, 50.0))
def test_decay_exponent_identities(alpha, dim, p):
    ex = pme_exponents(alpha, dim)
    assert ex.time_exp(p) == pytest.approx(ex.gamma1 * (1 - 1 / p), abs=1e-12)
    d = dim * (alpha - 1) + 2
    assert ex.mass_exp(p) == pytest.approx((dim * (alpha - 1) + 2 * p) / (d * p), rel=1e-12)
    assert ex.time_exp(1.0) == 0.0
    assert ex.mass_exp(1.0) == pytest.approx(1.0)


def test_mass_exp_closed_form():
    ex = pme_exponents(2.0, 1)
    assert ex.mass_exp(2.0) == pytest.approx(Fraction(1 + 4, 3 * 2))
    assert ex.time_exp(math.inf) == pytest.approx(1.0 / 3.0)
    assert ex.mass_exp(math.inf) == pytest.approx(2.0 / 3.0)
    with pytest.raises(DomainError):
        ex.time_exp(0.5)


@pytest.mark.parametrize("dim, mc", [(1, 0.0), (2, 0.0), (3, 1.0 / 3.0), (4, 0.5)])
def test_critical_exponent(dim, mc):
    assert critical_exponent(dim) == pytest.approx(mc)


def test_extinction_regime_rejected():
    with pytest.raises(ExtinctionRegime):
        pme_exponents(0.2, 3)
    with pytest.raises(ExtinctionRegime):
        make_barenblatt(0.2, 3, 0.5, C=1.0)


def test_extinction_constant():
    ext = ExtinctionSolution.create(0.2, 3, 1.0)
    assert ext.c_alpha == pytest.approx(1.0)
    assert ext.mu_c == pytest.approx(2.5)
    with pytest.raises(DomainError):
        ext.eval_radial(1.5, np.array([1.0]))
    with pytest.raises(DomainError):
        ExtinctionSolution.create(0.5, 3, 1.0)


def test_extinction_residual_second_order():
    ext = ExtinctionSolution.create(0.2, 3, 1.0)
    errs = []
    for n in (100, 200, 400):
        g = make_grid(n, 0.5, 2.0)
        errs.append(np.abs(pde_residual_of_exact(ext, ext.law(), 0.5, g)).max())
    assert math.log2(errs[0] / errs[1]) > 1.8
    assert math.log2(errs[1] / errs[2]) > 1.8


@pytest.mark.parametrize("alpha, dim", [(2.0, 1), (2.0, 2), (1.0, 1)])
def test_barenblatt_pde_residual_converges(alpha, dim):
    sol = make_barenblatt(alpha, dim, 0.5, mass=1.0)
    law = make_power_law(0.5, alpha, dim)
    errs = []
    for n in (64, 128):
        g = make_grid(n, -3.0, 3.0, dim=dim)
        res = pde_residual_of_exact(sol, law, 1.0, g)
        mask = interior_mask(sol.sample(g, 1.0).values, 0.05, 3)
        errs.append(np.abs(res[mask]).max())
    assert math.log2(errs[0] / errs[1]) > 1.5


def test_cns_exponents():
    e = similarity_exponents_cns(2, 3)
    assert (e.e_rho, e.e_u, e.e_x) == (1.0, 1.0, 0.0)
    e = similarity_exponents_cns(1, 2)
    assert e.e_u + e.e_x == pytest.approx(1.0)
    with pytest.raises(NoScalingInvariance):
        similarity_exponents_cns(1.5, 1.5)
