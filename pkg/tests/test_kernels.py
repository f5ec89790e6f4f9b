import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bdflow import kernels

compiled = kernels.compiled()
backends = [kernels.python] + ([compiled] if compiled is not None else [])
needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled kernels not built")


def test_backend_name():
    assert kernels.BACKEND in ("python", "cython")


@needs_compiled
@settings(max_examples=40, deadline=None)
@given(rho=arrays(float, 40, elements=st.floats(0.0, 5.0)), periodic=st.booleans(),
       alpha=st.sampled_from([1.0, 1.5, 2.0, 3.0]))
def test_pme_step_parity_1d(rho, periodic, alpha):
    args = (0.5, alpha, 1e-4, (0.05,), periodic)
    a = kernels.python.pme_step_power(rho.copy(), *args)
    b = compiled.pme_step_power(rho.copy(), *args)
    assert np.allclose(a[0], b[0], rtol=1e-13, atol=1e-14)
    assert a[1] == pytest.approx(b[1], rel=1e-13, abs=1e-14)
    assert a[2] == pytest.approx(b[2], rel=1e-13)


@needs_compiled
@pytest.mark.parametrize("periodic", [False, True])
def test_pme_step_parity_2d(periodic, rng):
    rho = rng.uniform(0.0, 2.0, (24, 20))
    args = (0.5, 2.0, 1e-4, (0.1, 0.05), periodic)
    a = kernels.python.pme_step_power(rho, *args)
    b = compiled.pme_step_power(rho, *args)
    assert np.allclose(a[0], b[0], rtol=1e-13, atol=1e-14)
    assert a[2] == pytest.approx(b[2], rel=1e-13)


@needs_compiled
@pytest.mark.parametrize("shape, spacing", [((50,), (0.1,)), ((12, 16), (0.1, 0.2))])
def test_flux_laplacian_parity(shape, spacing, rng):
    g = rng.normal(size=shape)
    for periodic in (False, True):
        a = kernels.python.flux_laplacian(g, spacing, periodic)
        b = compiled.flux_laplacian(g, spacing, periodic)
        assert np.allclose(a, b, rtol=1e-13, atol=1e-12)


@needs_compiled
@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 31), periodic=st.booleans(), eps=st.sampled_from([0.0, 0.1, 1.0]))
def test_cns_step_parity(seed, periodic, eps):
    rng = np.random.default_rng(seed)
    rho = rng.uniform(0.1, 2.0, 32)
    mom = rho * rng.normal(scale=0.3, size=32)
    args = (0.5, 2.0, eps, 1.0, 2.0, 1e-4, 1.0 / 32, periodic, 1e-10)
    ra, ma = kernels.python.cns_step_1d(rho.copy(), mom.copy(), *args)
    rb, mb = compiled.cns_step_1d(rho.copy(), mom.copy(), *args)
    assert np.allclose(ra, rb, rtol=1e-12, atol=1e-14)
    assert np.allclose(ma, mb, rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("impl", backends)
def test_max_diffusivity(impl):
    rho = np.array([0.0, 1.0, 3.0])
    assert impl.max_diffusivity_power(rho, 0.5, 2.0) == pytest.approx(6.0)
    assert impl.max_diffusivity_power(rho, 0.5, 1.0) == pytest.approx(1.0)
    assert impl.max_diffusivity_power(rho, 0.5, 0.8) == float("inf")


@pytest.mark.parametrize("impl", backends)
def test_pme_step_conserves_mass(impl, rng):
    rho = rng.uniform(0.0, 1.0, 64)
    out, lo, _ = impl.pme_step_power(rho, 0.5, 2.0, 1e-4, (0.1,), False)
    assert lo == out.min()
    assert out.sum() == pytest.approx(rho.sum(), rel=1e-13)


@pytest.mark.parametrize("impl", backends)
def test_kernels_do_not_mutate_input(impl, rng):
    rho = rng.uniform(0.1, 1.0, 32)
    mom = rng.normal(size=32)
    r0, m0 = rho.copy(), mom.copy()
    impl.pme_step_power(rho, 0.5, 2.0, 1e-4, (0.1,), False)
    impl.cns_step_1d(rho, mom, 0.5, 2.0, 1.0, 1.0, 2.0, 1e-4, 0.1, False, 1e-10)
    assert np.array_equal(rho, r0) and np.array_equal(mom, m0)


def test_backend_can_be_forced_to_python():
    import os
    import subprocess
    import sys

    env = dict(os.environ, BDFLOW_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", "from bdflow import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
