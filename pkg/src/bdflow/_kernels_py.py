"""Pure numpy implementations of the hot stencil kernels.

The compiled module ``bdflow._kernels`` exposes the same functions with the
same signatures; :mod:`bdflow.kernels` picks one at import time.
"""

import numpy as np

BACKEND = "python"


def _axis_flux_difference(g, axis, h, periodic):
    """(F[j+1/2] - F[j-1/2]) / h with F the face difference of g over h."""
    if periodic:
        right = np.roll(g, -1, axis=axis) - g
        return (right - np.roll(right, 1, axis=axis)) / (h * h)
    d = np.diff(g, axis=axis)
    shape = list(g.shape)
    shape[axis] = 1
    zero = np.zeros(shape)
    faces = np.concatenate([zero, d, zero], axis=axis)
    hi = [slice(None)] * g.ndim
    lo = [slice(None)] * g.ndim
    hi[axis] = slice(1, None)
    lo[axis] = slice(None, -1)
    return (faces[tuple(hi)] - faces[tuple(lo)]) / (h * h)


def flux_laplacian(g, spacing, periodic):
    out = np.zeros(g.shape)
    for axis in range(g.ndim):
        out += _axis_flux_difference(g, axis, spacing[axis], periodic)
    return out


def pme_step_power(rho, mu_c, alpha, dt, spacing, periodic):
    """One explicit step of d_t rho = 2 Delta(mu_c rho^alpha).

    Returns the updated (unclamped) array, its minimum and the largest
    diffusivity 2 mu'(rho) of the new state.
    """
    g = mu_c * np.power(rho, alpha)
    new = rho + (2.0 * dt) * flux_laplacian(g, spacing, periodic)
    return new, float(new.min()), max_diffusivity_power(new, mu_c, alpha)


def max_diffusivity_power(rho, mu_c, alpha):
    """max over cells of 2 mu'(rho) for mu = mu_c rho^alpha."""
    if alpha == 1.0:
        return 2.0 * mu_c
    if alpha > 1.0:
        r = max(float(rho.max()), 0.0)
    else:
        pos = rho[rho > 0.0]
        if pos.size < rho.size:
            return float("inf")
        r = float(pos.min())
    return 2.0 * alpha * mu_c * r ** (alpha - 1.0)


def cns_step_1d(rho, mom, mu_c, alpha, eps, a, gamma, dt, dx, periodic, rho_min):
    """Explicit conservative step of the 1D Navier-Stokes system.

    Upwind convective fluxes, centred pressure, viscous flux with the
    harmonic face average of 2 alpha mu_c rho^alpha.
    """
    n = rho.size
    u = mom / np.maximum(rho, rho_min)
    p = eps * a * np.power(rho, gamma)
    nu = 2.0 * alpha * mu_c * np.power(rho, alpha)
    if periodic:
        rho_r = np.roll(rho, -1)
        mom_r = np.roll(mom, -1)
        u_r = np.roll(u, -1)
        p_r = np.roll(p, -1)
        nu_r = np.roll(nu, -1)
        rho_l, mom_l, u_l, p_l, nu_l = rho, mom, u, p, nu
    else:
        # faces 0..n, ghost cells mirror rho and reflect u
        rho_l = np.concatenate([[rho[0]], rho])
        rho_r = np.concatenate([rho, [rho[-1]]])
        u_l = np.concatenate([[-u[0]], u])
        u_r = np.concatenate([u, [-u[-1]]])
        mom_l = np.concatenate([[-mom[0]], mom])
        mom_r = np.concatenate([mom, [-mom[-1]]])
        p_l = np.concatenate([[p[0]], p])
        p_r = np.concatenate([p, [p[-1]]])
        nu_l = np.concatenate([[nu[0]], nu])
        nu_r = np.concatenate([nu, [nu[-1]]])
    uf = 0.5 * (u_l + u_r)
    up = uf > 0.0
    f_mass = uf * np.where(up, rho_l, rho_r)
    f_mom = uf * np.where(up, mom_l, mom_r)
    denom = nu_l + nu_r
    nuf = np.where(denom > 0.0, 2.0 * nu_l * nu_r / np.where(denom > 0.0, denom, 1.0), 0.0)
    f_visc = nuf * (u_r - u_l) / dx
    f_p = 0.5 * (p_l + p_r)
    if not periodic:
        f_mass[0] = f_mass[-1] = 0.0
        f_mom[0] = f_mom[-1] = 0.0
    flux = f_mom + f_p - f_visc
    if periodic:
        d_mass = f_mass - np.roll(f_mass, 1)
        d_mom = flux - np.roll(flux, 1)
    else:
        d_mass = f_mass[1:] - f_mass[:-1]
        d_mom = flux[1:] - flux[:-1]
    assert d_mass.size == n
    return rho - (dt / dx) * d_mass, mom - (dt / dx) * d_mom
