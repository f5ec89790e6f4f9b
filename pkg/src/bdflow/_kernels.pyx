# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled stencil kernels; mirrors bdflow._kernels_py function for function."""

import numpy as np
cimport numpy as cnp
from libc.math cimport pow, INFINITY

cnp.import_array()

BACKEND = "cython"


cdef inline double _powa(double x, double a) nogil:
    if a == 1.0:
        return x
    if a == 2.0:
        return x * x
    return pow(x, a)


cdef void _lap1d(const double[::1] g, double[::1] out, double h, bint periodic) noexcept nogil:
    cdef Py_ssize_t n = g.shape[0], j
    cdef double inv = 1.0 / (h * h), fl, fr
    if periodic:
        fl = g[0] - g[n - 1]
    else:
        fl = 0.0
    for j in range(n):
        if j < n - 1:
            fr = g[j + 1] - g[j]
        elif periodic:
            fr = g[0] - g[j]
        else:
            fr = 0.0
        out[j] += (fr - fl) * inv
        fl = fr


cdef void _lap2d(const double[:, ::1] g, double[:, ::1] out, double hx, double hy,
                 bint periodic) noexcept nogil:
    cdef Py_ssize_t nx = g.shape[0], ny = g.shape[1], i, j, ip, im, jp, jm
    cdef double ix = 1.0 / (hx * hx), iy = 1.0 / (hy * hy), fr, fl
    for i in range(nx):
        for j in range(ny):
            # x faces
            if i < nx - 1:
                fr = g[i + 1, j] - g[i, j]
            elif periodic:
                fr = g[0, j] - g[i, j]
            else:
                fr = 0.0
            if i > 0:
                fl = g[i, j] - g[i - 1, j]
            elif periodic:
                fl = g[i, j] - g[nx - 1, j]
            else:
                fl = 0.0
            out[i, j] += (fr - fl) * ix
            if j < ny - 1:
                fr = g[i, j + 1] - g[i, j]
            elif periodic:
                fr = g[i, 0] - g[i, j]
            else:
                fr = 0.0
            if j > 0:
                fl = g[i, j] - g[i, j - 1]
            elif periodic:
                fl = g[i, j] - g[i, ny - 1]
            else:
                fl = 0.0
            out[i, j] += (fr - fl) * iy


def flux_laplacian(g, spacing, periodic):
    g = np.ascontiguousarray(g, dtype=np.float64)
    out = np.zeros_like(g)
    if g.ndim == 1:
        _lap1d(g, out, spacing[0], periodic)
    elif g.ndim == 2:
        _lap2d(g, out, spacing[0], spacing[1], periodic)
    else:
        raise ValueError("1D and 2D arrays only")
    return out


def max_diffusivity_power(rho, double mu_c, double alpha):
    cdef const double[::1] r = np.ascontiguousarray(rho, dtype=np.float64).ravel()
    cdef Py_ssize_t k, n = r.shape[0]
    cdef double best
    if alpha == 1.0:
        return 2.0 * mu_c
    if alpha > 1.0:
        best = 0.0
        for k in range(n):
            if r[k] > best:
                best = r[k]
    else:
        best = INFINITY
        for k in range(n):
            if r[k] <= 0.0:
                return INFINITY
            if r[k] < best:
                best = r[k]
    return 2.0 * alpha * mu_c * pow(best, alpha - 1.0)


def pme_step_power(rho, double mu_c, double alpha, double dt, spacing, bint periodic):
    rho = np.ascontiguousarray(rho, dtype=np.float64)
    g = np.empty_like(rho)
    cdef double[::1] gf = g.reshape(-1)
    cdef const double[::1] rf = rho.reshape(-1)
    cdef Py_ssize_t k, n = rf.shape[0]
    for k in range(n):
        gf[k] = mu_c * _powa(rf[k], alpha)
    lap = np.zeros_like(rho)
    if rho.ndim == 1:
        _lap1d(g, lap, spacing[0], periodic)
    else:
        _lap2d(g, lap, spacing[0], spacing[1], periodic)
    cdef double[::1] lf = lap.reshape(-1)
    cdef double two_dt = 2.0 * dt, v, vmin = INFINITY, vmax = -INFINITY, vpos = INFINITY
    cdef bint has_nonpos = False
    for k in range(n):
        v = rf[k] + two_dt * lf[k]
        lf[k] = v
        if v < vmin:
            vmin = v
        if v > vmax:
            vmax = v
        if v > 0.0:
            if v < vpos:
                vpos = v
        else:
            has_nonpos = True
    cdef double dmax
    if alpha == 1.0:
        dmax = 2.0 * mu_c
    elif alpha > 1.0:
        dmax = 2.0 * alpha * mu_c * pow(vmax if vmax > 0.0 else 0.0, alpha - 1.0)
    elif has_nonpos:
        dmax = INFINITY
    else:
        dmax = 2.0 * alpha * mu_c * pow(vpos, alpha - 1.0)
    return lap, vmin, dmax


def cns_step_1d(rho, mom, double mu_c, double alpha, double eps, double a, double gamma,
                double dt, double dx, bint periodic, double rho_min):
    cdef const double[::1] r = np.ascontiguousarray(rho, dtype=np.float64)
    cdef const double[::1] m = np.ascontiguousarray(mom, dtype=np.float64)
    cdef Py_ssize_t n = r.shape[0], j, nf = n if periodic else n + 1
    u_arr = np.empty(n)
    p_arr = np.empty(n)
    nu_arr = np.empty(n)
    cdef double[::1] u = u_arr, p = p_arr, nu = nu_arr
    for j in range(n):
        u[j] = m[j] / (r[j] if r[j] > rho_min else rho_min)
        p[j] = eps * a * pow(r[j], gamma) if eps != 0.0 else 0.0
        nu[j] = 2.0 * alpha * mu_c * _powa(r[j], alpha)
    fm_arr = np.empty(nf)
    fq_arr = np.empty(nf)
    cdef double[::1] fm = fm_arr, fq = fq_arr
    cdef Py_ssize_t f, jl, jr
    cdef double rl, rr, ml, mr, ul, ur, pl, pr, nl, nr, uf, nuf, s
    for f in range(nf):
        if periodic:
            jl = f
            jr = f + 1 if f + 1 < n else 0
            rl = r[jl]; rr = r[jr]; ml = m[jl]; mr = m[jr]
            ul = u[jl]; ur = u[jr]; pl = p[jl]; pr = p[jr]; nl = nu[jl]; nr = nu[jr]
        else:
            jl = f - 1
            jr = f
            if f == 0:
                rr = r[0]; mr = m[0]; ur = u[0]; pr = p[0]; nr = nu[0]
                rl = rr; ml = -mr; ul = -ur; pl = pr; nl = nr
            elif f == n:
                rl = r[n - 1]; ml = m[n - 1]; ul = u[n - 1]; pl = p[n - 1]; nl = nu[n - 1]
                rr = rl; mr = -ml; ur = -ul; pr = pl; nr = nl
            else:
                rl = r[jl]; rr = r[jr]; ml = m[jl]; mr = m[jr]
                ul = u[jl]; ur = u[jr]; pl = p[jl]; pr = p[jr]; nl = nu[jl]; nr = nu[jr]
        uf = 0.5 * (ul + ur)
        s = nl + nr
        nuf = 2.0 * nl * nr / s if s > 0.0 else 0.0
        if not periodic and (f == 0 or f == n):
            fm[f] = 0.0
            fq[f] = 0.5 * (pl + pr) - nuf * (ur - ul) / dx
        elif uf > 0.0:
            fm[f] = uf * rl
            fq[f] = uf * ml + 0.5 * (pl + pr) - nuf * (ur - ul) / dx
        else:
            fm[f] = uf * rr
            fq[f] = uf * mr + 0.5 * (pl + pr) - nuf * (ur - ul) / dx
    rho_new = np.empty(n)
    mom_new = np.empty(n)
    cdef double[::1] rn = rho_new, mn = mom_new
    cdef double lam = dt / dx
    for j in range(n):
        if periodic:
            jl = j - 1 if j > 0 else n - 1
            rn[j] = r[j] - lam * (fm[j] - fm[jl])
            mn[j] = m[j] - lam * (fq[j] - fq[jl])
        else:
            rn[j] = r[j] - lam * (fm[j + 1] - fm[j])
            mn[j] = m[j] - lam * (fq[j + 1] - fq[j])
    return rho_new, mom_new
