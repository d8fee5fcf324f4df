# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: game tables, gain terms, the explicit step and the
homogeneous relaxation. Mirrors ``_kernels_py`` entry point for entry point."""

import numpy as np
cimport numpy as cnp

from libc.math cimport fabs

cnp.import_array()

BACKEND = "cython"


cdef inline void _cell_gain(const double* f, Py_ssize_t n, double alpha,
                            double rt, double phi, double eta, double* out) noexcept nogil:
    # out[j] = eta * sum_{h,k} A[h,k,j] f[h] f[k], table entries written
    # branch by branch; only the nonzero targets of each (h, k) are visited.
    cdef Py_ssize_t h, k, j
    cdef double fh, w
    cdef double acc = alpha * (1.0 - rt) * phi
    cdef double keep = (1.0 - alpha * (1.0 - rt)) * phi
    cdef double dec = (1.0 - alpha) * rt * phi
    cdef double mid = (1.0 - alpha - (1.0 - 2.0 * alpha) * rt) * phi
    cdef double top = (1.0 - (1.0 - alpha) * rt) * phi
    for j in range(n):
        out[j] = 0.0
    for h in range(n):
        fh = f[h]
        if fh == 0.0:
            continue
        for k in range(n):
            w = fh * f[k]
            if w == 0.0:
                continue
            if h < k:
                if h == 0:
                    out[0] += w * (1.0 - acc)
                    out[1] += w * acc
                else:
                    out[0] += w * (1.0 - phi)
                    out[h] += w * keep
                    out[h + 1] += w * acc
            elif h > k:
                if k == 0:
                    out[0] += w * (1.0 - acc)
                    out[h] += w * acc
                else:
                    out[0] += w * (1.0 - phi)
                    out[k] += w * keep
                    out[h] += w * acc
            else:
                if h == 0:
                    out[0] += w * (1.0 - acc)
                    out[1] += w * acc
                elif h == n - 1:
                    out[0] += w * (1.0 - phi)
                    out[n - 2] += w * dec
                    out[n - 1] += w * top
                elif h == 1:
                    out[0] += w * (1.0 - phi + dec)
                    out[1] += w * mid
                    out[2] += w * acc
                else:
                    out[0] += w * (1.0 - phi)
                    out[h - 1] += w * dec
                    out[h] += w * mid
                    out[h + 1] += w * acc
    for j in range(n):
        out[j] *= eta


def game_table(Py_ssize_t n, double alpha, double rho_tilde, double phi):
    """Dense ``(n, n, n)`` table; entry ``[h, k, j]`` is the probability of
    moving from class ``h`` to ``j`` after meeting class ``k``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=3] A = np.zeros((n, n, n))
    cdef double[::1] out = np.zeros(n)
    cdef Py_ssize_t h, k, j
    for h in range(n):
        for k in range(n):
            _table_row(n, alpha, rho_tilde, phi, h, k, out)
            for j in range(n):
                A[h, k, j] = out[j]
    return A


cdef void _table_row(Py_ssize_t n, double alpha, double rt, double phi,
                     Py_ssize_t h, Py_ssize_t k, double[::1] out) noexcept:
    cdef double acc = alpha * (1.0 - rt) * phi
    cdef double keep = (1.0 - alpha * (1.0 - rt)) * phi
    cdef double dec = (1.0 - alpha) * rt * phi
    cdef double mid = (1.0 - alpha - (1.0 - 2.0 * alpha) * rt) * phi
    cdef double top = (1.0 - (1.0 - alpha) * rt) * phi
    cdef Py_ssize_t j
    for j in range(n):
        out[j] = 0.0
    if h < k:
        if h == 0:
            out[0] = 1.0 - acc
            out[1] = acc
        else:
            out[0] = 1.0 - phi
            out[h] = keep
            out[h + 1] = acc
    elif h > k:
        if k == 0:
            out[0] = 1.0 - acc
            out[h] = acc
        else:
            out[0] = 1.0 - phi
            out[k] = keep
            out[h] = acc
    else:
        if h == 0:
            out[0] = 1.0 - acc
            out[1] = acc
        elif h == n - 1:
            out[0] = 1.0 - phi
            out[n - 2] += dec
            out[n - 1] += top
        elif h == 1:
            out[0] = 1.0 - phi + dec
            out[1] = mid
            out[2] = acc
        else:
            out[0] = 1.0 - phi
            out[h - 1] = dec
            out[h] = mid
            out[h + 1] = acc


def local_gain(const double[:, ::1] f, const double[::1] alpha,
               const double[::1] rho_tilde, const double[::1] phi_out,
               const double[::1] eta):
    """Gain term ``G[i, j]`` for every cell."""
    cdef Py_ssize_t m = f.shape[0], n = f.shape[1], i
    cdef cnp.ndarray[cnp.float64_t, ndim=2] G = np.empty((m, n))
    cdef double[:, ::1] Gv = G
    with nogil:
        for i in range(m):
            _cell_gain(&f[i, 0], n, alpha[i], rho_tilde[i], phi_out[i], eta[i], &Gv[i, 0])
    return G


def euler_step(const double[:, ::1] f, const double[::1] speeds,
               const double[::1] phi, const double[::1] inflow,
               const double[::1] alpha, double beta, double eta0, double dt):
    """One explicit step. ``phi[i]`` is the limiter on the left face of cell
    ``i`` (``phi[0]`` is the boundary limiter, ``phi[m]`` the exit)."""
    cdef Py_ssize_t m = f.shape[0], n = f.shape[1], i, j
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((m, n))
    cdef double[:, ::1] o = out
    cdef double[::1] rho = np.empty(m)
    cdef double[::1] gain = np.empty(n)
    cdef double s, rt, eta, upstream
    with nogil:
        for i in range(m):
            s = 0.0
            for j in range(n):
                s += f[i, j]
            rho[i] = s
        for i in range(m):
            if i < m - 1:
                rt = (1.0 - beta) * rho[i] + beta * rho[i + 1]
            else:
                rt = rho[i]
            eta = eta0 * rho[i]
            _cell_gain(&f[i, 0], n, alpha[i], rt, phi[i + 1], eta, &gain[0])
            for j in range(n):
                upstream = inflow[j] if i == 0 else f[i - 1, j]
                o[i, j] = (f[i, j]
                           - dt * speeds[j] * (phi[i + 1] * f[i, j] - phi[i] * upstream)
                           + dt * (gain[j] - f[i, j] * eta * rho[i]))
    return out


def homogeneous_relax(double[::1] f, double alpha, double rho_tilde, double phi,
                      double eta0, double dt, double tol, double tol_shape,
                      long max_steps):
    """Explicit Euler on the spatially homogeneous system, in place.

    The table is frozen at ``(alpha, rho_tilde, phi)``; density is conserved
    so it never needs rebuilding. Stops once ``||df/dt||_1 < tol`` and the
    scale-free residual ``||df/dt||_1 / (eta0 rho^3) < tol_shape``. Returns
    ``(steps, residual, shape_residual, max_density_drift)``.
    """
    cdef Py_ssize_t n = f.shape[0], j
    cdef double[::1] gain = np.empty(n)
    cdef double[::1] rhs = np.empty(n)
    cdef double rho0 = 0.0, rho, eta, r = 0.0, shape = 0.0, drift = 0.0, d, scale
    cdef long it = 0
    for j in range(n):
        rho0 += f[j]
    if rho0 <= 0.0:
        return 0, 0.0, 0.0, 0.0
    with nogil:
        while True:
            rho = 0.0
            for j in range(n):
                rho += f[j]
            d = fabs(rho - rho0)
            if d > drift:
                drift = d
            eta = eta0 * rho
            _cell_gain(&f[0], n, alpha, rho_tilde, phi, eta, &gain[0])
            r = 0.0
            for j in range(n):
                rhs[j] = gain[j] - f[j] * eta * rho
                r += fabs(rhs[j])
            scale = eta0 * rho * rho * rho
            shape = r / scale if scale > 0.0 else 0.0
            if (r < tol and shape < tol_shape) or it >= max_steps:
                break
            for j in range(n):
                f[j] += dt * rhs[j]
            it += 1
    return it, r, shape, drift
