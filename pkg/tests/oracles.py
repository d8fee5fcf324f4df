"""Slow reference implementations written from the model formulas with
1-based indices, deliberately sharing no code with the package."""

import numpy as np


def table_entries(n, alpha, rt, phi, h, k):
    """Nonzero entries {j: A^j_hk} for 1-based h, k."""
    a = alpha * (1 - rt) * phi
    if h < k:
        if h == 1:
            return {1: 1 - a, 2: a}
        return {1: 1 - phi, h: (1 - alpha * (1 - rt)) * phi, h + 1: a}
    if h > k:
        if k == 1:
            return {1: 1 - a, h: a}
        return {1: 1 - phi, k: (1 - alpha * (1 - rt)) * phi, h: a}
    d = (1 - alpha) * rt * phi
    if h == 1:
        return {1: 1 - a, 2: a}
    if h == n:
        out = {1: 1 - phi}
        out[n - 1] = out.get(n - 1, 0.0) + d
        out[n] = (1 - (1 - alpha) * rt) * phi
        return out
    if h == 2:
        return {1: 1 - phi + d, 2: (1 - alpha - (1 - 2 * alpha) * rt) * phi, 3: a}
    return {1: 1 - phi, h - 1: d, h: (1 - alpha - (1 - 2 * alpha) * rt) * phi, h + 1: a}


def naive_table(n, alpha, rt, phi):
    A = np.zeros((n, n, n))
    for h in range(1, n + 1):
        for k in range(1, n + 1):
            for j, val in table_entries(n, alpha, rt, phi, h, k).items():
                A[h - 1, k - 1, j - 1] += val
    return A


def naive_gain(f_row, A, eta):
    n = len(f_row)
    G = [0.0] * n
    for j in range(n):
        s = 0.0
        for h in range(n):
            for k in range(n):
                s += A[h][k][j] * f_row[h] * f_row[k]
        G[j] = eta * s
    return np.array(G)


def limiter(u, v):
    return (1 - v) / u if u + v > 1 else 1.0


def naive_nonlocal(f, alpha, beta, eta0, phi, mu, w):
    """Direct summation over interaction cells l, candidate h and field k."""
    m, n = f.shape
    rho = f.sum(axis=1)
    J = np.zeros((m, n))
    for i in range(m):
        for l in range(i, i + mu[i] + 1):
            wl = w[i][l - i]
            rt = rho[l] if l == m - 1 else (1 - beta) * rho[l] + beta * rho[l + 1]
            A = naive_table(n, alpha[l], rt, phi[l + 1])
            eta = eta0 * rho[l]
            for j in range(n):
                for h in range(n):
                    for k in range(n):
                        J[i, j] += eta * A[h, k, j] * f[i, h] * f[l, k] * wl
                for k in range(n):
                    J[i, j] -= f[i, j] * eta * f[l, k] * wl
    return J


def naive_step(f, speeds, alpha, beta, eta0, dt, inflow, phi_left, phi_right, gates=None):
    """One explicit step with every loop spelled out."""
    m, n = f.shape
    rho = f.sum(axis=1)
    phi = [phi_left] + [limiter(rho[i], rho[i + 1]) for i in range(m - 1)] + [phi_right]
    for k, val in (gates or {}).items():
        phi[k] = val
    out = np.zeros_like(f)
    for i in range(m):
        rt = rho[i] if i == m - 1 else (1 - beta) * rho[i] + beta * rho[i + 1]
        A = naive_table(n, alpha[i], rt, phi[i + 1])
        eta = eta0 * rho[i]
        G = naive_gain(f[i], A, eta)
        for j in range(n):
            up = inflow[j] if i == 0 else f[i - 1, j]
            out[i, j] = (f[i, j] - dt * speeds[j] * (phi[i + 1] * f[i, j] - phi[i] * up)
                         + dt * (G[j] - f[i, j] * eta * rho[i]))
    return out
