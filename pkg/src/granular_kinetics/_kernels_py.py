"""Pure numpy implementations of the compiled kernels.

The game table is assembled here as a linear combination of four constant
basis tensors,

    A = B0 + phi * B_phi + acc * B_acc + dec * B_dec,

with ``acc = alpha (1 - rho~) phi`` and ``dec = (1 - alpha) rho~ phi``. Every
entry of the table is affine in those three scalars, so the decomposition is
exact. It is an independent route to the branch-by-branch formulas used in
the compiled kernel; the test suite checks one against the other.
"""

from functools import lru_cache

import numpy as np

BACKEND = "python"


@lru_cache(maxsize=None)
def basis_tensors(n: int) -> np.ndarray:
    """Stacked ``(4, n, n, n)`` array ``[B0, B_phi, B_acc, B_dec]``."""
    B = np.zeros((4, n, n, n))
    b0, bphi, bacc, bdec = B

    def stop_or_accelerate(h, k, up):
        # 1 - acc to class 0, acc to class `up`
        b0[h, k, 0] += 1
        bacc[h, k, 0] -= 1
        bacc[h, k, up] += 1

    for h in range(n):
        for k in range(n):
            if h < k:
                if h == 0:
                    stop_or_accelerate(h, k, 1)
                else:
                    b0[h, k, 0] += 1
                    bphi[h, k, 0] -= 1
                    bphi[h, k, h] += 1
                    bacc[h, k, h] -= 1
                    bacc[h, k, h + 1] += 1
            elif h > k:
                if k == 0:
                    stop_or_accelerate(h, k, h)
                else:
                    b0[h, k, 0] += 1
                    bphi[h, k, 0] -= 1
                    bphi[h, k, k] += 1
                    bacc[h, k, k] -= 1
                    bacc[h, k, h] += 1
            elif h == 0:
                stop_or_accelerate(h, k, 1)
            elif h == n - 1:
                b0[h, k, 0] += 1
                bphi[h, k, 0] -= 1
                bdec[h, k, n - 2] += 1
                bphi[h, k, n - 1] += 1
                bdec[h, k, n - 1] -= 1
            else:
                b0[h, k, 0] += 1
                bphi[h, k, 0] -= 1
                bdec[h, k, h - 1] += 1
                bphi[h, k, h] += 1
                bacc[h, k, h] -= 1
                bdec[h, k, h] -= 1
                bacc[h, k, h + 1] += 1
    B.flags.writeable = False
    return B


def _coefficients(alpha, rho_tilde, phi):
    alpha, rho_tilde, phi = np.broadcast_arrays(
        np.asarray(alpha, float), np.asarray(rho_tilde, float), np.asarray(phi, float))
    acc = alpha * (1.0 - rho_tilde) * phi
    dec = (1.0 - alpha) * rho_tilde * phi
    return np.stack([np.ones_like(phi), phi, acc, dec], axis=-1)


def game_table(n, alpha, rho_tilde, phi):
    c = _coefficients(alpha, rho_tilde, phi)
    return np.tensordot(c, basis_tensors(int(n)), axes=(-1, 0))


def local_gain(f, alpha, rho_tilde, phi_out, eta):
    f = np.asarray(f, dtype=np.float64)
    B = basis_tensors(f.shape[1])
    # partial gains g[c, b, j] = sum_{h,k} B[b, h, k, j] f[c, h] f[c, k]
    pair = f[:, :, None] * f[:, None, :]
    g = np.einsum("chk,bhkj->cbj", pair, B)
    c = _coefficients(alpha, rho_tilde, phi_out)
    return np.asarray(eta)[:, None] * np.einsum("cb,cbj->cj", c, g)


def fictitious(rho, beta):
    rt = rho.copy()
    rt[:-1] = (1.0 - beta) * rho[:-1] + beta * rho[1:]
    return rt


def euler_step(f, speeds, phi, inflow, alpha, beta, eta0, dt):
    f = np.asarray(f, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    rho = f.sum(axis=1)
    eta = eta0 * rho
    G = local_gain(f, alpha, fictitious(rho, beta), phi[1:], eta)
    upstream = np.vstack([np.asarray(inflow, dtype=np.float64)[None, :], f[:-1]])
    transport = speeds[None, :] * (phi[1:, None] * f - phi[:-1, None] * upstream)
    return f - dt * transport + dt * (G - f * (eta * rho)[:, None])


def homogeneous_relax(f, alpha, rho_tilde, phi, eta0, dt, tol, tol_shape, max_steps):
    n = f.shape[0]
    A = game_table(n, alpha, rho_tilde, phi).reshape(n * n, n)
    rho0 = float(f.sum())
    if rho0 <= 0.0:
        return 0, 0.0, 0.0, 0.0
    drift = 0.0
    it = 0
    while True:
        rho = float(f.sum())
        drift = max(drift, abs(rho - rho0))
        eta = eta0 * rho
        rhs = eta * (np.outer(f, f).ravel() @ A) - f * (eta * rho)
        r = float(np.abs(rhs).sum())
        scale = eta0 * rho ** 3
        shape = r / scale if scale > 0.0 else 0.0
        if (r < tol and shape < tol_shape) or it >= max_steps:
            break
        f += dt * rhs
        it += 1
    return it, r, shape, drift
