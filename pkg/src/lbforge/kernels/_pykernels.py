"""Vectorized numpy versions of the collision and streaming kernels."""
import numpy as np


def collide(f, vel, feq_mat, basis, N, omega, nthreads=1):
    rho = f.sum(axis=1)
    ok = np.isfinite(rho) & (rho > 0)
    bad = int(np.count_nonzero(~ok))
    safe_rho = np.where(ok, rho, 1.0)
    u = (f @ vel) / safe_rho[:, None]
    energy = f @ np.einsum("qd,qd->q", vel, vel) / safe_rho
    theta = 2.0 / vel.shape[1] * (energy - np.einsum("nd,nd->n", u, u))
    finite_theta = np.isfinite(theta)
    bad += int(np.count_nonzero(ok & ~finite_theta))
    ok &= finite_theta
    feq = equilibrium(rho, u, theta, feq_mat, basis, N)
    f[ok] += omega * (feq[ok] - f[ok])
    return bad


def equilibrium(rho, u, theta, feq_mat, basis, N):
    """Equilibrium populations (n, Q) for node arrays rho (n,), u (n, D), theta (n,)."""
    var = 0.5 * theta
    # mu[n, d, k]: raw moments of the per-axis normal distribution
    mu = np.empty(u.shape + (N + 1,))
    mu[..., 0] = 1.0
    if N >= 1:
        mu[..., 1] = u
    for k in range(2, N + 1):
        mu[..., k] = u * mu[..., k - 1] + (k - 1) * var[:, None] * mu[..., k - 2]
    t = np.ones((u.shape[0], basis.shape[0]))
    for d in range(basis.shape[1]):
        t *= mu[:, d, basis[:, d]]
    return rho[:, None] * (t @ feq_mat.T)


def stream(src, dst, shifts, zlo, zhi, nthreads=1):
    nzt = src.shape[0]
    z = np.arange(zlo, zhi)
    for q in range(src.shape[3]):
        gx, gy, gz = (int(s) for s in shifts[q])
        plane = src[(z - gz) % nzt, :, :, q]
        if gx or gy:
            plane = np.roll(plane, (gy, gx), axis=(1, 2))
        dst[zlo:zhi, :, :, q] = plane
