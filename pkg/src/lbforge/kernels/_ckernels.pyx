# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled BGK collision and periodic streaming kernels."""
from cython.parallel cimport parallel, prange
from libc.math cimport isfinite
from libc.stdlib cimport free, malloc

import numpy as np


def collide(double[:, ::1] f, const double[:, ::1] vel, const double[:, ::1] feq_mat,
            const long[:, ::1] basis, int N, double omega, int nthreads=1):
    """Relax every row of ``f`` (nodes x velocities) towards its moment-projected equilibrium.

    Returns the number of nodes with a non-finite or non-positive density.
    """
    cdef Py_ssize_t nnodes = f.shape[0], Q = f.shape[1]
    cdef Py_ssize_t D = vel.shape[1], K = basis.shape[0]
    cdef Py_ssize_t n, q, d, b, k
    cdef double rho, e, usq, theta, var, acc, prod, fq
    cdef double *mom
    cdef double *mu
    cdef double *t
    cdef double *feq
    cdef double[:, ::1] feq_t = np.ascontiguousarray(np.asarray(feq_mat).T)
    cdef long bad = 0
    if nthreads < 1:
        nthreads = 1
    with nogil, parallel(num_threads=nthreads):
        mom = <double *> malloc(D * sizeof(double))
        mu = <double *> malloc(D * (N + 1) * sizeof(double))
        t = <double *> malloc(K * sizeof(double))
        feq = <double *> malloc(Q * sizeof(double))
        for n in prange(nnodes, schedule="static"):
            rho = 0.0
            e = 0.0
            for d in range(D):
                mom[d] = 0.0
            for q in range(Q):
                fq = f[n, q]
                rho = rho + fq
                acc = 0.0
                for d in range(D):
                    mom[d] = mom[d] + fq * vel[q, d]
                    acc = acc + vel[q, d] * vel[q, d]
                e = e + fq * acc
            if not (rho > 0.0) or not isfinite(rho):
                bad += 1
                continue
            usq = 0.0
            for d in range(D):
                mom[d] = mom[d] / rho
                usq = usq + mom[d] * mom[d]
            theta = 2.0 / D * (e / rho - usq)
            if not isfinite(theta):
                bad += 1
                continue
            var = 0.5 * theta
            for d in range(D):
                mu[d * (N + 1)] = 1.0
                if N >= 1:
                    mu[d * (N + 1) + 1] = mom[d]
                for k in range(2, N + 1):
                    mu[d * (N + 1) + k] = (mom[d] * mu[d * (N + 1) + k - 1]
                                           + (k - 1) * var * mu[d * (N + 1) + k - 2])
            for b in range(K):
                prod = 1.0
                for d in range(D):
                    prod = prod * mu[d * (N + 1) + basis[b, d]]
                t[b] = prod
            # b outer, q inner: vectorizes over q without reassociating sums
            for q in range(Q):
                feq[q] = 0.0
            for b in range(K):
                prod = t[b]
                for q in range(Q):
                    feq[q] = feq[q] + feq_t[b, q] * prod
            for q in range(Q):
                f[n, q] = f[n, q] + omega * (rho * feq[q] - f[n, q])
        free(mom)
        free(mu)
        free(t)
        free(feq)
    return bad


def stream(const double[:, :, :, ::1] src, double[:, :, :, ::1] dst, const long[:, ::1] shifts,
           int zlo, int zhi, int nthreads=1):
    """``dst[z, y, x, q] = src[z - gz, y - gy, x - gx, q]`` for ``zlo <= z < zhi``, all
    indices periodic over the full buffer. ``shifts`` holds (gx, gy, gz) per velocity."""
    cdef Py_ssize_t nzt = src.shape[0], ny = src.shape[1], nx = src.shape[2], Q = src.shape[3]
    cdef Py_ssize_t z, y, x, q, zs, ys, gx
    if nthreads < 1:
        nthreads = 1
    with nogil:
        for z in prange(zlo, zhi, schedule="static", num_threads=nthreads):
            for q in range(Q):
                zs = ((z - shifts[q, 2]) % nzt + nzt) % nzt
                gx = (shifts[q, 0] % nx + nx) % nx
                for y in range(ny):
                    ys = ((y - shifts[q, 1]) % ny + ny) % ny
                    # split the x row at the periodic seam instead of wrapping per element
                    for x in range(gx):
                        dst[z, y, x, q] = src[zs, ys, x - gx + nx, q]
                    for x in range(gx, nx):
                        dst[z, y, x, q] = src[zs, ys, x - gx, q]
