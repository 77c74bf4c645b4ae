"""Slow, independent reference implementations used as test oracles.

Nothing here calls LAPACK or BLAS-level numpy routines beyond elementwise
arithmetic, so agreement with the package is a real cross-check.
"""

import math

import numpy as np


def gemm_loops(A, B):
    """Triple-loop product with ``math.fsum`` accumulation."""
    m, k = len(A), len(A[0])
    n = len(B[0])
    return np.array([[math.fsum(A[i][t] * B[t][j] for t in range(k)) for j in range(n)] for i in range(m)])


def jacobi_singular_values(M, sweeps=60, tol=1e-15):
    """One-sided Jacobi (Hestenes) singular values, descending."""
    U = np.array(M, dtype=np.float64, copy=True)
    if U.shape[0] < U.shape[1]:
        U = U.T.copy()
    n = U.shape[1]
    for _ in range(sweeps):
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                a = float(U[:, i] @ U[:, i])
                b = float(U[:, j] @ U[:, j])
                c = float(U[:, i] @ U[:, j])
                if abs(c) <= tol * math.sqrt(a * b) or c == 0.0:
                    continue
                off = max(off, abs(c) / math.sqrt(a * b))
                zeta = (b - a) / (2.0 * c)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                cs = 1.0 / math.sqrt(1.0 + t * t)
                sn = cs * t
                ui = U[:, i].copy()
                U[:, i] = cs * ui - sn * U[:, j]
                U[:, j] = sn * ui + cs * U[:, j]
        if off <= tol:
            break
    return np.sort(np.linalg.norm(U, axis=0))[::-1]


def dft_matrix_real(n):
    """Dense orthonormal real DFT matrix built from cosines and sines directly."""
    F = np.zeros((n, n))
    j = np.arange(n)
    F[0] = 1.0 / math.sqrt(n)
    row = 1
    for f in range(1, (n - 1) // 2 + 1):
        F[row] = math.sqrt(2.0 / n) * np.cos(2 * math.pi * f * j / n)
        F[row + 1] = -math.sqrt(2.0 / n) * np.sin(2 * math.pi * f * j / n)
        row += 2
    if n % 2 == 0:
        F[n - 1] = np.cos(math.pi * j) / math.sqrt(n)
    return F


def normal_cdf(x):
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))
