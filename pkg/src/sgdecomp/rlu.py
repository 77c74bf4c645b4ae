"""Randomized rank-r LU decomposition with a sparse sub-Gaussian sketch.

Pipeline, for ``A`` of size ``m x n``:

1. ``Y = A @ Omega.T`` with ``Omega`` a sparse ``k x n`` sketch.
2. ``Y`` is compressed to its dominant ``r`` columns, ``Y_r = Y @ W_r``
   (``W_r`` the leading right singular vectors of ``Y``).
3. ``Y_r[P] = L_y @ U_y`` by partial pivoting.
4. ``B = pinv(L_y) @ A[P]``.
5. ``B[:, Qc] = L_b @ U_b`` by column pivoting.
6. ``L_y @ L_b`` is re-factored by partial pivoting so the returned ``L`` has
   entries bounded by one; the extra row permutation folds into ``P``.

The result satisfies ``A[P][:, Qc] ~= L @ U``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import RankDeficiencyError
from .linalg import (
    LinearOperator,
    default_rank_tol,
    dense_svd,
    frobenius_norm,
    lu_column_pivot,
    lu_partial_pivot,
    pinv_from_svd,
    shape_of,
    spectral_norm_estimate,
)
from .rsvd import _check_input
from .sketch import SketchSpec, SubGaussianLaw, derive_seed, sample_sketch, sketch_matrix


@dataclass(frozen=True)
class RluParams:
    k: int | None = None
    p: float | None = None
    seed: int = 0
    sketch: str = "sparse-subgaussian"
    law: SubGaussianLaw = SubGaussianLaw()

    def to_dict(self) -> dict:
        return {"k": self.k, "p": self.p, "seed": self.seed, "sketch": self.sketch,
                "law": self.law.base, "scaled": self.law.scaled}


@dataclass
class LuFactors:
    P: np.ndarray
    Qc: np.ndarray
    L: np.ndarray
    U: np.ndarray
    residual: float | None = None
    timings: dict = field(default_factory=dict)
    params: RluParams | None = None

    @property
    def rank(self) -> int:
        return self.L.shape[1]

    def diagnostics(self) -> dict:
        L, U = self.L, self.U
        r = L.shape[1]
        return {
            "unit_diagonal_error": float(np.abs(np.diag(L[:r]) - 1.0).max()),
            "max_abs_L_below_diagonal": float(np.abs(np.tril(L, -1)).max(initial=0.0)),
            "max_abs_U_below_diagonal": float(np.abs(np.tril(U, -1)).max(initial=0.0)),
            "P_is_permutation": bool(np.array_equal(np.sort(self.P), np.arange(self.P.size))),
            "Qc_is_permutation": bool(np.array_equal(np.sort(self.Qc), np.arange(self.Qc.size))),
        }

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict() if self.params else None,
            "rank": self.rank,
            "timings_ms": dict(self.timings),
            "residual_spectral": self.residual,
            "diagnostics": self.diagnostics(),
        }


def permuted_residual_operator(A, P, Qc, L, U) -> LinearOperator:
    """``x -> A[P][:, Qc] @ x - L @ (U @ x)`` as a matrix-free operator."""
    m, n = shape_of(A)
    Pinv = np.argsort(P)
    Qinv = np.argsort(Qc)

    def _A(X):
        return A.matmat(X) if isinstance(A, LinearOperator) else np.asarray(A @ X)

    def _At(Y):
        return A.rmatmat(Y) if isinstance(A, LinearOperator) else np.asarray(A.T @ Y)

    def apply(X):
        return _A(X[Qinv])[P] - L @ (U @ X)

    def adjoint(Y):
        return _At(Y[Pinv])[Qc] - U.T @ (L.T @ Y)

    return LinearOperator((m, n), apply, adjoint)


def randomized_lu(A, r: int, params: RluParams = RluParams(), *, residual_iters: int = 100) -> LuFactors:
    """Rank-``r`` LU of ``A``: ``A[P][:, Qc] ~= L @ U``.

    Defaults: ``k = ceil(2.5 r)`` sketch columns, density ``p = 3/n``.
    Raises :class:`RankDeficiencyError` when the sketch ``A @ Omega.T`` has
    numerical rank below ``r``.
    """
    A = _check_input(A)
    m, n = shape_of(A)
    if not 1 <= r <= min(m, n):
        raise ValueError(f"rank r={r} must lie in [1, min(m, n)={min(m, n)}]")
    k = params.k if params.k is not None else math.ceil(2.5 * r)
    p = params.p if params.p is not None else min(1.0, 3.0 / n)
    if k < r:
        raise ValueError(f"sketch size k={k} must be at least r={r}")
    timings = {}

    t0 = time.perf_counter()
    omega = sample_sketch(SketchSpec(params.sketch, k, n, p, derive_seed(params.seed, 1)), params.law)
    Y = sketch_matrix(omega, A, "ASt")
    t1 = time.perf_counter()

    Uy, sy, Vy = dense_svd(Y)
    if sy[0] == 0.0 or np.count_nonzero(sy > default_rank_tol(Y.shape) * sy[0]) < r:
        raise RankDeficiencyError(f"sketch A @ Omega.T has numerical rank below r={r}; retry with a new seed or larger k")
    Yr = Y @ Vy[:, :r]
    perm, Ly, _ = lu_partial_pivot(Yr)
    t2 = time.perf_counter()

    Ul, sl, Vl = dense_svd(Ly)
    Ly_pinv = pinv_from_svd(Ul, sl, Vl, default_rank_tol(Ly.shape))
    # pinv(Ly) @ A[perm] == W.T @ A with W[perm] = pinv(Ly).T
    W = np.zeros((m, r))
    W[perm] = Ly_pinv.T
    B = sketch_matrix(W.T, A, "SA")
    t3 = time.perf_counter()

    Qc, Lb, Ub = lu_column_pivot(B)
    P2, L, U2 = lu_partial_pivot(Ly @ Lb)
    P = perm[P2]
    U = np.triu(U2 @ Ub)
    t4 = time.perf_counter()

    timings.update(sketch=1e3 * (t1 - t0), lu_y=1e3 * (t2 - t1), project=1e3 * (t3 - t2),
                   lu_b=1e3 * (t4 - t3), total=1e3 * (t4 - t0))
    resolved = RluParams(k=k, p=p, seed=params.seed, sketch=params.sketch, law=params.law)
    factors = LuFactors(P, Qc, L, U, timings=timings, params=resolved)
    if residual_iters:
        factors.residual = spectral_norm_estimate(
            permuted_residual_operator(A, P, Qc, L, U), residual_iters, derive_seed(params.seed, 4)
        )
    return factors


def lu_frobenius_residual(A, f: LuFactors) -> float | None:
    if isinstance(A, LinearOperator):
        return None
    D = A.toarray() if hasattr(A, "toarray") else np.asarray(A, dtype=np.float64)
    return frobenius_norm(D[f.P][:, f.Qc] - f.L @ f.U)
