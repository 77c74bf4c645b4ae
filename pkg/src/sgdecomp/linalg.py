"""Dense and sparse linear-algebra kernels.

Dense matrices are plain ``float64`` numpy arrays, sparse matrices are
canonical ``scipy.sparse.csr_matrix`` objects (sorted indices, no stored
zeros), and matrix-free operators use the small :class:`LinearOperator`
defined here.  Every higher module goes through these helpers so shape and
finiteness checks live in one place.
"""

from __future__ import annotations

import math
from typing import Callable, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import DimensionError, SvdConvergenceError

EPS = np.finfo(np.float64).eps


class LinearOperator:
    """Matrix-free ``rows x cols`` operator given by its action and adjoint action.

    ``matmat`` maps a ``cols x w`` block to ``rows x w``; ``rmatmat`` maps a
    ``rows x w`` block to ``cols x w`` (the transpose action, the operator is
    real).  ``nnz`` is an optional hint used only for cost accounting.
    """

    def __init__(
        self,
        shape: tuple[int, int],
        matmat: Callable[[np.ndarray], np.ndarray],
        rmatmat: Callable[[np.ndarray], np.ndarray],
        nnz: int | None = None,
    ):
        rows, cols = (int(shape[0]), int(shape[1]))
        if rows <= 0 or cols <= 0:
            raise DimensionError(f"operator dimensions must be positive, got {shape}")
        self.shape = (rows, cols)
        self._matmat = matmat
        self._rmatmat = rmatmat
        self.nnz = nnz

    def matmat(self, X: np.ndarray) -> np.ndarray:
        return self._apply(self._matmat, X, self.shape[1], self.shape[0])

    def rmatmat(self, Y: np.ndarray) -> np.ndarray:
        return self._apply(self._rmatmat, Y, self.shape[0], self.shape[1])

    @staticmethod
    def _apply(fn, X, n_in, n_out):
        X = np.asarray(X, dtype=np.float64)
        vector = X.ndim == 1
        if vector:
            X = X[:, None]
        if X.ndim != 2 or X.shape[0] != n_in:
            raise DimensionError(f"operator expects {n_in} input rows, got shape {X.shape}")
        out = np.asarray(fn(X), dtype=np.float64)
        if out.shape != (n_out, X.shape[1]):
            raise DimensionError(f"operator returned shape {out.shape}, expected {(n_out, X.shape[1])}")
        return out[:, 0] if vector else out

    @property
    def T(self) -> "LinearOperator":
        return LinearOperator(self.shape[::-1], self._rmatmat, self._matmat, self.nnz)

    def __matmul__(self, X):
        return self.matmat(X)

    def __repr__(self):
        return f"LinearOperator(shape={self.shape}, nnz={self.nnz})"


Matrix = Union[np.ndarray, sp.spmatrix, LinearOperator]


def as_dense(M, name: str = "matrix") -> np.ndarray:
    """Return ``M`` as a 2-D float64 array, rejecting NaN/Inf and empty shapes."""
    A = np.asarray(M.toarray() if sp.issparse(M) else M, dtype=np.float64)
    if A.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {A.shape}")
    if A.shape[0] == 0 or A.shape[1] == 0:
        raise DimensionError(f"{name} must have positive dimensions, got {A.shape}")
    if not np.isfinite(A).all():
        raise ValueError(f"{name} has non-finite entries")
    return A


def as_csr(S, name: str = "sparse matrix") -> sp.csr_matrix:
    """Canonical CSR copy: float64, duplicates summed, zeros pruned, indices sorted."""
    C = sp.csr_matrix(S, dtype=np.float64, copy=True)
    if C.shape[0] == 0 or C.shape[1] == 0:
        raise DimensionError(f"{name} must have positive dimensions, got {C.shape}")
    C.sum_duplicates()
    C.eliminate_zeros()
    C.sort_indices()
    if not np.isfinite(C.data).all():
        raise ValueError(f"{name} has non-finite entries")
    return C


def aslinearoperator(A: Matrix) -> LinearOperator:
    if isinstance(A, LinearOperator):
        return A
    if sp.issparse(A):
        S = as_csr(A)
        St = S.T.tocsr()
        return LinearOperator(S.shape, lambda X: S @ X, lambda Y: St @ Y, nnz=S.nnz)
    D = as_dense(A)
    return LinearOperator(D.shape, lambda X: D @ X, lambda Y: D.T @ Y, nnz=D.size)


def shape_of(A: Matrix) -> tuple[int, int]:
    return tuple(int(s) for s in A.shape)


def gemm(A, B) -> np.ndarray:
    """Dense product ``A @ B`` with a shape check naming both operands."""
    A = as_dense(A, "A")
    B = as_dense(B, "B")
    if A.shape[1] != B.shape[0]:
        raise DimensionError(f"gemm: cannot multiply {A.shape} by {B.shape}")
    return A @ B


def spmm(S, B, side: str = "left", transpose: bool = False) -> np.ndarray:
    """Sparse-times-dense product.

    ``side="left"`` computes ``op(S) @ B`` and ``side="right"`` computes
    ``B @ op(S)``, where ``op`` is the transpose when ``transpose`` is set.
    Cost is proportional to ``nnz(S) * width(B)``.
    """
    S = as_csr(S, "S")
    B = as_dense(B, "B")
    opS = S.T if transpose else S
    if side == "left":
        if opS.shape[1] != B.shape[0]:
            raise DimensionError(f"spmm: cannot multiply sparse {opS.shape} by {B.shape}")
        return np.asarray(opS @ B)
    if side == "right":
        if B.shape[1] != opS.shape[0]:
            raise DimensionError(f"spmm: cannot multiply {B.shape} by sparse {opS.shape}")
        return np.asarray((opS.T @ B.T).T)
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def thin_qr(B) -> tuple[np.ndarray, np.ndarray]:
    """Householder thin QR with the diagonal of ``R`` made nonnegative.

    Rank-deficient input is allowed; ``Q`` stays orthonormal and ``R`` gets
    zeros on its diagonal.
    """
    B = as_dense(B, "B")
    m, n = B.shape
    if m < n:
        raise DimensionError(f"thin_qr needs rows >= cols, got {B.shape}")
    Q, R = scipy.linalg.qr(B, mode="economic", check_finite=False)
    signs = np.where(np.diag(R) < 0, -1.0, 1.0)
    return Q * signs, R * signs[:, None]


def dense_svd(M) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin SVD ``M = U @ diag(s) @ V.T`` with ``s`` descending.

    Falls back from the divide-and-conquer driver to the QR-iteration driver
    before giving up with :class:`SvdConvergenceError`.
    """
    M = as_dense(M, "M")
    for driver in ("gesdd", "gesvd"):
        try:
            U, s, Vt = scipy.linalg.svd(
                M, full_matrices=False, lapack_driver=driver, check_finite=False
            )
        except np.linalg.LinAlgError:
            continue
        return U, s, Vt.T
    raise SvdConvergenceError(f"SVD of {M.shape} matrix did not converge; retry with a perturbation")


def singular_values(M) -> np.ndarray:
    M = as_dense(M, "M")
    try:
        return scipy.linalg.svdvals(M, check_finite=False)
    except np.linalg.LinAlgError:
        return dense_svd(M)[1]


def default_rank_tol(shape: tuple[int, int]) -> float:
    return max(shape) * EPS


def pseudo_inverse(M, rank_tol: float | None = None) -> np.ndarray:
    """Moore-Penrose pseudoinverse via SVD.

    Singular values at or below ``rank_tol * s_max`` are treated as zero;
    the default ``rank_tol`` is ``max(rows, cols) * eps``.
    """
    M = as_dense(M, "M")
    U, s, V = dense_svd(M)
    return pinv_from_svd(U, s, V, default_rank_tol(M.shape) if rank_tol is None else rank_tol)


def pinv_from_svd(U, s, V, rank_tol: float) -> np.ndarray:
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((V.shape[0], U.shape[0]))
    keep = s > rank_tol * s[0]
    return (V[:, keep] / s[keep]) @ U[:, keep].T


def lu_partial_pivot(M) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Row-pivoted LU of a tall matrix: ``M[P] == L @ U``.

    ``L`` is unit lower trapezoidal (rows x cols) with ``|L| <= 1`` and ``U``
    is upper triangular (cols x cols).  A column that is zero on and below
    the diagonal simply leaves a zero on ``U``'s diagonal.
    """
    A = as_dense(M, "M").copy()
    m, n = A.shape
    if m < n:
        raise DimensionError(f"lu_partial_pivot needs rows >= cols, got {A.shape}")
    perm = np.arange(m)
    for j in range(n):
        i = j + int(np.argmax(np.abs(A[j:, j])))
        if i != j:
            A[[j, i]] = A[[i, j]]
            perm[[j, i]] = perm[[i, j]]
        pivot = A[j, j]
        if pivot != 0.0:
            A[j + 1:, j] /= pivot
            A[j + 1:, j + 1:] -= np.outer(A[j + 1:, j], A[j, j + 1:])
    L = np.tril(A, -1) + np.eye(m, n)
    U = np.triu(A[:n])
    return perm, L, U


def lu_column_pivot(M) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Column-pivoted LU of a wide matrix: ``M[:, Qc] == L @ U``.

    ``L`` is unit lower triangular (rows x rows), ``U`` upper trapezoidal.
    The pivot of step ``j`` is the largest entry of row ``j`` among the
    columns not yet used.  If that row is already zero the step is skipped;
    the factorization is then exact only when the rows below also vanish in
    that column (no column permutation alone can do better).
    """
    A = as_dense(M, "M").copy()
    m, n = A.shape
    if m > n:
        raise DimensionError(f"lu_column_pivot needs rows <= cols, got {A.shape}")
    perm = np.arange(n)
    for j in range(m):
        c = j + int(np.argmax(np.abs(A[j, j:])))
        if c != j:
            A[:, [j, c]] = A[:, [c, j]]
            perm[[j, c]] = perm[[c, j]]
        pivot = A[j, j]
        if pivot != 0.0:
            A[j + 1:, j] /= pivot
            A[j + 1:, j + 1:] -= np.outer(A[j + 1:, j], A[j, j + 1:])
        else:
            A[j + 1:, j] = 0.0
    L = np.tril(A[:, :m], -1) + np.eye(m)
    U = np.triu(A)
    return perm, L, U


def is_permutation(perm, n: int | None = None) -> bool:
    perm = np.asarray(perm)
    if perm.ndim != 1 or (n is not None and perm.size != n):
        return False
    return bool(np.array_equal(np.sort(perm), np.arange(perm.size)))


def spectral_norm_estimate(A: Matrix, iters: int = 100, seed: int = 0) -> float:
    """Power-iteration estimate of the largest singular value of ``A``.

    Iterates on ``A.T @ A`` from a seeded Gaussian start and returns the
    running maximum of ``||A x||`` over unit iterates, so the estimate never
    decreases as ``iters`` grows.
    """
    if iters < 20:
        raise ValueError(f"iters must be >= 20, got {iters}")
    op = aslinearoperator(A)
    rng = np.random.Generator(np.random.Philox(seed))
    x = rng.standard_normal(op.shape[1])
    x /= np.linalg.norm(x)
    best = 0.0
    for _ in range(iters):
        y = op.matmat(x)
        est = float(np.linalg.norm(y))
        best = max(best, est)
        z = op.rmatmat(y)
        nz = np.linalg.norm(z)
        if nz == 0.0:
            break
        x = z / nz
    return best


def frobenius_norm(A) -> float:
    """Frobenius norm with exactly rounded (``math.fsum``) accumulation."""
    values = A.data if sp.issparse(A) else np.asarray(A, dtype=np.float64).ravel()
    values = np.asarray(values, dtype=np.float64)
    return math.sqrt(math.fsum((values * values).tolist()))
