"""Two-sketch randomized SVD built on sparse sub-Gaussian test matrices.

The range of ``A`` is captured from ``B = A @ Omega1.T @ Omega1p.T`` where
``Omega1`` is a sparse ``k1 x n`` sketch and ``Omega1p`` a small ``l x k1``
Gaussian.  Instead of a second pass ``Q.T @ A``, the coefficient matrix is
recovered from a second sparse sketch: ``T = pinv(Omega2 @ Q) @ (Omega2 @ A)``.
``A`` is therefore touched once from the right and once from the left.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError, RankDeficiencyError
from .linalg import (
    LinearOperator,
    default_rank_tol,
    dense_svd,
    frobenius_norm,
    pinv_from_svd,
    shape_of,
    singular_values,
    spectral_norm_estimate,
    as_dense,
    thin_qr,
)
from .sketch import (
    SketchSpec,
    SubGaussianLaw,
    apply_transpose,
    canonical_kind,
    derive_seed,
    sample_dense_gaussian,
    sample_sketch,
    sketch_matrix,
)

STAGES = ("sketch", "qr", "second_sketch", "small_svd")


def default_sizes(r: int) -> tuple[int, int, int]:
    """Default ``(k1, k2, l)`` for target rank ``r``: k1/r = 2.5, k2/r = 3.5,
    ``l = ceil(1.25 r) + 8``, with k1 and k2 never below l."""
    l = math.ceil(1.25 * r) + 8
    return max(math.ceil(2.5 * r), l), max(math.ceil(3.5 * r), l), l


@dataclass(frozen=True)
class RsvdParams:
    r: int
    k1: int | None = None
    k2: int | None = None
    l: int | None = None
    p1: float | None = None
    p2: float | None = None
    seed: int = 0
    sketch: str = "sparse-subgaussian"
    law: SubGaussianLaw = SubGaussianLaw()

    def resolve(self, m: int, n: int) -> "RsvdParams":
        """Fill unset fields for an ``m x n`` target and check the size ordering
        ``r <= l <= k1``, ``l <= k2``, everything ``<= min(m, n)``."""
        cap = min(m, n)
        k1, k2, l = default_sizes(self.r)
        out = replace(
            self,
            sketch=canonical_kind(self.sketch),
            l=self.l if self.l is not None else min(l, cap),
            k1=self.k1 if self.k1 is not None else min(k1, cap),
            k2=self.k2 if self.k2 is not None else min(k2, cap),
            p1=self.p1 if self.p1 is not None else min(1.0, 3.0 / n),
            p2=self.p2 if self.p2 is not None else min(1.0, 3.0 / m),
        )
        if not 1 <= out.r <= out.l <= out.k1 or out.l > out.k2:
            raise ValueError(f"need 1 <= r <= l <= k1 and l <= k2, got r={out.r} l={out.l} k1={out.k1} k2={out.k2}")
        if max(out.k1, out.k2) > cap:
            raise ValueError(f"k1={out.k1}, k2={out.k2} must not exceed min(m, n)={cap}")
        for name in ("p1", "p2"):
            if not 0.0 < getattr(out, name) <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1], got {getattr(out, name)}")
        return out

    def to_dict(self) -> dict:
        return {
            "r": self.r, "k1": self.k1, "k2": self.k2, "l": self.l,
            "p1": self.p1, "p2": self.p2, "seed": self.seed, "sketch": self.sketch,
            "law": self.law.base, "scaled": self.law.scaled,
        }


@dataclass
class SvdFactors:
    U: np.ndarray
    s: np.ndarray
    V: np.ndarray
    residual: float | None = None
    timings: dict = field(default_factory=dict)
    params: RsvdParams | None = None

    @property
    def rank(self) -> int:
        return self.s.size

    def matrix(self) -> np.ndarray:
        return (self.U * self.s) @ self.V.T

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict() if self.params else None,
            "timings_ms": dict(self.timings),
            "residual_spectral": self.residual,
            "s": self.s.tolist(),
        }


def residual_operator(A, U, s, V) -> LinearOperator:
    """``x -> A x - U diag(s) V.T x`` without forming the difference."""
    m, n = shape_of(A)

    def apply(X):
        AX = A.matmat(X) if isinstance(A, LinearOperator) else np.asarray(A @ X)
        return AX - U @ (s[:, None] * (V.T @ X))

    def adjoint(Y):
        AY = A.rmatmat(Y) if isinstance(A, LinearOperator) else np.asarray(A.T @ Y)
        return AY - V @ (s[:, None] * (U.T @ Y))

    return LinearOperator((m, n), apply, adjoint)


def frobenius_residual(A, U, s, V) -> float | None:
    """``||A - U diag(s) V.T||_F`` for materialized ``A``; ``None`` for operators."""
    if isinstance(A, LinearOperator):
        return None
    D = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=np.float64)
    return frobenius_norm(D - (U * s) @ V.T)


def _check_input(A):
    if isinstance(A, LinearOperator):
        return A
    if sp.issparse(A):
        if not np.isfinite(A.data).all():
            raise ValueError("A has non-finite entries")
        return sp.csr_matrix(A, dtype=np.float64)
    return as_dense(A, "A")


def randomized_svd(A, params: RsvdParams, *, residual_iters: int = 100) -> SvdFactors:
    """Rank-``params.r`` SVD of ``A`` (dense, CSR or :class:`LinearOperator`).

    Per-stage wall times (ms) are stored in ``timings``.  When
    ``residual_iters`` is nonzero the spectral residual
    ``||A - U diag(s) V.T||_2`` is estimated by power iteration and stored in
    ``residual``.  Raises :class:`RankDeficiencyError` when ``Omega2 @ Q`` has
    numerical rank below ``l``; retry with another seed or a larger ``k2``.
    """
    A = _check_input(A)
    m, n = shape_of(A)
    P = params.resolve(m, n)
    law = P.law
    timings = {}

    t0 = time.perf_counter()
    omega1 = sample_sketch(SketchSpec(P.sketch, P.k1, n, P.p1, derive_seed(P.seed, 1)), law)
    omega1p = sample_dense_gaussian(P.l, P.k1, derive_seed(P.seed, 2))
    if isinstance(A, LinearOperator):
        # matrix-free: a single application of A to the composite l-column sketch
        B = A.matmat(apply_transpose(omega1, omega1p.T))
    else:
        B = sketch_matrix(omega1, A, "ASt") @ omega1p.T
    t1 = time.perf_counter()
    Q, _ = thin_qr(B)
    t2 = time.perf_counter()
    omega2 = sample_sketch(SketchSpec(P.sketch, P.k2, m, P.p2, derive_seed(P.seed, 3)), law)
    OQ = sketch_matrix(omega2, Q, "SA")
    OA = sketch_matrix(omega2, A, "SA")
    t3 = time.perf_counter()
    Uq, sq, Vq = dense_svd(OQ)
    tol = default_rank_tol(OQ.shape)
    rank = int(np.count_nonzero(sq > tol * sq[0])) if sq[0] > 0 else 0
    if rank < P.l:
        raise RankDeficiencyError(
            f"Omega2 @ Q has numerical rank {rank} < l={P.l}; retry with a new seed or larger k2"
        )
    T = pinv_from_svd(Uq, sq, Vq, tol) @ OA
    Ut, sig, Vt = dense_svd(T)
    U = Q @ Ut[:, :P.r]
    s = sig[:P.r].copy()
    V = np.ascontiguousarray(Vt[:, :P.r])
    t4 = time.perf_counter()

    for name, (a, b) in zip(STAGES, ((t0, t1), (t1, t2), (t2, t3), (t3, t4))):
        timings[name] = 1e3 * (b - a)
    timings["total"] = 1e3 * (t4 - t0)

    factors = SvdFactors(U, s, V, timings=timings, params=P)
    if residual_iters:
        factors.residual = spectral_norm_estimate(
            residual_operator(A, U, s, V), residual_iters, derive_seed(P.seed, 4)
        )
    return factors


def truncate_rank(U, s, V, r: int) -> SvdFactors:
    """Keep the leading ``r`` singular triplets (best rank-``r`` part of diag(s)).

    If ``||A - U diag(s) V.T||_2 <= E`` then the truncated factors satisfy
    ``||A - U' diag(s') V'.T||_2 <= 2 E + sigma_{r+1}(A)``.
    """
    s = np.asarray(s, dtype=np.float64)
    if not 0 <= r <= s.size:
        raise ValueError(f"rank {r} out of range [0, {s.size}]")
    return SvdFactors(np.asarray(U)[:, :r].copy(), s[:r].copy(), np.asarray(V)[:, :r].copy())


@dataclass
class WeylReport:
    epsilon: float
    gaps: np.ndarray
    slack: float

    @property
    def max_gap(self) -> float:
        return float(self.gaps.max()) if self.gaps.size else 0.0

    @property
    def holds(self) -> bool:
        return self.max_gap <= self.epsilon + self.slack


def weyl_check(A, B) -> WeylReport:
    """Compare ``|sigma_k(A) - sigma_k(B)|`` against ``||A - B||_2`` for every k."""
    A = as_dense(A, "A")
    B = as_dense(B, "B")
    if A.shape != B.shape:
        raise DimensionError(f"weyl_check needs equal shapes, got {A.shape} and {B.shape}")
    eps = float(singular_values(A - B)[0])
    sa = singular_values(A)
    gaps = np.abs(sa - singular_values(B))
    return WeylReport(eps, gaps, 1e-10 * float(sa[0]))
