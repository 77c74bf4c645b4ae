"""Seeded random sketch ensembles and their application.

All samplers draw from ``numpy.random.Philox`` keyed by
``SeedSequence([seed, *stream])``, so a sketch is a pure function of its
spec.  Supported kinds:

``sparse-subgaussian``
    i.i.d. entries, zero with probability ``1 - p`` and a draw of the base
    law ``Z`` otherwise (times ``1/sqrt(p)`` when the law is scaled).
``dense-gaussian``
    i.i.d. standard normal entries (alias ``gaussian``).
``countsketch``
    one ``+-1`` per column, in a uniformly random row.
``srft``
    ``sqrt(n/k) * (row subsample of the real DFT) * (random sign flip)``,
    applied with the FFT.
"""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError
from .linalg import LinearOperator, as_dense, shape_of

RNG_ID = "numpy.random.Philox keyed by SeedSequence([seed, *stream])"

KINDS = ("sparse-subgaussian", "dense-gaussian", "countsketch", "srft")
_ALIASES = {"gaussian": "dense-gaussian", "sparse": "sparse-subgaussian"}


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Counter-based generator for ``seed`` and an optional sub-stream path."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, stream)])))


def canonical_kind(kind: str) -> str:
    kind = _ALIASES.get(kind, kind)
    if kind not in KINDS:
        raise ValueError(f"unknown sketch kind {kind!r}; expected one of {KINDS}")
    return kind


@dataclass(frozen=True)
class SubGaussianLaw:
    """Base law ``Z`` of the nonzero entries (unit variance) and whether the
    ``1/sqrt(p)`` normalisation is applied."""

    base: str = "standard-normal"
    scaled: bool = False

    def __post_init__(self):
        if self.base not in ("standard-normal", "rademacher"):
            raise ValueError(f"unsupported base law {self.base!r}")

    @property
    def ez3(self) -> float:
        return 0.0

    @property
    def ez4(self) -> float:
        return 3.0 if self.base == "standard-normal" else 1.0

    @property
    def z4(self) -> float:
        return self.ez4 + 1.0

    def draw(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.base == "standard-normal":
            return rng.standard_normal(size)
        return rng.integers(0, 2, size=size).astype(np.float64) * 2.0 - 1.0


@dataclass(frozen=True)
class SketchSpec:
    kind: str
    rows: int
    cols: int
    p: float | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", canonical_kind(self.kind))
        if self.rows <= 0 or self.cols <= 0:
            raise DimensionError(f"sketch dimensions must be positive, got {self.rows}x{self.cols}")
        if self.kind == "sparse-subgaussian":
            if self.p is None or not (0.0 < self.p <= 1.0):
                raise ValueError(f"density p must lie in (0, 1], got {self.p}")
        if self.rows > self.cols:
            warnings.warn(
                f"sketch has more rows ({self.rows}) than columns ({self.cols}); "
                "it is not a dimension reduction",
                stacklevel=3,
            )

    def to_dict(self, law: SubGaussianLaw | None = None) -> dict:
        law = law or SubGaussianLaw()
        out = asdict(self)
        out.update(law=law.base, scaled=law.scaled)
        return out


def sample_sparse_subgaussian(spec: SketchSpec, law: SubGaussianLaw = SubGaussianLaw()) -> sp.csr_matrix:
    """Sparse sub-Gaussian ``rows x cols`` sketch in CSR form.

    Each row gets a Binomial(cols, p) number of nonzeros at uniformly chosen
    distinct columns, which is the same law as independent Bernoulli(p)
    masks but costs O(nnz) instead of O(rows * cols).
    """
    if spec.kind != "sparse-subgaussian":
        raise ValueError(f"spec kind is {spec.kind!r}, not sparse-subgaussian")
    k, n, p = spec.rows, spec.cols, spec.p
    rng = make_rng(spec.seed)
    counts = rng.binomial(n, p, size=k)
    indptr = np.zeros(k + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    indices = np.empty(indptr[-1], dtype=np.int64)
    for i in range(k):
        c = counts[i]
        if c:
            indices[indptr[i]:indptr[i + 1]] = np.sort(rng.choice(n, c, replace=False))
    values = law.draw(rng, indices.size)
    if law.scaled:
        values /= np.sqrt(p)
    S = sp.csr_matrix((values, indices, indptr), shape=(k, n))
    S.eliminate_zeros()
    return S


def sample_dense_gaussian(rows: int, cols: int, seed: int = 0) -> np.ndarray:
    if rows <= 0 or cols <= 0:
        raise DimensionError(f"dimensions must be positive, got {rows}x{cols}")
    return make_rng(seed).standard_normal((rows, cols))


def sample_countsketch(k: int, n: int, seed: int = 0) -> sp.csr_matrix:
    """``k x n`` CountSketch: column ``j`` holds a single random sign in a random row."""
    if k <= 0 or n <= 0:
        raise DimensionError(f"dimensions must be positive, got {k}x{n}")
    if k > n:
        raise DimensionError(f"countsketch needs k <= n, got k={k}, n={n}")
    rng = make_rng(seed)
    rows = rng.integers(0, k, size=n)
    signs = rng.integers(0, 2, size=n).astype(np.float64) * 2.0 - 1.0
    S = sp.csr_matrix((signs, (rows, np.arange(n))), shape=(k, n))
    S.sort_indices()
    return S


def real_dft(X: np.ndarray) -> np.ndarray:
    """Orthonormal real Fourier transform along axis 0.

    Output layout for length ``n``: ``[Re X_0, sqrt2 Re X_1, sqrt2 Im X_1,
    sqrt2 Re X_2, ...]`` scaled by ``1/sqrt(n)``, ending with ``Re X_{n/2}``
    when ``n`` is even.  Exactly ``n`` components, all informative.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    F = np.fft.rfft(X, axis=0) / np.sqrt(n)
    out = np.empty_like(X)
    out[0] = F[0].real
    h = (n - 1) // 2  # number of complex pairs
    out[1:2 * h + 1:2] = np.sqrt(2.0) * F[1:h + 1].real
    out[2:2 * h + 1:2] = np.sqrt(2.0) * F[1:h + 1].imag
    if n % 2 == 0:
        out[n - 1] = F[n // 2].real
    return out


def real_dft_adjoint(Y: np.ndarray) -> np.ndarray:
    """Transpose (and inverse) of :func:`real_dft`."""
    Y = np.asarray(Y, dtype=np.float64)
    n = Y.shape[0]
    h = (n - 1) // 2
    F = np.zeros((n // 2 + 1,) + Y.shape[1:], dtype=np.complex128)
    F[0] = Y[0]
    F[1:h + 1] = (Y[1:2 * h + 1:2] + 1j * Y[2:2 * h + 1:2]) / np.sqrt(2.0)
    if n % 2 == 0:
        F[n // 2] = Y[n - 1]
    return np.fft.irfft(F, n=n, axis=0) * np.sqrt(n)


def srft_operator(n: int, rows: np.ndarray, signs: np.ndarray) -> LinearOperator:
    """SRFT with explicit retained components ``rows`` and sign diagonal ``signs``."""
    rows = np.asarray(rows, dtype=np.int64)
    signs = np.asarray(signs, dtype=np.float64)
    k = rows.size
    scale = np.sqrt(n / k)

    def apply(X):
        return scale * real_dft(signs[:, None] * X)[rows]

    def adjoint(Y):
        Z = np.zeros((n, Y.shape[1]))
        Z[rows] = Y
        return scale * signs[:, None] * real_dft_adjoint(Z)

    return LinearOperator((k, n), apply, adjoint)


def sample_srft_apply(n: int, k: int, seed: int = 0) -> LinearOperator:
    """Random ``k x n`` SRFT operator, O(n log n) per column."""
    if k <= 0 or n <= 0:
        raise DimensionError(f"dimensions must be positive, got {k}x{n}")
    if k > n:
        raise DimensionError(f"srft needs k <= n, got k={k}, n={n}")
    rng = make_rng(seed)
    signs = rng.integers(0, 2, size=n).astype(np.float64) * 2.0 - 1.0
    rows = np.sort(rng.choice(n, k, replace=False))
    return srft_operator(n, rows, signs)


def sample_sketch(spec: SketchSpec, law: SubGaussianLaw = SubGaussianLaw()):
    """Draw the sketch described by ``spec``: CSR, dense array or operator."""
    if spec.kind == "sparse-subgaussian":
        return sample_sparse_subgaussian(spec, law)
    if spec.kind == "dense-gaussian":
        return sample_dense_gaussian(spec.rows, spec.cols, spec.seed)
    if spec.kind == "countsketch":
        return sample_countsketch(spec.rows, spec.cols, spec.seed)
    return sample_srft_apply(spec.cols, spec.rows, spec.seed)


def _sketch_transpose_dense(S) -> np.ndarray:
    if isinstance(S, LinearOperator):
        return S.rmatmat(np.eye(S.shape[0]))
    if sp.issparse(S):
        return S.T.toarray()
    return np.asarray(S).T


def sketch_matrix(S, A, mode: str = "SA") -> np.ndarray:
    """Apply sketch ``S`` to ``A``: ``mode="SA"`` gives ``S @ A`` and
    ``mode="ASt"`` gives ``A @ S.T``.

    ``S`` may be CSR, dense or a :class:`LinearOperator`; so may ``A``.
    Sparse-by-sparse products stay sparse until the (small) result is
    densified, so their cost follows nnz(A) * p * k.
    """
    if mode not in ("SA", "ASt"):
        raise ValueError(f"mode must be 'SA' or 'ASt', got {mode!r}")
    k, s_in = shape_of(S)
    m, n = shape_of(A)
    if mode == "SA" and s_in != m:
        raise DimensionError(f"sketch {S.shape} cannot left-multiply {A.shape}")
    if mode == "ASt" and s_in != n:
        raise DimensionError(f"{A.shape} cannot be multiplied by the transpose of sketch {S.shape}")

    if isinstance(A, LinearOperator):
        St = _sketch_transpose_dense(S)
        out = A.rmatmat(St).T if mode == "SA" else A.matmat(St)
        return np.ascontiguousarray(out)

    a_sparse = sp.issparse(A)
    if not a_sparse:
        A = as_dense(A, "A")

    if isinstance(S, LinearOperator):
        Ad = A.toarray() if a_sparse else A
        out = S.matmat(Ad) if mode == "SA" else S.matmat(Ad.T).T
    elif sp.issparse(S):
        if mode == "SA":
            out = S @ A
        else:
            out = A @ S.T if a_sparse else (S @ A.T).T
    else:
        S = np.asarray(S, dtype=np.float64)
        if mode == "SA":
            out = (A.T @ S.T).T if a_sparse else S @ A
        else:
            out = A @ S.T
    if sp.issparse(out):
        out = out.toarray()
    return np.ascontiguousarray(out)


def derive_seed(seed: int, *stream: int) -> int:
    """64-bit child seed for sub-stream ``stream`` of a master ``seed``."""
    state = np.random.SeedSequence([int(seed), *map(int, stream)]).generate_state(1, np.uint64)
    return int(state[0])


def apply_transpose(S, X: np.ndarray) -> np.ndarray:
    """``S.T @ X`` for a CSR, dense or operator sketch ``S``."""
    if isinstance(S, LinearOperator):
        return S.rmatmat(X)
    return np.asarray(S.T @ X)
