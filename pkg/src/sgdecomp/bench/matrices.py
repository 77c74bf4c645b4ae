"""Synthetic test matrices with prescribed singular values."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError
from ..linalg import LinearOperator, thin_qr
from ..sketch import make_rng, real_dft, real_dft_adjoint

E50 = math.exp(-50.0)
E5 = math.exp(-5.0)

DEFAULTS = {
    "exp-decay": {"from": 1.0, "to": E50},
    "step": {"plateau_rank": None, "plateau_value": 1.0, "tail_from": E5, "tail_to": E50},
    # tail rate is fixed by reaching `floor` at index `reference_length`, so
    # the tail sum stays (numerically) the same for every length
    "linear-then-exp": {"breakpoint": 200, "break_value": 0.1, "floor": E50, "reference_length": 1024},
}


def _geometric(start: float, stop: float, count: int) -> np.ndarray:
    if count <= 0:
        return np.empty(0)
    if count == 1:
        return np.array([start])
    return start * (stop / start) ** (np.arange(count) / (count - 1))


@dataclass(frozen=True)
class SpectrumSpec:
    """Singular-value profile of a synthetic matrix.

    ``kind`` is ``exp-decay``, ``step`` or ``linear-then-exp``; ``options``
    holds the kind-specific parameters (see ``DEFAULTS``).
    """

    kind: str
    length: int
    options: tuple = ()

    def __post_init__(self):
        if self.kind not in DEFAULTS:
            raise ValueError(f"unknown spectrum kind {self.kind!r}; expected one of {sorted(DEFAULTS)}")
        if self.length <= 0:
            raise ValueError(f"spectrum length must be positive, got {self.length}")
        unknown = set(dict(self.options)) - set(DEFAULTS[self.kind])
        if unknown:
            raise ValueError(f"unknown options for {self.kind}: {sorted(unknown)}")
        merged = {**DEFAULTS[self.kind], **dict(self.options)}
        if self.kind == "step" and merged["plateau_rank"] is None:
            raise ValueError("step spectrum needs plateau_rank")
        object.__setattr__(self, "options", tuple(sorted(merged.items())))

    @classmethod
    def create(cls, kind: str, length: int, **options) -> "SpectrumSpec":
        return cls(kind, int(length), tuple(options.items()))

    @classmethod
    def from_dict(cls, d: dict, length: int | None = None) -> "SpectrumSpec":
        d = dict(d)
        kind = d.pop("kind")
        n = d.pop("length", None)
        return cls.create(kind, length if length is not None else n, **d)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "length": self.length, **dict(self.options)}

    def opt(self, key):
        return dict(self.options)[key]

    def describe(self) -> str:
        args = ",".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}" for k, v in self.options)
        return f"{self.kind}({args})"

    def values(self) -> np.ndarray:
        L = self.length
        o = dict(self.options)
        if self.kind == "exp-decay":
            return _geometric(o["from"], o["to"], L)
        if self.kind == "step":
            r = min(int(o["plateau_rank"]), L)
            return np.concatenate([np.full(r, float(o["plateau_value"])),
                                   _geometric(o["tail_from"], o["tail_to"], L - r)])
        bp, bv = int(o["breakpoint"]), float(o["break_value"])
        rate = math.log(bv / o["floor"]) / (o["reference_length"] - bp)
        head = np.linspace(1.0, bv, bp)[:L]
        tail = bv * np.exp(-rate * np.arange(1, L - bp + 1))
        out = np.concatenate([head, tail])
        # far tails underflow; keep them strictly positive
        return np.maximum(out, np.finfo(np.float64).tiny)

    def tail_rate(self) -> float | None:
        if self.kind != "linear-then-exp":
            return None
        o = dict(self.options)
        return math.log(o["break_value"] / o["floor"]) / (o["reference_length"] - o["breakpoint"])


def _spectrum_values(spectrum) -> np.ndarray:
    if isinstance(spectrum, SpectrumSpec):
        return spectrum.values()
    return np.asarray(spectrum, dtype=np.float64)


def synth_matrix(m: int, n: int, spectrum, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Dense ``A = U diag(sigma) V.T`` with Haar-like ``U``, ``V``."""
    sigma = _spectrum_values(spectrum)
    if sigma.size != min(m, n):
        raise DimensionError(f"spectrum length {sigma.size} must equal min(m, n) = {min(m, n)}")
    U = thin_qr(make_rng(seed, 0).standard_normal((m, sigma.size)))[0]
    V = thin_qr(make_rng(seed, 1).standard_normal((n, sigma.size)))[0]
    return (U * sigma) @ V.T, sigma


def dft_sandwich_operator(n: int, spectrum) -> LinearOperator:
    """Matrix-free ``A = F diag(sigma) F`` with ``F`` the orthonormal real DFT.

    Applied with two FFTs per column; the singular values of ``A`` are
    exactly ``sigma``.
    """
    if n <= 0 or n & (n - 1):
        raise DimensionError(f"n must be a power of two, got {n}")
    sigma = _spectrum_values(spectrum)
    if sigma.size != n:
        raise DimensionError(f"spectrum length {sigma.size} must equal n = {n}")
    d = sigma[:, None]

    def apply(X):
        return real_dft(d * real_dft(X))

    def adjoint(Y):
        return real_dft_adjoint(d * real_dft_adjoint(Y))

    return LinearOperator((n, n), apply, adjoint)
