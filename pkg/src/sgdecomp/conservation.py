"""Monte-Carlo checks of metric conservation by sparse sub-Gaussian sketches.

The tail statements being checked only come with unspecified absolute
constants, so nothing here hard-codes them: every routine reports empirical
frequencies or moments together with their standard errors, and
:class:`BoundCheck` applies an explicit three-standard-error slack.

Subspaces are drawn as the QR basis of a Gaussian ``n x r`` matrix.  Random
subspaces are a necessary check only; the statements cover every subspace.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError
from .linalg import as_dense, singular_values, thin_qr
from .sketch import SketchSpec, SubGaussianLaw, derive_seed, make_rng, sample_sparse_subgaussian

QUANTILE_LEVELS = (0.0, 0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99, 1.0)
SCALED_NORMAL = SubGaussianLaw("standard-normal", scaled=True)


@dataclass(frozen=True)
class ConservationConfig:
    n: int
    r: int
    k: int
    p: float
    trials: int = 500
    eta: float = 0.1
    eps0: float = 1.0
    lam: float = 0.5
    seed: int = 0
    law: SubGaussianLaw = SCALED_NORMAL

    def __post_init__(self):
        if not 0 < self.r < self.k <= self.n:
            raise ValueError(f"need 0 < r < k <= n, got r={self.r} k={self.k} n={self.n}")
        if self.trials < 100:
            raise ValueError(f"trials must be >= 100, got {self.trials}")
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"p must lie in (0, 1], got {self.p}")
        if not 0.0 < self.eta < 1.0:
            raise ValueError(f"eta must lie in (0, 1), got {self.eta}")

    @property
    def eps_c(self) -> float:
        """Compressibility cutoff ``eps0 * eta * sqrt(p)``."""
        return self.eps0 * self.eta * math.sqrt(self.p)

    def to_dict(self) -> dict:
        return {"n": self.n, "r": self.r, "k": self.k, "p": self.p, "trials": self.trials,
                "eta": self.eta, "eps0": self.eps0, "eps_c": self.eps_c, "lam": self.lam,
                "seed": self.seed, "law": self.law.base, "scaled": self.law.scaled}


def _stderr(fraction: float, trials: int) -> float:
    return math.sqrt(fraction * (1.0 - fraction) / trials)


@dataclass
class TailReport:
    """Empirical distribution of ``sigma(Omega B) / sqrt(k)`` over trials."""

    config: ConservationConfig
    threshold: float
    side: str  # "min": P(sigma_min <= threshold sqrt k); "max": P(sigma_max > threshold sqrt k)
    smin: np.ndarray
    smax: np.ndarray
    omega_norm: np.ndarray | None = None
    extra: dict = field(default_factory=dict)

    @property
    def trials(self) -> int:
        return self.smin.size

    @property
    def fraction(self) -> float:
        if self.side == "min":
            return float(np.mean(self.smin <= self.threshold))
        return float(np.mean(self.smax > self.threshold))

    @property
    def stderr(self) -> float:
        return _stderr(self.fraction, self.trials)

    @property
    def omega_fraction(self) -> float | None:
        """Fraction of trials with ``sigma_1(Omega) > threshold * sqrt(n)``."""
        if self.omega_norm is None:
            return None
        return float(np.mean(self.omega_norm > self.threshold))

    def quantiles(self) -> dict:
        return {
            "levels": list(QUANTILE_LEVELS),
            "smin_over_sqrt_k": np.quantile(self.smin, QUANTILE_LEVELS).tolist(),
            "smax_over_sqrt_k": np.quantile(self.smax, QUANTILE_LEVELS).tolist(),
        }

    def to_dict(self) -> dict:
        out = {
            "config": self.config.to_dict(),
            "side": self.side,
            "threshold": self.threshold,
            "trials": self.trials,
            "fraction": self.fraction,
            "stderr": self.stderr,
            "quantiles": self.quantiles(),
        }
        if self.omega_norm is not None:
            frac = self.omega_fraction
            out["omega_norm_fraction"] = frac
            out["omega_norm_stderr"] = _stderr(frac, self.trials)
        out.update(self.extra)
        return out

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            header = ["trial", "smin_over_sqrt_k", "smax_over_sqrt_k"]
            if self.omega_norm is not None:
                header.append("omega_norm_over_sqrt_n")
            w.writerow(header)
            for i in range(self.trials):
                row = [i, repr(float(self.smin[i])), repr(float(self.smax[i]))]
                if self.omega_norm is not None:
                    row.append(repr(float(self.omega_norm[i])))
                w.writerow(row)


def _check_orthonormal(B: np.ndarray, tol: float = 1e-10):
    err = np.abs(B.T @ B - np.eye(B.shape[1])).max()
    if err > tol:
        raise ValueError(f"B must have orthonormal columns (max deviation {err:.3e} > {tol})")


def subspace_extreme_singvals(omega, B) -> tuple[float, float]:
    """Smallest and largest singular values of ``Omega @ B``.

    These are the min and max of ``||Omega x||`` over unit ``x`` in the
    span of ``B`` (``B`` must have orthonormal columns).
    """
    B = as_dense(B, "B")
    _check_orthonormal(B)
    if omega.shape[1] != B.shape[0]:
        raise DimensionError(f"cannot multiply sketch {omega.shape} by basis {B.shape}")
    s = singular_values(np.asarray(omega @ B))
    return float(s[-1]), float(s[0])


def random_subspace_basis(n: int, r: int, rng: np.random.Generator) -> np.ndarray:
    return thin_qr(rng.standard_normal((n, r)))[0]


def _trial(cfg: ConservationConfig, i: int, with_omega_norm: bool):
    spec = SketchSpec("sparse-subgaussian", cfg.k, cfg.n, cfg.p, derive_seed(cfg.seed, i, 0))
    omega = sample_sparse_subgaussian(spec, cfg.law)
    B = random_subspace_basis(cfg.n, cfg.r, make_rng(cfg.seed, i, 1))
    smin, smax = subspace_extreme_singvals(omega, B)
    onorm = float(singular_values(omega.toarray())[0]) if with_omega_norm else None
    return smin, smax, onorm


def _run_trials(cfg: ConservationConfig, with_omega_norm: bool):
    root_k = math.sqrt(cfg.k)
    smin = np.empty(cfg.trials)
    smax = np.empty(cfg.trials)
    onorm = np.empty(cfg.trials) if with_omega_norm else None
    for i in range(cfg.trials):
        a, b, c = _trial(cfg, i, with_omega_norm)
        smin[i], smax[i] = a / root_k, b / root_k
        if with_omega_norm:
            onorm[i] = c / math.sqrt(cfg.n)
    return smin, smax, onorm


def min_singval_tail(config: ConservationConfig, threshold: float) -> TailReport:
    """Estimate ``P(sigma_min(Omega B) <= threshold * sqrt(k))`` over random
    ``(Omega, B)`` pairs.  Trial ``i`` is keyed by ``(seed, i)``, so the
    report does not depend on evaluation order."""
    smin, smax, _ = _run_trials(config, False)
    return TailReport(config, threshold, "min", smin, smax)


def max_singval_tail(config: ConservationConfig, t: float) -> TailReport:
    """Estimate ``P(sigma_max(Omega B) > t sqrt(k))`` and, alongside,
    ``P(sigma_1(Omega) > t sqrt(n))``."""
    if t < 1.0:
        raise ValueError(f"t must be >= 1, got {t}")
    smin, smax, onorm = _run_trials(config, True)
    return TailReport(config, t, "max", smin, smax, onorm)


def incompressibility_mass(v, eta: float, eps_c: float) -> tuple[float, bool]:
    """Squared mass of the coordinates with ``|v_j| <= eps_c``; the vector is
    incompressible when that mass is at least ``eta**2``."""
    v = np.asarray(v, dtype=np.float64).ravel()
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"v must be a unit vector, got norm {norm}")
    small = v[np.abs(v) <= eps_c]
    mass = math.fsum((small * small).tolist())
    return mass, mass >= eta * eta


@dataclass(frozen=True)
class BoundCheck:
    """Monte-Carlo estimate compared with an upper bound, 3-SE slack."""

    estimate: float
    stderr: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.estimate <= self.bound + 3.0 * self.stderr

    def to_dict(self) -> dict:
        return {"estimate": self.estimate, "stderr": self.stderr, "bound": self.bound, "holds": self.holds}


def _unit(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64).ravel()
    if abs(np.linalg.norm(a) - 1.0) > 1e-10:
        raise ValueError("coefficient vector must have unit norm")
    return a


def sample_weighted_sums(a, law: SubGaussianLaw, p: float, trials: int, seed: int,
                         chunk: int = 100_000) -> np.ndarray:
    """Draws of ``S = sum_i a_i X_i`` with ``X_i`` i.i.d. sparse sub-Gaussian
    (zero w.p. ``1 - p``, ``Z / sqrt(p)`` otherwise)."""
    if not law.scaled:
        raise ValueError("moment and small-ball checks are defined for the scaled law")
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    a = _unit(a)
    rng = make_rng(seed)
    out = np.empty(trials)
    scale = 1.0 / math.sqrt(p)
    for start in range(0, trials, chunk):
        stop = min(trials, start + chunk)
        size = (stop - start, a.size)
        X = law.draw(rng, size) * (rng.random(size) < p)
        out[start:stop] = (X @ a) * scale
    return out


def small_ball_estimate(a, law: SubGaussianLaw, p: float, lam: float = 0.5,
                        trials: int = 100_000, seed: int = 0) -> BoundCheck:
    """``P(|S| < lam)`` against ``1 - p (1 - lam^2)^2 / z4``."""
    if not 0.0 < lam < 1.0:
        raise ValueError(f"lam must lie in (0, 1), got {lam}")
    S = sample_weighted_sums(a, law, p, trials, seed)
    frac = float(np.mean(np.abs(S) < lam))
    return BoundCheck(frac, _stderr(frac, trials), 1.0 - p * (1.0 - lam * lam) ** 2 / law.z4)


def moment_bound_estimate(a, law: SubGaussianLaw, p: float, trials: int = 1_000_000,
                          seed: int = 0) -> tuple[BoundCheck, BoundCheck]:
    """Empirical third and fourth moments of ``S`` against ``E Z^3 / sqrt(p)``
    and ``(E Z^4 + 1) / p``."""
    S = sample_weighted_sums(a, law, p, trials, seed)
    s3 = S ** 3
    s4 = S ** 4
    root = math.sqrt(trials)
    m3 = BoundCheck(float(s3.mean()), float(s3.std(ddof=1)) / root, law.ez3 / math.sqrt(p))
    m4 = BoundCheck(float(s4.mean()), float(s4.std(ddof=1)) / root, law.z4 / p)
    return m3, m4
