"""Experiment grid runner: decompose synthetic matrices with each method and
record per-stage timings and residuals."""

from __future__ import annotations

import json
import logging
import math
import statistics
import time
from dataclasses import dataclass, fields

import jsonschema
import scipy.sparse as sp

from ..errors import RankDeficiencyError, SvdConvergenceError
from ..linalg import LinearOperator, dense_svd, spectral_norm_estimate
from ..rsvd import RsvdParams, frobenius_residual, randomized_svd, residual_operator
from ..sketch import SketchSpec, derive_seed, sample_sparse_subgaussian, sketch_matrix
from .matrices import SpectrumSpec, dft_sandwich_operator, synth_matrix

log = logging.getLogger(__name__)

METHODS = ("sparse-subgaussian", "gaussian", "countsketch", "srft", "full-svd")

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["matrices", "methods", "ranks"],
    "properties": {
        "matrices": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["m", "n", "spectrum"],
                "properties": {
                    "m": {"type": "integer", "minimum": 1},
                    "n": {"type": "integer", "minimum": 1},
                    "seed": {"type": "integer", "minimum": 0},
                    "kind": {"enum": ["dense", "dft-sandwich"]},
                    "spectrum": {
                        "type": "object",
                        "required": ["kind"],
                        "properties": {"kind": {"enum": ["exp-decay", "step", "linear-then-exp"]}},
                    },
                },
                "additionalProperties": False,
            },
        },
        "methods": {"type": "array", "minItems": 1, "items": {"enum": list(METHODS)}},
        "ranks": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}},
        "repeats": {"type": "integer", "minimum": 1},
        "power_iters": {"type": "integer", "minimum": 20},
        "params": {
            "type": "object",
            "properties": {
                "k1": {"type": "integer", "minimum": 1},
                "k2": {"type": "integer", "minimum": 1},
                "l": {"type": "integer", "minimum": 1},
                "p": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
            },
            "additionalProperties": False,
        },
        "output": {"type": "string"},
    },
    "additionalProperties": False,
}


@dataclass
class ExperimentRecord:
    method: str
    m: int
    n: int
    spectrum: str
    seed: int
    r: int
    k1: int | None
    k2: int | None
    l: int | None
    p: float | None
    t_sketch_ms: float
    t_qr_ms: float
    t_second_sketch_ms: float
    t_small_svd_ms: float
    t_total_ms: float
    err_spectral: float
    err_frobenius: float | None
    rel_err: float
    sigma_r_plus_1: float
    delta_r_plus_1: float

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]


def load_config(source) -> dict:
    """Parse (if given a path) and validate an experiment config."""
    if isinstance(source, dict):
        config = source
    else:
        with open(source) as fh:
            config = json.load(fh)
    jsonschema.validate(config, CONFIG_SCHEMA)
    return config


def _resolve_spectrum(spec: dict, length: int, r: int) -> SpectrumSpec:
    d = {k: (r if v == "r" else v) for k, v in spec.items()}
    return SpectrumSpec.from_dict(d, length)


def _build_matrix(entry: dict, spectrum: SpectrumSpec):
    m, n, seed = entry["m"], entry["n"], entry.get("seed", 0)
    if entry.get("kind", "dense") == "dft-sandwich":
        if m != n:
            raise ValueError("dft-sandwich matrices must be square")
        sigma = spectrum.values()
        return dft_sandwich_operator(n, sigma), sigma
    return synth_matrix(m, n, spectrum, seed)


def _full_svd(A, r):
    t0 = time.perf_counter()
    U, s, V = dense_svd(A)
    elapsed = 1e3 * (time.perf_counter() - t0)
    return (U[:, :r], s[:r], V[:, :r]), {"sketch": 0.0, "qr": 0.0, "second_sketch": 0.0,
                                         "small_svd": elapsed, "total": elapsed}


def run_cell(A, sigma, method: str, r: int, seed: int, params: dict | None = None,
             repeats: int = 5, power_iters: int = 100):
    """Decompose ``A`` once for the numbers (that run doubles as warm-up) and
    ``repeats`` more times for median stage timings."""
    params = params or {}
    m, n = A.shape
    if method == "full-svd":
        if isinstance(A, LinearOperator):
            raise ValueError("full-svd needs a materialized matrix")
        (U, s, V), _ = _full_svd(A, r)
        runs = [_full_svd(A, r)[1] for _ in range(repeats)]
        rp = None
    else:
        rp = RsvdParams(r=r, k1=params.get("k1"), k2=params.get("k2"), l=params.get("l"),
                        p1=params.get("p"), p2=params.get("p"), seed=seed, sketch=method)
        f = randomized_svd(A, rp, residual_iters=0)
        U, s, V, rp = f.U, f.s, f.V, f.params
        runs = [randomized_svd(A, rp, residual_iters=0).timings for _ in range(repeats)]
    timings = {k: statistics.median(t[k] for t in runs) for k in runs[0]}
    err = spectral_norm_estimate(residual_operator(A, U, s, V), power_iters, derive_seed(seed, 5))
    return (U, s, V), rp, timings, err


def run_experiment(config, failures: list | None = None):
    """Yield one :class:`ExperimentRecord` per (matrix, rank, method) cell.

    Cells that raise a decomposition error are logged and appended to
    ``failures`` (if given) instead of aborting the sweep.
    """
    config = load_config(config)
    repeats = config.get("repeats", 5)
    power_iters = config.get("power_iters", 100)
    params = config.get("params", {})
    for entry in config["matrices"]:
        m, n, seed = entry["m"], entry["n"], entry.get("seed", 0)
        cache = {}
        for r in config["ranks"]:
            spectrum = _resolve_spectrum(entry["spectrum"], min(m, n), r)
            if spectrum not in cache:
                cache.clear()
                cache[spectrum] = _build_matrix(entry, spectrum)
            A, sigma = cache[spectrum]
            sigma_next = float(sigma[r]) if r < sigma.size else 0.0
            delta = math.sqrt(math.fsum((sigma[r:] ** 2).tolist()))
            for method in config["methods"]:
                try:
                    (U, s, V), rp, t, err = run_cell(A, sigma, method, r, seed, params, repeats, power_iters)
                except (RankDeficiencyError, SvdConvergenceError, ValueError) as exc:
                    log.warning("cell %s r=%d %s failed: %s", spectrum.describe(), r, method, exc)
                    if failures is not None:
                        failures.append({"method": method, "m": m, "n": n, "spectrum": spectrum.describe(),
                                         "seed": seed, "r": r, "error": f"{type(exc).__name__}: {exc}"})
                    continue
                yield ExperimentRecord(
                    method=method, m=m, n=n, spectrum=spectrum.describe(), seed=seed, r=r,
                    k1=rp.k1 if rp else None, k2=rp.k2 if rp else None, l=rp.l if rp else None,
                    p=rp.p1 if rp and rp.sketch == "sparse-subgaussian" else None,
                    t_sketch_ms=t["sketch"], t_qr_ms=t["qr"], t_second_sketch_ms=t["second_sketch"],
                    t_small_svd_ms=t["small_svd"], t_total_ms=t["total"],
                    err_spectral=err, err_frobenius=frobenius_residual(A, U, s, V),
                    rel_err=err / sigma_next if sigma_next > 0 else math.inf,
                    sigma_r_plus_1=sigma_next, delta_r_plus_1=delta,
                )


def random_sparse(n: int, density: float, seed: int = 0) -> sp.csr_matrix:
    """Square CSR matrix with a Binomial(n*n, density) nonzero pattern."""
    spec = SketchSpec("sparse-subgaussian", n, n, density, seed)
    return sample_sparse_subgaussian(spec)


def sketch_stage_time(A, k: int, seed: int = 0, repeats: int = 5) -> float:
    """Median ms of the first sketch product ``A @ Omega1.T`` (p = 3/n),
    after one discarded warm-up."""
    n = A.shape[1]
    omega = sample_sparse_subgaussian(SketchSpec("sparse-subgaussian", k, n, min(1.0, 3.0 / n), seed))
    sketch_matrix(omega, A, "ASt")
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        sketch_matrix(omega, A, "ASt")
        times.append(1e3 * (time.perf_counter() - t0))
    return statistics.median(times)


def nnz_scaling(n: int = 4000, k: int = 100, density: float = 0.05, repeats: int = 5, seed: int = 0) -> dict:
    """Sketch-stage time at densities ``d`` and ``2d``; the ratio should track
    the nnz ratio."""
    A1 = random_sparse(n, density, seed)
    A2 = random_sparse(n, 2 * density, seed + 1)
    t1 = sketch_stage_time(A1, k, seed, repeats)
    t2 = sketch_stage_time(A2, k, seed, repeats)
    return {"n": n, "k": k, "density": density, "nnz": [A1.nnz, A2.nnz],
            "t_ms": [t1, t2], "ratio": t2 / t1}
