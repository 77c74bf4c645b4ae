import json
import math
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from sgdecomp import DimensionError
from sgdecomp.bench import (
    ExperimentRecord,
    SpectrumSpec,
    dft_sandwich_operator,
    emit_report,
    load_config,
    nnz_scaling,
    read_records_csv,
    run_experiment,
    synth_matrix,
)
from sgdecomp.bench.experiment import random_sparse
from sgdecomp.linalg import singular_values


class TestSpectrum:
    def test_exp_decay_endpoints(self):
        v = SpectrumSpec.create("exp-decay", 50).values()
        assert v[0] == 1.0 and math.isclose(v[-1], math.exp(-50), rel_tol=1e-12)
        assert np.all(np.diff(v) < 0)

    def test_step(self):
        v = SpectrumSpec.create("step", 40, plateau_rank=10).values()
        assert np.all(v[:10] == 1.0)
        assert math.isclose(v[10], math.exp(-5)) and math.isclose(v[-1], math.exp(-50), rel_tol=1e-12)
        with pytest.raises(ValueError):
            SpectrumSpec.create("step", 40)

    def test_linear_then_exp(self):
        spec = SpectrumSpec.create("linear-then-exp", 1024)
        v = spec.values()
        assert v[0] == 1.0 and math.isclose(v[199], 0.1)
        np.testing.assert_allclose(np.diff(v[:200]), np.diff(v[:200])[0])
        assert math.isclose(v[-1], math.exp(-50), rel_tol=1e-9)
        # the tail sum past index 200 is the same for every length
        tails = [SpectrumSpec.create("linear-then-exp", n).values()[200:].sum() for n in (1024, 2048, 4096)]
        np.testing.assert_allclose(tails, tails[0], rtol=1e-12)
        assert np.all(SpectrumSpec.create("linear-then-exp", 4096).values() > 0)

    def test_roundtrip_and_validation(self):
        spec = SpectrumSpec.create("step", 30, plateau_rank=5, plateau_value=2.0)
        assert SpectrumSpec.from_dict(spec.to_dict()) == spec
        assert "plateau_rank=5" in spec.describe()
        with pytest.raises(ValueError):
            SpectrumSpec.create("flat", 10)
        with pytest.raises(ValueError):
            SpectrumSpec.create("exp-decay", 10, slope=2)
        with pytest.raises(ValueError):
            SpectrumSpec.create("exp-decay", 0)


class TestMatrices:
    def test_synth_singular_values(self):
        spec = SpectrumSpec.create("exp-decay", 30, to=1e-3)
        A, sigma = synth_matrix(40, 30, spec, seed=2)
        np.testing.assert_allclose(singular_values(A), sigma, rtol=1e-10)
        B, _ = synth_matrix(40, 30, spec, seed=2)
        np.testing.assert_array_equal(A, B)
        with pytest.raises(DimensionError):
            synth_matrix(40, 30, np.ones(40))

    def test_dft_sandwich(self):
        sigma = SpectrumSpec.create("exp-decay", 64, to=1e-4).values()
        op = dft_sandwich_operator(64, sigma)
        A = op.matmat(np.eye(64))
        np.testing.assert_allclose(singular_values(A), sigma, rtol=1e-9)
        np.testing.assert_allclose(op.rmatmat(np.eye(64)), A.T, atol=1e-14)
        with pytest.raises(DimensionError):
            dft_sandwich_operator(48, np.ones(48))


def small_config(**extra):
    return {
        "matrices": [{"m": 120, "n": 100, "seed": 1, "spectrum": {"kind": "exp-decay"}}],
        "methods": ["sparse-subgaussian", "countsketch", "full-svd"],
        "ranks": [5, 10],
        "repeats": 2,
        **extra,
    }


class TestExperiment:
    def test_schema(self):
        load_config(small_config())
        for bad in ({"methods": ["svd"]}, {"ranks": [0]}, {"power_iters": 5}, {"colour": 1}):
            with pytest.raises(jsonschema.ValidationError):
                load_config(small_config(**bad))

    def test_records(self):
        records = list(run_experiment(small_config()))
        assert len(records) == 6
        for rec in records:
            assert rec.rel_err >= 1 - 1e-6
            assert rec.t_total_ms >= 0 and rec.err_frobenius is not None
            assert rec.delta_r_plus_1 >= rec.sigma_r_plus_1
        full = [r for r in records if r.method == "full-svd"]
        assert all(abs(r.rel_err - 1) < 1e-6 for r in full)
        assert all(r.k1 is None for r in full)

    def test_rank_placeholder_and_failures(self):
        cfg = {
            "matrices": [{"m": 64, "n": 64, "kind": "dft-sandwich",
                          "spectrum": {"kind": "step", "plateau_rank": "r"}}],
            "methods": ["srft", "full-svd"],
            "ranks": [4],
            "repeats": 1,
        }
        failures = []
        records = list(run_experiment(cfg, failures))
        assert [r.method for r in records] == ["srft"]
        assert "plateau_rank=4" in records[0].spectrum
        assert records[0].err_frobenius is None
        assert failures and failures[0]["method"] == "full-svd"

    def test_report_roundtrip(self, tmp_path):
        cfg = small_config()
        records = list(run_experiment(cfg))
        csv_path, json_path = emit_report(records, tmp_path / "out", cfg, [{"x": 1}])
        assert read_records_csv(csv_path) == records
        payload = json.loads(json_path.read_text())
        assert payload["columns"] == ExperimentRecord.columns()
        assert payload["config"] == cfg and payload["failures"] == [{"x": 1}]
        assert "Philox" in payload["rng"] and payload["build"]
        header = csv_path.read_text().splitlines()[0].split(",")
        assert header[:6] == ["method", "m", "n", "spectrum", "seed", "r"]
        assert header[-3:] == ["rel_err", "sigma_r_plus_1", "delta_r_plus_1"]

    def test_report_errors(self, tmp_path):
        with pytest.raises(ValueError):
            emit_report([], tmp_path)
        blocker = tmp_path / "file"
        blocker.write_text("")
        records = list(run_experiment(small_config(ranks=[5], methods=["full-svd"], repeats=1)))
        with pytest.raises(OSError, match="file"):
            emit_report(records, blocker / "sub")


def test_random_sparse_density():
    A = random_sparse(300, 0.05, seed=1)
    assert abs(A.nnz / 300 ** 2 - 0.05) < 0.005


@pytest.mark.timing
def test_nnz_scaling_small():
    out = nnz_scaling(n=1500, k=50, density=0.05, repeats=3)
    assert out["nnz"][1] > 1.8 * out["nnz"][0]
    assert out["ratio"] > 1.0


@pytest.mark.parametrize("path", sorted((Path(__file__).parents[1] / "configs").glob("*.json")), ids=lambda p: p.stem)
def test_shipped_configs_validate(path):
    cfg = load_config(path)
    assert cfg["output"].startswith("results/")
