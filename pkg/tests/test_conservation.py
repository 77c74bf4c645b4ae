import json
import math

import numpy as np
import pytest

from oracles import normal_cdf
from sgdecomp import SketchSpec, SubGaussianLaw
from sgdecomp.conservation import (
    BoundCheck,
    ConservationConfig,
    incompressibility_mass,
    max_singval_tail,
    min_singval_tail,
    moment_bound_estimate,
    random_subspace_basis,
    sample_weighted_sums,
    small_ball_estimate,
    subspace_extreme_singvals,
)
from sgdecomp.sketch import make_rng, sample_sparse_subgaussian

SCALED = SubGaussianLaw(scaled=True)
RADEMACHER = SubGaussianLaw("rademacher", scaled=True)


class TestConfig:
    def test_eps_c(self):
        cfg = ConservationConfig(n=100, r=2, k=10, p=0.25, eta=0.2, eps0=0.5)
        assert math.isclose(cfg.eps_c, 0.5 * 0.2 * 0.5)

    @pytest.mark.parametrize("kw", [dict(r=10, k=10), dict(k=200), dict(trials=50), dict(p=0.0), dict(eta=1.0)])
    def test_rejects(self, kw):
        base = dict(n=100, r=2, k=10, p=0.5)
        with pytest.raises(ValueError):
            ConservationConfig(**{**base, **kw})


class TestExtremeSingvals:
    def test_matches_direct_svd(self):
        omega = sample_sparse_subgaussian(SketchSpec("sparse-subgaussian", 30, 200, 0.2, 1), SCALED)
        B = random_subspace_basis(200, 5, make_rng(2))
        lo, hi = subspace_extreme_singvals(omega, B)
        s = np.linalg.svd(omega.toarray() @ B, compute_uv=False)
        assert math.isclose(lo, s[-1], rel_tol=1e-12) and math.isclose(hi, s[0], rel_tol=1e-12)
        # and they bracket ||Omega x|| for unit x in span(B)
        x = B @ make_rng(3).standard_normal(5)
        x /= np.linalg.norm(x)
        assert lo - 1e-12 <= np.linalg.norm(omega @ x) <= hi + 1e-12

    def test_requires_orthonormal(self):
        with pytest.raises(ValueError):
            subspace_extreme_singvals(np.eye(3), np.ones((3, 1)))


class TestTails:
    def test_report_fields_and_order_independence(self, tmp_path):
        cfg = ConservationConfig(n=300, r=5, k=40, p=0.2, trials=100, seed=3)
        low = min_singval_tail(cfg, 0.3)
        high = max_singval_tail(cfg, 2.0)
        np.testing.assert_array_equal(low.smin, high.smin)
        assert 0 <= low.fraction <= 1 and low.stderr >= 0
        assert np.all(low.smin <= low.smax)
        d = high.to_dict()
        assert {"fraction", "stderr", "quantiles", "omega_norm_fraction", "config"} <= set(d)
        high.to_json(tmp_path / "r.json")
        assert json.loads((tmp_path / "r.json").read_text())["trials"] == 100
        high.to_csv(tmp_path / "r.csv")
        lines = (tmp_path / "r.csv").read_text().splitlines()
        assert len(lines) == 101 and lines[0].endswith("omega_norm_over_sqrt_n")

    def test_full_sketch_no_failures(self):
        # k = n with a scaled Gaussian keeps sigma_min(Omega B)/sqrt(k) near 1
        cfg = ConservationConfig(n=200, r=10, k=200, p=1.0, trials=100, seed=1)
        rep = min_singval_tail(cfg, 0.5)
        assert rep.fraction == 0.0

    def test_max_tail_requires_t_ge_1(self):
        cfg = ConservationConfig(n=100, r=2, k=10, p=0.5, trials=100)
        with pytest.raises(ValueError):
            max_singval_tail(cfg, 0.5)

    def test_omega_norm_reported(self):
        cfg = ConservationConfig(n=150, r=3, k=20, p=0.3, trials=100, seed=2)
        rep = max_singval_tail(cfg, 3.0)
        assert rep.omega_norm.shape == (100,)
        # sigma_1 of a k x n scaled sketch is about (sqrt(n) + sqrt(k)), i.e. ~1.37 sqrt(n) here
        assert 1.0 < np.median(rep.omega_norm) < 2.0


class TestIncompressible:
    def test_flat_vector(self):
        v = np.full(100, 0.1)
        mass, inc = incompressibility_mass(v, eta=0.1, eps_c=0.2)
        assert math.isclose(mass, 1.0) and inc

    def test_spike(self):
        v = np.zeros(100)
        v[0] = 1.0
        assert incompressibility_mass(v, 0.1, 0.2) == (0.0, False)

    def test_requires_unit(self):
        with pytest.raises(ValueError):
            incompressibility_mass(np.ones(3), 0.1, 0.1)


class TestWeightedSums:
    def test_unit_variance(self):
        a = np.full(50, 1 / math.sqrt(50))
        S = sample_weighted_sums(a, SCALED, 0.2, 200_000, seed=1)
        assert abs(S.mean()) < 0.01 and abs(S.var() - 1) < 0.02

    def test_gaussian_law_is_exact_at_p1(self):
        a = np.full(10, 1 / math.sqrt(10))
        S = sample_weighted_sums(a, SCALED, 1.0, 200_000, seed=2)
        assert abs(np.mean(np.abs(S) < 0.5) - (2 * normal_cdf(0.5) - 1)) < 0.005

    def test_rejects_unscaled_law(self):
        with pytest.raises(ValueError):
            sample_weighted_sums([1.0], SubGaussianLaw(), 0.5, 10, 0)

    def test_rejects_non_unit(self):
        with pytest.raises(ValueError):
            sample_weighted_sums([1.0, 1.0], SCALED, 0.5, 10, 0)

    def test_fourth_moment_closed_form(self):
        # E S^4 = 3 + (E X^4 - 3) sum a_i^4 with E X^4 = E Z^4 / p
        a = np.full(20, 1 / math.sqrt(20))
        p = 0.3
        _, m4 = moment_bound_estimate(a, SCALED, p, 400_000, seed=3)
        exact = 3 + (3 / p - 3) * np.sum(a ** 4)
        assert abs(m4.estimate - exact) < 4 * m4.stderr

    def test_small_ball_bound(self):
        a = np.full(100, 0.1)
        rep = small_ball_estimate(a, SCALED, 0.5, 0.5, 100_000, seed=4)
        assert rep.holds and rep.bound == 1 - 0.5 * 0.75 ** 2 / 4

    def test_rademacher_moment_counterexample(self):
        # the fourth-moment bound (E Z^4 + 1)/p fails for Rademacher entries at p = 1:
        # E S^4 = 3 - 2 sum a_i^4 ~ 2.98 for a flat n = 100 vector, above z4 = 2
        a = np.full(100, 0.1)
        _, m4 = moment_bound_estimate(a, RADEMACHER, 1.0, 200_000, seed=5)
        assert not m4.holds
        assert abs(m4.estimate - 2.98) < 0.05


def test_bound_check():
    assert BoundCheck(1.0, 0.1, 0.8).holds
    assert not BoundCheck(1.0, 0.01, 0.8).holds
    assert BoundCheck(0.5, 0.0, 0.5).to_dict()["holds"]

