"""Min-plus and resistor-lattice studies (report-only plus exact identities)."""
import json
import math

import numpy as np
import pytest

from hipster.dist import Pmf
from hipster.explore import (ConjectureReport, fit_lattice_constant, lattice_study, minplus_study,
                             skewness_check)
from hipster.rde import CombinationRule, brute_force_law, outcomes, sample_exact_tree


class TestIdentities:
    def test_minplus_one_combine(self):
        law = {round(v, 12): p for v, p in outcomes(CombinationRule.minplus(0.5), 0.0, 0.0)}
        # log2 values: M_1 = 2 or 1
        assert law == {1.0: 0.5, 0.0: 0.5}

    def test_minplus_all_sum_tree(self):
        for n in (1, 5, 10):
            s = sample_exact_tree(CombinationRule.minplus(1.0), Pmf.delta(0), n, 200, seed=n)
            assert np.all(s.values == float(n))

    def test_lattice_depth_one(self):
        s = sample_exact_tree(CombinationRule.series_parallel(0.5), Pmf.delta(0), 1, 40000, seed=0)
        assert set(np.round(s.values, 12)) == {-1.0, 1.0}
        assert np.mean(s.values <= 0) == pytest.approx(0.5, abs=0.01)

    def test_lattice_duality(self):
        # series and parallel map to each other under x -> 1/x, so log2 R is symmetric at p = 1/2
        r = skewness_check(n=8, N=20000, seed=1)
        assert abs(r["z"]) <= 3.0
        assert r["stderr"] == pytest.approx(math.sqrt(6 / 20000), rel=1e-3)


class TestStudies:
    def test_minplus_report(self):
        rep = minplus_study(0.5, (16, 32), pool_size=4096, seed=0)
        assert rep.depths == [16, 32]
        assert all(0 <= k <= 1 for k in rep.ks)
        assert rep.fit_c == [math.pi ** 2 / 3] * 2
        lines = rep.to_csv().splitlines()
        assert lines[0] == "n,ks,p_below,fit_c" and len(lines) == 3
        assert json.loads(rep.to_json())["model"] == "minplus"

    def test_lattice_drifts_up_for_p_above_half(self):
        rep = lattice_study(0.6, (16, 32, 64), pool_size=4096, seed=0)
        assert rep.medians[0] < rep.medians[1] < rep.medians[2]
        assert rep.p_below[-1] < 0.5

    def test_lattice_report_shape(self):
        rep = lattice_study(0.5, (8, 16), pool_size=2048, seed=0)
        assert len(rep.fit_c) == 2 and all(c > 0 for c in rep.fit_c)

    def test_depths_must_increase(self):
        with pytest.raises(ValueError):
            ConjectureReport("x", 0.5, [4, 4], [0, 0], [0, 0], [0, 0])

    def test_bad_p(self):
        with pytest.raises(ValueError):
            minplus_study(0.0, (4,), 16)
        with pytest.raises(ValueError):
            lattice_study(1.0, (4,), 16)

    def test_fit_recovers_scale(self):
        # samples drawn exactly from the conjectured form with c = 2 at n = 100
        rng = np.random.default_rng(0)
        n, c = 100, 2.0
        g = rng.beta(2, 2, 20000)
        log_r = (g - 0.5) * (c * n) ** (1 / 3) / math.log(2)
        c_hat, d = fit_lattice_constant(log_r, n)
        assert c_hat == pytest.approx(c, rel=0.05)
        assert d < 0.02
