"""Finite-difference schemes, monotonicity certificates and the walk identity."""
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hipster.densities import burgers_profile, pme_profile, uniform
from hipster.dist import pmf_from_density
from hipster.schemes import (FluxPair, SchemeState, assert_preset_matches_recurrence, closed_form_threshold,
                             init_scheme, monotone_check, monotone_check_sampled, preset_mesh, run_manifest,
                             scheme_run, scheme_step, verify_scheme_pmf_identity, write_state)


class TestInit:
    def test_constant_data(self):
        s, _ = init_scheme(uniform(0, 1), 2, "burgers")
        assert s.dx == 0.5 and s.offset == 0
        assert s.cells.tolist() == [1.0, 1.0]

    def test_matches_discretised_density(self):
        rho = burgers_profile(0.5, 0.5)
        s, _ = init_scheme(rho, 16, "burgers")
        p = pmf_from_density(rho, 16)
        assert np.allclose(s.dense(p.offset, p.offset + len(p.weights) - 1), 16 * p.weights, atol=1e-14)
        assert s.mass() == pytest.approx(1.0, abs=1e-14)

    def test_bad_mesh(self):
        with pytest.raises(ValueError):
            preset_mesh("burgers", 0)
        with pytest.raises(ValueError):
            preset_mesh("heat", 4)

    def test_preset_recurrence_check(self):
        assert_preset_matches_recurrence(FluxPair.burgers(0.3), 7)
        assert_preset_matches_recurrence(FluxPair.pme(), 5)
        with pytest.raises(AssertionError):
            assert_preset_matches_recurrence(FluxPair((0.0, 0.0, 0.3), (0.0, 0.0, 0.1), "burgers", {"q": 0.3}), 4)


class TestStep:
    def test_hand_example(self):
        s = SchemeState(0.5, 0.25, 0, [1.0])
        out = scheme_step(s, FluxPair.burgers(0.5))
        assert out.offset == 0 and out.cells.tolist() == [0.75, 0.25]
        assert out.n == 1

    def test_zero_fluxes(self):
        s = SchemeState(0.1, 0.01, -3, [0.2, 0.5, 0.1])
        out = scheme_run(s, FluxPair(), 10)
        assert np.array_equal(out.dense(-3, -1), s.cells)

    def test_pme_preserves_symmetry(self):
        s, flux = init_scheme(pme_profile(0.25), 8, "pme")
        out = scheme_run(s, flux, 200)
        lo, hi = out.offset, out.offset + len(out.cells) - 1
        # cell j covers [j/M, (j+1)/M), so the mirror of cell j is cell -1-j
        d = out.dense(min(lo, -1 - hi), max(hi, -1 - lo))
        assert np.allclose(d, d[::-1], atol=1e-14)

    @pytest.mark.parametrize("preset", ["burgers", "pme"])
    def test_mass_conserved(self, preset):
        rho = burgers_profile(0.5, 0.25) if preset == "burgers" else pme_profile(0.25)
        s, flux = init_scheme(rho, 8, preset)
        out = scheme_run(s, flux, 5000)
        assert abs(out.mass() - s.mass()) <= 5000 * 1e-15

    def test_negative_steps_rejected(self):
        s, flux = init_scheme(uniform(), 2, "burgers")
        with pytest.raises(ValueError):
            scheme_run(s, flux, -1)

    def test_csv_and_manifest(self, tmp_path):
        s, flux = init_scheme(uniform(), 2, "burgers")
        out = scheme_run(s, flux, 3)
        path = str(tmp_path / "state.csv")
        write_state(path, out, run_manifest(flux, 2, s, out))
        lines = open(path).read().splitlines()
        assert lines[0] == "j,u"
        vals = [float(l.split(",")[1]) for l in lines[1:]]
        assert vals == out.cells.tolist()
        meta = json.load(open(str(tmp_path / "state.json")))
        assert meta["n"] == 3 and meta["mass_drift"] <= 1e-15


class TestMonotone:
    def test_burgers_certificate(self):
        M, q, eps = 16, 0.5, 0.25
        dx, dt = 1 / M, 1 / M ** 2
        hi = (q * eps) ** -0.5
        r = monotone_check(FluxPair.burgers(q), dx, dt, (0.0, hi))
        assert hi == pytest.approx(2 * math.sqrt(2))
        assert r.verdict and r.witness is None
        assert r.closed_form_threshold == pytest.approx(M / (2 * q))
        assert r.within_threshold

    def test_pme_certificate(self):
        M, eps = 8, 0.25
        hi = 0.75 * (2 / (9 * eps)) ** (1 / 3)
        r = monotone_check(FluxPair.pme(), 1 / M, 1 / M ** 3, (0.0, hi))
        assert r.verdict and r.within_threshold
        # the binding partial is 1 - 2 u / M, so the exact threshold is M/2
        assert r.closed_form_threshold == pytest.approx(M / 2)

    def test_violation_witness(self):
        r = monotone_check(FluxPair.burgers(0.5), 1.0, 1.0, (0.0, 10.0))
        assert not r.verdict
        assert r.closed_form_threshold == pytest.approx(1.0)
        assert r.within_threshold is False
        a, b, c = r.witness
        assert b > 1.0
        S = lambda a, b, c: b - 0.5 * (b * b - a * a)
        assert S(a, b + 1e-6, c) < S(a, b, c)

    @pytest.mark.parametrize("M", [2, 4, 16])
    def test_threshold_is_sharp(self, M):
        dx, dt = 1 / M, 1 / M ** 2
        h = closed_form_threshold(FluxPair.burgers(0.5), dx, dt)
        assert monotone_check(FluxPair.burgers(0.5), dx, dt, (0, h)).verdict
        assert not monotone_check(FluxPair.burgers(0.5), dx, dt, (0, h * 1.01)).verdict

    def test_sampled_agrees_with_exact(self):
        for hi in (0.5, 2.0):
            ex = monotone_check(FluxPair.burgers(0.5), 1.0, 1.0, (0.0, hi))
            sm = monotone_check(FluxPair.burgers(0.5), 1.0, 1.0, (0.0, hi), grid=41)
            assert ex.verdict == sm.verdict

    def test_sampled_custom(self):
        r = monotone_check_sampled(lambda a, b, c: a + b + c, (0, 1), 5)
        assert r.verdict
        r = monotone_check_sampled(lambda a, b, c: a - c, (0, 1), 5)
        assert not r.verdict and r.witness is not None

    def test_empty_interval(self):
        with pytest.raises(ValueError):
            monotone_check(FluxPair.pme(), 1, 1, (1, 0))

    @given(st.floats(0.05, 1.0), st.integers(0, 10 ** 6))
    @settings(max_examples=25, deadline=None)
    def test_bounds_preserved_in_monotone_regime(self, top, seed):
        # S(I^3) within I, so data in I stays in I
        M = 8
        flux = FluxPair.burgers(0.5)
        hi = min(top * M, closed_form_threshold(flux, 1 / M, 1 / M ** 2))
        rng = np.random.default_rng(seed)
        s = SchemeState(1 / M, 1 / M ** 2, 0, rng.uniform(0, hi, 12))
        out = scheme_run(s, flux, 50)
        assert out.cells.min() >= -1e-15 and out.cells.max() <= hi + 1e-12


class TestIdentity:
    def test_trivial(self):
        assert verify_scheme_pmf_identity("tal", uniform(), 1, 1) == 0.0

    @pytest.mark.parametrize("M", [1, 4, 8])
    def test_both_presets(self, M):
        assert verify_scheme_pmf_identity("tal", burgers_profile(0.5, 0.25), M, 2000, stride=100) <= 1e-9
        assert verify_scheme_pmf_identity("sym", pme_profile(0.25), M, 2000, stride=100) <= 1e-9

    def test_other_q(self):
        assert verify_scheme_pmf_identity("tal", burgers_profile(0.3, 0.5), 4, 500, q=0.3) <= 1e-12

    def test_bad_flavor(self):
        with pytest.raises(ValueError):
            verify_scheme_pmf_identity("fomo", uniform(), 1, 1)
