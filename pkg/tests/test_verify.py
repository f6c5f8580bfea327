"""Verification-suite tests."""

import math

import numpy as np
import pytest

from singwave.data import bump_data, sine_data, zero_data
from singwave.verify import (gupta_bound_check, hardy_check,
                             lemma_condition_identity, random_witness,
                             resolvent_bound_check, run_all)


class TestHardy:
    def test_closed_form(self):
        lhs, rhs = hardy_check(lambda x: x * (1 - x), lambda x: 1 - 2 * x)
        assert lhs == pytest.approx(1.0 / 3.0, abs=1e-10)
        assert rhs == pytest.approx(4.0 / 3.0, abs=1e-10)

    def test_sine(self):
        lhs, rhs = hardy_check(lambda x: math.sin(math.pi * x),
                               lambda x: math.pi * math.cos(math.pi * x))
        assert lhs < rhs

    def test_random_splines(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            su, _ = random_witness(rng)
            lhs, rhs = hardy_check(su, su.derivative())
            assert lhs <= rhs * (1 + 1e-6)

    def test_grid_input(self):
        x = np.linspace(0, 1, 102)[1:-1]
        lhs, rhs = hardy_check(np.sin(np.pi * x))
        assert lhs <= rhs


class TestResolventBound:
    def test_reference_point(self):
        worst, probes = resolvent_bound_check(2.0, 0.0, 5.0, trials=200,
                                              N=1000, seed=0)
        assert worst >= 0.95
        assert len(probes) == 200

    def test_large_eta_limit(self):
        # bound tends to alpha - sigma; ratios must stay >= 1 - O(h)
        worst, _ = resolvent_bound_check(2.0, 0.5, 200.0, trials=50,
                                         N=500, seed=1)
        assert worst >= 0.9

    def test_near_sigma_alpha(self):
        # bound tends to 0: trivially satisfied with huge ratios
        worst, _ = resolvent_bound_check(2.0, 1.99, 5.0, trials=20,
                                         N=200, seed=2)
        assert worst > 10.0

    def test_determinism(self):
        a, _ = resolvent_bound_check(2.0, 0.0, 5.0, trials=20, N=200, seed=3)
        b, _ = resolvent_bound_check(2.0, 0.0, 5.0, trials=20, N=200, seed=3)
        assert a == b

    def test_bad_args(self):
        with pytest.raises(ValueError):
            resolvent_bound_check(2.0, 3.0, 1.0)
        with pytest.raises(ValueError):
            resolvent_bound_check(2.0, 0.0, 0.0)


class TestGupta:
    def test_table(self):
        rows = gupta_bound_check(20)
        assert len(rows) == 20
        n1 = rows[0]
        assert n1[1] == pytest.approx(1.0, abs=1e-12)  # equality at n=1
        assert n1[2] == pytest.approx(1.0)
        for n, mag, bound in rows:
            assert mag <= bound * (1 + 1e-10)

    def test_n2_closed_form(self):
        rows = gupta_bound_check(2)
        assert rows[1][1] == pytest.approx(abs((-3 + math.sqrt(3)) / 2),
                                           abs=1e-12)


class TestPairingIdentity:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_presets(self, n):
        for data in (sine_data(1), bump_data(), sine_data(2)):
            assert lemma_condition_identity(data, n) < 1e-8

    def test_zero_data(self):
        assert lemma_condition_identity(zero_data(), 1) == 0.0


def test_run_all():
    results = run_all(seed=0, trials=50, n_max=5)
    assert set(results) == {"hardy", "resolvent", "gupta",
                            "pairing-identity"}
    assert all(passed for passed, _ in results.values())
