"""Tests for the validation oracles: the exact enumeration route and the
counter-based Monte Carlo simulator.

The simulator documents its random source completely: draw t*n+j for
(trial t, member j) is the splitmix64 finalizer applied to
seed + (counter+1)*0x9E3779B97F4A7C15, mapped to [0, 1) by the top 53
bits, and trials accumulate in fixed 65,536-trial chunks. These tests
rebuild that contract independently in pure Python and require the
implementation to match it bit for bit, then check the statistics
against the exact distribution.
"""

import math

import numpy as np
import pytest

from eselend import (
    DomainError,
    MarketParams,
    SimConfig,
    enumerate_member_profit,
    profit_moments_pair,
    simulate_member_profit,
)
from eselend.oracle_sim import CHUNK_TRIALS, _uniform01

BASE = MarketParams(p=1.0, y_high=1000.0, y_low=500.0, loan=100.0,
                    epsilon=0.05, delta=0.9)

_MASK = (1 << 64) - 1


def _ref_uniform(seed: int, counter: int) -> float:
    """Documented draw: splitmix64 of seed + (counter+1)*golden, top 53 bits."""
    z = (seed + (counter + 1) * 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    z = z ^ (z >> 31)
    return (z >> 11) * 2.0 ** -53


def _ref_simulate(e, n, w, params, trials, seed):
    """Pure-Python rebuild of the documented simulation contract."""
    ph, pl = params.high_revenue, params.low_revenue
    chunk_sums, chunk_sqs = [], []
    lo, hi = math.inf, -math.inf
    for start in range(0, trials, CHUNK_TRIALS):
        m = min(CHUNK_TRIALS, trials - start)
        counters = np.arange(start * n, (start + m) * n, dtype=np.uint64)
        success = _uniform01(seed, counters).reshape(m, n) < e
        peer_ok = success[:, 1:].sum(axis=1)
        k_fail = (n - 1) - peer_ok
        paid = ph - w - k_fail * (w - pl) / (peer_ok + 1)
        profit = np.where(success[:, 0], paid, 0.0)
        chunk_sums.append(float(profit.sum()))
        chunk_sqs.append(float((profit * profit).sum()))
        lo = min(lo, float(profit.min()))
        hi = max(hi, float(profit.max()))
    if lo == hi:
        return lo, 0.0
    mean = float(np.sum(np.asarray(chunk_sums))) / trials
    var = max(float(np.sum(np.asarray(chunk_sqs))) / trials - mean * mean, 0.0)
    return mean, var


# ----------------------------------------------------------------------
# random source
# ----------------------------------------------------------------------


class TestUniformStream:
    """The vectorised generator matches the documented scalar recipe."""

    def test_matches_pure_python_reference(self):
        """Spot counters across the 64-bit range agree exactly."""
        counters = np.array([0, 1, 2, 1000, 2 ** 31, 2 ** 53 + 17],
                            dtype=np.uint64)
        got = _uniform01(42, counters)
        want = [_ref_uniform(42, int(c)) for c in counters]
        np.testing.assert_array_equal(got, want)

    def test_seed_changes_the_stream(self):
        """Different seeds give different draws for the same counters."""
        counters = np.arange(64, dtype=np.uint64)
        a = _uniform01(1, counters)
        b = _uniform01(2, counters)
        assert np.any(a != b)

    def test_outputs_in_unit_interval(self):
        """Draws live in [0, 1)."""
        counters = np.arange(10_000, dtype=np.uint64)
        u = _uniform01(9, counters)
        assert np.all(u >= 0.0)
        assert np.all(u < 1.0)

    def test_roughly_uniform(self):
        """The first 100k draws have mean near 1/2 and spread near 1/12."""
        counters = np.arange(100_000, dtype=np.uint64)
        u = _uniform01(42, counters)
        np.testing.assert_allclose(u.mean(), 0.5, atol=0.005)
        np.testing.assert_allclose(u.var(), 1.0 / 12.0, atol=0.005)


# ----------------------------------------------------------------------
# simulator contract
# ----------------------------------------------------------------------


class TestSimulateContract:
    """Bitwise reproducibility and the documented accumulation layout."""

    def test_repeat_runs_identical(self):
        """The same configuration returns the same result object."""
        cfg = SimConfig(trials=50_000, seed=7)
        a = simulate_member_profit(0.4, 3, 140.0, BASE, cfg)
        b = simulate_member_profit(0.4, 3, 140.0, BASE, cfg)
        assert a == b

    def test_matches_documented_recipe_single_chunk(self):
        """A sub-chunk run reproduces the pure rebuild exactly."""
        cfg = SimConfig(trials=10_000, seed=11)
        got = simulate_member_profit(0.55, 4, 160.0, BASE, cfg)
        mean, var = _ref_simulate(0.55, 4, 160.0, BASE, 10_000, 11)
        assert got.empirical_mean == mean
        assert got.empirical_variance == var

    def test_matches_documented_recipe_across_chunks(self):
        """A run spanning chunk boundaries (two full chunks plus a partial
        tail) still matches the rebuild bit for bit."""
        trials = 2 * CHUNK_TRIALS + 18_928
        cfg = SimConfig(trials=trials, seed=3)
        got = simulate_member_profit(0.3, 2, 150.0, BASE, cfg)
        mean, var = _ref_simulate(0.3, 2, 150.0, BASE, trials, 3)
        assert got.empirical_mean == mean
        assert got.empirical_variance == var
        assert got.trials == trials

    def test_single_trial(self):
        """trials=1 is legal and reports zero spread."""
        cfg = SimConfig(trials=1, seed=5)
        got = simulate_member_profit(0.5, 2, 150.0, BASE, cfg)
        assert got.empirical_variance == 0.0
        assert got.std_error_mean == 0.0

    def test_certain_success_is_exact(self):
        """e=1 makes every trial pay p*y_high - w = 850 exactly."""
        got = simulate_member_profit(1.0, 2, 150.0, BASE,
                                     SimConfig(trials=5_000, seed=42))
        assert got.empirical_mean == 850.0
        assert got.empirical_variance == 0.0
        assert got.std_error_mean == 0.0

    def test_certain_failure_is_exact(self):
        """e=0 never succeeds, so the profit is identically zero."""
        got = simulate_member_profit(0.0, 3, 150.0, BASE,
                                     SimConfig(trials=5_000, seed=42))
        assert got.empirical_mean == 0.0
        assert got.empirical_variance == 0.0

    def test_counter_space_guard(self):
        """trials * n that would overflow the counter budget is rejected
        before any work starts."""
        cfg = SimConfig(trials=2 ** 61, seed=1)
        with pytest.raises(DomainError):
            simulate_member_profit(0.5, 2, 150.0, BASE, cfg)

    def test_config_validation(self):
        """Zero trials, bool trials, and non-integer seeds are rejected."""
        with pytest.raises(DomainError):
            SimConfig(trials=0)
        with pytest.raises(DomainError):
            SimConfig(trials=True)
        with pytest.raises(DomainError):
            SimConfig(trials=1000, seed=1.5)
        with pytest.raises(DomainError):
            SimConfig(trials=1000, seed=False)

    def test_input_validation(self):
        """Out-of-range e and nonpositive w are domain errors."""
        cfg = SimConfig(trials=100, seed=1)
        with pytest.raises(DomainError):
            simulate_member_profit(1.5, 2, 150.0, BASE, cfg)
        with pytest.raises(DomainError):
            simulate_member_profit(0.5, 2, 0.0, BASE, cfg)


# ----------------------------------------------------------------------
# statistics against the exact distribution
# ----------------------------------------------------------------------


class TestSimulateStatistics:
    """Empirical moments agree with enumeration at the expected rate."""

    def test_pair_cell(self):
        """e=0.5, n=2, w=150 at 100k trials: the empirical mean lands
        within three standard errors of 512.5 and the variance within 2%
        of 277968.75 (deterministic given the fixed seed)."""
        cfg = SimConfig(trials=100_000, seed=42)
        got = simulate_member_profit(0.5, 2, 150.0, BASE, cfg)
        exact = enumerate_member_profit(0.5, 2, 150.0, BASE)
        np.testing.assert_allclose(exact.mean, 512.5, atol=1e-10)
        assert abs(got.empirical_mean - exact.mean) <= 3.0 * got.std_error_mean
        assert abs(got.empirical_variance / exact.variance - 1.0) < 0.02

    def test_reported_standard_error(self):
        """The reported standard error is sqrt(variance / trials)."""
        cfg = SimConfig(trials=20_000, seed=9)
        got = simulate_member_profit(0.6, 3, 140.0, BASE, cfg)
        np.testing.assert_allclose(
            got.std_error_mean,
            math.sqrt(got.empirical_variance / cfg.trials), rtol=1e-12)

    def test_three_member_cell(self):
        """e=0.5, n=3, w=150: empirical mean near the exact 556.25."""
        cfg = SimConfig(trials=100_000, seed=42)
        got = simulate_member_profit(0.5, 3, 150.0, BASE, cfg)
        exact = enumerate_member_profit(0.5, 3, 150.0, BASE)
        np.testing.assert_allclose(exact.mean, 556.25, atol=1e-10)
        assert abs(got.empirical_mean - exact.mean) <= 3.0 * got.std_error_mean


# ----------------------------------------------------------------------
# enumeration route
# ----------------------------------------------------------------------


class TestEnumerateMemberProfit:
    """Exact moments built from the outcome distribution."""

    def test_matches_pair_polynomials(self):
        """For n=2 the enumeration equals the polynomial pair moments."""
        rng = np.random.default_rng(42)
        for _ in range(30):
            e = rng.uniform(0.0, 1.0)
            w = rng.uniform(10.0, 400.0)
            enum = enumerate_member_profit(e, 2, w, BASE)
            poly = profit_moments_pair(e, w, BASE)
            np.testing.assert_allclose(enum.mean, poly.mean,
                                       rtol=1e-12, atol=1e-12)
            scale = max(poly.variance, 1.0)
            np.testing.assert_allclose(enum.variance, poly.variance,
                                       rtol=1e-10, atol=1e-10 * scale)

    def test_degenerate_endpoint(self):
        """e=1 collapses to a point mass at p*y_high - w."""
        m = enumerate_member_profit(1.0, 5, 150.0, BASE)
        np.testing.assert_allclose(m.mean, 850.0, atol=1e-12)
        np.testing.assert_allclose(m.variance, 0.0, atol=1e-8)

    def test_three_member_mean(self):
        """The e=0.5, n=3, w=150 gross mean is 556.25."""
        m = enumerate_member_profit(0.5, 3, 150.0, BASE)
        np.testing.assert_allclose(m.mean, 556.25, atol=1e-10)
