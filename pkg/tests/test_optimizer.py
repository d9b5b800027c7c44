"""Tests for the score optimizers: the generic grid argmax, the pair
closed form and its as-printed variant, the group first-order-condition
solver, the group-size sensitivity derivative, and the large-group limit.

Docstrings carry the hand computations behind every pinned number. The
reference calibration used throughout is p=1, yields 1000/500, L=100,
eps=0.05, delta=0.9, c=1000, k=0.01, b=0.
"""

import numpy as np
import pytest

from eselend import (
    CostModel,
    DomainError,
    EvaluationError,
    GroupSpec,
    MarketParams,
    ScoreLink,
    SolverConfig,
    argmax_grid,
    dE_dn,
    dE_dn_as_printed,
    ese_limit,
    group_foc,
    group_objective,
    optimal_ese_group,
    optimal_ese_pair,
    optimal_ese_pair_as_printed,
    pair_objective,
    solve_group_foc,
)

BASE = MarketParams(p=1.0, y_high=1000.0, y_low=500.0, loan=100.0,
                    epsilon=0.05, delta=0.9)
COST = CostModel(c=1000.0)
LINK = ScoreLink(k=0.01, b=0.0)


def _random_setup(rng):
    p = rng.uniform(0.2, 3.0)
    y_low = rng.uniform(50.0, 800.0)
    y_high = y_low + rng.uniform(50.0, 1500.0)
    params = MarketParams(p=p, y_high=y_high, y_low=y_low,
                          loan=rng.uniform(10.0, 400.0),
                          epsilon=rng.uniform(0.0, 0.2),
                          delta=rng.uniform(0.05, 0.95))
    c = rng.uniform(100.0, 4000.0)
    k = rng.uniform(1e-3, 0.01)
    b = rng.uniform(0.0, 1.0 - 100.0 * k)
    return params, CostModel(c=c), ScoreLink(k=k, b=b)


# ----------------------------------------------------------------------
# grid argmax
# ----------------------------------------------------------------------


class TestArgmaxGrid:
    """Bounded scalar maximisation over the score interval."""

    def test_quadratic_vertex(self):
        """-(E-40)^2 peaks at 40, an interior point."""
        opt = argmax_grid(lambda E: -((E - 40.0) ** 2))
        np.testing.assert_allclose(opt.score, 40.0, atol=1e-9)
        assert not opt.at_boundary
        np.testing.assert_allclose(opt.objective_value, 0.0, atol=1e-12)

    def test_constant_objective(self):
        """A flat objective resolves to the lower bound, flagged boundary."""
        opt = argmax_grid(lambda E: 3.0)
        assert opt.score == 0.0
        assert opt.at_boundary
        assert opt.objective_value == 3.0

    def test_monotone_ramps(self):
        """Increasing objectives end at 100, decreasing ones at 0."""
        up = argmax_grid(lambda E: 2.0 * E)
        down = argmax_grid(lambda E: -2.0 * E)
        assert up.score == 100.0 and up.at_boundary
        assert down.score == 0.0 and down.at_boundary

    def test_near_boundary_interior_peak(self):
        """A vertex just inside the bounds is found, not snapped away."""
        opt = argmax_grid(lambda E: -((E - 99.99999) ** 2))
        np.testing.assert_allclose(opt.score, 99.99999, atol=1e-6)
        assert not opt.at_boundary
        opt = argmax_grid(lambda E: -((E - 0.012) ** 2))
        np.testing.assert_allclose(opt.score, 0.012, atol=1e-6)

    def test_custom_bounds(self):
        """The peak respects caller-supplied bounds."""
        opt = argmax_grid(lambda E: -((E - 40.0) ** 2), lo=50.0, hi=80.0)
        assert opt.score == 50.0
        assert opt.at_boundary

    def test_rejects_bad_bounds_and_config(self):
        """lo >= hi and degenerate solver settings are domain errors."""
        with pytest.raises(DomainError):
            argmax_grid(lambda E: 0.0, lo=5.0, hi=5.0)
        with pytest.raises(DomainError):
            SolverConfig(grid_points=1)
        with pytest.raises(DomainError):
            SolverConfig(abs_tol=0.0)
        with pytest.raises(DomainError):
            SolverConfig(max_iter=0)

    def test_non_finite_objective_is_reported(self):
        """An objective returning NaN raises EvaluationError at the point."""
        def bad(E):
            return np.nan if E > 60.0 else float(E)

        with pytest.raises(EvaluationError):
            argmax_grid(bad)


# ----------------------------------------------------------------------
# pair optimum
# ----------------------------------------------------------------------


class TestOptimalEsePair:
    """Closed-form score maximising a pair member's expected profit."""

    def test_reference_fifty(self):
        """c=2000: e* = 1500/3000 = 0.5, so E* = 50."""
        opt = optimal_ese_pair(BASE, CostModel(c=2000.0), LINK)
        np.testing.assert_allclose(opt.score, 50.0, atol=1e-12)
        assert not opt.at_boundary

    def test_reference_seventyfive(self):
        """c=1000: e* = 1500/2000 = 0.75, so E* = 75."""
        opt = optimal_ese_pair(BASE, COST, LINK)
        np.testing.assert_allclose(opt.score, 75.0, atol=1e-12)

    def test_reference_shifted_link(self):
        """c=1200, k=0.005, b=0.5: e* = 1500/2200, so
        E* = (15/22 - 0.5)/0.005 = 36.3636..."""
        opt = optimal_ese_pair(BASE, CostModel(c=1200.0),
                               ScoreLink(k=0.005, b=0.5))
        np.testing.assert_allclose(opt.score, (1500.0 / 2200.0 - 0.5) / 0.005,
                                   atol=1e-10)
        np.testing.assert_allclose(opt.score, 36.36363636363637, atol=1e-10)

    def test_clamps_to_score_range(self):
        """Raw optima outside [0, 100] clamp and flag the boundary."""
        low = optimal_ese_pair(BASE, COST, ScoreLink(k=0.002, b=0.8))
        assert low.score == 0.0 and low.at_boundary
        high = optimal_ese_pair(BASE, CostModel(c=10.0), LINK)
        assert high.score == 100.0 and high.at_boundary

    def test_flat_link_pins_score_to_zero(self):
        """k=0 makes the score irrelevant; the cheapest score, 0, wins."""
        opt = optimal_ese_pair(BASE, COST, ScoreLink(k=0.0, b=0.5))
        assert opt.score == 0.0
        assert opt.at_boundary

    def test_matches_numeric_argmax(self):
        """The closed form agrees with a blind argmax of the objective."""
        rng = np.random.default_rng(42)
        for _ in range(25):
            params, cost, link = _random_setup(rng)
            closed = optimal_ese_pair(params, cost, link)
            blind = argmax_grid(lambda E: pair_objective(E, params, cost, link))
            np.testing.assert_allclose(closed.score, blind.score, atol=1e-6)

    def test_objective_value_is_objective_at_score(self):
        """The reported objective value evaluates the objective itself."""
        opt = optimal_ese_pair(BASE, COST, LINK)
        np.testing.assert_allclose(
            opt.objective_value, pair_objective(opt.score, BASE, COST, LINK),
            rtol=1e-12)


class TestOptimalEsePairAsPrinted:
    """Companion form kept for comparison; it divides by k(c - 2*p*y_low)."""

    def test_agrees_where_algebra_coincides(self):
        """At c=2000 the variant also returns 50: the numerator 500 over
        the denominator 0.01*(2000-1000) = 10."""
        printed = optimal_ese_pair_as_printed(BASE, CostModel(c=2000.0), LINK)
        np.testing.assert_allclose(printed, 50.0, atol=1e-10)

    def test_disagrees_elsewhere(self):
        """At c=1200 the variant gives 500/2 = 250 while the canonical
        optimum is 68.18..., so the two are not the same formula."""
        printed = optimal_ese_pair_as_printed(BASE, CostModel(c=1200.0), LINK)
        np.testing.assert_allclose(printed, 250.0, atol=1e-10)
        canonical = optimal_ese_pair(BASE, CostModel(c=1200.0), LINK)
        assert abs(printed - canonical.score) > 100.0

    def test_singular_denominator(self):
        """c = 2*p*y_low zeroes the denominator and is rejected."""
        with pytest.raises(DomainError):
            optimal_ese_pair_as_printed(BASE, COST, LINK)

    def test_flat_link_rejected(self):
        """k=0 also zeroes the denominator."""
        with pytest.raises(DomainError):
            optimal_ese_pair_as_printed(BASE, CostModel(c=1200.0),
                                        ScoreLink(k=0.0, b=0.5))


# ----------------------------------------------------------------------
# group optimum
# ----------------------------------------------------------------------


class TestSolveGroupFoc:
    """Root of the group first-order condition, checked against anchors."""

    def test_single_member(self):
        """n=1: the condition 1000 - 1000*e = 0 puts the root at e=1,
        so E = 100 with the condition satisfied (not a clamped boundary)."""
        opt = solve_group_foc(1, BASE, COST, LINK)
        np.testing.assert_allclose(opt.score, 100.0, atol=1e-9)
        assert not opt.at_boundary

    def test_pair_matches_closed_form(self):
        """n=2 reproduces the closed-form pair optimum E = 75."""
        opt = solve_group_foc(2, BASE, COST, LINK)
        np.testing.assert_allclose(opt.score, 75.0, atol=1e-8)

    def test_three_members(self):
        """n=3: 500 + 1500*(1-e)^2 - 1000*e = 0 holds at e = 2/3,
        so E = 66.666..."""
        opt = solve_group_foc(3, BASE, COST, LINK)
        np.testing.assert_allclose(opt.score, 200.0 / 3.0, atol=1e-8)

    def test_large_group_near_limit(self):
        """n=100: the joint-liability term is negligible and the root sits
        within 1e-3 of the limiting score 50."""
        opt = solve_group_foc(100, BASE, COST, LINK)
        np.testing.assert_allclose(opt.score, 50.0, atol=1e-3)

    def test_residual_at_solution(self):
        """Interior solutions satisfy the first-order condition to 1e-8."""
        for n in (2, 3, 5, 10, 40):
            opt = solve_group_foc(n, BASE, COST, LINK)
            assert not opt.at_boundary
            assert abs(group_foc(opt.score, n, BASE, COST, LINK)) < 1e-8

    def test_scores_non_increasing_in_n(self):
        """Adding members weakens the incentive, so the score never rises."""
        scores = [solve_group_foc(n, BASE, COST, LINK).score
                  for n in range(1, 21)]
        assert all(a >= b - 1e-9 for a, b in zip(scores, scores[1:]))

    def test_objective_value_consistency(self):
        """The reported value is the substituted objective at the root."""
        opt = solve_group_foc(3, BASE, COST, LINK)
        np.testing.assert_allclose(
            opt.objective_value, group_objective(opt.score, 3, BASE, COST, LINK),
            rtol=1e-12)

    def test_group_wrapper_accepts_spec(self):
        """optimal_ese_group takes GroupSpec or a bare int."""
        a = optimal_ese_group(GroupSpec(n=4), BASE, COST, LINK)
        b = optimal_ese_group(4, BASE, COST, LINK)
        assert a.score == b.score

    def test_flat_link_rejected(self):
        """k=0 leaves no way to move e through the score."""
        with pytest.raises(DomainError):
            solve_group_foc(2, BASE, COST, ScoreLink(k=0.0, b=0.5))

    def test_bad_group_size_rejected(self):
        """Group sizes below one member are domain errors."""
        with pytest.raises(DomainError):
            solve_group_foc(0, BASE, COST, LINK)


# ----------------------------------------------------------------------
# group-size sensitivity
# ----------------------------------------------------------------------


class TestGroupSizeDerivative:
    """dE/dn from the implicit function theorem on the group condition."""

    def test_reference_value(self):
        """At the n=3 optimum (e = 2/3): numerator
        500*(1/9)*(1 + 3*ln(1/3)) = -127.55, denominator
        0.01*(500*6*(1/3) + 1000) = 20, giving -6.3773..."""
        value = dE_dn(3, 200.0 / 3.0, BASE, COST, LINK)
        np.testing.assert_allclose(value, -6.377324627789804, atol=1e-9)

    def test_positive_for_small_groups(self):
        """At n=1, e=0.5: 1 + ln(0.5) > 0, so the derivative is positive:
        500*(1 + ln 0.5)/10 = 15.3426..."""
        value = dE_dn(1, 50.0, BASE, COST, LINK)
        np.testing.assert_allclose(value, 15.342640972002735, atol=1e-9)

    def test_sign_follows_log_term(self):
        """The sign matches 1 + n*ln(1-e) for a spread of points."""
        rng = np.random.default_rng(42)
        for _ in range(40):
            n = int(rng.integers(1, 30))
            E = rng.uniform(1.0, 99.0)
            e = 0.01 * E
            expected_sign = np.sign(1.0 + n * np.log1p(-e))
            value = dE_dn(n, E, BASE, COST, LINK)
            assert np.sign(value) == expected_sign

    def test_vanishes_for_large_groups(self):
        """The geometric factor kills the derivative as n grows."""
        opt = solve_group_foc(100, BASE, COST, LINK)
        assert abs(dE_dn(100, opt.score, BASE, COST, LINK)) < 1e-6

    def test_as_printed_variant_differs(self):
        """The companion denominator (k*y_low-term plus c*e) shares the
        sign but is a factor ~34 larger at the n=3 anchor."""
        canonical = dE_dn(3, 200.0 / 3.0, BASE, COST, LINK)
        printed = dE_dn_as_printed(3, 200.0 / 3.0, BASE, COST, LINK)
        np.testing.assert_allclose(printed, -0.18849235353073307, atol=1e-9)
        assert np.sign(printed) == np.sign(canonical)
        assert abs(canonical / printed) > 30.0

    def test_domain_errors(self):
        """e in {0, 1} and k = 0 leave the derivative undefined."""
        with pytest.raises(DomainError):
            dE_dn(3, 0.0, BASE, COST, LINK)
        with pytest.raises(DomainError):
            dE_dn(3, 100.0, BASE, COST, LINK)
        with pytest.raises(DomainError):
            dE_dn(3, 50.0, BASE, COST, ScoreLink(k=0.0, b=0.5))


# ----------------------------------------------------------------------
# large-group limit
# ----------------------------------------------------------------------


class TestEseLimit:
    """Limiting optimal score as the group grows without bound."""

    def test_reference_fifty(self):
        """Defaults: e_inf = (1000-500)/1000 = 0.5, so E = 50."""
        opt = ese_limit(BASE, COST, LINK)
        np.testing.assert_allclose(opt.score, 50.0, atol=1e-12)
        assert not opt.at_boundary

    def test_smaller_yield_gap(self):
        """Yields 600/300: e_inf = 0.3, so E = 30."""
        params = MarketParams(p=1.0, y_high=600.0, y_low=300.0, loan=100.0,
                              epsilon=0.05, delta=0.9)
        np.testing.assert_allclose(ese_limit(params, COST, LINK).score,
                                   30.0, atol=1e-12)

    def test_cancellation_to_zero(self):
        """y_high = y_low + c*b/p makes e_inf = b, so the score is 0."""
        params = MarketParams(p=1.0, y_high=800.0, y_low=500.0, loan=100.0,
                              epsilon=0.05, delta=0.9)
        opt = ese_limit(params, COST, ScoreLink(k=0.007, b=0.3))
        assert opt.score == 0.0

    def test_clamps_at_top(self):
        """A cheap effort technology pushes the raw limit past 100."""
        opt = ese_limit(BASE, CostModel(c=100.0), LINK)
        assert opt.score == 100.0
        assert opt.at_boundary

    def test_group_solver_converges_to_limit(self):
        """solve_group_foc approaches the limit from above as n grows."""
        limit = ese_limit(BASE, COST, LINK).score
        gaps = [solve_group_foc(n, BASE, COST, LINK).score - limit
                for n in (10, 30, 100)]
        assert all(gap >= -1e-9 for gap in gaps)
        assert all(a >= b - 1e-9 for a, b in zip(gaps, gaps[1:]))
        assert gaps[-1] < 1e-3
