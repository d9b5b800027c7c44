"""Mean-variance preferences for two-member groups.

A risk-averse member values a contract at ``E[P] - (gamma/2) Var[P] - C(e)``
where ``P`` is the repayment-stage profit (the four-outcome distribution of
`profit_distribution_pair`) and ``C`` the effort cost. Both moments admit
polynomial forms in ``e`` with ``A = pYh - w`` and ``B = pYh + pYl - 2w``:

``mean = e^2 A + e(1-e) B``
``var  = (e^2-e^4) A^2 + (e-2e^2+2e^3-e^4) B^2 - 2(e^3-e^4) A B``

`profit_moments_pair` evaluates the enumeration route and the polynomial
route and raises InvariantViolation if they disagree beyond floating-point
noise, so an algebra bug here cannot produce a silently wrong number.

The quartic variance term can destroy concavity in ``e``, so the optimal
score is found by global grid search with golden-section refinement rather
than by FOC root-finding. Module-level constants at the bottom are the
documented default parameter sets shared by the CLI sweeps and the tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, InvariantViolation
from .model_core import (
    CostModel,
    MarketParams,
    ScoreLink,
    _require_finite,
    binding_repayment,
    profit_distribution_pair,
    success_probability,
)
from .optimizer import Optimum, SolverConfig, _DEFAULT_CFG, argmax_grid

__all__ = [
    "RiskPreference",
    "Moments",
    "profit_moments_pair",
    "mv_utility",
    "mv_foc",
    "optimal_ese_mv",
    "slope_for_baseline",
    "DEFAULT_SWEEP_PARAMS",
    "DEFAULT_SWEEP_W",
    "DEFAULT_COSTS",
    "DEFAULT_BASELINES",
    "DEFAULT_GAMMA_GRID",
    "DEFAULT_YIELD_SCENARIOS",
]


@dataclass(frozen=True)
class RiskPreference:
    """Risk-aversion coefficient; gamma = 0 recovers risk neutrality."""

    gamma: float

    def __post_init__(self):
        _require_finite("gamma", self.gamma)
        if self.gamma < 0:
            raise DomainError("gamma must be >= 0")


@dataclass(frozen=True)
class Moments:
    """Mean and variance of a member's repayment-stage profit."""

    mean: float
    variance: float

    def __post_init__(self):
        _require_finite("mean", self.mean)
        _require_finite("variance", self.variance)
        if self.variance < 0:
            raise DomainError("variance must be >= 0")


def _as_risk(gamma) -> RiskPreference:
    """Accept a RiskPreference or a bare coefficient."""
    return gamma if isinstance(gamma, RiskPreference) else RiskPreference(float(gamma))


def _mean_poly(e, A, B):
    return e * e * A + e * (1.0 - e) * B


def _var_poly(e, A, B):
    e2 = e * e
    e3 = e2 * e
    e4 = e2 * e2
    return (
        (e2 - e4) * A * A
        + (e - 2.0 * e2 + 2.0 * e3 - e4) * B * B
        - 2.0 * (e3 - e4) * A * B
    )


def _moment_tolerance(A: float, B: float, value_scale: float) -> float:
    """Agreement tolerance between the two moment routes.

    Relative 1e-10 on the values themselves plus an absolute floor scaled to
    the squared profit spreads, since degenerate points (e near 0 or 1)
    cancel catastrophically and leave only rounding dust.
    """
    eps = np.finfo(float).eps
    return 1e-10 * value_scale + 256.0 * eps * max(A * A, B * B, abs(A * B), 1.0)


def profit_moments_pair(e: float, w: float, params: MarketParams) -> Moments:
    """Exact profit moments for a two-member group, computed two ways.

    Route one enumerates the four-outcome distribution; route two evaluates
    the polynomial expansions in ``e``. The routes must agree within
    floating-point tolerance or InvariantViolation is raised (that signals
    an implementation bug, never bad input). The enumeration values are
    returned.
    """
    dist = profit_distribution_pair(e, w, params)
    mean_enum = dist.mean()
    var_enum = dist.variance()
    A = params.high_revenue - w
    B = params.high_revenue + params.low_revenue - 2.0 * w
    mean_poly = _mean_poly(e, A, B)
    var_poly = _var_poly(e, A, B)
    tol = _moment_tolerance(A, B, max(abs(mean_enum), abs(var_enum), 1.0))
    if abs(mean_enum - mean_poly) > tol or abs(var_enum - var_poly) > tol:
        raise InvariantViolation(
            "moment routes disagree: "
            f"enumeration ({mean_enum!r}, {var_enum!r}) vs "
            f"polynomial ({mean_poly!r}, {var_poly!r}) at e={e!r}, w={w!r}"
        )
    return Moments(mean=float(mean_enum), variance=float(var_enum))


def mv_utility(E: float, w: float, params: MarketParams, gamma, cost: CostModel,
               link: ScoreLink) -> float:
    """Mean-variance utility of a score: ``mean - (gamma/2) var - C(e)``.

    Scalar by construction (it routes through the cross-checked
    `profit_moments_pair`); the sweep optimizer uses an equivalent
    vectorized path and re-validates its optimum through this function.
    """
    gamma = _as_risk(gamma)
    e = float(success_probability(E, link))
    m = profit_moments_pair(e, w, params)
    return m.mean - 0.5 * gamma.gamma * m.variance - float(cost.effort_cost(e))


def mv_foc(E, w: float, params: MarketParams, gamma, cost: CostModel,
           link: ScoreLink):
    """Derivative of `mv_utility` with respect to the score.

    By the chain rule through ``e = kE + b``:

    ``k [ B - 2e(pYl - w) - c e
          - (gamma/2) ( (2e-4e^3) A^2 + (1-4e+6e^2-4e^3) B^2
                        - 2(3e^2-4e^3) A B ) ]``

    The ``A B`` term enters with a minus sign, matching the derivative of
    the variance polynomial (a plus sign here fails every finite-difference
    check against the utility). Identically zero when ``k = 0``.
    """
    gamma = _as_risk(gamma)
    e = success_probability(E, link)
    A = params.high_revenue - w
    B = params.high_revenue + params.low_revenue - 2.0 * w
    e2 = e * e
    e3 = e2 * e
    dmean = B - 2.0 * e * (params.low_revenue - w)
    dvar = (
        (2.0 * e - 4.0 * e3) * A * A
        + (1.0 - 4.0 * e + 6.0 * e2 - 4.0 * e3) * B * B
        - 2.0 * (3.0 * e2 - 4.0 * e3) * A * B
    )
    return link.k * (dmean - cost.marginal_cost(e) - 0.5 * gamma.gamma * dvar)


def _fixed_w_objective(w: float, params: MarketParams, gamma: RiskPreference,
                       cost: CostModel, link: ScoreLink):
    ph, pl = params.high_revenue, params.low_revenue
    A = ph - w
    B = ph + pl - 2.0 * w

    def objective(E):
        e = success_probability(E, link)
        return (
            _mean_poly(e, A, B)
            - 0.5 * gamma.gamma * _var_poly(e, A, B)
            - cost.effort_cost(e)
        )

    return objective


def _endogenous_w_objective(params: MarketParams, gamma: RiskPreference,
                            cost: CostModel, link: ScoreLink):
    ph, pl = params.high_revenue, params.low_revenue
    principal = params.loan * (1.0 + params.epsilon)

    def objective(E):
        e = success_probability(E, link)
        w = principal / (1.0 - (1.0 - e) ** 2)
        A = ph - w
        B = ph + pl - 2.0 * w
        return (
            _mean_poly(e, A, B)
            - 0.5 * gamma.gamma * _var_poly(e, A, B)
            - cost.effort_cost(e)
        )

    return objective


def optimal_ese_mv(w, params: MarketParams, gamma, cost: CostModel, link: ScoreLink,
                   cfg: SolverConfig = _DEFAULT_CFG, *,
                   endogenous_w: bool = False) -> Optimum:
    """Score maximizing mean-variance utility over [0, 100].

    The risk term is quartic in ``e``, so unimodality is not guaranteed and
    the maximizer is located by dense grid search plus golden-section
    refinement. By default ``w`` is a fixed exogenous repayment. With
    ``endogenous_w=True`` the break-even repayment
    ``w(e) = L(1+eps) / (1 - (1-e)^2)`` is substituted before maximizing
    (``w`` is then ignored and may be None); this mode needs a positive
    success probability across the whole score range, i.e. ``b > 0``.

    The returned objective value is re-validated against the cross-checked
    scalar `mv_utility` at the optimum, and interior optima (fixed-``w``
    mode) must leave a `mv_foc` residual below 1e-6 of the utility scale.
    """
    gamma = _as_risk(gamma)
    if w is None and not endogenous_w:
        raise ConfigError("fixed-repayment mode needs an explicit w; pass "
                          "endogenous_w=True to substitute the break-even "
                          "obligation instead")
    if endogenous_w:
        if success_probability(0.0, link) <= 0.0:
            raise DomainError("endogenous repayment requires b > 0 so the "
                              "success probability is positive at every score")
        objective = _endogenous_w_objective(params, gamma, cost, link)
    else:
        w = float(w)
        _require_finite("w", w)
        if w <= 0:
            raise DomainError("w must be > 0")
        objective = _fixed_w_objective(w, params, gamma, cost, link)

    opt = argmax_grid(objective, 0.0, 100.0, cfg)

    e_star = float(success_probability(opt.score, link))
    w_star = (params.loan * (1.0 + params.epsilon) / (1.0 - (1.0 - e_star) ** 2)
              if endogenous_w else w)
    check = mv_utility(opt.score, w_star, params, gamma, cost, link)
    scale = max(1.0, abs(opt.objective_value), abs(check))
    if abs(check - opt.objective_value) > 1e-9 * scale:
        raise InvariantViolation(
            f"optimizer objective {opt.objective_value!r} disagrees with "
            f"utility {check!r} at E={opt.score!r}"
        )
    if not endogenous_w and not opt.at_boundary:
        residual = float(mv_foc(opt.score, w, params, gamma, cost, link))
        if abs(residual) > 1e-6 * scale:
            raise InvariantViolation(
                f"interior optimum at E={opt.score!r} leaves FOC residual "
                f"{residual!r}"
            )
    return opt


# ----------------------------------------------------------------------
# documented default parameter sets for the risk-aversion sweeps
# ----------------------------------------------------------------------

#: Market calibration used by the sweep subcommands and the property tests.
DEFAULT_SWEEP_PARAMS = MarketParams(
    p=1.0, y_high=1000.0, y_low=500.0, loan=100.0, epsilon=0.05, delta=0.9,
)

#: Break-even repayment for a pair at e = 0.5, held fixed across sweeps.
DEFAULT_SWEEP_W = float(binding_repayment(0.5, 2, DEFAULT_SWEEP_PARAMS).w)

#: Effort-cost scales swept in the risk-aversion studies.
DEFAULT_COSTS = (800.0, 1000.0, 1200.0, 1500.0, 2000.0)

#: Baseline success probabilities: poor, neutral, favorable conditions.
DEFAULT_BASELINES = (0.3, 0.5, 0.7)

#: Risk-aversion grid, 21 points on [0, 1].
DEFAULT_GAMMA_GRID = tuple(float(g) for g in np.linspace(0.0, 1.0, 21))

#: (y_high, y_low) pairs for the yield comparison, high-yield pair first.
DEFAULT_YIELD_SCENARIOS = ((1000.0, 500.0), (600.0, 300.0))


def slope_for_baseline(b: float) -> float:
    """Score slope that makes e span [b, 1] as E spans [0, 100]."""
    if not 0.0 <= b <= 1.0:
        raise DomainError("b must lie in [0, 1]")
    return (1.0 - b) / 100.0
