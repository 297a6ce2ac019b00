"""Monte Carlo simulation of the scheme wealth under a withdrawal/investment
policy, discounted outcome metrics, and paired strategy comparisons.

Wealth follows (with pi = 1 the mortality credit and the manager's
compensation offset exactly, so no hazard term remains in the drift):

    dY = [ r*Y + alpha_S*sigma_S*theta_S + alpha_L*sigma_L*theta_1_eff
           - beta ] dt + alpha_S*sigma_S dW_S + alpha_L*sigma_L dW_1,

where alpha_S, alpha_L are currency positions, sigma_L is the rolling bond's
volatility loading and theta_1_eff is theta_1 (OU) or theta_1*sqrt(lambda1)
(CIR). W_1 reuses the Brownian increments retained by the mortality paths;
W_S comes from a dedicated stream offset, so paired comparisons see identical
noise (common random numbers).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .control import (MarketParams, SchemeScenario, bond_weight_arrays,
                      g_and_gradient, _a1_maturity, _check_policy_inputs,
                      _hedge_loadings)
from .mortality import CIR, ConfigError, Model, MortalityPaths, simulate_paths
from .numerics import TimeGrid, WS_STREAM_OFFSET, normal_block

OPTIMAL = "optimal"
NO_BOND = "no_bond"
CUSTOM = "custom"

WEALTH_FLOOR_FRACTION = 1e-9

# custom policy: (t, lam (n_paths, n_factors), wealth (n_paths,)) ->
#   (withdraw_rate, stock_weight, bond_weight) arrays
PolicyFn = Callable[[float, np.ndarray, np.ndarray], tuple]


@dataclass
class SchemeTrajectory:
    """Per-path wealth, withdrawals, compensation, weights and survival."""

    grid: TimeGrid
    policy_kind: str
    wealth: np.ndarray          # (n_paths, n_nodes)
    withdraw: np.ndarray        # (n_paths, n_nodes), currency / year
    compensation: np.ndarray    # (n_paths, n_nodes), lambda_members * wealth
    stock_weight: np.ndarray    # (n_paths, n_nodes)
    bond_weight: np.ndarray     # (n_paths, n_nodes)
    cash_weight: np.ndarray     # (n_paths, n_nodes)
    survival: np.ndarray        # (n_paths, n_nodes)
    floor_hit: np.ndarray       # (n_paths,) bool

    @property
    def n_paths(self) -> int:
        return self.wealth.shape[0]

    @property
    def floor_hits(self) -> int:
        return int(self.floor_hit.sum())


def simulate_scheme(model: Model, scenario: SchemeScenario, market: MarketParams,
                    policy_kind: str, paths: MortalityPaths,
                    policy_fn: Optional[PolicyFn] = None) -> SchemeTrajectory:
    """Euler-Maruyama wealth paths with the policy re-evaluated every step.

    Paths whose wealth falls to the floor (1e-9 of initial wealth) are frozen
    there and flagged: with log-utility controls the exact dynamics keep
    wealth positive, so floor hits are discretisation diagnostics, not
    failures.
    """
    grid = paths.grid
    if abs(grid.step - scenario.dt) > 1e-12 or abs(grid.t1 - scenario.horizon) > 1e-9:
        raise ConfigError("mortality paths were generated on a different grid "
                          "than the scenario requests")
    if paths.shocks1 is None:
        raise ConfigError("scheme simulation needs the retained Brownian "
                          "increments (simulate with keep_shocks=True)")
    if policy_kind not in (OPTIMAL, NO_BOND, CUSTOM):
        raise ConfigError(f"unknown policy kind {policy_kind!r}")
    if policy_kind == CUSTOM and policy_fn is None:
        raise ConfigError("custom policy requires policy_fn")
    if policy_kind != CUSTOM:
        _check_policy_inputs(scenario, scenario.y0)

    n = grid.n_steps
    dt = grid.step
    sqdt = np.sqrt(dt)
    times = grid.nodes
    n_paths = paths.n_paths

    xi_s = normal_block(paths.seed, WS_STREAM_OFFSET + paths.path_offset,
                        n_paths, n)
    lam1 = paths.lambda1
    members = paths.members_hazard
    two_pop = paths.lambda2 is not None

    is_cir = model.kind == CIR
    a1_t = _a1_maturity(model, market)
    sigma1, _ = _hedge_loadings(model)
    w_stock_const = market.theta_s / market.sigma_s

    wealth = np.empty((n_paths, n + 1))
    withdraw = np.empty((n_paths, n + 1))
    w_stock = np.empty((n_paths, n + 1))
    w_bond = np.empty((n_paths, n + 1))
    floor = WEALTH_FLOOR_FRACTION * scenario.y0
    frozen = np.zeros(n_paths, dtype=bool)
    wealth[:, 0] = scenario.y0

    for k in range(n + 1):
        t = times[k]
        y = wealth[:, k]
        if two_pop:
            lam_k = np.column_stack([lam1[:, k], members[:, k]])
        else:
            lam_k = lam1[:, k][:, None]

        if policy_kind == CUSTOM:
            beta, ws, wb = policy_fn(t, lam_k, y)
            beta = np.broadcast_to(np.asarray(beta, dtype=float), y.shape).copy()
            ws = np.broadcast_to(np.asarray(ws, dtype=float), y.shape).copy()
            wb = np.broadcast_to(np.asarray(wb, dtype=float), y.shape).copy()
        else:
            g, grad = g_and_gradient(model, scenario, market, t, lam_k)
            beta = y / g
            ws = np.full(n_paths, w_stock_const)
            if policy_kind == OPTIMAL:
                wb = bond_weight_arrays(model, scenario, market, g, grad[:, 0])
            else:
                wb = np.zeros(n_paths)

        withdraw[:, k] = beta
        w_stock[:, k] = ws
        w_bond[:, k] = wb

        if k == n:
            break

        if is_cir:
            sq1 = np.sqrt(np.maximum(lam1[:, k], 0.0))
            sigma_l = -a1_t * sigma1 * sq1
            theta_eff = market.theta_1 * sq1
        else:
            sigma_l = np.full(n_paths, -a1_t * sigma1)
            theta_eff = market.theta_1

        drift = (market.r * y + ws * y * market.sigma_s * market.theta_s
                 + wb * y * sigma_l * theta_eff - beta)
        diffusion = (ws * y * market.sigma_s * sqdt * xi_s[:, k]
                     + wb * y * sigma_l * sqdt * paths.shocks1[:, k])
        y_next = y + drift * dt + diffusion
        hit = (y_next <= floor) & ~frozen
        frozen |= hit
        y_next[frozen] = floor
        wealth[:, k + 1] = y_next

    compensation = members * wealth
    # cash = 1 - (stock + bond): the sum then closes to exactly one
    return SchemeTrajectory(grid=grid, policy_kind=policy_kind, wealth=wealth,
                            withdraw=withdraw, compensation=compensation,
                            stock_weight=w_stock, bond_weight=w_bond,
                            cash_weight=1.0 - (w_stock + w_bond),
                            survival=paths.survival, floor_hit=frozen)


@dataclass
class DiscountedTotals:
    """Trapezoidal discounted totals over the horizon, per path and averaged."""

    benefit: np.ndarray
    compensation: np.ndarray

    @property
    def mean_benefit(self) -> float:
        return float(self.benefit.mean())

    @property
    def mean_compensation(self) -> float:
        return float(self.compensation.mean())


def discounted_totals(traj: SchemeTrajectory, r: float) -> DiscountedTotals:
    """int_0^horizon e^{-r s} beta(s) ds and the same for compensation."""
    disc = np.exp(-r * traj.grid.nodes)
    return DiscountedTotals(
        benefit=np.trapezoid(disc * traj.withdraw, traj.grid.nodes, axis=1),
        compensation=np.trapezoid(disc * traj.compensation, traj.grid.nodes, axis=1))


@dataclass
class ComparisonReport:
    """Paired comparison of two policy arms on identical noise."""

    times: np.ndarray
    traj_a: SchemeTrajectory
    traj_b: SchemeTrajectory
    withdraw_gain: np.ndarray       # (n_paths, n_nodes), arm_b - arm_a
    compensation_gain: np.ndarray
    totals_a: DiscountedTotals
    totals_b: DiscountedTotals

    @property
    def mean_withdraw_gain(self) -> np.ndarray:
        return self.withdraw_gain.mean(axis=0)

    @property
    def mean_compensation_gain(self) -> np.ndarray:
        return self.compensation_gain.mean(axis=0)

    @property
    def relative_withdraw_gain(self) -> np.ndarray:
        base = self.traj_a.withdraw.mean(axis=0)
        return self.mean_withdraw_gain / base

    @property
    def relative_compensation_gain(self) -> np.ndarray:
        base = self.traj_a.compensation.mean(axis=0)
        return self.mean_compensation_gain / base

    @property
    def benefit_improvement(self) -> float:
        """Relative gain of the average discounted benefit total."""
        return self.totals_b.mean_benefit / self.totals_a.mean_benefit - 1.0

    @property
    def compensation_improvement(self) -> float:
        return (self.totals_b.mean_compensation
                / self.totals_a.mean_compensation - 1.0)


def compare_strategies(model: Model, scenario: SchemeScenario,
                       market: MarketParams, arm_a: str, arm_b: str,
                       scenario_b: Optional[SchemeScenario] = None,
                       market_b: Optional[MarketParams] = None,
                       paths: Optional[MortalityPaths] = None,
                       policy_fn_a: Optional[PolicyFn] = None,
                       policy_fn_b: Optional[PolicyFn] = None) -> ComparisonReport:
    """Simulate two arms on identical mortality paths and stock noise.

    The arms may differ in policy kind or in a scenario/market scalar
    (risk-sharing weight, longevity risk price); the time grid, path count and
    seed must coincide so the comparison is paired.
    """
    scen_b = scenario_b if scenario_b is not None else scenario
    mkt_b = market_b if market_b is not None else market
    if (scen_b.horizon, scen_b.dt, scen_b.n_paths, scen_b.seed) != \
            (scenario.horizon, scenario.dt, scenario.n_paths, scenario.seed):
        raise ConfigError("comparison arms must share grid, path count and seed")

    if paths is None:
        grid = TimeGrid(0.0, scenario.horizon, scenario.dt)
        paths = simulate_paths(model, grid, scenario.n_paths, scenario.seed)

    traj_a = simulate_scheme(model, scenario, market, arm_a, paths,
                             policy_fn=policy_fn_a)
    traj_b = simulate_scheme(model, scen_b, mkt_b, arm_b, paths,
                             policy_fn=policy_fn_b)
    return ComparisonReport(
        times=paths.grid.nodes, traj_a=traj_a, traj_b=traj_b,
        withdraw_gain=traj_b.withdraw - traj_a.withdraw,
        compensation_gain=traj_b.compensation - traj_a.compensation,
        totals_a=discounted_totals(traj_a, market.r),
        totals_b=discounted_totals(traj_b, mkt_b.r))
