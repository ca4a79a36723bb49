"""Seeded synthetic economies and an accounting-identity verifier.

A generated economy has households with pay, cash flow from capital, net
transfers and consumption, plus a collective human-capital account. All
quantities are random but built to satisfy the accounting identities:

    household          Pi + F = C + Gamma                      (transfers)
    collective         sum(Gamma) = 0, so C - Pi = F
    value              V = H + K,  Y = dV + F(V)
    human capital      F(H) = Pi - Cs,  dH = Cs + Ws - D(H)
    work               W = dH + F(H) = Pi + Ws - D(H)
    consumption        Cs + Cp = C
    net output         Y = dV + Cp = C + Ws - D(H) + dK = W + P = Pi + Ws - D(H) + P
    consequence        C + dK = Pi + P
    income shares      W/Y + P/Y = 1

The verifier recomputes collective quantities from the household ledgers
rather than trusting stored aggregates, so a fault in any one generated
quantity shows up as a named failing identity.

Per-year values live in arrays of shape ``(n_years,)`` and household values
in ``(n_years, n_households)``. An :class:`EconomyState` may hold scalars (one
year) or whole arrays (all years stacked); the formula functions accept both.
"""

from __future__ import annotations

import dataclasses
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import indicators
from .errors import (
    DegenerateEconomy,
    GeneratorInfeasible,
    IdentityViolation,
    TransferImbalance,
    ValidationError,
)

OP_TOL = 1e-12
VERIFY_TOL = 1e-9


@dataclass(frozen=True, slots=True)
class HouseholdLedger:
    household_id: int
    pay_Pi: float
    cash_flow_F: float
    consumption_C: float
    net_transfer_Gamma: float

    def __post_init__(self):
        if self.pay_Pi < 0 or self.consumption_C < 0:
            raise ValidationError(f"household {self.household_id}: pay and consumption must be >= 0")

    @classmethod
    def balanced(cls, household_id, pay_Pi, cash_flow_F, net_transfer_Gamma):
        """Ledger whose consumption is whatever pay and cash flow leave after transfers."""
        return cls(household_id, pay_Pi, cash_flow_F,
                   pay_Pi + cash_flow_F - net_transfer_Gamma, net_transfer_Gamma)


@dataclass(frozen=True, slots=True)
class HumanCapitalAccount:
    H: float
    invested_consumption_Cs: float
    pure_consumption_Cp: float
    self_invested_work_Ws: float
    human_depreciation_DH: float
    pay_Pi: float
    cash_flow_FH: float

    @classmethod
    def from_flows(cls, H, Cs, Cp, Ws, DH, Pi):
        return cls(H, Cs, Cp, Ws, DH, Pi, Pi - Cs)


@dataclass(frozen=True, eq=False)
class EconomyState:
    """One year (scalar fields) or all years stacked (array fields).

    ``K_prev`` and ``H_prev`` are the opening stocks; ``K`` and ``H`` the
    closing ones. ``C``, ``Pi`` and ``F`` are the stored aggregates.
    """

    year: int
    K_prev: float
    K: float
    H_prev: float
    H: float
    V: float
    delta_K: float
    delta_H: float
    C: float
    Pi: float
    F: float
    Cs: float
    Cp: float
    Ws: float
    DH: float
    FH: float
    pay: np.ndarray
    cash_flow: np.ndarray
    consumption: np.ndarray
    transfer: np.ndarray

    @property
    def n_households(self) -> int:
        return np.shape(self.pay)[-1]

    @property
    def ledgers(self) -> list[HouseholdLedger]:
        if np.ndim(self.pay) != 1:
            raise ValueError("ledgers are available on single-year states only")
        return [
            HouseholdLedger(i, float(p), float(f), float(c), float(g))
            for i, (p, f, c, g) in enumerate(
                zip(self.pay, self.cash_flow, self.consumption, self.transfer))
        ]

    @property
    def human_account(self) -> HumanCapitalAccount:
        return HumanCapitalAccount(self.H, self.Cs, self.Cp, self.Ws, self.DH, self.Pi, self.FH)

    @property
    def net_profit_P(self):
        """Net profit from the state's aggregates, as the empirical pipeline computes it."""
        return indicators.net_profit(self.delta_K, self.C, self.Pi)


_YEAR_FIELDS = tuple(f.name for f in dataclasses.fields(EconomyState))


class Economy(Sequence):
    """A generated economy: a sequence of yearly :class:`EconomyState`.

    ``stacked`` holds every field as an array over years; indexing returns
    single-year states.
    """

    def __init__(self, stacked: EconomyState, seed: Optional[int] = None):
        arrays = {}
        for name in _YEAR_FIELDS:
            arr = np.array(getattr(stacked, name), copy=True)
            arr.setflags(write=False)
            arrays[name] = arr
        self.stacked = EconomyState(**arrays)
        self.seed = seed

    def __len__(self) -> int:
        return len(self.stacked.year)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        values = {}
        for name in _YEAR_FIELDS:
            v = getattr(self.stacked, name)[i]
            values[name] = v if np.ndim(v) else v.item()
        return EconomyState(**values)

    @property
    def n_households(self) -> int:
        return self.stacked.n_households

    @classmethod
    def from_states(cls, states: Sequence[EconomyState]) -> "Economy":
        if not states:
            raise ValidationError("an economy needs at least one state")
        return cls(EconomyState(**{
            name: np.array([getattr(s, name) for s in states]) for name in _YEAR_FIELDS}))

    def replace(self, **changes) -> "Economy":
        """Copy with some stacked fields replaced (used to inject faults)."""
        return Economy(dataclasses.replace(self.stacked, **changes), self.seed)

    def scaled(self, lam: float) -> "Economy":
        """Every currency quantity multiplied by ``lam``."""
        return self.replace(**{n: getattr(self.stacked, n) * lam for n in _YEAR_FIELDS if n != "year"})

    def same_as(self, other: "Economy") -> bool:
        return all(np.array_equal(getattr(self.stacked, n), getattr(other.stacked, n))
                   for n in _YEAR_FIELDS)


@dataclass(frozen=True)
class MagnitudeConfig:
    """Uniform draw ranges. Household flows are per household; stocks and
    human-capital flows are per household too and scaled by the count."""

    pay: tuple[float, float] = (50.0, 150.0)
    cash_flow: tuple[float, float] = (-5.0, 40.0)
    transfer_half_width: float = 20.0
    initial_K: tuple[float, float] = (300.0, 900.0)
    capital_growth: tuple[float, float] = (-0.06, 0.08)
    initial_H: tuple[float, float] = (1500.0, 4000.0)
    invested_share: tuple[float, float] = (0.05, 0.40)
    self_invested_work: tuple[float, float] = (0.0, 30.0)
    human_depreciation: tuple[float, float] = (0.0, 30.0)
    start_year: int = 2000
    max_retries: int = 50


def _draw(rng, n_households, n_years, cfg):
    shape = (n_years, n_households)
    pay = rng.uniform(*cfg.pay, shape)
    cash_flow = rng.uniform(*cfg.cash_flow, shape)
    z = rng.uniform(-cfg.transfer_half_width, cfg.transfer_half_width, shape)
    transfer = z - z.mean(axis=1, keepdims=True)
    consumption = pay + cash_flow - transfer

    growth = rng.uniform(*cfg.capital_growth, n_years)
    K_open = n_households * rng.uniform(*cfg.initial_K)
    H_open = n_households * rng.uniform(*cfg.initial_H)
    share = rng.uniform(*cfg.invested_share, n_years)
    Ws = n_households * rng.uniform(*cfg.self_invested_work, n_years)
    DH = n_households * rng.uniform(*cfg.human_depreciation, n_years)

    C = consumption.sum(axis=1)
    Pi = pay.sum(axis=1)
    F = cash_flow.sum(axis=1)
    Cs = share * C
    Cp = C - Cs
    delta_H = Cs + Ws - DH

    K_prev, K, dK = np.empty(n_years), np.empty(n_years), np.empty(n_years)
    H_prev, H = np.empty(n_years), np.empty(n_years)
    for t in range(n_years):
        K_prev[t], H_prev[t] = K_open, H_open
        dK[t] = growth[t] * K_open
        K_open = K_open + dK[t]
        H_open = H_open + delta_H[t]
        K[t], H[t] = K_open, H_open

    feasible = (
        np.all(consumption >= 0) and np.all(pay >= 0) and np.all(Cs >= 0) and np.all(Cp >= 0)
        and np.all(K > 0) and np.all(H > 0) and np.all(Ws >= 0) and np.all(DH >= 0)
    )
    state = EconomyState(
        year=cfg.start_year + np.arange(n_years), K_prev=K_prev, K=K, H_prev=H_prev, H=H,
        V=H + K, delta_K=dK, delta_H=delta_H, C=C, Pi=Pi, F=F, Cs=Cs, Cp=Cp, Ws=Ws, DH=DH,
        FH=Pi - Cs, pay=pay, cash_flow=cash_flow, consumption=consumption, transfer=transfer,
    )
    return state, feasible


def generate_economy(
    seed: int, n_households: int, n_years: int, config: Optional[MagnitudeConfig] = None
) -> Economy:
    """Generate an identity-consistent economy, deterministic in ``seed``.

    Draws that leave any stock or nonnegative flow out of range are rejected
    and redrawn from the same generator, up to ``config.max_retries`` times.
    """
    if n_households < 1:
        raise ValidationError("n_households must be at least 1")
    if n_years < 2:
        raise ValidationError("n_years must be at least 2")
    cfg = config or MagnitudeConfig()
    rng = np.random.default_rng(seed)
    for _ in range(cfg.max_retries):
        state, feasible = _draw(rng, n_households, n_years, cfg)
        if feasible:
            return Economy(state, seed)
    raise GeneratorInfeasible(
        f"no feasible economy after {cfg.max_retries} draws (seed={seed}); check MagnitudeConfig")


def _rel(lhs, rhs, scale):
    """|lhs - rhs| / scale elementwise, with 0/0 taken as 0."""
    diff = np.abs(np.asarray(lhs, dtype=float) - np.asarray(rhs, dtype=float))
    scale = np.asarray(scale, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(scale > 0, diff / np.where(scale > 0, scale, 1.0),
                       np.where(diff == 0, 0.0, np.inf))
    return out


def _abs_sum(*terms):
    return sum(np.abs(t) for t in terms)


def aggregate_households(ledgers: Sequence[HouseholdLedger]) -> tuple[float, float, float]:
    """Collective ``(C, Pi, F)``; requires transfers to net out."""
    if not ledgers:
        raise ValidationError("no households to aggregate")
    C = float(np.sum([h.consumption_C for h in ledgers]))
    Pi = float(np.sum([h.pay_Pi for h in ledgers]))
    F = float(np.sum([h.cash_flow_F for h in ledgers]))
    gamma = float(np.sum([h.net_transfer_Gamma for h in ledgers]))
    if abs(gamma) > VERIFY_TOL * abs(C):
        raise TransferImbalance(f"net transfers sum to {gamma!r}, not zero")
    return C, Pi, F


def work_output(account: HumanCapitalAccount, delta_H: float) -> float:
    """Net output of human capital, computed as dH + F(H) and as Pi + Ws - D(H).

    Raises IdentityViolation naming the equation when the account is
    internally inconsistent or the two routes disagree.
    """
    a = account
    checks = (
        ("human-cash-flow", a.cash_flow_FH, a.pay_Pi - a.invested_consumption_Cs,
         _abs_sum(a.cash_flow_FH, a.pay_Pi, a.invested_consumption_Cs)),
        ("human-capital-growth", delta_H, a.invested_consumption_Cs + a.self_invested_work_Ws - a.human_depreciation_DH,
         _abs_sum(delta_H, a.invested_consumption_Cs, a.self_invested_work_Ws, a.human_depreciation_DH)),
    )
    for label, lhs, rhs, scale in checks:
        if np.max(_rel(lhs, rhs, scale)) > OP_TOL:
            raise IdentityViolation(label, f"{lhs!r} != {rhs!r}")
    via_growth = delta_H + a.cash_flow_FH
    via_pay = a.pay_Pi + a.self_invested_work_Ws - a.human_depreciation_DH
    if np.max(_rel(via_growth, via_pay, _abs_sum(delta_H, a.cash_flow_FH, a.pay_Pi,
                                                 a.self_invested_work_Ws, a.human_depreciation_DH))) > OP_TOL:
        raise IdentityViolation("work-two-ways", f"dH + F(H) = {via_growth!r} but Pi + Ws - D(H) = {via_pay!r}")
    return via_pay


def _net_output(state: EconomyState):
    P = state.net_profit_P
    Y_uses = state.C + state.Ws - state.DH + state.delta_K
    Y_factors = state.Pi + state.Ws - state.DH + P
    return Y_uses, Y_factors


def net_output_two_ways(state: EconomyState):
    """``(Y_uses, Y_factors)``: C + Ws - D(H) + dK and Pi + Ws - D(H) + P."""
    Y_uses, Y_factors = _net_output(state)
    scale = _abs_sum(state.C, state.Ws, state.DH, state.delta_K) + _abs_sum(state.Pi, state.net_profit_P)
    if np.max(_rel(Y_uses, Y_factors, scale)) > OP_TOL:
        raise IdentityViolation("uses-equal-factors", f"Y_uses={Y_uses!r} != Y_factors={Y_factors!r}")
    return Y_uses, Y_factors


def income_factor_shares(state: EconomyState):
    """Shares of work and net profit in net output, ``(W/Y, P/Y)``."""
    Y = state.C + state.delta_K + state.Ws - state.DH
    if np.any(Y == 0):
        raise DegenerateEconomy("net output is zero; income shares undefined")
    W = state.Pi + state.Ws - state.DH
    P = state.delta_K + state.C - state.Pi
    return W / Y, P / Y


@dataclass
class IdentityCheck:
    label: str
    description: str
    max_residual: float
    passed: bool
    failures: list[str] = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{self.label:<24} {status}  max_rel_residual={self.max_residual:.3e}  {self.description}"


@dataclass
class IdentityReport:
    checks: list[IdentityCheck]
    tolerance: float

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failed(self) -> list[str]:
        return [c.label for c in self.checks if not c.passed]

    def __getitem__(self, label: str) -> IdentityCheck:
        for c in self.checks:
            if c.label == label:
                return c
        raise KeyError(label)

    def lines(self) -> list[str]:
        return [c.line() for c in self.checks]


def verify_all_identities(economy: Economy, tolerance: float = VERIFY_TOL) -> IdentityReport:
    """Evaluate every identity on every year and household of ``economy``."""
    s = economy.stacked
    years = np.asarray(s.year)
    checks: list[IdentityCheck] = []

    def check(label, description, lhs, rhs, scale, where=None):
        res = np.atleast_1d(_rel(lhs, rhs, scale))
        worst = float(np.max(res)) if res.size else 0.0
        bad = np.argwhere(res > tolerance)
        failures = []
        for idx in bad[:20]:
            t = int(idx[0])
            loc = f"year {int(years[t])}" if where is None else where(t)
            if len(idx) > 1:
                loc += f" household {int(idx[1])}"
            failures.append(loc)
        checks.append(IdentityCheck(label, description, worst, bad.size == 0, failures))

    # Households and collective aggregation.
    check("household-budget", "Pi + F(K) = C + Gamma per household",
          s.pay + s.cash_flow, s.consumption + s.transfer,
          _abs_sum(s.pay, s.cash_flow, s.consumption, s.transfer))
    C = s.consumption.sum(axis=1)
    Pi = s.pay.sum(axis=1)
    F = s.cash_flow.sum(axis=1)
    gamma = s.transfer.sum(axis=1)
    check("transfers-net-zero", "sum of net transfers = 0", gamma, 0.0, np.abs(C))
    check("collective-cash-flow", "C - Pi = F(K) collectively", C - Pi, F, _abs_sum(C, Pi, F))
    check("aggregation", "stored C, Pi, F equal household sums",
          np.stack([s.C, s.Pi, s.F], axis=1), np.stack([C, Pi, F], axis=1),
          np.stack([np.abs(C), np.abs(Pi), np.abs(F)], axis=1))

    # Stocks.
    dV = s.V - (s.H_prev + s.K_prev)
    check("total-capital", "V = H + K", s.V, s.H + s.K, _abs_sum(s.V, s.H, s.K))
    check("stock-flow", "K - K_prev = dK and H - H_prev = dH",
          np.stack([s.K - s.K_prev, s.H - s.H_prev], axis=1), np.stack([s.delta_K, s.delta_H], axis=1),
          np.stack([_abs_sum(s.K, s.K_prev, s.delta_K), _abs_sum(s.H, s.H_prev, s.delta_H)], axis=1))
    if len(economy) > 1:
        check("continuity", "opening stocks equal previous closing stocks",
              np.stack([s.K_prev[1:], s.H_prev[1:]], axis=1), np.stack([s.K[:-1], s.H[:-1]], axis=1),
              np.stack([_abs_sum(s.K_prev[1:], s.K[:-1]), _abs_sum(s.H_prev[1:], s.H[:-1])], axis=1),
              where=lambda t: f"year {int(years[t + 1])}")

    # Human capital and work.
    W_growth = s.delta_H + s.FH
    W_pay = s.Pi + s.Ws - s.DH
    check("human-cash-flow", "F(H) = Pi - Cs", s.FH, Pi - s.Cs, _abs_sum(s.FH, Pi, s.Cs))
    check("human-capital-growth", "dH = Cs + Ws - D(H)", s.delta_H, s.Cs + s.Ws - s.DH,
          _abs_sum(s.delta_H, s.Cs, s.Ws, s.DH))
    check("work-two-ways", "W = dH + F(H) = Pi + Ws - D(H)", W_growth, W_pay,
          _abs_sum(s.delta_H, s.FH, s.Pi, s.Ws, s.DH))

    # Net output, several routes.
    Y_total_return = dV + s.Cp
    Y_chain = s.delta_H + s.delta_K + s.Cp
    Y_flows = s.Cs + s.Ws - s.DH + s.delta_K + s.Cp
    Y_uses = C + s.Ws - s.DH + s.delta_K
    P_true = s.delta_K + F
    P_pipeline = indicators.net_profit(s.delta_K, C, Pi)
    Y_factors = Pi + s.Ws - s.DH + P_pipeline
    Y_scale = _abs_sum(C, s.Ws, s.DH, s.delta_K) + _abs_sum(s.Cs, s.Cp)

    check("total-return", "Y = dV + F(V), F(V) = Cp, equals C + Ws - D(H) + dK",
          Y_total_return, Y_uses, Y_scale + _abs_sum(s.V, s.H_prev, s.K_prev))
    check("net-output-chain", "dV + Cp = dH + dK + Cp = Cs + Ws - D(H) + dK + Cp",
          np.stack([Y_total_return, Y_chain], axis=1), np.stack([Y_chain, Y_flows], axis=1),
          np.stack([Y_scale + _abs_sum(s.V, s.H_prev, s.K_prev), Y_scale + np.abs(s.delta_H)], axis=1))
    check("consumption-split", "Cs + Cp = C", s.Cs + s.Cp, C, _abs_sum(s.Cs, s.Cp, C))
    check("net-output-uses", "Y = C + Ws - D(H) + dK", Y_flows, Y_uses, Y_scale)
    check("output-work-plus-profit", "Y = W + P", W_growth + P_true, Y_uses,
          Y_scale + _abs_sum(s.delta_H, s.FH, F))
    check("output-factors", "Y = Pi + Ws - D(H) + P", Y_factors, W_growth + P_true,
          Y_scale + _abs_sum(Pi, P_pipeline, s.delta_H, s.FH, F))
    check("uses-equal-factors", "C + dK + Ws - D(H) = Pi + P + Ws - D(H)", Y_uses, Y_factors,
          Y_scale + _abs_sum(Pi, P_pipeline))
    check("consumption-plus-growth", "C + dK = Pi + P", C + s.delta_K, Pi + P_true,
          _abs_sum(C, s.delta_K, Pi, P_true))

    Y = Y_uses
    with np.errstate(divide="ignore", invalid="ignore"):
        w_share = W_pay / Y
        p_share = (s.delta_K + C - Pi) / Y
    check("income-shares", "W/Y + P/Y = 1", w_share + p_share, 1.0, _abs_sum(w_share, p_share))
    check("pipeline-profit", "P from (dK, C, Pi) equals Y - W", P_pipeline,
          Y_uses - W_growth, _abs_sum(P_pipeline, s.delta_H, s.FH) + Y_scale)

    return IdentityReport(checks, tolerance)
