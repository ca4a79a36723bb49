"""Indicator formulas: cash flow, net profit, rates, shares in consumption.

All functions are pure. Collectively, cash flow from capital is consumption
less pay, net profit is capital growth plus cash flow, and each rate is the
corresponding flow over beginning-of-year capital::

    F = C - Pi        P = dK + F        f = F/K0   g = dK/K0   r = g + f

Negative cash flow, capital growth, net profit and returns are ordinary
values (recessions, shocks, mismeasured pay), never errors.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .domain import CountrySummary, IndicatorRow, PanelObservation
from .errors import (
    DuplicateYear,
    EmptyDerivation,
    InvalidObservation,
    NonPositiveCapital,
    NonPositiveConsumption,
)

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.10
DEFAULT_EPSILON_G = 0.005


def _finite(*values) -> None:
    # Accepts scalars or arrays; the oracle evaluates these formulas on arrays.
    for v in values:
        ok = math.isfinite(v) if isinstance(v, (float, int)) else np.all(np.isfinite(v))
        if not ok:
            raise InvalidObservation(f"non-finite input {v!r}")


def cash_flow(consumption_C: float, pay_Pi: float) -> float:
    """Cash flow from capital, C - Pi. Negative when pay exceeds consumption."""
    _finite(consumption_C, pay_Pi)
    return consumption_C - pay_Pi


def net_profit(delta_K: float, consumption_C: float, pay_Pi: float) -> float:
    """Net profit at market value, dK + (C - Pi)."""
    _finite(delta_K)
    return delta_K + cash_flow(consumption_C, pay_Pi)


def rates(prev_K: float, delta_K: float, cash_flow_F: float) -> tuple[float, float, float]:
    """Return ``(f, g, r)`` for one year, dividing by beginning-of-year capital."""
    _finite(prev_K, delta_K, cash_flow_F)
    if prev_K <= 0:
        raise NonPositiveCapital(f"beginning-of-year capital must be positive, got {prev_K!r}")
    f = cash_flow_F / prev_K
    g = delta_K / prev_K
    return f, g, g + f


def consumption_shares(consumption_C: float, pay_Pi: float) -> tuple[float, float]:
    """Labor and capital shares in consumption, Pi/C and (C - Pi)/C.

    Values outside [0, 1] are returned as-is; callers flag them.
    """
    _finite(consumption_C, pay_Pi)
    if consumption_C <= 0:
        raise NonPositiveConsumption(f"consumption must be positive, got {consumption_C!r}")
    return pay_Pi / consumption_C, (consumption_C - pay_Pi) / consumption_C


def reconstruct_flows(f_rate: float, g_rate: float, prev_K: float) -> tuple[float, float]:
    """Inverse of :func:`rates`: recover ``(F, dK)`` from the rates and capital."""
    if prev_K <= 0:
        raise NonPositiveCapital(f"beginning-of-year capital must be positive, got {prev_K!r}")
    return f_rate * prev_K, g_rate * prev_K


def derive_row(prev: PanelObservation, cur: PanelObservation) -> IndicatorRow:
    if prev.country != cur.country:
        raise InvalidObservation(
            f"cannot pair observations from {prev.country!r} and {cur.country!r}")
    if cur.year != prev.year + 1:
        raise InvalidObservation(f"{cur.country}: years {prev.year} and {cur.year} are not consecutive")
    F = cash_flow(cur.consumption_C, cur.pay_Pi)
    dK = cur.capital_K - prev.capital_K
    P = net_profit(dK, cur.consumption_C, cur.pay_Pi)
    f, g, r = rates(prev.capital_K, dK, F)
    labor, capital = consumption_shares(cur.consumption_C, cur.pay_Pi)
    return IndicatorRow(
        country=cur.country,
        year=cur.year,
        prev_capital_K=prev.capital_K,
        cash_flow_F=F,
        delta_K=dK,
        net_profit_P=P,
        f_rate=f,
        g_rate=g,
        r_rate=r,
        labor_share_cons=labor,
        capital_share_cons=capital,
        share_out_of_range=not (0.0 <= labor <= 1.0),
    )


def derive_panel(observations: Sequence[PanelObservation]) -> list[IndicatorRow]:
    """Derive one row per consecutive year pair of a single country's panel.

    Pairs that straddle a missing year are skipped; nothing is interpolated.
    Returns an empty list (and logs a warning) when no pair is available.
    """
    obs = sorted(observations, key=lambda o: o.year)
    countries = {o.country for o in obs}
    if len(countries) > 1:
        raise InvalidObservation(f"derive_panel expects one country, got {sorted(countries)}")
    for a, b in zip(obs, obs[1:]):
        if a.year == b.year:
            raise DuplicateYear(f"{a.country}: duplicate observation for {a.year}")

    rows = [derive_row(a, b) for a, b in zip(obs, obs[1:]) if b.year == a.year + 1]
    if not rows:
        country = next(iter(countries), "?")
        logger.warning("%s: no consecutive year pair among %d observations", country, len(obs))
    for row in rows:
        if row.share_out_of_range:
            logger.warning("%s %d: labor share in consumption %.4f outside [0, 1]",
                           row.country, row.year, row.labor_share_cons)
    return rows


def _mean(values: Iterable[float]) -> float:
    values = list(values)
    return math.fsum(values) / len(values)


def summarize(
    rows: Sequence[IndicatorRow],
    income: Optional[Mapping[int, float]] = None,
    threshold: float = DEFAULT_THRESHOLD,
) -> CountrySummary:
    """Period averages of a country's annual rates and shares.

    Means are unweighted means of the annual ratios. Income per capita is
    averaged over the row years for which it is known (None if none are).
    The high-cash-flow flag uses a strict ``avg_f > threshold``.
    """
    if not rows:
        raise EmptyDerivation("cannot summarize an empty set of rows")
    countries = {r.country for r in rows}
    if len(countries) != 1:
        raise InvalidObservation(f"summarize expects one country, got {sorted(countries)}")

    avg_f = _mean(r.f_rate for r in rows)
    avg_income = None
    if income:
        known = [income[r.year] for r in rows if income.get(r.year) is not None]
        if known:
            avg_income = _mean(known)
    return CountrySummary(
        country=rows[0].country,
        n_years=len(rows),
        avg_f=avg_f,
        avg_g=_mean(r.g_rate for r in rows),
        avg_r=_mean(r.r_rate for r in rows),
        avg_labor_share=_mean(r.labor_share_cons for r in rows),
        avg_capital_share=_mean(r.capital_share_cons for r in rows),
        avg_income_per_capita=avg_income,
        high_cash_flow_flag=avg_f > threshold,
    )


@dataclass(frozen=True, slots=True)
class StationaryCheck:
    country: str
    year: int
    g_rate: float
    r_rate: float
    c_rate: float
    is_near_stationary: bool


def stationary_check(
    rows: Iterable[IndicatorRow], epsilon_g: float = DEFAULT_EPSILON_G
) -> list[StationaryCheck]:
    """Consumption-from-capital rate per row and a near-stationary flag.

    Collectively all cash flow from capital is consumed, so c equals f and
    r - c equals g. With g exactly zero, return equals c.
    """
    return [
        StationaryCheck(
            country=row.country,
            year=row.year,
            g_rate=row.g_rate,
            r_rate=row.r_rate,
            c_rate=row.f_rate,
            is_near_stationary=abs(row.g_rate) <= epsilon_g,
        )
        for row in rows
    ]
