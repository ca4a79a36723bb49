"""Shared data model: raw country-year observations, derived indicators, summaries.

Units: flows (consumption, pay, cash flow, capital growth, net profit) are
currency per year in a country's own reporting currency; capital is a
currency stock measured at year end; rates and shares are plain fractions
(0.05 means 5% per year). Percent rendering happens only in reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import InvalidObservation, NonPositiveCapital, ValidationError

SHARE_SUM_TOL = 1e-12
WEIGHT_SUM_TOL = 1e-9


def _require_finite(name: str, value: float, exc=InvalidObservation) -> None:
    if not isinstance(value, (int, float)) or not math.isfinite(value):
        raise exc(f"{name} must be a finite number, got {value!r}")


@dataclass(frozen=True, slots=True)
class PanelObservation:
    """One country-year of raw aggregates."""

    country: str
    year: int
    consumption_C: float
    pay_Pi: float
    capital_K: float
    income_per_capita: Optional[float] = None

    def __post_init__(self):
        _require_finite("consumption_C", self.consumption_C)
        _require_finite("pay_Pi", self.pay_Pi)
        _require_finite("capital_K", self.capital_K)
        if self.capital_K <= 0:
            raise NonPositiveCapital(
                f"{self.country} {self.year}: capital must be positive, got {self.capital_K!r}")
        if self.consumption_C < 0:
            raise InvalidObservation(f"{self.country} {self.year}: negative consumption")
        if self.pay_Pi < 0:
            raise InvalidObservation(f"{self.country} {self.year}: negative pay")
        if self.income_per_capita is not None:
            _require_finite("income_per_capita", self.income_per_capita)


@dataclass(frozen=True, slots=True)
class IndicatorRow:
    """Indicators for year ``year``, derived from the observations of
    ``year - 1`` and ``year``. Rates divide by ``prev_capital_K``."""

    country: str
    year: int
    prev_capital_K: float
    cash_flow_F: float
    delta_K: float
    net_profit_P: float
    f_rate: float
    g_rate: float
    r_rate: float
    labor_share_cons: float
    capital_share_cons: float
    share_out_of_range: bool = False

    @property
    def negative_cash_flow(self) -> bool:
        return self.cash_flow_F < 0


@dataclass(frozen=True, slots=True)
class CountrySummary:
    country: str
    n_years: int
    avg_f: float
    avg_g: float
    avg_r: float
    avg_labor_share: float
    avg_capital_share: float
    avg_income_per_capita: Optional[float]
    high_cash_flow_flag: bool


REFERENCE_COMPONENTS = ("dividend_rate", "rental_rate", "bill_rate", "bond_rate")


@dataclass(frozen=True, slots=True)
class ReferenceSeries:
    """Direct-research cash-flow rates for one country, as period averages:
    equity dividend income, rental income, real bill rate, real bond rate."""

    country: str
    dividend_rate: float
    rental_rate: float
    bill_rate: float
    bond_rate: float
    weights: Optional[tuple[float, float, float, float]] = None

    def __post_init__(self):
        for name in REFERENCE_COMPONENTS:
            _require_finite(name, getattr(self, name), ValidationError)
        if self.weights is not None:
            if len(self.weights) != 4:
                raise ValidationError(f"{self.country}: expected 4 weights, got {len(self.weights)}")
            if any(not math.isfinite(w) or w < 0 for w in self.weights):
                raise ValidationError(f"{self.country}: weights must be finite and nonnegative")
            if abs(math.fsum(self.weights) - 1.0) > WEIGHT_SUM_TOL:
                raise ValidationError(
                    f"{self.country}: weights sum to {math.fsum(self.weights)!r}, not 1")

    @property
    def components(self) -> tuple[float, float, float, float]:
        return (self.dividend_rate, self.rental_rate, self.bill_rate, self.bond_rate)

    @property
    def effective_weights(self) -> tuple[float, float, float, float]:
        return self.weights if self.weights is not None else (0.25, 0.25, 0.25, 0.25)

    def weighted_average(self) -> float:
        return math.fsum(w * x for w, x in zip(self.effective_weights, self.components))
