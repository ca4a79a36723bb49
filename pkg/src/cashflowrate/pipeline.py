"""Panel to indicators to summaries, for every country at once."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .domain import CountrySummary, IndicatorRow, PanelObservation
from .indicators import (
    DEFAULT_EPSILON_G,
    DEFAULT_THRESHOLD,
    StationaryCheck,
    derive_panel,
    stationary_check,
    summarize,
)


@dataclass
class ComputeResult:
    rows: dict[str, list[IndicatorRow]]
    summaries: list[CountrySummary]
    stationary: list[StationaryCheck]
    skipped: list[str] = field(default_factory=list)

    @property
    def all_rows(self) -> list[IndicatorRow]:
        return [r for country in sorted(self.rows) for r in self.rows[country]]


def compute(
    panels: Mapping[str, Sequence[PanelObservation]],
    threshold: float = DEFAULT_THRESHOLD,
    epsilon_g: float = DEFAULT_EPSILON_G,
) -> ComputeResult:
    """Derive rows, summaries and stationary checks per country.

    Countries without a single consecutive year pair are listed in
    ``skipped`` and left out of the summaries.
    """
    rows, summaries, stationary, skipped = {}, [], [], []
    for country in sorted(panels):
        obs = panels[country]
        country_rows = derive_panel(obs)
        if not country_rows:
            skipped.append(country)
            continue
        income = {o.year: o.income_per_capita for o in obs if o.income_per_capita is not None}
        rows[country] = country_rows
        summaries.append(summarize(country_rows, income, threshold))
        stationary.extend(stationary_check(country_rows, epsilon_g))
    return ComputeResult(rows, summaries, stationary, skipped)


def group_rows(rows: Sequence[IndicatorRow]) -> dict[str, list[IndicatorRow]]:
    out: dict[str, list[IndicatorRow]] = {}
    for r in rows:
        out.setdefault(r.country, []).append(r)
    return {c: sorted(v, key=lambda r: r.year) for c, v in sorted(out.items())}


def group_panel(observations: Sequence[PanelObservation]) -> dict[str, list[PanelObservation]]:
    out: dict[str, list[PanelObservation]] = {}
    for o in observations:
        out.setdefault(o.country, []).append(o)
    return {c: sorted(v, key=lambda o: o.year) for c, v in sorted(out.items())}
