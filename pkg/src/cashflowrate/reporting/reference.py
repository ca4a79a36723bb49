"""Side-by-side comparison with directly researched return components.

The reference file is supplied by the user (nothing is bundled). It is
delimited text with columns ``country, dividend_rate, rental_rate,
bill_rate, bond_rate`` and optionally ``w1..w4``; rates are fractions.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

from ..domain import REFERENCE_COMPONENTS, CountrySummary, ReferenceSeries
from ..errors import IoFailure, MalformedHeader, NoOverlap, UnsupportedFormat, ValidationError
from .tables import (
    DEFAULT_DECIMALS,
    FORMATS,
    Column,
    ReportTable,
    percent,
    rank_summaries,
)

DEFAULT_BAND = (0.03, 0.06)
WEIGHT_COLUMNS = ("w1", "w2", "w3", "w4")


def load_reference(source: Union[str, Path, bytes], delimiter: str | None = None) -> list[ReferenceSeries]:
    try:
        raw = source if isinstance(source, bytes) else Path(source).read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read reference file: {exc}") from exc
    text = raw.decode("utf-8-sig")
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise MalformedHeader("reference file is empty")
    delim = delimiter or (";" if ";" in lines[0] else ",")
    reader = csv.reader(io.StringIO("\n".join(lines)), delimiter=delim)
    header = [h.strip().lower() for h in next(reader)]
    required = ("country",) + REFERENCE_COMPONENTS
    missing = [c for c in required if c not in header]
    if missing:
        raise MalformedHeader(f"reference header lacks: {', '.join(missing)}")
    has_weights = [w in header for w in WEIGHT_COLUMNS]
    if any(has_weights) and not all(has_weights):
        raise MalformedHeader("weights need all four columns w1..w4")

    out, seen = [], set()
    for lineno, row in enumerate(reader, start=2):
        cells = dict(zip(header, (c.strip() for c in row)))
        country = cells.get("country", "")
        if not country:
            raise ValidationError(f"reference line {lineno}: empty country")
        if country in seen:
            raise ValidationError(f"reference line {lineno}: duplicate country {country}")
        seen.add(country)
        try:
            comps = [float(cells[c]) for c in REFERENCE_COMPONENTS]
            weights = None
            if all(has_weights) and any(cells.get(w, "") for w in WEIGHT_COLUMNS):
                weights = tuple(float(cells[w]) for w in WEIGHT_COLUMNS)
        except (KeyError, ValueError) as exc:
            raise ValidationError(f"reference line {lineno}: {exc}") from exc
        out.append(ReferenceSeries(country, *comps, weights=weights))
    return out


@dataclass(frozen=True)
class ComparisonRow:
    summary: CountrySummary
    reference: ReferenceSeries
    weighted_average: float
    deviation: float
    weights_defaulted: bool

    @property
    def country(self) -> str:
        return self.summary.country


@dataclass(frozen=True)
class Comparison:
    rows: list[ComparisonRow]
    band: tuple[float, float]

    @property
    def ours_in_band(self) -> int:
        lo, hi = self.band
        return sum(lo <= r.summary.avg_f <= hi for r in self.rows)

    @property
    def reference_in_band(self) -> int:
        lo, hi = self.band
        return sum(lo <= r.weighted_average <= hi for r in self.rows)


def compare(
    summaries: Sequence[CountrySummary],
    references: Sequence[ReferenceSeries],
    band: tuple[float, float] = DEFAULT_BAND,
) -> Comparison:
    lo, hi = band
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ValidationError(f"band must satisfy lower < upper, got {band}")
    by_country = {r.country: r for r in references}
    rows = []
    for s in rank_summaries([s for s in summaries if s.country in by_country]):
        ref = by_country[s.country]
        avg = ref.weighted_average()
        rows.append(ComparisonRow(s, ref, avg, s.avg_f - avg, ref.weights is None))
    if not rows:
        raise NoOverlap("no country appears in both the summaries and the reference file")
    return Comparison(rows, (lo, hi))


def comparison_table(comparison: Comparison, decimals: int = DEFAULT_DECIMALS) -> ReportTable:
    lo, hi = comparison.band
    rows = []
    for r in comparison.rows:
        s, ref = r.summary, r.reference
        cells = [percent(v, decimals) for v in
                 (s.avg_f, s.avg_g, s.avg_r, *ref.components, r.weighted_average, r.deviation)]
        rows.append((s.country, cells, ""))
    n = len(comparison.rows)
    notes = [
        f"our f within {percent(lo, decimals)}-{percent(hi, decimals)}%: {comparison.ours_in_band} of {n}",
        f"reference weighted average within {percent(lo, decimals)}-{percent(hi, decimals)}%: "
        f"{comparison.reference_in_band} of {n}",
    ]
    if any(r.weights_defaulted for r in comparison.rows):
        notes.append("weights: equal (0.25 each) where the reference file gives none")
    return ReportTable(
        title="Derived rates beside directly researched cash-flow components (% per year)",
        columns=[
            Column("country", "country", "Country", numeric=False),
            Column("f_pct", "f %", r"$f(K)$"),
            Column("g_pct", "g %", r"$g(K)$"),
            Column("r_pct", "r %", r"$r(K)$"),
            Column("dividend_pct", "dividend %", "Dividend"),
            Column("rental_pct", "rental %", "Rental"),
            Column("bill_pct", "bill %", "Bills"),
            Column("bond_pct", "bond %", "Bonds"),
            Column("weighted_pct", "weighted %", "Weighted"),
            Column("deviation_pct", "f - weighted", r"$f(K)-$weighted"),
        ],
        rows=rows,
        footnotes=notes,
    )


def compare_with_reference(
    summaries: Sequence[CountrySummary],
    references: Sequence[ReferenceSeries],
    fmt: str = "txt",
    band: tuple[float, float] = DEFAULT_BAND,
    decimals: int = DEFAULT_DECIMALS,
) -> str:
    if fmt not in FORMATS:
        raise UnsupportedFormat(f"unsupported format {fmt!r}; choose from {', '.join(FORMATS)}")
    return comparison_table(compare(summaries, references, band), decimals).render(fmt)
