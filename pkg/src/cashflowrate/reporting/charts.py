"""Per-country line charts rendered to deterministic SVG.

Years run along x with integer ticks; y is in percent with horizontal
gridlines. A solid zero line is always drawn and the band below it shaded
whenever a series goes negative. Lines break at missing years instead of
bridging them.
"""

from __future__ import annotations

import io
import logging
import math
from typing import Mapping, Sequence

import matplotlib
from matplotlib.figure import Figure
from matplotlib.ticker import MultipleLocator, PercentFormatter

from ..domain import IndicatorRow
from ..errors import InsufficientSeries, UnsupportedFormat
from . import style

logger = logging.getLogger(__name__)


def _year_step(span: int) -> int:
    for step in (1, 2, 5, 10, 20, 25, 50):
        if span / step <= 12:
            return step
    return 100


def _with_breaks(years: Sequence[int], values: Sequence[float]):
    xs, ys = [], []
    for i, (year, v) in enumerate(zip(years, values)):
        if i and year != years[i - 1] + 1:
            xs.append(year - 0.5)
            ys.append(math.nan)
        xs.append(year)
        ys.append(v)
    return xs, ys


def chart_figure(rows: Sequence[IndicatorRow], series: str = "rates") -> Figure:
    """Build (but do not save) the chart for one country's rows."""
    if series not in style.SERIES:
        raise UnsupportedFormat(f"unknown series {series!r}; choose from {', '.join(style.SERIES)}")
    if len(rows) < 2:
        raise InsufficientSeries(f"a chart needs at least 2 rows, got {len(rows)}")
    countries = {r.country for r in rows}
    if len(countries) != 1:
        raise InsufficientSeries(f"rows span several countries: {sorted(countries)}")
    rows = sorted(rows, key=lambda r: r.year)
    years = [r.year for r in rows]

    fig = Figure(figsize=style.FIGSIZE, dpi=style.DPI)
    ax = fig.add_subplot()
    lowest = 0.0
    for key, label, color in style.SERIES[series]:
        values = [getattr(r, key) for r in rows]
        lowest = min(lowest, min(values))
        xs, ys = _with_breaks(years, values)
        ax.plot(xs, ys, color=color, label=label, gid=f"series-{key}")

    ax.set_xlim(years[0] - 0.5, years[-1] + 0.5)
    ax.autoscale(axis="y")
    ax.margins(y=0.08)
    ymin, ymax = ax.get_ylim()
    ax.set_ylim(min(ymin, 0.0), max(ymax, 0.0))
    if lowest < 0:
        ax.axhspan(ax.get_ylim()[0], 0.0, color=style.NEGATIVE_FILL, zorder=0, gid="negative-region")
    ax.axhline(0.0, color=style.ZERO_LINE, linewidth=0.9, zorder=1.5, gid="zero-line")

    ax.xaxis.set_major_locator(MultipleLocator(_year_step(years[-1] - years[0])))
    ax.xaxis.set_major_formatter(lambda x, _pos: f"{int(round(x))}")
    ax.yaxis.set_major_formatter(PercentFormatter(xmax=1.0, decimals=0))
    ax.yaxis.grid(True)
    ax.set_axisbelow(True)
    ax.set_xlabel("year")
    ax.set_ylabel("% per year" if series == "rates" else "% of consumption")
    ax.set_title(style.TITLES[series].format(country=rows[0].country))
    ax.legend(loc="upper left", bbox_to_anchor=(1.0, 1.0))
    fig.subplots_adjust(left=0.08, right=0.72, bottom=0.12, top=0.9)
    return fig


def render_line_chart(rows: Sequence[IndicatorRow], series: str = "rates") -> bytes:
    """One country's chart as SVG bytes; identical input gives identical bytes."""
    with matplotlib.rc_context(style.CHART_RC):
        fig = chart_figure(rows, series)
        buf = io.BytesIO()
        fig.savefig(buf, format="svg", metadata=style.SVG_METADATA)
    return buf.getvalue()


def render_line_charts(
    rows_by_country: Mapping[str, Sequence[IndicatorRow]], series: str = "rates"
) -> dict[str, bytes]:
    """SVG per country, skipping (and logging) countries with fewer than 2 rows."""
    out = {}
    for country in sorted(rows_by_country):
        rows = rows_by_country[country]
        if len(rows) < 2:
            logger.warning("%s: %d row(s), no chart drawn", country, len(rows))
            continue
        out[country] = render_line_chart(rows, series)
    return out
