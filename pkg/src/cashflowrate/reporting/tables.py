"""Ranked country tables in csv, aligned text, Markdown and LaTeX.

Countries are listed in descending order of average income per capita, ties
broken by ascending country code; countries without income come last.
Fractions are rendered as percents, half-even rounded from their exact
binary value.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from typing import Callable, Sequence

from ..domain import CountrySummary
from ..errors import AccountsError, UnsupportedFormat
from ..indicators import DEFAULT_THRESHOLD

FORMATS = ("csv", "txt", "md", "tex")
DEFAULT_DECIMALS = 1
DEFAULT_MIN_YEARS = 5
LOW_LABOR_SHARE = 0.80

HIGH_F_MARK = "*"
NO_INCOME_MARK = "+"
OUT_OF_RANGE_MARK = "!"


class RenderingError(AccountsError):
    pass


def percent(x: float, decimals: int = DEFAULT_DECIMALS) -> str:
    """``x * 100`` rounded half-even to ``decimals`` places."""
    with localcontext() as ctx:
        ctx.prec = 60
        q = Decimal(1).scaleb(-decimals)
        d = (Decimal(x) * 100).quantize(q, rounding=ROUND_HALF_EVEN)
    if d == 0:
        d = abs(d)
    return f"{d:.{decimals}f}"


def rank_summaries(summaries: Sequence[CountrySummary]) -> list[CountrySummary]:
    """Descending income per capita, ascending code on ties, no-income last."""
    with_income = [s for s in summaries if s.avg_income_per_capita is not None]
    without = [s for s in summaries if s.avg_income_per_capita is None]
    with_income.sort(key=lambda s: (-s.avg_income_per_capita, s.country))
    without.sort(key=lambda s: s.country)
    return with_income + without


@dataclass(frozen=True)
class Column:
    key: str
    label: str
    tex_label: str
    numeric: bool = True


@dataclass
class ReportTable:
    title: str
    columns: list[Column]
    rows: list[tuple[str, list[str], str]]  # (country, cells, markers)
    footnotes: list[str] = field(default_factory=list)

    def render(self, fmt: str) -> str:
        try:
            renderer = _RENDERERS[fmt]
        except KeyError:
            raise UnsupportedFormat(f"unsupported format {fmt!r}; choose from {', '.join(FORMATS)}")
        return renderer(self)


def _render_csv(t: ReportTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([c.key for c in t.columns] + ["flags"])
    for country, cells, marks in t.rows:
        w.writerow([country] + cells + [marks])
    return buf.getvalue()


def _render_txt(t: ReportTable) -> str:
    header = [c.label for c in t.columns]
    body = [[country + marks] + cells for country, cells, marks in t.rows]
    widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]

    def line(cells):
        out = []
        for cell, width, col in zip(cells, widths, t.columns):
            out.append(cell.rjust(width) if col.numeric else cell.ljust(width))
        return "  ".join(out).rstrip()

    lines = [t.title, "", line(header), "  ".join("-" * w for w in widths)]
    lines += [line(r) for r in body]
    if t.footnotes:
        lines += [""] + t.footnotes
    return "\n".join(lines) + "\n"


def _md_escape(text: str) -> str:
    return text.replace("|", "\\|").replace("*", "\\*").replace("_", "\\_")


def _render_md(t: ReportTable) -> str:
    lines = [f"**{t.title}**", ""]
    lines.append("| " + " | ".join(c.label for c in t.columns) + " |")
    lines.append("|" + "|".join("---:" if c.numeric else ":---" for c in t.columns) + "|")
    for country, cells, marks in t.rows:
        lines.append("| " + " | ".join([_md_escape(country + marks)] + cells) + " |")
    if t.footnotes:
        lines.append("")
        lines += [_md_escape(f) + "  " for f in t.footnotes[:-1]] + [_md_escape(t.footnotes[-1])]
    return "\n".join(lines) + "\n"


_TEX_SPECIALS = {
    "\\": r"\textbackslash{}", "&": r"\&", "%": r"\%", "$": r"\$", "#": r"\#",
    "_": r"\_", "{": r"\{", "}": r"\}", "~": r"\textasciitilde{}", "^": r"\textasciicircum{}",
}


def tex_escape(text: str) -> str:
    return "".join(_TEX_SPECIALS.get(ch, ch) for ch in text)


def _render_tex(t: ReportTable) -> str:
    ncol = len(t.columns)
    colspec = "".join("r" if c.numeric else "l" for c in t.columns)
    lines = [
        f"% {tex_escape(t.title)}",
        f"\\begin{{tabular}}{{{colspec}}}",
        "\\hline",
        " & ".join(c.tex_label for c in t.columns) + " \\\\",
        "\\hline",
    ]
    for country, cells, marks in t.rows:
        lines.append(" & ".join([tex_escape(country + marks)] + cells) + " \\\\")
    lines.append("\\hline")
    for note in t.footnotes:
        lines.append(f"\\multicolumn{{{ncol}}}{{l}}{{\\footnotesize {tex_escape(note)}}} \\\\")
    lines.append("\\end{tabular}")
    return "\n".join(lines) + "\n"


_RENDERERS: dict[str, Callable[[ReportTable], str]] = {
    "csv": _render_csv,
    "txt": _render_txt,
    "md": _render_md,
    "tex": _render_tex,
}


def _split_eligible(summaries, min_years):
    eligible = [s for s in summaries if s.n_years >= min_years]
    excluded = sorted(s.country for s in summaries if s.n_years < min_years)
    return eligible, excluded


def _common_footnotes(ranked, excluded, min_years) -> list[str]:
    notes = []
    if any(s.avg_income_per_capita is None for s in ranked):
        notes.append(f"{NO_INCOME_MARK} no income per capita available; ranked last")
    if excluded:
        notes.append(f"excluded (fewer than {min_years} year pairs): {', '.join(excluded)}")
    return notes


def check_rounding_coherence(f: str, g: str, r: str, decimals: int) -> None:
    unit = Decimal(1).scaleb(-decimals)
    gap = abs(Decimal(f) + Decimal(g) - Decimal(r))
    if gap > unit:
        raise RenderingError(f"rendered r={r} differs from f+g={f}+{g} by more than {unit}")


def fgr_table(
    summaries: Sequence[CountrySummary],
    decimals: int = DEFAULT_DECIMALS,
    min_years: int = DEFAULT_MIN_YEARS,
    threshold: float = DEFAULT_THRESHOLD,
) -> ReportTable:
    if not summaries:
        raise RenderingError("no summaries to render")
    eligible, excluded = _split_eligible(summaries, min_years)
    ranked = rank_summaries(eligible)
    rows = []
    for s in ranked:
        f, g, r = (percent(v, decimals) for v in (s.avg_f, s.avg_g, s.avg_r))
        check_rounding_coherence(f, g, r, decimals)
        marks = (HIGH_F_MARK if s.high_cash_flow_flag else "") + (
            NO_INCOME_MARK if s.avg_income_per_capita is None else "")
        rows.append((s.country, [str(s.n_years), f, g, r], marks))
    notes = []
    if any(s.high_cash_flow_flag for s in ranked):
        notes.append(f"{HIGH_F_MARK} average cash flow rate above {percent(threshold, decimals)}%")
    notes += _common_footnotes(ranked, excluded, min_years)
    return ReportTable(
        title="Cash flow rate f, capital growth rate g and rate of return r (% per year, period averages)",
        columns=[
            Column("country", "country", "Country", numeric=False),
            Column("n_years", "years", "Years"),
            Column("f_pct", "f %", r"$f(K)$ (\%)"),
            Column("g_pct", "g %", r"$g(K)$ (\%)"),
            Column("r_pct", "r %", r"$r(K)$ (\%)"),
        ],
        rows=rows,
        footnotes=notes,
    )


def shares_table(
    summaries: Sequence[CountrySummary],
    decimals: int = DEFAULT_DECIMALS,
    min_years: int = DEFAULT_MIN_YEARS,
) -> ReportTable:
    if not summaries:
        raise RenderingError("no summaries to render")
    eligible, excluded = _split_eligible(summaries, min_years)
    ranked = rank_summaries(eligible)
    rows = []
    for s in ranked:
        out_of_range = not 0.0 <= s.avg_labor_share <= 1.0
        marks = (OUT_OF_RANGE_MARK if out_of_range else "") + (
            NO_INCOME_MARK if s.avg_income_per_capita is None else "")
        rows.append((s.country, [str(s.n_years), percent(s.avg_labor_share, decimals),
                                 percent(s.avg_capital_share, decimals)], marks))
    low = sum(1 for s in ranked if s.avg_labor_share < LOW_LABOR_SHARE)
    notes = [f"labor share in consumption below {percent(LOW_LABOR_SHARE, 0)}%: {low} of {len(ranked)} countries"]
    if any(not 0.0 <= s.avg_labor_share <= 1.0 for s in ranked):
        notes.append(f"{OUT_OF_RANGE_MARK} labor share outside 0-100%, likely mismeasurement")
    notes += _common_footnotes(ranked, excluded, min_years)
    return ReportTable(
        title="Labor and capital shares in consumption (% of consumption, period averages)",
        columns=[
            Column("country", "country", "Country", numeric=False),
            Column("n_years", "years", "Years"),
            Column("labor_pct", "labor %", r"Labor (\%)"),
            Column("capital_pct", "capital %", r"Capital (\%)"),
        ],
        rows=rows,
        footnotes=notes,
    )


def render_fgr_table(summaries, fmt: str = "txt", **kwargs) -> str:
    if fmt not in FORMATS:
        raise UnsupportedFormat(f"unsupported format {fmt!r}; choose from {', '.join(FORMATS)}")
    return fgr_table(summaries, **kwargs).render(fmt)


def render_shares_table(summaries, fmt: str = "txt", **kwargs) -> str:
    if fmt not in FORMATS:
        raise UnsupportedFormat(f"unsupported format {fmt!r}; choose from {', '.join(FORMATS)}")
    return shares_table(summaries, **kwargs).render(fmt)


@dataclass(frozen=True)
class CoverageDiagnostics:
    covered: int
    high_f: int
    high_f_upper_half: int
    upper_half: int
    lower_half: int
    low_labor_upper_half: int
    low_labor_lower_half: int

    def lines(self, threshold: float = DEFAULT_THRESHOLD) -> list[str]:
        pct = percent(threshold, 0)
        return [
            f"countries with average f above {pct}%: {self.high_f} of {self.covered}",
            f"  of which in the upper half by income per capita: {self.high_f_upper_half} of {self.high_f}",
            f"upper-half countries with labor share in consumption below 80%: "
            f"{self.low_labor_upper_half} of {self.upper_half}",
            f"lower-half countries with labor share in consumption below 80%: "
            f"{self.low_labor_lower_half} of {self.lower_half}",
        ]


def coverage_diagnostics(
    summaries: Sequence[CountrySummary], min_years: int = DEFAULT_MIN_YEARS
) -> CoverageDiagnostics:
    """Counts for comparing a run against published headline figures.

    Halves are taken over countries with income per capita, in ranked order;
    with an odd count the upper half gets the extra country.
    """
    eligible, _ = _split_eligible(summaries, min_years)
    ranked = [s for s in rank_summaries(eligible) if s.avg_income_per_capita is not None]
    n_upper = (len(ranked) + 1) // 2
    upper, lower = ranked[:n_upper], ranked[n_upper:]
    return CoverageDiagnostics(
        covered=len(eligible),
        high_f=sum(s.high_cash_flow_flag for s in eligible),
        high_f_upper_half=sum(s.high_cash_flow_flag for s in upper),
        upper_half=len(upper),
        lower_half=len(lower),
        low_labor_upper_half=sum(s.avg_labor_share < LOW_LABOR_SHARE for s in upper),
        low_labor_lower_half=sum(s.avg_labor_share < LOW_LABOR_SHARE for s in lower),
    )


def summary_eligible(summaries: Sequence[CountrySummary], min_years: int) -> list[CountrySummary]:
    return _split_eligible(summaries, min_years)[0]

