"""Long-format national-accounts ingestion.

Input files are delimited UTF-8 text with a header naming at least the
``country``, ``variable``, ``year`` and ``value`` columns, in any order; extra
columns (``percentile``, ``age``, ``pop``) are tolerated. This is the layout of
World Inequality Database bulk exports.

Variables are mapped onto the model as follows (WID concept codes)::

    K    <- mnweal                  market-value national wealth
    C    <- mcongo + mconhn         government + household/NPISH consumption
    Pi   <- wlabsh * mnninc         labor share of net national income
    rank <- anninc / xlcusp         income per capita at PPP, ranking only

Full WID codes such as ``mnweal999i`` are recognized by their six-letter
concept prefix. A remapping table can point any other code at a concept.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterable, Mapping, Optional, Union

from .domain import PanelObservation
from .errors import InvalidConversionFactor, IoFailure, MalformedHeader, ValidationError

logger = logging.getLogger(__name__)

CONCEPTS = {
    "mnninc": "net national income",
    "wlabsh": "labor share of net national income",
    "xlcusp": "PPP conversion factor, local currency per USD",
    "anninc": "average national income per capita",
    "mnweal": "market-value national wealth",
    "mcongo": "government final consumption expenditure",
    "mconhn": "household and NPISH final consumption expenditure",
}
REQUIRED_COLUMNS = ("country", "variable", "year", "value")
AGGREGATE_PERCENTILE = "p0p100"
_WID_CODE = re.compile(r"^([a-z]{6})(\d{3})([a-z])$")
# Preferred age/population suffixes when several full codes share a concept.
_SUFFIX_PREFERENCE = ("", "999i", "992i")


@dataclass(frozen=True, slots=True)
class RawRecord:
    country: str
    variable: str
    year: int
    value: float
    line: int = 0


@dataclass
class ParseDiagnostics:
    rows: int = 0
    accepted: int = 0
    malformed: list[tuple[int, str]] = field(default_factory=list)
    unrecognized: Counter = field(default_factory=Counter)

    @property
    def n_malformed(self) -> int:
        return len(self.malformed)

    @property
    def n_unrecognized(self) -> int:
        return sum(self.unrecognized.values())

    def is_conserved(self) -> bool:
        return self.rows == self.accepted + self.n_malformed + self.n_unrecognized

    def merge(self, other: "ParseDiagnostics") -> None:
        self.rows += other.rows
        self.accepted += other.accepted
        self.malformed.extend(other.malformed)
        self.unrecognized.update(other.unrecognized)

    def lines(self) -> list[str]:
        out = [
            f"rows parsed: {self.rows}",
            f"accepted: {self.accepted}",
            f"malformed: {self.n_malformed}",
            f"unrecognized: {self.n_unrecognized}",
        ]
        out += [f"  line {ln}: {why}" for ln, why in self.malformed]
        out += [f"  unrecognized {code}: {n}" for code, n in sorted(self.unrecognized.items())]
        return out


def resolve_concept(code: str, variable_map: Optional[Mapping[str, str]] = None) -> Optional[str]:
    """Map a variable code to one of :data:`CONCEPTS`, or None."""
    code = code.strip()
    if variable_map and code in variable_map:
        return variable_map[code]
    if code in CONCEPTS:
        return code
    m = _WID_CODE.match(code)
    if m and m.group(1) in CONCEPTS:
        return m.group(1)
    return None


def _code_rank(code: str) -> tuple[int, str]:
    m = _WID_CODE.match(code)
    suffix = m.group(2) + m.group(3) if m else ""
    pref = _SUFFIX_PREFERENCE.index(suffix) if suffix in _SUFFIX_PREFERENCE else len(_SUFFIX_PREFERENCE)
    return pref, code


def _detect_delimiter(header: str) -> str:
    return ";" if header.count(";") >= header.count(",") and ";" in header else ","


def _read_bytes(source: Union[BinaryIO, bytes, str, Path]) -> bytes:
    try:
        if isinstance(source, bytes):
            return source
        if isinstance(source, (str, Path)):
            return Path(source).read_bytes()
        return source.read()
    except OSError as exc:
        raise IoFailure(f"cannot read input: {exc}") from exc


def deduplicate(records: Iterable[RawRecord]) -> tuple[list[RawRecord], list[tuple[int, str]]]:
    """Keep one record per (country, variable, year).

    Exact repeats collapse to one; conflicting values drop the key entirely so
    that the result never depends on record order.
    """
    groups: dict[tuple[str, str, int], list[RawRecord]] = defaultdict(list)
    for rec in records:
        groups[(rec.country, rec.variable, rec.year)].append(rec)
    kept, problems = [], []
    for key in sorted(groups):
        recs = groups[key]
        if len(recs) == 1:
            kept.append(recs[0])
            continue
        recs.sort(key=lambda r: r.line)
        if len({r.value for r in recs}) == 1:
            kept.append(recs[0])
            problems += [(r.line, f"duplicate {'/'.join(map(str, key))}") for r in recs[1:]]
        else:
            problems += [(r.line, f"conflicting duplicate {'/'.join(map(str, key))}") for r in recs]
    return kept, problems


def parse_long_file(
    source: Union[BinaryIO, bytes, str, Path],
    delimiter: Optional[str] = None,
    variable_map: Optional[Mapping[str, str]] = None,
) -> tuple[list[RawRecord], ParseDiagnostics]:
    """Parse one long-format file into records plus diagnostics.

    Every data row lands in exactly one of accepted, malformed (with its line
    number) or unrecognized (tallied by code). Records come back sorted by
    (country, variable, year).
    """
    raw = _read_bytes(source)
    try:
        text = raw.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise IoFailure(f"input is not valid UTF-8: {exc}") from exc

    lines = text.splitlines()
    header_idx = next((i for i, ln in enumerate(lines) if ln.strip()), None)
    if header_idx is None:
        raise MalformedHeader("input is empty")
    delim = delimiter or _detect_delimiter(lines[header_idx])
    header = [h.strip().lower() for h in next(csv.reader([lines[header_idx]], delimiter=delim))]
    missing = [c for c in REQUIRED_COLUMNS if c not in header]
    if missing:
        raise MalformedHeader(f"header lacks required column(s): {', '.join(missing)}")
    col = {name: header.index(name) for name in REQUIRED_COLUMNS}
    pct_col = header.index("percentile") if "percentile" in header else None
    width = max(col.values()) + 1 if pct_col is None else max(max(col.values()), pct_col) + 1

    diag = ParseDiagnostics()
    candidates = []
    for lineno, fields in enumerate(
        csv.reader(lines[header_idx + 1:], delimiter=delim), start=header_idx + 2
    ):
        if not fields or all(not f.strip() for f in fields):
            continue
        diag.rows += 1
        if len(fields) < width:
            diag.malformed.append((lineno, f"expected at least {width} fields, got {len(fields)}"))
            continue
        country = fields[col["country"]].strip()
        code = fields[col["variable"]].strip()
        if not country or not code:
            diag.malformed.append((lineno, "empty country or variable"))
            continue
        try:
            year = int(fields[col["year"]].strip())
        except ValueError:
            diag.malformed.append((lineno, f"non-integer year {fields[col['year']]!r}"))
            continue
        try:
            value = float(fields[col["value"]].strip())
        except ValueError:
            diag.malformed.append((lineno, f"non-numeric value {fields[col['value']]!r}"))
            continue
        if not math.isfinite(value):
            diag.malformed.append((lineno, f"non-finite value {fields[col['value']]!r}"))
            continue
        if resolve_concept(code, variable_map) is None:
            diag.unrecognized[code] += 1
            continue
        if pct_col is not None and fields[pct_col].strip() not in ("", AGGREGATE_PERCENTILE):
            diag.unrecognized[f"{code}@{fields[pct_col].strip()}"] += 1
            continue
        candidates.append(RawRecord(country, code, year, value, lineno))

    records, dupes = deduplicate(candidates)
    diag.malformed.extend(dupes)
    diag.malformed.sort()
    diag.accepted = len(records)
    return records, diag


def load_variable_map(source: Union[str, Path]) -> dict[str, str]:
    """Read a ``code,concept`` remapping table (header required)."""
    raw = _read_bytes(source).decode("utf-8-sig")
    lines = [ln for ln in raw.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise MalformedHeader("variable map is empty")
    reader = csv.DictReader(io.StringIO("\n".join(lines)), delimiter=_detect_delimiter(lines[0]))
    if not reader.fieldnames or {"code", "concept"} - {f.strip().lower() for f in reader.fieldnames}:
        raise MalformedHeader("variable map needs 'code' and 'concept' columns")
    mapping = {}
    for row in reader:
        row = {k.strip().lower(): (v or "").strip() for k, v in row.items()}
        if row["concept"] not in CONCEPTS:
            raise ValidationError(f"unknown concept {row['concept']!r} for code {row['code']!r}")
        mapping[row["code"]] = row["concept"]
    return mapping


def compute_pay(mnninc: Optional[float], wlabsh: Optional[float]) -> Optional[float]:
    """Pay as labor share times net national income.

    The labor share already counts 70% of mixed income as pay, so nothing is
    added here. Returns None when either input is missing.
    """
    if mnninc is None or wlabsh is None:
        return None
    if not 0.0 <= wlabsh <= 1.0:
        logger.warning("labor share %r outside [0, 1]; passed through", wlabsh)
    return wlabsh * mnninc


def aggregate_consumption(mcongo: Optional[float], mconhn: Optional[float]) -> Optional[float]:
    if mcongo is None or mconhn is None:
        return None
    return mcongo + mconhn


def ppp_convert(value: float, xlcusp: float) -> float:
    """Local currency to PPP dollars; ``xlcusp`` is local units per PPP dollar."""
    if not math.isfinite(xlcusp) or xlcusp <= 0:
        raise InvalidConversionFactor(f"PPP factor must be positive, got {xlcusp!r}")
    return value / xlcusp


@dataclass
class CountryDiagnostics:
    country: str
    years_seen: list[int] = field(default_factory=list)
    years_complete: list[int] = field(default_factory=list)
    missing: dict[int, list[str]] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def lines(self) -> list[str]:
        out = [f"{self.country}: {len(self.years_complete)} of {len(self.years_seen)} years complete"]
        out += [f"  {y}: {', '.join(why)}" for y, why in sorted(self.missing.items())]
        out += [f"  warning: {w}" for w in self.warnings]
        return out


@dataclass
class PanelAssembly:
    panels: dict[str, list[PanelObservation]]
    diagnostics: dict[str, CountryDiagnostics]


def _pick(values: dict[str, float]) -> float:
    return values[min(values, key=_code_rank)]


def assemble_panels(
    records: Iterable[RawRecord], variable_map: Optional[Mapping[str, str]] = None
) -> PanelAssembly:
    """Build per-country panels of complete years from parsed records.

    A year enters a panel iff consumption, pay and capital are all computable
    there, capital is positive and consumption is positive. Income per capita
    is attached when anninc and a PPP factor are known: the same year's factor,
    else the factor from the latest year that has one.
    """
    # country -> concept -> year -> {code: value}
    table: dict[str, dict[str, dict[int, dict[str, float]]]] = defaultdict(
        lambda: defaultdict(lambda: defaultdict(dict)))
    for rec in records:
        concept = resolve_concept(rec.variable, variable_map)
        if concept is None:
            continue
        table[rec.country][concept][rec.year][rec.variable] = rec.value

    panels: dict[str, list[PanelObservation]] = {}
    diagnostics: dict[str, CountryDiagnostics] = {}
    for country in sorted(table):
        data = {c: {y: _pick(v) for y, v in by_year.items()} for c, by_year in table[country].items()}
        get = lambda concept, year: data.get(concept, {}).get(year)  # noqa: E731
        diag = CountryDiagnostics(country)
        diagnostics[country] = diag

        ppp = data.get("xlcusp", {})
        latest_ppp = ppp[max(ppp)] if ppp else None
        years = sorted(set().union(*(set(v) for v in data.values())))
        diag.years_seen = years
        observations = []
        for year in years:
            reasons = [f"missing {c}" for c in ("mnweal", "mcongo", "mconhn", "mnninc", "wlabsh")
                       if get(c, year) is None]
            K = get("mnweal", year)
            if K is not None and K <= 0:
                reasons.append("non-positive capital")
            C = aggregate_consumption(get("mcongo", year), get("mconhn", year))
            if C is not None and C <= 0:
                reasons.append("non-positive consumption")
            wlabsh = get("wlabsh", year)
            pay = compute_pay(get("mnninc", year), wlabsh)
            if pay is not None and pay < 0:
                reasons.append("negative pay")
            if reasons:
                diag.missing[year] = reasons
                continue
            if not 0.0 <= wlabsh <= 1.0:
                diag.warnings.append(f"{year}: labor share {wlabsh!r} outside [0, 1]")

            income = None
            anninc = get("anninc", year)
            factor = ppp.get(year, latest_ppp)
            if anninc is not None and factor is not None:
                try:
                    income = ppp_convert(anninc, factor)
                except InvalidConversionFactor as exc:
                    diag.warnings.append(f"{year}: {exc}")
            observations.append(PanelObservation(country, year, C, pay, K, income))
            diag.years_complete.append(year)

        if not any(o.income_per_capita is not None for o in observations):
            diag.warnings.append("no income per capita; ranked last in reports")
        if observations:
            panels[country] = observations
        else:
            diag.warnings.append("no usable years; excluded from panel")
    return PanelAssembly(panels, diagnostics)
