import csv
import random
from pathlib import Path

import pytest

from cashflowrate.domain import PanelObservation

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"
FIXTURE_WID = DATA / "fixture_wid.csv"


def _typed(value: str):
    if value in ("true", "false"):
        return value == "true"
    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        return value


def read_table(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return [{k: _typed(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def rel(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


def synthetic_wid(n_countries: int, n_years: int, seed: int = 7, start: int = 1960) -> str:
    """A WID-style long file where every country-year is complete."""
    rng = random.Random(seed)
    out = ["country;variable;percentile;year;value;age;pop"]
    for i in range(n_countries):
        code = f"C{i:02d}"
        K = rng.uniform(2000, 9000)
        for year in range(start, start + n_years):
            K *= 1 + rng.uniform(-0.05, 0.08)
            mcongo, mconhn = rng.uniform(100, 250), rng.uniform(500, 900)
            values = {
                "mnweal": K, "mcongo": mcongo, "mconhn": mconhn,
                "mnninc": (mcongo + mconhn) * rng.uniform(1.0, 1.3), "wlabsh": rng.uniform(0.45, 0.75),
                "anninc": rng.uniform(5000, 80000), "xlcusp": rng.uniform(0.5, 30),
            }
            for var, v in values.items():
                out.append(f"{code};{var}999i;p0p100;{year};{v!r};999;i")
    return "\n".join(out) + "\n"


def panel(country: str, years, C, Pi, K, income=None) -> list[PanelObservation]:
    def at(x, i):
        return x[i] if isinstance(x, (list, tuple)) else x
    return [PanelObservation(country, y, at(C, i), at(Pi, i), at(K, i), at(income, i))
            for i, y in enumerate(years)]


@pytest.fixture
def fixture_ledger():
    return read_table(DATA / "fixture_ledger.csv")


@pytest.fixture
def fixture_summary():
    return read_table(DATA / "fixture_summary.csv")


ACCEPTANCE_LINES: list[str] = []


def record(number: int, title: str, passed: bool, detail: str) -> None:
    """Keep one status line per acceptance criterion and echo it."""
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
