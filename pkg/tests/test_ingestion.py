import io
import logging
import random

import pytest
from hypothesis import given, settings, strategies as st

from cashflowrate.errors import InvalidConversionFactor, IoFailure, MalformedHeader, ValidationError
from cashflowrate.ingestion import (
    CONCEPTS,
    RawRecord,
    aggregate_consumption,
    assemble_panels,
    compute_pay,
    deduplicate,
    load_variable_map,
    parse_long_file,
    ppp_convert,
    resolve_concept,
)

from conftest import FIXTURE_WID, read_table, DATA


def test_single_row():
    recs, diag = parse_long_file(b"country;variable;year;value\nAAA;mnweal;2000;1000\n")
    assert recs == [RawRecord("AAA", "mnweal", 2000, 1000.0, 2)]
    assert diag.is_conserved() and diag.n_malformed == 0


def test_non_numeric_value_reported_with_line():
    text = b"country;variable;year;value\nAAA;mnweal;2000;1000\nAAA;mnweal;2001;n/a\n"
    recs, diag = parse_long_file(text)
    assert len(recs) == 1
    assert diag.malformed == [(3, "non-numeric value 'n/a'")]
    assert diag.is_conserved()


def test_comma_delimiter_and_extra_columns():
    text = b"pop,country,age,variable,year,value\ni,AAA,999,mcongo,2000,5\n"
    recs, _ = parse_long_file(text)
    assert recs[0].value == 5.0 and recs[0].variable == "mcongo"


def test_delimiter_override():
    text = b"country,variable,year,value\nAAA,mnweal,2000,1\n"
    with pytest.raises(MalformedHeader):
        parse_long_file(text, delimiter=";")


def test_missing_column():
    with pytest.raises(MalformedHeader, match="value"):
        parse_long_file(b"country;variable;year\nAAA;mnweal;2000\n")


def test_unreadable_stream(tmp_path):
    with pytest.raises(IoFailure):
        parse_long_file(tmp_path / "absent.csv")
    with pytest.raises(IoFailure):
        parse_long_file(b"country;variable;year;value\n\xff\xfe;x;1;2\n")


def test_file_object():
    recs, _ = parse_long_file(io.BytesIO(b"country;variable;year;value\nB;mnweal;2000;1\n"))
    assert len(recs) == 1


def test_resolve_concept():
    assert resolve_concept("mnweal999i") == "mnweal"
    assert resolve_concept("mnweal") == "mnweal"
    assert resolve_concept("npopul999i") is None
    assert resolve_concept("wealth", {"wealth": "mnweal"}) == "mnweal"


def _write_full(n_countries=3, n_years=10, seed=0):
    rng = random.Random(seed)
    lines = ["country;variable;year;value"]
    for c in range(n_countries):
        for var in CONCEPTS:
            for y in range(2000, 2000 + n_years):
                lines.append(f"K{c};{var};{y};{rng.uniform(1, 1000)!r}")
    return "\n".join(lines) + "\n", lines[1:]


def test_round_trip_210_records():
    text, lines = _write_full()
    recs, diag = parse_long_file(text.encode())
    assert len(recs) == 210
    assert diag.n_malformed == 0 and diag.n_unrecognized == 0 and diag.is_conserved()
    expected = sorted((ln.split(";")[0], ln.split(";")[1], int(ln.split(";")[2]), float(ln.split(";")[3]))
                      for ln in lines)
    assert [(r.country, r.variable, r.year, r.value) for r in recs] == expected


@settings(max_examples=25)
@given(st.randoms(use_true_random=False))
def test_order_independence(rnd):
    text, lines = _write_full(2, 4)
    shuffled = lines[:]
    rnd.shuffle(shuffled)
    a, _ = parse_long_file(text.encode())
    b, _ = parse_long_file(("country;variable;year;value\n" + "\n".join(shuffled)).encode())
    strip = lambda rs: [(r.country, r.variable, r.year, r.value) for r in rs]  # noqa: E731
    assert strip(a) == strip(b)
    assert assemble_panels(a).panels == assemble_panels(b).panels


def test_duplicates():
    recs = [RawRecord("A", "mnweal", 2000, 1.0, 2), RawRecord("A", "mnweal", 2000, 1.0, 3),
            RawRecord("A", "mcongo", 2000, 1.0, 4), RawRecord("A", "mcongo", 2000, 2.0, 5)]
    kept, dupes = deduplicate(recs)
    assert [(r.variable, r.value) for r in kept] == [("mnweal", 1.0)]
    assert sorted(dupes) == [(3, "duplicate A/mnweal/2000"),
                             (4, "conflicting duplicate A/mcongo/2000"),
                             (5, "conflicting duplicate A/mcongo/2000")]
    kept2, _ = deduplicate(recs[::-1])
    assert [(r.variable, r.value) for r in kept2] == [("mnweal", 1.0)]


def test_pay():
    assert compute_pay(1000, 0.7) == 700
    assert compute_pay(1000, 0) == 0
    assert compute_pay(None, 0.5) is None and compute_pay(1.0, None) is None


def test_pay_out_of_range_warns(caplog):
    with caplog.at_level(logging.WARNING):
        assert compute_pay(1000, 1.2) == 1200
    assert "outside" in caplog.text


def test_consumption():
    assert aggregate_consumption(200, 800) == 1000
    assert aggregate_consumption(0, 800) == 800
    assert aggregate_consumption(None, 800) is None


def test_ppp():
    assert ppp_convert(500, 5) == 100
    assert ppp_convert(100, 1) == 100
    for bad in (0, -1):
        with pytest.raises(InvalidConversionFactor):
            ppp_convert(1, bad)


def _records(rows):
    return [RawRecord(c, v, y, x) for c, v, y, x in rows]


def _complete(country, year, skip=()):
    vals = dict(mnweal=1000.0, mcongo=20.0, mconhn=80.0, mnninc=100.0, wlabsh=0.6,
                anninc=500.0, xlcusp=5.0)
    return [(country, v, year, x) for v, x in vals.items() if v not in skip]


def test_hole_in_one_year():
    rows = _complete("A", 2000) + _complete("A", 2001, skip=("mnweal",)) + _complete("A", 2002)
    assembly = assemble_panels(_records(rows))
    assert [o.year for o in assembly.panels["A"]] == [2000, 2002]
    assert assembly.diagnostics["A"].missing == {2001: ["missing mnweal"]}


def test_no_usable_years():
    rows = _complete("A", 2000) + _complete("Z", 2000, skip=("mnninc",))
    assembly = assemble_panels(_records(rows))
    assert "Z" not in assembly.panels and "Z" in assembly.diagnostics


def test_ppp_only_for_income():
    (obs,) = assemble_panels(_records(_complete("A", 2000))).panels["A"]
    assert (obs.consumption_C, obs.pay_Pi, obs.capital_K) == (100.0, 60.0, 1000.0)
    assert obs.income_per_capita == 100.0


def test_latest_ppp_fallback():
    rows = (_complete("A", 2000, skip=("xlcusp",)) + _complete("A", 2001, skip=("xlcusp",))
            + [("A", "xlcusp", 1999, 2.0), ("A", "xlcusp", 2001, 4.0)])
    rows = [r for r in rows if not (r[1] == "xlcusp" and r[2] == 2001)] + [("A", "xlcusp", 2001, 4.0)]
    obs = assemble_panels(_records(rows)).panels["A"]
    # 2000 has no factor of its own, so the latest (2001) applies.
    assert [o.income_per_capita for o in obs] == [125.0, 125.0]


def test_suffix_preference():
    rows = _complete("A", 2000) + [("A", "mnweal992i", 2000, 7.0), ("A", "mnweal999i", 2000, 9.0)]
    rows = [r for r in rows if r[1] != "mnweal"]
    (obs,) = assemble_panels(_records(rows)).panels["A"]
    assert obs.capital_K == 9.0


def test_variable_map(tmp_path):
    path = tmp_path / "map.csv"
    path.write_text("code,concept\nwealth,mnweal\n")
    vmap = load_variable_map(path)
    rows = [r for r in _complete("A", 2000) if r[1] != "mnweal"] + [("A", "wealth", 2000, 3.0)]
    (obs,) = assemble_panels(_records(rows), vmap).panels["A"]
    assert obs.capital_K == 3.0
    path.write_text("code,concept\nwealth,nonsense\n")
    with pytest.raises(ValidationError):
        load_variable_map(path)


def test_fixture_panel_matches_hand_sums():
    recs, diag = parse_long_file(FIXTURE_WID)
    assert diag.rows == 211 and diag.accepted == 209 and diag.n_unrecognized == 2
    assert diag.is_conserved()
    assembly = assemble_panels(recs)
    assert sorted(assembly.panels) == ["AAA", "BBB", "CCC"]
    assert [o.year for o in assembly.panels["CCC"]] == [y for y in range(2000, 2010) if y != 2005]
    assert assembly.diagnostics["CCC"].missing == {2005: ["missing mnweal"]}
    # Consumption totals against plain addition of the two source columns.
    src = {}
    for line in FIXTURE_WID.read_text().splitlines()[1:]:
        c, v, pct, y, x, *_ = line.split(";")
        src[(c, v[:6], int(y), pct)] = float(x)
    for country, obs in assembly.panels.items():
        for o in obs:
            assert o.consumption_C == src[(country, "mcongo", o.year, "p0p100")] + \
                src[(country, "mconhn", o.year, "p0p100")]
            assert o.capital_K == src[(country, "mnweal", o.year, "p0p100")]
    assert len(read_table(DATA / "fixture_ledger.csv")) == 9 + 9 + 7
