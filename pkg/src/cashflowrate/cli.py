"""Command-line entry point.

    cashflowrate ingest   FILE... --out DIR
    cashflowrate compute  (FILE... | --panel DIR) --out DIR
    cashflowrate report   --in DIR [--format txt|csv|md|tex] [--out DIR] [--charts ...]
    cashflowrate compare  --in DIR --reference FILE [--band LO HI]
    cashflowrate chart    --in DIR --out DIR [--series rates|shares]
    cashflowrate simulate [--seed N] [--households N] [--years N] [--trials N]

Exit status: 0 on success, 1 on validation errors (including a failed
identity in ``simulate``), 2 on I/O failures. Errors are reported on stderr
as a single ``error: ...`` line.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import artifacts, ingestion
from .errors import AccountsError, IoFailure, ValidationError
from .indicators import DEFAULT_EPSILON_G, DEFAULT_THRESHOLD
from .oracle import IdentityCheck, IdentityReport, generate_economy, verify_all_identities
from .pipeline import compute, group_panel, group_rows
from .reporting import charts, reference as comparing, tables

EXIT_OK, EXIT_VALIDATION, EXIT_IO = 0, 1, 2

logger = logging.getLogger("cashflowrate")


@dataclass
class RunConfig:
    inputs: list[Path] = field(default_factory=list)
    variable_map: Optional[Path] = None
    delimiter: Optional[str] = None
    threshold: float = DEFAULT_THRESHOLD
    epsilon_g: float = DEFAULT_EPSILON_G
    min_years: int = tables.DEFAULT_MIN_YEARS
    output_format: str = "txt"
    output_dir: Optional[Path] = None
    seed: int = 42
    n_households: int = 50
    n_years: int = 20
    reference: Optional[Path] = None
    band: tuple[float, float] = comparing.DEFAULT_BAND

    def __post_init__(self):
        if not 0 < self.threshold < 1:
            raise ValidationError(f"threshold must lie in (0, 1), got {self.threshold}")
        if not self.band[0] < self.band[1]:
            raise ValidationError(f"band lower bound must be below upper, got {self.band}")
        if self.min_years < 2:
            raise ValidationError(f"min-years must be at least 2, got {self.min_years}")
        if self.epsilon_g < 0:
            raise ValidationError(f"epsilon-g must be nonnegative, got {self.epsilon_g}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_VALIDATION, f"error: {message}\n")


def _config(args, **overrides) -> RunConfig:
    known = {f.name for f in dataclasses.fields(RunConfig)}
    values = {k: v for k, v in vars(args).items() if k in known and v is not None}
    values.update(overrides)
    if "band" in values:
        values["band"] = tuple(values["band"])
    return RunConfig(**values)


def _load_inputs(cfg: RunConfig):
    vmap = ingestion.load_variable_map(cfg.variable_map) if cfg.variable_map else None
    records, diag = [], ingestion.ParseDiagnostics()
    for path in cfg.inputs:
        recs, d = ingestion.parse_long_file(Path(path), cfg.delimiter, vmap)
        records += recs
        diag.merge(d)
    if len(cfg.inputs) > 1:
        records, dupes = ingestion.deduplicate(records)
        diag.malformed.extend((ln, f"across files: {why}") for ln, why in dupes)
        diag.accepted = len(records)
    assembly = ingestion.assemble_panels(records, vmap)
    return assembly, diag


def _ingest_report(assembly, diag) -> str:
    lines = ["# ingestion diagnostics"] + diag.lines() + [""]
    for country in sorted(assembly.diagnostics):
        lines += assembly.diagnostics[country].lines()
    return "\n".join(lines) + "\n"


def cmd_ingest(args) -> int:
    cfg = _config(args)
    assembly, diag = _load_inputs(cfg)
    out = cfg.output_dir
    obs = [o for c in sorted(assembly.panels) for o in assembly.panels[c]]
    artifacts.save("panel", out, obs)
    artifacts.atomic_write(out / "ingest_report.txt", _ingest_report(assembly, diag))
    print(f"{len(assembly.panels)} countries, {len(obs)} country-years -> {out / 'panel.csv'}")
    return EXIT_OK


def cmd_compute(args) -> int:
    cfg = _config(args)
    out = cfg.output_dir
    if args.panel:
        panels = group_panel(artifacts.load("panel", Path(args.panel)))
    elif cfg.inputs:
        assembly, diag = _load_inputs(cfg)
        panels = assembly.panels
        artifacts.save("panel", out, [o for c in sorted(panels) for o in panels[c]])
        artifacts.atomic_write(out / "ingest_report.txt", _ingest_report(assembly, diag))
    else:
        raise ValidationError("compute needs input files or --panel DIR")
    result = compute(panels, cfg.threshold, cfg.epsilon_g)
    artifacts.save("indicators", out, result.all_rows)
    artifacts.save("summaries", out, result.summaries)
    artifacts.save("stationary", out, result.stationary)
    print(f"{len(result.summaries)} countries, {len(result.all_rows)} indicator rows -> {out}")
    if result.skipped:
        print(f"no consecutive year pair: {', '.join(result.skipped)}")
    return EXIT_OK


def _load_computed(cfg: RunConfig, in_dir: Path):
    rows = artifacts.load("indicators", in_dir)
    summaries = artifacts.load("summaries", in_dir)
    summaries = [dataclasses.replace(s, high_cash_flow_flag=s.avg_f > cfg.threshold) for s in summaries]
    return rows, summaries


def _write_charts(rows, series_names, out_dir: Path) -> list[Path]:
    grouped = group_rows(rows)
    written = []
    for series in series_names:
        for country, svg in charts.render_line_charts(grouped, series).items():
            path = out_dir / "charts" / f"{country}_{series}.svg"
            artifacts.atomic_write_bytes(path, svg)
            written.append(path)
    return written


def _series_names(choice: str) -> list[str]:
    return {"none": [], "rates": ["rates"], "shares": ["shares"], "both": ["rates", "shares"]}[choice]


def cmd_report(args) -> int:
    cfg = _config(args)
    if cfg.output_dir is None and args.charts != "none":
        raise ValidationError("--charts needs --out DIR")
    rows, summaries = _load_computed(cfg, Path(args.in_dir))
    if not summaries:
        raise ValidationError("summaries file has no countries")
    kw = dict(decimals=args.decimals, min_years=cfg.min_years)
    rendered = {}
    if args.table in ("fgr", "both"):
        rendered["fgr"] = tables.render_fgr_table(summaries, cfg.output_format, threshold=cfg.threshold, **kw)
    if args.table in ("shares", "both"):
        rendered["shares"] = tables.render_shares_table(summaries, cfg.output_format, **kw)
    diag = tables.coverage_diagnostics(summaries, cfg.min_years).lines(cfg.threshold)

    if cfg.output_dir is None:
        sys.stdout.write("\n".join(rendered.values()))
    else:
        for name, text in rendered.items():
            path = cfg.output_dir / f"{name}.{cfg.output_format}"
            artifacts.atomic_write(path, text)
            print(f"wrote {path}")
        for path in _write_charts(rows, _series_names(args.charts), cfg.output_dir):
            print(f"wrote {path}")
    print("\n".join(f"# {line}" for line in diag))
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _config(args)
    _, summaries = _load_computed(cfg, Path(args.in_dir))
    summaries = [s for s in summaries if s.n_years >= cfg.min_years]
    references = comparing.load_reference(cfg.reference)
    text = comparing.compare_with_reference(summaries, references, cfg.output_format, cfg.band, args.decimals)
    if args.out_file:
        artifacts.atomic_write(Path(args.out_file), text)
        print(f"wrote {args.out_file}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_chart(args) -> int:
    cfg = _config(args)
    rows = artifacts.load("indicators", Path(args.in_dir))
    if args.country:
        wanted = set(args.country)
        missing = wanted - {r.country for r in rows}
        if missing:
            raise ValidationError(f"no indicator rows for: {', '.join(sorted(missing))}")
        rows = [r for r in rows if r.country in wanted]
    for path in _write_charts(rows, _series_names(args.series), cfg.output_dir):
        print(f"wrote {path}")
    return EXIT_OK


def _merge_reports(reports: Sequence[IdentityReport]) -> IdentityReport:
    merged = []
    for checks in zip(*(r.checks for r in reports)):
        merged.append(IdentityCheck(
            checks[0].label, checks[0].description,
            max(c.max_residual for c in checks), all(c.passed for c in checks),
            [f for c in checks for f in c.failures][:20]))
    return IdentityReport(merged, reports[0].tolerance)


def cmd_simulate(args) -> int:
    cfg = _config(args)
    if args.trials < 1:
        raise ValidationError("--trials must be at least 1")
    reports = [
        verify_all_identities(generate_economy(cfg.seed + i, cfg.n_households, cfg.n_years))
        for i in range(args.trials)
    ]
    report = _merge_reports(reports)
    print(f"# identities over {args.trials} economies, {cfg.n_households} households x "
          f"{cfg.n_years} years, seed {cfg.seed}, tolerance {report.tolerance:g}")
    for line in report.lines():
        print(line)
    print(f"# {'all identities pass' if report.all_passed else 'FAILED: ' + ', '.join(report.failed)}")
    return EXIT_OK if report.all_passed else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cashflowrate", description=__doc__.split("\n\n")[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log warnings to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def inputs(sp):
        sp.add_argument("inputs", nargs="*", type=Path, help="long-format delimited files")
        sp.add_argument("--delimiter", choices=[";", ","], help="override delimiter detection")
        sp.add_argument("--var-map", dest="variable_map", type=Path,
                        help="code,concept table mapping other variable codes onto WID concepts")

    def fmt(sp):
        sp.add_argument("--format", dest="output_format", choices=tables.FORMATS, default="txt")
        sp.add_argument("--decimals", type=int, default=tables.DEFAULT_DECIMALS)
        sp.add_argument("--min-years", dest="min_years", type=int, default=tables.DEFAULT_MIN_YEARS,
                        help="minimum year pairs for a country to be ranked")
        sp.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD,
                        help="flag countries whose average f exceeds this")

    sp = sub.add_parser("ingest", help="parse files and assemble country panels")
    inputs(sp)
    sp.add_argument("--out", dest="output_dir", type=Path, required=True)
    sp.set_defaults(func=cmd_ingest)

    sp = sub.add_parser("compute", help="derive indicator rows and country summaries")
    inputs(sp)
    sp.add_argument("--panel", type=Path, help="directory holding panel.csv from ingest")
    sp.add_argument("--out", dest="output_dir", type=Path, required=True)
    sp.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    sp.add_argument("--epsilon-g", dest="epsilon_g", type=float, default=DEFAULT_EPSILON_G)
    sp.set_defaults(func=cmd_compute)

    sp = sub.add_parser("report", help="render ranked tables (and charts) from compute output")
    sp.add_argument("--in", dest="in_dir", type=Path, required=True)
    sp.add_argument("--out", dest="output_dir", type=Path)
    sp.add_argument("--table", choices=["fgr", "shares", "both"], default="both")
    sp.add_argument("--charts", choices=["none", "rates", "shares", "both"], default="none")
    fmt(sp)
    sp.set_defaults(func=cmd_report)

    sp = sub.add_parser("compare", help="compare with a user-supplied reference file")
    sp.add_argument("--in", dest="in_dir", type=Path, required=True)
    sp.add_argument("--reference", type=Path, required=True)
    sp.add_argument("--band", type=float, nargs=2, metavar=("LO", "HI"), default=list(comparing.DEFAULT_BAND))
    sp.add_argument("--out", dest="out_file", type=Path)
    fmt(sp)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("chart", help="write per-country SVG line charts")
    sp.add_argument("--in", dest="in_dir", type=Path, required=True)
    sp.add_argument("--out", dest="output_dir", type=Path, required=True)
    sp.add_argument("--series", choices=["rates", "shares", "both"], default="both")
    sp.add_argument("--country", action="append", help="limit to this country (repeatable)")
    sp.set_defaults(func=cmd_chart)

    sp = sub.add_parser("simulate", help="verify accounting identities on synthetic economies")
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--households", dest="n_households", type=int, default=50)
    sp.add_argument("--years", dest="n_years", type=int, default=20)
    sp.add_argument("--trials", type=int, default=1)
    sp.set_defaults(func=cmd_simulate)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except IoFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (AccountsError, ValueError) as exc:
        print(f"error: {' '.join(str(exc).split())}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
