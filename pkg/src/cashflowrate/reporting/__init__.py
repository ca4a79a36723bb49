from .charts import chart_figure, render_line_chart, render_line_charts
from .reference import (
    DEFAULT_BAND,
    Comparison,
    ComparisonRow,
    compare,
    compare_with_reference,
    comparison_table,
    load_reference,
)
from .tables import (
    FORMATS,
    CoverageDiagnostics,
    RenderingError,
    ReportTable,
    coverage_diagnostics,
    fgr_table,
    percent,
    rank_summaries,
    render_fgr_table,
    render_shares_table,
    shares_table,
)

__all__ = [
    "DEFAULT_BAND", "FORMATS", "Comparison", "ComparisonRow", "CoverageDiagnostics",
    "RenderingError", "ReportTable", "chart_figure", "compare", "compare_with_reference",
    "comparison_table", "coverage_diagnostics", "fgr_table", "load_reference", "percent",
    "rank_summaries", "render_fgr_table", "render_line_chart", "render_line_charts",
    "render_shares_table", "shares_table",
]
