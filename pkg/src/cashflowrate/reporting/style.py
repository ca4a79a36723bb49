"""Matplotlib settings for report figures.

Applied through ``matplotlib.rc_context`` around figure construction and
saving, so the global rc state is never touched. ``svg.hashsalt`` and
``svg.fonttype`` make SVG output byte-stable for a given matplotlib build.
"""

FIGSIZE = (8.0, 4.5)
DPI = 100

CHART_RC = {
    "font.family": "DejaVu Sans",
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": False,
    "grid.color": "#cccccc",
    "grid.linewidth": 0.6,
    "legend.fontsize": 8,
    "legend.frameon": False,
    "lines.linewidth": 1.6,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "svg.fonttype": "none",
    "svg.hashsalt": "cashflowrate",
    "path.simplify": False,
}

SVG_METADATA = {"Date": None, "Creator": "cashflowrate"}

# key on IndicatorRow, legend label, colour
SERIES = {
    "rates": (
        ("f_rate", "f  cash flow rate", "#1b6ca8"),
        ("g_rate", "g  capital growth rate", "#e08214"),
        ("r_rate", "r  rate of return", "#2d8a3e"),
    ),
    "shares": (
        ("labor_share_cons", "labor share in consumption", "#7b3294"),
        ("capital_share_cons", "capital share in consumption", "#008837"),
    ),
}

TITLES = {
    "rates": "{country}: cash flow rate, capital growth rate and rate of return",
    "shares": "{country}: labor and capital shares in consumption",
}

NEGATIVE_FILL = "#f4e1e1"
ZERO_LINE = "#333333"
