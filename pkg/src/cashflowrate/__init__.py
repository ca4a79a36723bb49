"""Rate of return, cash flow rate and factor shares in consumption from
national-accounts panels (consumption, pay, market-value capital), with a
synthetic-economy oracle for the underlying accounting identities."""

from .domain import CountrySummary, IndicatorRow, PanelObservation, ReferenceSeries
from .errors import AccountsError, IoFailure, ValidationError
from .indicators import (
    StationaryCheck,
    cash_flow,
    consumption_shares,
    derive_panel,
    net_profit,
    rates,
    stationary_check,
    summarize,
)
from .ingestion import assemble_panels, parse_long_file
from .pipeline import compute

__version__ = "0.1.0"

__all__ = [
    "AccountsError", "CountrySummary", "IndicatorRow", "IoFailure", "PanelObservation",
    "ReferenceSeries", "StationaryCheck", "ValidationError", "assemble_panels", "cash_flow",
    "compute", "consumption_shares", "derive_panel", "net_profit", "parse_long_file", "rates",
    "stationary_check", "summarize",
]
