"""Scenario configuration, the Monte Carlo runner, diagnostics, and reports."""
from .config import (
    ScenarioConfig,
    builtin_names,
    config_from_dict,
    load_builtin,
    load_config,
)
from .diagnostics import condition_diagnostics
from .report import CSV_HEADER, emit_report, report_from_json, report_to_csv, report_to_json
from .runner import run_scenario

__all__ = [
    "CSV_HEADER",
    "ScenarioConfig",
    "builtin_names",
    "condition_diagnostics",
    "config_from_dict",
    "emit_report",
    "load_builtin",
    "load_config",
    "report_from_json",
    "report_to_csv",
    "report_to_json",
    "run_scenario",
]
