"""Python surface of the curvature-flow core.

Thin re-export of the compiled extension: presets and configs travel as JSON
strings, experiment outcomes as dicts with ``exit_code``, ``output_dir`` and
``summary_json``.
"""

from ._mcflow import (
    ConfigParseError,
    ValidationError,
    contact_closure,
    preset_json,
    run_experiment,
    run_identity_suite,
    stable_dt,
)

__all__ = [
    "ConfigParseError",
    "ValidationError",
    "contact_closure",
    "preset_json",
    "run_experiment",
    "run_identity_suite",
    "stable_dt",
]
