"""Two-step Dantzig selector estimation for sparse time-series models."""

import json as _json

from ._core import (
    ConfigError,
    NumericError,
    SparsetsError,
    bin_counts,
    cross_validate_lambda,
    estimate_f_infinity,
    f_infinity_grid,
    fit_first_step,
    inar_design,
    royston_test,
    shapiro_wilk,
    simulate_hawkes,
    simulate_inar,
    simulate_minar1,
    simulate_ou,
    solve_dantzig,
    solve_lp,
    solve_lyapunov,
    two_step_fit,
)
from ._core import run_case as _run_case
from ._core import run_hawkes_support as _run_hawkes_support


def run_case(config, jobs=1):
    """Run a case config (dict or JSON text) and return the report as a dict."""
    text = config if isinstance(config, str) else _json.dumps(config)
    return _json.loads(_run_case(text, jobs))


def run_hawkes_support(config, jobs=1):
    """Run a Hawkes support config (dict or JSON text) and return the report as a dict."""
    text = config if isinstance(config, str) else _json.dumps(config)
    return _json.loads(_run_hawkes_support(text, jobs))


__all__ = [
    "ConfigError",
    "NumericError",
    "SparsetsError",
    "bin_counts",
    "cross_validate_lambda",
    "estimate_f_infinity",
    "f_infinity_grid",
    "fit_first_step",
    "inar_design",
    "royston_test",
    "run_case",
    "run_hawkes_support",
    "shapiro_wilk",
    "simulate_hawkes",
    "simulate_inar",
    "simulate_minar1",
    "simulate_ou",
    "solve_dantzig",
    "solve_lp",
    "solve_lyapunov",
    "two_step_fit",
]
