"""Python access to the aquah simulation core."""

from ._aquah import (
    AquahError,
    cell_step,
    d8,
    flow_accumulation,
    make_fixture,
    metrics,
    param_ranges,
    run,
    select_outlet,
)

__all__ = [
    "AquahError",
    "cell_step",
    "d8",
    "flow_accumulation",
    "make_fixture",
    "metrics",
    "param_ranges",
    "run",
    "select_outlet",
]
