"""Quantized average consensus by mass summation on static digraphs."""

from .digraph import Digraph, is_strongly_connected, parse_edge_list, random_strongly_connected
from .engine import RunConfig, RunTrace, Schedule, run, run_batch
from .numerics import QuantizedFraction, decompose, exact_average, frac_eq

__all__ = [
    "Digraph",
    "QuantizedFraction",
    "RunConfig",
    "RunTrace",
    "Schedule",
    "decompose",
    "exact_average",
    "frac_eq",
    "is_strongly_connected",
    "parse_edge_list",
    "random_strongly_connected",
    "run",
    "run_batch",
]
