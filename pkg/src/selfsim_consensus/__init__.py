"""Laplacian spectra and consensus metrics of hierarchical and Sierpinski graphs.

Graphs are built explicitly for small sizes; spectra come from recursive
decimation and metrics from closed forms, each cross-checked against the
others and against brute-force oracles.
"""

from __future__ import annotations

from .dynamics import (
    SimConfig,
    SimKind,
    SimTrace,
    analytic_coherence,
    bisect_delay_threshold,
    decay_rate,
    run,
    run_delayed,
    run_first_order_noisy,
    run_noiseless,
    run_second_order_noisy,
)
from .errors import BudgetExceededError, RouteDisagreementError
from .graphs import Family, Graph, GraphSpec, build_graph, build_hierarchical, build_sierpinski
from .metrics import (
    GammaVariant,
    Method,
    MetricsReport,
    epsilon_asymptotic,
    epsilon_recursive,
    full_report,
    h1_hierarchical,
    h1_sierpinski,
    h2_hierarchical,
    h2_sierpinski,
    tau_max,
    zeta,
    zeta_asymptotic,
)
from .oracle import OracleResult, eig_all, kirchhoff_via_pinv, largest, second_smallest
from .spectrum import SpectrumMultiset, hierarchical_spectrum, sierpinski_spectrum, spectrum
from .sweep import SweepSpec, cmd_sweep, format_table
from .validation import CheckResult, validate_all

__version__ = "0.1.0"

__all__ = [
    "BudgetExceededError",
    "CheckResult",
    "Family",
    "GammaVariant",
    "Graph",
    "GraphSpec",
    "Method",
    "MetricsReport",
    "OracleResult",
    "RouteDisagreementError",
    "SimConfig",
    "SimKind",
    "SimTrace",
    "SpectrumMultiset",
    "SweepSpec",
    "analytic_coherence",
    "bisect_delay_threshold",
    "build_graph",
    "build_hierarchical",
    "build_sierpinski",
    "cmd_sweep",
    "decay_rate",
    "eig_all",
    "epsilon_asymptotic",
    "epsilon_recursive",
    "format_table",
    "full_report",
    "h1_hierarchical",
    "h1_sierpinski",
    "h2_hierarchical",
    "h2_sierpinski",
    "hierarchical_spectrum",
    "kirchhoff_via_pinv",
    "largest",
    "run",
    "run_delayed",
    "run_first_order_noisy",
    "run_noiseless",
    "run_second_order_noisy",
    "second_smallest",
    "sierpinski_spectrum",
    "spectrum",
    "tau_max",
    "validate_all",
    "zeta",
    "zeta_asymptotic",
]
