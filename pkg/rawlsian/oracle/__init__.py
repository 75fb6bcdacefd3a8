"""Exact Rawls computations on finite discrete distributions."""

from rawlsian.oracle.distribution import (
    DualWeights,
    FiniteDistribution,
    TabularClassifier,
    UnveilTable,
    random_distribution,
    unveil,
)
from rawlsian.oracle.rawls import (
    DualGridResult,
    RawlsSolution,
    RelaxedSolution,
    ThresholdRule,
    atom_bound,
    binding_counterexamples,
    brute_force_rawls,
    dual_classifier,
    dual_grid_maximize,
    dual_value,
    error_rates,
    max_error,
    max_error_dual,
    rawls_threshold_p1,
    relaxed_rawls,
)

__all__ = [
    "DualGridResult",
    "DualWeights",
    "FiniteDistribution",
    "RawlsSolution",
    "RelaxedSolution",
    "TabularClassifier",
    "ThresholdRule",
    "UnveilTable",
    "atom_bound",
    "binding_counterexamples",
    "brute_force_rawls",
    "dual_classifier",
    "dual_grid_maximize",
    "dual_value",
    "error_rates",
    "max_error",
    "max_error_dual",
    "random_distribution",
    "rawls_threshold_p1",
    "relaxed_rawls",
    "unveil",
]
