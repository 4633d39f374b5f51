"""Entropy production and cycle analysis on finite rate networks."""
from .cycles import Cycle, CycleBasis, cycle_affinity, cycle_basis
from .entropy import (
    CycleRow,
    EntropyReport,
    cycle_report_rows,
    detailed_balance_check,
    edge_currents,
    entropy_production,
)
from .rate_matrix import (
    RateMatrix,
    dump_edge_list,
    load_edge_list,
    potential_rates,
    rate_matrix,
)
from .stationary import generator_matrix, stationary_distribution

__all__ = [
    "Cycle",
    "CycleBasis",
    "CycleRow",
    "EntropyReport",
    "RateMatrix",
    "cycle_affinity",
    "cycle_basis",
    "cycle_report_rows",
    "detailed_balance_check",
    "dump_edge_list",
    "edge_currents",
    "entropy_production",
    "generator_matrix",
    "load_edge_list",
    "potential_rates",
    "rate_matrix",
    "stationary_distribution",
]
