"""Uplink band allocation for D2D pairs in multi-cell, multi-band HCNs."""
from .allocation import (Allocation, BandKind, BandRef, RateEvaluator, ValidationError,
                         cellular, delta_if_moved, mmwave, set_rate, system_rate, validate)
from .channel import LinkBudget, RadioParams
from .harness import SweepResult, SweepSpec, average_deviation, emit_csv, oracle_gap, run_sweep
from .scenario import CellConfig, ConfigError, Point2D, Scenario, distance, generate_scenario
from .solvers import (HeuristicConfig, SearchSpaceError, SolverResult, baseline_hcn_random,
                      baseline_mmw, baseline_mmw_one_band, exhaustive_allocate,
                      heuristic_allocate, initial_allocation)

__version__ = "0.1.0"
