"""Band-assignment solvers: switch-based local search, exhaustive oracle, baselines.

Every stochastic solver takes ``rng`` as either a seed or a
``numpy.random.Generator``.  ``baseline_mmw`` and the heuristic's
initialization consume the same draws, so with equal seeds the heuristic
starts from exactly the MMW allocation.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .allocation import Allocation, RateEvaluator
from .channel import RadioParams
from .scenario import ConfigError, Scenario

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 10**7
_CHUNK = 1 << 16


class SearchSpaceError(RuntimeError):
    """Exhaustive search refused because the space exceeds the budget."""


@dataclass
class SolverResult:
    allocation: Allocation
    rate_bps: float
    iterations_phase1: int = 0
    iterations_phase2: int = 0
    switches: int = 0
    # system rate at the start and after each accepted switch, if recorded
    trace: list[float] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return self.iterations_phase1 + self.iterations_phase2


@dataclass(frozen=True)
class HeuristicConfig:
    # consecutive visits without a switch before a phase stops; None = number of D2D pairs
    stall_limit: int | None = None
    rng_seed: int = 0
    max_iterations: int = 10**6  # per phase
    record_trace: bool = False

    def __post_init__(self):
        if self.stall_limit is not None and self.stall_limit < 1:
            raise ConfigError("stall_limit must be >= 1")


def _result(scn, ev, codes, **kw) -> SolverResult:
    return SolverResult(Allocation.from_codes(scn, codes), ev.system_rate(codes), **kw)


def _initial_codes(scn: Scenario, rng: np.random.Generator) -> np.ndarray:
    n_c, n_m = scn.config.n_cellular_bands, scn.config.n_mmwave_bands
    if n_m == 0:
        log.warning("no mm-wave bands: initial allocation falls back to random cellular bands")
        return rng.integers(0, n_c, size=scn.n_d2d)
    return n_c + rng.integers(0, n_m, size=scn.n_d2d)


def initial_allocation(scn: Scenario, rng) -> Allocation:
    """Every pair on a uniformly random mm-wave band, cellular sets empty."""
    return Allocation.from_codes(scn, _initial_codes(scn, np.random.default_rng(rng)))


def heuristic_allocate(scn: Scenario, params: RadioParams,
                       cfg: HeuristicConfig = HeuristicConfig()) -> SolverResult:
    """Two-phase switch-operation local search.

    Phase 1 visits pairs in label order and tries moving each to one uniformly
    drawn other mm-wave band; phase 2 tries moving mm-wave pairs to one
    uniformly drawn cellular band.  A move is taken only if the two touched
    set rates strictly increase.  A phase ends after ``stall_limit``
    consecutive visits without a move.
    """
    rng = np.random.default_rng(cfg.rng_seed)
    ev = RateEvaluator(scn, params)
    codes = _initial_codes(scn, rng)
    n_c, n_m, n_d = ev.n_cellular, ev.n_mmwave, scn.n_d2d
    stall = cfg.stall_limit if cfg.stall_limit is not None else max(n_d, 1)
    trace = [ev.system_rate(codes)] if cfg.record_trace else []
    switches = 0

    def accept(d: int, to: int) -> bool:
        nonlocal switches
        if ev.delta(codes, d, to) > 0:
            codes[d] = to
            switches += 1
            if cfg.record_trace:
                trace.append(ev.system_rate(codes))
            return True
        return False

    it1 = 0
    if n_d and n_m >= 2:
        num1, d = 0, 0
        while num1 < stall and it1 < cfg.max_iterations:
            y = codes[d] - n_c
            r = int(rng.integers(0, n_m - 1))
            target = n_c + (r if r < y else r + 1)
            num1 = 0 if accept(d, target) else num1 + 1
            it1 += 1
            d = (d + 1) % n_d

    it2 = 0
    if n_d and n_c >= 1:
        num2, d = 0, 0
        while num2 < stall and it2 < cfg.max_iterations:
            if not (codes >= n_c).any():
                break
            if codes[d] >= n_c:
                target = int(rng.integers(0, n_c))
                num2 = 0 if accept(d, target) else num2 + 1
                it2 += 1
            d = (d + 1) % n_d

    return _result(scn, ev, codes, iterations_phase1=it1, iterations_phase2=it2,
                   switches=switches, trace=trace)


def search_space_size(scn: Scenario) -> int:
    return (scn.config.n_cellular_bands + scn.config.n_mmwave_bands) ** scn.n_d2d


def exhaustive_allocate(scn: Scenario, params: RadioParams, budget: int = DEFAULT_BUDGET) -> SolverResult:
    """Maximize the system rate over every assignment of pairs to bands.

    Assignments are enumerated in lexicographic order of their code vectors,
    so ties resolve to the lexicographically smallest one.
    ``iterations_phase1`` reports the number of assignments evaluated.
    """
    size = search_space_size(scn)
    if size > budget:
        raise SearchSpaceError(f"search space {size} exceeds budget {budget}")
    ev = RateEvaluator(scn, params)
    n_d, n_b = scn.n_d2d, ev.n_bands
    if n_d == 0:
        return _result(scn, ev, np.zeros(0, dtype=int), iterations_phase1=1)
    weights = n_b ** np.arange(n_d - 1, -1, -1)
    best_rate, best_idx = -np.inf, 0
    for start in range(0, size, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, size))
        batch = (idx[:, None] // weights[None, :]) % n_b
        rates = ev.batch_system_rate(batch)
        k = int(np.argmax(rates))
        if rates[k] > best_rate:
            best_rate, best_idx = rates[k], int(idx[k])
    codes = (best_idx // weights) % n_b
    return _result(scn, ev, codes, iterations_phase1=size)


def baseline_mmw(scn: Scenario, params: RadioParams, rng) -> SolverResult:
    """Uniformly random mm-wave band per pair (the heuristic's starting point)."""
    rng = np.random.default_rng(rng)
    return _result(scn, RateEvaluator(scn, params), _initial_codes(scn, rng))


def baseline_hcn_random(scn: Scenario, params: RadioParams, rng) -> SolverResult:
    """Uniformly random band per pair over all cellular and mm-wave bands."""
    rng = np.random.default_rng(rng)
    ev = RateEvaluator(scn, params)
    return _result(scn, ev, rng.integers(0, ev.n_bands, size=scn.n_d2d))


def baseline_mmw_one_band(scn: Scenario, params: RadioParams) -> SolverResult:
    """Every pair on mm-wave band 0."""
    if scn.config.n_mmwave_bands < 1:
        raise ConfigError("single-band mm-wave baseline needs a mm-wave band")
    ev = RateEvaluator(scn, params)
    return _result(scn, ev, np.full(scn.n_d2d, ev.n_cellular, dtype=int))
