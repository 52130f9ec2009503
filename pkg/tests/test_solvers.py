import numpy as np
import pytest

from conftest import build_scenario, small_instance
from d2dalloc import (Allocation, CellConfig, ConfigError, HeuristicConfig, RadioParams,
                      SearchSpaceError, cellular, exhaustive_allocate, generate_scenario,
                      heuristic_allocate, initial_allocation, mmwave, system_rate, validate)
from d2dalloc.solvers import (baseline_hcn_random, baseline_mmw, baseline_mmw_one_band,
                              search_space_size)

P = RadioParams()
BASE = CellConfig(n_cells=5, n_cellular_bands=3, n_mmwave_bands=3, max_d2d_per_cell=15)


def _cue_only_rate(scn):
    return system_rate(scn, Allocation(), P)


# -- initialization -----------------------------------------------------------

def test_initial_single_mmwave_band():
    scn = generate_scenario(CellConfig(n_cells=3, n_mmwave_bands=1, max_d2d_per_cell=6), 4)
    a = initial_allocation(scn, 9)
    assert all(ref == mmwave(0) for ref in a.assignment.values())


@pytest.mark.parametrize("seed", range(10))
def test_initial_valid_and_mmwave_only(seed):
    scn, _ = small_instance(seed)
    a = initial_allocation(scn, seed)
    assert validate(scn, a) == []
    assert not any(a.is_cellular(*k) for k in scn.d2d_labels)


def test_initial_band_counts_regression():
    # pinned: 300 pairs over 3 mm-wave bands, counts reproducible and within 100 +- 30
    cfg = CellConfig(n_cells=20, n_cellular_bands=2, n_mmwave_bands=3, max_d2d_per_cell=15,
                     fixed_d2d_per_cell=15)
    scn = generate_scenario(cfg, 11)
    assert scn.n_d2d == 300
    counts = np.bincount(initial_allocation(scn, 2024).codes(scn), minlength=5)
    assert counts.tolist() == [0, 0, 113, 106, 81]
    assert all(70 <= c <= 130 for c in counts[2:])
    # baseline_mmw draws the same stream
    assert np.bincount(baseline_mmw(scn, P, 2024).allocation.codes(scn), minlength=5).tolist() \
        == [0, 0, 113, 106, 81]


def test_no_mmwave_fallback(caplog):
    scn = generate_scenario(CellConfig(n_cells=2, n_cellular_bands=2, n_mmwave_bands=0,
                                       max_d2d_per_cell=4, fixed_d2d_per_cell=4), 0)
    a = initial_allocation(scn, 0)
    assert validate(scn, a) == []
    assert all(a.is_cellular(*k) for k in scn.d2d_labels)
    assert "falls back" in caplog.text
    res = heuristic_allocate(scn, P)
    assert res.iterations_phase1 == 0
    assert validate(scn, res.allocation) == []


# -- heuristic ----------------------------------------------------------------

def test_heuristic_no_d2d():
    scn = generate_scenario(CellConfig(n_cells=2, max_d2d_per_cell=0), 1)
    res = heuristic_allocate(scn, P)
    assert res.allocation == Allocation()
    assert res.switches == 0 and res.iterations == 0
    assert res.rate_bps == pytest.approx(_cue_only_rate(scn), rel=1e-13)


@pytest.mark.parametrize("seed", range(15))
def test_heuristic_improves_and_records(seed):
    scn, _ = small_instance(seed, max_d2d=6)
    cfg = HeuristicConfig(rng_seed=seed, record_trace=True)
    res = heuristic_allocate(scn, P, cfg)
    init = system_rate(scn, initial_allocation(scn, seed), P)
    assert res.trace[0] == pytest.approx(init, rel=1e-15)
    assert all(b > a for a, b in zip(res.trace, res.trace[1:]))
    assert res.rate_bps >= init
    assert len(res.trace) == res.switches + 1
    assert res.rate_bps == pytest.approx(system_rate(scn, res.allocation, P), rel=1e-12)
    assert res.iterations >= res.switches
    assert validate(scn, res.allocation) == []


def test_heuristic_deterministic():
    scn = generate_scenario(BASE, 2)
    a = heuristic_allocate(scn, P, HeuristicConfig(rng_seed=5))
    b = heuristic_allocate(scn, P, HeuristicConfig(rng_seed=5))
    assert a == b


def test_heuristic_stall_limit_and_cap():
    scn = generate_scenario(BASE, 3)
    short = heuristic_allocate(scn, P, HeuristicConfig(stall_limit=1, rng_seed=0))
    assert short.iterations_phase1 >= 1
    capped = heuristic_allocate(scn, P, HeuristicConfig(rng_seed=0, max_iterations=7))
    assert capped.iterations_phase1 <= 7 and capped.iterations_phase2 <= 7
    with pytest.raises(ConfigError):
        HeuristicConfig(stall_limit=0)


def test_no_phase2_without_cellular_bands():
    scn0 = generate_scenario(CellConfig(n_cells=3, n_cellular_bands=0, n_mmwave_bands=3,
                                        max_d2d_per_cell=8), 6)
    r0 = heuristic_allocate(scn0, P, HeuristicConfig(rng_seed=6))
    assert r0.iterations_phase2 == 0
    assert not any(r0.allocation.is_cellular(*k) for k in scn0.d2d_labels)


# -- exhaustive ---------------------------------------------------------------

def test_exhaustive_single_pair_two_bands():
    scn = build_scenario(bs=[(50, 50)], users=[[(45, 50)]], pairs=[[((55, 52), (58, 55))]], n_mmwave=1)
    r_c = system_rate(scn, Allocation({(0, 0): cellular(0)}), P)
    r_m = system_rate(scn, Allocation({(0, 0): mmwave(0)}), P)
    res = exhaustive_allocate(scn, P)
    assert res.rate_bps == max(r_c, r_m)
    assert res.allocation.band_of(0, 0) == (cellular(0) if r_c > r_m else mmwave(0))
    assert res.iterations_phase1 == 2


def test_exhaustive_no_d2d():
    scn = generate_scenario(CellConfig(n_cells=2, max_d2d_per_cell=0), 0)
    res = exhaustive_allocate(scn, P)
    assert res.allocation == Allocation()
    assert res.rate_bps == pytest.approx(_cue_only_rate(scn), rel=1e-13)


def test_exhaustive_budget_refusal():
    scn = generate_scenario(CellConfig(n_cells=2, n_cellular_bands=2, n_mmwave_bands=2,
                                       max_d2d_per_cell=4, fixed_d2d_per_cell=4), 0)
    assert search_space_size(scn) == 4**8
    with pytest.raises(SearchSpaceError, match="65536"):
        exhaustive_allocate(scn, P, budget=1000)


def test_exhaustive_tie_breaks_lexicographically():
    # identical empty mm-wave bands: both choices tie, so the smaller code wins
    scn = build_scenario(bs=[(50, 50)], users=[[]], pairs=[[((48, 48), (52, 51))]], n_mmwave=2)
    assert exhaustive_allocate(scn, P).allocation.band_of(0, 0) == mmwave(0)


@pytest.mark.parametrize("seed", range(12))
def test_oracle_dominates_heuristic(seed):
    cfg = CellConfig(n_cells=2, n_cellular_bands=2, n_mmwave_bands=2, max_d2d_per_cell=3)
    scn = generate_scenario(cfg, seed)
    opt = exhaustive_allocate(scn, P)
    heu = heuristic_allocate(scn, P, HeuristicConfig(rng_seed=seed))
    init = system_rate(scn, initial_allocation(scn, seed), P)
    assert opt.rate_bps >= heu.rate_bps * (1 - 1e-12)
    assert heu.rate_bps >= init
    # brute force over the batch evaluator agrees with one-by-one evaluation
    assert opt.rate_bps == pytest.approx(system_rate(scn, opt.allocation, P), rel=1e-12)


# -- baselines ----------------------------------------------------------------

def test_hcn_without_cellular_is_mmw():
    scn = generate_scenario(CellConfig(n_cells=3, n_cellular_bands=0, n_mmwave_bands=3,
                                       max_d2d_per_cell=8), 2)
    for s in range(5):
        assert baseline_hcn_random(scn, P, s) == baseline_mmw(scn, P, s)


def test_hcn_without_mmwave_is_all_cellular():
    scn = generate_scenario(CellConfig(n_cells=3, n_cellular_bands=2, n_mmwave_bands=0,
                                       max_d2d_per_cell=8), 2)
    a = baseline_hcn_random(scn, P, 1).allocation
    assert all(a.is_cellular(*k) for k in scn.d2d_labels)


def test_mmw1_equals_mmw_with_one_band():
    scn = generate_scenario(CellConfig(n_cells=3, n_mmwave_bands=1, max_d2d_per_cell=8), 5)
    for s in range(3):
        assert baseline_mmw_one_band(scn, P) == baseline_mmw(scn, P, s)


def test_mmw1_no_d2d_and_no_band():
    scn = generate_scenario(CellConfig(n_cells=2, max_d2d_per_cell=0), 0)
    assert baseline_mmw_one_band(scn, P).rate_bps == pytest.approx(_cue_only_rate(scn), rel=1e-13)
    with pytest.raises(ConfigError):
        baseline_mmw_one_band(generate_scenario(CellConfig(n_mmwave_bands=0), 0), P)


def test_heuristic_dominates_mmw_per_seed():
    for seed in range(20):
        scn = generate_scenario(BASE, seed)
        heu = heuristic_allocate(scn, P, HeuristicConfig(rng_seed=seed)).rate_bps
        assert heu >= baseline_mmw(scn, P, seed).rate_bps


@pytest.mark.slow
def test_baseline_orderings_50_seeds():
    heu, mmw, hcn, mmw1 = [], [], [], []
    for seed in range(50):
        scn = generate_scenario(BASE, seed)
        heu.append(heuristic_allocate(scn, P, HeuristicConfig(rng_seed=seed)).rate_bps)
        mmw.append(baseline_mmw(scn, P, seed).rate_bps)
        hcn.append(baseline_hcn_random(scn, P, seed).rate_bps)
        mmw1.append(baseline_mmw_one_band(scn, P).rate_bps)
    assert np.mean(hcn) <= np.mean(heu)
    assert np.mean(mmw1) <= np.mean(mmw) <= np.mean(heu)
