import numpy as np
import pytest

from d2dalloc import Allocation, CellConfig, Point2D, Scenario, generate_scenario
from d2dalloc.scenario import D2DPair

ACCEPTANCE_LINES = []


def build_scenario(bs, users, pairs, n_mmwave=1, radius=20.0):
    """Hand-placed scenario; ``users[i]`` lists N points, ``pairs[i]`` lists (tx, rx)."""
    n_c = len(users[0]) if users else 0
    cfg = CellConfig(n_cells=len(bs), n_cellular_bands=n_c, n_mmwave_bands=n_mmwave,
                     max_d2d_per_cell=max([len(p) for p in pairs] + [0]), cell_radius=radius)
    return Scenario(
        cfg,
        tuple(Point2D(*b) for b in bs),
        tuple(tuple(Point2D(*u) for u in cell) for cell in users),
        tuple(tuple(D2DPair(Point2D(*t), Point2D(*r)) for t, r in cell) for cell in pairs),
    )


def small_instance(seed, max_cells=3, max_d2d=5):
    """Random small drop plus a random allocation over all bands."""
    rng = np.random.default_rng(10_000 + seed)
    cfg = CellConfig(n_cells=int(rng.integers(1, max_cells + 1)),
                     n_cellular_bands=int(rng.integers(1, 4)),
                     n_mmwave_bands=int(rng.integers(1, 4)),
                     max_d2d_per_cell=max_d2d)
    scn = generate_scenario(cfg, seed)
    n_b = cfg.n_cellular_bands + cfg.n_mmwave_bands
    alloc = Allocation.from_codes(scn, rng.integers(0, n_b, size=scn.n_d2d))
    return scn, alloc


@pytest.fixture
def report():
    """Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""
    def _report(name, ok, detail=""):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" :: {detail}" if detail else ""))
        return ok
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
