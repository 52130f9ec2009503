"""Seeded generation of multi-cell HCN layouts.

All randomness comes from ``numpy.random.Generator`` backed by PCG64
(``numpy.random.default_rng(seed)``).  Draw order inside
:func:`generate_scenario` is part of the reproducibility contract:

1. BS positions, ``n_cells`` x 2 uniforms (x then y per BS)
2. for each cell in index order:
   a. D2D count (skipped when ``fixed_d2d_per_cell`` is set)
   b. ``N`` cellular-user positions
   c. for each D2D pair: tx position, then rx position
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from functools import cached_property
from pathlib import Path
from typing import NamedTuple

import numpy as np


class ConfigError(ValueError):
    """Invalid scenario or radio configuration."""


class Point2D(NamedTuple):
    x: float
    y: float


class D2DPair(NamedTuple):
    tx: Point2D
    rx: Point2D


def distance(a: Point2D, b: Point2D) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


@dataclass(frozen=True)
class CellConfig:
    n_cells: int = 5
    n_cellular_bands: int = 3
    n_mmwave_bands: int = 3
    max_d2d_per_cell: int = 15
    cell_radius: float = 20.0
    area_side: float = 100.0
    d2d_max_distance: float | None = None
    # exact D2D count per cell instead of uniform draw in [0, max_d2d_per_cell]
    fixed_d2d_per_cell: int | None = None
    bs_placement: str = "uniform"  # or "grid"

    def check(self) -> None:
        if self.n_cells < 1:
            raise ConfigError("n_cells must be >= 1")
        if self.n_cellular_bands < 0 or self.n_mmwave_bands < 0:
            raise ConfigError("band counts must be >= 0")
        if self.n_cellular_bands + self.n_mmwave_bands < 1:
            raise ConfigError("need at least one band")
        if not self.cell_radius > 0:
            raise ConfigError("cell_radius must be > 0")
        if 2 * self.cell_radius > self.area_side:
            raise ConfigError(
                f"cell diameter {2 * self.cell_radius} exceeds area side {self.area_side}"
            )
        if self.max_d2d_per_cell < 0:
            raise ConfigError("max_d2d_per_cell must be >= 0")
        if self.fixed_d2d_per_cell is not None and not (
            0 <= self.fixed_d2d_per_cell <= self.max_d2d_per_cell
        ):
            raise ConfigError("fixed_d2d_per_cell must lie in [0, max_d2d_per_cell]")
        if self.d2d_max_distance is not None and not self.d2d_max_distance > 0:
            raise ConfigError("d2d_max_distance must be > 0")
        if self.bs_placement not in ("uniform", "grid"):
            raise ConfigError(f"unknown bs_placement {self.bs_placement!r}")


@dataclass(frozen=True)
class Scenario:
    """Immutable geometry of one network drop.

    ``cellular_users[i][j]`` is the user of cell ``i`` on cellular band ``j``;
    ``d2d_pairs[i][k]`` is D2D pair ``k`` of cell ``i``.
    """

    config: CellConfig
    bs_positions: tuple[Point2D, ...]
    cellular_users: tuple[tuple[Point2D, ...], ...]
    d2d_pairs: tuple[tuple[D2DPair, ...], ...]
    seed: int | None = None

    @property
    def n_cells(self) -> int:
        return len(self.bs_positions)

    @property
    def n_d2d(self) -> int:
        return sum(len(pairs) for pairs in self.d2d_pairs)

    @cached_property
    def d2d_labels(self) -> tuple[tuple[int, int], ...]:
        """(cell, k) keys in label order: cell-major, then k."""
        return tuple((i, k) for i, pairs in enumerate(self.d2d_pairs) for k in range(len(pairs)))

    @cached_property
    def d2d_cell(self) -> np.ndarray:
        return np.array([i for i, _ in self.d2d_labels], dtype=int)

    def label_index(self, cell: int, k: int) -> int:
        return sum(len(p) for p in self.d2d_pairs[:cell]) + k

    # flat coordinate arrays, label order
    @cached_property
    def bs_xy(self) -> np.ndarray:
        return np.array(self.bs_positions, dtype=float).reshape(-1, 2)

    @cached_property
    def cue_xy(self) -> np.ndarray:
        """Cellular users as an (n_cells, N, 2) array."""
        n = self.config.n_cellular_bands
        return np.array(self.cellular_users, dtype=float).reshape(self.n_cells, n, 2)

    @cached_property
    def tx_xy(self) -> np.ndarray:
        return np.array([p.tx for pairs in self.d2d_pairs for p in pairs], dtype=float).reshape(-1, 2)

    @cached_property
    def rx_xy(self) -> np.ndarray:
        return np.array([p.rx for pairs in self.d2d_pairs for p in pairs], dtype=float).reshape(-1, 2)

    def to_dict(self) -> dict:
        return {
            "config": asdict(self.config),
            "seed": self.seed,
            "bs_positions": [list(p) for p in self.bs_positions],
            "cells": [
                {
                    "cellular_users": [list(u) for u in users],
                    "d2d_pairs": [{"tx": list(p.tx), "rx": list(p.rx)} for p in pairs],
                }
                for users, pairs in zip(self.cellular_users, self.d2d_pairs)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        cfg = CellConfig(**data["config"])
        cells = data["cells"]
        if len(cells) != len(data["bs_positions"]):
            raise ConfigError("cells and bs_positions differ in length")
        return cls(
            config=cfg,
            bs_positions=tuple(Point2D(*p) for p in data["bs_positions"]),
            cellular_users=tuple(tuple(Point2D(*u) for u in c["cellular_users"]) for c in cells),
            d2d_pairs=tuple(
                tuple(D2DPair(Point2D(*p["tx"]), Point2D(*p["rx"])) for p in c["d2d_pairs"])
                for c in cells
            ),
            seed=data.get("seed"),
        )


def _uniform_in_disk(rng: np.random.Generator, center: Point2D, radius: float) -> Point2D:
    r = radius * math.sqrt(rng.random())
    phi = 2.0 * math.pi * rng.random()
    return Point2D(center[0] + r * math.cos(phi), center[1] + r * math.sin(phi))


def _grid_positions(cfg: CellConfig) -> list[Point2D]:
    cols = math.ceil(math.sqrt(cfg.n_cells))
    rows = math.ceil(cfg.n_cells / cols)
    lo, hi = cfg.cell_radius, cfg.area_side - cfg.cell_radius

    def axis(m: int) -> list[float]:
        if m == 1:
            return [(lo + hi) / 2]
        return [lo + (hi - lo) * t / (m - 1) for t in range(m)]

    xs, ys = axis(cols), axis(rows)
    return [Point2D(xs[c % cols], ys[c // cols]) for c in range(cfg.n_cells)]


def _draw_rx(rng, tx: Point2D, bs: Point2D, cfg: CellConfig) -> Point2D:
    if cfg.d2d_max_distance is None:
        return _uniform_in_disk(rng, bs, cfg.cell_radius)
    # rejection: uniform over the intersection of the cell disk and the tx disk
    while True:
        rx = _uniform_in_disk(rng, tx, cfg.d2d_max_distance)
        if distance(rx, bs) <= cfg.cell_radius:
            return rx


def generate_scenario(config: CellConfig, seed: int) -> Scenario:
    """Draw one network drop; a pure function of ``(config, seed)``."""
    config.check()
    rng = np.random.default_rng(seed)
    lo, hi = config.cell_radius, config.area_side - config.cell_radius
    # uniform BS draws are consumed even in grid mode so the remaining stream is identical
    raw = rng.uniform(lo, hi, size=(config.n_cells, 2))
    if config.bs_placement == "grid":
        bs = _grid_positions(config)
    else:
        bs = [Point2D(float(x), float(y)) for x, y in raw]

    users, pairs = [], []
    for b in bs:
        if config.fixed_d2d_per_cell is not None:
            n_d2d = config.fixed_d2d_per_cell
        else:
            n_d2d = int(rng.integers(0, config.max_d2d_per_cell + 1))
        users.append(tuple(_uniform_in_disk(rng, b, config.cell_radius)
                           for _ in range(config.n_cellular_bands)))
        cell_pairs = []
        for _ in range(n_d2d):
            tx = _uniform_in_disk(rng, b, config.cell_radius)
            cell_pairs.append(D2DPair(tx, _draw_rx(rng, tx, b, config)))
        pairs.append(tuple(cell_pairs))
    return Scenario(config, tuple(bs), tuple(users), tuple(pairs), seed)


def save_scenario(scn: Scenario, path, allocation=None) -> None:
    data = {"scenario": scn.to_dict()}
    if allocation is not None:
        data["allocation"] = allocation.to_list(scn)
    Path(path).write_text(json.dumps(data, indent=2))


def load_scenario(path) -> Scenario:
    data = json.loads(Path(path).read_text())
    return Scenario.from_dict(data.get("scenario", data))
