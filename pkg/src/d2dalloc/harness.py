"""Seeded Monte-Carlo sweeps, the oracle-gap metric and CSV output.

Every ``(value, seed)`` point regenerates the scenario from ``seed`` with the
swept parameter overridden; seeds are shared across values so curves are
paired.  The stochastic solvers are seeded with the same ``seed``, which makes
the heuristic start from exactly the ``mmw`` allocation of that point.

Config files are JSON::

    {
      "cell":  {<CellConfig fields>},
      "radio": {<RadioParams fields>},
      "sweep": {"parameter": "beta", "values": [0.02, 0.04],
                "schemes": ["heu", "mmw"], "seeds": [0, 1, 2],
                "budget": 10000000, "stall_limit": null}
    }

``"n_seeds": K`` may replace ``"seeds"`` and means seeds ``0..K-1``.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .channel import RadioParams
from .scenario import CellConfig, ConfigError, generate_scenario
from .solvers import (DEFAULT_BUDGET, HeuristicConfig, SearchSpaceError, SolverResult,
                      baseline_hcn_random, baseline_mmw, baseline_mmw_one_band,
                      exhaustive_allocate, heuristic_allocate)

log = logging.getLogger(__name__)

SCHEMES = ("heu", "mmw", "hcn", "mmw1", "oracle")
CELL_PARAMS = ("n_cells", "n_cellular_bands", "n_mmwave_bands", "cell_radius")
RADIO_PARAMS = ("P_m", "beta", "theta_3db", "theta_mis")
INT_PARAMS = ("n_cells", "n_cellular_bands", "n_mmwave_bands")
CSV_HEADER = ("param", "value", "scheme", "seed", "rate_bps", "iterations")
DEFAULT_SEEDS = 20


@dataclass
class SweepSpec:
    parameter: str
    values: list
    schemes: list[str]
    seeds: list[int]
    cell: CellConfig = field(default_factory=CellConfig)
    radio: RadioParams = field(default_factory=RadioParams)
    budget: int = DEFAULT_BUDGET
    stall_limit: int | None = None

    def check(self) -> None:
        if self.parameter not in CELL_PARAMS + RADIO_PARAMS:
            raise ConfigError(f"cannot sweep {self.parameter!r}; choose from {CELL_PARAMS + RADIO_PARAMS}")
        if not self.values:
            raise ConfigError("sweep needs at least one value")
        if not self.seeds:
            raise ConfigError("sweep needs at least one seed")
        bad = [s for s in self.schemes if s not in SCHEMES]
        if bad or not self.schemes:
            raise ConfigError(f"unknown schemes {bad}; choose from {SCHEMES}")
        for v in self.values:
            self.point(v)[0].check()
            self.point(v)[1].check()

    def point(self, value) -> tuple[CellConfig, RadioParams]:
        if self.parameter in INT_PARAMS:
            value = int(value)
        if self.parameter in CELL_PARAMS:
            return replace(self.cell, **{self.parameter: value}), self.radio
        return self.cell, replace(self.radio, **{self.parameter: value})


@dataclass(frozen=True)
class Record:
    param: str
    value: int | float
    scheme: str
    seed: int
    rate_bps: float | None  # None: oracle refused (budget)
    iterations: int | None


@dataclass
class SweepResult:
    records: list[Record] = field(default_factory=list)

    def rates(self, scheme: str, value) -> list[float]:
        return [r.rate_bps for r in self.records
                if r.scheme == scheme and r.value == value and r.rate_bps is not None]

    def values(self) -> list:
        return list(dict.fromkeys(r.value for r in self.records))

    def curve(self, scheme: str, what: str = "rate_bps") -> list[float]:
        """Seed-averaged ``rate_bps`` or ``iterations`` per swept value."""
        out = []
        for v in self.values():
            xs = [getattr(r, what) for r in self.records
                  if r.scheme == scheme and r.value == v and getattr(r, what) is not None]
            out.append(float(np.mean(xs)) if xs else math.nan)
        return out


def run_scheme(scheme: str, scn, params: RadioParams, seed: int,
               budget: int = DEFAULT_BUDGET, stall_limit: int | None = None) -> SolverResult:
    if scheme == "heu":
        return heuristic_allocate(scn, params, HeuristicConfig(stall_limit=stall_limit, rng_seed=seed))
    if scheme == "mmw":
        return baseline_mmw(scn, params, seed)
    if scheme == "hcn":
        return baseline_hcn_random(scn, params, seed)
    if scheme == "mmw1":
        return baseline_mmw_one_band(scn, params)
    if scheme == "oracle":
        return exhaustive_allocate(scn, params, budget)
    raise ConfigError(f"unknown scheme {scheme!r}")


def run_sweep(spec: SweepSpec) -> SweepResult:
    spec.check()
    out = SweepResult()
    for value in spec.values:
        value = int(value) if spec.parameter in INT_PARAMS else float(value)
        cell, radio = spec.point(value)
        drops = [generate_scenario(cell, seed) for seed in spec.seeds]
        for scheme in spec.schemes:
            for seed, scn in zip(spec.seeds, drops):
                try:
                    res = run_scheme(scheme, scn, radio, seed, spec.budget, spec.stall_limit)
                except SearchSpaceError as exc:
                    log.warning("%s=%s seed %s: oracle refused: %s", spec.parameter, value, seed, exc)
                    out.records.append(Record(spec.parameter, value, scheme, seed, None, None))
                    continue
                out.records.append(Record(spec.parameter, value, scheme, seed,
                                          res.rate_bps, res.iterations))
    return out


def average_deviation(r_os, r_heu) -> float:
    """Mean relative shortfall ``(R_os - R_heu) / R_os`` over paired points."""
    r_os, r_heu = list(r_os), list(r_heu)
    if not r_os or len(r_os) != len(r_heu):
        raise ConfigError("average_deviation needs two equal, non-empty lists")
    if any(r <= 0 for r in r_os):
        raise ConfigError("oracle rates must be > 0")
    return sum((o - h) / o for o, h in zip(r_os, r_heu)) / len(r_os)


def oracle_gap(spec: SweepSpec) -> tuple[float, SweepResult]:
    """Average deviation between seed-averaged oracle and heuristic curves."""
    spec = replace(spec, schemes=["heu", "oracle"])
    result = run_sweep(spec)
    r_os, r_heu = [], []
    for v in result.values():
        pairs = {}
        for r in result.records:
            if r.value == v and r.rate_bps is not None:
                pairs.setdefault(r.seed, {})[r.scheme] = r.rate_bps
        both = [p for p in pairs.values() if len(p) == 2]
        if both:
            r_os.append(float(np.mean([p["oracle"] for p in both])))
            r_heu.append(float(np.mean([p["heu"] for p in both])))
    if not r_os:
        raise SearchSpaceError("oracle refused every point")
    return average_deviation(r_os, r_heu), result


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_csv(result: SweepResult, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in result.records:
        w.writerow([r.param, _fmt(r.value), r.scheme, r.seed, _fmt(r.rate_bps), _fmt(r.iterations)])


def emit_csv(result: SweepResult, path) -> None:
    """Write ``result`` to ``path``; rows keep record order (value, scheme, seed)."""
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            write_csv(result, fh)
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def read_csv(path) -> SweepResult:
    out = SweepResult()
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            value = int(row["value"]) if row["param"] in INT_PARAMS else float(row["value"])
            out.records.append(Record(
                row["param"], value, row["scheme"], int(row["seed"]),
                float(row["rate_bps"]) if row["rate_bps"] else None,
                int(row["iterations"]) if row["iterations"] else None,
            ))
    return out


# -- config files -------------------------------------------------------------

def load_config(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _build(cls, data: dict):
    names = {f.name for f in fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} fields: {sorted(unknown)}")
    return cls(**data)


def cell_and_radio(config: dict) -> tuple[CellConfig, RadioParams]:
    return _build(CellConfig, config.get("cell", {})), _build(RadioParams, config.get("radio", {}))


def spec_from_config(config: dict) -> SweepSpec:
    cell, radio = cell_and_radio(config)
    sw = dict(config.get("sweep", {}))
    if "parameter" not in sw or "values" not in sw:
        raise ConfigError("sweep section needs 'parameter' and 'values'")
    seeds = sw.pop("seeds", None)
    n_seeds = sw.pop("n_seeds", DEFAULT_SEEDS)
    spec = SweepSpec(
        parameter=sw.pop("parameter"),
        values=list(sw.pop("values")),
        schemes=list(sw.pop("schemes", ["heu", "mmw", "hcn", "mmw1"])),
        seeds=list(seeds) if seeds is not None else list(range(n_seeds)),
        cell=cell, radio=radio,
        budget=int(sw.pop("budget", DEFAULT_BUDGET)),
        stall_limit=sw.pop("stall_limit", None),
    )
    if sw:
        raise ConfigError(f"unknown sweep fields: {sorted(sw)}")
    return spec
