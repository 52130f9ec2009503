"""Band assignment of D2D pairs, constraint checks and the system-rate objective.

An :class:`Allocation` maps every D2D key ``(cell, k)`` to one :class:`BandRef`.
Solvers work on the equivalent flat *code* vector in label order, where code
``j < N`` is cellular band ``j`` and code ``N + y`` is mm-wave band ``y``.

A *band set* is everything transmitting on one band across all cells: the
D2D pairs assigned to it and, for a cellular band, the cellular users on it.
Because rates only couple through co-band transmitters, the system rate is
the sum of the per-band set rates.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np

from .channel import RadioParams, link_gains
from .scenario import ConfigError, Scenario


class ValidationError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class BandKind(str, Enum):
    CELLULAR = "cellular"
    MMWAVE = "mmwave"


class BandRef(NamedTuple):
    kind: BandKind
    index: int

    def code(self, n_cellular: int) -> int:
        return self.index if self.kind is BandKind.CELLULAR else n_cellular + self.index

    @classmethod
    def from_code(cls, code: int, n_cellular: int) -> "BandRef":
        if code < n_cellular:
            return cls(BandKind.CELLULAR, int(code))
        return cls(BandKind.MMWAVE, int(code - n_cellular))

    def __str__(self) -> str:
        return f"{'c' if self.kind is BandKind.CELLULAR else 'm'}{self.index}"


def cellular(j: int) -> BandRef:
    return BandRef(BandKind.CELLULAR, j)


def mmwave(y: int) -> BandRef:
    return BandRef(BandKind.MMWAVE, y)


class Violation(NamedTuple):
    kind: str
    key: tuple[int, int]
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.kind} {self.key}" + (f": {self.detail}" if self.detail else "")


@dataclass
class Allocation:
    assignment: dict[tuple[int, int], BandRef] = field(default_factory=dict)

    def band_of(self, cell: int, k: int) -> BandRef:
        return self.assignment[(cell, k)]

    def is_cellular(self, cell: int, k: int) -> bool:
        """The mode variable: True iff the pair shares a cellular user's band."""
        return self.assignment[(cell, k)].kind is BandKind.CELLULAR

    def move(self, key: tuple[int, int], to: BandRef) -> None:
        if key not in self.assignment:
            raise KeyError(f"no D2D pair {key} in allocation")
        self.assignment[key] = BandRef(BandKind(to.kind), int(to.index))

    def copy(self) -> "Allocation":
        return Allocation(dict(self.assignment))

    def codes(self, scn: Scenario) -> np.ndarray:
        problems = validate(scn, self)
        if problems:
            raise ValidationError(problems)
        n_c = scn.config.n_cellular_bands
        return np.array([self.assignment[key].code(n_c) for key in scn.d2d_labels], dtype=int)

    @classmethod
    def from_codes(cls, scn: Scenario, codes) -> "Allocation":
        n_c = scn.config.n_cellular_bands
        return cls({key: BandRef.from_code(int(c), n_c) for key, c in zip(scn.d2d_labels, codes)})

    def to_list(self, scn: Scenario | None = None) -> list[dict]:
        keys = scn.d2d_labels if scn is not None else sorted(self.assignment)
        return [
            {"cell": i, "d2d": k, "kind": self.assignment[(i, k)].kind.value,
             "band": self.assignment[(i, k)].index}
            for i, k in keys if (i, k) in self.assignment
        ]

    @classmethod
    def from_list(cls, rows) -> "Allocation":
        return cls({(int(r["cell"]), int(r["d2d"])): BandRef(BandKind(r["kind"]), int(r["band"]))
                    for r in rows})


def validate(scn: Scenario, alloc: Allocation) -> list[Violation]:
    """All constraint violations of ``alloc``; empty means feasible."""
    n_c, n_m = scn.config.n_cellular_bands, scn.config.n_mmwave_bands
    known = set(scn.d2d_labels)
    out = []
    for key in scn.d2d_labels:
        ref = alloc.assignment.get(key)
        if ref is None:
            out.append(Violation("unassigned", key))
            continue
        kind = ref.kind
        if kind not in (BandKind.CELLULAR, BandKind.MMWAVE):
            out.append(Violation("bad band kind", key, repr(kind)))
            continue
        limit = n_c if kind is BandKind.CELLULAR else n_m
        if not 0 <= ref.index < limit:
            out.append(Violation("band out of range", key, f"{ref} with {limit} {kind.value} bands"))
    for key in sorted(set(alloc.assignment) - known):
        out.append(Violation("unknown D2D pair", key))
    return out


class RateEvaluator:
    """Set and system rates of one drop over flat code vectors."""

    def __init__(self, scn: Scenario, params: RadioParams):
        self.scn = scn
        self.params = params
        self.g = g = link_gains(scn, params)
        self.n_cellular = scn.config.n_cellular_bands
        self.n_mmwave = scn.config.n_mmwave_bands
        self.n_bands = self.n_cellular + self.n_mmwave
        n = scn.n_cells
        cells = np.arange(n)
        # cellular band j, BS i: own signal and interference from other cells' users
        self._cue_sig = g.ue_bs[cells, :, cells]  # (n, N)
        self._cue_base = g.ue_bs.sum(axis=0).T - self._cue_sig  # (n, N)
        self._d2d_base = g.ue_rx.sum(axis=0)  # (N, D)
        self._d2d_sig = np.diagonal(g.tx_rx).copy()
        self._tx_rx_off = g.tx_rx.copy()
        np.fill_diagonal(self._tx_rx_off, 0.0)
        self._mm_gain = 1.0 - g.p_out

    # -- single allocation ------------------------------------------------
    def _cellular_parts(self, members: np.ndarray, j: int):
        g = self.g
        i_bs = self._cue_base[:, j] + g.tx_bs[members].sum(axis=0)
        cue = g.W_c * np.log2(1.0 + self._cue_sig[:, j] / (i_bs + g.noise_c))
        i_d = self._d2d_base[j, members] + self._tx_rx_off[np.ix_(members, members)].sum(axis=0)
        d2d = g.W_c * np.log2(1.0 + self._d2d_sig[members] / (i_d + g.noise_c))
        return cue, d2d

    def _mmwave_parts(self, members: np.ndarray):
        g = self.g
        i_d = g.mm[np.ix_(members, members)].sum(axis=0)
        return g.W_m * np.log2(1.0 + g.mm_signal[members] / (i_d + g.noise_m)) * self._mm_gain[members]

    def set_rate_members(self, members: np.ndarray, code: int) -> float:
        if code < self.n_cellular:
            cue, d2d = self._cellular_parts(members, code)
            return float(cue.sum() + d2d.sum())
        return float(self._mmwave_parts(members).sum())

    def set_rate(self, codes: np.ndarray, code: int) -> float:
        if not 0 <= code < self.n_bands:
            raise ConfigError(f"band code {code} out of range")
        return self.set_rate_members(np.flatnonzero(codes == code), code)

    def system_rate(self, codes: np.ndarray) -> float:
        return sum(self.set_rate(codes, b) for b in range(self.n_bands))

    def delta(self, codes: np.ndarray, d: int, to: int) -> float:
        """Change of the two touched set rates if pair ``d`` moves to band ``to``."""
        frm = int(codes[d])
        if frm == to:
            raise ValueError(f"pair {d} is already on band code {to}")
        src = np.flatnonzero(codes == frm)
        dst = np.flatnonzero(codes == to)
        before = self.set_rate_members(src, frm) + self.set_rate_members(dst, to)
        after = (self.set_rate_members(src[src != d], frm)
                 + self.set_rate_members(np.sort(np.append(dst, d)), to))
        return after - before

    def link_rates(self, codes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Per-cellular-user rates (n, N) and per-D2D expected rates (D,)."""
        cue = np.zeros((self.scn.n_cells, self.n_cellular))
        d2d = np.zeros(len(codes))
        for b in range(self.n_bands):
            members = np.flatnonzero(codes == b)
            if b < self.n_cellular:
                cue[:, b], d2d[members] = self._cellular_parts(members, b)
            else:
                d2d[members] = self._mmwave_parts(members)
        return cue, d2d

    # -- many allocations at once -----------------------------------------
    def batch_system_rate(self, codes: np.ndarray) -> np.ndarray:
        """System rate of every row of a (B, D) code matrix."""
        g = self.g
        codes = np.atleast_2d(codes)
        total = np.zeros(codes.shape[0])
        for b in range(self.n_bands):
            mask = (codes == b).astype(float)
            if b < self.n_cellular:
                i_bs = self._cue_base[:, b] + mask @ g.tx_bs
                total += (g.W_c * np.log2(1.0 + self._cue_sig[:, b] / (i_bs + g.noise_c))).sum(axis=1)
                i_d = self._d2d_base[b] + mask @ self._tx_rx_off
                r = g.W_c * np.log2(1.0 + self._d2d_sig / (i_d + g.noise_c))
            else:
                i_d = mask @ g.mm
                r = g.W_m * np.log2(1.0 + g.mm_signal / (i_d + g.noise_m)) * self._mm_gain
            total += (mask * r).sum(axis=1)
        return total


def _in_range(scn: Scenario, band: BandRef) -> bool:
    limit = scn.config.n_cellular_bands if band.kind is BandKind.CELLULAR else scn.config.n_mmwave_bands
    return 0 <= band.index < limit


def system_rate(scn: Scenario, alloc: Allocation, params: RadioParams) -> float:
    """Sum of every cellular-user rate and every D2D expected rate."""
    return RateEvaluator(scn, params).system_rate(alloc.codes(scn))


def set_rate(scn: Scenario, alloc: Allocation, band: BandRef, params: RadioParams) -> float:
    """Rate of one band set; a cellular set includes its co-band cellular users."""
    if not _in_range(scn, band):
        raise ConfigError(f"band {band} out of range")
    return RateEvaluator(scn, params).set_rate(alloc.codes(scn), band.code(scn.config.n_cellular_bands))


def delta_if_moved(scn: Scenario, alloc: Allocation, d2d: tuple[int, int], to: BandRef,
                   params: RadioParams) -> float:
    """System-rate change of moving one pair, from the two touched sets only.

    ``alloc`` is not modified.
    """
    if not _in_range(scn, to):
        raise ConfigError(f"band {to} out of range")
    codes = alloc.codes(scn)
    return RateEvaluator(scn, params).delta(codes, scn.label_index(*d2d), to.code(scn.config.n_cellular_bands))
