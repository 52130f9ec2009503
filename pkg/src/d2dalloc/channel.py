"""Link-level radio model: conversions, antenna pattern, blockage, SINR and rates.

Conventions
-----------
* Powers are configured in dBm, gains in dBi, angles in degrees; everything is
  converted to linear Watts / linear gain once, in :class:`RadioParams`.
* Cellular-band links use omnidirectional antennas: device gain ``G_0`` and BS
  gain ``G_b``.  mm-wave links use the 802.15.3c reference pattern of
  :func:`antenna_gain_db` with each antenna's boresight pointing at its peer,
  rotated clockwise by ``theta_mis``.
* Cellular sub-channel ``j`` and mm-wave band ``y`` are reused in every cell, so
  every co-band transmitter in the system interferes.
* Link distances below ``l_min`` are clamped to ``l_min``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .scenario import ConfigError, Point2D, Scenario

SPEED_OF_LIGHT = 299_792_458.0


class GeometryError(ValueError):
    """An angle was requested between coincident points."""


class ModeError(ValueError):
    """A mode-specific rate was requested for a D2D pair in the other mode."""


def dbm_to_watt(p_dbm: float) -> float:
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def watt_to_dbm(p_w: float) -> float:
    return 10.0 * math.log10(p_w) + 30.0


def db_to_linear(g_db: float) -> float:
    return 10.0 ** (g_db / 10.0)


def noise_power(psd_dbm: float, bandwidth_hz: float, unit: str = "Hz") -> float:
    """Noise power in Watts of a PSD given in dBm per ``unit`` over ``bandwidth_hz``."""
    scale = {"Hz": 1.0, "MHz": 1e6}[unit]
    return dbm_to_watt(psd_dbm) * bandwidth_hz / scale


def max_gain_db(theta_3db: float) -> float:
    return 10.0 * math.log10((1.6162 / math.sin(math.radians(theta_3db / 2.0))) ** 2)


def sidelobe_gain_db(theta_3db: float) -> float:
    # ln takes the beamwidth as a plain number of degrees
    return -0.4111 * math.log(theta_3db) - 10.579


def antenna_gain_db(theta: float, theta_3db: float) -> float:
    """Gain in dB at angular offset ``theta`` (degrees, in [0, 180]) from boresight.

    Gaussian main lobe out to half the main-lobe width ``2.6 * theta_3db``,
    constant side-lobe level beyond it.
    """
    if not 0.0 < theta_3db < 180.0:
        raise ConfigError(f"theta_3db must lie in (0, 180), got {theta_3db}")
    theta = abs(theta)
    if theta <= 1.3 * theta_3db:
        return max_gain_db(theta_3db) - 3.01 * (2.0 * theta / theta_3db) ** 2
    return sidelobe_gain_db(theta_3db)


def _wrap180(deg):
    """Absolute angle folded into [0, 180]."""
    return np.abs((np.asarray(deg) + 180.0) % 360.0 - 180.0)


def boresight_angle(ant: Point2D, target: Point2D, other: Point2D, mis_deg: float = 0.0) -> float:
    """Angle in degrees between the antenna's boresight and the direction to ``other``.

    Boresight points from ``ant`` to ``target`` and is then rotated clockwise
    by ``mis_deg`` (counter-clockwise for negative values).
    """
    if tuple(ant) == tuple(target) or tuple(ant) == tuple(other):
        raise GeometryError("boresight angle undefined for coincident points")
    bore = math.degrees(math.atan2(target[1] - ant[1], target[0] - ant[0])) - mis_deg
    look = math.degrees(math.atan2(other[1] - ant[1], other[0] - ant[0]))
    return float(_wrap180(look - bore))


def blockage_prob(l: float, beta: float) -> float:
    return 1.0 - math.exp(-beta * l)


def k0(carrier_hz: float, const: float = 1.0) -> float:
    """Free-space coefficient ``const * (wavelength / 4 pi)**2``."""
    if not carrier_hz > 0:
        raise ConfigError("carrier frequency must be > 0")
    lam = SPEED_OF_LIGHT / carrier_hz
    return const * (lam / (4.0 * math.pi)) ** 2


@dataclass(frozen=True)
class RadioParams:
    W_m: float = 1.08e9  # Hz
    W_c: float = 1.5e4  # Hz
    N0_m: float = -134.0  # dBm/MHz
    N0_c: float = -174.0  # dBm/Hz
    P_m: float = 20.0  # dBm
    P_c: float = 23.0  # dBm
    alpha: float = 2.0
    rho: float = 1.0
    theta_3db: float = 30.0  # deg
    beta: float = 0.01  # 1/m
    G_0: float = 0.5  # dBi
    G_b: float = 14.0  # dBi
    h0_sq: float = 1.0
    carrier_mmwave: float = 60e9  # Hz
    theta_mis: float = 0.0  # deg, clockwise positive
    k0_const: float = 1.0
    l_min: float = 0.1  # m
    # when set, |h0|^2 is h0_sq * Exp(1), drawn once per cell from this seed
    h0_rayleigh_seed: int | None = None

    def check(self) -> None:
        for name in ("W_m", "W_c", "N0_m", "N0_c", "P_m", "P_c", "h0_sq", "carrier_mmwave"):
            if not math.isfinite(getattr(self, name)) and not (
                name in ("P_m", "P_c") and getattr(self, name) == -math.inf
            ):
                raise ConfigError(f"{name} must be finite")
        if not self.alpha > 0:
            raise ConfigError("alpha must be > 0")
        if not 0.0 <= self.rho <= 1.0:
            raise ConfigError("rho must lie in [0, 1]")
        if not 0.0 < self.theta_3db < 180.0:
            raise ConfigError("theta_3db must lie in (0, 180)")
        if self.beta < 0:
            raise ConfigError("beta must be >= 0")
        if not self.l_min > 0:
            raise ConfigError("l_min must be > 0")

    @property
    def p_c_w(self) -> float:
        return dbm_to_watt(self.P_c)

    @property
    def p_m_w(self) -> float:
        return dbm_to_watt(self.P_m)

    @property
    def noise_c_w(self) -> float:
        return noise_power(self.N0_c, self.W_c, "Hz")

    @property
    def noise_m_w(self) -> float:
        return noise_power(self.N0_m, self.W_m, "MHz")

    @property
    def k0(self) -> float:
        return k0(self.carrier_mmwave, self.k0_const)

    def h0_per_cell(self, n_cells: int) -> np.ndarray:
        if self.h0_rayleigh_seed is None:
            return np.full(n_cells, self.h0_sq)
        rng = np.random.default_rng(self.h0_rayleigh_seed)
        return self.h0_sq * rng.exponential(1.0, size=n_cells)


@dataclass(frozen=True)
class LinkBudget:
    signal_w: float
    interference_w: float
    noise_w: float
    bandwidth_hz: float

    @property
    def sinr(self) -> float:
        return self.signal_w / (self.interference_w + self.noise_w)

    @property
    def rate_bps(self) -> float:
        return self.bandwidth_hz * math.log2(1.0 + self.sinr)


@dataclass(frozen=True, eq=False)
class LinkGains:
    """Received powers (Watts) between every transmitter/receiver pair of a drop.

    Index conventions: ``z, i`` cells, ``j`` cellular band, ``e, d`` D2D pairs in
    label order (``e`` transmitter, ``d`` receiver).

    ue_bs[z, j, i]   cellular user (z, j) at BS i
    tx_bs[e, i]      D2D tx e at BS i, cellular-band gains
    ue_rx[z, j, d]   cellular user (z, j) at D2D rx d
    tx_rx[e, d]      D2D tx e at D2D rx d, cellular-band gains (diagonal = own signal)
    mm[e, d]         D2D tx e at D2D rx d in mm-wave, MUI factor applied (diagonal zero)
    mm_signal[d]     own mm-wave signal at D2D rx d
    p_out[d]         blockage probability of pair d
    """

    ue_bs: np.ndarray
    tx_bs: np.ndarray
    ue_rx: np.ndarray
    tx_rx: np.ndarray
    mm: np.ndarray
    mm_signal: np.ndarray
    p_out: np.ndarray
    noise_c: float
    noise_m: float
    W_c: float
    W_m: float


def _pairwise_dist(a: np.ndarray, b: np.ndarray, l_min: float) -> np.ndarray:
    d = np.hypot(a[:, None, 0] - b[None, :, 0], a[:, None, 1] - b[None, :, 1])
    return np.maximum(d, l_min)


def _heading_deg(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Bearing from each src row to each dst row, (len(src), len(dst)); 0 for coincident."""
    dx = dst[None, :, 0] - src[:, None, 0]
    dy = dst[None, :, 1] - src[:, None, 1]
    return np.degrees(np.arctan2(dy, dx))


def _gain_linear(theta: np.ndarray, theta_3db: float) -> np.ndarray:
    main = max_gain_db(theta_3db) - 3.01 * (2.0 * theta / theta_3db) ** 2
    g_db = np.where(theta <= 1.3 * theta_3db, main, sidelobe_gain_db(theta_3db))
    return 10.0 ** (g_db / 10.0)


def compute_link_gains(scn: Scenario, params: RadioParams) -> LinkGains:
    params.check()
    a, lm = params.alpha, params.l_min
    n, nb = scn.n_cells, scn.config.n_cellular_bands
    bs, cue = scn.bs_xy, scn.cue_xy.reshape(-1, 2)
    tx, rx = scn.tx_xy, scn.rx_xy
    h0 = params.h0_per_cell(n)
    h0_ue = np.repeat(h0, nb)[:, None]
    h0_tx = h0[scn.d2d_cell][:, None]
    pc = params.p_c_w
    g_bs = db_to_linear(params.G_0) * db_to_linear(params.G_b)
    g_dd = db_to_linear(params.G_0) ** 2

    ue_bs = (h0_ue * g_bs * pc * _pairwise_dist(cue, bs, lm) ** -a).reshape(n, nb, n)
    tx_bs = h0_tx * g_bs * pc * _pairwise_dist(tx, bs, lm) ** -a
    ue_rx = (h0_ue * g_dd * pc * _pairwise_dist(cue, rx, lm) ** -a).reshape(n, nb, len(rx))
    tx_rx = h0_tx * g_dd * pc * _pairwise_dist(tx, rx, lm) ** -a

    # mm-wave: tx e boresight toward rx e, rx d boresight toward tx d
    tx_bore = np.diagonal(_heading_deg(tx, rx)) - params.theta_mis
    rx_bore = np.diagonal(_heading_deg(rx, tx)) - params.theta_mis
    theta_t = _wrap180(_heading_deg(tx, rx) - tx_bore[:, None])  # [e, d]
    theta_r = _wrap180(_heading_deg(rx, tx) - rx_bore[:, None]).T  # [e, d]
    l_mm = _pairwise_dist(tx, rx, lm)
    mm_all = params.k0 * _gain_linear(theta_t, params.theta_3db) \
        * _gain_linear(theta_r, params.theta_3db) * l_mm ** -a * params.p_m_w
    mm_signal = np.diagonal(mm_all).copy()
    mm = params.rho * mm_all
    np.fill_diagonal(mm, 0.0)
    l_own = np.diagonal(l_mm) if len(tx) else np.zeros(0)
    p_out = 1.0 - np.exp(-params.beta * l_own)

    return LinkGains(ue_bs, tx_bs, ue_rx, tx_rx, mm, mm_signal, p_out,
                     params.noise_c_w, params.noise_m_w, params.W_c, params.W_m)


@lru_cache(maxsize=64)
def link_gains(scn: Scenario, params: RadioParams) -> LinkGains:
    """Cached :func:`compute_link_gains`; scenarios and params are hashable values."""
    return compute_link_gains(scn, params)


# ---------------------------------------------------------------------------
# Per-link budgets.  ``alloc`` is anything with ``codes(scn)`` returning the
# flat band-code vector: code j < N is cellular band j, code N + y is mm-wave y.
# ---------------------------------------------------------------------------

def _check_band(scn: Scenario, band: int) -> None:
    if not 0 <= band < scn.config.n_cellular_bands:
        raise ConfigError(f"cellular band {band} out of range")


def cellular_interference_at_bs(scn, alloc, cell: int, band: int, params: RadioParams) -> float:
    """Interference at BS ``cell`` on cellular band ``band``: co-band cellular users
    of other cells plus every co-band D2D transmitter."""
    _check_band(scn, band)
    g = link_gains(scn, params)
    codes = alloc.codes(scn)
    others = g.ue_bs[:, band, cell].sum() - g.ue_bs[cell, band, cell]
    return float(others + g.tx_bs[codes == band, cell].sum())


def cellular_user_budget(scn, alloc, cell: int, band: int, params: RadioParams) -> LinkBudget:
    g = link_gains(scn, params)
    interf = cellular_interference_at_bs(scn, alloc, cell, band, params)
    return LinkBudget(float(g.ue_bs[cell, band, cell]), interf, g.noise_c, g.W_c)


def cellular_user_rate(scn, alloc, cell: int, band: int, params: RadioParams) -> float:
    return cellular_user_budget(scn, alloc, cell, band, params).rate_bps


def _d2d_code(scn, alloc, cell, k):
    d = scn.label_index(cell, k)
    return d, int(alloc.codes(scn)[d])


def d2d_cellular_budget(scn, alloc, cell: int, k: int, params: RadioParams) -> LinkBudget:
    d, code = _d2d_code(scn, alloc, cell, k)
    if code >= scn.config.n_cellular_bands:
        raise ModeError(f"D2D ({cell}, {k}) is in mm-wave mode")
    g = link_gains(scn, params)
    codes = alloc.codes(scn)
    co = codes == code
    co[d] = False
    interf = g.ue_rx[:, code, d].sum() + g.tx_rx[co, d].sum()
    return LinkBudget(float(g.tx_rx[d, d]), float(interf), g.noise_c, g.W_c)


def d2d_cellular_rate(scn, alloc, cell: int, k: int, params: RadioParams) -> float:
    return d2d_cellular_budget(scn, alloc, cell, k, params).rate_bps


def d2d_mmwave_budget(scn, alloc, cell: int, k: int, params: RadioParams) -> LinkBudget:
    d, code = _d2d_code(scn, alloc, cell, k)
    if code < scn.config.n_cellular_bands:
        raise ModeError(f"D2D ({cell}, {k}) is in cellular mode")
    g = link_gains(scn, params)
    co = alloc.codes(scn) == code
    return LinkBudget(float(g.mm_signal[d]), float(g.mm[co, d].sum()), g.noise_m, g.W_m)


def d2d_mmwave_rate(scn, alloc, cell: int, k: int, params: RadioParams) -> tuple[float, float]:
    """Unblocked mm-wave rate and the pair's blockage probability."""
    budget = d2d_mmwave_budget(scn, alloc, cell, k, params)
    p_out = link_gains(scn, params).p_out[scn.label_index(cell, k)]
    return budget.rate_bps, float(p_out)


def d2d_rate(scn, alloc, cell: int, k: int, params: RadioParams) -> float:
    """Expected rate of a D2D pair in whichever mode it is assigned."""
    _, code = _d2d_code(scn, alloc, cell, k)
    if code < scn.config.n_cellular_bands:
        return d2d_cellular_rate(scn, alloc, cell, k, params)
    rate, p_out = d2d_mmwave_rate(scn, alloc, cell, k, params)
    return (1.0 - p_out) * rate
