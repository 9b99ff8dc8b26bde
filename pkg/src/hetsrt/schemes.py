"""Antenna selection, interference-cancelation signal design and the
instantaneous capacities of both transmission schemes.

Two schemes share the spectrum between the macro and small cells:

* interference-limited (``il``): both cells transmit and tolerate the mutual
  cross-tier interference; the macro side picks the antenna with the largest
  instantaneous gain toward its user.
* interference-canceled (``ic``): the macro base station spends part of its
  power budget on an auxiliary signal that exactly nulls the small-cell
  interference at the macro user, while the small base station applies a
  matched transmit weight.  Selection maximizes the effective post-cancelation
  SNR coefficient per antenna.

``ic-sdc`` is a simulation-only variant of ``ic`` in which the small user and
the eavesdropper each decode the small-cell message from the stronger of its
two received copies (direct, or embedded in the cancelation signal).

Every function here is a pure function of its inputs.  Scalar variants
operate on a single FadingDraw; ``*_arrays`` variants are vectorized over a
FadingBlock and are what the Monte Carlo engine uses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import FadingBlock, FadingDraw, SystemConfig, Topology
from .errors import SchemeInfeasibleError

SCHEMES = ("il", "ic", "ic-sdc")


@dataclass(frozen=True)
class SignalModel:
    """Unit-power information signals for both cells: E(|x|^2) = 1."""

    x_m_power: float = 1.0
    x_s_power: float = 1.0


@dataclass(frozen=True)
class CapacityTuple:
    """Instantaneous capacities (bit/s/Hz) of the four logical channels for
    one fading draw, plus the antenna the macro cell selected."""

    c_macro_main: float
    c_small_main: float
    c_macro_eve: float
    c_small_eve: float
    selected_antenna: int


@dataclass(frozen=True)
class IcFeasibility:
    """Cancelation power-budget report.

    ``margins[i] = gamma_m * sigma2_am[i] - gamma_s * sigma2_sm`` must be
    nonnegative for the design to close (zero margin leaves no power for the
    information signal).  ``beta_bound`` is the largest power ratio any
    antenna tolerates: min_i sigma2_am[i] / sigma2_sm.
    """

    margins: np.ndarray
    beta_bound: float
    feasible: bool  # margins >= 0 for every antenna (boundary included)
    strictly_feasible: bool  # margins > 0 for every antenna

    @property
    def per_antenna_ok(self) -> np.ndarray:
        return self.margins > 0.0


@dataclass(frozen=True)
class IcSignalDesign:
    """Realized cancelation design for one draw and one selected antenna."""

    selected_antenna: int
    inst_power: float  # instantaneous power of the auxiliary signal
    avg_power: float  # its average power (must not exceed the macro budget)
    weight_magnitude_sq: float  # |w|^2 applied at the SBS: h_am2 / sigma2_am
    g_sm: float  # centered SBS->MU gain: (h_sm2 - sigma2_sm) / sigma2_am


def ic_feasibility(topology: Topology, cfg: SystemConfig) -> IcFeasibility:
    """Check the cancelation budget for every antenna (reporting only)."""
    margins = cfg.gamma_m * topology.sigma2_am - cfg.gamma_s * topology.sigma2_sm
    return IcFeasibility(
        margins=margins,
        beta_bound=float(np.min(topology.sigma2_am) / topology.sigma2_sm),
        feasible=bool(np.all(margins >= 0.0)),
        strictly_feasible=bool(np.all(margins > 0.0)),
    )


def _require_feasible(topology: Topology, cfg: SystemConfig) -> IcFeasibility:
    report = ic_feasibility(topology, cfg)
    if not report.feasible:
        raise SchemeInfeasibleError(
            f"power ratio {cfg.smr} exceeds the cancelation bound "
            f"{report.beta_bound:.6g}"
        )
    return report


# --- selection ----------------------------------------------------------------


def il_select(draw: FadingDraw) -> int:
    """Index of the antenna with the largest gain toward the macro user.
    Ties resolve to the lowest index."""
    return int(np.argmax(draw.h_am2))


def ic_select(draw: FadingDraw, topology: Topology, cfg: SystemConfig) -> int:
    """Index maximizing the post-cancelation SNR coefficient times the gain.

    For i.i.d. antenna statistics the weights are all equal, so this
    coincides with il_select.  Ties resolve to the lowest index.
    """
    _require_feasible(topology, cfg)
    weights = cfg.gamma_m - cfg.gamma_s * topology.sigma2_sm / topology.sigma2_am
    return int(np.argmax(weights * draw.h_am2))


def ic_design(
    draw: FadingDraw, selected: int, topology: Topology, cfg: SystemConfig
) -> IcSignalDesign:
    """Auxiliary-signal powers and SBS weight for one draw.

    The auxiliary signal is scaled so its contribution at the macro user is
    the exact negative of the weighted small-cell signal there; the residual
    interference is identically zero by construction.
    """
    _require_feasible(topology, cfg)
    s_am = float(topology.sigma2_am[selected])
    avg_power = topology.sigma2_sm / s_am * cfg.gamma_s
    if avg_power > cfg.gamma_m:
        raise SchemeInfeasibleError(
            f"average cancelation power {avg_power:.6g} exceeds the macro budget {cfg.gamma_m:.6g}"
        )
    return IcSignalDesign(
        selected_antenna=selected,
        inst_power=draw.h_sm2 / s_am * cfg.gamma_s,
        avg_power=avg_power,
        weight_magnitude_sq=float(draw.h_am2[selected]) / s_am,
        g_sm=(draw.h_sm2 - topology.sigma2_sm) / s_am,
    )


# --- vectorized capacity kernels ------------------------------------------------


def il_capacity_arrays(
    block: FadingBlock, cfg: SystemConfig
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Per-trial (c_macro_main, c_small_main, c_macro_eve, c_small_eve, selected)
    for the interference-limited scheme."""
    gm, gs = cfg.gamma_m, cfg.gamma_s
    sel = np.argmax(block.h_am2, axis=1)
    rows = np.arange(block.trials)
    h_am2 = block.h_am2[rows, sel]
    h_as2 = block.h_as2[rows, sel]
    h_ae2 = block.h_ae2[rows, sel]
    c_mm = np.log2(1.0 + gm * h_am2 / (gs * block.h_sm2 + 1.0))
    c_ss = np.log2(1.0 + gs * block.h_ss2 / (gm * h_as2 + 1.0))
    c_me = np.log2(1.0 + gm * h_ae2 / (gs * block.h_se2 + 1.0))
    c_se = np.log2(1.0 + gs * block.h_se2 / (gm * h_ae2 + 1.0))
    return c_mm, c_ss, c_me, c_se, sel


def _ic_selected(
    block: FadingBlock, topology: Topology, cfg: SystemConfig
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Selected-antenna quantities shared by the ic and ic-sdc kernels."""
    weights = cfg.gamma_m - cfg.gamma_s * topology.sigma2_sm / topology.sigma2_am
    sel = np.argmax(weights * block.h_am2, axis=1)
    rows = np.arange(block.trials)
    s_am = topology.sigma2_am[sel]
    return (
        sel,
        block.h_am2[rows, sel],
        block.h_as2[rows, sel],
        block.h_ae2[rows, sel],
        s_am,
        weights[sel],
    )


def ic_capacity_arrays(
    block: FadingBlock, topology: Topology, cfg: SystemConfig
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Per-trial capacities for the interference-canceled scheme.

    The macro-user channel is interference-free by the cancelation identity;
    the other three channels see the auxiliary signal as additional noise.
    """
    _require_feasible(topology, cfg)
    gm, gs = cfg.gamma_m, cfg.gamma_s
    sel, h_am2, h_as2, h_ae2, s_am, w = _ic_selected(block, topology, cfg)

    c_mm = np.log2(1.0 + w * h_am2)

    g_sm = (block.h_sm2 - topology.sigma2_sm) / s_am
    interf = gm + gs * g_sm  # >= post-cancelation coefficient > 0 when feasible
    c_ss = np.log2(1.0 + gs * block.h_ss2 * h_am2 / s_am / (interf * h_as2 + 1.0))

    num_me = (gm * s_am - gs * topology.sigma2_sm) * h_ae2
    den_me = gs * (h_ae2 * block.h_sm2 + block.h_se2 * h_am2) + s_am
    c_me = np.log2(1.0 + num_me / den_me)

    c_se = np.log2(1.0 + gs * block.h_se2 * h_am2 / s_am / (interf * h_ae2 + 1.0))
    return c_mm, c_ss, c_me, c_se, sel


def ic_sdc_small_capacity_arrays(
    block: FadingBlock, topology: Topology, cfg: SystemConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Per-trial small-cell capacities when the receiver picks the stronger
    of its two copies of the small-cell signal.

    Branch one is the direct SBS link (identical to the ic kernel).  Branch
    two decodes from the auxiliary macro signal (power gamma_s*h_sm2/s_am on
    the antenna link), treating the direct copy, the macro information signal
    and noise as interference.  The eavesdropper mirrors the same combining.
    """
    _require_feasible(topology, cfg)
    gm, gs = cfg.gamma_m, cfg.gamma_s
    sel, h_am2, h_as2, h_ae2, s_am, w = _ic_selected(block, topology, cfg)

    g_sm = (block.h_sm2 - topology.sigma2_sm) / s_am
    interf = gm + gs * g_sm
    p_aux = gs * block.h_sm2 / s_am  # instantaneous auxiliary-signal power
    direct_su = gs * block.h_ss2 * h_am2 / s_am
    direct_eve = gs * block.h_se2 * h_am2 / s_am

    sinr_su_direct = direct_su / (interf * h_as2 + 1.0)
    sinr_su_aux = p_aux * h_as2 / (direct_su + w * h_as2 + 1.0)
    c_ss = np.log2(1.0 + np.maximum(sinr_su_direct, sinr_su_aux))

    sinr_eve_direct = direct_eve / (interf * h_ae2 + 1.0)
    sinr_eve_aux = p_aux * h_ae2 / (direct_eve + w * h_ae2 + 1.0)
    c_se = np.log2(1.0 + np.maximum(sinr_eve_direct, sinr_eve_aux))
    return c_ss, c_se


# --- scalar wrappers ------------------------------------------------------------


def _as_block(draw: FadingDraw) -> FadingBlock:
    return FadingBlock(
        h_am2=np.asarray(draw.h_am2, dtype=float)[None, :],
        h_as2=np.asarray(draw.h_as2, dtype=float)[None, :],
        h_ae2=np.asarray(draw.h_ae2, dtype=float)[None, :],
        h_sm2=np.array([draw.h_sm2]),
        h_ss2=np.array([draw.h_ss2]),
        h_se2=np.array([draw.h_se2]),
    )


def il_capacities(draw: FadingDraw, cfg: SystemConfig) -> CapacityTuple:
    """Capacities of the interference-limited scheme for one draw."""
    c_mm, c_ss, c_me, c_se, sel = il_capacity_arrays(_as_block(draw), cfg)
    return CapacityTuple(float(c_mm[0]), float(c_ss[0]), float(c_me[0]), float(c_se[0]), int(sel[0]))


def ic_capacities(draw: FadingDraw, topology: Topology, cfg: SystemConfig) -> CapacityTuple:
    """Capacities of the interference-canceled scheme for one draw."""
    c_mm, c_ss, c_me, c_se, sel = ic_capacity_arrays(_as_block(draw), topology, cfg)
    return CapacityTuple(float(c_mm[0]), float(c_ss[0]), float(c_me[0]), float(c_se[0]), int(sel[0]))


def ic_sdc_small_capacities(
    draw: FadingDraw, topology: Topology, cfg: SystemConfig
) -> tuple[float, float]:
    """(small-user, eavesdropper) capacities under selection combining."""
    c_ss, c_se = ic_sdc_small_capacity_arrays(_as_block(draw), topology, cfg)
    return float(c_ss[0]), float(c_se[0])
