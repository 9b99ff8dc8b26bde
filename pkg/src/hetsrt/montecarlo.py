"""Monte Carlo estimation of outage and intercept probabilities.

The estimator simulates the exact per-draw capacities of the requested
scheme (never the asymptotic approximations) and counts threshold crossings:
outage tallies ``C_main < R_overall`` and intercept tallies
``C_eve > R_overall - R_secrecy``.

Trials are partitioned into fixed-size blocks, each seeded from the master
seed and its block index, so every tally is a pure function of
(seed, trials) no matter how blocks are spread over workers.  Per-block
results are integer counts, which makes the reduction exact and
order-independent.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import schemes
from .channel import BLOCK_TRIALS, FadingBlock, SystemConfig, Topology, draw_block
from .errors import ParameterError

METRICS = ("macro-outage", "small-outage", "macro-intercept", "small-intercept")


@dataclass(frozen=True)
class ProbabilityEstimate:
    """A binomial probability estimate with its normal-approximation standard
    error and a 95% Wilson interval (more honest at small hit counts)."""

    value: float
    trials: int
    std_err: float
    seed: int
    hits: int
    wilson_low: float
    wilson_high: float

    @classmethod
    def from_counts(cls, hits: int, trials: int, seed: int) -> "ProbabilityEstimate":
        p = hits / trials
        lo, hi = _wilson_interval(hits, trials)
        return cls(
            value=p,
            trials=trials,
            std_err=math.sqrt(p * (1.0 - p) / trials),
            seed=seed,
            hits=hits,
            wilson_low=lo,
            wilson_high=hi,
        )


def _wilson_interval(hits: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    p = hits / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2 * trials)) / denom
    half = z / denom * math.sqrt(p * (1.0 - p) / trials + z2 / (4 * trials * trials))
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class CurveTally:
    """Integer hit counts along rate grids, one entry per grid point.

    ``joint_*`` counts trials where both cells crossed simultaneously (only
    filled when requested; used for the variance of two-cell sum metrics).
    """

    trials: int
    macro_outage: np.ndarray
    macro_intercept: np.ndarray
    small_outage: np.ndarray
    small_intercept: np.ndarray
    joint_outage: np.ndarray | None = None
    joint_intercept: np.ndarray | None = None


def _capacity_arrays(
    scheme: str, block: FadingBlock, topology: Topology, cfg: SystemConfig
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    if scheme == "il":
        c_mm, c_ss, c_me, c_se, _ = schemes.il_capacity_arrays(block, cfg)
    elif scheme == "ic":
        c_mm, c_ss, c_me, c_se, _ = schemes.ic_capacity_arrays(block, topology, cfg)
    elif scheme == "ic-sdc":
        c_mm, _, c_me, _, _ = schemes.ic_capacity_arrays(block, topology, cfg)
        c_ss, c_se = schemes.ic_sdc_small_capacity_arrays(block, topology, cfg)
    else:
        raise ParameterError(f"unknown scheme {scheme!r}; expected one of {schemes.SCHEMES}")
    return c_mm, c_ss, c_me, c_se


def _count_below(values: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    """Per threshold t: how many entries satisfy value < t (strict)."""
    ordered = np.sort(values)
    return np.searchsorted(ordered, thresholds, side="left").astype(np.int64)


def _count_above(values: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    """Per threshold t: how many entries satisfy value > t (strict)."""
    ordered = np.sort(values)
    return (len(ordered) - np.searchsorted(ordered, thresholds, side="right")).astype(np.int64)


def _tally_blocks(args) -> tuple[np.ndarray, ...]:
    (
        scheme,
        topology,
        cfg,
        rates_macro,
        rates_small,
        seed,
        trials,
        block_lo,
        block_hi,
        eve_range,
        joint,
    ) = args
    thr_m_out = np.asarray(rates_macro, dtype=float)
    thr_m_int = thr_m_out - cfg.rate_macro_secrecy
    thr_s_out = np.asarray(rates_small, dtype=float)
    thr_s_int = thr_s_out - cfg.rate_small_secrecy

    counts = [np.zeros(len(thr_m_out), dtype=np.int64) for _ in range(2)]
    counts += [np.zeros(len(thr_s_out), dtype=np.int64) for _ in range(2)]
    j_out = np.zeros(len(thr_m_out), dtype=np.int64) if joint else None
    j_int = np.zeros(len(thr_m_out), dtype=np.int64) if joint else None

    for b in range(block_lo, block_hi):
        block = draw_block(topology, seed, b, eve_distance_range=eve_range)
        rows = min(BLOCK_TRIALS, trials - b * BLOCK_TRIALS)
        if rows < BLOCK_TRIALS:
            block = FadingBlock(
                h_am2=block.h_am2[:rows],
                h_as2=block.h_as2[:rows],
                h_ae2=block.h_ae2[:rows],
                h_sm2=block.h_sm2[:rows],
                h_ss2=block.h_ss2[:rows],
                h_se2=block.h_se2[:rows],
            )
        c_mm, c_ss, c_me, c_se = _capacity_arrays(scheme, block, topology, cfg)
        counts[0] += _count_below(c_mm, thr_m_out)
        counts[1] += _count_above(c_me, thr_m_int)
        counts[2] += _count_below(c_ss, thr_s_out)
        counts[3] += _count_above(c_se, thr_s_int)
        if joint:
            # joint events need elementwise pairing, searchsorted cannot help
            out_m = c_mm[:, None] < thr_m_out[None, :]
            out_s = c_ss[:, None] < thr_s_out[None, :]
            j_out += np.count_nonzero(out_m & out_s, axis=0)
            int_m = c_me[:, None] > thr_m_int[None, :]
            int_s = c_se[:, None] > thr_s_int[None, :]
            j_int += np.count_nonzero(int_m & int_s, axis=0)
    return (*counts, j_out, j_int)


def tally_curves(
    scheme: str,
    topology: Topology,
    cfg: SystemConfig,
    rates_macro,
    rates_small,
    trials: int,
    seed: int,
    workers: int = 1,
    eve_distance_range: tuple[float, float] | None = None,
    joint: bool = False,
) -> CurveTally:
    """Hit counts for all four metrics along per-cell overall-rate grids.

    Draws are shared across grid points (events are nested along the grid, so
    the resulting Monte Carlo curves are monotone in the rate).  Identical
    output for any ``workers`` value.
    """
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    if workers < 1:
        raise ParameterError("workers must be >= 1")
    if scheme in ("ic", "ic-sdc"):
        # raise the infeasibility error up front rather than inside a pool
        report = schemes.ic_feasibility(topology, cfg)
        if not report.feasible:
            from .errors import SchemeInfeasibleError

            raise SchemeInfeasibleError(
                f"power ratio {cfg.smr} exceeds the cancelation bound {report.beta_bound:.6g}"
            )

    rates_macro = np.atleast_1d(np.asarray(rates_macro, dtype=float))
    rates_small = np.atleast_1d(np.asarray(rates_small, dtype=float))
    n_blocks = -(-trials // BLOCK_TRIALS)
    jobs = []
    chunk = max(1, -(-n_blocks // (workers * 4))) if workers > 1 else n_blocks
    for lo in range(0, n_blocks, chunk):
        hi = min(lo + chunk, n_blocks)
        jobs.append(
            (
                scheme,
                topology,
                cfg,
                rates_macro,
                rates_small,
                seed,
                trials,
                lo,
                hi,
                eve_distance_range,
                joint,
            )
        )

    if workers == 1:
        partials = [_tally_blocks(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(_tally_blocks, jobs))

    def total(idx: int):
        parts = [p[idx] for p in partials]
        if parts[0] is None:
            return None
        return np.sum(parts, axis=0)

    return CurveTally(
        trials=trials,
        macro_outage=total(0),
        macro_intercept=total(1),
        small_outage=total(2),
        small_intercept=total(3),
        joint_outage=total(4),
        joint_intercept=total(5),
    )


def estimate(
    scheme: str,
    metric: str,
    topology: Topology,
    cfg: SystemConfig,
    trials: int,
    seed: int,
    workers: int = 1,
) -> ProbabilityEstimate:
    """Estimate one probability at the configured operating point.

    Outage metrics count ``C_main < R_overall``; intercept metrics count
    ``C_eve > R_overall - R_secrecy``, with the scheme's exact capacities.
    Deterministic for fixed (seed, trials), independent of ``workers``.
    """
    if metric not in METRICS:
        raise ParameterError(f"unknown metric {metric!r}; expected one of {METRICS}")
    tally = tally_curves(
        scheme,
        topology,
        cfg,
        rates_macro=[cfg.rate_macro_overall],
        rates_small=[cfg.rate_small_overall],
        trials=trials,
        seed=seed,
        workers=workers,
    )
    hits = {
        "macro-outage": tally.macro_outage,
        "small-outage": tally.small_outage,
        "macro-intercept": tally.macro_intercept,
        "small-intercept": tally.small_intercept,
    }[metric][0]
    return ProbabilityEstimate.from_counts(int(hits), trials, seed)


@dataclass(frozen=True)
class EstimateRequest:
    scheme: str
    metric: str
    topology: Topology
    cfg: SystemConfig
    trials: int
    seed: int


def estimate_batch(requests, workers: int = 1) -> list[ProbabilityEstimate]:
    """Run independent estimates; each result is identical to running
    ``estimate`` on its request alone, for every worker count."""
    return [
        estimate(r.scheme, r.metric, r.topology, r.cfg, r.trials, r.seed, workers=workers)
        for r in requests
    ]
