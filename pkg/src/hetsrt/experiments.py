"""Parameter sweeps reproducing the evaluation scenarios as tabular data.

Every sweep is a pure function of (inputs, seed): analytic backends call the
closed forms, Monte Carlo backends run the seeded trial engine, and rows come
back in grid order regardless of how the work is scheduled.

The ``build_figure`` entry point bundles the preset scenarios (numbered 2-8):

=======  ==============================================================
figure   dataset
=======  ==============================================================
2        macro-cell SRT curves, both schemes, macro SNR 65 and 75 dB
3        minimized IOP vs macro SNR, both cells/schemes, 16/32 antennas
4        macro-cell SRT curves, both schemes, 16 and 32 antennas
5        minimized IOP vs antenna count, both cells/schemes, 65/75 dB
6        small-cell SRT: interference-canceled vs its selection-combining
         variant, SNR 60/70/80 dB (variant is simulation-only)
7        two-cell sum SRT with eavesdropper distances redrawn uniformly
         per trial (simulation-only)
8        minimized two-cell sum IOP vs small-to-macro power ratio,
         SBS->SU distance 20 and 30 m
=======  ==============================================================
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import analytics, montecarlo
from .channel import SystemConfig, Topology, default_config, default_topology
from .errors import ParameterError, SchemeInfeasibleError

BACKENDS = ("analytic", "montecarlo")
CELLS = ("macro", "small")

DEFAULT_RATE_STEP = 0.05
DEFAULT_RATE_MAX = 10.0


@dataclass(frozen=True)
class SrtPoint:
    """One point of a security-reliability tradeoff curve."""

    rate_overall: float
    outage: float
    intercept: float
    backend: str
    outage_std_err: float | None = None
    intercept_std_err: float | None = None


@dataclass(frozen=True)
class IopPoint:
    """Minimized mean of intercept and outage probability at one sweep value."""

    sweep_var: float
    iop: float
    minimizing_rate: float
    scheme: str = ""
    cell: str = ""
    backend: str = "analytic"


def rate_grid(r_secrecy: float, upper: float = DEFAULT_RATE_MAX, step: float = DEFAULT_RATE_STEP) -> np.ndarray:
    """Ascending overall-rate grid from the secrecy rate to ``upper``."""
    if upper < r_secrecy:
        raise ParameterError("rate grid upper bound below the secrecy rate")
    count = int(round((upper - r_secrecy) / step)) + 1
    return np.linspace(r_secrecy, upper, count)


def _cfg_at_rate(cfg: SystemConfig, cell: str, rate: float) -> SystemConfig:
    if cell == "macro":
        return cfg.replace(rate_macro_overall=float(rate))
    if cell == "small":
        return cfg.replace(rate_small_overall=float(rate))
    raise ParameterError(f"unknown cell {cell!r}; expected 'macro' or 'small'")


def analytic_pair(scheme: str, cell: str, topology: Topology, cfg: SystemConfig) -> tuple[float, float]:
    """(outage, intercept) from the closed forms at the configured rates.

    The interference-canceled small-cell forms use their finite-SNR integral
    flavors; the macro intercept uses the E1 series (its exact dual).
    The selection-combining variant has no analytic form.
    """
    if scheme == "il":
        if cell == "macro":
            return (
                analytics.il_macro_outage(topology, cfg),
                analytics.il_macro_intercept(topology, cfg),
            )
        return (
            analytics.il_small_outage(topology, cfg),
            analytics.il_small_intercept(topology, cfg),
        )
    if scheme == "ic":
        if cell == "macro":
            return (
                analytics.ic_macro_outage(topology, cfg),
                analytics.ic_macro_intercept(topology, cfg, mode="closed"),
            )
        return (
            analytics.ic_small_outage(topology, cfg, mode="integral"),
            analytics.ic_small_intercept(topology, cfg, mode="integral"),
        )
    raise ParameterError(f"no analytic backend for scheme {scheme!r}")


def _check_grid(grid: np.ndarray, r_secrecy: float) -> np.ndarray:
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if grid.size == 0:
        raise ParameterError("rate grid must be nonempty")
    if np.any(np.diff(grid) < 0):
        raise ParameterError("rate grid must be ascending")
    if grid[0] < r_secrecy:
        raise ParameterError("rate grid must start at or above the secrecy rate")
    return grid


def srt_curve(
    scheme: str,
    cell: str,
    topology: Topology,
    cfg: SystemConfig,
    grid,
    backend: str = "analytic",
    trials: int = 1_000_000,
    seed: int = 1,
    workers: int = 1,
) -> list[SrtPoint]:
    """Sweep the cell's overall rate and report (outage, intercept) per point.

    Monte Carlo curves share one set of draws across the grid, so both
    probabilities are monotone along the grid for either backend.
    """
    r_sec = cfg.rate_macro_secrecy if cell == "macro" else cfg.rate_small_secrecy
    grid = _check_grid(grid, r_sec)
    if backend == "analytic":
        points = []
        for r in grid:
            out, intc = analytic_pair(scheme, cell, topology, _cfg_at_rate(cfg, cell, r))
            points.append(SrtPoint(float(r), out, intc, "analytic"))
        return points
    if backend == "montecarlo":
        rates_macro = grid if cell == "macro" else [cfg.rate_macro_overall]
        rates_small = grid if cell == "small" else [cfg.rate_small_overall]
        tally = montecarlo.tally_curves(
            scheme, topology, cfg, rates_macro, rates_small, trials, seed, workers
        )
        out_counts = tally.macro_outage if cell == "macro" else tally.small_outage
        int_counts = tally.macro_intercept if cell == "macro" else tally.small_intercept
        points = []
        for r, c_out, c_int in zip(grid, out_counts, int_counts):
            e_out = montecarlo.ProbabilityEstimate.from_counts(int(c_out), trials, seed)
            e_int = montecarlo.ProbabilityEstimate.from_counts(int(c_int), trials, seed)
            points.append(
                SrtPoint(float(r), e_out.value, e_int.value, "montecarlo", e_out.std_err, e_int.std_err)
            )
        return points
    raise ParameterError(f"unknown backend {backend!r}; expected one of {BACKENDS}")


def min_iop(
    scheme: str,
    cell: str,
    topology: Topology,
    cfg: SystemConfig,
    grid,
    backend: str = "analytic",
    trials: int = 1_000_000,
    seed: int = 1,
    workers: int = 1,
) -> IopPoint:
    """Grid-search the overall rate minimizing (outage + intercept) / 2.

    Ties resolve to the lowest rate.  ``sweep_var`` is filled with the macro
    SNR in dB; sweep drivers overwrite it with their own variable.
    """
    points = srt_curve(scheme, cell, topology, cfg, grid, backend, trials, seed, workers)
    iops = [(p.outage + p.intercept) / 2.0 for p in points]
    best = int(np.argmin(iops))
    return IopPoint(
        sweep_var=cfg.gamma_m_db,
        iop=iops[best],
        minimizing_rate=points[best].rate_overall,
        scheme=scheme,
        cell=cell,
        backend=backend,
    )


def sweep_n(
    schemes_list,
    topology_builder,
    cfg: SystemConfig,
    n_values,
    grids=None,
    backend: str = "analytic",
    trials: int = 1_000_000,
    seed: int = 1,
    workers: int = 1,
) -> list[IopPoint]:
    """Minimized IOP of both cells per (scheme, antenna count).

    ``topology_builder`` maps an antenna count to a Topology (for example
    ``default_topology``).
    """
    if grids is None:
        grids = {
            "macro": rate_grid(cfg.rate_macro_secrecy),
            "small": rate_grid(cfg.rate_small_secrecy),
        }
    points = []
    for n in n_values:
        if n < 1:
            raise ParameterError("antenna counts must be >= 1")
        topo = topology_builder(n)
        for scheme in schemes_list:
            for cell in CELLS:
                p = min_iop(scheme, cell, topo, cfg, grids[cell], backend, trials, seed, workers)
                points.append(
                    IopPoint(float(n), p.iop, p.minimizing_rate, scheme, cell, backend)
                )
    return points


def _sum_estimate(count_a, count_b, count_ab, trials: int) -> tuple[float, float]:
    """Mean and standard error of the per-trial average of two indicator
    variables sharing the same draws (values 0, 1/2, 1)."""
    mean = (count_a + count_b) / (2.0 * trials)
    second_moment = (count_a + count_b + 2.0 * count_ab) / (4.0 * trials)
    var = max(second_moment - mean * mean, 0.0)
    return mean, math.sqrt(var / trials)


def random_eve_sum_srt(
    schemes_list,
    cfg: SystemConfig,
    eve_distance_range: tuple[float, float],
    trials: int,
    seed: int,
    topology: Topology | None = None,
    grid=None,
    workers: int = 1,
) -> dict[str, list[SrtPoint]]:
    """Two-cell sum SRT with eavesdropper positions redrawn every trial.

    Both cells' overall rates sweep the same grid; each point reports the
    mean of the two cells' outage indicators and of their intercept
    indicators (simulation only).  Every antenna->eavesdropper distance and
    the SBS->eavesdropper distance are drawn independently and uniformly
    from ``eve_distance_range`` per trial, jointly with the fading.
    """
    lo, hi = eve_distance_range
    if not (0.0 < lo <= hi):
        raise ParameterError(f"bad eavesdropper distance range {eve_distance_range}")
    if topology is None:
        topology = default_topology(16)
    if cfg.rate_macro_secrecy != cfg.rate_small_secrecy:
        raise ParameterError("sum SRT sweeps one shared rate; secrecy rates must match")
    if grid is None:
        grid = rate_grid(cfg.rate_macro_secrecy)
    grid = _check_grid(grid, cfg.rate_macro_secrecy)
    curves: dict[str, list[SrtPoint]] = {}
    for scheme in schemes_list:
        tally = montecarlo.tally_curves(
            scheme,
            topology,
            cfg,
            rates_macro=grid,
            rates_small=grid,
            trials=trials,
            seed=seed,
            workers=workers,
            eve_distance_range=(lo, hi),
            joint=True,
        )
        points = []
        for i, r in enumerate(grid):
            s_out, se_out = _sum_estimate(
                tally.macro_outage[i], tally.small_outage[i], tally.joint_outage[i], trials
            )
            s_int, se_int = _sum_estimate(
                tally.macro_intercept[i],
                tally.small_intercept[i],
                tally.joint_intercept[i],
                trials,
            )
            points.append(SrtPoint(float(r), s_out, s_int, "montecarlo", se_out, se_int))
        curves[scheme] = points
    return curves


def sum_iop_vs_smr(
    schemes_list,
    topology: Topology,
    cfg: SystemConfig,
    beta_grid,
    grids=None,
    backend: str = "analytic",
    trials: int = 1_000_000,
    seed: int = 1,
    workers: int = 1,
) -> list[IopPoint]:
    """Per power ratio: minimize each cell's IOP over its rate grid, then
    average the two cells.  Rows per (scheme, beta): macro, small and 'sum'.

    When the interference-canceled scheme is requested, every beta must lie
    strictly inside its cancelation bound.
    """
    beta_grid = np.atleast_1d(np.asarray(beta_grid, dtype=float))
    if np.any(beta_grid < 0.0):
        raise ParameterError("power ratios must be >= 0")
    if "ic" in schemes_list or "ic-sdc" in schemes_list:
        bound = float(np.min(topology.sigma2_am) / topology.sigma2_sm)
        bad = beta_grid[beta_grid >= bound]
        if bad.size:
            raise SchemeInfeasibleError(
                f"power ratios {bad.tolist()} reach the cancelation bound {bound:.6g}"
            )
    if grids is None:
        grids = {
            "macro": rate_grid(cfg.rate_macro_secrecy),
            "small": rate_grid(cfg.rate_small_secrecy),
        }
    points = []
    for beta in beta_grid:
        cfg_b = cfg.replace(smr=float(beta))
        for scheme in schemes_list:
            per_cell = {}
            for cell in CELLS:
                p = min_iop(scheme, cell, topology, cfg_b, grids[cell], backend, trials, seed, workers)
                per_cell[cell] = p
                points.append(IopPoint(float(beta), p.iop, p.minimizing_rate, scheme, cell, backend))
            points.append(
                IopPoint(
                    float(beta),
                    (per_cell["macro"].iop + per_cell["small"].iop) / 2.0,
                    math.nan,
                    scheme,
                    "sum",
                    backend,
                )
            )
    return points


# --- figure presets ---------------------------------------------------------------

FIGURE_IDS = (2, 3, 4, 5, 6, 7, 8)

CSV_COLUMNS = (
    "figure",
    "scheme",
    "cell",
    "metric",
    "backend",
    "gamma_m_db",
    "beta",
    "n",
    "d_ss",
    "eve_lo",
    "eve_hi",
    "rate",
    "value",
    "std_err",
)


def _row(figure, scheme, cell, metric, backend, cfg, topology, rate, value, std_err=None, **over):
    base = {
        "figure": figure,
        "scheme": scheme,
        "cell": cell,
        "metric": metric,
        "backend": backend,
        "gamma_m_db": over.get("gamma_m_db", cfg.gamma_m_db),
        "beta": over.get("beta", cfg.smr),
        "n": over.get("n", topology.n),
        "d_ss": over.get("d_ss", topology.sbs_to_su.distance),
        "eve_lo": over.get("eve_lo", ""),
        "eve_hi": over.get("eve_hi", ""),
        "rate": rate,
        "value": value,
        "std_err": "" if std_err is None else std_err,
    }
    return base


def _srt_rows(figure, scheme, cell, topology, cfg, grid, backend, trials, seed, workers):
    rows = []
    for p in srt_curve(scheme, cell, topology, cfg, grid, backend, trials, seed, workers):
        rows.append(
            _row(figure, scheme, cell, "outage", p.backend, cfg, topology, p.rate_overall, p.outage, p.outage_std_err)
        )
        rows.append(
            _row(figure, scheme, cell, "intercept", p.backend, cfg, topology, p.rate_overall, p.intercept, p.intercept_std_err)
        )
    return rows


def build_figure(
    figure: int,
    topology: Topology | None = None,
    cfg: SystemConfig | None = None,
    backend: str | None = None,
    trials: int = 1_000_000,
    seed: int = 1,
    workers: int = 1,
    rate_step: float = DEFAULT_RATE_STEP,
    gamma_db_list=None,
    n_list=None,
    beta_list=None,
    d_ss_list=None,
    eve_ranges=None,
) -> list[dict]:
    """Rows (CSV_COLUMNS schema) for one preset figure dataset.

    ``backend`` overrides each figure's default where it makes sense;
    figures 6 and 7 have fixed backend structure.
    """
    if figure not in FIGURE_IDS:
        raise ParameterError(f"figure must be one of {FIGURE_IDS}")
    cfg = cfg if cfg is not None else default_config()
    topology = topology if topology is not None else default_topology(16)
    g_macro = rate_grid(cfg.rate_macro_secrecy, step=rate_step)
    g_small = rate_grid(cfg.rate_small_secrecy, step=rate_step)
    grids = {"macro": g_macro, "small": g_small}
    rows: list[dict] = []

    def backends(default: str) -> list[str]:
        b = backend or default
        if b == "both":
            return ["analytic", "montecarlo"]
        if b == "mc":
            return ["montecarlo"]
        return [b]

    if figure == 2:
        for g in gamma_db_list or (65.0, 75.0):
            cfg_g = cfg.replace(gamma_m_db=float(g))
            for scheme in ("il", "ic"):
                for b in backends("both"):
                    rows += _srt_rows(2, scheme, "macro", topology, cfg_g, g_macro, b, trials, seed, workers)
    elif figure == 3:
        for g in gamma_db_list or np.arange(50.0, 90.1, 2.5):
            cfg_g = cfg.replace(gamma_m_db=float(g))
            for n in n_list or (16, 32):
                topo = default_topology(int(n), topology.sbs_to_su.distance)
                for scheme in ("il", "ic"):
                    for cell in CELLS:
                        for b in backends("analytic"):
                            p = min_iop(scheme, cell, topo, cfg_g, grids[cell], b, trials, seed, workers)
                            rows.append(
                                _row(3, scheme, cell, "iop", b, cfg_g, topo, p.minimizing_rate, p.iop, n=int(n))
                            )
    elif figure == 4:
        for n in n_list or (16, 32):
            topo = default_topology(int(n), topology.sbs_to_su.distance)
            for scheme in ("il", "ic"):
                for b in backends("both"):
                    for r in _srt_rows(4, scheme, "macro", topo, cfg, g_macro, b, trials, seed, workers):
                        r["n"] = int(n)
                        rows.append(r)
    elif figure == 5:
        for g in gamma_db_list or (65.0, 75.0):
            cfg_g = cfg.replace(gamma_m_db=float(g))
            for n in n_list or (1, 2, 4, 6, 8, 10, 12, 16, 20, 24, 28, 32):
                topo = default_topology(int(n), topology.sbs_to_su.distance)
                for scheme in ("il", "ic"):
                    for cell in CELLS:
                        for b in backends("analytic"):
                            p = min_iop(scheme, cell, topo, cfg_g, grids[cell], b, trials, seed, workers)
                            rows.append(
                                _row(5, scheme, cell, "iop", b, cfg_g, topo, p.minimizing_rate, p.iop, n=int(n))
                            )
    elif figure == 6:
        for g in gamma_db_list or (60.0, 70.0, 80.0):
            cfg_g = cfg.replace(gamma_m_db=float(g))
            rows += _srt_rows(6, "ic", "small", topology, cfg_g, g_small, "analytic", trials, seed, workers)
            rows += _srt_rows(6, "ic", "small", topology, cfg_g, g_small, "montecarlo", trials, seed, workers)
            rows += _srt_rows(6, "ic-sdc", "small", topology, cfg_g, g_small, "montecarlo", trials, seed, workers)
    elif figure == 7:
        for lo, hi in eve_ranges or ((100.0, 150.0), (200.0, 250.0)):
            curves = random_eve_sum_srt(
                ("il", "ic"), cfg, (lo, hi), trials, seed, topology, g_macro, workers
            )
            for scheme, pts in curves.items():
                for p in pts:
                    rows.append(
                        _row(7, scheme, "sum", "sum_outage", "montecarlo", cfg, topology, p.rate_overall, p.outage, p.outage_std_err, eve_lo=lo, eve_hi=hi)
                    )
                    rows.append(
                        _row(7, scheme, "sum", "sum_intercept", "montecarlo", cfg, topology, p.rate_overall, p.intercept, p.intercept_std_err, eve_lo=lo, eve_hi=hi)
                    )
    elif figure == 8:
        for d_ss in d_ss_list or (20.0, 30.0):
            topo = default_topology(topology.n, float(d_ss))
            betas = beta_list or (1, 2, 5, 10, 20, 40, 70, 100, 140, 180, 220, 250, 270, 285, 295, 299)
            for b in backends("analytic"):
                pts = sum_iop_vs_smr(("il", "ic"), topo, cfg, betas, grids, b, trials, seed, workers)
                for p in pts:
                    metric = "sum_iop" if p.cell == "sum" else "iop"
                    rate = "" if math.isnan(p.minimizing_rate) else p.minimizing_rate
                    rows.append(
                        _row(8, p.scheme, p.cell, metric, b, cfg, topo, rate, p.iop, d_ss=float(d_ss), beta=p.sweep_var)
                    )
    return rows
