"""Network geometry, channel-gain statistics and seeded fading generation.

The model is a two-cell downlink: a macro base station with ``n`` spatially
distributed antennas serving a macro user, a small base station serving a
small user over the same band, and a passive eavesdropper overhearing both.
Every radio link is Rayleigh faded, so each squared channel magnitude
``|h|^2`` is exponentially distributed with mean equal to the link's
large-scale variance ``sigma2 = distance**(-alpha) * fading_var``.

Phases never enter any capacity expression used downstream (the
interference-cancelation signal design consumes them exactly), so only
squared magnitudes are sampled.  Noise power is normalized to one, which
makes transmit powers and SNRs numerically identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import ConfigError, ParameterError

# Trials are generated in fixed-size blocks, each seeded independently from
# (master seed, block index).  The draw for a given (seed, trial) is therefore
# a pure function of those two values, no matter how blocks are partitioned
# across workers.
BLOCK_TRIALS = 8192


@dataclass(frozen=True)
class LinkSpec:
    """One radio link: distance in meters, path-loss exponent, and the
    small-scale fading variance E(|g|^2)."""

    distance: float
    path_loss_exp: float
    fading_var: float = 1.0

    def __post_init__(self) -> None:
        if not (self.distance > 0.0 and np.isfinite(self.distance)):
            raise ParameterError(f"link distance must be positive, got {self.distance}")
        if not (self.path_loss_exp > 0.0 and np.isfinite(self.path_loss_exp)):
            raise ParameterError(f"path-loss exponent must be positive, got {self.path_loss_exp}")
        if not (self.fading_var > 0.0 and np.isfinite(self.fading_var)):
            raise ParameterError(f"fading variance must be positive, got {self.fading_var}")

    @property
    def large_scale_var(self) -> float:
        """Mean of |h|^2: distance**(-alpha) * E(|g|^2)."""
        sigma2 = self.distance ** (-self.path_loss_exp) * self.fading_var
        if not (sigma2 > 0.0 and np.isfinite(sigma2)):
            raise ParameterError(
                f"large-scale variance {sigma2!r} out of range for {self!r}"
            )
        return sigma2


def large_scale_variance(link: LinkSpec) -> float:
    """Large-scale variance of a link (function form of LinkSpec.large_scale_var)."""
    return link.large_scale_var


@dataclass(frozen=True)
class Topology:
    """All links of the two-cell network.

    The three antenna sequences must have the same length ``n >= 1``; entry
    ``i`` describes antenna i's link to the macro user, small user and
    eavesdropper respectively.
    """

    antenna_to_mu: tuple[LinkSpec, ...]
    antenna_to_su: tuple[LinkSpec, ...]
    antenna_to_eve: tuple[LinkSpec, ...]
    sbs_to_mu: LinkSpec
    sbs_to_su: LinkSpec
    sbs_to_eve: LinkSpec

    def __post_init__(self) -> None:
        n = len(self.antenna_to_mu)
        if n < 1:
            raise ParameterError("topology needs at least one distributed antenna")
        if len(self.antenna_to_su) != n or len(self.antenna_to_eve) != n:
            raise ParameterError("antenna link sequences must have equal length")

    @property
    def n(self) -> int:
        return len(self.antenna_to_mu)

    @cached_property
    def sigma2_am(self) -> np.ndarray:
        """Per-antenna |h|^2 means toward the macro user, shape (n,)."""
        return np.array([l.large_scale_var for l in self.antenna_to_mu])

    @cached_property
    def sigma2_as(self) -> np.ndarray:
        return np.array([l.large_scale_var for l in self.antenna_to_su])

    @cached_property
    def sigma2_ae(self) -> np.ndarray:
        return np.array([l.large_scale_var for l in self.antenna_to_eve])

    @property
    def sigma2_sm(self) -> float:
        return self.sbs_to_mu.large_scale_var

    @property
    def sigma2_ss(self) -> float:
        return self.sbs_to_su.large_scale_var

    @property
    def sigma2_se(self) -> float:
        return self.sbs_to_eve.large_scale_var

    @property
    def iid(self) -> bool:
        """True iff within each antenna sequence all large-scale variances
        are equal.  Computed from the data, so it cannot disagree with it."""
        return bool(
            np.all(self.sigma2_am == self.sigma2_am[0])
            and np.all(self.sigma2_as == self.sigma2_as[0])
            and np.all(self.sigma2_ae == self.sigma2_ae[0])
        )


@dataclass(frozen=True)
class SystemConfig:
    """Scalar system parameters: macro SNR, power ratio and rates.

    ``smr`` is the small-to-macro transmit power ratio (the small-cell SNR is
    ``smr * gamma_m``).  Overall rates must dominate the matching secrecy
    rates; all rates are in bit/s/Hz.
    """

    gamma_m_db: float
    smr: float
    rate_macro_overall: float
    rate_small_overall: float
    rate_macro_secrecy: float
    rate_small_secrecy: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.gamma_m_db):
            raise ParameterError("gamma_m_db must be finite")
        if not (self.smr >= 0.0 and np.isfinite(self.smr)):
            raise ParameterError(f"smr must be >= 0, got {self.smr}")
        for ro, rs, cell in (
            (self.rate_macro_overall, self.rate_macro_secrecy, "macro"),
            (self.rate_small_overall, self.rate_small_secrecy, "small"),
        ):
            if not (ro >= rs >= 0.0):
                raise ParameterError(
                    f"{cell} rates must satisfy overall >= secrecy >= 0, got ({ro}, {rs})"
                )

    @property
    def gamma_m(self) -> float:
        """Macro SNR on a linear scale (10**(dB/10))."""
        return 10.0 ** (self.gamma_m_db / 10.0)

    @property
    def gamma_s(self) -> float:
        """Small-cell SNR on a linear scale."""
        return self.smr * self.gamma_m

    def replace(self, **kwargs) -> "SystemConfig":
        from dataclasses import replace

        return replace(self, **kwargs)


@dataclass(frozen=True)
class FadingDraw:
    """One realization of every squared channel magnitude."""

    h_am2: np.ndarray  # (n,) antenna -> macro user
    h_as2: np.ndarray  # (n,) antenna -> small user
    h_ae2: np.ndarray  # (n,) antenna -> eavesdropper
    h_sm2: float  # SBS -> macro user
    h_ss2: float  # SBS -> small user
    h_se2: float  # SBS -> eavesdropper

    @property
    def n(self) -> int:
        return len(self.h_am2)


@dataclass(frozen=True)
class FadingBlock:
    """A vectorized batch of fading draws (axis 0 is the trial index).

    When eavesdropper distances are randomized per trial, ``sigma2_ae``
    carries the per-trial means actually used for ``h_ae2``.
    """

    h_am2: np.ndarray  # (trials, n)
    h_as2: np.ndarray  # (trials, n)
    h_ae2: np.ndarray  # (trials, n)
    h_sm2: np.ndarray  # (trials,)
    h_ss2: np.ndarray  # (trials,)
    h_se2: np.ndarray  # (trials,)
    sigma2_ae: np.ndarray | None = None  # (trials, n) if eve distances randomized

    @property
    def trials(self) -> int:
        return self.h_am2.shape[0]

    def row(self, i: int) -> FadingDraw:
        return FadingDraw(
            h_am2=self.h_am2[i].copy(),
            h_as2=self.h_as2[i].copy(),
            h_ae2=self.h_ae2[i].copy(),
            h_sm2=float(self.h_sm2[i]),
            h_ss2=float(self.h_ss2[i]),
            h_se2=float(self.h_se2[i]),
        )


def block_rng(seed: int, block_index: int) -> np.random.Generator:
    """Generator for one trial block, keyed by (master seed, block index)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(block_index,)))


def sample_fading(topology: Topology, rng: np.random.Generator) -> FadingDraw:
    """Draw one fading realization from an explicit random stream.

    Each |h|^2 is exponential with mean equal to the link's large-scale
    variance.  The variate order is fixed (antenna->MU, antenna->SU,
    antenna->eve, then the three SBS links) so a positioned stream always
    yields the same draw.
    """
    return FadingDraw(
        h_am2=rng.standard_exponential(topology.n) * topology.sigma2_am,
        h_as2=rng.standard_exponential(topology.n) * topology.sigma2_as,
        h_ae2=rng.standard_exponential(topology.n) * topology.sigma2_ae,
        h_sm2=float(rng.standard_exponential() * topology.sigma2_sm),
        h_ss2=float(rng.standard_exponential() * topology.sigma2_ss),
        h_se2=float(rng.standard_exponential() * topology.sigma2_se),
    )


def draw_block(
    topology: Topology,
    seed: int,
    block_index: int,
    eve_distance_range: tuple[float, float] | None = None,
) -> FadingBlock:
    """Generate the fading block ``block_index`` for ``seed``.

    Always generates the full BLOCK_TRIALS rows, so the draw of trial ``t``
    (row ``t % BLOCK_TRIALS`` of block ``t // BLOCK_TRIALS``) does not depend
    on how many trials the caller ultimately consumes.

    With ``eve_distance_range`` set, every antenna->eve distance and the
    SBS->eve distance are redrawn uniformly per trial (before the fading
    variates), and the per-trial |h_ae|^2 means are reported in the block.
    """
    rng = block_rng(seed, block_index)
    b, n = BLOCK_TRIALS, topology.n

    sigma2_ae: np.ndarray | None = None
    se_mean: np.ndarray | float = topology.sigma2_se
    ae_mean: np.ndarray = topology.sigma2_ae
    if eve_distance_range is not None:
        lo, hi = eve_distance_range
        if not (0.0 < lo <= hi):
            raise ParameterError(f"bad eavesdropper distance range {eve_distance_range}")
        d_ae = rng.uniform(lo, hi, size=(b, n))
        d_se = rng.uniform(lo, hi, size=b)
        alpha_ae = np.array([l.path_loss_exp for l in topology.antenna_to_eve])
        var_ae = np.array([l.fading_var for l in topology.antenna_to_eve])
        sigma2_ae = d_ae ** (-alpha_ae) * var_ae
        ae_mean = sigma2_ae
        se_mean = d_se ** (-topology.sbs_to_eve.path_loss_exp) * topology.sbs_to_eve.fading_var

    return FadingBlock(
        h_am2=rng.standard_exponential((b, n)) * topology.sigma2_am,
        h_as2=rng.standard_exponential((b, n)) * topology.sigma2_as,
        h_ae2=rng.standard_exponential((b, n)) * ae_mean,
        h_sm2=rng.standard_exponential(b) * topology.sigma2_sm,
        h_ss2=rng.standard_exponential(b) * topology.sigma2_ss,
        h_se2=rng.standard_exponential(b) * se_mean,
        sigma2_ae=sigma2_ae,
    )


def fading_for_trial(topology: Topology, seed: int, trial: int) -> FadingDraw:
    """The unique draw assigned to (seed, trial), identical for any worker
    partitioning or total trial count."""
    if trial < 0:
        raise ParameterError("trial index must be >= 0")
    block = draw_block(topology, seed, trial // BLOCK_TRIALS)
    return block.row(trial % BLOCK_TRIALS)


# --- default geometry -------------------------------------------------------

# Main, wiretap and small-cell links use exponent 2.5; the two cross-tier
# interference links (antenna -> small user, SBS -> macro user) are shadowed
# and use 3.5.
DEFAULT_DISTANCE = 300.0
DEFAULT_D_SS = 30.0
ALPHA_MAIN = 2.5
ALPHA_CROSS = 3.5


def default_topology(n: int, d_ss: float = DEFAULT_D_SS) -> Topology:
    """The evaluation geometry: every link at 300 m except SBS->SU at d_ss,
    i.i.d. across antennas, unit fading variances."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    am = LinkSpec(DEFAULT_DISTANCE, ALPHA_MAIN)
    a_su = LinkSpec(DEFAULT_DISTANCE, ALPHA_CROSS)
    ae = LinkSpec(DEFAULT_DISTANCE, ALPHA_MAIN)
    return Topology(
        antenna_to_mu=(am,) * n,
        antenna_to_su=(a_su,) * n,
        antenna_to_eve=(ae,) * n,
        sbs_to_mu=LinkSpec(DEFAULT_DISTANCE, ALPHA_CROSS),
        sbs_to_su=LinkSpec(d_ss, ALPHA_MAIN),
        sbs_to_eve=LinkSpec(DEFAULT_DISTANCE, ALPHA_MAIN),
    )


def default_config(
    gamma_m_db: float = 70.0,
    smr: float = 0.1,
    rate_macro_overall: float = 3.0,
    rate_small_overall: float = 3.0,
    rate_macro_secrecy: float = 1.0,
    rate_small_secrecy: float = 1.0,
) -> SystemConfig:
    return SystemConfig(
        gamma_m_db=gamma_m_db,
        smr=smr,
        rate_macro_overall=rate_macro_overall,
        rate_small_overall=rate_small_overall,
        rate_macro_secrecy=rate_macro_secrecy,
        rate_small_secrecy=rate_small_secrecy,
    )


# --- config file handling ----------------------------------------------------

_LINK_KEYS = {"distance", "alpha", "fading_var"}
_LINK_NAMES = (
    "antenna_to_mu",
    "antenna_to_su",
    "antenna_to_eve",
    "sbs_to_mu",
    "sbs_to_su",
    "sbs_to_eve",
)
_TOP_KEYS = {
    "n",
    "gamma_m_db",
    "beta",
    "rate_macro_overall",
    "rate_small_overall",
    "rate_macro_secrecy",
    "rate_small_secrecy",
    "links",
}


def _parse_link(name: str, obj, n: int) -> tuple[LinkSpec, ...]:
    """A link entry is either one mapping (replicated across antennas) or,
    for antenna links, a list of n mappings."""

    def one(d) -> LinkSpec:
        if not isinstance(d, dict):
            raise ConfigError(f"link '{name}' must be a mapping, got {type(d).__name__}")
        unknown = set(d) - _LINK_KEYS
        if unknown:
            raise ConfigError(f"unknown keys {sorted(unknown)} in link '{name}'")
        missing = _LINK_KEYS - set(d)
        if missing:
            raise ConfigError(f"missing keys {sorted(missing)} in link '{name}'")
        try:
            return LinkSpec(float(d["distance"]), float(d["alpha"]), float(d["fading_var"]))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad link '{name}': {exc}") from exc

    if isinstance(obj, list):
        if len(obj) != n:
            raise ConfigError(f"link list '{name}' must have n={n} entries, got {len(obj)}")
        return tuple(one(d) for d in obj)
    return (one(obj),) * n


def parse_config(data: dict) -> tuple[Topology, SystemConfig]:
    """Build (Topology, SystemConfig) from a parsed config mapping.

    Unknown keys anywhere are an error; link entries default to the standard
    geometry when 'links' is omitted entirely.
    """
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        n = int(data.get("n", 16))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad 'n': {exc}") from exc

    links = data.get("links")
    if links is None:
        topo = default_topology(n)
    else:
        if not isinstance(links, dict):
            raise ConfigError("'links' must be a mapping")
        unknown = set(links) - set(_LINK_NAMES)
        if unknown:
            raise ConfigError(f"unknown link names: {sorted(unknown)}")
        missing = set(_LINK_NAMES) - set(links)
        if missing:
            raise ConfigError(f"missing link names: {sorted(missing)}")
        parsed = {name: _parse_link(name, links[name], n) for name in _LINK_NAMES}
        for name in ("sbs_to_mu", "sbs_to_su", "sbs_to_eve"):
            if len(set(parsed[name])) != 1:
                raise ConfigError(f"link '{name}' cannot vary per antenna")
        try:
            topo = Topology(
                antenna_to_mu=parsed["antenna_to_mu"],
                antenna_to_su=parsed["antenna_to_su"],
                antenna_to_eve=parsed["antenna_to_eve"],
                sbs_to_mu=parsed["sbs_to_mu"][0],
                sbs_to_su=parsed["sbs_to_su"][0],
                sbs_to_eve=parsed["sbs_to_eve"][0],
            )
        except ParameterError as exc:
            raise ConfigError(str(exc)) from exc

    try:
        cfg = SystemConfig(
            gamma_m_db=float(data.get("gamma_m_db", 70.0)),
            smr=float(data.get("beta", 0.1)),
            rate_macro_overall=float(data.get("rate_macro_overall", 3.0)),
            rate_small_overall=float(data.get("rate_small_overall", 3.0)),
            rate_macro_secrecy=float(data.get("rate_macro_secrecy", 1.0)),
            rate_small_secrecy=float(data.get("rate_small_secrecy", 1.0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad system parameters: {exc}") from exc
    return topo, cfg


def load_config(path: str | Path) -> tuple[Topology, SystemConfig]:
    """Load a JSON config file (see parse_config for the schema)."""
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(data)


def config_to_dict(topology: Topology, cfg: SystemConfig) -> dict:
    """Round-trippable mapping describing (topology, cfg); parse_config of the
    result reproduces both objects."""

    def link(spec: LinkSpec) -> dict:
        return {
            "distance": spec.distance,
            "alpha": spec.path_loss_exp,
            "fading_var": spec.fading_var,
        }

    def per_antenna(specs: tuple[LinkSpec, ...]):
        if len(set(specs)) == 1:
            return link(specs[0])
        return [link(s) for s in specs]

    return {
        "n": topology.n,
        "gamma_m_db": cfg.gamma_m_db,
        "beta": cfg.smr,
        "rate_macro_overall": cfg.rate_macro_overall,
        "rate_small_overall": cfg.rate_small_overall,
        "rate_macro_secrecy": cfg.rate_macro_secrecy,
        "rate_small_secrecy": cfg.rate_small_secrecy,
        "links": {
            "antenna_to_mu": per_antenna(topology.antenna_to_mu),
            "antenna_to_su": per_antenna(topology.antenna_to_su),
            "antenna_to_eve": per_antenna(topology.antenna_to_eve),
            "sbs_to_mu": link(topology.sbs_to_mu),
            "sbs_to_su": link(topology.sbs_to_su),
            "sbs_to_eve": link(topology.sbs_to_eve),
        },
    }
