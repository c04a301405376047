"""Ensemble statistics: correlation functions, delay profiles, delay moments.

Two correlation estimators are computed side by side from the same ensemble:

* ``expectation`` averages the per-component correlation integrands (initial
  ray phases cancel ray-by-ray, cross-ray terms vanish exactly), which is the
  model's expectation computed by Monte Carlo;
* ``empirical`` averages lag products of fully realized transfer functions,
  phases included.

Agreement of the two is itself a correctness check and is part of the
acceptance suite. All reductions run over per-realization arrays assembled by
realization index, so results do not depend on worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from . import propagation as prop
from .channel import ChannelRealization, build_realization, component_table, ctf_weights, subpath_gains
from .propagation import PathKind
from .scenario import TAU, ScenarioConfig, stream_for

__all__ = [
    "CorrelationResult",
    "acf",
    "tfcf",
    "PdpResult",
    "pdp",
    "DelayStats",
    "delay_stats",
    "EnsembleDelayStats",
    "ensemble_delay_stats",
]


@dataclass(eq=False)
class CorrelationResult:
    """Correlation values over a lag axis at one (t, f) anchor."""

    anchor_t: float
    anchor_f: float
    lags_t: np.ndarray
    lags_f: np.ndarray
    n_realizations: int
    expectation: np.ndarray  # (L,) complex, raw ensemble values
    empirical: np.ndarray  # (L,) complex
    expectation_zero: complex
    empirical_zero: complex
    expectation_norm: np.ndarray  # |R| / |R(0)|
    empirical_norm: np.ndarray
    expectation_stderr: np.ndarray  # SE of the complex mean, / |R(0)|
    empirical_stderr: np.ndarray


def _corr_realization(args):
    (cfg, index, hi_t, lo_t, hi_f, lo_f, horizon, phase_draws, unit_gains) = args
    real = build_realization(cfg, index, horizon)
    fabs_hi = cfg.signal.carrier_freq + hi_f
    fabs_lo = cfg.signal.carrier_freq + lo_f
    tab_hi = component_table(real, hi_t)
    tab_lo = component_table(real, lo_t)
    a_los_hi, a_subs_hi = subpath_gains(real, tab_hi, fabs_hi, unit_gains)
    a_los_lo, a_subs_lo = subpath_gains(real, tab_lo, fabs_lo, unit_gains)
    k = cfg.power.rice_k
    w_los, w_da, w_ua = ctf_weights(cfg)
    hi_col = np.broadcast_to(fabs_hi, tab_hi.times.shape)[:, np.newaxis]
    lo_col = np.broadcast_to(fabs_lo, tab_lo.times.shape)[:, np.newaxis]

    los_hi = w_los * a_los_hi * np.exp(-1j * TAU * fabs_hi * tab_hi.los_delay)
    los_lo = w_los * a_los_lo * np.exp(-1j * TAU * fabs_lo * tab_lo.los_delay)
    exp_row = (k / (k + 1.0)) * a_los_hi * a_los_lo * np.exp(
        -1j * TAU * (fabs_hi * tab_hi.los_delay - fabs_lo * tab_lo.los_delay)
    )
    phasors_hi = []  # per sub-path, (L, R): delay phasors without initial phases
    phasors_lo = []
    for sp, a_hi, a_lo, d_hi, d_lo in zip(
        real.subpaths, a_subs_hi, a_subs_lo, tab_hi.delays, tab_lo.delays
    ):
        if sp.path.kind is PathKind.DA:
            weight = cfg.power.da_fraction / (2.0 * cfg.clusters.max_surface_hops * (k + 1.0))
        else:
            weight = cfg.power.ua_fraction / (2.0 * cfg.clusters.max_bottom_hops * (k + 1.0))
        p_hi = np.exp(-1j * TAU * hi_col * d_hi)
        p_lo = np.exp(-1j * TAU * lo_col * d_lo)
        exp_row = exp_row + weight * a_hi * a_lo * (p_hi * np.conj(p_lo)).mean(axis=1)
        phasors_hi.append(p_hi)
        phasors_lo.append(p_lo)

    # Empirical estimator: fully realized lag products. Extra phase draws
    # stratify the initial-phase dimension, shrinking the cross-ray product
    # noise without touching the geometry ensemble; draw 0 reuses the
    # realization's own phases so phase_draws=1 is the bare product.
    emp = np.zeros(hi_t.size, dtype=complex)
    for p in range(phase_draws):
        h_hi = los_hi.astype(complex)
        h_lo = los_lo.astype(complex)
        for sp, a_hi, a_lo, p_hi, p_lo in zip(
            real.subpaths, a_subs_hi, a_subs_lo, phasors_hi, phasors_lo
        ):
            if p == 0:
                phases = sp.phases
            else:
                rng = stream_for(cfg.master_seed, index, f"phase-redraw/{p}/{sp.path.label}")
                phases = rng.uniform(0.0, TAU, sp.phases.size)
            w = w_da if sp.path.kind is PathKind.DA else w_ua
            rot = np.exp(1j * phases)[np.newaxis, :]
            h_hi = h_hi + w * a_hi * (rot * p_hi).sum(axis=1)
            h_lo = h_lo + w * a_lo * (rot * p_lo).sum(axis=1)
        emp += h_hi * np.conj(h_lo)
    return exp_row, emp / phase_draws


def _collect_rows(worker, arglist, jobs):
    if jobs <= 1:
        return [worker(args) for args in arglist]
    chunk = max(1, len(arglist) // (jobs * 4))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, arglist, chunksize=chunk))


def _correlate(
    cfg: ScenarioConfig,
    anchor_t: float,
    anchor_f: float,
    hi_t: np.ndarray,
    lo_t: np.ndarray,
    lo_f: np.ndarray,
    lags_t: np.ndarray,
    lags_f: np.ndarray,
    realizations: int | None,
    jobs: int,
    unit_gains: bool,
    phase_draws: int,
) -> CorrelationResult:
    if np.any(lo_t < 0) or np.any(hi_t < 0):
        raise ValueError("correlation would evaluate the channel before t=0; reduce the lags")
    if phase_draws < 1:
        raise ValueError(f"phase_draws must be >= 1, got {phase_draws}")
    n = realizations if realizations is not None else cfg.realizations
    if n < 1:
        raise ValueError(f"need at least one realization, got {n}")
    # index 0 carries the zero-lag pair used for normalization
    hi_ext = np.concatenate([[anchor_t], hi_t])
    lo_ext = np.concatenate([[anchor_t], lo_t])
    lo_f_ext = np.concatenate([[anchor_f], lo_f])
    horizon = float(max(hi_ext.max(), lo_ext.max()))
    arglist = [
        (cfg, i, hi_ext, lo_ext, anchor_f, lo_f_ext, horizon, phase_draws, unit_gains)
        for i in range(n)
    ]
    rows = _collect_rows(_corr_realization, arglist, jobs)
    exp_rows = np.array([r[0] for r in rows])
    emp_rows = np.array([r[1] for r in rows])
    r_exp = exp_rows.mean(axis=0)
    r_emp = emp_rows.mean(axis=0)

    def stderr(block):
        if n < 2:
            return np.zeros(block.shape[1])
        return np.sqrt((block.real.var(axis=0, ddof=1) + block.imag.var(axis=0, ddof=1)) / n)

    se_exp = stderr(exp_rows)
    se_emp = stderr(emp_rows)
    z_exp = abs(r_exp[0])
    z_emp = abs(r_emp[0])
    if z_exp == 0.0 or z_emp == 0.0:
        raise ArithmeticError("zero-lag correlation vanished; cannot normalize")
    return CorrelationResult(
        anchor_t=anchor_t,
        anchor_f=anchor_f,
        lags_t=lags_t,
        lags_f=lags_f,
        n_realizations=n,
        expectation=r_exp[1:],
        empirical=r_emp[1:],
        expectation_zero=complex(r_exp[0]),
        empirical_zero=complex(r_emp[0]),
        expectation_norm=np.abs(r_exp[1:]) / z_exp,
        empirical_norm=np.abs(r_emp[1:]) / z_emp,
        expectation_stderr=se_exp[1:] / z_exp,
        empirical_stderr=se_emp[1:] / z_emp,
    )


def acf(
    cfg: ScenarioConfig,
    t: float,
    f: float,
    lags,
    realizations: int | None = None,
    jobs: int = 1,
    unit_gains: bool = False,
    phase_draws: int = 1,
) -> CorrelationResult:
    """Temporal autocorrelation at instant ``t`` and baseband offset ``f``.

    Lag products pair the channel at ``t + lag`` against ``t``, i.e. the
    value at lag ``dt`` is the time-frequency correlation anchored at
    ``t + dt`` with backward lag ``dt``; this keeps every evaluation at
    nonnegative times so t=0 anchors work. ``phase_draws`` > 1 averages the
    *empirical* estimator over extra initial-phase draws per realization;
    the expectation estimator is unaffected by it.
    """
    lags_t = np.asarray(lags, dtype=float)
    hi_t = t + lags_t
    lo_t = np.full_like(lags_t, float(t))
    lo_f = np.full_like(lags_t, float(f))
    return _correlate(
        cfg, t, f, hi_t, lo_t, lo_f, lags_t, np.zeros_like(lags_t),
        realizations, jobs, unit_gains, phase_draws,
    )


def tfcf(
    cfg: ScenarioConfig,
    t: float,
    f: float,
    lags_t,
    lags_f=0.0,
    realizations: int | None = None,
    jobs: int = 1,
    unit_gains: bool = False,
    phase_draws: int = 1,
) -> CorrelationResult:
    """Time-frequency correlation E{H(t,f) H*(t-dt, f-df)} by Monte Carlo.

    Positive time lags look backward from the anchor, so ``t - max(lags_t)``
    must be >= 0; negative lags probe forward of the anchor.
    """
    lags_t = np.asarray(lags_t, dtype=float)
    lags_f = np.broadcast_to(np.asarray(lags_f, dtype=float), lags_t.shape).copy()
    hi_t = np.full_like(lags_t, float(t))
    lo_t = t - lags_t
    if np.any(lo_t < 0):
        raise ValueError(f"anchor t={t} minus max lag evaluates before t=0")
    lo_f = f - lags_f
    return _correlate(
        cfg, t, f, hi_t, lo_t, lo_f, lags_t, lags_f,
        realizations, jobs, unit_gains, phase_draws,
    )


# ---------------------------------------------------------------------------
# Power delay profile and delay moments


@dataclass(eq=False)
class PdpResult:
    """Impulse-list delay profile at one (t, f), first arrival at delay 0."""

    anchor_t: float
    anchor_f: float
    mode: str  # "cluster" or "ray"
    delays: np.ndarray  # (N,) s, relative to the first arrival
    powers: np.ndarray  # (N,)
    labels: list[str]
    first_arrival: float  # absolute delay of the earliest impulse, s

    def binned(self, width: float = 1e-4):
        """Presentation-only binning: (bin starts, per-bin power sums)."""
        if width <= 0:
            raise ValueError(f"bin width must be > 0, got {width}")
        edges_n = int(np.floor(self.delays.max() / width)) + 1 if self.delays.size else 1
        starts = np.arange(edges_n) * width
        sums = np.zeros(edges_n)
        idx = np.minimum((self.delays / width).astype(int), edges_n - 1)
        np.add.at(sums, idx, self.powers)
        return starts, sums


def pdp(
    source: ChannelRealization | ScenarioConfig,
    t: float,
    f: float,
    mode: str = "cluster",
    unit_gains: bool = False,
) -> PdpResult:
    """Power delay profile at one (t, f) anchor.

    ``cluster`` mode reduces each sub-path to its specular reflection (the
    deterministic per-cluster mean), so it only needs a scenario; ``ray``
    mode lists every diffuse ray of a realization. The direct impulse is
    present only when the Rice factor is positive.
    """
    if mode not in ("cluster", "ray"):
        raise ValueError(f"unknown PDP mode {mode!r}")
    if isinstance(source, ChannelRealization):
        real, cfg = source, source.cfg
    else:
        real, cfg = None, source
    k = cfg.power.rice_k
    f_abs = cfg.signal.carrier_freq + f
    c = cfg.geometry.sound_speed
    delays: list[float] = []
    powers: list[float] = []
    labels: list[str] = []

    if mode == "cluster":
        state = geo.evolve(cfg.geometry, cfg.intentional, t)
        if k > 0:
            d_los = geo.los_distance(state)
            a = 1.0 if unit_gains else prop.path_gain(PathKind.LOS, d_los, f_abs).total
            delays.append(d_los / c)
            powers.append(k / (k + 1.0) * a * a)
            labels.append("los")
        for path in geo.enumerate_paths(cfg.clusters):
            cluster = geo.macro_ray(state, cfg.geometry.water_depth, path)
            if unit_gains:
                a = 1.0
            else:
                a = prop.path_gain(
                    path.kind,
                    cluster.distance,
                    f_abs,
                    incidence=cluster.incidence,
                    bottom_bounces=path.bottom_hops,
                    bottom=cfg.bottom,
                    water_sound_speed=cfg.geometry.sound_speed,
                ).total
            if path.kind is PathKind.DA:
                weight = cfg.power.da_fraction / (2.0 * cfg.clusters.max_surface_hops * (k + 1.0))
            else:
                weight = cfg.power.ua_fraction / (2.0 * cfg.clusters.max_bottom_hops * (k + 1.0))
            delays.append(cluster.distance / c)
            powers.append(weight * a * a)
            labels.append(path.label)
    else:
        if real is None:
            raise ValueError("ray-level PDP needs a built ChannelRealization")
        table = component_table(real, [t])
        a_los, a_subs = subpath_gains(real, table, f_abs, unit_gains)
        if k > 0:
            delays.append(float(table.los_delay[0]))
            powers.append(k / (k + 1.0) * float(a_los[0]) ** 2)
            labels.append("los")
        n_rays = cfg.clusters.rays_per_path
        for sp, a, d in zip(real.subpaths, a_subs, table.delays):
            if sp.path.kind is PathKind.DA:
                weight = cfg.power.da_fraction / (2.0 * cfg.clusters.max_surface_hops * n_rays * (k + 1.0))
            else:
                weight = cfg.power.ua_fraction / (2.0 * cfg.clusters.max_bottom_hops * n_rays * (k + 1.0))
            for ray_i in range(n_rays):
                delays.append(float(d[0, ray_i]))
                powers.append(weight * float(a[0]) ** 2)
                labels.append(f"{sp.path.label}#{ray_i}")

    delays_arr = np.asarray(delays)
    powers_arr = np.asarray(powers)
    first = float(delays_arr.min())
    order = np.argsort(delays_arr, kind="stable")
    return PdpResult(
        anchor_t=t,
        anchor_f=f,
        mode=mode,
        delays=delays_arr[order] - first,
        powers=powers_arr[order],
        labels=[labels[i] for i in order],
        first_arrival=first,
    )


@dataclass(frozen=True)
class DelayStats:
    """First moment and centered second moment of a delay profile."""

    average: float  # s, relative to the profile's first arrival
    rms_spread: float  # s


def delay_stats(profile: PdpResult) -> DelayStats:
    """Power-weighted average delay and RMS delay spread of a profile."""
    total = profile.powers.sum()
    if profile.powers.size == 0 or total <= 0.0:
        raise ValueError("delay statistics need at least one impulse with positive power")
    mu = float((profile.delays * profile.powers).sum() / total)
    var = float((((profile.delays - mu) ** 2) * profile.powers).sum() / total)
    return DelayStats(average=mu, rms_spread=math.sqrt(max(var, 0.0)))


@dataclass(eq=False)
class EnsembleDelayStats:
    """Per-realization delay moments and their ensemble summary."""

    average: np.ndarray  # (n,) s
    rms_spread: np.ndarray  # (n,) s

    @property
    def n(self) -> int:
        return self.average.size

    @property
    def average_mean(self) -> float:
        return float(self.average.mean())

    @property
    def average_std(self) -> float:
        return float(self.average.std(ddof=1)) if self.n > 1 else 0.0

    @property
    def rms_spread_mean(self) -> float:
        return float(self.rms_spread.mean())

    @property
    def rms_spread_std(self) -> float:
        return float(self.rms_spread.std(ddof=1)) if self.n > 1 else 0.0


def _delay_worker(args):
    cfg, index, t, f, mode, unit_gains = args
    real = build_realization(cfg, index, horizon=t)
    stats = delay_stats(pdp(real, t, f, mode, unit_gains))
    return stats.average, stats.rms_spread


def ensemble_delay_stats(
    cfg: ScenarioConfig,
    t: float = 0.0,
    f: float = 0.0,
    mode: str = "cluster",
    realizations: int | None = None,
    jobs: int = 1,
    unit_gains: bool = False,
) -> EnsembleDelayStats:
    """Delay moments per realization, summarized over the ensemble.

    Cluster-level profiles are deterministic functions of the scenario, so
    that mode evaluates once and replicates.
    """
    n = realizations if realizations is not None else cfg.realizations
    if n < 1:
        raise ValueError(f"need at least one realization, got {n}")
    if mode == "cluster":
        stats = delay_stats(pdp(cfg, t, f, mode, unit_gains))
        return EnsembleDelayStats(
            average=np.full(n, stats.average), rms_spread=np.full(n, stats.rms_spread)
        )
    arglist = [(cfg, i, t, f, mode, unit_gains) for i in range(n)]
    rows = _collect_rows(_delay_worker, arglist, jobs)
    return EnsembleDelayStats(
        average=np.array([r[0] for r in rows]), rms_spread=np.array([r[1] for r in rows])
    )
