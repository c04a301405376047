"""Channel realizations: ray population, time-varying delays, and the CTF.

A realization is fully determined by (master_seed, realization index): drift
paths, ray angle offsets, surface phases, mid-leg perturbations and initial
phases are all drawn from dedicated streams at build time and frozen. Delay
and gain evaluation afterwards is deterministic, and delays are computed once
per (ray, time) and reused across frequencies.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from . import propagation as prop
from .motion import DriftState, build_drift
from .propagation import PathKind
from .scenario import TAU, ScenarioConfig, SurfaceMotionConfig, stream_for

__all__ = [
    "SubPath",
    "ChannelRealization",
    "CtfFrame",
    "Tap",
    "build_realization",
    "component_table",
    "subpath_gains",
    "ctf_weights",
    "ctf_values",
    "evaluate_ctf",
    "tap_list",
    "los_delay",
    "ray_delay",
]


@dataclass(frozen=True, eq=False)
class SubPath:
    """One reflected sub-path: its rays' frozen draws, stacked for evaluation."""

    path: geo.PathIndex
    rays: tuple[geo.MicroRay, ...]
    phases: np.ndarray  # (R,) initial ray phases in [0, 2*pi)
    aods: np.ndarray  # (R,) frozen departure angles; NaN for single bounce
    aoas: np.ndarray  # (R,) frozen arrival angles
    theta_first: np.ndarray  # (R,), 0 where the first cluster is on the bottom
    theta_last: np.ndarray  # (R,), 0 where the last cluster is on the bottom
    delta_mid: np.ndarray  # (R,)


@dataclass(eq=False)
class ChannelRealization:
    """All frozen randomness of one channel draw plus its seed lineage."""

    cfg: ScenarioConfig
    index: int
    drift_tx: DriftState
    drift_rx: DriftState
    subpaths: tuple[SubPath, ...]
    horizon: float
    resample_count: int

    @property
    def seed_lineage(self) -> tuple[int, int]:
        return (self.cfg.master_seed, self.index)

    def subpath_for(self, path: geo.PathIndex) -> SubPath:
        for sp in self.subpaths:
            if sp.path == path:
                return sp
        raise KeyError(f"no sub-path {path.label} in this realization")


@dataclass(eq=False)
class CtfFrame:
    """Complex transfer-function samples over the scenario's (t, f) grid."""

    times: np.ndarray  # (T,)
    freq_offsets: np.ndarray  # (F,) baseband offsets, Hz
    carrier_freq: float
    values: np.ndarray  # (T, F) complex
    realization: int


@dataclass(frozen=True)
class Tap:
    delay: float  # s
    amplitude: complex  # weighted complex gain, phase included
    label: str


def _worst_case_slack(ray: geo.MicroRay, cfg: ScenarioConfig, span: float) -> float:
    """Largest possible shortening of a ray by surface/drift terms, meters.

    Used when enforcing the floor "no ray shorter than the direct path": the
    surface oscillation can subtract at most its amplitude times the ray's
    projections (one shared phase on single-bounce surface paths), and each
    drift projection mismatch against the direct path is bounded by twice the
    largest displacement reachable within the horizon.
    """
    amp = cfg.surface.amplitude
    slack = 4.0 * cfg.drift.v_max * span
    if amp > 0.0:
        proj_tx = math.cos(ray.aod - cfg.surface.travel_angle) if ray.theta_first is not None else 0.0
        proj_rx = math.cos(ray.aoa - cfg.surface.travel_angle) if ray.theta_last is not None else 0.0
        if ray.path.is_single_bounce:
            # note: single-bounce departure angle varies with time; at build we
            # only need a bound, and the shared phase couples the projections
            slack += amp * abs(proj_rx) * 2.0
        else:
            slack += amp * (abs(proj_tx) + abs(proj_rx))
    return slack


def build_realization(cfg: ScenarioConfig, index: int, horizon: float | None = None) -> ChannelRealization:
    """Draw one complete channel realization.

    ``horizon`` extends the drift coverage beyond the scenario's time grid
    (statistics evaluate the channel at anchor+lag instants). Rays whose
    frozen draws would make them shorter than the direct path anywhere on
    the horizon are rejected and redrawn, like any other out-of-branch draw.
    """
    if index < 0:
        raise ValueError(f"realization index must be >= 0, got {index}")
    t_max = max(cfg.signal.time_grid)
    span = max(horizon if horizon is not None else 0.0, t_max, 1e-9)
    drift_tx = build_drift(cfg.drift, span, stream_for(cfg.master_seed, index, "drift/tx"))
    drift_rx = build_drift(cfg.drift, span, stream_for(cfg.master_seed, index, "drift/rx"))
    state0 = geo.evolve(cfg.geometry, cfg.intentional, 0.0)
    depth = cfg.geometry.water_depth
    los0 = geo.los_distance(state0)
    still = SurfaceMotionConfig(amplitude=0.0, freq=0.0)
    subpaths = []
    resamples = 0
    max_tries = 1000
    for path in geo.enumerate_paths(cfg.clusters):
        cluster0 = geo.macro_ray(state0, depth, path)
        rng = stream_for(cfg.master_seed, index, f"path/{path.label}")
        rays = []
        phases = np.empty(cfg.clusters.rays_per_path)
        for n in range(cfg.clusters.rays_per_path):
            for _ in range(max_tries):
                if path.is_single_bounce:
                    ray, extra = geo.sample_micro_ray_sb(cluster0, state0, depth, cfg.clusters, rng)
                else:
                    ray, extra = geo.sample_micro_ray_mb(cluster0, cfg.clusters, rng)
                resamples += extra
                legs = geo.micro_ray_distances(
                    ray, cluster0, state0, depth, (0.0, 0.0), (0.0, 0.0), still, 0.0
                )
                if sum(legs) - _worst_case_slack(ray, cfg, span) >= los0 - 1e-9:
                    break
                resamples += 1
            else:
                raise geo.GeometryError(
                    f"could not draw a ray of {path.label} at least as long as the direct path"
                )
            phases[n] = rng.uniform(0.0, TAU)
            rays.append(ray)
        subpaths.append(
            SubPath(
                path=path,
                rays=tuple(rays),
                phases=phases,
                aods=np.array([r.aod for r in rays]),
                aoas=np.array([r.aoa for r in rays]),
                theta_first=np.array([0.0 if r.theta_first is None else r.theta_first for r in rays]),
                theta_last=np.array([0.0 if r.theta_last is None else r.theta_last for r in rays]),
                delta_mid=np.array([r.delta_mid for r in rays]),
            )
        )
    return ChannelRealization(
        cfg=cfg,
        index=index,
        drift_tx=drift_tx,
        drift_rx=drift_rx,
        subpaths=tuple(subpaths),
        horizon=span,
        resample_count=resamples,
    )


@dataclass(eq=False)
class ComponentTable:
    """Per-time geometry and per-(ray, time) delays; frequency-independent."""

    times: np.ndarray  # (T,)
    state: geo.GeometryState  # array-valued, (T,)
    los_length: np.ndarray  # (T,)
    los_delay: np.ndarray  # (T,)
    clusters: list[geo.ClusterGeometry]  # array-valued, (T,), one per sub-path
    delays: list[np.ndarray]  # (T, R) per sub-path


def component_table(real: ChannelRealization, times) -> ComponentTable:
    """Evaluate every component's geometry and ray delays on a time axis."""
    tt = np.atleast_1d(np.asarray(times, dtype=float))
    cfg = real.cfg
    depth = cfg.geometry.water_depth
    c = cfg.geometry.sound_speed
    state = geo.evolve(cfg.geometry, cfg.intentional, tt)
    dd_t, al_t = real.drift_tx.displacement(tt)
    dd_r, al_r = real.drift_rx.displacement(tt)
    los_length = geo.los_distance(state, (dd_t, al_t), (dd_r, al_r))
    col = lambda x: np.asarray(x, dtype=float)[:, np.newaxis]
    state_col = geo.GeometryState(
        distance=col(state.distance),
        tx_depth=col(state.tx_depth),
        rx_depth=col(state.rx_depth),
        aod_los=col(state.aod_los),
        aoa_los=col(state.aoa_los),
    )
    drift_tx_col = (col(dd_t), col(al_t))
    drift_rx_col = (col(dd_r), col(al_r))
    clusters = []
    delays = []
    for sp in real.subpaths:
        cluster = geo.macro_ray(state, depth, sp.path)
        aoa = sp.aoas[np.newaxis, :]
        if sp.path.is_single_bounce:
            aod = geo.sb_departure_angle(sp.path.kind, aoa, state_col, depth)
        else:
            aod = sp.aods[np.newaxis, :]
        leg_tx, mid, leg_rx = geo.segment_lengths(
            sp.path,
            state_col,
            depth,
            col(cluster.leg_mid),
            aod,
            aoa,
            sp.theta_first[np.newaxis, :],
            sp.theta_last[np.newaxis, :],
            sp.delta_mid[np.newaxis, :],
            drift_tx_col,
            drift_rx_col,
            cfg.surface,
            col(tt),
        )
        clusters.append(cluster)
        delays.append((leg_tx + mid + leg_rx) / c)
    return ComponentTable(
        times=tt,
        state=state,
        los_length=np.atleast_1d(los_length),
        los_delay=np.atleast_1d(los_length) / c,
        clusters=clusters,
        delays=delays,
    )


def subpath_gains(real: ChannelRealization, table: ComponentTable, freq_hz, unit_gains: bool = False):
    """Amplitude gains (a_los, [a per sub-path]) at absolute frequency(ies).

    ``freq_hz`` may be a scalar or a per-time array; every ray of a sub-path
    shares its macro gain.
    """
    cfg = real.cfg
    shape = table.times.shape
    if unit_gains:
        ones = np.ones(shape)
        return ones, [np.ones(shape) for _ in real.subpaths]
    a_los = np.broadcast_to(
        prop.path_gain(PathKind.LOS, table.los_length, freq_hz).total, shape
    ).astype(float)
    a_subs = []
    for sp, cluster in zip(real.subpaths, table.clusters):
        breakdown = prop.path_gain(
            sp.path.kind,
            cluster.distance,
            freq_hz,
            incidence=cluster.incidence,
            bottom_bounces=sp.path.bottom_hops,
            bottom=cfg.bottom,
            water_sound_speed=cfg.geometry.sound_speed,
        )
        a_subs.append(np.broadcast_to(breakdown.total, shape).astype(float))
    return a_los, a_subs


def ctf_weights(cfg: ScenarioConfig) -> tuple[float, float, float]:
    k = cfg.power.rice_k
    w_los = math.sqrt(k / (k + 1.0))
    w_da = math.sqrt(cfg.power.da_fraction / (k + 1.0)) / math.sqrt(
        2.0 * cfg.clusters.max_surface_hops * cfg.clusters.rays_per_path
    )
    w_ua = math.sqrt(cfg.power.ua_fraction / (k + 1.0)) / math.sqrt(
        2.0 * cfg.clusters.max_bottom_hops * cfg.clusters.rays_per_path
    )
    return w_los, w_da, w_ua


def ctf_values(real: ChannelRealization, table: ComponentTable, freq_offset, unit_gains: bool = False) -> np.ndarray:
    """Complex CTF along the table's time axis at baseband offset(s) Hz."""
    cfg = real.cfg
    f_abs = cfg.signal.carrier_freq + np.asarray(freq_offset, dtype=float)
    a_los, a_subs = subpath_gains(real, table, f_abs, unit_gains)
    w_los, w_da, w_ua = ctf_weights(cfg)
    out = w_los * a_los * np.exp(-1j * TAU * f_abs * table.los_delay)
    f_col = np.broadcast_to(f_abs, table.times.shape)[:, np.newaxis]
    for sp, a, delays in zip(real.subpaths, a_subs, table.delays):
        w = w_da if sp.path.kind is PathKind.DA else w_ua
        phasors = np.exp(1j * sp.phases[np.newaxis, :] - 1j * TAU * f_col * delays)
        out = out + w * a * phasors.sum(axis=1)
    return out


def evaluate_ctf(real: ChannelRealization, unit_gains: bool = False) -> CtfFrame:
    """The CTF over the scenario's full (time x frequency) grid."""
    cfg = real.cfg
    table = component_table(real, cfg.signal.time_grid)
    freqs = np.asarray(cfg.signal.freq_offsets, dtype=float)
    values = np.empty((table.times.size, freqs.size), dtype=complex)
    for fi, f in enumerate(freqs):
        values[:, fi] = ctf_values(real, table, f, unit_gains)
    if not np.all(np.isfinite(values.view(float))):
        raise ArithmeticError("CTF evaluation produced non-finite samples")
    return CtfFrame(
        times=table.times,
        freq_offsets=freqs,
        carrier_freq=cfg.signal.carrier_freq,
        values=values,
        realization=real.index,
    )


def tap_list(real: ChannelRealization, t: float, freq_offset: float, unit_gains: bool = False) -> list[Tap]:
    """Discrete multipath taps at one (t, f); their sum equals the CTF there.

    The direct tap is present only when the Rice factor is positive.
    """
    cfg = real.cfg
    table = component_table(real, [t])
    f_abs = cfg.signal.carrier_freq + freq_offset
    a_los, a_subs = subpath_gains(real, table, f_abs, unit_gains)
    w_los, w_da, w_ua = ctf_weights(cfg)
    taps: list[Tap] = []
    if cfg.power.rice_k > 0:
        amp = w_los * a_los[0] * np.exp(-1j * TAU * f_abs * table.los_delay[0])
        taps.append(Tap(delay=float(table.los_delay[0]), amplitude=complex(amp), label="los"))
    for sp, a, delays in zip(real.subpaths, a_subs, table.delays):
        w = w_da if sp.path.kind is PathKind.DA else w_ua
        amps = w * a[0] * np.exp(1j * sp.phases - 1j * TAU * f_abs * delays[0])
        for n in range(delays.shape[1]):
            taps.append(
                Tap(delay=float(delays[0, n]), amplitude=complex(amps[n]), label=f"{sp.path.label}#{n}")
            )
    return taps


def los_delay(real: ChannelRealization, t) -> float | np.ndarray:
    """Direct-path delay at time(s) t, drift projections included."""
    table = component_table(real, t)
    return float(table.los_delay[0]) if np.ndim(t) == 0 else table.los_delay


def ray_delay(real: ChannelRealization, ray: geo.MicroRay, t) -> float | np.ndarray:
    """Propagation delay of one ray at time(s) t."""
    cfg = real.cfg
    tt = np.asarray(t, dtype=float)
    state = geo.evolve(cfg.geometry, cfg.intentional, tt)
    cluster = geo.macro_ray(state, cfg.geometry.water_depth, ray.path)
    drift_tx = real.drift_tx.displacement(tt)
    drift_rx = real.drift_rx.displacement(tt)
    leg_tx, mid, leg_rx = geo.micro_ray_distances(
        ray, cluster, state, cfg.geometry.water_depth, drift_tx, drift_rx, cfg.surface, tt
    )
    total = (np.asarray(leg_tx) + np.asarray(mid) + np.asarray(leg_rx)) / cfg.geometry.sound_speed
    return float(total) if np.ndim(t) == 0 else total
