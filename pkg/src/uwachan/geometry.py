"""Time-varying propagation geometry.

Angle conventions: ray departure/arrival angles are measured
counter-clockwise from the horizontal Tx->Rx axis, in [0, 2*pi); boundary
incidence angles are measured from the boundary normal and lie in (0, pi/2).
With these conventions the mean ray angles at a reflection point are exactly
pi/2 -+ incidence (surface) and 3*pi/2 +- incidence (bottom).

Per-ray random draws (angle offsets, surface phases, mid-leg perturbation)
are frozen when a ray is created; the angles themselves track the moving
specular point, i.e. angle(t) = mean_angle(t) + frozen offset.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .propagation import PathKind
from .scenario import TAU, ClusterConfig, GeometryConfig, IntentionalMotion, SurfaceMotionConfig

__all__ = [
    "GeometryError",
    "Boundary",
    "PathIndex",
    "enumerate_paths",
    "GeometryState",
    "evolve",
    "los_distance",
    "ClusterGeometry",
    "macro_ray",
    "MicroRay",
    "sample_micro_ray_mb",
    "sample_micro_ray_sb",
    "ray_angles",
    "micro_ray_distances",
    "segment_lengths",
]

_MIN_SIN = 1e-12


class GeometryError(ValueError):
    """The requested geometry is outside the model's valid domain."""


class Boundary(Enum):
    SURFACE = "surface"
    BOTTOM = "bottom"


@dataclass(frozen=True)
class PathIndex:
    """One reflected sub-path, identified by its boundary-contact counts."""

    kind: PathKind
    surface_hops: int
    bottom_hops: int

    def __post_init__(self):
        if self.kind is PathKind.DA:
            ok = self.surface_hops >= 1 and self.bottom_hops in (self.surface_hops - 1, self.surface_hops)
        elif self.kind is PathKind.UA:
            ok = self.bottom_hops >= 1 and self.surface_hops in (self.bottom_hops - 1, self.bottom_hops)
        else:
            ok = False
        if not ok:
            raise GeometryError(
                f"invalid path index: kind={self.kind}, surface_hops={self.surface_hops}, "
                f"bottom_hops={self.bottom_hops}"
            )

    @property
    def is_single_bounce(self) -> bool:
        return self.surface_hops + self.bottom_hops == 1

    @property
    def first_boundary(self) -> Boundary:
        if self.kind is PathKind.DA:
            return Boundary.BOTTOM if self.surface_hops == self.bottom_hops else Boundary.SURFACE
        return Boundary.SURFACE if self.surface_hops == self.bottom_hops else Boundary.BOTTOM

    @property
    def last_boundary(self) -> Boundary:
        return Boundary.SURFACE if self.kind is PathKind.DA else Boundary.BOTTOM

    @property
    def label(self) -> str:
        if self.kind is PathKind.DA:
            return f"da_s{self.surface_hops}_b{self.bottom_hops}"
        return f"ua_b{self.bottom_hops}_s{self.surface_hops}"


def enumerate_paths(clusters: ClusterConfig) -> tuple[PathIndex, ...]:
    """All sub-paths of a scenario, surface-final first, in a fixed order."""
    paths = []
    for s in range(1, clusters.max_surface_hops + 1):
        for b in (s - 1, s):
            paths.append(PathIndex(PathKind.DA, s, b))
    for b in range(1, clusters.max_bottom_hops + 1):
        for s in (b - 1, b):
            paths.append(PathIndex(PathKind.UA, s, b))
    return tuple(paths)


@dataclass(frozen=True, eq=False)
class GeometryState:
    """Horizontal range, platform depths, and direct-path angles at time t.

    Fields are floats for scalar t and ndarrays for an array of times.
    """

    distance: float | np.ndarray
    tx_depth: float | np.ndarray
    rx_depth: float | np.ndarray
    aod_los: float | np.ndarray
    aoa_los: float | np.ndarray


def evolve(geometry: GeometryConfig, motion: IntentionalMotion, t) -> GeometryState:
    """Geometry under intentional motion only; drift does not move platforms."""
    tt = np.asarray(t, dtype=float)
    distance = (
        geometry.distance0
        - motion.tx_speed * tt * math.cos(motion.tx_heading)
        + motion.rx_speed * tt * math.cos(motion.rx_heading)
    )
    tx_depth = geometry.tx_depth0 + motion.tx_speed * tt * math.sin(motion.tx_heading)
    rx_depth = geometry.rx_depth0 + motion.rx_speed * tt * math.sin(motion.rx_heading)
    if np.any(distance <= 0):
        raise GeometryError(f"Tx-Rx horizontal distance became <= 0 within t={t!r}")
    for name, depth in (("Tx", tx_depth), ("Rx", rx_depth)):
        if np.any(depth <= 0) or np.any(depth >= geometry.water_depth):
            raise GeometryError(f"{name} breaches the water column within t={t!r}")
    aod_los = np.arctan2(rx_depth - tx_depth, distance)
    scalar = np.ndim(t) == 0
    if scalar:
        return GeometryState(
            float(distance), float(tx_depth), float(rx_depth), float(aod_los), float(aod_los) + math.pi
        )
    return GeometryState(distance, tx_depth, rx_depth, aod_los, aod_los + math.pi)


def los_distance(state: GeometryState, drift_tx=(0.0, 0.0), drift_rx=(0.0, 0.0)):
    """Direct-path length with first-order drift projections removed.

    ``drift_tx``/``drift_rx`` are (displacement m, bearing rad) pairs; the
    approximation assumes displacements small against the range.
    """
    dd_t, alpha_t = drift_tx
    dd_r, alpha_r = drift_rx
    base = np.hypot(state.distance, state.rx_depth - state.tx_depth)
    out = (
        base
        - dd_t * np.cos(np.asarray(alpha_t) - state.aod_los)
        - dd_r * np.cos(state.aoa_los - np.asarray(alpha_r))
    )
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False)
class ClusterGeometry:
    """Specular-reflection geometry of one sub-path at time t.

    ``distance`` is the unfolded image-method path length, ``incidence`` the
    boundary incidence angle, and the three legs split the path at the first
    and last reflection clusters (``leg_mid`` is 0 for single bounces).
    """

    path: PathIndex
    distance: float | np.ndarray
    incidence: float | np.ndarray
    mean_aod: float | np.ndarray
    mean_aoa: float | np.ndarray
    leg_tx: float | np.ndarray
    leg_rx: float | np.ndarray
    leg_mid: float | np.ndarray

    @property
    def first_boundary(self) -> Boundary:
        return self.path.first_boundary

    @property
    def last_boundary(self) -> Boundary:
        return self.path.last_boundary


def macro_ray(state: GeometryState, water_depth: float, path: PathIndex) -> ClusterGeometry:
    """Image-method distance, incidence angle and leg split of a sub-path."""
    h_t, h_r, dist = state.tx_depth, state.rx_depth, state.distance
    if path.kind is PathKind.DA:
        tx_sign = 1.0 if path.surface_hops == path.bottom_hops else -1.0
        vertical = 2.0 * path.surface_hops * water_depth + tx_sign * h_t - h_r
    else:
        tx_sign = -1.0 if path.surface_hops == path.bottom_hops else 1.0
        vertical = 2.0 * path.surface_hops * water_depth + tx_sign * h_t + h_r
    if np.any(vertical <= 0):
        raise GeometryError(f"non-positive unfolded vertical extent for {path.label}")
    distance = np.hypot(dist, vertical)
    incidence = np.arctan2(dist, vertical)  # in (0, pi/2) for positive operands
    cos_inc = np.cos(incidence)
    if path.first_boundary is Boundary.SURFACE:
        mean_aod = math.pi / 2 - incidence
        leg_tx = (water_depth - h_t) / cos_inc
    else:
        mean_aod = 3 * math.pi / 2 + incidence
        leg_tx = h_t / cos_inc
    if path.last_boundary is Boundary.SURFACE:
        mean_aoa = math.pi / 2 + incidence
        leg_rx = (water_depth - h_r) / cos_inc
    else:
        mean_aoa = 3 * math.pi / 2 - incidence
        leg_rx = h_r / cos_inc
    leg_mid = distance - leg_tx - leg_rx
    if path.is_single_bounce:
        leg_mid = np.zeros_like(np.asarray(leg_mid, dtype=float))
        if np.ndim(distance) == 0:
            leg_mid = 0.0
    scalar = np.ndim(distance) == 0
    cast = float if scalar else (lambda x: x)
    return ClusterGeometry(
        path=path,
        distance=cast(distance),
        incidence=cast(incidence),
        mean_aod=cast(mean_aod),
        mean_aoa=cast(mean_aoa),
        leg_tx=cast(leg_tx),
        leg_rx=cast(leg_rx),
        leg_mid=cast(leg_mid),
    )


@dataclass(frozen=True)
class MicroRay:
    """Frozen random draws of one diffuse ray.

    Angles are drawn once, at ray birth, and reused across the whole time
    grid; only the deterministic geometry terms evolve afterwards.
    ``theta_first``/``theta_last`` are the surface-oscillation phases of the
    first/last reflection cluster and are None when that cluster sits on the
    (static) bottom. Single-bounce rays couple their departure angle to the
    arrival angle through the reflection geometry, so ``aod`` is NaN there
    and is re-derived from ``aoa`` at evaluation time.
    """

    path: PathIndex
    aod: float  # departure angle, rad; NaN for single-bounce rays
    aoa: float  # arrival angle, rad
    theta_first: float | None
    theta_last: float | None
    delta_mid: float  # log-perturbation of the inter-cluster leg; 0 for SB


def _spread_for(boundary: Boundary, spreads: ClusterConfig) -> float:
    return spreads.angle_spread_surface if boundary is Boundary.SURFACE else spreads.angle_spread_bottom


def _angle_domain(boundary: Boundary) -> tuple[float, float]:
    # Half-plane in which the corresponding sin() in the leg formulas stays > 0.
    return (0.0, math.pi) if boundary is Boundary.SURFACE else (math.pi, TAU)


def sample_micro_ray_mb(
    cluster: ClusterGeometry,
    spreads: ClusterConfig,
    rng: np.random.Generator,
    max_tries: int = 1000,
) -> tuple[MicroRay, int]:
    """Draw one multi-bounce ray around a cluster; returns (ray, resamples)."""
    path = cluster.path
    if path.is_single_bounce:
        raise GeometryError(f"multi-bounce sampler called on single-bounce path {path.label}")
    resamples = 0

    def draw_angle(mean: float, sigma: float, domain: tuple[float, float]) -> float:
        nonlocal resamples
        for _ in range(max_tries):
            angle = rng.normal(mean, sigma)
            if domain[0] < angle < domain[1]:
                return angle
            resamples += 1
        raise GeometryError(f"could not draw an in-branch angle for {path.label} after {max_tries} tries")

    aod = draw_angle(
        float(cluster.mean_aod), _spread_for(path.first_boundary, spreads), _angle_domain(path.first_boundary)
    )
    aoa = draw_angle(
        float(cluster.mean_aoa), _spread_for(path.last_boundary, spreads), _angle_domain(path.last_boundary)
    )
    delta_mid = rng.normal(0.0, spreads.mid_distance_spread)
    theta_first = rng.uniform(0.0, TAU) if path.first_boundary is Boundary.SURFACE else None
    theta_last = rng.uniform(0.0, TAU) if path.last_boundary is Boundary.SURFACE else None
    ray = MicroRay(
        path=path,
        aod=aod,
        aoa=aoa,
        theta_first=theta_first,
        theta_last=theta_last,
        delta_mid=delta_mid,
    )
    return ray, resamples


def _sb_arrival_valid(path: PathIndex, aoa, state: GeometryState, water_depth: float) -> bool:
    # The single scatterer must sit on its boundary strictly between the
    # platforms; otherwise the coupled departure angle leaves its branch.
    if path.kind is PathKind.DA:
        if not math.pi / 2 < aoa < math.pi:
            return False
        run = (water_depth - state.rx_depth) / math.tan(math.pi - aoa)
    else:
        if not math.pi < aoa < 3 * math.pi / 2:
            return False
        run = state.rx_depth / math.tan(aoa - math.pi)
    return 0.0 < run < state.distance


def sample_micro_ray_sb(
    cluster: ClusterGeometry,
    state: GeometryState,
    water_depth: float,
    spreads: ClusterConfig,
    rng: np.random.Generator,
    max_tries: int = 1000,
) -> tuple[MicroRay, int]:
    """Draw one single-bounce ray; the departure angle is geometry-coupled."""
    path = cluster.path
    if not path.is_single_bounce:
        raise GeometryError(f"single-bounce sampler called on multi-bounce path {path.label}")
    sigma = _spread_for(path.last_boundary, spreads)
    resamples = 0
    for _ in range(max_tries):
        aoa = rng.normal(float(cluster.mean_aoa), sigma)
        if _sb_arrival_valid(path, aoa, state, water_depth):
            break
        resamples += 1
    else:
        raise GeometryError(f"could not draw an in-branch arrival angle for {path.label} after {max_tries} tries")
    if path.kind is PathKind.DA:
        theta = rng.uniform(0.0, TAU)  # one scatterer serves both legs
        theta_first, theta_last = theta, theta
    else:
        theta_first, theta_last = None, None
    ray = MicroRay(
        path=path,
        aod=math.nan,
        aoa=aoa,
        theta_first=theta_first,
        theta_last=theta_last,
        delta_mid=0.0,
    )
    return ray, resamples


def sb_departure_angle(kind: PathKind, aoa, state: GeometryState, water_depth: float):
    """Departure angle of a single-bounce ray implied by its arrival angle."""
    if kind is PathKind.DA:
        run = (water_depth - state.rx_depth) / np.tan(math.pi - np.asarray(aoa, dtype=float))
        return np.arctan2(water_depth - state.tx_depth, state.distance - run)
    run = state.rx_depth / np.tan(np.asarray(aoa, dtype=float) - math.pi)
    return TAU - np.arctan2(state.tx_depth, state.distance - run)


def ray_angles(ray: MicroRay, state: GeometryState, water_depth: float):
    """Departure and arrival angles of a ray under the geometry at time(s) t.

    The frozen draws are returned as-is; only single-bounce departure angles
    vary, re-derived from the coupled arrival angle and the current geometry.
    """
    if ray.path.is_single_bounce:
        aod = sb_departure_angle(ray.path.kind, ray.aoa, state, water_depth)
        if np.ndim(state.distance) == 0:
            aod = float(aod)
        return aod, ray.aoa
    return ray.aod, ray.aoa


def segment_lengths(
    path: PathIndex,
    state: GeometryState,
    water_depth: float,
    leg_mid,
    aod,
    aoa,
    theta_first,
    theta_last,
    delta_mid,
    drift_tx,
    drift_rx,
    surface: SurfaceMotionConfig,
    t,
):
    """Evaluate the three leg lengths of rays; broadcasts over all inputs.

    ``theta_first``/``theta_last`` may be None (cluster on the bottom: no
    surface-oscillation term). ``drift_tx``/``drift_rx`` are (magnitude,
    bearing) pairs of the platform drift displacement at ``t``.
    """
    tt = np.asarray(t, dtype=float)
    dd_t, alpha_t = (np.asarray(v, dtype=float) for v in drift_tx)
    dd_r, alpha_r = (np.asarray(v, dtype=float) for v in drift_rx)
    b_tx = dd_t * np.cos(alpha_t - aod)
    b_rx = dd_r * np.cos(alpha_r - aoa)

    if path.first_boundary is Boundary.SURFACE:
        osc = surface.amplitude * np.sin(TAU * surface.freq * tt + theta_first)
        a_tx = osc * np.cos(aod - surface.travel_angle)
        sin_t = np.sin(aod)
        _guard_sin(sin_t, path)
        leg_tx = a_tx + (water_depth - state.tx_depth) / sin_t - b_tx
    else:
        sin_t = np.sin(TAU - aod)
        _guard_sin(sin_t, path)
        leg_tx = state.tx_depth / sin_t - b_tx

    if path.last_boundary is Boundary.SURFACE:
        osc = surface.amplitude * np.sin(TAU * surface.freq * tt + theta_last)
        a_rx = osc * np.cos(aoa - surface.travel_angle)
        sin_r = np.sin(math.pi - aoa)
        _guard_sin(sin_r, path)
        leg_rx = a_rx + (water_depth - state.rx_depth) / sin_r - b_rx
    else:
        sin_r = np.sin(aoa - math.pi)
        _guard_sin(sin_r, path)
        leg_rx = state.rx_depth / sin_r - b_rx

    if path.is_single_bounce:
        mid = np.zeros(np.broadcast(leg_tx, leg_rx).shape)
    else:
        mid = leg_mid * np.exp(delta_mid)
    return leg_tx, mid, leg_rx


def _guard_sin(sin_values, path: PathIndex) -> None:
    if np.any(np.abs(sin_values) < _MIN_SIN):
        raise GeometryError(f"degenerate grazing angle on {path.label}: |sin| < {_MIN_SIN}")


def micro_ray_distances(
    ray: MicroRay,
    cluster: ClusterGeometry,
    state: GeometryState,
    water_depth: float,
    drift_tx,
    drift_rx,
    surface: SurfaceMotionConfig,
    t,
):
    """Leg lengths (tx->first, first->last, last->rx) of one ray at time(s) t."""
    aod, aoa = ray_angles(ray, state, water_depth)
    theta_first = 0.0 if ray.theta_first is None else ray.theta_first
    theta_last = 0.0 if ray.theta_last is None else ray.theta_last
    leg_tx, mid, leg_rx = segment_lengths(
        ray.path,
        state,
        water_depth,
        cluster.leg_mid,
        aod,
        aoa,
        theta_first,
        theta_last,
        ray.delta_mid,
        drift_tx,
        drift_rx,
        surface,
        t,
    )
    if np.ndim(leg_tx) == 0 and np.ndim(leg_rx) == 0 and np.ndim(mid) == 0:
        return float(leg_tx), float(mid), float(leg_rx)
    return leg_tx, mid, leg_rx
