"""Named experiment scenarios and their reference evaluation grids."""
from __future__ import annotations

import math

import numpy as np

from .scenario import (
    BottomConfig,
    ClusterConfig,
    DriftConfig,
    GeometryConfig,
    IntentionalMotion,
    PowerConfig,
    ScenarioConfig,
    SignalConfig,
    SurfaceMotionConfig,
    validate,
)

__all__ = [
    "PRESET_NAMES",
    "preset_scenario",
    "FIG3_LAGS",
    "FIG4_LAGS",
    "TABLE1_TARGETS",
]

PRESET_NAMES = ("fig3", "fig4-time", "fig4-freq", "fig5", "table1")

# Lag axes used by the canned correlation experiments, seconds. The second
# axis is dense up to 20 ms to resolve coherence-time crossings at high
# carriers, then coarser out to 0.5 s where anchor-to-anchor differences show.
FIG3_LAGS = np.linspace(0.0, 0.1, 21)
FIG4_LAGS = np.concatenate(
    [np.arange(0.0, 0.02, 0.0005), np.arange(0.02, 0.1, 0.0025), np.arange(0.1, 0.5001, 0.005)]
)

# Reference delay moments (s) for the measurement-comparison scenario and
# the relative tolerance the `validate` command enforces.
TABLE1_TARGETS = {"average_delay": 1.505e-3, "rms_delay_spread": 2.399e-3, "tolerance": 0.05}

_DEFAULT_SEED = 1


def _survey_base() -> dict:
    # Shared shallow-water survey geometry used by the fig3/fig4/fig5 scenarios.
    return dict(
        geometry=GeometryConfig(
            distance0=2000.0, water_depth=100.0, tx_depth0=50.0, rx_depth0=80.0, sound_speed=1500.0
        ),
        clusters=ClusterConfig(
            max_surface_hops=2,
            max_bottom_hops=2,
            rays_per_path=50,
            angle_spread_surface=0.015,
            angle_spread_bottom=0.015,
            mid_distance_spread=0.001,
        ),
        power=PowerConfig(rice_k=0.0, da_fraction=0.5, ua_fraction=0.5),
        bottom=BottomConfig(density_ratio=1.5, sound_speed=1600.0),
        master_seed=_DEFAULT_SEED,
        realizations=500,
    )


def preset_scenario(name: str) -> ScenarioConfig:
    """The exact parameter set of one named experiment, validated."""
    if name == "fig3":
        base = _survey_base()
        base.update(
            intentional=IntentionalMotion(
                tx_speed=1.0, tx_heading=0.0, rx_speed=1.0, rx_heading=-math.pi / 2
            ),
            drift=DriftConfig(v_min=0.1, v_max=0.12, change_freq=1.0),
            surface=SurfaceMotionConfig(amplitude=1.0, freq=0.5, travel_angle=math.pi / 2),
            signal=SignalConfig(carrier_freq=15000.0, freq_offsets=(0.0,), time_grid=(0.0, 0.05, 0.1)),
        )
        base["power"] = PowerConfig(rice_k=5.0, da_fraction=0.5, ua_fraction=0.5)
        return validate(ScenarioConfig(**base))
    if name in ("fig4-time", "fig4-freq", "fig5"):
        base = _survey_base()
        base.update(
            intentional=IntentionalMotion(
                tx_speed=10.0, tx_heading=0.0, rx_speed=5.0, rx_heading=-math.pi
            ),
            drift=DriftConfig(v_min=0.0, v_max=0.0, change_freq=1.0),
            surface=SurfaceMotionConfig(amplitude=0.0, freq=0.0, travel_angle=math.pi / 2),
            signal=SignalConfig(carrier_freq=15000.0, freq_offsets=(0.0,), time_grid=(0.0, 2.5, 5.0)),
        )
        if name == "fig5":
            base["power"] = PowerConfig(rice_k=1.0, da_fraction=0.5, ua_fraction=0.5)
        return validate(ScenarioConfig(**base))
    if name == "table1":
        return validate(
            ScenarioConfig(
                geometry=GeometryConfig(
                    distance0=1500.0, water_depth=80.0, tx_depth0=34.5, rx_depth0=36.0, sound_speed=1440.0
                ),
                intentional=IntentionalMotion(),
                drift=DriftConfig(v_min=0.0, v_max=0.0, change_freq=1.0),
                surface=SurfaceMotionConfig(amplitude=2.0, freq=0.1, travel_angle=math.pi / 2),
                clusters=ClusterConfig(
                    max_surface_hops=1,
                    max_bottom_hops=1,
                    rays_per_path=50,
                    angle_spread_surface=0.02317,
                    angle_spread_bottom=0.02317,
                    mid_distance_spread=0.001,
                ),
                power=PowerConfig(rice_k=1.44, da_fraction=0.5, ua_fraction=0.5),
                bottom=BottomConfig(density_ratio=1.5, sound_speed=1.11 * 1440.0),
                signal=SignalConfig(carrier_freq=17000.0, freq_offsets=(0.0,), time_grid=(0.0,)),
                master_seed=_DEFAULT_SEED,
                realizations=500,
            )
        )
    raise ValueError(f"unknown preset {name!r}; known presets: {', '.join(PRESET_NAMES)}")
