import dataclasses
import math

import numpy as np
import pytest

from uwachan.scenario import (
    ClusterConfig,
    DriftConfig,
    GeometryConfig,
    PowerConfig,
    ScenarioConfig,
    SignalConfig,
    SurfaceMotionConfig,
    IntentionalMotion,
    validate,
)
from uwachan.stats import (
    PdpResult,
    acf,
    delay_stats,
    ensemble_delay_stats,
    pdp,
    tfcf,
)
from uwachan.channel import build_realization


def scenario(**overrides) -> ScenarioConfig:
    base = dict(
        geometry=GeometryConfig(distance0=2000.0, water_depth=100.0, tx_depth0=50.0, rx_depth0=80.0),
        clusters=ClusterConfig(max_surface_hops=1, max_bottom_hops=1, rays_per_path=6),
        power=PowerConfig(rice_k=1.0),
        signal=SignalConfig(carrier_freq=15000.0, time_grid=(0.0,)),
        master_seed=5,
        realizations=40,
    )
    base.update(overrides)
    return validate(ScenarioConfig(**base))


def moving_scenario(**overrides) -> ScenarioConfig:
    base = dict(
        drift=DriftConfig(v_min=0.05, v_max=0.1, change_freq=2.0),
        surface=SurfaceMotionConfig(amplitude=0.5, freq=0.5, travel_angle=math.pi / 2),
    )
    base.update(overrides)
    return scenario(**base)


# ---------------------------------------------------------------------------
# correlation estimators


def test_zero_lag_normalizes_to_exactly_one():
    result = acf(moving_scenario(), 0.0, 0.0, [0.0, 0.01, 0.02], realizations=12)
    assert result.expectation_norm[0] == 1.0
    assert result.empirical_norm[0] == 1.0


def test_static_direct_only_channel_never_decorrelates():
    cfg = scenario(power=PowerConfig(rice_k=1e12))
    result = acf(cfg, 0.0, 0.0, np.linspace(0.0, 0.5, 6), realizations=8)
    assert np.allclose(result.expectation_norm, 1.0, atol=1e-12)
    assert np.allclose(result.empirical_norm, 1.0, atol=1e-9)


def test_static_channel_correlation_equals_zero_lag():
    cfg = scenario()  # nothing moves at all
    result = acf(cfg, 0.0, 0.0, np.linspace(0.0, 1.0, 5), realizations=10)
    assert np.allclose(result.expectation, result.expectation_zero, rtol=0, atol=1e-18)
    assert np.allclose(result.expectation_norm, 1.0, atol=1e-12)


def test_moving_channel_correlation_bounded_by_zero_lag():
    result = acf(moving_scenario(), 0.0, 0.0, np.linspace(0.0, 0.2, 9), realizations=60)
    assert np.all(result.expectation_norm <= 1.0 + 1e-9)
    assert np.all(result.empirical_norm <= 1.0 + 1e-9)


def test_acf_decays_under_motion():
    result = acf(moving_scenario(power=PowerConfig(rice_k=0.0)), 0.0, 0.0, [0.0, 0.1], realizations=80)
    assert result.expectation_norm[1] < 0.9


def test_acf_matches_tfcf_at_shifted_anchor():
    cfg = moving_scenario()
    lag = 0.04
    forward = acf(cfg, 0.0, 0.0, [lag], realizations=10)
    backward = tfcf(cfg, lag, 0.0, [lag], realizations=10)
    assert forward.expectation[0] == pytest.approx(backward.expectation[0], rel=1e-12)
    assert forward.empirical[0] == pytest.approx(backward.empirical[0], rel=1e-12)


def test_tfcf_hermitian_symmetry():
    cfg = moving_scenario()
    anchor = 0.1
    lags = np.array([0.03, -0.03])
    result = tfcf(cfg, anchor, 0.0, lags, realizations=200)
    fwd, rev = result.expectation
    se = result.expectation_stderr * abs(result.expectation_zero)
    tol = 3 * (se[0] + se[1]) + 1e-12
    assert abs(fwd - np.conj(rev)) <= tol


def test_tfcf_rejects_lags_before_time_origin():
    with pytest.raises(ValueError, match="before t=0"):
        tfcf(scenario(), 0.01, 0.0, [0.02], realizations=2)


def test_frequency_lag_changes_correlation():
    cfg = scenario(
        clusters=ClusterConfig(max_surface_hops=2, max_bottom_hops=2, rays_per_path=10)
    )
    result = tfcf(cfg, 0.0, 0.0, [0.0, 0.0], lags_f=[0.0, 200.0], realizations=60)
    assert result.expectation_norm[0] == 1.0
    assert result.expectation_norm[1] < 0.999


def test_phase_draws_reduce_estimator_gap():
    cfg = moving_scenario(power=PowerConfig(rice_k=0.0), realizations=60)
    lags = np.linspace(0.0, 0.1, 6)
    plain = acf(cfg, 0.0, 0.0, lags, phase_draws=1)
    refined = acf(cfg, 0.0, 0.0, lags, phase_draws=12)
    gap_plain = np.abs(plain.expectation_norm - plain.empirical_norm).max()
    gap_refined = np.abs(refined.expectation_norm - refined.empirical_norm).max()
    assert gap_refined < gap_plain
    # expectation side is untouched by the stratification
    assert np.array_equal(plain.expectation, refined.expectation)


def test_monte_carlo_error_shrinks_like_root_n():
    cfg = moving_scenario(
        power=PowerConfig(rice_k=0.0),
        clusters=ClusterConfig(max_surface_hops=1, max_bottom_hops=1, rays_per_path=5),
    )
    lag = [0.05]
    trials = 64

    def spread(n):
        values = [
            abs(
                acf(dataclasses.replace(cfg, master_seed=1000 + s), 0.0, 0.0, lag,
                    realizations=n).expectation[0]
            )
            for s in range(trials)
        ]
        return np.std(values, ddof=1)

    ratio = spread(16) / spread(32)
    assert math.sqrt(2) * 0.8 <= ratio <= math.sqrt(2) * 1.2


def test_jobs_do_not_change_results():
    cfg = moving_scenario(realizations=6)
    lags = np.linspace(0.0, 0.05, 4)
    serial = acf(cfg, 0.0, 0.0, lags, jobs=1)
    parallel = acf(cfg, 0.0, 0.0, lags, jobs=2)
    assert np.array_equal(serial.expectation, parallel.expectation)
    assert np.array_equal(serial.empirical, parallel.empirical)


# ---------------------------------------------------------------------------
# delay profiles and moments


def impulses(delays, powers):
    delays = np.asarray(delays, dtype=float)
    powers = np.asarray(powers, dtype=float)
    first = delays.min()
    order = np.argsort(delays)
    return PdpResult(
        anchor_t=0.0,
        anchor_f=0.0,
        mode="cluster",
        delays=delays[order] - first,
        powers=powers[order],
        labels=[f"i{k}" for k in range(delays.size)],
        first_arrival=float(first),
    )


def test_delay_stats_single_impulse():
    stats = delay_stats(impulses([1.3e-3], [2.0]))
    assert stats.average == 0.0  # relative to first arrival
    assert stats.rms_spread == 0.0


def test_delay_stats_symmetric_pair():
    stats = delay_stats(impulses([1.0e-3, 3.0e-3], [0.5, 0.5]))
    assert stats.average == pytest.approx(1.0e-3, rel=1e-12)
    assert stats.rms_spread == pytest.approx(1.0e-3, rel=1e-12)


def test_delay_stats_shift_invariance():
    a = delay_stats(impulses([1e-3, 2e-3, 5e-3], [1.0, 2.0, 0.5]))
    b = delay_stats(impulses([11e-3, 12e-3, 15e-3], [1.0, 2.0, 0.5]))
    assert a.rms_spread == pytest.approx(b.rms_spread, rel=1e-12)
    assert a.average == pytest.approx(b.average, rel=1e-12)


def test_delay_stats_power_scale_invariance():
    a = delay_stats(impulses([1e-3, 2e-3, 5e-3], [1.0, 2.0, 0.5]))
    b = delay_stats(impulses([1e-3, 2e-3, 5e-3], [7.0, 14.0, 3.5]))
    assert a.average == pytest.approx(b.average, rel=1e-12)
    assert a.rms_spread == pytest.approx(b.rms_spread, rel=1e-12)


def test_delay_stats_rejects_zero_power():
    with pytest.raises(ValueError, match="positive power"):
        delay_stats(impulses([1e-3], [0.0]))


def test_cluster_pdp_impulse_count_and_normalization():
    profile = pdp(scenario(), 0.0, 0.0, "cluster")
    assert len(profile.delays) == 5  # direct + four sub-paths
    assert profile.delays[0] == 0.0
    assert np.all(profile.delays >= 0.0)
    assert profile.labels[0] == "los"
    profile0 = pdp(scenario(power=PowerConfig(rice_k=0.0)), 0.0, 0.0, "cluster")
    assert len(profile0.delays) == 4  # no direct impulse at zero Rice factor


def test_ray_pdp_impulse_count():
    cfg = scenario()
    real = build_realization(cfg, 0)
    profile = pdp(real, 0.0, 0.0, "ray")
    assert len(profile.delays) == 1 + 4 * cfg.clusters.rays_per_path
    assert pytest.approx(profile.delays[0]) == 0.0


def test_ray_pdp_requires_realization():
    with pytest.raises(ValueError, match="ChannelRealization"):
        pdp(scenario(), 0.0, 0.0, "ray")


def test_pdp_powers_are_quadratic_in_gain():
    cfg = scenario()
    plain = pdp(cfg, 0.0, 0.0, "cluster")
    unit = pdp(cfg, 0.0, 0.0, "cluster", unit_gains=True)
    from uwachan.propagation import PathKind, path_gain
    from uwachan.geometry import enumerate_paths, evolve, los_distance, macro_ray

    state = evolve(cfg.geometry, cfg.intentional, 0.0)
    gains = {"los": path_gain(PathKind.LOS, los_distance(state), cfg.signal.carrier_freq).total}
    for path in enumerate_paths(cfg.clusters):
        cluster = macro_ray(state, cfg.geometry.water_depth, path)
        gains[path.label] = path_gain(
            path.kind,
            cluster.distance,
            cfg.signal.carrier_freq,
            incidence=cluster.incidence,
            bottom_bounces=path.bottom_hops,
            bottom=cfg.bottom,
            water_sound_speed=cfg.geometry.sound_speed,
        ).total
    for label, p_real, p_unit in zip(plain.labels, plain.powers, unit.powers):
        assert p_real == pytest.approx(p_unit * gains[label] ** 2, rel=1e-12)


def test_pdp_binning_conserves_power():
    profile = pdp(scenario(), 0.0, 0.0, "cluster")
    starts, sums = profile.binned(width=5e-4)
    assert sums.sum() == pytest.approx(profile.powers.sum(), rel=1e-12)
    assert starts[0] == 0.0


def test_ensemble_delay_stats_cluster_mode_is_degenerate():
    ens = ensemble_delay_stats(scenario(), realizations=7)
    assert ens.n == 7
    assert ens.average_std == pytest.approx(0.0, abs=1e-15)
    assert ens.rms_spread_std == pytest.approx(0.0, abs=1e-15)
    single = delay_stats(pdp(scenario(), 0.0, 0.0, "cluster"))
    assert ens.average_mean == pytest.approx(single.average, rel=1e-15)


def test_ensemble_delay_stats_ray_mode_varies():
    cfg = scenario(master_seed=9)
    ens = ensemble_delay_stats(cfg, mode="ray", realizations=4)
    assert ens.n == 4
    assert ens.rms_spread_std > 0.0
