"""Batch command-line front end.

Subcommands: ``simulate`` (CTF or tap dumps), ``acf``, ``pdp``,
``delay-stats``, ``validate`` (measurement-comparison tolerance gate), and
``preset`` (run a named experiment end to end). Outputs are CSV written
atomically; identical seeds and configs produce byte-identical files
regardless of ``--jobs``.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import tempfile
import time

import numpy as np

from . import stats
from .channel import build_realization, evaluate_ctf, tap_list
from .presets import FIG3_LAGS, FIG4_LAGS, PRESET_NAMES, TABLE1_TARGETS, preset_scenario
from .scenario import (
    ScenarioConfig,
    ScenarioError,
    load_scenario,
    scenario_from_dict,
    scenario_to_dict,
    validate,
)

__all__ = ["main"]


class CliError(Exception):
    """User-facing CLI failure with a stable message."""


def _fmt(value) -> str:
    if isinstance(value, float):  # includes numpy float64; canonical shortest repr
        return repr(float(value))
    return str(value)


def _write_csv(path: str, header: list[str], rows: list[tuple]) -> int:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".csv.tmp")
    except OSError as exc:
        raise CliError(f"cannot write to {path!r}: {exc}") from exc
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return len(rows)


def _write_meta(out_path: str, cfg: ScenarioConfig, command: str, extra: dict) -> None:
    meta = {
        "command": command,
        "scenario": scenario_to_dict(cfg),
        **extra,
    }
    with open(out_path + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_plot_script(path: str, out_csv: str, description: list[str]) -> None:
    lines = [
        "# Plot companion (plain text). Feed the CSV below to any plotting tool.",
        f"# data: {out_csv}",
        *description,
        "",
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))


def _resolve_scenario(args) -> ScenarioConfig:
    """Preset defaults < scenario file < command-line flags."""
    preset = getattr(args, "preset", None)
    scenario_path = getattr(args, "scenario", None)
    if preset is None and scenario_path is None:
        raise CliError("provide --scenario FILE and/or --preset NAME")
    if preset is not None and preset not in PRESET_NAMES:
        raise CliError(f"unknown preset {preset!r}; known presets: {', '.join(PRESET_NAMES)}")
    if preset is not None and scenario_path is not None:
        base = scenario_to_dict(preset_scenario(preset))
        with open(scenario_path, "r", encoding="utf-8") as fh:
            overlay = json.load(fh)
        if not isinstance(overlay, dict):
            raise ScenarioError("scenario document must be a JSON object")
        for key, value in overlay.items():
            if isinstance(value, dict) and isinstance(base.get(key), dict):
                base[key].update(value)
            else:
                base[key] = value
        cfg = scenario_from_dict(base)
    elif preset is not None:
        cfg = preset_scenario(preset)
    else:
        cfg = load_scenario(scenario_path)
    if getattr(args, "seed", None) is not None:
        cfg = dataclasses.replace(cfg, master_seed=args.seed)
    if getattr(args, "realizations", None) is not None:
        cfg = dataclasses.replace(cfg, realizations=args.realizations)
    return validate(cfg)


def _summary(out: str, rows: int, started: float, seed: int) -> None:
    print(f"wrote {rows} rows to {out} in {time.perf_counter() - started:.2f}s (seed={seed})")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_simulate(args) -> int:
    started = time.perf_counter()
    cfg = _resolve_scenario(args)
    n = args.realizations if args.realizations is not None else 1  # raw dumps default to one draw
    rows: list[tuple] = []
    if args.taps:
        header = ["t_s", "f_offset_hz", "delay_s", "re", "im", "path"]
        for r in range(n):
            real = build_realization(cfg, r)
            for t in cfg.signal.time_grid:
                for f in cfg.signal.freq_offsets:
                    for tap in tap_list(real, t, f):
                        rows.append((t, f, tap.delay, tap.amplitude.real, tap.amplitude.imag, tap.label))
    else:
        header = ["t_s", "f_offset_hz", "re", "im", "realization"]
        for r in range(n):
            frame = evaluate_ctf(build_realization(cfg, r))
            for ti, t in enumerate(frame.times):
                for fi, f in enumerate(frame.freq_offsets):
                    h = frame.values[ti, fi]
                    rows.append((float(t), float(f), h.real, h.imag, r))
    written = _write_csv(args.out, header, rows)
    if args.meta:
        _write_meta(args.out, cfg, "simulate", {"realizations": n, "taps": bool(args.taps)})
    if args.plot_script:
        _write_plot_script(args.plot_script, args.out, ["# x: t_s, y: 20*log10(hypot(re, im))"])
    _summary(args.out, written, started, cfg.master_seed)
    return 0


def _acf_lags(args) -> np.ndarray:
    if args.lag_count < 2:
        raise CliError("--lag-count must be >= 2")
    return np.linspace(0.0, args.lag_max, args.lag_count)


def _cmd_acf(args) -> int:
    started = time.perf_counter()
    cfg = _resolve_scenario(args)
    lags = _acf_lags(args)
    result = stats.acf(cfg, args.t, args.f, lags, jobs=args.jobs)
    if args.estimator == "empirical":
        norm, values = result.empirical_norm, result.empirical
    else:
        norm, values = result.expectation_norm, result.expectation
    rows = [
        (float(lag), float(a), v.real, v.imag)
        for lag, a, v in zip(result.lags_t, norm, values)
    ]
    written = _write_csv(args.out, ["lag_s", "abs", "re", "im"], rows)
    if args.meta:
        _write_meta(args.out, cfg, "acf", {"t": args.t, "f": args.f, "estimator": args.estimator})
    if args.plot_script:
        _write_plot_script(args.plot_script, args.out, ["# x: lag_s, y: abs"])
    _summary(args.out, written, started, cfg.master_seed)
    return 0


def _cmd_pdp(args) -> int:
    started = time.perf_counter()
    cfg = _resolve_scenario(args)
    if args.mode == "ray":
        source = build_realization(cfg, args.realization, horizon=max(args.t, 1e-9))
    else:
        source = cfg
    profile = stats.pdp(source, args.t, args.f, args.mode)
    rows = [
        (float(d), float(p), label)
        for d, p, label in zip(profile.delays, profile.powers, profile.labels)
    ]
    written = _write_csv(args.out, ["delay_s", "power", "label"], rows)
    if args.meta:
        _write_meta(args.out, cfg, "pdp", {"t": args.t, "f": args.f, "mode": args.mode})
    if args.plot_script:
        _write_plot_script(args.plot_script, args.out, ["# stem plot; x: delay_s, y: 10*log10(power)"])
    _summary(args.out, written, started, cfg.master_seed)
    return 0


def _delay_stat_rows(cfg: ScenarioConfig, t: float, f: float, mode: str, jobs: int) -> list[tuple]:
    ens = stats.ensemble_delay_stats(cfg, t, f, mode, jobs=jobs)
    return [
        ("average_delay", ens.average_mean, ens.average_std, ens.n),
        ("rms_delay_spread", ens.rms_spread_mean, ens.rms_spread_std, ens.n),
    ]


def _cmd_delay_stats(args) -> int:
    started = time.perf_counter()
    cfg = _resolve_scenario(args)
    rows = _delay_stat_rows(cfg, args.t, args.f, args.mode, args.jobs)
    written = _write_csv(args.out, ["metric", "ensemble_mean_s", "ensemble_std_s", "realizations"], rows)
    if args.meta:
        _write_meta(args.out, cfg, "delay-stats", {"t": args.t, "f": args.f, "mode": args.mode})
    _summary(args.out, written, started, cfg.master_seed)
    return 0


def _cmd_validate(args) -> int:
    cfg = preset_scenario("table1")
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, master_seed=args.seed)
    if args.realizations is not None:
        cfg = dataclasses.replace(cfg, realizations=args.realizations)
    ens = stats.ensemble_delay_stats(cfg, 0.0, 0.0, "cluster", jobs=args.jobs)
    tol = TABLE1_TARGETS["tolerance"]
    ok = True
    for metric, value in (
        ("average_delay", ens.average_mean),
        ("rms_delay_spread", ens.rms_spread_mean),
    ):
        target = TABLE1_TARGETS[metric]
        passed = abs(value - target) <= tol * target
        ok = ok and passed
        print(
            f"{metric}: {value * 1e3:.4f} ms vs reference {target * 1e3:.3f} ms "
            f"(tolerance {tol:.0%}): {'PASS' if passed else 'FAIL'}"
        )
    return 0 if ok else 1


def _preset_rows(name: str, cfg: ScenarioConfig, jobs: int):
    if name == "fig3":
        header = ["curve", "lag_s", "abs", "re", "im"]
        rows: list[tuple] = []
        for label, rice_k, amplitude in (
            ("k5_a1", 5.0, 1.0),
            ("k0_a1", 0.0, 1.0),
            ("k5_a2", 5.0, 2.0),
            ("k0_a2", 0.0, 2.0),
        ):
            variant = dataclasses.replace(
                cfg,
                power=dataclasses.replace(cfg.power, rice_k=rice_k),
                surface=dataclasses.replace(cfg.surface, amplitude=amplitude),
            )
            result = stats.acf(variant, 0.0, 0.0, FIG3_LAGS, jobs=jobs)
            for lag, a, v in zip(result.lags_t, result.expectation_norm, result.expectation):
                rows.append((label, float(lag), float(a), v.real, v.imag))
        return header, rows
    if name == "fig4-time":
        header = ["curve", "lag_s", "abs", "re", "im"]
        rows = []
        for anchor in (0.0, 5.0, 10.0):
            result = stats.acf(cfg, anchor, 0.0, FIG4_LAGS, jobs=jobs)
            for lag, a, v in zip(result.lags_t, result.expectation_norm, result.expectation):
                rows.append((f"t{anchor:g}", float(lag), float(a), v.real, v.imag))
        return header, rows
    if name == "fig4-freq":
        header = ["curve", "lag_s", "abs", "re", "im"]
        rows = []
        for carrier in (15000.0, 100000.0):
            variant = dataclasses.replace(
                cfg, signal=dataclasses.replace(cfg.signal, carrier_freq=carrier)
            )
            result = stats.acf(variant, 0.0, 0.0, FIG4_LAGS, jobs=jobs)
            for lag, a, v in zip(result.lags_t, result.expectation_norm, result.expectation):
                rows.append((f"fc{carrier:g}", float(lag), float(a), v.real, v.imag))
        return header, rows
    if name == "fig5":
        header = ["curve", "delay_s", "power", "label"]
        rows = []
        for carrier in (15000.0, 100000.0):
            variant = dataclasses.replace(
                cfg, signal=dataclasses.replace(cfg.signal, carrier_freq=carrier)
            )
            for anchor in (0.0, 5.0):
                profile = stats.pdp(variant, anchor, 0.0, "cluster")
                for d, p, label in zip(profile.delays, profile.powers, profile.labels):
                    rows.append((f"t{anchor:g}_fc{carrier:g}", float(d), float(p), label))
        return header, rows
    if name == "table1":
        header = ["metric", "ensemble_mean_s", "ensemble_std_s", "realizations"]
        return header, _delay_stat_rows(cfg, 0.0, 0.0, "cluster", jobs)
    raise CliError(f"unknown preset {name!r}; known presets: {', '.join(PRESET_NAMES)}")


def _cmd_preset(args) -> int:
    started = time.perf_counter()
    if args.name not in PRESET_NAMES:
        raise CliError(f"unknown preset {args.name!r}; known presets: {', '.join(PRESET_NAMES)}")
    cfg = preset_scenario(args.name)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, master_seed=args.seed)
    if args.realizations is not None:
        cfg = dataclasses.replace(cfg, realizations=args.realizations)
    header, rows = _preset_rows(args.name, cfg, args.jobs)
    written = _write_csv(args.out, header, rows)
    if args.meta:
        _write_meta(args.out, cfg, f"preset {args.name}", {})
    if args.plot_script:
        _write_plot_script(args.plot_script, args.out, [f"# preset {args.name}; group rows by 'curve'"])
    _summary(args.out, written, started, cfg.master_seed)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(parser: argparse.ArgumentParser, with_out: bool = True) -> None:
    parser.add_argument("--scenario", help="scenario JSON file")
    parser.add_argument("--preset", help=f"named scenario: {', '.join(PRESET_NAMES)}")
    parser.add_argument("--seed", type=int, help="override the master seed")
    parser.add_argument("--realizations", type=int, help="override the ensemble size")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    if with_out:
        parser.add_argument("--out", required=True, help="output CSV path")
        parser.add_argument("--meta", action="store_true", help="write <out>.meta.json sidecar")
        parser.add_argument("--plot-script", help="write a plain-text plotting companion")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uwachan",
        description="Seeded shallow-water acoustic multipath channel simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="dump complex CTF samples (or taps) to CSV")
    _add_common(p)
    p.add_argument("--taps", action="store_true", help="dump per-ray taps instead of CTF samples")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("acf", help="temporal autocorrelation at an anchor")
    _add_common(p)
    p.add_argument("--t", type=float, default=0.0, help="anchor time, s")
    p.add_argument("--f", type=float, default=0.0, help="anchor baseband offset, Hz")
    p.add_argument("--lag-max", type=float, default=0.1, help="largest lag, s")
    p.add_argument("--lag-count", type=int, default=21, help="number of lags incl. zero")
    p.add_argument(
        "--estimator",
        choices=("expectation", "empirical"),
        default="expectation",
        help="which ensemble estimator to write",
    )
    p.set_defaults(func=_cmd_acf)

    p = sub.add_parser("pdp", help="power delay profile at an anchor")
    _add_common(p)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--f", type=float, default=0.0)
    p.add_argument("--mode", choices=("cluster", "ray"), default="cluster")
    p.add_argument("--realization", type=int, default=0, help="realization index for ray mode")
    p.set_defaults(func=_cmd_pdp)

    p = sub.add_parser("delay-stats", help="ensemble average delay and RMS delay spread")
    _add_common(p)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--f", type=float, default=0.0)
    p.add_argument("--mode", choices=("cluster", "ray"), default="cluster")
    p.set_defaults(func=_cmd_delay_stats)

    p = sub.add_parser("validate", help="check the measurement-comparison delay moments")
    p.add_argument("--seed", type=int, help="override the master seed")
    p.add_argument("--realizations", type=int, help="override the ensemble size")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("preset", help="run a named experiment end to end")
    p.add_argument("name", help=f"one of: {', '.join(PRESET_NAMES)}")
    p.add_argument("--seed", type=int)
    p.add_argument("--realizations", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--meta", action="store_true")
    p.add_argument("--plot-script", help="write a plain-text plotting companion")
    p.set_defaults(func=_cmd_preset)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ScenarioError, ValueError, OSError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
