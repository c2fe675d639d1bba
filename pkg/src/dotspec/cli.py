"""Command-line orchestration: JSON-configured runs and comparison reports.

Modes
-----
wkb       quantized levels -> CSV table
hk        semiclassical autocorrelation -> correlation CSV, spectrum CSV,
          labelled peaks JSON
qm        grid-propagation reference -> same artifact set
spectrum  transform an existing correlation CSV -> spectrum CSV + peaks JSON
compare   run all three routes and emit a side-by-side report JSON

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 I/O error.  Every output file embeds the fully resolved configuration,
and a fixed seed reproduces output files byte for byte.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .dynamics import IntegratorConfig
from .hk import (
    BranchAmbiguityError,
    CorrelationSeries,
    GaussianState,
    HKConfig,
    autocorrelation,
    read_correlation_csv,
    standard_packet,
    write_correlation_csv,
)
from .model import DotParameters, SingularOriginError
from .qmref import (
    BoundaryLeakError,
    DomainTooSmallError,
    GridSpec,
    NormDriftError,
    quantum_autocorrelation,
)
from .spectral import (
    find_peaks,
    label_peaks,
    peaks_to_json,
    spectrum,
    write_spectrum_csv,
)
from .wkb import BelowBarrierError, wkb_table, write_wkb_csv

__all__ = ["main", "run", "ConfigError"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

MODES = ("wkb", "hk", "qm", "spectrum", "compare")

_REQUIRED_SECTIONS = {
    "wkb": ("params", "wkb"),
    "hk": ("params", "hk", "spectral"),
    "qm": ("params", "grid", "spectral"),
    "spectrum": ("input", "spectral"),
    "compare": ("params", "hk", "grid", "spectral", "wkb"),
}

_NUMERICAL_ERRORS = (
    BranchAmbiguityError,
    NormDriftError,
    BoundaryLeakError,
    DomainTooSmallError,
    BelowBarrierError,
    SingularOriginError,
)


class ConfigError(ValueError):
    pass


def _resolve(config: dict, mode: str | None, seed: int | None,
             threads: int | None) -> dict:
    cfg = json.loads(json.dumps(config))  # deep copy, JSON-clean
    if mode is not None:
        cfg["mode"] = mode
    if seed is not None:
        cfg["seed"] = seed
    if threads is not None:
        cfg["threads"] = threads
    elif "threads" not in cfg and os.environ.get("DOTSPEC_THREADS"):
        cfg["threads"] = int(os.environ["DOTSPEC_THREADS"])
    cfg.setdefault("seed", 0)
    return cfg


def _validate(cfg: dict) -> None:
    problems = []
    mode = cfg.get("mode")
    if mode not in MODES:
        problems.append(f"mode must be one of {MODES}, got {mode!r}")
    if "output_dir" not in cfg:
        problems.append("missing output_dir")
    if mode in _REQUIRED_SECTIONS:
        for section in _REQUIRED_SECTIONS[mode]:
            if section not in cfg:
                problems.append(f"mode {mode!r} requires section {section!r}")
    if problems:
        raise ConfigError("; ".join(problems))


def _params(cfg: dict) -> DotParameters:
    p = cfg.get("params", {})
    try:
        return DotParameters(
            mu=float(p.get("mu", 1.0)),
            omega0=float(p.get("omega0", 1.0)),
            omegaL=float(p.get("omegaL", 1.0)),
            kappa=float(p.get("kappa", 1.0)),
            hbar=float(p.get("hbar", 1.0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad params section: {exc}") from exc


def _packet(cfg: dict) -> GaussianState:
    sec = cfg.get("packet")
    if sec is None:
        return standard_packet()
    try:
        return GaussianState(
            q_center=sec.get("q_center", [1.0, 0.0]),
            p_center=sec.get("p_center", [0.0, -1.0]),
            gamma=sec.get("gamma", 0.5),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad packet section: {exc}") from exc


def _steps(t_max: float, dt: float, stride: int) -> int:
    chunks = max(1, round(t_max / (dt * stride)))
    return chunks * stride


def _hk_config(cfg: dict) -> HKConfig:
    sec = cfg["hk"]
    try:
        dt = float(sec.get("dt", 2e-3))
        stride = int(sec.get("record_stride", 5))
        integ = IntegratorConfig(
            dt=dt,
            n_steps=_steps(float(sec.get("t_max", 150.0)), dt, stride),
            energy_tol=float(sec.get("energy_tol", 1e-4)),
            origin_floor=float(sec.get("origin_floor", 1e-12)),
        )
        return HKConfig(
            n_trajectories=int(sec.get("n_trajectories", 100_000)),
            seed=int(cfg.get("seed", 0)),
            record_stride=stride,
            integrator=integ,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad hk section: {exc}") from exc


def _grid(cfg: dict) -> GridSpec:
    sec = cfg["grid"]
    try:
        return GridSpec(
            extent=float(sec.get("extent", 8.0)),
            n=int(sec.get("n", 256)),
            dt=float(sec.get("dt", 2e-3)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad grid section: {exc}") from exc


def _spectral_opts(cfg: dict) -> dict:
    sec = cfg.get("spectral", {})
    return {
        "window": sec.get("window", "hann"),
        "threshold": float(sec.get("threshold", 0.05)),
        "pad_factor": int(sec.get("pad_factor", 4)),
    }


def _label_table(cfg: dict, params: DotParameters):
    sec = cfg.get("wkb", {})
    n_r_values = sec.get("n_r_values", [0, 1, 2])
    m_values = sec.get("m_values", list(range(-2, 5)))
    return wkb_table(params, n_r_values, m_values)


def _spectrum_artifacts(series: CorrelationSeries, cfg: dict,
                        params: DotParameters, prefix: str, outputs: dict):
    opts = _spectral_opts(cfg)
    spec = spectrum(series, window=opts["window"], pad_factor=opts["pad_factor"],
                    hbar=params.hbar)
    peaks = label_peaks(find_peaks(spec, threshold=opts["threshold"]),
                        _label_table(cfg, params))
    spec.peaks = peaks
    outputs[f"{prefix}_spectrum.csv"] = ("spectrum", spec)
    outputs[f"{prefix}_peaks.json"] = ("json", {"peaks": peaks_to_json(peaks)})
    return spec


def _run_hk(cfg: dict, outputs: dict):
    params = _params(cfg)
    packet = _packet(cfg)
    hk_cfg = _hk_config(cfg)
    series = autocorrelation(packet, params, hk_cfg, threads=cfg.get("threads"))
    outputs["hk_correlation.csv"] = ("correlation", series)
    return _spectrum_artifacts(series, cfg, params, "hk", outputs), series


def _run_qm(cfg: dict, outputs: dict):
    params = _params(cfg)
    packet = _packet(cfg)
    grid = _grid(cfg)
    sec = cfg["grid"]
    stride = int(sec.get("record_stride", 5))
    n_steps = _steps(float(sec.get("t_max", 200.0)), grid.dt, stride)
    series = quantum_autocorrelation(packet, params, grid, n_steps,
                                     record_stride=stride,
                                     workers=cfg.get("threads"))
    outputs["qm_correlation.csv"] = ("correlation", series)
    return _spectrum_artifacts(series, cfg, params, "qm", outputs), series


def _nearest_peak(peaks, energy: float):
    if not peaks:
        return None
    return min(peaks, key=lambda p: abs(p.energy - energy))


def _run_compare(cfg: dict, outputs: dict):
    params = _params(cfg)
    sec = cfg["wkb"]
    n_r_values = sec.get("n_r_values", [0])
    m_values = sec.get("m_values", [0, 1, 2])
    levels = wkb_table(params, n_r_values, m_values)
    outputs["wkb_levels.csv"] = ("wkb", levels)

    hk_spec, _ = _run_hk(cfg, outputs)
    qm_spec, _ = _run_qm(cfg, outputs)

    rows = []
    for lvl in levels:
        ivr = _nearest_peak(hk_spec.peaks, lvl.energy)
        qm = _nearest_peak(qm_spec.peaks, lvl.energy)
        row = {
            "n_r": lvl.n_r,
            "m": lvl.m,
            "wkb": lvl.energy,
            "ivr": None if ivr is None else ivr.energy,
            "qm": None if qm is None else qm.energy,
        }
        if ivr is not None:
            row["ivr_minus_wkb"] = ivr.energy - lvl.energy
        if qm is not None:
            row["qm_minus_wkb"] = qm.energy - lvl.energy
        if ivr is not None and qm is not None and qm.energy != 0:
            row["ivr_qm_relative"] = abs(ivr.energy - qm.energy) / abs(qm.energy)
        rows.append(row)
    outputs["compare_report.json"] = ("json", {"rows": rows})


def _run_spectrum_mode(cfg: dict, outputs: dict):
    path = cfg["input"].get("correlation_csv")
    if not path:
        raise ConfigError("spectrum mode requires input.correlation_csv")
    series = read_correlation_csv(path)
    params = _params(cfg) if "params" in cfg else DotParameters()
    opts = _spectral_opts(cfg)
    spec = spectrum(series, window=opts["window"], pad_factor=opts["pad_factor"],
                    hbar=params.hbar)
    peaks = find_peaks(spec, threshold=opts["threshold"])
    if "params" in cfg:
        peaks = label_peaks(peaks, _label_table(cfg, params))
    spec.peaks = peaks
    outputs["spectrum.csv"] = ("spectrum", spec)
    outputs["peaks.json"] = ("json", {"peaks": peaks_to_json(peaks)})


def _write_outputs(outputs: dict, out_dir: Path, resolved: dict):
    out_dir.mkdir(parents=True, exist_ok=True)
    header = {"config": json.dumps(resolved, sort_keys=True)}
    for name, (kind, payload) in outputs.items():
        path = out_dir / name
        if kind == "correlation":
            write_correlation_csv(path, payload, header=header)
        elif kind == "spectrum":
            write_spectrum_csv(path, payload, header=header)
        elif kind == "wkb":
            write_wkb_csv(path, payload, header=header)
        elif kind == "json":
            doc = {"config": resolved, **payload}
            with open(path, "w") as fh:
                json.dump(doc, fh, indent=2, sort_keys=True)
                fh.write("\n")


def run(config_file, mode: str | None = None, seed: int | None = None,
        threads: int | None = None) -> int:
    """Execute one configured run; returns the process exit code."""
    try:
        with open(config_file) as fh:
            raw = json.load(fh)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"error: config is not valid JSON: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        cfg = _resolve(raw, mode, seed, threads)
        _validate(cfg)
        outputs: dict = {}
        run_mode = cfg["mode"]
        if run_mode == "wkb":
            params = _params(cfg)
            sec = cfg["wkb"]
            levels = wkb_table(params, sec.get("n_r_values", [0, 1]),
                               sec.get("m_values", [0, 1, 2]))
            outputs["wkb_levels.csv"] = ("wkb", levels)
        elif run_mode == "hk":
            _run_hk(cfg, outputs)
        elif run_mode == "qm":
            _run_qm(cfg, outputs)
        elif run_mode == "spectrum":
            _run_spectrum_mode(cfg, outputs)
        elif run_mode == "compare":
            _run_compare(cfg, outputs)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except RuntimeError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    try:
        _write_outputs(outputs, Path(cfg["output_dir"]), cfg)
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dotspec",
        description="Spectra of two interacting electrons in a 2D quantum dot "
                    "with a magnetic field",
    )
    parser.add_argument("--config", required=True, help="JSON configuration file")
    parser.add_argument("--mode", choices=MODES, help="override the config mode")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--threads", type=int,
                        help="worker threads (default: DOTSPEC_THREADS or 1)")
    args = parser.parse_args(argv)
    return run(args.config, mode=args.mode, seed=args.seed, threads=args.threads)


if __name__ == "__main__":
    sys.exit(main())
