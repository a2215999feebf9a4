"""Command-line front end: reproducible simulate / detect / vitals runs.

Every command reads one JSON config, derives all randomness from a
single ``--seed`` through named sub-seeds, and writes its outputs into
``--out`` atomically. A ``run.json`` manifest captures the resolved
config (plus its SHA-256) and the seed, so any output can be reproduced
byte for byte from the manifest alone. Commands compose on one run
directory: simulate -> detect -> vitals -> classify.

Exit codes: 0 success, 2 bad arguments or config validation, 3 file IO
or grid decode failures, 4 no usable signal in the vitals bands.
"""

from __future__ import annotations

import argparse
import glob
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__
from .channel import (
    ChannelConfig,
    channel_config_from_dict,
    channel_config_to_dict,
    simulate_dwells,
)
from .classify import (
    ClassifierParams,
    Label,
    classify_sp,
    evaluate,
    generate_dataset,
    load_dataset,
    save_dataset,
)
from .errors import (
    DimensionMismatchError,
    DomainMismatchError,
    GridFileError,
    InsufficientDataError,
    JrcError,
    NoSignalError,
    ValidationError,
)
from .faor import (
    DetectorParams,
    cancel_self_interference,
    compute_rdm,
    extract_peaks,
    spectral_product,
)
from .grid import FrameConfig, SymbolAlphabet, generate_frame
from .gridfile import read_grid, write_grid
from .vitals import (
    BREATH_BAND,
    HEART_BAND,
    BandSpec,
    band_spectrum,
    estimate_vitals,
    extract_phase_trace,
    trace_from_csv,
    trace_to_csv,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_NO_SIGNAL = 4

_SUB_SEED_ORDER = {"frame": 0, "channel": 1, "noise": 2, "dataset": 3}

DEFAULT_CONFIG = {
    "frame": {"m_bins": 64, "n_bins": 16, "scs_hz": 30e3, "fc_hz": 29e9},
    "alphabet": "qpsk",
    "num_dwells": 64,
    "channel": {
        "targets": [
            {
                "gain_re": 1.0,
                "gain_im": 0.0,
                "delay_bins": 10,
                "doppler_bins": 0,
                "is_self_interference": False,
                "vitals": {
                    "base_range_m": 1.2,
                    "breath_rate_hz": 0.25,
                    "breath_amp_m": 0.005,
                    "heart_rate_hz": 1.2,
                    "heart_amp_m": 0.0003,
                    "breath_phase_rad": 0.0,
                    "heart_phase_rad": 0.0,
                },
            }
        ],
        "noise_power": 0.01,
        "dwell_interval_s": 0.06,
    },
    "detector": {
        "cancel_si": True,
        "max_targets": 5,
        "threshold_factor": 8.0,
        "guard_cells": [2, 2],
    },
    "vitals": {
        "fft_size": 2048,
        "track_bin": [10, 0],
        "gate": False,
        "breath_band": [0.1, 0.7],
        "heart_band": [0.8, 2.5],
    },
    "classifier": {"periodicity_threshold": 0.25, "min_trace_len": 32},
    "dataset": {
        "n_human": 50,
        "n_nonhuman": 50,
        "trace_len": 512,
        "snr_db_range": [0.0, 20.0],
    },
}


def sub_seed(seed: int, name: str) -> int:
    """Derive the named sub-seed (frame, channel, noise, dataset)."""
    ss = np.random.SeedSequence((seed, _SUB_SEED_ORDER[name]))
    return int(ss.generate_state(1, np.uint64)[0])


def _merged(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merged(out[key], value)
        else:
            out[key] = value
    return out


def load_config(path) -> dict:
    """Read a config file and fill unset sections with desk defaults."""
    if path is None:
        return json.loads(json.dumps(DEFAULT_CONFIG))
    with open(path) as fh:
        try:
            user = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(user, dict):
        raise ValidationError(f"{path}: config must be a JSON object")
    return _merged(DEFAULT_CONFIG, user)


def config_sha256(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _frame_config(config: dict) -> FrameConfig:
    f = config["frame"]
    try:
        return FrameConfig(
            m_bins=int(f["m_bins"]),
            n_bins=int(f["n_bins"]),
            scs_hz=float(f["scs_hz"]),
            fc_hz=float(f["fc_hz"]),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed frame config: {exc}") from exc


def _alphabet(config: dict) -> SymbolAlphabet:
    name = config.get("alphabet", "qpsk")
    if name == "qpsk":
        return SymbolAlphabet.qpsk()
    if name == "unit_impulse":
        return SymbolAlphabet.unit_impulse()
    raise ValidationError(f"unknown alphabet {name!r} (expected qpsk or unit_impulse)")


def _channel_config(config: dict, seed: int) -> ChannelConfig:
    data = dict(config["channel"])
    data["seed"] = sub_seed(seed, "channel")
    return channel_config_from_dict(data)


def _detector_params(config: dict, no_cancel: bool = False) -> DetectorParams:
    d = config["detector"]
    return DetectorParams(
        cancel_si=False if no_cancel else bool(d["cancel_si"]),
        max_targets=int(d["max_targets"]),
        threshold_factor=float(d["threshold_factor"]),
        guard_cells=tuple(d["guard_cells"]),
    )


def _classifier_params(config: dict) -> ClassifierParams:
    c = config["classifier"]
    return ClassifierParams(
        periodicity_threshold=float(c["periodicity_threshold"]),
        min_trace_len=int(c["min_trace_len"]),
    )


def _vitals_bands(config: dict):
    v = config["vitals"]
    breath = BandSpec(*[float(x) for x in v.get("breath_band", [0.1, 0.7])])
    heart = BandSpec(*[float(x) for x in v.get("heart_band", [0.8, 2.5])])
    return breath, heart


def write_json(path, payload) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def write_csv(path, header: str, lines) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for line in lines:
            fh.write(line + "\n")
    os.replace(tmp, path)


def _write_run_manifest(out_dir, command: str, config: dict, seed: int, outputs) -> None:
    manifest = {
        "command": command,
        "config": config,
        "config_sha256": config_sha256(config),
        "outputs": sorted(outputs),
        "package_version": __version__,
        "seed": seed,
        "sub_seeds": {name: sub_seed(seed, name) for name in _SUB_SEED_ORDER},
    }
    write_json(os.path.join(out_dir, "run.json"), manifest)


def _read_run_manifest(out_dir) -> dict:
    path = os.path.join(out_dir, "run.json")
    with open(path) as fh:
        return json.load(fh)


def cmd_simulate(args) -> int:
    config = load_config(args.config)
    frame = _frame_config(config)
    channel = _channel_config(config, args.seed)
    num_dwells = int(config["num_dwells"])
    os.makedirs(args.out, exist_ok=True)
    x = generate_frame(frame, _alphabet(config), sub_seed(args.seed, "frame"))
    outputs = ["x.grid"]
    write_grid(os.path.join(args.out, "x.grid"), x)
    for i, y in enumerate(simulate_dwells(x, channel, num_dwells)):
        name = f"y_dwell_{i:04d}.grid"
        write_grid(os.path.join(args.out, name), y)
        outputs.append(name)
    _write_run_manifest(args.out, "simulate", config, args.seed, outputs)
    print(f"wrote {len(outputs)} grids to {args.out}")
    return EXIT_OK


def _detection_record(det) -> dict:
    return {
        "delay_bin": det.delay_bin,
        "doppler_bin_signed": det.doppler_bin_signed,
        "range_m": det.range_m,
        "speed_mps": det.speed_mps,
        "magnitude": det.magnitude,
        "peak_re": float(np.real(det.peak_value)),
        "peak_im": float(np.imag(det.peak_value)),
    }


def cmd_detect(args) -> int:
    x_path = args.x or os.path.join(args.out, "x.grid")
    y_path = args.y or os.path.join(args.out, "y_dwell_0000.grid")
    if args.config is not None:
        config = load_config(args.config)
    else:
        try:
            config = _merged(DEFAULT_CONFIG, _read_run_manifest(args.out)["config"])
        except FileNotFoundError:
            config = load_config(None)
    params = _detector_params(config, no_cancel=args.no_cancel)
    x = read_grid(x_path)
    y = read_grid(y_path)
    sp = spectral_product(y, x)
    if params.cancel_si:
        sp = cancel_self_interference(sp)
    rdm = compute_rdm(sp)
    detections = extract_peaks(rdm, params)
    os.makedirs(args.out, exist_ok=True)
    write_json(
        os.path.join(args.out, "detections.json"),
        [_detection_record(d) for d in detections],
    )
    lines = []
    for m in range(rdm.config.m_bins):
        for n in range(rdm.config.n_bins):
            value = rdm.r[m, n]
            lines.append(
                f"{m},{n},{float(value.real)!r},{float(value.imag)!r},{float(abs(value))!r}"
            )
    write_csv(os.path.join(args.out, "rdm.csv"), "m,n,re,im,mag", lines)
    print(f"{len(detections)} detections -> {os.path.join(args.out, 'detections.json')}")
    return EXIT_OK


def _dwell_paths(out_dir):
    paths = sorted(glob.glob(os.path.join(out_dir, "y_dwell_*.grid")))
    if not paths:
        raise GridFileError(f"{out_dir}: no y_dwell_*.grid files found")
    return paths


def cmd_vitals(args) -> int:
    manifest = _read_run_manifest(args.out)
    config = _merged(DEFAULT_CONFIG, manifest["config"])
    if args.config is not None:
        config = _merged(config, load_config(args.config))
    vcfg = config["vitals"]
    dwell_interval_s = float(config["channel"]["dwell_interval_s"])
    fft_size = int(vcfg["fft_size"])
    track_bin = vcfg.get("track_bin")
    if track_bin is not None:
        track_bin = (int(track_bin[0]), int(track_bin[1]))
    params = _detector_params(config)
    x = read_grid(os.path.join(args.out, "x.grid"))
    rdms = []
    for path in _dwell_paths(args.out):
        sp = spectral_product(read_grid(path), x)
        if params.cancel_si:
            sp = cancel_self_interference(sp)
        rdms.append(compute_rdm(sp))
    trace = extract_phase_trace(
        rdms,
        track_bin=track_bin,
        dwell_interval_s=dwell_interval_s,
        gate=bool(vcfg.get("gate", False)),
    )
    trace_to_csv(trace, os.path.join(args.out, "phase_trace.csv"))
    breath_band, heart_band = _vitals_bands(config)
    estimate = estimate_vitals(
        trace, breath_band=breath_band, heart_band=heart_band, fft_size=fft_size
    )
    write_json(
        os.path.join(args.out, "vitals.json"),
        {
            "f_br_hz": estimate.breath_rate_hz,
            "f_hb_hz": estimate.heart_rate_hz,
            "br_confidence": estimate.breath_confidence,
            "hb_confidence": estimate.heart_confidence,
            "fft_size": estimate.fft_size,
            "dwell_interval_s": estimate.dwell_interval_s,
        },
    )
    freqs, br_mags = band_spectrum(trace, breath_band, fft_size)
    _, hb_mags = band_spectrum(trace, heart_band, fft_size)
    lines = [
        f"{float(f)!r},{float(b)!r},{float(h)!r}"
        for f, b, h in zip(freqs, br_mags, hb_mags)
    ]
    write_csv(os.path.join(args.out, "spectrum.csv"), "freq_hz,br_mag,hb_mag", lines)
    print(
        f"f_br={estimate.breath_rate_hz:.4f}Hz f_hb={estimate.heart_rate_hz:.4f}Hz "
        f"-> {os.path.join(args.out, 'vitals.json')}"
    )
    return EXIT_OK


def cmd_dataset(args) -> int:
    config = load_config(args.config)
    dcfg = config["dataset"]
    template = _channel_config(config, args.seed)
    dataset = generate_dataset(
        int(dcfg["n_human"]),
        int(dcfg["n_nonhuman"]),
        template,
        sub_seed(args.seed, "dataset"),
        frame=_frame_config(config),
        trace_len=int(dcfg["trace_len"]),
        snr_db_range=tuple(float(x) for x in dcfg["snr_db_range"]),
    )
    save_dataset(args.out, dataset)
    outputs = ["manifest.json"] + [f"trace_{i:05d}.csv" for i in range(len(dataset))]
    _write_run_manifest(args.out, "dataset", config, args.seed, outputs)
    print(f"{len(dataset)} traces -> {args.out}")
    return EXIT_OK


def _confusion_payload(counts) -> dict:
    return {
        "counts": {"tp": counts.tp, "fp": counts.fp, "tn": counts.tn, "fn": counts.fn},
        "human": {"total": counts.tp + counts.fn, "correct": counts.tp},
        "non_human": {"total": counts.tn + counts.fp, "correct": counts.tn},
        "human_recall": counts.human_recall,
        "non_human_specificity": counts.non_human_specificity,
    }


def cmd_classify(args) -> int:
    config = load_config(args.config)
    params = _classifier_params(config)
    os.makedirs(args.out, exist_ok=True)
    if args.data is not None:
        dataset = load_dataset(args.data)
        verdicts = []
        for i, item in enumerate(dataset):
            verdict = classify_sp(item.trace, params)
            verdicts.append(
                {
                    "file": f"trace_{i:05d}.csv",
                    "label_true": item.label.value,
                    "label_pred": verdict.label.value,
                    "score": verdict.score,
                    "scenario": item.scenario,
                }
            )
        write_json(os.path.join(args.out, "verdicts.json"), verdicts)
        counts = evaluate(dataset, params)
        write_json(os.path.join(args.out, "confusion.json"), _confusion_payload(counts))
        print(
            f"recall={counts.human_recall:.4f} "
            f"specificity={counts.non_human_specificity:.4f} over {counts.total} traces"
        )
        return EXIT_OK
    # No dataset: classify the phase trace already extracted in the run dir.
    manifest = _read_run_manifest(args.out)
    dwell_interval_s = float(manifest["config"]["channel"]["dwell_interval_s"])
    trace = trace_from_csv(os.path.join(args.out, "phase_trace.csv"), dwell_interval_s)
    verdict = classify_sp(trace, params)
    write_json(
        os.path.join(args.out, "verdicts.json"),
        [{"file": "phase_trace.csv", "label_pred": verdict.label.value, "score": verdict.score}],
    )
    print(f"{verdict.label.value} score={verdict.score:.4f}")
    return EXIT_OK


def cmd_e2e(args) -> int:
    code = cmd_simulate(args)
    if code != EXIT_OK:
        return code
    detect_args = argparse.Namespace(
        config=args.config, seed=args.seed, out=args.out, x=None, y=None, no_cancel=False
    )
    code = cmd_detect(detect_args)
    if code != EXIT_OK:
        return code
    vitals_args = argparse.Namespace(config=args.config, seed=args.seed, out=args.out)
    code = cmd_vitals(vitals_args)
    if code != EXIT_OK:
        return code
    classify_args = argparse.Namespace(
        config=args.config, seed=args.seed, out=args.out, data=None
    )
    return cmd_classify(classify_args)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON experiment config")
    common.add_argument("--seed", type=int, default=0, metavar="N", help="master seed")
    common.add_argument(
        "--out", default="run", metavar="DIR", help="run directory (default: run)"
    )
    parser = argparse.ArgumentParser(
        prog="otfs-jrc",
        description="OTFS joint radar-communication simulation pipeline",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="write x.grid and dwell grids")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("detect", parents=[common], help="range/speed detection on a dwell")
    p.add_argument("--x", metavar="PATH", help="transmit grid (default: OUT/x.grid)")
    p.add_argument("--y", metavar="PATH", help="received grid (default: OUT/y_dwell_0000.grid)")
    p.add_argument(
        "--no-cancel",
        action="store_true",
        help="skip self-interference cancellation",
    )
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("vitals", parents=[common], help="breathing/heartbeat from a run dir")
    p.set_defaults(func=cmd_vitals)

    p = sub.add_parser("dataset", parents=[common], help="generate a labelled trace corpus")
    p.set_defaults(func=cmd_dataset)

    p = sub.add_parser("classify", parents=[common], help="human / non-human verdicts")
    p.add_argument("--data", metavar="DIR", help="dataset directory (default: run trace)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("e2e", parents=[common], help="simulate + detect + vitals + classify")
    p.set_defaults(func=cmd_e2e)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NoSignalError as exc:
        print(json.dumps({"error": "no_signal", "detail": str(exc)}))
        return EXIT_NO_SIGNAL
    except (GridFileError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (
        ValidationError,
        DomainMismatchError,
        DimensionMismatchError,
        InsufficientDataError,
        JrcError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
