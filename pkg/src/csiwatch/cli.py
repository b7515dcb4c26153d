"""Command-line entry points: simulate, detect, sweep, oracle.

Exit codes: 0 on success, 2 on input errors (bad config, malformed files,
invalid calibration placement), 3 on internal invariant violations.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import harness, traceio
from .config import PipelineConfig
from .detector import EventClass
from .metrics import combine_reports, compute_report
from .signal_model import SceneGeometry
from .spectral_oracle import (
    MotionClassParams,
    bessel_line_spectrum,
    carson_bandwidth,
    class_bandwidth_bound,
    derive_f_th,
)

TRACE_SUFFIXES = (".csitrace", ".csitrace.gz")


class InputError(Exception):
    pass


def _load_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError as e:
        raise InputError(f"config file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: invalid JSON ({e})") from e


def _trace_stem(trace_path: Path) -> str:
    name = trace_path.name
    for suffix in TRACE_SUFFIXES:
        if name.endswith(suffix):
            return name[: -len(suffix)]
    return name


def _labels_path_for(trace_path: Path) -> Path:
    return trace_path.with_name(_trace_stem(trace_path) + ".labels.csv")


def cmd_simulate(args) -> int:
    cfg = _load_json(args.config)
    if args.seed is not None:
        cfg["seed"] = args.seed
    try:
        trace = harness.simulate_from_config(cfg)
    except ValueError as e:
        raise InputError(f"invalid scenario: {e}") from e
    out = Path(args.out)
    traceio.write_trace(trace, out)
    labels_path = Path(args.labels) if args.labels else _labels_path_for(out)
    traceio.write_labels(trace.events, labels_path)
    f_th = derive_f_th(trace.geometry)
    n_sz = sum(1 for ev in trace.events if ev.is_seizure)
    print(f"trace written to {out} ({trace.duration_s:.1f} s at "
          f"{trace.sample_rate_hz:g} Hz, {trace.n_rx}x{trace.n_sc} streams)")
    print(f"labels written to {labels_path} "
          f"({len(trace.events)} events: {n_sz} seizure, {len(trace.events) - n_sz} normal)")
    print(f"psi = {trace.geometry.psi:g}, derived f_th = {f_th:.2f} Hz")
    return 0


def _pipeline_config(args) -> PipelineConfig:
    overrides = {}
    if args.config:
        file_cfg = _load_json(args.config)
        overrides.update(file_cfg.get("pipeline", file_cfg))
    if getattr(args, "f_th", None) is not None:
        overrides["f_th_hz"] = args.f_th
    if getattr(args, "t_min", None) is not None:
        overrides["t_min_s"] = args.t_min
    try:
        return PipelineConfig(**overrides)
    except (TypeError, ValueError) as e:
        raise InputError(f"bad pipeline config: {e}") from e


def _check_calibration_clear(labels, cal_start: float, cal_end: float):
    for label in labels:
        if min(label.end_s, cal_end) - max(label.start_s, cal_start) > 0:
            raise InputError(
                f"calibration window [{cal_start:.1f}, {cal_end:.1f}] s overlaps a "
                f"labeled {label.kind.value} event at {label.start_s:.1f} s; "
                "calibration must contain breathing only"
            )


def cmd_detect(args) -> int:
    trace_path = Path(args.trace)
    if not trace_path.exists():
        raise InputError(f"trace file not found: {trace_path}")
    trace = traceio.read_trace(trace_path)
    labels_path = Path(args.labels) if args.labels else _labels_path_for(trace_path)
    labels = traceio.read_labels(labels_path) if labels_path.exists() else []

    config = _pipeline_config(args)
    cal_start = args.cal_start
    cal_len = args.cal_len if args.cal_len is not None else config.t_cal_s
    config = config.with_overrides(t_cal_s=cal_len)
    _check_calibration_clear(labels, cal_start, cal_start + cal_len)

    try:
        result = harness.run_pipeline(trace, config, cal_start_s=cal_start)
    except ValueError as e:
        raise InputError(str(e)) from e

    report = compute_report(
        result.events,
        labels,
        config_snapshot=harness.config_snapshot(config, result.f_th_hz),
        trace_checksum=traceio.file_sha256(trace_path),
    )
    events_out = Path(args.events_out) if args.events_out else trace_path.with_name(
        _trace_stem(trace_path) + ".events.csv"
    )
    traceio.write_events_csv(result.events, events_out)
    if args.report_out:
        traceio.write_report(report, args.report_out)

    n_sz = sum(1 for e in result.events if e.event_class is EventClass.SEIZURE)
    print(f"f_th = {result.f_th_hz:.2f} Hz, gamma_th = "
          f"{config.q * result.calibration.sigma_c_sq:.3e}")
    print(f"{len(result.events)} events detected ({n_sz} classified seizure); "
          f"events written to {events_out}")
    if report.sdr_pct is not None:
        print(f"SDR = {report.sdr_pct:.2f}%  ({report.n_seizures_detected}/"
              f"{report.n_seizures} seizures)")
    if report.p_fa is not None:
        print(f"P_FA = {report.p_fa:.4f}  ({report.n_false_alarms}/"
              f"{report.n_normals_detected} detected normal events)")
    if report.mrt_s is not None:
        print(f"MRT = {report.mrt_s:.2f} s")
    print(f"processing: {result.processing_per_trace_second * 1e3:.1f} ms "
          f"per trace-second")
    return 0


def _find_traces(trace_dir: Path):
    files = sorted(
        p for p in trace_dir.iterdir()
        if any(p.name.endswith(s) for s in TRACE_SUFFIXES)
    )
    if not files:
        raise InputError(f"no *{TRACE_SUFFIXES[0]} files in {trace_dir}")
    return files


def _parse_grid(text: str) -> np.ndarray:
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError as e:
        raise InputError(f"bad --grid {text!r}; expected start:stop:step") from e
    if step <= 0 or stop < start:
        raise InputError(f"bad --grid {text!r}")
    return np.arange(start, stop + step / 2, step)


def cmd_sweep(args) -> int:
    trace_dir = Path(args.trace_dir)
    if not trace_dir.is_dir():
        raise InputError(f"not a directory: {trace_dir}")
    config = _pipeline_config(args)

    analyses = []
    for path in _find_traces(trace_dir):
        trace = traceio.read_trace(path)
        labels_path = _labels_path_for(path)
        if not labels_path.exists():
            raise InputError(f"missing labels sidecar for {path}")
        labels = traceio.read_labels(labels_path)
        analysis = harness.analyze_trace(trace, config, cal_start_s=args.cal_start)
        analysis.labels = labels
        analyses.append(analysis)

    rows = []
    if args.param in ("f_th", "t_min"):
        if not args.grid:
            raise InputError(f"--grid is required for a {args.param} sweep")
        values = _parse_grid(args.grid)
        rows = harness.sweep_parameter(analyses, args.param, values, config)
        header = f"{args.param},sdr_pct,p_fa,mrt_s"
        lines = [header] + [
            f"{r['value']:g},{_fmt(r['sdr_pct'])},{_fmt(r['p_fa'])},{_fmt(r['mrt_s'])}"
            for r in rows
        ]
    else:  # psi: per-trace f_th derived from each trace's own geometry
        by_psi: dict[float, list] = {}
        for analysis in analyses:
            by_psi.setdefault(analysis.geometry.psi, []).append(analysis)
        lines = ["psi,f_th_hz,sdr_pct,p_fa,mrt_s"]
        for psi in sorted(by_psi):
            group = by_psi[psi]
            f_th = derive_f_th(group[0].geometry)
            combined = combine_reports(
                [harness.report_for(a, f_th, config.t_min_s) for a in group]
            )
            lines.append(
                f"{psi:g},{f_th:.4f},{_fmt(combined.sdr_pct)},"
                f"{_fmt(combined.p_fa)},{_fmt(combined.mrt_s)}"
            )

    out = Path(args.out)
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"sweep written to {out} ({len(lines) - 1} rows)")
    return 0


def _fmt(v) -> str:
    return "" if v is None else f"{v:.6g}"


def cmd_oracle(args) -> int:
    try:
        spectrum = bessel_line_spectrum(
            args.beta_prime, args.f_o, args.delta_mu,
            amplitude=args.amplitude, n_max=args.n_max,
        )
    except ValueError as e:
        raise InputError(str(e)) from e
    print(f"beta' = {args.beta_prime:g}, f_o = {args.f_o:g} Hz, "
          f"delta_mu = {args.delta_mu:g} rad")
    print(f"{'n':>4} {'f (Hz)':>10} {'|amp|':>12} {'re':>12} {'im':>12}")
    for n, (f, a) in enumerate(zip(spectrum.frequencies_hz, spectrum.amplitudes)):
        if abs(a) < 1e-12 * args.amplitude and n > 0:
            continue
        print(f"{n:>4} {f:>10.4f} {abs(a):>12.5g} {a.real:>12.5g} {a.imag:>12.5g}")
    bw = carson_bandwidth(args.beta_prime, args.f_o)
    print(f"bandwidth: {bw:.4f} Hz "
          f"({'(beta+1)*f_o' if args.beta_prime >= 1 else '2*f_o'})")
    if args.psi is not None:
        geometry = SceneGeometry(wavelength_m=args.wavelength, psi=args.psi)
        bw_sz = class_bandwidth_bound(MotionClassParams.seizure_lower_bound(), geometry)
        bw_nm = class_bandwidth_bound(MotionClassParams.normal_upper_bound(), geometry)
        print(f"geometry psi = {args.psi:g}: BW_sz >= {bw_sz:.2f} Hz, "
              f"BW_nm <= {bw_nm:.2f} Hz, f_th = {derive_f_th(geometry):.2f} Hz")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="csiwatch",
        description="WiFi-CSI nocturnal seizure detection: simulator, "
                    "spectral oracle, and detection pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a labeled CSI trace")
    p.add_argument("--config", required=True, help="scenario config JSON")
    p.add_argument("--out", required=True, help="output trace path (.csitrace[.gz])")
    p.add_argument("--labels", help="label sidecar path (default: derived)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("detect", help="run the detection pipeline on a trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--labels", help="label sidecar (default: derived from trace name)")
    p.add_argument("--config", help="pipeline config JSON")
    p.add_argument("--cal-start", type=float, default=0.0)
    p.add_argument("--cal-len", type=float, help="calibration length (default t_cal)")
    p.add_argument("--f-th", type=float, help="override f_th (Hz)")
    p.add_argument("--t-min", type=float, help="override T_min (s)")
    p.add_argument("--events-out", help="events CSV path")
    p.add_argument("--report-out", help="report JSON path")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("sweep", help="metric curves over f_th, t_min, or psi")
    p.add_argument("--trace-dir", required=True)
    p.add_argument("--param", required=True, choices=["f_th", "t_min", "psi"])
    p.add_argument("--grid", help="start:stop:step (f_th and t_min sweeps)")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--config", help="pipeline config JSON")
    p.add_argument("--cal-start", type=float, default=0.0)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="print the analytic line spectrum and bandwidth")
    p.add_argument("--beta-prime", type=float, required=True)
    p.add_argument("--f-o", type=float, required=True)
    p.add_argument("--delta-mu", type=float, default=0.0)
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--n-max", type=int, default=None)
    p.add_argument("--psi", type=float, help="also print class bounds and f_th")
    p.add_argument("--wavelength", type=float, default=SceneGeometry().wavelength_m)
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # internal invariant violation
        print(f"internal error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
