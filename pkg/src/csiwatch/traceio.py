"""Trace, label, event, and report file formats.

Traces are line-delimited text: a JSON header line, then one record per
packet holding the timestamp followed by the interleaved re/im CSI values
(row-major antenna-then-subcarrier). Floats are written with shortest
round-trip precision, so write-then-read reproduces the in-memory arrays
bit for bit. A ``.gz`` extension transparently gzip-compresses.

Ground-truth labels live in a CSV sidecar (start_s, end_s, class,
person_id); detector output in an events CSV; reports as JSON.
"""

from __future__ import annotations

import gzip
import hashlib
import json

import numpy as np

from .csi_sim import CsiTrace, EventKind, LabelInterval
from .detector import DetectedEvent, EventClass

__all__ = [
    "TRACE_FORMAT_VERSION",
    "write_trace",
    "read_trace",
    "write_labels",
    "read_labels",
    "write_events_csv",
    "read_events_csv",
    "write_report",
    "file_sha256",
]

TRACE_FORMAT_VERSION = 1


def _open(path, mode: str):
    if str(path).endswith(".gz"):
        return gzip.open(path, mode + "t", encoding="utf-8")
    return open(path, mode, encoding="utf-8")


def write_trace(trace: CsiTrace, path) -> None:
    """Write a trace file (header line + one record line per packet)."""
    header = {
        "version": TRACE_FORMAT_VERSION,
        "sample_rate_hz": trace.sample_rate_hz,
        "n_rx": trace.n_rx,
        "n_sc": trace.n_sc,
        "n_records": trace.n_samples,
        "dtype": str(trace.csi.dtype),
        "geometry": {
            "wavelength_m": trace.geometry.wavelength_m,
            "psi": trace.geometry.psi,
            "phi_rad": trace.geometry.phi_rad,
        },
    }
    flat = trace.csi.reshape(trace.n_rx * trace.n_sc, trace.n_samples)
    with _open(path, "w") as f:
        f.write(json.dumps(header) + "\n")
        for k in range(trace.n_samples):
            parts = [repr(float(trace.timestamps_s[k]))]
            col = flat[:, k]
            for v in col:
                parts.append(repr(float(v.real)))
                parts.append(repr(float(v.imag)))
            f.write(" ".join(parts) + "\n")


def read_trace(path) -> CsiTrace:
    """Read a trace file back into a CsiTrace.

    The file format does not carry per-stream path parameters or the
    outlier log; those fields come back empty.
    """
    from .signal_model import SceneGeometry

    with _open(path, "r") as f:
        header = json.loads(f.readline())
        if header.get("version") != TRACE_FORMAT_VERSION:
            raise ValueError(f"unsupported trace format version {header.get('version')}")
        n_rx, n_sc = header["n_rx"], header["n_sc"]
        n = header["n_records"]
        dtype = np.dtype(header["dtype"])
        timestamps = np.empty(n, dtype=np.float64)
        flat = np.empty((n_rx * n_sc, n), dtype=dtype)
        rows = 0
        for k, line in enumerate(f):
            vals = line.split()
            if len(vals) != 1 + 2 * n_rx * n_sc:
                raise ValueError(f"{path}: malformed record on line {k + 2}")
            timestamps[k] = float(vals[0])
            re = np.array(vals[1::2], dtype=np.float64)
            im = np.array(vals[2::2], dtype=np.float64)
            flat[:, k] = (re + 1j * im).astype(dtype)
            rows += 1
        if rows != n:
            raise ValueError(
                f"{path}: header announces {n} records but file holds {rows}"
            )
    g = header["geometry"]
    geometry = SceneGeometry(
        wavelength_m=g["wavelength_m"], psi=g["psi"], phi_rad=g.get("phi_rad")
    )
    return CsiTrace(
        sample_rate_hz=header["sample_rate_hz"],
        n_rx=n_rx,
        n_sc=n_sc,
        csi=flat.reshape(n_rx, n_sc, n),
        timestamps_s=timestamps,
        labels=np.zeros(n, dtype=np.int8),
        events=(),
        geometry=geometry,
        alpha_d=np.ones((n_rx, n_sc)),
        mu_d=np.zeros((n_rx, n_sc)),
        alpha_r=np.zeros((n_rx, n_sc)),
        mu_r=np.zeros((n_rx, n_sc)),
    )


def write_labels(events, path) -> None:
    with _open(path, "w") as f:
        f.write("start_s,end_s,class,person_id\n")
        for ev in events:
            f.write(
                f"{float(ev.start_s)!r},{float(ev.end_s)!r},"
                f"{ev.kind.value},{ev.person_id}\n"
            )


def read_labels(path) -> list[LabelInterval]:
    labels = []
    with _open(path, "r") as f:
        header = f.readline().strip()
        if header != "start_s,end_s,class,person_id":
            raise ValueError(f"{path}: unexpected label header {header!r}")
        for line in f:
            line = line.strip()
            if not line:
                continue
            start, end, kind, person = line.split(",")
            labels.append(
                LabelInterval(float(start), float(end), EventKind(kind), int(person))
            )
    return labels


def write_events_csv(events: list[DetectedEvent], path) -> None:
    with _open(path, "w") as f:
        f.write("start_s,end_s,class,b_pe_hz,decision_time_s\n")
        for ev in events:
            b = "" if ev.b_pe_hz is None else repr(float(ev.b_pe_hz))
            d = "" if ev.decision_time_s is None else repr(float(ev.decision_time_s))
            f.write(
                f"{float(ev.start_s)!r},{float(ev.end_s)!r},"
                f"{ev.event_class.value},{b},{d}\n"
            )


def read_events_csv(path) -> list[DetectedEvent]:
    events = []
    with _open(path, "r") as f:
        header = f.readline().strip()
        if header != "start_s,end_s,class,b_pe_hz,decision_time_s":
            raise ValueError(f"{path}: unexpected events header {header!r}")
        for line in f:
            line = line.strip()
            if not line:
                continue
            start, end, cls, b, d = line.split(",")
            events.append(
                DetectedEvent(
                    start_s=float(start),
                    end_s=float(end),
                    event_class=EventClass(cls),
                    b_pe_hz=float(b) if b else None,
                    decision_time_s=float(d) if d else None,
                )
            )
    return events


def write_report(report, path) -> None:
    with _open(path, "w") as f:
        json.dump(report.to_dict(), f, indent=2)
        f.write("\n")


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
