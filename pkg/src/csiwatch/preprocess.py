"""Stage 1 of the pipeline: resampling, outlier removal, stream selection, PCA.

From a raw trace with N_R antennas and N_sc subcarriers the pipeline forms
N_D = (2*N_R - 1)*N_sc real data streams: every antenna/subcarrier squared
magnitude plus every (antenna i, antenna 1) per-subcarrier phase difference.
A breathing-only calibration window ranks the streams by in-band/out-of-band
SNR, keeps the best K, and fixes the detection noise floor sigma_c^2. During
operation the selected streams are denoised to a single series p(t) by
per-block PCA projection onto the first principal component.

Per-stream filtering and SNR are independent per stream; CalibrationState is
immutable once computed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import median_filter

from .config import PipelineConfig
from .csi_sim import CsiTrace

__all__ = [
    "StreamId",
    "StreamSet",
    "CalibrationState",
    "all_stream_ids",
    "resample_uniform",
    "derive_streams",
    "hampel_filter",
    "compute_stream_snr",
    "select_streams",
    "calibrate",
    "pca_first_component",
    "extract_pipeline_stream",
]

MAD_SCALE = 1.4826  # scaled-MAD factor for a normal distribution


@dataclass(frozen=True, order=True)
class StreamId:
    """Identity of one derived data stream.

    kind "mag" is the squared magnitude of antenna ``rx``; kind "pd" is the
    phase difference between antenna ``rx`` and the reference antenna 0.
    Field order gives the deterministic (kind, antenna, subcarrier)
    tie-break ordering.
    """

    kind: str
    rx: int
    sc: int

    def __post_init__(self):
        if self.kind not in ("mag", "pd"):
            raise ValueError(f"unknown stream kind {self.kind!r}")

    def __str__(self):
        return f"{self.kind}:{self.rx}:{self.sc}"

    @classmethod
    def parse(cls, text: str) -> "StreamId":
        kind, rx, sc = text.split(":")
        return cls(kind, int(rx), int(sc))


def all_stream_ids(n_rx: int, n_sc: int) -> list[StreamId]:
    """All N_D = (2*n_rx - 1)*n_sc stream ids in deterministic order."""
    ids = [StreamId("mag", i, j) for i in range(n_rx) for j in range(n_sc)]
    ids += [StreamId("pd", i, j) for i in range(1, n_rx) for j in range(n_sc)]
    return ids


@dataclass(frozen=True)
class StreamSet:
    """A bundle of equal-length real streams on a uniform sample grid."""

    ids: tuple[StreamId, ...]
    data: np.ndarray  # shape (n_streams, n_samples)
    sample_rate_hz: float
    start_s: float = 0.0

    def __post_init__(self):
        if self.data.ndim != 2 or self.data.shape[0] != len(self.ids):
            raise ValueError("data must be (n_streams, n_samples) matching ids")
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("stream ids must be unique")

    @property
    def n_streams(self) -> int:
        return len(self.ids)


def resample_uniform(
    timestamps_s: np.ndarray, values: np.ndarray, grid_s: np.ndarray
) -> np.ndarray:
    """Linear interpolation of (possibly jittered) samples onto a uniform grid.

    Complex values interpolate component-wise. Grid points outside the
    timestamp span clamp to the edge values.
    """
    if np.iscomplexobj(values):
        re = np.interp(grid_s, timestamps_s, values.real)
        im = np.interp(grid_s, timestamps_s, values.imag)
        return re + 1j * im
    return np.interp(grid_s, timestamps_s, values)


def _uniform_grid(trace: CsiTrace, start_s: float, end_s: float) -> tuple[np.ndarray, int]:
    fs = trace.sample_rate_hz
    i0 = int(round(start_s * fs))
    i1 = min(int(round(end_s * fs)), trace.n_samples)
    return np.arange(i0, i1) / fs, i0


def derive_streams(
    trace: CsiTrace,
    ids: list[StreamId] | None = None,
    start_s: float = 0.0,
    end_s: float | None = None,
) -> StreamSet:
    """Form the requested derived streams on the uniform grid.

    Raw complex samples are first resampled from the trace's packet
    timestamps onto the nominal uniform grid (skipped when the trace is
    jitter-free). Only the raw streams actually referenced by ``ids`` are
    touched, so extracting a few streams from an hour-long trace stays cheap.
    """
    if end_s is None:
        end_s = trace.duration_s
    if ids is None:
        ids = all_stream_ids(trace.n_rx, trace.n_sc)
    grid, _ = _uniform_grid(trace, start_s, end_s)
    fs = trace.sample_rate_hz

    nominal = np.arange(trace.n_samples) / fs
    jittered = bool(np.any(trace.timestamps_s != nominal))

    raw_cache: dict[tuple[int, int], np.ndarray] = {}

    def raw(rx: int, sc: int) -> np.ndarray:
        key = (rx, sc)
        if key not in raw_cache:
            series = trace.csi[rx, sc]
            if jittered:
                raw_cache[key] = resample_uniform(trace.timestamps_s, series, grid)
            else:
                i0 = int(round(grid[0] * fs))
                raw_cache[key] = series[i0 : i0 + grid.size]
        return raw_cache[key]

    data = np.empty((len(ids), grid.size), dtype=np.float64)
    for row, sid in enumerate(ids):
        if sid.kind == "mag":
            c = raw(sid.rx, sid.sc)
            data[row] = c.real.astype(np.float64) ** 2 + c.imag.astype(np.float64) ** 2
        else:
            ci = raw(sid.rx, sid.sc)
            cref = raw(0, sid.sc)
            data[row] = np.unwrap(np.angle(ci * np.conj(cref)))
    return StreamSet(tuple(ids), data, fs, start_s=grid[0] if grid.size else start_s)


def hampel_filter(
    stream: np.ndarray, window_samples: int, n_sigmas: float = 3.0
) -> np.ndarray:
    """Hampel outlier rejection: replace samples deviating from the local
    median by more than n_sigmas scaled MADs with that median.

    The MAD is the classical same-window estimate, median(|x_j - m_i|) over
    the window around its own median m_i. Because that scale varies on the
    window timescale, it is evaluated at half-window hops and held between
    evaluation points, which keeps the filter O(n). window_samples must be
    odd and >= 3; ends use nearest-edge padding.
    """
    if window_samples < 3 or window_samples % 2 == 0:
        raise ValueError(f"window_samples must be odd and >= 3, got {window_samples}")
    x = np.asarray(stream, dtype=np.float64)
    n = x.size
    w = min(window_samples, n if n % 2 == 1 else n - 1)
    if w < 3:
        return x.copy()
    med = median_filter(x, size=w, mode="nearest")

    hop = (w + 1) // 2
    windows = np.lib.stride_tricks.sliding_window_view(x, w)[::hop]
    m_rows = np.median(windows, axis=1)
    mad_rows = np.median(np.abs(windows - m_rows[:, None]), axis=1)

    # nearest evaluated window center supplies each sample's scale
    centers = w // 2 + hop * np.arange(mad_rows.size)
    idx = np.clip(np.searchsorted(centers, np.arange(n)), 0, mad_rows.size - 1)
    left = np.maximum(idx - 1, 0)
    use_left = np.abs(centers[left] - np.arange(n)) <= np.abs(centers[idx] - np.arange(n))
    scale = mad_rows[np.where(use_left, left, idx)]

    dev = np.abs(x - med)
    threshold = n_sigmas * MAD_SCALE * scale
    return np.where(dev > threshold, med, x)


def _hampel_window_samples(config: PipelineConfig) -> int:
    w = int(round(config.hampel_window_s * config.sample_rate_hz))
    if w % 2 == 0:
        w += 1
    return max(w, 3)


def compute_stream_snr(stream: np.ndarray, sample_rate_hz: float, bw_br_hz: float) -> float:
    """In-band to out-of-band power ratio of one stream's periodogram.

    The numerator sums the periodogram over 0 < f <= bw_br (DC excluded),
    the denominator over f > bw_br up to Nyquist. A denominator that is
    zero up to FFT rounding (noiseless synthetic stream) returns the +inf
    sentinel so the stream ranks first; an all-zero spectrum returns 0.
    """
    x = np.asarray(stream, dtype=np.float64)
    p = np.abs(np.fft.rfft(x)) ** 2
    freqs = np.fft.rfftfreq(x.size, 1.0 / sample_rate_hz)
    num = float(p[(freqs > 0) & (freqs <= bw_br_hz)].sum())
    den = float(p[freqs > bw_br_hz].sum())
    total = float(p.sum())
    if num <= 1e-12 * total:  # constant stream: only FFT rounding off DC
        return 0.0
    if den <= 1e-12 * num:
        return math.inf
    return num / den


@dataclass(frozen=True)
class CalibrationState:
    """Result of the breathing-only calibration pass."""

    selected_ids: tuple[StreamId, ...]
    sigma_c_sq: float
    t_cal_s: float
    bw_br_hz: float
    cal_start_s: float
    snr_by_id: dict | None = None


def select_streams(
    streams: StreamSet, k: int, bw_br_hz: float
) -> tuple[list[StreamId], dict]:
    """Top-k stream ids by calibration SNR, ties broken by id order."""
    if k > streams.n_streams:
        raise ValueError(f"k = {k} exceeds the {streams.n_streams} available streams")
    snrs = {
        sid: compute_stream_snr(streams.data[row], streams.sample_rate_hz, bw_br_hz)
        for row, sid in enumerate(streams.ids)
    }
    ranked = sorted(streams.ids, key=lambda sid: (-snrs[sid], sid))
    return ranked[:k], snrs


def pca_first_component(
    data: np.ndarray,
    sample_rate_hz: float,
    block_s: float = 4.0,
    overlap: float = 0.5,
) -> np.ndarray:
    """Project K streams onto their per-block first principal component.

    Blocks of block_s seconds (hop = block*(1-overlap)) are mean-centered
    per stream, the top eigenvector of the K x K covariance is extracted,
    and overlapping block outputs are cross-faded with a triangular
    partition of unity. The eigenvector sign is fixed so that each block's
    output correlates non-negatively with the previous block's overlap
    region (first block: the largest-magnitude loading is made positive),
    which makes p(t) fully reproducible. All-constant blocks emit zeros.
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] < 2:
        raise ValueError("need at least 2 streams for PCA")
    n = data.shape[1]
    block = min(int(round(block_s * sample_rate_hz)), n)
    hop = max(int(round(block * (1.0 - overlap))), 1)

    acc = np.zeros(n)
    wsum = np.zeros(n)
    prev: np.ndarray | None = None
    prev_start = 0

    starts = list(range(0, max(n - block, 0) + 1, hop))
    if starts[-1] + block < n:
        starts.append(n - block)

    for s in starts:
        x = data[:, s : s + block]
        xc = x - x.mean(axis=1, keepdims=True)
        cov = xc @ xc.T
        if not np.any(cov):
            comp = np.zeros(x.shape[1])
        else:
            eigvals, eigvecs = np.linalg.eigh(cov)
            v = eigvecs[:, -1]
            if v[np.argmax(np.abs(v))] < 0:
                v = -v
            comp = v @ xc
            if prev is not None:
                lo = max(s, prev_start)
                hi = min(prev_start + prev.size, s + comp.size)
                if hi > lo:
                    dot = float(
                        np.dot(prev[lo - prev_start : hi - prev_start], comp[lo - s : hi - s])
                    )
                    if dot < 0:
                        comp = -comp
        m = comp.size
        w = np.minimum(np.arange(1, m + 1), np.arange(m, 0, -1)).astype(np.float64)
        acc[s : s + m] += w * comp
        wsum[s : s + m] += w
        prev, prev_start = comp, s

    out = np.zeros(n)
    nz = wsum > 0
    out[nz] = acc[nz] / wsum[nz]
    return out


def calibrate(
    trace: CsiTrace, config: PipelineConfig, cal_start_s: float = 0.0
) -> CalibrationState:
    """Run the calibration pass: Hampel, SNR ranking, selection, noise floor.

    The window [cal_start, cal_start + t_cal] must contain breathing only;
    that is the caller's protocol responsibility. sigma_c^2 is the maximum
    out-of-band energy of the PCA-denoised calibration stream over sliding
    detection windows. Re-running after a pose change re-selects streams
    (the recalibration hook).
    """
    from .detector import sliding_out_of_band_energy

    fs = trace.sample_rate_hz
    cal_end = cal_start_s + config.t_cal_s
    if cal_end > trace.duration_s + 0.5 / fs:
        raise ValueError(
            f"trace ({trace.duration_s:.2f} s) shorter than the calibration window "
            f"ending at {cal_end:.2f} s"
        )
    streams = derive_streams(trace, start_s=cal_start_s, end_s=cal_end)
    window = _hampel_window_samples(config)
    cleaned = np.empty_like(streams.data)
    for row in range(streams.n_streams):
        cleaned[row] = hampel_filter(streams.data[row], window, config.hampel_n_sigmas)
    cal_set = StreamSet(streams.ids, cleaned, fs, streams.start_s)

    selected, snrs = select_streams(cal_set, config.k_streams, config.bw_br_hz)
    rows = [cal_set.ids.index(sid) for sid in selected]
    p_cal = pca_first_component(
        cal_set.data[rows], fs, config.pca_block_s, config.pca_overlap
    )
    _, energies = sliding_out_of_band_energy(
        p_cal, fs, config.t_win_ed_s, config.ed_hop_s, config.bw_br_adj_hz
    )
    if energies.size == 0:
        raise ValueError("calibration window shorter than one detection window")
    return CalibrationState(
        selected_ids=tuple(selected),
        sigma_c_sq=float(energies.max()),
        t_cal_s=config.t_cal_s,
        bw_br_hz=config.bw_br_hz,
        cal_start_s=cal_start_s,
        snr_by_id=snrs,
    )


def extract_pipeline_stream(
    trace: CsiTrace, calibration: CalibrationState, config: PipelineConfig
) -> np.ndarray:
    """Full-length denoised stream p(t) from the selected streams."""
    streams = derive_streams(trace, ids=list(calibration.selected_ids))
    window = _hampel_window_samples(config)
    for row in range(streams.n_streams):
        streams.data[row] = hampel_filter(
            streams.data[row], window, config.hampel_n_sigmas
        )
    return pca_first_component(
        streams.data, trace.sample_rate_hz, config.pca_block_s, config.pca_overlap
    )
