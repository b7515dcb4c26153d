"""Labeled multi-antenna, multi-subcarrier CSI trace generation.

Builds overnight-style scenarios: continuous chest breathing plus scheduled
motion events (seizures, posture shifts, scratches, coughs, limb jerks), each
a velocity profile superposed on the breathing velocity. Every (antenna,
subcarrier) stream gets independently drawn path parameters; receiver noise,
impulsive magnitude outliers, and packet-timing jitter are applied on top.

Trace generation is deterministic in (scenario, geometry, noise, seed) and
the returned trace should be treated as immutable.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.signal import butter, sosfiltfilt

from .signal_model import (
    MotionProfile,
    PathParams,
    SampledProfile,
    SceneGeometry,
    SinusoidProfile,
)

__all__ = [
    "EventKind",
    "ScenarioEvent",
    "Scenario",
    "NoiseSpec",
    "LabelInterval",
    "CsiTrace",
    "LABEL_BREATHING",
    "LABEL_NORMAL",
    "LABEL_SEIZURE",
    "breathing_profile",
    "seizure_profile",
    "posture_shift_profile",
    "scratch_profile",
    "cough_profile",
    "limb_jerk_profile",
    "build_night_scenario",
    "generate_trace",
    "superpose_person",
    "import_speed_csv",
]

LABEL_BREATHING = 0
LABEL_NORMAL = 1
LABEL_SEIZURE = 2

SEIZURE_MIN_DURATION_S = 20.0
LIMB_JERK_MAX_DURATION_S = 0.4


class EventKind(Enum):
    SEIZURE = "seizure"
    POSTURE_SHIFT = "posture_shift"
    LIMB_JERK = "limb_jerk"
    SCRATCH = "scratch"
    COUGH = "cough"

    @property
    def label(self) -> int:
        return LABEL_SEIZURE if self is EventKind.SEIZURE else LABEL_NORMAL


@dataclass(frozen=True)
class ScenarioEvent:
    """One scheduled motion event of a person's night."""

    kind: EventKind
    start_s: float
    duration_s: float
    motion: MotionProfile

    def __post_init__(self):
        if self.start_s < 0 or self.duration_s <= 0:
            raise ValueError("event must have start_s >= 0 and duration_s > 0")
        if self.kind is EventKind.SEIZURE and self.duration_s < SEIZURE_MIN_DURATION_S:
            raise ValueError(
                f"seizure events last at least {SEIZURE_MIN_DURATION_S} s, "
                f"got {self.duration_s}"
            )
        if self.kind is EventKind.LIMB_JERK and self.duration_s > LIMB_JERK_MAX_DURATION_S:
            raise ValueError(
                f"limb jerks last at most {LIMB_JERK_MAX_DURATION_S} s, got {self.duration_s}"
            )

    @property
    def end_s(self) -> float:
        return self.start_s + self.duration_s


@dataclass(frozen=True)
class Scenario:
    """A person's full night: continuous breathing plus scheduled events."""

    duration_s: float
    breathing: SinusoidProfile
    events: tuple[ScenarioEvent, ...] = ()

    def __post_init__(self):
        if self.duration_s <= 0:
            raise ValueError("duration_s must be positive")
        events = tuple(sorted(self.events, key=lambda e: e.start_s))
        for ev in events:
            if ev.end_s > self.duration_s:
                raise ValueError(f"event at {ev.start_s} s extends past the scenario end")
        for a, b in zip(events, events[1:]):
            if b.start_s < a.end_s:
                raise ValueError(
                    f"overlapping events at {a.start_s} s and {b.start_s} s "
                    "(same-person events must not overlap)"
                )
        object.__setattr__(self, "events", events)

    @classmethod
    def breathing_only(
        cls,
        duration_s: float,
        f_o_hz: float = 0.25,
        displacement_m: float = 0.005,
        phase_rad: float = 0.0,
    ):
        return cls(
            duration_s=duration_s,
            breathing=breathing_profile(duration_s, f_o_hz, displacement_m, phase_rad),
        )


@dataclass(frozen=True)
class NoiseSpec:
    """Receiver impairments applied to the clean trace.

    awgn_sigma is the per-sample complex noise standard deviation in
    channel-gain units; a scalar applies to every stream, an (n_rx, n_sc)
    array sets it per stream. Outliers are isolated magnitude spikes of
    outlier_magnitude stream standard deviations, arriving at
    outlier_rate_per_s per stream. jitter_std_s perturbs packet timestamps.
    """

    awgn_sigma: float | np.ndarray = 0.0
    outlier_rate_per_s: float = 0.0
    outlier_magnitude: float = 8.0
    jitter_std_s: float = 0.0

    def __post_init__(self):
        sigma = np.asarray(self.awgn_sigma, dtype=float)
        if np.any(sigma < 0):
            raise ValueError("awgn_sigma must be non-negative")
        if self.outlier_rate_per_s < 0 or self.outlier_magnitude < 0 or self.jitter_std_s < 0:
            raise ValueError("noise parameters must be non-negative")

    @classmethod
    def none(cls):
        return cls()


@dataclass(frozen=True)
class LabelInterval:
    """Ground-truth label interval, per person."""

    start_s: float
    end_s: float
    kind: EventKind
    person_id: int = 1

    @property
    def is_seizure(self) -> bool:
        return self.kind is EventKind.SEIZURE

    @property
    def label(self) -> int:
        return self.kind.label


@dataclass
class CsiTrace:
    """Uniform-rate multi-stream CSI record with ground truth.

    csi is stream-major, shape (n_rx, n_sc, n_samples); timestamps_s holds
    the actual (possibly jittered) packet arrival times. alpha/mu arrays
    hold the per-stream path parameters of person 1.
    """

    sample_rate_hz: float
    n_rx: int
    n_sc: int
    csi: np.ndarray
    timestamps_s: np.ndarray
    labels: np.ndarray
    events: tuple[LabelInterval, ...]
    geometry: SceneGeometry
    alpha_d: np.ndarray
    mu_d: np.ndarray
    alpha_r: np.ndarray
    mu_r: np.ndarray
    outlier_log: tuple[tuple[int, int, int], ...] = ()
    meta: dict = field(default_factory=dict)

    @property
    def n_samples(self) -> int:
        return self.csi.shape[2]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sample_rate_hz

    @property
    def n_streams(self) -> int:
        """Derived data streams available: (2*n_rx - 1) * n_sc."""
        return (2 * self.n_rx - 1) * self.n_sc

    def path_params(self, rx: int, sc: int) -> PathParams:
        return PathParams(
            alpha_d=float(self.alpha_d[rx, sc]),
            mu_d=float(self.mu_d[rx, sc]),
            alpha_r=float(self.alpha_r[rx, sc]),
            mu_r=float(self.mu_r[rx, sc]),
            max_ratio=np.inf,
        )

    def content_hash(self) -> str:
        """SHA-256 over the trace content; stable for identical traces."""
        h = hashlib.sha256()
        h.update(
            f"{self.sample_rate_hz!r},{self.n_rx},{self.n_sc},{self.csi.dtype}".encode()
        )
        h.update(self.csi.tobytes())
        h.update(self.timestamps_s.tobytes())
        h.update(self.labels.tobytes())
        for ev in self.events:
            h.update(f"{ev.start_s!r},{ev.end_s!r},{ev.kind.value},{ev.person_id}".encode())
        return h.hexdigest()


# ---------------------------------------------------------------------------
# Motion profile library
# ---------------------------------------------------------------------------

def breathing_profile(
    duration_s: float,
    f_o_hz: float = 0.25,
    displacement_m: float = 0.005,
    phase_rad: float = 0.0,
) -> SinusoidProfile:
    """Chest breathing: sinusoid with the given peak chest displacement.

    v_max = 2*pi*f_o*displacement, so the integral swings +/-displacement.
    """
    return SinusoidProfile(
        v_max_mps=2.0 * math.pi * f_o_hz * displacement_m,
        f_o_hz=f_o_hz,
        duration_s=duration_s,
        phase_rad=phase_rad,
    )


def seizure_profile(
    duration_s: float,
    v_max_mps: float,
    f_o_hz: float,
    phase_rad: float = 0.0,
    tonic_s: float = 0.0,
    rate_hz: float = 200.0,
) -> MotionProfile:
    """Clonic-phase jerking: sinusoid at 1.5-5 Hz, optionally preceded by a
    low-motion tonic stiffening segment."""
    if tonic_s <= 0.0:
        return SinusoidProfile(v_max_mps, f_o_hz, duration_s, phase_rad)
    n_tonic = int(round(tonic_s * rate_hz))
    t_clonic = np.arange(int(round((duration_s - tonic_s) * rate_hz)) + 1) / rate_hz
    clonic = v_max_mps * np.cos(2.0 * math.pi * f_o_hz * t_clonic + phase_rad)
    tonic = np.full(n_tonic, 0.02 * v_max_mps)
    return SampledProfile(np.concatenate([tonic, clonic]), rate_hz)


def _smooth_lobe(duration_s: float, v_peak: float, rate_hz: float) -> np.ndarray:
    """sin^2 velocity lobe: C1-smooth, spectral content ~2/duration wide."""
    n = max(int(round(duration_s * rate_hz)), 4)
    tau = np.arange(n) / (n - 1)
    return v_peak * np.sin(math.pi * tau) ** 2


def posture_shift_profile(
    duration_s: float,
    v_max_mps: float = 0.3,
    rng: np.random.Generator | None = None,
    rate_hz: float = 200.0,
) -> SampledProfile:
    """Posture adjustment: a few smooth pushes separated by short pauses."""
    rng = rng or np.random.default_rng(0)
    n = int(round(duration_s * rate_hz))
    v = np.zeros(n)
    t = 0.0
    sign = 1.0 if rng.random() < 0.5 else -1.0
    while t < duration_s - 1.0:
        lobe_s = min(float(rng.uniform(1.0, 2.0)), duration_s - t)
        peak = v_max_mps * float(rng.uniform(0.6, 1.0))
        lobe = _smooth_lobe(lobe_s, sign * peak, rate_hz)
        i0 = int(round(t * rate_hz))
        i1 = min(i0 + lobe.size, n)
        v[i0:i1] += lobe[: i1 - i0]
        sign = -sign
        t += lobe_s + float(rng.uniform(0.2, 0.6))
    if not np.any(v):
        v[: _smooth_lobe(min(1.0, duration_s), v_max_mps, rate_hz).size] = _smooth_lobe(
            min(1.0, duration_s), v_max_mps, rate_hz
        )[: n]
    return SampledProfile(v, rate_hz)


def scratch_profile(
    duration_s: float,
    rng: np.random.Generator | None = None,
    rate_hz: float = 200.0,
) -> SampledProfile:
    """Scratching: slow arm repositioning with a faint 3-6 Hz tremor on top.

    The tremor amplitude is kept small so its sidebands carry a negligible
    share of the stream power; the bulk of the motion energy stays below
    ~1 Hz, as accelerometry of normal sleep movements shows.
    """
    rng = rng or np.random.default_rng(0)
    n = int(round(duration_s * rate_hz))
    t = np.arange(n) / rate_hz
    envelope = np.sin(math.pi * np.minimum(t / duration_s, 1.0)) ** 2
    slow = float(rng.uniform(0.12, 0.2)) * envelope * np.cos(
        2.0 * math.pi * float(rng.uniform(0.3, 0.6)) * t
    )
    tremor_f = float(rng.uniform(3.0, 6.0))
    tremor = float(rng.uniform(0.01, 0.03)) * envelope * np.sin(
        2.0 * math.pi * tremor_f * t
    )
    return SampledProfile(slow + tremor, rate_hz)


def cough_profile(
    duration_s: float,
    rng: np.random.Generator | None = None,
    rate_hz: float = 200.0,
) -> SampledProfile:
    """Coughing: two to four short chest heaves."""
    rng = rng or np.random.default_rng(0)
    n = int(round(duration_s * rate_hz))
    v = np.zeros(n)
    n_bursts = int(rng.integers(2, 5))
    t = 0.05 * duration_s
    for _ in range(n_bursts):
        burst_s = float(rng.uniform(0.35, 0.5))
        if t + burst_s >= duration_s:
            break
        lobe = _smooth_lobe(burst_s, float(rng.uniform(0.12, 0.22)), rate_hz)
        i0 = int(round(t * rate_hz))
        i1 = min(i0 + lobe.size, n)
        v[i0:i1] += lobe[: i1 - i0]
        t += burst_s + float(rng.uniform(0.15, 0.4))
    return SampledProfile(v, rate_hz)


def limb_jerk_profile(
    duration_s: float = 0.3,
    v_max_mps: float = 0.5,
    rate_hz: float = 200.0,
) -> SampledProfile:
    """Quick limb jerk: a single fast lobe, under 400 ms. Jerks may exceed
    the normal-event speed bound; the duration gate handles them."""
    if duration_s > LIMB_JERK_MAX_DURATION_S:
        raise ValueError(f"limb jerks last at most {LIMB_JERK_MAX_DURATION_S} s")
    return SampledProfile(_smooth_lobe(duration_s, v_max_mps, rate_hz), rate_hz)


def build_night_scenario(
    duration_s: float,
    n_seizures: int,
    n_normal_events: int,
    seed: int,
    breathing_f_o_hz: float = 0.25,
    breathing_displacement_m: float = 0.005,
    seizure_v_range: tuple[float, float] = (0.7, 0.8),
    seizure_f_range: tuple[float, float] = (2.0, 3.5),
    start_clear_s: float = 20.0,
    min_gap_s: float = 8.0,
    rate_hz: float = 200.0,
) -> Scenario:
    """Compose a night: breathing throughout, randomized non-overlapping events.

    The leading start_clear_s seconds stay event-free for calibration. The
    default seizure draw ranges sit inside the clonic-phase parameter ranges
    but away from the detectability boundary, so every generated seizure's
    spectral signature clears the classification threshold regardless of the
    per-deployment phase offsets.
    """
    rng = np.random.default_rng(seed)
    specs = []
    for _ in range(n_seizures):
        specs.append(("seizure", float(rng.uniform(20.0, 26.0))))
    normal_kinds = [EventKind.POSTURE_SHIFT, EventKind.SCRATCH, EventKind.COUGH,
                    EventKind.LIMB_JERK]
    for i in range(n_normal_events):
        kind = normal_kinds[i % len(normal_kinds)]
        if kind is EventKind.POSTURE_SHIFT:
            dur = float(rng.uniform(6.0, 10.0))
        elif kind is EventKind.SCRATCH:
            dur = float(rng.uniform(3.0, 6.0))
        elif kind is EventKind.COUGH:
            dur = float(rng.uniform(1.2, 2.0))
        else:
            dur = float(rng.uniform(0.2, 0.35))
        specs.append((kind.value, dur))

    # Rejection-sample non-overlapping start times with the required gaps.
    placed: list[tuple[float, float]] = []
    starts = []
    for _, dur in specs:
        for _attempt in range(10000):
            s = float(rng.uniform(start_clear_s, duration_s - dur - 1.0))
            if all(s + dur + min_gap_s <= a or b + min_gap_s <= s for a, b in placed):
                placed.append((s, s + dur))
                starts.append(s)
                break
        else:
            raise ValueError("could not place all events; scenario too crowded")

    events = []
    for (name, dur), start in zip(specs, starts):
        if name == "seizure":
            motion = seizure_profile(
                dur,
                v_max_mps=float(rng.uniform(*seizure_v_range)),
                f_o_hz=float(rng.uniform(*seizure_f_range)),
                phase_rad=float(rng.uniform(0.0, 2.0 * math.pi)),
            )
            events.append(ScenarioEvent(EventKind.SEIZURE, start, dur, motion))
        else:
            kind = EventKind(name)
            if kind is EventKind.POSTURE_SHIFT:
                motion = posture_shift_profile(dur, rng=rng, rate_hz=rate_hz)
            elif kind is EventKind.SCRATCH:
                motion = scratch_profile(dur, rng=rng, rate_hz=rate_hz)
            elif kind is EventKind.COUGH:
                motion = cough_profile(dur, rng=rng, rate_hz=rate_hz)
            else:
                motion = limb_jerk_profile(dur, v_max_mps=float(rng.uniform(0.3, 0.6)),
                                           rate_hz=rate_hz)
            events.append(ScenarioEvent(kind, start, dur, motion))

    return Scenario(
        duration_s=duration_s,
        breathing=breathing_profile(
            duration_s, breathing_f_o_hz, breathing_displacement_m
        ),
        events=tuple(events),
    )


# ---------------------------------------------------------------------------
# Trace generation
# ---------------------------------------------------------------------------

def _event_displacement(event: ScenarioEvent, t: np.ndarray) -> np.ndarray:
    """Displacement contributed by one event at absolute times t.

    Zero before the event; frozen at the net displacement after it (the
    body part stays where the movement left it).
    """
    d = np.zeros_like(t)
    lo = np.searchsorted(t, event.start_s, side="left")
    hi = np.searchsorted(t, event.end_s, side="right")
    if lo >= t.size:
        return d
    local = np.clip(t[lo:hi] - event.start_s, 0.0, event.duration_s)
    if isinstance(event.motion, SinusoidProfile):
        seg = event.motion.displacement_at(local)
        final = float(event.motion.displacement_at(np.array([event.duration_s]))[0])
    else:
        v = event.motion.velocity_at(local)
        seg = cumulative_trapezoid(v, t[lo:hi], initial=0.0)
        final = float(seg[-1]) if seg.size else 0.0
    d[lo:hi] = seg
    d[hi:] = final
    return d


def scenario_displacement(scenario: Scenario, t: np.ndarray) -> np.ndarray:
    """Total body displacement along the ellipse normal at times t.

    Event velocities superpose on the breathing velocity, so displacements
    add.
    """
    t = np.asarray(t, dtype=float)
    d = scenario.breathing.displacement_at(t)
    for ev in scenario.events:
        d = d + _event_displacement(ev, t)
    return d


def _labels_for(scenario: Scenario, t: np.ndarray, person_id: int):
    labels = np.zeros(t.size, dtype=np.int8)
    intervals = []
    for ev in scenario.events:
        lo = np.searchsorted(t, ev.start_s, side="left")
        hi = np.searchsorted(t, ev.end_s, side="left")  # [start, end)
        labels[lo:hi] = np.maximum(labels[lo:hi], ev.kind.label)
        intervals.append(LabelInterval(ev.start_s, ev.end_s, ev.kind, person_id))
    return labels, intervals


def _stream_magnitude_std(stream: np.ndarray) -> float:
    mag = stream.real.astype(np.float64) ** 2 + stream.imag.astype(np.float64) ** 2
    np.sqrt(mag, out=mag)
    return float(mag.std())


def generate_trace(
    scenario: Scenario,
    geometry: SceneGeometry,
    noise: NoiseSpec | None = None,
    seed: int = 0,
    n_rx: int = 3,
    n_sc: int = 30,
    sample_rate_hz: float = 200.0,
    ratio_range: tuple[float, float] = (0.05, 0.15),
    dtype=np.complex128,
) -> CsiTrace:
    """Generate a labeled CSI trace for one person.

    Each (antenna, subcarrier) stream draws an independent direct-path phase,
    reflected-path phase offset (uniform on [0, 2pi)) and amplitude ratio
    (uniform on ratio_range). The complex channel of every stream shares the
    same body displacement; only the per-stream constants differ, so the
    synthesis multiplies a single motion phasor by per-stream coefficients.

    dtype complex64 halves memory and roughly doubles generation speed for
    hour-scale traces; complex128 keeps the noiseless closed-form agreement
    at the 1e-9 level.
    """
    noise = noise or NoiseSpec.none()
    if n_rx < 1 or n_sc < 1:
        raise ValueError("n_rx and n_sc must be >= 1")
    rng = np.random.default_rng(seed)
    n = int(round(scenario.duration_s * sample_rate_hz))
    if n < 2:
        raise ValueError("scenario too short for the sample rate")
    real_dtype = np.float32 if dtype == np.complex64 else np.float64

    # Per-stream path parameters come first in the draw order so that
    # turning jitter or noise on or off never changes them.
    mu_d = rng.uniform(0.0, 2.0 * math.pi, (n_rx, n_sc))
    delta_mu = rng.uniform(0.0, 2.0 * math.pi, (n_rx, n_sc))
    ratio = rng.uniform(ratio_range[0], ratio_range[1], (n_rx, n_sc))
    alpha_d = np.ones((n_rx, n_sc))
    alpha_r = ratio * alpha_d
    mu_r = mu_d + delta_mu

    # Packet arrival times. Jitter is clipped to +/-0.4 sample periods to
    # keep timestamps strictly monotone.
    nominal = np.arange(n) / sample_rate_hz
    if noise.jitter_std_s > 0:
        jitter = rng.normal(0.0, noise.jitter_std_s, n)
        np.clip(jitter, -0.4 / sample_rate_hz, 0.4 / sample_rate_hz, out=jitter)
        timestamps = nominal + jitter
    else:
        timestamps = nominal.copy()

    # Shared motion phasor, then per-stream complex coefficients.
    d = scenario_displacement(scenario, timestamps)
    base = np.exp(1j * (geometry.beta_rad_per_m * d)).astype(dtype)
    coef_d = (alpha_d * np.exp(1j * mu_d)).astype(dtype)
    coef_r = (alpha_r * np.exp(1j * mu_r)).astype(dtype)

    csi = np.empty((n_rx, n_sc, n), dtype=dtype)
    for i in range(n_rx):
        for j in range(n_sc):
            np.multiply(base, coef_r[i, j], out=csi[i, j])
            csi[i, j] += coef_d[i, j]

    # Receiver noise, drawn stream by stream in a fixed order.
    sigma = np.broadcast_to(np.asarray(noise.awgn_sigma, dtype=float), (n_rx, n_sc))
    if np.any(sigma > 0):
        for i in range(n_rx):
            for j in range(n_sc):
                if sigma[i, j] == 0:
                    continue
                s = sigma[i, j] / math.sqrt(2.0)
                csi[i, j].real += s * rng.standard_normal(n, dtype=real_dtype)
                csi[i, j].imag += s * rng.standard_normal(n, dtype=real_dtype)

    # Impulsive magnitude outliers (isolated spikes, as hardware glitches).
    outlier_log: list[tuple[int, int, int]] = []
    if noise.outlier_rate_per_s > 0 and noise.outlier_magnitude > 0:
        expected = noise.outlier_rate_per_s * scenario.duration_s
        for i in range(n_rx):
            for j in range(n_sc):
                count = min(int(rng.poisson(expected)), n)
                if count == 0:
                    continue
                idx = rng.choice(n, size=count, replace=False)
                std = _stream_magnitude_std(csi[i, j])
                vals = csi[i, j, idx]
                mags = np.abs(vals)
                mags[mags == 0] = 1.0
                csi[i, j, idx] = vals * (1.0 + noise.outlier_magnitude * std / mags)
                outlier_log.extend((i, j, int(k)) for k in idx)

    labels, intervals = _labels_for(scenario, timestamps, person_id=1)

    return CsiTrace(
        sample_rate_hz=sample_rate_hz,
        n_rx=n_rx,
        n_sc=n_sc,
        csi=csi,
        timestamps_s=timestamps,
        labels=labels,
        events=tuple(intervals),
        geometry=geometry,
        alpha_d=alpha_d,
        mu_d=mu_d,
        alpha_r=alpha_r,
        mu_r=mu_r,
        outlier_log=tuple(outlier_log),
        meta={"seed": seed, "scenario_duration_s": scenario.duration_s},
    )


def superpose_person(
    trace: CsiTrace,
    scenario2: Scenario,
    geometry2: SceneGeometry | None = None,
    seed: int = 1,
    ratio_range: tuple[float, float] = (0.05, 0.15),
) -> CsiTrace:
    """Add a second person's reflected path to every stream of a trace.

    The second body contributes an independent additive reflection per
    stream, evaluated on the trace's own (jittered) timestamps; labels merge
    with person_id 2.
    """
    if abs(scenario2.duration_s - trace.duration_s) > 1.0 / trace.sample_rate_hz:
        raise ValueError("second scenario must cover the same time span as the trace")
    geometry2 = geometry2 or trace.geometry
    rng = np.random.default_rng(seed)
    mu_r2 = rng.uniform(0.0, 2.0 * math.pi, (trace.n_rx, trace.n_sc))
    ratio2 = rng.uniform(ratio_range[0], ratio_range[1], (trace.n_rx, trace.n_sc))

    d2 = scenario_displacement(scenario2, trace.timestamps_s)
    base2 = np.exp(1j * (geometry2.beta_rad_per_m * d2)).astype(trace.csi.dtype)
    coef2 = (ratio2 * np.exp(1j * mu_r2)).astype(trace.csi.dtype)

    csi = trace.csi.copy()
    for i in range(trace.n_rx):
        for j in range(trace.n_sc):
            csi[i, j] += coef2[i, j] * base2

    labels2, intervals2 = _labels_for(scenario2, trace.timestamps_s, person_id=2)
    return CsiTrace(
        sample_rate_hz=trace.sample_rate_hz,
        n_rx=trace.n_rx,
        n_sc=trace.n_sc,
        csi=csi,
        timestamps_s=trace.timestamps_s.copy(),
        labels=np.maximum(trace.labels, labels2),
        events=tuple(trace.events) + tuple(intervals2),
        geometry=trace.geometry,
        alpha_d=trace.alpha_d,
        mu_d=trace.mu_d,
        alpha_r=trace.alpha_r,
        mu_r=trace.mu_r,
        outlier_log=trace.outlier_log,
        meta={**trace.meta, "second_person_seed": seed},
    )


# ---------------------------------------------------------------------------
# Accelerometry import
# ---------------------------------------------------------------------------

def import_speed_csv(path, column_spec: str = "auto") -> SampledProfile:
    """Build a Sampled speed profile from a CSV of accelerations or speeds.

    Accepted headers: ``t_s, ax, ay, az`` (accelerations, m/s^2) or
    ``t_s, speed`` (m/s). Accelerations are integrated per axis with the
    trapezoid rule, high-pass filtered at 0.05 Hz to remove integration
    drift, and combined into a speed magnitude. Timestamps must be strictly
    increasing; non-uniform timestamps are resampled to the median rate.
    """
    data = np.genfromtxt(path, delimiter=",", names=True)
    if data.dtype.names is None:
        raise ValueError(f"{path}: expected a CSV header row")
    names = [c.strip().lower() for c in data.dtype.names]
    if column_spec == "auto":
        if set(names) >= {"t_s", "ax", "ay", "az"}:
            column_spec = "accel"
        elif set(names) >= {"t_s", "speed"}:
            column_spec = "speed"
        else:
            raise ValueError(
                f"{path}: unrecognized columns {names}; expected "
                "(t_s, ax, ay, az) or (t_s, speed)"
            )
    t = np.asarray(data["t_s"], dtype=float)
    if t.size < 16:
        raise ValueError(f"{path}: need at least 16 rows, got {t.size}")
    dt = np.diff(t)
    if np.any(dt <= 0):
        raise ValueError(f"{path}: timestamps must be strictly increasing")

    rate = 1.0 / float(np.median(dt))
    n = int(round((t[-1] - t[0]) * rate)) + 1
    grid = t[0] + np.arange(n) / rate

    if column_spec == "speed":
        speed = np.interp(grid, t, np.asarray(data["speed"], dtype=float))
        return SampledProfile(speed, rate)

    # second-order sections: a 0.05 Hz corner at a ~100 Hz rate is numerically
    # fragile in transfer-function form
    sos = butter(2, 0.05, btype="highpass", fs=rate, output="sos")
    sq = np.zeros(n)
    for axis in ("ax", "ay", "az"):
        acc = np.interp(grid, t, np.asarray(data[axis], dtype=float))
        vel = cumulative_trapezoid(acc, grid, initial=0.0)
        vel = sosfiltfilt(sos, vel)
        sq += vel**2
    return SampledProfile(np.sqrt(sq), rate)
