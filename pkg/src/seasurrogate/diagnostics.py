"""Spectral diagnostics for parametric roll.

A short-time Fourier transform splits a motion record into overlapping
Hann-windowed frames so that the frequency content can be tracked over
time.  On top of the STFT sits a heuristic detector for the 2:1
parametric signature: intervals where wave energy concentrates near
twice the dominant roll frequency while the roll-band energy grows from
frame to frame.  A roll--pitch phase portrait export rounds out the
toolbox.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import get_window

from .errors import ValidationError

__all__ = [
    "StftResult",
    "stft",
    "DetectorConfig",
    "DetectionReport",
    "detect_parametric_signature",
    "phase_portrait",
]


@dataclass(frozen=True)
class StftResult:
    """Magnitude spectrogram of a single uniformly sampled record.

    ``magnitude`` has shape (n_freqs, n_frames) and holds the raw
    one-sided DFT magnitude of each Hann-windowed frame (no amplitude
    rescaling; energy bookkeeping lives with the caller).  ``times`` are
    frame centers in seconds and ``freqs`` spans 0 .. 1/(2 dt) Hz.
    """

    times: np.ndarray
    freqs: np.ndarray
    magnitude: np.ndarray
    window_len: int
    hop: int

    @property
    def n_frames(self) -> int:
        return self.magnitude.shape[1]

    @property
    def nyquist(self) -> float:
        return float(self.freqs[-1])


def stft(series: np.ndarray, dt: float, window_len: int = 256, hop: int = 64) -> StftResult:
    """Hann-windowed magnitude spectrogram of ``series``.

    Frames start every ``hop`` samples; the frame count is
    floor((L - window_len) / hop) + 1, so trailing samples that do not
    fill a window are dropped.  The default window (51.2 s at dt=0.2 s)
    spans several roll periods, separating a roll line from the wave
    line at twice its frequency.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ValidationError("stft expects a 1-d series")
    if not np.all(np.isfinite(x)):
        raise ValidationError("series contains non-finite values")
    if not np.isfinite(dt) or dt <= 0:
        raise ValidationError("dt must be positive")
    if window_len < 2:
        raise ValidationError("window_len must be at least 2")
    if hop < 1:
        raise ValidationError("hop must be at least 1")
    if window_len > x.size:
        raise ValidationError(
            f"window of {window_len} samples is longer than the series ({x.size})"
        )
    window = get_window("hann", window_len, fftbins=True)
    frames = sliding_window_view(x, window_len)[::hop]
    spectrum = np.fft.rfft(frames * window, axis=1)
    magnitude = np.abs(spectrum).T
    starts = hop * np.arange(frames.shape[0])
    times = (starts + 0.5 * (window_len - 1)) * dt
    freqs = np.fft.rfftfreq(window_len, dt)
    return StftResult(times=times, freqs=freqs, magnitude=magnitude,
                      window_len=window_len, hop=hop)


@dataclass(frozen=True)
class DetectorConfig:
    """Thresholds of the 2:1 signature detector.

    All knobs are exposed on purpose; the detector is a diagnostic
    heuristic, not a calibrated instrument.  ``band_rel`` sets the
    half-width of the roll and wave bands relative to their centers.
    A frame run is flagged when the roll-band energy rises for at least
    ``min_growth_frames`` consecutive frames, grows by a factor of at
    least ``growth_min`` over the run, ends above ``energy_frac_min``
    of the record's peak roll-band energy, and the wave record holds at
    least ``wave_frac_min`` of its energy near twice the roll frequency
    during the run.

    ``require_peak_alignment`` additionally gates the whole record on
    the subharmonic relation: the wave spectrum must peak within the
    2 f_phi band, widened by ``align_slack_bins`` frequency bins since
    both peak estimates quantize to the bin grid.  A merely forced roll
    response peaks at the wave frequency itself, so its doubled band
    misses the wave peak and the record is rejected outright.
    """

    band_rel: float = 0.10
    min_growth_frames: int = 3
    growth_min: float = 2.0
    wave_frac_min: float = 0.15
    energy_frac_min: float = 0.05
    f_min: float = 0.02
    require_peak_alignment: bool = True
    align_slack_bins: float = 1.5

    def __post_init__(self) -> None:
        if not 0.0 < self.band_rel < 1.0:
            raise ValidationError("band_rel must be in (0, 1)")
        if self.min_growth_frames < 2:
            raise ValidationError("min_growth_frames must be at least 2")
        if self.growth_min <= 1.0:
            raise ValidationError("growth_min must exceed 1")
        if not 0.0 <= self.wave_frac_min <= 1.0:
            raise ValidationError("wave_frac_min must be in [0, 1]")
        if not 0.0 <= self.energy_frac_min <= 1.0:
            raise ValidationError("energy_frac_min must be in [0, 1]")
        if self.f_min < 0:
            raise ValidationError("f_min must be nonnegative")
        if self.align_slack_bins < 0:
            raise ValidationError("align_slack_bins must be nonnegative")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class DetectionReport:
    """Outcome of the parametric-signature scan.

    ``intervals`` lists (start, end) times in seconds of flagged growth
    episodes; ``flagged`` is their union as a per-frame mask.  The
    per-frame diagnostics used by the decision are kept for plotting
    and post-hoc tuning.
    """

    f_phi: float
    f_wave: float
    peak_aligned: bool
    roll_band: tuple[float, float]
    wave_band: tuple[float, float]
    intervals: tuple[tuple[float, float], ...]
    flagged: np.ndarray
    roll_energy: np.ndarray
    wave_fraction: np.ndarray
    times: np.ndarray

    @property
    def detected(self) -> bool:
        return len(self.intervals) > 0

    def to_dict(self) -> dict:
        return {
            "detected": self.detected,
            "f_phi": self.f_phi,
            "f_wave": self.f_wave,
            "peak_aligned": self.peak_aligned,
            "roll_band": list(self.roll_band),
            "wave_band": list(self.wave_band),
            "intervals": [list(iv) for iv in self.intervals],
            "flagged": self.flagged.astype(int).tolist(),
            "roll_energy": self.roll_energy.tolist(),
            "wave_fraction": self.wave_fraction.tolist(),
            "times": self.times.tolist(),
        }


def _band_mask(freqs: np.ndarray, center: float, rel: float) -> np.ndarray:
    return (freqs >= (1.0 - rel) * center) & (freqs <= (1.0 + rel) * center)


def _dominant_frequency(result: StftResult, f_min: float) -> float:
    power = np.mean(result.magnitude ** 2, axis=1)
    usable = result.freqs >= f_min
    if not np.any(usable):
        raise ValidationError("no frequency bins above f_min")
    idx = np.argmax(np.where(usable, power, -np.inf))
    return float(result.freqs[idx])


def detect_parametric_signature(
    roll_stft: StftResult,
    wave_stft: StftResult,
    f_phi_hint: float | None = None,
    config: DetectorConfig | None = None,
) -> DetectionReport:
    """Scan paired roll/wave spectrograms for the 2:1 growth signature.

    The dominant roll frequency f_phi is taken from the time-averaged
    roll spectrum unless ``f_phi_hint`` pins it.  Flagged intervals are
    maximal frame runs where the roll-band energy rises monotonically
    while the wave record concentrates energy in a band around 2 f_phi.
    """
    cfg = config if config is not None else DetectorConfig()
    if roll_stft.magnitude.shape != wave_stft.magnitude.shape:
        raise ValidationError("roll and wave spectrograms must share a frame grid")
    if not np.allclose(roll_stft.freqs, wave_stft.freqs):
        raise ValidationError("roll and wave spectrograms must share frequency bins")
    nyq = roll_stft.nyquist
    if f_phi_hint is not None:
        if not np.isfinite(f_phi_hint) or not 0.0 < f_phi_hint < nyq:
            raise ValidationError(
                f"f_phi_hint {f_phi_hint!r} outside the resolvable band (0, {nyq})"
            )
        f_phi = float(f_phi_hint)
    else:
        f_phi = _dominant_frequency(roll_stft, cfg.f_min)

    roll_band = ((1.0 - cfg.band_rel) * f_phi, (1.0 + cfg.band_rel) * f_phi)
    wave_band = (2.0 * roll_band[0], 2.0 * roll_band[1])
    roll_mask = _band_mask(roll_stft.freqs, f_phi, cfg.band_rel)
    wave_mask = _band_mask(wave_stft.freqs, 2.0 * f_phi, cfg.band_rel)
    if not np.any(roll_mask):
        raise ValidationError("roll band contains no frequency bins; widen band_rel")

    roll_energy = np.sum(roll_stft.magnitude[roll_mask] ** 2, axis=0)
    wave_total = np.sum(wave_stft.magnitude[wave_stft.freqs >= cfg.f_min] ** 2, axis=0)
    wave_in_band = np.sum(wave_stft.magnitude[wave_mask] ** 2, axis=0)
    wave_fraction = wave_in_band / np.maximum(wave_total, 1e-300)
    f_wave = _dominant_frequency(wave_stft, cfg.f_min)
    slack = cfg.align_slack_bins * float(wave_stft.freqs[1] - wave_stft.freqs[0])
    peak_aligned = (wave_band[0] - slack) <= f_wave <= (wave_band[1] + slack)

    n = roll_energy.size
    peak = float(np.max(roll_energy)) if n else 0.0
    flagged = np.zeros(n, dtype=bool)
    intervals: list[tuple[float, float]] = []
    if peak_aligned or not cfg.require_peak_alignment:
        rising = roll_energy[1:] > roll_energy[:-1]
        j = 0
        while j < n - 1:
            if not rising[j]:
                j += 1
                continue
            k = j
            while k < n - 1 and rising[k]:
                k += 1
            # run of frames j .. k with strictly increasing roll-band energy
            run_len = k - j + 1
            grown = roll_energy[k] >= cfg.growth_min * max(roll_energy[j], 1e-300)
            loud = roll_energy[k] >= cfg.energy_frac_min * peak
            coherent = float(np.mean(wave_fraction[j:k + 1])) >= cfg.wave_frac_min
            if run_len >= cfg.min_growth_frames and grown and loud and coherent:
                flagged[j:k + 1] = True
                intervals.append((float(roll_stft.times[j]), float(roll_stft.times[k])))
            j = k
    return DetectionReport(
        f_phi=f_phi,
        f_wave=f_wave,
        peak_aligned=peak_aligned,
        roll_band=roll_band,
        wave_band=wave_band,
        intervals=tuple(intervals),
        flagged=flagged,
        roll_energy=roll_energy,
        wave_fraction=wave_fraction,
        times=roll_stft.times.copy(),
    )


def phase_portrait(roll: np.ndarray, pitch: np.ndarray, decimate: int = 1) -> np.ndarray:
    """Paired (roll, pitch) samples for a phase-portrait scatter.

    Returns an (n, 2) array in input order, optionally keeping every
    ``decimate``-th pair to thin dense records for plotting.
    """
    phi = np.asarray(roll, dtype=float)
    theta = np.asarray(pitch, dtype=float)
    if phi.ndim != 1 or theta.ndim != 1:
        raise ValidationError("phase_portrait expects 1-d series")
    if phi.size != theta.size:
        raise ValidationError(
            f"roll and pitch lengths differ ({phi.size} vs {theta.size})"
        )
    if phi.size < 2:
        raise ValidationError("phase_portrait needs at least 2 samples")
    if decimate < 1:
        raise ValidationError("decimate must be at least 1")
    pts = np.column_stack([phi, theta])
    return pts[::decimate].copy()
