"""The primitive acoustic effects: pure Waveform -> Waveform transforms.

Nine entry points over eight distinct algorithms (``change_volume`` and
``change_volume_distortion`` share one): additive noise at a target SNR,
feedback echo, Freeverb-style room reverb, tanh overdrive, gated
down/up-resampling, cascaded Butterworth filtering, loudness
normalization, and frame-level stutter. Every effect preserves input
length exactly and is the identity at wet/mix 0. Stutter is the only
consumer of the explicit RNG stream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import butter, lfilter, sosfilt

from .loudness import measure_integrated_loudness
from .waveform import Waveform, measure_rms, resample_to

__all__ = [
    "NoiseParams",
    "EchoParams",
    "ReverbParams",
    "DistortionParams",
    "ResampleParams",
    "FilterParams",
    "LoudnessParams",
    "StutterParams",
    "add_noise",
    "add_echo",
    "add_reverb",
    "add_distortion",
    "add_resample",
    "apply_filter",
    "change_volume",
    "change_volume_distortion",
    "loudness_normalize",
    "add_stutter_replace",
]


def _check_unit(value: float, name: str) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must be in [0, 1], got {value}")


@dataclass(frozen=True)
class NoiseParams:
    """Additive noise: SNR in dB of speech RMS over scaled-noise RMS."""

    noise: Waveform
    noise_db: float
    wet: float = 1.0

    def __post_init__(self) -> None:
        _check_unit(self.wet, "wet")
        if len(self.noise) == 0:
            raise ValueError("noise clip must be non-empty")


@dataclass(frozen=True)
class EchoParams:
    delay_seconds: float
    feedback: float
    mix: float

    def __post_init__(self) -> None:
        if self.delay_seconds <= 0:
            raise ValueError(f"delay_seconds must be positive, got {self.delay_seconds}")
        if not 0.0 <= self.feedback < 1.0:
            raise ValueError(f"feedback must be in [0, 1), got {self.feedback}")
        _check_unit(self.mix, "mix")


@dataclass(frozen=True)
class ReverbParams:
    room_size: float
    damping: float
    wet_level: float
    dry_level: float

    def __post_init__(self) -> None:
        for name in ("room_size", "damping", "wet_level", "dry_level"):
            _check_unit(getattr(self, name), name)


@dataclass(frozen=True)
class DistortionParams:
    drive_db: float
    wet: float = 1.0

    def __post_init__(self) -> None:
        if self.drive_db < 0:
            raise ValueError(f"drive_db must be >= 0, got {self.drive_db}")
        _check_unit(self.wet, "wet")


@dataclass(frozen=True)
class ResampleParams:
    """Bandwidth-limiting round trip, gated on prob >= threshold."""

    target_sr: int
    wet: float = 1.0
    prob: float = 1.0
    threshold: float = 0.4

    def __post_init__(self) -> None:
        if self.target_sr <= 0:
            raise ValueError(f"target_sr must be positive, got {self.target_sr}")
        _check_unit(self.wet, "wet")
        _check_unit(self.prob, "prob")
        _check_unit(self.threshold, "threshold")


@dataclass(frozen=True)
class FilterParams:
    filter_type: str
    cutoff_hz: float
    repeat: int = 1
    wet: float = 1.0

    def __post_init__(self) -> None:
        if self.filter_type not in ("lowpass", "highpass"):
            raise ValueError(f"filter_type must be lowpass or highpass, got {self.filter_type!r}")
        if self.cutoff_hz <= 0:
            raise ValueError(f"cutoff_hz must be positive, got {self.cutoff_hz}")
        if self.repeat < 1:
            raise ValueError(f"repeat must be >= 1, got {self.repeat}")
        _check_unit(self.wet, "wet")


@dataclass(frozen=True)
class LoudnessParams:
    target_lufs: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.target_lufs):
            raise ValueError(f"target_lufs must be finite, got {self.target_lufs}")


@dataclass(frozen=True)
class StutterParams:
    frame_ms: float
    stutter_prob: float
    repeat_prob: float
    max_repeats: int

    def __post_init__(self) -> None:
        if self.frame_ms <= 0:
            raise ValueError(f"frame_ms must be positive, got {self.frame_ms}")
        _check_unit(self.stutter_prob, "stutter_prob")
        _check_unit(self.repeat_prob, "repeat_prob")
        if self.max_repeats < 1:
            raise ValueError(f"max_repeats must be >= 1, got {self.max_repeats}")


def _tile_to_length(noise: np.ndarray, n: int) -> np.ndarray:
    if len(noise) >= n:
        return noise[:n]
    reps = -(-n // len(noise))
    return np.tile(noise, reps)[:n]


def add_noise(w: Waveform, p: NoiseParams) -> Waveform:
    """Mix a noise clip into the signal at ``noise_db`` dB SNR.

    The noise is tiled and cropped to the signal length, RMS-scaled so
    speech-RMS / noise-RMS equals 10^(noise_db/20), then added with the
    wet ratio. Raises ValueError for silent speech (SNR undefined).
    """
    if p.noise.sample_rate != w.sample_rate:
        raise ValueError(
            f"noise rate {p.noise.sample_rate} != signal rate {w.sample_rate}; resample first"
        )
    speech_rms = measure_rms(w)
    if speech_rms == 0.0:
        raise ValueError("cannot set an SNR against silent speech")
    if p.wet == 0.0:
        return w
    tiled = _tile_to_length(p.noise.samples, len(w))
    noise_rms = float(np.sqrt(np.mean(tiled * tiled)))
    if noise_rms == 0.0:
        raise ValueError("noise clip is silent")
    scale = speech_rms / (noise_rms * 10.0 ** (p.noise_db / 20.0))
    return Waveform(w.samples + p.wet * scale * tiled, w.sample_rate)


def add_echo(w: Waveform, p: EchoParams) -> Waveform:
    """Feedback delay line d[n] = x[n-D] + feedback*d[n-D], mixed and clamped."""
    if p.mix == 0.0:
        return w
    delay = max(1, int(round(p.delay_seconds * w.sample_rate)))
    # d(z)/x(z) = z^-D / (1 - feedback z^-D)
    b = np.zeros(delay + 1)
    a = np.zeros(delay + 1)
    b[delay] = 1.0
    a[0] = 1.0
    a[delay] = -p.feedback
    delayed = lfilter(b, a, w.samples)
    return Waveform(np.clip(w.samples + p.mix * delayed, -1.0, 1.0), w.sample_rate)


# Freeverb tuning: delay lengths in samples at 44.1 kHz, scaled to the
# working rate. Comb feedback maps room_size onto [0.7, 0.98].
_COMB_DELAYS_44K = (1116, 1188, 1277, 1356, 1422, 1491, 1557, 1617)
_ALLPASS_DELAYS_44K = (556, 441, 341, 225)
_ALLPASS_FEEDBACK = 0.5
_COMB_FEEDBACK_BASE = 0.7
_COMB_FEEDBACK_SPAN = 0.28


def _damped_comb(x: np.ndarray, delay: int, feedback: float, damping: float) -> np.ndarray:
    # y[n] = x[n-D] + feedback*s[n-D] with s[n] = (1-d)*y[n] + d*s[n-1]:
    # Y(z) [1 - d z^-1 - feedback (1-d) z^-D] = X(z) z^-D (1 - d z^-1)
    b = np.zeros(delay + 2)
    a = np.zeros(delay + 1)
    b[delay] = 1.0
    b[delay + 1] = -damping
    a[0] = 1.0
    a[1] = -damping
    a[delay] -= feedback * (1.0 - damping)
    return lfilter(b, a, x)


def _allpass_diffuser(x: np.ndarray, delay: int, feedback: float = _ALLPASS_FEEDBACK) -> np.ndarray:
    # y(z)/x(z) = (-1 + (1+g) z^-D) / (1 - g z^-D)
    b = np.zeros(delay + 1)
    a = np.zeros(delay + 1)
    b[0] = -1.0
    b[delay] = 1.0 + feedback
    a[0] = 1.0
    a[delay] = -feedback
    return lfilter(b, a, x)


def add_reverb(w: Waveform, p: ReverbParams) -> Waveform:
    """Freeverb topology: 8 parallel damped combs into 4 series allpasses."""
    dry = p.dry_level * w.samples
    if p.wet_level == 0.0:
        return Waveform(dry, w.sample_rate)
    feedback = _COMB_FEEDBACK_BASE + _COMB_FEEDBACK_SPAN * p.room_size
    scale = w.sample_rate / 44100.0
    tail = np.zeros_like(w.samples)
    for d44 in _COMB_DELAYS_44K:
        tail += _damped_comb(w.samples, max(1, int(round(d44 * scale))), feedback, p.damping)
    tail /= len(_COMB_DELAYS_44K)
    for d44 in _ALLPASS_DELAYS_44K:
        tail = _allpass_diffuser(tail, max(1, int(round(d44 * scale))))
    return Waveform(dry + p.wet_level * tail, w.sample_rate)


def add_distortion(w: Waveform, p: DistortionParams) -> Waveform:
    """Tanh overdrive: y = tanh(10^(drive_db/20) x), clamped and wet-mixed."""
    drive = 10.0 ** (p.drive_db / 20.0)
    saturated = np.clip(np.tanh(drive * w.samples), -1.0, 1.0)
    return Waveform((1.0 - p.wet) * w.samples + p.wet * saturated, w.sample_rate)


def add_resample(w: Waveform, p: ResampleParams) -> Waveform:
    """Down/up resample through ``target_sr`` when the prob gate opens.

    ``prob`` is the severity-resolved gate value; the effect applies iff
    prob >= threshold, otherwise the input passes through untouched. The
    round trip is padded/trimmed back to the exact input length.
    """
    if p.prob < p.threshold:
        return w
    down = resample_to(w, p.target_sr)
    back = resample_to(down, w.sample_rate)
    out = back.samples
    if len(out) > len(w):
        out = out[: len(w)]
    elif len(out) < len(w):
        out = np.pad(out, (0, len(w) - len(out)))
    if p.wet == 1.0:
        return Waveform(out, w.sample_rate)
    return Waveform((1.0 - p.wet) * w.samples + p.wet * out, w.sample_rate)


def apply_filter(w: Waveform, p: FilterParams) -> Waveform:
    """2nd-order Butterworth low/high-pass, cascaded ``repeat`` times."""
    nyquist = w.sample_rate / 2.0
    if p.cutoff_hz >= nyquist:
        raise ValueError(f"cutoff {p.cutoff_hz} Hz >= Nyquist {nyquist} Hz")
    if p.wet == 0.0:
        return w
    sos = butter(2, p.cutoff_hz, btype=p.filter_type, output="sos", fs=w.sample_rate)
    filtered = w.samples
    for _ in range(p.repeat):
        filtered = sosfilt(sos, filtered)
    return Waveform((1.0 - p.wet) * w.samples + p.wet * filtered, w.sample_rate)


def loudness_normalize(w: Waveform, target_lufs: float) -> tuple[Waveform, bool]:
    """Scale to a target integrated loudness; returns (output, clipped).

    Unmeasurable input (too short or fully gated) is returned unchanged.
    Gating can shift after the first gain, so one re-measurement
    correction pass is applied; samples are clamped only when the target
    pushes the peak past full scale, reported via the clipped flag.
    """
    measured = measure_integrated_loudness(w)
    if measured is None:
        return w, False
    gain = 10.0 ** ((target_lufs - measured) / 20.0)
    out = w.samples * gain
    remeasured = measure_integrated_loudness(Waveform(out, w.sample_rate))
    if remeasured is not None and abs(remeasured - target_lufs) > 1e-6:
        out = out * 10.0 ** ((target_lufs - remeasured) / 20.0)
    clipped = bool(np.abs(out).max(initial=0.0) > 1.0)
    if clipped:
        out = np.clip(out, -1.0, 1.0)
    return Waveform(out, w.sample_rate), clipped


def change_volume(w: Waveform, p: LoudnessParams) -> Waveform:
    """Normalize integrated loudness to ``target_lufs`` (±0.5 LU)."""
    out, _ = loudness_normalize(w, p.target_lufs)
    return out


def change_volume_distortion(w: Waveform, p: LoudnessParams) -> Waveform:
    """Loudness normalization under its chain-merge-distinct name.

    Same algorithm as :func:`change_volume`; the separate name keeps the
    distortion chain's loudness stage from being deduplicated away when
    chains are merged.
    """
    out, _ = loudness_normalize(w, p.target_lufs)
    return out


def add_stutter_replace(w: Waveform, p: StutterParams, rng: np.random.Generator) -> Waveform:
    """Replace random frame runs with the pre-event frame or silence.

    The signal is cut into frames of ``frame_ms``. Scanning in order, each
    untouched frame opens an event with probability ``stutter_prob``; the
    next r frames (r uniform in 1..max_repeats) are then replaced, each
    one copying the frame just before the event with probability
    ``repeat_prob`` and silenced otherwise. Replaced frames are skipped by
    the scan, so events never cascade. Length is always preserved; a
    trailing partial frame is left untouched.
    """
    frame_len = int(round(p.frame_ms / 1000.0 * w.sample_rate))
    if frame_len < 1 or frame_len > len(w) or p.stutter_prob == 0.0:
        return w
    n_frames = len(w) // frame_len
    out = w.samples.copy()
    i = 0
    while i < n_frames:
        if rng.random() < p.stutter_prob:
            run = min(int(rng.integers(1, p.max_repeats + 1)), n_frames - 1 - i)
            source = out[i * frame_len : (i + 1) * frame_len].copy()
            for k in range(i + 1, i + 1 + run):
                lo = k * frame_len
                if rng.random() < p.repeat_prob:
                    out[lo : lo + frame_len] = source
                else:
                    out[lo : lo + frame_len] = 0.0
            i += run + 1
        else:
            i += 1
    return Waveform(out, w.sample_rate)
