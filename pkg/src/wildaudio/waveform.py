"""Mono waveform container, WAV file I/O, resampling and RMS measurement.

All audio in this package is represented as a :class:`Waveform`: a 1-D
float64 sample buffer in [-1, 1] plus a sample rate. WAV support is
deliberately narrow (PCM 16-bit and IEEE float32 in, PCM 16-bit out);
multichannel input is downmixed to mono by channel averaging.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import firwin, resample_poly

__all__ = [
    "Waveform",
    "AudioIOError",
    "UnreadableFileError",
    "UnsupportedFormatError",
    "EmptyAudioError",
    "load_wav",
    "save_wav",
    "resample_to",
    "measure_rms",
]

PCM16_SCALE = 32768.0


class AudioIOError(Exception):
    """Base class for WAV read/write failures."""


class UnreadableFileError(AudioIOError):
    """File is missing, not readable, or not a RIFF/WAVE container."""


class UnsupportedFormatError(AudioIOError):
    """Valid WAV container with an encoding this package does not read."""


class EmptyAudioError(AudioIOError):
    """WAV file contains zero samples."""


@dataclass(frozen=True)
class Waveform:
    """Immutable mono sample buffer with its sample rate in Hz."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError(f"samples must be 1-D, got shape {samples.shape}")
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        """Length in seconds."""
        return len(self.samples) / self.sample_rate


def _parse_wav_chunks(raw: bytes, path: Path):
    if len(raw) < 12 or raw[:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise UnreadableFileError(f"{path}: not a RIFF/WAVE file")
    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(raw):
        chunk_id = raw[pos : pos + 4]
        (size,) = struct.unpack_from("<I", raw, pos + 4)
        body = raw[pos + 8 : pos + 8 + size]
        if chunk_id == b"fmt ":
            fmt = body
        elif chunk_id == b"data":
            data = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned
    if fmt is None or data is None:
        raise UnreadableFileError(f"{path}: missing fmt or data chunk")
    return fmt, data


def load_wav(path: str | Path) -> Waveform:
    """Read a WAV file as a mono Waveform at its native rate.

    Accepts PCM 16-bit and IEEE float32, any channel count; channels are
    averaged into one. Integer samples are scaled by 1/32768 so full-scale
    positive PCM16 maps to 32767/32768.

    Raises ``UnreadableFileError``, ``UnsupportedFormatError`` or
    ``EmptyAudioError``.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise UnreadableFileError(f"{path}: {exc}") from exc

    fmt, data = _parse_wav_chunks(raw, path)
    if len(fmt) < 16:
        raise UnreadableFileError(f"{path}: truncated fmt chunk")
    audio_format, n_channels, sample_rate, _, _, bits = struct.unpack_from("<HHIIHH", fmt, 0)
    if n_channels < 1 or sample_rate <= 0:
        raise UnreadableFileError(f"{path}: invalid fmt chunk")

    if audio_format == 1 and bits == 16:
        ints = np.frombuffer(data[: len(data) - len(data) % 2], dtype="<i2")
        samples = ints.astype(np.float64) / PCM16_SCALE
    elif audio_format == 3 and bits == 32:
        samples = np.frombuffer(data[: len(data) - len(data) % 4], dtype="<f4").astype(np.float64)
    else:
        raise UnsupportedFormatError(
            f"{path}: format tag {audio_format} with {bits} bits not supported "
            "(PCM 16-bit or IEEE float32 only)"
        )

    frames = len(samples) // n_channels
    if frames == 0:
        raise EmptyAudioError(f"{path}: zero-length audio")
    samples = samples[: frames * n_channels].reshape(frames, n_channels).mean(axis=1)
    return Waveform(samples, int(sample_rate))


def save_wav(w: Waveform, path: str | Path) -> None:
    """Write a Waveform as PCM 16-bit little-endian WAV, clamping to [-1, 1]."""
    path = Path(path)
    clamped = np.clip(w.samples, -1.0, 1.0)
    ints = np.round(clamped * PCM16_SCALE).astype(np.int64)
    ints = np.clip(ints, -32768, 32767).astype("<i2")
    data = ints.tobytes()
    fmt = struct.pack("<HHIIHH", 1, 1, w.sample_rate, w.sample_rate * 2, 2, 16)
    body = b"fmt " + struct.pack("<I", len(fmt)) + fmt + b"data" + struct.pack("<I", len(data)) + data
    try:
        path.write_bytes(b"RIFF" + struct.pack("<I", 4 + len(body)) + b"WAVE" + body)
    except OSError as exc:
        raise UnreadableFileError(f"{path}: {exc}") from exc


# Anti-aliasing lowpass: Kaiser windowed sinc, 32 taps per polyphase branch.
_TAPS_PER_PHASE = 32
_KAISER_BETA = 8.0


def resample_to(w: Waveform, target_rate: int) -> Waveform:
    """Resample to ``target_rate`` via polyphase windowed-sinc filtering.

    Identity when the rate already matches. Output length is
    round(len * target / source); energy above the smaller Nyquist is
    suppressed by the Kaiser design well past 40 dB.
    """
    if target_rate <= 0:
        raise ValueError(f"target_rate must be positive, got {target_rate}")
    if target_rate == w.sample_rate:
        return w
    g = math.gcd(w.sample_rate, target_rate)
    up, down = target_rate // g, w.sample_rate // g
    max_rate = max(up, down)
    h = firwin(_TAPS_PER_PHASE * max_rate + 1, 1.0 / max_rate, window=("kaiser", _KAISER_BETA))
    out = resample_poly(w.samples, up, down, window=h)
    n_out = int(round(len(w.samples) * target_rate / w.sample_rate))
    if len(out) > n_out:
        out = out[:n_out]
    elif len(out) < n_out:
        out = np.pad(out, (0, n_out - len(out)))
    return Waveform(out, target_rate)


def measure_rms(w: Waveform) -> float:
    """Root-mean-square amplitude. Raises ValueError on empty input."""
    if len(w.samples) == 0:
        raise ValueError("RMS of empty waveform is undefined")
    return float(np.sqrt(np.mean(w.samples * w.samples)))
