import numpy as np
import pytest

from wildaudio.waveform import Waveform


def make_sine(freq: float, duration: float, rate: int, amp: float = 1.0) -> Waveform:
    t = np.arange(int(round(duration * rate))) / rate
    return Waveform(amp * np.sin(2 * np.pi * freq * t), rate)


def make_speech_like(duration: float = 3.0, rate: int = 16000, seed: int = 0, peak: float = 0.3) -> Waveform:
    """Harmonic stack with pitch wobble and syllable-rate modulation.

    Loudness-measurable, broadband enough to exercise filters, and cheap
    to generate; a stand-in for real speech in DSP oracles.
    """
    rng = np.random.default_rng(seed)
    n = int(round(duration * rate))
    t = np.arange(n) / rate
    f0 = 120.0 + 20.0 * np.sin(2 * np.pi * 0.5 * t)
    phase = 2 * np.pi * np.cumsum(f0) / rate
    sig = sum(np.sin(k * phase) / k for k in range(1, 6))
    sig *= 0.55 + 0.45 * np.sin(2 * np.pi * 3.1 * t + 1.0)
    sig += 0.02 * rng.standard_normal(n)
    sig *= peak / np.abs(sig).max()
    return Waveform(sig, rate)


def band_energy(w: Waveform, freq: float, bandwidth: float = 60.0) -> float:
    """Linear spectral energy within +/- bandwidth of a frequency."""
    spectrum = np.abs(np.fft.rfft(w.samples))
    freqs = np.fft.rfftfreq(len(w.samples), 1.0 / w.sample_rate)
    mask = (freqs >= freq - bandwidth) & (freqs <= freq + bandwidth)
    return float(np.sqrt(np.sum(spectrum[mask] ** 2)))


def attenuation_db(before: Waveform, after: Waveform, freq: float) -> float:
    """Band energy change in dB; negative means attenuated."""
    return 20.0 * np.log10(band_energy(after, freq) / band_energy(before, freq))


@pytest.fixture
def speech_3s() -> Waveform:
    return make_speech_like(3.0)
