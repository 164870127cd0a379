"""Waveform handling: WAV I/O, speed resampling, and synthetic token audio.

Speed change is plain linear-interpolation resampling, so pitch scales with
the factor (a 440 Hz tone at factor 0.9 comes out at 396 Hz).  That matches
speed perturbation rather than tempo-only stretching.
"""

from __future__ import annotations

import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "Waveform",
    "SpectralSignature",
    "read_wav",
    "write_wav",
    "resample_speed",
    "synth_waveform",
    "CROSSFADE_MS",
]

CROSSFADE_MS = 5.0


@dataclass
class Waveform:
    """Single-channel audio: float64 samples at a fixed rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.samples.ndim != 1:
            raise ValueError(f"expected mono samples, got shape {self.samples.shape}")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("waveform contains non-finite samples")

    @property
    def duration(self):
        return len(self.samples) / self.sample_rate

    def __len__(self):
        return len(self.samples)


@dataclass(frozen=True)
class SpectralSignature:
    """The chord a synthetic token is rendered as: partial frequencies (Hz)
    with relative amplitudes."""

    freqs: tuple[float, ...]
    amps: tuple[float, ...]

    def __post_init__(self):
        if len(self.freqs) != len(self.amps) or not self.freqs:
            raise ValueError("signature needs matching, non-empty freqs and amps")


def read_wav(path):
    """Read a mono 16-bit PCM WAV file into float64 samples in [-1, 1)."""
    with wave.open(str(path), "rb") as fh:
        if fh.getnchannels() != 1 or fh.getsampwidth() != 2:
            raise ValueError(
                f"{path}: expected mono 16-bit PCM, got "
                f"{fh.getnchannels()} channel(s) at {8 * fh.getsampwidth()} bits"
            )
        rate = fh.getframerate()
        raw = fh.readframes(fh.getnframes())
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    return Waveform(samples, rate)


def write_wav(path, waveform):
    """Write float samples as mono 16-bit PCM (values clipped to [-1, 1))."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    clipped = np.clip(waveform.samples, -1.0, 32767.0 / 32768.0)
    pcm = np.round(clipped * 32768.0).astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(waveform.sample_rate)
        fh.writeframes(pcm.tobytes())


def resample_speed(waveform, factor):
    """Change playback speed by ``factor`` via linear interpolation.

    Output length is round(len / factor); factor < 1 slows the audio down
    and lowers pitch proportionally.
    """
    if not 0.5 <= factor <= 2.0:
        raise ValueError(f"speed factor must be in [0.5, 2.0], got {factor}")
    if factor == 1.0:
        return Waveform(waveform.samples.copy(), waveform.sample_rate)
    n_in = len(waveform.samples)
    n_out = int(np.floor(n_in / factor + 0.5))
    positions = np.arange(n_out) * factor
    samples = np.interp(positions, np.arange(n_in), waveform.samples)
    return Waveform(samples, waveform.sample_rate)


def synth_waveform(tokens, signatures, rate, sample_rate, seed, snr_db=30.0):
    """Render a token sequence as abutted chords with 5 ms crossfades.

    Each token must have a signature; adjacent tokens overlap by the
    crossfade with linear ramps, and Gaussian noise is added at ``snr_db``.
    Fully deterministic for a given seed.
    """
    tokens = list(tokens)
    if not tokens:
        return Waveform(np.zeros(0), sample_rate)
    for tok in tokens:
        if tok not in signatures:
            raise KeyError(f"no spectral signature assigned for token {tok!r}")
    tok_len = int(round(sample_rate / rate))
    fade = int(round(CROSSFADE_MS / 1000.0 * sample_rate))
    if tok_len <= fade:
        raise ValueError(
            f"token rate {rate}/s leaves {tok_len} samples per token, "
            f"shorter than the {fade}-sample crossfade"
        )
    total = len(tokens) * tok_len - (len(tokens) - 1) * fade
    out = np.zeros(total)
    t = np.arange(tok_len) / sample_rate
    for k, tok in enumerate(tokens):
        sig = signatures[tok]
        chunk = np.zeros(tok_len)
        for f, a in zip(sig.freqs, sig.amps):
            chunk += a * np.sin(2.0 * np.pi * f * t)
        peak = np.max(np.abs(chunk))
        if peak > 0:
            chunk *= 0.3 / peak
        if k > 0:
            chunk[:fade] *= np.linspace(0.0, 1.0, fade)
        if k < len(tokens) - 1:
            chunk[tok_len - fade :] *= np.linspace(1.0, 0.0, fade)
        start = k * (tok_len - fade)
        out[start : start + tok_len] += chunk
    power = np.mean(out**2)
    if power > 0 and np.isfinite(snr_db):
        rng = np.random.default_rng(seed)
        sigma = np.sqrt(power / (10.0 ** (snr_db / 10.0)))
        out = out + rng.normal(0.0, sigma, size=total)
    return Waveform(out, sample_rate)
