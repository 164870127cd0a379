"""Log-mel filterbank front-end.

Pipeline per frame: pre-emphasis 0.97, Hann window, magnitude DFT,
triangular mel filterbank spanning [0, sample_rate/2], natural log with a
1e-10 floor.  Frame count is 1 + floor((N - frame) / shift).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

__all__ = ["FeatureMatrix", "logmel_features", "mel_filterbank", "LogMelExtractor"]

PREEMPHASIS = 0.97
LOG_FLOOR = 1e-10


@dataclass
class FeatureMatrix:
    """A frames x n_mels matrix of log-mel energies plus its framing."""

    values: np.ndarray
    frame_length_ms: float
    frame_shift_ms: float

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.shape[0] < 1:
            raise ValueError(f"expected (frames, n_mels) with frames >= 1, got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("feature matrix contains non-finite values")

    @property
    def n_frames(self):
        return self.values.shape[0]

    @property
    def n_mels(self):
        return self.values.shape[1]


def _hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def _mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_mels, n_fft, sample_rate):
    """Triangular filters (peak height 1) over the rfft bins of an n_fft DFT."""
    n_bins = n_fft // 2 + 1
    edges_mel = np.linspace(_hz_to_mel(0.0), _hz_to_mel(sample_rate / 2.0), n_mels + 2)
    edges_hz = _mel_to_hz(edges_mel)
    bin_hz = np.arange(n_bins) * sample_rate / n_fft
    bank = np.zeros((n_mels, n_bins))
    for k in range(n_mels):
        lo, center, hi = edges_hz[k], edges_hz[k + 1], edges_hz[k + 2]
        rising = (bin_hz - lo) / (center - lo)
        falling = (hi - bin_hz) / (hi - center)
        bank[k] = np.clip(np.minimum(rising, falling), 0.0, None)
    return bank


def band_center_hz(band, n_mels, sample_rate):
    """Center frequency of one mel band (handy for synthesizing probes)."""
    edges_mel = np.linspace(_hz_to_mel(0.0), _hz_to_mel(sample_rate / 2.0), n_mels + 2)
    return float(_mel_to_hz(edges_mel[band + 1]))


def logmel_features(waveform, n_mels=40, frame_length_ms=25.0, frame_shift_ms=10.0):
    """Extract a log-mel FeatureMatrix from a waveform.

    Rejects input shorter than one frame.
    """
    sr = waveform.sample_rate
    frame = int(round(frame_length_ms / 1000.0 * sr))
    shift = int(round(frame_shift_ms / 1000.0 * sr))
    x = waveform.samples
    if len(x) < frame:
        raise ValueError(f"waveform of {len(x)} samples is shorter than one {frame}-sample frame")
    emphasized = np.empty_like(x)
    emphasized[0] = x[0]
    emphasized[1:] = x[1:] - PREEMPHASIS * x[:-1]
    n_frames = 1 + (len(x) - frame) // shift
    offsets = np.arange(n_frames) * shift
    frames = np.lib.stride_tricks.sliding_window_view(emphasized, frame)[offsets]
    window = np.hanning(frame)
    spectra = np.abs(np.fft.rfft(frames * window, axis=1))
    bank = mel_filterbank(n_mels, frame, sr)
    energies = spectra @ bank.T
    values = np.log(np.maximum(energies, LOG_FLOOR))
    return FeatureMatrix(values, frame_length_ms, frame_shift_ms)


@dataclass
class LogMelExtractor(BaseEstimator, TransformerMixin):
    """Stateless sklearn-style transformer from waveforms to log-mel matrices."""

    n_mels: int = 40
    frame_length_ms: float = 25.0
    frame_shift_ms: float = 10.0

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        return [
            logmel_features(w, self.n_mels, self.frame_length_ms, self.frame_shift_ms) for w in X
        ]
