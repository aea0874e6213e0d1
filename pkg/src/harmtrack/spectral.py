"""Magnitude spectra and spectrum-based starting values."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InitializationError, InvalidFFTSizeError
from .estimation import solve_phasors_ls
from .signal_model import ComplexSignal, ModelParams, ModelStructure, hz_to_omega

__all__ = ["Spectrum", "dft_magnitude", "initialize_from_spectrum", "ZERO_PAD_FACTOR"]

ZERO_PAD_FACTOR = 4


@dataclass(frozen=True, eq=False)
class Spectrum:
    bin_frequencies: np.ndarray
    magnitudes: np.ndarray
    n_fft: int

    def peaks(self, threshold: float) -> list[tuple[float, float]]:
        """(frequency, magnitude) of every local maximum above ``threshold``."""
        m = self.magnitudes
        padded = np.concatenate([[-np.inf], m, [-np.inf]])
        is_peak = (m > padded[:-2]) & (m >= padded[2:]) & (m > threshold)
        return [(float(f), float(a)) for f, a in zip(self.bin_frequencies[is_peak], m[is_peak])]


def dft_magnitude(signal: ComplexSignal, n_fft: int | None = None) -> Spectrum:
    """|DFT| / N of the zero-padded signal, bins ordered from -fs/2 upwards.

    No window is applied, so a bin-aligned tone of amplitude A shows up as a
    single bin of height A.
    """
    N = len(signal)
    n_fft = N if n_fft is None else int(n_fft)
    if n_fft < N:
        raise InvalidFFTSizeError(f"n_fft={n_fft} is shorter than the signal ({N} samples)")
    X = np.fft.fftshift(np.fft.fft(signal.samples, n_fft)) / N
    freqs = (np.arange(n_fft) - n_fft // 2) * signal.sample_rate / n_fft
    return Spectrum(freqs, np.abs(X), n_fft)


def _check_range(rng, fs, name):
    lo, hi = float(rng[0]), float(rng[1])
    if not (0 < lo < hi < fs / 2):
        raise ValueError(f"{name} must satisfy 0 < low < high < fs/2, got ({lo}, {hi})")
    return lo, hi


def initialize_from_spectrum(
    segment: ComplexSignal,
    structure: ModelStructure,
    f0_search: tuple[float, float] = (40.0, 80.0),
    fc_search: tuple[float, float] = (1.0, 20.0),
) -> ModelParams:
    """Starting point from the zero-padded spectrum of ``segment``.

    f0 is the strongest bin inside ``f0_search``. fc is the distance from f0
    to the strongest local peak inside f0 + ``fc_search`` (and f0 - fc_search
    when the structure has lower sidebands). Phasors are then fitted by least
    squares at those frequencies.
    """
    fs = segment.sample_rate
    f0_lo, f0_hi = _check_range(f0_search, fs, "f0_search")
    fc_lo, fc_hi = _check_range(fc_search, fs, "fc_search")
    spec = dft_magnitude(segment, ZERO_PAD_FACTOR * len(segment))
    f, m = spec.bin_frequencies, spec.magnitudes
    floor = float(np.median(m))

    in_f0 = (f >= f0_lo) & (f <= f0_hi)
    if not np.any(in_f0 & (m > floor)):
        raise InitializationError(
            f"no spectral peak above the median magnitude in f0 range [{f0_lo}, {f0_hi}] Hz"
        )
    idx = np.flatnonzero(in_f0)
    f0 = float(f[idx[np.argmax(m[idx])]])

    ks = structure.interharmonic_indices
    if ks:
        offsets = []
        if any(k > 0 for k in ks):
            offsets += [(f0 + fc_lo, f0 + fc_hi)]
        if any(k < 0 for k in ks):
            offsets += [(f0 - fc_hi, f0 - fc_lo)]
        candidates = [
            (a, pf) for pf, a in spec.peaks(floor)
            if any(lo <= pf <= hi for lo, hi in offsets)
        ]
        if not candidates:
            raise InitializationError(
                f"no sideband peak above the median magnitude within {fc_lo}-{fc_hi} Hz of f0"
            )
        fc = abs(max(candidates)[1] - f0)
    else:
        fc = 0.5 * (fc_lo + fc_hi)

    w0, wc = hz_to_omega(f0, fs), hz_to_omega(fc, fs)
    return ModelParams(w0, wc, solve_phasors_ls(segment, w0, wc, structure))
