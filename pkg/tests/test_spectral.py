import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from harmtrack import (
    ComplexSignal,
    ModelStructure,
    dft_magnitude,
    initialize_from_spectrum,
)
from harmtrack.errors import InitializationError, InvalidFFTSizeError

from conftest import FS, first_segment

REF_PEAKS = {60.0: 0.7, 65.0: 0.3, 70.0: 0.2, 75.0: 0.1, 120.0: 0.6, 180.0: 0.5, 240.0: 0.4}


def test_dc_signal():
    spec = dft_magnitude(ComplexSignal(np.ones(64), FS))
    dc = spec.bin_frequencies == 0
    assert spec.magnitudes[dc] == pytest.approx([1.0], abs=1e-12)
    assert np.all(spec.magnitudes[~dc] <= 1e-12)


def test_bin_aligned_tone():
    n = np.arange(1000)
    spec = dft_magnitude(ComplexSignal(np.exp(2j * np.pi * 60 * n / FS), FS), 1000)
    at60 = spec.bin_frequencies == 60.0
    assert spec.magnitudes[at60] == pytest.approx([1.0], abs=1e-12)
    assert np.all(spec.magnitudes[~at60] <= 1e-12)


def test_reference_peaks(clean_reference):
    spec = dft_magnitude(clean_reference[0], 1000)
    found = dict(spec.peaks(1e-9))
    assert set(found) == set(REF_PEAKS)
    for f, a in REF_PEAKS.items():
        assert found[f] == pytest.approx(a, abs=1e-9)


def test_bins_centered_and_increasing():
    for n_fft in (8, 9, 1000):
        spec = dft_magnitude(ComplexSignal(np.ones(8), FS), n_fft)
        f = spec.bin_frequencies
        assert len(f) == len(spec.magnitudes) == n_fft
        assert np.all(np.diff(f) > 0)
        assert f[0] >= -FS / 2 and f[-1] < FS / 2


def test_fft_size_too_small():
    with pytest.raises(InvalidFFTSizeError):
        dft_magnitude(ComplexSignal(np.ones(10), FS), 9)


signals = st.lists(
    st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=1, max_size=200
)


@given(signals)
def test_parseval(xs):
    x = ComplexSignal(xs, FS)
    spec = dft_magnitude(x)
    power = np.mean(np.abs(x.samples) ** 2)
    assert np.sum(spec.magnitudes**2) == pytest.approx(power, rel=1e-9, abs=1e-300)


@given(signals, st.floats(-np.pi, np.pi))
def test_global_phase_leaves_magnitudes(xs, phi):
    x = ComplexSignal(xs, FS)
    a = dft_magnitude(x).magnitudes
    b = dft_magnitude(x.with_samples(np.exp(1j * phi) * x.samples)).magnitudes
    np.testing.assert_allclose(a, b, atol=1e-12 * max(1.0, a.max()))


def test_init_reference_segment(clean_reference):
    signal, truth, structure = clean_reference
    p = initialize_from_spectrum(first_segment(signal), structure, (40, 80), (1, 20))
    assert abs(p.f0_hz(FS) - 60) <= 1
    assert abs(p.fc_hz(FS) - 5) <= 1
    assert set(p.phasors) == set(structure.keys())


def test_init_pure_tone():
    n = np.arange(1000)
    x = ComplexSignal(0.9 * np.exp(2j * np.pi * 60 * n / FS), FS)
    p = initialize_from_spectrum(x, ModelStructure(), (40, 80), (1, 20))
    assert p.f0_hz(FS) == pytest.approx(60.0, abs=1e-12)


def test_init_lower_sidebands():
    n = np.arange(500)
    x = np.exp(2j * np.pi * 50 * n / FS) + 0.3 * np.exp(2j * np.pi * 42 * n / FS)
    p = initialize_from_spectrum(ComplexSignal(x, FS), ModelStructure((), (-1,)), (40, 60), (2, 15))
    assert p.f0_hz(FS) == pytest.approx(50.0, abs=1e-9)
    # neighbouring leakage can shift the sideband peak by one padded bin
    assert abs(p.fc_hz(FS) - 8.0) <= FS / (4 * 500)


def test_init_all_zero_fails(clean_reference):
    with pytest.raises(InitializationError):
        initialize_from_spectrum(ComplexSignal(np.zeros(250), FS), clean_reference[2])


def test_init_rejects_bad_ranges(clean_reference):
    signal, _, structure = clean_reference
    with pytest.raises(ValueError):
        initialize_from_spectrum(first_segment(signal), structure, (80, 40))
