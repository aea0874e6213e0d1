"""Flat CSV files for signals, spectra, traces, parameters and reports.

Reals are written with 17 significant digits, which round-trips IEEE
doubles exactly. Lines end with ``\\n`` so identical inputs give
byte-identical files.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import CSVFormatError
from .signal_model import ComplexSignal, ComponentKey, ModelParams, hz_to_omega
from .spectral import Spectrum
from .tracking import COMPONENT_NAMES, ComponentDecomposition
from .validation import MonteCarloReport

SIGNAL_HEADER = ("index", "real", "imag")
SPECTRUM_HEADER = ("freq_hz", "magnitude")
TRACE_HEADER = ("iteration", "loss")
PARAMS_HEADER = ("name", "value_real", "value_imag")
MONTECARLO_HEADER = ("segment", "parameter", "rmse", "divergence_count")
DECOMPOSITION_HEADER = ("index",) + tuple(
    f"{name}_{part}" for name in COMPONENT_NAMES for part in ("real", "imag")
)


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _read(path, header: Sequence[str], converters: Sequence[Callable]) -> list[tuple]:
    path = str(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise CSVFormatError(path, 1, "empty file") from None
        if tuple(first) != tuple(header):
            raise CSVFormatError(path, 1, f"expected header {','.join(header)!r}, got {','.join(first)!r}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise CSVFormatError(path, lineno, f"expected {len(header)} fields, got {len(row)}")
            try:
                rows.append(tuple(conv(v) for conv, v in zip(converters, row)))
            except ValueError as exc:
                raise CSVFormatError(path, lineno, str(exc)) from None
    return rows


def write_signal_csv(path, signal: ComplexSignal) -> None:
    x = signal.samples
    _write(path, SIGNAL_HEADER, ((n, fmt(v.real), fmt(v.imag)) for n, v in enumerate(x)))


def read_signal_csv(path, sample_rate: float) -> ComplexSignal:
    rows = _read(path, SIGNAL_HEADER, (int, float, float))
    for i, (n, _, _) in enumerate(rows):
        if n != i:
            raise CSVFormatError(str(path), i + 2, f"expected index {i}, got {n}")
    if not rows:
        raise CSVFormatError(str(path), 2, "no samples")
    x = np.empty(len(rows), dtype=np.complex128)
    x.real = [r[1] for r in rows]
    x.imag = [r[2] for r in rows]
    return ComplexSignal(x, sample_rate)


def write_spectrum_csv(path, spectrum: Spectrum) -> None:
    _write(
        path, SPECTRUM_HEADER,
        ((fmt(f), fmt(m)) for f, m in zip(spectrum.bin_frequencies, spectrum.magnitudes)),
    )


def read_spectrum_csv(path) -> Spectrum:
    rows = _read(path, SPECTRUM_HEADER, (float, float))
    f = np.array([r[0] for r in rows])
    m = np.array([r[1] for r in rows])
    return Spectrum(f, m, len(rows))


def write_trace_csv(path, loss_history: Sequence[float]) -> None:
    _write(path, TRACE_HEADER, ((i, fmt(v)) for i, v in enumerate(loss_history, start=1)))


def read_trace_csv(path) -> np.ndarray:
    return np.array([r[1] for r in _read(path, TRACE_HEADER, (int, float))])


def write_params_csv(path, params: ModelParams, sample_rate: float) -> None:
    """Frequencies go out in Hz (imaginary column 0), phasors as complex."""
    rows = [
        ("f0_hz", fmt(params.f0_hz(sample_rate)), fmt(0.0)),
        ("fc_hz", fmt(params.fc_hz(sample_rate)), fmt(0.0)),
    ]
    for key, c in sorted(params.phasors.items(), key=lambda kv: _key_order(kv[0])):
        rows.append((f"c_{key.name}", fmt(c.real), fmt(c.imag)))
    _write(path, PARAMS_HEADER, rows)


def _key_order(key: ComponentKey):
    return (("fundamental", "harmonic", "interharmonic").index(key.kind), key.index)


def read_params_csv(path, sample_rate: float) -> ModelParams:
    rows = _read(path, PARAMS_HEADER, (str, float, float))
    values = {name: complex(re, im) for name, re, im in rows}
    try:
        f0, fc = values.pop("f0_hz").real, values.pop("fc_hz").real
    except KeyError as exc:
        raise CSVFormatError(str(path), 2, f"missing row {exc.args[0]}") from None
    phasors = {}
    for name, c in values.items():
        if not name.startswith("c_"):
            raise CSVFormatError(str(path), 2, f"unknown parameter {name!r}")
        phasors[ComponentKey.from_name(name[2:])] = c
    return ModelParams(hz_to_omega(f0, sample_rate), hz_to_omega(fc, sample_rate), phasors)


def write_decomposition_csv(path, parts: ComponentDecomposition) -> None:
    cols = [sig.samples for _, sig in parts.items()]
    M = cols[0].size

    def row(n):
        out = [n]
        for c in cols:
            out += [fmt(c[n].real), fmt(c[n].imag)]
        return out

    _write(path, DECOMPOSITION_HEADER, (row(n) for n in range(M)))


def read_decomposition_csv(path) -> dict[str, np.ndarray]:
    conv = (int,) + (float,) * (len(DECOMPOSITION_HEADER) - 1)
    rows = np.array([r[1:] for r in _read(path, DECOMPOSITION_HEADER, conv)]).reshape(-1, len(conv) - 1)
    out = {}
    for i, name in enumerate(COMPONENT_NAMES):
        z = np.empty(len(rows), dtype=np.complex128)
        z.real, z.imag = rows[:, 2 * i], rows[:, 2 * i + 1]
        out[name] = z
    return out


def write_montecarlo_csv(path, report: MonteCarloReport) -> None:
    rows = []
    for s, seg in enumerate(report.per_segment):
        for name, value in seg.rows():
            rows.append((s, name, fmt(value), seg.divergence_count))
    _write(path, MONTECARLO_HEADER, rows)


def read_montecarlo_csv(path) -> list[tuple[int, str, float, int]]:
    return _read(path, MONTECARLO_HEADER, (int, str, float, int))
