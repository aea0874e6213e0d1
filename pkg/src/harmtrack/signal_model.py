"""Structured multi-sinusoid current model.

A current segment is modelled as

    y[n] = c_f e^{j w0 n}                      (fundamental)
         + sum_l c_l e^{j l w0 n}               (harmonics, l >= 2)
         + sum_k c_k e^{j (w0 + k wc) n}        (interharmonics, k != 0)
         + b[n]                                 (residual / noise)

Frequencies are kept in rad/sample everywhere inside the package; Hz only
appears at the I/O boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    EmptyInputError,
    FrequencyOutOfRangeError,
    InvalidParamsError,
    InvalidSignalError,
    InvalidStructureError,
)

__all__ = [
    "ComplexSignal",
    "ComponentKey",
    "FUNDAMENTAL",
    "ModelStructure",
    "ModelParams",
    "NoiseSpec",
    "SignalRecipe",
    "hz_to_omega",
    "omega_to_hz",
    "frequency_grid",
    "build_vandermonde",
    "synthesize",
    "add_noise",
    "reference_signal",
]


def hz_to_omega(freq_hz: float, sample_rate: float) -> float:
    return 2.0 * math.pi * freq_hz / sample_rate


def omega_to_hz(omega: float, sample_rate: float) -> float:
    return omega * sample_rate / (2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class ComplexSignal:
    """Uniformly sampled complex current (amperes) at ``sample_rate`` Hz.

    The sample buffer is copied and frozen on construction.
    """

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        x = np.array(self.samples, dtype=np.complex128).reshape(-1)
        if x.size < 1:
            raise InvalidSignalError("signal must contain at least one sample")
        if not np.all(np.isfinite(x)):
            raise InvalidSignalError("signal samples must be finite")
        rate = float(self.sample_rate)
        if not (math.isfinite(rate) and rate > 0):
            raise InvalidSignalError(f"sample_rate must be positive, got {self.sample_rate}")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "sample_rate", rate)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate

    def with_samples(self, samples: np.ndarray) -> "ComplexSignal":
        return ComplexSignal(samples, self.sample_rate)


@dataclass(frozen=True, order=True)
class ComponentKey:
    """Identifies one modelled component: the fundamental, harmonic ``l`` or
    interharmonic ``k``."""

    kind: str
    index: int

    _KINDS = ("fundamental", "harmonic", "interharmonic")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown component kind {self.kind!r}")

    @classmethod
    def harmonic(cls, l: int) -> "ComponentKey":
        return cls("harmonic", int(l))

    @classmethod
    def interharmonic(cls, k: int) -> "ComponentKey":
        return cls("interharmonic", int(k))

    @property
    def name(self) -> str:
        if self.kind == "fundamental":
            return "fundamental"
        return f"{self.kind}_{self.index}"

    @classmethod
    def from_name(cls, name: str) -> "ComponentKey":
        if name == "fundamental":
            return FUNDAMENTAL
        kind, sep, idx = name.rpartition("_")
        if not sep or kind not in ("harmonic", "interharmonic"):
            raise ValueError(f"not a component name: {name!r}")
        return cls(kind, int(idx))

    def __str__(self) -> str:
        return self.name


FUNDAMENTAL = ComponentKey("fundamental", 1)


def _index_tuple(values: Iterable[int], what: str) -> tuple[int, ...]:
    out = []
    for v in values:
        if isinstance(v, bool) or int(v) != v:
            raise InvalidStructureError(f"{what} indices must be integers, got {v!r}")
        out.append(int(v))
    if len(set(out)) != len(out):
        raise InvalidStructureError(f"duplicate {what} index in {out}")
    return tuple(sorted(out))


@dataclass(frozen=True)
class ModelStructure:
    """Which harmonic orders ``l`` (>= 2) and interharmonic orders ``k`` (!= 0)
    are modelled. The fundamental is always present. Indices are stored
    sorted ascending."""

    harmonic_indices: tuple[int, ...] = ()
    interharmonic_indices: tuple[int, ...] = ()

    def __post_init__(self):
        h = _index_tuple(self.harmonic_indices, "harmonic")
        i = _index_tuple(self.interharmonic_indices, "interharmonic")
        if any(l < 2 for l in h):
            raise InvalidStructureError(f"harmonic indices must be >= 2, got {h}")
        if 0 in i:
            raise InvalidStructureError("interharmonic index 0 duplicates the fundamental")
        object.__setattr__(self, "harmonic_indices", h)
        object.__setattr__(self, "interharmonic_indices", i)

    @property
    def n_components(self) -> int:
        return 1 + len(self.harmonic_indices) + len(self.interharmonic_indices)

    def keys(self) -> tuple[ComponentKey, ...]:
        """Component keys in model-column order."""
        return (
            (FUNDAMENTAL,)
            + tuple(ComponentKey.harmonic(l) for l in self.harmonic_indices)
            + tuple(ComponentKey.interharmonic(k) for k in self.interharmonic_indices)
        )

    def omega0_weights(self) -> np.ndarray:
        """d(omega_u)/d(omega0) for every column."""
        return np.array(
            [1.0]
            + [float(l) for l in self.harmonic_indices]
            + [1.0] * len(self.interharmonic_indices)
        )

    def omegac_weights(self) -> np.ndarray:
        """d(omega_u)/d(omegac) for every column."""
        return np.array(
            [0.0] * (1 + len(self.harmonic_indices))
            + [float(k) for k in self.interharmonic_indices]
        )

    def omegas(self, omega0: float, omegac: float) -> np.ndarray:
        return self.omega0_weights() * omega0 + self.omegac_weights() * omegac

    def kind_mask(self, kind: str) -> np.ndarray:
        return np.array([key.kind == kind for key in self.keys()])


@dataclass(frozen=True)
class ModelParams:
    """Fundamental/fault angular frequencies (rad/sample) plus one complex
    phasor per modelled component."""

    omega0: float
    omegac: float
    phasors: Mapping[ComponentKey, complex]

    def __post_init__(self):
        w0, wc = float(self.omega0), float(self.omegac)
        if not (0.0 < w0 < math.pi):
            raise InvalidParamsError(f"omega0 must lie in (0, pi), got {w0}")
        if not (0.0 < wc < w0):
            raise InvalidParamsError(f"omegac must lie in (0, omega0), got {wc}")
        ph = {}
        for key, value in self.phasors.items():
            c = complex(value)
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise InvalidParamsError(f"phasor {key} is not finite")
            ph[key] = c
        object.__setattr__(self, "omega0", w0)
        object.__setattr__(self, "omegac", wc)
        object.__setattr__(self, "phasors", MappingProxyType(ph))

    @classmethod
    def from_vector(
        cls, omega0: float, omegac: float, structure: ModelStructure, phasors: Sequence[complex]
    ) -> "ModelParams":
        keys = structure.keys()
        if len(phasors) != len(keys):
            raise InvalidParamsError(
                f"expected {len(keys)} phasors for this structure, got {len(phasors)}"
            )
        return cls(omega0, omegac, dict(zip(keys, (complex(c) for c in phasors))))

    @classmethod
    def from_hz(
        cls,
        f0: float,
        fc: float,
        sample_rate: float,
        phasors: Mapping[ComponentKey, complex],
    ) -> "ModelParams":
        return cls(hz_to_omega(f0, sample_rate), hz_to_omega(fc, sample_rate), phasors)

    def check(self, structure: ModelStructure) -> None:
        """Raise unless the phasor map matches ``structure`` exactly."""
        expected = set(structure.keys())
        got = set(self.phasors)
        if expected != got:
            missing = sorted(str(k) for k in expected - got)
            extra = sorted(str(k) for k in got - expected)
            raise InvalidParamsError(f"phasor keys mismatch: missing={missing}, extra={extra}")

    def phasor_vector(self, structure: ModelStructure) -> np.ndarray:
        self.check(structure)
        return np.array([self.phasors[k] for k in structure.keys()], dtype=np.complex128)

    def replace(self, *, omega0=None, omegac=None, phasors=None) -> "ModelParams":
        return ModelParams(
            self.omega0 if omega0 is None else omega0,
            self.omegac if omegac is None else omegac,
            self.phasors if phasors is None else phasors,
        )

    def scaled(self, s: complex) -> "ModelParams":
        return self.replace(phasors={k: s * c for k, c in self.phasors.items()})

    def time_shifted(self, n0: int, structure: ModelStructure) -> "ModelParams":
        """Phasors referred to a local time origin at sample ``n0``.

        Each segment uses its own origin, so the phasor a segment should
        recover is ``c * exp(j * omega * n0)``.
        """
        omegas = structure.omegas(self.omega0, self.omegac)
        c = self.phasor_vector(structure) * np.exp(1j * omegas * n0)
        return ModelParams.from_vector(self.omega0, self.omegac, structure, c)

    def f0_hz(self, sample_rate: float) -> float:
        return omega_to_hz(self.omega0, sample_rate)

    def fc_hz(self, sample_rate: float) -> float:
        return omega_to_hz(self.omegac, sample_rate)


@dataclass(frozen=True)
class NoiseSpec:
    """Additive complex white Gaussian noise: each of the real and imaginary
    channels has standard deviation ``sigma``."""

    sigma: float = 0.25
    seed: int = 0

    def __post_init__(self):
        s = float(self.sigma)
        if not (math.isfinite(s) and s >= 0):
            raise ValueError(f"sigma must be finite and non-negative, got {self.sigma}")
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        object.__setattr__(self, "sigma", s)
        object.__setattr__(self, "seed", int(self.seed))


def frequency_grid(
    params: ModelParams, structure: ModelStructure
) -> list[tuple[ComponentKey, float]]:
    """Angular frequency of every modelled component, in column order.

    Raises FrequencyOutOfRangeError if any frequency leaves (-pi, pi).
    """
    omegas = structure.omegas(params.omega0, params.omegac)
    grid = list(zip(structure.keys(), (float(w) for w in omegas)))
    for key, w in grid:
        if not (-math.pi < w < math.pi):
            raise FrequencyOutOfRangeError(
                f"component {key} has angular frequency {w:.6g} rad/sample outside (-pi, pi)"
            )
    return grid


def build_vandermonde(omegas: Sequence[float], n_samples: int) -> np.ndarray:
    """N x L matrix with entry (n, l) = exp(j * omegas[l] * n)."""
    w = np.asarray(omegas, dtype=np.float64).reshape(-1)
    if n_samples < 1 or w.size == 0:
        raise EmptyInputError(
            f"Vandermonde matrix needs N >= 1 and at least one frequency (N={n_samples}, L={w.size})"
        )
    n = np.arange(n_samples, dtype=np.float64)
    return np.exp(1j * np.outer(n, w))


def synthesize(
    params: ModelParams, structure: ModelStructure, n_samples: int, sample_rate: float
) -> ComplexSignal:
    """Noise-free model output V(omega) C for n = 0..n_samples-1."""
    grid = frequency_grid(params, structure)
    V = build_vandermonde([w for _, w in grid], n_samples)
    return ComplexSignal(V @ params.phasor_vector(structure), sample_rate)


def add_noise(signal: ComplexSignal, noise: NoiseSpec) -> ComplexSignal:
    """Return ``signal`` plus seeded complex Gaussian noise."""
    if noise.sigma == 0.0:
        return signal.with_samples(signal.samples.copy())
    rng = np.random.default_rng(noise.seed)
    g = rng.standard_normal((2, len(signal)))
    return signal.with_samples(signal.samples + noise.sigma * (g[0] + 1j * g[1]))


def _default_harmonics() -> dict[int, tuple[float, float]]:
    return {2: (0.6, 0.0), 3: (0.5, 0.0), 4: (0.4, 0.0)}


def _default_interharmonics() -> dict[int, tuple[float, float]]:
    return {1: (0.3, 0.0), 2: (0.2, 0.0), 3: (0.1, 0.0)}


@dataclass(frozen=True)
class SignalRecipe:
    """Synthetic test-signal description in physical units.

    Components are given as (amplitude A, phase phi) and converted to
    phasors A e^{j phi}. Defaults describe the 60 Hz reference current used
    throughout the tests: three harmonics and three upper fault sidebands
    spaced 5 Hz apart, sampled at 1 kHz for one second.
    """

    sample_rate: float = 1000.0
    n_samples: int = 1000
    f0: float = 60.0
    fundamental: tuple[float, float] = (0.7, 0.0)
    harmonics: Mapping[int, tuple[float, float]] = field(default_factory=_default_harmonics)
    fc: float = 5.0
    interharmonics: Mapping[int, tuple[float, float]] = field(
        default_factory=_default_interharmonics
    )

    def structure(self) -> ModelStructure:
        return ModelStructure(tuple(self.harmonics), tuple(self.interharmonics))

    def params(self) -> ModelParams:
        def phasor(ap):
            a, phi = ap
            return a * np.exp(1j * phi)

        ph = {FUNDAMENTAL: phasor(self.fundamental)}
        ph.update({ComponentKey.harmonic(l): phasor(v) for l, v in self.harmonics.items()})
        ph.update(
            {ComponentKey.interharmonic(k): phasor(v) for k, v in self.interharmonics.items()}
        )
        return ModelParams.from_hz(self.f0, self.fc, self.sample_rate, ph)

    def clean(self) -> ComplexSignal:
        return synthesize(self.params(), self.structure(), self.n_samples, self.sample_rate)


def reference_signal(
    noise: NoiseSpec, recipe: SignalRecipe | None = None
) -> tuple[ComplexSignal, ModelParams, ModelStructure]:
    """Noisy reference current together with its ground truth."""
    recipe = recipe or SignalRecipe()
    params, structure = recipe.params(), recipe.structure()
    clean = synthesize(params, structure, recipe.n_samples, recipe.sample_rate)
    return add_noise(clean, noise), params, structure
