"""Run configuration: TOML file + command-line overrides.

Every section and key is optional; anything missing falls back to the
defaults below, which describe the 60 Hz reference current and the
estimator settings used for it. Unknown sections or keys are rejected.
"""

from __future__ import annotations

import dataclasses
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError, HarmtrackError
from .estimation import EstimatorConfig, Mode
from .signal_model import ModelStructure, NoiseSpec, SignalRecipe, frequency_grid

__all__ = [
    "SignalSection",
    "EstimatorSection",
    "TrackingSection",
    "SpectralSection",
    "MonteCarloSection",
    "RunConfig",
    "parse_config",
]


@dataclass(frozen=True)
class SignalSection:
    sample_rate: float = 1000.0
    n_samples: int = 1000
    f0: float = 60.0
    fundamental_amplitude: float = 0.7
    fundamental_phase: float = 0.0
    harmonics: list = field(default_factory=lambda: [2, 3, 4])
    harmonic_amplitudes: list = field(default_factory=lambda: [0.6, 0.5, 0.4])
    harmonic_phases: list = field(default_factory=lambda: [0.0, 0.0, 0.0])
    fc: float = 5.0
    interharmonics: list = field(default_factory=lambda: [1, 2, 3])
    interharmonic_amplitudes: list = field(default_factory=lambda: [0.3, 0.2, 0.1])
    interharmonic_phases: list = field(default_factory=lambda: [0.0, 0.0, 0.0])
    sigma: float = 0.25
    seed: int = 0


@dataclass(frozen=True)
class EstimatorSection:
    alpha: float = 0.1
    max_iters: int = 350
    mode: str = "concentrated"
    rel_tol: float = 1e-12
    freq_precondition: bool = True


@dataclass(frozen=True)
class TrackingSection:
    segment_length: int = 250


@dataclass(frozen=True)
class SpectralSection:
    # 0 means "length of the signal being transformed"
    n_fft: int = 0
    f0_search: list = field(default_factory=lambda: [40.0, 80.0])
    fc_search: list = field(default_factory=lambda: [1.0, 20.0])


@dataclass(frozen=True)
class MonteCarloSection:
    n_trials: int = 200
    base_seed: int = 0
    init: str = "spectral"
    n_jobs: int = 1


_SECTIONS = {
    "signal": SignalSection,
    "estimator": EstimatorSection,
    "tracking": TrackingSection,
    "spectral": SpectralSection,
    "montecarlo": MonteCarloSection,
}


@dataclass(frozen=True)
class RunConfig:
    signal: SignalSection = field(default_factory=SignalSection)
    estimator: EstimatorSection = field(default_factory=EstimatorSection)
    tracking: TrackingSection = field(default_factory=TrackingSection)
    spectral: SpectralSection = field(default_factory=SpectralSection)
    montecarlo: MonteCarloSection = field(default_factory=MonteCarloSection)

    def recipe(self) -> SignalRecipe:
        s = self.signal
        return SignalRecipe(
            sample_rate=s.sample_rate,
            n_samples=s.n_samples,
            f0=s.f0,
            fundamental=(s.fundamental_amplitude, s.fundamental_phase),
            harmonics={
                l: (a, p) for l, a, p in zip(s.harmonics, s.harmonic_amplitudes, s.harmonic_phases)
            },
            fc=s.fc,
            interharmonics={
                k: (a, p)
                for k, a, p in zip(
                    s.interharmonics, s.interharmonic_amplitudes, s.interharmonic_phases
                )
            },
        )

    def structure(self) -> ModelStructure:
        return ModelStructure(tuple(self.signal.harmonics), tuple(self.signal.interharmonics))

    def noise(self) -> NoiseSpec:
        return NoiseSpec(self.signal.sigma, self.signal.seed)

    def estimator_config(self) -> EstimatorConfig:
        e = self.estimator
        return EstimatorConfig(e.alpha, e.max_iters, Mode(e.mode), e.rel_tol, e.freq_precondition)

    def search_ranges(self) -> tuple[tuple[float, float], tuple[float, float]]:
        return tuple(self.spectral.f0_search), tuple(self.spectral.fc_search)


def _coerce(key: str, value: Any, default: Any) -> Any:
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(key, f"expected true/false, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(key, f"expected a number, got {value!r}")
        value = float(value)
        if not math.isfinite(value):
            raise ConfigError(key, f"must be finite, got {value!r}")
        return value
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(key, f"expected a string, got {value!r}")
        return value
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(key, f"expected a list, got {value!r}")
        want_int = all(isinstance(v, int) for v in default)
        out = []
        for v in value:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(key, f"list entries must be numbers, got {v!r}")
            if want_int and not isinstance(v, int):
                raise ConfigError(key, f"list entries must be integers, got {v!r}")
            if not math.isfinite(v):
                raise ConfigError(key, "list entries must be finite")
            out.append(v if want_int else float(v))
        return out
    raise AssertionError(f"unhandled default type for {key}")


def _merge(base: RunConfig, data: Mapping[str, Any]) -> RunConfig:
    updates = {}
    for section, values in data.items():
        if section not in _SECTIONS:
            raise ConfigError(section, "unknown section")
        if not isinstance(values, Mapping):
            raise ConfigError(section, "expected a table of key/value pairs")
        current = getattr(base, section)
        known = {f.name for f in dataclasses.fields(current)}
        changes = {}
        for key, value in values.items():
            full = f"{section}.{key}"
            if key not in known:
                raise ConfigError(full, "unknown key")
            changes[key] = _coerce(full, value, getattr(current, key))
        updates[section] = dataclasses.replace(current, **changes)
    return dataclasses.replace(base, **updates)


def _validate(cfg: RunConfig) -> None:
    s = cfg.signal
    fs = s.sample_rate
    if fs <= 0:
        raise ConfigError("signal.sample_rate", "must be positive")
    if s.n_samples < 1:
        raise ConfigError("signal.n_samples", "must be >= 1")
    if s.sigma < 0:
        raise ConfigError("signal.sigma", f"noise standard deviation must be >= 0, got {s.sigma}")
    if not 0 <= s.seed < 2**64:
        raise ConfigError("signal.seed", "must be an unsigned 64-bit integer")
    for idx, amp, ph in (
        ("harmonics", "harmonic_amplitudes", "harmonic_phases"),
        ("interharmonics", "interharmonic_amplitudes", "interharmonic_phases"),
    ):
        n = len(getattr(s, idx))
        for other in (amp, ph):
            if len(getattr(s, other)) != n:
                raise ConfigError(
                    f"signal.{other}", f"needs {n} entries to match signal.{idx}"
                )
    for key, args in (
        ("harmonics", (tuple(s.harmonics), ())),
        ("interharmonics", ((), tuple(s.interharmonics))),
    ):
        try:
            ModelStructure(*args)
        except HarmtrackError as exc:
            raise ConfigError(f"signal.{key}", str(exc)) from None
    if not 0 < s.f0 < fs / 2:
        raise ConfigError("signal.f0", f"must lie in (0, sample_rate/2), got {s.f0}")
    if not 0 < s.fc < s.f0:
        raise ConfigError("signal.fc", f"must lie in (0, f0), got {s.fc}")
    try:
        frequency_grid(cfg.recipe().params(), cfg.structure())
    except HarmtrackError as exc:
        raise ConfigError("signal.f0", str(exc)) from None

    e = cfg.estimator
    if e.alpha <= 0:
        raise ConfigError("estimator.alpha", "learning rate must be positive")
    if e.max_iters < 1:
        raise ConfigError("estimator.max_iters", "must be >= 1")
    if e.mode not in {m.value for m in Mode}:
        raise ConfigError("estimator.mode", f"must be 'joint' or 'concentrated', got {e.mode!r}")
    if e.rel_tol < 0:
        raise ConfigError("estimator.rel_tol", "must be >= 0")

    M = cfg.tracking.segment_length
    if not 1 <= M <= s.n_samples:
        raise ConfigError(
            "tracking.segment_length",
            f"segment length must satisfy 1 <= M <= N (got M={M}, N={s.n_samples})",
        )
    n_comp = cfg.structure().n_components
    if M < n_comp:
        raise ConfigError(
            "tracking.segment_length", f"M={M} is shorter than the {n_comp} modelled components"
        )

    sp = cfg.spectral
    if sp.n_fft != 0 and sp.n_fft < s.n_samples:
        raise ConfigError("spectral.n_fft", f"must be 0 (auto) or >= n_samples ({s.n_samples})")
    for name in ("f0_search", "fc_search"):
        rng = getattr(sp, name)
        if len(rng) != 2 or not 0 < rng[0] < rng[1] < fs / 2:
            raise ConfigError(f"spectral.{name}", "expected [low, high] with 0 < low < high < fs/2")

    mc = cfg.montecarlo
    if mc.n_trials < 1:
        raise ConfigError("montecarlo.n_trials", "must be >= 1")
    if not 0 <= mc.base_seed < 2**64:
        raise ConfigError("montecarlo.base_seed", "must be an unsigned 64-bit integer")
    if mc.init not in ("spectral", "truth"):
        raise ConfigError("montecarlo.init", "must be 'spectral' or 'truth'")
    if mc.n_jobs < 1:
        raise ConfigError("montecarlo.n_jobs", "must be >= 1")


def parse_config(
    path: str | Path | None = None, overrides: Mapping[str, Mapping[str, Any]] | None = None
) -> RunConfig:
    """Load ``path`` (TOML) on top of the defaults, apply ``overrides``
    (same nested layout as the file) and validate the result."""
    cfg = RunConfig()
    if path is not None:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(str(path), f"malformed TOML: {exc}") from None
        cfg = _merge(cfg, data)
    if overrides:
        cfg = _merge(cfg, overrides)
    _validate(cfg)
    return cfg

