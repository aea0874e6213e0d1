"""Segment-by-segment tracking and component reconstruction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, InvalidSegmentLengthError
from .estimation import EstimationTrace, EstimatorConfig, fit_segment
from .signal_model import ComplexSignal, ModelParams, ModelStructure, build_vandermonde, frequency_grid
from .spectral import initialize_from_spectrum

__all__ = [
    "SegmentSet",
    "ComponentDecomposition",
    "SegmentResult",
    "TrackingResult",
    "segment_signal",
    "reconstruct_components",
    "track",
]

COMPONENT_NAMES = ("fundamental", "harmonic", "interharmonic", "residual")


@dataclass(frozen=True)
class SegmentSet:
    segments: tuple[ComplexSignal, ...]
    segment_length: int
    dropped_tail: int

    def __len__(self) -> int:
        return len(self.segments)

    def start(self, index: int) -> int:
        """Sample offset of segment ``index`` in the original signal."""
        return index * self.segment_length


@dataclass(frozen=True)
class ComponentDecomposition:
    fundamental: ComplexSignal
    harmonic: ComplexSignal
    interharmonic: ComplexSignal
    residual: ComplexSignal

    def items(self):
        return [(name, getattr(self, name)) for name in COMPONENT_NAMES]

    def total(self) -> np.ndarray:
        return sum(sig.samples for _, sig in self.items())


@dataclass(frozen=True)
class SegmentResult:
    params: ModelParams
    trace: EstimationTrace
    components: ComponentDecomposition


@dataclass(frozen=True)
class TrackingResult:
    per_segment: tuple[SegmentResult, ...]
    segments: SegmentSet
    diverged: DivergenceError | None = None

    def __len__(self) -> int:
        return len(self.per_segment)


def segment_signal(signal: ComplexSignal, M: int) -> SegmentSet:
    """Cut ``signal`` into floor(N/M) consecutive, non-overlapping segments of
    ``M`` samples. Leftover samples at the end are dropped."""
    N = len(signal)
    if int(M) != M or not (1 <= M <= N):
        raise InvalidSegmentLengthError(
            f"segment length must satisfy 1 <= M <= N (got M={M}, N={N})"
        )
    M = int(M)
    count = N // M
    segs = tuple(
        signal.with_samples(signal.samples[s * M:(s + 1) * M]) for s in range(count)
    )
    return SegmentSet(segs, M, N - count * M)


def reconstruct_components(
    segment: ComplexSignal, params: ModelParams, structure: ModelStructure
) -> ComponentDecomposition:
    """Split ``segment`` into fundamental, harmonic, interharmonic and residual
    parts. The residual is the exact remainder, so the four parts always add
    back to the segment."""
    M = len(segment)
    grid = frequency_grid(params, structure)
    V = build_vandermonde([w for _, w in grid], M)
    terms = V * params.phasor_vector(structure)
    kinds = [key.kind for key, _ in grid]

    def part(kind):
        cols = [i for i, k in enumerate(kinds) if k == kind]
        if not cols:
            return np.zeros(M, dtype=np.complex128)
        return terms[:, cols].sum(axis=1)

    f, h, i = part("fundamental"), part("harmonic"), part("interharmonic")
    residual = segment.samples - (f + h + i)
    mk = segment.with_samples
    return ComponentDecomposition(mk(f), mk(h), mk(i), mk(residual))


def track(
    signal: ComplexSignal,
    M: int,
    structure: ModelStructure,
    config: EstimatorConfig | None = None,
    init: ModelParams | None = None,
    f0_search: tuple[float, float] = (40.0, 80.0),
    fc_search: tuple[float, float] = (1.0, 20.0),
    *,
    keep_partial: bool = False,
) -> TrackingResult:
    """Fit every segment in turn, warm-starting each from its predecessor.

    The first segment starts from ``init`` when given, otherwise from the
    spectrum of that segment. Every segment uses its own time origin, so the
    carried-over phasors are advanced by M samples before the next fit.

    A divergence is re-raised tagged with its segment index, unless
    ``keep_partial`` is set, in which case the segments fitted so far are
    returned with ``diverged`` holding the error.
    """
    config = config or EstimatorConfig()
    segments = segment_signal(signal, M)
    results = []
    start = init
    for s, seg in enumerate(segments.segments):
        if start is None:
            start = initialize_from_spectrum(seg, structure, f0_search, fc_search)
        try:
            trace = fit_segment(seg, start, structure, config)
        except DivergenceError as exc:
            err = exc.at_segment(s)
            if keep_partial:
                return TrackingResult(tuple(results), segments, err)
            raise err from exc
        params = trace.final_params
        results.append(SegmentResult(params, trace, reconstruct_components(seg, params, structure)))
        start = params.time_shifted(segments.segment_length, structure)
    return TrackingResult(tuple(results), segments)
