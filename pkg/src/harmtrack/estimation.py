"""Per-segment loss, its exact gradient, and the gradient-descent fit.

The loss of a segment x (length M) under parameters (w0, wc, C) is

    J = 1/(2M) * || x - V(w0, wc) C ||^2

with V the Vandermonde matrix of the modelled frequencies. Phasor
gradients are reported as ``dJ/dRe(c) + 1j * dJ/dIm(c)``, so the update
``c -= alpha * g`` is plain real-coordinate gradient descent.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import DivergenceError, RankDeficiencyError, UnderdeterminedModelError
from .signal_model import (
    ComplexSignal,
    ComponentKey,
    ModelParams,
    ModelStructure,
    build_vandermonde,
    frequency_grid,
)

__all__ = [
    "Mode",
    "EstimatorConfig",
    "GradientVector",
    "EstimationTrace",
    "loss",
    "gradient",
    "fd_gradient",
    "solve_phasors_ls",
    "concentrated_loss",
    "fit_segment",
]


class Mode(str, enum.Enum):
    JOINT = "joint"
    CONCENTRATED = "concentrated"


@dataclass(frozen=True)
class EstimatorConfig:
    """Gradient-descent settings.

    ``mode`` selects between descending on all parameters at once (JOINT)
    and re-solving the phasors in closed form every iteration so that only
    the two frequencies are descended (CONCENTRATED).
    """

    alpha: float = 0.1
    max_iters: int = 350
    mode: Mode = Mode.CONCENTRATED
    rel_tol: float = 1e-12
    freq_precondition: bool = True

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"alpha must be positive and finite, got {self.alpha}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValueError(f"max_iters must be an integer >= 1, got {self.max_iters}")
        if not (self.rel_tol >= 0):
            raise ValueError(f"rel_tol must be >= 0, got {self.rel_tol}")


@dataclass(frozen=True)
class GradientVector:
    d_omega0: float
    d_omegac: float
    d_phasors: Mapping[ComponentKey, complex]

    def as_array(self, structure: ModelStructure) -> np.ndarray:
        """Flatten to [d_omega0, d_omegac, Re(g)..., Im(g)...]."""
        g = np.array([self.d_phasors[k] for k in structure.keys()])
        return np.concatenate([[self.d_omega0, self.d_omegac], g.real, g.imag])


@dataclass(frozen=True)
class EstimationTrace:
    loss_history: np.ndarray
    final_params: ModelParams
    iterations_run: int
    converged_early: bool


def _check_sizes(M: int, structure: ModelStructure) -> None:
    if M < structure.n_components:
        raise UnderdeterminedModelError(
            f"segment of {M} samples cannot determine {structure.n_components} components"
        )


def _vandermonde(structure, w0, wc, M):
    n = np.arange(M, dtype=np.float64)
    return np.exp(1j * np.outer(n, structure.omegas(w0, wc)))


def _raw_eval(x, structure, w0, wc, c, with_grad=True, V=None):
    """Loss and gradient on bare arrays; no domain validation."""
    M = x.size
    if V is None:
        V = _vandermonde(structure, w0, wc, M)
    r = x - V @ c
    J = 0.5 * np.vdot(r, r).real / M
    if not with_grad:
        return J, None
    g_c = -(V.conj().T @ r) / M
    # dm/dw = j n * V (weights * c); dJ/dw = -(1/M) Re sum conj(r) dm/dw
    jn_conj_r = 1j * np.arange(M) * r.conj()
    g0 = -np.real(jn_conj_r @ (V @ (structure.omega0_weights() * c))) / M
    gc = -np.real(jn_conj_r @ (V @ (structure.omegac_weights() * c))) / M
    return J, (g0, gc, g_c)


def loss(segment: ComplexSignal, params: ModelParams, structure: ModelStructure) -> float:
    """Half mean squared modulus of the model residual over the segment."""
    _check_sizes(len(segment), structure)
    frequency_grid(params, structure)
    J, _ = _raw_eval(
        segment.samples, structure, params.omega0, params.omegac,
        params.phasor_vector(structure), with_grad=False,
    )
    return float(J)


def gradient(
    segment: ComplexSignal, params: ModelParams, structure: ModelStructure
) -> GradientVector:
    """Exact gradient of :func:`loss` with respect to every parameter."""
    _check_sizes(len(segment), structure)
    frequency_grid(params, structure)
    _, (g0, gc, g_c) = _raw_eval(
        segment.samples, structure, params.omega0, params.omegac,
        params.phasor_vector(structure),
    )
    return GradientVector(float(g0), float(gc), dict(zip(structure.keys(), map(complex, g_c))))


def fd_gradient(
    segment: ComplexSignal,
    params: ModelParams,
    structure: ModelStructure,
    step: float = 1e-6,
    phasor_step: float | None = None,
) -> GradientVector:
    """Central finite-difference estimate of :func:`gradient`.

    ``step`` is used for the two frequencies and, unless ``phasor_step`` is
    given, for the real and imaginary part of every phasor too.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    h_c = step if phasor_step is None else phasor_step
    x = segment.samples
    w0, wc = params.omega0, params.omegac
    c = params.phasor_vector(structure)

    def J(a, b, cc):
        return _raw_eval(x, structure, a, b, cc, with_grad=False)[0]

    d0 = (J(w0 + step, wc, c) - J(w0 - step, wc, c)) / (2 * step)
    dc = (J(w0, wc + step, c) - J(w0, wc - step, c)) / (2 * step)
    d_ph = np.zeros(c.size, dtype=np.complex128)
    for i in range(c.size):
        e = np.zeros(c.size, dtype=np.complex128)
        e[i] = h_c
        re = (J(w0, wc, c + e) - J(w0, wc, c - e)) / (2 * h_c)
        im = (J(w0, wc, c + 1j * e) - J(w0, wc, c - 1j * e)) / (2 * h_c)
        d_ph[i] = re + 1j * im
    return GradientVector(float(d0), float(dc), dict(zip(structure.keys(), map(complex, d_ph))))


def _check_distinct(omegas: np.ndarray) -> None:
    gaps = np.abs(omegas[:, None] - omegas[None, :])
    np.fill_diagonal(gaps, np.inf)
    if gaps.size and gaps.min() <= 1e-9:
        i, j = np.unravel_index(np.argmin(gaps), gaps.shape)
        raise RankDeficiencyError(
            f"columns {i} and {j} share frequency {omegas[i]:.12g} rad/sample"
        )


def _ls_phasors(x: np.ndarray, V: np.ndarray) -> np.ndarray:
    return np.linalg.lstsq(V, x, rcond=None)[0]


def solve_phasors_ls(
    segment: ComplexSignal, omega0: float, omegac: float, structure: ModelStructure
) -> dict[ComponentKey, complex]:
    """Phasors minimising the loss at fixed frequencies (linear least squares)."""
    M = len(segment)
    _check_sizes(M, structure)
    omegas = structure.omegas(omega0, omegac)
    _check_distinct(omegas)
    c = _ls_phasors(segment.samples, build_vandermonde(omegas, M))
    return dict(zip(structure.keys(), map(complex, c)))


def concentrated_loss(
    segment: ComplexSignal, omega0: float, omegac: float, structure: ModelStructure
) -> float:
    """Loss with the phasors profiled out: min over C of J(omega0, omegac, C)."""
    c = np.array(list(solve_phasors_ls(segment, omega0, omegac, structure).values()))
    J, _ = _raw_eval(segment.samples, structure, omega0, omegac, c, with_grad=False)
    return float(J)


def _curvature_floor(x):
    n = np.arange(x.size, dtype=np.float64)
    return 1e-6 * np.mean(n**2) * max(np.mean(np.abs(x) ** 2), 1e-300)


def _joint_freq_scales(x, structure, V):
    """Diagonal curvature estimates for (omega0, omegac) when the phasors are
    descended jointly.

    Amplitudes are taken from the data's projection onto the current columns
    rather than from the current phasors, so a cold start (phasors near zero)
    gives short, safe frequency steps instead of huge ones.
    """
    M = x.size
    n = np.arange(M, dtype=np.float64)
    power = np.abs(V.conj().T @ x / M) ** 2
    moment = np.mean(n**2)
    floor = _curvature_floor(x)
    p0 = moment * float(structure.omega0_weights() ** 2 @ power)
    pc = moment * float(structure.omegac_weights() ** 2 @ power)
    return max(p0, floor), max(pc, floor)


def _projected_freq_scales(x, structure, V, Q, c):
    """Gauss-Newton diagonal of the concentrated loss: squared norm of each
    frequency-derivative column after projecting out the model subspace."""
    M = x.size
    jn = 1j * np.arange(M, dtype=np.float64)
    D = np.stack(
        [jn * (V @ (structure.omega0_weights() * c)), jn * (V @ (structure.omegac_weights() * c))],
        axis=1,
    )
    D -= Q @ (Q.conj().T @ D)
    curv = np.sum(np.abs(D) ** 2, axis=0) / M
    floor = _curvature_floor(x)
    return max(float(curv[0]), floor), max(float(curv[1]), floor)


def _admissible(w0, wc, structure):
    if not (0.0 < w0 < math.pi and 0.0 < wc < w0):
        return False
    omegas = structure.omegas(w0, wc)
    return bool(np.all(np.abs(omegas) < math.pi))


def fit_segment(
    segment: ComplexSignal,
    init: ModelParams,
    structure: ModelStructure,
    config: EstimatorConfig | None = None,
) -> EstimationTrace:
    """Fit one segment by (preconditioned) gradient descent from ``init``.

    Records the loss after every iteration and stops after
    ``config.max_iters`` iterations or once the relative loss decrease is
    non-negative and below ``config.rel_tol`` (``rel_tol=0`` disables early
    stopping). Raises DivergenceError on a non-finite
    loss/gradient or when the frequencies leave the admissible domain.
    """
    config = config or EstimatorConfig()
    x = segment.samples
    M = x.size
    _check_sizes(M, structure)
    frequency_grid(init, structure)

    concentrated = config.mode is Mode.CONCENTRATED
    alpha = config.alpha
    w0, wc = init.omega0, init.omegac
    c = init.phasor_vector(structure)
    has_inter = len(structure.interharmonic_indices) > 0

    def evaluate(w0, wc, c, iteration):
        V = _vandermonde(structure, w0, wc, M)
        if concentrated:
            try:
                _check_distinct(structure.omegas(w0, wc))
            except RankDeficiencyError as exc:
                raise DivergenceError(str(exc), iteration) from None
            Q, R = np.linalg.qr(V)
            c = np.linalg.solve(R, Q.conj().T @ x)
        J, g = _raw_eval(x, structure, w0, wc, c, V=V)
        if not (np.isfinite(J) and np.isfinite(g[0]) and np.isfinite(g[1])
                and np.all(np.isfinite(g[2]))):
            raise DivergenceError("non-finite loss or gradient", iteration)
        if not config.freq_precondition:
            scales = (1.0, 1.0)
        elif concentrated:
            scales = _projected_freq_scales(x, structure, V, Q, c)
        else:
            scales = _joint_freq_scales(x, structure, V)
        return J, g, c, scales

    J_prev, grads, c, scales = evaluate(w0, wc, c, 0)
    history: list[float] = []
    converged_early = False

    for it in range(1, config.max_iters + 1):
        g0, gc, g_c = grads
        w0 = w0 - alpha * g0 / scales[0]
        if has_inter:
            wc = wc - alpha * gc / scales[1]
        if not concentrated:
            c = c - alpha * g_c
        if not _admissible(w0, wc, structure):
            raise DivergenceError(
                f"frequencies left the admissible domain (omega0={w0:.6g}, omegac={wc:.6g})", it
            )
        J, grads, c, scales = evaluate(w0, wc, c, it)
        history.append(float(J))
        # stagnation only: an increase does not stop the descent
        if 0.0 <= (J_prev - J) / max(J_prev, 1e-30) < config.rel_tol:
            converged_early = it < config.max_iters
            break
        J_prev = J

    final = ModelParams.from_vector(w0, wc, structure, c)
    return EstimationTrace(np.array(history), final, len(history), converged_early)
