"""Parametric tracking of electrical current components.

A sampled complex current is modelled as a fundamental, its harmonics and
fault-induced interharmonic sidebands (a structured Vandermonde model).
Parameters are estimated per segment by gradient descent and every
component can be reconstructed in time and frequency.
"""

from .errors import *  # noqa: F401,F403
from .estimation import (
    EstimationTrace,
    EstimatorConfig,
    GradientVector,
    Mode,
    concentrated_loss,
    fd_gradient,
    fit_segment,
    gradient,
    loss,
    solve_phasors_ls,
)
from .signal_model import (
    FUNDAMENTAL,
    ComplexSignal,
    ComponentKey,
    ModelParams,
    ModelStructure,
    NoiseSpec,
    SignalRecipe,
    add_noise,
    build_vandermonde,
    frequency_grid,
    hz_to_omega,
    omega_to_hz,
    reference_signal,
    synthesize,
)
from .spectral import Spectrum, dft_magnitude, initialize_from_spectrum
from .tracking import (
    ComponentDecomposition,
    SegmentSet,
    TrackingResult,
    reconstruct_components,
    segment_signal,
    track,
)
from .validation import MonteCarloReport, SegmentRMSE, monte_carlo, rmse

__version__ = "0.1.0"
