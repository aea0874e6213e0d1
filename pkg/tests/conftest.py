import numpy as np
import pytest
from hypothesis import settings

from harmtrack import NoiseSpec, reference_signal

settings.register_profile("default", max_examples=50, deadline=None)
settings.load_profile("default")

FS = 1000.0
M = 250


@pytest.fixture(scope="session")
def clean_reference():
    return reference_signal(NoiseSpec(0.0, 0))


@pytest.fixture(scope="session")
def noisy_reference():
    return reference_signal(NoiseSpec(0.25, 0))


def first_segment(signal, m=M):
    return signal.with_samples(signal.samples[:m])


def random_params(rng, structure, amp=0.5):
    from harmtrack import ModelParams, hz_to_omega

    w0 = hz_to_omega(rng.uniform(45, 75), FS)
    wc = hz_to_omega(rng.uniform(1, 15), FS)
    c = amp * (rng.standard_normal(structure.n_components) + 1j * rng.standard_normal(structure.n_components))
    return ModelParams.from_vector(w0, wc, structure, c)
