import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from harmtrack import (
    FUNDAMENTAL,
    ComplexSignal,
    EstimatorConfig,
    ModelParams,
    ModelStructure,
    Mode,
    NoiseSpec,
    concentrated_loss,
    fd_gradient,
    fit_segment,
    gradient,
    hz_to_omega,
    loss,
    reference_signal,
    solve_phasors_ls,
    synthesize,
)
from harmtrack.errors import DivergenceError, RankDeficiencyError, UnderdeterminedModelError

from conftest import FS, M, first_segment, random_params


def brute_loss(x, params, structure):
    """Loop-based loss, independent of the vectorised implementation."""
    total = 0.0
    grid = structure.omegas(params.omega0, params.omegac)
    c = params.phasor_vector(structure)
    for n, xn in enumerate(x):
        model = sum(cu * complex(math.cos(w * n), math.sin(w * n)) for cu, w in zip(c, grid))
        total += abs(xn - model) ** 2
    return total / (2 * len(x))


def richardson_fd(segment, params, structure):
    """Fourth-order accurate frequency derivatives (two central differences)."""
    g1 = fd_gradient(segment, params, structure, 2e-5, 1e-7).as_array(structure)
    g2 = fd_gradient(segment, params, structure, 1e-5, 1e-7).as_array(structure)
    out = g1.copy()
    out[:2] = (4 * g2[:2] - g1[:2]) / 3
    return out


# --- loss ---------------------------------------------------------------------

def test_loss_zero_at_exact_fit(clean_reference):
    signal, truth, structure = clean_reference
    assert loss(first_segment(signal), truth, structure) <= 1e-20


def test_loss_zero_phasors_is_half_power(noisy_reference):
    signal, truth, structure = noisy_reference
    seg = first_segment(signal)
    p = truth.replace(phasors={k: 0 for k in truth.phasors})
    assert loss(seg, p, structure) == pytest.approx(np.sum(np.abs(seg.samples) ** 2) / (2 * M), rel=1e-14)


def test_loss_fundamental_perturbation(clean_reference):
    signal, truth, structure = clean_reference
    ph = dict(truth.phasors)
    ph[FUNDAMENTAL] += 0.01
    assert loss(first_segment(signal), truth.replace(phasors=ph), structure) == pytest.approx(5e-5, abs=1e-12)


def test_loss_matches_brute_force(noisy_reference):
    signal, _, structure = noisy_reference
    seg = first_segment(signal, 60)
    rng = np.random.default_rng(5)
    for _ in range(5):
        p = random_params(rng, structure)
        assert loss(seg, p, structure) == pytest.approx(brute_loss(seg.samples, p, structure), rel=1e-12)


def test_loss_underdetermined(clean_reference):
    signal, truth, structure = clean_reference
    with pytest.raises(UnderdeterminedModelError):
        loss(first_segment(signal, 6), truth, structure)
    with pytest.raises(UnderdeterminedModelError):
        gradient(first_segment(signal, 6), truth, structure)


@given(st.integers(0, 2**32 - 1))
def test_loss_non_negative(seed):
    rng = np.random.default_rng(seed)
    x = ComplexSignal(rng.standard_normal(40) + 1j * rng.standard_normal(40), FS)
    structure = ModelStructure((2, 3), (1, -1))
    assert loss(x, random_params(rng, structure), structure) >= 0


# --- gradient -----------------------------------------------------------------

def test_gradient_vanishes_at_exact_fit(clean_reference):
    signal, truth, structure = clean_reference
    g = gradient(first_segment(signal), truth, structure).as_array(structure)
    assert np.max(np.abs(g)) <= 1e-10


def test_gradient_without_interharmonics_ignores_omegac(noisy_reference):
    signal, _, _ = noisy_reference
    structure = ModelStructure((2, 3, 4), ())
    p = random_params(np.random.default_rng(1), structure)
    assert gradient(first_segment(signal), p, structure).d_omegac == 0.0


def test_gradient_matches_fd_on_random_points(noisy_reference):
    signal, _, structure = noisy_reference
    seg = first_segment(signal)
    rng = np.random.default_rng(2024)
    for _ in range(100):
        p = random_params(rng, structure)
        an = gradient(seg, p, structure).as_array(structure)
        fd = fd_gradient(seg, p, structure, 1e-6, 1e-7).as_array(structure)
        assert np.max(np.abs(fd - an)) <= 1e-5 * np.linalg.norm(an)


def test_gradient_componentwise_against_extrapolated_fd(noisy_reference):
    signal, _, structure = noisy_reference
    seg = first_segment(signal)
    rng = np.random.default_rng(77)
    for _ in range(20):
        p = random_params(rng, structure)
        an = gradient(seg, p, structure).as_array(structure)
        ref = richardson_fd(seg, p, structure)
        np.testing.assert_allclose(an, ref, rtol=1e-6, atol=1e-9)


def test_fd_exact_on_phasor_coordinates(noisy_reference):
    signal, _, structure = noisy_reference
    seg = first_segment(signal)
    p = random_params(np.random.default_rng(3), structure)
    an = gradient(seg, p, structure).as_array(structure)[2:]
    fd = fd_gradient(seg, p, structure, 1e-6, 1e-3).as_array(structure)[2:]
    np.testing.assert_allclose(fd, an, rtol=1e-8, atol=1e-12)


def test_fd_second_order_in_step(noisy_reference):
    signal, _, structure = noisy_reference
    seg = first_segment(signal)
    p = random_params(np.random.default_rng(11), structure)
    an = gradient(seg, p, structure).as_array(structure)[:2]
    e1 = np.abs(fd_gradient(seg, p, structure, 2e-5).as_array(structure)[:2] - an)
    e2 = np.abs(fd_gradient(seg, p, structure, 1e-5).as_array(structure)[:2] - an)
    np.testing.assert_allclose(e1 / e2, 4.0, rtol=0.1)


@given(st.integers(0, 2**32 - 1))
def test_descent_step_decreases_loss(seed):
    rng = np.random.default_rng(seed)
    signal, _, structure = reference_signal(NoiseSpec(0.25, seed))
    seg = first_segment(signal, 100)
    p = random_params(rng, structure)
    g = gradient(seg, p, structure)
    norm = np.linalg.norm(g.as_array(structure))
    if norm <= 1e-6:
        return
    a = 1e-6 / norm
    stepped = ModelParams(
        p.omega0 - a * g.d_omega0,
        p.omegac - a * g.d_omegac,
        {k: c - a * g.d_phasors[k] for k, c in p.phasors.items()},
    )
    assert loss(seg, stepped, structure) < loss(seg, p, structure)


# --- least squares ------------------------------------------------------------

def test_ls_recovers_noiseless_phasors(clean_reference):
    signal, truth, structure = clean_reference
    c = solve_phasors_ls(first_segment(signal), truth.omega0, truth.omegac, structure)
    for k, v in truth.phasors.items():
        assert abs(c[k] - v) <= 1e-9


def test_ls_zero_segment(clean_reference):
    _, truth, structure = clean_reference
    c = solve_phasors_ls(ComplexSignal(np.zeros(M), FS), truth.omega0, truth.omegac, structure)
    assert all(v == 0 for v in c.values())


def test_ls_rank_deficiency():
    structure = ModelStructure((2,), (2,))
    w0 = hz_to_omega(60, FS)
    with pytest.raises(RankDeficiencyError):
        solve_phasors_ls(ComplexSignal(np.ones(50), FS), w0, w0 / 2, structure)


def _residual_orthogonality(seg, params, structure):
    V = np.exp(1j * np.outer(np.arange(len(seg)), structure.omegas(params.omega0, params.omegac)))
    r = seg.samples - V @ params.phasor_vector(structure)
    return np.abs(V.conj().T @ r) / (np.linalg.norm(V, axis=0) * max(np.linalg.norm(r), 1e-300))


def test_ls_noisy_reference_optimality(noisy_reference):
    signal, truth, structure = noisy_reference
    seg = first_segment(signal)
    best = truth.replace(phasors=solve_phasors_ls(seg, truth.omega0, truth.omegac, structure))
    assert _residual_orthogonality(seg, best, structure).max() <= 1e-9
    assert loss(seg, best, structure) <= loss(seg, truth, structure)


def test_ls_beats_random_assignments(noisy_reference):
    signal, truth, structure = noisy_reference
    seg = first_segment(signal)
    best = truth.replace(phasors=solve_phasors_ls(seg, truth.omega0, truth.omegac, structure))
    j_best = loss(seg, best, structure)
    c0 = best.phasor_vector(structure)
    rng = np.random.default_rng(8)
    for scale in (1e-6, 1e-3, 0.1, 1.0):
        for _ in range(25):
            c = c0 + scale * (rng.standard_normal(7) + 1j * rng.standard_normal(7))
            assert j_best <= loss(seg, ModelParams.from_vector(best.omega0, best.omegac, structure, c), structure)


@given(st.floats(-math.pi, math.pi), st.floats(50, 70), st.floats(2, 9))
def test_concentrated_loss_global_phase_invariance(phi, f0, fc):
    signal, _, structure = reference_signal(NoiseSpec(0.25, 3))
    seg = first_segment(signal)
    rotated = seg.with_samples(np.exp(1j * phi) * seg.samples)
    w0, wc = hz_to_omega(f0, FS), hz_to_omega(fc, FS)
    a = concentrated_loss(seg, w0, wc, structure)
    b = concentrated_loss(rotated, w0, wc, structure)
    assert b == pytest.approx(a, rel=1e-10)


# --- fit_segment --------------------------------------------------------------

@pytest.mark.parametrize("mode", list(Mode))
def test_fit_from_truth_stays_put(clean_reference, mode):
    signal, truth, structure = clean_reference
    trace = fit_segment(first_segment(signal), truth, structure, EstimatorConfig(mode=mode))
    assert np.all(trace.loss_history <= 1e-18)
    assert trace.final_params.omega0 == pytest.approx(truth.omega0, abs=1e-9)
    assert trace.final_params.omegac == pytest.approx(truth.omegac, abs=1e-9)
    np.testing.assert_allclose(
        trace.final_params.phasor_vector(structure), truth.phasor_vector(structure), atol=1e-9
    )
    assert len(trace.loss_history) == trace.iterations_run <= 350


@pytest.mark.parametrize("df0,dfc", [(0.5, 0.5), (-0.5, 0.5), (0.5, -0.5), (-0.3, -0.4)])
def test_concentrated_fit_converges_from_offset(clean_reference, df0, dfc):
    signal, truth, structure = clean_reference
    seg = first_segment(signal)
    w0, wc = hz_to_omega(60 + df0, FS), hz_to_omega(5 + dfc, FS)
    init = ModelParams(w0, wc, solve_phasors_ls(seg, w0, wc, structure))
    p = fit_segment(seg, init, structure, EstimatorConfig(mode=Mode.CONCENTRATED)).final_params
    assert abs(p.f0_hz(FS) - 60) <= 0.01
    assert abs(p.fc_hz(FS) - 5) <= 0.01
    np.testing.assert_allclose(p.phasor_vector(structure), truth.phasor_vector(structure), atol=1e-6)


@pytest.mark.parametrize("mode", list(Mode))
def test_tiny_learning_rate_never_increases_loss(mode):
    rng = np.random.default_rng(99)
    for i in range(20):
        signal, truth, structure = reference_signal(NoiseSpec(0.25, 1000 + i))
        seg = first_segment(signal)
        init = random_params(rng, structure)
        cfg = EstimatorConfig(alpha=0.1 / 1e6, max_iters=30, mode=mode, rel_tol=0.0)
        h = fit_segment(seg, init, structure, cfg).loss_history
        assert np.all(np.diff(h) <= 0)


def test_divergence_reports_iteration(noisy_reference):
    signal, truth, structure = noisy_reference
    cfg = EstimatorConfig(alpha=1e3, freq_precondition=False, mode=Mode.JOINT)
    with pytest.raises(DivergenceError) as info:
        fit_segment(first_segment(signal), truth, structure, cfg)
    assert info.value.iteration >= 1
    assert "iteration" in str(info.value)


def test_joint_stationary_point_matches_ls(noisy_reference):
    signal, truth, structure = noisy_reference
    seg = first_segment(signal)
    conc = fit_segment(seg, truth, structure, EstimatorConfig()).final_params
    start = conc.replace(phasors={k: c + 0.02 for k, c in conc.phasors.items()})
    cfg = EstimatorConfig(mode=Mode.JOINT, max_iters=6000, rel_tol=0.0)
    joint = fit_segment(seg, start, structure, cfg).final_params
    g = gradient(seg, joint, structure).as_array(structure)
    assert np.max(np.abs(g)) <= 1e-8
    ls = solve_phasors_ls(seg, joint.omega0, joint.omegac, structure)
    for k, c in joint.phasors.items():
        assert abs(c - ls[k]) <= 1e-6


def test_config_validation():
    with pytest.raises(ValueError):
        EstimatorConfig(alpha=0)
    with pytest.raises(ValueError):
        EstimatorConfig(max_iters=0)
    with pytest.raises(ValueError):
        EstimatorConfig(mode="newton")
