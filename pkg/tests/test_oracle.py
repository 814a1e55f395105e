import math

import numpy as np
import pytest

from zenolab.errors import ConvergenceError
from zenolab.model import custom_params, hydrogen_params
from zenolab.oracle import (
    DiscretizedModel,
    ResolutionWarning,
    bromwich_inverse,
    diagonalize,
    discretized_evolution,
    spectral_inverse,
)
from zenolab.survival import y_cut_term, y_pole_term


def pole_plus_cut(tau, params, pole):
    return y_pole_term(tau, pole) + y_cut_term(tau, params)


# --- Bromwich -------------------------------------------------------------------

def test_bromwich_small_tau(hydrogen):
    for tau in (1e-6, 1e-3):
        assert abs(bromwich_inverse(tau, hydrogen) - 1) < 2 * hydrogen.a * tau


def test_bromwich_hydrogen_tau_100(hydrogen, hydrogen_pole):
    assert abs(bromwich_inverse(100.0, hydrogen) - pole_plus_cut(100.0, hydrogen, hydrogen_pole)) < 1e-6


def test_bromwich_free_limit():
    free = custom_params(1.0, 1e-14, 0.25)
    for tau in (1.0, 30.0):
        assert abs(bromwich_inverse(tau, free) - np.exp(-0.25j * tau)) < 1e-10


def test_bromwich_abscissa_independence(synthetic):
    tol = 1e-10
    a = bromwich_inverse(5.0, synthetic, abscissa=0.5, tol=tol)
    b = bromwich_inverse(5.0, synthetic, abscissa=1.0, tol=tol)
    assert abs(a - b) < 2 * tol


def test_bromwich_rejects(synthetic):
    with pytest.raises(ValueError):
        bromwich_inverse(0.0, synthetic)
    with pytest.raises(ValueError):
        bromwich_inverse(1.0, synthetic, abscissa=-1.0)
    with pytest.raises(ConvergenceError):
        bromwich_inverse(100.0, synthetic, abscissa=1.0)


# --- spectral -------------------------------------------------------------------

@pytest.mark.parametrize("which", ["hydrogen", "synthetic"])
def test_spectral_normalization(which, hydrogen, synthetic):
    params = hydrogen if which == "hydrogen" else synthetic
    assert abs(spectral_inverse(0.0, params) - 1) < 1e-6


def test_spectral_synthetic_full_decay(synthetic, synthetic_pole):
    taus = [0.05, 2.0, 40.0, 300.0, 1500.0, 3000.0]
    for tau in taus:
        y = spectral_inverse(tau, synthetic)
        assert abs(y) <= 1 + 1e-6
        assert abs(y - pole_plus_cut(tau, synthetic, synthetic_pole)) < 1e-4


def test_spectral_rejects(synthetic):
    with pytest.raises(ValueError):
        spectral_inverse(-1.0, synthetic)


# --- discretized Hamiltonian ------------------------------------------------------

def test_model_structure(synthetic):
    m = DiscretizedModel.build(synthetic, 400, 20.0)
    assert np.all(np.diff(m.nodes) > 0) and m.nodes[0] > 0
    assert np.all(m.weights > 0)
    h = m.hamiltonian()
    assert h.shape == (401, 401)
    assert np.array_equal(h, h.T)
    assert h[0, 0] == synthetic.a


def test_coupling_sum_converges(synthetic):
    chi = synthetic.chi
    for n, x in ((400, 10.0), (4000, 20.0)):
        total = np.sum(DiscretizedModel.build(synthetic, n, x).couplings ** 2)
        # int_0^X g = (1 - (1 + X^2)^-3) / 6
        assert abs(total - chi / 6 * (1 - (1 + x * x) ** -3)) < 1e-12 * chi
    assert abs(total - chi / 6) < 1e-8 * chi


def test_model_rejects(synthetic):
    with pytest.raises(ValueError):
        DiscretizedModel.build(synthetic, 50, 20.0)
    with pytest.raises(ValueError):
        DiscretizedModel.build(synthetic, 200, 5.0)


def test_resolution_warning(hydrogen):
    model = DiscretizedModel.build(hydrogen, 100, 10.0)
    with pytest.warns(ResolutionWarning):
        diagonalize(model, hydrogen)


def test_unitarity_small_model(synthetic):
    model = DiscretizedModel.build(synthetic, 300, 20.0)
    data, vectors = diagonalize(model, keep_vectors=True)
    assert abs(data.amplitude(0.0)[0] - 1) < 1e-12
    for tau in (0.0, 1.0, 50.0, 700.0):
        psi = data.state(tau, vectors)
        assert abs(np.vdot(psi, psi).real - 1) < 1e-10
        assert abs(psi[0] - data.amplitude(tau)[0]) < 1e-12


def test_discrete_initial_value_and_bound(synthetic_eigendata):
    assert abs(synthetic_eigendata.amplitude(0.0)[0] - 1) < 1e-12
    p = np.abs(synthetic_eigendata.amplitude(np.linspace(0, 3000, 3001))) ** 2
    assert p.max() <= 1 + 1e-10


def test_discrete_zeno_curvature(synthetic, synthetic_eigendata):
    h = 1e-2
    p = np.abs(synthetic_eigendata.amplitude([h])[0]) ** 2
    curvature = 2 * (1 - p) / (2 * h * h)
    assert curvature == pytest.approx(synthetic.chi / 6, rel=1e-2)


def test_discretized_evolution_wrapper():
    params = custom_params(1.0, 5e-2, 0.3)
    taus = [0.0, 0.5, 3.0]
    y = discretized_evolution(params, 200, 12.0, taus)
    ref = diagonalize(DiscretizedModel.build(params, 200, 12.0)).amplitude(taus)
    assert np.allclose(y, ref, rtol=0, atol=1e-14)
    assert abs(y[0] - 1) < 1e-12


# --- pairwise agreement -------------------------------------------------------------

def test_oracles_agree_pairwise(synthetic, synthetic_eigendata):
    taus = [0.1, 3.0, 60.0, 400.0]
    disc = synthetic_eigendata.amplitude(taus)
    for tau, yd in zip(taus, disc):
        yb = bromwich_inverse(tau, synthetic)
        ys = spectral_inverse(tau, synthetic)
        assert abs(yb - ys) < 1e-9
        # the discrete model carries its own discretization error
        assert abs(yb - yd) < 1e-3


def test_bromwich_agrees_with_spectral_hydrogen(hydrogen):
    for tau in (0.5, 50.0, 5000.0):
        assert abs(bromwich_inverse(tau, hydrogen) - spectral_inverse(tau, hydrogen)) < 1e-9
