import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings, strategies as st

from helpers import random_density
from kerrq.errors import StateValidityError
from kerrq.gaussianity import gaussian_entropy, non_gaussianity, second_moments, von_neumann_entropy
from kerrq.operators import annihilation, coherent_state, displacement, fock_state, thermal_state

LN4 = math.log(4.0)


def test_vacuum_moments():
    g = second_moments(fock_state(0, 6))
    assert g.mean == 0
    np.testing.assert_allclose(g.covariance, 0.5 * np.eye(2), atol=1e-15)
    assert g.nu_s == pytest.approx(0.5)


def test_coherent_moments():
    a0 = 1.2 - 0.4j
    g = second_moments(coherent_state(a0, 60))
    assert g.mean == pytest.approx(a0, abs=1e-12)
    np.testing.assert_allclose(g.covariance, 0.5 * np.eye(2), atol=1e-10)


def test_fock_one_moments():
    g = second_moments(fock_state(1, 6))
    assert g.mean == 0 and g.a2 == 0
    assert g.n_exp == pytest.approx(1.0)
    assert g.nu_s == pytest.approx(1.5)


def test_uncertainty_violation_rejected():
    bad = np.zeros((3, 3), dtype=complex)
    bad[0, 0] = 1.0
    bad[2, 0] = bad[0, 2] = 0.9  # not positive: <a^2> too large for <n> = 0
    with pytest.raises(StateValidityError):
        second_moments(bad)


def test_entropies():
    assert von_neumann_entropy(coherent_state(0.7, 30)) == pytest.approx(0, abs=1e-12)
    assert von_neumann_entropy(np.eye(4) / 4) == pytest.approx(LN4, abs=1e-12)
    assert von_neumann_entropy(thermal_state(1.0, 200)) == pytest.approx(2 * math.log(2), abs=1e-10)


def test_gaussian_entropy_matches_thermal():
    for nbar in (0.0, 0.3, 1.0, 4.0):
        expected = (1 + nbar) * math.log(1 + nbar) - (nbar * math.log(nbar) if nbar else 0.0)
        assert gaussian_entropy(nbar + 0.5) == pytest.approx(expected, abs=1e-14)


def test_negative_eigenvalue_rejected():
    with pytest.raises(StateValidityError):
        von_neumann_entropy(np.diag([1.1, -0.1]).astype(complex))


def test_coherent_state_is_gaussian():
    assert non_gaussianity(coherent_state(1.5 + 0.5j, 60)) == pytest.approx(0, abs=1e-9)


def test_squeezed_state_is_gaussian():
    d = 80
    a = annihilation(d)
    r = 0.4
    S = sla.expm(0.5 * r * (a @ a - a.conj().T @ a.conj().T))
    psi = S[:, 0]
    assert non_gaussianity(np.outer(psi, psi.conj())) < 1e-8


def test_fock_one_against_explicit_reference_state():
    d = 200
    rho = fock_state(1, d)
    rho_g = thermal_state(1.0, d)  # same first and second moments as |1>
    w, V = np.linalg.eigh(rho_g)
    log_g = (V * np.log(w)) @ V.conj().T
    wr = np.linalg.eigvalsh(rho)
    wr = wr[wr > 1e-300]
    oracle = float(np.sum(wr * np.log(wr)) - np.trace(rho @ log_g).real)
    assert oracle == pytest.approx(2 * math.log(2), abs=1e-6)
    assert non_gaussianity(rho) == pytest.approx(oracle, abs=1e-6)


def test_displacement_invariance():
    d = 70
    psi = np.zeros(d, dtype=complex)
    psi[[0, 3]] = 1 / math.sqrt(2)
    rho = np.outer(psi, psi.conj())
    D = displacement(0.8 - 0.6j, d)
    shifted = D @ rho @ D.conj().T
    assert non_gaussianity(shifted) == pytest.approx(non_gaussianity(rho), abs=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31), st.integers(2, 8))
def test_nonnegative_for_random_states(seed, d):
    rng = np.random.default_rng(seed)
    rho = random_density(d, rng, rank=int(rng.integers(1, d + 1)))
    # unclipped relative entropy
    raw = gaussian_entropy(second_moments(rho).nu_s) - von_neumann_entropy(rho)
    assert raw >= -1e-10
