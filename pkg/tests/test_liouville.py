import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings, strategies as st

from helpers import random_density, rel
from kerrq import liouville
from kerrq.errors import NearDegeneracyError
from kerrq.exactness import exact_moment
from kerrq.liouville import (
    adjoint_on_identity, build_liouvillian, lindbladian, solve_ness, spectrum, trace_row, unvec, vec,
)
from kerrq.operators import (
    ModelParams, annihilation, build_hamiltonian, choose_truncation, coherent_state, fock_state, moments,
)


def _direct_lindblad(p, d, rho):
    """Matrix-level action, independent of the Kronecker construction."""
    H = build_hamiltonian(p, d)
    a = annihilation(d)
    ad = a.conj().T
    g = 2 * p.kappa
    return -1j * (H @ rho - rho @ H) + g * (a @ rho @ ad - 0.5 * (ad @ a @ rho + rho @ ad @ a))


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 9), st.integers(0, 2 ** 31))
def test_vectorization_matches_direct_action(d, seed):
    rng = np.random.default_rng(seed)
    p = ModelParams(epsilon=float(rng.uniform(0, 1.5)), N=float(rng.uniform(1, 6)))
    rho = random_density(d, rng)
    L = build_liouvillian(p, d)
    np.testing.assert_allclose(L.apply(rho), _direct_lindblad(p, d, rho), atol=1e-12)


def test_vec_roundtrip():
    X = np.arange(12.0).reshape(3, 4)[:, :3]
    assert np.array_equal(unvec(vec(X), 3), X)
    assert vec(X)[1] == X[1, 0]


def test_undriven_linear_vacuum_is_fixed():
    L = build_liouvillian(ModelParams(epsilon=0.0, u=0.0), 8)
    np.testing.assert_allclose(L.apply(fock_state(0, 8)), 0, atol=1e-15)


def test_two_level_eigenvalues():
    L = build_liouvillian(ModelParams(delta=0.0, epsilon=0.0, kappa=0.5), 2)
    w = np.sort_complex(np.linalg.eigvals(L.matrix.toarray()))
    np.testing.assert_allclose(w, [-1, -0.5, -0.5, 0], atol=1e-14)


@pytest.mark.parametrize("seed", range(3))
def test_trace_preservation_random_states(seed):
    rng = np.random.default_rng(seed)
    p = ModelParams(epsilon=float(rng.uniform(0, 1.3)), N=float(rng.integers(1, 6)), u=float(rng.uniform(0, 2)))
    d = 15
    L = build_liouvillian(p, d)
    np.testing.assert_allclose(adjoint_on_identity(L), 0, atol=1e-12)
    t = trace_row(d)
    for _ in range(10):
        X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        X = X + X.conj().T
        assert abs(t @ (L.matrix @ vec(X))) < 1e-10


def test_ness_undriven_is_vacuum():
    rho = solve_ness(build_liouvillian(ModelParams(epsilon=0.0), 10))
    np.testing.assert_allclose(rho, fock_state(0, 10), atol=1e-12)


def test_ness_linear_cavity_is_coherent():
    p = ModelParams(u=0.0, epsilon=0.5)
    alpha = p.E / (p.kappa + 1j * p.delta)
    assert alpha == pytest.approx(0.05882 + 0.23529j, abs=1e-5)
    rho = solve_ness(build_liouvillian(p, 20))
    np.testing.assert_allclose(rho, coherent_state(alpha, 20), atol=1e-10)
    a, n = moments(rho)
    assert n == pytest.approx(0.058824, abs=1e-6)


def test_ness_against_exact_moments(base):
    d = choose_truncation(base) + 1
    a, n = moments(solve_ness(build_liouvillian(base, d)))
    assert rel(a, exact_moment(0, 1, base)) < 1e-6
    assert rel(n, exact_moment(1, 1, base).real) < 1e-6


def test_ness_against_dense_null_space(base):
    p = base.replace(epsilon=0.9, N=2.0)
    L = build_liouvillian(p, 18)
    ns = sla.null_space(L.matrix.toarray(), rcond=1e-12)
    assert ns.shape[1] == 1
    ref = unvec(ns[:, 0], 18)
    ref = ref / np.trace(ref)
    np.testing.assert_allclose(solve_ness(L), ref, atol=1e-10)


def test_sparse_and_dense_paths_agree(base, monkeypatch):
    p = base.replace(epsilon=0.9, N=2.0)
    L = build_liouvillian(p, 18)
    dense_rho = solve_ness(L)
    dense_spec = spectrum(L, 4)
    monkeypatch.setattr(liouville, "DENSE_LIMIT", 10)
    np.testing.assert_allclose(solve_ness(L), dense_rho, atol=1e-10)
    sparse_spec = spectrum(L, 4)
    np.testing.assert_allclose(sparse_spec.eigenvalues, dense_spec.eigenvalues, atol=1e-9)


def test_ness_degenerate_generator():
    # no drive, no loss: every Fock projector is stationary
    d = 4
    L = liouville.Superoperator(lindbladian(np.zeros((d, d)), annihilation(d), 0.0), d)
    with pytest.raises(NearDegeneracyError) as info:
        solve_ness(L)
    assert len(info.value.candidates) == 2


def test_linear_cavity_gap():
    p = ModelParams(u=0.0, epsilon=0.0)
    s = spectrum(build_liouvillian(p, 10), k=6)
    assert s.eigenvalues[0] == pytest.approx(0, abs=1e-12)
    assert s.gap == pytest.approx(0.5, abs=1e-12)
    # coherences |n><m| decay at -kappa (n+m) - i delta (n-m)
    assert sorted(s.eigenvalues[1:3].imag) == pytest.approx([-2.0, 2.0], abs=1e-12)


def test_spectrum_eigenmatrices(base):
    L = build_liouvillian(base.replace(epsilon=0.9, N=2.0), 16)
    s = spectrum(L, 3, eigenmatrices=True)
    for z, M in zip(s.eigenvalues, s.eigenmatrices):
        np.testing.assert_allclose(L.apply(M), z * M, atol=1e-9 * np.abs(M).max())


def test_gap_closes_inside_window(base):
    def gap(eps, N):
        p = base.replace(epsilon=eps, N=N)
        return spectrum(build_liouvillian(p, choose_truncation(p) + 1), 4).gap

    g09_5 = gap(0.9, 5.0)
    assert g09_5 < gap(0.3, 5.0)
    assert g09_5 < gap(0.9, 2.0)
