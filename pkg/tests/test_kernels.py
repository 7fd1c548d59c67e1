import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import random_density
from kerrq import _kernels

needs_numba = pytest.mark.skipif(_kernels.numba_impl is None, reason="numba not importable")


def _grid(center=0j, m=40, h=0.15):
    x = h * np.arange(-m, m + 1)
    return (center + x[None, :] + 1j * x[:, None]).ravel()


@needs_numba
@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2 ** 31), st.integers(2, 25))
def test_fields_agree(seed, d):
    rng = np.random.default_rng(seed)
    rho = random_density(d, rng)
    mu = _grid(complex(*rng.normal(size=2)))
    Qn, An = _kernels.numpy_impl.bargmann_fields(mu, rho)
    Qb, Ab = _kernels.numba_impl.bargmann_fields(mu, rho)
    np.testing.assert_allclose(Qb, Qn, rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(Ab, An, rtol=1e-12, atol=1e-15)


@needs_numba
def test_coherent_matrix_agree():
    mu = _grid(0.5 - 1j, m=10)
    np.testing.assert_allclose(_kernels.numba_impl.coherent_matrix(mu, 30),
                               _kernels.numpy_impl.coherent_matrix(mu, 30), rtol=1e-13, atol=1e-300)


@needs_numba
@pytest.mark.parametrize("shift", [0j, 0.7 - 0.2j])
def test_sums_agree(shift):
    rng = np.random.default_rng(2)
    rho = random_density(12, rng)
    mu = _grid()
    Q, A = _kernels.numpy_impl.bargmann_fields(mu, rho)
    qcut = 1e-14 * Q.max()
    ref = _kernels.numpy_impl.functional_sums(mu, Q, A, shift, qcut)
    got = _kernels.numba_impl.functional_sums(mu, Q, A, shift, qcut)
    np.testing.assert_allclose(got, ref, rtol=1e-10, atol=1e-13)


def test_chunking_is_seamless(monkeypatch):
    rho = random_density(8, np.random.default_rng(0))
    mu = _grid(m=30)
    Q0, A0 = _kernels.numpy_impl.bargmann_fields(mu, rho)
    monkeypatch.setattr(_kernels, "CHUNK", 97)
    Q1, A1 = _kernels.numpy_impl.bargmann_fields(mu, rho)
    np.testing.assert_allclose(Q1, Q0, rtol=1e-14)
    np.testing.assert_allclose(A1, A0, rtol=1e-14)


@pytest.mark.parametrize("flag,expected", [("0", "numpy"), ("1", "numba")])
def test_env_flag_selects_path(flag, expected):
    if expected == "numba" and _kernels.numba_impl is None:
        pytest.skip("numba not importable")
    env = dict(os.environ, KERRQ_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", "from kerrq import _kernels; print(_kernels.active.name)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == expected
