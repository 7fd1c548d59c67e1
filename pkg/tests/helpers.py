"""Shared helpers for the test-suite: session memo, quench runner, random states."""
import numpy as np

from kerrq.operators import ModelParams

# criterion id -> (passed, detail); filled by test_acceptance.py, printed by conftest
ACCEPTANCE = {}

_cache = {}


def cached(key, make):
    if key not in _cache:
        _cache[key] = make()
    return _cache[key]


def quench(eps_f, N, t_max, entropy=True, gaussianity=True, eps_i=0.5, model=None):
    """Memoized quench run; a run with entropy columns also serves requests without them."""
    from kerrq.dynamics import QuenchSpec, run_quench

    model = model or ModelParams()
    key = ("quench", round(float(eps_f), 12), float(N), float(t_max), gaussianity, eps_i, model)
    if (key, True) in _cache:
        return _cache[(key, True)]
    return cached((key, entropy), lambda: run_quench(QuenchSpec(
        eps_i=eps_i, eps_f=float(eps_f), N=N, t_max=t_max, model=model,
        with_entropy=entropy, with_gaussianity=gaussianity)))


def random_density(d, rng, rank=None):
    rank = rank or d
    X = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = X @ X.conj().T
    return rho / np.trace(rho).real


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)
