"""Truncated Fock-space algebra, model parameters and the Kerr Hamiltonian.

Operators are dense ``(d, d)`` complex arrays with ``d = n_max + 1``; a
density matrix is simply a Hermitian, unit-trace ``(d, d)`` array that passes
:func:`check_state`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import InvalidDimensionError, InvalidParameterError, StateValidityError, TruncationError

# DensityMatrix invariants
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-8
POSITIVITY_TOL = 1e-8
TAIL_TOL = 1e-8
TAIL_WIDTH = 5


@dataclass(frozen=True)
class ModelParams:
    """Scaled Kerr-model parameters.

    The physical pump ``E = sqrt(N) * epsilon`` and interaction ``U = u / N``
    are derived on access and never stored. ``u = 0`` is accepted for the
    linear-cavity limit.
    """

    delta: float = -2.0
    kappa: float = 0.5
    u: float = 1.0
    epsilon: float = 0.5
    N: float = 1.0

    def __post_init__(self):
        for name in ("delta", "kappa", "u", "epsilon", "N"):
            v = getattr(self, name)
            if not isinstance(v, (int, float, np.floating, np.integer)) or not math.isfinite(v):
                raise InvalidParameterError(f"{name} must be a finite real number, got {v!r}")
        if self.kappa <= 0:
            raise InvalidParameterError(f"kappa must be > 0, got {self.kappa}")
        if self.N < 1:
            raise InvalidParameterError(f"N must be >= 1, got {self.N}")
        if self.u < 0:
            raise InvalidParameterError(f"u must be >= 0, got {self.u}")
        if self.epsilon < 0:
            raise InvalidParameterError(f"epsilon must be >= 0, got {self.epsilon}")

    @property
    def E(self) -> float:
        return math.sqrt(self.N) * self.epsilon

    @property
    def U(self) -> float:
        return self.u / self.N

    def replace(self, **changes) -> "ModelParams":
        fields = dict(delta=self.delta, kappa=self.kappa, u=self.u, epsilon=self.epsilon, N=self.N)
        fields.update(changes)
        return ModelParams(**fields)


def _check_dim(d) -> int:
    if int(d) != d or d < 1:
        raise InvalidDimensionError(f"Fock dimension must be an integer >= 1, got {d!r}")
    return int(d)


def annihilation(d: int) -> np.ndarray:
    """Truncated ``a`` with ``<n-1|a|n> = sqrt(n)``."""
    d = _check_dim(d)
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), 1).astype(complex)


def number(d: int) -> np.ndarray:
    d = _check_dim(d)
    return np.diag(np.arange(d, dtype=float)).astype(complex)


def build_hamiltonian(p: ModelParams, d: int) -> np.ndarray:
    """``H = delta a^dag a + i E (a^dag - a) + (U/2) a^dag a^dag a a`` in a ``d``-level Fock space."""
    d = _check_dim(d)
    n = np.arange(d, dtype=float)
    a = annihilation(d)
    H = np.diag(p.delta * n + 0.5 * p.U * n * (n - 1)).astype(complex)
    H += 1j * p.E * (a.conj().T - a)
    # exact Hermiticity: the drive block is built antisymmetric-imaginary
    return 0.5 * (H + H.conj().T)


def choose_truncation(p: ModelParams) -> int:
    """Fock cutoff ``n_max >= 3 N n_pred + 20``.

    ``n_pred`` is the bright-branch edge occupation ``n_+`` when the model is
    bistable, raised to the largest mean-field root at the actual pump when
    that is bigger (pumps beyond the bistable window).
    """
    from .meanfield import bistability_edges, mf_steady_states
    from .errors import NoBistabilityError

    n_pred = 0.0
    if p.u > 0:
        try:
            edges = bistability_edges(p)
            n_pred = max(edges.n_at_lo, edges.n_at_hi)
        except NoBistabilityError:
            pass
    roots = mf_steady_states(p.epsilon, p).n
    if len(roots):
        n_pred = max(n_pred, float(max(roots)))
    return int(math.ceil(3.0 * p.N * n_pred + 20.0 - 1e-9))


# ---------------------------------------------------------------- states

def expect(op: np.ndarray, rho: np.ndarray) -> complex:
    return complex(np.einsum("ij,ji->", op, rho))


def moments(rho: np.ndarray) -> tuple[complex, float]:
    """Return ``(<a>, <a^dag a>)`` using only the banded structure of ``a``."""
    d = rho.shape[0]
    s = np.sqrt(np.arange(1, d, dtype=float))
    mean = complex(np.sum(s * np.diagonal(rho, -1)))
    n_exp = float(np.sum(np.arange(d) * np.diagonal(rho).real))
    return mean, n_exp


def tail_population(rho: np.ndarray, width: int = TAIL_WIDTH) -> float:
    d = rho.shape[0]
    return float(np.sum(np.diagonal(rho).real[max(0, d - width):]))


def check_state(rho: np.ndarray, tail: bool = True, positivity: bool = True) -> None:
    """Raise if ``rho`` violates the DensityMatrix invariants."""
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidDimensionError(f"density matrix must be square, got shape {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > HERMITIAN_TOL:
        raise StateValidityError(f"state not Hermitian: max |rho - rho^dag| = {herm:.3e}")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise StateValidityError(f"state trace {tr!r} deviates from 1")
    if positivity:
        lmin = np.linalg.eigvalsh(rho)[0]
        if lmin < -POSITIVITY_TOL:
            raise StateValidityError(f"state not positive: min eigenvalue {lmin:.3e}")
    if tail:
        t = tail_population(rho)
        if t > TAIL_TOL:
            raise TruncationError(f"Fock tail population {t:.3e} exceeds {TAIL_TOL:g}; raise n_max")


def coherent_vector(alpha: complex, d: int) -> np.ndarray:
    """Truncated coherent state ``exp(-|alpha|^2/2) sum alpha^n/sqrt(n!) |n>``."""
    d = _check_dim(d)
    c = np.empty(d, dtype=complex)
    c[0] = np.exp(-0.5 * abs(alpha) ** 2)
    for n in range(1, d):
        c[n] = c[n - 1] * alpha / math.sqrt(n)
    return c


def coherent_state(alpha: complex, d: int) -> np.ndarray:
    c = coherent_vector(alpha, d)
    c /= np.linalg.norm(c)
    return np.outer(c, c.conj())


def fock_state(n: int, d: int) -> np.ndarray:
    rho = np.zeros((d, d), dtype=complex)
    rho[n, n] = 1.0
    return rho


def thermal_state(nbar: float, d: int) -> np.ndarray:
    """Geometric populations ``nbar^n / (1+nbar)^(n+1)``, renormalized in the cutoff."""
    n = np.arange(d)
    p = (nbar / (1.0 + nbar)) ** n / (1.0 + nbar)
    return np.diag(p / p.sum()).astype(complex)


def displacement(beta: complex, d: int) -> np.ndarray:
    """``exp(beta a^dag - conj(beta) a)``; only reliable well below the cutoff."""
    a = annihilation(d)
    return expm(beta * a.conj().T - np.conj(beta) * a)
