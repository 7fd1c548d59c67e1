"""Vectorized GKLS generator, steady state and low-lying spectrum.

States are vectorized column-major (``vec(rho)[i + d*j] = rho[i, j]``), so
``vec(A X B) = (B^T kron A) vec(X)``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceError, InvalidDimensionError, NearDegeneracyError, StateValidityError
from .operators import POSITIVITY_TOL, ModelParams, annihilation, build_hamiltonian

log = logging.getLogger(__name__)

DENSE_LIMIT = 400  # d^2 above which only sparse eigensolvers are used
DEGENERACY_TOL = 1e-12
NESS_RESIDUAL_TOL = 1e-10
# spectrum shift: on the stable side of the axis, far enough from 0 that
# the inverted operator stays well conditioned for the outer eigenvalues
SPECTRUM_SHIFT = 1e-3


@dataclass(frozen=True)
class Superoperator:
    matrix: sp.csr_matrix
    d: int
    params: ModelParams | None = None

    def __matmul__(self, vec):
        return self.matrix @ vec

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return (self.matrix @ vec(rho)).reshape(self.d, self.d, order="F")


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(v).reshape(d, d, order="F")


def lindbladian(H: np.ndarray, c_op: np.ndarray, rate: float) -> sp.csr_matrix:
    """``-i[H, .] + rate (c . c^dag - {c^dag c, .}/2)`` as a sparse matrix."""
    d = H.shape[0]
    if H.shape != (d, d) or c_op.shape != (d, d):
        raise InvalidDimensionError(f"operator shapes {H.shape} and {c_op.shape} disagree")
    I = sp.identity(d, dtype=complex, format="csr")
    Hs, cs = sp.csr_matrix(H), sp.csr_matrix(c_op)
    cdc = (cs.conj().T @ cs).tocsr()
    L = -1j * (sp.kron(I, Hs) - sp.kron(Hs.T, I))
    L = L + rate * (sp.kron(cs.conj(), cs) - 0.5 * sp.kron(I, cdc) - 0.5 * sp.kron(cdc.T, I))
    L = L.tocsr()
    L.eliminate_zeros()
    return L


def build_liouvillian(p: ModelParams, d: int) -> Superoperator:
    H = build_hamiltonian(p, d)
    return Superoperator(lindbladian(H, annihilation(d), 2.0 * p.kappa), d, p)


def trace_row(d: int) -> np.ndarray:
    """Row vector ``t`` with ``t @ vec(rho) = tr(rho)``."""
    t = np.zeros(d * d, dtype=complex)
    t[:: d + 1] = 1.0
    return t


def adjoint_on_identity(L: Superoperator) -> np.ndarray:
    """``L^dag(1)`` vectorized; vanishes for a trace-preserving generator."""
    return np.asarray(L.matrix.conj().T @ trace_row(L.d))


def _finish_state(v: np.ndarray, d: int) -> np.ndarray:
    rho = unvec(v, d)
    tr = np.trace(rho)
    if not np.isfinite(tr) or abs(tr) < 1e-12 * np.abs(rho).max():
        raise StateValidityError("null vector is traceless; it is a coherence, not a state")
    rho = rho / tr
    rho = 0.5 * (rho + rho.conj().T)
    w, V = np.linalg.eigh(rho)
    if w[0] < -POSITIVITY_TOL:
        raise StateValidityError(f"null vector is not a positive state (min eigenvalue {w[0]:.3e})")
    if w[0] < 0:
        w = np.clip(w, 0.0, None)
        rho = (V * w) @ V.conj().T
        rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def _smallest_eigs(L: Superoperator, k: int, sigma: complex):
    n = L.d ** 2
    if n <= DENSE_LIMIT:
        w, V = np.linalg.eig(L.matrix.toarray())
        order = np.argsort(np.abs(w - sigma))[:k]
        return w[order], V[:, order]
    try:
        # fixed start vector: ARPACK's default is random and carries state between calls
        v0 = np.full(n, 1.0 / np.sqrt(n), dtype=complex)
        w, V = spla.eigs(L.matrix.tocsc(), k=k, sigma=sigma, which="LM", tol=0, maxiter=max(1000, 10 * n), v0=v0)
    except spla.ArpackNoConvergence as exc:
        raise ConvergenceError(
            f"shift-invert Arnoldi did not converge for {k} eigenvalues",
            {"k": k, "sigma": sigma, "converged": len(exc.eigenvalues), "dim": n},
        ) from exc
    order = np.argsort(np.abs(w - sigma))
    return w[order], V[:, order]


def solve_ness(L: Superoperator) -> np.ndarray:
    """Unit-trace null vector of ``L``.

    Taken as the smallest-magnitude eigenpair. Raises
    :class:`NearDegeneracyError` if two eigenvalues fall below the degeneracy
    threshold.
    """
    d = L.d
    w, V = _smallest_eigs(L, 2, 0.0 if d * d <= DENSE_LIMIT else 1e-9)
    if abs(w[1]) < DEGENERACY_TOL:
        cands = []
        for j in range(2):
            try:
                cands.append(_finish_state(V[:, j], d))
            except (StateValidityError, ZeroDivisionError, FloatingPointError):
                cands.append(unvec(V[:, j], d))
        raise NearDegeneracyError(
            f"two Liouvillian eigenvalues below {DEGENERACY_TOL:g}: {w[:2]}", w[:2], cands
        )
    v = V[:, 0]
    for _ in range(3):
        rho = _finish_state(v, d)
        res = np.max(np.abs(L.matrix @ vec(rho)))
        if res <= NESS_RESIDUAL_TOL:
            return rho
        # inverse-iteration polish with a tiny shift
        lu = spla.splu((L.matrix - 1e-10 * sp.identity(d * d, format="csr")).tocsc())
        v = lu.solve(vec(rho))
    log.warning("NESS residual %.3e above %.1e after polishing", res, NESS_RESIDUAL_TOL)
    return rho


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray  # sorted by |Re| ascending
    gap: float
    eigenmatrices: list | None = field(default=None, repr=False)


def spectrum(L: Superoperator, k: int = 6, eigenmatrices: bool = False) -> SpectrumResult:
    """The ``k`` eigenvalues of smallest ``|Re|`` and the gap ``|Re zeta_1|``.

    Small problems are diagonalized densely. Above ``DENSE_LIMIT`` a
    shift-invert Arnoldi run at ``SPECTRUM_SHIFT`` collects ``max(2k, k + 8)``
    eigenvalues and the ``k`` of smallest ``|Re|`` among them are kept.
    """
    n = L.d ** 2
    if k < 2 or k > n:
        raise ValueError(f"k must satisfy 2 <= k <= d^2 = {n}, got {k}")
    if n <= DENSE_LIMIT:
        w, V = np.linalg.eig(L.matrix.toarray())
    else:
        w, V = _smallest_eigs(L, min(max(2 * k, k + 8), n - 2), SPECTRUM_SHIFT)
    order = np.lexsort((w.imag, np.abs(w.real)))[:k]
    w, V = w[order], V[:, order]
    # the stationary eigenvalue is first by construction; everything else has Re < 0
    gap = float(abs(w[1].real))
    mats = [unvec(V[:, j], L.d) for j in range(k)] if eigenmatrices else None
    return SpectrumResult(w, gap, mats)
