"""Hot loops of the phase-space pipeline, in numba and plain numpy.

Two kernels dominate a quench run:

* ``bargmann_fields`` -- ``Q = <mu|rho|mu>/pi`` and ``A = <mu|a rho|mu>/pi``
  on every grid point. Both come out of one product ``V = C rho^T`` with ``C``
  the matrix of truncated coherent-state amplitudes, because
  ``(a rho c)_n = sqrt(n+1) (rho c)_{n+1}``.
* ``functional_sums`` -- one fused pass over the grid accumulating the norm,
  Wehrl entropy, dissipative production (total and displaced), the unitary
  production and the phase-space flux.

The numba path is used when numba imports and ``KERRQ_NUMBA`` is not set to
``0``; ``KERRQ_NUMBA=0`` forces the numpy path. Both paths are always
importable as ``numpy_impl`` / ``numba_impl`` for benchmarking and tests.
"""
from __future__ import annotations

import math
import os
from types import SimpleNamespace

import numpy as np

CHUNK = 16384  # grid points per block; bounds the (points x d) temporaries

# ------------------------------------------------------------------ numpy


def _coherent_matrix_np(mu: np.ndarray, d: int) -> np.ndarray:
    C = np.empty((mu.size, d), dtype=np.complex128)
    C[:, 0] = np.exp(-0.5 * (mu.real ** 2 + mu.imag ** 2))
    if d > 1:
        C[:, 1:] = mu[:, None] / np.sqrt(np.arange(1, d, dtype=np.float64))[None, :]
        np.cumprod(C, axis=1, out=C)
    return C


def _fields_np(mu: np.ndarray, rho: np.ndarray):
    d = rho.shape[0]
    P = mu.size
    Q = np.empty(P)
    A = np.empty(P, dtype=np.complex128)
    rhoT = np.ascontiguousarray(rho.T)
    sq = np.sqrt(np.arange(1, d, dtype=np.float64))
    for s in range(0, P, CHUNK):
        C = _coherent_matrix_np(mu[s:s + CHUNK], d)
        V = C @ rhoT
        Cc = C.conj()
        Q[s:s + CHUNK] = np.einsum("pn,pn->p", Cc, V).real / math.pi
        A[s:s + CHUNK] = np.einsum("pn,pn->p", Cc[:, :-1], V[:, 1:] * sq) / math.pi
    return Q, A


def _sums_np(mu, Q, A, shift, qcut):
    """Unweighted sums; callers multiply by the cell area h^2."""
    mub = mu.conj()
    r2 = mu.real ** 2 + mu.imag ** 2
    pos = Q > 1e-300
    lnQ = np.log(np.where(pos, Q, 1.0))
    keep = Q >= qcut
    Qk = np.where(keep, Q, 1.0)
    absA2 = A.real ** 2 + A.imag ** 2
    D = A - shift * Q
    absD2 = D.real ** 2 + D.imag ** 2
    norm = Q.sum()
    wehrl = -np.sum(np.where(pos, Q * lnQ, 0.0))
    pij = np.sum(np.where(keep, absA2 / Qk, 0.0))
    pid = np.sum(np.where(keep, absD2 / Qk, 0.0))
    piu = np.sum(np.imag(-2.0 * r2 * mub * A) + np.where(keep, np.imag(mub * mub * A * A) / Qk, 0.0))
    flux = np.sum((mub * A).real)
    return norm, wehrl, pij, pid, piu, flux


numpy_impl = SimpleNamespace(
    name="numpy", coherent_matrix=_coherent_matrix_np, bargmann_fields=_fields_np, functional_sums=_sums_np
)

# ------------------------------------------------------------------ numba

try:
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
    # the default layer probes TBB first and warns on old installs
    if numba.config.THREADING_LAYER == "default":
        numba.config.THREADING_LAYER = "workqueue"
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

if HAVE_NUMBA:

    @njit(parallel=True, fastmath=False, cache=True, nogil=True)
    def _coherent_matrix_nb(mu, d):
        P = mu.size
        C = np.empty((P, d), dtype=np.complex128)
        for p in prange(P):
            m = mu[p]
            c = math.exp(-0.5 * (m.real * m.real + m.imag * m.imag)) + 0j
            C[p, 0] = c
            for n in range(1, d):
                c = c * m / math.sqrt(n)
                C[p, n] = c
        return C

    @njit(parallel=True, cache=True, nogil=True)
    def _contract_nb(C, V, Q, A, offset):
        P, d = C.shape
        for p in prange(P):
            q = 0.0
            acc = 0j
            for n in range(d):
                cc = C[p, n].conjugate()
                q += (cc * V[p, n]).real
                if n + 1 < d:
                    acc += cc * V[p, n + 1] * math.sqrt(n + 1)
            Q[offset + p] = q / math.pi
            A[offset + p] = acc / math.pi

    def _fields_nb(mu, rho):
        d = rho.shape[0]
        P = mu.size
        Q = np.empty(P)
        A = np.empty(P, dtype=np.complex128)
        rhoT = np.ascontiguousarray(rho.T)
        mu = np.ascontiguousarray(mu, dtype=np.complex128)
        for s in range(0, P, CHUNK):
            C = _coherent_matrix_nb(mu[s:s + CHUNK], d)
            V = C @ rhoT  # BLAS zgemm
            _contract_nb(C, V, Q, A, s)
        return Q, A

    @njit(parallel=True, cache=True, nogil=True)
    def _sums_nb(mu, Q, A, shift, qcut):
        P = mu.size
        norm = 0.0
        wehrl = 0.0
        pij = 0.0
        pid = 0.0
        piu = 0.0
        flux = 0.0
        for p in prange(P):
            q = Q[p]
            a = A[p]
            mb = mu[p].conjugate()
            r2 = mu[p].real ** 2 + mu[p].imag ** 2
            norm += q
            if q > 1e-300:
                wehrl -= q * math.log(q)
            t = (-2.0 * r2 * mb * a).imag
            if q >= qcut:
                pij += (a.real * a.real + a.imag * a.imag) / q
                dd = a - shift * q
                pid += (dd.real * dd.real + dd.imag * dd.imag) / q
                t += (mb * mb * a * a).imag / q
            piu += t
            flux += (mb * a).real
        return norm, wehrl, pij, pid, piu, flux

    numba_impl = SimpleNamespace(
        name="numba", coherent_matrix=_coherent_matrix_nb, bargmann_fields=_fields_nb, functional_sums=_sums_nb
    )
else:  # pragma: no cover
    numba_impl = None


def _want_numba() -> bool:
    flag = os.environ.get("KERRQ_NUMBA", "1").strip().lower()
    return HAVE_NUMBA and flag not in ("0", "false", "no", "off")


active = numba_impl if _want_numba() else numpy_impl


def bargmann_fields(mu: np.ndarray, rho: np.ndarray):
    return active.bargmann_fields(np.ascontiguousarray(mu, dtype=np.complex128), np.asarray(rho, dtype=np.complex128))


def functional_sums(mu, Q, A, shift: complex, qcut: float):
    return active.functional_sums(mu, Q, A, complex(shift), float(qcut))
