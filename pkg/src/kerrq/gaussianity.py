"""Second moments, von Neumann entropy and relative-entropy non-Gaussianity."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import StateValidityError

log = logging.getLogger(__name__)

EIG_FLOOR = 1e-14


@dataclass(frozen=True)
class GaussianMoments:
    mean: complex
    n_exp: float
    a2: complex
    covariance: np.ndarray  # quadratures x, p; vacuum = identity / 2
    nu_s: float


def second_moments(rho: np.ndarray, tol: float = 1e-9) -> GaussianMoments:
    d = rho.shape[0]
    s1 = np.sqrt(np.arange(1, d, dtype=float))
    s2 = np.sqrt(np.arange(1, d - 1, dtype=float) * np.arange(2, d, dtype=float))
    mean = complex(np.sum(s1 * np.diagonal(rho, -1)))
    a2 = complex(np.sum(s2 * np.diagonal(rho, -2))) if d > 2 else 0j
    n_exp = float(np.sum(np.arange(d) * np.diagonal(rho).real))
    dn = n_exp - abs(mean) ** 2
    dm = a2 - mean ** 2
    sigma = np.array([
        [dn + 0.5 + dm.real, dm.imag],
        [dm.imag, dn + 0.5 - dm.real],
    ])
    det = float(np.linalg.det(sigma))
    if det < (0.5 - tol) ** 2:
        raise StateValidityError(f"covariance violates the uncertainty relation (det sigma = {det:.6g})")
    return GaussianMoments(mean, n_exp, a2, sigma, math.sqrt(max(det, 0.25)))


def von_neumann_entropy(rho: np.ndarray) -> float:
    w = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if w[0] < -1e-8:
        raise StateValidityError(f"negative eigenvalue {w[0]:.3e} in entropy evaluation")
    w = w[w > EIG_FLOOR]
    return float(-np.sum(w * np.log(w)))


def gaussian_entropy(nu: float) -> float:
    """Entropy of a single-mode Gaussian state with symplectic eigenvalue ``nu``."""
    hi, lo = nu + 0.5, nu - 0.5
    return hi * math.log(hi) - (lo * math.log(lo) if lo > 0 else 0.0)


def non_gaussianity(rho: np.ndarray) -> float:
    """Relative entropy to the Gaussian state with the same first and second moments.

    Uses ``D(rho || rho_G) = S(rho_G) - S(rho)``, exact because ``ln rho_G`` is
    quadratic in ``a, a^dag`` and the moments match.
    """
    raw = gaussian_entropy(second_moments(rho).nu_s) - von_neumann_entropy(rho)
    if raw < 0:
        log.debug("non-Gaussianity %.3e clipped to 0", raw)
    return max(raw, 0.0)
