"""Mean-field amplitude equation, bistability window and critical pump."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NoBistabilityError
from .operators import ModelParams


def mf_flow(alpha: complex, p: ModelParams) -> complex:
    """Time derivative of the scaled amplitude, ``-(kappa + i delta + i u |alpha|^2) alpha + epsilon``."""
    return -(p.kappa + 1j * p.delta + 1j * p.u * abs(alpha) ** 2) * alpha + p.epsilon


class BistabilityEdges(NamedTuple):
    eps_lo: float
    eps_hi: float
    n_at_lo: float  # photon number of the saddle-node at eps_lo
    n_at_hi: float


def _eps_of_n(n: float, p: ModelParams) -> float:
    return math.sqrt(n * (p.kappa ** 2 + (p.delta + n * p.u) ** 2))


def bistability_edges(p: ModelParams) -> BistabilityEdges:
    """Edges of the window with three mean-field steady states.

    The two turning points ``n = (-2 delta +- sqrt(delta^2 - 3 kappa^2)) / 3u``
    are mapped to pumps and returned sorted; the larger occupation sits at the
    lower edge.
    """
    if p.u <= 0:
        raise NoBistabilityError("the linear cavity (u = 0) has no bistability")
    disc = p.delta ** 2 - 3.0 * p.kappa ** 2
    if p.delta >= 0 or disc < -1e-12 * p.delta ** 2:
        raise NoBistabilityError(
            f"bistability needs delta < -sqrt(3) kappa; got delta={p.delta}, kappa={p.kappa}"
        )
    root = math.sqrt(max(disc, 0.0))
    n_plus = (-2.0 * p.delta + root) / (3.0 * p.u)
    n_minus = (-2.0 * p.delta - root) / (3.0 * p.u)
    e_plus, e_minus = _eps_of_n(n_plus, p), _eps_of_n(n_minus, p)
    if e_plus <= e_minus:
        return BistabilityEdges(e_plus, e_minus, n_plus, n_minus)
    return BistabilityEdges(e_minus, e_plus, n_minus, n_plus)


@dataclass(frozen=True)
class MeanFieldResult:
    n: np.ndarray  # |alpha|^2 per root, ascending
    alpha: np.ndarray
    stable: np.ndarray

    def __len__(self):
        return len(self.n)


def jacobian(alpha: complex, p: ModelParams) -> np.ndarray:
    """Linearization of the flow in ``(alpha, conj(alpha))``."""
    d_a = -(p.kappa + 1j * p.delta + 2j * p.u * abs(alpha) ** 2)
    d_ab = -1j * p.u * alpha ** 2
    return np.array([[d_a, d_ab], [np.conj(d_ab), np.conj(d_a)]])


def _cubic_residual(n, eps, p):
    return n * (p.kappa ** 2 + (p.delta + p.u * n) ** 2) - eps ** 2


def mf_steady_states(eps: float, p: ModelParams) -> MeanFieldResult:
    """All steady states of the mean-field flow at pump ``eps``."""
    if eps == 0:
        return MeanFieldResult(np.array([0.0]), np.array([0j]), np.array([True]))
    k2, dl, u = p.kappa ** 2, p.delta, p.u
    if u == 0:
        cands = [eps ** 2 / (k2 + dl ** 2)]
    else:
        raw = np.roots([u * u, 2.0 * dl * u, k2 + dl * dl, -eps * eps])
        scale = max(1.0, float(np.max(np.abs(raw))))
        cands = [r.real for r in raw if abs(r.imag) <= 1e-6 * scale and r.real > -1e-12]
    roots = []
    for n in cands:
        # Newton polish on the real cubic
        n = max(float(n), 0.0)
        for _ in range(50):
            f = _cubic_residual(n, eps, p)
            df = k2 + (dl + u * n) ** 2 + 2.0 * u * n * (dl + u * n)
            if df == 0:
                break
            step = f / df
            n -= step
            if abs(step) <= 1e-16 * max(1.0, abs(n)):
                break
        if all(abs(n - r) > 1e-9 * max(1.0, n) for r in roots):
            roots.append(n)
    roots = np.array(sorted(roots))
    alpha = eps / (p.kappa + 1j * p.delta + 1j * u * roots)
    stable = np.array([np.all(np.linalg.eigvals(jacobian(a, p)).real < 0) for a in alpha])
    return MeanFieldResult(roots, alpha, stable)


def integrate_flow(alpha0: complex, p: ModelParams, t: float, dt: float = 1e-3) -> complex:
    """Fixed-step RK4 integration of :func:`mf_flow`."""
    a = complex(alpha0)
    for _ in range(int(round(t / dt))):
        k1 = mf_flow(a, p)
        k2 = mf_flow(a + 0.5 * dt * k1, p)
        k3 = mf_flow(a + 0.5 * dt * k2, p)
        k4 = mf_flow(a + dt * k3, p)
        a += dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
    return a


# ------------------------------------------------------------ critical pump

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def susceptibility(eps: float, p: ModelParams, N: float, step: float = 1e-3) -> float:
    """Central-difference ``d|<a>|/d eps`` of the exact NESS, per sqrt(N)."""
    from .exactness import exact_moment

    def amp(e):
        return abs(exact_moment(0, 1, p.replace(epsilon=e, N=N))) / math.sqrt(N)

    return (amp(eps + step) - amp(eps - step)) / (2.0 * step)


def critical_pump(p: ModelParams, N: float, tol: float = 1e-3, step: float = 1e-3, scan: int = 24) -> float:
    """Pump of maximal exact-solution susceptibility inside the bistable window.

    A coarse scan brackets the peak, then golden-section search refines it to
    ``tol``. Oracle precision failures propagate as :class:`PrecisionError`.
    """
    lo, hi = bistability_edges(p)[:2]
    grid = np.linspace(lo, hi, scan + 1)
    vals = [susceptibility(e, p, N, step) for e in grid]
    i = int(np.argmax(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, scan)]
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = susceptibility(c, p, N, step), susceptibility(d, p, N, step)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = susceptibility(c, p, N, step)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = susceptibility(d, p, N, step)
    return 0.5 * (a + b)


__all__ = [
    "BistabilityEdges",
    "MeanFieldResult",
    "bistability_edges",
    "critical_pump",
    "integrate_flow",
    "jacobian",
    "mf_flow",
    "mf_steady_states",
    "susceptibility",
]
