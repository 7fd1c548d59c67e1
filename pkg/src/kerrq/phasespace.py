"""Husimi Q-function fields and the phase-space entropy functionals.

Everything is computed from two Bargmann fields sampled on a square grid,

    Q(mu) = <mu|rho|mu> / pi,        A(mu) = <mu|a rho|mu> / pi,

related by ``dQ/d(conj mu) = -mu Q + A``. The dissipative current is
``J = -kappa A``, so no numerical differentiation of Q is needed:

* Wehrl entropy         ``S_Q  = -int Q ln Q``
* dissipative production ``Pi_J = 2 kappa int |A|^2 / Q``
* its fluctuation part   ``Pi_d = 2 kappa int |A - <a> Q|^2 / Q``
* unitary production     ``Pi_U = U int Im[conj(mu)^2 (A - mu Q)^2 / Q]``
* flux                   ``Phi  = 2 kappa <a^dag a>``

All integrals use the midpoint rule with cell area ``h^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import GridBudgetError, TruncationError
from .operators import TAIL_TOL, ModelParams, moments, tail_population

NORM_TOL = 1e-4
Q_EXCLUDE = 1e-14  # relative cutoff for the 1/Q integrands
DEFAULT_SPACING = 0.1
MAX_POINTS = 10 ** 7


@dataclass(frozen=True)
class PhaseGrid:
    center: complex
    half_width: float
    spacing: float

    def __post_init__(self):
        if self.spacing <= 0:
            raise ValueError("grid spacing must be positive")
        if self.half_width < 3:
            raise ValueError("grid half-width must be at least 3")

    @property
    def m(self) -> int:
        return int(math.ceil(self.half_width / self.spacing - 1e-9))

    @property
    def side(self) -> int:
        return 2 * self.m + 1

    @property
    def size(self) -> int:
        return self.side ** 2

    @property
    def weight(self) -> float:
        return self.spacing ** 2

    def axis(self) -> np.ndarray:
        return self.spacing * np.arange(-self.m, self.m + 1)

    def points(self) -> np.ndarray:
        """Grid points, flattened row-major with the imaginary offset outermost."""
        x = self.axis()
        return (self.center + x[None, :] + 1j * x[:, None]).ravel()


@dataclass
class HusimiField:
    Q: np.ndarray
    A: np.ndarray
    grid: PhaseGrid
    norm: float
    mu: np.ndarray = field(repr=False)

    @property
    def qcut(self) -> float:
        return Q_EXCLUDE * float(self.Q.max())


def husimi_field(rho: np.ndarray, grid: PhaseGrid) -> HusimiField:
    """Evaluate Q and A on ``grid``.

    The truncated coherent states reproduce ``<mu|rho|mu>`` exactly for any
    ``rho`` inside the cutoff, so the only truncation guard needed is the
    state's own Fock tail.
    """
    tail = tail_population(rho)
    if tail > TAIL_TOL:
        raise TruncationError(f"Fock tail population {tail:.3e} too large for phase-space evaluation")
    mu = grid.points()
    Q, A = _kernels.bargmann_fields(mu, rho)
    return HusimiField(Q, A, grid, float(Q.sum() * grid.weight), mu)


def _initial_grid(rho: np.ndarray, spacing: float) -> PhaseGrid:
    mean, n_exp = moments(rho)
    return PhaseGrid(mean, max(5.0, 1.5 * math.sqrt(max(n_exp, 0.0)) + 4.0), spacing)


def adaptive_field(rho: np.ndarray, spacing: float = DEFAULT_SPACING, norm_tol: float = NORM_TOL,
                   max_points: int = MAX_POINTS, grid: PhaseGrid | None = None) -> HusimiField:
    """Field on a grid grown (mass missing) or refined (quadrature excess) until ``|norm - 1| <= norm_tol``."""
    g = grid or _initial_grid(rho, spacing)
    while True:
        if g.size > max_points:
            raise GridBudgetError(f"phase-space grid needs more than {max_points} points")
        f = husimi_field(rho, g)
        err = f.norm - 1.0
        if abs(err) <= norm_tol:
            return f
        if err < 0:
            g = PhaseGrid(g.center, 1.5 * g.half_width, g.spacing)
        else:
            g = PhaseGrid(g.center, g.half_width, 0.5 * g.spacing)


def build_grid(rho: np.ndarray, N: float = 1.0, p: ModelParams | None = None,
               spacing: float = DEFAULT_SPACING) -> PhaseGrid:
    """Grid centred on ``<a>`` with half-width ``max(5, 1.5 sqrt(<n>) + 4)``, adapted to the norm invariant."""
    return adaptive_field(rho, spacing).grid


# ---------------------------------------------------------- functionals

def _sums(f: HusimiField, shift: complex = 0.0):
    s = _kernels.functional_sums(f.mu, f.Q, f.A, shift, f.qcut)
    w = f.grid.weight
    return tuple(v * w for v in s)


def wehrl_entropy(f: HusimiField) -> float:
    return _sums(f)[1]


def entropy_flux(rho: np.ndarray, alpha: complex, N: float, kappa: float):
    """``(Phi, Phi_ext, Phi_q)`` with ``Phi = 2 kappa <a^dag a>`` and ``Phi_ext = 2 kappa N |alpha|^2``."""
    _, n_exp = moments(rho)
    phi = 2.0 * kappa * n_exp
    phi_ext = 2.0 * kappa * N * abs(alpha) ** 2
    return phi, phi_ext, phi - phi_ext


def flux_quadrature(f: HusimiField, kappa: float) -> float:
    """Phase-space form of the flux, ``-int (conj(mu) J + mu conj(J))``."""
    return 2.0 * kappa * _sums(f)[5]


def pi_J(f: HusimiField, kappa: float) -> float:
    return 2.0 * kappa * _sums(f)[2]


def pi_d(f: HusimiField, alpha: complex, N: float, kappa: float):
    """``(Pi_ext, Pi_d)``: production of the mean flow and of the displaced current."""
    shift = math.sqrt(N) * alpha
    pid = 2.0 * kappa * _sums(f, shift)[3]
    return 2.0 * kappa * N * abs(alpha) ** 2, pid


def pi_U(f: HusimiField, U: float) -> float:
    if U == 0:
        return 0.0
    return U * _sums(f)[4]


def pi_U_from_derivatives(f: HusimiField, U: float) -> float:
    """``(iU/2) int [mu^2 (dQ/dmu)^2 - conj(mu)^2 (dQ/dconj(mu))^2] / Q`` with finite-difference derivatives.

    Independent of the Bargmann field A; used to cross-check :func:`pi_U`.
    """
    side, h = f.grid.side, f.grid.spacing
    Qg = f.Q.reshape(side, side)
    dx = np.gradient(Qg, h, axis=1).ravel()
    dy = np.gradient(Qg, h, axis=0).ravel()
    dbar = 0.5 * (dx + 1j * dy)
    keep = f.Q >= f.qcut
    mub = f.mu.conj()
    z = np.where(keep, mub ** 2 * dbar ** 2 / np.where(keep, f.Q, 1.0), 0.0)
    return float(U * np.sum(z.imag) * f.grid.weight)


# ---------------------------------------------------------- records

@dataclass
class EntropyRecord:
    S_Q: float
    Pi_J: float
    Pi_ext: float
    Pi_d: float
    Pi_U: float
    Phi: float
    Phi_ext: float
    Phi_q: float
    balance_residual: float = float("nan")
    dS_dt: float = float("nan")
    norm_error: float = float("nan")

    @property
    def balance(self) -> float:
        """``Pi_U + Pi_J - Phi``, the entropy rate predicted by the split."""
        return self.Pi_U + self.Pi_J - self.Phi


def snapshot(rho: np.ndarray, p: ModelParams, spacing: float = DEFAULT_SPACING,
             field_out: list | None = None) -> EntropyRecord:
    """All instantaneous functionals of one state (no time derivative)."""
    f = adaptive_field(rho, spacing)
    if field_out is not None:
        field_out.append(f)
    mean, _ = moments(rho)
    alpha = mean / math.sqrt(p.N)
    norm, wehrl, pij, pid, piu, _ = _sums(f, mean)
    phi, phi_ext, phi_q = entropy_flux(rho, alpha, p.N, p.kappa)
    return EntropyRecord(
        S_Q=wehrl,
        Pi_J=2.0 * p.kappa * pij,
        Pi_ext=2.0 * p.kappa * abs(mean) ** 2,
        Pi_d=2.0 * p.kappa * pid,
        Pi_U=p.U * piu if p.U else 0.0,
        Phi=phi,
        Phi_ext=phi_ext,
        Phi_q=phi_q,
        norm_error=norm - 1.0,
    )


def entropy_record(states, dt: float, p: ModelParams, spacing: float = DEFAULT_SPACING) -> EntropyRecord:
    """Record at the middle of three consecutive states, with central-difference ``dS_Q/dt``."""
    before, mid, after = states
    s0 = snapshot(before, p, spacing).S_Q
    rec = snapshot(mid, p, spacing)
    s2 = snapshot(after, p, spacing).S_Q
    rec.dS_dt = (s2 - s0) / (2.0 * dt)
    rec.balance_residual = abs(rec.dS_dt - rec.balance)
    return rec


def time_derivative(values: np.ndarray, dt: float) -> np.ndarray:
    """Second-order finite differences on a uniform grid (central inside, one-sided at the ends)."""
    v = np.asarray(values, dtype=float)
    out = np.full(v.shape, np.nan)
    if v.size >= 3:
        out[1:-1] = (v[2:] - v[:-2]) / (2.0 * dt)
        out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dt)
        out[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * dt)
    elif v.size == 2:
        out[:] = (v[1] - v[0]) / dt
    return out
