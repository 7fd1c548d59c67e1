"""Krylov time propagation and the sudden pump-quench protocol."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .errors import StiffnessError, TruncationError
from .gaussianity import non_gaussianity
from .liouville import Superoperator, build_liouvillian, solve_ness, trace_row, unvec, vec
from .operators import ModelParams, TAIL_TOL, check_state, choose_truncation, moments, tail_population
from .phasespace import DEFAULT_SPACING, EntropyRecord, snapshot, time_derivative

log = logging.getLogger(__name__)

MIN_SUBSTEP = 1e-12
TRACE_DRIFT_TOL = 1e-10


def _round2(x: float) -> float:
    """Round down to two significant digits, as step-size controllers usually do."""
    if x <= 0 or not math.isfinite(x):
        return x
    s = 10.0 ** (math.floor(math.log10(x)) - 1)
    return math.floor(x / s) * s


def expmv(A, v: np.ndarray, t: float, tol: float = 1e-8, m: int = 30, anorm: float | None = None,
          max_reject: int = 50) -> tuple[np.ndarray, dict]:
    """``exp(t A) v`` by restarted Arnoldi with local error control.

    Each substep builds an ``m``-dimensional Krylov basis, exponentiates the
    small Hessenberg matrix, and accepts the step when the estimated local
    error is below ``tol * step``; the next step size is predicted from the
    error estimate. Returns the vector and a stats dict.
    """
    n = v.shape[0]
    m = min(m, n)
    if anorm is None:
        anorm = spla.norm(A, np.inf) if hasattr(A, "tocsr") else np.linalg.norm(A, np.inf)
    anorm = max(anorm, 1e-300)
    w = np.array(v, dtype=complex)
    beta = np.linalg.norm(w)
    stats = {"substeps": 0, "matvecs": 0, "rejects": 0, "min_substep": math.inf, "err": 0.0}
    if beta == 0 or t == 0:
        return w, stats
    btol = 1e-7 * tol
    gamma, delta_ = 0.9, 1.2
    xm = 1.0 / m
    fact = ((m + 1) / math.e) ** (m + 1) * math.sqrt(2 * math.pi * (m + 1))
    t_new = _round2((1.0 / anorm) * ((fact * tol) / (4.0 * beta * anorm)) ** xm)
    t_now = 0.0
    V = np.empty((n, m + 1), dtype=complex)
    while t_now < t:
        t_step = min(t - t_now, t_new)
        V[:, 0] = w / beta
        H = np.zeros((m + 2, m + 2), dtype=complex)
        k = m
        breakdown = False
        for j in range(m):
            p = A @ V[:, j]
            stats["matvecs"] += 1
            for i in range(j + 1):
                H[i, j] = np.vdot(V[:, i], p)
                p -= H[i, j] * V[:, i]
            s = np.linalg.norm(p)
            if s < btol:
                k = j + 1
                breakdown = True
                t_step = t - t_now
                break
            H[j + 1, j] = s
            V[:, j + 1] = p / s
        if not breakdown:
            H[m + 1, m] = 1.0
            avnorm = np.linalg.norm(A @ V[:, m])
            stats["matvecs"] += 1
        rejects = 0
        while True:
            mx = k if breakdown else m + 2
            F = sla.expm(t_step * H[:mx, :mx])
            if breakdown:
                err_loc = btol
                break
            phi1 = abs(beta * F[m, 0])
            phi2 = abs(beta * F[m + 1, 0] * avnorm)
            if phi1 > 10.0 * phi2:
                err_loc, xm = phi2, 1.0 / m
            elif phi1 > phi2:
                err_loc, xm = (phi1 * phi2) / (phi1 - phi2), 1.0 / m
            else:
                err_loc, xm = phi1, 1.0 / (m - 1)
            if err_loc <= delta_ * t_step * tol:
                break
            t_step = _round2(gamma * t_step * (t_step * tol / err_loc) ** xm)
            rejects += 1
            stats["rejects"] += 1
            if rejects > max_reject or t_step < MIN_SUBSTEP:
                raise StiffnessError(
                    f"Krylov substep fell to {t_step:.3e} after {rejects} rejections (local error {err_loc:.3e})"
                )
        mk = k if breakdown else m + 1
        w = beta * (V[:, :mk] @ F[:mk, 0])
        beta = np.linalg.norm(w)
        t_now += t_step
        stats["substeps"] += 1
        stats["min_substep"] = min(stats["min_substep"], t_step)
        stats["err"] += err_loc
        if t_step < MIN_SUBSTEP and t_now < t:
            raise StiffnessError(f"Krylov substep {t_step:.3e} below {MIN_SUBSTEP:g}")
        t_new = _round2(gamma * t_step * (t_step * tol / max(err_loc, 1e-300)) ** xm)
    return w, stats


def propagate(L: Superoperator, rho: np.ndarray, dt: float, tol: float = 1e-8,
              anorm: float | None = None) -> np.ndarray:
    """``exp(L dt) rho`` for one output interval, re-Hermitized."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    v, _ = expmv(L.matrix, vec(rho), dt, tol=tol, anorm=anorm)
    out = unvec(v, L.d)
    out = 0.5 * (out + out.conj().T)
    drift = abs(np.trace(out).real - np.trace(rho).real)
    if drift > TRACE_DRIFT_TOL:
        log.warning("trace drift %.3e in one propagation step", drift)
    return out


# ------------------------------------------------------------ quench


@dataclass(frozen=True)
class QuenchSpec:
    eps_i: float
    eps_f: float
    N: float
    t_max: float
    dt_out: float = 0.2
    tol: float = 1e-8
    n_max: int | None = None
    grid_spacing: float = DEFAULT_SPACING
    model: ModelParams = field(default_factory=ModelParams)
    with_entropy: bool = True
    with_gaussianity: bool = True
    keep_states: bool = False

    def __post_init__(self):
        if not (0 < self.dt_out <= self.t_max):
            raise ValueError(f"need 0 < dt_out <= t_max, got dt_out={self.dt_out}, t_max={self.t_max}")
        if self.eps_i < 0 or self.eps_f < 0:
            raise ValueError("pump amplitudes must be non-negative")

    def params(self, eps: float) -> ModelParams:
        return self.model.replace(epsilon=eps, N=self.N)


@dataclass
class Trajectory:
    times: np.ndarray
    a_mean: np.ndarray
    n_mean: np.ndarray
    records: list | None
    G: np.ndarray | None
    n_max: int
    states: list | None = None
    diagnostics: dict = field(default_factory=dict)
    spec: QuenchSpec | None = None

    @property
    def alpha(self) -> np.ndarray:
        return self.a_mean / math.sqrt(self.spec.N if self.spec else 1.0)

    def column(self, name: str) -> np.ndarray:
        if self.records is None:
            return np.full(self.times.shape, np.nan)
        return np.array([getattr(r, name) for r in self.records])


def quench_truncation(spec: QuenchSpec) -> int:
    if spec.n_max is not None:
        return int(spec.n_max)
    return max(choose_truncation(spec.params(spec.eps_i)), choose_truncation(spec.params(spec.eps_f)))


def run_quench(spec: QuenchSpec, on_state=None, rho0: np.ndarray | None = None) -> Trajectory:
    """Start in the NESS at ``eps_i`` and evolve under the ``eps_f`` generator.

    ``rho0`` replaces the initial NESS (it is embedded in the cutoff if
    smaller). ``on_state(t, rho)`` is called for every output state, which lets
    callers stream states instead of storing them.
    """
    n_max = quench_truncation(spec)
    d = n_max + 1
    p_f = spec.params(spec.eps_f)
    if rho0 is None:
        rho = solve_ness(build_liouvillian(spec.params(spec.eps_i), d))
    else:
        k = rho0.shape[0]
        if k > d:
            raise ValueError(f"initial state dimension {k} exceeds the cutoff {d}")
        rho = np.zeros((d, d), dtype=complex)
        rho[:k, :k] = rho0
        check_state(rho)
    L_f = build_liouvillian(p_f, d)
    anorm = spla.norm(L_f.matrix, np.inf)
    tr_row = trace_row(d)

    steps = int(round(spec.t_max / spec.dt_out))
    times = spec.dt_out * np.arange(steps + 1)
    a_mean = np.empty(steps + 1, dtype=complex)
    n_mean = np.empty(steps + 1)
    records = [] if spec.with_entropy else None
    G = np.empty(steps + 1) if spec.with_gaussianity else None
    states = [] if spec.keep_states else None
    max_drift = 0.0
    max_norm_err = 0.0

    for i, t in enumerate(times):
        if i > 0:
            prev_tr = np.trace(rho).real
            v, _ = expmv(L_f.matrix, vec(rho), spec.dt_out, tol=spec.tol, anorm=anorm)
            rho = unvec(v, d)
            rho = 0.5 * (rho + rho.conj().T)
            max_drift = max(max_drift, abs(complex(tr_row @ v).real - prev_tr))
        if tail_population(rho) > TAIL_TOL:
            raise TruncationError(
                f"state escaped the Fock cutoff n_max={n_max} at t={t:g} "
                f"(tail population {tail_population(rho):.3e})",
                time=float(t),
            )
        check_state(rho, tail=False)
        a_mean[i], n_mean[i] = moments(rho)
        if records is not None:
            rec = snapshot(rho, p_f, spec.grid_spacing)
            max_norm_err = max(max_norm_err, abs(rec.norm_error))
            records.append(rec)
        if G is not None:
            G[i] = non_gaussianity(rho)
        if states is not None:
            states.append(rho.copy())
        if on_state is not None:
            on_state(float(t), rho)

    if records is not None and len(records) > 1:
        dS = time_derivative([r.S_Q for r in records], spec.dt_out)
        for r, ds in zip(records, dS):
            r.dS_dt = float(ds)
            r.balance_residual = abs(r.dS_dt - r.balance)

    diag = {"n_max": n_max, "max_trace_drift": max_drift, "max_grid_norm_error": max_norm_err,
            "liouvillian_inf_norm": float(anorm)}
    return Trajectory(times, a_mean, n_mean, records, G, n_max, states, diag, spec)


def settle_time(times: np.ndarray, values: np.ndarray, target: float, band: float = 0.02) -> float:
    """Earliest time after which ``values`` stays within ``band`` (relative) of ``target``; inf if never."""
    inside = np.abs(np.asarray(values) - target) <= band * abs(target)
    if not inside[-1]:
        return math.inf
    outside = np.nonzero(~inside)[0]
    return float(times[0] if outside.size == 0 else times[outside[-1] + 1])
