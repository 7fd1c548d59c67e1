"""Closed-form NESS moments of the Kerr resonator.

The steady-state moments follow from the complex-P solution

    <(a^dag)^n a^m> ~ conj(xi)^n xi^m Gamma(conj(x)) Gamma(x) / (Gamma(conj(x)+n) Gamma(x+m))
                      * 0F2(conj(x)+n, x+m; z) / 0F2(conj(x), x; z)

with ``xi = 2E/(iU)``, ``x = 2(i delta + kappa)/(iU)`` and series argument
``z = 2|xi|^2``. The 0F2 terms grow like a Bessel function before they decay,
so the series is summed in extended precision (mpmath numbers, our own
recurrence and stopping rule).
"""
from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass
from typing import NamedTuple

import mpmath

from .errors import InvalidParameterError, PoleError, PrecisionError
from .operators import ModelParams

# Lanczos approximation, g = 7, n = 9
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _check_pole(z: complex) -> None:
    if z.imag == 0 and z.real <= 0 and z.real == math.floor(z.real):
        raise PoleError(f"Gamma has a pole at z = {z.real:g}")


def _lanczos_sum(z: complex) -> complex:
    # z already shifted by -1
    s = _LANCZOS_COEF[0]
    for i in range(1, len(_LANCZOS_COEF)):
        s += _LANCZOS_COEF[i] / (z + i)
    return s


def complex_gamma(z: complex) -> complex:
    """Gamma function for complex ``z`` (Lanczos with reflection for Re z < 1/2)."""
    z = complex(z)
    _check_pole(z)
    if z.real < 0.5:
        return cmath.pi / (cmath.sin(cmath.pi * z) * complex_gamma(1.0 - z))
    z -= 1.0
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * cmath.exp(-t) * _lanczos_sum(z)


def _log_sin_pi(z: complex) -> complex:
    """log sin(pi z) modulo 2*pi*i, without overflowing for large |Im z|."""
    if abs(z.imag) < 20.0:
        return cmath.log(cmath.sin(cmath.pi * z))
    if z.imag > 0:
        # sin(pi z) = e^{-i pi z} (e^{2 i pi z} - 1) / (2i)
        return -1j * cmath.pi * z + cmath.log((cmath.exp(2j * cmath.pi * z) - 1.0) / 2j)
    return 1j * cmath.pi * z + cmath.log((1.0 - cmath.exp(-2j * cmath.pi * z)) / 2j)


def complex_lgamma(z: complex) -> complex:
    """log Gamma(z), correct modulo 2*pi*i; usable where Gamma itself overflows."""
    z = complex(z)
    _check_pole(z)
    if z.real < 0.5:
        return cmath.log(cmath.pi) - _log_sin_pi(z) - complex_lgamma(1.0 - z)
    z -= 1.0
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(_lanczos_sum(z))


# ------------------------------------------------------------------ 0F2

class SeriesValue(NamedTuple):
    value: mpmath.mpc
    digits: float  # estimated correct significant digits
    terms: int


def default_digits(c) -> int:
    """Working precision for a 0F2 series at argument ``c``."""
    return int(math.ceil(2.5 * abs(complex(c)) ** (1.0 / 3.0) + 30))


def _is_nonpositive_int(v) -> bool:
    v = complex(v)
    return v.imag == 0 and v.real <= 0 and v.real == math.floor(v.real)


@functools.lru_cache(maxsize=4096)
def _sum_0f2(a: complex, b: complex, c: complex, dps: int, tol: float, patience: int, max_terms: int):
    with mpmath.workdps(dps):
        a_, b_, c_ = mpmath.mpc(a), mpmath.mpc(b), mpmath.mpc(c)
        term = mpmath.mpc(1)
        total = mpmath.mpc(1)
        max_term = mpmath.mpf(1)
        max_sum = mpmath.mpf(1)
        quiet = 0
        k = 0
        while quiet < patience:
            if k >= max_terms:
                raise PrecisionError(f"0F2 series did not settle within {max_terms} terms", dps, c)
            term = term * c_ / ((a_ + k) * (b_ + k) * (k + 1))
            k += 1
            total += term
            at = abs(term)
            if at > max_term:
                max_term = at
            st = abs(total)
            if st > max_sum:
                max_sum = st
            quiet = quiet + 1 if at < tol * max_sum else 0
        sum_abs = abs(total)
        lost = float(mpmath.log10(max_term / sum_abs)) if sum_abs > 0 else float(dps)
        return +total, lost, k


def hyper0F2(a, b, c, *, dps: int | None = None, tol: float = 1e-15, patience: int = 50,
             max_dps: int = 4000, max_terms: int = 200000) -> SeriesValue:
    """Generalized hypergeometric ``0F2(;a,b;c)`` by forward term recurrence.

    Terms obey ``t_{k+1} = t_k c / ((a+k)(b+k)(k+1))``. Summation stops once
    ``patience`` consecutive terms fall below ``tol`` times the largest partial
    sum seen. The digits lost to cancellation are estimated from the largest
    term; if fewer than ``-log10(tol)`` digits survive the sum is repeated at a
    higher precision, and :class:`PrecisionError` is raised past ``max_dps``.
    """
    a, b, c = complex(a), complex(b), complex(c)
    if _is_nonpositive_int(a) or _is_nonpositive_int(b):
        raise PoleError(f"0F2 parameters must not be non-positive integers (a={a}, b={b})")
    target = -math.log10(tol)
    dps = default_digits(c) if dps is None else int(dps)
    while True:
        if dps > max_dps:
            raise PrecisionError(
                f"0F2 at |c| = {abs(c):.6g} needs about {dps} digits (budget {max_dps})", dps, abs(c)
            )
        total, lost, k = _sum_0f2(a, b, c, dps, tol, patience, max_terms)
        digits = dps - max(lost, 0.0) - 0.5 * math.log10(k + 1)
        if digits >= target:
            return SeriesValue(total, digits, k)
        needed = int(math.ceil(dps + (target - digits) + 10))
        if needed > max_dps:
            raise PrecisionError(
                f"0F2 at |c| = {abs(c):.6g} needs about {needed} digits (budget {max_dps})", needed, abs(c)
            )
        dps = needed


# ----------------------------------------------------------- moments

@dataclass(frozen=True)
class ExactSolutionParams:
    xi: complex
    x: complex

    @classmethod
    def from_params(cls, p: ModelParams) -> "ExactSolutionParams":
        if p.u <= 0:
            raise InvalidParameterError("the exact Kerr solution needs u > 0")
        U = p.U
        return cls(xi=2.0 * p.E / (1j * U), x=2.0 * (1j * p.delta + p.kappa) / (1j * U))

    @property
    def z(self) -> float:
        """Series argument ``2 |xi|^2 = 8 E^2 / U^2``."""
        return 2.0 * abs(self.xi) ** 2


_RAW_PREFACTOR = math.sqrt(2.0)


def _raw_moment(n: int, m: int, s: ExactSolutionParams, dps: int | None):
    xb = s.x.conjugate()
    lg = complex_lgamma(xb) + complex_lgamma(s.x) - complex_lgamma(xb + n) - complex_lgamma(s.x + m)
    num = hyper0F2(xb + n, s.x + m, s.z, dps=dps)
    den = hyper0F2(xb, s.x, s.z, dps=dps)
    with mpmath.workdps(max(30, min(num.digits, den.digits))):
        ratio = complex(num.value / den.value)
    pre = (s.xi.conjugate() ** n) * (s.xi ** m) * cmath.exp(lg)
    return _RAW_PREFACTOR * pre * ratio


def exact_moment(n_idx: int, m_idx: int, p: ModelParams, dps: int | None = None) -> complex:
    """Normalized steady-state moment ``<(a^dag)^n a^m>``.

    The formula's value at ``(0, 0)`` is used as the normalization, so
    ``exact_moment(0, 0, p) == 1``.
    """
    if n_idx < 0 or m_idx < 0:
        raise ValueError("moment orders must be non-negative")
    s = ExactSolutionParams.from_params(p)
    if n_idx == 0 and m_idx == 0:
        return 1.0 + 0j
    return _raw_moment(n_idx, m_idx, s, dps) / _raw_moment(0, 0, s, dps)


def exact_moments(p: ModelParams, orders=((0, 1), (1, 1), (0, 2))) -> dict:
    return {(n, m): exact_moment(n, m, p) for n, m in orders}
