import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kerrq.errors import NoBistabilityError
from kerrq.meanfield import (
    bistability_edges, critical_pump, integrate_flow, jacobian, mf_flow, mf_steady_states, susceptibility,
)
from kerrq.operators import ModelParams


def test_flow_at_origin_is_drive(base):
    assert mf_flow(0j, base.replace(epsilon=0.8)) == pytest.approx(0.8)


def test_flow_direct_substitution(base):
    assert mf_flow(1.0 + 0j, base.replace(epsilon=0.0)) == pytest.approx(-0.5 + 1j)


def test_edges(base):
    e = bistability_edges(base)
    assert e.eps_lo == pytest.approx(0.701373, abs=1e-5)
    assert e.eps_hi == pytest.approx(1.16616, abs=1e-5)
    assert e.n_at_lo == pytest.approx(1.934259, abs=1e-6)
    assert e.n_at_hi == pytest.approx(0.732408, abs=1e-6)


def test_edges_are_turning_points(base):
    # the cubic's eps(n) has zero slope at both edge occupations
    e = bistability_edges(base)
    k2, dl, u = base.kappa ** 2, base.delta, base.u
    for n in (e.n_at_lo, e.n_at_hi):
        slope = k2 + (dl + u * n) ** 2 + 2 * u * n * (dl + u * n)
        assert abs(slope) < 1e-12


def test_degenerate_edge():
    p = ModelParams(kappa=0.5, delta=-math.sqrt(3) * 0.5)
    e = bistability_edges(p)
    assert e.n_at_lo == pytest.approx(e.n_at_hi, abs=1e-12)
    assert e.eps_lo == pytest.approx(e.eps_hi, abs=1e-12)


@pytest.mark.parametrize("p", [ModelParams(delta=-0.5), ModelParams(delta=1.0), ModelParams(u=0.0)])
def test_no_bistability(p):
    with pytest.raises(NoBistabilityError):
        bistability_edges(p)


def test_root_counts(base):
    r = mf_steady_states(0.5, base)
    assert len(r) == 1 and r.stable.all()
    r = mf_steady_states(0.9, base)
    assert len(r) == 3
    assert list(r.stable) == [True, False, True]
    r = mf_steady_states(0.0, base)
    assert len(r) == 1 and r.n[0] == 0 and r.alpha[0] == 0


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 2.0))
def test_roots_are_fixed_points(eps):
    p = ModelParams()
    for a in mf_steady_states(eps, p).alpha:
        assert abs(mf_flow(a, p.replace(epsilon=eps))) < 1e-9


def test_linear_cavity_root():
    p = ModelParams(u=0.0)
    r = mf_steady_states(0.5, p)
    assert r.alpha[0] == pytest.approx(0.5 / (0.5 - 2j))


def test_jacobian_matches_finite_difference(base):
    p = base.replace(epsilon=0.9)
    a0 = 0.3 - 0.7j
    J = jacobian(a0, p)
    h = 1e-6
    # derivative along real and imaginary directions, recombined into Wirtinger form
    fx = (mf_flow(a0 + h, p) - mf_flow(a0 - h, p)) / (2 * h)
    fy = (mf_flow(a0 + 1j * h, p) - mf_flow(a0 - 1j * h, p)) / (2 * h)
    assert J[0, 0] == pytest.approx(0.5 * (fx - 1j * fy), abs=1e-8)
    assert J[0, 1] == pytest.approx(0.5 * (fx + 1j * fy), abs=1e-8)


def test_flow_relaxes_to_stable_roots(base):
    p = base.replace(epsilon=0.9)
    roots = mf_steady_states(0.9, p)
    dim = integrate_flow(0j, p, 60.0, 1e-2)
    bright = integrate_flow(2.0 + 0j, p, 60.0, 1e-2)
    assert abs(dim - roots.alpha[0]) < 1e-6
    assert abs(bright - roots.alpha[2]) < 1e-6


def test_susceptibility_positive_below_window(base):
    assert susceptibility(0.5, base, 5.0) > 0


def test_critical_pump_n20(eps_c20):
    assert abs(eps_c20 - 0.933) <= 0.02


def test_critical_pump_sharpens_with_n(base, eps_c20):
    lo, hi = bistability_edges(base)[:2]
    c1 = critical_pump(base, 1.0)
    c2 = critical_pump(base, 2.0)
    c10 = critical_pump(base, 10.0)
    assert lo < c1 < hi
    assert abs(c10 - eps_c20) < abs(c2 - c10)
