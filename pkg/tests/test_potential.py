import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from hyperbound import PotentialSpec, evaluate_potential, parity_split, phat_conjugate, taylor_coefficients
from hyperbound.potential import max_depth

from strategies import specs


# -- construction -------------------------------------------------------------
def test_dense_storage_and_lookup():
    s = PotentialSpec.from_couplings(f={2: -2.0}, g={3: 0.5})
    assert s.M == 3
    assert s.f == (-2.0, 0.0)
    assert s.g == (0.0, 0.0, 0.5)
    assert s.f_m(2) == -2.0 and s.f_m(7) == 0.0
    assert s.g_n(3) == 0.5 and s.g_n(0) == 0.0


@pytest.mark.parametrize(
    "args",
    [(1, (), (0.0,)), (2, (1.0, 2.0), (0.0, 0.0)), (2, (1.0,), (0.0,)), (2, (math.inf,), (0.0, 0.0))],
)
def test_invalid_specs_rejected(args):
    with pytest.raises(ValueError):
        PotentialSpec(*args)


def test_from_couplings_validates_powers():
    with pytest.raises(ValueError):
        PotentialSpec.from_couplings(f={1: 1.0})
    with pytest.raises(ValueError):
        PotentialSpec.from_couplings(g={0: 1.0})
    with pytest.raises(ValueError):
        PotentialSpec.from_couplings(f={4: 1.0}, M=3)


def test_asymmetry_flag():
    assert PotentialSpec.from_couplings(g={1: 0.5}).asymptotically_asymmetric
    assert not PotentialSpec.from_couplings(g={2: 0.5}).asymptotically_asymmetric


def test_g_ref_is_signed_largest():
    s = PotentialSpec.from_couplings(g={2: 0.5, 3: -2.0})
    assert s.g_ref == -2.0
    assert phat_conjugate(s).g_ref == 2.0
    assert PotentialSpec.from_couplings(f={2: -1.0}).g_ref == 0.0


# -- evaluation -----------------------------------------------------------------
def test_antisymmetric_vanishes_at_origin():
    assert evaluate_potential(PotentialSpec.from_couplings(g={2: 1.7}), 0.0) == 0.0


def test_poschl_teller_depth():
    assert evaluate_potential(PotentialSpec.from_couplings(f={2: -2.0}), 0.0) == -2.0


@pytest.mark.parametrize("x, expected", [(40.0, 0.5), (-40.0, -0.5), (800.0, 0.5), (-800.0, -0.5)])
def test_g1_asymptotes(x, expected):
    s = PotentialSpec.from_couplings(g={1: 0.5})
    assert evaluate_potential(s, x) == pytest.approx(expected, abs=1e-15)


def test_far_field_is_finite_for_huge_x():
    s = PotentialSpec.from_couplings(f={2: -3.0, 5: 1.0}, g={2: 1.0, 4: 2.0})
    v = evaluate_potential(s, np.array([-1e4, -750.0, 750.0, 1e4]))
    assert np.all(np.isfinite(v)) and np.all(v == 0.0)


@given(specs())
def test_switch_to_exponential_form_is_continuous(s):
    lo, hi = evaluate_potential(s, np.array([20.0 - 1e-9, 20.0 + 1e-9]))
    assert lo == pytest.approx(hi, rel=1e-7, abs=1e-14)


def test_matches_symbolic_expression():
    x = sp.symbols("x")
    s = PotentialSpec.from_couplings(f={2: -2.5, 3: 0.25}, g={1: 0.3, 2: 1.0, 4: -0.75})
    expr = sum(s.f_m(m) / sp.cosh(x) ** m for m in range(2, s.M + 1))
    expr += sp.sinh(x) * sum(s.g_n(n) / sp.cosh(x) ** n for n in range(1, s.M + 1))
    for xv in (-7.5, -1.2, 0.0, 0.3, 2.0, 19.0, 25.0):
        assert evaluate_potential(s, xv) == pytest.approx(float(expr.subs(x, xv)), rel=1e-13, abs=1e-15)


def test_vectorised_and_scalar_agree():
    s = PotentialSpec.from_couplings(f={2: -1.0}, g={2: 0.5})
    xs = np.linspace(-30, 30, 61)
    vec = evaluate_potential(s, xs)
    assert isinstance(evaluate_potential(s, 0.1), float)
    assert np.allclose(vec, [evaluate_potential(s, float(v)) for v in xs], rtol=0, atol=0)


# -- symmetry ---------------------------------------------------------------------
def test_parity_split_example():
    s = PotentialSpec.from_couplings(f={2: 1.0}, g={2: 2.0})
    even, odd = parity_split(s)
    assert even == PotentialSpec.from_couplings(f={2: 1.0}, M=2)
    assert odd == PotentialSpec.from_couplings(g={2: 2.0})


def test_parity_split_of_zero():
    z = PotentialSpec.from_couplings(M=3)
    even, odd = parity_split(z)
    assert even.is_zero and odd.is_zero


def test_parity_split_recombines():
    s = PotentialSpec.from_couplings(f={2: -1.5, 3: 0.7}, g={2: 0.4, 3: -1.1})
    even, odd = parity_split(s)
    total = evaluate_potential(even, 0.7) + evaluate_potential(odd, 0.7)
    assert total == pytest.approx(evaluate_potential(s, 0.7), rel=1e-15)


def test_phat_examples():
    s = PotentialSpec.from_couplings(f={2: -2.0}, g={2: 1.0})
    assert phat_conjugate(s) == PotentialSpec.from_couplings(f={2: -2.0}, g={2: -1.0})
    sym = PotentialSpec.from_couplings(f={2: -2.0, 4: 1.0})
    assert phat_conjugate(sym) == sym
    assert phat_conjugate(phat_conjugate(s)) == s


@given(specs(), st.lists(st.floats(-10, 10), min_size=100, max_size=100))
def test_phat_reflection_property(s, xs):
    xs = np.array(xs)
    v = evaluate_potential(s, xs)
    w = evaluate_potential(phat_conjugate(s), -xs)
    scale = max(s.coupling_scale(), 1e-300)
    assert np.allclose(v, w, rtol=1e-12, atol=1e-12 * scale)


@given(specs(allow_g1=False))
def test_decay_at_large_distance(s):
    v = evaluate_potential(s, np.array([-30.0, 30.0]))
    assert np.all(np.abs(v) <= 1e-12 * max(s.coupling_scale(), 1e-300))


@given(specs(), st.floats(0, 12))
def test_parity_split_parts_have_definite_parity(s, x):
    even, odd = parity_split(s)
    assert evaluate_potential(even, -x) == pytest.approx(evaluate_potential(even, x), rel=1e-13, abs=1e-300)
    assert evaluate_potential(odd, -x) == pytest.approx(-evaluate_potential(odd, x), rel=1e-13, abs=1e-300)


# -- Taylor data ----------------------------------------------------------------------
@pytest.mark.parametrize("x0", [-0.05, 0.0, 0.2, 1.3])
def test_taylor_coefficients_match_sympy(x0):
    s = PotentialSpec.from_couplings(f={2: -2.0, 3: 0.5}, g={1: 0.2, 2: 1.0})
    x = sp.symbols("x")
    expr = sum(s.f_m(m) / sp.cosh(x) ** m for m in range(2, s.M + 1))
    expr += sp.sinh(x) * sum(s.g_n(n) / sp.cosh(x) ** n for n in range(1, s.M + 1))
    order = 10
    got = taylor_coefficients(s, x0, order)
    d = expr
    for n in range(order):
        ref = float(d.subs(x, x0)) / math.factorial(n)
        assert got[n] == pytest.approx(ref, rel=1e-10, abs=1e-12)
        d = sp.diff(d, x)


def test_max_depth():
    assert max_depth(PotentialSpec.from_couplings(f={2: -6.0})) == pytest.approx(6.0)
    assert max_depth(PotentialSpec.from_couplings(g={2: 1.0})) == pytest.approx(0.5, rel=1e-5)
