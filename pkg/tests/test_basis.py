import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from hyperbound import (
    BasisIndex,
    BasisParams,
    eval_basis,
    eval_basis_derivative,
    eval_basis_second_derivative,
    mu_index,
)
from hyperbound.basis import kinetic_ratio, ket_values

from strategies import basis_indices

kappas = st.floats(0.1, 4.0)
asym = st.floats(-2.0, 2.0)


@pytest.mark.parametrize("triple, mu", [((0, 0, 1), 1), ((0, 1, 0), 2), ((1, 0, 1), 5), ((2, 1, 1), 11)])
def test_mu_index_examples(triple, mu):
    assert mu_index(*triple) == mu
    assert BasisIndex(*triple).mu == mu


@pytest.mark.parametrize("triple", [(0, 0, 0), (-1, 0, 1), (0, 2, 0), (0, 0, 3)])
def test_mu_index_rejects(triple):
    with pytest.raises(ValueError):
        mu_index(*triple)


@given(st.integers(1, 10_000))
def test_mu_roundtrip(mu):
    idx = BasisIndex.from_mu(mu)
    assert idx.mu == mu
    assert BasisIndex.from_kq(idx.k, idx.q) == idx


def test_ordering_follows_mu():
    kets = [BasisIndex.from_mu(m) for m in (7, 1, 4, 2)]
    assert [k.mu for k in sorted(kets, key=lambda k: k.mu)] == [1, 2, 4, 7]


def test_params_need_positive_kappa():
    with pytest.raises(ValueError):
        BasisParams(0.0, 0.0)
    with pytest.raises(ValueError):
        BasisParams(0.0, -1.0)
    p = BasisParams(0.3, 1.5)
    assert p.energy == -2.25
    assert p.sigma(BasisIndex(2, 1, 0)) == 1.5 + 5


# -- values -------------------------------------------------------------------
def test_eval_examples():
    assert eval_basis(BasisIndex(0, 0, 1), BasisParams(0.0, 1.0), 0.0) == 1.0
    for a, k in [(0.0, 1.0), (0.7, 2.5), (-1.2, 0.3)]:
        assert eval_basis(BasisIndex(0, 1, 0), BasisParams(a, k), 0.0) == 0.0
    assert eval_basis(BasisIndex(0, 0, 1), BasisParams(0.0, 2.0), 1.0) == pytest.approx(
        math.cosh(1.0) ** -2, rel=1e-15
    )
    assert math.cosh(1.0) ** -2 == pytest.approx(0.41997, abs=1e-5)


def _symbolic(idx, a, kappa):
    x = sp.symbols("x")
    expr = sp.sinh(x) ** (1 - idx.q) / sp.cosh(x) ** (kappa + idx.k) * sp.exp(a * sp.atan(sp.sinh(x)))
    return x, expr


@given(basis_indices(), asym, kappas, st.floats(-6, 6))
def test_eval_matches_definition(idx, a, kappa, x):
    ref = math.sinh(x) ** (1 - idx.q) / math.cosh(x) ** (kappa + idx.k) * math.exp(a * math.atan(math.sinh(x)))
    assert eval_basis(idx, BasisParams(a, kappa), x) == pytest.approx(ref, rel=1e-12, abs=1e-300)


def test_large_argument_underflows_cleanly():
    v, d = ket_values(np.array([0, 40]), np.array([1, 0]), 2.0, 0.5, 800.0)
    assert np.all(np.isfinite(v)) and np.all(np.isfinite(d))


# -- derivatives -----------------------------------------------------------------
def test_derivative_examples():
    assert eval_basis_derivative(BasisIndex(0, 0, 1), BasisParams(0.0, 1.0), 0.0) == 0.0
    assert eval_basis_derivative(BasisIndex(0, 1, 0), BasisParams(0.0, 1.0), 0.0) == 1.0


def test_derivative_symbolic_oracle():
    idx = BasisIndex(0, 1, 0)
    x, expr = _symbolic(idx, 0, 1)
    assert float(sp.diff(expr, x).subs(x, 0)) == 1.0


@given(basis_indices(), asym, kappas)
def test_derivative_matches_finite_difference(idx, a, kappa):
    params = BasisParams(a, kappa)
    h = 1e-5
    fd = (eval_basis(idx, params, 0.5 + h) - eval_basis(idx, params, 0.5 - h)) / (2 * h)
    assert eval_basis_derivative(idx, params, 0.5) == pytest.approx(fd, abs=1e-8)


@given(basis_indices(), asym.filter(lambda v: abs(v) > 1e-3), kappas, st.floats(0.05, 4).flatmap(
    lambda r: st.sampled_from([r, -r])))
def test_kinetic_ratio_closed_form(idx, a, kappa, x):
    params = BasisParams(a, kappa)
    second = eval_basis_second_derivative(idx, params, x)
    ratio = kinetic_ratio(idx, params, x)
    assert second / eval_basis(idx, params, x) == pytest.approx(ratio, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_second_derivative_symbolic(seed):
    rng = np.random.default_rng(seed)
    for _ in range(10):
        n, p, q = (int(v) for v in rng.integers(0, [3, 2, 2]))
        if (n, p, q) == (0, 0, 0):
            continue
        idx = BasisIndex(n, p, q)
        a = float(rng.uniform(-1.5, 1.5))
        kappa = float(rng.uniform(0.2, 3))
        xv = float(rng.uniform(-3, 3))
        x, expr = _symbolic(idx, sp.Float(a, 30), sp.Float(kappa, 30))
        ref = float(sp.diff(expr, x, 2).subs(x, xv).evalf(30))
        got = eval_basis_second_derivative(idx, BasisParams(a, kappa), xv)
        assert got == pytest.approx(ref, rel=1e-9, abs=1e-12)


# -- structural properties --------------------------------------------------------------
@given(basis_indices(), kappas, st.floats(0.01, 8))
def test_parity_at_zero_asymmetry(idx, kappa, x):
    params = BasisParams(0.0, kappa)
    sign = (-1) ** (1 - idx.q)
    assert eval_basis(idx, params, x) == pytest.approx(sign * eval_basis(idx, params, -x), rel=1e-14)


@given(basis_indices(), asym, kappas, st.floats(5, 60))
def test_exponential_envelope(idx, a, kappa, x):
    params = BasisParams(a, kappa)
    # |sinh|/cosh <= 1 and cosh ~ e^|x|/2, so C = 2^(kappa+k) bounds the rest
    bound = 2.0 ** (kappa + idx.k) * math.exp(-kappa * x + abs(a) * math.pi / 2)
    for sx in (x, -x):
        assert abs(eval_basis(idx, params, sx)) <= bound * (1 + 1e-12)
