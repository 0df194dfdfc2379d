"""Parity-indexed basis functions

    xi_{n,p,q}(x) = sinh^{1-q}(x) / cosh^{kappa+2n+p}(x) * exp(a * arctan(sinh x))

and their composite index ``mu = 4n + 2p + q``.

Internally the pair ``(k, q)`` with ``k = 2n + p`` is often more convenient:
the cosh exponent is ``kappa + k`` and ``mu = 2k + q``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "BasisIndex",
    "BasisParams",
    "mu_index",
    "eval_basis",
    "eval_basis_derivative",
    "eval_basis_second_derivative",
    "kinetic_ratio",
    "ket_values",
    "log_cosh",
    "gudermannian",
]


def mu_index(n: int, p: int, q: int) -> int:
    """Composite index ``4n + 2p + q``; the triple ``(0, 0, 0)`` is excluded."""
    if n < 0 or p not in (0, 1) or q not in (0, 1):
        raise ValueError(f"invalid basis triple ({n}, {p}, {q})")
    if (n, p, q) == (0, 0, 0):
        raise ValueError("the triple (0, 0, 0) is not a basis element")
    return 4 * n + 2 * p + q


@dataclass(frozen=True, order=True)
class BasisIndex:
    n: int
    p: int
    q: int

    def __post_init__(self):
        mu_index(self.n, self.p, self.q)

    @property
    def mu(self) -> int:
        return 4 * self.n + 2 * self.p + self.q

    @property
    def k(self) -> int:
        """Integer part of the cosh exponent (``2n + p``)."""
        return 2 * self.n + self.p

    @classmethod
    def from_mu(cls, mu: int) -> "BasisIndex":
        if mu < 1:
            raise ValueError("mu must be >= 1")
        return cls(mu // 4, (mu // 2) % 2, mu % 2)

    @classmethod
    def from_kq(cls, k: int, q: int) -> "BasisIndex":
        return cls(k // 2, k % 2, q)

    def __repr__(self):
        return f"Xi_{self.mu}(n={self.n}, p={self.p}, q={self.q})"


@dataclass(frozen=True)
class BasisParams:
    """Asymmetry ``a`` and decay exponent ``kappa > 0`` (``E = -kappa^2``)."""

    a: float
    kappa: float

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")

    def sigma(self, idx: BasisIndex) -> float:
        return self.kappa + 2 * idx.n + idx.p

    @property
    def energy(self) -> float:
        return -self.kappa**2


def gudermannian(x):
    """``arctan(sinh x)`` without overflow."""
    return 2.0 * np.arctan(np.tanh(0.5 * np.asarray(x, dtype=float)))


def log_cosh(x):
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax)) - np.log(2.0)


def ket_values(k, q, kappa: float, a: float, x: float):
    """Values and first derivatives of many kets ``(k, q)`` at one abscissa.

    Written in terms of ``tanh``, ``sech`` and ``log cosh`` so that large
    ``|x|`` and large ``k`` underflow gracefully instead of overflowing.
    """
    k = np.asarray(k)
    q = np.asarray(q)
    s = kappa + k
    lc = log_cosh(x)
    th = np.tanh(x)
    sech = np.exp(-lc)
    phase = a * gudermannian(x) if a else 0.0
    odd = q == 0
    # e_j = exp(-(s - j) log cosh x + a arctan sinh x), j = 1 for odd kets
    e = np.exp(-(s - odd) * lc + phase)
    val = np.where(odd, th * e, e)
    der = np.where(odd, e * (1.0 - s * th * th + a * th * sech), e * (-s * th + a * sech))
    return val, der


def eval_basis(idx: BasisIndex, params: BasisParams, x: float) -> float:
    val, _ = ket_values(idx.k, idx.q, params.kappa, params.a, x)
    return float(val)


def eval_basis_derivative(idx: BasisIndex, params: BasisParams, x: float) -> float:
    """Analytic first derivative (product rule, no finite differences)."""
    _, der = ket_values(idx.k, idx.q, params.kappa, params.a, x)
    return float(der)


def kinetic_ratio(idx: BasisIndex, params: BasisParams, x: float) -> float:
    """Closed form of ``xi'' / xi`` (undefined at ``x = 0`` for odd kets)."""
    s = params.sigma(idx)
    a = params.a
    q = idx.q
    sh = np.sinh(x)
    ch2 = np.cosh(x) ** 2
    out = (s + q - 1) ** 2 + (a * a - s * (s + 1) - (2 * s + 1) * a * sh) / ch2
    if q == 0:
        out += (q - 1) * (q - 2 * a * sh) / sh**2
    return float(out)


def eval_basis_second_derivative(idx: BasisIndex, params: BasisParams, x: float) -> float:
    """Analytic second derivative, ``xi * kinetic_ratio`` without the ``1/sinh`` pole."""
    s = params.sigma(idx)
    a = params.a
    val = eval_basis(idx, params, x)
    lc = log_cosh(x)
    th = np.tanh(x)
    sech = np.exp(-lc)
    out = val * ((s + idx.q - 1) ** 2 + (a * a - s * (s + 1)) * sech**2 - (2 * s + 1) * a * th * sech)
    if idx.q == 0:
        # xi * 2a / sinh x = 2a sech * exp(-(s - 1) log cosh x + a gd x)
        e1 = np.exp(-(s - 1) * lc + a * gudermannian(x))
        out += 2 * a * e1 * sech
    return float(out)
