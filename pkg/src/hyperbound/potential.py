"""Hyperbolic short-range potentials.

The family is

    V(x) = sum_{m=2..M} f_m / cosh^m x  +  sinh x * sum_{n=1..M} g_n / cosh^n x

with real couplings.  The f part is spatially even, the g part odd.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Mapping

import numpy as np

__all__ = [
    "PotentialSpec",
    "evaluate_potential",
    "parity_split",
    "phat_conjugate",
    "taylor_coefficients",
    "max_depth",
]

_ASYMPTOTIC_SWITCH = 20.0


@dataclass(frozen=True)
class PotentialSpec:
    """Dense coupling vectors of one potential.

    Parameters
    ----------
    M : int
        Order of the potential, ``M >= 2``.
    f : tuple of float
        Symmetric couplings ``f_2 .. f_M`` (length ``M - 1``).
    g : tuple of float
        Anti-symmetric couplings ``g_1 .. g_M`` (length ``M``).
    """

    M: int
    f: tuple
    g: tuple

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 2:
            raise ValueError(f"order M must be an integer >= 2, got {self.M!r}")
        f = tuple(float(v) for v in self.f)
        g = tuple(float(v) for v in self.g)
        if len(f) != self.M - 1:
            raise ValueError(f"expected {self.M - 1} symmetric couplings, got {len(f)}")
        if len(g) != self.M:
            raise ValueError(f"expected {self.M} anti-symmetric couplings, got {len(g)}")
        if not all(np.isfinite(f + g)):
            raise ValueError("couplings must be finite")
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "g", g)

    @classmethod
    def from_couplings(
        cls,
        f: Mapping[int, float] | None = None,
        g: Mapping[int, float] | None = None,
        M: int | None = None,
    ) -> "PotentialSpec":
        """Build a spec from sparse ``{power: coupling}`` mappings.

        ``M`` defaults to the largest power present (at least 2).
        """
        f = dict(f or {})
        g = dict(g or {})
        if any(m < 2 for m in f):
            raise ValueError("symmetric powers start at m = 2")
        if any(n < 1 for n in g):
            raise ValueError("anti-symmetric powers start at n = 1")
        top = max([2, *f, *g])
        if M is None:
            M = top
        elif M < top:
            raise ValueError(f"M={M} is below the largest power {top}")
        return cls(
            M,
            tuple(f.get(m, 0.0) for m in range(2, M + 1)),
            tuple(g.get(n, 0.0) for n in range(1, M + 1)),
        )

    def f_m(self, m: int) -> float:
        return self.f[m - 2] if 2 <= m <= self.M else 0.0

    def g_n(self, n: int) -> float:
        return self.g[n - 1] if 1 <= n <= self.M else 0.0

    @property
    def asymptotically_asymmetric(self) -> bool:
        """True when ``g_1 != 0`` so that ``V(-inf) = -g_1 != V(inf) = g_1``."""
        return self.g[0] != 0.0

    @property
    def is_symmetric(self) -> bool:
        return not any(self.g)

    @property
    def is_zero(self) -> bool:
        return not any(self.f) and not any(self.g)

    @property
    def g_ref(self) -> float:
        """Signed anti-symmetric coupling of largest magnitude (0 if none).

        Used as the scale ``g`` in the mixing ``psi = M phi0 + g N phi1``;
        it flips sign under coupling reflection.
        """
        if self.is_symmetric:
            return 0.0
        i = int(np.argmax(np.abs(self.g)))
        return self.g[i]

    def coupling_scale(self) -> float:
        return max([abs(v) for v in self.f + self.g] + [0.0])

    def as_dict(self) -> dict:
        out = {"M": self.M}
        out.update({f"f.{m}": self.f_m(m) for m in range(2, self.M + 1)})
        out.update({f"g.{n}": self.g_n(n) for n in range(1, self.M + 1)})
        return out


def evaluate_potential(spec: PotentialSpec, x):
    """Evaluate ``V(x)``; accepts scalars or arrays.

    Beyond ``|x| > 20`` the hyperbolic functions are rewritten in powers of
    ``exp(-|x|)`` so that nothing overflows.
    """
    xa = np.asarray(x, dtype=float)
    out = np.zeros_like(xa)
    ax = np.abs(xa)
    near = ax <= _ASYMPTOTIC_SWITCH

    xn = xa[near]
    sech = 1.0 / np.cosh(xn)
    sh = np.sinh(xn)
    vn = np.zeros_like(xn)
    for m in range(2, spec.M + 1):
        if spec.f_m(m):
            vn += spec.f_m(m) * sech**m
    for n in range(1, spec.M + 1):
        if spec.g_n(n):
            vn += spec.g_n(n) * sh * sech**n
    out[near] = vn

    far = ~near
    if np.any(far):
        af = ax[far]
        sgn = np.sign(xa[far])
        y = np.exp(-2.0 * af)
        e1 = np.exp(-af)
        sech_f = 2.0 * e1 / (1.0 + y)
        vf = np.zeros_like(af)
        for m in range(2, spec.M + 1):
            if spec.f_m(m):
                vf += spec.f_m(m) * sech_f**m
        for n in range(1, spec.M + 1):
            if spec.g_n(n):
                # sinh x / cosh^n x = sgn (1 - y) 2^(n-1) e^{-(n-1)|x|} / (1 + y)^n
                vf += spec.g_n(n) * sgn * (1.0 - y) * 2.0 ** (n - 1) * e1 ** (n - 1) / (1.0 + y) ** n
        out[far] = vf

    if np.ndim(x) == 0:
        return float(out)
    return out


def parity_split(spec: PotentialSpec) -> tuple[PotentialSpec, PotentialSpec]:
    """Split into the even (f only) and odd (g only) parts."""
    zeros_f = (0.0,) * (spec.M - 1)
    zeros_g = (0.0,) * spec.M
    return PotentialSpec(spec.M, spec.f, zeros_g), PotentialSpec(spec.M, zeros_f, spec.g)


def phat_conjugate(spec: PotentialSpec) -> PotentialSpec:
    """Reflect every anti-symmetric coupling, ``g_n -> -g_n``.

    Combined with ``x -> -x`` this leaves the potential unchanged.
    """
    return PotentialSpec(spec.M, spec.f, tuple(-v for v in spec.g))


def _series_mul(a, b, order):
    return np.convolve(a, b)[:order]


def _series_reciprocal(a, order):
    r = np.zeros(order)
    r[0] = 1.0 / a[0]
    for n in range(1, order):
        r[n] = -np.dot(a[1 : n + 1], r[n - 1 :: -1][:n]) / a[0]
    return r


def taylor_coefficients(spec: PotentialSpec, x0: float, order: int = 32) -> np.ndarray:
    """Taylor coefficients ``V^(n)(x0)/n!`` for ``n < order``.

    Computed by truncated power-series arithmetic on
    ``cosh(x0 + h)`` and ``sinh(x0 + h)``; exact up to rounding.
    """
    ch, sh = np.cosh(x0), np.sinh(x0)
    inv_fact = np.array([1.0 / factorial(n) for n in range(order)])
    even = np.arange(order) % 2 == 0
    cosh_s = np.where(even, ch, sh) * inv_fact
    sinh_s = np.where(even, sh, ch) * inv_fact
    sech_s = _series_reciprocal(cosh_s, order)

    out = np.zeros(order)
    power = np.zeros(order)
    power[0] = 1.0
    for m in range(1, spec.M + 1):
        power = _series_mul(power, sech_s, order)
        if m >= 2 and spec.f_m(m):
            out += spec.f_m(m) * power
        if spec.g_n(m):
            out += spec.g_n(m) * _series_mul(sinh_s, power, order)
    return out


def max_depth(spec: PotentialSpec, half_width: float = 15.0, points: int = 6001) -> float:
    """Largest ``|V(x)|`` on a dense grid (used to bound the spectrum)."""
    xs = np.linspace(-half_width, half_width, points)
    return float(np.max(np.abs(evaluate_potential(spec, xs))))
