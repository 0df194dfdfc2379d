"""Partitioned power-series solutions.

The homogeneous system ``Q h = 0`` with lower-triangular ``Q`` is solved
block by block, ``F_n = -A_n^{-1} B_{n-1} F_{n-1}``, starting from the null
vector of ``A_0``.  The resulting sum over basis kets solves the
Schrodinger equation on each half-axis and decays at both infinities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.linalg.lapack import dtbtrs
from scipy.optimize import brentq, least_squares, minimize_scalar

from ._errors import NoNullVector, SingularBlock, SlowConvergence, ZeroDenominator
from .basis import BasisParams, ket_values
from .potential import PotentialSpec
from .qbuilder import SEEDS, QMatrix, _block_of, build_q

__all__ = [
    "CoefficientStream",
    "SeriesSolution",
    "initialize_F0",
    "next_coefficient",
    "evaluate_solution",
    "evaluate_many",
    "tail_ratio",
    "detect_termination",
    "TerminationPoint",
    "X_MIN",
    "reserve",
]

X_MIN = 1e-3
DEFAULT_TOL = 1e-12
DEFAULT_MAX_TERMS = 10_000


def initialize_F0(q_matrix: QMatrix, p: int | None = None) -> np.ndarray:
    """Null vector of ``A_0`` with the seed component equal to one.

    Virtual padding slots are zero; the remaining real slots of block 0
    follow by forward substitution.
    """
    if p is not None and p != q_matrix.p:
        raise ValueError(f"matrix was built for p={q_matrix.p}, not p={p}")
    A0 = q_matrix.block_A(0)
    pos = q_matrix.block_positions(0)
    D = q_matrix.D
    j0 = int(np.flatnonzero(pos == 0)[0])
    if A0[j0, j0] != 0.0:
        raise NoNullVector("seed diagonal of A_0 is nonzero")
    F = np.zeros(D)
    F[j0] = 1.0
    for i in range(j0 + 1, D):
        if A0[i, i] == 0.0:
            raise SingularBlock(f"A_0 has a second vanishing diagonal at slot {i}")
        F[i] = -np.dot(A0[i, :i], F[:i]) / A0[i, i]
    return F


class CoefficientStream:
    """Lazily generated coefficient vectors ``F_0, F_1, ...`` of one series.

    Two routes produce the same numbers: :func:`next_coefficient` runs the
    block recurrence one step at a time, while :meth:`coefficients` solves
    long stretches of the banded triangular system in one LAPACK call.
    The second is what evaluation uses; the first is the reference.
    """

    def __init__(self, q_matrix: QMatrix):
        self.q_matrix = q_matrix
        self.F = [initialize_F0(q_matrix)]
        self._h = np.zeros(0)

    @property
    def params(self) -> BasisParams:
        return self.q_matrix.params

    @property
    def p(self) -> int:
        return self.q_matrix.p

    @property
    def D(self) -> int:
        return self.q_matrix.D

    def coefficients(self, n: int) -> np.ndarray:
        """Flat coefficients ``h`` of the first ``n`` kets (layout order)."""
        have = self._h.size
        if have >= n:
            return self._h[:n]
        want = n
        n = max(n, int(1.25 * have))
        qm = self.q_matrix
        w = qm.bandwidth
        ab = qm.band(n + w + 1)
        h = np.empty(n)
        h[:have] = self._h
        if have == 0:
            h[0] = 1.0
            have = 1
            if n == 1:
                self._h = h
                return h[:want]
        rhs = np.zeros(n - have)
        for d in range(1, w + 1):
            # rows i = have .. have+w-1 collect columns j = i - d < have
            j = np.arange(max(0, have - d), have)
            i = j + d
            ok = i < n
            rhs[i[ok] - have] -= ab[d, j[ok]] * h[j[ok]]
        sub = np.ascontiguousarray(ab[:, have:n])
        if np.any(sub[0] == 0.0):
            raise SingularBlock("vanishing diagonal entry beyond the seed")
        x, info = dtbtrs(sub, rhs[:, None], uplo="L")
        if info != 0:
            raise SingularBlock(f"banded solve failed (info={info})")
        h[have:] = x[:, 0]
        self._h = h
        return h[:want]

    def block(self, n: int) -> np.ndarray:
        """``F_n`` taken from the flat coefficient array."""
        pos = self.q_matrix.block_positions(n)
        h = self.coefficients(int(pos.max()) + 1)
        return np.where(pos >= 0, h[np.clip(pos, 0, None)], 0.0)

    def kets(self, n: int):
        return self.q_matrix.layout.kets(n)

    def h(self, k: int, q: int) -> float:
        """Coefficient of ket ``(k, q)`` (0 when it is not in the basis)."""
        pos = int(self.q_matrix.layout.position(k, q)) if k >= 0 else -1
        if pos < 0:
            self.kets(2 * k + 8)
            pos = int(self.q_matrix.layout.position(k, q))
        if pos < 0:
            return 0.0
        return float(self.coefficients(pos + 1)[pos])


def next_coefficient(stream: CoefficientStream) -> np.ndarray:
    """Append and return ``F_n = -A_n^{-1} B_{n-1} F_{n-1}``."""
    n = len(stream.F)
    qm = stream.q_matrix
    A = qm.block_A(n)
    if np.any(np.diag(A) == 0.0):
        raise SingularBlock(f"A_{n} has a vanishing diagonal entry")
    rhs = qm.block_B(n - 1) @ stream.F[-1]
    F = -solve_triangular(A, rhs, lower=True)
    stream.F.append(F)
    return F


def tail_ratio(stream: CoefficientStream, j: int, q: int) -> float:
    """Ratio ``[F_j]_q / [F_{j-1}]_q`` of one slot of consecutive blocks.

    For the D=2 anti-symmetric layout slot ``q`` carries the ket of parity
    ``q``.  There the ratios behave as ``1 - (1 + 2q)/(2j) + O(j^-2)``.
    """
    if j < 2:
        raise ValueError("j must be at least 2")
    den = stream.block(j - 1)[q]
    if den == 0.0:
        raise ZeroDenominator(f"[F_{j-1}]_{q} vanishes")
    return float(stream.block(j)[q] / den)


@dataclass
class SeriesSolution:
    """A coefficient stream together with its truncation policy.

    ``terminating_blocks`` marks a finite (quasi-exact) series: exactly that
    many blocks are summed and evaluation is allowed at any ``x``.
    """

    stream: CoefficientStream
    tolerance: float = DEFAULT_TOL
    max_terms: int = DEFAULT_MAX_TERMS
    terminating_blocks: int | None = None

    @property
    def params(self) -> BasisParams:
        return self.stream.params

    @property
    def p_label(self) -> int:
        return self.stream.p

    @classmethod
    def build(cls, spec: PotentialSpec, params: BasisParams, p: int, **kw) -> "SeriesSolution":
        return cls(CoefficientStream(build_q(spec, params, SEEDS[p])), **kw)


def _block_sums(stream: CoefficientStream, x: float, nb: int):
    qm = stream.q_matrix
    last = int(qm.block_positions(nb - 1).max()) + 1
    ks, qs = stream.kets(last)
    h = stream.coefficients(last)
    val, der = ket_values(ks, qs, stream.params.kappa, stream.params.a, x)
    blk = _block_of(np.arange(last), qm.D, qm.d0)
    return (
        np.bincount(blk, weights=h * val, minlength=nb),
        np.bincount(blk, weights=h * der, minlength=nb),
    )


def _tail(b: np.ndarray, t: float) -> float:
    """Geometric tail bound from the last block terms."""
    mag = np.abs(b[-4:])
    r = t
    if mag.size == 4 and mag[0] + mag[1] > 0:
        r = max(t, math.sqrt((mag[2] + mag[3]) / (mag[0] + mag[1])))
    if r >= 1.0:
        return math.inf
    return float(max(mag[-2:]) * r / (1.0 - r)) if mag.size else 0.0


def _required_blocks(t: float, tol: float) -> int:
    return int(math.ceil(1.1 * (math.log(1.0 / tol) + 6.0) / -math.log(t))) + 16


def reserve(sol: SeriesSolution, x_min: float) -> None:
    """Generate up front every coefficient needed down to ``|x| = x_min``."""
    t = 1.0 / math.cosh(x_min) ** 2
    nb = min(_required_blocks(t, sol.tolerance), sol.max_terms)
    last = int(sol.stream.q_matrix.block_positions(nb - 1).max()) + 1
    sol.stream.coefficients(last)


def evaluate_many(sol: SeriesSolution, xs):
    """Vectorised :func:`evaluate_solution` over several abscissae.

    Returns arrays ``(values, derivatives, error_bounds)``.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    out = np.empty((3, xs.size))
    for i, x in enumerate(xs):
        out[:, i] = evaluate_solution(sol, float(x))
    return out[0], out[1], out[2]


def evaluate_solution(sol: SeriesSolution, x: float):
    """Sum the partitioned series and its derivative at ``x``.

    Returns ``(value, derivative, error_bound)`` where the bound is the
    geometric estimate of the omitted tail of the value series.  The
    tolerance is relative to the magnitude of the partial sums.
    """
    stream = sol.stream
    if sol.terminating_blocks is not None:
        b, db = _block_sums(stream, x, sol.terminating_blocks)
        return float(b.sum()), float(db.sum()), 0.0
    if abs(x) < X_MIN:
        raise ValueError(f"|x| = {abs(x)} lies inside the excluded neighbourhood of 0")
    t = 1.0 / math.cosh(x) ** 2 if abs(x) < 300 else 0.0
    if t == 0.0:
        b, db = _block_sums(stream, x, 2)
        return float(b.sum()), float(db.sum()), 0.0
    tol = sol.tolerance
    nb = min(_required_blocks(t, tol), sol.max_terms)
    while True:
        b, db = _block_sums(stream, x, nb)
        value, deriv = float(b.sum()), float(db.sum())
        bound = _tail(b, t)
        dbound = _tail(db, t)
        if bound <= tol * max(abs(value), 1e-300) and dbound <= tol * max(abs(deriv), 1e-300):
            return value, deriv, bound
        if nb >= sol.max_terms:
            raise SlowConvergence(
                f"tail bound {bound:.3g} above tolerance after {nb} blocks at x={x}"
            )
        nb = min(int(nb * 1.5) + 8, sol.max_terms)


@dataclass(frozen=True)
class TerminationPoint:
    a: float
    kappa: float
    K: int
    residual: float


def _terminal_block(spec, p, a, kappa, K):
    qm = build_q(spec, BasisParams(a, kappa), SEEDS[p])
    stream = CoefficientStream(qm)
    for _ in range(K + 1):
        next_coefficient(stream)
    return stream.F[K + 1]


def detect_termination(
    spec: PotentialSpec,
    p: int,
    a_values,
    kappa_values,
    K: int,
    tol: float = 1e-10,
) -> list[TerminationPoint]:
    """Parameter points where the series stops after at most ``K + 1`` blocks.

    ``F_{K+1}`` is scanned on the ``(a, kappa)`` grid; with a single ``a``
    sign changes (scalar blocks) or local minima of its norm are polished in
    ``kappa`` alone, otherwise in ``(a, kappa)`` by least squares.  Points
    whose polished ``max|F_{K+1}|`` stays above ``tol`` are discarded.
    """
    a_values = np.atleast_1d(np.asarray(a_values, dtype=float))
    kappa_values = np.atleast_1d(np.asarray(kappa_values, dtype=float))
    found: list[TerminationPoint] = []

    def vec(a, kappa):
        return _terminal_block(spec, p, a, kappa, K)

    def add(a, kappa):
        if not kappa > 0:
            return
        r = float(np.max(np.abs(vec(a, kappa))))
        if r > tol:
            return
        for pt in found:
            if abs(pt.a - a) < 1e-7 and abs(pt.kappa - kappa) < 1e-7:
                return
        found.append(TerminationPoint(float(a), float(kappa), K, r))

    grid = np.array([[vec(a, k) for k in kappa_values] for a in a_values])
    norms = np.max(np.abs(grid), axis=2)
    kl, kh = kappa_values.min(), kappa_values.max()
    for ia, a in enumerate(a_values):
        if grid.shape[2] == 1:
            comp = grid[ia, :, 0]
            for i in range(len(kappa_values) - 1):
                if comp[i] == 0.0:
                    add(a, kappa_values[i])
                elif comp[i] * comp[i + 1] < 0:
                    root = brentq(lambda k: vec(a, k)[0], kappa_values[i], kappa_values[i + 1], xtol=1e-14)
                    add(a, root)
            if comp[-1] == 0.0:
                add(a, kappa_values[-1])
            continue
        row = norms[ia]
        for i in range(len(kappa_values)):
            lo = row[i - 1] if i > 0 else np.inf
            hi = row[i + 1] if i + 1 < len(row) else np.inf
            if not (row[i] <= lo and row[i] <= hi):
                continue
            if len(a_values) == 1:
                left = kappa_values[max(i - 1, 0)]
                right = kappa_values[min(i + 1, len(kappa_values) - 1)]
                res = minimize_scalar(
                    lambda k: float(np.sum(vec(a, k) ** 2)),
                    bounds=(left, right),
                    method="bounded",
                    options={"xatol": 1e-13},
                )
                add(a, res.x)
            else:
                # 2-d local minimum check across neighbouring a rows
                nb = [norms[j, i] for j in (ia - 1, ia + 1) if 0 <= j < len(a_values)]
                if any(v < row[i] for v in nb):
                    continue
                res = least_squares(
                    lambda v: vec(v[0], v[1]),
                    x0=[a, kappa_values[i]],
                    bounds=([a_values.min() - 1, kl * 0.5], [a_values.max() + 1, kh * 2]),
                    xtol=1e-15,
                    ftol=1e-15,
                    gtol=1e-15,
                )
                add(res.x[0], res.x[1])
    return sorted(found, key=lambda pt: (pt.a, -pt.kappa))
