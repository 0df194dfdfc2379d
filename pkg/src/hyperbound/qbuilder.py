"""Action of ``H - z`` on the basis kets and the lower-triangular matrix Q(z).

Every term of the Hamiltonian maps a ket ``(k, q)`` onto a handful of kets
with the same or larger cosh exponent:

* ``1/cosh^m`` shifts ``k -> k + m``;
* ``sinh/cosh^n`` flips ``q``; on odd kets it uses ``sinh^2 = cosh^2 - 1``;
* the kinetic operator shifts ``k`` by 0 or 2, and for ``a != 0`` also
  flips ``q``.

Ordering the kets reachable from a seed by ``mu = 2k + q`` makes ``Q``
lower triangular.  Grouping consecutive kets into ``D``-plets turns it into
a block lower-bidiagonal matrix with blocks ``A_n`` (diagonal) and ``B_n``
(first subdiagonal).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import threading

import numpy as np

from ._errors import NotTriangular, UnsupportedTerm
from .basis import BasisIndex, BasisParams
from .potential import PotentialSpec

__all__ = [
    "ActionTerm",
    "Term",
    "apply_term",
    "hamiltonian_terms",
    "BasisLayout",
    "QMatrix",
    "build_q",
    "partition_dimension",
    "SEEDS",
]

SEEDS = {0: BasisIndex(0, 0, 1), 1: BasisIndex(0, 1, 0)}

_PATTERN_WINDOW = 400


class ActionTerm(NamedTuple):
    target: BasisIndex
    weight: float


class Term(NamedTuple):
    """One piece of the Hamiltonian: ``kind`` is ``kinetic``, ``symmetric``
    (``coupling / cosh^order``) or ``antisymmetric``
    (``coupling * sinh / cosh^order``)."""

    kind: str
    order: int
    coupling: float


def _moves(term: Term, q: int, s, a: float):
    """``(dk, q_target, weight)`` triples for source kets of parity ``q``.

    ``s`` is the cosh exponent ``kappa + k`` (scalar or array).
    """
    if term.kind == "kinetic":
        if q == 1:
            out = [(0, 1, -s * s), (2, 1, s * s + s - a * a)]
            if a:
                out.append((2, 0, (2 * s + 1) * a))
        else:
            out = [(0, 0, -(s - 1) ** 2), (2, 0, s * s + s - a * a)]
            if a:
                out += [(0, 1, (2 * s - 1) * a), (2, 1, -(2 * s + 1) * a)]
        return out
    c = term.coupling
    if term.kind == "symmetric":
        return [(term.order, q, c + 0 * s)]
    if term.kind == "antisymmetric":
        n = term.order
        if q == 1:
            return [(n, 0, c + 0 * s)]
        return [(n - 2, 1, c + 0 * s), (n, 1, -c + 0 * s)]
    raise ValueError(f"unknown term kind {term.kind!r}")


def apply_term(
    term_kind: str,
    coupling: float,
    idx: BasisIndex,
    params: BasisParams,
    order: int | None = None,
) -> list[ActionTerm]:
    """Expand ``(term) xi_idx`` as an exact finite sum of basis kets.

    The kinetic term is ``T = -d^2/dx^2`` alone (no ``-z`` shift);
    ``coupling`` is ignored for it.  Zero weights are dropped.
    """
    if term_kind != "kinetic" and order is None:
        raise ValueError("potential terms need an order")
    if term_kind == "antisymmetric" and order == 1 and coupling and params.a == 0:
        raise UnsupportedTerm("g_1 != 0 is not representable in the a = 0 basis")
    term = Term(term_kind, order or 0, coupling)
    s = params.kappa + idx.k
    out = []
    for dk, tq, w in _moves(term, idx.q, s, params.a):
        tk = idx.k + dk
        if tk < 0 or (tk == 0 and tq == 0):
            raise UnsupportedTerm(f"{term} maps {idx!r} outside the basis")
        w = float(w)
        if w != 0.0:
            out.append(ActionTerm(BasisIndex.from_kq(tk, tq), w))
    return out


def hamiltonian_terms(spec: PotentialSpec, a: float) -> list[Term]:
    """Kinetic term followed by every nonzero coupling of ``spec``."""
    if spec.g_n(1) and a == 0:
        raise UnsupportedTerm("g_1 != 0 needs the a != 0 basis")
    terms = [Term("kinetic", 0, 1.0)]
    terms += [Term("symmetric", m, spec.f_m(m)) for m in range(2, spec.M + 1) if spec.f_m(m)]
    terms += [Term("antisymmetric", n, spec.g_n(n)) for n in range(1, spec.M + 1) if spec.g_n(n)]
    return terms


@dataclass
class BasisLayout:
    """Kets reachable from a seed, ordered by ``mu``.

    Reachability obeys a translation-invariant recurrence in ``k`` with
    finite memory, so once a window repeats with shift 2 the pattern is
    periodic from there on; the layout is then extended by tiling.
    """

    terms: list
    a: float
    seed: BasisIndex
    _reach: np.ndarray = field(init=False, repr=False)
    _period_start: int = field(init=False, repr=False)

    def __post_init__(self):
        self._structure = {
            q: [(dk, tq) for t in self.terms for dk, tq, _ in _moves(t, q, 1.0, self.a or 0.0)]
            for q in (0, 1)
        }
        self._memory = max(dk for q in (0, 1) for dk, _ in self._structure[q]) + 2
        self._lock = threading.RLock()
        self._compute(256)

    def _compute(self, kcap):
        reach = np.zeros((kcap + 1, 2), dtype=bool)
        reach[self.seed.k, self.seed.q] = True
        seed_mu = self.seed.mu
        for mu in range(seed_mu, 2 * kcap + 2):
            k, q = divmod(mu, 2)
            if not reach[k, q]:
                continue
            for dk, tq in self._structure[q]:
                tk = k + dk
                if 2 * tk + tq < mu:
                    raise NotTriangular(
                        f"ket {BasisIndex.from_kq(k, q)!r} couples upward to k={tk}, q={tq}"
                    )
                if tk <= kcap:
                    reach[tk, tq] = True
        w = self._memory
        start = None
        for k0 in range(w + 2, kcap - w):
            if np.array_equal(reach[k0 : k0 + w], reach[k0 - 2 : k0 - 2 + w]):
                start = k0 - 2
                break
        if start is None:
            raise NotTriangular("basis closure did not become periodic")
        self._period_start = start
        self._reach = reach[: start + 2]
        self._kets = None
        self._table = None

    def _tile(self, kmax):
        base = self._reach
        start = self._period_start
        if kmax < base.shape[0]:
            return base[: kmax + 1]
        cycle = base[start : start + 2]
        reps = (kmax + 1 - base.shape[0]) // 2 + 1
        full = np.concatenate([base, np.tile(cycle, (reps, 1))])
        return full[: kmax + 1]

    def kets(self, n: int):
        """Arrays ``(k, q)`` of the first ``n`` kets in ``mu`` order."""
        with self._lock:
            return self._kets_locked(n)

    def _kets_locked(self, n: int):
        if self._kets is None or self._kets[0].size < n:
            kmax = max(64, n + 8)
            while True:
                reach = self._tile(kmax)
                mu = np.flatnonzero(reach.reshape(-1))  # flat index 2k + q is mu
                if mu.size >= n:
                    break
                kmax *= 2
            ks, qs = np.divmod(mu, 2)
            table = np.full(reach.shape, -1, dtype=np.int64)
            table[ks, qs] = np.arange(mu.size)
            self._kets = (ks, qs)
            self._table = table
        ks, qs = self._kets
        return ks[:n], qs[:n]

    def position(self, k, q):
        """Positions of kets ``(k, q)`` (``-1`` when unreachable or beyond cache)."""
        k = np.asarray(k)
        q = np.asarray(q)
        out = np.full(np.broadcast(k, q).shape, -1, dtype=np.int64)
        ok = (k >= 0) & (k < self._table.shape[0])
        out[ok] = self._table[k[ok], np.broadcast_to(q, k.shape)[ok]]
        return out

    def structural_pattern(self, n: int):
        """Pairs ``(row, col)`` of structurally nonzero entries among ``n`` kets."""
        ks, qs = self.kets(n + 64)
        rows, cols = [], []
        for q in (0, 1):
            src = np.flatnonzero(qs[:n] == q)
            for dk, tq in self._structure[q]:
                tgt = self.position(ks[src] + dk, tq)
                keep = (tgt >= 0) & (tgt < n)
                rows.append(tgt[keep])
                cols.append(src[keep])
        return np.concatenate(rows), np.concatenate(cols)


def _block_of(pos, D, d0):
    return (pos + d0 - 1) // D


def _choose_partition(rows, cols, prefer_d0=None):
    reach = int(np.max(rows - cols)) if rows.size else 0
    for D in range(1, max(reach, 1) + 1):
        order = list(range(D, 0, -1))
        if prefer_d0 is not None and 1 <= prefer_d0 <= D:
            order.remove(prefer_d0)
            order.insert(0, prefer_d0)
        for d0 in order:
            diff = _block_of(rows, D, d0) - _block_of(cols, D, d0)
            if np.all((diff >= 0) & (diff <= 1)):
                return D, d0, reach
    raise NotTriangular("no block-bidiagonal partition found")


class _Structure:
    """Sparsity of ``Q`` shared by every ``kappa`` of one term pattern.

    Only the weights depend on ``kappa``; the layout, the partition and the
    scatter indices of each move are computed once per
    ``(term kinds, a != 0, seed)`` and reused.
    """

    _cache: dict = {}
    _lock = threading.Lock()

    def __init__(self, terms, a, seed):
        self.terms = terms
        self.layout = BasisLayout(terms, a, seed)
        rows, cols = self.layout.structural_pattern(_PATTERN_WINDOW)
        self.D, self.d0, self.bandwidth = _choose_partition(rows, cols)
        self._a = a
        self._scatter: dict = {}

    @classmethod
    def get(cls, terms, a, seed):
        key = (tuple((t.kind, t.order) for t in terms), bool(a), seed)
        with cls._lock:
            hit = cls._cache.get(key)
            if hit is None:
                hit = cls._cache[key] = cls(terms, a, seed)
            return hit

    def scatter(self, n: int):
        """``(ks, qs, {(q, term, move): (source positions, flat band index)})``."""
        with self._lock:
            hit = self._scatter.get(n)
            if hit is not None:
                return hit
            ks, qs = self.layout.kets(n)
            ks, qs = ks.copy(), qs.copy()
            w = self.bandwidth
            pieces = {}
            for q in (0, 1):
                src = np.flatnonzero(qs == q)
                if src.size == 0:
                    continue
                for ti, term in enumerate(self.terms):
                    for mi, (dk, tq, _) in enumerate(_moves(term, q, 1.0, self._a)):
                        tgt = self.layout.position(ks[src] + dk, tq)
                        keep = (tgt >= 0) & (tgt < n)
                        d = tgt[keep] - src[keep]
                        if d.size and d.min() < 0:
                            raise NotTriangular("entry above the diagonal")
                        if d.size and d.max() > w:
                            raise NotTriangular("entry outside the detected band")
                        pieces[(q, ti, mi)] = (src[keep], d * n + src[keep])
            if len(self._scatter) > 8:
                self._scatter.clear()
            hit = self._scatter[n] = (ks, qs, pieces)
            return hit


class QMatrix:
    """Partitioned quasi-Hamiltonian ``Q(z)`` at ``z = -kappa^2``.

    Rows and columns follow :attr:`layout` (kets reachable from the seed,
    ``mu`` ascending).  Block ``n`` holds positions
    ``n D - d0 + 1 .. n D - d0 + D``; positions below 0 are virtual
    padding with zero rows and columns.
    """

    def __init__(self, spec: PotentialSpec, params: BasisParams, seed: BasisIndex):
        if seed not in SEEDS.values():
            raise ValueError(f"seed must be Xi_1 or Xi_2, got {seed!r}")
        self.spec = spec
        self.params = params
        self.seed = seed
        self.p = seed.p
        self.terms = hamiltonian_terms(spec, params.a)
        shape = _Structure.get(self.terms, params.a, seed)
        self._shape = shape
        self.layout = shape.layout
        self.partition_D, self.offset_d0, self.bandwidth = shape.D, shape.d0, shape.bandwidth
        self._band = np.zeros((self.bandwidth + 1, 0))

    @property
    def z(self) -> float:
        return -self.params.kappa**2

    @property
    def D(self) -> int:
        return self.partition_D

    @property
    def d0(self) -> int:
        return self.offset_d0

    # -- band storage -----------------------------------------------------
    def band(self, n: int) -> np.ndarray:
        """Lower band ``ab[d, i] = Q[i + d, i]`` for the first ``n`` kets.

        Columns near ``n`` miss entries whose rows fall beyond ``n``; only
        columns whose full band fits (``i < n - bandwidth``) are complete.
        """
        if self._band.shape[1] < n:
            size = -(-n // 1024) * 1024
            self._band = self._assemble(size)
        return self._band[:, :n]

    def _assemble(self, n: int) -> np.ndarray:
        kappa, a = self.params.kappa, self.params.a
        w = self.bandwidth
        ks, qs, pieces = self._shape.scatter(n)
        flat, weights = [], []
        for (q, ti, mi), (src, idx) in pieces.items():
            s = kappa + ks[src]
            wt = _moves(self.terms[ti], q, s, a)[mi][2]
            flat.append(idx)
            weights.append(np.broadcast_to(wt, s.shape))
        if flat:
            ab = np.bincount(
                np.concatenate(flat), weights=np.concatenate(weights), minlength=(w + 1) * n
            ).reshape(w + 1, n)
        else:
            ab = np.zeros((w + 1, n))
        # kinetic diagonal plus kappa^2 is a_j = -j (2 kappa + j) with
        # j = k - 1 + q; written exactly so the seed entry is a true zero
        j = ks - 1 + qs
        ab[0] = -j * (2.0 * kappa + j)
        return ab

    def dense(self, n: int) -> np.ndarray:
        """Leading ``n x n`` corner of ``Q`` as a dense array."""
        ab = self.band(n + self.bandwidth + 1)
        out = np.zeros((n, n))
        for d in range(self.bandwidth + 1):
            i = np.arange(n - d)
            out[i + d, i] = ab[d, i]
        return out

    # -- blocks -----------------------------------------------------------
    def block_positions(self, n: int) -> np.ndarray:
        return np.arange(n * self.D - self.d0 + 1, n * self.D - self.d0 + self.D + 1)

    def _sub(self, rows, cols):
        ab = self.band(int(max(rows.max(), cols.max())) + self.bandwidth + 2)
        out = np.zeros((rows.size, cols.size))
        for a_, r in enumerate(rows):
            for b_, c in enumerate(cols):
                d = r - c
                if r >= 0 and c >= 0 and 0 <= d <= self.bandwidth:
                    out[a_, b_] = ab[d, c]
        return out

    def block_A(self, n: int) -> np.ndarray:
        pos = self.block_positions(n)
        return self._sub(pos, pos)

    def block_B(self, n: int) -> np.ndarray:
        """Subdiagonal block coupling block ``n`` into block ``n + 1``."""
        return self._sub(self.block_positions(n + 1), self.block_positions(n))

    def blocks(self, count: int):
        """Lists ``([A_0..A_{count-1}], [B_0..B_{count-1}])``."""
        return [self.block_A(n) for n in range(count)], [self.block_B(n) for n in range(count)]

    def basis_order(self, n: int) -> list[BasisIndex]:
        ks, qs = self.layout.kets(n)
        return [BasisIndex.from_kq(int(k), int(q)) for k, q in zip(ks, qs)]

    def block_kets(self, n: int) -> list[BasisIndex | None]:
        pos = self.block_positions(n)
        ks, qs = self.layout.kets(int(pos.max()) + 1)
        return [BasisIndex.from_kq(int(ks[i]), int(qs[i])) if i >= 0 else None for i in pos]

    def __repr__(self):
        return (
            f"QMatrix(seed={self.seed!r}, D={self.D}, d0={self.d0}, "
            f"band={self.bandwidth}, kappa={self.params.kappa}, a={self.params.a})"
        )


def build_q(spec: PotentialSpec, params: BasisParams, seed: BasisIndex) -> QMatrix:
    return QMatrix(spec, params, seed)


def partition_dimension(spec: PotentialSpec, a: float) -> int:
    """Block size needed for a two-term block recurrence (max over both seeds)."""
    params = BasisParams(a, 1.0)
    return max(build_q(spec, params, seed).D for seed in SEEDS.values())
