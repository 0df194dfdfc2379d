"""Independent grid oracle: Numerov shooting for the bound states.

The equation ``psi'' = (V - E) psi`` is integrated inward from both ends of
``[-L, L]`` with exponentially decaying start values.  Levels are indexed
by the node count of the left solution and polished on the discrete
Wronskian of the two solutions at the matching point; the discrete problem
has eigenvalues within ``O(h^4)`` of the exact ones.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numba
import numpy as np
from scipy.optimize import brentq

from ._errors import GridTooSmall, LevelMissing
from .potential import PotentialSpec, evaluate_potential

__all__ = [
    "GridConfig",
    "Eigenfunction",
    "auto_grid",
    "numerov_spectrum",
    "numerov_eigenfunction",
    "count_nodes",
]

DECAY = 1e-10
MAX_STEP = 0.005
MAX_POINTS = 2_000_001
# levels shallower than this decay rate are not looked for
KAPPA_FLOOR = 1e-3


@dataclass(frozen=True)
class GridConfig:
    """Uniform grid on ``[-half_width, half_width]``.

    ``match_point`` defaults to the bottom of the well.
    """

    half_width: float
    points: int
    match_point: float | None = None

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")
        if self.points < 2001 or self.points % 2 == 0:
            raise ValueError("points must be odd and at least 2001")
        if self.match_point is not None and not abs(self.match_point) < 0.9 * self.half_width:
            raise ValueError("match_point must lie inside the grid")

    @property
    def step(self) -> float:
        return 2.0 * self.half_width / (self.points - 1)

    def abscissae(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.points)

    def refined(self) -> "GridConfig":
        """Same domain with the step halved."""
        return GridConfig(self.half_width, 2 * self.points - 1, self.match_point)


class Eigenfunction(NamedTuple):
    x: np.ndarray
    psi: np.ndarray
    energy: float
    nodes: int


def auto_grid(half_width: float, step: float = MAX_STEP) -> GridConfig:
    n = int(math.ceil(2 * half_width / step)) + 1
    n += 1 - n % 2
    return GridConfig(half_width, max(2001, min(n, MAX_POINTS)))


# -- kernels ----------------------------------------------------------------
@numba.njit(cache=True)
def _numerov(w, h, y0, y1, reverse):
    """Integrate ``y'' = w y``; rescales on the fly to avoid overflow."""
    n = w.size
    y = np.empty(n)
    c = h * h / 12.0
    if reverse:
        y[n - 1] = y0
        y[n - 2] = y1
        for i in range(n - 2, 0, -1):
            y[i - 1] = ((2.0 + 10.0 * c * w[i]) * y[i] - (1.0 - c * w[i + 1]) * y[i + 1]) / (
                1.0 - c * w[i - 1]
            )
            if abs(y[i - 1]) > 1e200:
                for j in range(i - 1, n):
                    y[j] *= 1e-200
    else:
        y[0] = y0
        y[1] = y1
        for i in range(1, n - 1):
            y[i + 1] = ((2.0 + 10.0 * c * w[i]) * y[i] - (1.0 - c * w[i - 1]) * y[i - 1]) / (
                1.0 - c * w[i + 1]
            )
            if abs(y[i + 1]) > 1e200:
                for j in range(0, i + 2):
                    y[j] *= 1e-200
    return y


@numba.njit(cache=True)
def _numerov_nodes(w, h, y0, y1):
    """Sign changes of the forward solution of ``y'' = w y`` on ``w[:-2]``.

    Counted on the fly: rescaling for overflow flushes early values to zero,
    so counting on the stored array loses nodes on wide grids.
    """
    n = w.size
    c = h * h / 12.0
    prev, cur = y0, y1
    count = 0
    last = y1
    for i in range(1, n - 3):
        nxt = ((2.0 + 10.0 * c * w[i]) * cur - (1.0 - c * w[i - 1]) * prev) / (1.0 - c * w[i + 1])
        if nxt != 0.0:
            if (nxt > 0) != (last > 0):
                count += 1
            last = nxt
        prev, cur = cur, nxt
        if abs(cur) > 1e200:
            prev *= 1e-200
            cur *= 1e-200
            last *= 1e-200
    return count


@numba.njit(cache=True)
def _sign_changes(y, floor):
    count = 0
    last = 0.0
    for v in y:
        if abs(v) <= floor:
            continue
        if last != 0.0 and (v > 0) != (last > 0):
            count += 1
        last = v
    return count


def count_nodes(psi: np.ndarray, rel_floor: float = 1e-8) -> int:
    """Sign changes of ``psi`` ignoring values below ``rel_floor * max|psi|``."""
    psi = np.asarray(psi, dtype=float)
    return int(_sign_changes(psi, rel_floor * np.max(np.abs(psi))))


# -- shooting ---------------------------------------------------------------
class _Shooter:
    def __init__(self, spec: PotentialSpec, grid: GridConfig):
        self.grid = grid
        self.x = grid.abscissae()
        self.h = grid.step
        self.v = evaluate_potential(spec, self.x)
        mp = grid.match_point
        if mp is None:
            core = np.abs(self.x) <= min(10.0, 0.5 * grid.half_width)
            mp = float(self.x[core][np.argmin(self.v[core])])
        self.m = int(np.clip(np.searchsorted(self.x, mp), 2, self.x.size - 3))

    def _ratio(self, e, end):
        """``psi(end) / psi(end +- h)`` for the decaying tail ``exp(-k |x|)``."""
        k = math.sqrt(max(self.v[end] - e, 0.0))
        return math.exp(-k * self.h)

    # start tiny so the inward growth has room before the first rescale
    _TINY = 1e-250

    def left(self, e, upto=None):
        w = self.v - e if upto is None else self.v[: upto + 1] - e
        return _numerov(w, self.h, self._ratio(e, 0) * self._TINY, self._TINY, False)

    def right(self, e):
        w = self.v[self.m - 1 :] - e
        return _numerov(w, self.h, self._ratio(e, -1) * self._TINY, self._TINY, True)

    def nodes_below(self, e) -> int:
        """Node count of the left solution over the whole grid."""
        return int(_numerov_nodes(self.v - e, self.h, self._ratio(e, 0) * self._TINY, self._TINY))

    def mismatch(self, e) -> float:
        m = self.m
        yl = self.left(e, upto=m + 1)
        yr = self.right(e)
        # normalise both at the matching point so the sign is stable
        al, ar = yl[m - 1 : m + 2], yr[:3]
        al = al / (math.hypot(al[0], al[1]) or 1.0)
        ar = ar / (math.hypot(ar[0], ar[1]) or 1.0)
        return (al[2] * ar[1] - al[1] * ar[2]) / self.h

    def eigenvector(self, e) -> np.ndarray:
        m = self.m
        yl = self.left(e, upto=m + 1)
        yr = self.right(e)
        # least-squares scale over three shared points (robust at a node)
        nl = np.max(np.abs(yl[m - 1 : m + 2]))
        nr = np.max(np.abs(yr[:3]))
        ol, orr = yl[m - 1 : m + 2] / nl, yr[:3] / nr
        psi = np.concatenate([yl[:m] / nl, yr[1:] / nr * float(np.dot(ol, orr) / np.dot(orr, orr))])
        return psi / psi[np.argmax(np.abs(psi))]

    def level(self, n, e_lo, e_hi) -> float:
        """Energy of the level with ``n`` nodes inside ``[e_lo, e_hi]``."""
        lo, hi = e_lo, e_hi
        # bisect the node count down to a bracket with a single level
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self.nodes_below(mid) > n:
                hi = mid
            else:
                lo = mid
            if hi - lo < 1e-6 * max(1.0, abs(hi)):
                break
        width = hi - lo
        a, b = lo, hi
        fa, fb = self.mismatch(a), self.mismatch(b)
        grow = 0
        while fa * fb > 0 and grow < 40:
            a, b = max(e_lo, a - width), min(e_hi, b + width)
            fa, fb = self.mismatch(a), self.mismatch(b)
            width *= 2
            grow += 1
        if fa * fb > 0:
            return 0.5 * (lo + hi)
        return brentq(self.mismatch, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _levels(spec: PotentialSpec, grid: GridConfig, max_levels: int):
    sh = _Shooter(spec, grid)
    vmin = float(np.min(sh.v))
    if vmin >= 0.0:
        return sh, []
    top = -1e-14
    total = min(sh.nodes_below(top), max_levels)
    energies = []
    lo = vmin
    for n in range(total):
        e = sh.level(n, lo, top)
        energies.append(e)
        lo = e
    return sh, energies


def _count_levels(spec: PotentialSpec) -> int:
    """Levels with ``kappa > KAPPA_FLOOR``, counted on a very wide coarse grid."""
    if float(np.min(evaluate_potential(spec, np.linspace(-20, 20, 4001)))) >= 0.0:
        return 0
    half = 10.0 + 25.0 / KAPPA_FLOOR
    sh = _Shooter(spec, GridConfig(half, MAX_POINTS, 0.0))
    return sh.nodes_below(-(KAPPA_FLOOR**2))


def _decayed(sh: _Shooter, e: float) -> bool:
    psi = sh.eigenvector(e)
    return max(abs(psi[0]), abs(psi[-1])) <= DECAY


def numerov_spectrum(
    spec: PotentialSpec,
    grid: GridConfig | None = None,
    max_levels: int = 64,
) -> list[float]:
    """All bound-state energies ``E < 0`` (ascending, at most ``max_levels``).

    Without an explicit grid the number of levels with ``kappa > 1e-3`` is
    first counted on a very wide coarse grid; the working domain is then
    widened until all of them are found and the shallowest has decayed to
    ``1e-10`` at both ends.

    Raises
    ------
    GridTooSmall
        An explicit grid is too short for some level to decay.
    """
    if grid is not None:
        sh, energies = _levels(spec, grid, max_levels)
        for e in energies:
            if not _decayed(sh, e):
                raise GridTooSmall(f"level E={e:.6g} has not decayed at |x|={grid.half_width}")
        return energies
    expected = min(_count_levels(spec), max_levels)
    half = 40.0
    while True:
        g = auto_grid(half)
        sh, energies = _levels(spec, g, max_levels)
        if len(energies) >= expected and all(_decayed(sh, e) for e in energies):
            return energies
        if len(energies) < expected:
            # a shallow level spread wider than the grid is not bound on it yet
            new = 2.0 * half
        else:
            new = 10.0 + 25.0 / math.sqrt(-energies[-1])
        if new <= half or half >= 10.0 + 25.0 / KAPPA_FLOOR:
            raise GridTooSmall(f"cannot resolve all {expected} levels")
        half = max(new, 1.5 * half)


def numerov_eigenfunction(
    spec: PotentialSpec,
    grid: GridConfig | None = None,
    level: int = 0,
) -> Eigenfunction:
    """Max-normalised eigenfunction of level ``level`` on the grid."""
    energies = numerov_spectrum(spec, grid)
    if not 0 <= level < len(energies):
        raise LevelMissing(f"level {level} not found ({len(energies)} levels)")
    if grid is None:
        kmin = math.sqrt(-energies[-1])
        grid = auto_grid(max(40.0, 10.0 + 25.0 / kmin))
    sh = _Shooter(spec, grid)
    e = energies[level]
    psi = sh.eigenvector(e)
    return Eigenfunction(sh.x, psi, e, count_nodes(psi))
