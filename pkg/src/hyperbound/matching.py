"""Origin matching of the two series solutions and the secular equation.

The seeds ``Xi_1`` and ``Xi_2`` give two series ``phi0`` and ``phi1``.  On
the punctured line each solves the Schrodinger equation and decays at both
infinities, but in general neither is smooth at ``x = 0``.  A bound state
is a combination

    psi = M * phi0 + g * N * phi1

whose value and slope are continuous across the origin.  Writing the jumps
of value and slope between ``-eps`` and ``+eps`` as a 2x2 matrix, bound
states are the roots in ``kappa`` of its determinant.

The series cannot be summed at ``x = 0`` itself (``t = 1/cosh^2 x -> 1``),
so the data at ``+-eps`` are carried to ``0+-`` by a Taylor expansion of the
ODE solution.  This removes the ``O(eps)`` bias of the raw jumps; an
optional Richardson extrapolation over an ``eps`` ladder then checks that
nothing depends on ``eps`` any more.
"""
from __future__ import annotations

import math
import os
import warnings
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ._errors import ExtrapolationUnstable, NoRoots
from .basis import BasisParams
from .potential import PotentialSpec, max_depth, taylor_coefficients
from .qbuilder import SEEDS, build_q
from .series import CoefficientStream, SeriesSolution, evaluate_solution, reserve

__all__ = [
    "MatchComponents",
    "MatchResult",
    "MatchConfig",
    "components_at",
    "secular_determinant",
    "transport",
    "find_spectrum",
    "assemble_wavefunction",
    "default_kappa_max",
    "reduced_series",
]

DEFAULT_EPSILONS = (0.05, 0.025, 0.0125)
MATCH_MAX_TERMS = 1_000_000
TAYLOR_ORDER = 30
NEAR_ORIGIN = 0.2


@dataclass(frozen=True)
class MatchComponents:
    """Reduced origin data of ``phi0`` and ``phi1`` at offset ``epsilon``.

    With ``u = sinh eps`` and ``c = cosh eps``, the value and slope jumps
    ``d[f] = f(+) - f(-)`` are reduced as

        s_tilde = d[phi0]  / (2 u c^-k)       s       = d[phi1]  / (2 u c^-(k+1))
        S       = -d[phi0'] / (2 u c^-(k+1))  S_tilde = -d[phi1'] / (2 u c^-(k+2))

    (``k = kappa``).  For ``a = 0`` and untransported data these are exactly
    the t-series ``sum h t^n`` of the parity-split coefficients.  The
    half-sums ``c``, ``c_tilde``, ``C``, ``C_tilde`` are scaled by the same
    leading cosh powers.
    """

    s_tilde: float
    s: float
    c: float
    c_tilde: float
    S: float
    S_tilde: float
    C: float
    C_tilde: float
    t: float
    epsilon: float
    kappa: float
    transported: bool = False

    @property
    def determinant(self) -> float:
        return self.s_tilde * self.S_tilde - self.s * self.S

    def jump_matrix(self) -> np.ndarray:
        """Raw jumps ``[[d phi0, d phi1], [d phi0', d phi1']]``."""
        u = math.sinh(self.epsilon)
        lc = math.log(math.cosh(self.epsilon))
        k = self.kappa
        p0, p1, p2 = (2 * u * math.exp(-(k + j) * lc) for j in (0, 1, 2))
        return np.array(
            [[p0 * self.s_tilde, p1 * self.s], [-p1 * self.S, -p2 * self.S_tilde]]
        )


@dataclass(frozen=True)
class MatchResult:
    kappa: float
    energy: float
    mixing_M: float
    mixing_N: float
    epsilon_used: float
    residual: float
    near_threshold: bool = False
    kappa_ladder: tuple = ()

    def as_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "energy": self.energy,
            "mixing_M": self.mixing_M,
            "mixing_N": self.mixing_N,
            "residual": self.residual,
        }


@dataclass
class MatchConfig:
    """Knobs of :func:`find_spectrum`.

    ``tol`` is the root tolerance in ``kappa``; the ``kappa(eps)`` values of
    one root may spread by at most ``100 * tol``.
    """

    epsilons: tuple = DEFAULT_EPSILONS
    grid_points: int = 64
    tol: float = 1e-10
    series_tol: float = 1e-13
    transport: bool = True
    extrapolate: bool = True
    taylor_order: int = TAYLOR_ORDER
    max_terms: int = MATCH_MAX_TERMS
    threads: int | None = None
    raise_on_empty: bool = False

    def __post_init__(self):
        eps = tuple(float(e) for e in self.epsilons)
        if not eps or any(not 0 < e <= 0.5 for e in eps):
            raise ValueError("every epsilon must lie in (0, 0.5]")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("epsilons must be strictly decreasing")
        if self.grid_points < 32:
            raise ValueError("grid_points must be at least 32")
        if not (self.tol > 0 and self.series_tol > 0):
            raise ValueError("tolerances must be positive")
        self.epsilons = eps


# -- Taylor transport -----------------------------------------------------
def transport(
    spec: PotentialSpec,
    kappa: float,
    x0: float,
    value: float,
    derivative: float,
    x1: float,
    order: int = TAYLOR_ORDER,
):
    """Carry ``(psi, psi')`` from ``x0`` to ``x1`` along ``psi'' = (V + kappa^2) psi``.

    Uses the power series of the solution about ``x0``; the radius of
    convergence is the distance to the nearest complex pole of ``V``
    (``pi/2`` from the real axis), so ``|x1 - x0|`` should stay well below it.
    """
    w = taylor_coefficients(spec, x0, order)
    w[0] += kappa * kappa
    c = np.zeros(order)
    c[0], c[1] = value, derivative
    for n in range(order - 2):
        c[n + 2] = np.dot(w[: n + 1], c[n::-1]) / ((n + 2) * (n + 1))
    dx = x1 - x0
    val = np.polynomial.polynomial.polyval(dx, c)
    der = np.polynomial.polynomial.polyval(dx, c[1:] * np.arange(1, order))
    return float(val), float(der)


# -- per-kappa evaluation -----------------------------------------------------
class _Pair:
    """The two coefficient streams of one ``(spec, a, kappa)``."""

    def __init__(self, spec: PotentialSpec, params: BasisParams, config: MatchConfig):
        self.spec = spec
        self.params = params
        self.config = config
        self.solutions = [
            SeriesSolution(
                CoefficientStream(build_q(spec, params, SEEDS[p])),
                tolerance=config.series_tol,
                max_terms=config.max_terms,
            )
            for p in (0, 1)
        ]

    def reserve(self, epsilon: float) -> "_Pair":
        for sol in self.solutions:
            reserve(sol, epsilon)
        return self

    def data(self, x: float, transported: bool):
        """``[(value, slope) at +x, at -x]`` of each series."""
        out = []
        for sol in self.solutions:
            side = []
            for sx in (x, -x):
                v, d, _ = evaluate_solution(sol, sx)
                if transported:
                    v, d = transport(
                        self.spec, self.params.kappa, sx, v, d, 0.0, self.config.taylor_order
                    )
                side.append((v, d))
            out.append(side)
        return out


def _components(pair: _Pair, epsilon: float, transported: bool) -> MatchComponents:
    ((vp0, dp0), (vm0, dm0)), ((vp1, dp1), (vm1, dm1)) = pair.data(epsilon, transported)
    k = pair.params.kappa
    u = math.sinh(epsilon)
    lc = math.log(math.cosh(epsilon))
    cpow = [math.exp(-(k + j) * lc) for j in (-1, 0, 1, 2)]  # c^{-k-j}
    return MatchComponents(
        s_tilde=(vp0 - vm0) / (2 * u * cpow[1]),
        s=(vp1 - vm1) / (2 * u * cpow[2]),
        c=(vp0 + vm0) / (2 * cpow[1]),
        c_tilde=(vp1 + vm1) / (2 * cpow[2]),
        S=-(dp0 - dm0) / (2 * u * cpow[2]),
        S_tilde=-(dp1 - dm1) / (2 * u * cpow[3]),
        C=(dp0 + dm0) / (2 * cpow[0]),
        C_tilde=(dp1 + dm1) / (2 * cpow[1]),
        t=math.exp(-2 * lc),
        epsilon=float(epsilon),
        kappa=float(k),
        transported=transported,
    )


def components_at(
    spec: PotentialSpec,
    params: BasisParams,
    epsilon: float,
    transport: bool = False,
    config: MatchConfig | None = None,
) -> MatchComponents:
    """Reduced matching components at offset ``epsilon``.

    With ``transport=False`` the series are summed at ``+-epsilon`` as they
    are; with ``transport=True`` the data are first carried to ``0+-``.
    """
    if not 0 < epsilon <= 0.5:
        raise ValueError("epsilon must lie in (0, 0.5]")
    config = config or MatchConfig()
    return _components(_Pair(spec, params, config), epsilon, transport)


def secular_determinant(
    spec: PotentialSpec,
    kappa: float,
    a: float,
    epsilon: float,
    transport: bool = True,
    config: MatchConfig | None = None,
) -> float:
    """``det [[s_tilde, s], [S, S_tilde]]`` at ``(kappa, epsilon)``."""
    return components_at(spec, BasisParams(a, kappa), epsilon, transport, config).determinant


def reduced_series(stream: CoefficientStream, kind: str, t: float, blocks: int) -> float:
    """Direct t-series of one reduced component (``a = 0`` layouts).

    ``kind`` is ``s_tilde`` / ``S`` (on the ``p = 0`` stream) or ``s`` /
    ``S_tilde`` (on ``p = 1``).  Used to cross-check :func:`components_at`.
    """
    kappa = stream.params.kappa
    p = stream.p
    q = 0 if kind in ("s_tilde", "s") else 1
    total = 0.0
    for n in range(blocks):
        k = 2 * n + p
        if (k, q) == (0, 0):
            continue
        h = stream.h(k, q)
        weight = 1.0 if q == 0 else kappa + k
        total += weight * h * t**n
    return total


# -- spectrum -----------------------------------------------------------------
def default_kappa_max(spec: PotentialSpec) -> float:
    return math.sqrt(max_depth(spec)) + 1.0


def _threads(config: MatchConfig) -> int:
    if config.threads is not None:
        return max(1, int(config.threads))
    try:
        return max(1, int(os.environ.get("HYPERBOUND_THREADS", "1")))
    except ValueError:
        return 1


def _neville(xs, ys) -> float:
    """Value at 0 of the interpolating polynomial through ``(xs, ys)``."""
    p = list(ys)
    n = len(xs)
    for m in range(1, n):
        for i in range(n - m):
            p[i] = (xs[i + m] * p[i] - xs[i] * p[i + 1]) / (xs[i + m] - xs[i])
    return p[0]


class _Solver:
    # each pair holds streams of ~1e5-1e6 coefficients, so only a few are kept
    _CACHE = 4

    def __init__(self, spec, a, config):
        self.spec = spec
        self.a = float(a)
        self.config = config
        self._pairs: OrderedDict[float, _Pair] = OrderedDict()

    def pair(self, kappa: float) -> _Pair:
        pr = self._pairs.get(kappa)
        if pr is None:
            pr = _Pair(self.spec, BasisParams(self.a, kappa), self.config)
            self._pairs[kappa] = pr
            while len(self._pairs) > self._CACHE:
                self._pairs.popitem(last=False)
        else:
            self._pairs.move_to_end(kappa)
        return pr

    def det(self, kappa: float, eps: float) -> float:
        return _components(self.pair(kappa).reserve(eps), eps, self.config.transport).determinant

    def scan(self, grid: np.ndarray, eps: float) -> np.ndarray:
        def one(k):
            pr = _Pair(self.spec, BasisParams(self.a, float(k)), self.config).reserve(eps)
            return _components(pr, eps, self.config.transport).determinant

        workers = _threads(self.config)
        if workers > 1:
            with ThreadPoolExecutor(workers) as ex:
                return np.array(list(ex.map(one, grid)))
        return np.array([one(k) for k in grid])

    def polish(self, lo: float, hi: float, eps: float, guess: float | None = None) -> float:
        if guess is not None:
            # kappa(eps) barely moves along the ladder: try a narrow bracket first
            d = max(1e3 * self.config.tol, 1e-9 * guess)
            a, b = max(lo, guess - d), min(hi, guess + d)
            fa, fb = self.det(a, eps), self.det(b, eps)
            if fa * fb < 0:
                return brentq(
                    lambda k: self.det(k, eps), a, b, xtol=self.config.tol * 1e-2, rtol=1e-15
                )
        flo, fhi = self.det(lo, eps), self.det(hi, eps)
        if flo == 0.0:
            return lo
        if fhi == 0.0:
            return hi
        if flo * fhi > 0:
            # a root sitting on a grid point has a noise-level sign there;
            # one step either way recovers a clean bracket
            w = hi - lo
            a, b = max(lo - w, 0.5 * lo), hi + w
            if self.det(a, eps) * self.det(b, eps) > 0:
                raise ExtrapolationUnstable(
                    f"bracket ({lo:.6g}, {hi:.6g}) loses its sign change at eps={eps}"
                )
            lo, hi = a, b
        return brentq(
            lambda k: self.det(k, eps), lo, hi, xtol=self.config.tol * 1e-2, rtol=1e-15
        )

    def mixing(self, kappa: float, eps: float):
        comp = _components(self.pair(kappa), eps, self.config.transport)
        m = comp.jump_matrix()
        _, sv, vt = np.linalg.svd(m)
        v = vt[-1]
        residual = float(sv[-1] / sv[0]) if sv[0] > 0 else 0.0
        v = v / np.max(np.abs(v))
        if v[int(np.argmax(np.abs(v)))] < 0:
            v = -v
        g = self.spec.g_ref or 1.0
        return float(v[0]), float(v[1] / g), residual


def find_spectrum(
    spec: PotentialSpec,
    a: float = 0.0,
    kappa_range: tuple | None = None,
    config: MatchConfig | None = None,
) -> list[MatchResult]:
    """Bound states of ``spec`` as roots of the secular determinant.

    The determinant is scanned on a uniform ``kappa`` grid at the coarsest
    ``eps``; every bracket is then re-checked and polished with Brent's
    method at each ``eps`` of the ladder, and the ``kappa(eps)`` values are
    extrapolated to ``eps -> 0``.  Results are sorted by
    decreasing ``kappa`` (ground state first).

    An empty list is a valid answer; pass ``raise_on_empty=True`` in the
    config to get :class:`NoRoots` instead.
    """
    config = config or MatchConfig()
    if kappa_range is None:
        kappa_range = (1e-3, default_kappa_max(spec))
    lo, hi = float(kappa_range[0]), float(kappa_range[1])
    if not 0 < lo < hi:
        raise ValueError(f"invalid kappa range {kappa_range}")
    if spec.is_zero:
        if config.raise_on_empty:
            raise NoRoots("V = 0 has no bound states")
        return []

    solver = _Solver(spec, a, config)
    grid = np.linspace(lo, hi, config.grid_points)
    ladder = config.epsilons
    # the sign pattern of the determinant does not depend on eps, so the
    # cheap coarsest eps locates the brackets and every eps polishes them
    vals = solver.scan(grid, ladder[0])
    brackets = []
    for i in range(len(grid) - 1):
        if vals[i] == 0.0 or vals[i] * vals[i + 1] < 0:
            brackets.append((grid[i], grid[i + 1]))
    if vals[-1] == 0.0:
        brackets.append((grid[-2], grid[-1]))
    per_root = []
    for l, h in brackets:
        ks = [solver.polish(l, h, ladder[0])]
        # widened neighbouring brackets can land on the same root
        if per_root and abs(per_root[-1][0] - ks[0]) < 100 * config.tol:
            continue
        for e in ladder[1:]:
            ks.append(solver.polish(l, h, e, guess=ks[-1]))
        per_root.append(ks)
    results = []
    for ks in per_root:
        spread = max(ks) - min(ks)
        if spread > 100 * config.tol:
            raise ExtrapolationUnstable(
                f"kappa(eps) spread {spread:.3g} exceeds {100 * config.tol:.3g}"
            )
        if config.extrapolate and len(ks) > 1:
            kappa = float(_neville(list(ladder), ks))
            if abs(kappa - ks[-1]) > 100 * config.tol:
                raise ExtrapolationUnstable("extrapolated root moved beyond tolerance")
        else:
            kappa = ks[-1]
        near = kappa < 10 * config.tol
        if near:
            warnings.warn(f"root kappa={kappa:.3g} lies at the threshold", RuntimeWarning)
        M, N, residual = solver.mixing(kappa, ladder[-1])
        results.append(
            MatchResult(
                kappa=kappa,
                energy=-kappa * kappa,
                mixing_M=M,
                mixing_N=N,
                epsilon_used=ladder[-1],
                residual=residual,
                near_threshold=near,
                kappa_ladder=tuple(ks),
            )
        )
    if not results and config.raise_on_empty:
        raise NoRoots(f"no bound state with kappa in ({lo}, {hi})")
    return sorted(results, key=lambda r: -r.kappa)


# -- wave functions -----------------------------------------------------------
def assemble_wavefunction(
    result: MatchResult,
    spec: PotentialSpec,
    a: float,
    xs,
    config: MatchConfig | None = None,
    near_origin: float = NEAR_ORIGIN,
) -> list[tuple[float, float, float]]:
    """Sample ``psi = M phi0 + g N phi1`` and ``psi'`` at ``xs``.

    The series are summed directly on either side of the origin.  Samples
    with ``|x| < near_origin`` are reached by Taylor transport from
    ``+-near_origin``, which keeps ``psi`` smooth through ``x = 0``.
    """
    config = config or MatchConfig()
    pair = _Pair(spec, BasisParams(a, result.kappa), config)
    g = spec.g_ref or 1.0
    weights = (result.mixing_M, g * result.mixing_N)

    def psi_at(x):
        v = d = 0.0
        for w, sol in zip(weights, pair.solutions):
            if w:
                pv, pd, _ = evaluate_solution(sol, x)
                v += w * pv
                d += w * pd
        return v, d

    anchors: dict[int, tuple] = {}
    out = []
    for x in np.atleast_1d(np.asarray(xs, dtype=float)):
        x = float(x)
        if abs(x) >= near_origin:
            v, d = psi_at(x)
        else:
            side = 1 if x >= 0 else -1
            if side not in anchors:
                anchors[side] = psi_at(side * near_origin)
            v0, d0 = anchors[side]
            v, d = transport(spec, result.kappa, side * near_origin, v0, d0, x, config.taylor_order)
        out.append((x, v, d))
    return out
