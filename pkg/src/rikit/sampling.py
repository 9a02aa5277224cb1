"""Evaluable nonnegative functions that are not step functions, and their step discretization.

Operator outputs such as ``t ↦ R g(t)`` are smooth between known kinks.  They are turned
into step functions by averaging over the cells of a geometric grid refined at the kinks;
averaging is a contraction for every rearrangement-invariant norm, so norms of the
discretization never overshoot (up to quadrature error).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .functions import INF, StepFunction

DEFAULT_RESOLUTION = 2048
GAUSS_ORDER = 8
_GX, _GW = np.polynomial.legendre.leggauss(GAUSS_ORDER)


@dataclass(frozen=True)
class Profile:
    """A vectorized nonnegative function on (0, L).

    ``kinks`` are points where the function may fail to be smooth; ``support_end``
    (if known) is a point beyond which the function vanishes.
    """

    func: Callable[[np.ndarray], np.ndarray]
    L: float = INF
    kinks: tuple = ()
    support_end: float | None = None
    label: str = ""

    def __call__(self, t):
        return self.func(np.asarray(t, dtype=float))


@dataclass
class Discretization:
    step: StepFunction
    nodes: np.ndarray
    cell_integrals: np.ndarray
    head_exponent: float
    tail_exponent: float
    tail_value: float
    hi: float
    truncated: bool
    resolution: int = DEFAULT_RESOLUTION

    @property
    def cells(self) -> int:
        return len(self.cell_integrals)


def merge_nodes(points: np.ndarray, rel=1e-12) -> np.ndarray:
    pts = np.unique(np.asarray(points, dtype=float))
    if pts.size < 2:
        return pts
    keep = np.concatenate([[True], np.diff(pts) > rel * pts[1:]])
    return pts[keep]


def gauss_cells(func: Callable, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Gauss–Legendre integral of ``func`` over each cell (a_i, b_i)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    pts = mid[:, None] + half[:, None] * _GX[None, :]
    vals = np.asarray(func(pts.ravel()), dtype=float).reshape(pts.shape)
    return half * (vals @ _GW)


def graded_nodes(breaks: Sequence[float], lo: float, hi: float, ratio: float = 1.25) -> np.ndarray:
    """Nodes in [lo, hi] containing ``breaks`` with consecutive ratios at most ``ratio``."""
    pts = merge_nodes(np.concatenate([[lo, hi], [b for b in breaks if lo < b < hi]]))
    out = [pts[:1]]
    for a, b in zip(pts[:-1], pts[1:]):
        n = max(1, int(math.ceil(math.log(b / a) / math.log(ratio))))
        out.append(np.geomspace(a, b, n + 1)[1:])
    return np.concatenate(out)


def integrate(func: Callable, breaks: Sequence[float], upper: float, lower_decades: int = 16,
              ratio: float = 1.25) -> float:
    """∫₀^upper func with Gauss–Legendre on a graded grid through ``breaks``.

    Below the smallest break the grid continues geometrically for ``lower_decades``
    decades; the remaining sliver is integrated by one Gauss cell.
    """
    positive = [b for b in breaks if 0 < b < upper]
    start = min(positive + [upper]) * 10.0 ** (-lower_decades)
    nodes = graded_nodes(positive, start, upper, ratio)
    total = float(np.sum(gauss_cells(func, nodes[:-1], nodes[1:])))
    return total + sliver_integral(func, start)


def sliver_integral(func: Callable, s: float) -> float:
    """∫₀ˢ func, extrapolating a local power law t^{-κ} (κ < 1) when func blows up at 0."""
    g = np.asarray(func(np.array([s * 1e-2, s])), dtype=float)
    if g[0] > 0 and g[1] > 0:
        kappa = math.log(g[0] / g[1]) / math.log(100.0)
        if 0 < kappa < 1:
            return s * float(g[1]) / (1.0 - kappa)
    return float(gauss_cells(func, np.array([0.0]), np.array([s]))[0])


def _exponent(func, t_small, t_big) -> float:
    """Local decay exponent κ with g ≈ t^{-κ} between two sample points."""
    g = np.asarray(func(np.array([t_small, t_big])), dtype=float)
    if not (g[0] > 0 and g[1] > 0):
        return 0.0
    return -math.log(g[1] / g[0]) / math.log(t_big / t_small)


def _head_exponent(func, lo) -> float:
    """Blow-up exponent at 0; zero when the profile converges there.

    A power or logarithmic singularity keeps its local exponent one scale deeper,
    while a profile approaching a finite limit sees it shrink geometrically.
    """
    shallow = _exponent(func, lo * 1e-4, lo)
    if shallow <= 0:
        return shallow
    deep = _exponent(func, lo * 1e-8, lo * 1e-4)
    return deep if deep >= 0.5 * shallow else 0.0


def discretize(profile: Profile, resolution: int = DEFAULT_RESOLUTION) -> Discretization:
    L = profile.L
    end = profile.support_end
    finite_L = math.isfinite(L)
    kinks = [float(k) for k in profile.kinks if k > 0 and math.isfinite(k)]
    if end is not None:
        hi = min(float(end), float(L)) if finite_L else float(end)
    elif finite_L:
        hi = float(L)
    else:
        hi = max([1e9] + [1e3 * k for k in kinks])
    truncated = end is None and not finite_L
    if hi <= 0:
        return Discretization(StepFunction.zero(L), np.zeros(0), np.zeros(0), 0.0, 0.0, 0.0, 0.0, False, resolution)
    ref = hi if finite_L or end is not None else 1.0
    lo = min([1e-9 * min(ref, hi)] + [k / 100.0 for k in kinks if k < hi])
    nodes = merge_nodes(np.concatenate([np.geomspace(lo, hi, resolution), [k for k in kinks if lo < k < hi]]))
    integrals = gauss_cells(profile.func, nodes[:-1], nodes[1:])
    # head cell (0, lo): geometric sub-cells down to lo·1e-6
    sub = lo * 10.0 ** -np.arange(0, 7, dtype=float)
    head = float(np.sum(gauss_cells(profile.func, sub[1:], sub[:-1])))
    head += sliver_integral(profile.func, float(sub[-1]))
    integrals = np.concatenate([[head], integrals])
    edges = np.concatenate([[0.0], nodes])
    widths = np.diff(edges)
    vals = np.maximum(integrals / widths, 0.0)
    step = StepFunction(edges.tolist(), vals.tolist(), L)
    head_exp = _head_exponent(profile.func, lo)
    tail_exp = _exponent(profile.func, hi * 1e-3, hi) if truncated else 0.0
    tail_val = float(profile(np.array([hi]))[0]) if truncated else 0.0
    return Discretization(step, nodes, integrals, head_exp, tail_exp, tail_val, hi, truncated, resolution)
