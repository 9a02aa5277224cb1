"""Exact algebra of nonnegative step functions on (0, L).

A step function is stored as an increasing edge sequence ``0 = e_0 < e_1 < ... < e_n = T``
together with one value per cell ``(e_k, e_{k+1})``; the function vanishes on ``(T, L)``.
Arithmetic is carried out in whatever number type the inputs use, so rational
(``fractions.Fraction``) inputs give exact results.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Iterable, Sequence

import numpy as np

INF = math.inf


class InvalidStepFunction(ValueError):
    pass


class InvalidLayout(ValueError):
    pass


def _is_number(x) -> bool:
    return isinstance(x, Real) and not isinstance(x, bool)


def _check_length(L):
    if not _is_number(L) or not (L > 0):
        raise InvalidStepFunction(f"domain length must be positive, got {L!r}")
    return L


class StepFunction:
    """Canonical nonnegative step function with compact support in (0, L)."""

    __slots__ = ("L", "edges", "values", "_float_cache")

    def __init__(self, edges: Sequence, values: Sequence, L=INF):
        L = _check_length(L)
        edges = tuple(edges)
        values = tuple(values)
        if len(edges) != len(values) + 1 or not values:
            raise InvalidStepFunction("need len(edges) == len(values) + 1 >= 2")
        if edges[0] != 0:
            raise InvalidStepFunction("first edge must be 0")
        for a, b in zip(edges, edges[1:]):
            if not (_is_number(b) and b > a):
                raise InvalidStepFunction("edges must be strictly increasing reals")
        if edges[-1] > L or math.isinf(edges[-1]):
            raise InvalidStepFunction("support bound must be finite and at most L")
        for c in values:
            if not _is_number(c) or not (c >= 0) or math.isinf(c):
                raise InvalidStepFunction(f"values must be finite and >= 0, got {c!r}")
        # merge equal neighbours, drop trailing zeros
        e_out = [edges[0]]
        v_out: list = []
        for k, c in enumerate(values):
            if v_out and v_out[-1] == c:
                e_out[-1] = edges[k + 1]
            else:
                v_out.append(c)
                e_out.append(edges[k + 1])
        while len(v_out) > 1 and v_out[-1] == 0:
            v_out.pop()
            e_out.pop()
        if v_out == [0]:
            e_out = [0, min(1, L)]
            v_out = [0]
        self.L = L
        self.edges = tuple(e_out)
        self.values = tuple(v_out)
        self._float_cache = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, L=INF) -> "StepFunction":
        return cls((0, min(1, L)), (0,), L)

    @classmethod
    def indicator(cls, a, b=None, L=INF, value=1) -> "StepFunction":
        """``value * χ_(a,b)``; a single argument means ``χ_(0,a)``."""
        if b is None:
            a, b = 0, a
        if a == 0:
            return cls((0, b), (value,), L)
        return cls((0, a, b), (0, value), L)

    @classmethod
    def from_cells(cls, cells: Iterable[tuple], L=INF) -> "StepFunction":
        """Build from ``(left, right, value)`` triples; gaps are zero."""
        cells = sorted((c for c in cells if c[1] > c[0]), key=lambda c: c[0])
        if not cells:
            return cls.zero(L)
        edges = [0]
        values = []
        for left, right, value in cells:
            if left < edges[-1]:
                raise InvalidStepFunction("cells overlap")
            if left > edges[-1]:
                values.append(0)
                edges.append(left)
            values.append(value)
            edges.append(right)
        return cls(edges, values, L)

    def cells(self) -> list[tuple]:
        return [(a, b, c) for a, b, c in zip(self.edges, self.edges[1:], self.values)]

    # -- basic queries ----------------------------------------------------
    @property
    def support_bound(self):
        return self.edges[-1]

    @property
    def breakpoints(self) -> tuple:
        return self.edges[1:-1]

    def is_zero(self) -> bool:
        return self.values == (0,)

    def __eq__(self, other) -> bool:
        if not isinstance(other, StepFunction):
            return NotImplemented
        return (self.L, self.edges, self.values) == (other.L, other.edges, other.values)

    def __hash__(self):
        return hash((self.L, self.edges, self.values))

    def __repr__(self):
        body = ", ".join(f"{c} on ({a}, {b})" for a, b, c in self.cells())
        return f"StepFunction([{body}], L={self.L})"

    def float_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if self._float_cache is None:
            self._float_cache = (
                np.array([float(e) for e in self.edges]),
                np.array([float(c) for c in self.values]),
            )
        return self._float_cache

    def __call__(self, t):
        """Right-continuous evaluation; accepts scalars or numpy arrays."""
        if np.ndim(t) == 0:
            if t < 0:
                raise ValueError("t must be >= 0")
            if t >= self.edges[-1]:
                return 0 * self.values[0]
            return self.values[bisect.bisect_right(self.edges, t) - 1]
        e, c = self.float_arrays()
        t = np.asarray(t, dtype=float)
        k = np.searchsorted(e, t, side="right") - 1
        inside = (k >= 0) & (k < len(c))
        out = np.zeros_like(t)
        out[inside] = c[k[inside]]
        return out

    def integral(self):
        return sum((b - a) * c for a, b, c in self.cells())

    def max(self):
        return max(self.values)

    # -- algebra ----------------------------------------------------------
    def _refine(self, edges: Sequence) -> list:
        """Values of self on each cell of a refinement given by ``edges``."""
        out = []
        k = 0
        n = len(self.values)
        for a in edges[:-1]:
            while k < n and self.edges[k + 1] <= a:
                k += 1
            out.append(self.values[k] if k < n else 0 * self.values[0])
        return out

    def _merged(self, other: "StepFunction"):
        L = min(self.L, other.L)
        edges = sorted(set(self.edges) | set(other.edges))
        return L, edges, self._refine(edges), other._refine(edges)

    def __add__(self, other: "StepFunction") -> "StepFunction":
        L, edges, a, b = self._merged(other)
        return StepFunction(edges, [x + y for x, y in zip(a, b)], L)

    def __mul__(self, other) -> "StepFunction":
        if isinstance(other, StepFunction):
            L, edges, a, b = self._merged(other)
            return StepFunction(edges, [x * y for x, y in zip(a, b)], L)
        if other < 0:
            raise InvalidStepFunction("negative scaling")
        return StepFunction(self.edges, [other * c for c in self.values], self.L)

    __rmul__ = __mul__

    def clip_above(self, c) -> "StepFunction":
        """min(f, c)."""
        return StepFunction(self.edges, [min(x, c) for x in self.values], self.L)

    def excess(self, c) -> "StepFunction":
        """(f - c)_+."""
        return StepFunction(self.edges, [max(x - c, 0 * x) for x in self.values], self.L)

    def truncate(self, T) -> "StepFunction":
        """f·χ_(0,T)."""
        if T >= self.edges[-1]:
            return self
        cells = [(a, min(b, T), c) for a, b, c in self.cells() if a < T]
        return StepFunction.from_cells(cells, self.L)

    def with_length(self, L) -> "StepFunction":
        return StepFunction(self.edges, self.values, L)

    def dominated_by(self, other: "StepFunction") -> bool:
        _, _, a, b = self._merged(other)
        return all(x <= y for x, y in zip(a, b))

    # -- level structure --------------------------------------------------
    def distribution(self) -> dict:
        """Map value -> total measure, for positive values only."""
        out: dict = {}
        for a, b, c in self.cells():
            if c > 0:
                out[c] = out.get(c, 0) + (b - a)
        return out

    def levels(self) -> list[tuple]:
        """``(value, measure)`` pairs of f*, by decreasing value."""
        return sorted(self.distribution().items(), key=lambda p: p[0], reverse=True)

    def support_measure(self):
        return sum(m for _, m in self.levels())

    def is_nonincreasing(self) -> bool:
        return all(x >= y for x, y in zip(self.values, self.values[1:]))


def rearrange(f: StepFunction) -> StepFunction:
    """Nonincreasing rearrangement f*."""
    levels = f.levels()
    if not levels:
        return StepFunction.zero(f.L)
    edges = [0]
    for _, m in levels:
        edges.append(edges[-1] + m)
    if edges[-1] > f.L:  # float round-off in the measure sum
        edges[-1] = f.L
    return StepFunction(edges, [c for c, _ in levels], f.L)


def head_integral(f: StepFunction, t):
    """∫₀ᵗ f*."""
    if t < 0:
        raise ValueError("t must be >= 0")
    total = 0 * f.values[0]
    start = 0
    for c, m in f.levels():
        if t <= start:
            break
        total += c * (min(start + m, t) - start)
        start += m
    return total


def double_star(f: StepFunction, t):
    """f**(t) = (1/t)∫₀ᵗ f*."""
    if not t > 0:
        raise ValueError("t must be > 0")
    return head_integral(f, t) / t


def star_at(f: StepFunction, t):
    """Right-continuous f*(t)."""
    start = 0
    for c, m in f.levels():
        start += m
        if t < start:
            return c
    return 0 * f.values[0]


def is_equimeasurable(f: StepFunction, g: StepFunction) -> bool:
    return f.distribution() == g.distribution()


def inner(f: StepFunction, g: StepFunction):
    """∫ f·g, exact."""
    return (f * g).integral()


# -- layouts ---------------------------------------------------------------

@dataclass(frozen=True)
class Layout:
    """Placement of the levels of f* onto target intervals.

    ``pieces`` holds ``(left, right, level_index)`` where level indices refer to
    ``rearrange(f).levels()`` (largest value first).
    """

    pieces: tuple

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(tuple(p) for p in self.pieces))

    def to_json(self) -> list:
        return [{"left": _num_out(a), "right": _num_out(b), "level": k} for a, b, k in self.pieces]


def _num_out(x):
    return float(x) if not isinstance(x, int) else x


def _close(a, b, scale=0) -> bool:
    """Exact equality, or float agreement up to round-off relative to ``scale``."""
    if isinstance(a, float) or isinstance(b, float):
        return math.isclose(a, b, rel_tol=1e-12, abs_tol=max(1e-12 * float(scale), 1e-300))
    return a == b


def transport(f: StepFunction, layout: Layout) -> StepFunction:
    """Move the levels of f* according to ``layout``; the result is equimeasurable with f."""
    levels = f.levels()
    scale = sum(m for _, m in levels)
    used = [0] * len(levels)
    pieces = sorted(layout.pieces, key=lambda p: p[0])
    prev_right = 0
    for a, b, k in pieces:
        if not (0 <= k < len(levels)):
            raise InvalidLayout(f"unknown level index {k}")
        if not (b > a >= 0) or b > f.L:
            raise InvalidLayout(f"bad target interval ({a}, {b})")
        if a < prev_right and not _close(a, prev_right, scale):
            raise InvalidLayout("target intervals overlap")
        prev_right = b
        used[k] += b - a
    for (c, m), got in zip(levels, used):
        if not _close(m, got, scale):
            raise InvalidLayout(f"level {c} has measure {m}, layout uses {got}")
    cells = []
    last = 0
    for a, b, k in pieces:
        a = max(a, last)  # absorb float round-off at touching ends
        if b > a:
            cells.append((a, b, levels[k][0]))
        last = b
    return StepFunction.from_cells(cells, f.L)


def _level_edges(f: StepFunction) -> list:
    edges = [0]
    for _, m in f.levels():
        edges.append(edges[-1] + m)
    return edges


def segment_layout(f: StepFunction, moves: Iterable[tuple]) -> Layout:
    """Layout that moves source segments of f* rigidly.

    ``moves`` holds ``(src_left, src_right, target_left)``; the segments must tile
    the support of f*.
    """
    edges = _level_edges(f)
    pieces = []
    for s0, s1, t0 in moves:
        for k in range(len(edges) - 1):
            a, b = max(s0, edges[k]), min(s1, edges[k + 1])
            if b > a:
                pieces.append((t0 + (a - s0), t0 + (b - s0), k))
    return Layout(tuple(pieces))


def identity_layout(f: StepFunction) -> Layout:
    T = f.support_measure()
    return segment_layout(f, [(0, T, 0)]) if T else Layout(())


def translation_layout(f: StepFunction, shift) -> Layout:
    T = f.support_measure()
    return segment_layout(f, [(0, T, shift)]) if T else Layout(())


def reflection_layout(f: StepFunction, a) -> Layout:
    """h(t) = f*(a - t) on (0, a); requires a >= |supp f|."""
    edges = _level_edges(f)
    if a < edges[-1]:
        raise InvalidLayout("reflection point smaller than the support measure")
    return Layout(tuple((a - edges[k + 1], a - edges[k], k) for k in range(len(edges) - 1)))


def block_layout(f: StepFunction, order: Sequence[int]) -> Layout:
    """Split supp f* into ``len(order)`` equal blocks; block ``order[j]`` goes to slot j."""
    n = len(order)
    T = f.support_measure()
    if not T:
        return Layout(())
    width = T / n
    return segment_layout(f, [(b * width, (b + 1) * width, j * width) for j, b in enumerate(order)])


# -- JSON --------------------------------------------------------------------

def _parse_number(x):
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise InvalidStepFunction(f"not a number: {x!r}")
    return x


def step_from_json(data, L=None) -> StepFunction:
    """Accept a list of ``{left, right, value}`` cells or ``{"L": ..., "cells": [...]}``."""
    if isinstance(data, dict):
        L = data.get("L", L)
        data = data["cells"]
    if L is None or L == "inf":
        L = INF
    L = _parse_number(L) if not isinstance(L, float) else L
    cells = []
    for i, cell in enumerate(data):
        try:
            cells.append((_parse_number(cell["left"]), _parse_number(cell["right"]), _parse_number(cell["value"])))
        except KeyError as exc:
            raise InvalidStepFunction(f"cell {i}: missing field {exc}") from None
    return StepFunction.from_cells(cells, L)


def _json_num(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    return x


def step_to_json(f: StepFunction) -> dict:
    return {
        "L": "inf" if math.isinf(f.L) else _json_num(f.L),
        "cells": [{"left": _json_num(a), "right": _json_num(b), "value": _json_num(c)} for a, b, c in f.cells()],
    }
