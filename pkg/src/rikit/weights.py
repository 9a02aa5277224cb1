"""Weights, increasing bijections, their primitives and inverses, and hypothesis probes."""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .functions import INF, StepFunction, step_from_json, step_to_json

MONOTONE_FLAGS = ("nonincreasing", "nondecreasing", "none")

PROBE_PER_DECADE = 64
PROBE_DECADES = (-9, 9)
QUAD_REL_TOL = 1e-10
QUAD_ABS_FLOOR = 1e-300
BISECTION_CAP = 200


class DomainError(ValueError):
    pass


class DivergenceError(ArithmeticError):
    """An integral that should be finite is +∞."""


def probe_grid(L=INF) -> np.ndarray:
    lo, hi = PROBE_DECADES
    grid = 10.0 ** (np.arange(lo * PROBE_PER_DECADE, hi * PROBE_PER_DECADE + 1) / PROBE_PER_DECADE)
    if math.isfinite(L):
        grid = grid[grid < L]
    return grid


def _as_array(t):
    arr = np.asarray(t, dtype=float)
    return arr, arr.ndim == 0


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

def _simpson_segments(g: Callable, a: np.ndarray, b: np.ndarray, rel_tol=QUAD_REL_TOL, abs_floor=QUAD_ABS_FLOOR,
                      max_rounds=60) -> np.ndarray:
    """Adaptive Simpson on many segments at once; returns one integral per segment.

    ``g`` must be vectorized.  Each segment is bisected until the Richardson
    difference is below its share of the global tolerance.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m = 0.5 * (a + b)
    fa, fm, fb = g(a), g(m), g(b)
    whole = (b - a) / 6.0 * (fa + 4 * fm + fb)
    result = np.zeros_like(a)
    owner = np.arange(a.size)
    total_width = float(np.sum(b - a)) or 1.0
    scale = max(float(np.sum(np.abs(whole))), abs_floor)
    for _ in range(max_rounds):
        if a.size == 0:
            break
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm, frm = g(lm), g(rm)
        left = (m - a) / 6.0 * (fa + 4 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4 * frm + fb)
        err = np.abs(left + right - whole)
        tol = np.maximum(rel_tol * scale * (b - a) / total_width, abs_floor)
        done = (err <= 15 * tol) | ((b - a) <= 1e-14 * np.maximum(np.abs(a), np.abs(b)))
        np.add.at(result, owner[done], (left + right + (left + right - whole) / 15.0)[done])
        keep = ~done
        a, m, b = a[keep], m[keep], b[keep]
        fa, fm, fb = fa[keep], fm[keep], fb[keep]
        lm, rm, flm, frm = lm[keep], rm[keep], flm[keep], frm[keep]
        left, right, owner = left[keep], right[keep], owner[keep]
        a, m, b, fa, fm, fb, whole, owner = (
            np.concatenate([a, m]), np.concatenate([lm, rm]), np.concatenate([m, b]),
            np.concatenate([fa, fm]), np.concatenate([flm, frm]), np.concatenate([fm, fb]),
            np.concatenate([left, right]), np.concatenate([owner, owner]),
        )
    if a.size:
        np.add.at(result, owner, whole)
    return result


def integrate_log(w: Callable, x0: np.ndarray, x1: np.ndarray) -> np.ndarray:
    """∫_{x0}^{x1} w on each segment, computed in the variable y = log x."""
    g = lambda y: w(np.exp(y)) * np.exp(y)
    return _simpson_segments(g, np.log(x0), np.log(x1))


def _head_integral_log(w: Callable, x: float) -> float:
    """∫₀ˣ w for a weight known to be integrable at 0."""
    g = lambda y: w(np.exp(y)) * np.exp(y)
    y_top = math.log(x)
    # walk down in decades until the remainder is negligible
    y = y_top
    step = math.log(10.0)
    pieces_lo, pieces_hi = [], []
    running = 0.0
    for _ in range(300):
        y_lo = y - step
        if y_lo < -690:
            break
        pieces_lo.append(y_lo)
        pieces_hi.append(y)
        gl = float(g(np.array([y_lo]))[0])
        gh = float(g(np.array([y]))[0])
        running += 0.5 * (gl + gh) * step
        slope = (math.log(gh) - math.log(gl)) / step if gl > 0 and gh > 0 else 0.0
        y = y_lo
        if gl == 0.0:
            break
        if slope > 0 and gl / slope < 1e-13 * running:
            break
    vals = _simpson_segments(g, np.array(pieces_lo), np.array(pieces_hi))
    total = float(np.sum(vals))
    gl = float(g(np.array([y]))[0])
    if gl > 0:
        gh = float(g(np.array([y + step]))[0])
        slope = (math.log(gh) - math.log(gl)) / step if gh > 0 else 0.0
        if slope > 0:
            total += gl / slope
    return total


# ---------------------------------------------------------------------------
# weights
# ---------------------------------------------------------------------------

class Weight:
    """A positive weight on (0, L).  Subclasses implement ``values`` and primitives."""

    monotone: str = "none"

    def values(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, t):
        arr, scalar = _as_array(t)
        if np.any(~(arr > 0)) or np.any(~np.isfinite(arr)):
            raise DomainError("weights are evaluated at finite t > 0")
        out = self.values(arr)
        return float(out) if scalar else out

    # primitives -------------------------------------------------------------
    def power_form(self):
        """``(c, a)`` if the weight is exactly c·t^a, else None."""
        return None

    def head_convergent(self) -> bool:
        t1, t2 = 1e-150, 1e-100
        w1, w2 = float(self.values(np.array([t1]))[0]), float(self.values(np.array([t2]))[0])
        if w1 == 0.0:
            return True
        if w2 == 0.0:
            return False
        slope = (math.log(w2 * t2) - math.log(w1 * t1)) / (math.log(t2) - math.log(t1))
        return slope > 1e-9

    def antiderivative(self, x) -> np.ndarray:
        """∫₀ˣ w when integrable at 0, otherwise ∫₁ˣ w (finite for every x > 0)."""
        arr, scalar = _as_array(x)
        flat = arr.ravel()
        pf = self.power_form()
        if pf is not None:
            c, a = pf
            out = c * np.log(flat) if a == -1 else c * flat ** (a + 1) / (a + 1)
        else:
            out = self._numeric_antiderivative(flat)
        out = out.reshape(arr.shape)
        return float(out) if scalar else out

    def _numeric_antiderivative(self, x: np.ndarray) -> np.ndarray:
        if x.size == 0:
            return np.zeros(0)
        uniq, inv = np.unique(x, return_inverse=True)
        if np.any(uniq <= 0):
            raise DomainError("antiderivative requires x > 0")
        if self.head_convergent():
            base = _head_integral_log(self.values, float(uniq[0]))
            segs = integrate_log(self.values, uniq[:-1], uniq[1:]) if uniq.size > 1 else np.zeros(0)
            cum = base + np.concatenate([[0.0], np.cumsum(segs)])
        else:
            pts = np.union1d(uniq, [1.0])
            segs = integrate_log(self.values, pts[:-1], pts[1:])
            cum = np.concatenate([[0.0], np.cumsum(segs)])
            cum -= cum[np.searchsorted(pts, 1.0)]
            cum = cum[np.searchsorted(pts, uniq)]
        return cum[inv]

    def primitive(self, t):
        """U(t) = ∫₀ᵗ w; raises DivergenceError when w is not integrable at 0."""
        if not self.head_convergent():
            raise DivergenceError(f"{self!r} is not integrable near 0")
        return self.antiderivative(t)

    def to_json(self) -> dict:
        raise NotImplementedError


def _ell(t: np.ndarray, j: int) -> np.ndarray:
    out = 1.0 + np.abs(np.log(t))
    for _ in range(j - 1):
        out = 1.0 + np.log(out)
    return out


class PowerLog(Weight):
    """c·t^a·∏ ℓ_j(t)^{b_j} with ℓ₁ = 1+|log t| and ℓ_{j+1} = 1 + log ℓ_j."""

    def __init__(self, c=1, a=0, b: Sequence = (), monotone: str = "none"):
        if not c > 0:
            raise ValueError("c must be positive")
        b = list(b)
        while b and b[-1] == 0:
            b.pop()
        if monotone not in MONOTONE_FLAGS:
            raise ValueError(f"unknown monotonicity flag {monotone!r}")
        self.c, self.a, self.b, self.monotone = c, a, tuple(b), monotone

    def __repr__(self):
        return f"PowerLog(c={self.c}, a={self.a}, b={list(self.b)})"

    def values(self, t):
        out = float(self.c) * t ** float(self.a)
        for j, bj in enumerate(self.b, start=1):
            if bj:
                out = out * _ell(t, j) ** float(bj)
        return out

    def power_form(self):
        if self.b:
            return None
        return float(self.c), float(self.a)

    def head_convergent(self) -> bool:
        if self.a != -1:
            return self.a > -1
        for bj in self.b:
            if bj != -1:
                return bj < -1
        return False

    def to_json(self):
        return {"kind": "powerlog", "c": _num_json(self.c), "a": _num_json(self.a),
                "b": [_num_json(x) for x in self.b], "monotone": self.monotone}


def power(a, c=1) -> PowerLog:
    """c·t^a with the monotonicity flag that the sign of ``a`` dictates."""
    flag = "nonincreasing" if a < 0 else "nondecreasing" if a > 0 else "nonincreasing"
    return PowerLog(c, a, (), monotone=flag)


class Tabulated(Weight):
    """Piecewise-constant weight given by a step function (zero beyond its support)."""

    def __init__(self, step: StepFunction, monotone: str = "none"):
        self.step = step
        self.monotone = monotone

    def __repr__(self):
        return f"Tabulated({self.step!r})"

    def values(self, t):
        return self.step(t)

    def head_convergent(self):
        return True

    def antiderivative(self, x):
        arr, scalar = _as_array(x)
        e, c = self.step.float_arrays()
        cum = np.concatenate([[0.0], np.cumsum(np.diff(e) * c)])
        k = np.clip(np.searchsorted(e, arr, side="right") - 1, 0, len(c))
        kk = np.minimum(k, len(c) - 1)
        out = np.where(arr >= e[-1], cum[-1], cum[kk] + c[kk] * (arr - e[kk]))
        return float(out) if scalar else out

    def to_json(self):
        return {"kind": "tabulated", "step": step_to_json(self.step), "monotone": self.monotone}


class Interpolated(Weight):
    """Piecewise-linear weight through nodes (x_i, y_i); constant beyond the last node."""

    def __init__(self, x: Sequence[float], y: Sequence[float], monotone: str = "none"):
        self.x = np.asarray(x, dtype=float)
        self.y = np.asarray(y, dtype=float)
        if self.x.ndim != 1 or self.x.shape != self.y.shape or np.any(np.diff(self.x) <= 0):
            raise ValueError("nodes must be strictly increasing with matching values")
        if self.x[0] != 0:
            self.x = np.concatenate([[0.0], self.x])
            self.y = np.concatenate([[self.y[0]], self.y])
        self.monotone = monotone

    def __repr__(self):
        return f"Interpolated({self.x.tolist()}, {self.y.tolist()})"

    def values(self, t):
        return np.interp(t, self.x, self.y)

    def head_convergent(self):
        return True

    def antiderivative(self, x):
        arr, scalar = _as_array(x)
        xs, ys = self.x, self.y
        cum = np.concatenate([[0.0], np.cumsum(np.diff(xs) * 0.5 * (ys[1:] + ys[:-1]))])
        k = np.clip(np.searchsorted(xs, arr, side="right") - 1, 0, len(xs) - 1)
        yk = ys[k]
        yx = self.values(arr)
        out = cum[k] + 0.5 * (yk + yx) * (arr - xs[k])
        return float(out) if scalar else out

    def to_json(self):
        return {"kind": "interpolated", "x": self.x.tolist(), "y": self.y.tolist(), "monotone": self.monotone}


class ReciprocalPrimitive(Weight):
    """v(t) = 1 / ∫₀^{ν⁻¹(t)} ξ."""

    def __init__(self, xi: Weight, nu: "Bijection", monotone: str = "nonincreasing"):
        self.xi, self.nu, self.monotone = xi, nu, monotone
        self._simple = self._simplify()

    def __repr__(self):
        return f"ReciprocalPrimitive({self.xi!r}, {self.nu!r})"

    def _simplify(self):
        pf = self.xi.power_form()
        alpha = self.nu.power_exponent()
        if pf is None or alpha is None or not pf[1] > -1:
            return None
        c, a = pf
        return PowerLog((a + 1) / c, -(a + 1) / alpha)

    def values(self, t):
        if self._simple is not None:
            return self._simple.values(t)
        return 1.0 / self.xi.primitive(self.nu.inverse(t))

    def power_form(self):
        return self._simple.power_form() if self._simple is not None else None

    def head_convergent(self):
        return self._simple.head_convergent() if self._simple is not None else Weight.head_convergent(self)

    def to_json(self):
        return {"kind": "reciprocal_primitive", "xi": self.xi.to_json(), "nu": self.nu.to_json(),
                "monotone": self.monotone}


class Product(Weight):
    def __init__(self, first: Weight, second: Weight, monotone: str = "none"):
        self.first, self.second, self.monotone = first, second, monotone
        self._simple = None
        p, q = first.power_form(), second.power_form()
        if p is not None and q is not None:
            self._simple = PowerLog(p[0] * q[0], p[1] + q[1])

    def __repr__(self):
        return f"Product({self.first!r}, {self.second!r})"

    def values(self, t):
        return self.first.values(t) * self.second.values(t)

    def power_form(self):
        return self._simple.power_form() if self._simple is not None else None

    def head_convergent(self):
        return self._simple.head_convergent() if self._simple is not None else Weight.head_convergent(self)

    def to_json(self):
        return {"kind": "product", "factors": [self.first.to_json(), self.second.to_json()],
                "monotone": self.monotone}


class Quotient(Weight):
    """w₁/w₂, e.g. φ = u/ξ."""

    def __init__(self, num: Weight, den: Weight, monotone: str = "none"):
        self.num, self.den, self.monotone = num, den, monotone

    def __repr__(self):
        return f"Quotient({self.num!r}, {self.den!r})"

    def values(self, t):
        return self.num.values(t) / self.den.values(t)

    def power_form(self):
        p, q = self.num.power_form(), self.den.power_form()
        if p is None or q is None:
            return None
        return p[0] / q[0], p[1] - q[1]

    def to_json(self):
        return {"kind": "quotient", "num": self.num.to_json(), "den": self.den.to_json(),
                "monotone": self.monotone}


class Composed(Weight):
    """t ↦ w(ν(t))."""

    def __init__(self, w: Weight, nu: "Bijection", monotone: str = "none"):
        self.w, self.nu, self.monotone = w, nu, monotone

    def values(self, t):
        return self.w.values(self.nu(t))

    def power_form(self):
        pf, alpha = self.w.power_form(), self.nu.power_exponent()
        if pf is None or alpha is None:
            return None
        return pf[0], pf[1] * alpha

    def to_json(self):
        return {"kind": "composed", "w": self.w.to_json(), "nu": self.nu.to_json(), "monotone": self.monotone}


def eval_weight(w: Weight, t, L=INF) -> float:
    if not (0 < t < L):
        raise DomainError(f"t={t} outside (0, {L})")
    return w(t)


def primitive(w: Weight, t):
    return w.primitive(t)


# ---------------------------------------------------------------------------
# bijections
# ---------------------------------------------------------------------------

class Bijection:
    def __call__(self, t):
        arr, scalar = _as_array(t)
        out = self.forward(arr)
        return float(out) if scalar else out

    def forward(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def backward(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def inverse(self, y):
        arr, scalar = _as_array(y)
        out = self.backward(arr)
        return float(out) if scalar else out

    def power_exponent(self):
        return None

    def to_json(self) -> dict:
        raise NotImplementedError


class Power(Bijection):
    def __init__(self, alpha=1):
        if not alpha > 0:
            raise ValueError("alpha must be positive")
        self.alpha = alpha

    def __repr__(self):
        return f"Power({self.alpha})"

    def forward(self, t):
        return t if self.alpha == 1 else t ** float(self.alpha)

    def backward(self, y):
        return y if self.alpha == 1 else y ** (1.0 / float(self.alpha))

    def power_exponent(self):
        return float(self.alpha)

    def to_json(self):
        return {"kind": "power", "alpha": _num_json(self.alpha)}


IDENTITY = Power(1)


class Composite(Bijection):
    """outer ∘ inner."""

    def __init__(self, outer: Bijection, inner: Bijection):
        self.outer, self.inner = outer, inner

    def __repr__(self):
        return f"Composite({self.outer!r}, {self.inner!r})"

    def forward(self, t):
        return self.outer.forward(self.inner.forward(t))

    def backward(self, y):
        return self.inner.backward(self.outer.backward(y))

    def power_exponent(self):
        p, q = self.outer.power_exponent(), self.inner.power_exponent()
        return None if p is None or q is None else p * q

    def to_json(self):
        return {"kind": "composite", "outer": self.outer.to_json(), "inner": self.inner.to_json()}


_FUNCS = {"log": np.log, "exp": np.exp, "sqrt": np.sqrt, "log1p": np.log1p, "expm1": np.expm1,
          "sinh": np.sinh, "arcsinh": np.arcsinh, "tanh": np.tanh, "arctanh": np.arctanh}
_CONSTS = {"e": math.e, "pi": math.pi}
_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}


def compile_expression(expr: str) -> Callable[[np.ndarray], np.ndarray]:
    """Compile an arithmetic expression in ``t`` using a small whitelist."""
    tree = ast.parse(expr, mode="eval")

    def build(node):
        if isinstance(node, ast.Expression):
            return build(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            v = float(node.value)
            return lambda t: v
        if isinstance(node, ast.Name):
            if node.id == "t":
                return lambda t: t
            if node.id in _CONSTS:
                v = _CONSTS[node.id]
                return lambda t: v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            op, left, right = _BINOPS[type(node.op)], build(node.left), build(node.right)
            return lambda t: op(left(t), right(t))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            inner = build(node.operand)
            sign = -1.0 if isinstance(node.op, ast.USub) else 1.0
            return lambda t: sign * inner(t)
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS \
                and len(node.args) == 1 and not node.keywords:
            fn, arg = _FUNCS[node.func.id], build(node.args[0])
            return lambda t: fn(arg(t))
        raise ValueError(f"unsupported expression element: {ast.dump(node)[:60]}")

    return build(tree)


class Numeric(Bijection):
    """Increasing bijection of (0, L) given by an expression; inverted by bisection."""

    def __init__(self, expr: str, L=INF):
        self.expr, self.L = expr, L
        self._f = compile_expression(expr)

    def __repr__(self):
        return f"Numeric({self.expr!r}, L={self.L})"

    def forward(self, t):
        return np.asarray(self._f(np.asarray(t, dtype=float)), dtype=float) + 0.0 * t

    def backward(self, y):
        y = np.asarray(y, dtype=float)
        lo = np.zeros_like(y)
        if math.isfinite(self.L):
            hi = np.full_like(y, float(self.L))
        else:
            hi = np.ones_like(y)
            for _ in range(2000):
                short = self.forward(hi) < y
                if not np.any(short):
                    break
                hi = np.where(short, hi * 2.0, hi)
        for _ in range(BISECTION_CAP):
            mid = 0.5 * (lo + hi)
            below = self.forward(mid) < y
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.all(hi - lo <= 4e-16 * hi):
                break
        return 0.5 * (lo + hi)

    def to_json(self):
        return {"kind": "numeric", "expr": self.expr, "L": "inf" if math.isinf(self.L) else self.L}


def invert(nu: Bijection, y, L=INF) -> float:
    if not (0 < y < L):
        raise DomainError(f"y={y} outside (0, {L})")
    return nu.inverse(y)


# ---------------------------------------------------------------------------
# hypothesis probes
# ---------------------------------------------------------------------------

@dataclass
class DeltaReport:
    endpoint: str
    mode: str
    theta: float
    estimate: float
    verdict: bool
    confidence: str
    raw: float | None = None

    def to_json(self):
        return {"endpoint": self.endpoint, "mode": self.mode, "theta": self.theta,
                "estimate": _finite_or_str(self.estimate), "verdict": self.verdict,
                "confidence": self.confidence, "raw": _finite_or_str(self.raw)}


@dataclass
class AveragingReport:
    constant_estimate: float
    grid: tuple
    verdict: bool
    confidence: str
    reason: str = ""

    def to_json(self):
        return {"constant_estimate": _finite_or_str(self.constant_estimate),
                "grid": {"lo": self.grid[0], "hi": self.grid[1], "points": self.grid[2]},
                "verdict": self.verdict, "confidence": self.confidence, "reason": self.reason}


def _finite_or_str(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


DELTA_DECADES = 12


def check_delta(nu: Bijection, endpoint: str, mode: str, theta: float = 2.0, L=INF) -> DeltaReport:
    """Estimate liminf (mode 'inf') or limsup (mode 'sup') of ν(θt)/ν(t) at 0 or ∞."""
    if not theta > 1:
        raise ValueError("theta must exceed 1")
    if endpoint not in ("zero", "infinity") or mode not in ("inf", "sup"):
        raise ValueError("endpoint must be zero|infinity and mode inf|sup")
    if endpoint == "infinity" and math.isfinite(L):
        raise DomainError("the endpoint at infinity needs L = infinity")
    alpha = nu.power_exponent()
    if alpha is not None:
        est = theta ** alpha
        return DeltaReport(endpoint, mode, theta, est, _delta_verdict(mode, est), "exact", est)
    per = PROBE_PER_DECADE
    if endpoint == "zero":
        top = min(1.0, float(L) / theta / 2.0) if math.isfinite(L) else 1.0
        exps = -np.arange(0, DELTA_DECADES * per + 1) / per
        t = top * 10.0 ** exps
    else:
        t = 10.0 ** (np.arange(0, DELTA_DECADES * per + 1) / per)
    r = nu(theta * t) / nu(t)
    pick = np.min if mode == "inf" else np.max
    # per-decade extremes over the last three decades, extrapolated in 1/|log t|
    decs = []
    for d in (DELTA_DECADES - 2, DELTA_DECADES - 1, DELTA_DECADES):
        sl = slice((d - 1) * per, d * per + 1)
        decs.append((float(pick(r[sl])), 1.0 / abs(math.log(float(t[d * per])))))
    (r1, x1), (r2, x2), (r3, x3) = decs
    raw = float(pick(r[(DELTA_DECADES - 3) * per:]))
    est = r3 - x3 * (r2 - r3) / (x2 - x3)
    if not math.isfinite(est):
        est = raw
    return DeltaReport(endpoint, mode, theta, est, _delta_verdict(mode, est), "probed", raw)


def _delta_verdict(mode, est) -> bool:
    if mode == "inf":
        return bool(est > 1 + 1e-3)
    return bool(math.isfinite(est) and est < 1e6)


def check_averaging(w: Weight, L=INF) -> AveragingReport:
    grid = probe_grid(L)
    meta = (float(grid[0]), float(grid[-1]), int(grid.size))
    pf = w.power_form()
    if pf is not None:
        c, a = pf
        if a > -1:
            return AveragingReport(1.0 / (a + 1), meta, True, "exact")
        return AveragingReport(INF, meta, False, "exact", "primitive diverges at 0")
    try:
        W = w.primitive(grid)
    except DivergenceError as exc:
        return AveragingReport(INF, meta, False, "probed", f"primitive diverges: {exc}")
    vals = w(grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(vals > 0, W / (grid * vals), np.inf)
    const = float(np.max(ratio))
    return AveragingReport(const, meta, bool(math.isfinite(const)), "probed")


def check_quasiconcave(psi: Weight, L=INF, rel_tol=1e-12) -> bool:
    grid = probe_grid(L)
    vals = psi(grid)
    if np.any(vals < 0):
        return False
    nondec = np.all(np.diff(vals) >= -rel_tol * np.abs(vals[1:]))
    q = vals / grid
    noninc = np.all(np.diff(q) <= rel_tol * np.abs(q[:-1]))
    return bool(nondec and noninc)


def check_nondegenerate(u: Weight, L=INF) -> bool:
    if not u.head_convergent():
        return False
    grid = probe_grid(L)
    U = u.primitive(grid)
    return bool(np.any((U > 0) & np.isfinite(U)))


def check_monotone(w: Weight, L=INF, rel_tol=1e-12) -> bool:
    """Probe-verify the declared monotonicity flag."""
    if w.monotone == "none":
        return True
    vals = w(probe_grid(L))
    d = np.diff(vals)
    if w.monotone == "nonincreasing":
        return bool(np.all(d <= rel_tol * np.abs(vals[:-1])))
    return bool(np.all(d >= -rel_tol * np.abs(vals[1:])))


def is_nonincreasing_on_grid(values: np.ndarray, rel_tol=1e-10) -> bool:
    d = np.diff(values)
    return bool(np.all(d <= rel_tol * np.abs(values[:-1]) + 1e-300))


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def _num_json(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    return x


def _num_in(x):
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ValueError(f"expected a number, got {x!r}")
    return x


def weight_from_json(d: dict) -> Weight:
    kind = d.get("kind")
    flag = d.get("monotone", "none")
    if kind == "powerlog":
        return PowerLog(_num_in(d.get("c", 1)), _num_in(d.get("a", 0)), [_num_in(x) for x in d.get("b", [])], flag)
    if kind == "tabulated":
        return Tabulated(step_from_json(d["step"]), flag)
    if kind == "interpolated":
        return Interpolated(d["x"], d["y"], flag)
    if kind == "reciprocal_primitive":
        return ReciprocalPrimitive(weight_from_json(d["xi"]), bijection_from_json(d["nu"]),
                                   d.get("monotone", "nonincreasing"))
    if kind == "product":
        f1, f2 = d["factors"]
        return Product(weight_from_json(f1), weight_from_json(f2), flag)
    if kind == "quotient":
        return Quotient(weight_from_json(d["num"]), weight_from_json(d["den"]), flag)
    if kind == "composed":
        return Composed(weight_from_json(d["w"]), bijection_from_json(d["nu"]), flag)
    raise ValueError(f"unknown weight kind {kind!r}")


def bijection_from_json(d: dict) -> Bijection:
    kind = d.get("kind")
    if kind == "power":
        return Power(_num_in(d["alpha"]))
    if kind == "identity":
        return Power(1)
    if kind == "composite":
        return Composite(bijection_from_json(d["outer"]), bijection_from_json(d["inner"]))
    if kind == "numeric":
        L = d.get("L", "inf")
        return Numeric(d["expr"], INF if L == "inf" else float(L))
    raise ValueError(f"unknown bijection kind {kind!r}")


def probe_monotonicity(w: Weight, L=INF, rel_tol=1e-12) -> str:
    """Which monotonicity class holds on the probe grid (constant counts as nonincreasing)."""
    vals = w(probe_grid(L))
    d = np.diff(vals)
    scale = np.abs(vals[:-1])
    if np.all(d <= rel_tol * scale):
        return "nonincreasing"
    if np.all(d >= -rel_tol * scale):
        return "nondecreasing"
    return "none"
