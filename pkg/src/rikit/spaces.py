"""Rearrangement-invariant norms on step functions and sampled profiles.

Supported: L^p, Λ¹_v (∫ f* v), M_ψ (sup ψ f**), intersections (max) and sums
(min over clippings f = (f−c)₊ + min(f, c), an upper bound for the true norm).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .functions import INF, StepFunction, head_integral, rearrange
from .sampling import DEFAULT_RESOLUTION, Discretization, Profile, discretize
from .weights import (
    DivergenceError,
    DomainError,
    IDENTITY,
    PowerLog,
    Product,
    ReciprocalPrimitive,
    Weight,
    check_quasiconcave,
    probe_grid,
    weight_from_json,
)


class UnsupportedDual(ValueError):
    pass


class SpaceSpec:
    L: float

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Lebesgue(SpaceSpec):
    p: float
    L: float = INF

    def __post_init__(self):
        if not (self.p >= 1):
            raise ValueError("p must be in [1, ∞]")

    def __repr__(self):
        return f"L^{self.p}(0,{self.L})"

    def to_json(self):
        return {"kind": "lebesgue", "p": "inf" if math.isinf(self.p) else self.p, "L": _L_json(self.L)}


@dataclass(frozen=True, eq=False)
class LambdaOne(SpaceSpec):
    v: Weight
    L: float = INF

    def __post_init__(self):
        # V(t)/t must be equivalent to a nonincreasing function
        grid = probe_grid(self.L)
        try:
            q = self.v.primitive(grid) / grid
        except DivergenceError as exc:
            raise ValueError(f"Λ¹ weight is not locally integrable: {exc}") from None
        running_min = np.minimum.accumulate(q)
        if np.max(q / running_min) > 1e6:
            raise ValueError("V(t)/t is not equivalent to a nonincreasing function")

    def __repr__(self):
        return f"Λ¹[{self.v!r}](0,{self.L})"

    def to_json(self):
        return {"kind": "lambda_one", "v": self.v.to_json(), "L": _L_json(self.L)}


@dataclass(frozen=True, eq=False)
class Marcinkiewicz(SpaceSpec):
    psi: Weight
    L: float = INF

    def __post_init__(self):
        if not check_quasiconcave(self.psi, self.L):
            raise ValueError("ψ must be quasiconcave")

    def __repr__(self):
        return f"M[{self.psi!r}](0,{self.L})"

    def to_json(self):
        return {"kind": "marcinkiewicz", "psi": self.psi.to_json(), "L": _L_json(self.L)}


@dataclass(frozen=True, eq=False)
class Intersection(SpaceSpec):
    first: SpaceSpec
    second: SpaceSpec

    @property
    def L(self):
        return self.first.L

    def __repr__(self):
        return f"({self.first!r} ∩ {self.second!r})"

    def to_json(self):
        return {"kind": "intersection", "spaces": [self.first.to_json(), self.second.to_json()]}


@dataclass(frozen=True, eq=False)
class Sum(SpaceSpec):
    first: SpaceSpec
    second: SpaceSpec

    @property
    def L(self):
        return self.first.L

    def __repr__(self):
        return f"({self.first!r} + {self.second!r})"

    def to_json(self):
        return {"kind": "sum", "spaces": [self.first.to_json(), self.second.to_json()]}


def _L_json(L):
    return "inf" if math.isinf(L) else L


def space_from_json(d: dict, L=None) -> SpaceSpec:
    kind = d.get("kind")
    L = d.get("L", L if L is not None else "inf")
    L = INF if L == "inf" else L
    if kind == "lebesgue":
        p = d["p"]
        return Lebesgue(INF if p == "inf" else float(p), L)
    if kind == "lambda_one":
        return LambdaOne(weight_from_json(d["v"]), L)
    if kind == "marcinkiewicz":
        return Marcinkiewicz(weight_from_json(d["psi"]), L)
    if kind in ("intersection", "sum"):
        a, b = d["spaces"]
        cls = Intersection if kind == "intersection" else Sum
        return cls(space_from_json(a, L), space_from_json(b, L))
    raise ValueError(f"unknown space kind {kind!r}")


# ---------------------------------------------------------------------------
# norms of step functions
# ---------------------------------------------------------------------------

def norm(X: SpaceSpec, f: StepFunction) -> float:
    if f.is_zero():
        return 0.0
    if isinstance(X, Lebesgue):
        return _lebesgue(X.p, f)
    if isinstance(X, LambdaOne):
        return _lambda_one(X.v, f)
    if isinstance(X, Marcinkiewicz):
        return _marcinkiewicz(X.psi, f, X.L)
    if isinstance(X, Intersection):
        return max(norm(X.first, f), norm(X.second, f))
    if isinstance(X, Sum):
        return _sum_norm(X, f)
    raise TypeError(f"unknown space {X!r}")


def _lebesgue(p: float, f: StepFunction) -> float:
    if math.isinf(p):
        return float(f.max())
    e, c = f.float_arrays()
    w = np.diff(e)
    if p == 1:
        return math.fsum(w * c)
    m = float(np.max(c))
    return m * math.fsum(w * (c / m) ** p) ** (1.0 / p)


def _level_arrays(f: StepFunction):
    fs = rearrange(f)
    e, c = fs.float_arrays()
    return e, c


def _lambda_one(v: Weight, f: StepFunction) -> float:
    e, c = _level_arrays(f)
    try:
        V = v.primitive(e[1:])
    except DivergenceError:
        return INF
    V = np.concatenate([[0.0], V])
    return math.fsum(c * np.diff(V))


def _marcinkiewicz(psi: Weight, f: StepFunction, L) -> float:
    e, c = _level_arrays(f)
    heads = np.concatenate([[0.0], np.cumsum(c * np.diff(e))])
    best = 0.0
    # right ends of cells (f** and ψ monotone pieces), including the support end
    ends = np.minimum(e[1:], np.nextafter(float(L), 0.0)) if math.isfinite(L) else e[1:]
    vals = psi(ends) * heads[1:] / ends
    best = float(np.max(vals))
    pf = psi.power_form()
    for k in range(1, len(c)):
        a, b = e[k], e[k + 1]
        B = heads[k] - c[k] * a  # t f**(t) = B + c t on this cell
        if pf is not None:
            q = pf[1]
            cands = []
            if 0 < q < 1 and c[k] > 0 and B > 0:
                cands.append((1 - q) * B / (q * c[k]))
        else:
            cands = list(np.geomspace(a, b, 66)[1:-1])
        for t in cands:
            if a < t < b and t < L:
                best = max(best, float(psi(t)) * (B + c[k] * t) / t)
    return best


def _sum_norm(X: Sum, f: StepFunction) -> float:
    fs = rearrange(f)
    levels = sorted(set([0] + list(fs.values)))
    best = INF
    for lvl in levels:
        val = norm(X.first, fs.excess(lvl)) + norm(X.second, fs.clip_above(lvl))
        best = min(best, val)
    return best


def fundamental_function(X: SpaceSpec, t) -> float:
    if not (0 <= t < X.L) and not (t == X.L and math.isfinite(X.L)):
        raise DomainError("t outside [0, L]")
    if t == 0:
        return 0.0
    return norm(X, StepFunction.indicator(t, L=X.L))


# ---------------------------------------------------------------------------
# associate spaces
# ---------------------------------------------------------------------------

def conjugate_exponent(p: float) -> float:
    if p == 1:
        return INF
    if math.isinf(p):
        return 1.0
    return p / (p - 1)


def associate_space(X: SpaceSpec) -> SpaceSpec:
    if isinstance(X, Lebesgue):
        return Lebesgue(conjugate_exponent(X.p), X.L)
    if isinstance(X, LambdaOne):
        # ψ(t) = t / ∫₀ᵗ ξ
        psi = Product(PowerLog(1, 1), ReciprocalPrimitive(X.v, IDENTITY), monotone="nondecreasing")
        return Marcinkiewicz(psi, X.L)
    if isinstance(X, Intersection):
        return Sum(associate_space(X.first), associate_space(X.second))
    if isinstance(X, Sum):
        return Intersection(associate_space(X.first), associate_space(X.second))
    raise UnsupportedDual(f"no closed-form associate space for {X!r}; use associate_norm_lower")


@dataclass
class Bracket:
    lower: float
    upper: float | None = None
    witness: dict = field(default_factory=dict)
    exact: float | None = None
    upper_kind: str = "unknown"

    def to_json(self):
        def fin(x):
            if x is None:
                return None
            return x if math.isfinite(x) else "inf"
        return {"lower": fin(self.lower), "upper": fin(self.upper), "upper_kind": self.upper_kind,
                "exact": fin(self.exact), "witness": self.witness}


def _ascent(objective, d0: np.ndarray, budget: int) -> tuple[float, np.ndarray, int]:
    """Coordinate ascent on nonnegative increments; returns (best value, increments, evaluations)."""
    d = d0.copy()
    best = objective(d)
    evals = 1
    step = 0.5
    while evals < budget and step > 1e-6:
        improved = False
        for k in range(len(d)):
            for factor in (1 + step, 1 - step):
                trial = d.copy()
                trial[k] = trial[k] * factor if trial[k] > 0 else step * max(float(np.max(d)), 1e-12)
                val = objective(trial)
                evals += 1
                if val > best * (1 + 1e-15):
                    best, d, improved = val, trial, True
                if evals >= budget:
                    return best, d, evals
        if not improved:
            step *= 0.5
    return best, d, evals


def associate_norm_lower(X: SpaceSpec, f: StepFunction, budget: int = 500) -> Bracket:
    """Lower bound for ‖f‖_{X'} = sup{∫ f* g* : ‖g‖_X ≤ 1} over nonincreasing step g."""
    exact = None
    try:
        exact = norm(associate_space(X), f)
    except UnsupportedDual:
        pass
    if f.is_zero():
        return Bracket(0.0, None, {"candidate": "zero"}, exact)
    fs = rearrange(f)
    e, c = fs.float_arrays()
    widths = np.diff(e)
    n = len(c)

    def g_of(d):
        vals = np.cumsum(d[::-1])[::-1]  # nonincreasing levels from nonnegative increments
        return vals

    def objective(d):
        vals = g_of(d)
        if not np.any(vals > 0):
            return 0.0
        g = StepFunction(e.tolist(), vals.tolist(), fs.L)
        nv = norm(X, g)
        if not (nv > 0) or math.isinf(nv):
            return 0.0
        return float(np.dot(c * widths, vals)) / nv

    starts = []
    for k in range(n):
        d = np.zeros(n)
        d[k] = 1.0
        starts.append(("indicator", k, d))
    d_f = np.concatenate([c[:-1] - c[1:], c[-1:]])
    starts.append(("aligned", -1, d_f))
    scored = [(objective(d), name, k, d) for name, k, d in starts]
    scored.sort(key=lambda s: -s[0])
    best_val, name, k, d0 = scored[0]
    remaining = max(budget - len(starts), 1)
    val, d, _ = _ascent(objective, d0, remaining)
    if val >= best_val:
        best_val = val
    return Bracket(best_val, None, {"start": name, "index": int(k)}, exact)


# ---------------------------------------------------------------------------
# norms of sampled profiles
# ---------------------------------------------------------------------------

UNBOUNDED_EXPONENT = 1e-3


def profile_norm(X: SpaceSpec, profile: Profile, resolution: int = DEFAULT_RESOLUTION,
                 disc: Discretization | None = None) -> float:
    d = disc if disc is not None else discretize(profile, resolution)
    return discretized_norm(X, d)


def discretized_norm(X: SpaceSpec, d: Discretization) -> float:
    if d.step.is_zero():
        return 0.0
    head_positive = d.head_exponent != 0.0 or d.step.values[0] > 0
    if head_positive and d.head_exponent >= 1 - 1e-9:
        return INF  # not locally integrable
    if isinstance(X, Intersection):
        return max(discretized_norm(X.first, d), discretized_norm(X.second, d))
    if isinstance(X, Lebesgue):
        p = X.p
        if math.isinf(p):
            if head_positive and d.head_exponent > UNBOUNDED_EXPONENT:
                return INF
            if d.truncated and d.tail_value > 0 and d.tail_exponent < -UNBOUNDED_EXPONENT:
                return INF
            return norm(X, d.step)
        if head_positive and d.head_exponent * p >= 1 - 1e-9:
            return INF
        total = norm(X, d.step) ** p
        if d.truncated and d.tail_value > 0:
            kp = d.tail_exponent * p
            if kp <= 1 + 1e-9:
                return INF
            total += d.tail_value ** p * d.hi / (kp - 1)
        return total ** (1.0 / p)
    return norm(X, d.step)


# ---------------------------------------------------------------------------
# K-functional for (Λ¹_ξ, L^∞)
# ---------------------------------------------------------------------------

def _primitive_inverse(xi: Weight, t: float, L) -> float:
    pf = xi.power_form()
    if pf is not None and pf[1] > -1:
        c, a = pf
        return (t * (a + 1) / c) ** (1.0 / (a + 1))
    lo, hi = 0.0, float(L) if math.isfinite(L) else 1.0
    if not math.isfinite(L):
        while float(xi.primitive(hi)) < t:
            hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if float(xi.primitive(mid)) < t:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4e-16 * hi:
            break
    return 0.5 * (lo + hi)


def primitive_total(xi: Weight, L) -> float:
    if math.isfinite(L):
        return float(xi.primitive(float(L)))
    pf = xi.power_form()
    if pf is not None:
        return INF if pf[1] >= -1 else 0.0
    return float(xi.primitive(1e300))


def k_functional(f: StepFunction, t: float, xi: Weight, mode: str = "formula") -> float:
    """K(f, t; Λ¹_ξ, L^∞): the closed formula ∫₀^{Ξ⁻¹(t)} f*ξ, or the clipping oracle."""
    if not t > 0:
        raise DomainError("t must be positive")
    total = primitive_total(xi, f.L)
    if t >= total:
        raise DomainError(f"t = {t} is not below Ξ(L) = {total}")
    e, c = _level_arrays(f)
    Xi = np.concatenate([[0.0], xi.primitive(e[1:])])
    if f.is_zero():
        return 0.0
    if mode == "formula":
        s = _primitive_inverse(xi, t, f.L)
        Xs = np.minimum(Xi, float(xi.primitive(s)))
        return math.fsum(c * np.diff(Xs))
    if mode != "oracle":
        raise ValueError("mode must be 'formula' or 'oracle'")
    mass = np.diff(Xi)

    def cost(level):
        return math.fsum(np.maximum(c - level, 0.0) * mass) + t * level

    levels = np.concatenate([[0.0], c])
    costs = [cost(x) for x in levels]
    j = int(np.argmin(costs))
    srt = np.sort(levels)
    pos = int(np.searchsorted(srt, levels[j]))
    lo = srt[max(pos - 1, 0)]
    hi = srt[min(pos + 1, len(srt) - 1)]
    refine = [cost(x) for x in np.linspace(lo, hi, 64)]
    return min(min(costs), min(refine))
