"""Weighted Hardy-type operators R, H, the supremum operator T_φ, and dilation.

    R_{u,v,ν} g(t) = v(t) ∫₀^{ν(t)} |g| u
    H_{u,v,ν} g(t) = u(t) ∫_{ν(t)}^L |g| v
    T_φ f(t)       = (1/φ(t)) sup_{s ∈ [t, L)} φ(s) f*(s)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .functions import INF, StepFunction, rearrange
from .sampling import DEFAULT_RESOLUTION, Profile, discretize
from .weights import (
    Bijection,
    DivergenceError,
    DomainError,
    Weight,
    check_delta,
    check_monotone,
    weight_from_json,
    bijection_from_json,
)

T_SAMPLES_PER_CELL = 256


@dataclass
class OperatorSpec:
    kind: str
    u: Weight | None = None
    v: Weight | None = None
    nu: Bijection | None = None
    L: float = INF
    phi: Weight | None = None

    def __post_init__(self):
        if self.kind not in ("R", "H", "T"):
            raise ValueError(f"unknown operator kind {self.kind!r}")
        if self.kind == "T" and self.phi is None:
            raise ValueError("T needs phi")
        if self.kind in ("R", "H") and (self.u is None or self.v is None or self.nu is None):
            raise ValueError("R and H need u, v and nu")

    def hypotheses(self) -> dict:
        """Probe results for the standing hypotheses of the operator."""
        if self.kind == "T":
            return {"phi_monotone_declared": self.phi.monotone, "phi_monotone_holds": check_monotone(self.phi, self.L)}
        out = {
            "u_nonincreasing": self.u.monotone == "nonincreasing" and check_monotone(self.u, self.L),
            "v_nonincreasing": self.v.monotone == "nonincreasing" and check_monotone(self.v, self.L),
        }
        inv = _Inverse(self.nu)
        out["nu_inverse_delta_sup_zero"] = check_delta(inv, "zero", "sup", 2.0, self.L).verdict
        out["nu_delta_inf_zero"] = check_delta(self.nu, "zero", "inf", 2.0, self.L).verdict
        if math.isinf(self.L):
            out["nu_inverse_delta_sup_infinity"] = check_delta(inv, "infinity", "sup", 2.0).verdict
            out["nu_delta_inf_infinity"] = check_delta(self.nu, "infinity", "inf", 2.0).verdict
        return out

    def with_nu(self, nu: Bijection) -> "OperatorSpec":
        return OperatorSpec(self.kind, self.u, self.v, nu, self.L, self.phi)

    def to_json(self) -> dict:
        out = {"kind": self.kind, "L": "inf" if math.isinf(self.L) else self.L}
        if self.kind == "T":
            out["phi"] = self.phi.to_json()
        else:
            out.update(u=self.u.to_json(), v=self.v.to_json(), nu=self.nu.to_json())
        return out


def operator_from_json(d: dict) -> OperatorSpec:
    L = d.get("L", "inf")
    L = INF if L == "inf" else L
    if d.get("kind") == "T":
        return OperatorSpec("T", phi=weight_from_json(d["phi"]), L=L)
    return OperatorSpec(d.get("kind"), weight_from_json(d["u"]), weight_from_json(d["v"]),
                        bijection_from_json(d["nu"]), L)


class _Inverse(Bijection):
    def __init__(self, nu: Bijection):
        self.nu = nu

    def forward(self, t):
        return self.nu.backward(t)

    def backward(self, y):
        return self.nu.forward(y)

    def power_exponent(self):
        p = self.nu.power_exponent()
        return None if p is None else 1.0 / p

    def to_json(self):
        return {"kind": "inverse", "of": self.nu.to_json()}


def inverse_of(nu: Bijection) -> Bijection:
    if isinstance(nu, _Inverse):
        return nu.nu
    from .weights import Power
    if isinstance(nu, Power):
        return Power(1 / nu.alpha)
    return _Inverse(nu)


# ---------------------------------------------------------------------------
# weighted integrals of step functions
# ---------------------------------------------------------------------------

def head_weighted(g: StepFunction, w: Weight, x) -> np.ndarray:
    """∫₀ˣ g·w for each x (vectorized)."""
    shape = np.shape(x)
    x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    e, c = g.float_arrays()
    n = len(c)
    if not np.any(c > 0):
        return np.zeros_like(x)
    first = int(np.argmax(c > 0))
    if first == 0 and not w.head_convergent():
        raise DivergenceError(f"∫ g·w diverges at 0 for w = {w!r}")
    A_edges = np.empty(n + 1)
    A_edges[1:] = w.antiderivative(e[1:])
    A_edges[0] = 0.0 if first == 0 else np.nan
    contrib = np.where(c > 0, c * (A_edges[1:] - A_edges[:-1]), 0.0)
    contrib = np.nan_to_num(contrib)
    cum = np.concatenate([[0.0], np.cumsum(contrib)])
    xc = np.minimum(x, e[-1])
    k = np.clip(np.searchsorted(e, xc, side="right") - 1, 0, n - 1)
    out = cum[k].copy()
    active = (c[k] > 0) & (xc > e[k])
    if np.any(active):
        xa = xc[active]
        ka = k[active]
        Ax = w.antiderivative(xa)
        out[active] += c[ka] * (Ax - A_edges[ka])
    out[x >= e[-1]] = cum[-1]
    out[x <= 0] = 0.0
    return out.reshape(shape)


def tail_weighted(g: StepFunction, w: Weight, y) -> np.ndarray:
    """∫_y^∞ g·w for each y > 0 (vectorized); g has compact support."""
    shape = np.shape(y)
    y = np.atleast_1d(np.asarray(y, dtype=float)).ravel()
    e, c = g.float_arrays()
    n = len(c)
    A = np.empty(n + 1)
    A[0] = np.nan
    A[1:] = w.antiderivative(e[1:])
    pos = c > 0
    contrib = np.zeros(n)
    contrib[1:] = np.where(pos[1:], c[1:] * (A[2:] - A[1:-1]), 0.0)
    suffix = np.concatenate([np.cumsum(contrib[::-1])[::-1], [0.0]])  # suffix[k] = Σ_{j ≥ k}
    out = np.zeros_like(y)
    inside = (y < e[-1]) & (y > 0)
    if np.any(inside):
        yi = y[inside]
        k = np.clip(np.searchsorted(e, yi, side="right") - 1, 0, n - 1)
        Ay = w.antiderivative(yi)
        part = np.where(c[k] > 0, c[k] * (A[k + 1] - Ay), 0.0)
        out[inside] = part + suffix[k + 1]
    return out.reshape(shape)


# ---------------------------------------------------------------------------
# the operators
# ---------------------------------------------------------------------------

def _check_t(t, L):
    arr = np.asarray(t, dtype=float)
    if np.any(~(arr > 0)) or np.any(arr >= L):
        raise DomainError(f"t must lie in (0, {L})")
    return arr


def apply_R(spec: OperatorSpec, g: StepFunction, t):
    arr = _check_t(t, spec.L)
    out = spec.v(arr) * head_weighted(g, spec.u, spec.nu(arr))
    return float(np.ravel(out)[0]) if np.ndim(t) == 0 else out


def apply_H(spec: OperatorSpec, g: StepFunction, t):
    arr = _check_t(t, spec.L)
    out = spec.u(arr) * tail_weighted(g, spec.v, spec.nu(arr))
    return float(np.ravel(out)[0]) if np.ndim(t) == 0 else out


def R_profile(spec: OperatorSpec, g: StepFunction) -> Profile:
    kinks = tuple(float(x) for x in spec.nu.inverse(np.array([float(e) for e in g.edges[1:]])))

    def func(t):
        return spec.v.values(t) * head_weighted(g, spec.u, spec.nu.forward(t))

    return Profile(func, spec.L, kinks, None, "R")


def H_profile(spec: OperatorSpec, g: StepFunction) -> Profile:
    if g.is_zero():
        return Profile(lambda t: np.zeros_like(t), spec.L, (), 0.0, "H")
    edges = np.array([float(e) for e in g.edges[1:]])
    kinks = tuple(float(x) for x in spec.nu.inverse(edges))

    def func(t):
        return spec.u.values(t) * tail_weighted(g, spec.v, spec.nu.forward(t))

    return Profile(func, spec.L, kinks, kinks[-1], "H")


def _phi_kind(phi: Weight) -> str:
    return phi.monotone if phi.monotone in ("nonincreasing", "nondecreasing") else "none"


def apply_T(phi: Weight, f: StepFunction, t, L=None):
    """Supremum operator, evaluated as a suffix maximum over the cells of f*."""
    L = f.L if L is None else L
    arr = np.atleast_1d(_check_t(t, L)).ravel()
    fs = rearrange(f)
    e, c = fs.float_arrays()
    n = len(c)
    kind = _phi_kind(phi)
    out = np.zeros_like(arr)
    inside = arr < e[-1]
    if not np.any(inside) or fs.is_zero():
        return float(out[0]) if np.ndim(t) == 0 else out.reshape(np.shape(t))
    ti = arr[inside]
    k = np.clip(np.searchsorted(e, ti, side="right") - 1, 0, n - 1)
    if kind == "nonincreasing":
        out[inside] = c[k]
    else:
        if kind == "nondecreasing":
            right = np.minimum(e[1:], np.nextafter(float(L), 0.0))
            cell_sup = phi(right) * c
            part_current = cell_sup[k]
        else:
            cell_sup = np.array([_sampled_sup(phi, e[j], e[j + 1], L) * c[j] for j in range(n)])
            part_current = np.array([_sampled_sup(phi, tt, e[kk + 1], L) * c[kk] for tt, kk in zip(ti, k)])
        suffix = np.concatenate([np.maximum.accumulate(cell_sup[::-1])[::-1], [0.0]])
        out[inside] = np.maximum(part_current, suffix[k + 1]) / phi(ti)
    return float(out[0]) if np.ndim(t) == 0 else out.reshape(np.shape(t))


def _sampled_sup(phi: Weight, a: float, b: float, L) -> float:
    lo = max(a, 1e-300)
    hi = min(b, np.nextafter(float(L), 0.0))
    pts = np.geomspace(lo, hi, T_SAMPLES_PER_CELL) if hi > lo else np.array([lo])
    return float(np.max(phi(pts)))


def T_pieces(phi: Weight, g: StepFunction):
    """Describe T_φ g for monotone φ on the cells of g*.

    Returns ``(edges, coeffs, mode)``; on cell k, T_φ g = coeffs[k] when mode is
    'constant' (φ nonincreasing) and coeffs[k]/φ(s) when mode is 'scaled' (φ nondecreasing).
    """
    gs = rearrange(g)
    e, c = gs.float_arrays()
    kind = _phi_kind(phi)
    if kind == "nonincreasing" or gs.is_zero():
        return e, c, "constant"
    if kind != "nondecreasing":
        raise ValueError("T_φ pieces need a monotone φ")
    right = np.minimum(e[1:], np.nextafter(float(g.L), 0.0))
    cell_sup = phi(right) * c
    M = np.maximum.accumulate(cell_sup[::-1])[::-1]
    return e, M, "scaled"


def T_profile(phi: Weight, g: StepFunction) -> Profile:
    gs = rearrange(g)
    e, _ = gs.float_arrays()
    return Profile(lambda t: apply_T(phi, g, t, g.L) if np.all(t < g.L) else _T_clip(phi, g, t),
                   g.L, tuple(e[1:]), float(e[-1]), "T")


def _T_clip(phi, g, t):
    out = np.zeros_like(t)
    ok = t < g.L
    out[ok] = apply_T(phi, g, t[ok], g.L)
    return out


def dilate(f: StepFunction, a) -> StepFunction:
    """D_a f(t) = f(t/a), truncated to (0, L) when L < ∞."""
    if not a > 0:
        raise ValueError("a must be positive")
    if a == 1:
        return f
    cells = [(x * a, y * a, c) for x, y, c in f.cells()]
    if math.isfinite(f.L):
        cells = [(x, min(y, f.L), c) for x, y, c in cells if x < f.L]
    return StepFunction.from_cells(cells, f.L)


@dataclass
class Sampled:
    step: StepFunction
    resolution: int


def compose_RR(spec1: OperatorSpec, spec2: OperatorSpec, f: StepFunction, grid: int = DEFAULT_RESOLUTION) -> Sampled:
    """Sampled R₁((R₂ f*)*) as a step function of cell averages on a geometric grid."""
    fs = rearrange(f)
    if fs.is_zero():
        return Sampled(StepFunction.zero(spec1.L), grid)
    inner = discretize(R_profile(spec2, fs), grid).step
    outer = discretize(R_profile(spec1, rearrange(inner)), grid).step
    return Sampled(outer, grid)


def compose_HH(spec1: OperatorSpec, spec2: OperatorSpec, f: StepFunction, grid: int = DEFAULT_RESOLUTION) -> Sampled:
    """Sampled H₁(H₂ f)."""
    inner = discretize(H_profile(spec2, f), grid).step
    outer = discretize(H_profile(spec1, inner), grid).step
    return Sampled(outer, grid)
