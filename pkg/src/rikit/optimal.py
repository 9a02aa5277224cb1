"""Optimal-norm functionals for R and H.

* ``rho_R``       — ‖R_{u,v,ν} f*‖_X, the norm of the optimal domain for R.
* ``rho_H_bracket`` — lower bound for sup_{h~f} ‖H_{u,v,ν} h‖_X from explicit transports,
  with an upper value when v comes from a ξ-factorization.
* ``rho_tilde``   — sup over ‖g‖_{X'} ≤ 1 of ∫ f*·R_{u,v,ν⁻¹}(T_φ g), φ = u/ξ (lower estimate).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .functions import (
    INF,
    Layout,
    StepFunction,
    block_layout,
    identity_layout,
    rearrange,
    reflection_layout,
    transport,
    translation_layout,
)
from .operators import (
    OperatorSpec,
    H_profile,
    R_profile,
    T_pieces,
    T_profile,
    head_weighted,
    inverse_of,
)
from .sampling import DEFAULT_RESOLUTION, Discretization, Profile, discretize, integrate
from .spaces import (
    Bracket,
    Lebesgue,
    SpaceSpec,
    _ascent,
    associate_space,
    discretized_norm,
    norm,
    profile_norm,
)
from .weights import (
    Bijection,
    DivergenceError,
    Quotient,
    ReciprocalPrimitive,
    Weight,
    check_nondegenerate,
    probe_monotonicity,
)

SEARCH_RESOLUTION = 256
T_NORM_SAMPLES = 200
LIMSUP_DECADES = range(1, 10)


class HypothesisError(ValueError):
    pass


class NoOptimalSpace(ValueError):
    """The functional is not a rearrangement-invariant norm for these data."""


# ---------------------------------------------------------------------------
# R side
# ---------------------------------------------------------------------------

def xi_profile(u: Weight, v: Weight, nu: Bijection, L=INF) -> Profile:
    """ξ = v·U∘ν (L < ∞), or v·U∘ν on (0,1) and v on (1,∞) (L = ∞)."""
    if not check_nondegenerate(u, L):
        raise HypothesisError("u is degenerate: its primitive is nowhere positive and finite")
    if math.isfinite(L) and not float(u(float(L) * (1 - 1e-12))) > 0:
        raise HypothesisError("u(L-) must be positive")

    def func(t):
        t = np.asarray(t, dtype=float)
        out = v.values(t) * u.primitive(nu.forward(t))
        if math.isinf(L):
            out = np.where(t < 1, out, v.values(t))
        return out

    return Profile(func, L, (1.0,) if math.isinf(L) else (), None, "xi")


def xi_norm(X: SpaceSpec, u: Weight, v: Weight, nu: Bijection, resolution: int = DEFAULT_RESOLUTION) -> float:
    return profile_norm(X, xi_profile(u, v, nu, X.L), resolution)


def xi_membership(X: SpaceSpec, u: Weight, v: Weight, nu: Bijection, resolution: int = DEFAULT_RESOLUTION) -> bool:
    return math.isfinite(xi_norm(X, u, v, nu, resolution))


def rho_R(X: SpaceSpec, u: Weight, v: Weight, nu: Bijection, f: StepFunction,
          resolution: int = DEFAULT_RESOLUTION, check: bool = True) -> float:
    if check and not xi_membership(X, u, v, nu, resolution):
        raise NoOptimalSpace("ξ is not in X: no r.i. domain space exists for R and X")
    fs = rearrange(f)
    if fs.is_zero():
        return 0.0
    spec = OperatorSpec("R", u, v, nu, X.L)
    return profile_norm(X, R_profile(spec, fs), resolution)


def build_v_from_xi(xi: Weight, nu: Bijection) -> ReciprocalPrimitive:
    """v with 1/v(t) = ∫₀^{ν⁻¹(t)} ξ."""
    if not xi.head_convergent():
        raise DivergenceError("ξ is not integrable near 0")
    return ReciprocalPrimitive(xi, nu, monotone="nonincreasing")


# ---------------------------------------------------------------------------
# H side
# ---------------------------------------------------------------------------

@dataclass
class Assumption:
    holds: bool
    confidence: str
    details: dict = field(default_factory=dict)

    def to_json(self):
        return {"holds": self.holds, "confidence": self.confidence, "details": self.details}


def H_assumption(X: SpaceSpec, u: Weight, v: Weight, nu: Bijection, resolution: int = DEFAULT_RESOLUTION) -> Assumption:
    """Condition under which sup_{h~f}‖H h‖_X is an r.i. norm."""
    L = X.L
    if math.isfinite(L):
        AL = float(v.antiderivative(float(L)))
        prof = Profile(lambda t: u.values(t) * (AL - v.antiderivative(nu.forward(t))), L, (), None, "assumption")
        val = profile_norm(X, prof, resolution)
        return Assumption(math.isfinite(val), "sampled", {"norm": _fin(val)})
    t1 = float(nu.inverse(1.0))
    A1 = float(v.antiderivative(1.0))
    prof = Profile(lambda t: np.where(t < t1, u.values(t) * (A1 - v.antiderivative(np.minimum(nu.forward(t), 1.0))), 0.0),
                   L, (t1,), t1, "assumption")
    first = profile_norm(X, prof, resolution)
    seq = []
    for k in LIMSUP_DECADES:
        tau = 10.0 ** k
        end = float(nu.inverse(tau))
        trunc = Profile(lambda t, end=end: np.where(t < end, u.values(t), 0.0), L, (end,), end, "u-trunc")
        seq.append(float(v(tau)) * profile_norm(X, trunc, resolution))
    tail = seq[-3:]
    bounded = all(math.isfinite(x) for x in seq) and tail[-1] <= tail[0] * (1 + 1e-6)
    holds = math.isfinite(first) and bounded
    return Assumption(holds, "probed", {"head_norm": _fin(first), "limsup_sequence": [_fin(x) for x in seq]})


def _fin(x):
    return x if math.isfinite(x) else "inf"


def H_norm(X: SpaceSpec, spec: OperatorSpec, h: StepFunction, resolution: int = DEFAULT_RESOLUTION):
    """(‖H h‖_X, discretization)."""
    d = discretize(H_profile(spec, h), resolution)
    return discretized_norm(X, d), d


def dual_aligned(X: SpaceSpec, d: Discretization) -> StepFunction | None:
    """Step g with ‖g‖_{X'} = 1 and ∫ g·(sampled profile) = its X-norm (Lebesgue X only)."""
    if not isinstance(X, Lebesgue) or d.step.is_zero():
        return None
    edges = np.concatenate([[0.0], d.nodes])
    widths = np.diff(edges)
    avg = np.maximum(d.cell_integrals / widths, 0.0)
    L = d.step.L
    p = X.p
    if p == 1:
        end = float(edges[-1])
        return StepFunction((0.0, end), (1.0,), L)
    if math.isinf(p):
        k = int(np.argmax(avg))
        return StepFunction((0.0, float(widths[k])), (1.0 / float(widths[k]),), L)
    vals = avg ** (p - 1)
    g = StepFunction(edges.tolist(), vals.tolist(), L)
    nrm = norm(associate_space(X), g)
    return g * (1.0 / nrm) if nrm > 0 else None


def _candidate_layouts(f: StepFunction, L, n_cells: int):
    fs = rearrange(f)
    T = fs.support_bound
    out = [("rearrangement", identity_layout(f))]
    refl = [T] + ([L] if math.isfinite(L) and L > T else [2 * T] if math.isinf(L) else [])
    for a in refl:
        out.append((f"reflection@{float(a):.6g}", reflection_layout(f, a)))
    room = (L - T) if math.isfinite(L) else T
    for frac in (0.25, 0.5, 1.0):
        s = room * frac
        if s > 0:
            out.append((f"translation+{float(s):.6g}", translation_layout(f, s)))
    return out


def _greedy(score, order: list[int], budget: int):
    best = score(order)
    evals = 1
    improved = True
    while improved and evals < budget:
        improved = False
        for i, j in itertools.combinations(range(len(order)), 2):
            trial = list(order)
            trial[i], trial[j] = trial[j], trial[i]
            val = score(trial)
            evals += 1
            if val > best * (1 + 1e-12):
                best, order, improved = val, trial, True
            if evals >= budget:
                break
    return best, order


def rho_H_bracket(X: SpaceSpec, u: Weight, v: Weight, nu: Bijection, f: StepFunction, n_cells: int = 6,
                  budget: int = 2000, xi: Weight | None = None, resolution: int = DEFAULT_RESOLUTION,
                  seed: int = 20240501, check: bool = True, keep_witnesses: int = 1) -> Bracket:
    """Certified lower bound for sup_{h~f}‖H_{u,v,ν} h‖_X, with an upper value when ξ is supplied."""
    if not 1 <= n_cells <= 8:
        raise ValueError("n_cells must be between 1 and 8")
    L = X.L
    if check:
        assumption = H_assumption(X, u, v, nu, resolution)
        if not assumption.holds:
            raise NoOptimalSpace("the integrability assumption fails: no r.i. domain space exists for H and X")
    spec = OperatorSpec("H", u, v, nu, L)
    fs = rearrange(f)
    if fs.is_zero():
        return Bracket(0.0, 0.0, {"candidate": "zero"}, upper_kind="exact")
    coarse = lambda h: H_norm(X, spec, h, SEARCH_RESOLUTION)[0]

    scored = []  # (coarse score, name, layout)
    for name, layout in _candidate_layouts(f, L, n_cells):
        scored.append((coarse(transport(f, layout)), name, layout))
    # exhaustive equal-measure block permutations, then greedy swaps from the best
    cache: dict = {}

    def block_score(order):
        key = tuple(order)
        if key not in cache:
            cache[key] = coarse(transport(f, block_layout(f, order)))
        return cache[key]

    evals = 0
    for order in itertools.permutations(range(n_cells)):
        if evals >= budget:
            break
        block_score(list(order))
        evals += 1
    best_order = list(max(cache, key=cache.get))
    g_val, g_order = _greedy(block_score, best_order, max(budget - evals, 1))
    for order, val in sorted(cache.items(), key=lambda kv: -kv[1])[:3]:
        scored.append((val, f"blocks{list(order)}", block_layout(f, order)))
    scored.append((g_val, f"greedy{g_order}", block_layout(f, g_order)))

    # re-evaluate the top candidates (always including f*) at full resolution
    scored.sort(key=lambda s: -s[0])
    finalists = [scored[i] for i in range(len(scored)) if scored[i][1] == "rearrangement"]
    finalists += [s for s in scored[:3] if s[1] != "rearrangement"]
    results = []
    for _, name, layout in finalists:
        h = transport(f, layout)
        val, disc = H_norm(X, spec, h, resolution)
        results.append((val, name, layout, h, disc))
    results.sort(key=lambda r: -r[0])
    lower, name, layout, h_best, _ = results[0]
    base = next(r for r in results if r[1] == "rearrangement")
    witness = {"candidate": name, "layout": layout.to_json(), "H_f_star": base[0],
               "improvement_factor": lower / base[0] if base[0] > 0 else 1.0}
    bracket = Bracket(lower, None, witness)
    bracket.witnesses = [(r[1], r[3]) for r in results[:max(keep_witnesses, 1)]]
    if xi is not None:
        phi = Quotient(u, xi)
        kind = probe_monotonicity(phi, L)
        witness["phi_monotonicity"] = kind
        if kind == "nonincreasing":
            bracket.upper, bracket.upper_kind = base[0], "exact"
        else:
            est = T_norm_estimate(phi, associate_space(X), L, seed=seed)
            bracket.upper, bracket.upper_kind = est * base[0], "estimated"
            witness["T_norm_estimate"] = est
    return bracket


# ---------------------------------------------------------------------------
# T_φ and the simplified functional
# ---------------------------------------------------------------------------

def random_nonincreasing(rng: np.random.Generator, L, scale: float = 1.0, max_levels: int = 8) -> StepFunction:
    n = int(rng.integers(1, max_levels + 1))
    hi = min(float(L), 10.0 * scale) if math.isfinite(L) else 10.0 * scale
    lo = hi * 1e-3
    edges = np.sort(np.exp(rng.uniform(math.log(lo), math.log(hi), n)))
    edges = np.unique(edges)
    vals = np.sort(np.exp(rng.uniform(math.log(1e-3), math.log(1e3), len(edges))))[::-1]
    return StepFunction([0.0] + edges.tolist(), vals.tolist(), L)


def T_norm_estimate(phi: Weight, Xd: SpaceSpec, L, samples: int = T_NORM_SAMPLES, seed: int = 20240501,
                    resolution: int = 512) -> float:
    """sup over random nonincreasing step g of ‖T_φ g‖/‖g‖ in ``Xd`` (a lower estimate of the norm)."""
    kind = probe_monotonicity(phi, L)
    if kind == "nonincreasing":
        return 1.0
    phi = Quotient(phi, _ONE, monotone=kind)
    rng = np.random.default_rng(seed)
    best = 1.0
    for _ in range(samples):
        g = random_nonincreasing(rng, L)
        ng = norm(Xd, g)
        if ng > 0:
            best = max(best, profile_norm(Xd, T_profile(phi, g), resolution) / ng)
    return best


class _One(Weight):
    monotone = "nonincreasing"

    def values(self, t):
        return np.ones_like(np.asarray(t, dtype=float))

    def power_form(self):
        return 1.0, 0.0

    def to_json(self):
        return {"kind": "powerlog", "c": 1, "a": 0, "b": []}


_ONE = _One()


@dataclass
class TildeEstimate:
    value: float
    candidate: str
    phi_monotonicity: str
    certified: bool
    evaluations: int

    def to_json(self):
        return {"value": self.value, "candidate": self.candidate, "phi_monotonicity": self.phi_monotonicity,
                "certified_lower_bound": self.certified, "evaluations": self.evaluations}


def tilde_pairing(u: Weight, xi: Weight, nu: Bijection, fs: StepFunction, g: StepFunction, phi_kind: str) -> float:
    """∫ f*·R_{u,v,ν⁻¹}(T_φ g) with v = build_v_from_xi(ξ, ν) and φ = u/ξ monotone."""
    if fs.is_zero() or g.is_zero():
        return 0.0
    v = build_v_from_xi(xi, nu)
    phi = Quotient(u, xi, monotone=phi_kind)
    e, coeffs, mode = T_pieces(phi, g)
    inner = StepFunction(e.tolist(), np.maximum(coeffs, 0.0).tolist(), g.L)
    weight = u if mode == "constant" else xi
    fe, fc = fs.float_arrays()

    def integrand(t):
        return fs(t) * v.values(t) * head_weighted(inner, weight, nu.backward(t))

    breaks = list(fe[1:]) + [float(x) for x in nu.forward(e[1:])]
    return integrate(integrand, breaks, float(fe[-1]))


def rho_tilde(X: SpaceSpec, u: Weight, xi: Weight, nu: Bijection, f: StepFunction, budget: int = 200,
              seed: int = 20240501, witnesses: tuple = (), resolution: int = DEFAULT_RESOLUTION) -> TildeEstimate:
    """Lower estimate of sup_{‖g‖_{X'} ≤ 1} ∫ f*·R_{u,v,ν⁻¹}(T_φ g)."""
    L = X.L
    fs = rearrange(f)
    phi_kind = probe_monotonicity(Quotient(u, xi), L)
    if phi_kind == "none":
        raise HypothesisError("φ = u/ξ must be monotone on the probe grid")
    if fs.is_zero():
        return TildeEstimate(0.0, "zero", phi_kind, True, 0)
    Xd = associate_space(X)
    v = build_v_from_xi(xi, nu)
    spec = OperatorSpec("H", u, v, nu, L)

    def value(g: StepFunction) -> float:
        ng = norm(Xd, g)
        if not ng > 0 or math.isinf(ng):
            return 0.0
        return tilde_pairing(u, xi, nu, fs, g, phi_kind) / ng

    best, best_name, evals = 0.0, "none", 0
    for name, h in [("aligned:f*", fs)] + [(f"aligned:{n}", h) for n, h in witnesses]:
        _, d = H_norm(X, spec, h, resolution)
        g = dual_aligned(X, d)
        if g is not None:
            val = value(g)
            evals += 1
            if val > best:
                best, best_name = val, name
    rng = np.random.default_rng(seed)
    T = float(fs.support_bound)
    pool = []
    for k in range(12):
        a = T * 10.0 ** (k / 4 - 1.5)
        if a < L:
            g = StepFunction((0.0, a), (1.0,), L)
            pool.append((value(g), f"indicator({a:.4g})", g))
    for i in range(16):
        g = random_nonincreasing(rng, L, T)
        pool.append((value(g), f"random#{i}", g))
    evals += len(pool)
    pool.sort(key=lambda s: -s[0])
    top_val, top_name, top_g = pool[0]
    e, c = top_g.float_arrays()
    d0 = np.concatenate([c[:-1] - c[1:], c[-1:]])

    def obj(d):
        vals = np.cumsum(d[::-1])[::-1]
        if not np.any(vals > 0):
            return 0.0
        return value(StepFunction(e.tolist(), vals.tolist(), L))

    asc_val, _, n_asc = _ascent(obj, d0, max(budget - evals, 1))
    evals += n_asc
    for val, name in ((top_val, top_name), (asc_val, f"ascent from {top_name}")):
        if val > best:
            best, best_name = val, name
    return TildeEstimate(best, best_name, phi_kind, True, evals)
