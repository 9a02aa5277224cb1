"""Verification cases: instantiate each statement at desk scale, compute both sides, check the bands.

Every runner is deterministic in ``(params, seed, grid)`` and returns a :class:`Report`.
A case whose hypotheses fail gets verdict ``not-applicable``, never ``pass``.
"""

from __future__ import annotations

import bisect
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .functions import (
    INF,
    StepFunction,
    block_layout,
    inner,
    rearrange,
    step_to_json,
    transport,
)
from .operators import (
    OperatorSpec,
    H_profile,
    R_profile,
    compose_HH,
    compose_RR,
    head_weighted,
    inverse_of,
    tail_weighted,
)
from .optimal import (
    H_assumption,
    H_norm,
    NoOptimalSpace,
    build_v_from_xi,
    rho_H_bracket,
    rho_tilde,
)
from .sampling import DEFAULT_RESOLUTION, Profile, integrate
from .spaces import (
    Intersection,
    LambdaOne,
    Lebesgue,
    Marcinkiewicz,
    _ascent,
    associate_norm_lower,
    associate_space,
    fundamental_function,
    k_functional,
    norm,
    profile_norm,
)
from .weights import (
    IDENTITY,
    Bijection,
    Power,
    Product,
    Weight,
    check_averaging,
    check_delta,
    check_monotone,
    power,
    probe_grid,
)

SCHEMA_VERSION = "1.0"
DEFAULT_SEED = 20240501
PAPER = "paper-derived"
EMPIRICAL = "empirical"
SEVERITY = {"pass": 0, "fail": 1, "not-applicable": 2}


class ParamError(ValueError):
    pass


@dataclass
class Report:
    case_id: str
    verdict: str
    n_samples: int
    skipped: int
    worst_ratio: float | None
    band: tuple
    constants: dict
    hypotheses: dict
    details: dict = field(default_factory=dict)
    seed: int = DEFAULT_SEED
    grid: int = DEFAULT_RESOLUTION
    artifacts: list = field(default_factory=list)

    @property
    def severity(self) -> int:
        return SEVERITY[self.verdict]

    def to_json(self) -> dict:
        return _clean({
            "schema_version": SCHEMA_VERSION,
            "case_id": self.case_id,
            "verdict": self.verdict,
            "n_samples": self.n_samples,
            "skipped": self.skipped,
            "worst_ratio": self.worst_ratio,
            "band": list(self.band),
            "constants": self.constants,
            "hypotheses": self.hypotheses,
            "details": self.details,
            "seed": self.seed,
            "grid": self.grid,
            "artifacts": self.artifacts,
        })

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"


def _clean(x):
    """JSON-safe copy: non-finite floats become strings, tuples become lists, numpy scalars floats."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, Fraction):
        return float(x)
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return x


def const(value, provenance: str, formula: str | None = None) -> dict:
    out = {"value": value, "provenance": provenance}
    if formula:
        out["formula"] = formula
    return out


def _verdict(hypotheses: dict, ok: bool) -> str:
    if not all(_truthy(v) for v in hypotheses.values()):
        return "not-applicable"
    return "pass" if ok else "fail"


def _truthy(v) -> bool:
    if isinstance(v, dict):
        return bool(v.get("verdict", v.get("holds", True)))
    return bool(v)


def _merge(defaults: dict, params: dict | None) -> dict:
    params = dict(params or {})
    unknown = set(params) - set(defaults)
    if unknown:
        raise ParamError(f"unknown parameter(s): {sorted(unknown)}; allowed: {sorted(defaults)}")
    out = dict(defaults)
    out.update(params)
    return out


# ---------------------------------------------------------------------------
# random generation
# ---------------------------------------------------------------------------

def log_uniform(rng: np.random.Generator, lo: float, hi: float, size=None):
    return np.exp(rng.uniform(math.log(lo), math.log(hi), size))


def random_step(rng: np.random.Generator, L=INF, max_levels: int = 8, lo: float = 1e-3, hi: float = 10.0,
                monotone: bool = False) -> StepFunction:
    """Up to ``max_levels`` cells, breakpoints and values log-uniform (values in [1e-3, 1e3])."""
    n = int(rng.integers(1, max_levels + 1))
    top = min(hi, float(L)) if math.isfinite(L) else hi
    pts = np.unique(log_uniform(rng, lo * top / hi if math.isfinite(L) else lo, top, n))
    if math.isfinite(L):
        pts = pts[pts < L]
        if pts.size == 0:
            pts = np.array([0.5 * float(L)])
    vals = log_uniform(rng, 1e-3, 1e3, pts.size)
    if monotone:
        vals = np.sort(vals)[::-1]
    return StepFunction([0.0] + pts.tolist(), vals.tolist(), L)


def random_simple(rng: np.random.Generator, L, max_terms: int = 6) -> tuple[StepFunction, np.ndarray, np.ndarray]:
    """Σ cᵢ χ_(0,aᵢ) with 0 < a₁ < … < a_N < L."""
    n = int(rng.integers(1, max_terms + 1))
    top = float(L) if math.isfinite(L) else 10.0
    a = np.unique(log_uniform(rng, 1e-3 * top, top, n))
    a = a[a < top]
    c = log_uniform(rng, 1e-3, 1e3, a.size)
    vals = np.cumsum(c[::-1])[::-1]
    return StepFunction([0.0] + a.tolist(), vals.tolist(), L), a, c


def _exact(f: StepFunction) -> StepFunction:
    """The same step function with exact rational data (floats convert exactly)."""
    return StepFunction([Fraction(x) for x in f.edges], [Fraction(x) for x in f.values],
                        f.L if math.isinf(f.L) else Fraction(f.L))


# ---------------------------------------------------------------------------
# duality identity
# ---------------------------------------------------------------------------

def _pow_int(q: float, x: float, y: float) -> float:
    """∫_x^y t^q dt."""
    if y <= x:
        return 0.0
    if q == -1:
        return math.log(y / x)
    return (y ** (q + 1) - x ** (q + 1)) / (q + 1)


def pairing_R(f: StepFunction, g: StepFunction, u: Weight, v: Weight, alpha: float) -> float:
    """∫ f·R_{u,v,ν}g for pure powers u = c_u t^a, v = c_v t^b, ν = t^α, by closed-form pieces."""
    cu, a = u.power_form()
    cv, b = v.power_form()
    ge, gc = g.float_arrays()
    S = np.asarray(head_weighted(g, u, ge), dtype=float)
    cuts = ge ** (1.0 / alpha)  # ν⁻¹ of g's edges
    terms = []
    fe, fc = f.float_arrays()
    for x0, x1, fv in zip(fe[:-1], fe[1:], fc):
        if fv == 0:
            continue
        pts = np.unique(np.concatenate([[x0, x1], cuts[(cuts > x0) & (cuts < x1)]]))
        for t0, t1 in zip(pts[:-1], pts[1:]):
            mid = 0.5 * (t0 + t1) if t0 == 0 else math.sqrt(t0 * t1)
            k = int(np.searchsorted(ge, mid ** alpha, side="right")) - 1
            if k >= len(gc):
                terms.append(fv * cv * S[-1] * _pow_int(b, t0, t1))
                continue
            gk, ek = gc[k], ge[k]
            base = S[k] - gk * cu * ek ** (a + 1) / (a + 1)
            terms.append(fv * cv * base * _pow_int(b, t0, t1))
            terms.append(fv * cv * gk * cu / (a + 1) * _pow_int(b + alpha * (a + 1), t0, t1))
    return math.fsum(terms)


def pairing_H(f: StepFunction, g: StepFunction, u: Weight, v: Weight, alpha: float) -> float:
    """∫ g·H_{u,v,ν⁻¹}f for pure powers, ν = t^α (so ν⁻¹(t) = t^{1/α})."""
    cu, a = u.power_form()
    cv, b = v.power_form()
    fe, fc = f.float_arrays()
    T = np.asarray(tail_weighted(f, v, fe), dtype=float)
    cuts = fe ** alpha  # points where ν⁻¹(t) crosses an edge of f
    terms = []
    ge, gc = g.float_arrays()
    for y0, y1, gv in zip(ge[:-1], ge[1:], gc):
        if gv == 0:
            continue
        pts = np.unique(np.concatenate([[y0, y1], cuts[(cuts > y0) & (cuts < y1)]]))
        for t0, t1 in zip(pts[:-1], pts[1:]):
            mid = 0.5 * (t0 + t1) if t0 == 0 else math.sqrt(t0 * t1)
            j = int(np.searchsorted(fe, mid ** (1.0 / alpha), side="right")) - 1
            if j >= len(fc):
                continue
            fj, ej1 = fc[j], fe[j + 1]
            base = T[j + 1] + fj * cv * ej1 ** (b + 1) / (b + 1)
            terms.append(gv * cu * base * _pow_int(a, t0, t1))
            terms.append(-gv * cu * fj * cv / (b + 1) * _pow_int(a + (b + 1) / alpha, t0, t1))
    return math.fsum(terms)


DUALITY_TRIPLES = (
    # (c_u, a, c_v, b, alpha, L)
    (1.0, 0.0, 1.0, 0.0, 1.0, INF),
    (1.0, -0.5, 1.0, -0.5, 2.0, INF),
    (2.0, 0.5, 1.0, -0.7, 0.5, INF),
    (1.0, -0.3, 0.5, 1.5, 1.5, INF),
    (1.0, -0.25, 3.0, -0.5, 1.0, 1.0),
)


def run_duality_identity(params=None, seed=DEFAULT_SEED, grid=DEFAULT_RESOLUTION) -> Report:
    p = _merge({"samples": 200, "tol_rel": 1e-10}, params)
    rng = np.random.default_rng(seed)
    worst, worst_dev, skipped, n = 1.0, 0.0, 0, 0
    witness = None
    for cu, a, cv, b, alpha, L in DUALITY_TRIPLES:
        u, v, nu = power(a, cu), power(b, cv), Power(alpha)
        for _ in range(p["samples"]):
            f = random_step(rng, L)
            g = random_step(rng, L)
            lhs = pairing_R(f, g, u, v, alpha)
            rhs = pairing_H(f, g, u, v, alpha)
            n += 1
            if lhs == 0 and rhs == 0:
                skipped += 1
                continue
            dev = abs(lhs - rhs) / max(abs(lhs), abs(rhs))
            if dev > worst_dev:
                worst_dev, worst = dev, lhs / rhs
                witness = {"f": step_to_json(f), "g": step_to_json(g), "triple": [cu, a, cv, b, alpha, L]}
    ok = worst_dev <= p["tol_rel"]
    tol = p["tol_rel"]
    details = {"worst_relative_discrepancy": worst_dev, "triples": [list(t) for t in DUALITY_TRIPLES]}
    if not ok:
        details["witness"] = witness
    hyp = {"pure_power_weights": True}
    return Report("duality-identity", _verdict(hyp, ok), n, skipped, worst, (1 - tol, 1 + tol),
                  {"tol_rel": const(tol, EMPIRICAL)}, hyp, details, seed, grid)


# ---------------------------------------------------------------------------
# norm duality: ‖R‖_{X→Y} = ‖H‖_{Y'→X'} on the Hardy averaging example
# ---------------------------------------------------------------------------

def _power_candidate(eps: float, cells_per_decade: int = 32) -> StepFunction:
    """Cell averages of t^{-1/2+ε} on (δ, 1), δ = 10^{-2.5/(2ε)}."""
    decades = 2.5 / (2 * eps)
    n = int(math.ceil(decades * cells_per_decade))
    e = np.geomspace(10.0 ** -decades, 1.0, n + 1)
    q = -0.5 + eps
    avg = (e[1:] ** (q + 1) - e[:-1] ** (q + 1)) / (q + 1) / np.diff(e)
    vals = np.concatenate([[0.0], avg])
    return StepFunction([0.0] + e.tolist(), vals.tolist(), INF)


def run_norm_duality(params=None, seed=DEFAULT_SEED, grid=DEFAULT_RESOLUTION) -> Report:
    p = _merge({"eps": [0.1, 0.05, 0.03, 0.02], "cells_per_decade": 32, "agreement": 0.05,
                "classical": 2.0, "ceiling": 2.001}, params)
    X = Y = Lebesgue(2)
    u, v = power(0), power(-1)
    R = OperatorSpec("R", u, v, IDENTITY, INF)
    H = OperatorSpec("H", u, v, inverse_of(IDENTITY), INF)
    Yd, Xd = associate_space(Y), associate_space(X)
    rows = []
    for eps in p["eps"]:
        f = _power_candidate(eps, p["cells_per_decade"])
        r = profile_norm(Y, R_profile(R, f), grid) / norm(X, f)
        h = profile_norm(Xd, H_profile(H, f), grid) / norm(Yd, f)
        rows.append({"eps": eps, "R_ratio": r, "H_ratio": h,
                     "R_exact": math.sqrt(1 + 2 * eps) / (0.5 + eps)})
    r_est = max(r["R_ratio"] for r in rows)
    h_est = max(r["H_ratio"] for r in rows)
    agree = abs(r_est - h_est) / max(r_est, h_est)
    c = p["classical"]
    ok = (agree <= p["agreement"] and abs(r_est - c) / c <= p["agreement"] and abs(h_est - c) / c <= p["agreement"]
          and max(r_est, h_est) <= p["ceiling"])
    hyp = {"associate_spaces_available": True}
    return Report("norm-duality", _verdict(hyp, ok), len(rows), 0, r_est / h_est,
                  (1 - p["agreement"], 1 + p["agreement"]),
                  {"classical_constant": const(c, PAPER, "p/(p-1) with p=2"),
                   "agreement": const(p["agreement"], EMPIRICAL)},
                  hyp, {"R_norm_estimate": r_est, "H_norm_estimate": h_est, "relative_gap": agree,
                        "candidates": rows}, seed, grid)


# ---------------------------------------------------------------------------
# simple functions under H
# ---------------------------------------------------------------------------

def lower_M_inverse(nu: Bijection, theta: float, L) -> tuple[float, str]:
    """M = inf ν⁻¹(t/θ)/ν⁻¹(t)."""
    alpha = nu.power_exponent()
    if alpha is not None:
        return theta ** (-1.0 / alpha), "exact"
    t = probe_grid(L)
    return float(np.min(nu.inverse(t / theta) / nu.inverse(t))), "probed"


def _simple_rhs_profile(u: Weight, v: Weight, nu: Bijection, a: np.ndarray, c: np.ndarray, L) -> Profile:
    cut = np.asarray(nu.inverse(a), dtype=float)
    coeff = a * c * v.values(a)
    S = StepFunction([0.0] + cut.tolist(), np.cumsum(coeff[::-1])[::-1].tolist(), L)
    return Profile(lambda t: u.values(t) * S(t), L, tuple(cut), float(cut[-1]), "simple-rhs")


HONSIMPLE_SPACES = {"L1": 1.0, "L2": 2.0, "Linf": INF}


def run_honsimple(params=None, seed=DEFAULT_SEED, grid=DEFAULT_RESOLUTION) -> Report:
    p = _merge({"samples": 100, "theta": 2.0, "u_exponents": [0.0, -0.25], "betas": [0.3, 0.5, 0.7],
                "alphas": [0.5, 1.0, 2.0], "spaces": ["L1", "L2", "Linf"], "slack": 1e-9,
                "max_terms": 6}, params)
    L = 1.0
    theta = p["theta"]
    rng = np.random.default_rng(seed)
    combos = list(itertools.product(p["u_exponents"], p["betas"], p["alphas"], p["spaces"]))
    hyp, consts = {}, {}
    lo_all, hi_all = INF, 0.0
    worst_lo, worst_hi = INF, 0.0
    skipped = 0
    violations = []
    for i in range(p["samples"]):
        ua, beta, alpha, sname = combos[i % len(combos)]
        u, v, nu = power(ua), power(-beta), Power(alpha)
        X = Lebesgue(HONSIMPLE_SPACES[sname], L)
        key = f"u=t^{ua},v=t^-{beta},nu=t^{alpha}"
        if key not in hyp:
            avg = check_averaging(v, L)
            hyp[key] = {"u_nonincreasing": check_monotone(u, L), "v_nonincreasing": check_monotone(v, L),
                        "v_averaging": avg.verdict,
                        "nu_inverse_delta_sup_zero": check_delta(inverse_of(nu), "zero", "sup", theta, L).verdict}
            hyp[key]["verdict"] = all(hyp[key].values())
            M, how = lower_M_inverse(nu, theta, L)
            consts[key] = {"C": const(avg.constant_estimate, PAPER, "averaging constant of v"),
                           "M": const(M, PAPER, f"inf nu^-1(t/theta)/nu^-1(t) ({how})"),
                           "lower": const(M * (theta - 1) / theta, PAPER, "M(theta-1)/theta")}
        lower, upper = consts[key]["lower"]["value"], consts[key]["C"]["value"]
        f, a, c = random_simple(rng, L, p["max_terms"])
        spec = OperatorSpec("H", u, v, nu, L)
        lhs = profile_norm(X, H_profile(spec, f), grid)
        rhs = profile_norm(X, _simple_rhs_profile(u, v, nu, a, c, L), grid)
        if (lhs == 0 and rhs == 0) or (math.isinf(lhs) and math.isinf(rhs)):
            skipped += 1
            continue
        ratio = lhs / rhs
        lo_all, hi_all = min(lo_all, ratio / lower), max(hi_all, ratio / upper)
        worst_lo, worst_hi = min(worst_lo, ratio), max(worst_hi, ratio)
        if not (lower * (1 - p["slack"]) <= ratio <= upper * (1 + p["slack"])):
            violations.append({"combo": key, "space": sname, "ratio": ratio, "f": step_to_json(f)})
    ok = not violations
    worst = max(hi_all, 1 / lo_all) if math.isfinite(lo_all) else None
    details = {"normalization": "worst_ratio = max(ratio/C, lower/ratio)", "min_ratio": worst_lo, "max_ratio": worst_hi, "max_ratio_over_C": hi_all,
               "min_ratio_over_lower": lo_all, "violations": violations[:5], "theta": theta}
    return Report("honsimple", _verdict(hyp, ok), p["samples"], skipped, worst,
                  (0.0, 1 + p["slack"]),
                  {"theta": const(theta, PAPER), "per_combination": consts, "slack": const(p["slack"], EMPIRICAL)},
                  hyp, details, seed, grid)


# ---------------------------------------------------------------------------
# sandwich: ‖Hf*‖ ≤ sup_{h~f}‖Hh‖ ≤ ϱ̃(f)
# ---------------------------------------------------------------------------

SANDWICH_SPACES = (1.0, 2.0, 3.0, INF)


def _sandwich_combos(kind: str, L: float, grid: int):
    if kind == "nonincreasing":
        pairs, alphas = [(0.0, 0.0), (0.25, 0.0), (0.25, 0.25), (0.0, -0.5), (0.25, -0.5)], [2.0, 1.0]
    else:
        pairs, alphas = [(0.0, 0.5), (0.25, 0.5), (0.0, 0.25)], [2.0]
    out = []
    for (a, b), alpha, q in itertools.product(pairs, alphas, SANDWICH_SPACES):
        u, xi, nu = power(-a), power(-b), Power(alpha)
        X = Lebesgue(q, L)
        v = build_v_from_xi(xi, nu)
        if H_assumption(X, u, v, nu, 512).holds:
            out.append((a, b, alpha, q, u, xi, nu, v, X))
    return out


def run_sandwich(params=None, seed=DEFAULT_SEED, grid=DEFAULT_RESOLUTION) -> Report:
    p = _merge({"instances": 50, "nondecreasing_instances": 20, "equality_tol": 1e-6, "order_tol": 1e-8,
                "n_cells": 4, "budget": 40, "max_levels": 6}, params)
    L = 1.0
    rng = np.random.default_rng(seed)
    worst_eq, worst_order = 0.0, 0.0
    rows, fails = [], []
    for kind, count in (("nonincreasing", p["instances"]), ("nondecreasing", p["nondecreasing_instances"])):
        combos = _sandwich_combos(kind, L, grid)
        for i in range(count):
            a, b, alpha, q, u, xi, nu, v, X = combos[i % len(combos)]
            f = random_step(rng, L, p["max_levels"])
            spec = OperatorSpec("H", u, v, nu, L)
            Hf, _ = H_norm(X, spec, rearrange(f), grid)
            if kind == "nonincreasing":
                est = rho_tilde(X, u, xi, nu, f, budget=p["budget"], seed=seed + i, resolution=grid)
                dev = abs(est.value - Hf) / Hf
                worst_eq = max(worst_eq, dev)
                ok = dev <= p["equality_tol"]
                rows.append({"kind": kind, "u": -a, "xi": -b, "alpha": alpha, "p": q, "H_f_star": Hf,
                             "rho_tilde": est.value, "relative_gap": dev})
            else:
                br = rho_H_bracket(X, u, v, nu, f, n_cells=p["n_cells"], budget=200, resolution=grid,
                                   check=False, keep_witnesses=3)
                est = rho_tilde(X, u, xi, nu, f, budget=p["budget"], seed=seed + i,
                                witnesses=tuple(br.witnesses), resolution=grid)
                r = br.lower / (est.value * (1 + p["order_tol"]))
                worst_order = max(worst_order, br.lower / est.value)
                ok = Hf <= br.lower * (1 + 1e-12) and r <= 1
                rows.append({"kind": kind, "u": -a, "xi": -b, "alpha": alpha, "p": q, "H_f_star": Hf,
                             "bracket_lower": br.lower, "rho_tilde": est.value})
            if not ok:
                fails.append({**rows[-1], "f": step_to_json(f)})
    hyp = {"integrability_assumption": True, "phi_monotone": True}
    worst = max(1 + worst_eq, worst_order)
    return Report("sandwich", _verdict(hyp, not fails), len(rows), 0, worst, (0.0, 1 + p["order_tol"]),
                  {"equality_tol": const(p["equality_tol"], EMPIRICAL), "order_tol": const(p["order_tol"], EMPIRICAL)},
                  hyp, {"worst_equality_gap": worst_eq, "worst_lower_over_tilde": worst_order,
                        "failures": fails[:5], "samples": rows}, seed, grid)


# ---------------------------------------------------------------------------
# collapse case ξ = u: ϱ(f) = ‖H f*‖
# ---------------------------------------------------------------------------

def run_when_R_nonincreasing(params=None, seed=DEFAULT_SEED, grid=DEFAULT_RESOLUTION) -> Report:
    p = _merge({"samples": 24, "n_cells": 4, "tol_rel": 1e-6}, params)
    L = 1.0
    rng = np.random.default_rng(seed)
    combos = []
    for ua, alpha, q in itertools.product([0.0, -0.25], [1.0, 2.0], [1.0, 2.0, INF]):
        u, nu = power(ua), Power(alpha)
        v = build_v_from_xi(u, nu)
        X = Lebesgue(q, L)
        combos.append((ua, alpha, q, u, nu, v, X, H_assumption(X, u, v, nu, 512).holds))
    valid = [c for c in combos if c[-1]]
    skipped_combos = [{"u": c[0], "alpha": c[1], "p": c[2]} for c in combos if not c[-1]]
    worst, fails = 0.0, []
    for i in range(p["samples"]):
        ua, alpha, q, u, nu, v, X, _ = valid[i % len(valid)]
        f = random_step(rng, L, 6)
        g = random_step(rng, L, 6)
        H = OperatorSpec("H", u, v, nu, L)
        Rd = OperatorSpec("R", u, v, inverse_of(nu), L)
        # R_{u,v,ν⁻¹}(h*) is nonincreasing
        t = np.geomspace(1e-6, 1 - 1e-9, 400)
        vals = R_profile(Rd, rearrange(f))(t)
        mono = float(np.max(np.diff(vals) / np.maximum(vals[1:], 1e-300)))
        # subadditivity of ϱ(f) = ‖H f*‖
        rf = H_norm(X, H, rearrange(f), grid)[0]
        rg = H_norm(X, H, rearrange(g), grid)[0]
        rfg = H_norm(X, H, rearrange(f + g), grid)[0]
        sub = rfg / (rf + rg)
        # no transport of f beats f*
        br = rho_H_bracket(X, u, v, nu, f, n_cells=p["n_cells"], budget=100, xi=u, resolution=grid, check=False)
        imp = br.witness["improvement_factor"]
        ratio = max(sub, imp, 1 + max(mono, 0.0))
        worst = max(worst, ratio)
        if ratio > 1 + p["tol_rel"]:
            fails.append({"u": ua, "alpha": alpha, "p": q, "subadditivity": sub, "improvement": imp,
                          "monotonicity_excess": mono, "f": step_to_json(f), "g": step_to_json(g)})
    hyp = {"u_nonincreasing": True, "assumption_holds_on_used_combinations": True}
    return Report("when-R-nonincreasing", _verdict(hyp, not fails), p["samples"], 0, worst,
                  (0.0, 1 + p["tol_rel"]), {"tol_rel": const(p["tol_rel"], EMPIRICAL)}, hyp,
                  {"failures": fails[:5], "combinations_without_optimal_space": skipped_combos}, seed, grid)


# ---------------------------------------------------------------------------
# restricted vs unrestricted inequalities for H
# ---------------------------------------------------------------------------

def restricted_factor(nu: Bijection, theta: float, L) -> tuple[float, str]:
    """θ/(θ−1)·sup ν⁻¹(t)/ν⁻¹(t/θ)."""
    alpha = nu.power_exponent()
    if alpha is not None:
        s, how = theta ** (1.0 / alpha), "exact"
    else:
        t = probe_grid(L)
        s, how = float(np.max(nu.inverse(t) / nu.inverse(t / theta))), "probed"
    return theta / (theta - 1) * s, how


def run_restricted_unrestricted(params=None, seed=DEFAULT_SEED, grid=DEFAULT_RESOLUTION) -> Report:
    p = _merge({"samples": 8, "n_cells": 5, "theta": 2.0, "alphas": [1.0, 2.0], "v_exponent": -0.5}, params)
    L = 1.0
    theta = p["theta"]
    X = Y = Lebesgue(INF, L)
    rng = np.random.default_rng(seed)
    u, v = power(0), power(p["v_exponent"])
    hyp, consts, families, worst, fails = {}, {}, [], 1.0, []
    for alpha in p["alphas"]:
        nu = Power(alpha)
        key = f"nu=t^{alpha}"
        hyp[key] = {"u_nonincreasing": check_monotone(u, L), "v_nonincreasing": check_monotone(v, L),
                    "nu_inverse_delta_sup_zero": check_delta(inverse_of(nu), "zero", "sup", theta, L).verdict}
        hyp[key]["verdict"] = all(hyp[key].values())
        factor, how = restricted_factor(nu, theta, L)
        spec = OperatorSpec("H", u, v, nu, L)
        C_restr, C_unres = 0.0, 0.0
        fs = [StepFunction.indicator(0, 1, L)] + [random_step(rng, L, 6) for _ in range(p["samples"])]
        for f in fs:
            nf = norm(X, f)
            restr = H_norm(Y, spec, rearrange(f), grid)[0] / nf
            br = rho_H_bracket(Y, u, v, nu, f, n_cells=p["n_cells"], budget=400, resolution=grid, check=False)
            C_restr = max(C_restr, restr)
            C_unres = max(C_unres, br.lower / nf)
        ratio = C_unres / C_restr
        worst = max(worst, ratio)
        consts[key] = {"C": const(C_restr, EMPIRICAL, "max over the family of ||H f*||/||f||"),
                       "factor": const(factor, PAPER, f"theta/(theta-1)*sup nu^-1(t)/nu^-1(t/theta) ({how})")}
        families.append({"alpha": alpha, "restricted": C_restr, "unrestricted": C_unres, "ratio": ratio,
                         "factor": factor, "samples": len(fs)})
        if ratio > factor * (1 + 1e-12):
            fails.append(families[-1])
    return Report("restricted-unrestricted", _verdict(hyp, not fails), sum(f["samples"] for f in families), 0,
                  worst, (1.0, min(c["factor"]["value"] for c in consts.values())),
                  {"theta": const(theta, PAPER), "per_family": consts}, hyp,
                  {"families": families, "failures": fails}, seed, grid)


# ---------------------------------------------------------------------------
# iteration of R
# ---------------------------------------------------------------------------

def remark_conditions(a1, a2, b1, b2, g1, g2) -> dict:
    return {
        "gamma2_lt_1": g2 < 1,
        "beta1_plus_gamma2_gt_1": b1 + g2 > 1,
        "first_sum_ge_1": a1 * (b1 + a2 * b2 + g2 - 1) + g1 >= 1,
        "second_sum_ge_1": a1 * (b1 + a2 * b2 - a2) + g1 >= 1,
        "third_sum_lt_1": a1 * (b1 + g2 - 1) + g1 < 1,
    }


def composed_v_exponent(a1, b1, g1, g2):
    """Exponent of ν₁(t)·u₁(ν₁(t))·v₁(t)·v₂(ν₁(t)) for ν₁ = t^{a1}, u₁ = t^{b1-1}, v_j = t^{g_j-1}."""
    terms = {"nu1": a1, "u1_of_nu1": a1 * (b1 - 1), "v1": g1 - 1, "v2_of_nu1": a1 * (g2 - 1)}
    return sum(terms.values(), Fraction(0))


def delta_formula(a1, b1, g1, g2):
    return a1 * (b1 + g2 - 1) + g1 - 1


def random_admissible_tuples(rng: np.random.Generator, count: int) -> list[tuple]:
    grid = [Fraction(k, 4) for k in range(1, 13)]
    out = []
    while len(out) < count:
        t = tuple(grid[int(i)] for i in rng.integers(0, len(grid), 6))
        if all(remark_conditions(*t).values()):
            out.append(t)
    return out


def _iteration_R_ratios(tup, X, a_values, grid):
    a1, a2, b1, b2, g1, g2 = (float(x) for x in tup)
    L = float(X.L)
    u1, u2 = power(b1 - 1), power(b2 - 1)
    v1, v2 = power(g1 - 1), power(g2 - 1)
    R1 = OperatorSpec("R", u1, v1, Power(a1), L)
    R2 = OperatorSpec("R", u2, v2, Power(a2), L)
    delta = float(delta_formula(*(Fraction(x) for x in (tup[0], tup[2], tup[4], tup[5]))))
    Rv = OperatorSpec("R", u2, power(delta), Power(a1 * a2), L)
    out = []
    for a in a_values:
        f = StepFunction.indicator(0, a, L)
        lhs = norm(X, compose_RR(R1, R2, f, grid).step)
        rhs = profile_norm(X, R_profile(Rv, f), grid)
        out.append(lhs / rhs)
    return out


def run_iteration_R(params=None, seed=DEFAULT_SEED, grid=DEFAULT_RESOLUTION) -> Report:
    p = _merge({"tuples": 20, "numeric_tuple": ["1", "1", "1", "1", "1/2", "3/10"], "a_count": 10,
                "band_max": 100.0, "stability": 0.10}, params)
    rng = np.random.default_rng(seed)
    tuples = random_admissible_tuples(rng, p["tuples"])
    symbolic = []
    for t in tuples:
        a1, a2, b1, b2, g1, g2 = t
        symbolic.append(composed_v_exponent(a1, b1, g1, g2) == delta_formula(a1, b1, g1, g2))
    sym_ok = all(symbolic)
    tup = tuple(Fraction(x) for x in p["numeric_tuple"])
    conds = remark_conditions(*tup)
    a1, a2, b1, b2, g1, g2 = (float(x) for x in tup)
    L = 1.0
    X = Lebesgue(2, L)
    hyp = {"remark_conditions": all(conds.values()),
           "nu2_delta_sup_zero": check_delta(Power(a2), "zero", "sup", 2.0, L).verdict,
           "u1_v2_averaging": check_averaging(Product(power(b1 - 1), power(g2 - 1)), L).verdict}
    a_values = np.geomspace(1e-4, 1.0, p["a_count"]) * (1 - 1e-9)
    r1 = _iteration_R_ratios(tup, X, a_values, grid)
    r2 = _iteration_R_ratios(tup, X, a_values, 2 * grid)
    c1 = max(max(r1), 1 / min(r1))
    c2 = max(max(r2), 1 / min(r2))
    stable = abs(c2 - c1) / c1 <= p["stability"]
    ok = sym_ok and c1 <= p["band_max"] and stable
    delta = delta_formula(tup[0], tup[2], tup[4], tup[5])
    return Report("iteration-R", _verdict(hyp, ok), len(tuples) + len(a_values), 0, c1, (0.0, p["band_max"]),
                  {"delta": const(float(delta), PAPER, "alpha1(beta1+gamma2-1)+gamma1-1"),
                   "band_c": const(c1, EMPIRICAL), "band_max": const(p["band_max"], EMPIRICAL)},
                  hyp, {"symbolic_checks": len(symbolic), "symbolic_all_exact": sym_ok,
                        "tuples": [[str(x) for x in t] for t in tuples], "remark_conditions": conds,
                        "ratios": r1, "ratios_doubled_grid": r2, "c": c1, "c_doubled_grid": c2,
                        "stable": stable, "a_values": a_values.tolist()}, seed, grid)


# ---------------------------------------------------------------------------
# iteration of H
# ---------------------------------------------------------------------------

def run_iteration_H(params=None, seed=DEFAULT_SEED, grid=DEFAULT_RESOLUTION) -> Report:
    p = _merge({"theta": 2.0, "a_count": 10, "slack": 1e-6}, params)
    L = 1.0
    theta = p["theta"]
    X = Lebesgue(INF, L)
    u1 = u2 = power(0)
    v1, v2 = power(-0.5), power(0)
    nu1 = nu2 = IDENTITY
    # v(t) = ν₂⁻¹(t)·v₁(ν₂⁻¹(t))·u₂(ν₂⁻¹(t))·v₂(t) = t^{1/2}; ν = ν₂∘ν₁ = id
    v = power(0.5)
    H1 = OperatorSpec("H", u1, v1, nu1, L)
    H2 = OperatorSpec("H", u2, v2, nu2, L)
    Hv = OperatorSpec("H", u1, v, IDENTITY, L)
    avg = check_averaging(Product(v1, u2), L)
    hyp = {"nu1_delta_inf_zero": check_delta(nu1, "zero", "inf", theta, L).verdict,
           "v1u2_nonincreasing": check_monotone(Product(v1, u2), L), "v1u2_averaging": avg.verdict}
    alpha = nu1.power_exponent()
    M = theta ** alpha  # inf ν₁(θt)/ν₁(t) for a power
    K = min(1 / theta, float(nu1.inverse(1 / M)))
    lower = (M - 1) * K / M
    C = avg.constant_estimate
    rows, fails = [], []
    for a in np.geomspace(1e-3, 1.0, p["a_count"]):
        f = StepFunction.indicator(0, float(a), L)
        lhs = norm(X, compose_HH(H1, H2, f, grid).step)
        rhs = profile_norm(X, H_profile(Hv, f), grid)
        ratio = lhs / rhs
        rows.append({"a": float(a), "lhs": lhs, "rhs": rhs, "ratio": ratio,
                     "lhs_closed_form": 4 / 3 * float(a) ** 1.5, "rhs_closed_form": 2 / 3 * float(a) ** 1.5})
        if not (lower * (1 - p["slack"]) <= ratio <= C * (1 + p["slack"])):
            fails.append(rows[-1])
    worst = max(r["ratio"] for r in rows)
    return Report("iteration-H", _verdict(hyp, not fails), len(rows), 0, worst, (lower, C),
                  {"theta": const(theta, PAPER), "M": const(M, PAPER, "inf nu1(theta t)/nu1(t)"),
                   "K": const(K, PAPER, "min(1/theta, nu1^-1(1/M))"),
                   "lower": const(lower, PAPER, "(M-1)K/M"), "C": const(C, PAPER, "averaging constant of v1*u2")},
                  hyp, {"samples": rows, "failures": fails}, seed, grid)


# ---------------------------------------------------------------------------
# characterization (iii) in the collapse case
# ---------------------------------------------------------------------------

def dual_functional_lower(X, u: Weight, v: Weight, nu: Bijection, f: StepFunction, grid: int,
                          budget: int = 120) -> tuple[float, str]:
    """sup over nonincreasing step g of ∫ g·R_{u,v,ν⁻¹}(f*) / ‖H_{u,v,ν} g‖_X (a lower estimate)."""
    L = X.L
    fs = rearrange(f)
    Rd = OperatorSpec("R", u, v, inverse_of(nu), L)
    H = OperatorSpec("H", u, v, nu, L)
    Rf = R_profile(Rd, fs)
    top = float(L) if math.isfinite(L) else 10 * float(fs.support_bound)
    edges = np.concatenate([[0.0], np.geomspace(top * 1e-4, top, 12)])

    def value(vals) -> float:
        if not np.any(vals > 0):
            return 0.0
        g = StepFunction(edges.tolist(), vals.tolist(), L)
        den = H_norm(X, H, g, 256)[0]
        if not den > 0 or math.isinf(den):
            return 0.0
        num = integrate(lambda t: g(t) * Rf(t), edges[1:].tolist(), top)
        return num / den

    best, name = 0.0, "none"
    for k in range(1, len(edges)):
        vals = np.where(np.arange(len(edges) - 1) < k, 1.0, 0.0)
        val = value(vals)
        if val > best:
            best, name, start = val, f"indicator({edges[k]:.4g})", vals
    d0 = np.concatenate([start[:-1] - start[1:], start[-1:]])
    asc, _, _ = _ascent(lambda d: value(np.cumsum(d[::-1])[::-1]), d0, budget)
    if asc > best:
        best, name = asc, f"ascent from {name}"
    return best, name


def run_char_optimal_iii(params=None, seed=DEFAULT_SEED, grid=DEFAULT_RESOLUTION) -> Report:
    p = _merge({"band": [0.25, 4.0], "samples": 4}, params)
    L = 1.0
    X = Lebesgue(2, L)
    u, nu = power(0), IDENTITY
    v = build_v_from_xi(u, nu)  # collapse case ξ = u: v = 1/t
    assumption = H_assumption(X, u, v, nu, 512)
    hyp = {"collapse_case": True, "integrability_assumption": assumption.holds}
    rng = np.random.default_rng(seed)
    fs = [StepFunction.indicator(0, 1, L)] + [random_step(rng, L, 4) for _ in range(p["samples"] - 1)]
    lo, hi = p["band"]
    rows, fails = [], []
    for f in fs:
        left_exact = norm(associate_space(X), f)
        left = associate_norm_lower(X, f, 200).lower
        right, cand = dual_functional_lower(X, u, v, nu, f, grid)
        ratio = left_exact / right
        rows.append({"assoc_norm": left_exact, "assoc_norm_lower": left, "dual_functional": right,
                     "candidate": cand, "ratio": ratio, "f": step_to_json(f)})
        if not lo <= ratio <= hi:
            fails.append(rows[-1])
    worst = max(rows, key=lambda r: max(r["ratio"], 1 / r["ratio"]))["ratio"]
    return Report("char-optimal-iii", _verdict(hyp, not fails), len(rows), 0, worst, (lo, hi),
                  {"band": const([lo, hi], EMPIRICAL)}, hyp, {"samples": rows}, seed, grid)


# ---------------------------------------------------------------------------
# property suites
# ---------------------------------------------------------------------------

def _suite_spaces(L=INF):
    return {
        "L1": Lebesgue(1, L), "L2": Lebesgue(2, L), "L3": Lebesgue(3, L), "Linf": Lebesgue(INF, L),
        "Lambda1(t^-1/2)": LambdaOne(power(-0.5), L),
        "M(t^1/2)": Marcinkiewicz(power(0.5), L),
        "L2capLinf": Intersection(Lebesgue(2, L), Lebesgue(INF, L)),
    }


class _Primitive:
    """Exact t ↦ ∫₀ᵗ f for a step function with rational data."""

    def __init__(self, f: StepFunction):
        self.edges = list(f.edges)
        self.values = list(f.values)
        acc = [0 * self.values[0]]
        for x0, x1, c in zip(self.edges[:-1], self.edges[1:], self.values):
            acc.append(acc[-1] + c * (x1 - x0))
        self.acc = acc

    def __call__(self, t):
        k = bisect.bisect_right(self.edges, t) - 1
        if k >= len(self.values):
            return self.acc[-1]
        return self.acc[k] + self.values[k] * (t - self.edges[k])


def _star(fs: StepFunction, t):
    """Value of the (already rearranged) ``fs`` at t, right-continuous."""
    k = bisect.bisect_right(fs.edges, t) - 1
    return fs.values[k] if k < len(fs.values) else 0 * fs.values[0]


def _min_head_ratio(f: StepFunction, g: StepFunction, star: bool) -> Fraction:
    """min over t of ∫₀ᵗ g/∫₀ᵗ f (of f*, g* when ``star``); both are piecewise linear, so breakpoints suffice."""
    if star:
        f, g = rearrange(f), rearrange(g)
    F, G = _Primitive(f), _Primitive(g)
    pts = sorted(set(f.edges[1:]) | set(g.edges[1:]))
    best = None
    for t in [min(pts) / 2] + pts:
        hf = F(t)
        if hf > 0:
            r = G(t) / hf
            best = r if best is None else min(best, r)
    return best


def _dominated(f: StepFunction, g: StepFunction) -> bool:
    """∫₀ᵗ f* ≤ ∫₀ᵗ g* for every t (exact)."""
    fs, gs = rearrange(f), rearrange(g)
    F, G = _Primitive(fs), _Primitive(gs)
    return all(F(t) <= G(t) for t in set(fs.edges) | set(gs.edges))


def _local_constant(X, a: float) -> float:
    """A constant C_E with ∫_E f ≤ C_E‖f‖_X for |E| = a: ‖χ_E‖_{X'}, or a/ψ(a) for M_ψ."""
    if isinstance(X, Marcinkiewicz):
        return a / float(X.psi(a))
    return fundamental_function(associate_space(X), a)


def _rel_excess(a: float, b: float) -> float:
    """How far a exceeds b, relative."""
    if a <= b:
        return 0.0
    return (a - b) / max(abs(a), abs(b))


class _Tally:
    def __init__(self, tol):
        self.tol, self.n, self.worst, self.witness, self.counts = tol, 0, 0.0, None, {}

    def add(self, name: str, excess: float, witness=None):
        self.n += 1
        self.counts.setdefault(name, [0, 0])
        self.counts[name][0] += 1
        if excess > self.tol:
            self.counts[name][1] += 1
        if excess > self.worst:
            self.worst = excess
            self.witness = {"check": name, **(witness or {})}

    @property
    def violations(self) -> int:
        return sum(v[1] for v in self.counts.values())


def run_hlp(params=None, seed=DEFAULT_SEED, grid=DEFAULT_RESOLUTION) -> Report:
    p = _merge({"samples": 1000, "tol_rel": 1e-10}, params)
    rng = np.random.default_rng(seed)
    tally = _Tally(p["tol_rel"])
    dominated = True
    for name, X in _suite_spaces().items():
        for i in range(p["samples"]):
            g = random_step(rng)
            if i == 0:
                f = g  # equality case
            else:
                f0 = random_step(rng)
                fs, gs = rearrange(_exact(f0)), rearrange(_exact(g))
                s = _min_head_ratio(fs, gs, star=False)
                shrink = Fraction(1) if i % 4 == 1 else Fraction(int(rng.integers(1, 1001)), 1000)
                F, G = _Primitive(fs), _Primitive(gs)
                k = s * shrink
                dominated &= all(k * F(t) <= G(t) for t in set(fs.edges) | set(gs.edges))
                f = StepFunction(f0.edges, [float(Fraction(c) * k) for c in f0.values], f0.L)
            nf, ng = norm(X, f), norm(X, g)
            tally.add(name, _rel_excess(nf, ng), {"space": name, "f": step_to_json(f), "g": step_to_json(g)})
    hyp = {"head_integral_dominance": dominated}
    ok = tally.violations == 0
    return Report("hlp", _verdict(hyp, ok), tally.n, 0, 1 + tally.worst, (0.0, 1 + p["tol_rel"]),
                  {"tol_rel": const(p["tol_rel"], EMPIRICAL)}, hyp,
                  {"per_space": tally.counts, "worst_excess": tally.worst,
                   **({"witness": tally.witness} if not ok else {})}, seed, grid)


def run_axioms(params=None, seed=DEFAULT_SEED, grid=DEFAULT_RESOLUTION) -> Report:
    p = _merge({"samples": 1000, "tol_rel": 1e-10}, params)
    n = p["samples"]
    rng = np.random.default_rng(seed)
    tally = _Tally(p["tol_rel"])
    spaces = list(_suite_spaces().items())
    for i in range(n):
        name, X = spaces[i % len(spaces)]
        f, g = random_step(rng), random_step(rng)
        nf, ng = norm(X, f), norm(X, g)
        w = {"space": name, "f": step_to_json(f), "g": step_to_json(g)}
        # P1: triangle inequality and homogeneity
        tally.add("P1_triangle", _rel_excess(norm(X, f + g), nf + ng), w)
        lam = float(log_uniform(rng, 1e-3, 1e3))
        tally.add("P1_homogeneity", abs(norm(X, f * lam) - lam * nf) / (lam * nf), w)
        # P2: lattice property
        m = random_step(rng)
        m = StepFunction(m.edges, [min(1.0, x / 1e3) for x in m.values], m.L)
        tally.add("P2_lattice", _rel_excess(norm(X, f * m), nf), w)
        # P3: Fatou property along f·χ_(0,T_k) ↑ f
        T = float(f.support_bound)
        seq = [norm(X, f.truncate(T * s)) for s in (0.25, 0.5, 0.75, 1.0)]
        tally.add("P3_fatou", max(_rel_excess(a, b) for a, b in zip(seq, seq[1:])) + abs(seq[-1] - nf) / nf, w)
        # P4: indicators of finite-measure sets have finite norm
        a = float(log_uniform(rng, 1e-3, 1e3))
        tally.add("P4_indicator_finite", 0.0 if math.isfinite(norm(X, StepFunction.indicator(0, a))) else 1.0, w)
        # P5: ∫_E f ≤ ‖f‖_X ‖χ_E‖_{X'}
        E = StepFunction.indicator(0, a)
        tally.add("P5_local_integrability", _rel_excess(float(inner(f, E)), nf * _local_constant(X, a)), w)
        # P6: rearrangement invariance
        k = len(rearrange(f).levels())
        order = list(rng.permutation(max(k, 2)))
        h = transport(f, block_layout(f, order))
        tally.add("P6_rearrangement_invariance", abs(norm(X, h) - nf) / nf + abs(norm(X, rearrange(f)) - nf) / nf, w)
        # exact rational inequalities
        fe, ge = _exact(f), _exact(g)
        tally.add("hardy_littlewood", 0.0 if inner(fe, ge) <= inner(rearrange(fe), rearrange(ge)) else 1.0, w)
        f1 = _exact(random_step(rng))
        s = _min_head_ratio(f1, ge, star=False) * Fraction(int(rng.integers(1, 1001)), 1000)
        f1 = f1 * s
        hdec = _exact(random_step(rng, monotone=True))
        tally.add("hardy_lemma", 0.0 if inner(f1, hdec) <= inner(ge, hdec) else 1.0, w)
        fs, gs, hs = rearrange(fe), rearrange(ge), rearrange(fe + ge)
        pts = sorted(set(fs.edges) | set(gs.edges) | set(hs.edges) | {Fraction(float(log_uniform(rng, 1e-4, 1e2)))})
        pts = [t for t in pts if t > 0]
        F, G, S = _Primitive(fs), _Primitive(gs), _Primitive(hs)
        sub_ok = all(S(t) <= F(t) + G(t) for t in pts)  # (f+g)** ≤ f** + g** after multiplying by t
        tally.add("double_star_subadditivity", 0.0 if sub_ok else 1.0, w)
        half_ok = all(_star(hs, t) <= _star(fs, t / 2) + _star(gs, t / 2) for t in pts)
        tally.add("half_subadditivity", 0.0 if half_ok else 1.0, w)
        # fundamental function identity φ_X·φ_{X'} = t for L^p
        q = float(rng.uniform(1.0, 8.0)) if i % 3 else (1.0 if i % 2 else INF)
        t = float(log_uniform(rng, 1e-6, 1e6))
        Xp = Lebesgue(q)
        prod = fundamental_function(Xp, t) * fundamental_function(associate_space(Xp), t)
        tally.add("fundamental_identity", abs(prod - t) / t, {"p": q, "t": t})
        # embeddings on (0,1): ‖f‖₁ ≤ ‖f‖_p ≤ ‖f‖_∞
        f1L = random_step(rng, 1.0)
        Lp = Lebesgue(q, 1.0)
        n1, npq, ninf = norm(Lebesgue(1, 1.0), f1L), norm(Lp, f1L), norm(Lebesgue(INF, 1.0), f1L)
        tally.add("embeddings", max(_rel_excess(n1, npq), _rel_excess(npq, ninf)), {"p": q, "f": step_to_json(f1L)})
    hyp = {"none_required": True}
    ok = tally.violations == 0
    return Report("axioms", _verdict(hyp, ok), tally.n, 0, 1 + tally.worst, (0.0, 1 + p["tol_rel"]),
                  {"tol_rel": const(p["tol_rel"], EMPIRICAL)}, hyp,
                  {"per_check": tally.counts, "worst_excess": tally.worst,
                   **({"witness": tally.witness} if not ok else {})}, seed, grid)


def run_k_formula(params=None, seed=DEFAULT_SEED, grid=DEFAULT_RESOLUTION) -> Report:
    p = _merge({"samples": 50, "band": [0.25, 4.0]}, params)
    rng = np.random.default_rng(seed)
    xis = [power(0), power(-0.5), power(1.0)]
    lo, hi = p["band"]
    worst, fails, rows = 1.0, [], []
    for i in range(p["samples"]):
        xi = xis[i % len(xis)]
        f = random_step(rng)
        t = float(log_uniform(rng, 1e-3, 1e3))
        a = k_functional(f, t, xi, "formula")
        b = k_functional(f, t, xi, "oracle")
        r = a / b
        rows.append(r)
        if abs(math.log(r)) > abs(math.log(worst)):
            worst = r
        if not lo <= r <= hi:
            fails.append({"t": t, "xi": xi.to_json(), "f": step_to_json(f), "ratio": r})
    hyp = {"none_required": True}
    return Report("k-formula", _verdict(hyp, not fails), len(rows), 0, worst, (lo, hi),
                  {"band": const([lo, hi], EMPIRICAL)}, hyp,
                  {"min_ratio": min(rows), "max_ratio": max(rows), "failures": fails[:5]}, seed, grid)


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

CASES: dict[str, Callable[..., Report]] = {
    "duality-identity": run_duality_identity,
    "norm-duality": run_norm_duality,
    "restricted-unrestricted": run_restricted_unrestricted,
    "honsimple": run_honsimple,
    "sandwich": run_sandwich,
    "when-R-nonincreasing": run_when_R_nonincreasing,
    "iteration-R": run_iteration_R,
    "iteration-H": run_iteration_H,
    "hlp": run_hlp,
    "axioms": run_axioms,
    "char-optimal-iii": run_char_optimal_iii,
    "k-formula": run_k_formula,
}

TOL_PARAM = {"duality-identity": "tol_rel", "hlp": "tol_rel", "axioms": "tol_rel", "when-R-nonincreasing": "tol_rel"}


def run_case(case_id: str, params: dict | None = None, seed: int = DEFAULT_SEED, grid: int = DEFAULT_RESOLUTION,
             tol_rel: float | None = None) -> Report:
    if case_id not in CASES:
        raise ParamError(f"unknown case {case_id!r}; known: {sorted(CASES)}")
    params = dict(params or {})
    if tol_rel is not None and case_id in TOL_PARAM:
        params.setdefault(TOL_PARAM[case_id], tol_rel)
    try:
        return CASES[case_id](params, seed, grid)
    except NoOptimalSpace as exc:
        return Report(case_id, "not-applicable", 0, 0, None, (), {}, {"optimal_space_exists": False},
                      {"reason": str(exc)}, seed, grid)


def _run_star(args):
    return run_case(*args)


def run_all(seed: int = DEFAULT_SEED, grid: int = DEFAULT_RESOLUTION, jobs: int = 1,
            tol_rel: float | None = None) -> list[Report]:
    """Every case, reduced in registry order (independent of scheduling)."""
    jobs_args = [(cid, None, seed, grid, tol_rel) for cid in CASES]
    if jobs <= 1:
        return [run_case(*a) for a in jobs_args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_star, jobs_args))
