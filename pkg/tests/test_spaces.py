import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rikit.functions import StepFunction, inner, rearrange
from rikit.operators import H_profile, OperatorSpec, R_profile
from rikit.spaces import (
    Intersection,
    LambdaOne,
    Lebesgue,
    Marcinkiewicz,
    Sum,
    UnsupportedDual,
    associate_norm_lower,
    associate_space,
    conjugate_exponent,
    fundamental_function,
    k_functional,
    norm,
    profile_norm,
    space_from_json,
)
from rikit.weights import DomainError, Power, power

from conftest import step_functions

LP = [Lebesgue(1), Lebesgue(2), Lebesgue(3), Lebesgue(math.inf)]


@pytest.mark.parametrize("p", [1, 1.5, 2, 3, math.inf])
@pytest.mark.parametrize("a", [0.25, 1.0, 7.0])
def test_lebesgue_indicator(p, a):
    f = StepFunction.indicator(a)
    expected = 1.0 if math.isinf(p) else a ** (1 / p)
    assert norm(Lebesgue(p), f) == pytest.approx(expected, rel=1e-14)


def test_lebesgue_two_levels():
    f = StepFunction([0, 1, 3], [2, 1])
    assert norm(Lebesgue(2), f) == pytest.approx(math.sqrt(4 + 2))
    assert norm(Lebesgue(1), f) == pytest.approx(4.0)


@pytest.mark.parametrize("a", [0.5, 1.0, 4.0])
def test_lambda_and_marcinkiewicz_indicators(a):
    f = StepFunction.indicator(a)
    assert norm(LambdaOne(power(-0.5)), f) == pytest.approx(2 * math.sqrt(a), rel=1e-13)
    assert norm(Marcinkiewicz(power(0.5)), f) == pytest.approx(math.sqrt(a), rel=1e-13)


def test_marcinkiewicz_interior_maximum():
    # f* = 4 on (0,1), 1 on (1,10): t^{1/2} f**(t) = (3 + t)/√t peaks at t = 3 inside the second cell
    f = StepFunction([0, 1, 10], [4, 1])
    assert norm(Marcinkiewicz(power(0.5)), f) == pytest.approx(max(4.0, 13 / math.sqrt(10), 2 * math.sqrt(3)), rel=1e-12)


def test_intersection_and_sum():
    f = StepFunction.indicator(4)
    assert norm(Intersection(Lebesgue(1), Lebesgue(math.inf)), f) == 4.0
    # L¹ + L^∞ norm equals ∫₀¹ f*
    assert norm(Sum(Lebesgue(1), Lebesgue(math.inf)), f) == pytest.approx(1.0)


@given(step_functions(), step_functions(), st.sampled_from(LP))
def test_triangle_inequality(f, g, X):
    assert norm(X, f + g) <= (norm(X, f) + norm(X, g)) * (1 + 1e-12)


@given(step_functions(), st.sampled_from(LP + [LambdaOne(power(-0.5)), Marcinkiewicz(power(0.5))]))
def test_rearrangement_invariance(f, X):
    assert norm(X, rearrange(f)) == pytest.approx(norm(X, f), rel=1e-12)


@pytest.mark.parametrize("p", [1, 1.5, 2, 4, math.inf])
@pytest.mark.parametrize("t", [0.1, 1.0, 9.0])
def test_fundamental_function_identity(p, t):
    X = Lebesgue(p)
    assert fundamental_function(X, t) * fundamental_function(associate_space(X), t) == pytest.approx(t, rel=1e-12)


def test_fundamental_function_domain():
    with pytest.raises(DomainError):
        fundamental_function(Lebesgue(2, L=1), 2.0)


def test_associate_spaces():
    assert conjugate_exponent(2) == 2 and conjugate_exponent(1) == math.inf and conjugate_exponent(3) == 1.5
    dual = associate_space(Intersection(Lebesgue(1), Lebesgue(math.inf)))
    assert isinstance(dual, Sum)
    with pytest.raises(UnsupportedDual):
        associate_space(Marcinkiewicz(power(0.5)))


def test_lambda_one_dual_is_marcinkiewicz():
    # associate of Λ¹(t^{-1/2}) is M_ψ with ψ(t) = t/(2√t) = √t/2
    dual = associate_space(LambdaOne(power(-0.5)))
    f = StepFunction.indicator(4)
    assert norm(dual, f) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("X", [Lebesgue(2), Lebesgue(3), Lebesgue(1)])
def test_associate_norm_lower_bound(X):
    f = StepFunction([0, 1, 2, 5], [3, 2, F(1, 2)])
    br = associate_norm_lower(X, f, budget=400)
    exact = norm(associate_space(X), f)
    assert br.exact == pytest.approx(exact)
    assert br.lower <= exact * (1 + 1e-12)
    assert br.lower >= 0.98 * exact


def test_associate_norm_lower_marcinkiewicz_below_holder():
    X = Marcinkiewicz(power(0.5))
    f = StepFunction([0, 1, 2], [2, 1])
    br = associate_norm_lower(X, f, budget=200)
    assert br.exact is None
    # any admissible g gives ∫ f g ≤ ‖f‖_{X'} ‖g‖_X; the indicator of the support is admissible after scaling
    g = StepFunction.indicator(2)
    assert br.lower >= inner(f, g) / norm(X, g) * (1 - 1e-12)


def test_profile_norm_hardy_average():
    # ‖Pχ(0,1)‖₂² = 1 + ∫₁^∞ t^{-2} = 2
    spec = OperatorSpec("R", power(0), power(-1), Power(1))
    val = profile_norm(Lebesgue(2), R_profile(spec, StepFunction.indicator(1)))
    # cell averages can only lose mass under a convex norm
    assert val <= math.sqrt(2)
    assert val == pytest.approx(math.sqrt(2), rel=1e-4)
    fine = profile_norm(Lebesgue(2), R_profile(spec, StepFunction.indicator(1)), resolution=8192)
    assert val < fine <= math.sqrt(2)


def test_profile_norm_detects_unbounded():
    spec = OperatorSpec("H", power(0), power(-1), Power(1))
    prof = H_profile(spec, StepFunction.indicator(1))
    assert profile_norm(Lebesgue(math.inf), prof) == math.inf
    # ∫₀¹ log²(1/t) dt = 2
    assert profile_norm(Lebesgue(2), prof) == pytest.approx(math.sqrt(2), rel=1e-5)


def test_profile_norm_tail_divergence():
    spec = OperatorSpec("R", power(0), power(-0.5), Power(1))
    assert profile_norm(Lebesgue(2), R_profile(spec, StepFunction.indicator(1))) == math.inf


def test_k_functional_formula_and_oracle():
    f = StepFunction.indicator(1, value=2)
    assert k_functional(f, 0.5, power(0)) == pytest.approx(1.0)
    assert k_functional(f, 0.5, power(0), mode="oracle") == pytest.approx(1.0)
    with pytest.raises(DomainError):
        k_functional(f, 0.0, power(0))


@given(step_functions(max_cells=5), st.floats(min_value=0.05, max_value=5))
def test_k_functional_agrees_with_clipping(f, t):
    xi = power(-0.5)
    assert k_functional(f, t, xi) == pytest.approx(k_functional(f, t, xi, mode="oracle"), rel=1e-9, abs=1e-12)


def test_space_json():
    X = space_from_json({"kind": "intersection", "spaces": [{"kind": "lebesgue", "p": 2}, {"kind": "lebesgue", "p": "inf"}]})
    assert norm(X, StepFunction.indicator(4)) == 2.0
    assert space_from_json(X.to_json()).to_json() == X.to_json()
    with pytest.raises(ValueError):
        Lebesgue(0.5)
    with pytest.raises(ValueError):
        Marcinkiewicz(power(2))
