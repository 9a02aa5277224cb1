"""Worked input/output examples for each module."""

import math
from fractions import Fraction as F

import numpy as np
import pytest

from rikit.functions import (
    StepFunction,
    double_star,
    head_integral,
    identity_layout,
    is_equimeasurable,
    rearrange,
    reflection_layout,
    translation_layout,
    transport,
)
from rikit.operators import OperatorSpec, apply_H, apply_R, apply_T, compose_RR, dilate
from rikit.optimal import build_v_from_xi, rho_R, xi_membership, xi_profile
from rikit.spaces import Intersection, LambdaOne, Lebesgue, Sum, associate_space, k_functional, norm
from rikit.weights import (
    IDENTITY,
    DivergenceError,
    Interpolated,
    Numeric,
    Power,
    PowerLog,
    Product,
    ReciprocalPrimitive,
    Tabulated,
    check_averaging,
    check_delta,
    check_nondegenerate,
    check_quasiconcave,
    invert,
    power,
)

THREE = StepFunction([0, 1, 2, 3], [1, 3, 2])
ONE = power(0)


# -- functions ---------------------------------------------------------------

def test_rearrange_examples():
    assert rearrange(THREE) == StepFunction([0, 1, 2, 3], [3, 2, 1])
    mono = StepFunction([0, 1, 2], [2, 1])
    assert rearrange(mono) == mono
    assert rearrange(StepFunction.zero()).is_zero()


def test_head_integral_examples():
    assert head_integral(THREE, 2) == 5
    assert head_integral(THREE, F(1, 10 ** 9)) == F(3, 10 ** 9)
    assert head_integral(StepFunction.indicator(1), 3) == 1


def test_double_star_examples():
    fs = StepFunction([0, 1, 2], [2, 1])
    assert double_star(fs, F(2)) == F(3, 2)
    assert double_star(fs, F(1)) == 2
    assert double_star(StepFunction.zero(), F(5)) == 0


def test_layout_examples():
    chi = StepFunction.indicator(1)
    assert transport(chi, translation_layout(chi, 2)) == StepFunction.indicator(2, 3)
    assert is_equimeasurable(transport(THREE, reflection_layout(THREE, 5)), THREE)
    assert transport(THREE, identity_layout(THREE)) == rearrange(THREE)


def test_equimeasurability_examples():
    chi = StepFunction.indicator(1)
    assert is_equimeasurable(THREE, rearrange(THREE))
    assert not is_equimeasurable(chi, 2 * chi)
    assert is_equimeasurable(StepFunction.indicator(2), chi + StepFunction.indicator(3, 4))


# -- weights -----------------------------------------------------------------

def test_weight_evaluation_examples():
    assert PowerLog(1, -0.5)(4.0) == 0.5
    assert ReciprocalPrimitive(ONE, IDENTITY)(2.0) == pytest.approx(0.5)
    assert Product(power(1), power(-1))(3.7) == pytest.approx(1.0)


def test_primitive_examples():
    assert power(-0.5).primitive(4.0) == pytest.approx(4.0)
    assert ONE.primitive(3.0) == pytest.approx(3.0)
    with pytest.raises(DivergenceError):
        power(-1).primitive(1.0)


def test_inverse_examples():
    assert invert(Power(2), 9.0) == pytest.approx(3.0)
    assert invert(Power(0.5), 2.0) == pytest.approx(4.0)
    assert invert(Numeric("t + t**2"), 2.0) == pytest.approx(1.0, rel=1e-14)


def test_delta_examples():
    r = check_delta(Power(2), "infinity", "inf")
    assert r.estimate == pytest.approx(4.0) and r.verdict
    r = check_delta(Power(0.5), "zero", "sup")
    assert r.estimate == pytest.approx(math.sqrt(2)) and r.verdict
    r = check_delta(Numeric("log(1+t)"), "infinity", "inf")
    assert r.estimate == pytest.approx(1.0, abs=1e-6) and not r.verdict


def test_averaging_examples():
    assert check_averaging(power(-0.5)).constant_estimate == pytest.approx(2.0)
    assert check_averaging(ONE).constant_estimate == pytest.approx(1.0)
    bad = check_averaging(power(-1.5))
    assert not bad.verdict and "diverge" in bad.reason


def test_quasiconcave_examples():
    assert check_quasiconcave(power(0.5))
    assert not check_quasiconcave(power(2))
    assert check_quasiconcave(Interpolated([0, 1, 2], [0, 1, 1]))  # min(1, t)


def test_nondegenerate_examples():
    assert check_nondegenerate(ONE)
    assert not check_nondegenerate(power(-2))
    assert not check_nondegenerate(Tabulated(StepFunction.zero()))


# -- operators ---------------------------------------------------------------

def test_R_examples():
    hardy = OperatorSpec("R", ONE, power(-1), IDENTITY)
    chi = StepFunction.indicator(1)
    assert apply_R(hardy, chi, 2.0) == pytest.approx(0.5)
    assert apply_R(hardy, chi, 0.5) == pytest.approx(1.0)
    sq = OperatorSpec("R", ONE, ONE, Power(2), L=1)
    assert apply_R(sq, StepFunction.indicator(1, L=1), 0.5) == pytest.approx(0.25)
    assert apply_R(hardy, StepFunction.zero(), 3.0) == 0.0


def test_H_examples():
    one = StepFunction.indicator(1, L=1)
    spec = OperatorSpec("H", ONE, power(-0.5), IDENTITY, L=1)
    assert apply_H(spec, one, 0.25) == pytest.approx(1.0)
    assert apply_H(spec.with_nu(Power(2)), one, 0.5) == pytest.approx(1.0)
    assert apply_H(spec, StepFunction.zero(1), 0.5) == 0.0


def test_T_examples():
    phi = power(1)
    assert apply_T(phi, StepFunction.indicator(1, L=2), 0.5) == pytest.approx(2.0)
    f = StepFunction([0, 1, 2], [2, 1], L=2)
    assert apply_T(phi, f, 1.5) == pytest.approx(4 / 3)


def test_dilation_examples():
    chi = StepFunction.indicator(1)
    assert dilate(chi, 1) == chi
    assert dilate(chi, 2) == StepFunction.indicator(2)
    assert dilate(StepFunction.indicator(1, L=1), 2) == StepFunction.indicator(1, L=1)


def test_composition_example():
    spec = OperatorSpec("R", ONE, ONE, IDENTITY, L=1)
    s = compose_RR(spec, spec, StepFunction.indicator(1, L=1), grid=4096).step
    assert float(s(0.5)) == pytest.approx(3 / 8, rel=1e-3)
    assert compose_RR(spec, spec, StepFunction.zero(1)).step.is_zero()


# -- spaces ------------------------------------------------------------------

def test_associate_examples():
    assert associate_space(Lebesgue(2)).p == 2
    # ψ(t) = t/∫₀ᵗ 1 ≡ 1: the Marcinkiewicz norm sup f** is the sup norm
    dual = associate_space(LambdaOne(ONE))
    f = StepFunction([0, 1, 3], [2, 1])
    assert norm(dual, f) == pytest.approx(norm(Lebesgue(math.inf), f))
    s = associate_space(Intersection(Lebesgue(1), Lebesgue(math.inf)))
    assert isinstance(s, Sum) and s.first.p == math.inf and s.second.p == 1


def test_k_functional_examples():
    f = StepFunction.indicator(2)
    assert k_functional(f, 1.0, ONE) == pytest.approx(1.0)
    assert k_functional(f, 1.0, ONE, mode="oracle") == pytest.approx(1.0)
    assert k_functional(f, 1e-12, ONE) == pytest.approx(0.0, abs=1e-11)
    assert k_functional(f, 1e-12, ONE, mode="oracle") == pytest.approx(0.0, abs=1e-11)


# -- optimal -----------------------------------------------------------------

def test_xi_examples():
    t = np.array([0.1, 0.5, 0.9])
    assert np.allclose(xi_profile(ONE, power(-1), IDENTITY, 1.0)(t), 1.0)
    assert np.allclose(xi_profile(ONE, power(-2), IDENTITY, 1.0)(t), 1 / t)
    s = np.array([0.25, 0.5, 2.0, 10.0])
    assert np.allclose(xi_profile(ONE, ONE, IDENTITY)(s), [0.25, 0.5, 1.0, 1.0])


def test_membership_examples():
    assert xi_membership(Lebesgue(math.inf, 1), ONE, power(-1), IDENTITY)
    assert not xi_membership(Lebesgue(math.inf, 1), ONE, power(-2), IDENTITY)
    assert xi_membership(Lebesgue(1, 1), ONE, power(-1.5), IDENTITY)


def test_rho_R_examples():
    f = StepFunction.indicator(1, value=3)
    assert rho_R(Lebesgue(math.inf), ONE, power(-1), IDENTITY, f) == pytest.approx(3.0)
    assert rho_R(Lebesgue(1, 1), ONE, ONE, IDENTITY, StepFunction.indicator(1, L=1), check=False) == pytest.approx(0.5)
    assert rho_R(Lebesgue(math.inf), ONE, power(-1), IDENTITY, StepFunction.zero()) == 0.0


def test_build_v_examples():
    t = np.array([0.5, 2.0, 8.0])
    assert np.allclose(build_v_from_xi(ONE, IDENTITY)(t), 1 / t)
    assert np.allclose(build_v_from_xi(ONE, Power(2))(t), t ** -0.5)
    assert np.allclose(build_v_from_xi(power(-0.5), IDENTITY)(t), 1 / (2 * np.sqrt(t)))
