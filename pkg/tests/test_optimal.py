import math

import numpy as np
import pytest

from rikit.functions import StepFunction, rearrange
from rikit.operators import H_profile, OperatorSpec
from rikit.optimal import (
    H_assumption,
    HypothesisError,
    NoOptimalSpace,
    T_norm_estimate,
    build_v_from_xi,
    random_nonincreasing,
    rho_H_bracket,
    rho_R,
    rho_tilde,
    xi_membership,
    xi_norm,
)
from rikit.spaces import Lebesgue, norm, profile_norm
from rikit.weights import IDENTITY, Power, power

ONE = power(0)
F = StepFunction([0, 0.5, 2, 3], [1.0, 3.0, 0.5])


def test_xi_for_hardy_average():
    # ξ = min(1, 1/t): ‖ξ‖₂ = √2, not integrable
    assert xi_norm(Lebesgue(2), ONE, power(-1), IDENTITY) == pytest.approx(math.sqrt(2), rel=1e-4)
    assert xi_membership(Lebesgue(2), ONE, power(-1), IDENTITY)
    assert not xi_membership(Lebesgue(1), ONE, power(-1), IDENTITY)


def test_rho_R_hardy_bound_and_no_domain():
    val = rho_R(Lebesgue(2), ONE, power(-1), IDENTITY, F)
    assert norm(Lebesgue(2), F) < val <= 2 * norm(Lebesgue(2), F)
    with pytest.raises(NoOptimalSpace):
        rho_R(Lebesgue(1), ONE, power(-1), IDENTITY, F)


def test_rho_R_sup_norm_of_indicator():
    # ‖R χ(0,3)‖_∞ with u = 1, v = 1, ν = id is ∫₀^∞ χ = 3
    assert rho_R(Lebesgue(math.inf), ONE, ONE, IDENTITY, StepFunction.indicator(3.0), check=False) == pytest.approx(3.0)


def test_degenerate_u():
    with pytest.raises(HypothesisError):
        xi_norm(Lebesgue(2), power(-2), power(-1), IDENTITY)


def test_build_v_from_xi():
    v = build_v_from_xi(ONE, Power(2))
    # 1/v(t) = ∫₀^{√t} 1 = √t
    assert v(4.0) == pytest.approx(0.5)
    assert v.monotone == "nonincreasing"


def test_H_assumption():
    assert H_assumption(Lebesgue(2), ONE, power(-1), IDENTITY).holds
    assert not H_assumption(Lebesgue(1), ONE, power(-0.5), IDENTITY).holds


def test_collapse_bracket_and_sandwich():
    X = Lebesgue(2)
    v = build_v_from_xi(ONE, IDENTITY)
    br = rho_H_bracket(X, ONE, v, IDENTITY, F, n_cells=4, budget=40, xi=ONE)
    base = profile_norm(X, H_profile(OperatorSpec("H", ONE, v, IDENTITY), rearrange(F)))
    assert br.upper_kind == "exact"
    assert br.upper == pytest.approx(base, rel=1e-12)
    assert br.lower == pytest.approx(base, rel=1e-9)
    tilde = rho_tilde(X, ONE, ONE, IDENTITY, F, budget=40)
    assert tilde.value == pytest.approx(base, rel=1e-6)


def test_bracket_nondecreasing_phi_ordering():
    X = Lebesgue(2)
    xi = power(-0.5)  # φ = u/ξ = √t is nondecreasing
    v = build_v_from_xi(xi, Power(2))
    br = rho_H_bracket(X, ONE, v, Power(2), F, n_cells=4, budget=40, xi=xi)
    assert br.upper_kind == "estimated"
    assert br.lower >= br.witness["H_f_star"] * (1 - 1e-12)
    tilde = rho_tilde(X, ONE, xi, Power(2), F, budget=40)
    assert br.lower <= tilde.value * (1 + 1e-8)


def test_bracket_cell_limits():
    with pytest.raises(ValueError):
        rho_H_bracket(Lebesgue(2), ONE, power(-1), IDENTITY, F, n_cells=9)


def test_random_nonincreasing_and_T_norm():
    rng = np.random.default_rng(1)
    for _ in range(20):
        assert random_nonincreasing(rng, math.inf).is_nonincreasing()
    assert T_norm_estimate(power(-0.5), Lebesgue(2), math.inf) == pytest.approx(1.0)
    assert T_norm_estimate(power(0.25), Lebesgue(2), math.inf, samples=30) >= 1.0
