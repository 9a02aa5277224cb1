import math

import numpy as np
import pytest

from rikit.functions import StepFunction
from rikit.operators import OperatorSpec, R_profile
from rikit.sampling import Profile, discretize, gauss_cells, graded_nodes, integrate, merge_nodes, sliver_integral
from rikit.weights import Power, power


@pytest.mark.parametrize("kappa", [0.0, 0.5, 0.9, 0.99])
def test_integrate_power_singularity(kappa):
    # ∫₀¹ t^{-κ} = 1/(1-κ)
    assert integrate(lambda t: t ** -kappa, [], 1.0) == pytest.approx(1 / (1 - kappa), rel=1e-9)


def test_integrate_through_kink():
    f = lambda t: np.minimum(t, 1.0)
    assert integrate(f, [1.0], 3.0) == pytest.approx(0.5 + 2.0, rel=1e-13)


def test_sliver_extrapolation():
    assert sliver_integral(lambda t: t ** -0.5, 1e-6) == pytest.approx(2e-3, rel=1e-12)
    assert sliver_integral(lambda t: np.ones_like(t), 1e-6) == pytest.approx(1e-6)


def test_gauss_exact_for_polynomials():
    got = gauss_cells(lambda t: t ** 7, np.array([0.0, 1.0]), np.array([1.0, 2.0]))
    assert np.allclose(got, [1 / 8, (2 ** 8 - 1) / 8], rtol=1e-14)


def test_node_helpers():
    assert merge_nodes(np.array([1.0, 1.0 + 1e-15, 2.0])).tolist() == [1.0, 2.0]
    nodes = graded_nodes([2.0], 1.0, 10.0, ratio=1.25)
    assert 2.0 in nodes
    assert np.all(nodes[1:] / nodes[:-1] <= 1.25 + 1e-12)


def test_discretize_preserves_mass():
    # R χ(0,1) with u = v = 1, ν = t²: min(t², 1), cut off at L = 2
    spec = OperatorSpec("R", power(0), power(0), Power(2), L=2)
    d = discretize(R_profile(spec, StepFunction.indicator(1, L=2)), 256)
    assert d.step.integral() == pytest.approx(1 / 3 + 1, rel=1e-12)
    assert not d.truncated


def test_discretize_reports_exponents():
    prof = Profile(lambda t: t ** -0.5 * (t < 1), 10.0, (1.0,), 1.0)
    d = discretize(prof, 512)
    assert d.head_exponent == pytest.approx(0.5, abs=1e-6)
    converging = Profile(lambda t: 2.0 - t ** 0.25, 1.0, (), None)
    assert discretize(converging, 512).head_exponent == 0.0


def test_discretize_infinite_tail():
    prof = Profile(lambda t: 1.0 / (1.0 + t) ** 2, math.inf, (), None)
    d = discretize(prof, 1024)
    assert d.truncated
    assert d.tail_exponent == pytest.approx(2.0, rel=1e-2)
    assert d.step.integral() == pytest.approx(1.0, rel=1e-6)
