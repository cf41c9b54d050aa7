# tests/test_lp_geometry.py
import math

import numpy as np
import pytest

from lpsteiner.errors import InvalidInputError, SingularInputError
from lpsteiner.lp_geometry import (
    LpExponent,
    directional_derivative,
    dual_norm,
    finite_difference_derivative,
    lp_norm,
    norming_functional,
    pairing,
    smoothed_norm,
)

EXPONENTS = [1.2, 1.5, 2.0, 3.0, 7.0]


def test_exponent_conjugates():
    exponent = LpExponent(3.0)
    assert exponent.q == pytest.approx(1.5)
    assert LpExponent.from_q(1.5).p == pytest.approx(3.0)
    assert LpExponent.from_q(1.5).q == 1.5
    assert exponent.dual().p == pytest.approx(1.5)


@pytest.mark.parametrize("p", [1.0, 0.5, -2.0, math.inf, math.nan])
def test_exponent_rejects_non_smooth(p):
    with pytest.raises(InvalidInputError):
        LpExponent(p)


def test_norm_values():
    assert lp_norm([3.0, 4.0], 2.0) == pytest.approx(5.0)
    assert lp_norm([1.0, -1.0, 1.0], 3.0) == pytest.approx(3.0 ** (1.0 / 3.0))
    assert lp_norm([1e200, 1e200], 2.0) == pytest.approx(math.sqrt(2.0) * 1e200)
    rows = lp_norm([[3.0, 4.0], [0.0, 2.0]], 2.0)
    np.testing.assert_allclose(rows, [5.0, 2.0])


def test_norm_rejects_non_finite():
    with pytest.raises(InvalidInputError):
        lp_norm([1.0, math.nan], 2.0)


@pytest.mark.parametrize("p", EXPONENTS)
def test_norming_functional_identities(p, rng):
    exponent = LpExponent(p)
    for _ in range(50):
        x = rng.normal(size=rng.integers(1, 7))
        f = norming_functional(x, exponent)
        assert pairing(f, x) == pytest.approx(lp_norm(x, exponent), rel=1e-12)
        assert dual_norm(f, exponent) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("p", EXPONENTS)
def test_holder_inequality(p, rng):
    exponent = LpExponent(p)
    for _ in range(200):
        d = int(rng.integers(1, 8))
        f = rng.normal(size=d) * rng.exponential(size=d)
        x = rng.normal(size=d) * rng.exponential(size=d)
        bound = dual_norm(f, exponent) * lp_norm(x, exponent)
        assert abs(pairing(f, x)) <= bound * (1.0 + 1e-12)


@pytest.mark.parametrize("p", EXPONENTS)
def test_norming_functional_is_positively_homogeneous(p, rng):
    exponent = LpExponent(p)
    for _ in range(50):
        x = rng.normal(size=rng.integers(1, 7))
        base = norming_functional(x, exponent)
        for scale in (1e-8, 0.37, 1.0, 5.0, 1e9):
            np.testing.assert_allclose(norming_functional(scale * x, exponent), base, rtol=0, atol=1e-12)


@pytest.mark.parametrize("p", EXPONENTS)
def test_norming_functional_matches_finite_difference(p, rng):
    for _ in range(20):
        x = rng.normal(size=4)
        h = rng.normal(size=4)
        exact = directional_derivative(x, h, p)
        assert exact == pytest.approx(finite_difference_derivative(x, h, p), abs=1e-6)


@pytest.mark.parametrize("p", EXPONENTS)
def test_duality_map_is_an_involution_on_the_sphere(p, rng):
    exponent = LpExponent(p)
    x = rng.normal(size=5)
    x /= lp_norm(x, exponent)
    back = norming_functional(norming_functional(x, exponent), exponent.dual())
    np.testing.assert_allclose(back, x, atol=1e-12)


def test_norming_functional_of_zero_is_singular():
    with pytest.raises(SingularInputError):
        norming_functional([0.0, 0.0], 2.0)
    with pytest.raises(SingularInputError):
        norming_functional([[1.0, 0.0], [0.0, 0.0]], 3.0)


def test_norming_functional_keeps_zero_coordinates():
    f = norming_functional([0.0, 2.0, 0.0], 1.5)
    np.testing.assert_allclose(f, [0.0, 1.0, 0.0])


@pytest.mark.parametrize("p", EXPONENTS)
def test_smoothed_norm_at_zero_epsilon_is_exact(p, rng):
    z = rng.normal(size=(6, 3))
    z[0] = 0.0
    values, grads = smoothed_norm(z, p, 0.0)
    np.testing.assert_allclose(values, lp_norm(z, p))
    np.testing.assert_allclose(grads[1:], norming_functional(z[1:], p))
    np.testing.assert_array_equal(grads[0], 0.0)


@pytest.mark.parametrize("p", EXPONENTS)
def test_smoothed_norm_gradient(p, rng):
    z = rng.normal(size=(1, 3))
    eps = 1e-2
    values, grads = smoothed_norm(z, p, eps)
    assert values[0] >= lp_norm(z[0], p)
    step = 1e-6
    for i in range(3):
        e = np.zeros(3)
        e[i] = step
        forward, _ = smoothed_norm(z + e, p, eps)
        backward, _ = smoothed_norm(z - e, p, eps)
        assert grads[0, i] == pytest.approx((forward[0] - backward[0]) / (2 * step), abs=1e-6)
