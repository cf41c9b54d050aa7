# tests/test_constructions.py
import math

import numpy as np
import pytest

from lpsteiner.certificates import certify_steiner_point, certify_vertex, check_balancing, check_collapsing
from lpsteiner.constructions import (
    check_claims,
    collapsing_holds_simplex,
    construction_instance_file,
    custom_config,
    four_point_config,
    make_star_instance,
    simplex_config,
    triangle_config,
)
from lpsteiner.errors import InvalidInputError, PreconditionError
from lpsteiner.lp_geometry import lp_norm, norming_functional
from lpsteiner.schemas import ConstructionKind

LOG3_LOG2 = math.log(3) / math.log(2)


@pytest.mark.parametrize("q", [1.3, 1.5, LOG3_LOG2])
def test_four_point_family_is_certified(q):
    c = four_point_config(q)
    assert c.kind is ConstructionKind.FOUR_POINT
    assert check_balancing(c.family).balanced
    assert check_collapsing(c.family).certified
    assert check_claims(c) == {}


def test_four_point_family_refuted_past_threshold():
    q = 1.62
    c = four_point_config(q)
    report = check_collapsing(c.family)
    assert not report.certified
    assert len(report.worst_subset) == 2
    assert report.worst_subset_norm == pytest.approx(2 * 3 ** (-1 / q), abs=1e-9)
    assert check_claims(c) == {}


def test_four_point_threshold_is_sharp():
    assert check_collapsing(four_point_config(LOG3_LOG2 - 1e-6).family, tol=1e-9).certified
    assert not check_collapsing(four_point_config(LOG3_LOG2 + 1e-3).family, tol=1e-9).certified


@pytest.mark.parametrize("d", [3, 4, 7])
def test_simplex_normalisation(d):
    q = 2.7
    raw = d * np.eye(d) - 1.0
    assert lp_norm(raw[0], q) ** q == pytest.approx((d - 1) ** q + d - 1)
    c = simplex_config(d, q)
    np.testing.assert_allclose(lp_norm(c.family.vectors, q), 1.0, atol=1e-12)
    assert check_balancing(c.family).balanced


def test_simplex_examples():
    assert collapsing_holds_simplex(4, 3.3)
    assert not collapsing_holds_simplex(4, 3.1)
    assert simplex_config(4, 3.3).claims == {"balancing": True, "collapsing": True}
    with pytest.raises(InvalidInputError):
        simplex_config(2, 3.0)


@pytest.mark.parametrize("q", [2.5, 3.0, 3.21, 3.41, 4.0])
def test_simplex_closed_form_matches_enumeration(q):
    for d in range(3, 13):
        enumerated = check_collapsing(simplex_config(d, q).family).certified
        assert collapsing_holds_simplex(d, q) == enumerated, (d, q)


@pytest.mark.parametrize("q", [1.2, 2.0, 3.5])
def test_triangle_family(q):
    c = triangle_config(q)
    x, minus_y, y_minus_x = c.family.vectors
    assert lp_norm(x + minus_y, q) == pytest.approx(1.0, abs=1e-10)
    assert lp_norm(y_minus_x, q) == pytest.approx(1.0, abs=1e-10)
    assert check_balancing(c.family).balanced
    assert check_collapsing(c.family).certified


def test_star_instance_from_four_point_family():
    c = four_point_config(1.5)
    star = make_star_instance(c)
    assert star.exponent.p == pytest.approx(3.0)
    np.testing.assert_allclose(np.abs(star.terminals), 3 ** (-1 / 3))
    np.testing.assert_array_equal(star.center, np.zeros(3))
    np.testing.assert_allclose(lp_norm(star.terminals, star.exponent), 1.0)
    assert certify_steiner_point(star.center, star.terminals, star.exponent).certified


@pytest.mark.parametrize("make", [
    lambda: four_point_config(1.4),
    lambda: simplex_config(5, 3.5),
    lambda: triangle_config(2.6),
])
def test_star_instance_round_trip(make):
    c = make()
    star = make_star_instance(c)
    recovered = norming_functional(star.terminals - star.center, star.exponent)
    np.testing.assert_allclose(recovered, c.family.vectors, atol=1e-10)


def test_star_instance_from_simplex_family():
    star = make_star_instance(simplex_config(4, 3.3))
    assert star.exponent.p == pytest.approx(3.3 / 2.3)
    assert star.terminals.shape == (4, 4)
    assert certify_steiner_point(star.center, star.terminals, star.exponent).certified


def test_star_instance_padding():
    star = make_star_instance(four_point_config(1.5), d=5)
    assert star.terminals.shape == (4, 5)
    np.testing.assert_array_equal(star.terminals[:, 3:], 0.0)
    assert certify_steiner_point(star.center, star.terminals, star.exponent).certified
    with pytest.raises(InvalidInputError):
        make_star_instance(four_point_config(1.5), d=2)


def test_single_vector_gives_a_segment():
    star = make_star_instance(custom_config([[1.0, 0.0]], 2.0))
    np.testing.assert_allclose(star.terminals, [[1.0, 0.0]])
    assert certify_vertex(star.center, star.terminals, star.exponent).certified


def test_unbalanced_family_certifies_as_vertex():
    c = custom_config(four_point_config(1.5).family.vectors[:3], 1.5)
    star = make_star_instance(c)
    assert not certify_steiner_point(star.center, star.terminals, star.exponent).certified
    assert certify_vertex(star.center, star.terminals, star.exponent).certified


def test_star_instance_requires_collapsing():
    with pytest.raises(PreconditionError):
        make_star_instance(four_point_config(1.62))


def test_construction_instance_file():
    instance = construction_instance_file(four_point_config(1.5))
    assert instance.p == pytest.approx(3.0)
    assert instance.center == [0.0, 0.0, 0.0]
    assert len(instance.points) == 4
    assert instance.tree is None
