# tests/test_instance_io.py
import math

import numpy as np
import pytest

from lpsteiner.errors import DegenerateTopologyError, InvalidInputError
from lpsteiner.instance_io import (
    instance_from_tree,
    load_instance,
    parse_instance,
    resolve_path,
    save_instance,
    tree_from_instance,
)
from lpsteiner.smt_solver import solve_smt

from .conftest import UNIT_TRIANGLE


def test_resolve_path_falls_back_to_fixtures(fixtures_dir):
    assert resolve_path("triangle.json", fixtures_dir) == fixtures_dir / "triangle.json"
    with pytest.raises(InvalidInputError):
        resolve_path("missing.json", fixtures_dir)


def test_load_fixture(fixtures_dir):
    instance = load_instance("square_center.json", fixtures_dir)
    assert instance.p == 2.0
    assert instance.dim == 2
    assert instance.center == [0.5, 0.5]
    assert instance.tree is None


def test_truncated_file_is_invalid(fixtures_dir):
    with pytest.raises(InvalidInputError):
        load_instance("truncated.json", fixtures_dir)


@pytest.mark.parametrize(
    "text",
    [
        '{"p": 1.0, "points": [[0, 0]]}',
        '{"p": 2.0, "points": [[0, 0], [1, 0, 0]]}',
        '{"p": 2.0, "points": []}',
        '{"p": 2.0, "points": [[0, 0]], "center": [0, 0, 0]}',
        "[1, 2",
    ],
)
def test_parse_rejects_malformed_instances(text):
    with pytest.raises(InvalidInputError):
        parse_instance(text)


def test_tree_requires_tree_section():
    with pytest.raises(InvalidInputError):
        tree_from_instance(parse_instance('{"p": 2.0, "points": [[0, 0], [1, 0]]}'))


def test_tree_with_cycle_is_degenerate():
    text = """{"p": 2.0, "points": [[0, 0], [1, 0], [0, 1]],
               "tree": {"edges": [[0, 1], [1, 2], [0, 2]], "steiner": []}}"""
    with pytest.raises(DegenerateTopologyError):
        tree_from_instance(parse_instance(text))


def test_length_is_recomputed():
    text = """{"p": 3.0, "points": [[0, 0], [1, 1]],
               "tree": {"edges": [[0, 1]], "steiner": []}, "length": 99.0}"""
    tree = tree_from_instance(parse_instance(text))
    assert tree.length == pytest.approx(2 ** (1 / 3))


def test_save_and_reload_solved_tree(tmp_path):
    tree = solve_smt(UNIT_TRIANGLE, 2.0)
    target = save_instance(instance_from_tree(tree), tmp_path / "nested" / "tri.json")
    assert target.exists()

    reloaded = tree_from_instance(load_instance(target))
    assert reloaded.topology.edges == tree.topology.edges
    np.testing.assert_array_equal(reloaded.steiner_coords, tree.steiner_coords)
    assert reloaded.length == pytest.approx(math.sqrt(3), abs=1e-6)
    assert reloaded.certificate == tree.certificate

    # 覆盖已有文件
    save_instance(instance_from_tree(tree), target)
    assert load_instance(target).length == pytest.approx(tree.length)
