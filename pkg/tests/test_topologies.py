# tests/test_topologies.py
import itertools

import networkx as nx
import numpy as np
import pytest

from lpsteiner.errors import DegenerateTopologyError, ResourceLimitError
from lpsteiner.lp_geometry import LpExponent
from lpsteiner.topologies import SteinerTree, Topology, enumerate_topologies


def _brute_force(n: int, max_steiner_degree: int, max_terminal_degree: int) -> set:
    """用 Prüfer 序列枚举所有带标号的树，过滤后化为规范形式。"""
    found = set()
    for s in range(n - 1):
        size = n + s
        for sequence in itertools.product(range(size), repeat=size - 2):
            tree = nx.from_prufer_sequence(list(sequence))
            degrees = dict(tree.degree)
            if any(degrees[v] > max_terminal_degree for v in range(n)):
                continue
            if any(not 3 <= degrees[v] <= max_steiner_degree for v in range(n, size)):
                continue
            # 只保留 Steiner 点按编号出现的一个代表
            found.add(Topology.from_edges(n, tree.edges).edges)
    return found


@pytest.mark.parametrize("n, caps", [
    (3, (3, 1)), (3, (3, 2)), (3, (3, 3)),
    (4, (3, 1)), (4, (3, 3)), (4, (4, 4)), (4, (3, 2)),
])
def test_enumeration_matches_brute_force(n, caps):
    topologies = enumerate_topologies(n, *caps)
    edges = [t.edges for t in topologies]
    assert len(edges) == len(set(edges))
    assert set(edges) == _brute_force(n, *caps)


def test_three_terminal_counts():
    stars = enumerate_topologies(3, 3, 1)
    assert len(stars) == 1
    assert stars[0].steiner_count == 1
    assert len(enumerate_topologies(3, 3, 2)) == 4


@pytest.mark.parametrize("n, expected", [(4, 3), (5, 15), (6, 105)])
def test_full_steiner_topology_counts(n, expected):
    # 全 Steiner 拓扑 (终端都是叶子，Steiner 点度数都是 3) 共 (2n-5)!! 个
    topologies = enumerate_topologies(n, 3, 1)
    assert len(topologies) == expected
    assert all(t.steiner_count == n - 2 for t in topologies)


def test_enumeration_is_deterministic():
    first = enumerate_topologies(5, 4, 3)
    second = enumerate_topologies(5, 4, 3)
    assert [t.edges for t in first] == [t.edges for t in second]
    keys = [(t.steiner_count, t.edges) for t in first]
    assert keys == sorted(keys)


def test_enumerated_degrees_respect_caps():
    for topology in enumerate_topologies(5, 4, 2):
        terminal_max, steiner_max = topology.max_degrees()
        assert terminal_max <= 2
        assert steiner_max <= 4


@pytest.mark.parametrize("n", [2, 8])
def test_enumeration_size_limit(n):
    with pytest.raises(ResourceLimitError):
        enumerate_topologies(n, 3, 3)


def test_canonical_form_ignores_steiner_labels():
    a = Topology.from_edges(4, [(0, 4), (1, 4), (4, 5), (2, 5), (3, 5)])
    b = Topology.from_edges(4, [(0, 9), (1, 9), (9, 7), (2, 7), (3, 7)])
    assert a == b
    assert a.canonical_key == b.canonical_key
    c = Topology.from_edges(4, [(0, 4), (2, 4), (4, 5), (1, 5), (3, 5)])
    assert a != c


@pytest.mark.parametrize("n, s, edges", [
    (3, 0, ((0, 1), (1, 2), (2, 0))),
    (3, 1, ((0, 3), (3, 1), (1, 2))),
    (3, 2, ((0, 3), (1, 3), (3, 4), (2, 4))),
    (3, 0, ((0, 1),)),
])
def test_invalid_topologies(n, s, edges):
    with pytest.raises(DegenerateTopologyError):
        Topology(n, s, edges)


def test_topology_accessors():
    t = Topology(3, 1, ((0, 3), (1, 3), (2, 3)))
    assert t.node_count == 4
    assert t.is_terminal(2) and not t.is_terminal(3)
    assert t.degree(3) == 3
    assert t.neighbors(3) == [0, 1, 2]
    assert t.max_degrees() == (1, 3)


def test_steiner_tree_length():
    t = Topology(3, 1, ((0, 3), (1, 3), (2, 3)))
    terminals = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]])
    tree = SteinerTree(t, terminals, np.zeros((1, 2)), LpExponent(2.0), 0.0)
    assert tree.recompute_length() == pytest.approx(2.0 + np.sqrt(2))
    np.testing.assert_allclose(tree.edge_lengths(), [1.0, 1.0, np.sqrt(2)])
    assert tree.node_coords().shape == (4, 2)
