# lpsteiner/topologies.py

import logging
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable, Optional

import networkx as nx
import numpy as np
from numpy.typing import NDArray

from . import config
from .errors import DegenerateTopologyError, ResourceLimitError
from .lp_geometry import LpExponent, _lp_norm
from .schemas import TreeCertificate

logger = logging.getLogger(__name__)

# 枚举过程中 Steiner 点的临时编号从这里开始，避免与终端编号冲突
_STEINER_BASE = 1000


@dataclass(frozen=True)
class Topology:
    """
    终端 0..n-1 与 Steiner 点 n..n+s-1 上的树。

    Steiner 点的度数至少为 3，因此 s <= n - 2。
    """
    terminal_count: int
    steiner_count: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        edges = tuple(sorted((min(u, v), max(u, v)) for u, v in self.edges))
        object.__setattr__(self, "edges", edges)
        n, s = self.terminal_count, self.steiner_count
        if n < 2 or s < 0:
            raise DegenerateTopologyError(f"非法的拓扑规模: n={n}, s={s}")
        if s > n - 2:
            raise DegenerateTopologyError(f"Steiner 点数 {s} 超过 n - 2 = {n - 2}")
        graph = self.graph
        if graph.number_of_nodes() != n + s or not nx.is_tree(graph):
            raise DegenerateTopologyError(f"边集 {edges} 不是 {n + s} 个节点上的树")
        low = [v for v in range(n, n + s) if graph.degree[v] < 3]
        if low:
            raise DegenerateTopologyError(f"Steiner 点 {low} 的度数小于 3")

    @cached_property
    def graph(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.node_count))
        graph.add_edges_from(self.edges)
        return graph

    @property
    def node_count(self) -> int:
        return self.terminal_count + self.steiner_count

    def is_terminal(self, node: int) -> bool:
        return node < self.terminal_count

    def degree(self, node: int) -> int:
        return self.graph.degree[node]

    def neighbors(self, node: int) -> list[int]:
        return sorted(self.graph.neighbors(node))

    def max_degrees(self) -> tuple[int, int]:
        """(终端最大度数, Steiner 点最大度数)，没有 Steiner 点时后者为 0。"""
        degrees = self.graph.degree
        terminal = max(degrees[v] for v in range(self.terminal_count))
        steiner = max((degrees[v] for v in range(self.terminal_count, self.node_count)), default=0)
        return terminal, steiner

    @cached_property
    def canonical_key(self) -> str:
        return _encode(_adjacency(self.edges), 0, -1, lambda v: v < self.terminal_count)

    @classmethod
    def from_edges(cls, terminal_count: int, edges: Iterable[tuple[int, int]]) -> "Topology":
        """按规范形式重新编号 Steiner 点后构造。"""
        edge_list = list(edges)
        nodes = {v for e in edge_list for v in e}
        steiner = sorted(v for v in nodes if v >= terminal_count)
        relabel = {v: _STEINER_BASE + i for i, v in enumerate(steiner)}
        staged = [(relabel.get(u, u), relabel.get(v, v)) for u, v in edge_list]
        return cls(terminal_count, len(steiner), _canonical_edges(staged, terminal_count))


def _adjacency(edges: Iterable[tuple[int, int]]) -> dict[int, list[int]]:
    adj: dict[int, list[int]] = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    return adj


def _encode(adj: dict[int, list[int]], node: int, parent: int, is_terminal) -> str:
    label = f"t{node}" if is_terminal(node) else "s"
    children = sorted(_encode(adj, c, node, is_terminal) for c in adj.get(node, []) if c != parent)
    return f"{label}({','.join(children)})"


def _canonical_edges(edges: list[tuple[int, int]], terminal_count: int) -> tuple[tuple[int, int], ...]:
    """
    以终端 0 为根做 DFS，子树按编码排序，Steiner 点按访问顺序编号为 n, n+1, ...。
    同一父节点下的子树编码互不相同 (每棵 Steiner 子树都含有带编号的终端)，因此编号唯一。
    """
    adj = _adjacency(edges)
    is_terminal = lambda v: v < terminal_count  # noqa: E731
    relabel: dict[int, int] = {}
    next_id = terminal_count
    stack = [(0, -1)]
    while stack:
        node, parent = stack.pop()
        if not is_terminal(node):
            relabel[node] = next_id
            next_id += 1
        children = [c for c in adj.get(node, []) if c != parent]
        children.sort(key=lambda c: _encode(adj, c, node, is_terminal), reverse=True)
        stack.extend((c, node) for c in children)
    mapped = ((relabel.get(u, u), relabel.get(v, v)) for u, v in edges)
    return tuple(sorted((min(u, v), max(u, v)) for u, v in mapped))


# =================================================================
#  Enumeration
# =================================================================

def _grow(edges: tuple[tuple[int, int], ...], terminal: int, steiner_ids: list[int]) -> list[list[tuple[int, int]]]:
    """
    把终端 `terminal` 加入树的全部方式:
      (a) 作为叶子挂到任意已有节点上;
      (b) 用一个新的度 3 Steiner 点细分一条边，再挂上该终端;
      (c) 用该终端本身细分一条边;
      (d) 把一个已有的 Steiner 点改标为该终端。
    任意合法拓扑删去最后一个终端 (并抑制度 2 的 Steiner 点) 后都落在上一层，所以不会遗漏。
    """
    nodes = sorted({v for e in edges for v in e})
    new_steiner = max(steiner_ids, default=_STEINER_BASE - 1) + 1
    grown: list[list[tuple[int, int]]] = []
    for v in nodes:
        grown.append(list(edges) + [(v, terminal)])
    for i, (u, v) in enumerate(edges):
        rest = list(edges[:i]) + list(edges[i + 1:])
        grown.append(rest + [(u, new_steiner), (new_steiner, v), (new_steiner, terminal)])
        grown.append(rest + [(u, terminal), (terminal, v)])
    for s in steiner_ids:
        grown.append([(terminal if u == s else u, terminal if v == s else v) for u, v in edges])
    return grown


def _within_cap(edges: list[tuple[int, int]], cap: int) -> bool:
    degree: dict[int, int] = {}
    for u, v in edges:
        degree[u] = degree.get(u, 0) + 1
        degree[v] = degree.get(v, 0) + 1
    return max(degree.values()) <= cap


def enumerate_topologies(n: int, max_steiner_degree: int, max_terminal_degree: int) -> list[Topology]:
    """
    n 个终端上所有规范形式不同的 Steiner 拓扑: 0..n-2 个 Steiner 点，
    Steiner 点度数在 [3, max_steiner_degree]，终端度数在 [1, max_terminal_degree]。
    按 (Steiner 点数, 边集) 排序，结果确定。

    Raises:
        ResourceLimitError: n 不在 [3, 7] 内。
    """
    if not config.MIN_TOPOLOGY_TERMINALS <= n <= config.MAX_TOPOLOGY_TERMINALS:
        raise ResourceLimitError(
            f"拓扑枚举只支持 {config.MIN_TOPOLOGY_TERMINALS} <= n <= {config.MAX_TOPOLOGY_TERMINALS}，收到 n={n}"
        )
    if max_terminal_degree < 1:
        return []
    # 生长过程中度数只增不减，用两个上限中较大者剪枝，最后再精确过滤
    growth_cap = max(max_steiner_degree, max_terminal_degree)
    level: dict[str, tuple[tuple[int, int], ...]] = {"root": ((0, 1),)}
    for terminal in range(2, n):
        next_level: dict[str, tuple[tuple[int, int], ...]] = {}
        for edges in level.values():
            steiner_ids = sorted({v for e in edges for v in e if v >= _STEINER_BASE})
            for candidate in _grow(edges, terminal, steiner_ids):
                if not _within_cap(candidate, growth_cap):
                    continue
                key = _encode(_adjacency(candidate), 0, -1, lambda v: v < _STEINER_BASE)
                if key not in next_level:
                    next_level[key] = tuple(candidate)
        level = next_level
        logger.debug("[Topologies] %d terminals: %d partial topologies", terminal + 1, len(level))

    topologies = []
    for edges in level.values():
        topology = Topology.from_edges(n, edges)
        terminal_max, steiner_max = topology.max_degrees()
        if terminal_max > max_terminal_degree:
            continue
        if topology.steiner_count and steiner_max > max_steiner_degree:
            continue
        topologies.append(topology)
    topologies.sort(key=lambda t: (t.steiner_count, t.edges))
    logger.info("[Topologies] n=%d caps=(%d, %d): %d topologies", n, max_steiner_degree,
                max_terminal_degree, len(topologies))
    return topologies


# =================================================================
#  Embedded trees
# =================================================================

@dataclass(frozen=True, eq=False)
class SteinerTree:
    """
    嵌入后的树: 拓扑 + 终端坐标 + Steiner 点坐标 + 总长度。
    """
    topology: Topology
    terminal_coords: NDArray[np.float64]
    steiner_coords: NDArray[np.float64]
    p: LpExponent
    length: float
    certificate: Optional[TreeCertificate] = None

    def node_coords(self) -> NDArray[np.float64]:
        if self.steiner_coords.shape[0] == 0:
            return self.terminal_coords
        return np.vstack([self.terminal_coords, self.steiner_coords])

    def edge_lengths(self) -> NDArray[np.float64]:
        coords = self.node_coords()
        edges = np.array(self.topology.edges, dtype=int)
        return _lp_norm(coords[edges[:, 0]] - coords[edges[:, 1]], self.p.p)

    def recompute_length(self) -> float:
        return float(self.edge_lengths().sum())

    def with_certificate(self, certificate: TreeCertificate) -> "SteinerTree":
        return replace(self, certificate=certificate)
