# lpsteiner/certificates.py

import logging
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np
from numpy.typing import ArrayLike, NDArray

from . import config
from .errors import DegenerateTopologyError, InvalidInputError, ResourceLimitError, SingularInputError
from .lp_geometry import LpExponent, _lp_norm, as_exponent, as_matrix, as_vector, norming_functional
from .schemas import CertificateReport, NodeVerdict, TreeCertificate, Verdict
from .topologies import SteinerTree

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class UnitFamily:
    """
    对偶空间 ℓ_q^d 中的有限单位向量族。

    exponent 是原空间的 LpExponent，族中向量的范数在 exponent.q 下计算。
    族不去重: 重复的向量本身就会破坏 collapsing 条件。
    """
    vectors: NDArray[np.float64]
    exponent: LpExponent

    def __init__(self, vectors: ArrayLike, exponent: "LpExponent | float", tol: float = config.DEFAULT_TOLERANCE):
        rows = as_matrix(vectors, "vectors")
        exp = as_exponent(exponent)
        norms = _lp_norm(rows, exp.q)
        bad = np.flatnonzero(np.abs(norms - 1.0) > tol)
        if bad.size:
            raise InvalidInputError(
                f"族中第 {bad.tolist()} 个向量不是 ℓ_{exp.q:g} 单位向量 (范数 {norms[bad].tolist()})"
            )
        rows.setflags(write=False)
        object.__setattr__(self, "vectors", rows)
        object.__setattr__(self, "exponent", exp)

    @classmethod
    def in_lq(cls, vectors: ArrayLike, q: float, tol: float = config.DEFAULT_TOLERANCE) -> "UnitFamily":
        return cls(vectors, LpExponent.from_q(q), tol=tol)

    @property
    def m(self) -> int:
        return self.vectors.shape[0]

    @property
    def d(self) -> int:
        return self.vectors.shape[1]

    @property
    def q(self) -> float:
        return self.exponent.q


# =================================================================
#  Subset enumeration
# =================================================================

def _iter_subset_sums(vectors: NDArray[np.float64], max_subsets: int) -> Iterator[tuple[int, NDArray[np.float64]]]:
    """
    按掩码顺序逐块产生所有子集和。掩码的第 i 位选中第 i 个向量。
    每个子集和都由上一个子集和加一个向量得到，总代价 O(2^m·d)。
    """
    m, d = vectors.shape
    if m > max_subsets:
        raise ResourceLimitError(f"子集枚举需要 2^{m} 个子集，超过上限 2^{max_subsets}")
    low_bits = min(m, config.SUBSET_CHUNK_BITS)
    table = np.zeros((1, d))
    for i in range(low_bits):
        table = np.vstack([table, table + vectors[i]])
    high = vectors[low_bits:]
    for block in range(1 << (m - low_bits)):
        offset = np.zeros(d)
        for j in range(high.shape[0]):
            if block >> j & 1:
                offset += high[j]
        yield block << low_bits, table + offset


def _mask_to_indices(mask: int, m: int) -> tuple[int, ...]:
    return tuple(i for i in range(m) if mask >> i & 1)


def max_subset_norm(vectors: NDArray[np.float64], q: float, max_subsets: int,
                   transform: Callable[[NDArray[np.float64]], NDArray[np.float64]] | None = None
                   ) -> tuple[float, tuple[int, ...]]:
    """
    返回最大子集范数及其对应的子集。并列时取排序后下标字典序最小的子集。
    """
    m = vectors.shape[0]
    best_value = -np.inf
    best_subset: tuple[int, ...] = ()
    for start, sums in _iter_subset_sums(vectors, max_subsets):
        if transform is not None:
            sums = transform(sums)
        norms = _lp_norm(sums, q)
        chunk_max = float(norms.max())
        if chunk_max < best_value:
            continue
        candidates = min(_mask_to_indices(start + int(k), m) for k in np.flatnonzero(norms == chunk_max))
        if chunk_max > best_value or candidates < best_subset:
            best_value, best_subset = chunk_max, candidates
    return best_value, best_subset


def subset_sum_norms(vectors: ArrayLike, q: float, max_subsets: int = config.MAX_SUBSETS) -> NDArray[np.float64]:
    """所有 2^m 个子集和的 ℓ_q 范数，按掩码索引。只用于小族的调试和测试。"""
    rows = as_matrix(vectors, "vectors")
    return np.concatenate([_lp_norm(sums, q) for _, sums in _iter_subset_sums(rows, max_subsets)])


# =================================================================
#  Family checks
# =================================================================

def _balance(fam: UnitFamily, tol: float) -> tuple[bool, float]:
    residual = float(_lp_norm(fam.vectors.sum(axis=0), fam.q))
    return residual <= tol, residual


def check_balancing(fam: UnitFamily, tol: float = config.DEFAULT_TOLERANCE) -> CertificateReport:
    """balancing 条件: ‖Σ x_i‖_q <= tol。"""
    balanced, residual = _balance(fam, tol)
    return CertificateReport(
        criterion="balancing",
        verdict=Verdict.CERTIFIED if balanced else Verdict.REFUTED,
        tolerance=tol,
        balanced=balanced,
        balance_residual=residual,
    )


def check_collapsing(fam: UnitFamily, tol: float = config.DEFAULT_TOLERANCE,
                     max_subsets: int = config.MAX_SUBSETS) -> CertificateReport:
    """
    collapsing 条件: 对所有子集 J，‖Σ_{i∈J} x_i‖_q <= 1 + tol。
    同时报告 balancing 结果 (仅供参考，不影响 verdict)。

    Raises:
        ResourceLimitError: m 超过 max_subsets。
    """
    worst_norm, worst_subset = max_subset_norm(fam.vectors, fam.q, max_subsets)
    collapsing = worst_norm <= 1.0 + tol
    balanced, residual = _balance(fam, tol)
    logger.debug("[Certificates] m=%d q=%g worst subset %s norm %.12g", fam.m, fam.q, worst_subset, worst_norm)
    return CertificateReport(
        criterion="collapsing",
        verdict=Verdict.CERTIFIED if collapsing else Verdict.REFUTED,
        tolerance=tol,
        balanced=balanced,
        balance_residual=residual,
        collapsing=collapsing,
        worst_subset=list(worst_subset),
        worst_subset_norm=worst_norm,
    )


def gram_matrix(fam: UnitFamily) -> NDArray[np.float64]:
    """[<x_i*, x_j>]，x_i* 为 x_i 在 ℓ_q 中的范数泛函。"""
    functionals = norming_functional(fam.vectors, fam.q)
    return functionals @ fam.vectors.T


# =================================================================
#  Star certificates
# =================================================================

def _star_family(center: ArrayLike, neighbors: ArrayLike, p: "LpExponent | float", tol: float) -> UnitFamily:
    c = as_vector(center, "center")
    rows = as_matrix(neighbors, "neighbors")
    if rows.shape[1] != c.shape[0]:
        raise InvalidInputError(f"邻点维度 {rows.shape[1]} 与中心维度 {c.shape[0]} 不一致")
    diffs = rows - c
    if np.any(np.all(diffs == 0.0, axis=1)):
        raise SingularInputError("邻点与中心重合，请先收缩该边")
    exponent = as_exponent(p)
    return UnitFamily(norming_functional(diffs, exponent), exponent, tol=max(tol, 1e-12))


def certify_steiner_point(center: ArrayLike, neighbors: ArrayLike, p: "LpExponent | float",
                          tol: float = config.DEFAULT_TOLERANCE,
                          max_subsets: int = config.MAX_SUBSETS) -> CertificateReport:
    """
    星形树 (center 为 Steiner 点) 是邻点集合的 SMT，当且仅当邻边方向的范数泛函
    同时满足 balancing 和 collapsing 条件。
    """
    fam = _star_family(center, neighbors, p, tol)
    report = check_collapsing(fam, tol, max_subsets)
    certified = bool(report.balanced and report.collapsing)
    return report.model_copy(update={
        "criterion": "balancing+collapsing",
        "verdict": Verdict.CERTIFIED if certified else Verdict.REFUTED,
    })


def certify_vertex(center: ArrayLike, neighbors: ArrayLike, p: "LpExponent | float",
                   tol: float = config.DEFAULT_TOLERANCE,
                   max_subsets: int = config.MAX_SUBSETS) -> CertificateReport:
    """
    center 是终端时，星形树是 {center} ∪ neighbors 的 SMT 当且仅当 collapsing 成立。
    balanced 字段只作参考。
    """
    fam = _star_family(center, neighbors, p, tol)
    return check_collapsing(fam, tol, max_subsets)


def certify_tree(tree: SteinerTree, p: "LpExponent | float | None" = None,
                 tol: float = config.DEFAULT_TOLERANCE,
                 max_subsets: int = config.MAX_SUBSETS) -> list[tuple[int, CertificateReport]]:
    """
    在每个 Steiner 点上检查 balancing+collapsing，在每个终端上检查 collapsing。

    这只说明每个星形邻域都是其端点的 SMT，是整棵树为 SMT 的必要条件，不是充分条件。

    Raises:
        DegenerateTopologyError: 树中存在零长度边 (需要调用方先收缩)。
    """
    exponent = as_exponent(p if p is not None else tree.p)
    coords = tree.node_coords()
    topology = tree.topology
    for u, v in topology.edges:
        if np.all(coords[u] == coords[v]):
            raise DegenerateTopologyError(f"边 ({u}, {v}) 长度为零，请先收缩")

    reports: list[tuple[int, CertificateReport]] = []
    for node in range(topology.node_count):
        neighbors = coords[list(topology.neighbors(node))]
        if topology.is_terminal(node):
            report = certify_vertex(coords[node], neighbors, exponent, tol, max_subsets)
        else:
            report = certify_steiner_point(coords[node], neighbors, exponent, tol, max_subsets)
        reports.append((node, report))
    return reports


def tree_certificate(tree: SteinerTree, reports: list[tuple[int, CertificateReport]], tol: float) -> TreeCertificate:
    """把 certify_tree 的逐节点结果汇总为可保存的摘要。"""
    nodes = [
        NodeVerdict(node=node, kind="terminal" if tree.topology.is_terminal(node) else "steiner", report=report)
        for node, report in reports
    ]
    all_certified = all(report.certified for _, report in reports)
    return TreeCertificate(
        verdict=Verdict.CERTIFIED if all_certified else Verdict.REFUTED,
        tolerance=tol,
        nodes=nodes,
    )
