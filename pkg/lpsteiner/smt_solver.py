# lpsteiner/smt_solver.py

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Optional

import networkx as nx
import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import minimize
from scipy.sparse.csgraph import minimum_spanning_tree
from scipy.spatial.distance import cdist

from . import config
from .certificates import certify_tree, tree_certificate
from .degree_bounds import degree_bound
from .errors import ConvergenceError, InvalidInputError
from .lp_geometry import LpExponent, _lp_norm, as_exponent, as_matrix, norming_functional, smoothed_norm
from .topologies import SteinerTree, Topology, enumerate_topologies

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverOptions:
    tol: float = config.DEFAULT_TOLERANCE
    certify_tol: float = config.CERTIFY_TOLERANCE
    tie_tol: float = config.TIE_TOLERANCE
    smoothing: tuple[float, ...] = config.SMOOTHING_SCHEDULE
    max_iterations: int = config.MAX_ITERATIONS
    contraction_ratio: float = config.CONTRACTION_RATIO
    snap_ratio: float = config.SNAP_RATIO
    max_subsets: int = config.MAX_SUBSETS
    workers: Optional[int] = config.SOLVER_WORKERS


class FermatPoint(NamedTuple):
    point: NDArray[np.float64]
    absorbed: Optional[int]
    residual: float


def _distances(points: NDArray[np.float64], exponent: LpExponent) -> NDArray[np.float64]:
    return cdist(points, points, metric="minkowski", p=exponent.p)


def diameter(points: ArrayLike, p: "LpExponent | float") -> float:
    rows = as_matrix(points)
    return float(_distances(rows, as_exponent(p)).max())


def mst_length(points: ArrayLike, p: "LpExponent | float") -> float:
    """只用终端作为节点的最小生成树长度，SMT 长度的上界。"""
    rows = as_matrix(points)
    return float(minimum_spanning_tree(_distances(rows, as_exponent(p))).sum())


def tree_length(tree: SteinerTree) -> float:
    return tree.recompute_length()


# =================================================================
#  Fermat point
# =================================================================

def _absorption_norm(rows: NDArray[np.float64], j: int, exponent: LpExponent) -> tuple[float, int]:
    diffs = rows - rows[j]
    nonzero = np.any(diffs != 0.0, axis=1)
    multiplicity = int(rows.shape[0] - nonzero.sum())
    if not np.any(nonzero):
        return 0.0, multiplicity
    total = norming_functional(diffs[nonzero], exponent).sum(axis=0)
    return float(_lp_norm(total, exponent.q)), multiplicity


def fermat_point(points: ArrayLike, p: "LpExponent | float",
                 tol: float = config.DEFAULT_TOLERANCE) -> FermatPoint:
    """
    Σ‖a_i - x‖_p 的极小点。

    若某个 a_j 满足 ‖Σ_{a_i≠a_j} (a_i - a_j)*‖_q <= 重数 + tol，则极小点就是 a_j (absorbed = j)；
    否则在光滑区域内用 L-BFGS 求解，residual 为 {(a_i - x)*} 的 balancing 残差。
    两点时返回中点。
    """
    rows = as_matrix(points)
    exponent = as_exponent(p)
    n = rows.shape[0]
    if n == 1:
        return FermatPoint(rows[0].copy(), 0, 0.0)
    if n == 2 and np.any(rows[0] != rows[1]):
        return FermatPoint(rows.mean(axis=0), None, 0.0)

    for j in range(n):
        norm, multiplicity = _absorption_norm(rows, j, exponent)
        if norm <= multiplicity + tol:
            logger.debug("[Fermat] absorbed at terminal %d (dual norm %.3g)", j, norm)
            return FermatPoint(rows[j].copy(), j, norm)

    scale = diameter(rows, exponent)
    origin = rows.mean(axis=0)
    scaled = (rows - origin) / scale

    def objective(x: NDArray[np.float64]) -> tuple[float, NDArray[np.float64]]:
        values, grads = smoothed_norm(x - scaled, exponent, 0.0)
        return float(values.sum()), grads.sum(axis=0)

    start = np.zeros(rows.shape[1])
    if np.any(np.all(scaled == start, axis=1)):
        start = start + 1e-3
    result = minimize(objective, start, jac=True, method="L-BFGS-B",
                      options={"maxiter": config.MAX_ITERATIONS, "gtol": tol, "ftol": 1e-15})
    point = result.x * scale + origin
    diffs = rows - point
    residual = float(_lp_norm(norming_functional(diffs, exponent).sum(axis=0), exponent.q))
    return FermatPoint(point, None, residual)


# =================================================================
#  Single-topology optimisation
# =================================================================

def _laplacian_start(topology: Topology, terminals: NDArray[np.float64]) -> NDArray[np.float64]:
    """每个 Steiner 点取其邻点的平均位置 (图 Laplacian 方程的解)。"""
    n = topology.terminal_count
    laplacian = nx.laplacian_matrix(topology.graph, nodelist=range(topology.node_count)).toarray()
    return np.linalg.solve(laplacian[n:, n:], -laplacian[n:, :n] @ terminals)


def _make_objective(topology: Topology, terminals: NDArray[np.float64], exponent: LpExponent, eps: float):
    n, d = terminals.shape
    edges = np.array(topology.edges, dtype=int)
    u, v = edges[:, 0], edges[:, 1]

    def objective(flat: NDArray[np.float64]) -> tuple[float, NDArray[np.float64]]:
        coords = np.vstack([terminals, flat.reshape(-1, d)])
        values, grads = smoothed_norm(coords[u] - coords[v], exponent, eps)
        node_grads = np.zeros_like(coords)
        np.add.at(node_grads, u, grads)
        np.add.at(node_grads, v, -grads)
        return float(values.sum()), node_grads[n:].ravel()

    return objective


def _descend(topology: Topology, terminals: NDArray[np.float64], exponent: LpExponent,
             start: NDArray[np.float64], eps: float, options: SolverOptions) -> NDArray[np.float64]:
    objective = _make_objective(topology, terminals, exponent, eps)
    result = minimize(
        objective, start.ravel(), jac=True, method="L-BFGS-B",
        options={
            "maxiter": options.max_iterations,
            "maxfun": 4 * options.max_iterations,
            "gtol": options.tol,
            "ftol": 1e-15,
        },
    )
    steiner = result.x.reshape(start.shape)
    if result.nit >= options.max_iterations:
        raise ConvergenceError(
            f"ε={eps:g} 阶段在 {options.max_iterations} 次迭代后仍未收敛: {result.message}",
            best_iterate=steiner,
            length=float(result.fun),
        )
    logger.debug("[Solver] eps=%g: length %.12f after %d iterations", eps, result.fun, result.nit)
    return steiner


def _contract(topology: Topology, coords: NDArray[np.float64], exponent: LpExponent,
              threshold: float) -> Optional[tuple[Topology, NDArray[np.float64]]]:
    """
    收缩长度小于 threshold 的边: Steiner 点并入相邻终端，相邻 Steiner 点彼此合并，两个终端之间的边不收缩。
    没有可收缩的边时返回 None。
    """
    n = topology.terminal_count
    edges = np.array(topology.edges, dtype=int)
    lengths = _lp_norm(coords[edges[:, 0]] - coords[edges[:, 1]], exponent.p)
    short = [(float(lengths[i]), int(u), int(v)) for i, (u, v) in enumerate(edges) if lengths[i] < threshold]
    if not short:
        return None

    parent = list(range(topology.node_count))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    merged = 0
    for _, u, v in sorted(short):
        ru, rv = find(u), find(v)
        if ru == rv or (ru < n and rv < n):
            continue
        # 代表元为终端 (若有) 或较小的 Steiner 编号
        keep, drop = (ru, rv) if ru < n or (rv >= n and ru < rv) else (rv, ru)
        parent[drop] = keep
        merged += 1
    if merged == 0:
        return None

    roots = sorted({find(x) for x in range(n, topology.node_count) if find(x) >= n})
    relabel = {root: n + i for i, root in enumerate(roots)}
    label = lambda x: find(x) if find(x) < n else relabel[find(x)]  # noqa: E731
    new_edges = {tuple(sorted((label(u), label(v)))) for u, v in topology.edges if label(u) != label(v)}
    contracted = Topology(n, len(roots), tuple(new_edges))
    logger.info("[Solver] contracted %d short edge(s): %d -> %d Steiner points", merged,
                topology.steiner_count, contracted.steiner_count)
    return contracted, coords[roots] if roots else np.zeros((0, coords.shape[1]))


def _total_length(edges: NDArray[np.int_], coords: NDArray[np.float64], exponent: LpExponent) -> float:
    return float(_lp_norm(coords[edges[:, 0]] - coords[edges[:, 1]], exponent.p).sum())


def _snap(topology: Topology, coords: NDArray[np.float64], exponent: LpExponent,
          options: SolverOptions) -> NDArray[np.float64]:
    """
    精确目标在零长度边处不可微，下降法只能停在它附近。
    对短于 snap_ratio 的边尝试把 Steiner 端点移到另一端 (两端都是 Steiner 点时移到中点)，
    总长度不增加 (容差 tie_tol) 就接受，随后由 _contract 收缩。
    """
    n = topology.terminal_count
    edges = np.array(topology.edges, dtype=int)
    lengths = _lp_norm(coords[edges[:, 0]] - coords[edges[:, 1]], exponent.p)
    current = float(lengths.sum())
    for i in np.argsort(lengths, kind="stable"):
        if lengths[i] >= options.snap_ratio:
            break
        u, v = int(edges[i, 0]), int(edges[i, 1])
        if u < n and v < n:
            continue
        trial = coords.copy()
        if u < n:
            trial[v] = trial[u]
        elif v < n:
            trial[u] = trial[v]
        else:
            trial[u] = trial[v] = (trial[u] + trial[v]) / 2.0
        length = _total_length(edges, trial, exponent)
        if length <= current + options.tie_tol:
            logger.debug("[Solver] snapped edge (%d, %d): %.3e -> %.3e", u, v, current, length)
            coords, current = trial, length
    return coords


def _optimize_scaled(topology: Topology, terminals: NDArray[np.float64], exponent: LpExponent,
                     start: NDArray[np.float64], options: SolverOptions) -> tuple[Topology, NDArray[np.float64]]:
    if topology.steiner_count == 0:
        return topology, np.zeros((0, terminals.shape[1]))

    stages: list[tuple[float, NDArray[np.float64]]] = []
    steiner = start
    for eps in options.smoothing:
        steiner = _descend(topology, terminals, exponent, steiner, eps, options)
        stages.append((eps, steiner))

    # 最后两个阶段做 ε → 0 的线性外推
    if len(stages) >= 2:
        (eps_a, x_a), (eps_b, x_b) = stages[-2], stages[-1]
        steiner = x_b - (x_a - x_b) * eps_b / (eps_a - eps_b)

    threshold = options.contraction_ratio
    contraction = _contract(topology, np.vstack([terminals, steiner]), exponent, threshold)
    if contraction is not None:
        return _optimize_scaled(contraction[0], terminals, exponent, contraction[1], options)

    steiner = _descend(topology, terminals, exponent, steiner, 0.0, options)
    coords = _snap(topology, np.vstack([terminals, steiner]), exponent, options)
    contraction = _contract(topology, coords, exponent, threshold)
    if contraction is not None:
        return _optimize_scaled(contraction[0], terminals, exponent, contraction[1], options)
    return topology, coords[topology.terminal_count:]


def _embed(topology: Topology, terminals: NDArray[np.float64], steiner: NDArray[np.float64],
           exponent: LpExponent) -> SteinerTree:
    tree = SteinerTree(topology, terminals, steiner, exponent, 0.0)
    return SteinerTree(topology, terminals, steiner, exponent, tree.recompute_length())


def optimize_topology(topology: Topology, terminals: ArrayLike, p: "LpExponent | float",
                      options: Optional[SolverOptions] = None) -> SteinerTree:
    """
    固定拓扑下最小化 Σ_{边} ‖x - y‖_p。

    在按直径缩放后的坐标中依次求解 ε ∈ options.smoothing 的平滑问题，外推到 ε = 0，
    再对精确目标做一次下降。长度小于 contraction_ratio·直径 的边被收缩，
    返回的树使用收缩后的拓扑。没有 Steiner 点时不做优化。

    Raises:
        ConvergenceError: 某个阶段达到迭代上限，携带当时的最好解。
    """
    options = options or SolverOptions()
    rows = as_matrix(terminals, "terminals")
    exponent = as_exponent(p)
    if rows.shape[0] != topology.terminal_count:
        raise InvalidInputError(f"拓扑有 {topology.terminal_count} 个终端，收到 {rows.shape[0]} 个坐标")
    if topology.steiner_count == 0:
        return _embed(topology, rows, np.zeros((0, rows.shape[1])), exponent)

    scale = diameter(rows, exponent)
    if scale == 0.0:
        raise InvalidInputError("所有终端重合")
    origin = rows.mean(axis=0)
    scaled = (rows - origin) / scale

    try:
        final_topology, steiner = _optimize_scaled(
            topology, scaled, exponent, _laplacian_start(topology, scaled), options
        )
    except ConvergenceError as e:
        if e.best_iterate is not None:
            e.best_iterate = e.best_iterate * scale + origin
        if e.length is not None:
            e.length *= scale
        raise

    return _embed(final_topology, rows, steiner * scale + origin, exponent)


# =================================================================
#  Full solver
# =================================================================

_Job = tuple[int, Topology, NDArray[np.float64], LpExponent, SolverOptions]


def _optimize_job(job: _Job) -> tuple[int, Optional[SteinerTree], str]:
    index, topology, rows, exponent, options = job
    try:
        return index, optimize_topology(topology, rows, exponent, options), ""
    except ConvergenceError as e:
        return index, None, str(e)


def _optimize_all(topologies: list[Topology], rows: NDArray[np.float64], exponent: LpExponent,
                  options: SolverOptions) -> list[tuple[int, Optional[SteinerTree], str]]:
    """
    逐个拓扑优化。拓扑数达到 PARALLEL_MIN_TOPOLOGIES 且 workers != 1 时交给进程池；
    结果总是按枚举顺序返回，之后的并列规则与串行时相同。
    """
    jobs = [(index, topology, rows, exponent, options) for index, topology in enumerate(topologies)]
    if options.workers == 1 or len(jobs) < config.PARALLEL_MIN_TOPOLOGIES:
        return [_optimize_job(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=options.workers) as executor:
        logger.info("[Solver] optimizing %d topologies in a process pool (workers=%s)", len(jobs), options.workers)
        return list(executor.map(_optimize_job, jobs, chunksize=4))


def _degree_cap(exponent: LpExponent, d: int) -> int:
    # ℓ_p^1 中所有范数相同，SMT 就是一条路径
    return degree_bound(exponent.p, d).upper if d >= 2 else 2


def solve_smt(terminals: ArrayLike, p: "LpExponent | float",
              options: Optional[SolverOptions] = None) -> SteinerTree:
    """
    2 <= n <= 7 个终端的 Steiner 最小树。

    枚举度数不超过 degree_bound(p, d).upper 的全部拓扑，逐个优化后取最短者；
    长度相差不超过 tie_tol·直径 时取 Steiner 点更少者，再按枚举顺序。
    结果附带 certify_tree 的逐节点证书，被否定的节点只记录警告。
    """
    options = options or SolverOptions()
    rows = as_matrix(terminals, "terminals")
    exponent = as_exponent(p)
    n, d = rows.shape
    if n < 2:
        raise InvalidInputError(f"至少需要 2 个终端，收到 {n}")
    if len({tuple(row) for row in rows.tolist()}) != n:
        raise InvalidInputError("终端坐标必须互不相同")

    if n == 2:
        best = optimize_topology(Topology(2, 0, ((0, 1),)), rows, exponent, options)
    else:
        cap = _degree_cap(exponent, d)
        topologies = enumerate_topologies(n, cap, cap)
        scale = diameter(rows, exponent)
        candidates: list[tuple[float, int, int, SteinerTree]] = []
        for index, tree, failure in _optimize_all(topologies, rows, exponent, options):
            if tree is None:
                logger.warning("[Solver] topology %d skipped: %s", index, failure)
                continue
            logger.debug("[Solver] topology %d %s: length %.12f", index, topologies[index].edges, tree.length)
            candidates.append((tree.length, tree.topology.steiner_count, index, tree))
        if not candidates:
            raise ConvergenceError(f"{len(topologies)} 个拓扑全部未收敛")
        shortest = min(c[0] for c in candidates)
        ties = [c for c in candidates if c[0] <= shortest + options.tie_tol * scale]
        _, _, index, best = min(ties, key=lambda c: (c[1], c[2]))
        logger.info("[Solver] n=%d p=%g: %d topologies, best #%d length %.12f", n, exponent.p,
                    len(topologies), index, best.length)

    reports = certify_tree(best, tol=options.certify_tol, max_subsets=options.max_subsets)
    certificate = tree_certificate(best, reports, options.certify_tol)
    if certificate.refuted_nodes:
        logger.warning("[Solver] certificate refuted at nodes %s (tol %g)", certificate.refuted_nodes,
                       options.certify_tol)
    return best.with_certificate(certificate)
