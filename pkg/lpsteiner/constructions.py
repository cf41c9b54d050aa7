# lpsteiner/constructions.py

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import bisect

from . import config
from .certificates import UnitFamily, check_balancing, check_collapsing
from .degree_bounds import _log_g
from .errors import InvalidInputError, PreconditionError
from .lp_geometry import LpExponent, _lp_norm, norming_functional
from .schemas import CertificateReport, ConstructionKind, InstanceFile, Verdict

logger = logging.getLogger(__name__)

# 构造族的单位范数检查比通用检查更严
UNIT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Construction:
    """
    一个显式的对偶单位向量族，附带它应当满足的条件。

    claims 记录预期结果，例如 {"balancing": True, "collapsing": False}；
    custom 族没有预期。
    """
    family: UnitFamily
    kind: ConstructionKind
    q: float
    claims: dict[str, bool] = field(default_factory=dict)

    @property
    def d(self) -> int:
        return self.family.d

    @property
    def exponent(self) -> LpExponent:
        """星形实例所在原空间的指数，p = q*。"""
        return self.family.exponent


class StarInstance(NamedTuple):
    center: NDArray[np.float64]
    terminals: NDArray[np.float64]
    exponent: LpExponent


def four_point_config(q: float) -> Construction:
    """
    ℓ_q³ 中的四个向量 3^{-1/q}·{(1,1,1), (1,-1,-1), (-1,1,-1), (-1,-1,1)}。
    总满足 balancing；collapsing 当且仅当 q <= log3/log2 (两两之和范数为 2·3^{-1/q})。
    """
    signs = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    family = UnitFamily.in_lq(3.0 ** (-1.0 / q) * signs, q, tol=UNIT_TOLERANCE)
    return Construction(
        family=family,
        kind=ConstructionKind.FOUR_POINT,
        q=q,
        claims={"balancing": True, "collapsing": q <= math.log(3) / math.log(2)},
    )


def collapsing_holds_simplex(d: int, q: float, tol: float = config.DEFAULT_TOLERANCE) -> bool:
    """
    单纯形族的 collapsing 闭式判据: 对 2 <= k <= d/2，(g(k,d,q)/g(1,d,q))^{1/q} <= 1 + tol。
    k 个向量之和的范数只依赖 k，且 g 关于 k <-> d-k 对称，所以只需检查一半。
    """
    if d < 3:
        raise InvalidInputError(f"单纯形构造要求 d >= 3，收到 {d}")
    log_g1 = _log_g(1, d, q)
    return all(
        math.exp((_log_g(k, d, q) - log_g1) / q) <= 1.0 + tol
        for k in range(2, d // 2 + 1)
    )


def simplex_config(d: int, q: float) -> Construction:
    """
    x_i 第 i 个坐标为 d-1，其余为 -1，再在 ℓ_q 中归一化。
    ‖x_i‖_q^q = (d-1)^q + d - 1 = g(1,d,q)。
    """
    if d < 3:
        raise InvalidInputError(f"单纯形构造要求 d >= 3，收到 {d}")
    if q <= 1.0:
        raise InvalidInputError(f"单纯形构造要求 q > 1，收到 {q}")
    raw = d * np.eye(d) - 1.0
    family = UnitFamily.in_lq(raw / _lp_norm(raw, q)[:, None], q, tol=UNIT_TOLERANCE)
    return Construction(
        family=family,
        kind=ConstructionKind.SIMPLEX,
        q=q,
        claims={"balancing": True, "collapsing": collapsing_holds_simplex(d, q)},
    )


def _unit_direction(theta: float, q: float) -> NDArray[np.float64]:
    v = np.array([math.cos(theta), math.sin(theta)])
    return v / _lp_norm(v, q)


def triangle_config(q: float) -> Construction:
    """
    ℓ_q² 中满足 ‖x - y‖_q = 1 的单位向量 x, y 给出的三元族 {x, -y, y - x}。
    三个向量和为零，任意两个之和的范数都是 1，因此任何光滑空间中都有度 3 的 Steiner 点。
    """
    if q <= 1.0:
        raise InvalidInputError(f"三角构造要求 q > 1，收到 {q}")
    x = np.array([1.0, 0.0])

    def gap(theta: float) -> float:
        return float(_lp_norm(x - _unit_direction(theta, q), q)) - 1.0

    # θ → 0 时 gap → -1，θ = π 时 gap = 1
    theta = bisect(gap, 1e-9, math.pi, xtol=config.ROOT_TOLERANCE)
    y = _unit_direction(theta, q)
    family = UnitFamily.in_lq(np.vstack([x, -y, y - x]), q, tol=1e-9)
    logger.debug("[Constructions] triangle q=%g: angle %.12f", q, theta)
    return Construction(
        family=family,
        kind=ConstructionKind.TRIANGLE,
        q=q,
        claims={"balancing": True, "collapsing": True},
    )


def custom_config(vectors: ArrayLike, q: float, tol: float = config.DEFAULT_TOLERANCE) -> Construction:
    return Construction(family=UnitFamily.in_lq(vectors, q, tol=tol), kind=ConstructionKind.CUSTOM, q=q)


def certify_construction(c: Construction, tol: float = config.DEFAULT_TOLERANCE,
                         max_subsets: int = config.MAX_SUBSETS) -> CertificateReport:
    """族的 balancing 和 collapsing 结果，verdict 只由 collapsing 决定。"""
    return check_collapsing(c.family, tol, max_subsets)


def make_star_instance(c: Construction, d: Optional[int] = None,
                       tol: float = config.DEFAULT_TOLERANCE,
                       max_subsets: int = config.MAX_SUBSETS) -> StarInstance:
    """
    把 collapsing 族提升为 ℓ_{q*} 中的星形实例: 中心为原点，终端 a_i 是 x_i 在 ℓ_q 中的范数泛函，
    于是 a_i 的 ℓ_{q*} 范数泛函恰好是 x_i。终端到中心的距离均为 1。

    族满足 balancing 时原点是 Steiner 点，否则原点作为终端加入仍然得到 SMT 的星形部分。
    d 大于族的维度时用零补齐坐标。

    Raises:
        PreconditionError: 族不满足 collapsing。
    """
    report = check_collapsing(c.family, tol, max_subsets)
    if report.verdict is not Verdict.CERTIFIED:
        raise PreconditionError(
            f"{c.kind.value} 族 (q={c.q:g}) 不满足 collapsing: 子集 {report.worst_subset} "
            f"的范数为 {report.worst_subset_norm:.12g}"
        )
    dim = c.d if d is None else d
    if dim < c.d:
        raise InvalidInputError(f"目标维度 {dim} 小于族的维度 {c.d}")

    terminals = norming_functional(c.family.vectors, LpExponent(c.q))
    if dim > c.d:
        terminals = np.hstack([terminals, np.zeros((c.family.m, dim - c.d))])
    logger.info("[Constructions] %s q=%g -> %d terminals in l_%g^%d", c.kind.value, c.q,
                c.family.m, c.exponent.p, dim)
    return StarInstance(center=np.zeros(dim), terminals=terminals, exponent=c.exponent)


def construction_instance_file(c: Construction, d: Optional[int] = None,
                               tol: float = config.DEFAULT_TOLERANCE) -> InstanceFile:
    star = make_star_instance(c, d, tol)
    return InstanceFile(
        p=star.exponent.p,
        points=star.terminals.tolist(),
        center=star.center.tolist(),
    )


def check_claims(c: Construction, tol: float = config.DEFAULT_TOLERANCE,
                 max_subsets: int = config.MAX_SUBSETS) -> dict[str, bool]:
    """返回与 claims 不一致的条件 (空字典表示全部符合)。"""
    observed = {
        "balancing": check_balancing(c.family, tol).certified,
        "collapsing": check_collapsing(c.family, tol, max_subsets).certified,
    }
    return {key: observed[key] for key, expected in c.claims.items() if observed[key] != expected}
