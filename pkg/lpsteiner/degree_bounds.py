# lpsteiner/degree_bounds.py

import logging
import math
from functools import lru_cache

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import bisect
from scipy.special import gamma

from . import config
from .certificates import UnitFamily, max_subset_norm
from .errors import InvalidInputError, NumericError
from .lp_geometry import LpExponent, _lp_norm, as_vector
from .schemas import BoundMethod, BoundReport, FScan, KhinchinConstants, ThresholdRow

logger = logging.getLogger(__name__)

SQRT_PI = math.sqrt(math.pi)


# =================================================================
#  Khinchin constants
# =================================================================

def _gamma_branch(q: float) -> float:
    return math.sqrt(2.0) * (gamma((q + 1.0) / 2.0) / SQRT_PI) ** (1.0 / q)


@lru_cache(maxsize=1)
def compute_q0() -> float:
    """
    Γ((q+1)/2) = √π/2 在 (1, 2) 内的根 (约 1.8474)。
    q = 2 也满足该方程，所以区间右端点取 config.Q0_BRACKET[1] < 2。
    """
    low, high = config.Q0_BRACKET
    q0 = bisect(lambda q: gamma((q + 1.0) / 2.0) - SQRT_PI / 2.0, low, high, xtol=config.ROOT_TOLERANCE)
    logger.info("[Bounds] q0 = %.12f", q0)
    return float(q0)


def khinchin_constants(q: float) -> KhinchinConstants:
    """
    Khinchin 不等式的最佳常数 A_q, B_q。

    q >= 2: A_q = 1, B_q = √2 (Γ((q+1)/2)/√π)^{1/q};
    1 <= q <= 2: B_q = 1, q < q0 时 A_q = 2^{1/2-1/q}，否则与 B_q 同一公式。
    """
    if not math.isfinite(q) or q < 1.0:
        raise InvalidInputError(f"Khinchin 常数要求 q >= 1，收到 {q}")
    if q == 2.0:
        return KhinchinConstants(q=q, A_q=1.0, B_q=1.0)
    if q > 2.0:
        return KhinchinConstants(q=q, A_q=1.0, B_q=_gamma_branch(q))
    a_q = 2.0 ** (0.5 - 1.0 / q) if q < compute_q0() else _gamma_branch(q)
    return KhinchinConstants(q=q, A_q=a_q, B_q=1.0)


def rademacher_average(a: ArrayLike, q: float) -> float:
    """(2^{-n} Σ_ε |Σ ε_i a_i|^q)^{1/q}，对全部 2^n 个符号精确求平均。"""
    coeffs = as_vector(a, "a")
    n = coeffs.shape[0]
    if n > 20:
        raise InvalidInputError(f"精确的符号平均只支持 n <= 20，收到 n={n}")
    bits = (np.arange(1 << n)[:, None] >> np.arange(n)) & 1
    sums = (1 - 2 * bits) @ coeffs
    return float(np.mean(np.abs(sums) ** q) ** (1.0 / q))


# =================================================================
#  Twisting and the Rankin bound
# =================================================================

def pineq_gap(x: ArrayLike, y: ArrayLike, q: "float | ArrayLike") -> NDArray[np.float64]:
    """
    |x+y|^q - 2^{q-2}(|x|^{q/2} sgn x + |y|^{q/2} sgn y)^2，对 1 <= q <= 2 非负。
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    q = np.asarray(q, dtype=float)
    twisted = np.sign(x) * np.abs(x) ** (q / 2.0) + np.sign(y) * np.abs(y) ** (q / 2.0)
    return np.abs(x + y) ** q - 2.0 ** (q - 2.0) * twisted ** 2


def twist(x: ArrayLike, q: float) -> NDArray[np.float64]:
    """
    把 ℓ_q 单位向量逐坐标映射为 |x_n|^{q/2} sgn(x_n)，得到欧氏单位向量。
    """
    vec = as_vector(x, "x")
    if q < 1.0:
        raise InvalidInputError(f"twist 要求 q >= 1，收到 {q}")
    norm = float(_lp_norm(vec, q))
    if abs(norm - 1.0) > 1e-9:
        raise InvalidInputError(f"twist 要求 ℓ_{q:g} 单位向量，收到范数 {norm}")
    return np.sign(vec) * np.abs(vec) ** (q / 2.0)


def rankin_bound(q: float) -> int:
    """
    collapsing 族在 ℓ_q 中的基数上界 (1 < q <= 2)。

    扭转后两两内积 <= 2^{1-q} - 1 = -1/x，其中 x = 1/(1-2^{1-q})；
    Rankin 引理要求严格的 < -1/n，所以取最小的整数 n > x。
    """
    if not 1.0 < q <= 2.0:
        raise InvalidInputError(f"扭转不等式只在 1 < q <= 2 时成立，收到 q={q}")
    return _rankin_from_gap(q - 1.0)


def _rankin_from_gap(gap: float) -> int:
    # gap = q - 1；1 - 2^{-gap} 用 expm1 计算，gap 极小时不会变成 0
    x = -1.0 / math.expm1(-gap * math.log(2.0))
    return math.floor(x + config.STRICT_EPSILON) + 1


def khinchin_upper_bound(p: float) -> int:
    """
    p >= 2: floor(4/A_q^2)。q < q0 时等于 2^{3-2/p}，严格小于 8，所以至多为 7。
    1 < p < 2: floor(2^{p*})，指数超过 KHINCHIN_EXPONENT_CAP 时截断 (该界只参与 min(d+1, ·))。
    """
    exponent = LpExponent(p)
    if exponent.p >= 2.0:
        if exponent.q < compute_q0():
            value = 2.0 ** (3.0 - 2.0 / exponent.p)
            return min(7, math.floor(value + config.STRICT_EPSILON))
        value = 4.0 / khinchin_constants(exponent.q).A_q ** 2
    else:
        value = 2.0 ** min(exponent.q, config.KHINCHIN_EXPONENT_CAP)
    return math.floor(value + config.STRICT_EPSILON)


def threshold_p_values() -> tuple[float, float, float, float]:
    """上界平台的四个 p 端点: 3→4, 4→5, 5→6, 6→7。"""
    log2, log3, log4, log7, log8 = (math.log(v) for v in (2, 3, 4, 7, 8))
    return (
        log3 / (log3 - log2),
        (log8 - log3) / (log4 - log3),
        log4 / (log4 - log3),
        log4 / (log8 - log7),
    )


# =================================================================
#  Simplex family: g(k, d, q) and f(q)
# =================================================================

def g(k: int, d: int, q: float) -> float:
    """g(k,d,q) = k(d-k)^q + (d-k)k^q，即单纯形族中 k 个向量之和的 q 次范数幂。"""
    if d < 2 or not 1 <= k <= d - 1:
        raise InvalidInputError(f"g 要求 d >= 2 且 1 <= k <= d-1，收到 k={k}, d={d}")
    if q <= 1.0:
        raise InvalidInputError(f"g 要求 q > 1，收到 {q}")
    return k * (d - k) ** q + (d - k) * k ** q


def _log_g(k: int, d: int, q: float) -> float:
    # 大 q 时直接求 g 会溢出，比较大小用对数
    return float(np.logaddexp(math.log(k) + q * math.log(d - k), math.log(d - k) + q * math.log(k)))


def dominant_k(d: int, q: float) -> int:
    """2 <= k <= d/2 中使 g(k,d,q) 最大的 k (并列取最小)。"""
    if d < 4:
        raise InvalidInputError(f"dominant_k 要求 d >= 4，收到 {d}")
    return max(range(2, d // 2 + 1), key=lambda k: (_log_g(k, d, q), -k))


def solve_g_threshold(d: int) -> float:
    """
    g(2,d,q) = g(1,d,q) 的根 q*；q >= q* 时 g(2,d,q) <= g(1,d,q)。
    区间没有变号时向右加倍扩大，直到 config.G_THRESHOLD_MAX_UPPER。
    """
    if d < 4:
        raise InvalidInputError(f"solve_g_threshold 要求 d >= 4，收到 {d}")

    def gap(q: float) -> float:
        return _log_g(1, d, q) - _log_g(2, d, q)

    low, high = config.G_THRESHOLD_BRACKET
    while gap(high) <= 0.0:
        if high >= config.G_THRESHOLD_MAX_UPPER:
            raise NumericError(f"d={d}: 区间 [{low}, {high}] 内 g(2,d,q) - g(1,d,q) 没有变号")
        high *= 2.0
    if gap(low) >= 0.0:
        raise NumericError(f"d={d}: 区间左端点 q={low} 处已经满足 g(2,d,q) <= g(1,d,q)")
    root = float(bisect(gap, low, high, xtol=config.ROOT_TOLERANCE))
    logger.info("[Bounds] g-threshold d=%d: q* = %.10f", d, root)
    return root


def g_thresholds(ds: "range | list[int]" = range(4, 8)) -> dict[int, float]:
    return {d: solve_g_threshold(d) for d in ds}


def scan_f(q: float) -> FScan:
    """
    f(q) = max{d : 2(d-2)^q + (d-2)2^q <= (d-1)^q + d - 1}。
    直接扫描 d = 3 .. cap，不假设满足条件的 d 连续，并记录是否连续。
    """
    if not q > 2.0:
        raise InvalidInputError(f"f(q) 要求 q > 2，收到 {q}")
    cap = max(config.F_SCAN_MIN_CAP, math.ceil(4.0 * q))
    ds = np.arange(3, cap + 1)
    log_rest, log_two = np.log(ds - 2.0), math.log(2.0)
    # log g(2,d,q) 与 log g(1,d,q)，对全部 d 一次算出
    log_g2 = np.logaddexp(log_two + q * log_rest, log_rest + q * log_two)
    log_g1 = np.logaddexp(q * np.log(ds - 1.0), np.log(ds - 1.0))
    satisfying = ds[log_g2 <= log_g1 + config.STRICT_EPSILON].tolist()
    value = max(satisfying)
    contiguous = satisfying == list(range(3, value + 1))
    if not contiguous:
        logger.warning("[Bounds] f(%g): satisfying d are not contiguous: %s", q, satisfying)
    return FScan(q=q, value=value, satisfying=satisfying, contiguous=contiguous, cap=cap)


def f_lower(q: float) -> int:
    return scan_f(q).value


# =================================================================
#  1-summing bounds
# =================================================================

def summing_bound(d: int) -> tuple[float, float]:
    """2π₁ 界能达到的范围 [2√d, 2d] (√d <= π₁ <= d)。"""
    if d < 1:
        raise InvalidInputError(f"summing_bound 要求 d >= 1，收到 {d}")
    return 2.0 * math.sqrt(d), 2.0 * d


def pi1_lower_estimate(fam: UnitFamily, max_subsets: int = config.MAX_SUBSETS) -> float:
    """
    Σ‖x_i‖_q / max_ε ‖Σ ε_i x_i‖_q，对任意族都是 π₁(ℓ_q^d) 的下界。
    Σ ε_i x_i = 2 Σ_{i∈J} x_i - Σ_i x_i，所以符号的最大化就是子集枚举。
    """
    total = fam.vectors.sum(axis=0)
    numerator = float(_lp_norm(fam.vectors, fam.q).sum())
    denominator, _ = max_subset_norm(fam.vectors, fam.q, max_subsets, transform=lambda sums: 2.0 * sums - total)
    return numerator / denominator


# =================================================================
#  Dispatcher
# =================================================================

def degree_bound(p: float, d: int) -> BoundReport:
    """
    ℓ_p^d 中 SMT 顶点 / Steiner 点最大度数的上下界，并标注产生每个界的方法。
    """
    exponent = LpExponent(p)
    if d < 2:
        raise InvalidInputError(f"degree_bound 要求 d >= 2，收到 {d}")
    q = exponent.q

    uppers = [(d + 1, BoundMethod.SMOOTH)]
    if exponent.p >= 2.0:
        uppers.append((_rankin_from_gap(exponent.q_minus_one), BoundMethod.RANKIN))
    uppers.append((khinchin_upper_bound(exponent.p), BoundMethod.KHINCHIN))
    upper, upper_method = min(uppers, key=lambda item: item[0])

    lower, lower_method = 3, BoundMethod.SMOOTH
    if d >= 3:
        if exponent.p >= threshold_p_values()[0] - config.STRICT_EPSILON:
            lower, lower_method = 4, BoundMethod.CONSTRUCTION
        elif exponent.p < 2.0:
            simplex = min(d, f_lower(q))
            if simplex > lower:
                lower, lower_method = simplex, BoundMethod.SIMPLEX

    summing_lower, summing_upper = summing_bound(d)
    report = BoundReport(
        p=exponent.p, q=q, d=d,
        lower=lower, upper=upper,
        lower_method=lower_method, upper_method=upper_method,
        summing_lower=summing_lower, summing_upper=summing_upper,
    )
    logger.info("[Bounds] p=%g d=%d: lower %d (%s), upper %d (%s)", exponent.p, d, lower,
                lower_method.value, upper, upper_method.value)
    return report


def threshold_table() -> list[ThresholdRow]:
    """cmd_thresholds 输出的九个常数。"""
    t1, t2, t3, t4 = threshold_p_values()
    rows = [
        ThresholdRow(label="p: upper 3 -> 4", value=t1, equation="log3/(log3-log2)"),
        ThresholdRow(label="p: upper 4 -> 5", value=t2, equation="(log8-log3)/(log4-log3)"),
        ThresholdRow(label="p: upper 5 -> 6", value=t3, equation="log4/(log4-log3)"),
        ThresholdRow(label="p: upper 6 -> 7", value=t4, equation="log4/(log8-log7)"),
        ThresholdRow(label="q0", value=compute_q0(), equation="Gamma((q+1)/2) = sqrt(pi)/2, 1<q<2"),
    ]
    for d, root in g_thresholds().items():
        rows.append(ThresholdRow(
            label=f"g-threshold d={d}", value=root,
            equation=f"g(2,{d},q) = g(1,{d},q)",
        ))
    return rows
