# lpsteiner/lp_geometry.py

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InvalidInputError, SingularInputError

# ℓ_p^d 中的点与 ℓ_q^d 中的对偶向量都用一维 float64 数组表示。
Point = NDArray[np.float64]
DualVector = NDArray[np.float64]


@dataclass(frozen=True)
class LpExponent:
    """
    光滑指数 1 < p < ∞ 及其对偶指数 q = p/(p-1)。
    """
    p: float
    q: float = field(init=False)

    def __post_init__(self):
        p = float(self.p)
        if not math.isfinite(p) or p <= 1.0:
            raise InvalidInputError(f"指数 p 必须满足 1 < p < inf，收到 {self.p!r}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", p / (p - 1.0))

    @classmethod
    def from_q(cls, q: float) -> "LpExponent":
        """按对偶指数构造，保留调用方给出的 q 的精确值。"""
        q = float(q)
        if not math.isfinite(q) or q <= 1.0:
            raise InvalidInputError(f"对偶指数 q 必须满足 1 < q < inf，收到 {q!r}")
        exponent = cls(q / (q - 1.0))
        object.__setattr__(exponent, "q", q)
        return exponent

    def dual(self) -> "LpExponent":
        return LpExponent.from_q(self.p)

    @property
    def q_minus_one(self) -> float:
        """q - 1 = 1/(p-1)。p 很大时 q 会舍入成 1.0，这里仍保留相对精度。"""
        return 1.0 / (self.p - 1.0)


def as_exponent(p: "LpExponent | float") -> LpExponent:
    return p if isinstance(p, LpExponent) else LpExponent(p)


def as_vector(x: ArrayLike, name: str = "x") -> NDArray[np.float64]:
    """转换为有限的一维 float64 数组，d >= 1。"""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.shape[0] == 0:
        raise InvalidInputError(f"{name} 必须是非空的一维坐标列表，收到形状 {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} 含有非有限坐标: {arr.tolist()}")
    return arr


def as_matrix(rows: ArrayLike, name: str = "points") -> NDArray[np.float64]:
    """转换为 (m, d) 的有限 float64 矩阵。"""
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise InvalidInputError(f"{name} 必须是等长的非空坐标行，收到形状 {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} 含有非有限坐标")
    return arr


def _lp_norm(arr: NDArray[np.float64], p: float) -> NDArray[np.float64]:
    # 先提出 max|x_i|，避免大 p 时溢出
    a = np.abs(arr)
    scale = a.max(axis=-1, keepdims=True)
    safe = np.where(scale > 0, scale, 1.0)
    return scale[..., 0] * np.sum((a / safe) ** p, axis=-1) ** (1.0 / p)


def lp_norm(x: ArrayLike, p: "LpExponent | float") -> "float | NDArray[np.float64]":
    """
    (Σ|x_i|^p)^{1/p}。传入多行时沿最后一个轴逐行计算。
    """
    exponent = as_exponent(p)
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] == 0:
        raise InvalidInputError(f"无法对形状 {arr.shape} 计算范数")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("输入含有非有限坐标")
    value = _lp_norm(arr, exponent.p)
    return float(value) if value.ndim == 0 else value


def dual_norm(f: ArrayLike, p: "LpExponent | float") -> "float | NDArray[np.float64]":
    """对偶空间 ℓ_q 中的范数。"""
    return lp_norm(f, as_exponent(p).q)


def pairing(f: ArrayLike, x: ArrayLike) -> float:
    """<f, x> = Σ f_i x_i。"""
    f_arr = as_vector(f, "f")
    x_arr = as_vector(x, "x")
    if f_arr.shape != x_arr.shape:
        raise InvalidInputError(f"维度不一致: {f_arr.shape[0]} != {x_arr.shape[0]}")
    return float(np.dot(f_arr, x_arr))


def norming_functional(x: ArrayLike, p: "LpExponent | float") -> DualVector:
    """
    x 在 ℓ_p 中唯一的范数泛函 x*，坐标为 |x_i|^{p-1} sgn(x_i) / ‖x‖_p^{p-1}。
    满足 <x*, x> = ‖x‖_p 且 ‖x*‖_q = 1。传入 (m, d) 矩阵时逐行计算。

    Raises:
        SingularInputError: x (或某一行) 为零向量。
    """
    exponent = as_exponent(p)
    arr = np.asarray(x, dtype=float)
    if arr.ndim not in (1, 2) or arr.shape[-1] == 0:
        raise InvalidInputError(f"无法对形状 {arr.shape} 计算范数泛函")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("输入含有非有限坐标")
    norms = _lp_norm(arr, exponent.p)
    if np.any(norms == 0.0):
        raise SingularInputError("零向量没有唯一的范数泛函")
    unit = arr / np.expand_dims(norms, -1)
    # sgn(0)·0^{p-1} 取 0
    return np.sign(unit) * np.abs(unit) ** (exponent.p - 1.0)


def directional_derivative(x: ArrayLike, h: ArrayLike, p: "LpExponent | float") -> float:
    """lim_{t→0} (‖x+th‖ - ‖x‖)/t = <x*, h>。"""
    x_arr = as_vector(x, "x")
    h_arr = as_vector(h, "h")
    return pairing(norming_functional(x_arr, p), h_arr)


def finite_difference_derivative(x: ArrayLike, h: ArrayLike, p: "LpExponent | float",
                                 step: float = 1e-6) -> float:
    """中心差分，用于校验 norming_functional 的闭式解。"""
    x_arr = as_vector(x, "x")
    h_arr = as_vector(h, "h")
    if x_arr.shape != h_arr.shape:
        raise InvalidInputError(f"维度不一致: {x_arr.shape[0]} != {h_arr.shape[0]}")
    forward = lp_norm(x_arr + step * h_arr, p)
    backward = lp_norm(x_arr - step * h_arr, p)
    return (forward - backward) / (2.0 * step)


def smoothed_norm(z: ArrayLike, p: "LpExponent | float",
                  eps: float) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """
    逐行计算平滑范数 ‖z‖_{p,ε} = (Σ(z_i²+ε²)^{p/2})^{1/p} 及其梯度。

    ε = 0 时退化为精确范数，梯度为范数泛函 (零行的梯度取 0)。
    """
    exponent = as_exponent(p)
    rows = np.atleast_2d(np.asarray(z, dtype=float))
    if eps == 0.0:
        values = _lp_norm(rows, exponent.p)
        grads = np.zeros_like(rows)
        nonzero = values > 0
        if np.any(nonzero):
            grads[nonzero] = norming_functional(rows[nonzero], exponent)
        return values, grads

    squared = rows * rows + eps * eps
    values = np.sum(squared ** (exponent.p / 2.0), axis=1) ** (1.0 / exponent.p)
    grads = (values[:, None] ** (1.0 - exponent.p)) * squared ** (exponent.p / 2.0 - 1.0) * rows
    return values, grads
