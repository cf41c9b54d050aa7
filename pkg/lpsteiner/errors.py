# lpsteiner/errors.py

from typing import Any


class SteinerError(Exception):
    """所有 lpsteiner 错误的基类。"""


class InvalidInputError(SteinerError, ValueError):
    """非有限坐标、维度不一致、参数越界、文件格式错误。"""


class SingularInputError(InvalidInputError):
    """在原点处请求范数泛函，或邻点与中心重合。"""


class ResourceLimitError(SteinerError):
    """子集枚举或拓扑枚举超出允许的规模。"""


class DegenerateTopologyError(SteinerError):
    """拓扑结构非法，或树中存在零长度边。"""


class PreconditionError(SteinerError):
    """调用前提不满足 (例如对不满足 collapsing 条件的族构造星形实例)。"""


class NumericError(SteinerError, ArithmeticError):
    """求根区间没有变号等数值失败。"""


class ConvergenceError(NumericError):
    """
    迭代达到上限仍未收敛。携带目前为止最好的迭代点，调用方可以自行决定是否使用。
    """

    def __init__(self, message: str, best_iterate: Any = None, length: float | None = None):
        super().__init__(message)
        self.best_iterate = best_iterate
        self.length = length
