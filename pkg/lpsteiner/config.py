# lpsteiner/config.py

import logging
import os

from dotenv import load_dotenv

load_dotenv()

# --- 日志配置 ---
# 只影响诊断输出的详细程度，任何数值结果都不依赖环境变量。
LOG_LEVEL = os.getenv("LPSTEINER_LOG_LEVEL", default="WARNING").upper()
LOG_FORMAT = "[%(levelname)s] %(message)s"

# --- 证书检查配置 ---
# 所有证书检查的默认容差 (相对 1)。
DEFAULT_TOLERANCE = 1e-9
# 子集枚举的上限 (2^m 个子集)。
MAX_SUBSETS = 25
# 一次向量化处理的低位子集数量 (2^16 行)，用于限制内存。
SUBSET_CHUNK_BITS = 16

# --- 求根配置 ---
ROOT_TOLERANCE = 1e-12
# q0 的搜索区间: Gamma((q+1)/2) = sqrt(pi)/2 在 q = 2 处也成立，所以右端点取 1.9。
Q0_BRACKET = (1.0, 1.9)
# g(2,d,q) = g(1,d,q) 的搜索区间，没有变号时会自动扩大。
G_THRESHOLD_BRACKET = (2.0, 16.0)
G_THRESHOLD_MAX_UPPER = 256.0
# f(q) 扫描 d 的最小上限。
F_SCAN_MIN_CAP = 64
# 严格不等式的判定余量 (Rankin 引理, floor 运算)。
STRICT_EPSILON = 1e-12
# 1 < p < 2 时 Khinchin 界 2^q 的指数上限，p 接近 1 时 q 很大，直接求幂会溢出。
KHINCHIN_EXPONENT_CAP = 62.0

# --- 求解器配置 ---
# 平滑范数的 epsilon 延拓序列 (相对实例直径)。
SMOOTHING_SCHEDULE = (1e-2, 1e-4, 1e-6)
# 每个 epsilon 阶段的最大下降步数。
MAX_ITERATIONS = 10000
# 短于 CONTRACTION_RATIO * 直径 的边会被收缩。
CONTRACTION_RATIO = 1e-7
# 精确阶段结束后，短于 SNAP_RATIO * 直径 的边会尝试合并端点。
SNAP_RATIO = 1e-3
# 求解后重新认证树时使用的容差。
CERTIFY_TOLERANCE = 1e-6
# 长度差在 TIE_TOLERANCE * 直径 内视为相等，取 Steiner 点更少的拓扑。
TIE_TOLERANCE = 1e-9
# 拓扑枚举支持的终端数量范围。
MIN_TOPOLOGY_TERMINALS = 3
MAX_TOPOLOGY_TERMINALS = 7
# 拓扑数不少于 PARALLEL_MIN_TOPOLOGIES 时用进程池并行优化；SOLVER_WORKERS 为 None 时使用 CPU 核数。
PARALLEL_MIN_TOPOLOGIES = 32
SOLVER_WORKERS: int | None = None

# --- 文件配置 ---
FIXTURES_DIR = "fixtures"


def configure_logging(level: str | None = None) -> None:
    """
    安装唯一的 stream handler。重复调用只会更新日志级别。
    """
    root = logging.getLogger("lpsteiner")
    root.setLevel(level or LOG_LEVEL)
    if not root.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(handler)
