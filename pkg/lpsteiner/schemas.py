# lpsteiner/schemas.py
from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class Verdict(str, Enum):
    CERTIFIED = "certified"
    REFUTED = "refuted"


class BoundMethod(str, Enum):
    SMOOTH = "smooth"
    RANKIN = "rankin"
    KHINCHIN = "khinchin"
    SUMMING = "summing"
    CONSTRUCTION = "construction"
    SIMPLEX = "simplex"


class ConstructionKind(str, Enum):
    FOUR_POINT = "four_point"
    SIMPLEX = "simplex"
    TRIANGLE = "triangle"
    CUSTOM = "custom"


# 模型(1): 对偶单位向量族的证书检查结果
class CertificateReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    criterion: str
    verdict: Verdict
    tolerance: float
    balanced: Optional[bool] = None
    balance_residual: Optional[float] = None
    collapsing: Optional[bool] = None
    worst_subset: Optional[list[int]] = None
    worst_subset_norm: Optional[float] = None

    @property
    def certified(self) -> bool:
        return self.verdict is Verdict.CERTIFIED


# 模型(2): 树中单个节点的证书
class NodeVerdict(BaseModel):
    node: int
    kind: str  # "terminal" 或 "steiner"
    report: CertificateReport


# 模型(3): 整棵树的证书摘要，随 SteinerTree 一起保存到文件
class TreeCertificate(BaseModel):
    verdict: Verdict
    tolerance: float
    nodes: list[NodeVerdict]

    @property
    def refuted_nodes(self) -> list[int]:
        return [n.node for n in self.nodes if n.report.verdict is Verdict.REFUTED]


class KhinchinConstants(BaseModel):
    model_config = ConfigDict(frozen=True)

    q: float
    A_q: float
    B_q: float


class BoundReport(BaseModel):
    p: float
    q: float
    d: int
    lower: int
    upper: int
    lower_method: BoundMethod
    upper_method: BoundMethod
    # 2π₁ 界能给出的最好结果所在的区间，仅供参考
    summing_lower: float
    summing_upper: float


class FScan(BaseModel):
    q: float
    value: int
    satisfying: list[int]
    contiguous: bool
    cap: int


class ThresholdRow(BaseModel):
    label: str
    value: float
    equation: str


# 模型(4): 实例文件中的树部分
class TreeSpec(BaseModel):
    edges: list[tuple[int, int]]
    steiner: list[list[float]] = Field(default_factory=list)


# 模型(5): 实例文件，CLI 读写的唯一格式
class InstanceFile(BaseModel):
    p: float
    points: list[list[float]]
    center: Optional[list[float]] = None
    tree: Optional[TreeSpec] = None
    length: Optional[float] = None
    certificate: Optional[TreeCertificate] = None

    @model_validator(mode="after")
    def _check_shape(self) -> "InstanceFile":
        if not self.p > 1.0:
            raise ValueError(f"p 必须大于 1，收到 {self.p}")
        if not self.points:
            raise ValueError("points 不能为空")
        dim = len(self.points[0])
        if dim == 0 or any(len(row) != dim for row in self.points):
            raise ValueError("points 的每一行必须等长且非空")
        if self.center is not None and len(self.center) != dim:
            raise ValueError(f"center 的维度 {len(self.center)} 与 points 的维度 {dim} 不一致")
        if self.tree is not None:
            if any(len(row) != dim for row in self.tree.steiner):
                raise ValueError("tree.steiner 的每一行必须与 points 等长")
            node_count = len(self.points) + len(self.tree.steiner)
            for u, v in self.tree.edges:
                if not (0 <= u < node_count and 0 <= v < node_count):
                    raise ValueError(f"边 ({u}, {v}) 引用了不存在的节点")
        return self

    @property
    def dim(self) -> int:
        return len(self.points[0])
