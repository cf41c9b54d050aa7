# lpsteiner/instance_io.py

import json
import logging
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from . import config
from .errors import InvalidInputError
from .lp_geometry import LpExponent, as_exponent
from .schemas import InstanceFile, TreeSpec
from .topologies import SteinerTree, Topology

logger = logging.getLogger(__name__)


def resolve_path(path: "str | Path", fixtures_dir: "str | Path" = config.FIXTURES_DIR) -> Path:
    """路径不存在时再到 fixtures 目录下查找同名文件。"""
    candidate = Path(path)
    if candidate.exists():
        return candidate
    fallback = Path(fixtures_dir) / candidate
    if fallback.exists():
        return fallback
    raise InvalidInputError(f"找不到实例文件: {path} (也不在 {fixtures_dir}/ 中)")


def load_instance(path: "str | Path", fixtures_dir: "str | Path" = config.FIXTURES_DIR) -> InstanceFile:
    """
    读取并校验实例文件。文件不存在、不是合法 JSON、字段不符合 InstanceFile 时
    统一抛出 InvalidInputError。
    """
    resolved = resolve_path(path, fixtures_dir)
    try:
        text = resolved.read_text(encoding="utf-8")
    except OSError as e:
        raise InvalidInputError(f"无法读取 {resolved}: {e}") from e
    try:
        instance = InstanceFile.model_validate_json(text)
    except ValidationError as e:
        raise InvalidInputError(f"{resolved} 不是合法的实例文件:\n{e}") from e
    logger.info("[IO] loaded %s: p=%g, %d points in dimension %d", resolved, instance.p,
                len(instance.points), instance.dim)
    return instance


def save_instance(instance: InstanceFile, path: "str | Path") -> Path:
    """写入实例文件，已存在则覆盖。"""
    target = Path(path)
    if target.exists():
        logger.info("[IO] Updating existing file: %s", target)
    else:
        logger.info("[IO] Creating new file: %s", target)
        target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(instance.model_dump_json(indent=2, exclude_none=True) + "\n", encoding="utf-8")
    return target


def parse_instance(text: str) -> InstanceFile:
    """从字符串解析，供测试和管道输入使用。"""
    try:
        return InstanceFile.model_validate(json.loads(text))
    except (json.JSONDecodeError, ValidationError) as e:
        raise InvalidInputError(f"不是合法的实例文件: {e}") from e


def tree_from_instance(instance: InstanceFile, p: "LpExponent | float | None" = None) -> SteinerTree:
    """
    把实例文件中的 tree 部分还原为 SteinerTree。长度总是重新计算，文件中的 length 只作记录。

    Raises:
        InvalidInputError: 文件没有 tree 部分。
        DegenerateTopologyError: 边集不是合法的 Steiner 拓扑。
    """
    if instance.tree is None:
        raise InvalidInputError("实例文件没有 tree 部分")
    exponent = as_exponent(p if p is not None else instance.p)
    terminals = np.array(instance.points, dtype=float)
    steiner = np.array(instance.tree.steiner, dtype=float).reshape(-1, instance.dim)
    topology = Topology(len(instance.points), steiner.shape[0], tuple(instance.tree.edges))
    tree = SteinerTree(topology, terminals, steiner, exponent, 0.0, instance.certificate)
    return SteinerTree(topology, terminals, steiner, exponent, tree.recompute_length(), instance.certificate)


def instance_from_tree(tree: SteinerTree) -> InstanceFile:
    return InstanceFile(
        p=tree.p.p,
        points=tree.terminal_coords.tolist(),
        tree=TreeSpec(edges=list(tree.topology.edges), steiner=tree.steiner_coords.tolist()),
        length=tree.length,
        certificate=tree.certificate,
    )
