# lpsteiner/cli.py

import argparse
import logging
import sys
from typing import Optional

import numpy as np
from pydantic import BaseModel

from . import config
from .certificates import certify_steiner_point, certify_tree, certify_vertex, tree_certificate
from .constructions import (
    certify_construction,
    construction_instance_file,
    four_point_config,
    simplex_config,
    triangle_config,
)
from .degree_bounds import degree_bound, threshold_table
from .errors import DegenerateTopologyError, InvalidInputError, NumericError, ResourceLimitError
from .instance_io import instance_from_tree, load_instance, save_instance, tree_from_instance
from .schemas import CertificateReport, TreeCertificate, Verdict
from .smt_solver import SolverOptions, solve_smt

logger = logging.getLogger(__name__)

EXIT_CERTIFIED = 0
EXIT_REFUTED = 1
EXIT_INVALID = 2


# =================================================================
#  Output helpers
# =================================================================

def _emit_machine(payload: "BaseModel | list[BaseModel]") -> None:
    if isinstance(payload, list):
        print("[" + ",\n".join(item.model_dump_json(indent=2) for item in payload) + "]")
    else:
        print(payload.model_dump_json(indent=2))


def _print_report(report: CertificateReport, indent: str = "") -> None:
    print(f"{indent}verdict: {report.verdict.value}  ({report.criterion}, tol {report.tolerance:g})")
    if report.balanced is not None:
        print(f"{indent}balanced: {report.balanced}  residual {report.balance_residual:.3e}")
    if report.collapsing is not None:
        print(f"{indent}collapsing: {report.collapsing}  worst subset {report.worst_subset} "
              f"norm {report.worst_subset_norm:.12f}")


def _print_tree_certificate(certificate: TreeCertificate) -> None:
    print(f"verdict: {certificate.verdict.value}  (tol {certificate.tolerance:g})")
    for node in certificate.nodes:
        print(f"  node {node.node} [{node.kind}]")
        _print_report(node.report, indent="    ")


def _exit_code(verdict: Verdict) -> int:
    return EXIT_CERTIFIED if verdict is Verdict.CERTIFIED else EXIT_REFUTED


# =================================================================
#  Commands
# =================================================================

def cmd_certify(args: argparse.Namespace) -> int:
    """检查实例文件中的星形或整棵树。退出码 0 = certified，1 = refuted。"""
    instance = load_instance(args.input, args.fixtures_dir)
    p = args.p if args.p is not None else instance.p

    if args.mode == "tree":
        tree = tree_from_instance(instance, p)
        tol = args.tol
        if tol is None:
            tol = instance.certificate.tolerance if instance.certificate else config.DEFAULT_TOLERANCE
        reports = certify_tree(tree, tol=tol, max_subsets=args.max_subsets)
        certificate = tree_certificate(tree, reports, tol)
        if args.machine:
            _emit_machine(certificate)
        else:
            _print_tree_certificate(certificate)
        return _exit_code(certificate.verdict)

    tol = args.tol if args.tol is not None else config.DEFAULT_TOLERANCE
    points = np.array(instance.points, dtype=float)
    if instance.center is not None:
        center, neighbors = np.array(instance.center, dtype=float), points
    else:
        if points.shape[0] < 2:
            raise InvalidInputError("没有 center 字段时至少需要 2 个点 (第一个点作为中心)")
        center, neighbors = points[0], points[1:]
    check = certify_steiner_point if args.mode == "steiner" else certify_vertex
    report = check(center, neighbors, p, tol, args.max_subsets)
    if args.machine:
        _emit_machine(report)
    else:
        _print_report(report)
    return _exit_code(report.verdict)


def cmd_bounds(args: argparse.Namespace) -> int:
    report = degree_bound(args.p, args.dim)
    if args.machine:
        _emit_machine(report)
        return EXIT_CERTIFIED
    print(f"p = {report.p:g}  q = {report.q:g}  d = {report.d}")
    print(f"lower {report.lower} upper {report.upper}")
    print(f"lower method: {report.lower_method.value}")
    print(f"upper method: {report.upper_method.value}")
    print(f"2π₁ range: [{report.summing_lower:.6f}, {report.summing_upper:.6f}]")
    return EXIT_CERTIFIED


def cmd_thresholds(args: argparse.Namespace) -> int:
    rows = threshold_table()
    if args.machine:
        _emit_machine(rows)
        return EXIT_CERTIFIED
    width = max(len(row.label) for row in rows)
    for row in rows:
        print(f"{row.label:<{width}}  {row.value:.6f}  {row.equation}")
    return EXIT_CERTIFIED


def cmd_solve(args: argparse.Namespace) -> int:
    instance = load_instance(args.input, args.fixtures_dir)
    p = args.p if args.p is not None else instance.p
    options = SolverOptions(
        tol=args.tol if args.tol is not None else config.DEFAULT_TOLERANCE,
        max_subsets=args.max_subsets,
    )
    tree = solve_smt(instance.points, p, options)
    result = instance_from_tree(tree)
    if args.output:
        save_instance(result, args.output)
    if args.machine:
        _emit_machine(result)
        return EXIT_CERTIFIED

    print(f"length: {tree.length:.12f}")
    print(f"edges: {list(tree.topology.edges)}")
    for i, coords in enumerate(tree.steiner_coords.tolist()):
        node = tree.topology.terminal_count + i
        print(f"steiner {node}: [{', '.join(f'{c:.9f}' for c in coords)}]  degree {tree.topology.degree(node)}")
    if tree.certificate is not None:
        print(f"certificate: {tree.certificate.verdict.value}  (tol {tree.certificate.tolerance:g})")
    if args.output:
        print(f"written to {args.output}")
    return EXIT_CERTIFIED


_CONSTRUCTIONS = {
    "four-point": lambda q, dim: four_point_config(q),
    "simplex": lambda q, dim: simplex_config(dim, q),
    "triangle": lambda q, dim: triangle_config(q),
}


def cmd_construct(args: argparse.Namespace) -> int:
    """生成构造族，打印证书；族满足 collapsing 时可写出对应的星形实例。"""
    if args.kind == "simplex" and args.dim is None:
        raise InvalidInputError("simplex 构造需要 --dim")
    construction = _CONSTRUCTIONS[args.kind](args.q, args.dim)
    tol = args.tol if args.tol is not None else config.DEFAULT_TOLERANCE
    report = certify_construction(construction, tol, args.max_subsets)
    if args.machine:
        _emit_machine(report)
    else:
        print(f"{construction.kind.value}: m = {construction.family.m}, d = {construction.d}, q = {args.q:g}")
        _print_report(report)
    if report.verdict is not Verdict.CERTIFIED:
        return EXIT_REFUTED
    if args.output:
        dim = args.dim if args.kind != "simplex" else None
        target = save_instance(construction_instance_file(construction, dim, tol), args.output)
        if not args.machine:
            print(f"written to {target}")
    return EXIT_CERTIFIED


# =================================================================
#  Parser
# =================================================================

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="证书容差。默认 1e-9。")
    common.add_argument("--max-subsets", type=int, default=config.MAX_SUBSETS,
                        help=f"子集枚举上限 (2^m)。默认 {config.MAX_SUBSETS}。")
    common.add_argument("--machine", action="store_true", help="输出 JSON。")
    common.add_argument("--fixtures-dir", default=config.FIXTURES_DIR,
                        help=f"实例文件的备选目录。默认 '{config.FIXTURES_DIR}'。")

    parser = argparse.ArgumentParser(
        prog="lpsteiner",
        description="ℓ_p 空间中 Steiner 最小树的证书、度数界与小规模求解。",
        formatter_class=argparse.RawTextHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    certify = sub.add_parser("certify", parents=[common], help="检查星形或整棵树的证书。")
    certify.add_argument("input", help="实例文件 (JSON)。")
    certify.add_argument("--mode", choices=("steiner", "vertex", "tree"), default="steiner")
    certify.add_argument("--p", type=float, default=None, help="覆盖文件中的 p。")
    certify.set_defaults(func=cmd_certify)

    bounds = sub.add_parser("bounds", parents=[common], help="ℓ_p^d 的度数上下界。")
    bounds.add_argument("--p", type=float, required=True)
    bounds.add_argument("--dim", type=int, required=True)
    bounds.set_defaults(func=cmd_bounds)

    thresholds = sub.add_parser("thresholds", parents=[common], help="全部阈值常数。")
    thresholds.set_defaults(func=cmd_thresholds)

    solve = sub.add_parser("solve", parents=[common], help="求解 n <= 7 的 SMT。")
    solve.add_argument("input", help="实例文件 (JSON)。")
    solve.add_argument("--p", type=float, default=None, help="覆盖文件中的 p。")
    solve.add_argument("-o", "--output", default=None, help="把求得的树写入该文件。")
    solve.set_defaults(func=cmd_solve)

    construct = sub.add_parser("construct", parents=[common], help="生成构造族及其星形实例。")
    construct.add_argument("kind", choices=sorted(_CONSTRUCTIONS))
    construct.add_argument("--q", type=float, required=True, help="对偶指数 q。")
    construct.add_argument("--dim", type=int, default=None, help="simplex 的维度，或其他构造补零后的维度。")
    construct.add_argument("-o", "--output", default=None, help="把星形实例写入该文件。")
    construct.set_defaults(func=cmd_construct)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    config.configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InvalidInputError, DegenerateTopologyError, ResourceLimitError, NumericError) as e:
        logger.debug("[CLI] %s failed", args.command, exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
