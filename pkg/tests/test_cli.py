# tests/test_cli.py
import json
import math

import pytest

from lpsteiner.cli import EXIT_CERTIFIED, EXIT_INVALID, EXIT_REFUTED, main
from lpsteiner.instance_io import load_instance
from lpsteiner.schemas import CertificateReport, TreeCertificate, Verdict

from .conftest import FIXTURES_DIR


def run(*argv: str) -> int:
    return main([*argv, "--fixtures-dir", str(FIXTURES_DIR)])


def _length(output: str) -> float:
    line = next(line for line in output.splitlines() if line.startswith("length:"))
    return float(line.split(":", 1)[1])


# =================================================================
#  certify
# =================================================================

def test_certify_triangle_center(capsys):
    assert run("certify", "triangle.json") == EXIT_CERTIFIED
    assert "verdict: certified" in capsys.readouterr().out


def test_certify_square_center_is_refuted(capsys):
    assert run("certify", "square_center.json") == EXIT_REFUTED
    out = capsys.readouterr().out
    assert "worst subset" in out
    assert "collapsing: False" in out


def test_certify_machine_output(capsys):
    assert run("certify", "square_center.json", "--machine") == EXIT_REFUTED
    report = CertificateReport.model_validate_json(capsys.readouterr().out)
    assert report.verdict is Verdict.REFUTED
    assert report.worst_subset_norm == pytest.approx(math.sqrt(2))


def test_certify_bad_files(capsys):
    assert run("certify", "truncated.json") == EXIT_INVALID
    assert run("certify", "does_not_exist.json") == EXIT_INVALID
    assert "error:" in capsys.readouterr().err


def test_certify_tree_mode_needs_tree_section(capsys):
    assert run("certify", "triangle.json", "--mode", "tree") == EXIT_INVALID


# =================================================================
#  bounds / thresholds
# =================================================================

@pytest.mark.parametrize(
    "p, dim, expected",
    [("2", "5", "lower 3 upper 3"), ("3", "10", "lower 4 upper 4"), ("20", "100", "upper 7")],
)
def test_bounds(p, dim, expected, capsys):
    assert run("bounds", "--p", p, "--dim", dim) == EXIT_CERTIFIED
    assert expected in capsys.readouterr().out


@pytest.mark.parametrize("p, expected", [("1.00001", "lower 3 upper 4"), ("1e16", "lower 4 upper 4")])
def test_bounds_at_extreme_exponents(p, expected, capsys):
    assert run("bounds", "--p", p, "--dim", "3") == EXIT_CERTIFIED
    assert expected in capsys.readouterr().out


def test_bounds_rejects_p_one(capsys):
    assert run("bounds", "--p", "1", "--dim", "3") == EXIT_INVALID


def test_bounds_machine_output(capsys):
    assert run("bounds", "--p", "1.2", "--dim", "6", "--machine") == EXIT_CERTIFIED
    payload = json.loads(capsys.readouterr().out)
    assert payload["upper"] == 7
    assert payload["lower_method"] == "simplex"


def test_thresholds(capsys):
    assert run("thresholds") == EXIT_CERTIFIED
    out = capsys.readouterr().out
    for value in ("2.7095", "3.4094", "4.8188", "10.381", "1.847"):
        assert value in out
    assert len(out.strip().splitlines()) == 9


# =================================================================
#  solve
# =================================================================

def test_solve_unit_triangle(capsys):
    assert run("solve", "unit_triangle.json") == EXIT_CERTIFIED
    out = capsys.readouterr().out
    assert _length(out) == pytest.approx(math.sqrt(3), abs=1e-6)
    assert "certificate: certified" in out


def test_solve_unit_square(capsys):
    assert run("solve", "square.json") == EXIT_CERTIFIED
    assert _length(capsys.readouterr().out) == pytest.approx(1 + math.sqrt(3), abs=1e-6)


def test_solve_two_points(capsys):
    assert run("solve", "two_points.json") == EXIT_CERTIFIED
    expected = (1 + 2 ** 3 + 1) ** (1 / 3)
    assert _length(capsys.readouterr().out) == pytest.approx(expected, abs=1e-9)


def test_solved_tree_certifies_from_file(tmp_path, capsys):
    target = tmp_path / "solved.json"
    assert run("solve", "square.json", "--output", str(target)) == EXIT_CERTIFIED
    capsys.readouterr()

    saved = load_instance(target)
    assert saved.tree is not None and saved.certificate is not None
    assert len(saved.tree.steiner) == 2

    assert run("certify", str(target), "--mode", "tree", "--machine") == EXIT_CERTIFIED
    certificate = TreeCertificate.model_validate_json(capsys.readouterr().out)
    assert certificate.verdict is Verdict.CERTIFIED
    assert certificate.tolerance == saved.certificate.tolerance
    # 逐节点报告 (残差、最坏子集及其范数) 与文件中保存的完全一致
    assert certificate.nodes == saved.certificate.nodes
    assert certificate == saved.certificate


# =================================================================
#  construct
# =================================================================

def test_construct_four_point_and_certify(tmp_path, capsys):
    target = tmp_path / "star.json"
    assert run("construct", "four-point", "--q", "1.5", "--output", str(target)) == EXIT_CERTIFIED
    capsys.readouterr()
    instance = load_instance(target)
    assert instance.p == pytest.approx(3.0)
    assert instance.center == [0.0, 0.0, 0.0]
    assert run("certify", str(target)) == EXIT_CERTIFIED


def test_construct_four_point_padded(tmp_path, capsys):
    target = tmp_path / "star5.json"
    assert run("construct", "four-point", "--q", "1.5", "--dim", "5", "-o", str(target)) == EXIT_CERTIFIED
    assert load_instance(target).dim == 5


def test_construct_four_point_beyond_boundary_is_refuted(tmp_path, capsys):
    target = tmp_path / "never.json"
    assert run("construct", "four-point", "--q", "1.62", "--output", str(target)) == EXIT_REFUTED
    assert not target.exists()


def test_construct_simplex_needs_dim(capsys):
    assert run("construct", "simplex", "--q", "3") == EXIT_INVALID


def test_construct_triangle(capsys):
    assert run("construct", "triangle", "--q", "2.5") == EXIT_CERTIFIED
    assert "triangle" in capsys.readouterr().out


def test_argparse_errors_exit_two():
    with pytest.raises(SystemExit) as excinfo:
        main(["bounds", "--p", "2"])
    assert excinfo.value.code == 2
