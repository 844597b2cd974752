import pytest

from circle3col.cli import read_csv, scatter_svg
from circle3col.formula import parse_dimacs


def test_verify_ea(run_cli):
    code, out, _ = run_cli("verify", "ea")
    assert code == 0
    assert "overall" in out and "True" in out


def test_verify_c5(run_cli):
    code, out, _ = run_cli("verify", "c5")
    assert code == 0
    assert "trace_match" in out


def test_verify_thesis_needs_data(run_cli):
    code, _, err = run_cli("verify", "thesis")
    assert code == 2 and "--data" in err


def test_solve_c5_trace(run_cli):
    code, out, _ = run_cli("solve", "c5", "--trace")
    lines = out.strip().splitlines()
    assert code == 0
    assert len(lines) == 11
    assert lines[0].startswith("(1) |")
    assert lines[-1].startswith("outcome=unsat")


@pytest.mark.parametrize("method", ["dpll", "chrono"])
def test_solve_c5_complete_methods(run_cli, method):
    code, out, _ = run_cli("solve", "c5", "--method", method)
    assert code == 0 and "outcome=sat" in out


def test_solve_c5_default_policy(run_cli):
    code, out, _ = run_cli("solve", "c5", "--no-script")
    assert code == 0 and "outcome=sat" in out


def test_levels_and_subgraphs(run_cli):
    code, out, _ = run_cli("levels", "ea")
    assert code == 0
    assert out.splitlines()[0] == "1: v1 v3"
    code, out, _ = run_cli("subgraphs", "c5")
    assert code == 0 and out.strip()


def test_formula_dimacs(run_cli, tmp_path):
    out_file = tmp_path / "f.cnf"
    code, out, _ = run_cli("formula", "ea", "--dimacs", out_file)
    assert code == 0
    n, clauses = parse_dimacs(out_file.read_text())
    assert f"{len(clauses)} clauses" in out
    code, out, _ = run_cli("formula", "ea")
    assert code == 0 and out.strip().splitlines()[-1].startswith("#")


def test_color(run_cli):
    code, out, _ = run_cli("color", "c5", "--method", "dpll")
    assert "outcome=sat" in out
    assert code in (0, 1)
    code, out, _ = run_cli("color", "ea", "--method", "dpll")
    assert code == 1 and "valid=yes" not in out


def test_graph_inputs(run_cli, tmp_path):
    spine = tmp_path / "s.txt"
    spine.write_text("order: a b c d\na c\nb d\n")
    code, out, _ = run_cli("convert", spine)
    assert code == 0 and len(out.splitlines()) == 2
    diag = tmp_path / "d.txt"
    diag.write_text("a b c a b c\n")
    code, out, _ = run_cli("levels", diag)
    assert code == 0
    edges = tmp_path / "e.txt"
    edges.write_text("a b\nb c\nc d\nd a\n")
    code, out, _ = run_cli("solve", edges, "--method", "dpll")
    assert code == 0 and "outcome=sat" in out


def test_errors(run_cli, tmp_path):
    code, _, err = run_cli("levels", tmp_path / "missing.txt")
    assert code == 2 and "no such file" in err
    with pytest.raises(SystemExit) as exc:
        run_cli("frobnicate")
    assert exc.value.code == 2
    code, _, _ = run_cli("bench", "--corpus", tmp_path, "--methods", "magic")
    assert code == 2


def test_gen_bench_plot(run_cli, tmp_path, monkeypatch):
    corpus = tmp_path / "c"
    code, _, _ = run_cli("gen", "--count", 3, "--nmin", 8, "--nmax", 14, "--seed", 1, "--out", corpus)
    assert code == 0
    csv_a = tmp_path / "a.csv"
    monkeypatch.setenv("CIRCLE3COL_CORPUS", str(corpus))
    code, out, _ = run_cli("bench", "--csv", csv_a, "--no-time", "--budget", 5)
    assert code == 0
    rows = read_csv(csv_a)
    assert len(rows) == 9
    assert {r["method"] for r in rows} == {"unger", "chrono", "dpll"}
    assert all(float(r["elapsed_ms"]) == 0 for r in rows)
    assert all(r["outcome"] == "sat" for r in rows if r["method"] == "dpll")
    svg = tmp_path / "p.svg"
    code, out, _ = run_cli("plot", "--csv", csv_a, "--svg", svg, "--log-y")
    assert code == 0 and svg.read_text().startswith("<svg")
    code, _, _ = run_cli("plot", "--csv", csv_a, "--svg", svg, "--y", "nope")
    assert code == 2


def test_scatter_svg_empty():
    assert scatter_svg([], "n", "leaves", False).startswith("<svg")
