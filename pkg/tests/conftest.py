import sys

import pytest
from hypothesis import strategies as st

from circle3col.chordcore import ChordDiagram, adjacency_from_diagram

ACCEPTANCE_FILE = "test_acceptance.py"
_criteria: dict[int, list[tuple[str, str]]] = {}


@st.composite
def diagrams(draw, min_chords=1, max_chords=9):
    k = draw(st.integers(min_chords, max_chords))
    ends = [f"c{i}" for i in range(k) for _ in (0, 1)]
    return ChordDiagram(tuple(draw(st.permutations(ends))))


@st.composite
def circle_graphs(draw, min_chords=1, max_chords=9):
    return adjacency_from_diagram(draw(diagrams(min_chords, max_chords)))


@st.composite
def cnfs(draw, max_vars=8, max_clauses=20, max_width=4):
    n = draw(st.integers(1, max_vars))
    lit = st.integers(1, n).flatmap(lambda v: st.sampled_from((v, -v)))
    clause = st.lists(lit, min_size=1, max_size=max_width, unique_by=abs).map(tuple)
    return n, draw(st.lists(clause, max_size=max_clauses))


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    path, _, name = report.nodeid.partition("::")
    if not path.endswith(ACCEPTANCE_FILE) or not name.startswith("test_criterion_"):
        return
    k = int(name.split("_")[2])
    _criteria.setdefault(k, []).append((name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(_criteria):
        checks = _criteria[k]
        bad = [n for n, o in checks if o != "passed"]
        status = "PASS" if not bad else "FAIL"
        detail = f"{len(checks) - len(bad)}/{len(checks)} checks passed"
        if bad:
            detail += "; failing: " + ", ".join(bad)
        tr.write_line(f"criterion {k}: {status} ({detail})")


@pytest.fixture
def run_cli(capsys):
    from circle3col.cli import main

    def run(*argv):
        code = main([str(a) for a in argv])
        out = capsys.readouterr()
        return code, out.out, out.err

    return run
