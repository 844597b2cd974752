"""Acceptance checks, one group of ``test_criterion_<N>_*`` tests per criterion.

Run standalone with ``python tests/test_acceptance.py``; the terminal summary
prints one PASS/FAIL line per criterion.  Criteria 5 and 6 generate a
100-instance corpus and run two solvers with a 10 s budget each, so this file
takes roughly twenty minutes.
"""
import itertools
import random
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from circle3col.chordcore import CircleGraph, find_induced_k4
from circle3col.cli import run_bench
from circle3col.counterexamples import (
    c5_phi,
    event_rows,
    instance_c5,
    instance_ea,
    unger_replay,
    verify,
)
from circle3col.formula import (
    build_phi,
    caux_from_coloring,
    evaluate,
    export_dimacs,
    extend_with_h,
    formula_from_clauses,
    parse_dimacs,
)
from circle3col.generator import GenParams, gen_corpus, gen_instance
from circle3col.solvers import (
    REPORT_UNSAT,
    brute_force_3color,
    coloring_cnf,
    coloring_from_cnf,
    explore_unger,
    parse_order,
    solve_dpll,
    validate_coloring,
)
from circle3col.subgraphs import (
    important_subgraphs,
    make_box_slash,
    make_cycle,
    make_square,
    make_tail_triangle,
    realizable_assignments,
)

BENCH_SEED = 2024
BENCH_BUDGET = 10.0


# -- 1: the eight-vertex instance ---------------------------------------------


@pytest.fixture(scope="module")
def ea_report():
    t0 = time.perf_counter()
    rep = verify(instance_ea())
    return rep, time.perf_counter() - t0


def test_criterion_1_not_colorable(ea_report):
    rep, _ = ea_report
    assert not rep.colorable_by_oracle


def test_criterion_1_rows_match_table(ea_report):
    rep, _ = ea_report
    assert rep.clause_set_match


def test_criterion_1_assignment_satisfies_phi(ea_report):
    rep, _ = ea_report
    assert rep.assignment_valid


def test_criterion_1_dpll_sat(ea_report):
    rep, _ = ea_report
    assert rep.phi_satisfiable


def test_criterion_1_clause_and_variable_counts(ea_report):
    rep, _ = ea_report
    assert (rep.clauses, rep.pair_vars) == (18, 11)


def test_criterion_1_runtime(ea_report):
    _, dt = ea_report
    assert dt < 1.0


# -- 2: the 5-cycle event log -------------------------------------------------


@pytest.fixture(scope="module")
def c5_run():
    t0 = time.perf_counter()
    inst = instance_c5()
    phi = c5_phi(inst)
    run = unger_replay(inst, phi)
    dp = solve_dpll(phi)
    return inst, phi, run, dp, time.perf_counter() - t0


def test_criterion_2_unger_unsat(c5_run):
    _, _, run, _, _ = c5_run
    assert run.outcome == "unsat"
    assert run.trace[-1].action == REPORT_UNSAT


def test_criterion_2_ten_events_match_table(c5_run):
    inst, phi, run, _, _ = c5_run
    rows = event_rows(phi, run)
    assert len(rows) == 10
    for k, (got, want) in enumerate(zip(rows, inst.trace), start=1):
        assert got == want, f"row {k}"


def test_criterion_2_jump_choices_are_legal(c5_run):
    inst, phi, run, _, _ = c5_run
    order = parse_order(phi, " ".join(inst.order))
    assert run.choices in {r.choices for r in explore_unger(phi, order)}


def test_criterion_2_dpll_sat(c5_run):
    _, phi, _, dp, _ = c5_run
    assert dp.sat and evaluate(phi, dp.assignment).status == "satisfied"


def test_criterion_2_runtime(c5_run):
    assert c5_run[-1] < 1.0


# -- 3: fragment projections equal realizable patterns -------------------------


def _graph(k, edges):
    labels = [f"v{i}" for i in range(1, k + 1)]
    return CircleGraph.from_edges(labels, [(labels[a], labels[b]) for a, b in edges])


PATTERNS = {
    "TailTriangle": (_graph(4, [(0, 1), (1, 2), (1, 3), (2, 3)]), make_tail_triangle(0, 1, 2, 3)),
    "Square": (_graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)]), make_square(0, 1, 2, 3)),
    "BoxSlash": (_graph(4, [(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]), make_box_slash(0, 1, 2, 3)),
    **{
        f"C{k}": (_graph(k, [(i, (i + 1) % k) for i in range(k)]), make_cycle(range(k)))
        for k in (5, 6, 7, 8)
    },
}


def _projection(g, h):
    phi = build_phi(g, [h])
    ix = phi.index()
    by_pair = {(v.u, v.v): ix[v] for v in phi.pair_vars()}
    assert set(by_pair) == set(h.pairs)
    cols = [by_pair[p] for p in h.pairs]
    out = set()
    for bits in itertools.product((False, True), repeat=len(cols)):
        units = [(c if b else -c,) for c, b in zip(cols, bits)]
        if solve_dpll(formula_from_clauses(list(phi.clauses) + units, phi.num_vars)).sat:
            out.add(bits)
    return out


@pytest.mark.parametrize("kind", list(PATTERNS))
def test_criterion_3_projection_equals_realizable(kind):
    g, h = PATTERNS[kind]
    assert _projection(g, h) == realizable_assignments(h, g)


def test_criterion_3_runtime():
    t0 = time.perf_counter()
    for g, h in PATTERNS.values():
        _projection(g, h)
        realizable_assignments(h, g)
    assert time.perf_counter() - t0 < 10.0


# -- 4: witness colourings satisfy the formula ----------------------------------


def test_criterion_4_witness_satisfies_phi():
    rng = random.Random(4)
    bad = []
    for i in range(200):
        inst = gen_instance(GenParams(rng.randint(8, 60), 4000 + i))
        g = inst.graph
        phi = build_phi(g, important_subgraphs(g))
        a = extend_with_h(phi, caux_from_coloring(g, inst.witness, phi.variables))
        if evaluate(phi, a).status != "satisfied":
            bad.append(inst.seed)
    assert not bad


# -- 5 and 6: the benchmark corpus ---------------------------------------------


@pytest.fixture(scope="module")
def bench(tmp_path_factory):
    corpus = tmp_path_factory.mktemp("corpus")
    gen_corpus(100, 50, 250, BENCH_SEED, corpus)
    return run_bench(corpus, ("unger", "chrono"), BENCH_BUDGET, corpus / "bench.csv")


def test_criterion_5_unger_mostly_unsat(bench):
    rs = bench.by_method("unger")
    assert len(rs) == 100
    assert sum(r.outcome == "unsat" for r in rs) >= 50


def test_criterion_5_reconstruction_fails_or_no_sat(bench):
    sat = [r for r in bench.by_method("unger") if r.outcome == "sat"]
    assert not sat or any(r.coloring_valid != "yes" for r in sat)


def test_criterion_6_chrono_solve_rate_large(bench):
    assert bench.solve_rate("chrono", n_min=100) < 0.20


def test_criterion_6_leaves_grow_superlinearly(bench):
    solved = [r for r in bench.by_method("chrono") if r.outcome == "sat"]
    assert len({r.n for r in solved}) >= 3, "too few solved sizes to fit a growth rate"
    slope = np.polyfit(np.log([r.n for r in solved]), np.log([r.leaves for r in solved]), 1)[0]
    assert slope > 1.0, f"log-log slope {slope:.2f}"


# -- 7: infrastructure exactness -----------------------------------------------


def test_criterion_7_dimacs_round_trip():
    rng = random.Random(7)
    for _ in range(100):
        n = rng.randint(1, 30)
        clauses = [
            tuple(rng.choice((1, -1)) * v for v in rng.sample(range(1, n + 1), rng.randint(1, min(n, 5))))
            for _ in range(rng.randint(0, 60))
        ]
        phi = formula_from_clauses(clauses, n)
        m, back = parse_dimacs(export_dimacs(phi))
        assert m == n
        assert sorted(back) == sorted(clauses)


def _tree_bytes(d: Path) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_criterion_7_corpus_determinism(tmp_path):
    gen_corpus(10, 8, 80, 99, tmp_path / "a")
    gen_corpus(10, 8, 80, 99, tmp_path / "b")
    assert _tree_bytes(tmp_path / "a") == _tree_bytes(tmp_path / "b")


def test_criterion_7_no_time_csv_stable(tmp_path):
    corpus = tmp_path / "c"
    gen_corpus(6, 8, 24, 5, corpus)
    run_bench(corpus, budget=None, csv_out=tmp_path / "1.csv", no_time=True)
    run_bench(corpus, budget=None, csv_out=tmp_path / "2.csv", no_time=True)
    assert (tmp_path / "1.csv").read_bytes() == (tmp_path / "2.csv").read_bytes()


# -- 8: oracle cross-checks ------------------------------------------------------


def test_criterion_8_brute_force_matches_dpll():
    rng = random.Random(8)
    for _ in range(50):
        n = rng.randint(1, 20)
        p = rng.uniform(0.1, 0.5)
        labels = [f"x{i}" for i in range(n)]
        edges = [(labels[i], labels[j]) for i, j in itertools.combinations(range(n), 2) if rng.random() < p]
        g = CircleGraph.from_edges(labels, edges)
        col = brute_force_3color(g)
        r = solve_dpll(coloring_cnf(g))
        assert (col is not None) == r.sat
        if col is not None:
            assert validate_coloring(g, col)
            assert validate_coloring(g, coloring_from_cnf(g, r.assignment))


def test_criterion_8_generated_instances_checked():
    for seed in range(100):
        inst = gen_instance(GenParams(8 + seed % 93, seed))
        assert find_induced_k4(inst.graph) is None
        assert validate_coloring(inst.graph, inst.witness)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-p", "no:cacheprovider"]))
