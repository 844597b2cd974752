import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from circle3col.chordcore import CapacityError, CircleGraph
from circle3col.formula import PairVar, X, build_phi, evaluate, formula_from_clauses
from circle3col.solvers import (
    BUDGET,
    FLIP,
    JUMP,
    REPORT_UNSAT,
    OrderError,
    brute_force_3color,
    coloring_cnf,
    coloring_from_cnf,
    explore_unger,
    format_trace,
    parse_order,
    reconstruct_coloring,
    resolve_order,
    solve_chrono,
    solve_dpll,
    solve_unger,
    validate_coloring,
)
from circle3col.subgraphs import make_cycle

from conftest import cnfs


def truth_table_sat(n, clauses):
    for bits_ in itertools.product([False, True], repeat=n):
        if all(any(bits_[abs(l) - 1] == (l > 0) for l in c) for c in clauses):
            return True
    return False


def random_graph(n, p, rng):
    labels = [f"x{i}" for i in range(n)]
    edges = [(labels[i], labels[j]) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return CircleGraph.from_edges(labels, edges)


# -- trivial cases ----------------------------------------------------------


def test_unit_clause():
    phi = formula_from_clauses([(1,)])
    r = solve_chrono(phi, [1])
    assert (r.outcome, r.leaves) == ("sat", 1)
    u = solve_unger(phi, [1])
    assert u.sat and u.jumps == 0


def test_contradiction():
    phi = formula_from_clauses([(1,), (-1,)])
    r = solve_chrono(phi, [1])
    assert (r.outcome, r.leaves) == ("unsat", 2)
    assert solve_dpll(phi).outcome == "unsat"
    assert solve_unger(phi).outcome == "unsat"


def test_empty_clause_and_empty_formula():
    assert solve_dpll(formula_from_clauses([()])).outcome == "unsat"
    assert solve_chrono(formula_from_clauses([()])).outcome == "unsat"
    assert solve_dpll(formula_from_clauses([])).sat


def test_order_validation():
    phi = formula_from_clauses([(1, 2)])
    with pytest.raises(OrderError):
        resolve_order(phi, [1, 1])
    with pytest.raises(OrderError):
        resolve_order(phi, [3])
    with pytest.raises(OrderError):
        solve_chrono(phi, [])
    assert resolve_order(phi, [2]) == [2, 1]
    assert parse_order(phi, "x2 1") == [2, 1]


# -- agreement properties ---------------------------------------------------


@settings(max_examples=200, deadline=None)
@given(cnfs(max_vars=10, max_clauses=30))
def test_dpll_matches_truth_table(cnf):
    n, clauses = cnf
    phi = formula_from_clauses(clauses, n)
    r = solve_dpll(phi)
    assert r.sat == truth_table_sat(n, clauses)
    if r.sat:
        assert evaluate(phi, r.assignment).status == "satisfied"


@settings(max_examples=150, deadline=None)
@given(cnfs(max_vars=8, max_clauses=25), st.randoms(use_true_random=False))
def test_chrono_agrees_with_dpll(cnf, rnd):
    n, clauses = cnf
    phi = formula_from_clauses(clauses, n)
    order = list(range(1, n + 1))
    rnd.shuffle(order)
    r = solve_chrono(phi, order)
    assert r.sat == solve_dpll(phi).sat
    assert r.jumps == 0 and r.leaves <= r.nodes
    if r.sat:
        assert evaluate(phi, r.assignment).status == "satisfied"


@settings(max_examples=150, deadline=None)
@given(cnfs(max_vars=8, max_clauses=25), st.sampled_from(["deepest", "shallowest"]))
def test_unger_is_sound(cnf, policy):
    n, clauses = cnf
    phi = formula_from_clauses(clauses, n)
    r = solve_unger(phi, jump_policy=policy, trace=True)
    assert r.leaves <= r.nodes
    if r.sat:
        assert evaluate(phi, r.assignment).status == "satisfied"
    else:
        assert r.trace[-1].action == REPORT_UNSAT
    if not solve_dpll(phi).sat:
        assert not r.sat


@settings(max_examples=80, deadline=None)
@given(cnfs(max_vars=6, max_clauses=15))
def test_trace_events_name_falsified_clauses(cnf):
    n, clauses = cnf
    phi = formula_from_clauses(clauses, n)
    for run in explore_unger(phi, max_runs=20):
        seen = set()
        for ev in run.trace:
            assert ev.literals == phi.clauses[ev.clause]
            if ev.action in (FLIP, JUMP):
                assert ev.variable in map(abs, ev.literals)
            assert ev.repeat == (ev.key() in seen)
            seen.add(ev.key())


def test_budget_exhaustion():
    # pigeonhole 7 into 6 keeps plain backtracking busy
    p, h = 7, 6
    var = lambda i, j: i * h + j + 1
    cls = [tuple(var(i, j) for j in range(h)) for i in range(p)]
    cls += [(-var(i, j), -var(k, j)) for j in range(h) for i in range(p) for k in range(i + 1, p)]
    phi = formula_from_clauses(cls)
    assert solve_chrono(phi, budget=0.05).outcome == BUDGET
    assert solve_dpll(phi, budget=0.05).outcome == BUDGET


# -- the 5-cycle -------------------------------------------------------------


def c5():
    labels = [f"v{i}" for i in range(1, 6)]
    g = CircleGraph.from_edges(labels, [(labels[i], labels[(i + 1) % 5]) for i in range(5)])
    return g, build_phi(g, [make_cycle(range(5))])


ORDER = "h(v2,v5) h(v1,v4) h(v2,v4) h(v1,v3) h(v1,v5) h(v2,v3) h(v1,v2) (v3,v5) (v2,v4)"


def test_c5_is_satisfiable():
    _, phi = c5()
    assert solve_dpll(phi).sat
    assert solve_chrono(phi, parse_order(phi, ORDER)).sat


def test_c5_explorer_finds_false_negative():
    _, phi = c5()
    runs = list(explore_unger(phi, parse_order(phi, ORDER)))
    assert len(runs) == len({r.choices for r in runs})
    assert any(r.outcome == "unsat" for r in runs)
    assert any(r.sat for r in runs)


def test_c5_first_events():
    _, phi = c5()
    r = solve_unger(phi, parse_order(phi, ORDER), trace=True)
    lines = format_trace(phi, r.trace)
    assert lines[0] == "(1) | ¬h(v1,v5) | h(v1,v5)"
    assert r.trace[0].action == FLIP


# -- colouring oracles -------------------------------------------------------


def test_brute_force_examples():
    g, _ = c5()
    col = brute_force_3color(g)
    assert col == (1, 2, 1, 2, 3)
    assert validate_coloring(g, col)
    k4 = CircleGraph.from_edges("abcd", list(itertools.combinations("abcd", 2)))
    assert brute_force_3color(k4) is None
    with pytest.raises(CapacityError):
        brute_force_3color(CircleGraph.from_edges([f"x{i}" for i in range(41)], []))


def test_brute_force_is_lexicographically_first():
    rng = random.Random(5)
    for _ in range(20):
        g = random_graph(7, 0.4, rng)
        first = None
        for col in itertools.product((1, 2, 3), repeat=7):
            if validate_coloring(g, col):
                first = col
                break
        assert brute_force_3color(g) == first


def test_brute_force_agrees_with_cnf():
    rng = random.Random(11)
    for _ in range(40):
        g = random_graph(rng.randint(1, 14), rng.uniform(0.2, 0.6), rng)
        col = brute_force_3color(g)
        r = solve_dpll(coloring_cnf(g))
        assert (col is not None) == r.sat
        if r.sat:
            assert validate_coloring(g, coloring_from_cnf(g, r.assignment))


def test_validate_coloring_inputs():
    g, _ = c5()
    assert validate_coloring(g, {"v1": 1, "v2": 2, "v3": 1, "v4": 2, "v5": 3})
    assert not validate_coloring(g, [1, 1, 2, 1, 3])
    assert not validate_coloring(g, [1, 2, 1, 2, 4])
    with pytest.raises(ValueError):
        validate_coloring(g, [1, 2])
    with pytest.raises(ValueError):
        validate_coloring(g, {"v1": 1})


def test_reconstruct_box_slash():
    g = CircleGraph.from_edges("uvab", [("u", "a"), ("u", "b"), ("v", "a"), ("v", "b"), ("a", "b")])
    rec = reconstruct_coloring(g, {X(0, 1): True})
    assert rec and validate_coloring(g, rec.coloring)
    assert rec.coloring[0] == rec.coloring[1]


def test_reconstruct_reports_conflicts():
    g = CircleGraph.from_edges("abc", [("a", "b")])
    rec = reconstruct_coloring(g, {PairVar(0, 1): True})
    assert not rec and "edge a-b" in rec.diagnostic
    rec = reconstruct_coloring(g, {PairVar(0, 2): True, PairVar(1, 2): True})
    assert not rec


def test_reconstruct_never_returns_improper():
    rng = random.Random(3)
    for _ in range(60):
        g = random_graph(9, 0.35, rng)
        pairs = [(i, j) for i in range(9) for j in range(i + 1, 9) if not g.has_edge(i, j)]
        a = {PairVar(i, j): rng.random() < 0.3 for i, j in pairs}
        rec = reconstruct_coloring(g, a)
        if rec:
            assert validate_coloring(g, rec.coloring)
            for (i, j), b in ((k, v) for k, v in a.items()):
                assert (rec.coloring[i] == rec.coloring[j]) == b
