import pytest

from circle3col.chordcore import ChordDiagram, adjacency_from_diagram, levels
from circle3col.counterexamples import (
    C5_ERRATA,
    EA_FACTS,
    EA_LEVELS,
    NamedInstance,
    ThesisDataError,
    c5_phi,
    c5_trace_text,
    ea_graph,
    event_rows,
    instance_c5,
    instance_ea,
    load_thesis_instance,
    parse_thesis_data,
    read_trace_table,
    unger_replay,
    verify,
)
from circle3col.formula import X
from circle3col.generator import GenParams, format_instance, gen_instance
from circle3col.solvers import brute_force_3color
from circle3col.subgraphs import Variant, important_subgraphs


@pytest.mark.parametrize("desc,check", EA_FACTS, ids=[d for d, _ in EA_FACTS])
def test_ea_facts(desc, check):
    assert check(ea_graph())


def test_ea_diagram_levels_and_colorability():
    inst = instance_ea()
    assert inst.graph.edge_labels() == ea_graph().edge_labels()
    assert levels(inst.graph.diagram) == EA_LEVELS
    assert brute_force_3color(inst.graph) is None


def test_ea_excluded_pairs_are_not_variables():
    inst = instance_ea()
    g = inst.graph
    phi = c5_phi(inst)
    pv = set(phi.pair_vars())
    for a, b in (("v2", "v8"), ("v3", "v8")):
        assert X(g.index(a), g.index(b)) not in pv


def test_verify_ea():
    r = verify(instance_ea())
    assert r.overall
    assert not r.colorable_by_oracle and r.phi_satisfiable
    assert r.assignment_valid and r.clause_set_match
    assert r.extras and any("new clauses" in e for e in r.extras)
    assert "overall" in r.render()


def test_verify_c5():
    r = verify(instance_c5())
    assert r.overall and r.trace_match and r.unger_unsat
    assert r.colorable_by_oracle and r.phi_satisfiable


def test_c5_replay_events():
    inst = instance_c5()
    phi = c5_phi(inst)
    run = unger_replay(inst, phi)
    assert run.outcome == "unsat"
    assert event_rows(phi, run) == inst.trace
    assert len(inst.trace) == 10


def test_trace_table_errata_are_checked():
    rows = read_trace_table(c5_trace_text(), C5_ERRATA)
    raw = read_trace_table(c5_trace_text())
    assert sum(a != b for a, b in zip(rows, raw)) == 2
    with pytest.raises(ValueError):
        read_trace_table(c5_trace_text(), {1: ("action", "nonsense", "x")})


def test_verify_fails_on_colorable_graph():
    tri = adjacency_from_diagram(ChordDiagram.parse("a b c a b c"))
    r = verify(NamedInstance("triangle", tri))
    assert r.colorable_by_oracle and not r.overall


def test_thesis_loader_rejects_wrong_data(tmp_path):
    lines = format_instance(gen_instance(GenParams(10, 0))).splitlines()
    text = "\n".join(lines[:-1] + ["-", "true: v1,v2"]) + "\n"
    p = tmp_path / "t.txt"
    p.write_text(text)
    inst = parse_thesis_data(text)
    assert inst.assignment == {("v1", "v2"): True}
    with pytest.raises(ThesisDataError, match="data violates"):
        load_thesis_instance(p)
    p.write_text(text.replace("true:", "maybe:"))
    with pytest.raises(ValueError):
        load_thesis_instance(p)

