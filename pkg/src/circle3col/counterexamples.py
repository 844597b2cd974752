"""Embedded counterexamples and push-button refutation checks.

* ``instance_ea``: an 8-vertex circle graph that is not 3-colourable although
  the formula built from its important subgraphs is satisfiable.
* ``instance_c5``: the 5-cycle on which the jump-based search gives up on a
  satisfiable formula, together with the expected event log.
* ``load_thesis_instance``: the ten-vertex instance for the thesis filter,
  read from a data file because the published description does not pin the
  graph down.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from itertools import combinations
from pathlib import Path
from typing import Callable, Mapping, Sequence

from .chordcore import (
    ChordDiagram,
    CircleGraph,
    DiagramConstraints,
    adjacency_from_diagram,
    natural_key,
    nesting_of,
    realize_diagram,
)
from .formula import Formula, PairVar, X, build_phi, evaluate
from .solvers import (
    REPORT_UNSAT,
    SearchStats,
    brute_force_3color,
    format_action,
    parse_order,
    scripted_policy,
    solve_dpll,
    solve_unger,
)
from .subgraphs import (
    ImportantSubgraph,
    Kind,
    Variant,
    important_subgraphs,
    induced_cycles,
    squares,
)


class ThesisDataError(ValueError):
    """Thesis data file contradicts one of the published facts."""


# a clause row written with labels: ((("v1", "v6"), True), ...)
LabelClause = tuple[tuple[tuple[str, str], bool], ...]


@dataclass(frozen=True)
class ExpectedRow:
    kind: Kind
    vertices: frozenset[str]
    clauses: tuple[LabelClause, ...]


@dataclass(frozen=True)
class NamedInstance:
    name: str
    graph: CircleGraph
    colorable: bool | None = None
    rows: tuple[ExpectedRow, ...] = ()
    clause_count: int | None = None
    pair_var_count: int | None = None
    assignment: Mapping[tuple[str, str], bool] = field(default_factory=dict)
    order: tuple[str, ...] = ()
    jump_script: tuple[int, ...] = ()
    trace: tuple[tuple[frozenset[str], str], ...] = ()
    notes: tuple[str, ...] = ()


# ---------------------------------------------------------------------------
# The eight-vertex instance
# ---------------------------------------------------------------------------

EA_EDGES = (
    "v1v3 v1v4 v1v5 v1v8 v2v3 v2v4 v2v5 v2v6 v2v7 v4v5 v4v8 v6v7 v6v8 v7v8"
).split()

EA_CHILDREN = {
    "v1": ("v2", "v6", "v7"),
    "v3": ("v4", "v5"),
    "v2": (),
    "v4": ("v6", "v7"),
    "v5": ("v6", "v7", "v8"),
    "v6": (),
    "v7": (),
    "v8": (),
}

EA_LEVELS = {"v1": 1, "v3": 1, "v2": 2, "v4": 2, "v5": 2, "v6": 3, "v7": 3, "v8": 3}


def _split_edge(tok: str) -> tuple[str, str]:
    i = tok.index("v", 1)
    return tok[:i], tok[i:]


def _p(a: int, b: int) -> tuple[str, str]:
    return (f"v{a}", f"v{b}")


def _xor_rows(a: tuple[str, str], b: tuple[str, str]) -> tuple[LabelClause, ...]:
    return (((a, True), (b, True)), ((a, False), (b, False)))


def _vs(*ks: int) -> frozenset[str]:
    return frozenset(f"v{k}" for k in ks)


EA_ROWS = (
    ExpectedRow(Kind.SQUARE, _vs(1, 2, 3, 4), (((_p(1, 2), True), (_p(3, 4), True)),)),
    ExpectedRow(Kind.SQUARE, _vs(1, 2, 3, 5), (((_p(1, 2), True), (_p(3, 5), True)),)),
    ExpectedRow(Kind.BOX_SLASH, _vs(1, 2, 4, 5), (((_p(1, 2), True),),)),
    ExpectedRow(Kind.BOX_SLASH, _vs(1, 4, 5, 8), (((_p(5, 8), True),),)),
    ExpectedRow(Kind.TAIL_TRIANGLE, _vs(1, 6, 7, 8), _xor_rows(_p(1, 6), _p(1, 7))),
    ExpectedRow(Kind.TAIL_TRIANGLE, _vs(1, 3, 4, 5), _xor_rows(_p(3, 4), _p(3, 5))),
    ExpectedRow(Kind.TAIL_TRIANGLE, _vs(2, 3, 4, 5), _xor_rows(_p(3, 4), _p(3, 5))),
    ExpectedRow(Kind.TAIL_TRIANGLE, _vs(2, 4, 6, 7), _xor_rows(_p(4, 6), _p(4, 7))),
    ExpectedRow(Kind.TAIL_TRIANGLE, _vs(2, 5, 6, 7), _xor_rows(_p(5, 6), _p(5, 7))),
    ExpectedRow(Kind.TAIL_TRIANGLE, _vs(2, 4, 5, 6), _xor_rows(_p(4, 6), _p(5, 6))),
    ExpectedRow(Kind.TAIL_TRIANGLE, _vs(2, 4, 5, 7), _xor_rows(_p(4, 7), _p(5, 7))),
)

# the published assignment; its entry for v2v5 names an edge, not a variable,
# and is left out
EA_ASSIGNMENT = {
    **{_p(a, b): True for a, b in ((1, 2), (1, 7), (3, 4), (4, 6), (5, 7), (5, 8))},
    **{_p(a, b): False for a, b in ((1, 6), (4, 7), (5, 6), (3, 5))},
}

EA_DROPPED_ASSIGNMENT = (("v2", "v5"), True)


def _N(g: CircleGraph, *vs: str) -> set[str]:
    mask = -1
    for v in vs:
        mask &= g.adj[g.index(v)]
    return {g.labels[i] for i in range(g.n) if mask >> i & 1}


def _edge(g: CircleGraph, u: str, v: str) -> bool:
    return g.has_edge(g.index(u), g.index(v))


def _four_cycles(g: CircleGraph) -> set[frozenset[str]]:
    return {frozenset(g.labels[v] for v in h.vertices) for h in squares(g)}


def _in_triangle(g: CircleGraph, v: str) -> bool:
    nb = sorted(_N(g, v))
    return any(_edge(g, a, b) for a, b in combinations(nb, 2))


# neighbourhood and structure facts the eight-vertex graph must satisfy
EA_FACTS: tuple[tuple[str, Callable[[CircleGraph], bool]], ...] = (
    ("N(v1) & N(v2) = {v3,v4,v5}", lambda g: _N(g, "v1", "v2") == {"v3", "v4", "v5"}),
    ("N(v1) & N(v6) & N(v7) = {v8}", lambda g: _N(g, "v1", "v6", "v7") == {"v8"}),
    ("N(v3) & N(v4) & N(v5) = {v1,v2}", lambda g: _N(g, "v3", "v4", "v5") == {"v1", "v2"}),
    ("N(v4) & N(v5) & N(v6) & N(v7) = {v2}", lambda g: _N(g, "v4", "v5", "v6", "v7") == {"v2"}),
    ("v8 in N(v4) & N(v6) & N(v7)", lambda g: "v8" in _N(g, "v4", "v6", "v7")),
    ("N(v1) & N(v6) = {v8}", lambda g: _N(g, "v1", "v6") == {"v8"}),
    ("N(v1) & N(v7) = {v8}", lambda g: _N(g, "v1", "v7") == {"v8"}),
    ("N(v4) & N(v6) = {v2,v8}", lambda g: _N(g, "v4", "v6") == {"v2", "v8"}),
    ("N(v4) & N(v7) = {v2,v8}", lambda g: _N(g, "v4", "v7") == {"v2", "v8"}),
    ("v2v8 is not an edge", lambda g: not _edge(g, "v2", "v8")),
    ("N(v5) & N(v6) = {v2}", lambda g: _N(g, "v5", "v6") == {"v2"}),
    ("N(v5) & N(v7) = {v2}", lambda g: _N(g, "v5", "v7") == {"v2"}),
    ("N(v5) & N(v8) = {v1,v4}", lambda g: _N(g, "v5", "v8") == {"v1", "v4"}),
    ("v1v4 is an edge", lambda g: _edge(g, "v1", "v4")),
    ("v1v8 is an edge", lambda g: _edge(g, "v1", "v8")),
    ("{v2,v4,v5} is a clique", lambda g: all(_edge(g, a, b) for a, b in combinations(("v2", "v4", "v5"), 2))),
    ("v3 lies in no triangle", lambda g: not _in_triangle(g, "v3")),
    (
        "induced 4-cycles are {1234},{1235},{2468},{2478}",
        lambda g: _four_cycles(g) == {_vs(1, 2, 3, 4), _vs(1, 2, 3, 5), _vs(2, 4, 6, 8), _vs(2, 4, 7, 8)},
    ),
)


def ea_graph() -> CircleGraph:
    labels = [f"v{i}" for i in range(1, 9)]
    return CircleGraph.from_edges(labels, [_split_edge(e) for e in EA_EDGES])


def ea_constraints() -> DiagramConstraints:
    return DiagramConstraints(
        children={u: frozenset(k) for u, k in EA_CHILDREN.items()},
        levels=dict(EA_LEVELS),
    )


@lru_cache(maxsize=None)
def _ea_diagram() -> ChordDiagram:
    return realize_diagram(ea_graph(), ea_constraints())


def instance_ea() -> NamedInstance:
    g = ea_graph()
    d = _ea_diagram()
    graph = adjacency_from_diagram(d, g.labels)
    return NamedInstance(
        name="ea",
        graph=graph,
        colorable=False,
        rows=EA_ROWS,
        clause_count=18,
        pair_var_count=11,
        assignment=dict(EA_ASSIGNMENT),
        notes=("assignment entry v2v5 dropped: v2v5 is an edge",),
    )


# ---------------------------------------------------------------------------
# The 5-cycle
# ---------------------------------------------------------------------------

C5_DIAGRAM = "v1 v5 v2 v1 v3 v2 v4 v3 v5 v4"
C5_ORDER = ("h(v2,v5)", "h(v1,v4)", "h(v2,v4)", "h(v1,v3)", "h(v1,v5)", "h(v2,v3)",
            "h(v1,v2)", "(v3,v5)", "(v2,v4)")
# at the first jump with two candidates the second-deepest one is taken
C5_JUMP_SCRIPT = (1, 0)

# misprints in the transcribed event table: row -> (field, printed, intended)
C5_ERRATA = {
    4: ("action", "h(v3,v5)", "(v3,v5)"),
    10: ("clause", "h(v1,v4)", "h(v2,v4)"),
}


def _parse_clause_text(text: str) -> frozenset[str]:
    return frozenset(t.strip().replace(" ", "") for t in text.split("∨"))


def read_trace_table(text: str, errata: Mapping[int, tuple[str, str, str]] | None = None):
    """Rows ``(k) | clause | action`` as (literal set, action); errata applied."""
    out = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        k, clause, action = (s.strip() for s in line.split("|"))
        row = int(k.strip("()"))
        action = action.replace(" ", "")
        lits = _parse_clause_text(clause)
        if errata and row in errata:
            where, printed, fixed = errata[row]
            if where == "action":
                if action != printed:
                    raise ValueError(f"row {row}: erratum expects action {printed!r}")
                action = fixed
            else:
                if printed not in lits:
                    raise ValueError(f"row {row}: erratum expects literal {printed!r}")
                lits = (lits - {printed}) | {fixed}
        out.append((lits, action))
    return tuple(out)


def c5_trace_text() -> str:
    return resources.files("circle3col").joinpath("data/c5_trace.txt").read_text(encoding="utf-8")


def c5_graph() -> CircleGraph:
    d = ChordDiagram.parse(C5_DIAGRAM)
    return adjacency_from_diagram(d, [f"v{i}" for i in range(1, 6)])


def instance_c5() -> NamedInstance:
    return NamedInstance(
        name="c5",
        graph=c5_graph(),
        colorable=True,
        order=C5_ORDER,
        jump_script=C5_JUMP_SCRIPT,
        trace=read_trace_table(c5_trace_text(), C5_ERRATA),
    )


def event_rows(phi: Formula, stats: SearchStats) -> tuple[tuple[frozenset[str], str], ...]:
    """Distinct events of a run in the (literal set, action) form of the table."""
    rows = []
    for ev in stats.distinct_events():
        lits = _parse_clause_text(phi.clause_str(ev.literals))
        rows.append((lits, format_action(phi, ev)))
    return tuple(rows)


# ---------------------------------------------------------------------------
# Thesis instance from a data file
# ---------------------------------------------------------------------------

THESIS_BOXSLASH_PAIRS = {_p(1, 2), _p(4, 5), _p(1, 7), _p(2, 10), _p(6, 8), _p(8, 9)}


def _induces(g: CircleGraph, vs: frozenset[str], kind: Kind, pairs: set[tuple[str, str]] | None = None) -> bool:
    idx = sorted(g.index(v) for v in vs)
    sub_edges = sum(1 for a, b in combinations(idx, 2) if g.has_edge(a, b))
    degs = sorted(sum(1 for b in idx if b != a and g.has_edge(a, b)) for a in idx)
    shape = {Kind.TAIL_TRIANGLE: [1, 2, 2, 3], Kind.BOX_SLASH: [2, 2, 3, 3], Kind.SQUARE: [2, 2, 2, 2]}
    if sub_edges != {Kind.TAIL_TRIANGLE: 4, Kind.BOX_SLASH: 5, Kind.SQUARE: 4}[kind]:
        return False
    if degs != shape[kind]:
        return False
    if pairs is not None:
        non = {tuple(sorted((g.labels[a], g.labels[b]), key=natural_key))
               for a, b in combinations(idx, 2) if not g.has_edge(a, b)}
        return pairs <= non
    return True


def _thesis_facts(g: CircleGraph) -> list[tuple[str, Callable[[], bool]]]:
    def tts_in(vs: frozenset[str]) -> int:
        return sum(1 for s in combinations(sorted(vs), 4) if _induces(g, frozenset(s), Kind.TAIL_TRIANGLE))

    def thesis_pairs() -> set[tuple[str, str]]:
        out = set()
        for h in important_subgraphs(g, Variant.THESIS):
            if h.kind is Kind.BOX_SLASH:
                (a, b), = h.pairs
                out.add((g.labels[a], g.labels[b]))
        return out

    def every_square_has(pairs: set[tuple[str, str]]) -> bool:
        for h in squares(g):
            ps = {(g.labels[a], g.labels[b]) for a, b in h.pairs}
            if not ps & pairs:
                return False
        return True

    nest = nesting_of(g) if g.diagram is not None else None
    return [
        ("labels are v1..v10", lambda: sorted(g.labels, key=natural_key) == [f"v{i}" for i in range(1, 11)]),
        ("not 3-colourable", lambda: brute_force_3color(g) is None),
        ("{v1,v2,v3,v4} induces a box-slash missing v1v2",
         lambda: _induces(g, _vs(1, 2, 3, 4), Kind.BOX_SLASH, {_p(1, 2)})),
        ("{v1,v7,v8,v10} induces a box-slash missing v1v7",
         lambda: _induces(g, _vs(1, 7, 8, 10), Kind.BOX_SLASH, {_p(1, 7)})),
        ("v2v7 is an edge", lambda: _edge(g, "v2", "v7")),
        ("no induced cycle longer than 4", lambda: not any(True for _ in induced_cycles(g, 5, g.n))),
        ("every level has at most three chords",
         lambda: nest is not None and all(len(s) <= 3 for s in nest.level_sets())),
        ("{v1,v3,v5,v6,v10} contains four tail-triangles", lambda: tts_in(_vs(1, 3, 5, 6, 10)) == 4),
        ("{v2,v3,v5,v6} induces a tail-triangle", lambda: tts_in(_vs(2, 3, 5, 6)) == 1),
        ("{v2,v6,v7,v8} induces a tail-triangle", lambda: tts_in(_vs(2, 6, 7, 8)) == 1),
        ("{v6,v7,v8,v10} induces a tail-triangle", lambda: tts_in(_vs(6, 7, 8, 10)) == 1),
        ("box-slash pairs are {1,2},{4,5},{1,7},{2,10},{6,8},{8,9}",
         lambda: thesis_pairs() == THESIS_BOXSLASH_PAIRS),
        ("every induced 4-cycle has diagonal v1v2 or v2v10", lambda: every_square_has({_p(1, 2), _p(2, 10)})),
    ]


def parse_thesis_data(text: str) -> NamedInstance:
    """Instance file (``n m seed``, diagram, edges) followed by assignment lines.

    After the edges, lines ``true: va,vb ...`` and ``false: va,vb ...``
    list the expected satisfying assignment; a witness line ``-`` may
    precede them.
    """
    lines = [l.strip() for l in text.splitlines() if l.strip() and not l.lstrip().startswith("#")]
    n, m, _seed = map(int, lines[0].split())
    diagram = ChordDiagram.parse(lines[1])
    edges = [tuple(l.split()) for l in lines[2 : 2 + m]]
    if len(edges) != m or any(len(e) != 2 for e in edges):
        raise ValueError("edge list does not match header")
    labels = diagram.labels
    if len(labels) != n:
        raise ValueError(f"header says {n} vertices, diagram has {len(labels)}")
    graph = CircleGraph.from_edges(labels, edges, diagram=diagram)
    if adjacency_from_diagram(diagram, labels).adj != graph.adj:
        raise ThesisDataError("edge list disagrees with the diagram")
    assignment: dict[tuple[str, str], bool] = {}
    for line in lines[2 + m :]:
        if line == "-":
            continue
        key, _, rest = line.partition(":")
        if key.strip() not in ("true", "false"):
            raise ValueError(f"unexpected line {line!r}")
        for tok in rest.split():
            a, b = tok.split(",")
            assignment[tuple(sorted((a, b), key=natural_key))] = key.strip() == "true"
    return NamedInstance(name="thesis", graph=graph, colorable=False, assignment=assignment)


def load_thesis_instance(path: str | os.PathLike) -> NamedInstance:
    inst = parse_thesis_data(Path(path).read_text())
    for desc, check in _thesis_facts(inst.graph):
        if not check():
            raise ThesisDataError(f"data violates: {desc}")
    return inst


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RefutationReport:
    instance: str
    variant: str
    colorable_by_oracle: bool
    phi_satisfiable: bool
    clauses: int
    distinct_clauses: int
    pair_vars: int
    assignment_valid: bool | None = None
    clause_set_match: bool | None = None
    counts_match: bool | None = None
    unger_unsat: bool | None = None
    unger_default: str | None = None
    trace_match: bool | None = None
    extras: tuple[str, ...] = ()
    details: tuple[str, ...] = ()

    @property
    def overall(self) -> bool:
        if self.trace_match is not None:
            return bool(self.unger_unsat and self.phi_satisfiable and self.trace_match)
        return (not self.colorable_by_oracle) and self.phi_satisfiable

    def items(self) -> list[tuple[str, object]]:
        def fmt(v):
            return "n/a" if v is None else v

        out = [
            ("instance", self.instance),
            ("variant", self.variant),
            ("colorable_by_oracle", self.colorable_by_oracle),
            ("phi_satisfiable", self.phi_satisfiable),
            ("clauses", self.clauses),
            ("distinct_clauses", self.distinct_clauses),
            ("pair_vars", self.pair_vars),
            ("assignment_valid", fmt(self.assignment_valid)),
            ("clause_set_match", fmt(self.clause_set_match)),
            ("counts_match", fmt(self.counts_match)),
            ("unger_unsat", fmt(self.unger_unsat)),
            ("unger_default", fmt(self.unger_default)),
            ("trace_match", fmt(self.trace_match)),
            ("overall", self.overall),
        ]
        return out

    def render(self) -> str:
        rows = self.items()
        w = max(len(k) for k, _ in rows)
        lines = [f"{k.ljust(w)}  {v}" for k, v in rows]
        lines += [f"extra: {e}" for e in self.extras]
        lines += [f"note: {d}" for d in self.details]
        return "\n".join(lines)


def _fragment_labels(phi: Formula, h: ImportantSubgraph) -> set[frozenset]:
    """Clauses of one source as sets of ((a, b), sign) with labels."""
    src = phi.sources.index(h)
    out = set()
    for c, s in zip(phi.clauses, phi.provenance):
        if s != src:
            continue
        lits = []
        for lit in c:
            var = phi.variables[abs(lit) - 1]
            if not isinstance(var, PairVar):
                return set()
            lits.append(((phi.labels[var.u], phi.labels[var.v]), lit > 0))
        out.add(frozenset(lits))
    return out


def _row_match(phi: Formula, rows: Sequence[ExpectedRow]) -> tuple[bool, list[str], set[ImportantSubgraph]]:
    by_key = {}
    for h in phi.sources:
        by_key[(h.kind, frozenset(phi.labels[v] for v in h.vertices))] = h
    ok = True
    msgs = []
    matched = set()
    for r in rows:
        h = by_key.get((r.kind, r.vertices))
        name = " ".join(sorted(r.vertices, key=natural_key))
        if h is None:
            ok = False
            msgs.append(f"missing {r.kind.name} {{{name}}}")
            continue
        matched.add(h)
        want = {frozenset(c) for c in r.clauses}
        if _fragment_labels(phi, h) != want:
            ok = False
            msgs.append(f"clauses differ for {r.kind.name} {{{name}}}")
    return ok, msgs, matched


def _numbered_assignment(phi: Formula, a: Mapping[tuple[str, str], bool]) -> tuple[dict, list[str]]:
    ix = {lab: i for i, lab in enumerate(phi.labels)}
    known = set(phi.variables)
    out, unknown = {}, []
    for (u, v), b in a.items():
        var = X(ix[u], ix[v])
        if var in known:
            out[var] = b
        else:
            unknown.append(f"{u}{v}")
    return out, unknown


def c5_phi(inst: NamedInstance, variant: Variant = Variant.EXTENDED_ABSTRACT) -> Formula:
    return build_phi(inst.graph, important_subgraphs(inst.graph, variant))


def unger_replay(inst: NamedInstance, phi: Formula, trace: bool = True) -> SearchStats:
    """Run the jump-based search with the instance's order and jump script."""
    order = parse_order(phi, " ".join(inst.order))
    return solve_unger(phi, order, trace=trace, jump_policy=scripted_policy(inst.jump_script))


def verify(inst: NamedInstance, variant: Variant = Variant.EXTENDED_ABSTRACT) -> RefutationReport:
    g = inst.graph
    colorable = brute_force_3color(g) is not None
    imp = important_subgraphs(g, variant)
    phi = build_phi(g, imp)
    dp = solve_dpll(phi)
    if dp.sat and evaluate(phi, dp.assignment).status != "satisfied":
        raise AssertionError("DPLL returned a non-satisfying assignment")
    extras: list[str] = []
    details: list[str] = list(inst.notes)
    kw: dict = {}
    if inst.assignment:
        a, unknown = _numbered_assignment(phi, inst.assignment)
        if unknown:
            details.append("assignment names non-variables: " + " ".join(unknown))
        kw["assignment_valid"] = evaluate(phi, a).status == "satisfied"
    if inst.rows:
        ok, msgs, matched = _row_match(phi, inst.rows)
        kw["clause_set_match"] = ok
        details += msgs
        row_clauses = set()
        for h in matched:
            row_clauses |= _fragment_labels(phi, h)
        for h in phi.sources:
            if h in matched:
                continue
            frag = _fragment_labels(phi, h)
            tag = "redundant" if frag and frag <= row_clauses else "new clauses"
            extras.append(f"{h.describe(g.labels)} ({tag})")
    if inst.clause_count is not None or inst.pair_var_count is not None:
        kw["counts_match"] = (
            inst.clause_count in (None, len(phi.clauses))
            and inst.pair_var_count in (None, len(phi.pair_vars()))
        )
    if inst.order:
        run = unger_replay(inst, phi)
        kw["unger_unsat"] = run.outcome == "unsat"
        kw["unger_default"] = solve_unger(phi, parse_order(phi, " ".join(inst.order))).outcome
        if inst.trace:
            got = event_rows(phi, run)
            kw["trace_match"] = got == inst.trace and run.trace[-1].action == REPORT_UNSAT
            if got != inst.trace:
                details.append(f"trace has {len(got)} events, expected {len(inst.trace)}")
    return RefutationReport(
        instance=inst.name,
        variant=variant.value,
        colorable_by_oracle=colorable,
        phi_satisfiable=dp.sat,
        clauses=len(phi.clauses),
        distinct_clauses=len({frozenset(c) for c in phi.clauses}),
        pair_vars=len(phi.pair_vars()),
        extras=tuple(extras),
        details=tuple(details),
        **kw,
    )
