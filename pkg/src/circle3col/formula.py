"""Clause generation for important subgraphs and assembly of the CNF.

Pair variables ``X(u,v)`` mean "u and v get the same colour".  Induced
cycles additionally use variables ``h(anchor, target)`` that track, along
the cycle, whether ``target`` repeats the colour of ``anchor`` (anchor is
the first or second vertex of the cycle).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence

from .chordcore import CircleGraph
from .subgraphs import ImportantSubgraph, Kind, pair


class FormulaError(ValueError):
    pass


class PairVar(NamedTuple):
    u: int
    v: int

    def name(self, labels: Sequence[str]) -> str:
        return f"X({labels[self.u]},{labels[self.v]})"

    def short(self, labels: Sequence[str]) -> str:
        return f"({labels[self.u]},{labels[self.v]})"


class HVar(NamedTuple):
    cycle: int
    anchor: int
    target: int

    def name(self, labels: Sequence[str]) -> str:
        return f"h({self.cycle},{labels[self.anchor]},{labels[self.target]})"

    def short(self, labels: Sequence[str]) -> str:
        return f"h({labels[self.anchor]},{labels[self.target]})"


class Atom(NamedTuple):
    """Anonymous variable of a plain CNF."""

    k: int

    def name(self, labels: Sequence[str] = ()) -> str:
        return f"x{self.k}"

    short = name


Var = PairVar | HVar | Atom
# a literal before numbering: (variable, polarity)
Lit = tuple[Var, bool]


def X(u: int, v: int) -> PairVar:
    return PairVar(*pair(u, v))


# ---------------------------------------------------------------------------
# Fragments
# ---------------------------------------------------------------------------


def clauses_for(h: ImportantSubgraph) -> list[list[Lit]]:
    """Clauses of a tail-triangle, square or box-slash."""
    if h.kind is Kind.BOX_SLASH:
        (u, v), = h.pairs
        return [[(X(u, v), True)]]
    if h.kind is Kind.SQUARE:
        a, b = h.pairs
        return [[(X(*a), True), (X(*b), True)]]
    if h.kind is Kind.TAIL_TRIANGLE:
        p, _, q1, q2 = h.vertices
        x1, x2 = X(p, q1), X(p, q2)
        # the pendant repeats exactly one of the two far triangle vertices
        return [[(x1, True), (x2, True)], [(x1, False), (x2, False)]]
    raise FormulaError(f"{h.kind_name()} needs cycle_clauses")


def _iff(a: Var, b: Var) -> list[list[Lit]]:
    return [[(a, True), (b, False)], [(a, False), (b, True)]]


def cycle_clauses(h: ImportantSubgraph, cycle_id: int = 0) -> list[list[Lit]]:
    """CNF of the colour-propagation recursion along an induced cycle.

    With ``v1..vk`` the cycle order and anchors ``x`` in {v1, v2}:
    ``h(x, x+1)`` is false, ``h(x, x+2)`` equals ``X(x, x+2)``, and for
    ``i >= x+3`` ``h(x, vi)`` equals ``h(x, v(i-2))`` when ``X(v(i-2), vi)``
    holds and ``not h(x, v(i-2)) and not h(x, v(i-1))`` otherwise.  The
    cycle closes iff ``h(v1, vk)`` is false, ``h(v1, v(k-1)) = X(v1, v(k-1))``
    and ``h(v2, vk) = X(v2, vk)``.
    """
    if not h.is_cycle or len(h.vertices) < 5:
        raise FormulaError("cycle_clauses needs an induced cycle of length >= 5")
    v = (None,) + tuple(h.vertices)  # 1-based
    k = len(h.vertices)

    def hv(x: int, i: int) -> HVar:
        return HVar(cycle_id, v[x], v[i])

    out: list[list[Lit]] = []
    for x in (1, 2):
        out.append([(hv(x, x + 1), False)])
    out.append([(hv(1, k), False)])
    for x in (1, 2):
        out += _iff(hv(x, x + 2), X(v[x], v[x + 2]))
    out += _iff(hv(1, k - 1), X(v[1], v[k - 1]))
    out += _iff(hv(2, k), X(v[2], v[k]))
    for x in (1, 2):
        for i in range(x + 3, k + 1):
            eq = X(v[i - 2], v[i])
            cur, back2 = hv(x, i), hv(x, i - 2)
            out += [
                [(eq, False), (cur, False), (back2, True)],
                [(eq, False), (cur, True), (back2, False)],
            ]
    for x in (1, 2):
        for i in range(x + 3, k + 1):
            eq = X(v[i - 2], v[i])
            cur, back2, back1 = hv(x, i), hv(x, i - 2), hv(x, i - 1)
            out += [
                [(eq, True), (cur, False), (back2, False)],
                [(eq, True), (cur, False), (back1, False)],
                [(eq, True), (cur, True), (back2, True), (back1, True)],
            ]
    return out


def cycle_h_vars(h: ImportantSubgraph, cycle_id: int = 0) -> list[HVar]:
    """h-variables of a cycle in anchor/target order."""
    vs = h.vertices
    k = len(vs)
    return [HVar(cycle_id, vs[x], vs[i]) for x in (0, 1) for i in range(x + 1, k)]


def fragment(h: ImportantSubgraph, cycle_id: int = 0) -> list[list[Lit]]:
    return cycle_clauses(h, cycle_id) if h.is_cycle else clauses_for(h)


# ---------------------------------------------------------------------------
# Whole formula
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Formula:
    """CNF over numbered variables (DIMACS numbering: ``variables[i-1]`` is ``i``).

    ``provenance[c]`` indexes ``sources`` and names the subgraph that
    contributed clause ``c``.
    """

    variables: tuple[Var, ...]
    clauses: tuple[tuple[int, ...], ...]
    provenance: tuple[int, ...]
    sources: tuple[ImportantSubgraph, ...]
    labels: tuple[str, ...]

    @property
    def num_vars(self) -> int:
        return len(self.variables)

    def index(self) -> dict[Var, int]:
        return {var: i + 1 for i, var in enumerate(self.variables)}

    def var_name(self, k: int) -> str:
        return self.variables[k - 1].name(self.labels)

    def pair_vars(self) -> list[PairVar]:
        return [v for v in self.variables if isinstance(v, PairVar)]

    def clause_str(self, c: Sequence[int], short: bool = True) -> str:
        parts = []
        for lit in c:
            var = self.variables[abs(lit) - 1]
            s = var.short(self.labels) if short else var.name(self.labels)
            parts.append(s if lit > 0 else "¬" + s)
        return " ∨ ".join(parts)

    def duplicate_sources(self) -> dict[int, int]:
        """Sources whose clause list repeats an earlier source's exactly."""
        seen: dict[tuple, int] = {}
        dup = {}
        per: dict[int, list] = {}
        for c, s in zip(self.clauses, self.provenance):
            per.setdefault(s, []).append(tuple(sorted(c)))
        for s in sorted(per):
            key = tuple(sorted(per[s]))
            if key in seen:
                dup[s] = seen[key]
            else:
                seen[key] = s
        return dup


def build_phi(g: CircleGraph, important: Iterable[ImportantSubgraph]) -> Formula:
    """Conjunction of the fragments of ``important`` with shared pair variables.

    Pair variables are numbered first in lexicographic vertex order, then
    the h-variables cycle by cycle, anchor by anchor, target by target.
    """
    sources = tuple(important)
    raw: list[tuple[list[Lit], int]] = []
    hvars: list[HVar] = []
    cycle_id = 0
    for s, h in enumerate(sources):
        if h.is_cycle:
            frag = cycle_clauses(h, cycle_id)
            hvars += cycle_h_vars(h, cycle_id)
            cycle_id += 1
        else:
            frag = clauses_for(h)
        raw += [(c, s) for c in frag]
    pvars = sorted({var for c, _ in raw for var, _ in c if isinstance(var, PairVar)})
    variables = tuple(pvars) + tuple(hvars)
    num = {var: i + 1 for i, var in enumerate(variables)}
    clauses = []
    for c, _ in raw:
        ids = [num[var] for var, _ in c]
        if len(set(ids)) != len(ids):
            raise FormulaError("clause repeats a variable")
        clauses.append(tuple(num[var] if pos else -num[var] for var, pos in c))
    return Formula(
        variables=variables,
        clauses=tuple(clauses),
        provenance=tuple(s for _, s in raw),
        sources=sources,
        labels=tuple(g.labels),
    )


def formula_from_clauses(clauses: Iterable[Sequence[int]], num_vars: int | None = None) -> Formula:
    """Plain CNF wrapped as a Formula over anonymous variables."""
    clauses = tuple(tuple(c) for c in clauses)
    n = max((abs(l) for c in clauses for l in c), default=0)
    n = max(n, num_vars or 0)
    variables = tuple(Atom(i) for i in range(1, n + 1))
    return Formula(variables, clauses, tuple(0 for _ in clauses), (), ())


# ---------------------------------------------------------------------------
# Evaluation and assignments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Evaluation:
    status: str  # "satisfied" | "falsified" | "undetermined"
    clause: int | None = None

    def __bool__(self) -> bool:
        return self.status == "satisfied"


def _as_numbered(phi: Formula, a: Mapping) -> dict[int, bool]:
    num = phi.index()
    out = {}
    for key, val in a.items():
        if isinstance(key, int):
            if not 1 <= key <= phi.num_vars:
                raise FormulaError(f"unknown variable {key}")
            out[key] = bool(val)
        elif key in num:
            out[num[key]] = bool(val)
        else:
            raise FormulaError(f"unknown variable {key!r}")
    return out


def evaluate(phi: Formula, a: Mapping) -> Evaluation:
    """Evaluate under a (partial) assignment keyed by variable or DIMACS number."""
    val = _as_numbered(phi, a)
    open_clause = False
    for ci, c in enumerate(phi.clauses):
        sat = False
        unknown = False
        for lit in c:
            x = val.get(abs(lit))
            if x is None:
                unknown = True
            elif x == (lit > 0):
                sat = True
                break
        if sat:
            continue
        if not unknown:
            return Evaluation("falsified", ci)
        open_clause = True
    return Evaluation("undetermined" if open_clause else "satisfied")


class ColoringError(ValueError):
    pass


def check_proper(g: CircleGraph, coloring: Mapping[int, int]) -> None:
    for i, j in g.edges():
        if coloring[i] == coloring[j]:
            raise ColoringError(f"edge {g.labels[i]}-{g.labels[j]} is monochromatic")


def caux_from_coloring(
    g: CircleGraph, coloring: Mapping[int, int] | Sequence[int], variables: Iterable[Var]
) -> dict[PairVar, bool]:
    """Equal-colour indicator of every declared pair variable."""
    col = dict(enumerate(coloring)) if not isinstance(coloring, Mapping) else dict(coloring)
    check_proper(g, col)
    return {v: col[v.u] == col[v.v] for v in variables if isinstance(v, PairVar)}


def extend_with_h(phi: Formula, a: Mapping[PairVar, bool]) -> dict[Var, bool]:
    """Add h-values computed by running the cycle recursion on ``a``."""
    out: dict[Var, bool] = dict(a)
    cycle_id = 0
    for h in phi.sources:
        if not h.is_cycle:
            continue
        v = (None,) + tuple(h.vertices)
        k = len(h.vertices)
        for x in (1, 2):
            val = {x + 1: False, x + 2: a[X(v[x], v[x + 2])]}
            for i in range(x + 3, k + 1):
                if a[X(v[i - 2], v[i])]:
                    val[i] = val[i - 2]
                else:
                    val[i] = not val[i - 2] and not val[i - 1]
            for i, b in val.items():
                out[HVar(cycle_id, v[x], v[i])] = b
        cycle_id += 1
    return out


# ---------------------------------------------------------------------------
# DIMACS
# ---------------------------------------------------------------------------


def export_dimacs(phi: Formula, dedupe: bool = False) -> str:
    clauses = list(phi.clauses)
    if dedupe:
        seen = set()
        uniq = []
        for c in clauses:
            if c not in seen:
                seen.add(c)
                uniq.append(c)
        clauses = uniq
    lines = [f"c {i} = {phi.var_name(i)}" for i in range(1, phi.num_vars + 1)]
    lines.append(f"p cnf {phi.num_vars} {len(clauses)}")
    lines += [" ".join(map(str, c)) + " 0" for c in clauses]
    return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> tuple[int, list[tuple[int, ...]]]:
    """Return ``(num_vars, clauses)``; clauses may span lines."""
    num_vars = None
    expected = None
    clauses = []
    cur: list[int] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            tok = line.split()
            if len(tok) != 4 or tok[1] != "cnf":
                raise ValueError(f"bad problem line: {line!r}")
            num_vars, expected = int(tok[2]), int(tok[3])
            continue
        for t in line.split():
            lit = int(t)
            if lit == 0:
                clauses.append(tuple(cur))
                cur = []
            else:
                cur.append(lit)
    if cur:
        clauses.append(tuple(cur))
    if num_vars is None:
        raise ValueError("missing problem line")
    if expected != len(clauses):
        raise ValueError(f"header announces {expected} clauses, found {len(clauses)}")
    return num_vars, clauses
