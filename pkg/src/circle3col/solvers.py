"""Search procedures for Phi and exact colouring oracles.

Three solvers share one interface (a Formula, an optional variable order
and a time budget) and return :class:`SearchStats`:

* ``solve_chrono``: plain depth-first backtracking, true branch first;
* ``solve_unger``: the jump-based backtracking scheme, which is sound but
  not complete;
* ``solve_dpll``: complete DPLL with two-watched-literal unit propagation.

A *leaf* is a node whose assignment falsifies a clause, or the final node
of a satisfying path.  ``nodes`` counts every assignment made.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .chordcore import CapacityError, CircleGraph, bits
from .formula import Formula, PairVar, Var

SAT, UNSAT, BUDGET = "sat", "unsat", "budget_exhausted"

FLIP, JUMP, REPORT_UNSAT = "flip", "jump", "unsat"


class OrderError(ValueError):
    """Variable order with repeats, unknown variables, or empty for a nonempty formula."""


@dataclass(frozen=True)
class TraceEvent:
    """One conflict handled by the jump-based search.

    ``node`` is the serial number of the tree node at which the conflict
    was detected and ``depth`` its depth (0 = first variable of the
    order).  ``repeat`` marks an event identical in clause and action to
    an earlier one, which happens when the search re-descends after a jump.
    """

    node: int
    depth: int
    clause: int
    literals: tuple[int, ...]
    action: str
    variable: int | None = None
    value: bool | None = None
    repeat: bool = False

    def key(self) -> tuple:
        return (self.literals, self.action, self.variable)


@dataclass(frozen=True)
class SearchStats:
    outcome: str
    leaves: int = 0
    jumps: int = 0
    nodes: int = 0
    elapsed: float = 0.0
    assignment: dict[int, bool] | None = None
    trace: tuple[TraceEvent, ...] = ()
    choices: tuple[int, ...] = ()

    @property
    def sat(self) -> bool:
        return self.outcome == SAT

    def distinct_events(self) -> list[TraceEvent]:
        return [e for e in self.trace if not e.repeat]


# ---------------------------------------------------------------------------
# Orders
# ---------------------------------------------------------------------------


def resolve_order(phi: Formula, order: Sequence[Var | int] | None) -> list[int]:
    """Translate an order to DIMACS numbers and append the missing variables.

    ``None`` means table order.  A partial order is completed with the
    remaining variables in table order.
    """
    if order is None:
        return list(range(1, phi.num_vars + 1))
    num = phi.index()
    out: list[int] = []
    for v in order:
        if isinstance(v, int):
            k = v
            if not 1 <= k <= phi.num_vars:
                raise OrderError(f"unknown variable {v}")
        elif v in num:
            k = num[v]
        else:
            raise OrderError(f"unknown variable {v!r}")
        out.append(k)
    if len(set(out)) != len(out):
        raise OrderError("order repeats a variable")
    if not out and phi.clauses:
        raise OrderError("empty order for a nonempty formula")
    seen = set(out)
    out += [k for k in range(1, phi.num_vars + 1) if k not in seen]
    return out


def parse_order(phi: Formula, text: str) -> list[int]:
    """Order file: whitespace-separated variable names (short or long form) or numbers."""
    names: dict[str, int] = {}
    for k, var in enumerate(phi.variables, start=1):
        names[var.name(phi.labels)] = k
        names.setdefault(var.short(phi.labels), k)
    out = []
    for tok in text.split():
        if tok.lstrip("-").isdigit():
            out.append(int(tok))
        elif tok in names:
            out.append(names[tok])
        else:
            raise OrderError(f"unknown variable {tok!r}")
    return resolve_order(phi, out)


def _occurrences(phi: Formula) -> list[list[int]]:
    occ: list[list[int]] = [[] for _ in range(phi.num_vars + 1)]
    for ci, c in enumerate(phi.clauses):
        for lit in c:
            occ[abs(lit)].append(ci)
    return occ


def _empty_clause(phi: Formula) -> int | None:
    for ci, c in enumerate(phi.clauses):
        if not c:
            return ci
    return None


class _Clock:
    def __init__(self, budget: float | None):
        self.t0 = time.perf_counter()
        self.deadline = None if budget is None else self.t0 + budget
        self.ticks = 0

    def expired(self) -> bool:
        self.ticks += 1
        if self.deadline is None or self.ticks & 255:
            return False
        return time.perf_counter() > self.deadline

    def elapsed(self) -> float:
        return time.perf_counter() - self.t0


# ---------------------------------------------------------------------------
# Chronological backtracking
# ---------------------------------------------------------------------------


def solve_chrono(
    phi: Formula, order: Sequence[Var | int] | None = None, budget: float | None = None
) -> SearchStats:
    """Depth-first search in ``order``; true is tried before false."""
    clock = _Clock(budget)
    seq = resolve_order(phi, order)
    if _empty_clause(phi) is not None:
        return SearchStats(UNSAT, elapsed=clock.elapsed())
    if not seq:
        return SearchStats(SAT, assignment={}, elapsed=clock.elapsed())
    occ = _occurrences(phi)
    clauses = phi.clauses
    val: list[bool | None] = [None] * (phi.num_vars + 1)

    def falsified(var: int) -> bool:
        for ci in occ[var]:
            for lit in clauses[ci]:
                x = val[abs(lit)]
                if x is None or x == (lit > 0):
                    break
            else:
                return True
        return False

    leaves = nodes = 0
    second = [False] * len(seq)
    d = 0
    val[seq[0]] = True
    nodes = 1
    while True:
        if clock.expired():
            return SearchStats(BUDGET, leaves, 0, nodes, clock.elapsed())
        var = seq[d]
        if not falsified(var):
            if d == len(seq) - 1:
                leaves += 1
                a = {k: bool(val[k]) for k in range(1, phi.num_vars + 1)}
                return SearchStats(SAT, leaves, 0, nodes, clock.elapsed(), a)
            d += 1
            second[d] = False
            val[seq[d]] = True
            nodes += 1
            continue
        leaves += 1
        # back up to the deepest node with an untried branch
        while second[d]:
            val[seq[d]] = None
            d -= 1
            if d < 0:
                return SearchStats(UNSAT, leaves, 0, nodes, clock.elapsed())
        second[d] = True
        val[seq[d]] = False
        nodes += 1


# ---------------------------------------------------------------------------
# Jump-based backtracking
# ---------------------------------------------------------------------------

# A jump policy receives the candidate variables sorted deepest first and
# their depths, and returns the index of the chosen candidate.
JumpPolicy = Callable[[Sequence[int], Sequence[int]], int]


def _deepest(cands: Sequence[int], depths: Sequence[int]) -> int:
    return 0


def _shallowest(cands: Sequence[int], depths: Sequence[int]) -> int:
    return len(cands) - 1


POLICIES: dict[str, JumpPolicy] = {"deepest": _deepest, "shallowest": _shallowest}


def solve_unger(
    phi: Formula,
    order: Sequence[Var | int] | None = None,
    budget: float | None = None,
    trace: bool = False,
    jump_policy: str | JumpPolicy = "deepest",
) -> SearchStats:
    """Backtracking with the flip-then-jump conflict rule.

    Variables are set in ``order``, true first.  When the newest assignment
    falsifies a clause, the variable is flipped if its other value is
    untried.  If a clause is still falsified, the search jumps to a
    variable of a falsified clause on the current path whose other value
    is untried: the path below it is discarded, it is flipped, and the
    descent resumes from there.  Without such a variable the search
    reports unsat, even if the formula is satisfiable.

    When several variables qualify, ``jump_policy`` decides; the
    candidates it sees are sorted deepest first.  The returned
    ``choices`` record the index picked at every jump decision, which
    lets :func:`explore_unger` enumerate alternative executions.
    """
    policy = POLICIES[jump_policy] if isinstance(jump_policy, str) else jump_policy
    clock = _Clock(budget)
    seq = resolve_order(phi, order)
    empty = _empty_clause(phi)
    if empty is not None:
        ev = (TraceEvent(0, 0, empty, (), REPORT_UNSAT),) if trace else ()
        return SearchStats(UNSAT, elapsed=clock.elapsed(), trace=ev)
    if not seq:
        return SearchStats(SAT, assignment={}, elapsed=clock.elapsed())
    occ = _occurrences(phi)
    clauses = phi.clauses
    depth_of = {v: i for i, v in enumerate(seq)}
    val: list[bool | None] = [None] * (phi.num_vars + 1)

    def falsified(var: int) -> list[int]:
        out = []
        for ci in occ[var]:
            for lit in clauses[ci]:
                x = val[abs(lit)]
                if x is None or x == (lit > 0):
                    break
            else:
                out.append(ci)
        return out

    def rank(ci: int, var: int | None) -> tuple[int, int]:
        # prefer the clause whose other literals reach deepest, then the lower index
        deep = max((depth_of[abs(l)] for l in clauses[ci] if abs(l) != var), default=-1)
        return (-deep, ci)

    def pick(cis: Iterable[int], var: int | None) -> int:
        return min(cis, key=lambda ci: rank(ci, var))

    events: list[TraceEvent] = []
    seen: set[tuple] = set()
    choices: list[int] = []

    def record(node: int, d: int, ci: int, action: str, var: int | None, value: bool | None):
        if not trace:
            return
        ev = TraceEvent(node, d, ci, clauses[ci], action, var, value)
        rep = ev.key() in seen
        seen.add(ev.key())
        events.append(TraceEvent(node, d, ci, clauses[ci], action, var, value, rep))

    def stats(outcome: str, a: dict[int, bool] | None = None) -> SearchStats:
        return SearchStats(
            outcome, leaves, jumps, nodes, clock.elapsed(), a, tuple(events), tuple(choices)
        )

    leaves = jumps = 0
    second = [False] * len(seq)
    d = 0
    val[seq[0]] = True
    nodes = 1
    while True:
        if clock.expired():
            return stats(BUDGET)
        var = seq[d]
        bad = falsified(var)
        if not bad:
            if d == len(seq) - 1:
                leaves += 1
                return stats(SAT, {k: bool(val[k]) for k in range(1, phi.num_vars + 1)})
            d += 1
            second[d] = False
            val[seq[d]] = True
            nodes += 1
            continue
        leaves += 1
        if not second[d]:
            record(nodes, d, pick(bad, var), FLIP, var, not val[var])
            second[d] = True
            val[var] = not val[var]
            nodes += 1
            continue
        cands = sorted(
            {abs(l) for ci in bad for l in clauses[ci] if not second[depth_of[abs(l)]]},
            key=lambda v: -depth_of[v],
        )
        if not cands:
            record(nodes, d, pick(bad, None), REPORT_UNSAT, None, None)
            return stats(UNSAT)
        if len(cands) == 1:
            i = 0
        else:
            i = policy(cands, [depth_of[v] for v in cands])
            if not 0 <= i < len(cands):
                raise IndexError("jump policy returned an invalid index")
            choices.append(i)
        target = cands[i]
        record(nodes, d, pick((ci for ci in bad if target in map(abs, clauses[ci])), target),
               JUMP, target, not val[target])
        td = depth_of[target]
        for k in range(td + 1, d + 1):
            val[seq[k]] = None
        d = td
        second[d] = True
        val[target] = not val[target]
        jumps += 1
        nodes += 1


def scripted_policy(script: Sequence[int]) -> JumpPolicy:
    """Policy that replays recorded choice indices and then falls back to deepest."""
    it = iter(script)

    def choose(cands: Sequence[int], depths: Sequence[int]) -> int:
        return next(it, 0)

    return choose


def explore_unger(
    phi: Formula,
    order: Sequence[Var | int] | None = None,
    max_runs: int = 10_000,
    budget: float | None = None,
) -> Iterator[SearchStats]:
    """Every execution of :func:`solve_unger` over all jump choices (traced).

    Executions are produced depth-first over choice sequences, starting
    with the all-deepest one.  Stops after ``max_runs`` executions.
    """
    seq = resolve_order(phi, order)
    stack: list[tuple[int, ...]] = [()]
    runs = 0
    while stack and runs < max_runs:
        prefix = stack.pop()
        counts: list[int] = []
        picked: list[int] = []

        def choose(cands: Sequence[int], depths: Sequence[int]) -> int:
            k = len(picked)
            i = prefix[k] if k < len(prefix) else 0
            counts.append(len(cands))
            picked.append(i)
            return i

        res = solve_unger(phi, seq, budget, trace=True, jump_policy=choose)
        runs += 1
        yield res
        for k in range(len(picked) - 1, len(prefix) - 1, -1):
            for alt in range(counts[k] - 1, 0, -1):
                stack.append(tuple(picked[:k]) + (alt,))


def format_action(phi: Formula, ev: TraceEvent) -> str:
    if ev.action == REPORT_UNSAT:
        return "n.a."
    return phi.variables[ev.variable - 1].short(phi.labels)


def format_trace(phi: Formula, events: Iterable[TraceEvent], include_repeats: bool = False) -> list[str]:
    """Lines ``(k) | clause | action`` numbering the printed events from 1."""
    lines = []
    for ev in events:
        if ev.repeat and not include_repeats:
            continue
        clause = phi.clause_str(ev.literals)
        lines.append(f"({len(lines) + 1}) | {clause} | {format_action(phi, ev)}")
    return lines


# ---------------------------------------------------------------------------
# DPLL
# ---------------------------------------------------------------------------


def solve_dpll(phi: Formula, budget: float | None = None) -> SearchStats:
    """Complete DPLL; branches on the lowest unassigned variable, true first."""
    clock = _Clock(budget)
    n = phi.num_vars
    if _empty_clause(phi) is not None:
        return SearchStats(UNSAT, elapsed=clock.elapsed())
    clauses = [list(c) for c in phi.clauses]
    val: list[bool | None] = [None] * (n + 1)
    watches: dict[int, list[int]] = {}
    units: list[int] = []
    for ci, c in enumerate(clauses):
        if len(c) == 1:
            units.append(c[0])
            continue
        watches.setdefault(c[0], []).append(ci)
        watches.setdefault(c[1], []).append(ci)

    def lit_val(lit: int) -> bool | None:
        x = val[abs(lit)]
        return None if x is None else x == (lit > 0)

    trail: list[int] = []
    # (trail length before the decision, decision literal, second branch taken)
    decisions: list[tuple[int, int, bool]] = []
    nodes = leaves = 0

    def assign(lit: int) -> None:
        val[abs(lit)] = lit > 0
        trail.append(lit)

    def propagate(start: int) -> bool:
        i = start
        while i < len(trail):
            false_lit = -trail[i]
            i += 1
            ws = watches.get(false_lit, [])
            j = 0
            while j < len(ws):
                ci = ws[j]
                c = clauses[ci]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                if lit_val(c[0]) is True:
                    j += 1
                    continue
                for k in range(2, len(c)):
                    if lit_val(c[k]) is not False:
                        c[1], c[k] = c[k], c[1]
                        watches.setdefault(c[1], []).append(ci)
                        ws[j] = ws[-1]
                        ws.pop()
                        break
                else:
                    other = lit_val(c[0])
                    if other is False:
                        return False
                    if other is None:
                        assign(c[0])
                    j += 1
        return True

    for u in units:
        x = lit_val(u)
        if x is False:
            return SearchStats(UNSAT, 1, 0, 0, clock.elapsed())
        if x is None:
            assign(u)
    ok = propagate(0)
    nxt = 1
    while True:
        if clock.expired():
            return SearchStats(BUDGET, leaves, 0, nodes, clock.elapsed())
        if not ok:
            leaves += 1
            while decisions and decisions[-1][2]:
                decisions.pop()
            if not decisions:
                return SearchStats(UNSAT, leaves, 0, nodes, clock.elapsed())
            mark, lit, _ = decisions.pop()
            for l in trail[mark:]:
                val[abs(l)] = None
            del trail[mark:]
            decisions.append((mark, -lit, True))
            nodes += 1
            assign(-lit)
            ok = propagate(mark)
            nxt = 1
            continue
        while nxt <= n and val[nxt] is not None:
            nxt += 1
        if nxt > n:
            leaves += 1
            a = {k: bool(val[k]) for k in range(1, n + 1)}
            return SearchStats(SAT, leaves, 0, nodes, clock.elapsed(), a)
        mark = len(trail)
        decisions.append((mark, nxt, False))
        nodes += 1
        assign(nxt)
        ok = propagate(mark)


SOLVERS = {"unger": solve_unger, "chrono": solve_chrono}


def solve(phi: Formula, method: str, order=None, budget: float | None = None, **kw) -> SearchStats:
    if method == "dpll":
        return solve_dpll(phi, budget)
    if method not in SOLVERS:
        raise ValueError(f"unknown method {method!r}")
    return SOLVERS[method](phi, order, budget, **kw)


# ---------------------------------------------------------------------------
# Colouring oracles
# ---------------------------------------------------------------------------

Coloring = tuple[int, ...]


def brute_force_3color(g: CircleGraph, limit: int = 40) -> Coloring | None:
    """Lexicographically first proper colouring with colours 1..3, or None.

    Vertices are coloured in index order; a vertex never opens a colour
    beyond ``1 + max colour used so far``, which keeps the first solution
    found lexicographically least.
    """
    n = g.n
    if n > limit:
        raise CapacityError(f"{n} vertices exceed the limit of {limit}")
    col = [0] * n
    # forward checking: bitmask of colours still available per vertex
    avail = [0b111] * n
    undo: list[list[tuple[int, int]]] = []

    def place(v: int, c: int) -> bool:
        changes = []
        bit = 1 << (c - 1)
        for w in bits(g.adj[v]):
            if w > v and avail[w] & bit:
                changes.append((w, avail[w]))
                avail[w] &= ~bit
                if not avail[w]:
                    for u, old in changes:
                        avail[u] = old
                    return False
        undo.append(changes)
        col[v] = c
        return True

    def lift() -> None:
        for u, old in undo.pop():
            avail[u] = old

    v = 0
    top = [0] * (n + 1)  # highest colour used among vertices < v
    trying = [0] * n
    while 0 <= v < n:
        cap = min(3, top[v] + 1)
        c = trying[v] + 1
        placed = False
        while c <= cap:
            if avail[v] >> (c - 1) & 1 and place(v, c):
                trying[v] = c
                top[v + 1] = max(top[v], c)
                placed = True
                break
            c += 1
        if placed:
            v += 1
            continue
        trying[v] = 0
        v -= 1
        if v >= 0:
            lift()
    if v < 0:
        return None
    return tuple(col)


def coloring_cnf(g: CircleGraph) -> Formula:
    """Direct encoding: variable ``3*i + c`` means vertex i gets colour c."""
    from .formula import formula_from_clauses

    n = g.n

    def x(i: int, c: int) -> int:
        return 3 * i + c

    cls: list[tuple[int, ...]] = []
    for i in range(n):
        cls.append((x(i, 1), x(i, 2), x(i, 3)))
        for a in range(1, 4):
            for b in range(a + 1, 4):
                cls.append((-x(i, a), -x(i, b)))
    for i, j in g.edges():
        for c in range(1, 4):
            cls.append((-x(i, c), -x(j, c)))
    return formula_from_clauses(cls, 3 * n)


def coloring_from_cnf(g: CircleGraph, a: Mapping[int, bool]) -> Coloring:
    return tuple(next(c for c in range(1, 4) if a[3 * i + c]) for i in range(g.n))


def _as_vector(g: CircleGraph, coloring) -> list:
    if isinstance(coloring, Mapping):
        out = []
        for i, lab in enumerate(g.labels):
            if i in coloring:
                out.append(coloring[i])
            elif lab in coloring:
                out.append(coloring[lab])
            else:
                raise ValueError(f"vertex {lab} has no colour")
        return out
    out = list(coloring)
    if len(out) != g.n:
        raise ValueError(f"colouring covers {len(out)} of {g.n} vertices")
    return out


def validate_coloring(g: CircleGraph, coloring) -> bool:
    """True iff the total colouring uses colours 1..3 and no edge is monochromatic.

    Accepts a sequence indexed by vertex or a mapping keyed by index or
    label; a partial colouring raises ValueError.
    """
    col = _as_vector(g, coloring)
    if any(c not in (1, 2, 3) for c in col):
        return False
    return all(col[i] != col[j] for i, j in g.edges())


# ---------------------------------------------------------------------------
# Reconstruction from pair variables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Reconstruction:
    coloring: Coloring | None
    diagnostic: str = ""
    classes: tuple[tuple[int, ...], ...] = field(default=(), repr=False)

    def __bool__(self) -> bool:
        return self.coloring is not None


class _DSU:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        a, b = self.find(a), self.find(b)
        if a != b:
            self.parent[max(a, b)] = min(a, b)


def _dsatur(adj: list[int]) -> list[int] | None:
    n = len(adj)
    col = [0] * n
    sat = [0] * n  # bitmask of neighbour colours
    for _ in range(n):
        v = max(
            (u for u in range(n) if not col[u]),
            key=lambda u: (bin(sat[u]).count("1"), bin(adj[u]).count("1"), -u),
        )
        free = [c for c in (1, 2, 3) if not sat[v] >> (c - 1) & 1]
        if not free:
            return None
        col[v] = free[0]
        for w in bits(adj[v]):
            sat[w] |= 1 << (free[0] - 1)
    return col


def _exact3(adj: list[int]) -> list[int] | None:
    n = len(adj)
    order = sorted(range(n), key=lambda u: -bin(adj[u]).count("1"))
    col = [0] * n

    def rec(k: int, top: int) -> bool:
        if k == n:
            return True
        v = order[k]
        used = {col[w] for w in bits(adj[v])}
        for c in range(1, min(3, top + 1) + 1):
            if c not in used:
                col[v] = c
                if rec(k + 1, max(top, c)):
                    return True
                col[v] = 0
        return False

    return col if rec(0, 0) else None


def reconstruct_coloring(
    g: CircleGraph, a: Mapping[Var, bool], exact_limit: int = 25
) -> Reconstruction:
    """Colour ``g`` so that the pair variables of ``a`` are respected.

    Vertices joined by a true pair variable are merged.  The quotient gets
    an edge for every edge of ``g`` and every false pair variable, and is
    coloured by DSATUR, falling back to exact search when it has at most
    ``exact_limit`` vertices.  Failure yields an empty result with a
    diagnostic; an improper colouring is never returned.
    """
    dsu = _DSU(g.n)
    pairs = [(v, bool(b)) for v, b in a.items() if isinstance(v, PairVar)]
    for v, b in pairs:
        if b:
            dsu.union(v.u, v.v)
    roots = sorted({dsu.find(i) for i in range(g.n)})
    rid = {r: k for k, r in enumerate(roots)}
    classes = [[] for _ in roots]
    for i in range(g.n):
        classes[rid[dsu.find(i)]].append(i)
    classes_t = tuple(tuple(c) for c in classes)
    q = [0] * len(roots)

    def link(i: int, j: int, why: str) -> str | None:
        ci, cj = rid[dsu.find(i)], rid[dsu.find(j)]
        if ci == cj:
            names = ",".join(g.labels[k] for k in classes[ci])
            return f"class {{{names}}} contains {why} {g.labels[i]}-{g.labels[j]}"
        q[ci] |= 1 << cj
        q[cj] |= 1 << ci
        return None

    for i, j in g.edges():
        err = link(i, j, "edge")
        if err:
            return Reconstruction(None, err, classes_t)
    for v, b in pairs:
        if not b:
            err = link(v.u, v.v, "false pair")
            if err:
                return Reconstruction(None, err, classes_t)
    qcol = _dsatur(q)
    how = "greedy"
    if qcol is None:
        if len(q) > exact_limit:
            return Reconstruction(
                None, f"greedy failed and quotient has {len(q)} > {exact_limit} classes", classes_t
            )
        qcol = _exact3(q)
        how = "exact"
        if qcol is None:
            return Reconstruction(None, "quotient graph is not 3-colourable", classes_t)
    col = tuple(qcol[rid[dsu.find(i)]] for i in range(g.n))
    if not validate_coloring(g, col):  # defensive; cannot happen by construction
        return Reconstruction(None, "lifted colouring is improper", classes_t)
    return Reconstruction(col, how, classes_t)
