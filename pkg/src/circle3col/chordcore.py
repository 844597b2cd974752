"""Chord diagrams, circle graphs and the nesting structure of chords.

Vertices are numbered densely ``0..n-1`` and adjacency is stored as one
integer bitset per vertex.  Labels are kept in a side table and only used
for I/O and printing.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Iterator, Mapping, Sequence


class DiagramError(ValueError):
    """Malformed chord diagram or unknown chord."""


class CapacityError(RuntimeError):
    """Instance too large for an exhaustive routine."""


class UnrealizableError(RuntimeError):
    """No chord diagram satisfies the requested adjacency and constraints."""


def natural_key(label: str):
    return [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", label)]


def bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


# ---------------------------------------------------------------------------
# Chord diagrams
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChordDiagram:
    """Endpoint sequence of chords drawn as arcs over a line.

    Every label must occur exactly twice.
    """

    endpoints: tuple[str, ...]
    _span: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "endpoints", tuple(str(e) for e in self.endpoints))
        first: dict[str, int] = {}
        span: dict[str, tuple[int, int]] = {}
        for pos, lab in enumerate(self.endpoints):
            if lab in span:
                raise DiagramError(f"label {lab!r} occurs more than twice")
            if lab in first:
                span[lab] = (first.pop(lab), pos)
            else:
                first[lab] = pos
        if first:
            lab = next(iter(first))
            raise DiagramError(f"label {lab!r} occurs only once")
        object.__setattr__(self, "_span", span)

    @classmethod
    def parse(cls, line: str) -> "ChordDiagram":
        return cls(tuple(line.split()))

    def __str__(self) -> str:
        return " ".join(self.endpoints)

    @property
    def labels(self) -> list[str]:
        return sorted(self._span, key=natural_key)

    def span(self, label: str) -> tuple[int, int]:
        try:
            return self._span[label]
        except KeyError:
            raise DiagramError(f"unknown chord {label!r}") from None

    def __len__(self) -> int:
        return len(self._span)


def read_diagrams(text: str) -> list[ChordDiagram]:
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(ChordDiagram.parse(line))
    return out


def chords_cross(a: tuple[int, int], b: tuple[int, int]) -> bool:
    (l1, r1), (l2, r2) = a, b
    return (l1 < l2 < r1) != (l1 < r2 < r1)


def encases(diagram: ChordDiagram, u: str, v: str) -> bool:
    """True iff both endpoints of ``v`` lie strictly between those of ``u``."""
    if u == v:
        raise DiagramError("a chord is never compared with itself")
    lu, ru = diagram.span(u)
    lv, rv = diagram.span(v)
    return lu < lv and rv < ru


def directly_encases(diagram: ChordDiagram, u: str, v: str) -> bool:
    if not encases(diagram, u, v):
        return False
    return not any(
        w != u and w != v and encases(diagram, u, w) and encases(diagram, w, v)
        for w in diagram._span
    )


# ---------------------------------------------------------------------------
# Circle graphs
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CircleGraph:
    labels: tuple[str, ...]
    adj: tuple[int, ...]
    diagram: ChordDiagram | None = None

    def __post_init__(self) -> None:
        if len(self.labels) != len(self.adj):
            raise ValueError("labels and adjacency differ in length")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate vertex label")
        for i, row in enumerate(self.adj):
            if row >> i & 1:
                raise ValueError(f"self-loop at {self.labels[i]!r}")
            for j in bits(row):
                if j >= len(self.adj) or not self.adj[j] >> i & 1:
                    raise ValueError("adjacency is not symmetric")

    # construction ---------------------------------------------------------

    @classmethod
    def from_edges(
        cls,
        labels: Sequence[str],
        edges: Iterable[tuple[str, str]],
        diagram: ChordDiagram | None = None,
    ) -> "CircleGraph":
        labels = tuple(str(x) for x in labels)
        index = {lab: i for i, lab in enumerate(labels)}
        adj = [0] * len(labels)
        for u, v in edges:
            i, j = index[str(u)], index[str(v)]
            if i == j:
                raise ValueError(f"self-loop at {u!r}")
            adj[i] |= 1 << j
            adj[j] |= 1 << i
        return cls(labels, tuple(adj), diagram)

    # queries --------------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown vertex {label!r}") from None

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adj[i] >> j & 1)

    def neighbors(self, i: int) -> list[int]:
        return list(bits(self.adj[i]))

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in bits(self.adj[i]) if j > i]

    @property
    def m(self) -> int:
        return sum(row.bit_count() for row in self.adj) // 2

    def edge_labels(self) -> set[frozenset[str]]:
        return {frozenset((self.labels[i], self.labels[j])) for i, j in self.edges()}

    def induced(self, vertices: Sequence[int]) -> "CircleGraph":
        pos = {v: k for k, v in enumerate(vertices)}
        adj = []
        for v in vertices:
            row = 0
            for w in bits(self.adj[v]):
                if w in pos:
                    row |= 1 << pos[w]
            adj.append(row)
        return CircleGraph(tuple(self.labels[v] for v in vertices), tuple(adj))

    def to_edge_list(self) -> str:
        return "".join(f"{self.labels[i]} {self.labels[j]}\n" for i, j in self.edges())


def parse_edge_list(text: str) -> CircleGraph:
    """Parse ``u v`` lines (``#`` starts a comment).  A lone label adds an isolated vertex."""
    labels: dict[str, None] = {}
    edges = []
    for line in text.splitlines():
        tok = line.split("#", 1)[0].split()
        if not tok:
            continue
        if len(tok) > 2:
            raise ValueError(f"bad edge line: {line!r}")
        for t in tok:
            labels.setdefault(t)
        if len(tok) == 2:
            edges.append((tok[0], tok[1]))
    return CircleGraph.from_edges(sorted(labels, key=natural_key), edges)


def adjacency_from_diagram(
    diagram: ChordDiagram, labels: Sequence[str] | None = None
) -> CircleGraph:
    """Circle graph of a diagram: chords are adjacent iff their endpoints interleave."""
    labels = tuple(labels) if labels is not None else tuple(diagram.labels)
    if sorted(labels) != sorted(diagram._span):
        raise DiagramError("label table does not match the diagram's chords")
    index = {lab: i for i, lab in enumerate(labels)}
    adj = [0] * len(labels)
    # sweep: a chord closing at pos crosses every chord opened after it and still open
    open_order: list[str] = []
    for lab in diagram.endpoints:
        if lab in open_order:
            k = open_order.index(lab)
            i = index[lab]
            for other in open_order[k + 1:]:
                j = index[other]
                adj[i] |= 1 << j
                adj[j] |= 1 << i
            del open_order[k]
        else:
            open_order.append(lab)
    return CircleGraph(labels, tuple(adj), diagram)


# ---------------------------------------------------------------------------
# Nesting structure: encasement, direct encasement, levels
# ---------------------------------------------------------------------------


class Nesting:
    """Encasement relation and levels of a diagram, indexed by graph vertex ids."""

    def __init__(self, diagram: ChordDiagram, labels: Sequence[str] | None = None):
        labels = tuple(labels) if labels is not None else tuple(diagram.labels)
        self.diagram = diagram
        self.labels = labels
        n = len(labels)
        self.span = [diagram.span(lab) for lab in labels]
        inner = [0] * n  # inner[u]: chords encased by u
        outer = [0] * n  # outer[v]: chords encasing v
        for u in range(n):
            lu, ru = self.span[u]
            for v in range(n):
                lv, rv = self.span[v]
                if lu < lv and rv < ru:
                    inner[u] |= 1 << v
                    outer[v] |= 1 << u
        self.inner = inner
        self.outer = outer
        # u directly encases v iff no encaser of v lies inside u
        direct_outer = [0] * n
        for v in range(n):
            for u in bits(outer[v]):
                if not inner[u] & outer[v]:
                    direct_outer[v] |= 1 << u
        self.direct_outer = direct_outer
        self.level = self._levels()

    def _levels(self) -> list[int]:
        n = len(self.labels)
        level = [0] * n
        # encasers are strictly longer, so decreasing length handles them first
        for v in sorted(range(n), key=lambda v: self.span[v][0] - self.span[v][1]):
            if not self.outer[v]:
                level[v] = 1
            else:
                level[v] = 1 + max(level[u] for u in bits(self.direct_outer[v]))
        return level

    def encases(self, u: int, v: int) -> bool:
        return bool(self.inner[u] >> v & 1)

    def directly_encases(self, u: int, v: int) -> bool:
        return bool(self.direct_outer[v] >> u & 1)

    def direct_pair(self, u: int, v: int) -> bool:
        return self.directly_encases(u, v) or self.directly_encases(v, u)

    def side_by_side(self, u: int, v: int) -> bool:
        (l1, r1), (l2, r2) = self.span[u], self.span[v]
        return r1 < l2 or r2 < l1

    def level_sets(self) -> list[set[int]]:
        top = max(self.level, default=0)
        out: list[set[int]] = [set() for _ in range(top)]
        for v, lvl in enumerate(self.level):
            out[lvl - 1].add(v)
        return out

    def level_masks(self) -> list[int]:
        return [sum(1 << v for v in s) for s in self.level_sets()]


def levels(diagram: ChordDiagram) -> dict[str, int]:
    """Level of every chord: 1 if unencased, else one more than its highest direct encaser."""
    nest = Nesting(diagram)
    return dict(zip(nest.labels, nest.level))


def nesting_of(graph: CircleGraph) -> Nesting:
    if graph.diagram is None:
        raise DiagramError("graph carries no chord diagram")
    return Nesting(graph.diagram, graph.labels)


# ---------------------------------------------------------------------------
# Book embeddings with a fixed spine order
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpineInstance:
    edges: tuple[tuple[str, str], ...]
    order: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "edges", tuple((str(u), str(v)) for u, v in self.edges))
        object.__setattr__(self, "order", tuple(str(v) for v in self.order))
        if len(set(self.order)) != len(self.order):
            raise ValueError("spine order repeats a vertex")
        seen = set(self.order)
        for u, v in self.edges:
            if u not in seen or v not in seen:
                raise ValueError(f"edge {u}-{v} uses a vertex missing from the order")
            if u == v:
                raise ValueError(f"self-loop at {u}")

    @classmethod
    def parse(cls, text: str) -> "SpineInstance":
        """``order: a b c`` line followed by ``u v`` edge lines."""
        order = None
        edges = []
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("order:"):
                order = line[len("order:"):].split()
            else:
                u, v = line.split()
                edges.append((u, v))
        if order is None:
            names: dict[str, None] = {}
            for u, v in edges:
                names.setdefault(u)
                names.setdefault(v)
            order = sorted(names, key=natural_key)
        return cls(tuple(edges), tuple(order))


def conflict_graph_from_book(instance: SpineInstance) -> CircleGraph:
    """Conflict graph of the edges under the spine order, with its chord diagram.

    Two edges conflict (cannot share a page) iff their four endpoints are
    distinct and alternate along the spine.
    """
    pos = {v: k for k, v in enumerate(instance.order)}
    chords = []
    for u, v in instance.edges:
        a, b = sorted((u, v), key=pos.__getitem__)
        chords.append((pos[a], pos[b], f"{a}-{b}"))
    names = [c[2] for c in chords]
    if len(set(names)) != len(names):
        raise ValueError("parallel edges are not supported")
    # endpoints sharing a spine vertex: closing arcs first (inner first),
    # then opening arcs (outer first), so arcs sharing a vertex never interleave
    slots: list[tuple[int, int, int, str]] = []
    for a, b, name in chords:
        slots.append((a, 1, -b, name))
        slots.append((b, 0, -a, name))
    slots.sort()
    diagram = ChordDiagram(tuple(s[3] for s in slots))
    return adjacency_from_diagram(diagram, names)


# ---------------------------------------------------------------------------
# Small exact helpers
# ---------------------------------------------------------------------------


def common_neighbor_pairs(graph: CircleGraph) -> set[tuple[int, int]]:
    """Non-adjacent pairs ``(i, j)``, ``i < j``, that share a neighbour."""
    out = set()
    for i, j in combinations(range(graph.n), 2):
        if not graph.has_edge(i, j) and graph.adj[i] & graph.adj[j]:
            out.add((i, j))
    return out


def find_induced_k4(graph: CircleGraph) -> tuple[int, int, int, int] | None:
    adj = graph.adj
    for a in range(graph.n):
        for b in bits(adj[a] >> (a + 1) << (a + 1)):
            common = adj[a] & adj[b] & ~((1 << (b + 1)) - 1)
            for c in bits(common):
                rest = common & adj[c] & ~((1 << (c + 1)) - 1)
                if rest:
                    return (a, b, c, next(bits(rest)))
    return None


# ---------------------------------------------------------------------------
# Exhaustive realizer for tiny instances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiagramConstraints:
    """Nesting facts a realization must satisfy (labels refer to the graph).

    ``children`` fixes the exact set of chords each listed chord directly
    encases; ``levels`` fixes the level of each listed chord.
    """

    encases: frozenset[tuple[str, str]] = frozenset()
    not_encases: frozenset[tuple[str, str]] = frozenset()
    children: Mapping[str, frozenset[str]] = field(default_factory=dict)
    levels: Mapping[str, int] = field(default_factory=dict)

    def violations(self, graph: CircleGraph, diagram: ChordDiagram) -> list[str]:
        nest = Nesting(diagram, graph.labels)
        ix = graph.index
        bad = []
        for u, v in sorted(self.encases):
            if not nest.encases(ix(u), ix(v)):
                bad.append(f"{u} must encase {v}")
        for u, v in sorted(self.not_encases):
            if nest.encases(ix(u), ix(v)):
                bad.append(f"{u} must not encase {v}")
        for u, kids in sorted(self.children.items()):
            got = {graph.labels[w] for w in range(graph.n) if nest.directly_encases(ix(u), w)}
            if got != set(kids):
                bad.append(f"{u} directly encases {sorted(got, key=natural_key)}, expected {sorted(kids, key=natural_key)}")
        for v, lvl in sorted(self.levels.items()):
            if nest.level[ix(v)] != lvl:
                bad.append(f"{v} on level {nest.level[ix(v)]}, expected {lvl}")
        return bad


def realize_diagram(
    graph: CircleGraph,
    constraints: DiagramConstraints | None = None,
    max_vertices: int = 12,
) -> ChordDiagram:
    """Find a chord diagram whose crossings are exactly the graph's edges.

    Chords are inserted one at a time (BFS order) at every pair of gap
    positions; partial placements whose crossings disagree with the graph,
    or which break a required encasement, are pruned.  Exponential; meant
    for graphs with a dozen vertices at most.
    """
    if graph.n > max_vertices:
        raise CapacityError(f"{graph.n} vertices exceeds realizer bound {max_vertices}")
    constraints = constraints or DiagramConstraints()
    if graph.n == 0:
        return ChordDiagram(())
    ix = graph.index
    must_in: dict[int, list[int]] = {}
    must_out: dict[int, list[int]] = {}
    required = set(constraints.encases)
    for u, kids in constraints.children.items():
        required.update((u, k) for k in kids)
    for u, v in required:
        must_in.setdefault(ix(v), []).append(ix(u))
        must_in.setdefault(ix(u), []).append(ix(v))
    for u, v in constraints.not_encases:
        must_out.setdefault(ix(v), []).append(ix(u))
        must_out.setdefault(ix(u), []).append(ix(v))
    req_pairs = {(ix(u), ix(v)) for u, v in required}
    forbid_pairs = {(ix(u), ix(v)) for u, v in constraints.not_encases}

    order = _bfs_order(graph)

    def consistent(seq: list[int], v: int) -> bool:
        where = [i for i, x in enumerate(seq) if x == v]
        lv, rv = where
        inside = seq[lv + 1:rv]
        count: dict[int, int] = {}
        for x in inside:
            count[x] = count.get(x, 0) + 1
        crossing = {x for x, c in count.items() if c == 1}
        placed = set(seq) - {v}
        want = {w for w in placed if graph.has_edge(v, w)}
        if crossing != want:
            return False
        for w in must_in.get(v, []) + must_out.get(v, []):
            if w not in placed:
                continue
            wl, wr = [i for i, x in enumerate(seq) if x == w]
            v_in_w = wl < lv and rv < wr
            w_in_v = lv < wl and wr < rv
            if (w, v) in req_pairs and not v_in_w:
                return False
            if (v, w) in req_pairs and not w_in_v:
                return False
            if (w, v) in forbid_pairs and v_in_w:
                return False
            if (v, w) in forbid_pairs and w_in_v:
                return False
        return True

    def search(seq: list[int], k: int) -> list[int] | None:
        if k == len(order):
            diagram = ChordDiagram(tuple(graph.labels[x] for x in seq))
            if not constraints.violations(graph, diagram):
                return seq
            return None
        v = order[k]
        gaps = len(seq) + 1
        for a in range(gaps):
            for b in range(a, gaps):
                cand = seq[:a] + [v] + seq[a:b] + [v] + seq[b:]
                if consistent(cand, v):
                    found = search(cand, k + 1)
                    if found is not None:
                        return found
        return None

    found = search([], 0)
    if found is None:
        raise UnrealizableError("unrealizable under constraints")
    return ChordDiagram(tuple(graph.labels[x] for x in found))


def _bfs_order(graph: CircleGraph) -> list[int]:
    seen: list[int] = []
    mark = set()
    for s in range(graph.n):
        if s in mark:
            continue
        queue = [s]
        mark.add(s)
        while queue:
            v = queue.pop(0)
            seen.append(v)
            for w in graph.neighbors(v):
                if w not in mark:
                    mark.add(w)
                    queue.append(w)
    return seen
