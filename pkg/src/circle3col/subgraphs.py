"""Candidate and important induced subgraphs.

The candidate family holds every induced tail-triangle, square (C4),
box-slash (K4 minus an edge), pentagon (C5) and longer induced cycle.
The important family keeps those candidates the nesting filter accepts.
"""
from __future__ import annotations

import enum
import itertools
import warnings
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .chordcore import CapacityError, CircleGraph, Nesting, bits, find_induced_k4, nesting_of


class K4Error(ValueError):
    pass


class Kind(enum.IntEnum):
    TAIL_TRIANGLE = 0
    SQUARE = 1
    BOX_SLASH = 2
    PENTAGON = 3
    LONG_CYCLE = 4


KIND_NAMES = {
    Kind.TAIL_TRIANGLE: "TailTriangle",
    Kind.SQUARE: "Square",
    Kind.BOX_SLASH: "BoxSlash",
    Kind.PENTAGON: "Pentagon",
    Kind.LONG_CYCLE: "LongCycle",
}


class Variant(enum.Enum):
    EXTENDED_ABSTRACT = "ea"
    THESIS = "thesis"


Pair = tuple[int, int]


def pair(u: int, v: int) -> Pair:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class ImportantSubgraph:
    """An induced pattern with the non-adjacent pairs it constrains.

    Vertex order: cycles in cyclic order starting at their smallest vertex;
    tail-triangles as (pendant, its triangle neighbour, other two);
    box-slashes with the non-adjacent pair first.
    """

    kind: Kind
    vertices: tuple[int, ...]
    pairs: tuple[Pair, ...]

    @property
    def is_cycle(self) -> bool:
        return self.kind in (Kind.PENTAGON, Kind.LONG_CYCLE)

    def kind_name(self) -> str:
        if self.kind is Kind.LONG_CYCLE:
            return f"LongCycle({len(self.vertices)})"
        return KIND_NAMES[self.kind]

    def sort_key(self):
        return (self.kind, self.vertices)

    def describe(self, labels: Sequence[str]) -> str:
        vs = " ".join(labels[v] for v in self.vertices)
        ps = " ".join("{%s,%s}" % (labels[a], labels[b]) for a, b in self.pairs)
        return f"{self.kind_name()} {vs} | pairs: {ps}"


# ---------------------------------------------------------------------------
# Pattern constructors
# ---------------------------------------------------------------------------


def make_cycle(vertices: Sequence[int]) -> ImportantSubgraph:
    k = len(vertices)
    if k < 5:
        raise ValueError("cycle patterns need at least 5 vertices")
    s = min(range(k), key=lambda i: vertices[i])
    rot = list(vertices[s:]) + list(vertices[:s])
    if rot[-1] < rot[1]:
        rot = [rot[0]] + rot[:0:-1]
    pairs = tuple(sorted(pair(rot[i], rot[(i + 2) % k]) for i in range(k)))
    kind = Kind.PENTAGON if k == 5 else Kind.LONG_CYCLE
    return ImportantSubgraph(kind, tuple(rot), pairs)


def make_tail_triangle(pendant: int, hub: int, q1: int, q2: int) -> ImportantSubgraph:
    q1, q2 = sorted((q1, q2))
    return ImportantSubgraph(
        Kind.TAIL_TRIANGLE, (pendant, hub, q1, q2), (pair(pendant, q1), pair(pendant, q2))
    )


def make_square(a: int, b: int, c: int, d: int) -> ImportantSubgraph:
    """Square on the 4-cycle a-b-c-d-a."""
    cyc = [a, b, c, d]
    s = cyc.index(min(cyc))
    cyc = cyc[s:] + cyc[:s]
    if cyc[3] < cyc[1]:
        cyc = [cyc[0], cyc[3], cyc[2], cyc[1]]
    return ImportantSubgraph(
        Kind.SQUARE, tuple(cyc), tuple(sorted((pair(cyc[0], cyc[2]), pair(cyc[1], cyc[3]))))
    )


def make_box_slash(u: int, v: int, a: int, b: int) -> ImportantSubgraph:
    """Box-slash whose only non-edge is {u, v}."""
    u, v = sorted((u, v))
    a, b = sorted((a, b))
    return ImportantSubgraph(Kind.BOX_SLASH, (u, v, a, b), ((u, v),))


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------


def _mask_above(v: int) -> int:
    return ~((1 << (v + 1)) - 1)


def tail_triangles(g: CircleGraph, allowed: int | None = None) -> Iterator[ImportantSubgraph]:
    adj = g.adj
    full = (1 << g.n) - 1 if allowed is None else allowed
    for a in bits(full):
        for b in bits(adj[a] & full & _mask_above(a)):
            for c in bits(adj[a] & adj[b] & full & _mask_above(b)):
                tri = (a, b, c)
                for hub, x, y in ((a, b, c), (b, a, c), (c, a, b)):
                    pend = adj[hub] & full & ~adj[x] & ~adj[y] & ~(1 << x) & ~(1 << y)
                    for p in bits(pend):
                        if p in tri:
                            continue
                        yield make_tail_triangle(p, hub, x, y)


def box_slashes(g: CircleGraph, allowed: int | None = None) -> Iterator[ImportantSubgraph]:
    adj = g.adj
    full = (1 << g.n) - 1 if allowed is None else allowed
    for a in bits(full):
        for b in bits(adj[a] & full & _mask_above(a)):
            common = adj[a] & adj[b] & full
            for u in bits(common):
                for v in bits(common & _mask_above(u) & ~adj[u]):
                    yield make_box_slash(u, v, a, b)


def squares(g: CircleGraph, allowed: int | None = None) -> Iterator[ImportantSubgraph]:
    adj = g.adj
    full = (1 << g.n) - 1 if allowed is None else allowed
    for a in bits(full):
        for c in bits(full & _mask_above(a) & ~adj[a]):
            common = adj[a] & adj[c] & full & _mask_above(a)
            for b in bits(common):
                for d in bits(common & _mask_above(b) & ~adj[b]):
                    yield make_square(a, b, c, d)


def induced_cycles(
    g: CircleGraph, kmin: int, kmax: int, allowed: int | None = None
) -> Iterator[tuple[int, ...]]:
    """Induced cycles with ``kmin <= length <= kmax``, each reported once.

    Each cycle is grown as an induced path from its smallest vertex ``s``;
    the direction is fixed by requiring the second vertex to be smaller
    than the last.
    """
    adj = g.adj
    full = (1 << g.n) - 1 if allowed is None else allowed
    for s in bits(full):
        above = full & _mask_above(s)
        ns = adj[s]
        for p1 in bits(ns & above):
            path = [s, p1]
            start = (1 << s) | (1 << p1)
            # blocked: path vertices and neighbours of internal path vertices
            stack = [(start, iter(list(bits(adj[p1] & above & ~start))))]
            while stack:
                blocked, it = stack[-1]
                w = next(it, None)
                if w is None:
                    stack.pop()
                    path.pop()
                    continue
                if ns >> w & 1:
                    if len(path) >= 3 and len(path) + 1 >= kmin and p1 < w:
                        yield tuple(path) + (w,)
                    continue
                if len(path) + 2 > kmax:
                    continue
                nb = blocked | (1 << w) | adj[path[-1]]
                path.append(w)
                stack.append((nb, iter(list(bits(adj[w] & above & ~nb)))))


def enumerate_candidates(
    g: CircleGraph, max_cycle: int = 12, allowed: int | None = None, check_k4: bool = True
) -> list[ImportantSubgraph]:
    """All induced candidate patterns, canonically sorted."""
    if max_cycle < 5:
        raise ValueError("max_cycle must be at least 5")
    if check_k4:
        k4 = find_induced_k4(g)
        if k4 is not None:
            raise K4Error("graph contains an induced K4 on " + " ".join(g.labels[v] for v in k4))
    found = set(tail_triangles(g, allowed))
    found.update(squares(g, allowed))
    found.update(box_slashes(g, allowed))
    found.update(make_cycle(c) for c in induced_cycles(g, 5, max_cycle, allowed))
    if _cycle_cap_may_truncate(g, max_cycle, allowed):
        warnings.warn(
            f"induced cycles longer than {max_cycle} may exist and were not enumerated",
            stacklevel=2,
        )
    return sorted(found, key=ImportantSubgraph.sort_key)


def _cycle_cap_may_truncate(g: CircleGraph, max_cycle: int, allowed: int | None) -> bool:
    full = (1 << g.n) - 1 if allowed is None else allowed
    return full.bit_count() > max_cycle and any(
        True for _ in induced_cycles(g, max_cycle + 1, max_cycle + 1, allowed)
    )


# ---------------------------------------------------------------------------
# Filtering
# ---------------------------------------------------------------------------


def _pair_ok_ea(nest: Nesting, u: int, v: int) -> bool:
    return nest.level[u] == nest.level[v] or nest.direct_pair(u, v)


def _within_two_levels(nest: Nesting, vertices: Iterable[int]) -> bool:
    lv = [nest.level[v] for v in vertices]
    return max(lv) - min(lv) <= 1


def keeps(h: ImportantSubgraph, nest: Nesting, variant: Variant) -> bool:
    if h.is_cycle:
        return _within_two_levels(nest, h.vertices)
    if variant is Variant.THESIS:
        if h.kind is Kind.TAIL_TRIANGLE:
            p, _, q1, q2 = h.vertices
            return _within_two_levels(nest, (p, q1, q2))
        if h.kind is Kind.BOX_SLASH:
            u, v = h.pairs[0]
            return nest.direct_pair(u, v) or nest.side_by_side(u, v)
    return all(_pair_ok_ea(nest, u, v) for u, v in h.pairs)


def filter_important(
    candidates: Iterable[ImportantSubgraph], nest: Nesting, variant: Variant = Variant.EXTENDED_ABSTRACT
) -> list[ImportantSubgraph]:
    return [h for h in candidates if keeps(h, nest, variant)]


def important_subgraphs(
    g: CircleGraph, variant: Variant = Variant.EXTENDED_ABSTRACT, max_cycle: int = 12
) -> list[ImportantSubgraph]:
    """The important family of ``g`` under its own chord diagram.

    Same result as filtering ``enumerate_candidates``, but cycles are only
    searched inside each union of two consecutive levels, which is where
    the filter can keep them.
    """
    k4 = find_induced_k4(g)
    if k4 is not None:
        raise K4Error("graph contains an induced K4 on " + " ".join(g.labels[v] for v in k4))
    nest = nesting_of(g)
    found = set(tail_triangles(g))
    found.update(squares(g))
    found.update(box_slashes(g))
    out = [h for h in found if keeps(h, nest, variant)]
    masks = nest.level_masks() or [0]
    windows = [masks[i] | (masks[i + 1] if i + 1 < len(masks) else 0) for i in range(len(masks))]
    cycles = set()
    truncated = False
    for win in windows:
        cycles.update(induced_cycles(g, 5, max_cycle, win))
        if not truncated and _cycle_cap_may_truncate(g, max_cycle, win):
            truncated = True
    if truncated:
        warnings.warn(
            f"induced cycles longer than {max_cycle} may exist and were not enumerated",
            stacklevel=2,
        )
    out.extend(make_cycle(c) for c in cycles)
    return sorted(set(out), key=ImportantSubgraph.sort_key)


# ---------------------------------------------------------------------------
# Realizable auxiliary assignments (brute force)
# ---------------------------------------------------------------------------


def three_colorings(g: CircleGraph, vertices: Sequence[int]) -> Iterator[dict[int, int]]:
    """Every proper 3-colouring of the subgraph induced by ``vertices``."""
    vs = list(vertices)
    col: dict[int, int] = {}

    def rec(k: int):
        if k == len(vs):
            yield dict(col)
            return
        v = vs[k]
        for c in (1, 2, 3):
            if all(col.get(w) != c for w in g.neighbors(v)):
                col[v] = c
                yield from rec(k + 1)
                del col[v]

    yield from rec(0)


def realizable_assignments(
    h: ImportantSubgraph, g: CircleGraph, max_vertices: int = 20
) -> set[tuple[bool, ...]]:
    """Distinct equal/unequal patterns on ``h.pairs`` over all 3-colourings of ``h``."""
    if len(h.vertices) > max_vertices:
        raise CapacityError(f"{len(h.vertices)} vertices exceeds bound {max_vertices}")
    return {
        tuple(col[a] == col[b] for a, b in h.pairs) for col in three_colorings(g, h.vertices)
    }


def matches_kind(h: ImportantSubgraph, g: CircleGraph) -> bool:
    """Naive check that ``h.vertices`` induce the declared pattern."""
    vs = h.vertices
    k = len(vs)
    edges = {pair(a, b) for a, b in itertools.combinations(vs, 2) if g.has_edge(a, b)}
    if h.is_cycle:
        ring = {pair(vs[i], vs[(i + 1) % k]) for i in range(k)}
        return k >= 5 and edges == ring
    if k != 4:
        return False
    if h.kind is Kind.SQUARE:
        return edges == {pair(vs[i], vs[(i + 1) % 4]) for i in range(4)}
    if h.kind is Kind.BOX_SLASH:
        u, v, a, b = vs
        return edges == {pair(x, y) for x, y in itertools.combinations(vs, 2)} - {pair(u, v)}
    if h.kind is Kind.TAIL_TRIANGLE:
        p, hub, x, y = vs
        return edges == {pair(hub, x), pair(hub, y), pair(x, y), pair(p, hub)}
    return False
