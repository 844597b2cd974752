"""Random 3-colourable, K4-free circle graphs built chord by chord.

Each step places the two endpoints of a new chord at two distinct random
cells of the endpoint sequence grown by two.  The chord is kept only if
the graph stays K4-free and the maintained colouring extends to it (first
free colour); otherwise both endpoints are re-rolled.
"""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .chordcore import ChordDiagram, CircleGraph, adjacency_from_diagram, bits


class GenerationError(RuntimeError):
    def __init__(self, msg: str, achieved: int):
        super().__init__(f"{msg} (achieved {achieved} vertices)")
        self.achieved = achieved


@dataclass(frozen=True)
class GenParams:
    target_n: int
    seed: int = 0
    max_retries_per_vertex: int = 1000

    def __post_init__(self) -> None:
        if self.target_n < 3:
            raise ValueError("target_n must be at least 3")
        if self.max_retries_per_vertex < 1:
            raise ValueError("max_retries_per_vertex must be positive")


@dataclass(frozen=True)
class GeneratedInstance:
    graph: CircleGraph
    witness: tuple[int, ...]
    seed: int

    @property
    def n(self) -> int:
        return self.graph.n


def _closes_k4(adj: list[int], nbrs: int) -> bool:
    """True if the neighbourhood ``nbrs`` contains a triangle."""
    for u in bits(nbrs):
        common = adj[u] & nbrs
        for w in bits(common):
            if adj[w] & common:
                return True
    return False


def gen_instance(p: GenParams) -> GeneratedInstance:
    rng = np.random.default_rng(p.seed)
    seq = np.empty(0, dtype=np.int64)
    adj: list[int] = []
    color: list[int] = []
    while len(adj) < p.target_n:
        v = len(adj)
        for _ in range(p.max_retries_per_vertex):
            # cells i < j of the grown sequence; old endpoints in seq[a:b] end up enclosed
            i, j = np.sort(rng.choice(len(seq) + 2, size=2, replace=False))
            a, b = int(i), int(j) - 1
            # a chord crosses the new one iff exactly one of its endpoints is enclosed
            inside = np.bincount(seq[a:b], minlength=v)
            nbrs = 0
            for w in np.flatnonzero(inside == 1):
                nbrs |= 1 << int(w)
            if _closes_k4(adj, nbrs):
                continue
            used = {color[w] for w in bits(nbrs)}
            free = [c for c in (1, 2, 3) if c not in used]
            if not free:
                continue
            for w in bits(nbrs):
                adj[w] |= 1 << v
            adj.append(nbrs)
            color.append(free[0])
            seq = np.concatenate((seq[:a], [v], seq[a:b], [v], seq[b:]))
            break
        else:
            raise GenerationError("retry budget exhausted", v)
    labels = tuple(f"v{i + 1}" for i in range(p.target_n))
    diagram = ChordDiagram(tuple(labels[i] for i in seq))
    graph = CircleGraph(labels, tuple(adj), diagram)
    return GeneratedInstance(graph, tuple(color), p.seed)


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------


def format_instance(inst: GeneratedInstance) -> str:
    g = inst.graph
    lines = [f"{g.n} {g.m} {inst.seed}", str(g.diagram)]
    lines += [f"{g.labels[i]} {g.labels[j]}" for i, j in g.edges()]
    lines.append(" ".join(map(str, inst.witness)))
    return "\n".join(lines) + "\n"


def parse_instance(text: str) -> GeneratedInstance:
    """Inverse of :func:`format_instance`; the edge list must match the diagram."""
    lines = [l for l in text.splitlines() if l.strip() and not l.startswith("#")]
    if len(lines) < 3:
        raise ValueError("instance file too short")
    try:
        n, m, seed = map(int, lines[0].split())
    except ValueError as exc:
        raise ValueError(f"bad header line: {lines[0]!r}") from exc
    diagram = ChordDiagram.parse(lines[1])
    edges = [tuple(l.split()) for l in lines[2 : 2 + m]]
    if len(edges) != m or any(len(e) != 2 for e in edges):
        raise ValueError("edge list does not match header")
    if len(lines) != 3 + m:
        raise ValueError("expected one witness line after the edges")
    labels = diagram.labels
    if len(labels) != n:
        raise ValueError(f"header says {n} vertices, diagram has {len(labels)}")
    graph = CircleGraph.from_edges(labels, edges, diagram=diagram)
    if adjacency_from_diagram(diagram, labels).adj != graph.adj:
        raise ValueError("edge list disagrees with the diagram")
    witness = tuple(int(t) for t in lines[2 + m].split())
    if len(witness) != n:
        raise ValueError("witness does not cover every vertex")
    return GeneratedInstance(graph, witness, seed)


def write_instance(inst: GeneratedInstance, path: str | os.PathLike) -> None:
    Path(path).write_text(format_instance(inst))


def read_instance(path: str | os.PathLike) -> GeneratedInstance:
    return parse_instance(Path(path).read_text())


MANIFEST = "manifest.csv"


def gen_corpus(
    count: int, n_min: int, n_max: int, seed: int, directory: str | os.PathLike,
    max_retries_per_vertex: int = 1000,
) -> list[dict]:
    """Write ``count`` instances and ``manifest.csv``; instance ``i`` uses seed ``seed + i``."""
    if count < 1 or n_min < 3 or n_max < n_min:
        raise ValueError("need count >= 1 and 3 <= n_min <= n_max")
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    sizes = np.random.default_rng(seed).integers(n_min, n_max + 1, size=count)
    rows = []
    for i, n in enumerate(sizes):
        inst = gen_instance(GenParams(int(n), seed + i, max_retries_per_vertex))
        name = f"inst_{i:04d}.txt"
        write_instance(inst, out / name)
        rows.append({"file": name, "n": inst.n, "m": inst.graph.m, "seed": seed + i})
    with open(out / MANIFEST, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["file", "n", "m", "seed"], lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return rows


def read_manifest(directory: str | os.PathLike) -> list[dict]:
    with open(Path(directory) / MANIFEST, newline="") as fh:
        return [
            {"file": r["file"], "n": int(r["n"]), "m": int(r["m"]), "seed": int(r["seed"])}
            for r in csv.DictReader(fh)
        ]
