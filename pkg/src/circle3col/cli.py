"""Command-line front end and benchmark harness.

Graph arguments accept the built-in names ``ea`` and ``c5`` or a file:
a generated instance (``n m seed`` header), a spine instance (``order:``
line plus edges, converted to its conflict graph), a single chord-diagram
line, or a plain edge list (realized as a diagram when small enough).
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence
from xml.sax.saxutils import escape

from . import counterexamples as cx
from .chordcore import (
    ChordDiagram,
    CircleGraph,
    SpineInstance,
    adjacency_from_diagram,
    conflict_graph_from_book,
    nesting_of,
    parse_edge_list,
    realize_diagram,
)
from .formula import build_phi, evaluate, export_dimacs
from .generator import gen_corpus, parse_instance, read_manifest
from .solvers import (
    SAT,
    format_trace,
    parse_order,
    reconstruct_coloring,
    scripted_policy,
    solve,
    validate_coloring,
)
from .subgraphs import Variant, important_subgraphs

log = logging.getLogger("circle3col")

CORPUS_ENV = "CIRCLE3COL_CORPUS"
METHODS = ("unger", "chrono", "dpll")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Input
# ---------------------------------------------------------------------------


def load_graph(source: str) -> CircleGraph:
    if source == "ea":
        return cx.instance_ea().graph
    if source == "c5":
        return cx.instance_c5().graph
    path = Path(source)
    if not path.exists():
        raise UsageError(f"no such file or built-in instance: {source}")
    text = path.read_text()
    lines = [l for l in text.splitlines() if l.strip() and not l.lstrip().startswith("#")]
    if not lines:
        raise UsageError(f"{source} is empty")
    head = lines[0].split()
    if len(head) == 3 and all(t.lstrip("-").isdigit() for t in head):
        return parse_instance(text).graph
    if any(l.strip().startswith("order:") for l in lines):
        return conflict_graph_from_book(SpineInstance.parse(text))
    if len(lines) == 1 and len(head) > 2:
        return adjacency_from_diagram(ChordDiagram.parse(lines[0]))
    g = parse_edge_list(text)
    d = realize_diagram(g)
    return adjacency_from_diagram(d, g.labels)


def _variant(name: str) -> Variant:
    return Variant(name)


def _phi(g: CircleGraph, variant: Variant, max_cycle: int):
    return build_phi(g, important_subgraphs(g, variant, max_cycle))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_convert(args) -> int:
    inst = SpineInstance.parse(Path(args.file).read_text())
    g = conflict_graph_from_book(inst)
    print(g.diagram)
    sys.stdout.write(g.to_edge_list())
    return 0


def cmd_levels(args) -> int:
    g = load_graph(args.graph)
    nest = nesting_of(g)
    for k, vs in enumerate(nest.level_sets(), start=1):
        print(f"{k}: " + " ".join(g.labels[v] for v in sorted(vs)))
    return 0


def cmd_subgraphs(args) -> int:
    g = load_graph(args.graph)
    for h in important_subgraphs(g, _variant(args.variant), args.max_cycle):
        print(h.describe(g.labels))
    return 0


def cmd_formula(args) -> int:
    g = load_graph(args.graph)
    phi = _phi(g, _variant(args.variant), args.max_cycle)
    if args.dimacs:
        Path(args.dimacs).write_text(export_dimacs(phi, dedupe=args.dedupe))
        print(f"wrote {phi.num_vars} variables, {len(phi.clauses)} clauses to {args.dimacs}")
        return 0
    for c, s in zip(phi.clauses, phi.provenance):
        print(f"{phi.clause_str(c)}    [{phi.sources[s].describe(g.labels)}]")
    print(f"# {phi.num_vars} variables ({len(phi.pair_vars())} pair), {len(phi.clauses)} clauses")
    return 0


def _order_and_policy(args, phi):
    order = None
    policy = args.jump_policy
    if args.order:
        order = parse_order(phi, Path(args.order).read_text())
    elif args.graph == "c5":
        order = parse_order(phi, " ".join(cx.C5_ORDER))
    if args.script is not None:
        script = [int(t) for t in args.script.split(",") if t.strip()]
        policy = scripted_policy(script)
    elif args.graph == "c5" and args.order is None and args.jump_policy == "deepest" and not args.no_script:
        policy = scripted_policy(cx.C5_JUMP_SCRIPT)
    return order, policy


def cmd_solve(args) -> int:
    g = load_graph(args.graph)
    phi = _phi(g, _variant(args.variant), args.max_cycle)
    order, policy = _order_and_policy(args, phi)
    kw = {}
    if args.method == "unger":
        kw = {"trace": args.trace, "jump_policy": policy}
    res = solve(phi, args.method, order, args.budget, **kw)
    if args.trace and args.method == "unger":
        for line in format_trace(phi, res.trace, include_repeats=args.all_events):
            print(line)
    print(f"outcome={res.outcome} leaves={res.leaves} jumps={res.jumps} nodes={res.nodes}")
    return 0


def cmd_color(args) -> int:
    g = load_graph(args.graph)
    phi = _phi(g, _variant(args.variant), args.max_cycle)
    res = solve(phi, args.method, None, args.budget)
    print(f"outcome={res.outcome}")
    if not res.sat:
        return 1
    a = {phi.variables[k - 1]: v for k, v in res.assignment.items()}
    rec = reconstruct_coloring(g, a)
    if rec.coloring is None:
        print(f"reconstruction failed: {rec.diagnostic}")
        return 1
    ok = validate_coloring(g, rec.coloring)
    print(" ".join(f"{g.labels[i]}={c}" for i, c in enumerate(rec.coloring)))
    print(f"valid={'yes' if ok else 'no'}")
    return 0 if ok else 1


def cmd_verify(args) -> int:
    if args.which == "ea":
        inst = cx.instance_ea()
        variant = Variant.EXTENDED_ABSTRACT
    elif args.which == "c5":
        inst = cx.instance_c5()
        variant = Variant.EXTENDED_ABSTRACT
    else:
        if not args.data:
            raise UsageError("verify thesis needs --data FILE")
        inst = cx.load_thesis_instance(args.data)
        variant = Variant.THESIS
    rep = cx.verify(inst, variant)
    print(rep.render())
    return 0 if rep.overall else 1


def cmd_gen(args) -> int:
    rows = gen_corpus(args.count, args.nmin, args.nmax, args.seed, args.out)
    print(f"wrote {len(rows)} instances to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# Benchmark
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BenchRecord:
    instance_id: str
    n: int
    m: int
    method: str
    outcome: str
    leaves: int
    jumps: int
    elapsed_ms: float
    coloring_valid: str  # yes | no | n/a


HEADER = [f.name for f in fields(BenchRecord)]


def _bench_instance(task) -> list[BenchRecord]:
    path, methods, budget, no_time = task
    name = Path(path).name
    try:
        inst = parse_instance(Path(path).read_text())
    except (ValueError, OSError) as exc:
        log.warning("skipping %s: %s", name, exc)
        return []
    g = inst.graph
    phi = build_phi(g, important_subgraphs(g))
    out = []
    for method in methods:
        res = solve(phi, method, None, budget)
        valid = "n/a"
        if res.sat:
            if evaluate(phi, res.assignment).status != "satisfied":
                raise AssertionError(f"{method} returned a non-satisfying assignment on {name}")
            rec = reconstruct_coloring(g, {phi.variables[k - 1]: v for k, v in res.assignment.items()})
            valid = "yes" if rec.coloring is not None and validate_coloring(g, rec.coloring) else "no"
        ms = 0.0 if no_time else round(res.elapsed * 1000, 1)
        out.append(BenchRecord(name, g.n, g.m, method, res.outcome, res.leaves, res.jumps, ms, valid))
    return out


@dataclass
class BenchSummary:
    records: list[BenchRecord]

    def by_method(self, method: str) -> list[BenchRecord]:
        return [r for r in self.records if r.method == method]

    def solve_rate(self, method: str, n_min: int = 0) -> float:
        rs = [r for r in self.by_method(method) if r.n >= n_min]
        return sum(r.outcome == SAT for r in rs) / len(rs) if rs else float("nan")

    def false_negative_rate(self, method: str) -> float:
        # every corpus instance carries a witness colouring, so unsat is always wrong
        rs = self.by_method(method)
        return sum(r.outcome == "unsat" for r in rs) / len(rs) if rs else float("nan")

    def lines(self) -> list[str]:
        out = []
        for method in sorted({r.method for r in self.records}):
            rs = self.by_method(method)
            solved = [r.leaves for r in rs if r.outcome == SAT]
            valid = sum(r.coloring_valid == "yes" for r in rs)
            leaf = f"median leaves {statistics.median(solved):g}" if solved else "no solved instances"
            out.append(
                f"{method}: {len(rs)} runs, solve rate {self.solve_rate(method):.2f}, "
                f"false negatives {self.false_negative_rate(method):.2f}, "
                f"valid colourings {valid}/{len(solved)}, {leaf}"
            )
        return out


def run_bench(
    corpus: str | os.PathLike,
    methods: Sequence[str] = METHODS,
    budget: float | None = 10.0,
    csv_out: str | os.PathLike | None = None,
    no_time: bool = False,
    jobs: int = 1,
) -> BenchSummary:
    """Run every method on every corpus instance; records sorted by (instance, method)."""
    for m in methods:
        if m not in METHODS:
            raise UsageError(f"unknown method {m!r}")
    corpus = Path(corpus)
    if (corpus / "manifest.csv").exists():
        files = [corpus / r["file"] for r in read_manifest(corpus)]
    else:
        files = sorted(corpus.glob("*.txt"))
    tasks = [(str(f), tuple(methods), budget, no_time) for f in files]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_bench_instance, tasks))
    else:
        chunks = [_bench_instance(t) for t in tasks]
    rank = {m: i for i, m in enumerate(METHODS)}
    records = sorted((r for c in chunks for r in c), key=lambda r: (r.instance_id, rank[r.method]))
    if csv_out is not None:
        write_csv(records, csv_out)
    return BenchSummary(records)


def write_csv(records: Iterable[BenchRecord], path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)
        for r in records:
            w.writerow(astuple(r))


def read_csv(path: str | os.PathLike) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def cmd_bench(args) -> int:
    corpus = args.corpus or os.environ.get(CORPUS_ENV)
    if not corpus:
        raise UsageError(f"give --corpus or set {CORPUS_ENV}")
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    summary = run_bench(corpus, methods, args.budget, args.csv, args.no_time, args.jobs)
    for line in summary.lines():
        print(line)
    return 0


# ---------------------------------------------------------------------------
# SVG scatter plot
# ---------------------------------------------------------------------------

PALETTE = {"unger": "#1b6ca8", "chrono": "#d1495b", "dpll": "#2e8540"}


def _ticks(lo: float, hi: float, k: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    step = 10 ** math.floor(math.log10((hi - lo) / k))
    for mult in (1, 2, 5, 10):
        if (hi - lo) / (step * mult) <= k:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-9 * step:
        out.append(round(t, 10))
        t += step
    return out


def scatter_svg(
    points: Sequence[tuple[float, float, str]],
    x_label: str,
    y_label: str,
    log_y: bool = False,
    width: int = 640,
    height: int = 420,
) -> str:
    """Scatter plot with one circle per point; ``points`` are (x, y, series)."""
    ml, mr, mt, mb = 70, 120, 20, 50
    pw, ph = width - ml - mr, height - mt - mb

    def fy(v: float) -> float:
        return math.log10(max(v, 1)) if log_y else v

    xs = [p[0] for p in points] or [0.0, 1.0]
    ys = [fy(p[1]) for p in points] or [0.0, 1.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1

    def px(v: float) -> float:
        return ml + (v - x0) / (x1 - x0) * pw

    def py(v: float) -> float:
        return mt + ph - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{px(t):.1f}" y1="{mt + ph}" x2="{px(t):.1f}" y2="{mt + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{px(t):.1f}" y="{mt + ph + 16}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y0, y1):
        label = f"1e{t:g}" if log_y else f"{t:g}"
        out.append(f'<line x1="{ml - 4}" y1="{py(t):.1f}" x2="{ml}" y2="{py(t):.1f}" stroke="black"/>')
        out.append(f'<text x="{ml - 6}" y="{py(t) + 4:.1f}" text-anchor="end">{escape(label)}</text>')
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">{escape(x_label)}</text>')
    out.append(
        f'<text x="15" y="{mt + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 15 {mt + ph / 2:.1f})">{escape(y_label)}</text>'
    )
    series = sorted({p[2] for p in points})
    for x, y, s in points:
        color = PALETTE.get(s, "#555555")
        out.append(f'<circle cx="{px(x):.1f}" cy="{py(fy(y)):.1f}" r="3" fill="{color}" fill-opacity="0.7"/>')
    for k, s in enumerate(series):
        yy = mt + 10 + 16 * k
        out.append(f'<circle cx="{ml + pw + 15}" cy="{yy}" r="4" fill="{PALETTE.get(s, "#555555")}"/>')
        out.append(f'<text x="{ml + pw + 24}" y="{yy + 4}">{escape(s)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cmd_plot(args) -> int:
    rows = read_csv(args.csv)
    if rows and (args.x not in rows[0] or args.y not in rows[0]):
        raise UsageError(f"columns {args.x!r}/{args.y!r} not in {args.csv}")
    if args.method:
        rows = [r for r in rows if r["method"] == args.method]
    if args.solved_only:
        rows = [r for r in rows if r["outcome"] == SAT]
    pts = [(float(r[args.x]), float(r[args.y]), r["method"]) for r in rows]
    Path(args.svg).write_text(scatter_svg(pts, args.x, args.y, args.log_y))
    print(f"wrote {len(pts)} points to {args.svg}")
    return 0


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="circle3col", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)

    def graph_cmd(name: str, help: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help)
        sp.add_argument("graph", help="ea, c5 or an instance file")
        sp.add_argument("--variant", choices=[v.value for v in Variant], default="ea")
        sp.add_argument("--max-cycle", type=int, default=12)
        return sp

    sp = sub.add_parser("convert", help="spine instance to conflict circle graph")
    sp.add_argument("file")
    sp.set_defaults(func=cmd_convert)

    sp = sub.add_parser("levels", help="levels of the chord diagram")
    sp.add_argument("graph")
    sp.set_defaults(func=cmd_levels)

    graph_cmd("subgraphs", "list important subgraphs").set_defaults(func=cmd_subgraphs)

    sp = graph_cmd("formula", "print or export the formula")
    sp.add_argument("--dimacs", metavar="OUT")
    sp.add_argument("--dedupe", action="store_true", help="drop repeated clauses in DIMACS output")
    sp.set_defaults(func=cmd_formula)

    sp = graph_cmd("solve", "decide the formula")
    sp.add_argument("--method", choices=METHODS, default="unger")
    sp.add_argument("--order", metavar="FILE", help="variable order, whitespace separated")
    sp.add_argument("--budget", type=float, default=None, help="seconds")
    sp.add_argument("--trace", action="store_true")
    sp.add_argument("--all-events", action="store_true", help="also print repeated events")
    sp.add_argument("--jump-policy", choices=["deepest", "shallowest"], default="deepest")
    sp.add_argument("--script", help="comma-separated jump choice indices to replay")
    sp.add_argument("--no-script", action="store_true", help="ignore the built-in c5 jump script")
    sp.set_defaults(func=cmd_solve)

    sp = graph_cmd("color", "solve, reconstruct and validate a colouring")
    sp.add_argument("--method", choices=METHODS, default="unger")
    sp.add_argument("--budget", type=float, default=None)
    sp.set_defaults(func=cmd_color)

    sp = sub.add_parser("verify", help="check a built-in refutation")
    sp.add_argument("which", choices=["ea", "c5", "thesis"])
    sp.add_argument("--data", help="thesis instance data file")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("gen", help="generate a corpus")
    sp.add_argument("--count", type=int, default=100)
    sp.add_argument("--nmin", type=int, default=50)
    sp.add_argument("--nmax", type=int, default=250)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("bench", help="run solvers over a corpus")
    sp.add_argument("--corpus", help=f"corpus directory (default ${CORPUS_ENV})")
    sp.add_argument("--methods", default=",".join(METHODS))
    sp.add_argument("--budget", type=float, default=10.0)
    sp.add_argument("--csv", metavar="OUT")
    sp.add_argument("--no-time", action="store_true", help="write elapsed_ms as 0")
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("plot", help="SVG scatter plot of a bench CSV")
    sp.add_argument("--csv", required=True)
    sp.add_argument("--svg", required=True)
    sp.add_argument("--x", default="n")
    sp.add_argument("--y", default="leaves")
    sp.add_argument("--method")
    sp.add_argument("--solved-only", action="store_true")
    sp.add_argument("--log-y", action="store_true")
    sp.set_defaults(func=cmd_plot)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"circle3col {args.cmd}: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"circle3col {args.cmd}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
