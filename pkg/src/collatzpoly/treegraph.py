"""Forward graph of the accelerated map over odd values, with DOT/JSON export."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .bitpoly import ONE, BitPoly, Coercible, DomainError, as_bitpoly, degree, format_poly
from .core import DEFAULT_MAX_STEPS, collatz_step


@dataclass
class TreeGraph:
    max_degree: int
    nodes: set = field(default_factory=set)
    edges: dict = field(default_factory=dict)  # node -> (successor, q)
    seeds: tuple = ()
    truncated: set = field(default_factory=set)  # frontier nodes left without an edge
    sink: BitPoly = ONE

    @property
    def closed(self) -> bool:
        return not self.truncated

    def in_degrees(self) -> dict:
        counts = {n: 0 for n in self.nodes}
        for src, (dst, _) in self.edges.items():
            if src != dst:
                counts[dst] += 1
        return counts

    def to_dict(self) -> dict:
        return {
            "nodes": [str(n) for n in sorted(self.nodes)],
            "edges": [
                {"from": str(n), "to": str(self.edges[n][0]), "q": self.edges[n][1]}
                for n in sorted(self.edges)
            ],
        }


def build_tree(max_degree: int, max_steps: int = DEFAULT_MAX_STEPS) -> TreeGraph:
    """Seed with every odd value of degree <= max_degree and close under the map.

    Each seed is followed until it reaches 1 or a node already present.  A
    seed path longer than ``max_steps`` leaves its last node in ``truncated``.
    """
    if max_degree < 0:
        raise DomainError("max_degree must be >= 0")
    seeds = tuple(BitPoly(n) for n in range(1, 1 << (max_degree + 1), 2))
    g = TreeGraph(max_degree=max_degree, seeds=seeds)
    g.nodes.update(seeds)
    for seed in seeds:
        node = seed
        for _ in range(max_steps):
            if node in g.edges:
                break
            nxt, q = collatz_step(node)
            g.edges[node] = (nxt, q)
            g.nodes.add(nxt)
            node = nxt
        else:
            if node not in g.edges:
                g.truncated.add(node)
    return g


def path_to_sink(g: TreeGraph, n: Coercible) -> list:
    n = as_bitpoly(n)
    if n not in g.nodes:
        raise DomainError(f"{n} is not a node of the graph")
    path = [n]
    seen = {n}
    while n != ONE:
        if n not in g.edges:
            raise DomainError(f"path from {path[0]} is truncated at {n}")
        n = g.edges[n][0]
        if n in seen:
            raise DomainError(f"cycle through {n} that avoids 1")
        seen.add(n)
        path.append(n)
    return path


def path_counts(g: TreeGraph, src: Coercible, dst: Coercible) -> dict:
    """Node counts along the path src -> dst under a few counting conventions."""
    full = path_to_sink(g, src)
    dst = as_bitpoly(dst)
    if dst not in full:
        raise DomainError(f"{dst} is not on the path from {src}")
    segment = full[: full.index(dst) + 1]
    inner = segment[1:-1]
    return {
        "inclusive": len(segment),
        "strictly_between": len(inner),
        "between_above_max_degree": sum(1 for n in inner if degree(n) > g.max_degree),
        "edges": len(segment) - 1,
    }


@dataclass(frozen=True)
class GraphInvariants:
    single_sink: bool
    out_degree_one: bool
    acyclic_except_sink: bool
    divisible_by_3_unreached: bool
    starting_nodes: tuple

    @property
    def ok(self) -> bool:
        return (
            self.single_sink
            and self.out_degree_one
            and self.acyclic_except_sink
            and self.divisible_by_3_unreached
        )


def graph_invariants(g: TreeGraph) -> GraphInvariants:
    out_degree_one = g.closed and set(g.edges) == g.nodes
    fixed = [n for n, (m, _) in g.edges.items() if m == n]
    single_sink = fixed == [ONE] and g.edges.get(ONE) == (ONE, 2)

    # functional graph: colour walk, 0 = unvisited, 1 = on stack, 2 = done
    state = {}
    acyclic = True
    for start in g.nodes:
        if state.get(start):
            continue
        stack = []
        node: Optional[BitPoly] = start
        while node is not None and not state.get(node):
            state[node] = 1
            stack.append(node)
            nxt = g.edges.get(node)
            node = None if nxt is None or nxt[0] == node else nxt[0]
        if node is not None and state.get(node) == 1:
            acyclic = False
        for s in stack:
            state[s] = 2

    indeg = g.in_degrees()
    starting = tuple(sorted(n for n, d in indeg.items() if d == 0))
    div3 = all(indeg[n] == 0 for n in g.nodes if int(n) % 3 == 0)
    return GraphInvariants(single_sink, out_degree_one, acyclic, div3, starting)


def _label(n: BitPoly, style: str) -> str:
    return format_poly(n) if style == "poly" else str(n)


def to_dot(
    g: TreeGraph,
    label: str = "decimal",
    max_label_degree: Optional[int] = None,
    elide: bool = False,
) -> str:
    """Graphviz digraph, nodes and edges in ascending node order.

    With ``elide`` set, runs of nodes above ``max_label_degree`` (default:
    the graph's seed degree) are collapsed into one dotted edge.
    """
    if label not in ("decimal", "poly"):
        raise DomainError("label must be 'decimal' or 'poly'")
    cut = g.max_degree if max_label_degree is None else max_label_degree
    lines = ["digraph collatz {", "  node [shape=ellipse];"]
    if not elide:
        for n in sorted(g.nodes):
            lines.append(f'  "{n}" [label="{_label(n, label)}"];')
        for n in sorted(g.edges):
            m, q = g.edges[n]
            lines.append(f'  "{n}" -> "{m}" [label="q={q}"];')
    else:
        kept = sorted(n for n in g.nodes if degree(n) <= cut)
        for n in kept:
            lines.append(f'  "{n}" [label="{_label(n, label)}"];')
        for n in kept:
            if n not in g.edges:
                continue
            m, q = g.edges[n]
            hidden = 0
            while degree(m) > cut and m in g.edges and hidden <= len(g.nodes):
                hidden += 1
                m = g.edges[m][0]
            if degree(m) > cut:
                continue  # run ends at a truncated frontier node
            if hidden:
                lines.append(f'  "{n}" -> "{m}" [style=dotted, label="{hidden} nodes"];')
            else:
                lines.append(f'  "{n}" -> "{m}" [label="q={q}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
