"""Graph container, witness bundles, and JSON serialization.

Nodes are integers 0..n-1. Adjacency lists are ordered; the list order
defines the port numbering that verifiers are allowed to use. For directed
instances the communication graph stays symmetric (both endpoints of an
edge see each other's labels) and the orientation is carried per edge.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence


class GraphError(ValueError):
    pass


def edge_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


class Graph:
    """Simple graph with ordered adjacency (port order = list order).

    ``edges`` keeps the construction order; for directed graphs an entry
    (u, v) means the edge is oriented u -> v.
    """

    def __init__(self, n: int, edges: Iterable[tuple[int, int]], directed: bool = False):
        self.n = n
        self.directed = directed
        self.edges: list[tuple[int, int]] = []
        self.adjacency: list[list[int]] = [[] for _ in range(n)]
        self._eid: dict[tuple[int, int], int] = {}
        for u, v in edges:
            self.add_edge(u, v)

    def add_edge(self, u: int, v: int) -> int:
        if u == v:
            raise GraphError(f"self-loop at node {u}")
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise GraphError(f"edge ({u},{v}) out of range for n={self.n}")
        key = edge_key(u, v)
        if key in self._eid:
            raise GraphError(f"parallel edge ({u},{v})")
        eid = len(self.edges)
        self._eid[key] = eid
        self.edges.append((u, v))
        self.adjacency[u].append(v)
        self.adjacency[v].append(u)
        return eid

    @property
    def m(self) -> int:
        return len(self.edges)

    def edge_id(self, u: int, v: int) -> int:
        return self._eid[edge_key(u, v)]

    def has_edge(self, u: int, v: int) -> bool:
        return edge_key(u, v) in self._eid

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def neighbors(self, v: int) -> list[int]:
        return self.adjacency[v]

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        seen = [False] * self.n
        stack = [0]
        seen[0] = True
        count = 1
        while stack:
            u = stack.pop()
            for w in self.adjacency[u]:
                if not seen[w]:
                    seen[w] = True
                    count += 1
                    stack.append(w)
        return count == self.n

    def copy(self) -> "Graph":
        return Graph(self.n, list(self.edges), self.directed)

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m}, directed={self.directed})"


@dataclass
class BlockCutTree:
    """Biconnected components plus the tree that connects them via cut nodes.

    ``components`` are node lists; ``tree_edges`` pairs (component index,
    cut node); ``separating_node[c]`` is the parent cut node of component c
    (None for the root component).
    """

    components: list[list[int]]
    cut_nodes: set[int]
    tree_edges: list[tuple[int, int]]
    root_component: int
    separating_node: list[Optional[int]]

    def component_of_edge(self, u: int, v: int) -> int:
        for idx, comp in enumerate(self.components):
            s = set(comp)
            if u in s and v in s:
                return idx
        raise GraphError(f"edge ({u},{v}) not inside any component")


@dataclass
class EarDecomposition:
    """Ordered ears (node sequences); ``nesting_parent[j]`` is the index of
    the ear hosting ear j's endpoints (None for the first ear)."""

    ears: list[list[int]]
    nesting_parent: list[Optional[int]]


@dataclass
class Witness:
    """Optional certified structures attached to a generated instance."""

    ham_path: Optional[list[int]] = None
    rotation: Optional[list[list[int]]] = None  # per node: neighbors in clockwise order
    ear_decomposition: Optional[EarDecomposition] = None
    block_cut: Optional[BlockCutTree] = None
    spanning_forest: Optional[dict[int, Optional[int]]] = None  # node -> parent
    extra: dict = field(default_factory=dict)


@dataclass
class Instance:
    graph: Graph
    witness: Witness = field(default_factory=Witness)

    @property
    def n(self) -> int:
        return self.graph.n


def to_json(inst: Instance) -> str:
    g = inst.graph
    w = inst.witness
    doc: dict = {
        "n": g.n,
        "edges": [[u, v] for u, v in g.edges],
        "directed": g.directed,
    }
    witness: dict = {}
    if w.ham_path is not None:
        witness["ham_path"] = list(w.ham_path)
    if w.rotation is not None:
        witness["rotation"] = [list(r) for r in w.rotation]
    if w.ear_decomposition is not None:
        witness["ears"] = [list(e) for e in w.ear_decomposition.ears]
        witness["ear_parent"] = [
            -1 if p is None else p for p in w.ear_decomposition.nesting_parent
        ]
    if w.block_cut is not None:
        b = w.block_cut
        witness["block_cut"] = {
            "components": [list(c) for c in b.components],
            "cut_nodes": sorted(b.cut_nodes),
            "tree_edges": [list(t) for t in b.tree_edges],
            "root_component": b.root_component,
            "separating_node": [-1 if s is None else s for s in b.separating_node],
        }
    if w.spanning_forest is not None:
        witness["spanning_forest"] = {
            str(k): (-1 if p is None else p) for k, p in w.spanning_forest.items()
        }
    if w.extra:
        witness["extra"] = w.extra
    if witness:
        doc["witness"] = witness
    return json.dumps(doc, indent=None, separators=(",", ":"), sort_keys=True)


def from_json(text: str) -> Instance:
    doc = json.loads(text)
    g = Graph(doc["n"], [tuple(e) for e in doc["edges"]], doc.get("directed", False))
    w = Witness()
    wd = doc.get("witness", {})
    if "ham_path" in wd:
        w.ham_path = list(wd["ham_path"])
    if "rotation" in wd:
        w.rotation = [list(r) for r in wd["rotation"]]
    if "ears" in wd:
        parents = [None if p < 0 else p for p in wd["ear_parent"]]
        w.ear_decomposition = EarDecomposition([list(e) for e in wd["ears"]], parents)
    if "block_cut" in wd:
        bd = wd["block_cut"]
        w.block_cut = BlockCutTree(
            components=[list(c) for c in bd["components"]],
            cut_nodes=set(bd["cut_nodes"]),
            tree_edges=[tuple(t) for t in bd["tree_edges"]],
            root_component=bd["root_component"],
            separating_node=[None if s < 0 else s for s in bd["separating_node"]],
        )
    if "spanning_forest" in wd:
        w.spanning_forest = {
            int(k): (None if p < 0 else p) for k, p in wd["spanning_forest"].items()
        }
    if "extra" in wd:
        w.extra = wd["extra"]
    return Instance(g, w)


def path_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    edges = [(i, i + 1) for i in range(n - 1)] + [(n - 1, 0)]
    return Graph(n, edges)


def complete_graph(n: int) -> Graph:
    return Graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def complete_bipartite(a: int, b: int) -> Graph:
    return Graph(a + b, [(i, a + j) for i in range(a) for j in range(b)])
