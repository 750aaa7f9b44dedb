"""Path-outerplanarity: 5-round protocol.

Three parallel phases: (1) the prover commits a Hamiltonian path through
constant-size tree advice plus spanning-tree verification; (2) it claims a
left/right orientation for every non-path edge and the embedded LR-sorting
run validates all claims; (3) nesting verification checks that the oriented
non-path edges are properly nested. Edge labels ride on accountable
endpoints through a forest decomposition (arboricity hosting).
"""

from __future__ import annotations

from typing import Optional

from .coloring import forest_decomposition
from .graphs import Graph, Instance
from .lr_sorting import LRClaims, LRCore
from .nesting import NestingClaims, NestingCore, name_bits
from .oracles import is_path_outerplanar_bf
from .primitives import (
    ForestAdvice,
    PrimeContext,
    edge_label_embedding,
    tree_advice_decode_children,
    tree_advice_decode_parent,
    tree_advice_encode,
)
from .runtime import CheckSink, Protocol, Prover, Transcript
from .spaces import Arc, PathSpace
from .st_verify import STFragment

SPACE_PREFIX = "P."

CHECKS = ("po.echo", "po.structure", "po.pairing")


def emit_advice(tr: Transcript, rnd: int, prefix: str, adv: ForestAdvice) -> None:
    for v in range(len(adv.c1)):
        tr.set_node(rnd, v, prefix + "c1", adv.c1[v], 3)
        tr.set_node(rnd, v, prefix + "c2", adv.c2[v], 3)
        tr.set_node(rnd, v, prefix + "par", adv.parity[v], 1)


def decode_advice(tr: Transcript, g: Graph, prefix: str):
    """Per node: (parent | None, ok flag, children list), from labels only."""
    c1 = tr.node.get(prefix + "c1", {})
    c2 = tr.node.get(prefix + "c2", {})
    par = tr.node.get(prefix + "par", {})
    parents: list[Optional[int]] = [None] * g.n
    ok: list[bool] = [True] * g.n
    children: list[list[int]] = [[] for _ in range(g.n)]
    for v in range(g.n):
        mine = (c1.get(v), c2.get(v), par.get(v))
        if None in mine:
            ok[v] = False
            continue
        nbrs = g.adjacency[v]
        labels = []
        complete = True
        for u in nbrs:
            lu = (c1.get(u), c2.get(u), par.get(u))
            if None in lu:
                complete = False
                break
            labels.append(lu)
        if not complete:
            ok[v] = False
            continue
        port, valid = tree_advice_decode_parent(mine, labels)
        if not valid:
            ok[v] = False
            continue
        parents[v] = None if port is None else nbrs[port]
        children[v] = [nbrs[p] for p in tree_advice_decode_children(mine, labels)]
    return parents, ok, children


def decode_hosting(tr: Transcript, g: Graph, n_slots: int):
    """Edge -> (host node, slot) from the per-forest advice labels."""
    parent_maps = []
    for k in range(n_slots):
        parents, ok, _ = decode_advice(tr, g, f"eh{k}.")
        parent_maps.append((parents, ok))
    host: dict[int, tuple[int, int]] = {}
    for eid, (u, v) in enumerate(g.edges):
        for k, (parents, ok) in enumerate(parent_maps):
            if ok[u] and parents[u] == v:
                host[eid] = (u, k)
                break
            if ok[v] and parents[v] == u:
                host[eid] = (v, k)
                break
    return host


MAX_SLOTS = 6


def build_po_space(g: Graph, order: list[int],
                   hosting: Optional[dict[int, tuple[int, int]]],
                   prefix: str = SPACE_PREFIX) -> PathSpace:
    pos_of = {v: i for i, v in enumerate(order)}
    arcs = []
    for eid, (u, v) in enumerate(g.edges):
        pu, pv = pos_of[u], pos_of[v]
        if abs(pu - pv) == 1:
            continue
        arcs.append(Arc(pu, pv, eid))
    return PathSpace(g, order, arcs, prefix, hosting)


class POHonestProver(Prover):
    """Honest prover; optionally carries claims objects for mutations."""

    is_honest = True

    def __init__(self, inst: Instance, c: int = 3, st_scheme: str = "reference",
                 lr_claims=None, nest_claims=None):
        g = inst.graph
        path = inst.witness.ham_path
        if path is None:
            ok, path = is_path_outerplanar_bf(g, return_path=True)
            if not ok:
                raise ValueError("no Hamiltonian path witness available")
        self.path = path
        self.pc = PrimeContext.for_size(g.n, c)
        self.forests = forest_decomposition(g)
        hosting = edge_label_embedding(g, self.forests)
        self.hosting = hosting.slot_of
        self.space = build_po_space(g, path, self.hosting)
        self.lr = LRCore(self.space, self.pc, lr_claims)
        self.nest = NestingCore(self.space, self.pc, c, nest_claims)
        self.parent_map = {path[0]: None}
        for a, b in zip(path, path[1:]):
            self.parent_map[b] = a
        self.path_advice = tree_advice_encode(g, self.parent_map)
        self.forest_advice = [
            tree_advice_encode(g, {v: f.get(v) for v in range(g.n)})
            for f in self.forests
        ]
        st_prefix = "stref." if st_scheme == "reference" else "stc."
        self.st = STFragment(g, st_prefix, st_scheme,
                             reps=self.nest.sbits, family="pc.st")

    def emit(self, rnd: int, inst: Instance, tr: Transcript) -> None:
        if rnd == 0:
            emit_advice(tr, rnd, "pc.", self.path_advice)
            for k, adv in enumerate(self.forest_advice):
                emit_advice(tr, rnd, f"eh{k}.", adv)
            self.st.emit_labels(tr, rnd, self.parent_map)
            self.nest.emit_round1(tr, rnd)
            self.lr.emit_round1(tr, rnd)
        elif rnd == 2:
            self.st.emit_labels(tr, rnd, self.parent_map)
            self.nest.emit_round3(tr, rnd)
            self.lr.emit_round3(tr, rnd)
        elif rnd == 4:
            self.lr.emit_round5(tr, rnd)


class PathOuterplanarProtocol(Protocol):
    name = "path-outerplanar"
    check_families = CHECKS

    def __init__(self, c: int = 3, st_scheme: str = "reference"):
        self.c = c
        self.st_scheme = st_scheme
        self.st_prefix = "stref." if st_scheme == "reference" else "stc."

    def validate_instance(self, inst: Instance) -> None:
        if inst.graph.directed:
            raise ValueError("path-outerplanarity runs on undirected graphs")
        if not inst.graph.is_connected():
            raise ValueError("instance must be connected")

    def make_honest(self, inst: Instance) -> Prover:
        return POHonestProver(inst, self.c, self.st_scheme)

    # ------------------------------------------------------------ claimed view

    def _claimed_order(self, inst: Instance, tr: Transcript):
        g = inst.graph
        parents, ok, children = decode_advice(tr, g, "pc.")
        roots = [v for v in range(g.n) if ok[v] and parents[v] is None]
        order = None
        if len(roots) == 1 and all(ok):
            order = [roots[0]]
            seen = {roots[0]}
            while True:
                kids = children[order[-1]]
                if len(kids) != 1 or kids[0] in seen:
                    break
                order.append(kids[0])
                seen.add(kids[0])
            if len(order) != g.n:
                order = None
        return parents, ok, children, order

    def draw_coins(self, inst: Instance, rnd: int, tr: Transcript) -> None:
        g = inst.graph
        parents, ok, children, order = self._claimed_order(inst, tr)
        if order is None:
            order = list(range(g.n))  # coins still drawn; checks will reject
        space = build_po_space(g, order, None)
        pc = PrimeContext.for_size(g.n, self.c)
        nest = NestingCore(space, pc, self.c)
        nest.draw_coins(tr, rnd)
        LRCore(space, pc).draw_coins(tr, rnd)
        if self.st_scheme == "contract":
            st = STFragment(g, self.st_prefix, self.st_scheme,
                            reps=nest.sbits, family="pc.st")
            st.draw_coins(tr, rnd, parents)

    def decide(self, inst: Instance, tr: Transcript, sink: CheckSink) -> None:
        g = inst.graph
        parents, ok, children, order = self._claimed_order(inst, tr)
        for v in range(g.n):
            sink.check(v, "pc.decode", ok[v])
            sink.check(v, "pc.shape", len(children[v]) <= 1)
        pc = PrimeContext.for_size(g.n, self.c)
        st = STFragment(g, self.st_prefix, self.st_scheme,
                        reps=name_bits(pc, self.c), family="pc.st")
        st.decide(tr, sink, parents, children)
        if order is None:
            sink.fail(0, "pc.walk")
            return
        hosting = decode_hosting(tr, g, MAX_SLOTS)
        space = build_po_space(g, order, hosting)
        node_of = space.node_of
        LRCore(space, pc).decide(tr, sink, node_of)
        NestingCore(space, pc, self.c).decide(tr, sink, node_of)
