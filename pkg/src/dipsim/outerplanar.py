"""Outerplanarity protocols.

Biconnected outerplanarity = path-outerplanarity plus a cycle-closure
condition (the path's endpoints must be adjacent). General outerplanarity
decomposes into biconnected components: stage 1 confines non-cut nodes to
their component through sampled (sep, lead) nonces, stage 2 verifies the
union of component paths is a spanning tree, stage 3 runs the biconnected
protocol per component in parallel, with the separating node's labels
deferred to its neighbors (its run randomness is drawn by the component
leader, and its incident in-component edges are hosted at their far
endpoints).
"""

from __future__ import annotations

from typing import Callable, Optional

from .coloring import forest_decomposition
from .graphs import Graph, Instance
from .lr_sorting import LRCore
from .nesting import NestingCore, name_bits
from .oracles import is_biconnected_outerplanar_bf
from .primitives import PrimeContext, edge_label_embedding, tree_advice_encode
from .path_outerplanar import (
    POHonestProver,
    PathOuterplanarProtocol,
    build_po_space,
    decode_advice,
    decode_hosting,
    emit_advice,
    MAX_SLOTS,
)
from .runtime import CheckSink, Protocol, Prover, Transcript
from .spaces import Arc, PathSpace
from .st_verify import STFragment


# ---------------------------------------------------------------------------
# biconnected outerplanarity: closure condition on top of path-outerplanarity


def emit_closure_mark(space: PathSpace, tr: Transcript, rnd: int) -> None:
    for ai, arc in enumerate(space.arcs):
        lo, hi = min(arc.end0, arc.end1), max(arc.end0, arc.end1)
        if lo == 0 and hi == space.L - 1:
            space.set_a(tr, rnd, ai, "clo", 1, 1)


def decide_closure(space: PathSpace, tr: Transcript, sink: CheckSink,
                   eval_node, arc_eval=None) -> None:
    """The path endpoints must share a marked closure edge."""
    L = space.L
    if L < 3:
        return
    arc_eval = arc_eval or eval_node
    root_has = end_has = False
    for ai, arc in enumerate(space.arcs):
        if space.get_a(tr, ai, "clo") != 1:
            continue
        for pos in (arc.end0, arc.end1):
            sink.check(arc_eval(pos), "bo.closure.role", pos in (0, L - 1))
        ends = {arc.end0, arc.end1}
        root_has = root_has or 0 in ends
        end_has = end_has or (L - 1) in ends
    sink.check(arc_eval(0), "bo.closure.exists", root_has)
    sink.check(eval_node(L - 1), "bo.closure.exists", end_has)


class BiconnectedOuterplanarHonest(POHonestProver):
    def emit(self, rnd: int, inst: Instance, tr: Transcript) -> None:
        super().emit(rnd, inst, tr)
        if rnd == 0:
            emit_closure_mark(self.space, tr, rnd)


class BiconnectedOuterplanarProtocol(PathOuterplanarProtocol):
    name = "biconnected-outerplanar"
    check_families = PathOuterplanarProtocol.check_families + ("bo.closure",)

    def make_honest(self, inst: Instance) -> Prover:
        if inst.witness.ham_path is None and inst.graph.n <= 12:
            ok, cyc = is_biconnected_outerplanar_bf(inst.graph, return_cycle=True)
            if ok:
                inst = Instance(inst.graph, inst.witness)
                inst.witness.ham_path = cyc
        return BiconnectedOuterplanarHonest(inst, self.c, self.st_scheme)

    def decide(self, inst: Instance, tr: Transcript, sink: CheckSink) -> None:
        super().decide(inst, tr, sink)
        parents, ok, children, order = self._claimed_order(inst, tr)
        if order is not None:
            space = build_po_space(inst.graph, order,
                                   decode_hosting(tr, inst.graph, MAX_SLOTS))
            decide_closure(space, tr, sink, space.node_of)


# ---------------------------------------------------------------------------
# component spaces with separator deferral


class ComponentSpace(PathSpace):
    """Per-component run: position 0 is the separating node.

    Its node fields live on the leader (position 1) under the "D." prefix,
    its coins come from the leader's stream, and its incident arcs are
    hosted at their far endpoints under the "sd." slot. For the root
    component (no separator) this degenerates to a plain PathSpace.
    """

    def __init__(self, g: Graph, order: list[int], arcs: list[Arc], prefix: str,
                 hosting: Optional[dict[int, tuple[int, int]]], deferred: bool):
        super().__init__(g, order, arcs, prefix, hosting)
        self.deferred = deferred

    def set_p(self, tr, rnd, pos, name, val, bits):
        if self.deferred and pos == 0:
            tr.set_node(rnd, self.order[1], self.pf("D." + name), val, bits)
        else:
            tr.set_node(rnd, self.order[pos], self.pf(name), val, bits)

    def get_p(self, tr, pos, name, default=None):
        if self.deferred and pos == 0:
            return tr.node.get(self.pf("D." + name), {}).get(self.order[1], default)
        return tr.node.get(self.pf(name), {}).get(self.order[pos], default)

    def reader(self, tr, name):
        col = tr.node.get(self.pf(name), {})
        dcol = tr.node.get(self.pf("D." + name), {})
        order = self.order
        deferred = self.deferred

        def get(pos):
            if deferred and pos == 0:
                return dcol.get(order[1])
            return col.get(order[pos])

        return get

    def coin_node(self, pos: int) -> int:
        if self.deferred and pos == 0:
            return self.order[1]
        return self.order[pos]

    def set_a(self, tr, rnd, arc_i, name, val, bits):
        arc = self.arcs[arc_i]
        if self.deferred and 0 in (arc.end0, arc.end1):
            far = self.order[arc.end1 if arc.end0 == 0 else arc.end0]
            tr.set_node(rnd, far, f"{self.prefix}sd.{name}", val, bits)
        else:
            super().set_a(tr, rnd, arc_i, name, val, bits)

    def get_a(self, tr, arc_i, name, default=None):
        arc = self.arcs[arc_i]
        if self.deferred and 0 in (arc.end0, arc.end1):
            far = self.order[arc.end1 if arc.end0 == 0 else arc.end0]
            return tr.node.get(f"{self.prefix}sd.{name}", {}).get(far, default)
        return super().get_a(tr, arc_i, name, default)


class ComponentRun:
    """One biconnected-outerplanar sub-run inside a composite protocol."""

    def __init__(self, g: Graph, order: list[int], deferred: bool,
                 hosting, pc: PrimeContext, c: int, nest_claims=None,
                 lr_claims=None, closure: bool = True):
        pos_of = {v: i for i, v in enumerate(order)}
        arcs = []
        seen = set(order)
        for i, u in enumerate(order):
            for w in g.adjacency[u]:
                if w in pos_of and abs(pos_of[u] - pos_of[w]) >= 2:
                    key = g.edge_id(u, w)
                    if key not in {a.key for a in arcs}:
                        arcs.append(Arc(pos_of[min(u, w, key=lambda x: pos_of[x])],
                                        pos_of[max(u, w, key=lambda x: pos_of[x])],
                                        key))
        self.space = ComponentSpace(g, order, arcs, "C.", hosting, deferred)
        self.deferred = deferred
        self.closure = closure
        skip = frozenset({0}) if deferred else frozenset()
        self.lr = LRCore(self.space, pc, lr_claims)
        self.nest = NestingCore(self.space, pc, c, nest_claims, skip_positions=skip)

    def emit(self, rnd: int, tr: Transcript) -> None:
        if rnd == 0:
            self.nest.emit_round1(tr, rnd)
            self.lr.emit_round1(tr, rnd)
            if self.closure:
                emit_closure_mark(self.space, tr, rnd)
        elif rnd == 2:
            self.nest.emit_round3(tr, rnd)
            self.lr.emit_round3(tr, rnd)
        elif rnd == 4:
            self.lr.emit_round5(tr, rnd)

    def draw_coins(self, tr: Transcript, rnd: int) -> None:
        self.nest.draw_coins(tr, rnd)
        self.lr.draw_coins(tr, rnd)

    def decide(self, tr: Transcript, sink: CheckSink) -> None:
        order = self.space.order
        sep = order[0] if self.deferred else None

        def eval_node(pos):
            # position 0's chain/echo checks evaluate at the leader, which
            # hosts the deferred fields and owns the deferred coin stream
            if self.deferred and pos == 0:
                return order[1]
            return order[pos]

        def arc_eval(pos):
            # arc checks at position 0 evaluate at the separator itself: it
            # is adjacent to every far endpoint hosting its arc fields
            if self.deferred and pos == 0:
                return sep
            return order[pos]

        self.lr.decide(tr, sink, eval_node, arc_eval)
        self.nest.decide(tr, sink, eval_node)
        if self.closure:
            decide_closure(self.space, tr, sink, eval_node, arc_eval)


# ---------------------------------------------------------------------------
# general outerplanarity


def nonce_bits(n: int) -> int:
    from .primitives import ceil_log2

    return 3 * max(2, ceil_log2(max(2, ceil_log2(max(2, n)))))


class OuterplanarHonest(Prover):
    is_honest = True

    def __init__(self, inst: Instance, c: int = 3, st_scheme: str = "reference",
                 nest_claims_factory: Optional[Callable] = None,
                 lr_claims_factory: Optional[Callable] = None,
                 closure: bool = True, stage1_lies: Optional[dict] = None):
        g = inst.graph
        self.g = g
        self.c = c
        self.pc = PrimeContext.for_size(g.n, c)
        bct = inst.witness.block_cut
        paths = inst.witness.extra.get("component_paths")
        if bct is None or paths is None:
            from .oracles import biconnected_components

            bct = biconnected_components(g)
            paths = []
            for idx, comp in enumerate(bct.components):
                if len(comp) == 2:
                    ring = list(comp)
                else:
                    ring = _best_effort_ring(_induced(g, comp))
                    ring = [comp[i] for i in ring]
                sep = bct.separating_node[idx]
                if sep is not None:
                    k = ring.index(sep)
                    ring = ring[k:] + ring[:k]
                paths.append(ring)
        self.bct = bct
        self.paths = paths
        self.closure = closure
        self.stage1_lies = stage1_lies or {}
        # spanning forest F = union of component paths (+ e_C edges)
        parent: dict[int, Optional[int]] = {}
        self.lead_of: dict[int, int] = {}
        self.cut = set(bct.cut_nodes)
        self.home_comp: dict[int, int] = {}
        self.depth3: dict[int, int] = {}
        order_ids = self._component_depths()
        for idx, ring in enumerate(paths):
            sep = bct.separating_node[idx]
            members = ring if sep is None else ring[1:]
            for v in members:
                self.home_comp[v] = idx
                self.depth3[v] = order_ids[idx] % 3
            for a, b in zip(ring, ring[1:]):
                parent[b] = a
            if sep is None:
                parent.setdefault(ring[0], None)
                self.lead_of[ring[0]] = idx
            else:
                self.lead_of[ring[1]] = idx
        self.parent_map = parent
        self.f_advice = tree_advice_encode(g, parent)
        self.forests = forest_decomposition(g)
        self.hosting = edge_label_embedding(g, self.forests).slot_of
        st_prefix = "stref." if st_scheme == "reference" else "stc."
        self.st = STFragment(g, st_prefix, st_scheme,
                             reps=nonce_bits(g.n), family="oc.st")
        self.runs = []
        for idx, ring in enumerate(paths):
            deferred = bct.separating_node[idx] is not None
            nc = nest_claims_factory(idx) if nest_claims_factory else None
            lc = lr_claims_factory(idx) if lr_claims_factory else None
            self.runs.append(ComponentRun(g, ring, deferred, self.hosting,
                                          self.pc, c, nc, lc, closure=closure))

    def _component_depths(self) -> dict[int, int]:
        depth = {self.bct.root_component: 0}
        changed = True
        while changed:
            changed = False
            for idx in range(len(self.bct.components)):
                if idx in depth:
                    continue
                sep = self.bct.separating_node[idx]
                if sep is None:
                    depth[idx] = 0
                    continue
                home = self.home_comp.get(sep)
                if home is None:
                    # home components fill in as rings are scanned; resolve
                    # via the component that contains sep as a non-first node
                    for j, ring in enumerate(self.paths):
                        s2 = self.bct.separating_node[j]
                        members = ring if s2 is None else ring[1:]
                        if sep in members:
                            home = j
                            break
                if home in depth:
                    depth[idx] = depth[home] + 1
                    changed = True
        return depth

    def emit(self, rnd: int, inst: Instance, tr: Transcript) -> None:
        g = self.g
        nb = nonce_bits(g.n)
        if rnd == 0:
            emit_advice(tr, rnd, "fc.", self.f_advice)
            for k, f in enumerate(self.forests):
                adv = tree_advice_encode(g, {v: f.get(v) for v in range(g.n)})
                emit_advice(tr, rnd, f"eh{k}.", adv)
            self.st.emit_labels(tr, rnd, self.parent_map)
            for v in range(g.n):
                tr.set_node(rnd, v, "oc.cut", 1 if v in self.cut else 0, 1)
                tr.set_node(rnd, v, "oc.lead", 1 if v in self.lead_of else 0, 1)
                tr.set_node(rnd, v, "oc.d", self.depth3[v], 2)
        elif rnd == 2:
            self.st.emit_labels(tr, rnd, self.parent_map)
            scoins = tr.coins.get("oc.s#", {})
            for v in range(g.n):
                idx = self.home_comp[v]
                ring = self.paths[idx]
                sep = self.bct.separating_node[idx]
                leader = ring[0] if sep is None else ring[1]
                sep_val = scoins.get(sep, 0) if sep is not None else 0
                lead_val = scoins.get(leader, 0)
                lie = self.stage1_lies.get(v)
                if lie is not None:
                    sep_val, lead_val = lie
                tr.set_node(rnd, v, "oc.sep", sep_val, nb)
                tr.set_node(rnd, v, "oc.lead2", lead_val, nb)
        for run in self.runs:
            run.emit(rnd, tr)


def _induced(g: Graph, comp: list[int]) -> Graph:
    relabel = {v: i for i, v in enumerate(comp)}
    return Graph(len(comp), [(relabel[u], relabel[w]) for u, w in g.edges
                             if u in relabel and w in relabel])


def _best_effort_ring(sub: Graph) -> list[int]:
    """Hamiltonian cycle witnessing outerplanarity when one exists; any
    Hamiltonian cycle or path otherwise (adversaries label from these)."""
    from .oracles import hamiltonian_path_orderings

    if sub.n <= 12:
        ok, ring = is_biconnected_outerplanar_bf(sub, return_cycle=True)
        if ok:
            return ring
        fallback = None
        for order in hamiltonian_path_orderings(sub):
            if fallback is None:
                fallback = order
            if sub.has_edge(order[0], order[-1]):
                return order
        if fallback is not None:
            return fallback
    # large or path-free component: DFS order (the run will be rejected,
    # which is the right outcome for a cheating witness)
    seen = [False] * sub.n
    order = []
    stack = [0]
    while stack:
        v = stack.pop()
        if seen[v]:
            continue
        seen[v] = True
        order.append(v)
        for w in reversed(sub.adjacency[v]):
            if not seen[w]:
                stack.append(w)
    return order


class OuterplanarProtocol(Protocol):
    name = "outerplanar"
    check_families = ("po.echo", "po.structure", "po.pairing", "bo.closure",
                      "oc.isolate", "oc.dist")
    closure = True

    def __init__(self, c: int = 3, st_scheme: str = "reference"):
        self.c = c
        self.st_scheme = st_scheme
        self.st_prefix = "stref." if st_scheme == "reference" else "stc."

    def validate_instance(self, inst: Instance) -> None:
        if inst.graph.directed:
            raise ValueError("outerplanarity runs on undirected graphs")
        if not inst.graph.is_connected():
            raise ValueError("instance must be connected")

    def make_honest(self, inst: Instance) -> Prover:
        return OuterplanarHonest(inst, self.c, self.st_scheme, closure=self.closure)

    # ----------------------------------------------------------- claimed view

    def _claimed_runs(self, inst: Instance, tr: Transcript):
        """Decode stage-1/2 labels into component walks.

        Returns (runs, parents, children, failures) where each run is
        (order, deferred); failures is a list of (node, tag)."""
        g = inst.graph
        fails: list[tuple[int, str]] = []
        parents, ok, children = decode_advice(tr, g, "fc.")
        cut_col = tr.node.get("oc.cut", {})
        lead_col = tr.node.get("oc.lead", {})
        for v in range(g.n):
            if not ok[v]:
                fails.append((v, "oc.decode"))
        runs = []
        covered: set[int] = set()
        roots = [v for v in range(g.n) if ok[v] and parents[v] is None]
        leaders = [v for v in range(g.n) if lead_col.get(v) == 1]
        for v in leaders:
            if parents[v] is None and v not in roots:
                fails.append((v, "oc.walk"))
        for lead in leaders:
            deferred = parents[lead] is not None
            order = [parents[lead]] if deferred else []
            walk = [lead]
            seen = {lead}
            while True:
                kids = [u for u in children[walk[-1]] if lead_col.get(u) != 1]
                if len(kids) > 1:
                    fails.append((walk[-1], "oc.shape"))
                    break
                if not kids or kids[0] in seen:
                    break
                walk.append(kids[0])
                seen.add(kids[0])
            dup = covered & set(walk)
            for v in dup:
                fails.append((v, "oc.walk"))
            covered |= set(walk)
            runs.append((order + walk, deferred))
        for v in range(g.n):
            if v not in covered:
                fails.append((v, "oc.walk"))
        return runs, parents, children, fails

    def draw_coins(self, inst: Instance, rnd: int, tr: Transcript) -> None:
        g = inst.graph
        runs, parents, children, fails = self._claimed_runs(inst, tr)
        if rnd == 1:
            cut_col = tr.node.get("oc.cut", {})
            lead_col = tr.node.get("oc.lead", {})
            for v in range(g.n):
                if cut_col.get(v) == 1 or lead_col.get(v) == 1:
                    tr.draw_coin(rnd, v, "oc.s#", 1 << nonce_bits(g.n))
        if self.st_scheme == "contract":
            STFragment(g, self.st_prefix, self.st_scheme,
                       reps=nonce_bits(g.n), family="oc.st").draw_coins(
                tr, rnd, parents)
        pc = PrimeContext.for_size(g.n, self.c)
        for order, deferred in runs:
            run = ComponentRun(g, order, deferred, None, pc, self.c,
                               closure=self.closure)
            run.draw_coins(tr, rnd)

    def decide(self, inst: Instance, tr: Transcript, sink: CheckSink) -> None:
        g = inst.graph
        runs, parents, children, fails = self._claimed_runs(inst, tr)
        for v, tag in fails:
            sink.fail(v, tag)
        st = STFragment(g, self.st_prefix, self.st_scheme,
                        reps=nonce_bits(g.n), family="oc.st")
        st.decide(tr, sink, parents, children)
        self._decide_stage1(g, tr, sink)
        if fails:
            return
        hosting = decode_hosting(tr, g, MAX_SLOTS)
        pc = PrimeContext.for_size(g.n, self.c)
        for order, deferred in runs:
            run = ComponentRun(g, order, deferred, hosting, pc, self.c,
                               closure=self.closure)
            run.decide(tr, sink)

    def _decide_stage1(self, g: Graph, tr: Transcript, sink: CheckSink) -> None:
        decide_stage1(g, tr, sink)


def decide_stage1(g: Graph, tr: Transcript, sink: CheckSink) -> None:
        """Sampled-nonce isolation plus distance-mod-3 consistency.

        Every edge must be classifiable at its endpoints: component mates
        share the (sep, lead) pair; otherwise one endpoint is the other's
        separator, and the separator side verifies the claim against its
        own coin while the mod-3 step direction prevents both sides from
        deferring to each other.
        """
        cut_col = tr.node.get("oc.cut", {})
        lead_col = tr.node.get("oc.lead", {})
        sep_col = tr.node.get("oc.sep", {})
        lead2_col = tr.node.get("oc.lead2", {})
        d_col = tr.node.get("oc.d", {})
        scoins = tr.coins.get("oc.s#", {})
        for v in range(g.n):
            sv, lv, dv = sep_col.get(v), lead2_col.get(v), d_col.get(v)
            if sv is None or lv is None or dv is None or dv > 2:
                sink.fail(v, "oc.isolate.missing")
                continue
            me_cut = cut_col.get(v) == 1
            if lead_col.get(v) == 1:
                sink.check(v, "oc.isolate.lead-echo", lv == scoins.get(v))
            for u in g.adjacency[v]:
                du = d_col.get(u)
                if sep_col.get(u) == sv and lead2_col.get(u) == lv:
                    sink.check(v, "oc.dist.same", du == dv)
                    continue
                u_cut = cut_col.get(u) == 1
                if not me_cut and not u_cut:
                    sink.fail(v, "oc.isolate.pair")
                elif me_cut:
                    child = sep_col.get(u) == scoins.get(v) and du == (dv + 1) % 3
                    above = u_cut and du == (dv - 1) % 3
                    sink.check(v, "oc.isolate.childsep", child or above)
                else:
                    sink.check(v, "oc.dist.sep", du == (dv - 1) % 3)


def register_all(register, po_claims_for) -> None:
    from .adversaries import FlipBitsProver, RandomLabelProver, StrategyError, parse_spec

    def bo_adv(inst, strategy, c):
        name, param = parse_spec(strategy)
        proto = BiconnectedOuterplanarProtocol(c)
        if name == "random-labels":
            return RandomLabelProver(proto.make_honest(inst), salt=strategy)
        if name == "flip-k-bits":
            return FlipBitsProver(proto.make_honest(inst), int(param or 3), salt=strategy)
        base = BiconnectedOuterplanarHonest(inst, c)
        nc = po_claims_for(strategy, base.nest.sbits)
        if nc is None:
            raise StrategyError(f"{name!r} not applicable")
        return BiconnectedOuterplanarHonest(inst, c, nest_claims=nc)

    def oc_adv(inst, strategy, c):
        name, param = parse_spec(strategy)
        if name == "random-labels":
            return RandomLabelProver(OuterplanarHonest(inst, c), salt=strategy)
        if name == "flip-k-bits":
            return FlipBitsProver(OuterplanarHonest(inst, c), int(param or 3), salt=strategy)
        probe = OuterplanarHonest(inst, c)
        sbits = name_bits(probe.pc, c)
        nc = po_claims_for(strategy, sbits)
        if nc is not None:
            return OuterplanarHonest(inst, c, nest_claims_factory=lambda idx: nc)
        raise StrategyError(f"{name!r} not applicable")

    register("biconnected-outerplanar", BiconnectedOuterplanarProtocol, bo_adv)
    register("outerplanar", OuterplanarProtocol, oc_adv)
