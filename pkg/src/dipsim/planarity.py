"""Planar embedding and planarity protocols.

A rotation system is verified by reducing to path-outerplanarity: the
Euler tour of a spanning tree T lists copies x_0(v)..x_chi(v) of every
node, and each non-tree edge becomes an arc between the copies determined
by the first tree edge counterclockwise from it at each endpoint. The
orderings are a valid planar embedding iff the arcs nest properly over the
tour (so the LR + nesting machinery applies verbatim).

Copy labels are hosted locally: x_0(v) and x_chi(v) live on v, the middle
copies x_i(v) on the i-th child; every field a node's simulation reads
then sits on the node itself or a real neighbor. Arc labels are the real
edge's labels (forest hosting).

Plain planarity additionally has the prover distribute the rotation values
through per-edge port pairs (O(log max-degree) bits), checked to form
bijections before the embedding run.
"""

from __future__ import annotations

from typing import Optional

from .coloring import forest_decomposition
from .graphs import Graph, Instance
from .lr_sorting import LRCore
from .nesting import NestingCore, name_bits
from .path_outerplanar import decode_advice, decode_hosting, emit_advice, MAX_SLOTS
from .primitives import PrimeContext, edge_label_embedding, tree_advice_encode
from .runtime import CheckSink, Protocol, Prover, Transcript
from .spaces import Arc, Space
from .st_verify import STFragment


# ---------------------------------------------------------------------------
# Euler-tour reduction


class ReductionError(ValueError):
    pass


def bfs_tree(g: Graph, root: int = 0) -> dict[int, Optional[int]]:
    parent: dict[int, Optional[int]] = {root: None}
    queue = [root]
    while queue:
        u = queue.pop(0)
        for w in g.adjacency[u]:
            if w not in parent:
                parent[w] = u
                queue.append(w)
    return parent


def child_order(g: Graph, rot: list[list[int]], parent: dict[int, Optional[int]],
                v: int) -> list[int]:
    """Children of v ordered clockwise starting after the parent edge; for
    the root, by ascending rotation value."""
    kids = {w for w in g.adjacency[v] if parent.get(w) == v}
    order = rot[v]
    p = parent.get(v)
    if p is None:
        return [w for w in order if w in kids]
    k = order.index(p)
    out = []
    for step in range(1, len(order) + 1):
        w = order[(k + step) % len(order)]
        if w in kids:
            out.append(w)
    return out


def ccw_anchor(g: Graph, rot: list[list[int]], parent: dict[int, Optional[int]],
               children: list[int], v: int, u: int) -> int:
    """i(e, v) for the non-tree edge e = (v, u): 0 if the first tree edge
    counterclockwise from e is the parent edge, else that child's index."""
    order = rot[v]
    k = order.index(u)
    tree_nbrs = set(children)
    p = parent.get(v)
    if p is not None:
        tree_nbrs.add(p)
    for step in range(1, len(order) + 1):
        w = order[(k - step) % len(order)]
        if w in tree_nbrs:
            if w == p:
                return 0
            return children.index(w) + 1
    raise ReductionError(f"node {v} has no tree edge")


def euler_tour_reduction(g: Graph, parent: dict[int, Optional[int]],
                         rot: list[list[int]]):
    """Returns (tour, arcs): tour is the copy list [(v, i), ...] in path
    order; arcs are (pos_a, pos_b, edge id) for every non-tree edge."""
    n = g.n
    roots = [v for v in range(n) if parent.get(v) is None]
    if len(roots) != 1:
        raise ReductionError("parent map is not a rooted spanning tree")
    root = roots[0]
    children = {v: child_order(g, rot, parent, v) for v in range(n)}
    tour: list[tuple[int, int]] = []
    stack: list[tuple[int, int]] = [(root, 0)]
    guard = 0
    while stack:
        guard += 1
        if guard > 4 * n + 4:
            raise ReductionError("tour walk does not terminate")
        v, i = stack.pop()
        tour.append((v, i))
        if i < len(children[v]):
            stack.append((v, i + 1))
            stack.append((children[v][i], 0))
    if len(tour) != 2 * n - 1:
        raise ReductionError("tour does not have 2n-1 copies")
    pos_of = {c: i for i, c in enumerate(tour)}
    arcs = []
    for eid, (u, w) in enumerate(g.edges):
        if parent.get(u) == w or parent.get(w) == u:
            continue
        iu = ccw_anchor(g, rot, parent, children[u], u, w)
        iw = ccw_anchor(g, rot, parent, children[w], w, u)
        arcs.append((pos_of[(u, iu)], pos_of[(w, iw)], eid))
    return tour, arcs


def corner_ranks(g: Graph, rot: list[list[int]],
                 parent: dict[int, Optional[int]],
                 children: dict[int, list[int]],
                 tour: list[tuple[int, int]],
                 arcs: list[tuple[int, int, int]]):
    """Forced stack orders at shared corners.

    All arcs anchored at one copy sit in a single rotation corner; a plane
    drawing forces their nesting order: scanning clockwise from the corner's
    anchor tree edge, left-going arcs nest inner-first and right-going arcs
    outer-first. Returns {(pos, side): {arc_index: ascending sort key}}.
    """
    by_corner: dict[tuple[int, str], dict[int, int]] = {}
    layout: dict[int, list[tuple[int, str]]] = {}
    for ai, (pa, pb, eid) in enumerate(arcs):
        lo, hi = (pa, pb) if pa < pb else (pb, pa)
        for p, side in ((lo, "R"), (hi, "L")):
            v, i = tour[p]
            order = rot[v]
            anchor = parent[v] if i == 0 else children[v][i - 1]
            k = order.index(anchor)
            u, w = g.edges[eid]
            other = w if u == v else u
            steps = (order.index(other) - k) % len(order)
            key = steps if side == "L" else -steps
            by_corner.setdefault((p, side), {})[ai] = key
            layout.setdefault(p, []).append((steps, side))
    layouts = {p: [s for _, s in sorted(v)] for p, v in layout.items()}
    return by_corner, layouts


def reduction_valid(g: Graph, parent: dict[int, Optional[int]],
                    rot: list[list[int]]) -> bool:
    """Oracle form of the reduction: the rotation system is a planar
    embedding iff the tour arcs nest properly and every shared corner's
    nesting order follows the rotation."""
    from .oracles import is_properly_nested

    children = {v: child_order(g, rot, parent, v) for v in range(g.n)}
    try:
        tour, arcs = euler_tour_reduction(g, parent, rot)
    except ReductionError:
        return False
    spans = [(min(a, b), max(a, b)) for a, b, _ in arcs]
    if not is_properly_nested(list(range(len(tour))), spans):
        return False
    ranks, layouts = corner_ranks(g, rot, parent, children, tour, arcs)
    for sides in layouts.values():
        seen_r = False
        for s in sides:
            if s == "R":
                seen_r = True
            elif seen_r:
                return False
    for (p, side), keymap in ranks.items():
        if len(keymap) < 2:
            continue
        inner_first = sorted(keymap, key=lambda ai: spans[ai][1] - spans[ai][0])
        keys = [keymap[ai] for ai in inner_first]
        if any(x >= y for x, y in zip(keys, keys[1:])):
            return False
    return True


# ---------------------------------------------------------------------------
# copy space


class CopySpace(Space):
    """Positions are Euler-tour copies; fields live on the copy's host:
    x_0(v) and x_chi(v) on v itself, middle copies on the matching child.
    Arc fields are the underlying real edge's labels (forest hosting).
    Checks of all of v's copies evaluate at v; every read is then on v or
    a real neighbor of v.
    """

    def __init__(self, g: Graph, tour: list[tuple[int, int]],
                 arcs: list[Arc], prefix: str,
                 children: dict[int, list[int]],
                 hosting: Optional[dict[int, tuple[int, int]]]):
        super().__init__(len(tour), arcs, prefix)
        self.g = g
        self.tour = tour
        self.children = children
        self.hosting = hosting
        self._route: list[tuple[int, str]] = []
        for (v, i) in tour:
            chi = len(children[v])
            if i == 0:
                self._route.append((v, "h0."))
            elif i == chi:
                self._route.append((v, "hX."))
            else:
                self._route.append((children[v][i - 1], "hp."))

    def node_of(self, pos: int) -> int:
        return self.tour[pos][0]

    def coin_node(self, pos: int) -> int:
        v, i = self.tour[pos]
        return v if i == 0 else self.children[v][i - 1]

    def set_p(self, tr, rnd, pos, name, val, bits):
        host, slot = self._route[pos]
        tr.set_node(rnd, host, self.prefix + slot + name, val, bits)

    def get_p(self, tr, pos, name, default=None):
        host, slot = self._route[pos]
        return tr.node.get(self.prefix + slot + name, {}).get(host, default)

    def reader(self, tr, name):
        cols = {slot: tr.node.get(self.prefix + slot + name, {})
                for slot in ("h0.", "hX.", "hp.")}
        route = self._route

        def get(pos):
            host, slot = route[pos]
            return cols[slot].get(host)

        return get

    def set_a(self, tr, rnd, arc_i, name, val, bits):
        key = self.arcs[arc_i].key
        if self.hosting is None:
            tr.set_edge(rnd, key, self.prefix + "E." + name, val, bits)
        else:
            host, slot = self.hosting[key]
            tr.set_node(rnd, host, f"{self.prefix}E{slot}.{name}", val, bits)

    def get_a(self, tr, arc_i, name, default=None):
        key = self.arcs[arc_i].key
        if self.hosting is None:
            return tr.edge.get(self.prefix + "E." + name, {}).get(key, default)
        host, slot = self.hosting.get(key, (None, None))
        if host is None:
            return default
        return tr.node.get(f"{self.prefix}E{slot}.{name}", {}).get(host, default)


# ---------------------------------------------------------------------------
# planar embedding protocol


def rotation_of(inst: Instance) -> list[list[int]]:
    rot = inst.witness.rotation
    if rot is None:
        raise ValueError("planar-embedding needs a rotation system input")
    return rot


class EmbeddingHonest(Prover):
    is_honest = True

    def __init__(self, inst: Instance, c: int = 3, st_scheme: str = "reference",
                 rot: Optional[list[list[int]]] = None,
                 nest_claims=None, lr_claims=None, rho_lie: bool = False):
        g = inst.graph
        self.g = g
        self.c = c
        self.rot = rot if rot is not None else rotation_of(inst)
        self.rho_lie = rho_lie
        self.parent_map = bfs_tree(g)
        self.children = {v: child_order(g, self.rot, self.parent_map, v)
                         for v in range(g.n)}
        tour, raw_arcs = euler_tour_reduction(g, self.parent_map, self.rot)
        self.pc = PrimeContext.for_size(2 * g.n, c)
        self.forests = forest_decomposition(g)
        self.hosting = edge_label_embedding(g, self.forests).slot_of
        arcs = [Arc(a, b, eid) for a, b, eid in raw_arcs]
        self.space = CopySpace(g, tour, arcs, "R.", self.children, self.hosting)
        self.lr = LRCore(self.space, self.pc, lr_claims)
        self.nest = NestingCore(self.space, self.pc, c, nest_claims)
        self.tree_advice = tree_advice_encode(g, self.parent_map)
        self.forest_advice = [
            tree_advice_encode(g, {v: f.get(v) for v in range(g.n)})
            for f in self.forests
        ]
        st_prefix = "stref." if st_scheme == "reference" else "stc."
        self.st = STFragment(g, st_prefix, st_scheme,
                             reps=name_bits(self.pc, c), family="pe.st")

    def emit(self, rnd: int, inst: Instance, tr: Transcript) -> None:
        if rnd == 0:
            emit_advice(tr, rnd, "pc.", self.tree_advice)
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


class PlanarEmbeddingProtocol(Protocol):
    name = "planar-embedding"
    check_families = ("po.echo", "po.structure", "po.pairing")

    def __init__(self, c: int = 3, st_scheme: str = "reference"):
        self.c = c
        self.st_scheme = st_scheme
        self.st_prefix = "stref." if st_scheme == "reference" else "stc."

    def validate_instance(self, inst: Instance) -> None:
        g = inst.graph
        if g.directed:
            raise ValueError("undirected instances only")
        if not g.is_connected():
            raise ValueError("instance must be connected")
        rot = rotation_of(inst)
        for v in range(g.n):
            if sorted(rot[v]) != sorted(g.adjacency[v]):
                raise ValueError(f"rotation at node {v} is not a permutation")

    def make_honest(self, inst: Instance) -> Prover:
        return EmbeddingHonest(inst, self.c, self.st_scheme)

    def _claimed_rotation(self, inst: Instance, tr: Transcript):
        return rotation_of(inst), []

    def _claimed_space(self, inst: Instance, tr: Transcript, hosting):
        g = inst.graph
        rot, fails = self._claimed_rotation(inst, tr)
        if rot is None:
            return None, fails
        parents, ok, children_dec = decode_advice(tr, g, "pc.")
        for v in range(g.n):
            if not ok[v]:
                fails.append((v, "pe.decode"))
        if any(not o for o in ok):
            return None, fails
        parent_map = {v: parents[v] for v in range(g.n)}
        try:
            children = {v: child_order(g, rot, parent_map, v) for v in range(g.n)}
            tour, raw_arcs = euler_tour_reduction(g, parent_map, rot)
        except (ReductionError, ValueError):
            fails.append((0, "pe.walk"))
            return None, fails
        arcs = [Arc(a, b, eid) for a, b, eid in raw_arcs]
        ranks, layouts = corner_ranks(g, rot, parent_map, children, tour, raw_arcs)
        space = CopySpace(g, tour, arcs, "R.", children, hosting)
        space.corner_ranks = ranks
        space.corner_layouts = layouts
        return space, fails

    def draw_coins(self, inst: Instance, rnd: int, tr: Transcript) -> None:
        g = inst.graph
        space, fails = self._claimed_space(inst, tr, None)
        if space is None:
            return
        pc = PrimeContext.for_size(2 * g.n, self.c)
        NestingCore(space, pc, self.c).draw_coins(tr, rnd)
        LRCore(space, pc).draw_coins(tr, rnd)
        if self.st_scheme == "contract":
            parents, ok, _ = decode_advice(tr, g, "pc.")
            STFragment(g, self.st_prefix, self.st_scheme,
                       reps=name_bits(pc, self.c), family="pe.st").draw_coins(
                tr, rnd, parents)

    def decide(self, inst: Instance, tr: Transcript, sink: CheckSink) -> None:
        g = inst.graph
        parents, ok, children_dec = decode_advice(tr, g, "pc.")
        pc = PrimeContext.for_size(2 * g.n, self.c)
        st = STFragment(g, self.st_prefix, self.st_scheme,
                        reps=name_bits(pc, self.c), family="pe.st")
        st.decide(tr, sink, parents, children_dec)
        hosting = decode_hosting(tr, g, MAX_SLOTS)
        space, fails = self._claimed_space(inst, tr, hosting)
        for v, tag in fails:
            sink.fail(v, tag)
        if space is None:
            return
        eval_node = space.node_of
        LRCore(space, pc).decide(tr, sink, eval_node)
        NestingCore(space, pc, self.c,
                    forced_rank=getattr(space, "corner_ranks", None)).decide(
            tr, sink, eval_node)
        # corner layout: left-going arcs precede right-going ones clockwise
        for p, sides in space.corner_layouts.items():
            seen_r = False
            good = True
            for s in sides:
                if s == "R":
                    seen_r = True
                elif seen_r:
                    good = False
            sink.check(eval_node(p), "po.structure.corner", good)


# ---------------------------------------------------------------------------
# planarity (rotation supplied by the prover through edge labels)


class PlanarityHonest(EmbeddingHonest):
    def __init__(self, inst: Instance, c: int = 3, st_scheme: str = "reference",
                 nest_claims=None, lr_claims=None, rho_lie: bool = False):
        super().__init__(inst, c, st_scheme, rot=rotation_of(inst),
                         nest_claims=nest_claims, lr_claims=lr_claims,
                         rho_lie=rho_lie)
        self.maxdeg = max((g_deg for g_deg in map(len, inst.graph.adjacency)),
                          default=1)
        self.rho_bits = max(1, (max(1, self.maxdeg - 1)).bit_length())

    def emit(self, rnd: int, inst: Instance, tr: Transcript) -> None:
        super().emit(rnd, inst, tr)
        if rnd == 0:
            g = self.g
            port = [{u: k for k, u in enumerate(self.rot[v])} for v in range(g.n)]
            for eid, (u, w) in enumerate(g.edges):
                a = port[u][w]
                b = port[w][u]
                if self.rho_lie and eid == 0:
                    a = (a + 1) % max(1, len(self.rot[u]))
                tr.set_edge(rnd, eid, "rho.a", a, self.rho_bits)
                tr.set_edge(rnd, eid, "rho.b", b, self.rho_bits)


class PlanarityProtocol(PlanarEmbeddingProtocol):
    name = "planarity"
    check_families = PlanarEmbeddingProtocol.check_families + ("pl.rho",)

    def validate_instance(self, inst: Instance) -> None:
        g = inst.graph
        if g.directed:
            raise ValueError("undirected instances only")
        if not g.is_connected():
            raise ValueError("instance must be connected")

    def make_honest(self, inst: Instance) -> Prover:
        if inst.witness.rotation is None:
            from .embedding import planar_embedding

            rot = planar_embedding(inst.graph)
            if rot is None:
                raise ValueError("instance is not planar; no honest witness")
            inst.witness.rotation = rot
        return PlanarityHonest(inst, self.c, self.st_scheme)

    def _claimed_rotation(self, inst: Instance, tr: Transcript):
        """Rebuild per-node rotations from the claimed edge port pairs."""
        g = inst.graph
        a_col = tr.edge.get("rho.a", {})
        b_col = tr.edge.get("rho.b", {})
        fails: list[tuple[int, str]] = []
        rho: list[dict[int, int]] = [dict() for _ in range(g.n)]
        for eid, (u, w) in enumerate(g.edges):
            a, b = a_col.get(eid), b_col.get(eid)
            if a is None or b is None:
                fails.append((u, "pl.rho.missing"))
                fails.append((w, "pl.rho.missing"))
                continue
            rho[u][w] = a
            rho[w][u] = b
        rot: list[list[int]] = []
        for v in range(g.n):
            deg = len(g.adjacency[v])
            vals = rho[v]
            if sorted(vals.values()) != list(range(deg)):
                fails.append((v, "pl.rho.bijection"))
                rot = None
                break
            order = [None] * deg
            for u, k in vals.items():
                order[k] = u
            rot.append(order)
        if rot is None or fails:
            return None, fails
        return rot, fails


def register_all(register, po_claims_for) -> None:
    from .adversaries import FlipBitsProver, RandomLabelProver, StrategyError, parse_spec

    def pe_adv(inst, strategy, c):
        name, param = parse_spec(strategy)
        proto = PlanarEmbeddingProtocol(c)
        if name == "random-labels":
            return RandomLabelProver(proto.make_honest(inst), salt=strategy)
        if name == "flip-k-bits":
            return FlipBitsProver(proto.make_honest(inst), int(param or 3), salt=strategy)
        probe = EmbeddingHonest(inst, c)
        nc = po_claims_for(strategy, probe.nest.sbits)
        if nc is None:
            raise StrategyError(f"{name!r} not applicable")
        return EmbeddingHonest(inst, c, nest_claims=nc)

    def pl_adv(inst, strategy, c):
        name, param = parse_spec(strategy)
        proto = PlanarityProtocol(c)
        if name == "random-labels":
            return RandomLabelProver(proto.make_honest(inst), salt=strategy)
        if name == "flip-k-bits":
            return FlipBitsProver(proto.make_honest(inst), int(param or 3), salt=strategy)
        if name == "wrong-port-pair":
            proto.make_honest(inst)
            return PlanarityHonest(inst, c, rho_lie=True)
        proto.make_honest(inst)  # ensures a rotation witness exists
        probe = PlanarityHonest(inst, c)
        nc = po_claims_for(strategy, probe.nest.sbits)
        if nc is None:
            raise StrategyError(f"{name!r} not applicable")
        return PlanarityHonest(inst, c, nest_claims=nc)

    register("planar-embedding", PlanarEmbeddingProtocol, pe_adv)
    register("planarity", PlanarityProtocol, pl_adv)
