"""Series-parallel and treewidth-2 protocols.

The prover encodes a nested ear decomposition: the sub-ear forest (ear
interiors; the first ear in full) goes out as tree advice, connecting
edges and single-edge ears carry marks, and each sub-ear's root samples a
nonce. Hosting of an ear is verified through (ear, pred_ear) nonce pairs
with an indirection at host-ear endpoints, and proper nesting of the ears
attached to each ear is verified by running the orientation + nesting
machinery per ear, treating hosted ears as virtual arcs whose labels are
replicated across their interior nodes.

Ear-run end positions (the host attachment points) receive no labels:
their run fields live on the adjacent sub-ear endpoints and their run
coins come from those nodes; their own stack checks are dropped (all their
in-run arcs share the end position, so they cannot cross each other).
Treewidth-2 plugs this machinery into the block-cut stages of the
outerplanarity protocol, with the first ear of every non-root component
being the (separating node, leader) edge, so separating nodes end up
receiving no component-run labels at all.
"""

from __future__ import annotations

from typing import Optional

from .coloring import forest_decomposition
from .graphs import EarDecomposition, Graph, Instance
from .lr_sorting import LRCore
from .nesting import NestingCore, name_bits
from .path_outerplanar import decode_advice, decode_hosting, emit_advice, MAX_SLOTS
from .primitives import PrimeContext, edge_label_embedding, tree_advice_encode
from .runtime import CheckSink, Protocol, Prover, Transcript
from .spaces import Arc, Space

SP_CHECKS = ("po.echo", "po.structure", "po.pairing",
             "sp.cond1", "sp.shape", "sp.classified", "sp.replica")


# ---------------------------------------------------------------------------
# honest-side structure


class SPStructure:
    """Sub-ears, connecting edges, and per-ear runs from a decomposition.

    ``exclude_first_node`` drops the first node of ear 1 from the sub-ear
    forest (the treewidth-2 separating node)."""

    def __init__(self, g: Graph, dec: EarDecomposition,
                 ear_exclude: Optional[dict[int, set[int]]] = None):
        self.g = g
        self.dec = dec
        self.plain_first = True
        self.ear_exclude = ear_exclude or {}
        ears = dec.ears
        self.n_ears = len(ears)
        self.first_ears = {j for j, p in enumerate(dec.nesting_parent) if p is None}
        self.subears: list[list[int]] = []
        self.sub_of: dict[int, int] = {}
        self.p1_nodes: set[int] = set()
        self.conn: list[Optional[tuple[int, int]]] = []  # per ear: (left eid, right eid)
        for j, ear in enumerate(ears):
            if j in self.first_ears:
                sub = [v for v in ear if v not in self.ear_exclude.get(j, ())]
                self.conn.append(None)
            else:
                sub = ear[1:-1]
                if sub:
                    self.conn.append((g.edge_id(ear[0], ear[1]),
                                      g.edge_id(ear[-2], ear[-1])))
                else:
                    self.conn.append(None)
            self.subears.append(sub)
            for v in sub:
                self.sub_of[v] = j
            if j in self.first_ears:
                self.p1_nodes |= set(sub)
        # single-edge ears (no interior): the edge itself is the ear
        self.se_edge: dict[int, int] = {}  # ear idx -> eid
        for j, ear in enumerate(ears):
            if j not in self.first_ears and len(ear) == 2:
                self.se_edge[j] = g.edge_id(ear[0], ear[1])
        # runs: one per ear; hosted ears become arcs of the most specific
        # run containing both attachment points (deterministic, so prover
        # and verifier assemble identically without global knowledge)
        paths = [self.run_order(j) for j in range(self.n_ears)]
        self.paths = paths
        node_runs: dict[int, list[int]] = {}
        for j, path in enumerate(paths):
            for v in path:
                node_runs.setdefault(v, []).append(j)
        self.host_of: dict[int, int] = {}
        self.hosted: dict[int, list[int]] = {j: [] for j in range(self.n_ears)}
        for j in range(self.n_ears):
            if j in self.first_ears:
                continue
            endl, endr = ears[j][0], ears[j][-1]
            cands = [h for h in node_runs.get(endl, [])
                     if h != j and endr in set(paths[h])
                     and endl != endr and len(paths[h]) >= 2]
            if not cands:
                cands = [dec.nesting_parent[j]]
            host = min(cands, key=lambda h: (len(paths[h]), paths[h][0]))
            self.host_of[j] = host
            self.hosted[host].append(j)

    def f_parents(self) -> dict[int, Optional[int]]:
        parent: dict[int, Optional[int]] = {}
        for sub in self.subears:
            if not sub:
                continue
            parent.setdefault(sub[0], None)
            for a, b in zip(sub, sub[1:]):
                parent[b] = a
        return parent

    def run_order(self, j: int) -> list[int]:
        """Path of ear j's run: attachment ends plus the sub-ear."""
        ear = self.dec.ears[j]
        if j in self.first_ears:
            return list(ear)
        return [ear[0]] + list(self.subears[j]) + [ear[-1]]


# ---------------------------------------------------------------------------
# ear spaces


class EarSpace(Space):
    """Run space of one ear: both end positions are deferred.

    End node fields live on the adjacent interior node ("DL."/"DR."
    prefixes); virtual arcs (hosted multi-node ears) store their fields on
    the hosted ear's interior nodes (replicated; reads go to the first
    interior node and the replica chain is checked separately); real arcs
    (single-edge ears) use forest hosting, except end-incident ones which
    live on their non-end endpoint.
    """

    def __init__(self, g: Graph, order: list[int], arcs: list[Arc], prefix: str,
                 hosting: Optional[dict], varc_host: dict[object, int],
                 plain: bool):
        super().__init__(len(order), arcs, prefix)
        self.g = g
        self.order = order
        self.hosting = hosting
        self.varc_host = varc_host  # arc key -> replica representative node
        self.plain = plain  # first-ear run: no deferred ends

    def _deferred(self, pos: int) -> Optional[tuple[int, str]]:
        if self.plain:
            return None
        if pos == 0:
            return self.order[1], "DL."
        if pos == self.L - 1:
            return self.order[self.L - 2], "DR."
        return None

    def node_of(self, pos: int) -> int:
        return self.order[pos]

    def coin_node(self, pos: int) -> int:
        d = self._deferred(pos)
        return d[0] if d else self.order[pos]

    def coin_field(self, pos: int, name: str) -> str:
        d = self._deferred(pos)
        if d:
            return self.prefix + d[1] + name + "#"
        return self.pf(name) + "#"


    def set_p(self, tr, rnd, pos, name, val, bits):
        d = self._deferred(pos)
        if d:
            tr.set_node(rnd, d[0], self.prefix + d[1] + name, val, bits)
        else:
            tr.set_node(rnd, self.order[pos], self.pf(name), val, bits)

    def get_p(self, tr, pos, name, default=None):
        d = self._deferred(pos)
        if d:
            return tr.node.get(self.prefix + d[1] + name, {}).get(d[0], default)
        return tr.node.get(self.pf(name), {}).get(self.order[pos], default)

    def reader(self, tr, name):
        col = tr.node.get(self.pf(name), {})
        dl = tr.node.get(self.prefix + "DL." + name, {})
        dr = tr.node.get(self.prefix + "DR." + name, {})
        order, L, plain = self.order, self.L, self.plain

        def get(pos):
            if not plain and pos == 0:
                return dl.get(order[1])
            if not plain and pos == L - 1:
                return dr.get(order[L - 2])
            return col.get(order[pos])

        return get

    def set_a(self, tr, rnd, arc_i, name, val, bits):
        key = self.arcs[arc_i].key
        if key in self.varc_host:
            for node in self.varc_host[key]:
                tr.set_node(rnd, node, f"vE.{name}", val, bits)
        else:
            _, host, prefix = key
            tr.set_node(rnd, host, prefix + name, val, bits)

    def get_a(self, tr, arc_i, name, default=None):
        key = self.arcs[arc_i].key
        if key in self.varc_host:
            return tr.node.get(f"vE.{name}", {}).get(self.varc_host[key][0], default)
        _, host, prefix = key
        return tr.node.get(prefix + name, {}).get(host, default)



def se_storage(g: Graph, tr: Transcript, eid: int) -> tuple[int, str]:
    """Label home of a single-edge ear: deterministic from labels, never a
    node playing separator for the ear's component (cut bits and the mod-3
    depth labels identify that side)."""
    u, w = g.edges[eid]
    cut = tr.node.get("oc.cut", {})
    d = tr.node.get("oc.d", {})
    host = min(u, w)
    cu, cw = cut.get(u) == 1, cut.get(w) == 1
    if cu != cw:
        host = u if cw else w
    elif cu and cw:
        du, dw = d.get(u), d.get(w)
        if du is not None and dw is not None and dw == (du + 1) % 3:
            host = w
        elif du is not None and dw is not None and du == (dw + 1) % 3:
            host = u
    port = g.adjacency[host].index(w if host == u else u)
    return host, f"sE{port}."


def build_ear_runs(g: Graph, st: SPStructure, hosting, pc: PrimeContext, c: int,
                   nest_claims_factory=None, lr_claims_factory=None, tr=None):
    """Construct the per-ear run objects (shared by prover and verifier)."""
    runs = []
    for j in range(st.n_ears):
        order = st.run_order(j)
        if len(order) < 3:
            runs.append(None)
            continue
        ear = st.dec.ears[j]
        plain = j in st.first_ears and not (set(ear) & st.ear_exclude.get(j, set()))
        pos_of = {v: i for i, v in enumerate(order)}
        arcs = []
        varc_host: dict[object, int] = {}
        arc_of_hosted: dict[int, int] = {}
        for h in st.hosted[j]:
            ear = st.dec.ears[h]
            a, b = pos_of.get(ear[0]), pos_of.get(ear[-1])
            if a is None or b is None or a == b:
                continue
            ends = {0, len(order) - 1} if not plain else set()
            exempt = (a in ends) or (b in ends)
            if h in st.se_edge:
                eid = st.se_edge[h]
                host, prefix = se_storage(g, tr, eid) if tr is not None else (None, None)
                key = ("se", host, prefix)
            else:
                key = ("v", h)
                varc_host[key] = list(st.subears[h])
            arc_of_hosted[h] = len(arcs)
            arcs.append(Arc(min(a, b), max(a, b), key, lr_exempt=exempt))
        space = EarSpace(g, order, arcs, "S.", hosting, varc_host, plain)
        skip = frozenset() if plain else frozenset({0, len(order) - 1})
        nc = nest_claims_factory(j) if nest_claims_factory else None
        lc = lr_claims_factory(j) if lr_claims_factory else None
        runs.append({
            "space": space,
            "lr": LRCore(space, pc, lc),
            "nest": NestingCore(space, pc, c, nc, skip_positions=skip),
            "skip": skip,
            "arc_of_hosted": arc_of_hosted,
        })
    return runs


def run_eval_fns(space: EarSpace):
    order, L, plain = space.order, space.L, space.plain

    def eval_node(pos):
        if not plain and pos == 0:
            return order[1]
        if not plain and pos == L - 1:
            return order[L - 2]
        return order[pos]

    def arc_eval(pos):
        return order[pos]

    return eval_node, arc_eval


# ---------------------------------------------------------------------------
# nested ear decomposition supply (witness or oracle search)


def nested_ear_decomposition(g: Graph, from_witness: Optional[EarDecomposition] = None,
                             first_ear: Optional[tuple[int, int]] = None):
    """Decomposition from the witness, else by search at oracle scale."""
    from .oracles import OracleError, find_nested_ear_decomposition, validate_ear_decomposition

    if from_witness is not None:
        validate_ear_decomposition(g, from_witness)
        return from_witness
    if first_ear is not None:
        dec = _search_with_first_ear(g, first_ear)
    else:
        dec = find_nested_ear_decomposition(g)
    if dec is None:
        raise OracleError("graph admits no nested ear decomposition")
    return dec


def _search_with_first_ear(g: Graph, first: tuple[int, int]):
    """Exhaustive nested-ear search with a fixed single-edge first ear."""
    from .oracles import OracleError, validate_ear_decomposition
    from .graphs import edge_key

    if not g.has_edge(*first):
        return None

    all_edges = {edge_key(u, v) for u, v in g.edges}

    def ear_paths(src, allowed_end, placed, used):
        def extend(path):
            v = path[-1]
            for w in g.adjacency[v]:
                k = edge_key(v, w)
                if k in used or w in path:
                    continue
                if w in allowed_end:
                    yield path + [w]
                if w not in placed:
                    yield from extend(path + [w])

        yield from extend([src])

    def solve(ears, parents, placed, used):
        if len(used) == len(all_edges) and len(placed) == g.n:
            dec = EarDecomposition([list(e) for e in ears], list(parents))
            try:
                validate_ear_decomposition(g, dec)
            except OracleError:
                return None
            return dec
        for hi, host in enumerate(ears):
            hostset = set(host)
            for src in host:
                for path in ear_paths(src, hostset, placed, used):
                    u2 = used | {edge_key(a, b) for a, b in zip(path, path[1:])}
                    res = solve(ears + [path], parents + [hi],
                                placed | set(path), u2)
                    if res is not None:
                        return res
        return None

    start = [list(first)]
    return solve(start, [None], set(first), {edge_key(*first)})


# ---------------------------------------------------------------------------
# honest prover (standalone series-parallel)


NONCE_FIELD = "sp.rq#"


class SPHonest(Prover):
    is_honest = True

    def __init__(self, inst: Instance, c: int = 3,
                 nest_claims_factory=None, lr_claims_factory=None,
                 structure: Optional[SPStructure] = None,
                 own_advice: bool = True):
        g = inst.graph
        self.g = g
        self.c = c
        self.pc = PrimeContext.for_size(g.n, c)
        if structure is None:
            dec = inst.witness.ear_decomposition
            if dec is None:
                dec = nested_ear_decomposition(g)
            structure = SPStructure(g, dec)
        self.st = structure
        self.own_advice = own_advice
        self.parents = self.st.f_parents()
        if own_advice:
            self.f_advice = tree_advice_encode(g, self.parents)
            self.forests = forest_decomposition(g)
            self.hosting = edge_label_embedding(g, self.forests).slot_of
            self.forest_advice = [
                tree_advice_encode(g, {v: f.get(v) for v in range(g.n)})
                for f in self.forests
            ]
        else:
            self.hosting = None
        self.runs = None
        self.nest_claims_factory = nest_claims_factory
        self.lr_claims_factory = lr_claims_factory
        self.bits_d = max(1, (g.n - 1).bit_length())
        self.bits_p = max(1, (self.pc.p - 1).bit_length())

    def attach_hosting(self, hosting):
        self.hosting = hosting

    def _ensure_runs(self, tr):
        if self.runs is None:
            self.runs = build_ear_runs(self.g, self.st, self.hosting, self.pc,
                                       self.c, self.nest_claims_factory,
                                       self.lr_claims_factory, tr=tr)

    def emit(self, rnd: int, inst: Instance, tr: Transcript) -> None:
        g, st = self.g, self.st
        if rnd != 0:
            self._ensure_runs(tr)
        if rnd == 0:
            if self.own_advice:
                emit_advice(tr, rnd, "fc.", self.f_advice)
                for k, adv in enumerate(self.forest_advice):
                    emit_advice(tr, rnd, f"eh{k}.", adv)
            for j, sub in enumerate(st.subears):
                for depth, v in enumerate(sub):
                    tr.set_node(rnd, v, "sp.p1", 1 if j == 0 else 0, 1)
                    tr.set_node(rnd, v, "strefq.d", depth, self.bits_d)
            for j, pair in enumerate(st.conn):
                if pair is None:
                    continue
                le, re = pair
                sub = st.subears[j]
                for eid, mark, snode in ((le, 1, sub[0]), (re, 2, sub[-1])):
                    u, w = g.edges[eid]
                    fieldname = "sp.cA" if u == snode else "sp.cB"
                    tr.set_edge(rnd, eid, fieldname, mark, 2)
            for j, eid in st.se_edge.items():
                tr.set_edge(rnd, eid, "sp.se", 1, 1)
            self._ensure_runs(tr)
        elif rnd == 2:
            coins = tr.coins.get(NONCE_FIELD, {})
            nonce = [coins.get(sub[0], 0) if sub else 0 for sub in st.subears]
            for j, sub in enumerate(st.subears):
                pred = 0 if j == 0 else nonce[st.host_of.get(j, st.dec.nesting_parent[j])]
                for v in sub:
                    tr.set_node(rnd, v, "sp.ear", nonce[j], self.bits_p)
                    tr.set_node(rnd, v, "sp.pred", pred, self.bits_p)
            for j, eid in st.se_edge.items():
                host = st.host_of.get(j, st.dec.nesting_parent[j])
                run = self.runs[host]
                if run is not None and j in run["arc_of_hosted"]:
                    run["space"].set_a(tr, rnd, run["arc_of_hosted"][j], "seh",
                                       nonce[host], self.bits_p)
        for run in self.runs:
            if run is None:
                continue
            if rnd == 0:
                run["nest"].emit_round1(tr, rnd)
                run["lr"].emit_round1(tr, rnd)
            elif rnd == 2:
                run["nest"].emit_round3(tr, rnd)
                run["lr"].emit_round3(tr, rnd)
            elif rnd == 4:
                run["lr"].emit_round5(tr, rnd)


def draw_sp_coins(g, tr, rnd, subear_roots):
    if rnd == 1:
        from .primitives import PrimeContext

        p = PrimeContext.for_size(g.n).p
        for v in subear_roots:
            tr.draw_coin(rnd, v, NONCE_FIELD, p)


# ---------------------------------------------------------------------------
# claimed-structure assembly (verifier side)


def claimed_subears(g: Graph, tr: Transcript, sink: Optional[CheckSink],
                    linked: bool = False):
    """Walk the claimed sub-ear forest from the advice labels.

    With ``linked`` (treewidth-2), the forest is embedded in one global
    spanning tree: walks also start at connecting-link and leader marks and
    stop before descending into them. Structural failures go to the sink
    under sp.shape."""
    parents, ok, children = decode_advice(tr, g, "fc.")
    ce_col = tr.node.get("tw.ce", {}) if linked else {}
    lead_col = tr.node.get("oc.lead", {}) if linked else {}

    def is_start(v):
        return parents[v] is None or ce_col.get(v) == 1 or lead_col.get(v) == 1

    walks: list[list[int]] = []
    covered: set[int] = set()
    for v in range(g.n):
        if not ok[v] and sink is not None:
            sink.fail(v, "sp.shape.decode")
    roots = [v for v in range(g.n) if ok[v] and is_start(v)]
    for r in roots:
        walk = [r]
        seen = {r}
        while True:
            kids = [u for u in children[walk[-1]] if not is_start(u)]
            if len(kids) > 1:
                if sink is not None:
                    sink.fail(walk[-1], "sp.shape.chain")
                break
            if not kids or kids[0] in seen:
                break
            walk.append(kids[0])
            seen.add(kids[0])
        walks.append(walk)
        covered |= set(walk)
    if sink is not None:
        for v in range(g.n):
            if v not in covered:
                sink.fail(v, "sp.shape.cover")
    return walks, parents, children


def _conn_mark(tr: Transcript, g: Graph, eid: int, node: int):
    """This node's connecting mark on the edge (1=left, 2=right, 0=none)."""
    u, w = g.edges[eid]
    fieldname = "sp.cA" if u == node else "sp.cB"
    return tr.edge.get(fieldname, {}).get(eid, 0)


def assemble_claimed_structure(g: Graph, tr: Transcript, sink: Optional[CheckSink],
                               linked: bool = False):
    """Claimed SPStructure-like data from labels: sub-ear walks, their
    connecting edges, hosted relations via nonces. Purely label-driven."""
    walks, parents, children = claimed_subears(g, tr, sink, linked)
    p1_col = tr.node.get("sp.p1", {})
    ear_col = tr.node.get("sp.ear", {})
    pred_col = tr.node.get("sp.pred", {})
    coins = tr.coins.get(NONCE_FIELD, {})
    subs = []
    for walk in walks:
        root, last = walk[0], walk[-1]
        is_p1 = p1_col.get(root) == 1
        le = re = None
        if not is_p1:
            for node, want, slot in ((root, 1, "le"), (last, 2, "re")):
                cands = [g.edge_id(node, u) for u in g.adjacency[node]
                         if _conn_mark(tr, g, g.edge_id(node, u), node) == want]
                if len(cands) != 1:
                    if sink is not None:
                        sink.fail(node, "sp.shape.connecting")
                else:
                    if slot == "le":
                        le = cands[0]
                    else:
                        re = cands[0]
        subs.append({
            "walk": walk, "p1": is_p1, "le": le, "re": re,
            "nonce": coins.get(root),
        })
    return subs, parents, children


def _far_end(g: Graph, eid: int, node: int) -> int:
    u, w = g.edges[eid]
    return w if u == node else u

class SeriesParallelProtocol(Protocol):
    name = "series-parallel"
    check_families = SP_CHECKS

    def __init__(self, c: int = 3, st_scheme: str = "reference"):
        self.c = c
        self.st_scheme = st_scheme

    def validate_instance(self, inst: Instance) -> None:
        if inst.graph.directed:
            raise ValueError("undirected instances only")
        if not inst.graph.is_connected():
            raise ValueError("instance must be connected")

    def make_honest(self, inst: Instance) -> Prover:
        return SPHonest(inst, self.c)

    def draw_coins(self, inst: Instance, rnd: int, tr: Transcript) -> None:
        g = inst.graph
        subs, parents, children = assemble_claimed_structure(g, tr, None)
        if rnd == 1:
            draw_sp_coins(g, tr, rnd, [s["walk"][0] for s in subs])
        pc = PrimeContext.for_size(g.n, self.c)
        for run in self._claimed_runs(g, tr, subs, None, pc, parents):
            if run is None:
                continue
            run["nest"].draw_coins(tr, rnd)
            run["lr"].draw_coins(tr, rnd)

    def _claimed_runs(self, g: Graph, tr: Transcript, subs, hosting,
                      pc: PrimeContext, parents=None):
        """Build per-ear run objects from the claimed labels."""
        nonce_to_idx = {}
        for k, s in enumerate(subs):
            if s["nonce"] is not None and s["nonce"] not in nonce_to_idx:
                nonce_to_idx[s["nonce"]] = k
        ear_col = tr.node.get("sp.ear", {})
        pred_col = tr.node.get("sp.pred", {})
        # claimed run paths
        orders = []
        for s in subs:
            walk = s["walk"]
            if s["p1"]:
                order = list(walk)
                if parents is not None and parents[walk[0]] is not None:
                    # component first ears keep their separator at the end
                    order = order + [parents[walk[0]]]
                orders.append((order, True))
            else:
                endl = _far_end(g, s["le"], walk[0]) if s["le"] is not None else None
                endr = _far_end(g, s["re"], walk[-1]) if s["re"] is not None else None
                if endl is None or endr is None or endl == endr:
                    orders.append(None)
                    continue
                orders.append(([endl] + walk + [endr], False))
        # hosted arcs: attach each claimed ear (and single-edge ear) to the
        # most specific claimed run containing both attachment points
        node_runs: dict[int, list[int]] = {}
        for k, o in enumerate(orders):
            if o is None or len(o[0]) < 2:
                continue
            for v in o[0]:
                node_runs.setdefault(v, []).append(k)

        def pick_host(skip, endl, endr):
            cands = [h for h in node_runs.get(endl, [])
                     if h != skip and endr in set(orders[h][0])]
            if not cands:
                return None
            return min(cands, key=lambda h: (len(orders[h][0]), orders[h][0][0]))

        hosted: dict = {k: [] for k in range(len(subs))}
        for k, s in enumerate(subs):
            if s["p1"] or orders[k] is None:
                continue
            endl, endr = orders[k][0][0], orders[k][0][-1]
            host = pick_host(k, endl, endr)
            if host is None:
                continue
            hosted[host].append(("v", k, endl, endr))
        se_col = tr.edge.get("sp.se", {})
        for eid, flag in se_col.items():
            if flag != 1:
                continue
            u, w = g.edges[eid]
            host = pick_host(None, u, w)
            if host is not None:
                hosted[host].append(("e", eid, u, w))
        runs = []
        for k, s in enumerate(subs):
            if orders[k] is None:
                runs.append(None)
                continue
            order, plain = orders[k]
            if len(order) < 3:
                runs.append(None)
                continue
            pos_of = {v: i for i, v in enumerate(order)}
            arcs = []
            varc_host = {}
            ends = set() if plain else {0, len(order) - 1}
            for item in hosted.get(k, ()):
                kind, h, endl, endr = item
                a, b = pos_of.get(endl), pos_of.get(endr)
                if a is None or b is None or a == b:
                    continue
                exempt = a in ends or b in ends
                if kind == "v":
                    key = ("v", h)
                    varc_host[key] = list(subs[h]["walk"])
                else:
                    host, prefix = se_storage(g, tr, h)
                    key = ("se", host, prefix)
                arcs.append(Arc(min(a, b), max(a, b), key, lr_exempt=exempt))
            space = EarSpace(g, order, arcs, "S.", hosting, varc_host, plain)
            skip = frozenset() if plain else frozenset({0, len(order) - 1})
            runs.append({
                "space": space,
                "lr": LRCore(space, pc),
                "nest": NestingCore(space, pc, self.c, skip_positions=skip),
                "skip": skip,
            })
        return runs

    def decide(self, inst: Instance, tr: Transcript, sink: CheckSink) -> None:
        g = inst.graph
        subs, parents, children = assemble_claimed_structure(g, tr, sink)
        self._decide_sp_stage(g, tr, sink, subs, parents, children)
        hosting = decode_hosting(tr, g, MAX_SLOTS)
        pc = PrimeContext.for_size(g.n, self.c)
        for run in self._claimed_runs(g, tr, subs, hosting, pc, parents):
            if run is None:
                continue
            eval_node, arc_eval = run_eval_fns(run["space"])
            run["lr"].decide(tr, sink, eval_node, arc_eval)
            run["nest"].decide(tr, sink, eval_node)

    def _decide_sp_stage(self, g: Graph, tr: Transcript, sink: CheckSink,
                         subs, parents, children) -> None:
        ear_col = tr.node.get("sp.ear", {})
        pred_col = tr.node.get("sp.pred", {})
        p1_col = tr.node.get("sp.p1", {})
        d_col = tr.node.get("strefq.d", {})
        coins = tr.coins.get(NONCE_FIELD, {})
        se_col = tr.edge.get("sp.se", {})
        seh_by_edge = self._seh_values(g, tr, subs)
        # per-node chains and depth labels, along the claimed sub-ear walks
        in_walk: set[int] = set()
        for s in subs:
            walk = s["walk"]
            in_walk.update(walk)
            root = walk[0]
            e = ear_col.get(root)
            if e is None:
                sink.fail(root, "sp.cond1.missing")
            else:
                sink.check(root, "sp.cond1.echo", e == coins.get(root))
                sink.check(root, "sp.shape.depth", d_col.get(root) == 0)
                if s["p1"]:
                    sink.check(root, "sp.cond1.p1root", pred_col.get(root) == 0)
            for prev, v in zip(walk, walk[1:]):
                e, p, b, d = (ear_col.get(v), pred_col.get(v), p1_col.get(v),
                              d_col.get(v))
                if e is None or p is None or b is None or d is None:
                    sink.fail(v, "sp.cond1.missing")
                    continue
                sink.check(v, "sp.cond1.chain", e == ear_col.get(prev)
                           and p == pred_col.get(prev) and b == p1_col.get(prev))
                sink.check(v, "sp.shape.depth", d == (d_col.get(prev, -2) + 1))
        for v in range(g.n):
            if v not in in_walk:
                continue
            if ear_col.get(v) is None or pred_col.get(v) is None:
                sink.fail(v, "sp.cond1.missing")
        # interior nodes carry no connecting marks; endpoints exactly one
        walk_role: dict[int, tuple[int, bool, bool]] = {}
        for k, s in enumerate(subs):
            walk = s["walk"]
            for v in walk:
                walk_role[v] = (k, v == walk[0], v == walk[-1])
        for v in range(g.n):
            role = walk_role.get(v)
            if role is None:
                continue
            k, is_root, is_last = role
            is_p1 = subs[k]["p1"]
            for u in g.adjacency[v]:
                eid = g.edge_id(v, u)
                mark = _conn_mark(tr, g, eid, v)
                if mark == 0:
                    continue
                if is_p1:
                    sink.fail(v, "sp.shape.connecting")
                elif mark == 1 and not is_root:
                    sink.fail(v, "sp.shape.connecting")
                elif mark == 2 and not is_last:
                    sink.fail(v, "sp.shape.connecting")
        # host indirection at ear endpoints: every incoming connecting claim
        # must name a sub-ear this node can vouch for; vouching covers the
        # node's own sub-ear, sub-ears connecting at it, and linked children
        # (component first ears hang off their separator through the tree)
        ce_col = tr.node.get("tw.ce", {})
        lead_col = tr.node.get("oc.lead", {})
        cands: dict[int, set] = {}
        for v in range(g.n):
            c = {ear_col.get(v)}
            for u in g.adjacency[v]:
                eid = g.edge_id(v, u)
                if _conn_mark(tr, g, eid, u):
                    c.add(ear_col.get(u))
                if parents[u] == v and (ce_col.get(u) == 1 or lead_col.get(u) == 1):
                    c.add(ear_col.get(u))
            c.discard(None)
            cands[v] = c
        for v in range(g.n):
            for u in g.adjacency[v]:
                eid = g.edge_id(v, u)
                if _conn_mark(tr, g, eid, u):
                    sink.check(v, "sp.cond1.host", pred_col.get(u) in cands[v])
        # single-edge ears: the claimed host nonce must be vouched at both ends
        for eid, flag in se_col.items():
            if flag != 1:
                continue
            u, w = g.edges[eid]
            seh = seh_by_edge.get(eid)
            sink.check(u, "sp.cond1.se", seh is not None and seh in cands[u])
            sink.check(w, "sp.cond1.se", seh is not None and seh in cands[w])
        # every edge must be classified
        fparent_edges = {g.edge_id(v, parents[v]) for v in range(g.n)
                         if parents[v] is not None}
        for eid, (u, w) in enumerate(g.edges):
            classified = (eid in fparent_edges or se_col.get(eid) == 1
                          or _conn_mark(tr, g, eid, u) != 0
                          or _conn_mark(tr, g, eid, w) != 0)
            if not classified:
                sink.fail(u, "sp.classified")
                sink.fail(w, "sp.classified")
        # virtual-arc replica chains along hosted sub-ears
        for k, s in enumerate(subs):
            walk = s["walk"]
            if s["p1"] or len(walk) < 2:
                continue
            for fieldname, col in tr.node.items():
                if not fieldname.startswith("vE."):
                    continue
                for a, b in zip(walk, walk[1:]):
                    if col.get(a) != col.get(b):
                        sink.fail(b, "sp.replica")

    def _seh_values(self, g: Graph, tr: Transcript, subs):
        """Claimed host nonce per single-edge ear."""
        out = {}
        for eid, flag in tr.edge.get("sp.se", {}).items():
            if flag != 1:
                continue
            host, prefix = se_storage(g, tr, eid)
            out[eid] = tr.node.get(prefix + "seh", {}).get(host)
        return out


# ---------------------------------------------------------------------------
# treewidth <= 2


class TW2Honest(Prover):
    is_honest = True

    def __init__(self, inst: Instance, c: int = 3,
                 nest_claims_factory=None, lr_claims_factory=None):
        from .oracles import biconnected_components

        g = inst.graph
        self.g = g
        self.c = c
        self.pc = PrimeContext.for_size(g.n, c)
        bct = inst.witness.block_cut
        comp_decs = None
        if bct is not None and "component_ears" in inst.witness.extra:
            comp_decs = [
                EarDecomposition([list(e) for e in d["ears"]],
                                 [None if p < 0 else p for p in d["parents"]])
                for d in inst.witness.extra["component_ears"]
            ]
        if bct is None:
            bct = biconnected_components(g)
        if comp_decs is None:
            comp_decs = []
            for idx, comp in enumerate(bct.components):
                sub = _induced_graph(g, comp)
                sep = bct.separating_node[idx]
                first = None
                if sep is not None:
                    si = comp.index(sep)
                    nbr = next(i for i in range(len(comp))
                               if sub.has_edge(si, i))
                    first = (si, nbr)
                dec = nested_ear_decomposition(sub, first_ear=first) \
                    if first else nested_ear_decomposition(sub)
                comp_decs.append(EarDecomposition(
                    [[comp[v] for v in e] for e in dec.ears],
                    list(dec.nesting_parent)))
        self.bct = bct
        # normalize: separators sit at the tail of every ear they touch,
        # and the first ear of a non-root component is the (sep, leader)
        # edge reversed to (leader, sep)
        seps = {s for s in bct.separating_node if s is not None}
        global_ears: list[list[int]] = []
        global_parents: list[Optional[int]] = []
        self.lead_of: dict[int, int] = {}
        self.home_comp: dict[int, int] = {}
        for idx, dec in enumerate(comp_decs):
            sep = bct.separating_node[idx]
            off = len(global_ears)
            for j, ear in enumerate(dec.ears):
                e = list(ear)
                if sep is not None and e[0] == sep:
                    e = list(reversed(e))
                global_ears.append(e)
                global_parents.append(None if dec.nesting_parent[j] is None
                                      else dec.nesting_parent[j] + off)
            first = dec.ears[0]
            if sep is not None:
                leader = first[0] if first[0] != sep else first[1]
                self.lead_of[leader] = idx
            else:
                self.lead_of[global_ears[off][0]] = idx
            members = set(c for c in bct.components[idx]) - {sep}
            for v in members:
                self.home_comp[v] = idx
        gdec = EarDecomposition(global_ears, global_parents)
        ear_exclude: dict[int, set[int]] = {}
        pos = 0
        for idx, dec in enumerate(comp_decs):
            sep = bct.separating_node[idx]
            for j in range(len(dec.ears)):
                if sep is not None:
                    ear_exclude[pos + j] = {sep}
            pos += len(dec.ears)
        self.st = SPStructure(g, gdec, ear_exclude=ear_exclude)
        # global spanning tree: sub-ear paths plus link edges
        parent = self.st.f_parents()
        self.ce_nodes: set[int] = set()
        for j in range(self.st.n_ears):
            sub = self.st.subears[j]
            if not sub:
                continue
            if j in self.st.first_ears:
                excl = self.st.ear_exclude.get(j, set()) & set(gdec.ears[j])
                if excl:
                    parent[sub[0]] = next(iter(excl))  # leader -> separator
            else:
                parent[sub[0]] = gdec.ears[j][0]
                self.ce_nodes.add(sub[0])
        self.parent_map = parent
        self.cut = set(bct.cut_nodes)
        self.depth3 = {}
        depth = _component_depths(bct)
        for v, idx in self.home_comp.items():
            self.depth3[v] = depth[idx] % 3
        self.f_advice = tree_advice_encode(g, parent)
        self.forests = forest_decomposition(g)
        self.hosting = edge_label_embedding(g, self.forests).slot_of
        self.forest_advice = [
            tree_advice_encode(g, {v: f.get(v) for v in range(g.n)})
            for f in self.forests
        ]
        from .st_verify import STFragment
        from .outerplanar import nonce_bits

        self.nonce_bits = nonce_bits(g.n)
        self.stfrag = STFragment(g, "stref.", "reference",
                                 reps=self.nonce_bits, family="oc.st")
        self.bits_d = max(1, (g.n - 1).bit_length())
        self.bits_p = max(1, (self.pc.p - 1).bit_length())
        self.runs = None
        self.nest_claims_factory = nest_claims_factory
        self.lr_claims_factory = lr_claims_factory

    def _ensure_runs(self, tr):
        if self.runs is None:
            self.runs = build_ear_runs(self.g, self.st, self.hosting, self.pc,
                                       self.c, self.nest_claims_factory,
                                       self.lr_claims_factory, tr=tr)

    def emit(self, rnd: int, inst: Instance, tr: Transcript) -> None:
        g, st = self.g, self.st
        if rnd == 0:
            emit_advice(tr, rnd, "fc.", self.f_advice)
            for k, adv in enumerate(self.forest_advice):
                emit_advice(tr, rnd, f"eh{k}.", adv)
            self.stfrag.emit_labels(tr, rnd, self.parent_map)
            for v in range(g.n):
                tr.set_node(rnd, v, "oc.cut", 1 if v in self.cut else 0, 1)
                tr.set_node(rnd, v, "oc.lead", 1 if v in self.lead_of else 0, 1)
                tr.set_node(rnd, v, "oc.d", self.depth3.get(v, 0), 2)
                tr.set_node(rnd, v, "tw.ce", 1 if v in self.ce_nodes else 0, 1)
            for j, sub in enumerate(st.subears):
                p1 = j in st.first_ears
                for depth, v in enumerate(sub):
                    tr.set_node(rnd, v, "sp.p1", 1 if p1 else 0, 1)
                    tr.set_node(rnd, v, "strefq.d", depth, self.bits_d)
            for j, pair in enumerate(st.conn):
                if pair is None:
                    continue
                le, re = pair
                sub = st.subears[j]
                for eid, mark, snode in ((le, 1, sub[0]), (re, 2, sub[-1])):
                    u, w = g.edges[eid]
                    fieldname = "sp.cA" if u == snode else "sp.cB"
                    tr.set_edge(rnd, eid, fieldname, mark, 2)
            for j, eid in st.se_edge.items():
                tr.set_edge(rnd, eid, "sp.se", 1, 1)
            self._ensure_runs(tr)
        elif rnd == 2:
            scoins = tr.coins.get("oc.s#", {})
            for v in range(g.n):
                idx = self.home_comp.get(v)
                if idx is None:
                    continue
                sep = self.bct.separating_node[idx]
                leader = next(l for l, k in self.lead_of.items() if k == idx)
                sep_val = scoins.get(sep, 0) if sep is not None else 0
                tr.set_node(rnd, v, "oc.sep", sep_val, self.nonce_bits)
                tr.set_node(rnd, v, "oc.lead2", scoins.get(leader, 0), self.nonce_bits)
            coins = tr.coins.get(NONCE_FIELD, {})
            nonce = [coins.get(sub[0], 0) if sub else 0 for sub in st.subears]
            for j, sub in enumerate(st.subears):
                if j in st.first_ears:
                    pred = 0
                else:
                    pred = nonce[st.host_of.get(j, 0)]
                for v in sub:
                    tr.set_node(rnd, v, "sp.ear", nonce[j], self.bits_p)
                    tr.set_node(rnd, v, "sp.pred", pred, self.bits_p)
            for j, eid in st.se_edge.items():
                host = st.host_of.get(j)
                run = self.runs[host] if host is not None else None
                if run is not None and j in run["arc_of_hosted"]:
                    run["space"].set_a(tr, rnd, run["arc_of_hosted"][j], "seh",
                                       nonce[host], self.bits_p)
        if self.runs:
            for run in self.runs:
                if run is None:
                    continue
                if rnd == 0:
                    run["nest"].emit_round1(tr, rnd)
                    run["lr"].emit_round1(tr, rnd)
                elif rnd == 2:
                    run["nest"].emit_round3(tr, rnd)
                    run["lr"].emit_round3(tr, rnd)
                elif rnd == 4:
                    run["lr"].emit_round5(tr, rnd)


def _induced_graph(g: Graph, comp: list[int]) -> Graph:
    relabel = {v: i for i, v in enumerate(comp)}
    return Graph(len(comp), [(relabel[u], relabel[w]) for u, w in g.edges
                             if u in relabel and w in relabel])


def _component_depths(bct) -> dict[int, int]:
    depth = {bct.root_component: 0}
    member_home: dict[int, int] = {}
    for idx, comp in enumerate(bct.components):
        sep = bct.separating_node[idx]
        for v in comp:
            if v != sep:
                member_home[v] = idx
    changed = True
    while changed:
        changed = False
        for idx in range(len(bct.components)):
            if idx in depth:
                continue
            sep = bct.separating_node[idx]
            home = member_home.get(sep) if sep is not None else None
            if sep is None:
                depth[idx] = 0
                changed = True
            elif home in depth:
                depth[idx] = depth[home] + 1
                changed = True
    return depth


class TreeWidth2Protocol(SeriesParallelProtocol):
    name = "treewidth2"
    check_families = SP_CHECKS + ("oc.isolate", "oc.dist")

    def make_honest(self, inst: Instance) -> Prover:
        return TW2Honest(inst, self.c)

    def draw_coins(self, inst: Instance, rnd: int, tr: Transcript) -> None:
        from .outerplanar import nonce_bits

        g = inst.graph
        subs, parents, children = assemble_claimed_structure(g, tr, None,
                                                             linked=True)
        if rnd == 1:
            cut_col = tr.node.get("oc.cut", {})
            lead_col = tr.node.get("oc.lead", {})
            for v in range(g.n):
                if cut_col.get(v) == 1 or lead_col.get(v) == 1:
                    tr.draw_coin(rnd, v, "oc.s#", 1 << nonce_bits(g.n))
            draw_sp_coins(g, tr, rnd, [s["walk"][0] for s in subs])
        pc = PrimeContext.for_size(g.n, self.c)
        for run in self._claimed_runs(g, tr, subs, None, pc, parents):
            if run is None:
                continue
            run["nest"].draw_coins(tr, rnd)
            run["lr"].draw_coins(tr, rnd)

    def decide(self, inst: Instance, tr: Transcript, sink: CheckSink) -> None:
        from .outerplanar import decide_stage1, nonce_bits
        from .st_verify import STFragment

        g = inst.graph
        subs, parents, children = assemble_claimed_structure(g, tr, sink,
                                                             linked=True)
        decide_stage1(g, tr, sink)
        st = STFragment(g, "stref.", "reference", reps=nonce_bits(g.n),
                        family="oc.st")
        st.decide(tr, sink, parents, children)
        self._decide_sp_stage(g, tr, sink, subs, parents, children)
        hosting = decode_hosting(tr, g, MAX_SLOTS)
        pc = PrimeContext.for_size(g.n, self.c)
        for run in self._claimed_runs(g, tr, subs, hosting, pc, parents):
            if run is None:
                continue
            eval_node, arc_eval = run_eval_fns(run["space"])
            run["lr"].decide(tr, sink, eval_node, arc_eval)
            run["nest"].decide(tr, sink, eval_node)


def register_all(register, po_claims_for) -> None:
    from .adversaries import FlipBitsProver, RandomLabelProver, StrategyError, parse_spec
    from .nesting import name_bits as nb

    def sp_adv(inst, strategy, c):
        name, param = parse_spec(strategy)
        if name == "random-labels":
            return RandomLabelProver(SPHonest(inst, c), salt=strategy)
        if name == "flip-k-bits":
            return FlipBitsProver(SPHonest(inst, c), int(param or 3), salt=strategy)
        probe = SPHonest(inst, c)
        nc = po_claims_for(strategy, nb(probe.pc, c))
        if nc is not None:
            return SPHonest(inst, c, nest_claims_factory=lambda j: nc)
        raise StrategyError(f"{name!r} not applicable")

    def tw_adv(inst, strategy, c):
        name, param = parse_spec(strategy)
        if name == "random-labels":
            return RandomLabelProver(TW2Honest(inst, c), salt=strategy)
        if name == "flip-k-bits":
            return FlipBitsProver(TW2Honest(inst, c), int(param or 3), salt=strategy)
        probe = TW2Honest(inst, c)
        nc = po_claims_for(strategy, nb(probe.pc, c))
        if nc is not None:
            return TW2Honest(inst, c, nest_claims_factory=lambda j: nc)
        raise StrategyError(f"{name!r} not applicable")

    register("series-parallel", SeriesParallelProtocol, sp_adv)
    register("treewidth2", TreeWidth2Protocol, tw_adv)
