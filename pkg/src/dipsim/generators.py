"""Certified instance generators.

All generators are pure functions of (parameters, seed). Yes-instances come
with the witness structures the honest prover consumes (Hamiltonian paths,
rotations, ear decompositions, block-cut trees); no-instances are built by
controlled damage so tests know exactly what is broken.
"""

from __future__ import annotations

import random
from typing import Optional

from .graphs import (
    BlockCutTree,
    EarDecomposition,
    Graph,
    GraphError,
    Instance,
    Witness,
    edge_key,
)
from .oracles import biconnected_components, validate_ear_decomposition


class GenerationError(ValueError):
    pass


def _rng(seed: int, *salt) -> random.Random:
    return random.Random((seed, *salt).__repr__())


# ---------------------------------------------------------------------------
# nested arc machinery (shared by path-outerplanar / outerplanar generators)


def _full_nested_arcs(length: int, rng: random.Random) -> list[tuple[int, int]]:
    """A maximal properly-nested arc set over positions 0..length-1
    (a random polygon triangulation, length-2 arcs of span >= 2)."""
    arcs: list[tuple[int, int]] = []
    stack = [(0, length - 1)]
    while stack:
        lo, hi = stack.pop()
        if hi - lo < 2:
            continue
        arcs.append((lo, hi))
        mid = rng.randint(lo + 1, hi - 1)
        stack.append((lo, mid))
        stack.append((mid, hi))
    return arcs


def sample_nested_arcs(length: int, count: int, rng: random.Random,
                       forbid: Optional[set[tuple[int, int]]] = None) -> list[tuple[int, int]]:
    pool = [a for a in _full_nested_arcs(length, rng) if not forbid or a not in forbid]
    if count > len(pool):
        raise GenerationError(
            f"requested {count} nested arcs; at most {len(pool)} fit on {length} positions"
        )
    return sorted(rng.sample(pool, count))


def gen_path_outerplanar(n: int, extra_edges: int, seed: int) -> Instance:
    """Hamiltonian path 0..n-1 plus properly nested extra edges."""
    if n < 2:
        raise GenerationError("n >= 2 required")
    if extra_edges > max(0, n - 2):
        raise GenerationError(f"at most {n - 2} nested extra edges fit on {n} nodes")
    rng = _rng(seed, "path-outerplanar", n, extra_edges)
    arcs = sample_nested_arcs(n, extra_edges, rng)
    edges = [(i, i + 1) for i in range(n - 1)] + arcs
    g = Graph(n, edges)
    return Instance(g, Witness(ham_path=list(range(n))))


def gen_path_outerplanar_no(n: int, extra_edges: int, seed: int) -> Instance:
    """Path instance that is not path-outerplanar under any ordering.

    Plants a K4 on four consecutive path nodes (two crossing chords plus
    their cover); K4 subgraphs rule out outerplanarity entirely, while the
    identity path stays available as a best-effort witness for adversaries.
    """
    if n < 6:
        raise GenerationError("n >= 6 required")
    rng = _rng(seed, "path-outerplanar-no", n, extra_edges)
    base = gen_path_outerplanar(n, max(0, extra_edges - 3), seed)
    g = base.graph
    for _ in range(500):
        i = rng.randrange(0, n - 3)
        chords = [(i, i + 2), (i + 1, i + 3), (i, i + 3)]
        if any(g.has_edge(a, b) for a, b in chords):
            continue
        g2 = g.copy()
        for a, b in chords:
            g2.add_edge(a, b)
        w = Witness(ham_path=list(range(n)))
        w.extra["crossing"] = [[i, i + 2], [i + 1, i + 3]]
        w.extra["k4_at"] = i
        return Instance(g2, w)
    raise GenerationError("failed to place the K4 gadget")


# ---------------------------------------------------------------------------
# LR-sorting instances (directed path + comparable edges)


def gen_lr_instance(n: int, extra_edges: int, seed: int, reversed_edges: int = 0) -> Instance:
    """Directed Hamiltonian path 0->1->..->n-1 plus forward edges.

    ``reversed_edges`` > 0 flips that many extra edges, producing a
    no-instance (a cycle with the path).
    """
    if n < 2:
        raise GenerationError("n >= 2 required")
    rng = _rng(seed, "lr", n, extra_edges, reversed_edges)
    pairs: set[tuple[int, int]] = set()
    guard = 0
    while len(pairs) < extra_edges:
        u = rng.randrange(0, n - 2)
        v = rng.randrange(u + 2, n)
        pairs.add((u, v))
        guard += 1
        if guard > 50 * max(extra_edges, 1) + 100:
            raise GenerationError("could not place the requested extra edges")
    ordered = sorted(pairs)
    flipped = set()
    if reversed_edges:
        if reversed_edges > len(ordered):
            raise GenerationError("more reversals than extra edges")
        flipped = set(rng.sample(range(len(ordered)), reversed_edges))
    edges = [(i, i + 1) for i in range(n - 1)]
    bad = []
    for idx, (u, v) in enumerate(ordered):
        if idx in flipped:
            edges.append((v, u))
            bad.append([v, u])
        else:
            edges.append((u, v))
    g = Graph(n, edges, directed=True)
    w = Witness(ham_path=list(range(n)))
    if bad:
        w.extra["reversed"] = bad
    return Instance(g, w)


def gen_lr_targeted(n: int, seed: int, kind: str) -> Instance:
    """LR no-instance with one reversed edge placed for a specific attack.

    kinds: "inner" (reversed edge inside one block, other traffic kept
    away), "cross-adjacent" (reversed edge between adjacent blocks, with
    room to shift positions down), "inner-claim" (cross-block, indices
    compatible with an inner-block lie), "wrong-index" (blocks sharing a
    1-bit before their distinguishing index), "forge-phi" (head block has
    a 1-bit where the tail block has 0, beyond the first index).
    """
    from .primitives import ceil_log2

    B = max(2, ceil_log2(max(2, n)))
    nb = max(1, n // B)
    if nb < 5:
        raise GenerationError("instance too small for targeted LR cells")
    rng = _rng(seed, "lr-target", n, kind)

    def pos(b: int, idx: int) -> int:
        return b * B + (idx - 1)

    if kind == "inner":
        b = nb // 2
        head, tail = pos(b, 2), pos(b, min(B, 4))
        quiet = {b}
    elif kind == "cross-adjacent":
        bh, bt = 2, 3
        head, tail = pos(bh, 2), pos(bt, 2)
        quiet = set()
    elif kind == "inner-claim":
        bh, bt = 2, 4
        head, tail = pos(bh, min(B, 5)), pos(bt, 2)
        quiet = set()
    elif kind == "wrong-index":
        bh, bt = 2, 3  # 0b10 vs 0b11: shared 1-bit right before they diverge
        head, tail = pos(bh, 2), pos(bt, 2)
        quiet = set()
    elif kind == "forge-phi":
        bh, bt = 1, 2  # 0..01 vs 0..10: head has a 1 where tail has 0
        head, tail = pos(bh, 2), pos(bt, 2)
        quiet = set()
    else:
        raise GenerationError(f"unknown targeted kind {kind!r}")

    edges = [(i, i + 1) for i in range(n - 1)]
    used = {(min(tail, head), max(tail, head))}
    extra = []
    want = max(4, n // 8)
    guard = 0
    while len(extra) < want and guard < 50 * want:
        guard += 1
        u = rng.randrange(0, n - 2)
        v = rng.randrange(u + 2, n)
        if (u, v) in used:
            continue
        if (u // B) in quiet or (v // B) in quiet:
            continue
        used.add((u, v))
        extra.append((u, v))
    edges += extra
    edges.append((tail, head))  # the reversed edge
    g = Graph(n, edges, directed=True)
    w = Witness(ham_path=list(range(n)))
    w.extra["reversed"] = [[tail, head]]
    w.extra["kind"] = kind
    return Instance(g, w)


# ---------------------------------------------------------------------------
# outerplanar family


def gen_biconnected_outerplanar(n: int, chords: int, seed: int) -> Instance:
    """Hamiltonian cycle 0..n-1 with properly nested chords."""
    if n < 3:
        raise GenerationError("n >= 3 required")
    if chords > max(0, n - 3):
        raise GenerationError(f"at most {n - 3} chords fit in a cycle of {n}")
    rng = _rng(seed, "bi-outerplanar", n, chords)
    arcs = sample_nested_arcs(n, chords, rng, forbid={(0, n - 1)})
    edges = [(i, i + 1) for i in range(n - 1)] + [(0, n - 1)] + arcs
    g = Graph(n, edges)
    w = Witness(ham_path=list(range(n)))
    w.extra["cycle"] = list(range(n))
    return Instance(g, w)


def gen_outerplanar(n: int, seed: int, avg_component: int = 9) -> Instance:
    """Tree of biconnected outerplanar components glued at cut nodes."""
    if n < 2:
        raise GenerationError("n >= 2 required")
    rng = _rng(seed, "outerplanar", n, avg_component)
    edges: list[tuple[int, int]] = []
    comp_records: list[list[int]] = []  # Hamiltonian path per component, sep first
    used = 1  # node 0 exists
    attach_pool = [0]
    while used < n:
        room = n - used
        if room == 1 or (room < 4 and rng.random() < 0.7):
            size = room + 1  # component reusing the anchor node
        else:
            size = min(room + 1, max(2, int(rng.gauss(avg_component, 3))))
        size = max(2, min(size, room + 1))
        anchor = rng.choice(attach_pool)
        fresh = list(range(used, used + size - 1))
        used += size - 1
        nodes = [anchor] + fresh
        if size == 2:
            edges.append((anchor, fresh[0]))
            comp_records.append([anchor, fresh[0]])
        else:
            ring = nodes[:]  # anchor sits at position 0 of the cycle
            for i in range(size - 1):
                edges.append((ring[i], ring[i + 1]))
            edges.append((ring[0], ring[-1]))
            n_ch = rng.randint(0, max(0, size - 3))
            if n_ch:
                for a, b in sample_nested_arcs(size, n_ch, rng, forbid={(0, size - 1)}):
                    edges.append((ring[a], ring[b]))
            comp_records.append(ring)
        attach_pool.extend(fresh)
    g = Graph(n, edges)
    bct = biconnected_components(g)
    w = Witness(block_cut=bct)
    w.extra["component_paths"] = _align_component_paths(bct, comp_records)
    return Instance(g, w)


def _align_component_paths(bct: BlockCutTree, records: list[list[int]]) -> list[list[int]]:
    """Reorder per-component Hamiltonian paths to the block-cut indexing,
    rotated so the separating node (when any) comes first."""
    by_set = {frozenset(r): r for r in records}
    out = []
    for idx, comp in enumerate(bct.components):
        rec = by_set.get(frozenset(comp))
        if rec is None:
            raise GenerationError("component bookkeeping out of sync")
        sep = bct.separating_node[idx]
        ring = rec[:]
        if len(ring) > 2:
            if sep is not None:
                k = ring.index(sep)
                ring = ring[k:] + ring[:k]
            # ring is a Hamiltonian cycle order; as a path: drop the closing edge
        elif sep is not None and ring[0] != sep:
            ring = list(reversed(ring))
        out.append(ring)
    return out


def gen_outerplanar_no(n: int, seed: int, kind: str = "k4") -> Instance:
    """Outerplanar skeleton with one poisoned K4 component.

    Carries best-effort witness structures (block-cut tree plus component
    rings, the K4 ring included) so adversaries can label without oracle
    searches.
    """
    base = gen_outerplanar(max(n - 3, 2), seed)
    g = base.graph
    rng = _rng(seed, "outerplanar-no", n, kind)
    anchor = rng.randrange(g.n)
    start = g.n
    g2 = Graph(g.n + 3, list(g.edges))
    quad = [anchor, start, start + 1, start + 2]
    for i in range(4):
        for j in range(i + 1, 4):
            if not g2.has_edge(quad[i], quad[j]):
                g2.add_edge(quad[i], quad[j])
    bct = biconnected_components(g2)
    records = [list(r) for r in base.witness.extra["component_paths"]] + [quad]
    w = Witness(block_cut=bct)
    w.extra["component_paths"] = _align_component_paths(bct, records)
    w.extra["poison"] = "k4"
    return Instance(g2, w)


# ---------------------------------------------------------------------------
# planar family (embedded growth with explicit rotations)


def gen_planar_embedded(n: int, seed: int, max_degree: int = 0,
                        subdivide_frac: float = 0.25, pendant_frac: float = 0.15) -> Instance:
    """Random planar graph grown with an explicit rotation system.

    Stacked triangle insertions first, then edge subdivisions and pendant
    nodes. ``max_degree`` (0 = unbounded) steers face choices away from
    high-degree corners.
    """
    if n < 3:
        raise GenerationError("n >= 3 required")
    rng = _rng(seed, "planar", n, max_degree, subdivide_frac, pendant_frac)
    rot: list[list[int]] = [[1, 2], [2, 0], [0, 1]]
    edges: list[tuple[int, int]] = [(0, 1), (1, 2), (2, 0)]
    faces: list[tuple[int, int, int]] = [(0, 1, 2), (0, 2, 1)]

    budget = n - 3
    n_sub = int(budget * subdivide_frac)
    n_pend = int(budget * pendant_frac)
    n_tri = budget - n_sub - n_pend

    def deg(v: int) -> int:
        return len(rot[v])

    for _ in range(n_tri):
        w = len(rot)
        face_idx = rng.randrange(len(faces))
        if max_degree:
            for _attempt in range(30):
                if all(deg(x) < max_degree for x in faces[face_idx]):
                    break
                face_idx = rng.randrange(len(faces))
        x, y, z = faces[face_idx]
        rot.append([x, z, y])
        # in face (x,y,z), corner x sits between edges (x,y) and (x,z)
        rot[x].insert(rot[x].index(y), w)
        rot[y].insert(rot[y].index(z), w)
        rot[z].insert(rot[z].index(x), w)
        edges += [(x, w), (y, w), (z, w)]
        faces[face_idx] = (x, y, w)
        faces.append((y, z, w))
        faces.append((z, x, w))

    for _ in range(n_sub):
        k = rng.randrange(len(edges))
        u, v = edges[k]
        w = len(rot)
        rot.append([u, v])
        rot[u][rot[u].index(v)] = w
        rot[v][rot[v].index(u)] = w
        edges[k] = (u, w)
        edges.append((w, v))
        faces = []  # faces no longer tracked once subdividing starts

    for _ in range(n_pend):
        u = rng.randrange(len(rot))
        w = len(rot)
        rot.append([u])
        rot[u].insert(rng.randrange(len(rot[u]) + 1), w)
        edges.append((u, w))

    g = Graph(len(rot), edges)
    return Instance(g, Witness(rotation=[list(r) for r in rot]))


def scramble_rotation(inst: Instance, seed: int, swaps: int = 1) -> Instance:
    """Copy an embedded instance and swap rotation entries at a node of
    degree >= 4 so the claimed embedding has a crossing."""
    rng = _rng(seed, "scramble")
    rot = [list(r) for r in inst.witness.rotation]
    cands = [v for v in range(len(rot)) if len(rot[v]) >= 4]
    if not cands:
        raise GenerationError("no node of degree >= 4 to scramble")
    done = 0
    guard = 0
    while done < swaps and guard < 100:
        guard += 1
        v = rng.choice(cands)
        i = rng.randrange(len(rot[v]))
        j = (i + 1) % len(rot[v])
        rot[v][i], rot[v][j] = rot[v][j], rot[v][i]
        done += 1
    w = Witness(rotation=rot)
    w.extra = dict(inst.witness.extra)
    w.extra["scrambled"] = True
    return Instance(inst.graph.copy(), w)


def gen_nonplanar_minor(kind: str, subdivision: int, seed: int = 0) -> Instance:
    """K5 or K3,3 with every edge subdivided ``subdivision`` times."""
    if subdivision < 0:
        raise GenerationError("subdivision >= 0 required")
    if kind.lower() in ("k5", "k_5"):
        base_n, base_edges = 5, [(i, j) for i in range(5) for j in range(i + 1, 5)]
    elif kind.lower() in ("k33", "k_33", "k3,3"):
        base_n, base_edges = 6, [(i, 3 + j) for i in range(3) for j in range(3)]
    else:
        raise GenerationError(f"unknown minor kind {kind!r}")
    edges: list[tuple[int, int]] = []
    nxt = base_n
    for u, v in base_edges:
        chain = [u] + list(range(nxt, nxt + subdivision)) + [v]
        nxt += subdivision
        edges += list(zip(chain, chain[1:]))
    g = Graph(nxt, edges)
    w = Witness()
    w.extra["minor"] = kind.lower()
    return Instance(g, w)


# ---------------------------------------------------------------------------
# series-parallel family


class _SPNode:
    __slots__ = ("kind", "children")

    def __init__(self, kind: str, children=None):
        self.kind = kind  # "e" | "s" | "p"
        self.children = children or []


def _random_sp_tree(rng: random.Random, depth: int, force_parallel_root: bool,
                    with_root_edge: bool) -> _SPNode:
    def series(d: int) -> _SPNode:
        k = rng.randint(2, 3)
        return _SPNode("s", [branch(d) for _ in range(k)])

    def branch(d: int) -> _SPNode:
        if d <= 0 or rng.random() < 0.45:
            return _SPNode("e")
        if rng.random() < 0.5:
            return series(d - 1)
        return parallel(d - 1)

    def parallel(d: int) -> _SPNode:
        k = rng.randint(2, 3)
        kids = [series(d - 1) if d > 0 else _SPNode("s", [_SPNode("e"), _SPNode("e")])
                for _ in range(k)]
        if rng.random() < 0.5:
            kids[0] = _SPNode("e")  # at most one bare edge keeps the graph simple
        return _SPNode("p", kids)

    if force_parallel_root:
        root = parallel(depth)
        if with_root_edge and root.children[0].kind != "e":
            root.children.insert(0, _SPNode("e"))
        return root
    return series(depth) if rng.random() < 0.5 else parallel(depth)


class _Realizer:
    """Builds the graph and the nested ear decomposition from an SP tree."""

    def __init__(self):
        self.edges: list[tuple[int, int]] = []
        self.n = 0
        self.records: list[dict] = []  # {"path": [...], "host": record or None}

    def new_node(self) -> int:
        self.n += 1
        return self.n - 1

    def realize(self, node: _SPNode, s: int, t: int, record: dict) -> None:
        """Extend record["path"] (which currently ends at s) up to t."""
        if node.kind == "e":
            self.edges.append((s, t))
            record["path"].append(t)
            return
        if node.kind == "s":
            cur = s
            for i, child in enumerate(node.children):
                nxt = t if i == len(node.children) - 1 else self.new_node()
                self.realize(child, cur, nxt, record)
                cur = nxt
            return
        # parallel: first branch continues the current record; the rest
        # become ears attached at (s, t) hosted by the current record
        self.realize(node.children[0], s, t, record)
        for child in node.children[1:]:
            ear = {"path": [s], "host": record}
            self.records.append(ear)
            self.realize(child, s, t, ear)

    def build(self, tree: _SPNode) -> tuple[Graph, EarDecomposition]:
        s, t = self.new_node(), self.new_node()
        first = {"path": [s], "host": None}
        self.records.append(first)
        # realize walks depth-first; ear records are appended while their
        # host record is still being built, so hosts precede their ears
        self.realize(tree, s, t, first)
        order = {id(r): i for i, r in enumerate(self.records)}
        ears = [list(r["path"]) for r in self.records]
        parents = [None if r["host"] is None else order[id(r["host"])] for r in self.records]
        return Graph(self.n, self.edges), EarDecomposition(ears, parents)


def _subdivide_into(g: Graph, dec: EarDecomposition, extra: int, rng: random.Random,
                    protect_first: bool = False):
    """Grow to the exact node budget by subdividing random ear edges."""
    eidx = {}
    edges = list(g.edges)
    for i, (u, v) in enumerate(edges):
        eidx[(u, v)] = i
        eidx[(v, u)] = i
    ears = [list(e) for e in dec.ears]
    n = g.n
    lo = 1 if protect_first and len(ears) > 1 else 0
    for _ in range(extra):
        j = rng.randrange(lo, len(ears))
        ear = ears[j]
        k = rng.randrange(len(ear) - 1)
        u, v = ear[k], ear[k + 1]
        w = n
        n += 1
        i = eidx.pop((u, v))
        eidx.pop((v, u))
        edges[i] = (u, w)
        eidx[(u, w)] = i
        eidx[(w, u)] = i
        eidx[(w, v)] = len(edges)
        eidx[(v, w)] = len(edges)
        edges.append((w, v))
        ear.insert(k + 1, w)
    return Graph(n, edges), EarDecomposition(ears, list(dec.nesting_parent))


def gen_series_parallel(n: int, seed: int, biconnected: bool = False,
                        with_root_edge: bool = False) -> Instance:
    """Random series-parallel graph with a nested ear decomposition witness."""
    if n < 2:
        raise GenerationError("n >= 2 required")
    rng = _rng(seed, "sp", n, biconnected, with_root_edge)
    if n == 2:
        g = Graph(2, [(0, 1)])
        return Instance(g, Witness(ear_decomposition=EarDecomposition([[0, 1]], [None])))
    depth = 1
    g, dec = None, None
    for attempt in range(200):
        depth = 1 + (attempt % 5)
        tree = _random_sp_tree(_rng(seed, "sp-tree", n, attempt), depth,
                               biconnected, with_root_edge)
        r = _Realizer()
        cand_g, cand_dec = r.build(tree)
        if cand_g.n <= n and (not biconnected or cand_g.n >= 3):
            g, dec = cand_g, cand_dec
            if n - cand_g.n <= max(4, n // 2):
                break
    if g is None:
        raise GenerationError("series-parallel construction failed")
    if g.n < n:
        g, dec = _subdivide_into(g, dec, n - g.n, rng,
                                 protect_first=biconnected and with_root_edge)
    validate_ear_decomposition(g, dec)
    return Instance(g, Witness(ear_decomposition=dec))


def gen_treewidth2(n: int, seed: int, avg_component: int = 10) -> Instance:
    """Tree of biconnected series-parallel components glued at cut nodes.

    Each component carries a nested ear decomposition whose first ear is the
    edge (separating node, leader).
    """
    if n < 2:
        raise GenerationError("n >= 2 required")
    rng = _rng(seed, "tw2", n, avg_component)
    edges: list[tuple[int, int]] = []
    comp_decs: list[tuple[list[int], EarDecomposition]] = []
    used = 1
    attach_pool = [0]
    while used < n:
        room = n - used
        if room == 1 or (room < 5 and rng.random() < 0.6):
            size = min(room + 1, 2)
        else:
            size = min(room + 1, max(4, int(rng.gauss(avg_component, 3))))
        anchor = rng.choice(attach_pool)
        if size == 2:
            fresh = [used]
            used += 1
            edges.append((anchor, fresh[0]))
            dec = EarDecomposition([[anchor, fresh[0]]], [None])
            comp_decs.append(([anchor] + fresh, dec))
            attach_pool.extend(fresh)
            continue
        sub = gen_series_parallel(size, rng.randrange(1 << 30), biconnected=True,
                                  with_root_edge=True)
        relabel = {0: anchor}
        fresh = []
        for v in range(1, sub.graph.n):
            relabel[v] = used
            fresh.append(used)
            used += 1
        for u, v in sub.graph.edges:
            edges.append((relabel[u], relabel[v]))
        dec = sub.witness.ear_decomposition
        rel_dec = EarDecomposition(
            [[relabel[v] for v in e] for e in dec.ears], list(dec.nesting_parent)
        )
        comp_decs.append(([relabel[v] for v in range(sub.graph.n)], rel_dec))
        attach_pool.extend(fresh)
    g = Graph(used, edges)
    bct = biconnected_components(g)
    w = Witness(block_cut=bct)
    by_set = {frozenset(nodes): dec for nodes, dec in comp_decs}
    decs = []
    for idx, comp in enumerate(bct.components):
        dec = by_set.get(frozenset(comp))
        if dec is None:
            raise GenerationError("tw2 component bookkeeping out of sync")
        decs.append(dec)
    w.extra["component_ears"] = [
        {"ears": d.ears, "parents": [-1 if p is None else p for p in d.nesting_parent]}
        for d in decs
    ]
    return Instance(g, w)


def gen_treewidth2_no(n: int, seed: int) -> Instance:
    """Treewidth-2 skeleton with one K4 component (treewidth 3).

    Ships best-effort ear claims for the K4 block (the cross pair has no
    common host, which is exactly what the protocol must catch)."""
    base = gen_treewidth2(max(n - 3, 2), seed)
    g = base.graph
    rng = _rng(seed, "tw2-no", n)
    anchor = rng.randrange(g.n)
    start = g.n
    g2 = Graph(g.n + 3, list(g.edges))
    a, s, s1, s2 = anchor, start, start + 1, start + 2
    for i in (s, s1, s2):
        g2.add_edge(a, i)
    g2.add_edge(s, s1)
    g2.add_edge(s, s2)
    g2.add_edge(s1, s2)
    bct = biconnected_components(g2)
    pseudo = {
        "ears": [[a, s], [a, s1, s], [a, s2, s], [s1, s2]],
        "parents": [-1, 0, 0, 1],
    }
    decs = []
    k4set = frozenset((a, s, s1, s2))
    base_by_set = {}
    for idx, comp in enumerate(base.witness.block_cut.components):
        d = base.witness.extra["component_ears"][idx]
        base_by_set[frozenset(comp)] = d
    for idx, comp in enumerate(bct.components):
        key = frozenset(comp)
        if key == k4set:
            decs.append(pseudo)
        else:
            decs.append(base_by_set[key])
    w = Witness(block_cut=bct)
    w.extra["component_ears"] = decs
    w.extra["poison"] = "k4"
    return Instance(g2, w)
