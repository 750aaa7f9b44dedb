"""Planarity with embeddings: rotation systems, face counting, and a
Demoucron-style embedder used as the desk-scale oracle.

A rotation system lists each node's neighbors in clockwise order. Validity
is checked through the Euler characteristic: tracing faces of a connected
graph must give V - E + F = 2.
"""

from __future__ import annotations

from typing import Optional

from .graphs import Graph
from .oracles import OracleError, biconnected_components, is_planar_verdict


def count_faces(g: Graph, rotation: list[list[int]]) -> int:
    """Number of face orbits of the embedding given by ``rotation``."""
    nxt_idx: list[dict[int, int]] = []
    for v in range(g.n):
        order = rotation[v]
        nxt_idx.append({u: i for i, u in enumerate(order)})
    darts = set()
    for u, v in g.edges:
        darts.add((u, v))
        darts.add((v, u))
    faces = 0
    while darts:
        u, v = next(iter(darts))
        start = (u, v)
        faces += 1
        while True:
            darts.discard((u, v))
            order = rotation[v]
            i = nxt_idx[v][u]
            w = order[(i - 1) % len(order)]
            u, v = v, w
            if (u, v) == start:
                break
    return faces


def is_valid_embedding(g: Graph, rotation: list[list[int]]) -> bool:
    """True iff ``rotation`` is a combinatorial planar embedding of g."""
    if len(rotation) != g.n:
        return False
    for v in range(g.n):
        if sorted(rotation[v]) != sorted(g.adjacency[v]):
            return False
    if g.m == 0:
        return True
    comps = _component_count(g)
    return g.n - g.m + count_faces(g, rotation) == 1 + comps


def _component_count(g: Graph) -> int:
    seen = [False] * g.n
    comps = 0
    for s in range(g.n):
        if seen[s]:
            continue
        comps += 1
        stack = [s]
        seen[s] = True
        while stack:
            u = stack.pop()
            for w in g.adjacency[u]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
    return comps


# ---------------------------------------------------------------------------
# Demoucron-Malgrange-Pertuiset embedding of biconnected graphs


def _find_cycle(adj: dict[int, list[int]]) -> Optional[list[int]]:
    nodes = list(adj)
    if not nodes:
        return None
    seen: set[int] = set()
    parent: dict[int, Optional[int]] = {}
    for start in nodes:
        if start in seen:
            continue
        parent[start] = None
        stack = [(start, None)]
        seen.add(start)
        while stack:
            v, par = stack.pop()
            for w in adj[v]:
                if w == par:
                    continue
                if w in seen:
                    # walk both chains up to meet
                    pa, pb = v, w
                    la, lb = [pa], [pb]
                    sa, sb = {pa}, {pb}
                    while True:
                        if pa is not None and parent.get(pa) is not None:
                            pa = parent[pa]
                            la.append(pa)
                            sa.add(pa)
                            if pa in sb:
                                break
                        if pb is not None and parent.get(pb) is not None:
                            pb = parent[pb]
                            lb.append(pb)
                            sb.add(pb)
                            if pb in sa:
                                break
                        if parent.get(pa) is None and parent.get(pb) is None:
                            break
                    common = None
                    for x in la:
                        if x in sb:
                            common = x
                            break
                    if common is None:
                        continue
                    ca = la[: la.index(common) + 1]
                    cb = lb[: lb.index(common) + 1]
                    return ca[:-1] + [common] + list(reversed(cb[:-1]))
                else:
                    seen.add(w)
                    parent[w] = v
                    stack.append((w, v))
    return None


def _embed_biconnected(g: Graph, nodes: list[int]) -> Optional[dict[int, list[int]]]:
    """DMP face-expansion embedding of the subgraph induced by ``nodes``.

    Returns per-node clockwise neighbor order, or None if not planar.
    """
    sub_adj = {v: [w for w in g.adjacency[v] if w in set(nodes)] for v in nodes}
    all_edges = {
        (min(u, v), max(u, v)) for u in nodes for v in sub_adj[u]
    }
    if len(all_edges) == len(nodes) - 1:
        # a single edge block (or tree): any rotation works
        return {v: list(sub_adj[v]) for v in nodes}

    cyc = _find_cycle(sub_adj)
    if cyc is None:
        return {v: list(sub_adj[v]) for v in nodes}
    emb_vertices = set(cyc)
    emb_edges = {(min(a, b), max(a, b)) for a, b in zip(cyc, cyc[1:] + cyc[:1])}
    faces: list[list[int]] = [list(cyc), list(reversed(cyc))]

    while emb_edges != all_edges:
        # bridges: lone chords plus components of the unembedded part
        bridges: list[tuple[set[int], dict]] = []  # (attachments, data)
        for u, v in all_edges - emb_edges:
            if u in emb_vertices and v in emb_vertices:
                bridges.append(({u, v}, {"chord": (u, v)}))
        seen: set[int] = set()
        for s in nodes:
            if s in emb_vertices or s in seen:
                continue
            comp = {s}
            stack = [s]
            seen.add(s)
            att: set[int] = set()
            while stack:
                x = stack.pop()
                for w in sub_adj[x]:
                    if w in emb_vertices:
                        att.add(w)
                    elif w not in comp:
                        comp.add(w)
                        seen.add(w)
                        stack.append(w)
            bridges.append((att, {"comp": comp}))
        if not bridges:
            break

        best = None
        for att, data in bridges:
            admissible = [
                fi for fi, f in enumerate(faces) if att <= set(f)
            ]
            if not admissible:
                return None
            if best is None or len(admissible) < len(best[2]):
                best = (att, data, admissible)
            if len(admissible) == 1:
                best = (att, data, admissible)
                break
        att, data, admissible = best
        face_idx = admissible[0]

        if "chord" in data:
            path = list(data["chord"])
        else:
            comp = data["comp"]
            att_list = sorted(att)
            a = att_list[0]
            # BFS from a through the component to another attachment
            prev: dict[int, int] = {}
            frontier = [x for x in sub_adj[a] if x in comp]
            for x in frontier:
                prev[x] = a
            path = None
            queue = list(frontier)
            while queue and path is None:
                x = queue.pop(0)
                for w in sub_adj[x]:
                    if w in emb_vertices and w != a:
                        chain = [w, x]
                        while chain[-1] != a:
                            chain.append(prev[chain[-1]])
                        path = list(reversed(chain))
                        break
                    if w in comp and w not in prev:
                        prev[w] = x
                        queue.append(w)
            if path is None:
                return None

        face = faces[face_idx]
        ia = face.index(path[0])
        ib = face.index(path[-1])
        seg_a_b = []
        i = ia
        while True:
            seg_a_b.append(face[i])
            if i == ib:
                break
            i = (i + 1) % len(face)
        seg_b_a = []
        i = ib
        while True:
            seg_b_a.append(face[i])
            if i == ia:
                break
            i = (i + 1) % len(face)
        mid = path[1:-1]
        face1 = seg_a_b + list(reversed(mid))
        face2 = seg_b_a + list(mid)
        faces[face_idx] = face1
        faces.append(face2)
        emb_vertices.update(path)
        for a2, b2 in zip(path, path[1:]):
            emb_edges.add((min(a2, b2), max(a2, b2)))

    # rebuild rotations from the face cycles: at each corner (prev -> v -> nxt)
    succ: dict[int, dict[int, int]] = {v: {} for v in nodes}
    for face in faces:
        k = len(face)
        for i in range(k):
            prv, v, nxt = face[i - 1], face[i], face[(i + 1) % k]
            succ[v][prv] = nxt
    rot: dict[int, list[int]] = {}
    for v in nodes:
        if not sub_adj[v]:
            rot[v] = []
            continue
        order = [sub_adj[v][0]]
        while True:
            nxt = succ[v].get(order[-1])
            if nxt is None or nxt == order[0]:
                break
            order.append(nxt)
        if sorted(order) != sorted(sub_adj[v]):
            return None  # inconsistent map: not a planar embedding
        rot[v] = order
    return rot


def planar_embedding(g: Graph) -> Optional[list[list[int]]]:
    """Full planar rotation system or None; guarded to n <= 10.

    Blocks are embedded independently and merged at cut nodes; the result
    is validated through the Euler characteristic.
    """
    if g.n > 10:
        raise OracleError("planar_embedding guarded to n <= 10")
    rotation: list[list[int]] = [[] for _ in range(g.n)]
    seen = [False] * g.n
    for s in range(g.n):
        if seen[s]:
            continue
        comp = [s]
        seen[s] = True
        stack = [s]
        while stack:
            u = stack.pop()
            for w in g.adjacency[u]:
                if not seen[w]:
                    seen[w] = True
                    comp.append(w)
                    stack.append(w)
        if len(comp) == 1:
            continue
        sub = Graph(g.n, [
            (u, v) for u, v in g.edges if u in set(comp) and v in set(comp)
        ])
        # restrict to the component for the block-cut decomposition
        relabel = {v: i for i, v in enumerate(sorted(comp))}
        back = {i: v for v, i in relabel.items()}
        cg = Graph(len(comp), [
            (relabel[u], relabel[v])
            for u, v in g.edges
            if u in relabel and v in relabel
        ])
        bct = biconnected_components(cg)
        for block in bct.components:
            orig = [back[v] for v in block]
            emb = _embed_biconnected(g, orig)
            if emb is None:
                return None
            for v in orig:
                rotation[v].extend(emb[v])
    if not is_valid_embedding(g, rotation):
        return None
    return rotation


def is_planar_oracle(g: Graph):
    """Planarity verdict plus a witnessing rotation system when feasible.

    The verdict is Kuratowski-based at any n; the embedding is built only
    for n <= 10 and cross-checked against the verdict.
    """
    verdict = is_planar_verdict(g)
    rotation = None
    if g.n <= 10:
        rotation = planar_embedding(g)
        if (rotation is not None) != verdict:
            raise OracleError(
                "embedding search and Kuratowski search disagree; oracle bug"
            )
    return verdict, rotation
