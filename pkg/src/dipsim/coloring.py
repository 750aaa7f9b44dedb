"""Planar graph service routines: 5-coloring and forest decompositions.

Five colors instead of four keep labels constant-size while staying
linear-time; the forest decomposition comes from a low-degeneracy
orientation (out-degree <= 5 on planar graphs), one forest per out-slot.
"""

from __future__ import annotations

from .graphs import Graph, GraphError, edge_key


class ColoringError(ValueError):
    pass


def degeneracy_order(n: int, adj: list[set[int]]) -> list[int]:
    """Repeatedly remove a minimum-degree node (bucket queue, O(n + m))."""
    deg = [len(adj[v]) for v in range(n)]
    maxdeg = max(deg, default=0)
    buckets: list[list[int]] = [[] for _ in range(maxdeg + 1)]
    for v in range(n):
        buckets[deg[v]].append(v)
    removed = [False] * n
    order = []
    cur = 0
    while len(order) < n:
        while cur > 0 and buckets[cur - 1]:
            cur -= 1
        while cur <= maxdeg and not buckets[cur]:
            cur += 1
        v = buckets[cur].pop()
        if removed[v] or deg[v] != cur:
            continue
        removed[v] = True
        order.append(v)
        for w in adj[v]:
            if not removed[w]:
                deg[w] -= 1
                buckets[deg[w]].append(w)
    return order


def five_coloring(n: int, edges: list[tuple[int, int]]) -> list[int]:
    """Proper coloring with colors 1..5 via degree-5 removal + Kempe swaps.

    Raises ColoringError when the input is too dense to be planar-like.
    """
    adj: list[set[int]] = [set() for _ in range(n)]
    for u, v in edges:
        if u != v:
            adj[u].add(v)
            adj[v].add(u)

    order = degeneracy_order(n, adj)
    # verify 5-degeneracy during removal
    live_deg = [len(a) for a in adj]
    for v in order:
        if live_deg[v] > 5:
            raise ColoringError("graph is not 5-degenerate (non-planar input?)")
        for w in adj[v]:
            live_deg[w] -= 1

    color = [0] * n
    for v in reversed(order):
        used = {color[w] for w in adj[v] if color[w]}
        free = [c for c in range(1, 6) if c not in used]
        if free:
            color[v] = free[0]
            continue
        # all 5 colors among >= 5 neighbors: Kempe chain argument
        nbrs = [w for w in adj[v] if color[w]]
        done = False
        for i in range(len(nbrs)):
            for j in range(i + 1, len(nbrs)):
                a, b = nbrs[i], nbrs[j]
                ca, cb = color[a], color[b]
                if ca == cb:
                    continue
                # (ca, cb)-Kempe component containing a
                comp = {a}
                stack = [a]
                while stack:
                    x = stack.pop()
                    for w in adj[x]:
                        if w not in comp and color[w] in (ca, cb):
                            comp.add(w)
                            stack.append(w)
                if b not in comp:
                    for x in comp:
                        color[x] = cb if color[x] == ca else ca
                    color[v] = ca
                    done = True
                    break
            if done:
                break
        if not done:
            raise ColoringError("Kempe swap failed; input looks non-planar")
    for u, v in edges:
        if u != v and color[u] == color[v]:
            raise ColoringError("coloring invariant violated")
    return color


def planar_coloring(g: Graph) -> list[int]:
    """Per-node color in {1..5}; errors out on clearly non-planar input."""
    if g.m > max(0, 3 * g.n - 6) and g.n >= 3:
        raise ColoringError("too many edges for a planar graph")
    return five_coloring(g.n, list(g.edges))


def forest_decomposition(g: Graph) -> list[dict[int, int]]:
    """Partition edges into rooted forests; forest k maps child -> parent.

    Orient every edge from the earlier node in a degeneracy order to the
    later one; out-degrees are bounded by the degeneracy (<= 5 when planar),
    and each out-slot forms a forest whose parent pointers follow the order.
    """
    if g.n >= 3 and g.m > 3 * g.n - 6:
        raise GraphError("forest_decomposition expects a planar-density graph")
    adj = [set(ns) for ns in g.adjacency]
    order = degeneracy_order(g.n, adj)
    rank = {v: i for i, v in enumerate(order)}
    forests: list[dict[int, int]] = []
    for v in order:
        later = sorted((w for w in g.adjacency[v] if rank[w] > rank[v]), key=lambda w: rank[w])
        if len(later) > 6:
            raise GraphError("degeneracy exceeds 6; not a planar graph")
        for slot, w in enumerate(later):
            while len(forests) <= slot:
                forests.append({})
            forests[slot][v] = w  # v's parent in forest `slot` is w
    # acyclicity is structural: parents always have larger rank
    covered = sum(len(f) for f in forests)
    if covered != g.m:
        raise GraphError("forest decomposition failed to cover all edges")
    return forests


def forest_roots(n: int, forest: dict[int, int]) -> list[int]:
    members = set(forest.keys()) | set(forest.values())
    return sorted(v for v in members if v not in forest)
