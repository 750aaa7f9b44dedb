"""Brute-force oracles that serve as ground truth at desk scale.

Everything here is exponential or worse somewhere and guarded accordingly;
protocols are validated against these on small instances and trusted with
generator witnesses at large n.
"""

from __future__ import annotations

import itertools
from typing import Iterator, Optional, Sequence

from .graphs import BlockCutTree, EarDecomposition, Graph, GraphError, edge_key


class OracleError(ValueError):
    pass


# ---------------------------------------------------------------------------
# biconnected components / block-cut tree


def biconnected_components(g: Graph) -> BlockCutTree:
    """Iterative low-link decomposition into biconnected components.

    The block-cut tree is rooted at the lowest-index component.
    """
    if not g.is_connected():
        raise OracleError("biconnected_components requires a connected graph")
    n = g.n
    disc = [-1] * n
    low = [0] * n
    parent = [-1] * n
    comp_nodes: list[list[int]] = []
    edge_stack: list[tuple[int, int]] = []
    timer = 0
    if n == 1:
        return BlockCutTree([[0]], set(), [], 0, [None])

    def emit(u: int, v: int) -> None:
        nodes: set[int] = set()
        while edge_stack:
            a, b = edge_stack.pop()
            nodes.add(a)
            nodes.add(b)
            if (a, b) == (u, v):
                break
        comp_nodes.append(sorted(nodes))

    # explicit DFS stack: (node, parent, iterator index)
    for start in range(n):
        if disc[start] != -1:
            continue
        stack = [(start, iter(g.adjacency[start]))]
        disc[start] = low[start] = timer
        timer += 1
        while stack:
            u, it = stack[-1]
            advanced = False
            for w in it:
                if disc[w] == -1:
                    parent[w] = u
                    edge_stack.append((u, w))
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append((w, iter(g.adjacency[w])))
                    advanced = True
                    break
                elif w != parent[u] and disc[w] < disc[u]:
                    edge_stack.append((u, w))
                    low[u] = min(low[u], disc[w])
            if not advanced:
                stack.pop()
                if stack:
                    p = stack[-1][0]
                    low[p] = min(low[p], low[u])
                    if low[u] >= disc[p]:
                        emit(p, u)

    comp_nodes.sort()
    membership: dict[int, list[int]] = {}
    for idx, comp in enumerate(comp_nodes):
        for v in comp:
            membership.setdefault(v, []).append(idx)
    cut_nodes = {v for v, comps in membership.items() if len(comps) > 1}
    tree_edges = sorted((c, v) for v in cut_nodes for c in membership[v])

    root = 0
    separating: list[Optional[int]] = [None] * len(comp_nodes)
    # BFS over the component/cut-node bipartite tree to set parent cut nodes
    seen_comp = {root}
    seen_cut: set[int] = set()
    frontier = [root]
    while frontier:
        nxt: list[int] = []
        for c in frontier:
            for v in comp_nodes[c]:
                if v in cut_nodes and v not in seen_cut:
                    seen_cut.add(v)
                    for c2 in membership[v]:
                        if c2 not in seen_comp:
                            seen_comp.add(c2)
                            separating[c2] = v
                            nxt.append(c2)
        frontier = nxt
    return BlockCutTree(comp_nodes, cut_nodes, tree_edges, root, separating)


# ---------------------------------------------------------------------------
# nesting / path-outerplanarity


def is_properly_nested(order: Sequence[int], arcs: Sequence[tuple[int, int]]) -> bool:
    """True iff no two arcs cross w.r.t. the given node order.

    ``order`` maps position -> node; arcs are node pairs. Stack sweep,
    O(m log m).
    """
    pos = {v: i for i, v in enumerate(order)}
    spans = sorted(
        ((min(pos[a], pos[b]), max(pos[a], pos[b])) for a, b in arcs),
        key=lambda s: (s[0], -s[1]),
    )
    stack: list[int] = []  # right endpoints of open arcs
    for a, b in spans:
        while stack and stack[-1] <= a:
            stack.pop()
        if stack and stack[-1] < b:
            return False
        stack.append(b)
    return True


def _path_arcs(g: Graph, order: Sequence[int]) -> list[tuple[int, int]]:
    pos = {v: i for i, v in enumerate(order)}
    arcs = []
    for u, v in g.edges:
        if abs(pos[u] - pos[v]) > 1:
            arcs.append((u, v))
    return arcs


def hamiltonian_path_orderings(g: Graph, limit: Optional[int] = None) -> Iterator[list[int]]:
    """Yield Hamiltonian path node orders by pruned DFS."""
    n = g.n
    count = 0
    for start in range(n):
        stack: list[tuple[list[int], set[int]]] = [([start], {start})]
        while stack:
            path, used = stack.pop()
            if len(path) == n:
                yield path
                count += 1
                if limit is not None and count >= limit:
                    return
                continue
            for w in g.adjacency[path[-1]]:
                if w not in used:
                    stack.append((path + [w], used | {w}))


def is_path_outerplanar_bf(g: Graph, return_path: bool = False):
    """Try all Hamiltonian path orderings; accept iff one has no crossing pair.

    Guarded to n <= 12 (oracle scale).
    """
    if g.n > 12:
        raise OracleError("is_path_outerplanar_bf is guarded to n <= 12")
    if g.n == 1:
        return (True, [0]) if return_path else True
    found = None
    if g.is_connected() and g.m <= 2 * g.n - 3:
        for order in hamiltonian_path_orderings(g):
            if is_properly_nested(order, _path_arcs(g, order)):
                found = order
                break
    if return_path:
        return (found is not None), found
    return found is not None


def is_biconnected_outerplanar_bf(g: Graph, return_cycle: bool = False):
    """Hamiltonian cycle plus non-crossing chords, by path search + closure."""
    if g.n > 12:
        raise OracleError("guarded to n <= 12")
    if g.n < 3:
        return (False, None) if return_cycle else False
    found = None
    if g.is_connected() and g.m <= 2 * g.n - 3:
        for order in hamiltonian_path_orderings(g):
            if g.has_edge(order[0], order[-1]) and is_properly_nested(
                order, _path_arcs(g, order)
            ):
                found = order
                break
    if return_cycle:
        return (found is not None), found
    return found is not None


# ---------------------------------------------------------------------------
# Kuratowski subdivision search (planarity verdict)


def _disjoint_paths(g: Graph, pairs: list[tuple[int, int]], terminals: set[int]) -> bool:
    """Search internally-vertex-disjoint paths for all terminal pairs."""
    used = [False] * g.n

    def solve(idx: int) -> bool:
        if idx == len(pairs):
            return True
        s, t = pairs[idx]

        def extend(v: int, local: list[int]) -> bool:
            for w in g.adjacency[v]:
                if w == t and (v != s or not g.has_edge(s, t) or True):
                    for x in local:
                        used[x] = True
                    if solve(idx + 1):
                        return True
                    for x in local:
                        used[x] = False
                elif w not in terminals and not used[w] and w not in local:
                    if extend(w, local + [w]):
                        return True
            return False

        return extend(s, [])

    return solve(0)


def has_k5_subdivision(g: Graph) -> bool:
    cand = [v for v in range(g.n) if g.degree(v) >= 4]
    for hubs in itertools.combinations(cand, 5):
        pairs = [(a, b) for a, b in itertools.combinations(hubs, 2)]
        if _disjoint_paths(g, pairs, set(hubs)):
            return True
    return False


def has_k33_subdivision(g: Graph) -> bool:
    cand = [v for v in range(g.n) if g.degree(v) >= 3]
    for six in itertools.combinations(cand, 6):
        for left in itertools.combinations(six, 3):
            if six[0] not in left:
                continue  # fix first element on the left to kill symmetry
            right = tuple(v for v in six if v not in left)
            pairs = [(a, b) for a in left for b in right]
            if _disjoint_paths(g, pairs, set(six)):
                return True
    return False


def is_planar_verdict(g: Graph) -> bool:
    """Kuratowski: planar iff no K5 or K3,3 subdivision."""
    if g.n < 5:
        return True
    if g.m > 3 * g.n - 6:
        return False
    return not (has_k5_subdivision(g) or has_k33_subdivision(g))


def is_outerplanar_bf(g: Graph) -> bool:
    """Outerplanar iff the graph plus an apex node is planar."""
    if g.n > 11:
        raise OracleError("is_outerplanar_bf guarded to n <= 11")
    if g.m > 2 * g.n - 3:
        return False
    apex = Graph(g.n + 1, list(g.edges) + [(v, g.n) for v in range(g.n)])
    return is_planar_verdict(apex)


# ---------------------------------------------------------------------------
# series-parallel / treewidth <= 2


def _sp_reduce(n: int, edges: list[tuple[int, int]], s: int, t: int) -> bool:
    """Two-terminal series-parallel reduction on a multigraph edge list."""
    mult: dict[tuple[int, int], int] = {}
    deg: dict[int, int] = {}
    for u, v in edges:
        k = edge_key(u, v)
        mult[k] = mult.get(k, 0) + 1
        deg[u] = deg.get(u, 0) + 1
        deg[v] = deg.get(v, 0) + 1
    changed = True
    while changed:
        changed = False
        for k in list(mult):
            if mult.get(k, 0) > 1:
                deg[k[0]] -= mult[k] - 1
                deg[k[1]] -= mult[k] - 1
                mult[k] = 1
                changed = True
        for v in list(deg):
            if v in (s, t) or deg.get(v, 0) != 2:
                continue
            nbrs = [k[0] if k[1] == v else k[1] for k in mult if v in k and mult[k] > 0]
            if len(nbrs) == 1:
                a = b = nbrs[0]  # two parallel edges to same neighbor: not reducible here
                continue
            if len(nbrs) != 2:
                continue
            a, b = nbrs
            for u in (a, b):
                k = edge_key(u, v)
                mult.pop(k)
            deg.pop(v)
            k = edge_key(a, b)
            mult[k] = mult.get(k, 0) + 1
            changed = True
    alive = [k for k, c in mult.items() if c > 0]
    return len(alive) == 1 and set(alive[0]) == {s, t}


def is_series_parallel(g: Graph) -> bool:
    """Connected two-terminal series-parallel for some terminal pair."""
    if g.n > 16:
        raise OracleError("is_series_parallel guarded to n <= 16")
    if not g.is_connected():
        return False
    if g.n == 1:
        return False
    if g.m > 2 * g.n - 3:
        return False
    for s in range(g.n):
        for t in range(s + 1, g.n):
            if _sp_reduce(g.n, list(g.edges), s, t):
                return True
    return False


def treewidth_le2(g: Graph) -> bool:
    """Treewidth <= 2 iff reducible to nothing by removing deg <= 2 nodes."""
    adj: list[set[int]] = [set(ns) for ns in g.adjacency]
    alive = set(range(g.n))
    queue = [v for v in alive if len(adj[v]) <= 2]
    while queue:
        v = queue.pop()
        if v not in alive or len(adj[v]) > 2:
            continue
        ns = list(adj[v])
        for u in ns:
            adj[u].discard(v)
        if len(ns) == 2:
            a, b = ns
            if b not in adj[a]:
                adj[a].add(b)
                adj[b].add(a)
        alive.discard(v)
        for u in ns:
            if u in alive and len(adj[u]) <= 2:
                queue.append(u)
    return not alive


# ---------------------------------------------------------------------------
# nested ear decompositions


def validate_ear_decomposition(g: Graph, dec: EarDecomposition) -> None:
    """Check conditions of a nested ear decomposition; raise on violation.

    (1) endpoints of each later ear lie in one earlier ear, (2) interiors
    are fresh, (3) ears sharing a host are properly nested within it.
    """
    ears = dec.ears
    if not ears:
        raise OracleError("no ears")
    used_edges: set[tuple[int, int]] = set()
    placed: set[int] = set()
    for j, ear in enumerate(ears):
        if len(ear) < 2:
            raise OracleError(f"ear {j} shorter than one edge")
        if len(set(ear)) != len(ear):
            raise OracleError(f"ear {j} is not a simple path")
        for a, b in zip(ear, ear[1:]):
            if not g.has_edge(a, b):
                raise OracleError(f"ear {j} uses a missing edge ({a},{b})")
            k = edge_key(a, b)
            if k in used_edges:
                raise OracleError(f"edge ({a},{b}) appears in two ears")
            used_edges.add(k)
        if j == 0:
            placed.update(ear)
            continue
        host = dec.nesting_parent[j]
        if host is None or host >= j:
            raise OracleError(f"ear {j} lacks a valid earlier host")
        hostset = set(ears[host])
        if ear[0] not in hostset or ear[-1] not in hostset:
            raise OracleError(f"ear {j} endpoints not in host ear {host}")
        interior = ear[1:-1]
        for v in interior:
            if v in placed:
                raise OracleError(f"ear {j} interior node {v} seen before")
        placed.update(ear)
    if len(used_edges) != g.m:
        raise OracleError("ears do not partition the edge set")
    if placed != set(range(g.n)):
        raise OracleError("ears do not cover all nodes")
    # condition (3): per host, attached ears properly nested
    for i, host_ear in enumerate(ears):
        arcs = []
        for j in range(1, len(ears)):
            if dec.nesting_parent[j] == i:
                arcs.append((ears[j][0], ears[j][-1]))
        if not is_properly_nested(host_ear, arcs):
            raise OracleError(f"ears attached to ear {i} cross")


def find_nested_ear_decomposition(g: Graph) -> Optional[EarDecomposition]:
    """Backtracking search for a nested ear decomposition (oracle scale)."""
    if g.n > 10:
        raise OracleError("find_nested_ear_decomposition guarded to n <= 10")
    if g.m > 2 * g.n - 3 or not g.is_connected():
        return None
    all_edges = {edge_key(u, v) for u, v in g.edges}

    def ear_paths(src: int, allowed_end: set[int], placed: set[int], used: set) -> Iterator[list[int]]:
        # simple paths from src, interior outside `placed`, ending in allowed_end
        def extend(path: list[int]) -> Iterator[list[int]]:
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

    def solve(ears: list[list[int]], parents: list[Optional[int]], placed: set[int], used: set) -> Optional[EarDecomposition]:
        if len(used) == len(all_edges):
            dec = EarDecomposition([list(e) for e in ears], list(parents))
            try:
                validate_ear_decomposition(g, dec)
            except OracleError:
                return None
            return dec
        for host_idx, host in enumerate(ears):
            hostset = set(host)
            for src in host:
                for path in ear_paths(src, hostset, placed, used):
                    new_used = used | {edge_key(a, b) for a, b in zip(path, path[1:])}
                    res = solve(
                        ears + [path],
                        parents + [host_idx],
                        placed | set(path),
                        new_used,
                    )
                    if res is not None:
                        return res
        return None

    # try first ears: simple paths, longest first tend to succeed quicker
    seen_first: set[tuple[int, ...]] = set()
    for order in _simple_paths_all(g):
        key = tuple(order if order[0] < order[-1] else list(reversed(order)))
        if key in seen_first:
            continue
        seen_first.add(key)
        used = {edge_key(a, b) for a, b in zip(order, order[1:])}
        res = solve([order], [None], set(order), used)
        if res is not None:
            return res
    return None


def _simple_paths_all(g: Graph) -> Iterator[list[int]]:
    """All simple paths with >= 1 edge, longer paths first per start node."""
    paths: list[list[int]] = []
    for start in range(g.n):
        stack = [[start]]
        while stack:
            path = stack.pop()
            if len(path) > 1:
                paths.append(path)
            for w in g.adjacency[path[-1]]:
                if w not in path:
                    stack.append(path + [w])
    paths.sort(key=len, reverse=True)
    yield from paths


# ---------------------------------------------------------------------------
# exhaustive small-graph enumeration (canonical forms, no external deps)


def _canonical_form(n: int, adj: list[set[int]]) -> tuple:
    """Canonical adjacency signature via refinement plus bounded search."""
    colors = [len(adj[v]) for v in range(n)]
    while True:
        sig = [
            (colors[v], tuple(sorted(colors[w] for w in adj[v]))) for v in range(n)
        ]
        ranks = {s: i for i, s in enumerate(sorted(set(sig)))}
        new = [ranks[sig[v]] for v in range(n)]
        if new == colors:
            break
        colors = new
    classes: dict[int, list[int]] = {}
    for v in range(n):
        classes.setdefault(colors[v], []).append(v)
    ordered_classes = [classes[c] for c in sorted(classes)]

    best: Optional[tuple] = None

    def emit(perm: list[int]) -> None:
        nonlocal best
        index = {v: i for i, v in enumerate(perm)}
        bits = []
        for i in range(n):
            u = perm[i]
            row = 0
            for w in adj[u]:
                j = index[w]
                if j > i:
                    row |= 1 << j
            bits.append(row)
        t = tuple(bits)
        if best is None or t < best:
            best = t

    def assemble(idx: int, prefix: list[int]) -> None:
        if idx == len(ordered_classes):
            emit(prefix)
            return
        for perm in itertools.permutations(ordered_classes[idx]):
            assemble(idx + 1, prefix + list(perm))

    total = 1
    for cls in ordered_classes:
        f = 1
        for k in range(2, len(cls) + 1):
            f *= k
        total *= f
    if total > 50000:  # extremely symmetric: fall back to raw permutations anyway
        for perm in itertools.permutations(range(n)):
            emit(list(perm))
    else:
        assemble(0, [])
    assert best is not None
    return (n,) + best


def enumerate_graphs(n: int) -> list[Graph]:
    """All unlabeled graphs on n nodes via extension from n-1 (n <= 8)."""
    if n > 8:
        raise OracleError("enumerate_graphs guarded to n <= 8")
    if n == 1:
        return [Graph(1, [])]
    smaller = enumerate_graphs(n - 1)
    seen: set[tuple] = set()
    out: list[Graph] = []
    for g in smaller:
        base = [set(ns) for ns in g.adjacency]
        for mask in range(1 << (n - 1)):
            adj = [set(s) for s in base] + [set()]
            for v in range(n - 1):
                if mask >> v & 1:
                    adj[v].add(n - 1)
                    adj[n - 1].add(v)
            key = _canonical_form(n, adj)
            if key in seen:
                continue
            seen.add(key)
            edges = [
                (u, v) for u in range(n) for v in sorted(adj[u]) if u < v
            ]
            out.append(Graph(n, edges))
    return out


def enumerate_connected_graphs(n: int) -> list[Graph]:
    return [g for g in enumerate_graphs(n) if g.is_connected()]
