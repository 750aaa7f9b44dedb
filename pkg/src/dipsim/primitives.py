"""Shared protocol building blocks.

Prime contexts, multiset-equality fingerprints, constant-size tree advice
for planar graphs, edge-label hosting through forest decompositions, and
the pluggable spanning-tree verification schemes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .coloring import five_coloring, forest_decomposition
from .graphs import Graph, edge_key


def _is_prime(x: int) -> bool:
    if x < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if x % q == 0:
            return x == q
    d = x - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        y = pow(a, d, x)
        if y in (1, x - 1):
            continue
        for _ in range(r - 1):
            y = y * y % x
            if y == x - 1:
                break
        else:
            return False
    return True


def smallest_prime_above(t: int) -> int:
    """Least prime strictly greater than t."""
    if t < 1:
        raise ValueError("t >= 1 required")
    x = t + 1
    while not _is_prime(x):
        x += 1
    return x


def ceil_log2(n: int) -> int:
    if n <= 1:
        return 0
    return (n - 1).bit_length()


@dataclass(frozen=True)
class PrimeContext:
    """Field sizes for the fingerprinting machinery at instance size n.

    p is the block fingerprint field (> log^c n), p_prime the pair field
    (> p * ceil(log n)).
    """

    n: int
    c: int
    log_n: int
    p: int
    p_prime: int

    @staticmethod
    def for_size(n: int, c: int = 3) -> "PrimeContext":
        log_n = max(2, ceil_log2(max(2, n)))
        p = smallest_prime_above(log_n**c)
        p_prime = smallest_prime_above(p * log_n)
        return PrimeContext(n=n, c=c, log_n=log_n, p=p, p_prime=p_prime)


def multiset_poly_eval(values: Iterable[int], z: int, p: int) -> int:
    """Evaluate phi_S(z) = prod over S of (s - z) in F_p (empty product = 1)."""
    acc = 1
    for s in values:
        acc = acc * ((s - z) % p) % p
    return acc


def encode_pair(i: int, j: int, p: int) -> int:
    """Fixed bijection [1..L] x [0..p-1] -> [1..L*p]."""
    return (i - 1) * p + j + 1


def decode_pair(x: int, p: int) -> tuple[int, int]:
    return (x - 1) // p + 1, (x - 1) % p


# ---------------------------------------------------------------------------
# tree advice (constant-size forest encoding for planar graphs)


@dataclass
class ForestAdvice:
    """Per-node (c1, c2, parity) labels communicating a rooted forest."""

    c1: list[int]
    c2: list[int]
    parity: list[int]


def tree_advice_encode(g: Graph, parent: dict[int, Optional[int]]) -> ForestAdvice:
    """Encode a rooted spanning forest of a planar graph.

    ``parent`` maps every node to its parent (None at roots). Colors come
    from 5-colorings of the odd/even edge contractions.
    """
    n = g.n
    depth = [0] * n
    roots = [v for v in range(n) if parent.get(v) is None]
    children: dict[int, list[int]] = {v: [] for v in range(n)}
    for v in range(n):
        p = parent.get(v)
        if p is not None:
            children[p].append(v)
    visited = 0
    for r in roots:
        stack = [(r, 0)]
        while stack:
            v, d = stack.pop()
            depth[v] = d
            visited += 1
            for c in children[v]:
                stack.append((c, d + 1))
    if visited != n:
        raise ValueError("parent map is not a rooted forest (cycle?)")

    def contracted_colors(odd: bool) -> list[int]:
        rep = list(range(n))
        for v in range(n):
            p = parent.get(v)
            if p is not None and (depth[v] % 2 == 1) == odd:
                rep[v] = p
        # path-compress: a node contracts at most one level by parity
        edges = set()
        for u, w in g.edges:
            a, b = rep[u], rep[w]
            if a != b:
                edges.add(edge_key(a, b))
        colors = five_coloring(n, sorted(edges))
        return [colors[rep[v]] for v in range(n)]

    c1 = contracted_colors(odd=True)
    c2 = contracted_colors(odd=False)
    return ForestAdvice(c1=c1, c2=c2, parity=[depth[v] % 2 for v in range(n)])


def tree_advice_decode_parent(my: tuple[int, int, int],
                              nbrs: Sequence[tuple[int, int, int]]):
    """Parent port from (c1, c2, parity) labels; (port|None, ok) pair.

    None with ok=True means root; ok=False signals corrupted labels
    (two or more parent candidates).
    """
    c1, c2, par = my
    cands = []
    for port, (n1, n2, npar) in enumerate(nbrs):
        if npar == par:
            continue
        if par == 1 and n1 == c1:
            cands.append(port)
        elif par == 0 and n2 == c2:
            cands.append(port)
    if len(cands) > 1:
        return None, False
    return (cands[0] if cands else None), True


def tree_advice_decode_children(my: tuple[int, int, int],
                                nbrs: Sequence[tuple[int, int, int]]) -> list[int]:
    c1, c2, par = my
    out = []
    for port, (n1, n2, npar) in enumerate(nbrs):
        if npar == par:
            continue
        if par == 1 and n2 == c2:
            out.append(port)
        elif par == 0 and n1 == c1:
            out.append(port)
    return out


# ---------------------------------------------------------------------------
# edge-label hosting (simulated edge labels via forest slots)


@dataclass
class EdgeHosting:
    """Assignment of every edge to an accountable endpoint and slot.

    slot_of[eid] = (host node, forest index). Host = the child endpoint in
    the forest that contains the edge; both endpoints resolve the same slot
    from the advice labels alone.
    """

    n_slots: int
    slot_of: dict[int, tuple[int, int]]


def edge_label_embedding(g: Graph, forests: list[dict[int, int]]) -> EdgeHosting:
    slot_of: dict[int, tuple[int, int]] = {}
    for idx, forest in enumerate(forests):
        for child, par in forest.items():
            eid = g.edge_id(child, par)
            if eid not in slot_of:
                slot_of[eid] = (child, idx)
    missing = [e for e in range(g.m) if e not in slot_of]
    if missing:
        raise ValueError(f"{len(missing)} edges not covered by the forests")
    return EdgeHosting(n_slots=len(forests), slot_of=slot_of)


def hosting_for_planar(g: Graph) -> EdgeHosting:
    return edge_label_embedding(g, forest_decomposition(g))


# ---------------------------------------------------------------------------
# spanning-tree verification schemes


REFERENCE_ST = "reference"
CONTRACT_ST = "contract"


def reference_st_labels(g: Graph, parent: dict[int, Optional[int]]) -> tuple[list[int], list[int]]:
    """Deterministic root-id + distance labels for the claimed forest.

    Exact: used both as the default verification and as the correctness
    oracle for the pluggable 3-round scheme.
    """
    n = g.n
    children: dict[int, list[int]] = {v: [] for v in range(n)}
    roots = []
    for v in range(n):
        p = parent.get(v)
        if p is None:
            roots.append(v)
        else:
            children[p].append(v)
    rid = [0] * n
    dist = [0] * n
    for r in roots:
        stack = [(r, 0)]
        while stack:
            v, d = stack.pop()
            rid[v] = r
            dist[v] = d
            for c in children[v]:
                stack.append((c, d + 1))
    return rid, dist


def check_reference_st(v: int, my_rid: int, my_dist: int, my_id: int,
                       nbr_info: Sequence[tuple[int, int, bool]],
                       require_spanning_root: bool = True):
    """Local spanning-tree checks at one node.

    ``nbr_info`` holds (rid, dist, claimed_tree_edge) per neighbor. Returns
    (ok, tag) with the first failing sub-check.
    """
    for rid, dist, _ in nbr_info:
        if rid != my_rid:
            return False, "st.rid-mismatch"
    parents = 0
    for rid, dist, on_tree in nbr_info:
        if not on_tree:
            continue
        if abs(dist - my_dist) != 1:
            return False, "st.dist-step"
        if dist == my_dist - 1:
            parents += 1
    if my_dist == 0:
        if require_spanning_root and my_rid != my_id:
            return False, "st.root-id"
        if parents != 0:
            return False, "st.root-parent"
    else:
        if parents != 1:
            return False, "st.parent-count"
    return True, None
