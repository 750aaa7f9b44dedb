"""Executable lower-bound construction for one-round proofs.

Builds the family of biconnected outerplanar yes-instances G_{a,b} (two
ID-sorted paths joined by three rungs), searches a supplied labeler's
outputs for a 3x3 collision rectangle, and glues the colliding instances
into a non-planar G' (K_{3,3} minor after contracting the six paths) in
which every node's local view equals its view in one of the yes-instances.

Deterministic labelers only; "no collision found" is a valid report at a
given size, never a refutation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .graphs import Graph, Instance, Witness
from .oracles import is_biconnected_outerplanar_bf


class LBError(ValueError):
    pass


def q_positions(n: int) -> tuple[int, int, int]:
    return 1, n // 4, n // 2


def build_yes_instance(a_ids: Sequence[int], b_ids: Sequence[int]) -> Instance:
    """Two disjoint ID-sorted paths with rungs at q1, q2, q3."""
    if len(a_ids) != len(b_ids):
        raise LBError("ID pools must have equal size")
    half = len(a_ids)
    n = 2 * half
    q1, q2, q3 = q_positions(n)
    ids = sorted(a_ids) + sorted(b_ids)
    edges = [(i, i + 1) for i in range(half - 1)]
    edges += [(half + i, half + i + 1) for i in range(half - 1)]
    for q in (q1, q2, q3):
        edges.append((q - 1, half + q - 1))
    g = Graph(n, edges)
    w = Witness()
    w.extra["ids"] = ids
    w.extra["half"] = half
    return Instance(g, w)


# ---------------------------------------------------------------------------
# labelers


def make_labeler(spec: str) -> Callable[[Instance], list[int]]:
    """Deterministic labelers: node label from the instance and node ID."""
    if spec == "constant":
        return lambda inst: [0] * inst.graph.n
    if spec.startswith("idmod:"):
        k = int(spec.split(":", 1)[1])
        return lambda inst: [i % k for i in inst.witness.extra["ids"]]
    if spec == "full-id":
        return lambda inst: list(inst.witness.extra["ids"])
    raise LBError(f"unknown labeler {spec!r}")


def probe_positions(n: int) -> list[int]:
    """Rung endpoints and their path neighbors (indices into the instance).

    The collision tuple covers the rung endpoints plus their path
    neighbors so the glued instance matches views exactly, not just at the
    rungs."""
    half = n // 2
    qs = q_positions(n)
    out = []
    for side in (0, half):
        for q in qs:
            i = side + q - 1
            out.append(i)
            if i - 1 >= side:
                out.append(i - 1)
            if i + 1 < side + half:
                out.append(i + 1)
    return sorted(set(out))


def label_tuple(labeler, a_ids, b_ids) -> tuple:
    inst = build_yes_instance(a_ids, b_ids)
    labels = labeler(inst)
    return tuple(labels[i] for i in probe_positions(inst.graph.n))


@dataclass
class CollisionTriple:
    rows: tuple[int, int, int]
    cols: tuple[int, int, int]
    value: tuple


def collision_search(labeler, pools_a: list[list[int]],
                     pools_b: list[list[int]]) -> Optional[CollisionTriple]:
    """Exhaustive search for a constant 3x3 sub-grid of label tuples."""
    cells: dict[tuple, dict[int, set[int]]] = {}
    for i, a in enumerate(pools_a):
        for j, b in enumerate(pools_b):
            t = label_tuple(labeler, a, b)
            cells.setdefault(t, {}).setdefault(i, set()).add(j)
    for value, rows in cells.items():
        full = [i for i, js in rows.items() if len(js) >= 3]
        if len(full) < 3:
            continue
        for r3 in itertools.combinations(full, 3):
            common = rows[r3[0]] & rows[r3[1]] & rows[r3[2]]
            if len(common) >= 3:
                cols = tuple(sorted(common)[:3])
                return CollisionTriple(tuple(r3), cols, value)
    return None


@dataclass
class GlueReport:
    instance: Instance
    k33_minor_ok: bool
    view_matches: int
    view_total: int
    union_bound: float

    @property
    def all_views_match(self) -> bool:
        return self.view_matches == self.view_total


def _views(g: Graph, ids: Sequence[int], labels: Sequence[int]):
    out = []
    for v in range(g.n):
        nbrs = sorted((ids[u], labels[u]) for u in g.adjacency[v])
        out.append((ids[v], labels[v], tuple(nbrs)))
    return out


def glue_no_instance(labeler, pools_a, pools_b, triple: CollisionTriple,
                     eps_c: float = 0.1) -> GlueReport:
    """Builds G' from the collision triple and certifies the construction."""
    rows, cols = triple.rows, triple.cols
    a_sets = [sorted(pools_a[i]) for i in rows]
    b_sets = [sorted(pools_b[j]) for j in cols]
    half = len(a_sets[0])
    n = 2 * half
    qs = q_positions(n)

    # G': six paths; path k: a-paths 0..2, b-paths 3..5
    def base(k: int) -> int:
        return k * half

    edges = []
    for k in range(6):
        edges += [(base(k) + i, base(k) + i + 1) for i in range(half - 1)]
    for i in range(3):
        for j in range(3):
            m = (i + j) % 3
            qj = qs[j]
            edges.append((base(i) + qj - 1, base(3 + m) + qj - 1))
    gp = Graph(6 * half, edges)
    ids = []
    for k in range(3):
        ids += a_sets[k]
    for k in range(3):
        ids += b_sets[k]

    # labels: every path uses the labels of its own diagonal yes-instance
    labels = [0] * gp.n
    diag_labels = []
    for k in range(3):
        inst = build_yes_instance(a_sets[k], b_sets[k])
        diag_labels.append(labeler(inst))
    for k in range(3):
        for i in range(half):
            labels[base(k) + i] = diag_labels[k][i]
            labels[base(3 + k) + i] = diag_labels[k][half + i]

    # K33 minor: contract each path, expect complete bipartite connections
    minor_ok = True
    for i in range(3):
        targets = set()
        for v in range(base(i), base(i) + half):
            for u in gp.adjacency[v]:
                if u >= base(3):
                    targets.add((u - base(3)) // half)
        if targets != {0, 1, 2}:
            minor_ok = False

    # local view equality against the matching yes-instances
    gp_views = _views(gp, ids, labels)
    matches = 0
    yes_views: dict[tuple[int, int], list] = {}
    for i in range(3):
        for j in range(3):
            inst = build_yes_instance(a_sets[i], b_sets[j])
            yes_views[(i, j)] = _views(
                inst.graph, inst.witness.extra["ids"], labeler(inst))
    for k in range(6):
        for pos in range(half):
            v = base(k) + pos
            if k < 3:
                i = k
                j = None
                for jj, qj in enumerate(qs):
                    if pos == qj - 1:
                        j = (i + jj) % 3
                if j is None:
                    j = i  # non-probe: the diagonal instance
                ref = yes_views[(i, j)][pos]
            else:
                m = k - 3
                i = m
                for jj, qj in enumerate(qs):
                    if pos == qj - 1:
                        i = (m - jj) % 3
                ref = yes_views[(i, m)][half + pos]
            if gp_views[v] == ref:
                matches += 1
    w = Witness()
    w.extra["ids"] = ids
    w.extra["labels"] = labels
    return GlueReport(
        instance=Instance(gp, w),
        k33_minor_ok=minor_ok,
        view_matches=matches,
        view_total=gp.n,
        union_bound=9 * eps_c,
    )


def default_pools(n: int, seed: int = 0) -> tuple[list[list[int]], list[list[int]]]:
    """Partition [n^2] into 2n disjoint ID pools of size n/2."""
    if n % 4:
        raise LBError("n must be divisible by 4")
    half = n // 2
    ids = list(range(1, n * n + 1))
    pools = [ids[k * half:(k + 1) * half] for k in range(2 * n)]
    return pools[:n], pools[n:]


def run_demo(n: int, labeler_spec: str, eps_c: float = 0.1):
    """Full demonstration; returns (triple or None, report or None)."""
    pools_a, pools_b = default_pools(n)
    labeler = make_labeler(labeler_spec)
    triple = collision_search(labeler, pools_a, pools_b)
    if triple is None:
        return None, None
    report = glue_no_instance(labeler, pools_a, pools_b, triple, eps_c)
    return triple, report
