"""Spanning-tree verification fragment (pluggable).

Two implementations behind one interface:
  - "reference": deterministic root-id + distance labels, exact. O(log n)
    bits; excluded from headline proof-size accounting via its own field
    prefix.
  - "contract": a 3-round randomized scheme with Theta(reps) label bits:
    per-node nonces anchor a root token (collision 2^-reps), and per
    repetition the parent depths are checked modulo a coin-chosen small
    prime, so parent-pointer cycles survive all repetitions with
    probability 2^-Theta(reps). Matches the interface of the black-box
    scheme the protocols rely on (3 rounds, perfect completeness,
    amplifiable constant-size labels).

The claimed tree is always the decoded advice forest: each node knows its
claimed parent and children ports.
"""

from __future__ import annotations

from typing import Optional, Sequence

from .graphs import Graph
from .runtime import CheckSink, Transcript

MOD_POOL = (2, 3, 5, 7)


class STFragment:
    def __init__(self, g: Graph, prefix: str, scheme: str, reps: int, family: str):
        if scheme not in ("reference", "contract"):
            raise ValueError(f"unknown spanning-tree scheme {scheme!r}")
        self.g = g
        self.prefix = prefix
        self.scheme = scheme
        self.reps = max(1, reps)
        self.family = family
        self.bits_id = max(1, (g.n - 1).bit_length())

    # ------------------------------------------------------------- prover

    def emit_labels(self, tr: Transcript, rnd: int,
                    parent: dict[int, Optional[int]]) -> None:
        """Reference labels go out in round 1; contract labels in round 3."""
        g, pre = self.g, self.prefix
        if self.scheme == "reference":
            if rnd != 0:
                return
            from .primitives import reference_st_labels

            rid, dist = reference_st_labels(g, parent)
            for v in range(g.n):
                tr.set_node(rnd, v, pre + "rid", rid[v], self.bits_id)
                tr.set_node(rnd, v, pre + "d", dist[v], self.bits_id)
            return
        if rnd != 2:
            return
        roots = [v for v in range(g.n) if parent.get(v) is None]
        depth = [0] * g.n
        children: dict[int, list[int]] = {v: [] for v in range(g.n)}
        for v in range(g.n):
            p = parent.get(v)
            if p is not None:
                children[p].append(v)
        for r in roots:
            stack = [(r, 0)]
            while stack:
                v, d = stack.pop()
                depth[v] = d
                for c in children[v]:
                    stack.append((c, d + 1))
        root = roots[0] if roots else 0
        token = tr.coins.get(pre + "t#", {}).get(root, 0)
        sel = [
            tr.coins.get(f"{pre}m{j}#", {}).get(root, 0)
            for j in range(self.reps)
        ]
        for v in range(g.n):
            tr.set_node(rnd, v, pre + "R", token, self.reps)
            for j, s in enumerate(sel):
                tr.set_node(rnd, v, f"{pre}m{j}", s, 2)
                tr.set_node(rnd, v, f"{pre}dm{j}", depth[v] % MOD_POOL[s], 3)

    # ------------------------------------------------------------- verifier

    def draw_coins(self, tr: Transcript, rnd: int,
                   claimed_parent: Sequence[Optional[int]]) -> None:
        if self.scheme != "contract" or rnd != 1:
            return
        for v in range(self.g.n):
            tr.draw_coin(rnd, v, self.prefix + "t#", 1 << self.reps)
        for v in range(self.g.n):
            if claimed_parent[v] is None:
                for j in range(self.reps):
                    tr.draw_coin(rnd, v, f"{self.prefix}m{j}#", len(MOD_POOL))

    def decide(self, tr: Transcript, sink: CheckSink,
               claimed_parent: Sequence[Optional[int]],
               claimed_children: Sequence[Sequence[int]]) -> None:
        g, pre, fam = self.g, self.prefix, self.family
        if self.scheme == "reference":
            rid_col = tr.node.get(pre + "rid", {})
            d_col = tr.node.get(pre + "d", {})
            for v in range(g.n):
                rid, d = rid_col.get(v), d_col.get(v)
                if rid is None or d is None or d >= g.n:
                    sink.fail(v, fam + ".missing")
                    continue
                tree_nbrs = set(claimed_children[v])
                if claimed_parent[v] is not None:
                    tree_nbrs.add(claimed_parent[v])
                parents = 0
                for u in g.adjacency[v]:
                    if rid_col.get(u) != rid:
                        sink.fail(v, fam + ".rid")
                        break
                    if u in tree_nbrs:
                        du = d_col.get(u)
                        if du is None or abs(du - d) != 1:
                            sink.fail(v, fam + ".dist")
                            break
                        if du == d - 1:
                            parents += 1
                else:
                    if d == 0:
                        sink.check(v, fam + ".root", rid == v and parents == 0
                                   and claimed_parent[v] is None)
                    else:
                        sink.check(v, fam + ".parent", parents == 1
                                   and claimed_parent[v] is not None)
            return
        # contract scheme: the root token rules out forests and the echoed
        # moduli catch parent-pointer cycles with constant probability each
        r_col = tr.node.get(pre + "R", {})
        t_col = tr.coins.get(pre + "t#", {})
        m_coin = [tr.coins.get(f"{pre}m{j}#", {}) for j in range(self.reps)]
        m_cols = [tr.node.get(f"{pre}m{j}", {}) for j in range(self.reps)]
        dm_cols = [tr.node.get(f"{pre}dm{j}", {}) for j in range(self.reps)]
        for v in range(g.n):
            R = r_col.get(v)
            if R is None:
                sink.fail(v, fam + ".missing")
                continue
            for u in g.adjacency[v]:
                if r_col.get(u) != R:
                    sink.fail(v, fam + ".token")
                    break
                for j in range(self.reps):
                    if m_cols[j].get(u) != m_cols[j].get(v):
                        sink.fail(v, fam + ".modulus")
                        break
            if claimed_parent[v] is None:
                sink.check(v, fam + ".root", R == t_col.get(v))
                for j in range(self.reps):
                    sink.check(v, fam + ".root",
                               m_cols[j].get(v) == m_coin[j].get(v))
                    sink.check(v, fam + ".depth", dm_cols[j].get(v) == 0)
            else:
                p = claimed_parent[v]
                for j in range(self.reps):
                    sel = m_cols[j].get(v)
                    dv, dp = dm_cols[j].get(v), dm_cols[j].get(p)
                    if sel is None or dv is None or dp is None or sel >= len(MOD_POOL):
                        sink.fail(v, fam + ".missing")
                        break
                    m = MOD_POOL[sel]
                    sink.check(v, fam + ".depth",
                               dv < m and dp < m and dv == (dp + 1) % m)
