"""LR-sorting: verify that every non-path edge of a directed Hamiltonian
path instance points rightward, with O(log log n) labels.

Structure of the five rounds (P/V/P/V/P):
  round 1 (P): block indices, the two block bitstrings (claimed consecutive),
               the split-node marks, inner/outer arc flags, multiplicities.
  round 2 (V): global fingerprint points r, r'; per-block nonces r_b.
  round 3 (P): echoes of the coins, adjacent-block equality aggregates,
               prefix fingerprints phi, and the (index, phi) commitments
               on outer arcs.
  round 4 (V): per-block multiset-equality points z1, z0.
  round 5 (P): echoes of z and the two verification-run aggregates.

Blocks hold ceil(log n) consecutive path positions (the rightmost up to
twice that minus one); all fields are O(log log n) bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .graphs import Graph, Instance, Witness
from .primitives import PrimeContext, encode_pair
from .runtime import CheckSink, Protocol, Prover, Transcript
from .spaces import Arc, PathSpace, Space


def block_partition(L: int, B: int) -> list[int]:
    """Block sizes: full blocks of B, remainder absorbed by the last one."""
    if L < 1:
        return []
    nb = max(1, L // B)
    sizes = [B] * (nb - 1)
    sizes.append(L - B * (nb - 1))
    return sizes


def position_layout(L: int, B: int) -> tuple[list[int], list[int]]:
    """Per position: (block ordinal, 1-based index within block)."""
    sizes = block_partition(L, B)
    block = []
    idx = []
    for b, s in enumerate(sizes):
        for k in range(s):
            block.append(b)
            idx.append(k + 1)
    return block, idx


def bit_of(x: int, i: int, width: int) -> int:
    """i-th most significant bit (1-based) of x in the given width."""
    return (x >> (width - i)) & 1


def distinguishing_index(x: int, y: int, width: int) -> int:
    """Most significant position where x < y differ (x has 0, y has 1)."""
    if x >= y:
        raise ValueError(f"no distinguishing index: {x} >= {y}")
    for i in range(1, width + 1):
        bx, by = bit_of(x, i, width), bit_of(y, i, width)
        if bx != by:
            return i
    raise ValueError("equal inputs")


def least_significant_zero(x: int, width: int) -> int:
    """1-based MSB-first index of the least significant 0-bit of x."""
    for i in range(width, 0, -1):
        if bit_of(x, i, width) == 0:
            return i
    raise ValueError(f"{x} has no zero bit in width {width}")


CHECKS = (
    "lr.path.index",
    "lr.block.increment",
    "lr.block.adjacent",
    "lr.inner.order",
    "lr.inner.blockid",
    "lr.outer.prefix",
    "lr.outer.validation",
    "lr.arc.classified",
)


@dataclass
class LRLayout:
    """Honest-side geometry of one LR run."""

    L: int
    B: int
    nblocks: int
    block: list[int]
    idx: list[int]
    starts: list[int]

    @staticmethod
    def build(L: int, B: int) -> "LRLayout":
        block, idx = position_layout(L, B)
        starts = [i for i in range(L) if idx[i] == 1]
        return LRLayout(L, B, (block[-1] + 1) if L else 0, block, idx, starts)

    def block_positions(self, b: int) -> range:
        start = self.starts[b]
        end = self.starts[b + 1] if b + 1 < len(self.starts) else self.L
        return range(start, end)



@dataclass
class LRClaims:
    """What the prover asserts: the honest plan is the identity; cheating
    strategies are modified plans (mirroring the paper's soundness cases)."""

    x1: list[int]
    x2: list[int]
    idx: list[int]
    arc_dir: dict = None
    arc_inner: dict = None
    arc_commit: dict = None
    omit_arcs: set = None
    omit_commits: set = None
    phi_patch: dict = None

    def __post_init__(self):
        self.arc_dir = self.arc_dir or {}
        self.arc_inner = self.arc_inner or {}
        self.arc_commit = self.arc_commit or {}
        self.omit_arcs = self.omit_arcs or set()
        self.omit_commits = self.omit_commits or set()
        self.phi_patch = self.phi_patch or {}

    @staticmethod
    def honest(layout: "LRLayout") -> "LRClaims":
        nb = layout.nblocks
        return LRClaims(x1=list(range(nb)), x2=list(range(1, nb + 1)),
                        idx=list(layout.idx))


class LRCore:
    """One LR-sorting execution over a space; honest emit and decide."""

    def __init__(self, space: Space, pc: PrimeContext,
                 claims: "LRClaims | None" = None):
        self.space = space
        self.pc = pc
        self.B = pc.log_n
        self.layout = LRLayout.build(space.L, self.B)
        self.claims = claims or LRClaims.honest(self.layout)
        self.multi = self.layout.nblocks >= 2
        self.bits_i = max(1, (2 * self.B - 1).bit_length())
        self.bits_p = max(1, (pc.p - 1).bit_length())
        self.bits_pp = max(1, (pc.p_prime - 1).bit_length())
        self.bits_m = max(1, (2 * self.B).bit_length())
        self.bits_I = max(1, self.B.bit_length())

    # ---------------------------------------------------------------- honest

    def _true_dir(self, tr: Transcript, ai: int) -> int:
        arc = self.space.arcs[ai]
        if arc.forced_dir:
            return arc.forced_dir
        d = self.claims.arc_dir.get(ai)
        if d is not None:
            return d
        d = self.space.get_a(tr, ai, "dir")
        if d is not None:
            return 1 if d == 1 else -1
        return 1 if arc.end0 < arc.end1 else -1

    def _arc_th(self, tr: Transcript, ai: int) -> tuple[int, int]:
        arc = self.space.arcs[ai]
        d = self._true_dir(tr, ai)
        return (arc.end0, arc.end1) if d == 1 else (arc.end1, arc.end0)

    def _commit_plan(self, tr: Transcript, ai: int):
        """Claimed (I, J-mode) for an outer arc; J resolved in round 3."""
        cl = self.claims
        if ai in cl.arc_commit:
            return cl.arc_commit[ai]
        tail, head = self._arc_th(tr, ai)
        bt, bh = self.layout.block[tail], self.layout.block[head]
        xt, xh = cl.x1[bt], cl.x1[bh]
        B = self.B
        if xt < xh:
            return distinguishing_index(xt, xh, B), "auto"
        if xh < xt:  # best effort on a reversed arc
            return distinguishing_index(xh, xt, B), "auto"
        return 1, "auto"

    def emit_round1(self, tr: Transcript, rnd: int) -> None:
        sp, lay, cl = self.space, self.layout, self.claims
        B = self.B
        for pos in range(lay.L):
            sp.set_p(tr, rnd, pos, "i", cl.idx[pos], self.bits_i)
        if self.multi:
            for b in range(lay.nblocks):
                x1, x2 = cl.x1[b], cl.x2[b]
                if x2 == x1 + 1:
                    jb = least_significant_zero(x1, B)
                else:
                    jb = None  # inconsistent claim: mark everything left
                for pos in lay.block_positions(b):
                    i = cl.idx[pos]
                    if i <= B:
                        sp.set_p(tr, rnd, pos, "b1", bit_of(x1, i, B), 1)
                        sp.set_p(tr, rnd, pos, "b2", bit_of(x2, i, B), 1)
                    mark = 0 if jb is None else (0 if i < jb else (1 if i == jb else 2))
                    sp.set_p(tr, rnd, pos, "vb", mark, 2)
        # arc classification + multiplicities (precomputed, round 1)
        t1: dict[tuple[int, int], set[int]] = {}
        t0: dict[tuple[int, int], set[int]] = {}
        for ai in range(len(sp.arcs)):
            if ai in cl.omit_arcs or sp.arcs[ai].lr_exempt:
                continue
            tail, head = self._arc_th(tr, ai)
            if ai in cl.arc_inner:
                inner = cl.arc_inner[ai]
            else:
                inner = 1 if lay.block[tail] == lay.block[head] else 0
            sp.set_a(tr, rnd, ai, "inner", inner, 1)
            if inner or not self.multi:
                continue
            plan = self._commit_plan(tr, ai)
            if plan is None:
                continue
            I = plan[0]
            t1.setdefault((lay.block[head], I), set()).add(head)
            t0.setdefault((lay.block[tail], I), set()).add(tail)
        if self.multi:
            cap = 2 * B - 1
            for pos in range(lay.L):
                b, i = lay.block[pos], cl.idx[pos]
                if i > B:
                    continue
                if bit_of(cl.x1[b], i, B) == 1:
                    sp.set_p(tr, rnd, pos, "m1",
                             min(cap, len(t1.get((b, i), ()))), self.bits_m)
                else:
                    sp.set_p(tr, rnd, pos, "m0",
                             min(cap, len(t0.get((b, i), ()))), self.bits_m)

    def draw_coins(self, tr: Transcript, rnd: int) -> None:
        """Samplers come from the claimed round-1 indices (public coins)."""
        sp = self.space
        p, pp = self.pc.p, self.pc.p_prime
        starts = [pos for pos in range(sp.L)
                  if sp.get_p(tr, pos, "i") == 1 or pos == 0]
        claimed_multi = any(pos > 0 for pos in starts)
        if rnd == 1:
            for pos in starts:
                sp.draw(tr, rnd, pos, "rb", p)
            if claimed_multi:
                sp.draw(tr, rnd, 0, "r", p)
                sp.draw(tr, rnd, 0, "rp", p)
        elif rnd == 3 and claimed_multi:
            for pos in starts:
                sp.draw(tr, rnd, pos, "z1", pp)
                sp.draw(tr, rnd, pos, "z0", pp)

    def emit_round3(self, tr: Transcript, rnd: int) -> None:
        sp, lay, cl, p = self.space, self.layout, self.claims, self.pc.p
        B = self.B
        for b in range(lay.nblocks):
            rb = sp.coin(tr, lay.starts[b], "rb")
            for pos in lay.block_positions(b):
                sp.set_p(tr, rnd, pos, "rb", rb, self.bits_p)
        if not self.multi:
            return
        r = sp.coin(tr, 0, "r")
        rp = sp.coin(tr, 0, "rp")
        for pos in range(lay.L):
            sp.set_p(tr, rnd, pos, "r", r, self.bits_p)
            sp.set_p(tr, rnd, pos, "rp", rp, self.bits_p)
        # adjacent-block equality aggregates (suffix products over each pair)
        nb = lay.nblocks
        for t in range(nb - 1):
            left_ps = list(lay.block_positions(t))
            right_ps = list(lay.block_positions(t + 1))
            a1 = a2 = 1
            vals: dict[int, tuple[int, int]] = {}
            for pos in reversed(left_ps + right_ps):
                b, i = lay.block[pos], cl.idx[pos]
                if b == t and i <= B and bit_of(cl.x2[t], i, B) == 1:
                    a1 = a1 * ((i - r) % p) % p
                if b == t + 1 and i <= B and bit_of(cl.x1[t + 1], i, B) == 1:
                    a2 = a2 * ((i - r) % p) % p
                vals[pos] = (a1, a2)
            for pos in left_ps:
                sp.set_p(tr, rnd, pos, "eRa1", vals[pos][0], self.bits_p)
                sp.set_p(tr, rnd, pos, "eRa2", vals[pos][1], self.bits_p)
            for pos in right_ps:
                sp.set_p(tr, rnd, pos, "eLa1", vals[pos][0], self.bits_p)
                sp.set_p(tr, rnd, pos, "eLa2", vals[pos][1], self.bits_p)
        # prefix fingerprints of the claimed pos(b) at r'
        self._phi = {}
        for b in range(lay.nblocks):
            acc = 1
            for pos in lay.block_positions(b):
                i = cl.idx[pos]
                if i <= B and bit_of(cl.x1[b], i, B) == 1:
                    acc = acc * ((i - rp) % p) % p
                if pos in cl.phi_patch:
                    acc = cl.phi_patch[pos]
                self._phi[pos] = acc
        for pos in range(lay.L):
            sp.set_p(tr, rnd, pos, "phi", self._phi[pos], self.bits_p)
        # outer-arc commitments; J values come from the block's phi chain so
        # the committed pairs land in the claimed D-sets
        pos_at_idx: dict[tuple[int, int], int] = {}
        for pos in range(lay.L):
            pos_at_idx[(lay.block[pos], cl.idx[pos])] = pos
        for ai in range(len(sp.arcs)):
            if ai in cl.omit_arcs or ai in cl.omit_commits or sp.arcs[ai].lr_exempt:
                continue
            tail, head = self._arc_th(tr, ai)
            bt, bh = lay.block[tail], lay.block[head]
            inner = cl.arc_inner.get(ai, 1 if bt == bh else 0)
            if inner:
                continue
            plan = self._commit_plan(tr, ai)
            if plan is None:
                continue
            I, jspec = plan
            if jspec == "auto":
                if I == 1:
                    J = 1
                else:
                    ip = pos_at_idx.get((bt, I))
                    J = self._phi[ip - 1] if ip is not None and ip > 0 else 1
            else:
                J = jspec
            sp.set_a(tr, rnd, ai, "I", I, self.bits_I)
            sp.set_a(tr, rnd, ai, "J", J, self.bits_p)

    def emit_round5(self, tr: Transcript, rnd: int) -> None:
        if not self.multi:
            return
        sp, lay, pp = self.space, self.layout, self.pc.p_prime
        B, p, cl = self.B, self.pc.p, self.claims
        c_sets = self._commit_sets(tr)
        for b in range(lay.nblocks):
            ps = list(lay.block_positions(b))
            z1 = sp.coin(tr, ps[0], "z1")
            z0 = sp.coin(tr, ps[0], "z0")
            agg = {"v1a1": 1, "v1a2": 1, "v0a1": 1, "v0a2": 1}
            vals: dict[int, dict[str, int]] = {}
            for pos in reversed(ps):
                i = cl.idx[pos]
                c0, c1 = c_sets[pos]
                for I, J in c1:
                    agg["v1a1"] = agg["v1a1"] * ((encode_pair(I, J, p) - z1) % pp) % pp
                for I, J in c0:
                    agg["v0a1"] = agg["v0a1"] * ((encode_pair(I, J, p) - z0) % pp) % pp
                if i <= B:
                    phil = 1 if i == 1 else sp.get_p(tr, pos - 1, "phi")
                    enc = encode_pair(i, phil, p)
                    if bit_of(cl.x1[b], i, B) == 1:
                        m = sp.get_p(tr, pos, "m1") or 0
                        agg["v1a2"] = agg["v1a2"] * pow((enc - z1) % pp, m, pp) % pp
                    else:
                        m = sp.get_p(tr, pos, "m0") or 0
                        agg["v0a2"] = agg["v0a2"] * pow((enc - z0) % pp, m, pp) % pp
                vals[pos] = dict(agg)
            for pos in ps:
                sp.set_p(tr, rnd, pos, "z1", z1, self.bits_pp)
                sp.set_p(tr, rnd, pos, "z0", z0, self.bits_pp)
                for k, v in vals[pos].items():
                    sp.set_p(tr, rnd, pos, k, v, self.bits_pp)

    def _starts(self) -> list[int]:
        return [pos for pos in range(self.layout.L) if self.layout.idx[pos] == 1]

    def _commit_sets(self, tr: Transcript) -> list[tuple[set, set]]:
        """Claimed (C0, C1) pair sets per position, from the arc labels."""
        sp = self.space
        out: list[tuple[set, set]] = [(set(), set()) for _ in range(sp.L)]
        for ai, arc in enumerate(sp.arcs):
            if arc.lr_exempt or sp.get_a(tr, ai, "inner") != 0:
                continue
            d = sp.claimed_dir(tr, ai)
            if d is None:
                continue
            I = sp.get_a(tr, ai, "I")
            J = sp.get_a(tr, ai, "J")
            if I is None or J is None:
                continue
            tail, head = (arc.end0, arc.end1) if d == 1 else (arc.end1, arc.end0)
            out[tail][0].add((I, J))
            out[head][1].add((I, J))
        return out

    # ---------------------------------------------------------------- decide

    def decide(self, tr: Transcript, sink: CheckSink, eval_node,
               arc_eval=None) -> None:
        arc_eval = arc_eval or eval_node
        sp, B = self.space, self.B
        p, pp = self.pc.p, self.pc.p_prime
        L = sp.L
        rd = {name: sp.reader(tr, name) for name in (
            "i", "vb", "b1", "b2", "r", "rp", "rb", "phi",
            "eRa1", "eRa2", "eLa1", "eLa2",
            "z1", "z0", "v1a1", "v1a2", "v0a1", "v0a2", "m1", "m0")}

        def g(pos, name):
            return rd[name](pos)

        r_vb, r_b1, r_b2 = rd["vb"], rd["b1"], rd["b2"]
        idxs = [rd["i"](pos) for pos in range(L)]
        hm = [r_vb(pos) is not None for pos in range(L)]

        # -- path indices ----------------------------------------------------
        for pos in range(L):
            v = eval_node(pos)
            i = idxs[pos]
            if i is None or not (1 <= i <= 2 * B - 1):
                sink.fail(v, "lr.path.index.range")
                continue
            if pos == 0:
                sink.check(v, "lr.path.index.start", i == 1)
            else:
                li = idxs[pos - 1]
                ok = li is not None and (i == li + 1 or (i == 1 and li == B))
                sink.check(v, "lr.path.index.chain", ok)
        if any(i is None for i in idxs):
            for pos in range(L):
                if idxs[pos] is None:
                    sink.fail(eval_node(pos), "lr.structure.missing-index")
            return  # structure too broken to evaluate the rest

        block_start = [idxs[pos] == 1 for pos in range(L)]
        block_end = [pos == L - 1 or idxs[pos + 1] == 1 for pos in range(L)]
        claimed_multi = any(block_start[pos] for pos in range(1, L))

        # -- increment structure ----------------------------------------------
        for pos in range(L):
            v = eval_node(pos)
            if pos > 0:
                sink.check(v, "lr.block.increment.presence", hm[pos] == hm[pos - 1])
            if pos > 0 and block_start[pos]:
                sink.check(v, "lr.block.increment.presence", hm[pos])
            if not hm[pos]:
                continue
            i = idxs[pos]
            mark = g(pos, "vb")
            b1, b2 = g(pos, "b1"), g(pos, "b2")
            if mark not in (0, 1, 2):
                sink.fail(v, "lr.block.increment.mark")
                continue
            if i <= B and (b1 is None or b2 is None):
                sink.fail(v, "lr.block.increment.bits")
                continue
            if mark == 0:
                sink.check(v, "lr.block.increment.bits", i > B or b1 == b2)
                if not block_start[pos]:
                    sink.check(v, "lr.block.increment.flank", g(pos - 1, "vb") == 0)
            elif mark == 1:
                sink.check(v, "lr.block.increment.bits",
                           i > B or (b1 == 0 and b2 == 1))
                if not block_start[pos]:
                    sink.check(v, "lr.block.increment.flank", g(pos - 1, "vb") == 0)
                if not block_end[pos]:
                    sink.check(v, "lr.block.increment.flank", g(pos + 1, "vb") == 2)
            else:
                sink.check(v, "lr.block.increment.bits",
                           i > B or (b1 == 1 and b2 == 0))
                if not block_end[pos]:
                    sink.check(v, "lr.block.increment.flank", g(pos + 1, "vb") == 2)
            if block_start[pos]:
                sink.check(v, "lr.block.increment.start", mark != 2)
            if i == B:
                sink.check(v, "lr.block.increment.split-exists", mark != 0)

        # -- adjacent-block equality ------------------------------------------
        if claimed_multi:
            for pos in range(L):
                v = eval_node(pos)
                r_here = g(pos, "r")
                if r_here is None:
                    sink.fail(v, "lr.block.adjacent.echo")
                elif pos == 0:
                    sink.check(v, "lr.block.adjacent.echo",
                               r_here == sp.coin(tr, 0, "r"))
                else:
                    sink.check(v, "lr.block.adjacent.echo", r_here == g(pos - 1, "r"))
            for pos in range(L):
                v = eval_node(pos)
                i = idxs[pos]
                has_eR = g(pos, "eRa1") is not None
                has_eL = g(pos, "eLa1") is not None
                if not block_start[pos] and pos > 0:
                    sink.check(v, "lr.block.adjacent.presence",
                               has_eR == (g(pos - 1, "eRa1") is not None))
                    sink.check(v, "lr.block.adjacent.presence",
                               has_eL == (g(pos - 1, "eLa1") is not None))
                if block_end[pos]:
                    expect = pos < L - 1
                    sink.check(v, "lr.block.adjacent.presence", has_eR == expect)
                if block_start[pos]:
                    sink.check(v, "lr.block.adjacent.presence", has_eL == (pos > 0))
                r_here = g(pos, "r")
                if r_here is None:
                    continue
                b1 = g(pos, "b1")
                b2 = g(pos, "b2")
                if has_eR:
                    f1 = (i - r_here) % p if (i <= B and b2 == 1) else 1
                    for k, f in (("eRa1", f1), ("eRa2", 1)):
                        mine = g(pos, k)
                        if block_end[pos]:
                            nxt = 1 if pos == L - 1 else g(pos + 1, "eLa" + k[-1])
                        else:
                            nxt = g(pos + 1, k)
                        ok = mine is not None and nxt is not None and \
                            mine == f * nxt % p
                        sink.check(v, "lr.block.adjacent.agg", ok)
                    if block_start[pos]:
                        sink.check(v, "lr.block.adjacent.rooteq",
                                   g(pos, "eRa1") == g(pos, "eRa2"))
                if has_eL:
                    f2 = (i - r_here) % p if (i <= B and b1 == 1) else 1
                    for k, f in (("eLa1", 1), ("eLa2", f2)):
                        mine = g(pos, k)
                        if block_end[pos]:
                            ok = mine == f % p
                        else:
                            nxt = g(pos + 1, k)
                            ok = mine is not None and nxt is not None and \
                                mine == f * nxt % p
                        sink.check(v, "lr.block.adjacent.agg", ok)

        # -- prefix fingerprints ----------------------------------------------
        if claimed_multi:
            for pos in range(L):
                v = eval_node(pos)
                rp_here = g(pos, "rp")
                if rp_here is None:
                    sink.fail(v, "lr.outer.prefix.echo")
                    continue
                if pos == 0:
                    sink.check(v, "lr.outer.prefix.echo",
                               rp_here == sp.coin(tr, 0, "rp"))
                else:
                    sink.check(v, "lr.outer.prefix.echo", rp_here == g(pos - 1, "rp"))
                i = idxs[pos]
                f = (i - rp_here) % p if (i <= B and g(pos, "b1") == 1) else 1
                mine = g(pos, "phi")
                prev = 1 if block_start[pos] else g(pos - 1, "phi")
                ok = mine is not None and prev is not None and mine == f * prev % p
                sink.check(v, "lr.outer.prefix.chain", ok)

        # -- block nonces -------------------------------------------------------
        for pos in range(L):
            v = eval_node(pos)
            rb = g(pos, "rb")
            if rb is None:
                sink.fail(v, "lr.inner.blockid.echo")
                continue
            if block_start[pos]:
                sink.check(v, "lr.inner.blockid.echo", rb == sp.coin(tr, pos, "rb"))
            else:
                sink.check(v, "lr.inner.blockid.chain", rb == g(pos - 1, "rb"))

        # -- arcs ---------------------------------------------------------------
        c_sets = self._commit_sets(tr)
        for ai, arc in enumerate(sp.arcs):
            if arc.lr_exempt:
                continue
            d = sp.claimed_dir(tr, ai)
            inner = sp.get_a(tr, ai, "inner")
            for pos in (arc.end0, arc.end1):
                v = arc_eval(pos)
                if d is None or inner not in (0, 1):
                    sink.fail(v, "lr.arc.classified.flag")
                    continue
                tail, head = (arc.end0, arc.end1) if d == 1 else (arc.end1, arc.end0)
                if inner == 1:
                    sink.check(v, "lr.inner.order",
                               idxs[tail] is not None and idxs[head] is not None
                               and idxs[tail] < idxs[head])
                    sink.check(v, "lr.inner.blockid.match",
                               g(tail, "rb") is not None
                               and g(tail, "rb") == g(head, "rb"))
                else:
                    I = sp.get_a(tr, ai, "I")
                    J = sp.get_a(tr, ai, "J")
                    sink.check(v, "lr.arc.classified.commit",
                               I is not None and J is not None and 1 <= I <= B)

        # -- outer-block validation ----------------------------------------------
        for pos in range(L):
            v = arc_eval(pos)
            c0, c1 = c_sets[pos]
            i0 = {I for I, _ in c0}
            i1 = {I for I, _ in c1}
            sink.check(v, "lr.outer.validation.conflict", not (i0 & i1))
            sink.check(v, "lr.outer.validation.conflict",
                       len(i0) == len(c0) and len(i1) == len(c1))
            if (c0 or c1) and not claimed_multi:
                sink.fail(v, "lr.outer.validation.scope")
        if claimed_multi:
            for pos in range(L):
                v = eval_node(pos)
                i = idxs[pos]
                z1 = g(pos, "z1")
                z0 = g(pos, "z0")
                if z1 is None or z0 is None:
                    sink.fail(v, "lr.outer.validation.echo")
                    continue
                if block_start[pos]:
                    sink.check(v, "lr.outer.validation.echo",
                               z1 == sp.coin(tr, pos, "z1")
                               and z0 == sp.coin(tr, pos, "z0"))
                else:
                    sink.check(v, "lr.outer.validation.echo",
                               z1 == g(pos - 1, "z1") and z0 == g(pos - 1, "z0"))
                c0, c1 = c_sets[pos]
                f_c1 = f_c0 = 1
                for I, J in c1:
                    f_c1 = f_c1 * ((encode_pair(I, J, p) - z1) % pp) % pp
                for I, J in c0:
                    f_c0 = f_c0 * ((encode_pair(I, J, p) - z0) % pp) % pp
                f_d1 = f_d0 = 1
                if i <= B:
                    phil = 1 if block_start[pos] else g(pos - 1, "phi")
                    if phil is not None:
                        enc = encode_pair(i, phil, p)
                        if g(pos, "b1") == 1:
                            m = g(pos, "m1")
                            if m is not None:
                                f_d1 = pow((enc - z1) % pp, m, pp)
                        else:
                            m = g(pos, "m0")
                            if m is not None:
                                f_d0 = pow((enc - z0) % pp, m, pp)
                for k, f in (("v1a1", f_c1), ("v1a2", f_d1),
                             ("v0a1", f_c0), ("v0a2", f_d0)):
                    mine = g(pos, k)
                    if block_end[pos]:
                        ok = mine == f % pp
                    else:
                        nxt = g(pos + 1, k)
                        ok = mine is not None and nxt is not None and \
                            mine == f * nxt % pp
                    sink.check(v, "lr.outer.validation.agg", ok)
                if block_start[pos]:
                    sink.check(v, "lr.outer.validation.rooteq",
                               g(pos, "v1a1") == g(pos, "v1a2"))
                    sink.check(v, "lr.outer.validation.rooteq",
                               g(pos, "v0a1") == g(pos, "v0a2"))


# ---------------------------------------------------------------------------
# standalone protocol


def lr_space(inst: Instance, prefix: str = "lr.") -> PathSpace:
    g = inst.graph
    path = inst.witness.ham_path
    pos_of = {v: i for i, v in enumerate(path)}
    arcs = []
    for u, v in g.edges:
        pu, pv = pos_of[u], pos_of[v]
        if abs(pu - pv) == 1:
            continue  # path edges are ordered by assumption
        arcs.append(Arc(pu, pv, g.edge_id(u, v), forced_dir=1))
    return PathSpace(g, path, arcs, prefix)


class LRHonestProver(Prover):
    is_honest = True

    def __init__(self, inst: Instance, pc: Optional[PrimeContext] = None):
        self.space = lr_space(inst)
        self.pc = pc or PrimeContext.for_size(inst.graph.n)
        self.core = LRCore(self.space, self.pc)

    def emit(self, rnd: int, inst: Instance, tr: Transcript) -> None:
        if rnd == 0:
            self.core.emit_round1(tr, rnd)
        elif rnd == 2:
            self.core.emit_round3(tr, rnd)
        elif rnd == 4:
            self.core.emit_round5(tr, rnd)


class LRSortingProtocol(Protocol):
    """5-round LR-sorting with native edge labels."""

    name = "lr-sorting"
    check_families = CHECKS

    def __init__(self, c: int = 3):
        self.c = c

    def validate_instance(self, inst: Instance) -> None:
        if not inst.graph.directed:
            raise ValueError("LR-sorting expects a directed instance")
        if inst.witness.ham_path is None:
            raise ValueError("LR-sorting expects a marked Hamiltonian path")
        path = inst.witness.ham_path
        g = inst.graph
        if sorted(path) != list(range(g.n)):
            raise ValueError("marked path does not cover all nodes")
        for a, b in zip(path, path[1:]):
            if not g.has_edge(a, b):
                raise ValueError("marked path uses missing edges")

    def _ctx(self, inst: Instance) -> tuple[PathSpace, LRCore]:
        space = lr_space(inst)
        return space, LRCore(space, PrimeContext.for_size(inst.graph.n, self.c))

    def make_honest(self, inst: Instance) -> Prover:
        return LRHonestProver(inst, PrimeContext.for_size(inst.graph.n, self.c))

    def draw_coins(self, inst: Instance, rnd: int, tr: Transcript) -> None:
        space, core = self._ctx(inst)
        core.draw_coins(tr, rnd)

    def decide(self, inst: Instance, tr: Transcript, sink: CheckSink) -> None:
        space, core = self._ctx(inst)
        core.decide(tr, sink, lambda pos: space.node_of(pos))
