"""Nesting verification: proper nesting of arcs above a committed path.

Per arc the prover claims an orientation and two longest-edge marks, then
(after per-node name sampling) assigns name/successor sub-labels; per node
an ``above`` value plus the two side bindings lname/rname (the name hanging
over the path edge as seen from each side). Each node searches orderings of
its side arcs satisfying the chain conditions; path neighbors compare their
facing bindings.

Check families: po.echo (coins vs echoed names), po.structure (marks,
ordering chains, bindings), po.pairing (facing bindings across path edges).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from typing import Optional

from .primitives import PrimeContext
from .runtime import CheckSink, Transcript
from .spaces import Space

BOT = 0  # encoded name of the virtual covering arc

CHECKS = ("po.echo", "po.structure", "po.pairing")


def name_bits(pc: PrimeContext, c: int = 3) -> int:
    return c * max(4, (pc.p_prime - 1).bit_length())


@dataclass
class NestingStructure:
    """Successor/above geometry of the arcs over the path (prover side).

    Computed by a stack sweep when the arcs are properly nested; falls back
    to a deterministic minimal-cover rule on crossing inputs (best effort:
    the verifier is expected to catch those).
    """

    succ: list[Optional[int]]            # per arc: successor arc index (None = virtual)
    above: list[Optional[int]]           # per pos: minimal strictly-covering arc
    longest_tail: list[bool]             # per arc: longest right edge of its tail
    longest_head: list[bool]             # per arc: longest left edge of its head
    spans: list[tuple[int, int]]


def build_structure(L: int, spans: list[tuple[int, int]]) -> NestingStructure:
    order = sorted(range(len(spans)), key=lambda i: (spans[i][0], -spans[i][1]))
    succ: list[Optional[int]] = [None] * len(spans)
    above: list[Optional[int]] = [None] * L
    stack: list[int] = []
    nested = True
    by_left: dict[int, list[int]] = {}
    by_right: dict[int, list[int]] = {}
    for i, (a, b) in enumerate(spans):
        by_left.setdefault(a, []).append(i)
        by_right.setdefault(b, []).append(i)
    for w in range(L):
        for i in sorted(by_right.get(w, []), key=lambda i: (-spans[i][0], -i)):
            if stack and stack[-1] == i:
                stack.pop()
            else:
                nested = False
                break
        if not nested:
            break
        above[w] = stack[-1] if stack else None
        for i in sorted(by_left.get(w, []), key=lambda i: -spans[i][1]):
            succ[i] = stack[-1] if stack else None
            stack.append(i)
    if not nested or stack:
        # crossing input: deterministic minimal-cover fallback
        def min_cover(a: int, b: int, skip: int) -> Optional[int]:
            best = None
            for j, (x, y) in enumerate(spans):
                if j == skip or not (x <= a and b <= y):
                    continue
                if best is None or (x, -y) > (spans[best][0], -spans[best][1]):
                    best = j
            return best

        succ = [min_cover(a, b, i) for i, (a, b) in enumerate(spans)]
        above = []
        for w in range(L):
            best = None
            for j, (x, y) in enumerate(spans):
                if x < w < y and (best is None
                                  or (x, -y) > (spans[best][0], -spans[best][1])):
                    best = j
            above.append(best)
    max_right: dict[int, int] = {}
    min_left: dict[int, int] = {}
    for a, b in spans:
        max_right[a] = max(max_right.get(a, -1), b)
        min_left[b] = min(min_left.get(b, L + 1), a)
    # parallel arcs (sibling ears sharing both endpoints) tie; only the
    # first takes the mark, the rest are covered by the parallel rule
    tail_pick: dict[tuple[int, int], int] = {}
    head_pick: dict[tuple[int, int], int] = {}
    for i, (a, b) in enumerate(spans):
        if b == max_right[a] and (a, b) not in tail_pick:
            tail_pick[(a, b)] = i
        if a == min_left[b] and (a, b) not in head_pick:
            head_pick[(a, b)] = i
    longest_tail = [tail_pick.get((a, b)) == i for i, (a, b) in enumerate(spans)]
    longest_head = [head_pick.get((a, b)) == i for i, (a, b) in enumerate(spans)]
    return NestingStructure(succ, above, longest_tail, longest_head, spans)


@dataclass
class NestingClaims:
    """Prover assertions for the nesting phase; honest = empty overrides."""

    dir_flip: set = field(default_factory=set)          # arcs with lied orientation
    mark_override: dict = field(default_factory=dict)   # (arc, side) -> 0/1
    succ_override: dict = field(default_factory=dict)   # arc -> encoded value
    above_override: dict = field(default_factory=dict)  # pos -> encoded value
    side_override: dict = field(default_factory=dict)   # (pos, "l"/"r") -> value
    name_override: dict = field(default_factory=dict)   # arc -> encoded value
    consistent_cheat: bool = False   # resolve succ/above to satisfy stacks
    side_all: Optional[int] = None   # every lname/rname forced to this value
    name_all: Optional[int] = None   # every name/succ/above forced to this value


class NestingCore:
    """One nesting-verification execution over a space."""

    def __init__(self, space: Space, pc: PrimeContext, c: int = 3,
                 claims: Optional[NestingClaims] = None,
                 skip_positions: frozenset = frozenset(),
                 forced_rank: Optional[dict] = None):
        self.space = space
        self.pc = pc
        self.sbits = name_bits(pc, c)
        self.nbits = 2 * self.sbits + 1
        self.claims = claims or NestingClaims()
        # positions whose own-stack checks are dropped (deferred run ends:
        # all their arcs share the end position, so they cannot cross)
        self.skip = skip_positions
        # (pos, side) -> {arc_i: sort key}: stack orderings must have
        # ascending keys (planarity corners fix the order via the rotation)
        self.forced_rank = forced_rank or {}

    # ------------------------------------------------------------- helpers

    def _spans(self, tr: Transcript) -> list[tuple[int, int]]:
        out = []
        for ai, arc in enumerate(self.space.arcs):
            d = self.space.claimed_dir(tr, ai)
            if d is None:
                d = 1 if arc.end0 < arc.end1 else -1
            lo, hi = (arc.end0, arc.end1) if d == 1 else (arc.end1, arc.end0)
            out.append((lo, hi))
        return out

    def _truth_dir(self, ai: int) -> int:
        arc = self.space.arcs[ai]
        d = 1 if arc.end0 < arc.end1 else -1
        if ai in self.claims.dir_flip:
            d = -d
        return d

    # ------------------------------------------------------------- prover

    def emit_round1(self, tr: Transcript, rnd: int) -> None:
        """Orientation claims and longest marks."""
        sp = self.space
        spans = []
        for ai, arc in enumerate(sp.arcs):
            d = self._truth_dir(ai)
            if not arc.forced_dir:
                sp.set_a(tr, rnd, ai, "dir", 1 if d == 1 else 0, 1)
            lo, hi = (arc.end0, arc.end1) if d == 1 else (arc.end1, arc.end0)
            spans.append((lo, hi))
        st = build_structure(sp.L, spans)
        self._st_r1 = st
        for ai in range(len(sp.arcs)):
            mt = self.claims.mark_override.get((ai, "t"), int(st.longest_tail[ai]))
            mh = self.claims.mark_override.get((ai, "h"), int(st.longest_head[ai]))
            sp.set_a(tr, rnd, ai, "mlt", mt, 1)
            sp.set_a(tr, rnd, ai, "mlh", mh, 1)

    def draw_coins(self, tr: Transcript, rnd: int) -> None:
        if rnd != 1:
            return
        for pos in range(self.space.L):
            if pos in self.skip:
                continue
            self.space.draw(tr, rnd, pos, "s", 1 << self.sbits)

    def emit_round3(self, tr: Transcript, rnd: int) -> None:
        sp, cl = self.space, self.claims
        L = sp.L
        if cl.name_all is not None:
            for ai in range(len(sp.arcs)):
                cl.name_override.setdefault(ai, cl.name_all)
                cl.succ_override.setdefault(ai, cl.name_all)
            for pos in range(L):
                cl.above_override.setdefault(pos, cl.name_all)
                cl.side_override.setdefault((pos, "l"), cl.name_all)
                cl.side_override.setdefault((pos, "r"), cl.name_all)
        if cl.side_all is not None:
            for pos in range(L):
                cl.side_override.setdefault((pos, "l"), cl.side_all)
                cl.side_override.setdefault((pos, "r"), cl.side_all)
        claimed = []
        for ai, arc in enumerate(sp.arcs):
            d = self._truth_dir(ai)
            claimed.append((arc.end0, arc.end1) if d == 1 else (arc.end1, arc.end0))
        spans = [(min(a, b), max(a, b)) for a, b in claimed]
        st = build_structure(L, spans)
        s_of = [sp.coin(tr, pos, "s", 0) for pos in range(L)]

        def enc(arc_i: Optional[int]) -> int:
            if arc_i is None:
                return BOT
            if arc_i in cl.name_override:
                return cl.name_override[arc_i]
            lo, hi = claimed[arc_i]
            return (1 << (2 * self.sbits)) | (s_of[lo] << self.sbits) | s_of[hi]

        succ_val = [enc(st.succ[ai]) for ai in range(len(sp.arcs))]
        above_val = [enc(st.above[pos]) for pos in range(L)]
        if cl.consistent_cheat:
            succ_val, above_val = self._resolve_consistent(tr, st, spans, enc)
        for ai in range(len(sp.arcs)):
            sp.set_a(tr, rnd, ai, "name", enc(ai), self.nbits)
            sp.set_a(tr, rnd, ai, "succ",
                     cl.succ_override.get(ai, succ_val[ai]), self.nbits)
        innermost_r: dict[int, int] = {}
        innermost_l: dict[int, int] = {}
        for ai, (a, b) in enumerate(claimed):
            cur = innermost_r.get(a)
            if cur is None or spans[ai][1] - spans[ai][0] < spans[cur][1] - spans[cur][0]:
                innermost_r[a] = ai
            cur = innermost_l.get(b)
            if cur is None or spans[ai][1] - spans[ai][0] < spans[cur][1] - spans[cur][0]:
                innermost_l[b] = ai
        for pos in range(L):
            sp.set_p(tr, rnd, pos, "sv", s_of[pos], self.sbits)
            av = cl.above_override.get(pos, above_val[pos])
            sp.set_p(tr, rnd, pos, "above", av, self.nbits)
            rn = enc(innermost_r[pos]) if pos in innermost_r else av
            ln = enc(innermost_l[pos]) if pos in innermost_l else av
            rn = cl.side_override.get((pos, "r"), rn)
            ln = cl.side_override.get((pos, "l"), ln)
            sp.set_p(tr, rnd, pos, "rname", rn, self.nbits)
            sp.set_p(tr, rnd, pos, "lname", ln, self.nbits)

    def _resolve_consistent(self, tr, st: NestingStructure, spans, enc):
        """Best cheating succ/above assignment: satisfy every per-node stack
        constraint, leaving only cross-node pairing to chance."""
        L = self.space.L
        n_arcs = len(spans)
        succ_val: dict[int, int] = {}
        # stacks per node side ordered by span (inner to outer)
        tops_r: dict[int, int] = {}
        tops_l: dict[int, int] = {}
        for pos in range(L):
            rights = sorted((ai for ai in range(n_arcs) if spans[ai][0] == pos),
                            key=lambda ai: spans[ai][1])
            lefts = sorted((ai for ai in range(n_arcs) if spans[ai][1] == pos),
                           key=lambda ai: -spans[ai][0])
            for i in range(len(rights) - 1):
                succ_val.setdefault(rights[i], enc(rights[i + 1]))
            for i in range(len(lefts) - 1):
                succ_val.setdefault(lefts[i], enc(lefts[i + 1]))
            if rights:
                tops_r[pos] = rights[-1]
            if lefts:
                tops_l[pos] = lefts[-1]
        above_val: dict[int, int] = {}
        for pos in range(L):
            cands = []
            for top in (tops_r.get(pos), tops_l.get(pos)):
                if top is not None and top in succ_val:
                    cands.append(succ_val[top])
            if cands:
                above_val[pos] = cands[0]
            elif tops_r.get(pos) is None and tops_l.get(pos) is None:
                above_val[pos] = enc(st.above[pos])
            else:
                above_val[pos] = BOT
            for top in (tops_r.get(pos), tops_l.get(pos)):
                if top is not None and top not in succ_val:
                    succ_val[top] = above_val[pos]
        return ([succ_val.get(ai, enc(st.succ[ai])) for ai in range(n_arcs)],
                [above_val.get(pos, enc(st.above[pos])) for pos in range(L)])

    # ------------------------------------------------------------- verifier

    def decide(self, tr: Transcript, sink: CheckSink, eval_node) -> None:
        sp = self.space
        L = sp.L
        sbits = self.sbits
        spans = self._spans(tr)
        ga = sp.get_a
        above = sp.reader(tr, "above")
        lname = sp.reader(tr, "lname")
        rname = sp.reader(tr, "rname")
        svr = sp.reader(tr, "sv")

        names = [ga(tr, ai, "name") for ai in range(len(sp.arcs))]
        succs = [ga(tr, ai, "succ") for ai in range(len(sp.arcs))]
        mlt = [ga(tr, ai, "mlt") for ai in range(len(sp.arcs))]
        mlh = [ga(tr, ai, "mlh") for ai in range(len(sp.arcs))]

        rights: list[list[int]] = [[] for _ in range(L)]
        lefts: list[list[int]] = [[] for _ in range(L)]
        for ai, (a, b) in enumerate(spans):
            rights[a].append(ai)
            lefts[b].append(ai)

        # -- name echoes ------------------------------------------------------
        for pos in range(L):
            if pos in self.skip:
                continue
            v = eval_node(pos)
            sink.check(v, "po.echo.sv", svr(pos) == sp.coin(tr, pos, "s"))
        for ai, (a, b) in enumerate(spans):
            nm = names[ai]
            for pos in (a, b):
                if pos in self.skip:
                    continue
                v = eval_node(pos)
                if nm is None or succs[ai] is None or mlt[ai] is None or mlh[ai] is None:
                    sink.fail(v, "po.structure.missing")
                    continue
                if not (nm >> (2 * sbits)) & 1:
                    sink.fail(v, "po.echo.name")
                    continue
                if pos == a:
                    sink.check(v, "po.echo.name",
                               (nm >> sbits) & ((1 << sbits) - 1) == svr(a))
                else:
                    sink.check(v, "po.echo.name",
                               nm & ((1 << sbits) - 1) == svr(b))

        # -- marks: uniqueness and covering -----------------------------------
        for pos in range(L):
            if pos in self.skip:
                continue
            v = eval_node(pos)
            r_marks = [ai for ai in rights[pos] if mlt[ai] == 1]
            l_marks = [ai for ai in lefts[pos] if mlh[ai] == 1]
            if rights[pos]:
                sink.check(v, "po.structure.unique", len(r_marks) == 1)
            if lefts[pos]:
                sink.check(v, "po.structure.unique", len(l_marks) == 1)
            pair_count: dict[tuple[int, int], int] = {}
            for ai in rights[pos] + lefts[pos]:
                k = spans[ai]
                pair_count[k] = pair_count.get(k, 0) + 1
            for ai in rights[pos]:
                if mlt[ai] == 0:
                    sink.check(v, "po.structure.cover",
                               mlh[ai] == 1 or pair_count[spans[ai]] > 1)
            for ai in lefts[pos]:
                if mlh[ai] == 0:
                    sink.check(v, "po.structure.cover",
                               mlt[ai] == 1 or pair_count[spans[ai]] > 1)

        # -- per-node ordering search -------------------------------------------
        structure_on = sink.enabled("po.structure")
        for pos in range(L):
            if pos in self.skip:
                continue
            v = eval_node(pos)
            av = above(pos)
            if av is None:
                sink.fail(v, "po.structure.missing")
                continue
            if structure_on:
                okr = self._side_ok(rights[pos], rname(pos), av, names, succs, mlt,
                                    self.forced_rank.get((pos, "R")))
                okl = self._side_ok(lefts[pos], lname(pos), av, names, succs, mlh,
                                    self.forced_rank.get((pos, "L")))
                sink.check(v, "po.structure.order", okr)
                sink.check(v, "po.structure.order", okl)

        # -- pairing across path edges ---------------------------------------------
        for pos in range(L - 1):
            mine = rname(pos)
            theirs = lname(pos + 1)
            if pos not in self.skip:
                sink.check(eval_node(pos), "po.pairing", mine is not None
                           and mine == theirs)
            if pos + 1 not in self.skip:
                sink.check(eval_node(pos + 1), "po.pairing", theirs is not None
                           and mine == theirs)

    def _side_ok(self, side: list[int], bind, av, names, succs, marks,
                 ranks: Optional[dict] = None) -> bool:
        """Does an ordering of the side arcs satisfy the chain conditions?

        Conditions: the binding names the first arc, succ(e_i) = name(e_i+1),
        the last arc is marked longest on this side, succ(last) = above, and
        when corner ranks are forced, the ordering has ascending ranks.
        """
        if not side:
            return bind == av
        if bind is None:
            return False
        k = len(side)

        def ranked_ok(chain) -> bool:
            if not ranks:
                return True
            keys = [ranks.get(ai) for ai in chain if ai in ranks]
            return all(x < y for x, y in zip(keys, keys[1:]))

        by_name: dict[int, list[int]] = {}
        for ai in side:
            by_name.setdefault(names[ai], []).append(ai)
        # greedy walk following succ pointers
        cur = by_name.get(bind, [])
        if len(cur) == 1:
            chain = [cur[0]]
            seen = {cur[0]}
            good = True
            while len(chain) < k:
                nxt = by_name.get(succs[chain[-1]], [])
                if len(nxt) != 1 or nxt[0] in seen:
                    good = False
                    break
                chain.append(nxt[0])
                seen.add(nxt[0])
            if good and marks[chain[-1]] == 1 and succs[chain[-1]] == av                     and ranked_ok(chain):
                return True
        if k > 8:
            return False
        for perm in permutations(side):
            if names[perm[0]] != bind:
                continue
            if any(succs[perm[i]] != names[perm[i + 1]] for i in range(k - 1)):
                continue
            if marks[perm[-1]] == 1 and succs[perm[-1]] == av and ranked_ok(perm):
                return True
        return False
