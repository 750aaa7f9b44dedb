"""Adversarial provers: the mutation library for soundness experiments.

Strategies mirror the cheating cases analyzed in the soundness proofs.
Structured strategies rebuild the honest label plan with targeted claims;
generic ones mutate the emitted labels bit-level. Specs are "name" or
"name:param" strings.
"""

from __future__ import annotations

import random
from typing import Optional

from .graphs import Instance
from .lr_sorting import (
    LRClaims,
    LRCore,
    LRHonestProver,
    bit_of,
    distinguishing_index,
)
from .runtime import Prover, Transcript


class StrategyError(ValueError):
    pass


def parse_spec(spec: str) -> tuple[str, Optional[str]]:
    if ":" in spec:
        name, param = spec.split(":", 1)
        return name, param
    return spec, None


class RandomLabelProver(Prover):
    """Replaces every emitted label value with fresh randomness."""

    def __init__(self, base: Prover, salt: str = ""):
        self.base = base
        self.salt = salt

    def emit(self, rnd: int, inst: Instance, tr: Transcript) -> None:
        self.base.emit(rnd, inst, tr)
        rng = random.Random(f"{tr.seed}|{self.salt}|rl|{rnd}")
        for store, merged in ((tr.round_node[rnd], tr.node),
                              (tr.round_edge[rnd], tr.edge)):
            for fieldname, vals in store.items():
                width = tr.bits[fieldname]
                for k in vals:
                    v = rng.getrandbits(width)
                    vals[k] = v
                    merged[fieldname][k] = v


class FlipBitsProver(Prover):
    """Flips k random bits across the per-round label stream."""

    def __init__(self, base: Prover, k: int, salt: str = ""):
        self.base = base
        self.k = k
        self.salt = salt

    def emit(self, rnd: int, inst: Instance, tr: Transcript) -> None:
        self.base.emit(rnd, inst, tr)
        if self.k <= 0:
            return
        rng = random.Random(f"{tr.seed}|{self.salt}|fb|{rnd}")
        slots = []
        for kind, store in (("n", tr.round_node[rnd]), ("e", tr.round_edge[rnd])):
            for fieldname, vals in store.items():
                for key in vals:
                    slots.append((kind, fieldname, key))
        if not slots:
            return
        per_round = max(1, self.k // 3) if rnd < 4 else self.k - 2 * max(1, self.k // 3)
        for _ in range(max(0, per_round)):
            kind, fieldname, key = slots[rng.randrange(len(slots))]
            bit = 1 << rng.randrange(tr.bits[fieldname])
            store = tr.round_node[rnd] if kind == "n" else tr.round_edge[rnd]
            merged = tr.node if kind == "n" else tr.edge
            store[fieldname][key] ^= bit
            merged[fieldname][key] = store[fieldname][key]


# ---------------------------------------------------------------------------
# LR-sorting strategies (claims-level)


def _bad_arc(core: LRCore) -> int:
    """Index of a reversed arc (claimed-left endpoint right of the other)."""
    for ai, arc in enumerate(core.space.arcs):
        if arc.forced_dir == 1 and arc.end0 > arc.end1:
            return ai
        if arc.forced_dir == -1 and arc.end1 > arc.end0:
            return ai
    raise StrategyError("instance has no reversed arc to exploit")


def lr_claims_for(core: LRCore, name: str, param: Optional[str]) -> LRClaims:
    lay = core.layout
    cl = LRClaims.honest(lay)
    if name == "flip-0-bits":
        return cl
    ai = _bad_arc(core)
    arc = core.space.arcs[ai]
    tail, head = (arc.end0, arc.end1) if arc.forced_dir == 1 else (arc.end1, arc.end0)
    bt, bh = lay.block[tail], lay.block[head]
    B = core.B

    if name == "claim-inner-block":
        cl.arc_inner[ai] = 1
        return cl
    if name == "mark-inner-honest":
        # keep everything honest; the reversed inner arc stays flagged inner
        if bt != bh:
            raise StrategyError("reversed arc is not inner-block")
        return cl
    if name == "shift-block-position":
        if bh >= bt:
            raise StrategyError("needs a reversed cross-block arc")
        d = bt - bh + 1
        if bt - d < 0:
            raise StrategyError("not enough room to shift the blocks down")
        for b in range(bt, lay.nblocks):
            cl.x1[b] = b - d
            cl.x2[b] = b - d + 1
        return cl
    if name == "desync-block-pair":
        if bh >= bt or bt == 0:
            raise StrategyError("needs a reversed cross-block arc")
        d = bt - bh + 1
        if bt - d < 0:
            raise StrategyError("not enough room to shift the blocks down")
        for b in range(bt, lay.nblocks):
            cl.x1[b] = b - d
            cl.x2[b] = b - d + 1
        cl.x2[bt - 1] = bt - d  # breaks only the increment structure there
        return cl
    if name == "swap-inner-indices":
        if bt != bh:
            raise StrategyError("reversed arc is not inner-block")
        cl.idx[tail], cl.idx[head] = cl.idx[head], cl.idx[tail]
        return cl
    if name == "wrong-distinguishing-index":
        if bt == bh:
            raise StrategyError("needs a cross-block arc")
        xt, xh = bt, bh
        istar = None
        for i in range(1, B + 1):
            if bit_of(xt, i, B) != bit_of(xh, i, B):
                break
            if bit_of(xt, i, B) == 1:
                istar = i
        if istar is None:
            raise StrategyError("blocks share no 1-bit before they diverge")
        cl.arc_commit[ai] = (istar, "auto")
        return cl
    if name == "forge-phi-prefix":
        if bt == bh:
            raise StrategyError("needs a cross-block arc")
        istar = None
        for i in range(1, B + 1):
            if bit_of(bt, i, B) == 0 and bit_of(bh, i, B) == 1:
                istar = i
                break
        if istar is None or istar == 1:
            raise StrategyError("no usable forged index for these blocks")
        const = 12345 % core.pc.p
        pos_bt = next(p for p in lay.block_positions(bt) if lay.idx[p] == istar)
        pos_bh = next(p for p in lay.block_positions(bh) if lay.idx[p] == istar)
        cl.phi_patch[pos_bt - 1] = const
        cl.phi_patch[pos_bh - 1] = const
        cl.arc_commit[ai] = (istar, const)
        return cl
    if name == "omit-arc-flag":
        cl.omit_arcs.add(ai)
        return cl
    raise StrategyError(f"unknown LR strategy {name!r}")


class LRStrategyProver(Prover):
    def __init__(self, inst: Instance, strategy: str, c: int = 3):
        from .primitives import PrimeContext
        from .lr_sorting import lr_space

        name, param = parse_spec(strategy)
        self.space = lr_space(inst)
        pc = PrimeContext.for_size(inst.graph.n, c)
        base = LRCore(self.space, pc)
        claims = lr_claims_for(base, name, param)
        self.core = LRCore(self.space, pc, claims)

    def emit(self, rnd: int, inst: Instance, tr: Transcript) -> None:
        if rnd == 0:
            self.core.emit_round1(tr, rnd)
        elif rnd == 2:
            self.core.emit_round3(tr, rnd)
        elif rnd == 4:
            self.core.emit_round5(tr, rnd)


LR_STRATEGIES = (
    "random-labels", "flip-k-bits", "flip-0-bits", "claim-inner-block",
    "mark-inner-honest", "shift-block-position", "desync-block-pair",
    "swap-inner-indices", "wrong-distinguishing-index", "forge-phi-prefix",
    "omit-arc-flag",
)


def adversary_mutate(inst: Instance, protocol_name: str, strategy: str,
                     c: int = 3) -> Prover:
    """Build a prover implementing the named cheating strategy.

    Raises StrategyError when the strategy does not apply to the protocol
    or the instance lacks the structure the strategy needs.
    """
    name, param = parse_spec(strategy)
    if protocol_name == "lr-sorting":
        if name == "random-labels":
            return RandomLabelProver(LRHonestProver(inst), salt=strategy)
        if name == "flip-k-bits":
            return FlipBitsProver(LRHonestProver(inst), int(param or 1), salt=strategy)
        if name in LR_STRATEGIES:
            return LRStrategyProver(inst, strategy, c)
        raise StrategyError(f"{name!r} is not an LR-sorting strategy")
    # protocol modules register richer strategies lazily to avoid cycles
    from . import protocols

    return protocols.protocol_adversary(inst, protocol_name, strategy, c)
