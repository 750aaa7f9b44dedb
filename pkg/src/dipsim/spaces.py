"""Label spaces: the addressing layer between protocol logic and transcripts.

Protocol cores (LR-sorting, nesting verification) are written against an
abstract path of positions 0..L-1 with arcs between non-adjacent positions.
A Space maps position/arc fields onto real node and edge labels of the
simulation graph, so the same core runs natively, hosted through forest
slots, per biconnected component, per ear, or on Euler-tour copies.

Every space implementation documents which real node evaluates a position's
checks and why each field it reads lives on that node or a real neighbor;
the runtime poison tests assert the resulting locality empirically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .graphs import Graph
from .runtime import Transcript

COIN_SUFFIX = "#"  # coin stream names never collide with label fields


@dataclass
class Arc:
    """One non-path edge of the abstract instance.

    ``end0``/``end1`` are positions. ``forced_dir`` carries instance-level
    orientation for directed inputs (+1: end0 is the left/tail endpoint,
    -1: end1 is, 0: orientation is prover-claimed via the ``dir`` field).
    """

    end0: int
    end1: int
    key: object
    forced_dir: int = 0
    lr_exempt: bool = False  # ends-deferred arcs skip the LR machinery


class Space:
    """Abstract path of L positions plus arcs, with field routing."""

    def __init__(self, L: int, arcs: list[Arc], prefix: str):
        self.L = L
        self.arcs = arcs
        self.prefix = prefix
        self._fn: dict[str, str] = {}
        self.arcs_at: list[list[tuple[int, bool]]] = [[] for _ in range(L)]
        for i, a in enumerate(arcs):
            self.arcs_at[a.end0].append((i, True))
            self.arcs_at[a.end1].append((i, False))

    def pf(self, name: str) -> str:
        full = self._fn.get(name)
        if full is None:
            full = self._fn[name] = self.prefix + name
        return full

    def reader(self, tr: Transcript, name: str):
        """Fast position-indexed getter for one field (decide hot path)."""
        gp = self.get_p
        return lambda pos, _tr=tr, _n=name: gp(_tr, pos, _n)

    # -- position (node-type) fields ----------------------------------------

    def set_p(self, tr: Transcript, rnd: int, pos: int, name: str, val: int, bits: int) -> None:
        raise NotImplementedError

    def get_p(self, tr: Transcript, pos: int, name: str, default=None):
        raise NotImplementedError

    # -- coins ----------------------------------------------------------------

    def coin_node(self, pos: int) -> int:
        """Real node whose stream supplies this position's coins."""
        raise NotImplementedError

    def draw(self, tr: Transcript, rnd: int, pos: int, name: str, upper: int) -> int:
        return tr.draw_coin(rnd, self.coin_node(pos), self.pf(name) + COIN_SUFFIX, upper)

    def coin(self, tr: Transcript, pos: int, name: str, default=None):
        return tr.coins.get(self.pf(name) + COIN_SUFFIX, {}).get(self.coin_node(pos), default)

    # -- arc fields -------------------------------------------------------------

    def set_a(self, tr: Transcript, rnd: int, arc_i: int, name: str, val: int, bits: int) -> None:
        raise NotImplementedError

    def get_a(self, tr: Transcript, arc_i: int, name: str, default=None):
        raise NotImplementedError

    def claimed_dir(self, tr: Transcript, arc_i: int) -> Optional[int]:
        """+1 if end0 is claimed left of end1, -1 converse, None if absent."""
        a = self.arcs[arc_i]
        if a.forced_dir:
            return a.forced_dir
        d = self.get_a(tr, arc_i, "dir")
        if d is None:
            return None
        return 1 if d == 1 else -1


class PathSpace(Space):
    """Positions are real nodes laid along a known or claimed path.

    Arc labels go either to native edge labels (``hosting=None``) or into
    the accountable endpoint's node label under a forest-slot prefix.
    Locality: position checks are evaluated at the position's own node;
    path neighbors are real neighbors, and arc endpoints are real
    neighbors, so hosted arc fields (on either arc endpoint) are visible
    from both ends.
    """

    def __init__(self, g: Graph, order: list[int], arcs: list[Arc], prefix: str,
                 hosting: Optional[dict[int, tuple[int, int]]] = None):
        super().__init__(len(order), arcs, prefix)
        self.g = g
        self.order = order
        self.hosting = hosting

    def node_of(self, pos: int) -> int:
        return self.order[pos]

    def coin_node(self, pos: int) -> int:
        return self.order[pos]

    def set_p(self, tr, rnd, pos, name, val, bits):
        tr.set_node(rnd, self.order[pos], self.pf(name), val, bits)

    def get_p(self, tr, pos, name, default=None):
        return tr.node.get(self.pf(name), {}).get(self.order[pos], default)

    def reader(self, tr, name):
        col = tr.node.get(self.pf(name), {})
        order = self.order
        return lambda pos: col.get(order[pos])

    def set_a(self, tr, rnd, arc_i, name, val, bits):
        key = self.arcs[arc_i].key
        if self.hosting is None:
            tr.set_edge(rnd, key, self.pf(name), val, bits)
        else:
            host, slot = self.hosting[key]
            tr.set_node(rnd, host, f"{self.prefix}h{slot}.{name}", val, bits)

    def get_a(self, tr, arc_i, name, default=None):
        key = self.arcs[arc_i].key
        if self.hosting is None:
            return tr.edge.get(self.pf(name), {}).get(key, default)
        host, slot = self.hosting[key]
        return tr.node.get(f"{self.prefix}h{slot}.{name}", {}).get(host, default)
