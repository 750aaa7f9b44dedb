"""Public-coin protocol execution engine.

A run alternates five interaction rounds (prover, verifier, prover,
verifier, prover). Verifier rounds draw per-node coins from a counter-based
stream of the run seed; prover rounds write node and edge labels. The final
decision is evaluated per node through NodeView objects that expose only
the node's own coins and labels plus the labels of its neighbors and
incident edges, so locality holds by construction.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from .graphs import Graph, Instance

ROUNDS: tuple[str, ...] = ("prover", "verifier", "prover", "verifier", "prover")
N_ROUNDS = len(ROUNDS)


class ProtocolError(ValueError):
    pass


class LocalityError(AssertionError):
    pass


def coin_value(seed, rnd: int, node: int, fieldname: str, upper: int) -> int:
    """Deterministic coin: uniform-ish value in [0, upper)."""
    if upper <= 1:
        return 0
    h = hashlib.sha256(f"{seed}|{rnd}|{node}|{fieldname}".encode()).digest()
    return int.from_bytes(h[:16], "big") % upper


class Transcript:
    """Round-by-round record of coins and labels, replayable from the seed."""

    def __init__(self, seed, n: int, m: int):
        self.seed = seed
        self.n = n
        self.m = m
        self.bits: dict[str, int] = {}
        # per-round sparse storage: field -> {node/eid -> value}
        self.round_node: list[dict[str, dict[int, int]]] = [dict() for _ in range(N_ROUNDS)]
        self.round_edge: list[dict[str, dict[int, int]]] = [dict() for _ in range(N_ROUNDS)]
        self.round_coin: list[dict[str, dict[int, int]]] = [dict() for _ in range(N_ROUNDS)]
        # merged across rounds for decision evaluation
        self.node: dict[str, dict[int, int]] = {}
        self.edge: dict[str, dict[int, int]] = {}
        self.coins: dict[str, dict[int, int]] = {}
        self._field_round: dict[str, int] = {}

    def _register(self, fieldname: str, bits: int, rnd: int) -> None:
        prev = self.bits.get(fieldname)
        if prev is None:
            self.bits[fieldname] = bits
            self._field_round[fieldname] = rnd
        elif prev != bits:
            raise ProtocolError(f"field {fieldname} redeclared with different width")
        elif self._field_round[fieldname] != rnd:
            raise ProtocolError(f"field {fieldname} written in two different rounds")

    def set_node(self, rnd: int, node: int, fieldname: str, value: int, bits: int) -> None:
        if ROUNDS[rnd] != "prover":
            raise ProtocolError(f"prover write in verifier round {rnd}")
        self._register(fieldname, bits, rnd)
        self.round_node[rnd].setdefault(fieldname, {})[node] = value
        self.node.setdefault(fieldname, {})[node] = value

    def set_edge(self, rnd: int, eid: int, fieldname: str, value: int, bits: int) -> None:
        if ROUNDS[rnd] != "prover":
            raise ProtocolError(f"prover write in verifier round {rnd}")
        self._register(fieldname, bits, rnd)
        self.round_edge[rnd].setdefault(fieldname, {})[eid] = value
        self.edge.setdefault(fieldname, {})[eid] = value

    def draw_coin(self, rnd: int, node: int, fieldname: str, upper: int) -> int:
        if ROUNDS[rnd] != "verifier":
            raise ProtocolError(f"coin drawn in prover round {rnd}")
        bits = max(1, (max(upper - 1, 1)).bit_length())
        self._register(fieldname, bits, rnd)
        v = coin_value(self.seed, rnd, node, fieldname, upper)
        self.round_coin[rnd].setdefault(fieldname, {})[node] = v
        self.coins.setdefault(fieldname, {})[node] = v
        return v

    # -- serialization ------------------------------------------------------

    def dump_json(self) -> str:
        def hexify(table: dict[str, dict[int, int]]) -> dict:
            return {
                f: {str(k): format(v, "x") for k, v in sorted(vals.items())}
                for f, vals in sorted(table.items())
            }

        doc = {
            "seed": str(self.seed),
            "n": self.n,
            "m": self.m,
            "bits": dict(sorted(self.bits.items())),
            "rounds": [
                {
                    "kind": ROUNDS[r],
                    "coins": hexify(self.round_coin[r]),
                    "node_labels": hexify(self.round_node[r]),
                    "edge_labels": hexify(self.round_edge[r]),
                }
                for r in range(N_ROUNDS)
            ],
        }
        return json.dumps(doc, separators=(",", ":"), sort_keys=True)

    def digest(self) -> str:
        return hashlib.sha256(self.dump_json().encode()).hexdigest()


@dataclass
class Verdict:
    accept: bool
    per_node_output: list[bool]
    first_failed_check: Optional[tuple[int, str]] = None


@dataclass
class ProofSizeReport:
    """Bit accounting of the honest prover's labels."""

    max_label_bits: int
    per_round_max: list[int]
    node_bits_max: int
    edge_bits_max: int
    excluded_prefixes: tuple[str, ...] = ()

    @staticmethod
    def measure(tr: Transcript, exclude_prefixes: Sequence[str] = ()) -> "ProofSizeReport":
        ex = tuple(exclude_prefixes)

        def keep(fieldname: str) -> bool:
            return not any(fieldname.startswith(p) for p in ex)

        per_round = []
        node_max = 0
        edge_max = 0
        for r in range(N_ROUNDS):
            best = 0
            for store, is_node in ((tr.round_node[r], True), (tr.round_edge[r], False)):
                totals: dict[int, int] = {}
                for fieldname, vals in store.items():
                    if not keep(fieldname):
                        continue
                    b = tr.bits[fieldname]
                    for k in vals:
                        totals[k] = totals.get(k, 0) + b
                if totals:
                    m = max(totals.values())
                    best = max(best, m)
                    if is_node:
                        node_max = max(node_max, m)
                    else:
                        edge_max = max(edge_max, m)
            per_round.append(best)
        return ProofSizeReport(
            max_label_bits=max(per_round) if per_round else 0,
            per_round_max=per_round,
            node_bits_max=node_max,
            edge_bits_max=edge_max,
            excluded_prefixes=ex,
        )


@dataclass
class ErrorEstimate:
    trials: int
    rejects: int

    @property
    def rate(self) -> float:
        return self.rejects / self.trials if self.trials else 0.0

    @property
    def wilson_interval(self) -> tuple[float, float]:
        n, k = self.trials, self.rejects
        if n == 0:
            return (0.0, 1.0)
        z = 1.959963984540054
        phat = k / n
        denom = 1 + z * z / n
        center = (phat + z * z / (2 * n)) / denom
        half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
        return (max(0.0, center - half), min(1.0, center + half))


class CheckSink:
    """Collects per-node check outcomes; supports check-family ablation."""

    __slots__ = ("n", "ok", "first", "disabled")

    def __init__(self, n: int, disabled: Iterable[str] = ()):
        self.n = n
        self.ok = [True] * n
        self.first: Optional[tuple[int, str]] = None
        self.disabled = tuple(disabled)

    def enabled(self, tag: str) -> bool:
        for d in self.disabled:
            if tag == d or tag.startswith(d + "."):
                return False
        return True

    def fail(self, node: int, tag: str) -> None:
        if not self.enabled(tag):
            return
        if self.ok[node]:
            self.ok[node] = False
        if self.first is None or node < self.first[0]:
            self.first = (node, tag)

    def check(self, node: int, tag: str, good: bool) -> bool:
        """Record the outcome; returns the effective result (ablated checks
        count as passing)."""
        if good or not self.enabled(tag):
            return True
        self.fail(node, tag)
        return False

    def verdict(self) -> Verdict:
        acc = all(self.ok)
        return Verdict(accept=acc, per_node_output=list(self.ok),
                       first_failed_check=None if acc else self.first)


class NodeView:
    """Local window of one node: own coins/labels, neighbor labels,
    incident edge labels. All decision code reads through this."""

    __slots__ = ("v", "g", "tr", "nbrs", "eids")

    def __init__(self, v: int, g: Graph, tr: Transcript,
                 nbrs: list[int], eids: list[int]):
        self.v = v
        self.g = g
        self.tr = tr
        self.nbrs = nbrs
        self.eids = eids

    @property
    def deg(self) -> int:
        return len(self.nbrs)

    def coin(self, fieldname: str, default=None):
        return self.tr.coins.get(fieldname, {}).get(self.v, default)

    def own(self, fieldname: str, default=None):
        return self.tr.node.get(fieldname, {}).get(self.v, default)

    def nbr(self, port: int, fieldname: str, default=None):
        return self.tr.node.get(fieldname, {}).get(self.nbrs[port], default)

    def edge(self, port: int, fieldname: str, default=None):
        return self.tr.edge.get(fieldname, {}).get(self.eids[port], default)


def make_views(g: Graph, tr: Transcript) -> list[NodeView]:
    views = []
    eid = g.edge_id
    for v in range(g.n):
        nbrs = g.adjacency[v]
        views.append(NodeView(v, g, tr, nbrs, [eid(v, w) for w in nbrs]))
    return views


class Prover:
    """Base prover; subclasses fill labels in prover rounds."""

    is_honest = False

    def emit(self, rnd: int, inst: Instance, tr: Transcript) -> None:
        raise NotImplementedError


@dataclass
class RunResult:
    transcript: Transcript
    verdict: Verdict
    proof_size: Optional[ProofSizeReport]

    @property
    def accept(self) -> bool:
        return self.verdict.accept


class Protocol:
    """Protocol implementation interface; all main protocols run 5 rounds."""

    name = "abstract"
    check_families: tuple[str, ...] = ()

    def validate_instance(self, inst: Instance) -> None:
        pass

    def make_honest(self, inst: Instance) -> Prover:
        raise NotImplementedError

    def draw_coins(self, inst: Instance, rnd: int, tr: Transcript) -> None:
        pass

    def decide(self, inst: Instance, tr: Transcript, sink: CheckSink) -> None:
        raise NotImplementedError


def run_protocol(inst: Instance, prover: Prover, protocol: Protocol, seed,
                 disabled_checks: Iterable[str] = ()) -> RunResult:
    """Execute the 5-round schedule and decide.

    Proof size is reported only for honest provers (it is defined as the
    longest label of the honest prover).
    """
    protocol.validate_instance(inst)
    g = inst.graph
    tr = Transcript(seed, g.n, g.m)
    for rnd, kind in enumerate(ROUNDS):
        if kind == "prover":
            prover.emit(rnd, inst, tr)
        else:
            protocol.draw_coins(inst, rnd, tr)
    sink = CheckSink(g.n, disabled_checks)
    protocol.decide(inst, tr, sink)
    verdict = sink.verdict()
    psize = ProofSizeReport.measure(tr) if prover.is_honest else None
    return RunResult(tr, verdict, psize)


def estimate_error_rates(inst: Instance, prover: Prover, protocol: Protocol,
                         trials: int, seed,
                         disabled_checks: Iterable[str] = ()) -> ErrorEstimate:
    """Independent seeded runs; returns the rejection-rate estimate."""
    if trials < 1:
        raise ProtocolError("trials >= 1 required")
    rejects = 0
    for t in range(trials):
        res = run_protocol(inst, prover, protocol, f"{seed}:{t}", disabled_checks)
        if not res.verdict.accept:
            rejects += 1
    return ErrorEstimate(trials=trials, rejects=rejects)
