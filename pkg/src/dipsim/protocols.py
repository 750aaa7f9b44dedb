"""Protocol registry and the cross-protocol adversary factory."""

from __future__ import annotations

from typing import Callable, Optional

from .graphs import Instance
from .runtime import Protocol, Prover


_REGISTRY: dict[str, Callable[..., Protocol]] = {}
_ADVERSARIES: dict[str, Callable[[Instance, str, int], Prover]] = {}


def register(name: str, factory: Callable[..., Protocol],
             adversary: Optional[Callable[[Instance, str, int], Prover]] = None):
    _REGISTRY[name] = factory
    if adversary is not None:
        _ADVERSARIES[name] = adversary


def make_protocol(name: str, c: int = 3, **kw) -> Protocol:
    _load()
    if name not in _REGISTRY:
        raise ValueError(f"unknown protocol {name!r}; have {sorted(_REGISTRY)}")
    return _REGISTRY[name](c=c, **kw)


def protocol_names() -> list[str]:
    _load()
    return sorted(_REGISTRY)


def protocol_adversary(inst: Instance, protocol_name: str, strategy: str,
                       c: int = 3) -> Prover:
    _load()
    if protocol_name not in _ADVERSARIES:
        raise ValueError(f"no adversary library for protocol {protocol_name!r}")
    return _ADVERSARIES[protocol_name](inst, strategy, c)


_loaded = False


def _load() -> None:
    global _loaded
    if _loaded:
        return
    _loaded = True
    from . import lr_sorting, path_outerplanar, outerplanar, planarity, series_parallel
    from .adversaries import (
        FlipBitsProver,
        RandomLabelProver,
        StrategyError,
        LRStrategyProver,
        parse_spec,
    )
    from .lr_sorting import LRSortingProtocol
    from .nesting import NestingClaims

    def lr_adv(inst, strategy, c):
        from .adversaries import adversary_mutate

        return adversary_mutate(inst, "lr-sorting", strategy, c)

    register("lr-sorting", LRSortingProtocol, lr_adv)

    def po_claims_for(strategy: str, sbits: int):
        """Nesting claims for the named strategy (shared by all protocols
        that embed nesting verification)."""
        name, param = parse_spec(strategy)
        nc = NestingClaims()
        fake = (1 << (2 * sbits)) | (5 << sbits) | 9
        if name == "best-effort-honest":
            pass
        elif name == "swap-lr-one-edge":
            nc.dir_flip = {int(param or 0)}
        elif name == "wrong-longest-mark":
            nc.mark_override[(int(param or 0), "t")] = 0
            nc.mark_override[(int(param or 0), "h")] = 0
        elif name == "forge-succ-name":
            nc.consistent_cheat = True
        elif name == "detach-side-names":
            nc.consistent_cheat = True
            nc.side_all = fake
        elif name == "forge-edge-name":
            nc.consistent_cheat = True
            nc.name_all = fake
        else:
            return None
        return nc

    def po_adv(inst, strategy, c):
        from .path_outerplanar import POHonestProver

        name, param = parse_spec(strategy)
        if name == "random-labels":
            return RandomLabelProver(POHonestProver(inst, c), salt=strategy)
        if name == "flip-k-bits":
            return FlipBitsProver(POHonestProver(inst, c), int(param or 3), salt=strategy)
        base = POHonestProver(inst, c)
        nc = po_claims_for(strategy, base.nest.sbits)
        if nc is None:
            raise StrategyError(f"{name!r} is not a path-outerplanar strategy")
        return POHonestProver(inst, c, nest_claims=nc)

    register("path-outerplanar", path_outerplanar.PathOuterplanarProtocol, po_adv)
    outerplanar.register_all(register, po_claims_for)
    planarity.register_all(register, po_claims_for)
    series_parallel.register_all(register, po_claims_for)
