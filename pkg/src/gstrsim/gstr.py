"""Social-trust geographic routing: trusted-node selection, sender and receiver logic."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .errors import MessageExpired
from .mobility import DirectionTracker, Neighbor, direction_indicator, distance
from .social import (
    NodeId,
    SocialGraph,
    TrustHistory,
    TrustLevel,
    are_friends,
    connected_candidates,
    connection_score,
    record_trusted_interaction,
    trust_weight,
)

# pseudo node id used as ``last_hop`` for messages handed out by a base station
BASE_STATION = -1

_msg_ids = itertools.count()


@dataclass
class Message:
    src: NodeId
    dst: NodeId
    created_at: float
    ttl: float
    msg_id: int = field(default_factory=lambda: next(_msg_ids))
    payload_size: int = 512
    hop_trace: list[NodeId] = field(default_factory=list)
    via_cloud: bool = False
    last_hop: NodeId | None = None
    last_hop_trusted: bool = True
    home_bs: int | None = None
    # baseline-only routing state (perimeter-mode bookkeeping)
    route_state: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.created_at < 0:
            raise ValueError("created_at must be non-negative")
        if not self.ttl > 0:
            raise ValueError("ttl must be positive")
        if self.last_hop is None:
            self.last_hop = self.src

    @property
    def relays(self) -> int:
        return len(self.hop_trace)

    def expired(self, now: float) -> bool:
        return now - self.created_at > self.ttl

    def add_relay(self, node: NodeId, trusted: bool = True) -> None:
        if node in self.hop_trace:
            raise ValueError(f"node {node} already relayed message {self.msg_id}")
        self.hop_trace.append(node)
        self.last_hop = node
        self.last_hop_trusted = trusted


@dataclass(frozen=True)
class DeliverDirect:
    to: NodeId


@dataclass(frozen=True)
class Relay:
    to: NodeId
    level: TrustLevel


@dataclass(frozen=True)
class ToBaseStation:
    reason: str  # "no_candidate" | "leaving_cell"


@dataclass(frozen=True)
class Hold:
    pass


ForwardDecision = DeliverDirect | Relay | ToBaseStation | Hold


def _score_of(scorer) -> Callable[[NodeId], int]:
    if callable(scorer):
        return scorer
    return lambda c: scorer[c]


def select_trusted_node(
    candidates: Iterable[NodeId],
    weights: Mapping[NodeId, TrustLevel],
    betas: Mapping[NodeId, int],
    scorer,
) -> NodeId | None:
    """Pick the relay among connected candidates, or None for cloud fallback.

    High-trust candidates that approach the receiver win outright (best
    connection score first). Otherwise medium-trust candidates are tried in
    descending score order and the first one approaching the receiver is
    taken. Ties in score go to the smaller id. Low trust is never chosen.
    """
    score = _score_of(scorer)
    ranked = sorted(candidates, key=lambda c: (-score(c), c))
    for c in ranked:
        if weights[c] is TrustLevel.HIGH and betas[c] == 1:
            return c
    for c in ranked:
        if weights[c] is TrustLevel.MEDIUM and betas[c] == 1:
            return c
    return None


def sender_decide(
    carrier: NodeId,
    msg: Message,
    neighbor_snapshot: Iterable[Neighbor],
    social: SocialGraph,
    history: TrustHistory,
    tracker: DirectionTracker,
    in_home_cell: bool,
    *,
    now: float,
    carrier_pos,
    dst_pos,
    tx_range: float,
    already_decided: bool = False,
    progress_gate: bool = True,
    beta_fn: Callable[[Neighbor], int] | None = None,
    max_age: float | None = None,
) -> ForwardDecision:
    """Decide what the current custodian of ``msg`` does at this instant.

    A custodian leaving its home cell always returns the message to the base
    station. Otherwise the receiver is served directly when in range, then a
    trusted relay is sought among connected candidates that are closer to the
    receiver than the custodian (``progress_gate``). When none qualifies the
    message goes to the base station for cloud storage.
    """
    if msg.expired(now):
        raise MessageExpired(msg.msg_id, now)
    if already_decided:
        return Hold()
    if not in_home_cell:
        return ToBaseStation("leaving_cell")

    snapshot = [nb for nb in neighbor_snapshot if nb.node != carrier]
    if any(nb.node == msg.dst for nb in snapshot):
        return DeliverDirect(msg.dst)

    used = set(msg.hop_trace) | {msg.src, carrier}
    by_id = {nb.node: nb for nb in snapshot if nb.node not in used}
    cands = connected_candidates(social, msg.src, msg.dst, by_id)
    if progress_gate and cands:
        d_self = distance(carrier_pos, dst_pos)
        cands = {c for c in cands if distance(by_id[c].pos, dst_pos) < d_self}

    if cands:
        if beta_fn is None:
            def beta_fn(nb: Neighbor) -> int:
                if distance(nb.pos, dst_pos) <= tx_range:
                    return 1
                return direction_indicator(tracker, nb.node, nb.pos, nb.vel, dst_pos, now,
                                           receiver=msg.dst, sender_pos=carrier_pos, max_age=max_age)

        weights = {c: trust_weight(history, social, msg.src, msg.dst, c, True, carrier=carrier)
                   for c in cands}
        betas = {c: beta_fn(by_id[c]) for c in sorted(cands)}
        chosen = select_trusted_node(cands, weights, betas,
                                     lambda c: connection_score(social, msg.src, msg.dst, c))
        if chosen is not None:
            return Relay(chosen, weights[chosen])

    return ToBaseStation("no_candidate")


def receiver_accept(msg: Message, receiver: NodeId, social: SocialGraph) -> bool:
    """Gate applied by the receiver; False means the message is discarded."""
    if msg.dst != receiver:
        raise ValueError(f"message {msg.msg_id} is addressed to {msg.dst}, not {receiver}")
    hop = msg.last_hop
    if hop == BASE_STATION:
        known = msg.via_cloud
    elif hop == msg.src:
        known = are_friends(social, msg.src, receiver) or msg.via_cloud
    else:
        known = are_friends(social, hop, receiver) or msg.via_cloud
    return bool(known and msg.last_hop_trusted)


def on_relay_success(history: TrustHistory, carrier: NodeId, relay: NodeId, t: float) -> TrustHistory:
    return record_trusted_interaction(history, carrier, relay, t)


def hop_is_trusted(social: SocialGraph, msg: Message, hop: NodeId) -> bool:
    """Whether ``hop`` counts as a trusted forwarder for ``msg``.

    The originator and connected nodes of the endpoint pair qualify; this is
    the flag a receiver checks after a relay from any protocol.
    """
    if hop == msg.src or hop == BASE_STATION:
        return True
    return bool(connected_candidates(social, msg.src, msg.dst, (hop,)))
