"""Comparison protocols driven by the same neighbor snapshots as GSTR.

GPSR is the usual greedy/perimeter scheme. T-GPSR and GTLR are minimal
reconstructions: T-GPSR runs GPSR over neighbors whose trust weight clears a
threshold, GTLR adds a queue-load penalty to greedy distance.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

from .mobility import Neighbor, distance
from .social import NodeId, SocialGraph, TrustHistory, trust_weight

NeighborSnapshot = Sequence[Neighbor]


def greedy_next_hop(self_pos, dst_pos, snapshot: NeighborSnapshot) -> NodeId | None:
    """Neighbor strictly closer to the destination than us, closest first."""
    d_self = distance(self_pos, dst_pos)
    best, best_d = None, d_self
    for nb in sorted(snapshot, key=lambda nb: nb.node):
        d = distance(nb.pos, dst_pos)
        if d < best_d:
            best, best_d = nb.node, d
    return best


def gabriel_neighbors(self_pos, snapshot: NeighborSnapshot) -> list[Neighbor]:
    """Neighbors kept by the Gabriel-graph test using only local positions."""
    kept = []
    for v in snapshot:
        mx, my = (self_pos[0] + v.pos[0]) / 2, (self_pos[1] + v.pos[1]) / 2
        r2 = ((self_pos[0] - v.pos[0]) ** 2 + (self_pos[1] - v.pos[1]) ** 2) / 4
        witness = any(
            w.node != v.node and (w.pos[0] - mx) ** 2 + (w.pos[1] - my) ** 2 < r2
            for w in snapshot
        )
        if not witness:
            kept.append(v)
    return kept


def _bearing(a, b) -> float:
    return math.atan2(b[1] - a[1], b[0] - a[0])


def right_hand_next(self_pos, ref_pos, planar: Iterable[Neighbor]) -> Neighbor | None:
    """First planar edge counter-clockwise from the reference direction."""
    ref = _bearing(self_pos, ref_pos)
    best, best_turn = None, None
    for nb in sorted(planar, key=lambda nb: nb.node):
        turn = (_bearing(self_pos, nb.pos) - ref) % (2 * math.pi)
        if turn == 0:
            turn = 2 * math.pi
        if best is None or turn < best_turn:
            best, best_turn = nb, turn
    return best


def gpsr_next_hop(self_pos, dst_pos, snapshot: NeighborSnapshot, prev_pos=None,
                  prev_node: NodeId | None = None) -> NodeId | None:
    """Greedy forwarding, falling back to right-hand-rule perimeter routing.

    In perimeter mode the sweep starts from the line towards the destination
    (or from the edge the message arrived on, ``prev_pos``). Bouncing straight
    back to ``prev_node`` is not progress, so it yields None.
    """
    hop = greedy_next_hop(self_pos, dst_pos, snapshot)
    if hop is not None:
        return hop
    planar = gabriel_neighbors(self_pos, snapshot)
    if not planar:
        return None
    nxt = right_hand_next(self_pos, prev_pos if prev_pos is not None else dst_pos, planar)
    if nxt is None or nxt.node == prev_node:
        return None
    return nxt.node


def tgpsr_next_hop(self_pos, dst_pos, snapshot: NeighborSnapshot, social: SocialGraph,
                   src: NodeId, dst: NodeId, threshold: float = 0.5,
                   history: TrustHistory | None = None, carrier: NodeId | None = None,
                   prev_pos=None, prev_node: NodeId | None = None) -> NodeId | None:
    """GPSR restricted to neighbors with trust weight at least ``threshold``."""
    if threshold not in (0.5, 1.0):
        raise ValueError(f"threshold must be 0.5 or 1.0, got {threshold}")
    h = history if history is not None else TrustHistory()
    trusted = [nb for nb in snapshot
               if trust_weight(h, social, src, dst, nb.node, True, carrier=carrier).weight >= threshold]
    return gpsr_next_hop(self_pos, dst_pos, trusted, prev_pos=prev_pos, prev_node=prev_node)


def gtlr_next_hop(self_pos, dst_pos, snapshot: NeighborSnapshot, load_weight: float = 10.0) -> NodeId | None:
    """Closer neighbor minimising distance-to-destination plus weighted queue load."""
    if load_weight < 0:
        raise ValueError("load_weight must be non-negative")
    d_self = distance(self_pos, dst_pos)
    best, best_cost = None, None
    for nb in sorted(snapshot, key=lambda nb: nb.node):
        d = distance(nb.pos, dst_pos)
        if d >= d_self:
            continue
        cost = d + load_weight * nb.queue_load
        if best is None or cost < best_cost:
            best, best_cost = nb.node, cost
    return best
