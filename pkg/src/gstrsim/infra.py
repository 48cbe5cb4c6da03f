"""Base stations, cell membership, home-cell handoff and the cloud store."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .mobility import Position, VehicleState, distance
from .social import NodeId, SocialGraph, connected_candidates

log = logging.getLogger(__name__)

KEEP = "keep"
RETURN_TO_HOME = "return_to_home"


@dataclass(frozen=True)
class BaseStation:
    bs_id: int
    center: Position
    cell_radius: float


def grid_stations(width: float, height: float, rows: int = 3, cols: int = 3) -> list[BaseStation]:
    """Regular ``rows x cols`` layout, each station centred in its tile."""
    dx, dy = width / cols, height / rows
    radius = 0.5 * (dx * dx + dy * dy) ** 0.5
    out = []
    for r in range(rows):
        for c in range(cols):
            out.append(BaseStation(r * cols + c, Position((c + 0.5) * dx, (r + 0.5) * dy), radius))
    return out


def cell_of(stations: Iterable[BaseStation], p) -> int:
    best, best_d = None, None
    for bs in stations:
        d = distance(bs.center, p)
        if best is None or d < best_d or (d == best_d and bs.bs_id < best.bs_id):
            best, best_d = bs, d
    if best is None:
        raise ValueError("no base stations configured")
    return best.bs_id


def handoff_check(carrier: VehicleState, msg, home_bs: int, stations) -> str:
    return KEEP if cell_of(stations, carrier.pos) == home_bs else RETURN_TO_HOME


@dataclass
class CloudEntry:
    msg: object
    home_bs: int
    stored_at: float


@dataclass
class CloudStore:
    entries: dict[int, CloudEntry] = field(default_factory=dict)
    dropped: list[int] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def __contains__(self, msg_id) -> bool:
        return msg_id in self.entries

    def __len__(self) -> int:
        return len(self.entries)


def cloud_put(store: CloudStore, msg, home_bs: int, t: float) -> CloudStore:
    if msg.msg_id in store.entries:
        text = f"duplicate cloud_put for message {msg.msg_id} ignored"
        log.warning(text)
        store.warnings.append(text)
        return store
    msg.via_cloud = True
    store.entries[msg.msg_id] = CloudEntry(msg, home_bs, t)
    return store


def purge_expired(store: CloudStore, t: float) -> list[int]:
    gone = [mid for mid, e in store.entries.items() if t - e.msg.created_at > e.msg.ttl]
    for mid in gone:
        del store.entries[mid]
    store.dropped.extend(gone)
    return gone


SelectFn = Callable[[object, set], "NodeId | None"]


def cloud_poll(
    store: CloudStore,
    bs: int,
    nodes_in_cell: Iterable[tuple[NodeId, Position]],
    social: SocialGraph,
    t: float,
    select: SelectFn | None = None,
) -> list[tuple[int, NodeId]]:
    """Hand stored messages of station ``bs`` to the receiver or a connected node.

    Delivered entries leave the store. ``select`` picks among the connected
    candidates present in the cell (it may decline by returning None); the
    default takes the smallest eligible id. Vehicles that already relayed the
    message are never eligible again.
    """
    purge_expired(store, t)
    present = [nid for nid, _ in nodes_in_cell]
    present_set = set(present)
    out = []
    for mid in sorted(store.entries):
        entry = store.entries[mid]
        if entry.home_bs != bs:
            continue
        msg = entry.msg
        if msg.dst in present_set:
            out.append((mid, msg.dst))
            continue
        used = set(msg.hop_trace) | {msg.src}
        cands = connected_candidates(social, msg.src, msg.dst, (v for v in present if v not in used))
        cands.discard(msg.dst)
        if not cands:
            continue
        to = select(msg, cands) if select is not None else min(cands)
        if to is not None:
            out.append((mid, to))
    for mid, _ in out:
        del store.entries[mid]
    return out
